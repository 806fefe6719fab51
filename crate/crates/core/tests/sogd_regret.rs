mod common;

use common::{report, unit_spec, KINDS};
use discounted_oco::commands::sampled_lambdas;
use discounted_oco::{make_loss_sequence, run_sogd, BoundInputs, BoundKind, GeneratorKind};

#[test]
fn grid_points_at_every_checked_prefix() {
    let (horizon, tau) = (2048, 256);
    let z = 1.0 / horizon as f64;
    for kind in KINDS {
        for (dim, seed) in [(1, 0), (3, 1)] {
            let mut seq = make_loss_sequence(&unit_spec(kind, horizon, dim, seed)).unwrap();
            let run = run_sogd(tau, z, &mut seq).unwrap();
            assert!(run.regime_ok);
            let decisions = run.decisions();
            for &lambda in &run.grid.lambdas {
                let inputs = BoundInputs::sogd(seq.bounds(), lambda, z, run.grid.n);
                for h in [horizon / 8, horizon / 4, horizon / 2, 3 * horizon / 4, horizon] {
                    let r = report(BoundKind::Eq29Grid, &inputs, &decisions, &seq, h);
                    assert!(r.pass, "{kind} d={dim} lambda={lambda} prefix={h}: {r:?}");
                }
            }
        }
    }
}

#[test]
fn uniform_bound_on_sampled_discounts() {
    let (horizon, tau) = (4096, 512);
    let z = 1.0 / horizon as f64;
    for kind in KINDS {
        let mut seq = make_loss_sequence(&unit_spec(kind, horizon, 2, 5)).unwrap();
        let run = run_sogd(tau, z, &mut seq).unwrap();
        let decisions = run.decisions();
        for lambda in sampled_lambdas(&run.grid, 20, 5) {
            let inputs = BoundInputs::sogd(seq.bounds(), lambda, z, run.grid.n);
            let r = report(BoundKind::Thm3Uniform, &inputs, &decisions, &seq, horizon);
            assert!(r.pass, "{kind} lambda={lambda}: {r:?}");
        }
    }
}

#[test]
fn every_chain_point_is_feasible() {
    let mut seq = make_loss_sequence(&unit_spec(GeneratorKind::AdversarialWorstCase, 1024, 4, 3)).unwrap();
    let run = run_sogd(128, 1.0 / 1024.0, &mut seq).unwrap();
    for r in &run.rounds {
        for v in r.chain.iter().chain(&r.experts) {
            assert!(seq.domain().contains(v, 1e-12));
        }
        assert!(r.omegas.iter().all(|o| (0.0..=1.0).contains(o)));
    }
}

#[test]
fn grid_and_predictors_share_discounts() {
    let mut seq = make_loss_sequence(&unit_spec(GeneratorKind::DriftingLinear, 8192, 1, 0)).unwrap();
    let grid = discounted_oco::DiscountGrid::build(8192, 512).unwrap();
    let stack = discounted_oco::ExpertStack::new(grid.clone(), 1.0 / 8192.0, seq.domain(), seq.bounds()).unwrap();
    assert_eq!(grid.n, 4);
    for (c, &lambda) in stack.combiners().iter().zip(&grid.lambdas) {
        assert_eq!(c.predictor().rho(), lambda);
    }
    for (e, &lambda) in stack.experts().iter().zip(&grid.lambdas) {
        assert_eq!(e.eta(), discounted_oco::step_size_for(lambda, &seq.bounds()).unwrap());
    }
    let run = run_sogd(512, 1.0 / 8192.0, &mut seq).unwrap();
    assert!(run.regime_ok);
    assert_eq!(run.rounds.len(), 8192);
}
