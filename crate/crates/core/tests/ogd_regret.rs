mod common;

use common::{report, unit_spec, KINDS};
use discounted_oco::{make_loss_sequence, run_ogd, BoundInputs, BoundKind, GeneratorKind};

fn run(kind: GeneratorKind, horizon: usize, dim: usize, seed: u64, lambda: f64) -> discounted_oco::RegretReport {
    let mut seq = make_loss_sequence(&unit_spec(kind, horizon, dim, seed)).unwrap();
    let start = seq.domain().center().to_vec();
    let decisions = run_ogd(lambda, &mut seq, start).unwrap();
    for w in &decisions {
        assert!(seq.domain().contains(w, 1e-12));
    }
    report(
        BoundKind::Thm1,
        &BoundInputs::ogd(seq.bounds(), lambda),
        &decisions,
        &seq,
        horizon,
    )
}

#[test]
fn constant_step_bound_on_every_generator() {
    for kind in KINDS {
        for dim in [1, 3] {
            for lambda in [0.9, 0.99, 0.999] {
                for seed in 0..4 {
                    let r = run(kind, 2000, dim, seed, lambda);
                    assert!(r.pass, "{kind} d={dim} lambda={lambda} seed={seed}: {r:?}");
                }
            }
        }
    }
}

#[test]
fn same_bound_for_every_horizon() {
    for horizon in [500, 2000, 8000] {
        for lambda in [0.9, 0.99, 0.999] {
            for kind in KINDS {
                let r = run(kind, horizon, 2, 11, lambda);
                assert!(r.pass, "{kind} T={horizon} lambda={lambda}: {r:?}");
            }
        }
    }
}

#[test]
fn bound_holds_at_every_checked_prefix() {
    let lambda = 0.99;
    let mut seq = make_loss_sequence(&unit_spec(GeneratorKind::PiecewiseStationaryAbsolute, 2000, 1, 3)).unwrap();
    let decisions = run_ogd(lambda, &mut seq, vec![0.0]).unwrap();
    let inputs = BoundInputs::ogd(seq.bounds(), lambda);
    for h in (100..=2000).step_by(100) {
        let r = report(BoundKind::Thm1, &inputs, &decisions, &seq, h);
        assert!(r.pass, "prefix {h}: {r:?}");
    }
}

#[test]
fn adversary_forces_positive_regret() {
    // The adversary always opposes the last move, so regret is not trivially negative.
    let r = run(GeneratorKind::AdversarialWorstCase, 2000, 1, 0, 0.99);
    assert!(r.regret > 0.0, "{r:?}");
    assert!(r.pass);
}

#[test]
fn replay_is_deterministic() {
    let a = run(GeneratorKind::DriftingLinear, 1000, 4, 21, 0.99);
    let b = run(GeneratorKind::DriftingLinear, 1000, 4, 21, 0.99);
    assert_eq!(a, b);
}
