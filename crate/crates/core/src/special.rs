//! Analytic ingredients of the discounted normal predictor: the half-Gaussian
//! error integral, the confidence function and its saturation threshold, and
//! the potential `Φ(x) = ∫₀ˣ g(s) ds`.

use std::f64::consts::{E, FRAC_PI_2, SQRT_2};

use crate::error::{invalid, Error, Result};

/// `∫₀ˣ e^{−s²/2} ds`, evaluated as `√(π/2)·erf(x/√2)`.
pub fn erf_halfgauss(x: f64) -> f64 {
    FRAC_PI_2.sqrt() * libm::erf(x / SQRT_2)
}

/// Window `n` and scale `Z` of the confidence function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams {
    n: f64,
    z: f64,
}

impl ConfidenceParams {
    pub fn new(n: f64, z: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("n", format!("must be positive, got {n}")));
        }
        if !(z > 0.0 && z <= 1.0 / E) {
            return Err(invalid("Z", format!("must lie in (0, 1/e], got {z}")));
        }
        Ok(Self { n, z })
    }

    /// Parameters for discount `ρ`, i.e. `n = 1/(1 − ρ)`.
    pub fn from_discount(rho: f64, z: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(invalid("rho", format!("must lie in (0, 1), got {rho}")));
        }
        Self::new(1.0 / (1.0 - rho), z)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// `ρ = 1 − 1/n`.
    pub fn rho(&self) -> f64 {
        1.0 - 1.0 / self.n
    }

    /// `√(16 n log(1/Z))`, the closed-form upper bound on the threshold.
    pub fn threshold_upper_bound(&self) -> f64 {
        (16.0 * self.n * (1.0 / self.z).ln()).sqrt()
    }

    /// Whether `n ≥ max{8e, 16 log(1/Z)}` (with `Z ≤ 1/e` already enforced).
    pub fn in_guarantee_regime(&self) -> bool {
        self.n >= (8.0 * E).max(16.0 * (1.0 / self.z).ln())
    }
}

/// Unclipped confidence `√(n/8)·Z·E(x/√(8n))·e^{x²/(16n)}`.
///
/// Overflows to `±∞` once `x²/(16n)` exceeds the `f64` exponent range.
pub fn g_tilde(x: f64, p: &ConfidenceParams) -> f64 {
    let n = p.n;
    (n / 8.0).sqrt() * p.z * erf_halfgauss(x / (8.0 * n).sqrt()) * (x * x / (16.0 * n)).exp()
}

/// Confidence `g(x) = Π_[0,1] g̃(x)`.
pub fn g(x: f64, p: &ConfidenceParams) -> f64 {
    let v = g_tilde(x, p);
    if v.is_nan() {
        return 0.0;
    }
    v.clamp(0.0, 1.0)
}

/// The saturation threshold `U(n) = g̃⁻¹(1)`.
///
/// Bisection on `[0, √(16 n log(1/Z)) + 1]`. The returned value is the upper end
/// of the final bracket, so `g(U) = 1` exactly and `g(x) = 1` for all `x ≥ U`.
pub fn threshold_u(p: &ConfidenceParams) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = p.threshold_upper_bound() + 1.0;
    let top = g_tilde(hi, p);
    if top < 1.0 {
        return Err(Error::BracketFailure { upper: hi, value: top });
    }
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g_tilde(mid, p) >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

const PHI_TOL: f64 = 1e-11;

/// Confidence function with its threshold and `∫₀^U g` cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    params: ConfidenceParams,
    threshold: f64,
    mass_below_threshold: f64,
}

impl Confidence {
    pub fn new(params: ConfidenceParams) -> Result<Self> {
        let threshold = threshold_u(&params)?;
        let mass_below_threshold = adaptive_simpson(&|s| g(s, &params), 0.0, threshold, PHI_TOL);
        Ok(Self {
            params,
            threshold,
            mass_below_threshold,
        })
    }

    pub fn params(&self) -> &ConfidenceParams {
        &self.params
    }

    /// Cached `U(n)`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn value(&self, x: f64) -> f64 {
        if x >= self.threshold {
            1.0
        } else if x <= 0.0 {
            0.0
        } else {
            g(x, &self.params)
        }
    }

    /// `Φ(x) = ∫₀ˣ g(s) ds`; zero for `x ≤ 0` and unit slope beyond `U`.
    pub fn potential(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.threshold {
            self.mass_below_threshold + (x - self.threshold)
        } else {
            adaptive_simpson(&|s| g(s, &self.params), 0.0, x, PHI_TOL)
        }
    }

    /// `∫ₐᵇ g(s) ds = Φ(b) − Φ(a)`, integrating only the smooth part numerically.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        let u = self.threshold;
        let lo = a.max(0.0);
        let hi = b.min(u);
        let smooth = if hi > lo {
            adaptive_simpson(&|s| g(s, &self.params), lo, hi, PHI_TOL)
        } else {
            0.0
        };
        let saturated = (b - a.max(u)).max(0.0);
        smooth + saturated
    }
}

/// `Φ(x)` for one-off evaluations; prefer [`Confidence::potential`] in loops.
pub fn potential_phi(x: f64, p: &ConfidenceParams) -> Result<f64> {
    Ok(Confidence::new(*p)?.potential(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Composite Simpson with a fixed, fine step; independent of `libm::erf`.
    fn halfgauss_oracle(x: f64) -> f64 {
        let steps = 20_000;
        let h = x / steps as f64;
        let f = |s: f64| (-s * s / 2.0).exp();
        let mut acc = f(0.0) + f(x);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn erf_halfgauss_values() {
        assert_eq!(erf_halfgauss(0.0), 0.0);
        // √(π/2) = 1.2533141373155...
        assert!((erf_halfgauss(10.0) - 1.253_314_137_315_5).abs() < 1e-12);
        assert!((halfgauss_oracle(10.0) - (PI / 2.0).sqrt()).abs() < 1e-12);
        for i in 0..=1000 {
            let x = -10.0 + 0.02 * i as f64;
            assert!((erf_halfgauss(x) - halfgauss_oracle(x)).abs() <= 1e-10, "x = {x}");
            assert_eq!(erf_halfgauss(-x), -erf_halfgauss(x));
        }
    }

    #[test]
    fn params_validation() {
        assert!(ConfidenceParams::new(0.0, 0.1).is_err());
        assert!(ConfidenceParams::new(10.0, 0.5).is_err());
        assert!(ConfidenceParams::new(10.0, 1.0 / E).is_ok());
        assert!(ConfidenceParams::from_discount(1.0, 0.1).is_err());
        let p = ConfidenceParams::from_discount(0.75, 0.1).unwrap();
        assert!((p.n() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn g_tilde_shape() {
        let p = ConfidenceParams::new(256.0, 1.0 / 1024.0).unwrap();
        assert_eq!(g_tilde(0.0, &p), 0.0);
        let mut prev = 0.0;
        for i in 1..2000 {
            let x = 0.05 * i as f64;
            let v = g_tilde(x, &p);
            assert!(v > prev, "not increasing at {x}");
            assert_eq!(g_tilde(-x, &p), -v);
            prev = v;
        }
        assert!(g_tilde(1e4, &p).is_infinite());
    }

    #[test]
    fn g_at_four_root_n_below_bound() {
        // √π/(4√2)·e ≈ 0.8517 bounds g(4√n) whenever Z = 1/T and n ≤ T.
        let bound = PI.sqrt() / (4.0 * SQRT_2) * E;
        assert!((bound - 0.8517).abs() < 1e-4);
        for (n, t) in [(32.0, 32.0), (64.0, 1000.0), (1024.0, 1024.0), (512.0, 8192.0)] {
            let p = ConfidenceParams::new(n, 1.0 / t).unwrap();
            let v = g(4.0 * n.sqrt(), &p);
            assert!(v <= bound && v < 1.0, "n={n}, T={t}: {v}");
        }
    }

    #[test]
    fn g_clamps() {
        let p = ConfidenceParams::new(64.0, 1.0 / 1024.0).unwrap();
        assert_eq!(g(-5.0, &p), 0.0);
        let u = threshold_u(&p).unwrap();
        assert_eq!(g(u, &p), 1.0);
        assert_eq!(g(u + 3.0, &p), 1.0);
        assert_eq!(g(1e6, &p), 1.0);
        assert_eq!(g(-1e6, &p), 0.0);
    }

    #[test]
    fn threshold_examples() {
        let p = ConfidenceParams::new(1024.0, 1.0 / 8192.0).unwrap();
        let u = threshold_u(&p).unwrap();
        assert!(u <= p.threshold_upper_bound());
        assert!((p.threshold_upper_bound() - 384.3).abs() < 0.1);
        assert!((g_tilde(u, &p) - 1.0).abs() <= 1e-9);

        for t in [32.0, 100.0, 4096.0] {
            let p = ConfidenceParams::new(32.0, 1.0 / t).unwrap();
            let u = threshold_u(&p).unwrap();
            assert!(u >= 4.0 * 32f64.sqrt() && u >= 22.0);
        }
    }

    #[test]
    fn bracket_failure_reported() {
        // A unit window violates the regime; g̃(5) ≈ 0.718 at the bracket end.
        let p = ConfidenceParams::new(1.0, 1.0 / E).unwrap();
        assert!(matches!(threshold_u(&p), Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn potential_examples() {
        let p = ConfidenceParams::new(256.0, 1.0 / 1024.0).unwrap();
        let c = Confidence::new(p).unwrap();
        let u = c.threshold();
        assert_eq!(c.potential(-1.0), 0.0);
        assert!((c.potential(u + 1.0) - c.potential(u) - 1.0).abs() < 1e-12);
        assert_eq!(potential_phi(-1.0, &p).unwrap(), 0.0);
        for (a, b) in [(-3.0, 2.0), (5.0, u + 2.0), (u + 1.0, u + 4.0), (7.0, 3.0)] {
            let direct = c.potential(b) - c.potential(a);
            assert!((c.integral(a, b) - direct).abs() < 1e-10, "[{a}, {b}]");
        }

        // Fixed-step trapezoid oracle on a fine grid.
        let oracle = |x: f64| {
            let steps = 200_000;
            let h = x / steps as f64;
            let mut acc = 0.5 * (g(0.0, &p) + g(x, &p));
            for i in 1..steps {
                acc += g(i as f64 * h, &p);
            }
            acc * h
        };
        for x in [1.0, 10.0, u / 2.0, u - 0.5, u + 0.7] {
            assert!((c.potential(x) - oracle(x)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn convexity_and_geometric_check() {
        for (n, z) in [(64.0, 1.0 / 1024.0), (256.0, 1.0 / 4096.0), (1024.0, 1.0 / 8192.0)] {
            let p = ConfidenceParams::new(n, z).unwrap();
            let u = threshold_u(&p).unwrap();
            let h = u / 1000.0;
            for i in 1..999 {
                let x = i as f64 * h;
                let second = g(x - h, &p) - 2.0 * g(x, &p) + g(x + h, &p);
                assert!(second >= -1e-8, "n={n} x={x}");
            }
        }
        for (n, t) in [(32.0, 32.0), (32.0, 8192.0), (512.0, 8192.0), (256.0, 1024.0)] {
            let p = ConfidenceParams::new(n, 1.0 / t).unwrap();
            let u = threshold_u(&p).unwrap();
            let c = u - 8.0;
            assert!(c - u * g(c, &p) >= 1.0);
        }
    }

    #[test]
    fn simpson_integrates_polynomials() {
        let v = adaptive_simpson(&|x| x * x * x - x, 0.0, 2.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
