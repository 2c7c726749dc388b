//! The distribution of the time to sale `T_t`.
//!
//! With `t` time units available, the sale happens at `T_t <= t`; the law
//! has a continuous part `H_t(r) = 1 - phi(mu(t)) / phi(mu(t - r))` on
//! `[0, t)` and an atom of mass `phi(mu(t)) / phi(mu0)` at `r = t` (no sale
//! before the deadline). `T_t` depends on the residual distribution only
//! through `mu0`, so everything here is a function of the policy curve
//! alone. `that_*` variants describe the used fraction `T_t / t`.

use crate::dist::Family;
use crate::numeric::integrate_graded_right;
use crate::policy::PolicyCurve;

/// `H_t(r) = P(T_t <= r)` (right-continuous; the atom at `r = t` is
/// included for `r >= t`, and reported separately by [`atom_prob`]).
pub fn stop_cdf(curve: &PolicyCurve, t: f64, r: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if r < 0.0 {
        return 0.0;
    }
    if r >= t {
        return 1.0;
    }
    1.0 - curve.offer().phi(curve.mu(t)) / curve.offer().phi(curve.mu(t - r))
}

/// `P(T_t = t) = phi(mu(t)) / phi(mu0)`: the probability that no acceptable
/// offer arrives in time.
pub fn atom_prob(curve: &PolicyCurve, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    curve.offer().phi(curve.mu(t)) / curve.offer().phi(curve.mu0())
}

/// `E[T_t] = phi(mu(t)) / lambda * integral of 1/phi^2 over [mu0, mu(t)]`.
/// Closed form whenever the policy curve is.
pub fn stop_mean(curve: &PolicyCurve, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t <= 0.0 {
        return 0.0;
    }
    let m = curve.mu(t);
    curve.offer().phi(m) * curve.inv_phi_sq_integral(m) / curve.lambda()
}

/// `Var[T_t]`; fully simplified forms for the worked families, iterated
/// quadrature in threshold space otherwise.
pub fn stop_var(curve: &PolicyCurve, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t <= 0.0 {
        return 0.0;
    }
    let lambda = curve.lambda();
    let z = lambda * t;
    let mu0 = curve.mu0();
    match *curve.offer().family() {
        Family::Uniform { a, b } if mu0 >= a => {
            let k = 2.0 * (b - a) / (b - mu0);
            let num = z.powi(3) * (z.powi(3) + 6.0 * k * z * z + 15.0 * k * k * z + 12.0 * k.powi(3));
            num / (18.0 * lambda * lambda * (z + k).powi(4))
        }
        Family::Exponential { eta } => {
            let e0 = (mu0 / eta).exp();
            z.powi(3) * (z + 4.0 * e0) / (12.0 * lambda * lambda * (z + e0) * (z + e0))
        }
        Family::Pareto { xm, alpha } if mu0 >= xm => {
            let c = alpha / (alpha - 1.0) * (xm / mu0).powf(alpha);
            let q = c * z + 1.0;
            let am1 = alpha - 1.0;
            let ratio = (mu0 / xm).powf(2.0 * alpha);
            let qa3 = q.powf(1.0 / alpha - 3.0);
            let inner = 2.0 * ((1.0 - qa3) / (3.0 * alpha - 1.0) - (q - 1.0) * qa3 / alpha)
                - (1.0 - q.powf(1.0 / alpha - 2.0)).powi(2) / (2.0 * alpha - 1.0);
            am1 * am1 / (2.0 * alpha - 1.0) * ratio * q * q * inner / (lambda * lambda)
        }
        _ => stop_var_quadrature(curve, t),
    }
}

/// `Var[T_t]` via `E[T_t^2] = 2 phi(mu(t))/lambda^2 * integral of
/// J(u)/phi(u) over [mu0, mu(t)]` with `J` the inverse-square kernel;
/// the generic route the closed forms are validated against.
pub fn stop_var_quadrature(curve: &PolicyCurve, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let offer = curve.offer();
    let m = curve.mu(t);
    let mu0 = curve.mu0();
    let lambda = curve.lambda();
    let integrand = |u: f64| curve.inv_phi_sq_integral(u) / offer.phi(u);
    let outer = integrate_graded_right(&integrand, mu0, m, 1e-9, 1e-300);
    let second = 2.0 * offer.phi(m) * outer / (lambda * lambda);
    let mean = stop_mean(curve, t);
    (second - mean * mean).max(0.0)
}

/// CDF of the used fraction `T_t / t`: `H_t(s t)` for `s < 1`, `1` beyond.
pub fn that_cdf(curve: &PolicyCurve, t: f64, s: f64) -> f64 {
    debug_assert!(t > 0.0);
    if s >= 1.0 {
        return 1.0;
    }
    stop_cdf(curve, t, s * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::OfferModel;
    use crate::numeric::integrate;

    const E: f64 = std::f64::consts::E;

    fn uniform13() -> PolicyCurve {
        PolicyCurve::new(OfferModel::uniform(1.0, 3.0).unwrap(), 2.0, 1.0).unwrap()
    }

    fn exp2() -> PolicyCurve {
        PolicyCurve::new(OfferModel::exponential(2.0).unwrap(), 2.0, 1.0).unwrap()
    }

    fn pareto3() -> PolicyCurve {
        PolicyCurve::new(OfferModel::pareto(1.0, 3.0).unwrap(), 1.5, 1.0).unwrap()
    }

    // Fully expanded per-family displays, used as independent oracles.
    fn uniform_cdf_display(k: f64, lambda: f64, t: f64, r: f64) -> f64 {
        if r >= t {
            1.0
        } else {
            1.0 - (1.0 - lambda * r / (lambda * t + k)).powi(2)
        }
    }

    fn exp_cdf_display(e0: f64, lambda: f64, t: f64, r: f64) -> f64 {
        if r >= t {
            1.0
        } else {
            lambda * r / (lambda * t + e0)
        }
    }

    fn pareto_cdf_display(c: f64, alpha: f64, lambda: f64, t: f64, r: f64) -> f64 {
        if r >= t {
            1.0
        } else {
            1.0 - (1.0 - c * lambda * r / (c * lambda * t + 1.0)).powf(1.0 - 1.0 / alpha)
        }
    }

    fn uniform_mean_display(k: f64, lambda: f64, t: f64) -> f64 {
        let z = lambda * t;
        (z + k - k.powi(3) / ((z + k) * (z + k))) / (3.0 * lambda)
    }

    fn pareto_mean_display(mu0: f64, xm: f64, alpha: f64, lambda: f64, t: f64) -> f64 {
        let c = alpha / (alpha - 1.0) * (xm / mu0).powf(alpha);
        let q = c * lambda * t + 1.0;
        (alpha - 1.0) / (lambda * (2.0 * alpha - 1.0))
            * (mu0 / xm).powf(alpha)
            * q
            * (1.0 - q.powf(1.0 / alpha - 2.0))
    }

    #[test]
    fn cdf_examples() {
        let c = uniform13();
        assert_eq!(stop_cdf(&c, 4.0, 0.0), 0.0);
        assert_eq!(stop_cdf(&c, 4.0, -1.0), 0.0);
        assert_eq!(stop_cdf(&c, 4.0, 4.0), 1.0);
        assert!((stop_cdf(&c, 4.0, 2.0) - 0.4375).abs() < 1e-14);
        let e = exp2();
        assert!((stop_cdf(&e, 10.0, 5.0) - 5.0 / (10.0 + E)).abs() < 1e-14);
    }

    #[test]
    fn cdf_matches_family_displays() {
        let cases: Vec<(PolicyCurve, Box<dyn Fn(f64, f64) -> f64>)> = vec![
            (uniform13(), Box::new(|t, r| uniform_cdf_display(4.0, 1.0, t, r))),
            (exp2(), Box::new(|t, r| exp_cdf_display(E, 1.0, t, r))),
            (
                pareto3(),
                Box::new(|t, r| pareto_cdf_display(4.0 / 9.0, 3.0, 1.0, t, r)),
            ),
        ];
        for (curve, display) in &cases {
            for &t in &[1.0, 4.0, 10.0, 30.0] {
                for i in 0..=40 {
                    let r = t * i as f64 / 40.0;
                    let got = stop_cdf(curve, t, r);
                    let want = display(t, r);
                    assert!(
                        (got - want).abs() < 1e-12,
                        "{} t={t} r={r}: {got} vs {want}",
                        curve.offer().label()
                    );
                }
            }
        }
    }

    #[test]
    fn atom_examples() {
        assert_eq!(atom_prob(&uniform13(), 0.0), 1.0);
        assert!((atom_prob(&uniform13(), 4.0) - 0.25).abs() < 1e-14);
        assert!((atom_prob(&exp2(), 10.0) - E / (10.0 + E)).abs() < 1e-14);
    }

    #[test]
    fn continuous_part_plus_atom_is_one() {
        for curve in [uniform13(), exp2(), pareto3()] {
            for &t in &[0.5, 2.0, 4.0, 10.0, 50.0] {
                let near_deadline = stop_cdf(&curve, t, t * (1.0 - 1e-12));
                let total = near_deadline + atom_prob(&curve, t);
                assert!(
                    (total - 1.0).abs() < 1e-10,
                    "{} t={t}: H(t-) + atom = {total}",
                    curve.offer().label()
                );
            }
        }
    }

    #[test]
    fn mean_examples() {
        assert_eq!(stop_mean(&uniform13(), 0.0), 0.0);
        assert!((stop_mean(&uniform13(), 4.0) - 7.0 / 3.0).abs() < 1e-14);
        let want = 5.0 * (1.0 + E / (10.0 + E));
        assert!((stop_mean(&exp2(), 10.0) - want).abs() < 1e-12);
    }

    #[test]
    fn mean_matches_family_displays() {
        for &t in &[1.0, 4.0, 20.0] {
            assert!(
                (stop_mean(&uniform13(), t) - uniform_mean_display(4.0, 1.0, t)).abs() < 1e-12
            );
            let e0: f64 = E;
            let want = 0.5 * t * (1.0 + e0 / (t + e0));
            assert!((stop_mean(&exp2(), t) - want).abs() < 1e-12);
            assert!(
                (stop_mean(&pareto3(), t) - pareto_mean_display(1.5, 1.0, 3.0, 1.0, t)).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn mean_matches_tail_integral_of_cdf() {
        // E[T_t] = integral of P(T_t >= r) over [0, t]
        for curve in [uniform13(), exp2(), pareto3()] {
            for &t in &[2.0, 10.0] {
                let tail = |r: f64| 1.0 - stop_cdf(&curve, t, r);
                let want = integrate(&tail, 0.0, t, 1e-10, 1e-12);
                let got = stop_mean(&curve, t);
                assert!(
                    (got - want).abs() < 1e-6,
                    "{} t={t}: {got} vs integral {want}",
                    curve.offer().label()
                );
            }
        }
    }

    #[test]
    fn var_examples() {
        assert_eq!(stop_var(&uniform13(), 0.0), 0.0);
        // uniform display at z=4, k=4: 64 * 2176 / (18 * 4096) = 17/9
        assert!((stop_var(&uniform13(), 4.0) - 17.0 / 9.0).abs() < 1e-13);
        // exponential with mu0 = eta: 10^3 (10 + 4e) / (12 (10+e)^2),
        // independent of eta
        let want = 1e3 * (10.0 + 4.0 * E) / (12.0 * (10.0 + E) * (10.0 + E));
        assert!((stop_var(&exp2(), 10.0) - want).abs() < 1e-12);
        let exp_other = PolicyCurve::new(OfferModel::exponential(0.5).unwrap(), 0.5, 1.0).unwrap();
        assert!((stop_var(&exp_other, 10.0) - want).abs() < 1e-12);
    }

    #[test]
    fn var_closed_matches_quadrature() {
        for curve in [uniform13(), exp2(), pareto3()] {
            for &t in &[0.5, 2.0, 4.0, 10.0] {
                let closed = stop_var(&curve, t);
                let generic = stop_var_quadrature(&curve, t);
                assert!(
                    (closed - generic).abs() <= 1e-8 * closed.max(1e-12),
                    "{} t={t}: closed {closed} vs quad {generic}",
                    curve.offer().label()
                );
            }
        }
        // numeric-psi route reproduces the same values
        let numeric =
            PolicyCurve::new_numeric(OfferModel::uniform(1.0, 3.0).unwrap(), 2.0, 1.0).unwrap();
        for &t in &[2.0, 10.0] {
            let got = stop_var(&numeric, t);
            let want = stop_var(&uniform13(), t);
            assert!((got - want).abs() <= 1e-7 * want, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn var_matches_second_moment_identity() {
        // E[T^2] = 2 * integral of r (1 - H(r)) over [0, t]
        for curve in [uniform13(), exp2(), pareto3()] {
            for &t in &[2.0, 10.0] {
                let integrand = |r: f64| r * (1.0 - stop_cdf(&curve, t, r));
                let second = 2.0 * integrate(&integrand, 0.0, t, 1e-10, 1e-12);
                let mean = stop_mean(&curve, t);
                let want = second - mean * mean;
                let got = stop_var(&curve, t);
                assert!(
                    (got - want).abs() < 1e-6,
                    "{} t={t}: {got} vs identity {want}",
                    curve.offer().label()
                );
            }
        }
    }

    #[test]
    fn exponential_cdf_is_linear_in_r() {
        let c = exp2();
        let t = 10.0;
        let (r1, r2, r3) = (1.0, 4.5, 8.0);
        let (h1, h2, h3) = (stop_cdf(&c, t, r1), stop_cdf(&c, t, r2), stop_cdf(&c, t, r3));
        // three-point collinearity
        let interp = h1 + (h3 - h1) * (r2 - r1) / (r3 - r1);
        assert!((h2 - interp).abs() < 1e-12);
    }

    #[test]
    fn that_cdf_examples() {
        let c = exp2();
        assert_eq!(that_cdf(&c, 10.0, 0.0), 0.0);
        assert!((that_cdf(&c, 10.0, 0.5) - 5.0 / (10.0 + E)).abs() < 1e-14);
        let near_one = that_cdf(&c, 10.0, 1.0 - 1e-12);
        assert!((near_one - (1.0 - atom_prob(&c, 10.0))).abs() < 1e-10);
        assert_eq!(that_cdf(&c, 10.0, 1.5), 1.0);
    }

    #[test]
    fn low_salvage_uniform_goes_through_quadrature() {
        let c = PolicyCurve::new(OfferModel::uniform(1.0, 3.0).unwrap(), 0.5, 1.0).unwrap();
        for &t in &[1.0, 5.0] {
            let mean = stop_mean(&c, t);
            let tail = |r: f64| 1.0 - stop_cdf(&c, t, r);
            let want = integrate(&tail, 0.0, t, 1e-10, 1e-12);
            assert!((mean - want).abs() < 1e-6);
            let v = stop_var(&c, t);
            assert!(v > 0.0 && v < t * t);
        }
    }
}
