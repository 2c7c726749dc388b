//! Large-`t` behavior: tail classification of the offer distribution and
//! the asymptotics it implies for `mu(t)`, `Var[S_t]`, and the normalized
//! time to sale `T_t / t`.
//!
//! Three tail regimes are distinguished by how `phi` decays:
//! - bounded edge: `M` finite and `phi(x) ~ c (M - x)^{p+1}` as `x -> M`,
//! - exponential tail: `phi(x) / integral of phi over [x, inf) -> c > 0`,
//! - power law: `x phi(x) / integral of phi over [x, inf) -> p`.
//!
//! In every case the normalized time-to-sale CDF converges to
//! `1 - (1 - s)^gamma` with a class-specific `gamma`. For the power-law
//! class only regular-variation exponents are asserted for `mu` and
//! `Var[S_t]` — no prefactor constants exist at this level of generality,
//! so value queries report [`Error::NotApplicable`] rather than a number.

use crate::dist::{Family, OfferModel, ResidualSpec};
use crate::numeric::integrate_graded_right;
use crate::policy::PolicyCurve;
use crate::{Error, Result};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

/// Tail regime with its defining constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailKind {
    /// Finite `M` with `phi(x) ~ c (M - x)^{p+1}`.
    BoundedEdge { p: f64, c: f64 },
    /// `phi(x) / integral of phi over [x, inf) -> c`.
    ExponentialTail { c: f64 },
    /// `x phi(x) / integral of phi over [x, inf) -> p`.
    PowerLaw { p: f64 },
}

/// A classified tail plus the exponent `gamma` of the limiting normalized
/// stopping-time CDF `1 - (1 - s)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailClass {
    pub kind: TailKind,
    pub gamma: f64,
}

/// A value-level asymptotic, or just a regular-variation exponent when no
/// constant is available (power-law class).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptotic {
    Value(f64),
    Exponent(f64),
}

impl Asymptotic {
    /// The asymptotic value; [`Error::NotApplicable`] when only an exponent
    /// is known.
    pub fn value(self) -> Result<f64> {
        match self {
            Asymptotic::Value(v) => Ok(v),
            Asymptotic::Exponent(_) => Err(Error::NotApplicable),
        }
    }

    pub fn exponent(self) -> Option<f64> {
        match self {
            Asymptotic::Exponent(e) => Some(e),
            Asymptotic::Value(_) => None,
        }
    }
}

/// Analytic tail class of a built-in family. Tabulated models have no
/// analytic class; probe them with [`rv_diagnostic`] instead.
pub fn classify_tail(model: &OfferModel) -> Result<TailClass> {
    let kind = match *model.family() {
        Family::Uniform { a, b } => TailKind::BoundedEdge { p: 1.0, c: 0.5 / (b - a) },
        Family::Beta { alpha, beta } => {
            let c = (ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta + 2.0)).exp();
            TailKind::BoundedEdge { p: beta, c }
        }
        Family::Exponential { eta } => TailKind::ExponentialTail { c: 1.0 / eta },
        Family::Gamma { scale, .. } => TailKind::ExponentialTail { c: 1.0 / scale },
        Family::Pareto { alpha, .. } => TailKind::PowerLaw { p: alpha - 2.0 },
        Family::Frechet { alpha } => TailKind::PowerLaw { p: alpha - 2.0 },
        Family::Tabulated(_) => return Err(Error::UnknownTail),
    };
    let gamma = match kind {
        TailKind::BoundedEdge { p, .. } => 1.0 + 1.0 / p,
        TailKind::ExponentialTail { .. } => 1.0,
        TailKind::PowerLaw { p } => (p + 1.0) / (p + 2.0),
    };
    Ok(TailClass { kind, gamma })
}

/// Leading-order `mu(t)` for large `t`:
/// bounded edge `M - (lambda p c)^{-1/p} t^{-1/p}`, exponential tail
/// `ln(t)/c`; for the power-law class only the exponent `1/(p+2)`.
pub fn mu_asymptotic(class: &TailClass, curve: &PolicyCurve, t: f64) -> Asymptotic {
    debug_assert!(t > 0.0);
    let lambda = curve.lambda();
    match class.kind {
        TailKind::BoundedEdge { p, c } => {
            let m = curve.offer().support_max();
            Asymptotic::Value(m - (lambda * p * c).powf(-1.0 / p) * t.powf(-1.0 / p))
        }
        TailKind::ExponentialTail { c } => Asymptotic::Value(t.ln() / c),
        TailKind::PowerLaw { p } => Asymptotic::Exponent(1.0 / (p + 2.0)),
    }
}

/// Leading-order `Var[S_t]` for large `t`. Bounded edge splits on `p`
/// (`p < 1`, `p = 1`, `p > 1`); exponential tails converge to the constant
/// `2/c^2`; the power-law class reports the exponent `2/(p+2)`.
pub fn var_asymptotic(
    class: &TailClass,
    curve: &PolicyCurve,
    residual: &ResidualSpec,
    t: f64,
) -> Result<Asymptotic> {
    debug_assert!(t > 0.0);
    let lambda = curve.lambda();
    Ok(match class.kind {
        TailKind::BoundedEdge { p, c } => {
            if p < 1.0 {
                let offer = curve.offer();
                let mu0 = curve.mu0();
                let m = offer.support_max();
                let bracket = (m - mu0) + residual.variance()? / offer.phi(mu0)
                    + integrate_graded_right(
                        &|w| {
                            let phi = offer.phi(w);
                            offer.var_excess(w).unwrap_or(0.0) / (phi * phi)
                        },
                        mu0,
                        m,
                        1e-8,
                        1e-12,
                    );
                let pref = (lambda * p).powf(-(p + 1.0) / p) * c.powf(-1.0 / p);
                Asymptotic::Value(pref * bracket * t.powf(-(p + 1.0) / p))
            } else if p == 1.0 {
                Asymptotic::Value(2.0 / (3.0 * lambda * lambda * c * c) * t.ln() / (t * t))
            } else {
                Asymptotic::Value(
                    2.0 / ((p - 1.0) * (p + 2.0))
                        * (lambda * p * c).powf(-2.0 / p)
                        * t.powf(-2.0 / p),
                )
            }
        }
        TailKind::ExponentialTail { c } => Asymptotic::Value(2.0 / (c * c)),
        TailKind::PowerLaw { p } => Asymptotic::Exponent(2.0 / (p + 2.0)),
    })
}

/// Limiting CDF of `T_t / t`: `1 - (1 - s)^gamma` below 1.
pub fn that_limit(class: &TailClass, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - s).powf(class.gamma)
    }
}

/// Mean and variance of the limiting normalized stopping time:
/// `(1/(gamma+1), gamma/((gamma+1)^2 (gamma+2)))`.
pub fn that_limit_moments(class: &TailClass) -> (f64, f64) {
    let g = class.gamma;
    (1.0 / (g + 1.0), g / ((g + 1.0) * (g + 1.0) * (g + 2.0)))
}

/// Result of the doubling diagnostic: `ratios[k] = log2(f(2^{k+1} t0) /
/// f(2^k t0))`, whose tail estimates the regular-variation exponent.
#[derive(Debug, Clone, Serialize)]
pub struct RvDiagnostic {
    pub ratios: Vec<f64>,
    pub exponent: f64,
}

/// Numeric regular-variation probe of a positive function.
pub fn rv_diagnostic<F: Fn(f64) -> f64>(f: F, t0: f64, doublings: usize) -> Result<RvDiagnostic> {
    if doublings == 0 {
        return Err(Error::Domain("need at least one doubling".into()));
    }
    let mut ratios = Vec::with_capacity(doublings);
    let mut t = t0;
    let mut prev = f(t);
    for _ in 0..doublings {
        if !(prev.is_finite() && prev > 0.0) {
            return Err(Error::NonPositiveValue { t });
        }
        let next = f(2.0 * t);
        if !(next.is_finite() && next > 0.0) {
            return Err(Error::NonPositiveValue { t: 2.0 * t });
        }
        ratios.push((next / prev).log2());
        t *= 2.0;
        prev = next;
    }
    let exponent = *ratios.last().unwrap();
    Ok(RvDiagnostic { ratios, exponent })
}

/// One entry of a tail report: a named statistic with its pass threshold.
#[derive(Debug, Clone, Serialize)]
pub struct TailCheck {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Machine-readable classification report for one policy curve.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub family: String,
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub gamma: f64,
    pub limit_mean: f64,
    pub limit_var: f64,
    pub checks: Vec<TailCheck>,
}

/// Classifies the curve's offer tail and runs finite-`t` diagnostics
/// against the class predictions.
pub fn tail_report(curve: &PolicyCurve) -> Result<TailReport> {
    let class = classify_tail(curve.offer())?;
    let (p, c, class_name) = match class.kind {
        TailKind::BoundedEdge { p, c } => (Some(p), Some(c), "bounded-edge"),
        TailKind::ExponentialTail { c } => (None, Some(c), "exponential-tail"),
        TailKind::PowerLaw { p } => (Some(p), None, "power-law"),
    };
    let mut checks = Vec::new();
    // mu' is regularly varying with index -gamma; probe it by doubling.
    let diag = rv_diagnostic(|t| curve.mu_prime(t), 1e3, 8)?;
    let dev = (diag.exponent + class.gamma).abs();
    checks.push(TailCheck {
        name: "mu_prime_rv_exponent_plus_gamma".into(),
        statistic: dev,
        threshold: 0.05,
        pass: dev <= 0.05,
    });
    match class.kind {
        TailKind::BoundedEdge { .. } => {
            // (M - mu(t)) over its predicted leading term -> 1
            let t = 1e6;
            let m = curve.offer().support_max();
            let lead = m - mu_asymptotic(&class, curve, t).value()?;
            let stat = ((m - curve.mu(t)) / lead - 1.0).abs();
            checks.push(TailCheck {
                name: "edge_gap_over_leading_term_minus_one".into(),
                statistic: stat,
                threshold: 0.02,
                pass: stat <= 0.02,
            });
        }
        TailKind::ExponentialTail { c } => {
            // Psi(x) phi(x) -> 1/c for this class, with correction O(1/(cx)):
            // probe 60 tail scales out, where the correction is under 2%.
            // (mu(t)/ln t itself converges only logarithmically for
            // non-exponential members like Gamma.)
            let x_star = curve.mu0() + 60.0 / c;
            let stat = (curve.psi(x_star)? * curve.offer().phi(x_star) * c - 1.0).abs();
            checks.push(TailCheck {
                name: "psi_times_phi_times_c_minus_one".into(),
                statistic: stat,
                threshold: 0.05,
                pass: stat <= 0.05,
            });
        }
        TailKind::PowerLaw { p } => {
            let diag = rv_diagnostic(|t| curve.mu(t), 1e3, 8)?;
            let stat = (diag.exponent - 1.0 / (p + 2.0)).abs();
            checks.push(TailCheck {
                name: "mu_rv_exponent_deviation".into(),
                statistic: stat,
                threshold: 0.02,
                pass: stat <= 0.02,
            });
        }
    }
    let (limit_mean, limit_var) = that_limit_moments(&class);
    Ok(TailReport {
        family: curve.offer().label(),
        class: class_name.into(),
        p,
        c,
        gamma: class.gamma,
        limit_mean,
        limit_var,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::price::price_var;
    use crate::stoptime::{stop_mean, stop_var, that_cdf};

    fn class_of(model: &OfferModel) -> TailClass {
        classify_tail(model).unwrap()
    }

    #[test]
    fn classify_examples() {
        let u = class_of(&OfferModel::uniform(0.0, 1.0).unwrap());
        assert_eq!(u.kind, TailKind::BoundedEdge { p: 1.0, c: 0.5 });
        assert_eq!(u.gamma, 2.0);

        let g = class_of(&OfferModel::gamma(2.0, 3.0).unwrap());
        assert!(matches!(g.kind, TailKind::ExponentialTail { c } if (c - 1.0/3.0).abs() < 1e-15));
        assert_eq!(g.gamma, 1.0);

        let p = class_of(&OfferModel::pareto(1.0, 3.0).unwrap());
        assert!(matches!(p.kind, TailKind::PowerLaw { p } if (p - 1.0).abs() < 1e-15));
        assert!((p.gamma - 2.0 / 3.0).abs() < 1e-15);

        // Pareto with alpha in (1, 2]: p <= 0 but gamma = (alpha-1)/alpha
        // still applies.
        let p15 = class_of(&OfferModel::pareto(1.0, 1.5).unwrap());
        assert!((p15.gamma - 1.0 / 3.0).abs() < 1e-15);

        let f = class_of(&OfferModel::frechet(2.5).unwrap());
        assert!(matches!(f.kind, TailKind::PowerLaw { p } if (p - 0.5).abs() < 1e-15));

        let tab = OfferModel::tabulated(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(matches!(classify_tail(&tab), Err(Error::UnknownTail)));
    }

    #[test]
    fn beta_edge_constant_from_gamma_ratio() {
        // Beta(2,2): phi(x) = x^3 - x + (1-x^4)/2 ~ (1-x)^3 as x -> 1,
        // so p = 2 and c = 1; the Gamma-ratio formula must agree.
        let b = class_of(&OfferModel::beta(2.0, 2.0).unwrap());
        match b.kind {
            TailKind::BoundedEdge { p, c } => {
                assert_eq!(p, 2.0);
                assert!((c - 1.0).abs() < 1e-12);
            }
            _ => panic!("expected bounded edge"),
        }
        // uniform(0,1) as Beta(1,1): c = 1/2
        let u = class_of(&OfferModel::beta(1.0, 1.0).unwrap());
        match u.kind {
            TailKind::BoundedEdge { p, c } => {
                assert_eq!(p, 1.0);
                assert!((c - 0.5).abs() < 1e-12);
            }
            _ => panic!("expected bounded edge"),
        }
        // numeric check of the defining limit for Beta(2,3)
        let model = OfferModel::beta(2.0, 3.0).unwrap();
        let cls = class_of(&model);
        if let TailKind::BoundedEdge { p, c } = cls.kind {
            let eps = 1e-4;
            let est = model.phi(1.0 - eps) / eps.powf(p + 1.0);
            assert!((est - c).abs() < 1e-3 * c, "est {est} vs c {c}");
        }
    }

    #[test]
    fn mu_asymptotic_examples() {
        let u = PolicyCurve::new(OfferModel::uniform(0.0, 1.0).unwrap(), 0.5, 1.0).unwrap();
        let cu = class_of(u.offer());
        let v = mu_asymptotic(&cu, &u, 100.0).value().unwrap();
        assert!((v - 0.98).abs() < 1e-12);
        // residual of the leading term decays faster than t^{-1/p}
        for &t in &[1e2, 1e3, 1e4] {
            let lead = mu_asymptotic(&cu, &u, t).value().unwrap();
            assert!((u.mu(t) - lead).abs() * t < 10.0, "t = {t}");
        }

        let e = PolicyCurve::new(OfferModel::exponential(2.0).unwrap(), 2.0, 1.0).unwrap();
        let ce = class_of(e.offer());
        let t = (10.0_f64).exp(); // e^10: leading order mu = 2 * 10 = 20
        let v = mu_asymptotic(&ce, &e, t).value().unwrap();
        assert!((v - 20.0).abs() < 1e-9);
        // mu(t) / ln(t) reaches 1/c within 2% by t = 1e6 for this family
        let big: f64 = 1e6;
        assert!((e.mu(big) * 0.5 / big.ln() - 1.0).abs() < 0.02);

        let p = PolicyCurve::new(OfferModel::pareto(1.0, 3.0).unwrap(), 1.5, 1.0).unwrap();
        let cp = class_of(p.offer());
        let asym = mu_asymptotic(&cp, &p, 100.0);
        assert!(matches!(asym.value(), Err(Error::NotApplicable)));
        assert!((asym.exponent().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn var_asymptotic_uniform_and_exponential() {
        let offer = OfferModel::uniform(0.0, 1.0).unwrap();
        let residual = ResidualSpec::same_as(&offer);
        let u = PolicyCurve::new(offer, 0.5, 1.0).unwrap();
        let cu = class_of(u.offer());
        let t: f64 = 1e8;
        let v = var_asymptotic(&cu, &u, &residual, t).unwrap().value().unwrap();
        assert!((v - 8.0 / 3.0 * t.ln() / (t * t)).abs() < 1e-20);
        // ratio against the exact closed form approaches 1 (p = 1 class)
        let exact = price_var(&u, &residual, t).unwrap();
        assert!((exact / v - 1.0).abs() < 0.05, "ratio {}", exact / v);

        let offer = OfferModel::exponential(2.0).unwrap();
        let residual = ResidualSpec::same_as(&offer);
        let e = PolicyCurve::new(offer, 2.0, 1.0).unwrap();
        let ce = class_of(e.offer());
        let v = var_asymptotic(&ce, &e, &residual, 1e6).unwrap().value().unwrap();
        assert_eq!(v, 8.0);
        let exact = price_var(&e, &residual, 1e6).unwrap();
        assert!((exact / v - 1.0).abs() < 0.02);

        let offer = OfferModel::pareto(1.0, 3.0).unwrap();
        let residual = ResidualSpec::same_as(&offer);
        let p = PolicyCurve::new(offer, 1.5, 1.0).unwrap();
        let cp = class_of(p.offer());
        let asym = var_asymptotic(&cp, &p, &residual, 100.0).unwrap();
        assert!((asym.exponent().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn var_asymptotic_bounded_edge_p_above_one() {
        // Beta(2,2): p = 2, c = 1, so Var[S_t] ~ (1/2) (2 lambda t)^{-1}.
        let offer = OfferModel::beta(2.0, 2.0).unwrap();
        let residual = ResidualSpec::same_as(&offer);
        let curve = PolicyCurve::new(offer, 0.5, 1.0).unwrap();
        let cls = class_of(curve.offer());
        let t = 1e4;
        let lead = var_asymptotic(&cls, &curve, &residual, t).unwrap().value().unwrap();
        assert!((lead - 0.5 / (2.0 * t)).abs() < 1e-15);
        let exact = crate::price::price_var_quadrature(&curve, &residual, t).unwrap();
        assert!((exact / lead - 1.0).abs() < 0.1, "ratio {}", exact / lead);
    }

    #[test]
    fn that_limit_examples() {
        let u = class_of(&OfferModel::uniform(0.0, 1.0).unwrap());
        assert!((that_limit(&u, 0.5) - 0.75).abs() < 1e-15);
        let e = class_of(&OfferModel::exponential(1.0).unwrap());
        assert!((that_limit(&e, 0.5) - 0.5).abs() < 1e-15);
        let p = class_of(&OfferModel::pareto(1.0, 1.5).unwrap());
        assert!((that_limit(&p, 0.488) - 0.2).abs() < 1e-12);
        assert_eq!(that_limit(&u, 1.5), 1.0);
        assert_eq!(that_limit(&u, -0.5), 0.0);
    }

    #[test]
    fn that_limit_moment_examples() {
        let u = class_of(&OfferModel::uniform(0.0, 1.0).unwrap());
        let (m, v) = that_limit_moments(&u);
        assert!((m - 1.0 / 3.0).abs() < 1e-15);
        assert!((v - 1.0 / 18.0).abs() < 1e-15);
        let e = class_of(&OfferModel::exponential(1.0).unwrap());
        let (m, v) = that_limit_moments(&e);
        assert!((m - 0.5).abs() < 1e-15);
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
        // Pareto alpha = 3: gamma = 2/3, moments (3/5, 9/100); the same
        // values come out of the alpha-level formulas
        // alpha/(2 alpha - 1) and alpha^2 (alpha-1) / ((2a-1)^2 (3a-1)).
        let p = class_of(&OfferModel::pareto(1.0, 3.0).unwrap());
        let (m, v) = that_limit_moments(&p);
        assert!((m - 0.6).abs() < 1e-15);
        assert!((v - 0.09).abs() < 1e-15);
        assert!((m - 3.0 / (2.0 * 3.0 - 1.0)).abs() < 1e-15);
        assert!((v - 9.0 * 2.0 / (25.0 * 8.0)).abs() < 1e-15);
    }

    #[test]
    fn that_cdf_converges_to_limit() {
        let curves = [
            PolicyCurve::new(OfferModel::uniform(1.0, 3.0).unwrap(), 2.0, 1.0).unwrap(),
            PolicyCurve::new(OfferModel::exponential(2.0).unwrap(), 2.0, 1.0).unwrap(),
            PolicyCurve::new(OfferModel::pareto(1.0, 3.0).unwrap(), 1.5, 1.0).unwrap(),
        ];
        for curve in &curves {
            let cls = class_of(curve.offer());
            let t = 1e4;
            let mut sup = 0.0_f64;
            for i in 0..=200 {
                let s = i as f64 / 200.0;
                sup = sup.max((that_cdf(curve, t, s) - that_limit(&cls, s)).abs());
            }
            assert!(sup < 0.02, "{}: sup {sup}", curve.offer().label());
        }
    }

    #[test]
    fn stop_moments_converge_to_limit_moments() {
        let curves = [
            PolicyCurve::new(OfferModel::uniform(1.0, 3.0).unwrap(), 2.0, 1.0).unwrap(),
            PolicyCurve::new(OfferModel::exponential(2.0).unwrap(), 2.0, 1.0).unwrap(),
            PolicyCurve::new(OfferModel::pareto(1.0, 3.0).unwrap(), 1.5, 1.0).unwrap(),
        ];
        for curve in &curves {
            let cls = class_of(curve.offer());
            let (lm, lv) = that_limit_moments(&cls);
            let t = 1e5;
            let m = stop_mean(curve, t) / t;
            let v = stop_var(curve, t) / (t * t);
            assert!((m / lm - 1.0).abs() < 0.01, "{} mean", curve.offer().label());
            assert!((v / lv - 1.0).abs() < 0.01, "{} var", curve.offer().label());
        }
    }

    #[test]
    fn rv_diagnostic_examples() {
        let d = rv_diagnostic(|t| t * t, 10.0, 4).unwrap();
        assert!((d.exponent - 2.0).abs() < 1e-12);
        for r in &d.ratios {
            assert!((r - 2.0).abs() < 1e-12);
        }

        let p = PolicyCurve::new(OfferModel::pareto(1.0, 3.0).unwrap(), 1.5, 1.0).unwrap();
        let d = rv_diagnostic(|t| p.mu(t), 1e3, 6).unwrap();
        assert!((d.exponent - 1.0 / 3.0).abs() < 0.02, "exponent {}", d.exponent);

        let e = PolicyCurve::new(OfferModel::exponential(1.0).unwrap(), 0.0, 1.0).unwrap();
        let d = rv_diagnostic(|t| e.mu_prime(t), 1e3, 6).unwrap();
        assert!((d.exponent + 1.0).abs() < 0.02, "exponent {}", d.exponent);

        assert!(matches!(
            rv_diagnostic(|_| -1.0, 10.0, 3),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn tail_report_passes_for_worked_families() {
        let curves = [
            PolicyCurve::new(OfferModel::uniform(1.0, 3.0).unwrap(), 2.0, 1.0).unwrap(),
            PolicyCurve::new(OfferModel::exponential(2.0).unwrap(), 2.0, 1.0).unwrap(),
            PolicyCurve::new(OfferModel::pareto(1.0, 3.0).unwrap(), 1.5, 1.0).unwrap(),
            // numeric-psi families exercise the same checks without closed forms
            PolicyCurve::new(OfferModel::beta(2.0, 2.0).unwrap(), 0.5, 1.0).unwrap(),
            PolicyCurve::new(OfferModel::gamma(2.0, 1.0).unwrap(), 1.0, 1.0).unwrap(),
        ];
        for curve in &curves {
            let report = tail_report(curve).unwrap();
            for check in &report.checks {
                assert!(
                    check.pass,
                    "{}: {} = {} (threshold {})",
                    report.family, check.name, check.statistic, check.threshold
                );
            }
            let json = serde_json::to_string(&report).unwrap();
            assert!(json.contains("\"gamma\""));
        }
    }
}
