//! The exact distribution of the realized sale price `S_t`.
//!
//! Under the optimal threshold the sale-price CDF `G_t` takes a different
//! analytic form on `(-inf, mu0)`, `[mu0, mu(t))` and `[mu(t), inf)`,
//! assembled from `F`, `F0`, `phi` and the kernel
//! `J(x) = integral of 1/phi^2 over [mu0, x]`. The three worked families
//! (uniform, exponential, Pareto, each with `F0 = F`) get the fully
//! simplified closed forms as fast paths; everything else goes through the
//! generic assembly, which doubles as the independent cross-check route
//! when the curve is built with the numeric `Psi` method.
//!
//! The caller is responsible for passing a residual whose mean equals the
//! curve's `mu0` (the policy depends on the residual only through it).

use crate::dist::{Family, ResidualKind, ResidualSpec};
use crate::numeric::integrate_graded_right;
use crate::policy::PolicyCurve;
use crate::{Error, Result};

const E: f64 = std::f64::consts::E;

/// `G_t(x) = P(S_t <= x)`.
pub fn price_cdf(curve: &PolicyCurve, residual: &ResidualSpec, t: f64, x: f64) -> f64 {
    debug_assert!(t >= 0.0);
    debug_assert!(residual_matches(curve, residual));
    let offer = curve.offer();
    let mu0 = curve.mu0();
    let m = curve.mu(t);
    let phi_m = offer.phi(m);
    let phi0 = offer.phi(mu0);
    let base = phi_m * residual.cdf(x) / phi0;
    if x < mu0 {
        base
    } else if x < m {
        base + phi_m
            * (1.0 / offer.phi(x) - 1.0 / phi0
                + offer.phi_prime(x) * curve.inv_phi_sq_integral(x))
    } else {
        base + 1.0 - phi_m / phi0 + phi_m * offer.phi_prime(x) * curve.inv_phi_sq_integral(m)
    }
}

/// Density `g_t(x)` of the sale price; needs both `F` and `F0` absolutely
/// continuous.
pub fn price_pdf(curve: &PolicyCurve, residual: &ResidualSpec, t: f64, x: f64) -> Result<f64> {
    debug_assert!(t >= 0.0);
    debug_assert!(residual_matches(curve, residual));
    if !curve.offer().has_density() || !residual.has_density() {
        return Err(Error::NoDensity);
    }
    if residual.kind() == ResidualKind::SameAsOffer {
        if let Some(g) = pdf_fast_path(curve, t, x) {
            return Ok(g);
        }
    }
    let offer = curve.offer();
    let mu0 = curve.mu0();
    let m = curve.mu(t);
    let phi_m = offer.phi(m);
    let piece = if x < mu0 {
        0.0
    } else if x < m {
        curve.inv_phi_sq_integral(x)
    } else {
        curve.inv_phi_sq_integral(m)
    };
    Ok(phi_m * residual.pdf(x)? / offer.phi(mu0) + phi_m * offer.pdf(x)? * piece)
}

/// `E[S_t] = mu(t)`: the threshold doubles as the expected sale price.
pub fn price_mean(curve: &PolicyCurve, t: f64) -> f64 {
    curve.mu(t)
}

/// `Var[S_t]`; closed forms for the worked families with `F0 = F`, generic
/// quadrature otherwise. Needs finite `Var[X0]` and `E[X+^2]`.
pub fn price_var(curve: &PolicyCurve, residual: &ResidualSpec, t: f64) -> Result<f64> {
    debug_assert!(t >= 0.0);
    debug_assert!(residual_matches(curve, residual));
    if residual.kind() == ResidualKind::SameAsOffer {
        let z = curve.lambda() * t;
        match *curve.offer().family() {
            Family::Uniform { a, b } if close(curve.mu0(), 0.5 * (a + b), b - a) => {
                let beta = b - a;
                return Ok(4.0 * beta * beta / (3.0 * (z + 4.0) * (z + 4.0))
                    * (2.0 * (0.25 * z + 1.0).ln() + 1.0));
            }
            Family::Exponential { eta } if close(curve.mu0(), eta, eta) => {
                return Ok((1.0 + z / (z + E)) * eta * eta);
            }
            Family::Pareto { xm, alpha } if close(curve.mu0(), alpha * xm / (alpha - 1.0), xm) => {
                if alpha <= 2.0 {
                    return Err(Error::SecondMomentInfinite);
                }
                let c = ((alpha - 1.0) / alpha).powf(alpha - 1.0);
                let q = c * z + 1.0;
                return Ok(alpha * xm * xm / ((alpha - 2.0) * (alpha * alpha - 1.0))
                    * (2.0 * (alpha / (alpha - 1.0)) * q.powf(2.0 / alpha)
                        - q.powf(-(alpha - 1.0) / alpha)));
            }
            _ => {}
        }
    }
    price_var_quadrature(curve, residual, t)
}

/// `Var[S_t]` by the integral form
/// `phi(mu(t)) [ Var[X0]/phi(mu0) + 2 * integral of phi_tail/phi^2 ]`,
/// with the outer integral evaluated by quadrature regardless of family.
/// This is the generic route the closed forms are checked against.
pub fn price_var_quadrature(
    curve: &PolicyCurve,
    residual: &ResidualSpec,
    t: f64,
) -> Result<f64> {
    let offer = curve.offer();
    let mu0 = curve.mu0();
    let m = curve.mu(t);
    // Fail early (and deterministically) when the second moment is infinite.
    let var0 = residual.variance()?;
    offer.phi_tail_integral(mu0)?;
    let inner = |w: f64| {
        let p = offer.phi(w);
        offer.phi_tail_integral(w).unwrap_or(0.0) / (p * p)
    };
    let integral = integrate_graded_right(&inner, mu0, m, 1e-8, 1e-300);
    Ok(offer.phi(m) * (var0 / offer.phi(mu0) + 2.0 * integral))
}

fn close(x: f64, y: f64, scale: f64) -> bool {
    (x - y).abs() <= 1e-12 * scale.abs().max(1.0)
}

fn residual_matches(curve: &PolicyCurve, residual: &ResidualSpec) -> bool {
    (residual.mean() - curve.mu0()).abs() <= 1e-9 * curve.mu0().abs().max(1.0)
}

/// Fully simplified densities for the worked families with `F0 = F`.
/// Returns `None` when the parameters fall outside the worked setup.
fn pdf_fast_path(curve: &PolicyCurve, t: f64, x: f64) -> Option<f64> {
    let z = curve.lambda() * t;
    match *curve.offer().family() {
        Family::Uniform { a, b } if close(curve.mu0(), 0.5 * (a + b), b - a) => {
            let beta = b - a;
            let m = b - 2.0 * beta / (z + 4.0);
            let denom = beta * (z + 4.0) * (z + 4.0);
            let val = if x < a || x >= b {
                0.0
            } else if x < 0.5 * (a + b) {
                16.0
            } else if x < m {
                8.0 / 3.0 * (beta.powi(3) / (b - x).powi(3) - 2.0)
            } else {
                (z + 4.0).powi(3) / 3.0 - 16.0 / 3.0
            };
            Some(val / denom)
        }
        Family::Exponential { eta } if close(curve.mu0(), eta, eta) => {
            let m = eta * (z + E).ln();
            let val = if x < 0.0 {
                0.0
            } else if x < eta {
                E / (z + E) * (-x / eta).exp() / eta
            } else if x < m {
                E / (z + E) / eta
                    * (0.5 * (x / eta - 1.0).exp() - 0.5 * (1.0 - x / eta).exp()
                        + (-x / eta).exp())
            } else {
                (z + E - (E - 2.0) * E / (z + E)) * (-x / eta).exp() / (2.0 * eta)
            };
            Some(val)
        }
        Family::Pareto { xm, alpha } if close(curve.mu0(), alpha * xm / (alpha - 1.0), xm) => {
            let mu0 = curve.mu0();
            let c = ((alpha - 1.0) / alpha).powf(alpha - 1.0);
            let q = c * z + 1.0;
            let m = mu0 * q.powf(1.0 / alpha);
            let val = if x < xm {
                0.0
            } else {
                let bracket = if x < mu0 {
                    0.0
                } else if x < m {
                    (x / mu0).powf(2.0 * alpha - 1.0) - 1.0
                } else {
                    q.powf((2.0 * alpha - 1.0) / alpha) - 1.0
                };
                (alpha - 1.0) * mu0.powf(alpha) / q.powf(1.0 - 1.0 / alpha) / x.powf(alpha + 1.0)
                    * (c + alpha / (2.0 * alpha - 1.0) * bracket)
            };
            Some(val)
        }
        _ => None,
    }
}
