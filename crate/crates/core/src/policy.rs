//! The optimal acceptance threshold `mu(t)`.
//!
//! With offers arriving at rate `lambda` and `t` time units to the deadline,
//! the expected-price optimal rule accepts an offer `x` iff `x >= mu(t)`,
//! where `mu` solves `mu' = lambda phi(mu)`, `mu(0) = mu0`. Integrating,
//! `mu(t) = Psi^{-1}(lambda t)` with `Psi(x) = integral of 1/phi over
//! [mu0, x]`. The same function is the expected realized sale price
//! `E[S_t]`.
//!
//! Uniform, exponential and Pareto offers admit closed forms; everything
//! else goes through a precomputed `Psi` table plus bracketed inversion.
//! [`PolicyCurve::mu_ode`] integrates the defining ODE directly and exists
//! solely as an independent cross-check of the `Psi` route.

use crate::dist::{Family, OfferModel};
use crate::numeric::{brent, integrate, rk45};
use crate::{Error, Result};

/// Relative tolerance for the quadratures behind the numeric `Psi` path.
const PSI_QUAD_RTOL: f64 = 1e-12;
/// Growth of the precomputed table stops once `Psi` exceeds this value
/// (queries beyond it extend the bracket on the fly).
const PSI_TABLE_CAP: f64 = 1e9;

/// Evaluation strategy for a [`PolicyCurve`].
#[derive(Debug, Clone)]
enum Method {
    /// Uniform offers on `[a, b]` with `mu0` in `[a, b)`.
    UniformClosed { a: f64, b: f64, k: f64 },
    /// Uniform offers with `mu0 < a`; the threshold crosses into the
    /// support at `t_star`.
    UniformLowSalvage { a: f64, b: f64, t_star: f64 },
    /// Exponential offers with mean `eta`; `e0 = exp(mu0/eta)`.
    ExponentialClosed { eta: f64, e0: f64 },
    /// Pareto offers with `mu0 >= xm`; `c` as in the threshold formula
    /// `mu(t) = mu0 (c lambda t + 1)^{1/alpha}`.
    ParetoClosed { xm: f64, alpha: f64, c: f64 },
    /// Precomputed `Psi` nodes plus local quadrature and inversion.
    NumericPsi(PsiTable),
}

/// Monotone table of `(x, Psi(x))` nodes on `[mu0, x_hi]`, graded toward
/// the support maximum when it is finite.
#[derive(Debug, Clone)]
pub struct PsiTable {
    xs: Vec<f64>,
    psis: Vec<f64>,
}

/// The solved optimal threshold policy for one `(offer, mu0, lambda)`
/// problem. Immutable after construction; evaluations are pure.
#[derive(Debug, Clone)]
pub struct PolicyCurve {
    offer: OfferModel,
    mu0: f64,
    lambda: f64,
    method: Method,
}

impl PolicyCurve {
    /// Builds the policy, picking a closed form when the family has one.
    pub fn new(offer: OfferModel, mu0: f64, lambda: f64) -> Result<Self> {
        Self::validate(&offer, mu0, lambda)?;
        let method = match *offer.family() {
            Family::Uniform { a, b } => {
                if mu0 >= a {
                    Method::UniformClosed { a, b, k: 2.0 * (b - a) / (b - mu0) }
                } else {
                    let t_star = ((a + b - 2.0 * mu0) / (b - a)).ln() / lambda;
                    Method::UniformLowSalvage { a, b, t_star }
                }
            }
            Family::Exponential { eta } => {
                Method::ExponentialClosed { eta, e0: (mu0 / eta).exp() }
            }
            Family::Pareto { xm, alpha } if mu0 >= xm => {
                let c = alpha / (alpha - 1.0) * (xm / mu0).powf(alpha);
                Method::ParetoClosed { xm, alpha, c }
            }
            _ => Method::NumericPsi(PsiTable::build(&offer, mu0)?),
        };
        Ok(Self { offer, mu0, lambda, method })
    }

    /// Builds the policy with the numeric `Psi` path unconditionally, for
    /// cross-checking the closed forms.
    pub fn new_numeric(offer: OfferModel, mu0: f64, lambda: f64) -> Result<Self> {
        Self::validate(&offer, mu0, lambda)?;
        let method = Method::NumericPsi(PsiTable::build(&offer, mu0)?);
        Ok(Self { offer, mu0, lambda, method })
    }

    fn validate(offer: &OfferModel, mu0: f64, lambda: f64) -> Result<()> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("need lambda > 0, got {lambda}"),
            });
        }
        if !(mu0 >= 0.0 && mu0 < offer.support_max()) {
            return Err(Error::InvalidParameter {
                name: "mu0",
                reason: format!(
                    "need 0 <= mu0 < M = {}, got {mu0}",
                    offer.support_max()
                ),
            });
        }
        Ok(())
    }

    pub fn offer(&self) -> &OfferModel {
        &self.offer
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// True when the curve evaluates through a closed form.
    pub fn is_closed_form(&self) -> bool {
        !matches!(self.method, Method::NumericPsi(_))
    }

    pub fn method_label(&self) -> &'static str {
        match self.method {
            Method::UniformClosed { .. } => "closed-form-uniform",
            Method::UniformLowSalvage { .. } => "closed-form-uniform-low-salvage",
            Method::ExponentialClosed { .. } => "closed-form-exponential",
            Method::ParetoClosed { .. } => "closed-form-pareto",
            Method::NumericPsi(_) => "numeric-psi",
        }
    }

    /// Breakpoint `t*` of the uniform low-salvage case, if applicable.
    pub fn t_star(&self) -> Option<f64> {
        match self.method {
            Method::UniformLowSalvage { t_star, .. } => Some(t_star),
            _ => None,
        }
    }

    /// `Psi(x) = integral of 1/phi over [mu0, x]`, for `mu0 <= x < M`.
    pub fn psi(&self, x: f64) -> Result<f64> {
        if x < self.mu0 || x >= self.offer.support_max() {
            return Err(Error::Domain(format!(
                "psi needs mu0 <= x < M, got x = {x}"
            )));
        }
        Ok(match &self.method {
            Method::UniformClosed { a, b, .. } => {
                2.0 * (b - a) * (1.0 / (b - x) - 1.0 / (b - self.mu0))
            }
            Method::UniformLowSalvage { a, b, t_star } => {
                if x <= *a {
                    ((a + b - 2.0 * self.mu0) / (a + b - 2.0 * x)).ln()
                } else {
                    self.lambda * t_star + 2.0 * (x - a) / (b - x)
                }
            }
            Method::ExponentialClosed { eta, e0 } => (x / eta).exp() - e0,
            Method::ParetoClosed { xm, alpha, .. } => {
                (alpha - 1.0) / (alpha * xm.powf(*alpha))
                    * (x.powf(*alpha) - self.mu0.powf(*alpha))
            }
            Method::NumericPsi(table) => table.psi(&self.offer, x),
        })
    }

    /// The optimal threshold / expected sale price `mu(t) = Psi^{-1}(lambda t)`.
    /// Always in `[mu0, M)`.
    pub fn mu(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "mu needs t >= 0");
        if t <= 0.0 {
            return self.mu0;
        }
        let w = self.lambda * t;
        match &self.method {
            Method::UniformClosed { a, b, k } => b - 2.0 * (b - a) / (w + k),
            Method::UniformLowSalvage { a, b, t_star } => {
                if t <= *t_star {
                    0.5 * (a + b - (a + b - 2.0 * self.mu0) * (-w).exp())
                } else {
                    b - 2.0 * (b - a) / (self.lambda * (t - t_star) + 2.0)
                }
            }
            Method::ExponentialClosed { eta, e0 } => eta * (w + e0).ln(),
            Method::ParetoClosed { alpha, c, .. } => {
                self.mu0 * (c * w + 1.0).powf(1.0 / alpha)
            }
            Method::NumericPsi(table) => table.invert(&self.offer, self.mu0, w),
        }
    }

    /// `mu(t)` by direct adaptive integration of `mu' = lambda phi(mu)`.
    /// Exists solely as an independent cross-check of [`Self::mu`].
    pub fn mu_ode(&self, t: f64) -> Result<f64> {
        debug_assert!(t >= 0.0);
        if t <= 0.0 {
            return Ok(self.mu0);
        }
        let lambda = self.lambda;
        let offer = &self.offer;
        rk45(&|y| lambda * offer.phi(y), self.mu0, t, 1e-10, 1e-12)
    }

    /// `mu'(t) = lambda phi(mu(t)) > 0`.
    pub fn mu_prime(&self, t: f64) -> f64 {
        self.lambda * self.offer.phi(self.mu(t))
    }

    /// Acceptance hazard `h(t) = lambda (1 - F(mu(t))) = -mu''/mu'`.
    pub fn h_fn(&self, t: f64) -> f64 {
        self.lambda * self.offer.sf(self.mu(t))
    }

    /// `integral of 1/phi(w)^2 over [mu0, x]` — the kernel shared by the
    /// sale-price CDF/density/variance and the time-to-sale moments.
    /// Closed form whenever the curve itself is closed-form.
    pub fn inv_phi_sq_integral(&self, x: f64) -> f64 {
        let x = x.min(self.offer.support_max());
        if x <= self.mu0 {
            return 0.0;
        }
        match &self.method {
            Method::UniformClosed { a, b, .. } => {
                let beta = b - a;
                4.0 / 3.0 * beta * beta * (1.0 / (b - x).powi(3) - 1.0 / (b - self.mu0).powi(3))
            }
            Method::UniformLowSalvage { a, b, .. } => {
                // phi = (a+b)/2 - w below a, the parabolic branch above.
                let mid = 0.5 * (a + b);
                let lo_part = 1.0 / (mid - x.min(*a)) - 1.0 / (mid - self.mu0);
                let hi_part = if x > *a {
                    let beta = b - a;
                    4.0 / 3.0 * beta * beta * (1.0 / (b - x).powi(3) - 1.0 / beta.powi(3))
                } else {
                    0.0
                };
                lo_part + hi_part
            }
            Method::ExponentialClosed { eta, .. } => {
                ((2.0 * x / eta).exp() - (2.0 * self.mu0 / eta).exp()) / (2.0 * eta)
            }
            Method::ParetoClosed { xm, alpha, .. } => {
                let am1 = alpha - 1.0;
                am1 * am1 / ((2.0 * alpha - 1.0) * xm.powf(2.0 * alpha))
                    * (x.powf(2.0 * alpha - 1.0) - self.mu0.powf(2.0 * alpha - 1.0))
            }
            Method::NumericPsi(_) => {
                let offer = &self.offer;
                crate::numeric::integrate_graded_right(
                    &|w| {
                        let p = offer.phi(w);
                        1.0 / (p * p)
                    },
                    self.mu0,
                    x,
                    1e-10,
                    1e-300,
                )
            }
        }
    }

    /// Growth bound from a finite `p`-th moment:
    /// `mu(t) <= mu0 + E[(X - mu0)+^p]^{1/p} (lambda t)^{1/p}`.
    pub fn bound_moment_p(&self, p: f64, t: f64) -> Result<f64> {
        let m = self.offer.excess_moment_p(self.mu0, p)?;
        Ok(self.mu0 + m.powf(1.0 / p) * (self.lambda * t).powf(1.0 / p))
    }

    /// Growth bound from a finite exponential moment:
    /// `mu(t) <= mu0 + ln(E[e^{delta (X - mu0)+}] lambda t + 1) / delta`.
    pub fn bound_exponential(&self, delta: f64, t: f64) -> Result<f64> {
        let m = self.offer.excess_mgf(self.mu0, delta)?;
        Ok(self.mu0 + (m * self.lambda * t + 1.0).ln() / delta)
    }
}

impl PsiTable {
    fn build(offer: &OfferModel, mu0: f64) -> Result<Self> {
        let m = offer.support_max();
        let mut xs = vec![mu0];
        let mut psis = vec![0.0];
        if m.is_finite() {
            // Nodes approach M geometrically; 1/phi blows up there but each
            // segment ends strictly inside the support.
            for k in 1..=52 {
                let x = m - (m - mu0) * 0.5_f64.powi(k);
                let seg = psi_segment(offer, *xs.last().unwrap(), x);
                psis.push(psis.last().unwrap() + seg);
                xs.push(x);
                if *psis.last().unwrap() > PSI_TABLE_CAP {
                    break;
                }
            }
        } else {
            let mut width = offer.phi(mu0).max(1e-3 * mu0.abs().max(1.0));
            for _ in 0..600 {
                let x = xs.last().unwrap() + width;
                let seg = psi_segment(offer, *xs.last().unwrap(), x);
                psis.push(psis.last().unwrap() + seg);
                xs.push(x);
                if *psis.last().unwrap() > PSI_TABLE_CAP {
                    break;
                }
                width *= 2.0;
            }
        }
        Ok(Self { xs, psis })
    }

    /// `Psi(x)` from the nearest node below `x` plus a short local
    /// quadrature; extends past the table when needed.
    fn psi(&self, offer: &OfferModel, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x <= self.xs[n - 1] {
            let i = self.xs.partition_point(|&t| t <= x) - 1;
            return self.psis[i] + psi_segment(offer, self.xs[i], x);
        }
        // Beyond the precomputed range: accumulate in doubling steps so a
        // single huge quadrature interval is never requested.
        let mut acc = self.psis[n - 1];
        let mut lo = self.xs[n - 1];
        let mut width = if n >= 2 { (self.xs[n - 1] - self.xs[n - 2]).max(1e-12) } else { 1.0 };
        while lo < x {
            let hi = (lo + width).min(x);
            acc += psi_segment(offer, lo, hi);
            lo = hi;
            width *= 2.0;
        }
        acc
    }

    /// Solves `Psi(x) = w` by bracketing on the table (growing the bracket
    /// geometrically past it) and Brent refinement.
    fn invert(&self, offer: &OfferModel, mu0: f64, w: f64) -> f64 {
        if w <= 0.0 {
            return mu0;
        }
        let n = self.xs.len();
        let m = offer.support_max();
        // Bracket [lo, hi] with psi(lo) <= w <= psi(hi), anchored at a node.
        let (x_lo, psi_lo, x_hi) = if w <= self.psis[n - 1] {
            let i = self.psis.partition_point(|&p| p < w);
            if i == 0 {
                return self.xs[0];
            }
            (self.xs[i - 1], self.psis[i - 1], self.xs[i])
        } else {
            let mut lo = self.xs[n - 1];
            let mut acc = self.psis[n - 1];
            let mut width = if n >= 2 { (self.xs[n - 1] - self.xs[n - 2]).max(1e-12) } else { 1.0 };
            loop {
                let hi = if m.is_finite() { lo + 0.5 * (m - lo) } else { lo + width };
                let seg = psi_segment(offer, lo, hi);
                if acc + seg >= w || hi <= lo {
                    break (lo, acc, hi);
                }
                acc += seg;
                lo = hi;
                width *= 2.0;
            }
        };
        let f = |x: f64| {
            if x <= x_lo {
                psi_lo - w
            } else {
                psi_lo + psi_segment(offer, x_lo, x) - w
            }
        };
        let tol = 1e-12 * x_hi.abs().max(1.0);
        brent(&f, x_lo, x_hi, tol).unwrap_or(x_lo)
    }
}

fn psi_segment(offer: &OfferModel, a: f64, b: f64) -> f64 {
    integrate(&|u| 1.0 / offer.phi(u), a, b, PSI_QUAD_RTOL, 1e-300)
}

/// Recovers the offer CDF that makes `mu` samples an optimal policy at rate
/// `lambda`: `F(x) = 1 - h(mu^{-1}(x)) / lambda` on the sampled range, with
/// `h = -mu''/mu'` estimated by second-difference ratios.
///
/// The samples must be strictly increasing and strictly concave, and
/// `lambda` must dominate the estimated initial hazard `h(0+)`.
pub fn reconstruct_offer_cdf(ts: &[f64], mus: &[f64], lambda: f64) -> Result<OfferModel> {
    let n = ts.len();
    if n != mus.len() || n < 4 {
        return Err(Error::InvalidData(
            "need at least 4 (t, mu) samples of equal length".into(),
        ));
    }
    for i in 1..n {
        if ts[i] <= ts[i - 1] {
            return Err(Error::InvalidData("t grid must be strictly increasing".into()));
        }
    }
    // Chord slopes: positivity gives monotonicity, strict decrease gives
    // concavity.
    let mut d = vec![0.0; n - 1];
    for i in 0..n - 1 {
        d[i] = (mus[i + 1] - mus[i]) / (ts[i + 1] - ts[i]);
        if d[i] <= 0.0 {
            return Err(Error::NotIncreasing);
        }
    }
    for i in 1..n - 1 {
        if d[i] >= d[i - 1] {
            return Err(Error::NotConcave);
        }
    }
    // Quadratic through each centered stencil: mu'' = 2 * dd2 and
    // mu'(t_i) is the weighted chord average. Endpoints get a one-sided
    // 4-point Newton cubic so their mu'' is still second-order accurate.
    let cubic_derivs = |i0: usize, at: f64| {
        let t = &ts[i0..i0 + 4];
        let c1 = d[i0];
        let dd2a = (d[i0 + 1] - d[i0]) / (t[2] - t[0]);
        let dd2b = (d[i0 + 2] - d[i0 + 1]) / (t[3] - t[1]);
        let c3 = (dd2b - dd2a) / (t[3] - t[0]);
        let p1 = c1
            + dd2a * ((at - t[0]) + (at - t[1]))
            + c3 * ((at - t[1]) * (at - t[2])
                + (at - t[0]) * (at - t[2])
                + (at - t[0]) * (at - t[1]));
        let p2 = 2.0 * dd2a + 2.0 * c3 * ((at - t[0]) + (at - t[1]) + (at - t[2]));
        (p1, p2)
    };
    let mut h = vec![0.0; n];
    for i in 0..n {
        let (mu_p, mu_pp) = if i == 0 {
            cubic_derivs(0, ts[0])
        } else if i == n - 1 {
            cubic_derivs(n - 4, ts[n - 1])
        } else {
            let dd2 = (d[i] - d[i - 1]) / (ts[i + 1] - ts[i - 1]);
            let p = (d[i - 1] * (ts[i + 1] - ts[i]) + d[i] * (ts[i] - ts[i - 1]))
                / (ts[i + 1] - ts[i - 1]);
            (p, 2.0 * dd2)
        };
        if mu_p <= 0.0 {
            return Err(Error::NotIncreasing);
        }
        h[i] = -mu_pp / mu_p;
    }
    let h0 = h[0];
    if lambda < h0 * (1.0 - 1e-9) {
        return Err(Error::RateTooSmall { lambda, h0 });
    }
    // F(mu_i) = 1 - h_i / lambda; running max irons out finite-difference
    // noise in the tabulated CDF.
    let mut points = Vec::with_capacity(n);
    let mut running = 0.0_f64;
    for i in 0..n {
        let f = (1.0 - h[i] / lambda).clamp(0.0, 1.0);
        running = running.max(f);
        points.push((mus[i], running));
    }
    OfferModel::tabulated(&points)
}
