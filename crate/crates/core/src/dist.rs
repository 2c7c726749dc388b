//! Offer and residual distribution models.
//!
//! An [`OfferModel`] carries one of the built-in families (uniform,
//! exponential, Pareto, Beta, Gamma, Frechet) or a tabulated CDF, and
//! exposes the quantities every downstream formula is built from: the CDF,
//! the quantile, the support maximum `M`, and above all the excess-value
//! function `phi(x) = E[(X - x)+] = integral of (1 - F) over [x, inf)`.

use crate::numeric::{brent, integrate, integrate_tail};
use crate::{Error, Result};

/// Absolute tolerance for quadrature-backed `phi` evaluations.
const PHI_QUAD_TOL: f64 = 1e-12;
/// Relative tolerance for moment quadratures.
const MOMENT_TOL: f64 = 1e-10;

/// Built-in offer distribution families plus tabulated custom CDFs.
#[derive(Debug, Clone)]
pub enum Family {
    Uniform { a: f64, b: f64 },
    Exponential { eta: f64 },
    Pareto { xm: f64, alpha: f64 },
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, scale: f64 },
    Frechet { alpha: f64 },
    Tabulated(TabulatedCdf),
}

/// A CDF given by grid points, interpolated piecewise-linearly. The last
/// grid point is the support maximum `M`; if `F` has not reached 1 there,
/// the remaining mass sits as an atom at `M`. Likewise mass `F(x0)` sits as
/// an atom at the first grid point.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
    /// `suffix_area[i]` = exact integral of `1 - F` over `[xs[i], M]`.
    suffix_area: Vec<f64>,
}

impl TabulatedCdf {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidData("tabulated CDF needs at least two points".into()));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut fs = Vec::with_capacity(points.len());
        for &(x, f) in points {
            if !x.is_finite() || !f.is_finite() {
                return Err(Error::InvalidData("non-finite tabulated CDF entry".into()));
            }
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidData(format!("F value {f} outside [0, 1]")));
            }
            if let Some(&last) = xs.last() {
                if x <= last {
                    return Err(Error::InvalidData("x grid must be strictly increasing".into()));
                }
            }
            if let Some(&lastf) = fs.last() {
                if f < lastf {
                    return Err(Error::InvalidData("F values must be nondecreasing".into()));
                }
            }
            xs.push(x);
            fs.push(f);
            // Once F hits 1 the support ends there.
            if f >= 1.0 {
                break;
            }
        }
        if xs.len() < 2 {
            return Err(Error::InvalidData("tabulated CDF collapses to a single point".into()));
        }
        let n = xs.len();
        let mut suffix_area = vec![0.0; n];
        for i in (0..n - 1).rev() {
            let trap = (xs[i + 1] - xs[i]) * (1.0 - 0.5 * (fs[i] + fs[i + 1]));
            suffix_area[i] = suffix_area[i + 1] + trap;
        }
        Ok(Self { xs, fs, suffix_area })
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.fs[i] + w * (self.fs[i + 1] - self.fs[i])
    }

    /// Left-continuous version of the CDF (excludes the atoms at the first
    /// and last grid points).
    fn cdf_left(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x > self.xs[n - 1] {
            return 1.0;
        }
        if x == self.xs[n - 1] {
            return self.fs[n - 1];
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.fs[i] + w * (self.fs[i + 1] - self.fs[i])
    }

    fn quantile(&self, u: f64) -> f64 {
        let n = self.xs.len();
        if u <= self.fs[0] {
            return self.xs[0];
        }
        if u > self.fs[n - 1] {
            return self.xs[n - 1];
        }
        let i = self.fs.partition_point(|&f| f < u);
        // fs[i-1] < u <= fs[i], so the segment is non-degenerate.
        let w = (u - self.fs[i - 1]) / (self.fs[i] - self.fs[i - 1]);
        self.xs[i - 1] + w * (self.xs[i] - self.xs[i - 1])
    }

    fn phi(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return 0.0;
        }
        if x <= self.xs[0] {
            return self.suffix_area[0] + (self.xs[0] - x);
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let partial = (self.xs[i + 1] - x) * (1.0 - 0.5 * (self.cdf(x) + self.fs[i + 1]));
        partial + self.suffix_area[i + 1]
    }

    /// Exact integral of `(u - x)(1 - F(u))` over `[x, M]`; the integrand is
    /// quadratic on each linear segment, so per-segment Simpson is exact.
    fn phi_tail_integral(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return 0.0;
        }
        let g = |u: f64| (u - x) * (1.0 - self.cdf(u));
        let simpson = |lo: f64, hi: f64| {
            let mid = 0.5 * (lo + hi);
            (hi - lo) / 6.0 * (g(lo) + 4.0 * g(mid) + g(hi))
        };
        let mut total = 0.0;
        let mut lo = x;
        if x < self.xs[0] {
            // F = 0 below the grid: integrand is linear there.
            total += 0.5 * (self.xs[0] - x) * (self.xs[0] - x);
            lo = self.xs[0];
        }
        for i in 0..n - 1 {
            let a = self.xs[i].max(lo);
            let b = self.xs[i + 1];
            if b > a {
                total += simpson(a, b);
            }
        }
        total
    }

    fn mean(&self) -> f64 {
        self.xs[0] + self.suffix_area[0]
    }

    fn second_moment(&self) -> f64 {
        // E[X^2] = x0^2 + 2 * integral of u (1 - F(u)) over [x0, M];
        // quadratic per segment, Simpson is exact.
        let g = |u: f64| u * (1.0 - self.cdf(u));
        let mut acc = self.xs[0] * self.xs[0];
        for i in 0..self.xs.len() - 1 {
            let (a, b) = (self.xs[i], self.xs[i + 1]);
            let mid = 0.5 * (a + b);
            acc += 2.0 * (b - a) / 6.0 * (g(a) + 4.0 * g(mid) + g(b));
        }
        acc
    }

    fn has_density(&self) -> bool {
        self.fs[0] == 0.0 && *self.fs.last().unwrap() >= 1.0
    }

    fn pdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x >= self.xs[n - 1] {
            return 0.0;
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        (self.fs[i + 1] - self.fs[i]) / (self.xs[i + 1] - self.xs[i])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.fs.iter().copied())
    }
}

/// An offer distribution: family parameters plus the derived support maximum
/// and mean. Immutable after construction; all evaluations are pure.
#[derive(Debug, Clone)]
pub struct OfferModel {
    family: Family,
    support_min: f64,
    support_max: f64,
    mean: f64,
}

impl OfferModel {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidParameter {
                name: "uniform(a,b)",
                reason: format!("need finite b > a, got a = {a}, b = {b}"),
            });
        }
        Ok(Self {
            family: Family::Uniform { a, b },
            support_min: a,
            support_max: b,
            mean: 0.5 * (a + b),
        })
    }

    pub fn exponential(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "exponential(eta)",
                reason: format!("need eta > 0, got {eta}"),
            });
        }
        Ok(Self {
            family: Family::Exponential { eta },
            support_min: 0.0,
            support_max: f64::INFINITY,
            mean: eta,
        })
    }

    pub fn pareto(xm: f64, alpha: f64) -> Result<Self> {
        if !(xm.is_finite() && xm > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pareto(xm,alpha)",
                reason: format!("need xm > 0 and finite alpha, got xm = {xm}, alpha = {alpha}"),
            });
        }
        if alpha <= 1.0 {
            return Err(Error::TailNotIntegrable);
        }
        Ok(Self {
            family: Family::Pareto { xm, alpha },
            support_min: xm,
            support_max: f64::INFINITY,
            mean: alpha * xm / (alpha - 1.0),
        })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta(alpha,beta)",
                reason: format!("need alpha, beta > 0, got {alpha}, {beta}"),
            });
        }
        Ok(Self {
            family: Family::Beta { alpha, beta },
            support_min: 0.0,
            support_max: 1.0,
            mean: alpha / (alpha + beta),
        })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma(shape,scale)",
                reason: format!("need shape, scale > 0, got {shape}, {scale}"),
            });
        }
        Ok(Self {
            family: Family::Gamma { shape, scale },
            support_min: 0.0,
            support_max: f64::INFINITY,
            mean: shape * scale,
        })
    }

    pub fn frechet(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter {
                name: "frechet(alpha)",
                reason: format!("need alpha > 0, got {alpha}"),
            });
        }
        if alpha <= 1.0 {
            return Err(Error::TailNotIntegrable);
        }
        let mean = statrs::function::gamma::gamma(1.0 - 1.0 / alpha);
        Ok(Self {
            family: Family::Frechet { alpha },
            support_min: 0.0,
            support_max: f64::INFINITY,
            mean,
        })
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        let tab = TabulatedCdf::new(points)?;
        let support_min = tab.xs[0];
        let support_max = *tab.xs.last().unwrap();
        let mean = tab.mean();
        Ok(Self {
            family: Family::Tabulated(tab),
            support_min,
            support_max,
            mean,
        })
    }

    /// Parses a two-column CSV `x,F` (header row required, strictly
    /// increasing x, nondecreasing F in [0, 1]).
    pub fn tabulated_from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidData("empty tabulated CDF file".into()))?;
        let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
        if cols.len() != 2 || cols[0].parse::<f64>().is_ok() {
            return Err(Error::InvalidData(format!(
                "expected header row `x,F`, got {header:?}"
            )));
        }
        let mut points = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let mut it = line.split(',').map(|c| c.trim());
            let (x, f) = match (it.next(), it.next(), it.next()) {
                (Some(x), Some(f), None) => (x, f),
                _ => {
                    return Err(Error::InvalidData(format!(
                        "line {}: expected two columns",
                        lineno + 2
                    )))
                }
            };
            let x: f64 = x
                .parse()
                .map_err(|_| Error::InvalidData(format!("line {}: bad x {x:?}", lineno + 2)))?;
            let f: f64 = f
                .parse()
                .map_err(|_| Error::InvalidData(format!("line {}: bad F {f:?}", lineno + 2)))?;
            points.push((x, f));
        }
        Self::tabulated(&points)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Support maximum `M` (possibly infinite).
    pub fn support_max(&self) -> f64 {
        self.support_max
    }

    pub fn support_min(&self) -> f64 {
        self.support_min
    }

    /// `E[X]`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `Var[X]`; requires a finite second moment.
    pub fn variance(&self) -> Result<f64> {
        match &self.family {
            Family::Uniform { a, b } => Ok((b - a) * (b - a) / 12.0),
            Family::Exponential { eta } => Ok(eta * eta),
            Family::Pareto { xm, alpha } => {
                if *alpha <= 2.0 {
                    Err(Error::SecondMomentInfinite)
                } else {
                    Ok(alpha * xm * xm / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0)))
                }
            }
            Family::Beta { alpha, beta } => {
                let s = alpha + beta;
                Ok(alpha * beta / (s * s * (s + 1.0)))
            }
            Family::Gamma { shape, scale } => Ok(shape * scale * scale),
            Family::Frechet { alpha } => {
                if *alpha <= 2.0 {
                    Err(Error::SecondMomentInfinite)
                } else {
                    let g1 = statrs::function::gamma::gamma(1.0 - 1.0 / alpha);
                    let g2 = statrs::function::gamma::gamma(1.0 - 2.0 / alpha);
                    Ok(g2 - g1 * g1)
                }
            }
            Family::Tabulated(tab) => Ok(tab.second_moment() - self.mean * self.mean),
        }
    }

    /// `F(x) = P(X <= x)` (right-continuous).
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Family::Exponential { eta } => {
                if x < 0.0 {
                    0.0
                } else {
                    -(-x / eta).exp_m1()
                }
            }
            Family::Pareto { xm, alpha } => {
                if x < *xm {
                    0.0
                } else {
                    1.0 - (xm / x).powf(*alpha)
                }
            }
            Family::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    statrs::function::beta::beta_reg(*alpha, *beta, x)
                }
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    statrs::function::gamma::gamma_lr(*shape, x / scale)
                }
            }
            Family::Frechet { alpha } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-alpha)).exp()
                }
            }
            Family::Tabulated(tab) => tab.cdf(x),
        }
    }

    /// Left-continuous CDF `F(x-)`; differs from [`Self::cdf`] only at the
    /// atoms of a tabulated model.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match &self.family {
            Family::Tabulated(tab) => tab.cdf_left(x),
            _ => self.cdf(x),
        }
    }

    /// Survival function `1 - F(x)`, computed without cancellation in the
    /// far tail.
    pub fn sf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            Family::Exponential { eta } => {
                if x < 0.0 {
                    1.0
                } else {
                    (-x / eta).exp()
                }
            }
            Family::Pareto { xm, alpha } => {
                if x < *xm {
                    1.0
                } else {
                    (xm / x).powf(*alpha)
                }
            }
            Family::Beta { alpha, beta } => {
                if x <= 0.0 {
                    1.0
                } else if x >= 1.0 {
                    0.0
                } else {
                    statrs::function::beta::beta_reg(*beta, *alpha, 1.0 - x)
                }
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    statrs::function::gamma::gamma_ur(*shape, x / scale)
                }
            }
            Family::Frechet { alpha } => {
                if x <= 0.0 {
                    1.0
                } else {
                    -(-x.powf(-alpha)).exp_m1()
                }
            }
            Family::Tabulated(tab) => 1.0 - tab.cdf(x),
        }
    }

    pub fn has_density(&self) -> bool {
        match &self.family {
            Family::Tabulated(tab) => tab.has_density(),
            _ => true,
        }
    }

    /// Density `f(x)`, when the model is absolutely continuous.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        match &self.family {
            Family::Uniform { a, b } => Ok(if x >= *a && x <= *b { 1.0 / (b - a) } else { 0.0 }),
            Family::Exponential { eta } => {
                Ok(if x < 0.0 { 0.0 } else { (-x / eta).exp() / eta })
            }
            Family::Pareto { xm, alpha } => Ok(if x < *xm {
                0.0
            } else {
                alpha * xm.powf(*alpha) / x.powf(alpha + 1.0)
            }),
            Family::Beta { alpha, beta } => {
                if x <= 0.0 || x >= 1.0 {
                    return Ok(0.0);
                }
                let ln = (alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln()
                    - statrs::function::beta::ln_beta(*alpha, *beta);
                Ok(ln.exp())
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                let ln = (shape - 1.0) * (x / scale).ln() - x / scale
                    - statrs::function::gamma::ln_gamma(*shape)
                    - scale.ln();
                Ok(ln.exp())
            }
            Family::Frechet { alpha } => {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                Ok(alpha * x.powf(-alpha - 1.0) * (-x.powf(-alpha)).exp())
            }
            Family::Tabulated(tab) => {
                if !tab.has_density() {
                    return Err(Error::NoDensity);
                }
                Ok(tab.pdf(x))
            }
        }
    }

    /// `inf { x : F(x) >= u }` for `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile needs u in (0,1), got {u}")));
        }
        Ok(match &self.family {
            Family::Uniform { a, b } => a + u * (b - a),
            Family::Exponential { eta } => -eta * (1.0 - u).ln(),
            Family::Pareto { xm, alpha } => xm * (1.0 - u).powf(-1.0 / alpha),
            Family::Beta { .. } => {
                brent(&|x| self.cdf(x) - u, 0.0, 1.0, 1e-14).expect("beta cdf brackets u")
            }
            Family::Gamma { shape, scale } => {
                let mut hi = shape * scale + 10.0 * shape.sqrt() * scale;
                while self.cdf(hi) < u {
                    hi *= 2.0;
                }
                brent(&|x| self.cdf(x) - u, 0.0, hi, 1e-13 * hi.max(1.0))
                    .expect("gamma cdf brackets u")
            }
            Family::Frechet { alpha } => (-u.ln()).powf(-1.0 / alpha),
            Family::Tabulated(tab) => tab.quantile(u),
        })
    }

    /// Excess value `phi(x) = E[(X - x)+]`. Total function: 0 at and above
    /// `M`, `mean - x` below the support.
    pub fn phi(&self, x: f64) -> f64 {
        if x >= self.support_max {
            return 0.0;
        }
        if x <= self.support_min {
            return self.mean - x;
        }
        match &self.family {
            Family::Uniform { a, b } => (b - x) * (b - x) / (2.0 * (b - a)),
            Family::Exponential { eta } => eta * (-x / eta).exp(),
            Family::Pareto { xm, alpha } => {
                xm.powf(*alpha) / ((alpha - 1.0) * x.powf(alpha - 1.0))
            }
            Family::Beta { .. } => {
                integrate(&|u| self.sf(u), x, 1.0, 1e-11, PHI_QUAD_TOL)
            }
            Family::Gamma { .. } | Family::Frechet { .. } => {
                integrate_tail(&|u| self.sf(u), x, 1e-11, PHI_QUAD_TOL)
            }
            Family::Tabulated(tab) => tab.phi(x),
        }
    }

    /// `phi'(x) = F(x) - 1` (left-continuous version at tabulated kinks).
    pub fn phi_prime(&self, x: f64) -> f64 {
        self.cdf_left(x) - 1.0
    }

    /// `integral of phi over [x, inf) = E[(X - x)+^2] / 2`. Needs a finite
    /// second moment (Pareto/Frechet require `alpha > 2`).
    pub fn phi_tail_integral(&self, x: f64) -> Result<f64> {
        match &self.family {
            Family::Pareto { alpha, .. } | Family::Frechet { alpha } if *alpha <= 2.0 => {
                return Err(Error::SecondMomentInfinite)
            }
            _ => {}
        }
        if x >= self.support_max {
            return Ok(0.0);
        }
        if x <= self.support_min {
            // Below the support: E[(X - x)^2] / 2 = (Var + (mean - x)^2) / 2.
            let var = self.variance()?;
            let d = self.mean - x;
            return Ok(0.5 * (var + d * d));
        }
        Ok(match &self.family {
            Family::Uniform { a, b } => (b - x).powi(3) / (6.0 * (b - a)),
            Family::Exponential { eta } => eta * eta * (-x / eta).exp(),
            Family::Pareto { xm, alpha } => {
                xm.powf(*alpha) / ((alpha - 1.0) * (alpha - 2.0) * x.powf(alpha - 2.0))
            }
            Family::Beta { .. } => {
                integrate(&|u| (u - x) * self.sf(u), x, 1.0, 1e-11, PHI_QUAD_TOL)
            }
            Family::Gamma { .. } | Family::Frechet { .. } => {
                integrate_tail(&|u| (u - x) * self.sf(u), x, 1e-11, PHI_QUAD_TOL)
            }
            Family::Tabulated(tab) => tab.phi_tail_integral(x),
        })
    }

    /// `Var[(X - w)+] = 2 * phi_tail_integral(w) - phi(w)^2`.
    pub fn var_excess(&self, w: f64) -> Result<f64> {
        let p = self.phi(w);
        Ok((2.0 * self.phi_tail_integral(w)? - p * p).max(0.0))
    }

    /// `E[(X - mu0)+^p]`, computed as `p * integral of (x - mu0)^(p-1) (1 - F)`.
    pub fn excess_moment_p(&self, mu0: f64, p: f64) -> Result<f64> {
        if p.is_nan() || p <= 1.0 {
            return Err(Error::Domain(format!("need p > 1, got {p}")));
        }
        match &self.family {
            Family::Pareto { alpha, .. } | Family::Frechet { alpha } if p >= *alpha => {
                return Err(Error::MomentInfinite { p })
            }
            _ => {}
        }
        let lo = mu0.max(self.support_min);
        let g = |x: f64| p * (x - mu0).powf(p - 1.0) * self.sf(x);
        let val = if self.support_max.is_finite() {
            integrate(&g, lo, self.support_max, MOMENT_TOL, 1e-13)
        } else {
            integrate_tail(&g, lo, MOMENT_TOL, 1e-13)
        };
        Ok(val)
    }

    /// `E[exp(delta (X - mu0)+)] = 1 + delta * integral of e^{delta (x-mu0)} (1-F)`.
    pub fn excess_mgf(&self, mu0: f64, delta: f64) -> Result<f64> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::Domain(format!("need delta > 0, got {delta}")));
        }
        match &self.family {
            Family::Pareto { .. } | Family::Frechet { .. } => {
                return Err(Error::MgfInfinite { delta })
            }
            Family::Exponential { eta } if delta >= 1.0 / eta => {
                return Err(Error::MgfInfinite { delta })
            }
            Family::Gamma { scale, .. } if delta >= 1.0 / scale => {
                return Err(Error::MgfInfinite { delta })
            }
            _ => {}
        }
        let lo = mu0.max(self.support_min);
        // log-space product: e^{delta x} overflows long before the survival
        // factor brings the product back down
        let g = |x: f64| (delta * (x - mu0) + self.sf(x).ln()).exp();
        let val = if self.support_max.is_finite() {
            integrate(&g, lo, self.support_max, MOMENT_TOL, 1e-13)
        } else {
            integrate_tail(&g, lo, MOMENT_TOL, 1e-13)
        };
        Ok(1.0 + delta * val)
    }

    pub fn family_name(&self) -> &'static str {
        match &self.family {
            Family::Uniform { .. } => "uniform",
            Family::Exponential { .. } => "exponential",
            Family::Pareto { .. } => "pareto",
            Family::Beta { .. } => "beta",
            Family::Gamma { .. } => "gamma",
            Family::Frechet { .. } => "frechet",
            Family::Tabulated(_) => "tabulated",
        }
    }

    pub fn params_label(&self) -> String {
        match &self.family {
            Family::Uniform { a, b } => format!("a={a},b={b}"),
            Family::Exponential { eta } => format!("eta={eta}"),
            Family::Pareto { xm, alpha } => format!("xm={xm},alpha={alpha}"),
            Family::Beta { alpha, beta } => format!("alpha={alpha},beta={beta}"),
            Family::Gamma { shape, scale } => format!("alpha={shape},eta={scale}"),
            Family::Frechet { alpha } => format!("alpha={alpha}"),
            Family::Tabulated(tab) => format!("{} points", tab.xs.len()),
        }
    }

    /// Short human-readable label, e.g. `uniform(a=1,b=3)`.
    pub fn label(&self) -> String {
        format!("{}({})", self.family_name(), self.params_label())
    }
}

/// How the residual (salvage) price is distributed if the deadline passes
/// without a sale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// Salvage value is identically zero.
    Zero,
    /// Salvage price is a fresh draw from the offer distribution.
    SameAsOffer,
    /// An arbitrary user-supplied distribution.
    Custom,
}

/// Residual price distribution, reduced to what the formulas consume:
/// mean, variance, CDF, and (optionally) a density.
#[derive(Debug, Clone)]
pub struct ResidualSpec {
    kind: ResidualKind,
    model: Option<OfferModel>,
}

impl ResidualSpec {
    /// `X0 = 0` almost surely (ephemeral asset: the sale is lost).
    pub fn zero() -> Self {
        Self { kind: ResidualKind::Zero, model: None }
    }

    /// `F0 = F`: after the deadline the next offer is taken unconditionally.
    pub fn same_as(offer: &OfferModel) -> Self {
        Self { kind: ResidualKind::SameAsOffer, model: Some(offer.clone()) }
    }

    pub fn custom(model: OfferModel) -> Self {
        Self { kind: ResidualKind::Custom, model: Some(model) }
    }

    pub fn kind(&self) -> ResidualKind {
        self.kind
    }

    /// `mu0 = E[X0]`.
    pub fn mean(&self) -> f64 {
        self.model.as_ref().map_or(0.0, |m| m.mean())
    }

    pub fn variance(&self) -> Result<f64> {
        self.model.as_ref().map_or(Ok(0.0), |m| m.variance())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.model {
            Some(m) => m.cdf(x),
            None => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn has_density(&self) -> bool {
        self.model.as_ref().is_some_and(|m| m.has_density())
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        match &self.model {
            Some(m) => m.pdf(x),
            None => Err(Error::NoDensity),
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match &self.model {
            Some(m) => m.quantile(u),
            None => Ok(0.0),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            ResidualKind::Zero => "zero".into(),
            ResidualKind::SameAsOffer => "same-as-offer".into(),
            ResidualKind::Custom => format!("custom({})", self.model.as_ref().unwrap().label()),
        }
    }
}
