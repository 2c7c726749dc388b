//! Shared numerical kernels: adaptive quadrature, bracketed root finding,
//! an embedded Runge-Kutta stepper, and monotone interpolation.

use crate::{Error, Result};

// 15-point Kronrod abscissae (positive half / zero) with the embedded
// 7-point Gauss rule. Values are the QUADPACK qk15 constants, kept at the
// published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];

/// One Gauss-Kronrod 15(7) panel: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = 0.0;
    let mut fsums = [0.0_f64; 7];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let fsum = f(center - dx) + f(center + dx);
        fsums[j] = fsum;
        kronrod += WGK[j] * fsum;
    }
    // Gauss nodes are the odd-indexed Kronrod nodes.
    for (j, &w) in WG.iter().enumerate() {
        if j < 3 {
            gauss += w * fsums[2 * j + 1];
        } else {
            gauss += w * fc;
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (integral, err)
}

#[derive(Clone, Copy)]
struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Subdivides the worst panel until the accumulated error estimate is below
/// `max(abs_tol, rel_tol * |integral|)`. The integrand must be finite on the
/// closed interval; integrable endpoint blow-ups should go through
/// [`integrate_graded_right`] or [`integrate_tail`] instead.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (val, err) = gk15(f, a, b);
    let mut segs = vec![Seg { a, b, val, err }];
    refine(f, &mut segs, rel_tol, abs_tol, 2000)
}

/// Adaptive integration with the initial panels geometrically refined toward
/// the right endpoint `b` (panel width ratio 0.5), for integrands that grow
/// steeply as `x -> b`.
pub fn integrate_graded_right<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut segs = Vec::with_capacity(48);
    let mut lo = a;
    for k in 1..=44 {
        let hi = if k == 44 { b } else { b - (b - a) * 0.5_f64.powi(k) };
        if hi <= lo {
            break;
        }
        let (val, err) = gk15(f, lo, hi);
        segs.push(Seg { a: lo, b: hi, val, err });
        lo = hi;
    }
    refine(f, &mut segs, rel_tol, abs_tol, 4000)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    segs: &mut Vec<Seg>,
    rel_tol: f64,
    abs_tol: f64,
    max_splits: usize,
) -> f64 {
    for _ in 0..max_splits {
        let total: f64 = segs.iter().map(|s| s.val).sum();
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return total;
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty segment list");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Width underflow; keep the panel as-is.
            segs.push(s);
            return segs.iter().map(|s| s.val).sum();
        }
        let (v1, e1) = gk15(f, s.a, mid);
        let (v2, e2) = gk15(f, mid, s.b);
        segs.push(Seg { a: s.a, b: mid, val: v1, err: e1 });
        segs.push(Seg { a: mid, b: s.b, val: v2, err: e2 });
    }
    segs.iter().map(|s| s.val).sum()
}

/// Integrates `f` over `[a, +infinity)` by doubling panel widths until the
/// panel contribution is negligible. The integrand must eventually decay
/// (guaranteed by the integrability preconditions of the callers).
pub fn integrate_tail<F: Fn(f64) -> f64>(f: &F, a: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    let scale = if a.abs() > 1.0 { a.abs() } else { 1.0 };
    let mut width = 0.5 * scale;
    let mut lo = a;
    let mut total = 0.0;
    let mut calm = 0;
    for _ in 0..2000 {
        let hi = lo + width;
        if !hi.is_finite() {
            break;
        }
        let val = integrate(f, lo, hi, rel_tol, abs_tol * 0.125);
        total += val;
        if val.abs() <= 0.125 * abs_tol.max(rel_tol * total.abs()) {
            calm += 1;
            // Two successive negligible panels guard against decaying
            // oscillation in the panel sizes.
            if calm >= 2 {
                return total;
            }
        } else {
            calm = 0;
        }
        lo = hi;
        width *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    total
}

/// Brent's method on a bracketing interval `[a, b]` with `f(a)` and `f(b)`
/// of opposite sign. `tol_x` is the absolute x tolerance (the caller scales
/// it to the problem).
pub fn brent<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol_x: f64) -> Result<f64> {
    let mut a = a;
    let mut b = b;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Domain(format!(
            "root not bracketed on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol_x;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation / secant step.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Ok(b)
}

/// Integrates the scalar IVP `y' = f(y)`, `y(0) = y0`, to `t_end` with the
/// Dormand-Prince 5(4) embedded pair and local error control.
pub fn rk45<F: Fn(f64) -> f64>(f: &F, y0: f64, t_end: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if t_end == 0.0 {
        return Ok(y0);
    }
    let mut t = 0.0;
    let mut y = y0;
    let mut h = (t_end / 16.0).min(1.0).max(1e-8 * t_end);
    let h_floor = 1e-14 * t_end;
    let mut k1 = f(y);
    for _ in 0..1_000_000 {
        if t >= t_end {
            return Ok(y);
        }
        if h < h_floor {
            return Err(Error::StepUnderflow { t });
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let k2 = f(y + h * (0.2 * k1));
        let k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
        let k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
        let k5 = f(y
            + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3
                - 212.0 / 729.0 * k4));
        let k6 = f(y
            + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
                + 49.0 / 176.0 * k4
                - 5103.0 / 18656.0 * k5));
        let y5 = y
            + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                - 2187.0 / 6784.0 * k5
                + 11.0 / 84.0 * k6);
        let k7 = f(y5);
        let y4 = y
            + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4
                - 92097.0 / 339200.0 * k5
                + 187.0 / 2100.0 * k6
                + 1.0 / 40.0 * k7);
        let err = (y5 - y4).abs() / (abs_tol + rel_tol * y.abs().max(y5.abs()));
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }
    Err(Error::StepUnderflow { t })
}

/// Monotone piecewise-cubic interpolant (Fritsch-Carlson limited Hermite
/// slopes). Used for fast policy evaluation inside the simulator when no
/// closed form is available; construction fails only on non-monotone data.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidData("need at least two interpolation nodes".into()));
        }
        for i in 1..n {
            if xs[i] <= xs[i - 1] {
                return Err(Error::InvalidData("interpolation nodes must be increasing".into()));
            }
        }
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            d[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut slopes = vec![0.0; n];
        // Three-point one-sided endpoint slopes, clamped to keep monotonicity.
        let endpoint = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if m * d0 <= 0.0 {
                0.0
            } else if m.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                m
            }
        };
        slopes[0] = if n > 2 {
            endpoint(xs[1] - xs[0], xs[2] - xs[1], d[0], d[1])
        } else {
            d[0]
        };
        slopes[n - 1] = if n > 2 {
            endpoint(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                d[n - 2],
                d[n - 3],
            )
        } else {
            d[n - 2]
        };
        for i in 1..n - 1 {
            if d[i - 1] * d[i] <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // Harmonic mean keeps the interpolant monotone.
                let w1 = 2.0 * (xs[i + 1] - xs[i]) + (xs[i] - xs[i - 1]);
                let w2 = (xs[i + 1] - xs[i]) + 2.0 * (xs[i] - xs[i - 1]);
                slopes[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    /// Evaluates the interpolant, clamping outside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self.xs.partition_point(|&t| t <= x) {
            0 => 0,
            k => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_exact_on_polynomials() {
        let v = integrate(&|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, 1e-14);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // integral of 1/(1e-4 + x^2) over [-1,1] = 2*atan(1e2)/1e-2
        let v = integrate(&|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-14);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0 / 1e-2_f64).atan();
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn graded_right_resolves_steep_endpoint() {
        // integral of (1-x)^(-1/2) over [0, 1-1e-12]: steep but finite.
        let b = 1.0 - 1e-12;
        let v = integrate_graded_right(&|x: f64| (1.0 - x).powf(-0.5), 0.0, b, 1e-10, 1e-14);
        let exact = 2.0 * (1.0 - 1e-6);
        assert!((v - exact).abs() / exact < 1e-9, "v = {v}, exact = {exact}");
    }

    #[test]
    fn tail_integral_exponential_and_power() {
        let v = integrate_tail(&|x: f64| (-x).exp(), 0.0, 1e-12, 1e-14);
        assert!((v - 1.0).abs() < 1e-11);
        // integral of x^{-3} over [2, inf) = 1/(2*4) = 0.125
        let v = integrate_tail(&|x: f64| x.powi(-3), 2.0, 1e-12, 1e-14);
        assert!((v - 0.125).abs() < 1e-11);
    }

    #[test]
    fn brent_finds_root() {
        let r = brent(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rk45_matches_logistic_solution() {
        // y' = y (1 - y), y(0) = 0.1 -> y(t) = 1/(1 + 9 e^{-t})
        let y = rk45(&|y: f64| y * (1.0 - y), 0.1, 5.0, 1e-11, 1e-13).unwrap();
        let exact = 1.0 / (1.0 + 9.0 * (-5.0_f64).exp());
        assert!((y - exact).abs() < 1e-9);
    }

    #[test]
    fn monotone_cubic_interpolates_and_stays_monotone() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (x + 1.0).ln()).collect();
        let interp = MonotoneCubic::new(xs.clone(), ys).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..500 {
            let x = 9.5 * i as f64 / 499.0;
            let y = interp.eval(x);
            assert!(y >= prev - 1e-12);
            prev = y;
            assert!((y - (x + 1.0).ln()).abs() < 6e-3);
        }
    }
}
