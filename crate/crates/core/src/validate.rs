//! Statistical validation harness: empirical-vs-analytic CDF comparison
//! with atom separation, closed-form-vs-quadrature oracle suites, and
//! reproducible histogram-overlay replications of the standard worked
//! setups. Goodness of fit uses the distribution-free DKW envelope, so the
//! pass thresholds carry exact finite-sample guarantees.

use crate::dist::{OfferModel, ResidualSpec};
use crate::numeric::{integrate, integrate_tail};
use crate::policy::PolicyCurve;
use crate::sim::{simulate_batch, summarize, SimConfig};
use crate::{price, stoptime, Error, Result};
use serde::Serialize;

/// Confidence parameter of the DKW envelope used for all CDF checks.
pub const DKW_DELTA: f64 = 0.001;

/// DKW bound: with probability `1 - delta`, the sup distance between the
/// empirical CDF of `n` i.i.d. samples and the truth stays below this.
pub fn dkw_bound(delta: f64, n: usize) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Round-trip-safe float formatting (17 significant digits), used by every
/// CSV emitter so outputs diff cleanly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One named check with its recorded statistic and threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            note: None,
        }
    }

    fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            statistic: 0.0,
            threshold: 0.0,
            pass: true,
            note: Some(format!("skipped: {}", reason.into())),
        }
    }
}

/// Machine-readable validation report; `pass` iff every check passes.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    pub family: String,
    pub params: String,
    pub residual: String,
    pub lambda: f64,
    pub t: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ValidationReport {
    fn finalize(mut self) -> Self {
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Sup-distance between an empirical CDF and an analytic one, with an
/// optional atom handled separately: samples at the atom location are split
/// off, the KS scan runs on the continuous part (still normalized by the
/// full sample count), and the atom mass is compared as `|freq - mass|`.
#[derive(Debug, Clone, Copy)]
pub struct CdfDistance {
    pub sup: f64,
    pub atom_freq: Option<f64>,
    pub atom_dev: Option<f64>,
}

pub fn cdf_distance<F: Fn(f64) -> f64>(
    samples: &[f64],
    analytic: F,
    atom: Option<(f64, f64)>,
) -> Result<CdfDistance> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::TooFewSamples { n, min: 100 });
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n_f = n as f64;
    let (continuous, atom_freq, atom_dev) = match atom {
        Some((loc, mass)) => {
            let at: usize = sorted.iter().filter(|&&x| x == loc).count();
            let freq = at as f64 / n_f;
            let rest: Vec<f64> = sorted.iter().copied().filter(|&x| x != loc).collect();
            (rest, Some(freq), Some((freq - mass).abs()))
        }
        None => (sorted, None, None),
    };
    let mut sup = 0.0_f64;
    for (i, &x) in continuous.iter().enumerate() {
        let h = analytic(x);
        sup = sup.max(((i + 1) as f64 / n_f - h).abs());
        sup = sup.max((i as f64 / n_f - h).abs());
    }
    Ok(CdfDistance { sup, atom_freq, atom_dev })
}

/// Total mass and first moment of a sale-price density by piecewise
/// quadrature between its analytic breakpoints.
fn pdf_mass_and_mean(curve: &PolicyCurve, residual: &ResidualSpec, t: f64) -> Result<(f64, f64)> {
    let g = |x: f64| price::price_pdf(curve, residual, t, x).expect("density exists");
    let gx = |x: f64| x * g(x);
    let lo = curve.offer().support_min().min(0.0);
    let m = curve.mu(t);
    let breaks = [lo, curve.mu0().max(lo), m];
    let mut mass = 0.0;
    let mut mean = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            mass += integrate(&g, w[0], w[1], 1e-9, 1e-12);
            mean += integrate(&gx, w[0], w[1], 1e-9, 1e-12);
        }
    }
    let hi = curve.offer().support_max();
    if hi.is_finite() {
        mass += integrate(&g, m, hi, 1e-9, 1e-12);
        mean += integrate(&gx, m, hi, 1e-9, 1e-12);
    } else {
        mass += integrate_tail(&g, m, 1e-9, 1e-12);
        mean += integrate_tail(&gx, m, 1e-9, 1e-12);
    }
    Ok((mass, mean))
}

/// Cross-checks every closed form against its independent numeric route for
/// one worked family (`F0 = F`) on a grid of marketing periods.
pub fn oracle_suite(offer: &OfferModel, lambda: f64, ts: &[f64]) -> Result<ValidationReport> {
    match offer.family_name() {
        "uniform" | "exponential" | "pareto" => {}
        other => {
            return Err(Error::Domain(format!(
                "oracle suite covers the worked families only, got {other}"
            )))
        }
    }
    let residual = ResidualSpec::same_as(offer);
    let mu0 = offer.mean();
    let closed = PolicyCurve::new(offer.clone(), mu0, lambda)?;
    let numeric = PolicyCurve::new_numeric(offer.clone(), mu0, lambda)?;
    let mut checks = Vec::new();
    for &t in ts {
        let tag = format!("t={t}");
        let mu_c = closed.mu(t);
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-30);

        checks.push(Check::new(
            format!("mu_closed_vs_numeric_psi[{tag}]"),
            rel(mu_c, numeric.mu(t)),
            1e-8,
        ));
        checks.push(Check::new(
            format!("mu_closed_vs_ode[{tag}]"),
            rel(mu_c, closed.mu_ode(t)?),
            1e-7,
        ));
        checks.push(Check::new(
            format!("psi_identity[{tag}]"),
            (closed.psi(mu_c)? - lambda * t).abs() / (lambda * t).max(1.0),
            1e-8,
        ));

        // price law: closed fast paths vs generic assembly on the numeric
        // curve, plus internal consistency of the density
        let mut sup_pdf = 0.0_f64;
        let mut sup_cdf = 0.0_f64;
        for i in 0..=100 {
            let x = mu0 * 0.5 + (mu_c * 1.3 - mu0 * 0.5) * i as f64 / 100.0;
            let fast = price::price_pdf(&closed, &residual, t, x)?;
            let generic = price::price_pdf(&numeric, &residual, t, x)?;
            sup_pdf = sup_pdf.max((fast - generic).abs());
            sup_cdf = sup_cdf.max(
                (price::price_cdf(&closed, &residual, t, x)
                    - price::price_cdf(&numeric, &residual, t, x))
                .abs(),
            );
        }
        checks.push(Check::new(format!("price_pdf_closed_vs_generic[{tag}]"), sup_pdf, 1e-6));
        checks.push(Check::new(format!("price_cdf_closed_vs_generic[{tag}]"), sup_cdf, 1e-6));

        let (mass, mean) = pdf_mass_and_mean(&closed, &residual, t)?;
        checks.push(Check::new(format!("price_pdf_total_mass[{tag}]"), (mass - 1.0).abs(), 1e-6));
        checks.push(Check::new(format!("price_pdf_mean_vs_mu[{tag}]"), (mean - mu_c).abs(), 1e-6));

        match price::price_var(&closed, &residual, t) {
            Ok(v) => {
                let q = price::price_var_quadrature(&closed, &residual, t)?;
                checks.push(Check::new(format!("price_var_closed_vs_generic[{tag}]"), rel(v, q), 1e-6));
            }
            Err(Error::SecondMomentInfinite) => {
                checks.push(Check::skipped(
                    format!("price_var_closed_vs_generic[{tag}]"),
                    "SecondMomentInfinite",
                ));
            }
            Err(e) => return Err(e),
        }

        // stopping time: atom + continuous part closes to one; closed
        // moments vs quadrature; mean vs tail integral of the CDF
        let atom = stoptime::atom_prob(&closed, t);
        let closure = (stoptime::stop_cdf(&closed, t, t * (1.0 - 1e-12)) + atom - 1.0).abs();
        checks.push(Check::new(format!("stop_cdf_plus_atom_is_one[{tag}]"), closure, 1e-10));

        let mean_t = stoptime::stop_mean(&closed, t);
        let mean_tail = integrate(&|r| 1.0 - stoptime::stop_cdf(&closed, t, r), 0.0, t, 1e-10, 1e-12);
        checks.push(Check::new(
            format!("stop_mean_vs_cdf_tail_integral[{tag}]"),
            (mean_t - mean_tail).abs(),
            1e-6,
        ));

        let var_c = stoptime::stop_var(&closed, t);
        let var_q = stoptime::stop_var_quadrature(&closed, t);
        checks.push(Check::new(
            format!("stop_var_closed_vs_quadrature[{tag}]"),
            rel(var_c, var_q),
            1e-8,
        ));
    }
    Ok(ValidationReport {
        figure: None,
        family: offer.family_name().into(),
        params: offer.params_label(),
        residual: residual.label(),
        lambda,
        t: ts.to_vec(),
        n: None,
        seed: None,
        checks,
        pass: false,
    }
    .finalize())
}

/// Overlay data for one comparison: grid point, analytic value, empirical
/// value.
#[derive(Debug, Clone)]
pub struct PlotData {
    pub label: String,
    pub rows: Vec<(f64, f64, f64)>,
}

impl PlotData {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,analytic,empirical\n");
        for &(x, a, e) in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                format_float(x),
                format_float(a),
                format_float(e)
            ));
        }
        out
    }

    /// Minimal SVG rendering: the analytic curve and the empirical overlay
    /// as two polylines.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (640.0, 400.0, 40.0);
        let xs: Vec<f64> = self.rows.iter().map(|r| r.0).collect();
        let lo_x = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi_x = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ys: Vec<f64> = self.rows.iter().flat_map(|r| [r.1, r.2]).collect();
        let lo_y = ys.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        let hi_y = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(1e-12);
        let sx = |x: f64| pad + (x - lo_x) / (hi_x - lo_x).max(1e-300) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - lo_y) / (hi_y - lo_y).max(1e-300) * (h - 2.0 * pad);
        let path = |sel: fn(&(f64, f64, f64)) -> f64| {
            self.rows
                .iter()
                .map(|r| format!("{:.2},{:.2}", sx(r.0), sy(sel(r))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            concat!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
                "viewBox=\"0 0 {w} {h}\">\n",
                "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
                "<text x=\"{tx}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{label}</text>\n",
                "<line x1=\"{pad}\" y1=\"{hb}\" x2=\"{wr}\" y2=\"{hb}\" stroke=\"black\"/>\n",
                "<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{hb}\" stroke=\"black\"/>\n",
                "<polyline points=\"{emp}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
                "<polyline points=\"{ana}\" fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\"/>\n",
                "</svg>\n"
            ),
            w = w,
            h = h,
            tx = w / 2.0,
            label = self.label,
            pad = pad,
            hb = h - pad,
            wr = w - pad,
            emp = path(|r| r.2),
            ana = path(|r| r.1),
        )
    }
}

/// Replication output: the pass/fail report plus overlay data per panel.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub report: ValidationReport,
    pub plots: Vec<PlotData>,
}

/// Reruns one of the standard worked comparisons (`f2`..`f7`): simulate the
/// bidding process at the documented parameters and test the empirical law
/// against the analytic one at the DKW envelope.
///
/// `f2`/`f3`/`f4` are sale-price comparisons for uniform(1,3),
/// exponential(2), Pareto(1,3) at `t in {2, 10}`; `f5`/`f6` are
/// time-to-sale comparisons for the first two at `t = 10`; `f7` is the
/// time-to-sale comparison for Pareto(1, 1.5) at `t = 30`. All use
/// `lambda = 1` and `F0 = F`.
pub fn figure_replication(figure: &str, n: usize, seed: u64) -> Result<FigureOutput> {
    if n < 10_000 {
        return Err(Error::TooFewSamples { n, min: 10_000 });
    }
    let (offer, ts, kind) = match figure {
        "f2" => (OfferModel::uniform(1.0, 3.0)?, vec![2.0, 10.0], FigureKind::Price),
        "f3" => (OfferModel::exponential(2.0)?, vec![2.0, 10.0], FigureKind::Price),
        "f4" => (OfferModel::pareto(1.0, 3.0)?, vec![2.0, 10.0], FigureKind::Price),
        "f5" => (OfferModel::uniform(1.0, 3.0)?, vec![10.0], FigureKind::Time),
        "f6" => (OfferModel::exponential(2.0)?, vec![10.0], FigureKind::Time),
        "f7" => (OfferModel::pareto(1.0, 1.5)?, vec![30.0], FigureKind::Time),
        other => return Err(Error::UnknownFigure(other.into())),
    };
    let lambda = 1.0;
    let residual = ResidualSpec::same_as(&offer);
    let threshold = dkw_bound(DKW_DELTA, n);
    let mut checks = Vec::new();
    let mut plots = Vec::new();
    for (idx, &t) in ts.iter().enumerate() {
        let config = SimConfig::new(
            offer.clone(),
            residual.clone(),
            lambda,
            t,
            n,
            seed.wrapping_add(idx as u64),
        )?;
        let batch = simulate_batch(&config);
        let curve = config.curve();
        let tag = format!("t={t}");
        match kind {
            FigureKind::Price => {
                let dist = cdf_distance(
                    &batch.prices,
                    |x| price::price_cdf(curve, &residual, t, x),
                    None,
                )?;
                checks.push(Check::new(
                    format!("price_cdf_sup_distance[{tag}]"),
                    dist.sup,
                    threshold,
                ));
                let lo = offer.support_min();
                let hi = batch
                    .prices
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
                    .max(curve.mu(t));
                let ecdf = batch.price_ecdf();
                let rows = (0..=256)
                    .map(|i| {
                        let x = lo + (hi - lo) * i as f64 / 256.0;
                        (x, price::price_cdf(curve, &residual, t, x), ecdf.eval(x))
                    })
                    .collect();
                plots.push(PlotData { label: format!("{figure} sale price, {tag}"), rows });
            }
            FigureKind::Time => {
                let atom = stoptime::atom_prob(curve, t);
                let dist = cdf_distance(
                    &batch.times,
                    |r| stoptime::stop_cdf(curve, t, r),
                    Some((t, atom)),
                )?;
                checks.push(Check::new(
                    format!("time_cdf_sup_distance[{tag}]"),
                    dist.sup,
                    threshold,
                ));
                let se = (atom * (1.0 - atom) / n as f64).sqrt();
                checks.push(Check::new(
                    format!("atom_frequency_deviation[{tag}]"),
                    dist.atom_dev.unwrap_or(f64::NAN),
                    4.0 * se,
                ));
                let ecdf = batch.time_ecdf();
                let rows = (0..=256)
                    .map(|i| {
                        let r = t * i as f64 / 256.0;
                        (r, stoptime::stop_cdf(curve, t, r), ecdf.eval(r))
                    })
                    .collect();
                plots.push(PlotData { label: format!("{figure} time to sale, {tag}"), rows });
            }
        }
        // the sample means double as smoke checks of the analytic moments
        let summary = summarize(&batch)?;
        match kind {
            FigureKind::Price => {
                let want = curve.mu(t);
                checks.push(Check::new(
                    format!("price_mean_within_4se[{tag}]"),
                    (summary.price_mean - want).abs(),
                    4.0 * summary.price_mean_se,
                ));
            }
            FigureKind::Time => {
                let want = stoptime::stop_mean(curve, t);
                checks.push(Check::new(
                    format!("time_mean_within_4se[{tag}]"),
                    (summary.time_mean - want).abs(),
                    4.0 * summary.time_mean_se,
                ));
            }
        }
    }
    let report = ValidationReport {
        figure: Some(figure.into()),
        family: offer.family_name().into(),
        params: offer.params_label(),
        residual: residual.label(),
        lambda,
        t: ts,
        n: Some(n),
        seed: Some(seed),
        checks,
        pass: false,
    }
    .finalize();
    Ok(FigureOutput { report, plots })
}

#[derive(Clone, Copy)]
enum FigureKind {
    Price,
    Time,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SplitMix64;

    #[test]
    fn dkw_bound_value() {
        // sqrt(ln(2000) / 2e5) at n = 1e5
        let b = dkw_bound(0.001, 100_000);
        assert!((b - 0.0061655).abs() < 1e-6, "{b}");
    }

    #[test]
    fn null_case_stays_below_dkw() {
        // samples drawn from the analytic law itself
        let model = OfferModel::uniform(1.0, 3.0).unwrap();
        let mut rng = SplitMix64::substream(7, 0);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| model.quantile(rng.next_open01()).unwrap())
            .collect();
        let d = cdf_distance(&samples, |x| model.cdf(x), None).unwrap();
        assert!(d.sup < dkw_bound(0.001, samples.len()), "sup {}", d.sup);
    }

    #[test]
    fn shifted_samples_fail() {
        let model = OfferModel::uniform(1.0, 3.0).unwrap();
        let mut rng = SplitMix64::substream(7, 1);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| model.quantile(rng.next_open01()).unwrap() + 0.1)
            .collect();
        let d = cdf_distance(&samples, |x| model.cdf(x), None).unwrap();
        assert!(d.sup >= 0.05 - 1e-9, "sup {}", d.sup);
        assert!(d.sup > dkw_bound(0.001, samples.len()));
    }

    #[test]
    fn too_few_samples_rejected() {
        let samples = vec![1.0; 50];
        assert!(matches!(
            cdf_distance(&samples, |_| 0.5, None),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn oracle_suite_worked_families_pass() {
        for offer in [
            OfferModel::uniform(1.0, 3.0).unwrap(),
            OfferModel::exponential(2.0).unwrap(),
            OfferModel::pareto(1.0, 3.0).unwrap(),
        ] {
            let report = oracle_suite(&offer, 1.0, &[2.0, 10.0]).unwrap();
            assert!(
                report.pass,
                "{}: {:?}",
                offer.label(),
                report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{} = {} > {}", c.name, c.statistic, c.threshold))
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn oracle_suite_skips_infinite_variance() {
        let offer = OfferModel::pareto(1.0, 1.5).unwrap();
        let report = oracle_suite(&offer, 1.0, &[2.0]).unwrap();
        assert!(report.pass);
        let skipped: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.note.as_deref().is_some_and(|n| n.contains("SecondMomentInfinite")))
            .collect();
        assert_eq!(skipped.len(), 1);
    }

    #[test]
    fn oracle_suite_rejects_other_families() {
        let offer = OfferModel::beta(2.0, 2.0).unwrap();
        assert!(oracle_suite(&offer, 1.0, &[2.0]).is_err());
    }

    #[test]
    fn figure_replication_smoke() {
        for fig in ["f2", "f5", "f7"] {
            let out = figure_replication(fig, 20_000, 11).unwrap();
            assert!(
                out.report.pass,
                "{fig}: {:?}",
                out.report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{} = {} > {}", c.name, c.statistic, c.threshold))
                    .collect::<Vec<_>>()
            );
            assert!(!out.plots.is_empty());
            let csv = out.plots[0].to_csv();
            assert!(csv.starts_with("x,analytic,empirical\n"));
            let svg = out.plots[0].to_svg();
            assert!(svg.contains("<polyline"));
            let json = out.report.to_json();
            assert!(json.contains("\"figure\""));
        }
    }

    #[test]
    fn figure_replication_is_reproducible() {
        let a = figure_replication("f6", 10_000, 3).unwrap();
        let b = figure_replication("f6", 10_000, 3).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(a.plots[0].to_csv(), b.plots[0].to_csv());
    }

    #[test]
    fn unknown_figure_and_small_n() {
        assert!(matches!(
            figure_replication("f9", 20_000, 0),
            Err(Error::UnknownFigure(_))
        ));
        assert!(matches!(
            figure_replication("f2", 100, 0),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
