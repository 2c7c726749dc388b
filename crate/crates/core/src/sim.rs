//! Seeded Monte Carlo simulation of the bidding process.
//!
//! Each run replays the process exactly: exponential inter-arrival gaps,
//! i.i.d. offers drawn by inverse CDF, acceptance iff the offer clears the
//! current threshold `mu(t_rem)` (ties accept), and a residual draw at the
//! deadline. Run `i` uses its own counter-derived RNG substream, so a batch
//! is bit-identical no matter how it is scheduled across threads.

use crate::dist::{OfferModel, ResidualSpec};
use crate::numeric::MonotoneCubic;
use crate::policy::PolicyCurve;
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// SplitMix64: the standard 64-bit splittable generator. Fast, tiny state,
/// and any state is a valid stream, which makes per-run substreams trivial.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for counter `index` under `seed`: both enter the
    /// finalizer, so streams are decorrelated and order-insensitive.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self { state: seed ^ mix64(index.wrapping_mul(GOLDEN).wrapping_add(GOLDEN)) }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw in the open interval (0, 1); never returns 0 or 1, so
    /// quantile transforms are always defined.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }
}

/// Threshold evaluator for the hot loop: the closed form when the curve has
/// one, otherwise a monotone-cubic table over `[0, t]` with verified
/// sup-error below `1e-6`.
#[derive(Debug, Clone)]
enum ThresholdEval {
    Closed,
    Interp(MonotoneCubic),
}

impl ThresholdEval {
    fn build(curve: &PolicyCurve, horizon: f64) -> Result<Self> {
        if curve.is_closed_form() || horizon <= 0.0 {
            return Ok(Self::Closed);
        }
        let lambda = curve.lambda();
        let mut nodes = 4096usize;
        for _ in 0..3 {
            // log-spaced in 1 + lambda t: dense where mu bends hardest
            let scale = (1.0 + lambda * horizon).ln();
            let grid: Vec<f64> = (0..=nodes)
                .map(|i| ((scale * i as f64 / nodes as f64).exp() - 1.0) / lambda)
                .collect();
            let mus: Vec<f64> = grid.iter().map(|&t| curve.mu(t)).collect();
            let interp = MonotoneCubic::new(grid.clone(), mus)?;
            // verify the sup-error guarantee on a panel-midpoint subsample
            let step = (nodes / 512).max(1);
            let mut ok = true;
            for i in (0..nodes).step_by(step) {
                let tm = 0.5 * (grid[i] + grid[i + 1]);
                if (interp.eval(tm) - curve.mu(tm)).abs() > 1e-6 {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Self::Interp(interp));
            }
            nodes *= 2;
        }
        Err(Error::Domain("policy interpolation failed to reach 1e-6".into()))
    }

    #[inline]
    fn threshold(&self, curve: &PolicyCurve, t_rem: f64) -> f64 {
        match self {
            Self::Closed => curve.mu(t_rem),
            Self::Interp(interp) => interp.eval(t_rem),
        }
    }
}

/// A fully specified simulation: market model, horizon, run count, seed.
/// The policy curve is built internally, so it always matches the offer
/// model and the residual mean.
#[derive(Debug, Clone)]
pub struct SimConfig {
    offer: OfferModel,
    residual: ResidualSpec,
    lambda: f64,
    t: f64,
    n_runs: usize,
    seed: u64,
    curve: PolicyCurve,
    eval: ThresholdEval,
}

impl SimConfig {
    pub fn new(
        offer: OfferModel,
        residual: ResidualSpec,
        lambda: f64,
        t: f64,
        n_runs: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_runs == 0 {
            return Err(Error::InvalidParameter {
                name: "n_runs",
                reason: "need at least one run".into(),
            });
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("need finite t >= 0, got {t}"),
            });
        }
        let curve = PolicyCurve::new(offer.clone(), residual.mean(), lambda)?;
        let eval = ThresholdEval::build(&curve, t)?;
        Ok(Self { offer, residual, lambda, t, n_runs, seed, curve, eval })
    }

    pub fn curve(&self) -> &PolicyCurve {
        &self.curve
    }

    pub fn residual(&self) -> &ResidualSpec {
        &self.residual
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }

    pub fn n_runs(&self) -> usize {
        self.n_runs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Simulation output: one realized `(price, time)` pair per run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimBatch {
    pub prices: Vec<f64>,
    pub times: Vec<f64>,
    /// Runs that reached the deadline (their time equals `t` exactly).
    pub atom_count: usize,
}

/// One bidding process under run substream `run`; returns the realized
/// `(sale price, time to sale)`.
pub fn simulate_run(config: &SimConfig, run: u64) -> (f64, f64) {
    let mut rng = SplitMix64::substream(config.seed, run);
    let mut t_rem = config.t;
    loop {
        let gap = -rng.next_open01().ln() / config.lambda;
        t_rem -= gap;
        if t_rem <= 0.0 {
            let salvage = config
                .residual
                .quantile(rng.next_open01())
                .expect("open-interval draw is a valid quantile argument");
            return (salvage, config.t);
        }
        let offer = config
            .offer
            .quantile(rng.next_open01())
            .expect("open-interval draw is a valid quantile argument");
        if offer >= self_threshold(config, t_rem) {
            return (offer, config.t - t_rem);
        }
    }
}

#[inline]
fn self_threshold(config: &SimConfig, t_rem: f64) -> f64 {
    config.eval.threshold(&config.curve, t_rem)
}

/// Runs the whole batch. With the `parallel` feature the runs fan out over
/// a thread pool; output is bit-identical to sequential execution because
/// every run owns its substream and results are collected by index.
pub fn simulate_batch(config: &SimConfig) -> SimBatch {
    #[cfg(feature = "parallel")]
    let pairs: Vec<(f64, f64)> = (0..config.n_runs as u64)
        .into_par_iter()
        .map(|i| simulate_run(config, i))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let pairs: Vec<(f64, f64)> = (0..config.n_runs as u64)
        .map(|i| simulate_run(config, i))
        .collect();
    collect_batch(config, pairs)
}

/// Sequential reference execution of the same batch.
pub fn simulate_batch_sequential(config: &SimConfig) -> SimBatch {
    let pairs: Vec<(f64, f64)> = (0..config.n_runs as u64)
        .map(|i| simulate_run(config, i))
        .collect();
    collect_batch(config, pairs)
}

fn collect_batch(config: &SimConfig, pairs: Vec<(f64, f64)>) -> SimBatch {
    let mut prices = Vec::with_capacity(pairs.len());
    let mut times = Vec::with_capacity(pairs.len());
    let mut atom_count = 0;
    for (s, t) in pairs {
        if t == config.t {
            atom_count += 1;
        }
        prices.push(s);
        times.push(t);
    }
    SimBatch { prices, times, atom_count }
}

/// Sample statistics of one batch, with standard errors.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Summary {
    pub n: usize,
    pub price_mean: f64,
    pub price_var: f64,
    pub price_mean_se: f64,
    pub price_var_se: f64,
    pub time_mean: f64,
    pub time_var: f64,
    pub time_mean_se: f64,
    pub time_var_se: f64,
    pub atom_freq: f64,
    pub atom_freq_se: f64,
}

pub fn summarize(batch: &SimBatch) -> Result<Summary> {
    let n = batch.prices.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let (price_mean, price_var, price_mean_se, price_var_se) = moments(&batch.prices);
    let (time_mean, time_var, time_mean_se, time_var_se) = moments(&batch.times);
    let atom_freq = batch.atom_count as f64 / n as f64;
    let atom_freq_se = (atom_freq * (1.0 - atom_freq) / n as f64).sqrt();
    Ok(Summary {
        n,
        price_mean,
        price_var,
        price_mean_se,
        price_var_se,
        time_mean,
        time_var,
        time_mean_se,
        time_var_se,
        atom_freq,
        atom_freq_se,
    })
}

fn moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0, 0.0, 0.0);
    }
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    let var = m2 / (n - 1.0);
    m2 /= n;
    m4 /= n;
    let mean_se = (var / n).sqrt();
    // asymptotic SE of the sample variance
    let var_se = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    (mean, var, mean_se, var_se)
}

/// Empirical CDF over a sorted copy of the samples.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Self { sorted }
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

impl SimBatch {
    pub fn price_ecdf(&self) -> Ecdf {
        Ecdf::new(&self.prices)
    }

    pub fn time_ecdf(&self) -> Ecdf {
        Ecdf::new(&self.times)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stoptime;

    fn worked_uniform(n: usize, t: f64, seed: u64) -> SimConfig {
        let offer = OfferModel::uniform(1.0, 3.0).unwrap();
        let residual = ResidualSpec::same_as(&offer);
        SimConfig::new(offer, residual, 1.0, t, n, seed).unwrap()
    }

    #[test]
    fn deterministic_replay_and_thread_independence() {
        let config = worked_uniform(20_000, 10.0, 42);
        let a = simulate_batch(&config);
        let b = simulate_batch(&config);
        assert_eq!(a, b);
        let seq = simulate_batch_sequential(&config);
        assert_eq!(a, seq);
        // a different seed gives a different batch
        let other = simulate_batch(&worked_uniform(20_000, 10.0, 43));
        assert_ne!(a, other);
    }

    #[test]
    fn zero_horizon_draws_residual_immediately() {
        let config = worked_uniform(5_000, 0.0, 7);
        let batch = simulate_batch(&config);
        assert_eq!(batch.atom_count, 5_000);
        assert!(batch.times.iter().all(|&t| t == 0.0));
        // prices are residual draws: uniform(1,3) has mean 2
        let s = summarize(&batch).unwrap();
        assert!((s.price_mean - 2.0).abs() < 4.0 * s.price_mean_se);
    }

    #[test]
    fn tiny_rate_always_hits_deadline() {
        let offer = OfferModel::uniform(1.0, 3.0).unwrap();
        let residual = ResidualSpec::same_as(&offer);
        let config = SimConfig::new(offer, residual, 1e-9, 1.0, 2_000, 3).unwrap();
        let batch = simulate_batch(&config);
        assert_eq!(batch.atom_count, 2_000);
    }

    #[test]
    fn single_run_batch() {
        let config = worked_uniform(1, 10.0, 0);
        let batch = simulate_batch(&config);
        assert_eq!(batch.prices.len(), 1);
        assert_eq!(batch.times.len(), 1);
        assert!(summarize(&batch).is_ok());
    }

    #[test]
    fn uniform_moments_match_theory() {
        let config = worked_uniform(100_000, 10.0, 12345);
        let batch = simulate_batch(&config);
        let s = summarize(&batch).unwrap();
        // E[S_10] = 3 - 4/14
        let want_mean = 3.0 - 4.0 / 14.0;
        assert!(
            (s.price_mean - want_mean).abs() < 4.0 * s.price_mean_se,
            "mean {} vs {want_mean} (se {})",
            s.price_mean,
            s.price_mean_se
        );
        // atom probability (4/14)^2
        let want_atom = (4.0_f64 / 14.0).powi(2);
        assert!(
            (s.atom_freq - want_atom).abs() < 4.0 * s.atom_freq_se,
            "atom {} vs {want_atom}",
            s.atom_freq
        );
        // E[T_10] from the closed form
        let want_time = stoptime::stop_mean(config.curve(), 10.0);
        assert!((s.time_mean - want_time).abs() < 4.0 * s.time_mean_se);
    }

    #[test]
    fn exponential_moments_match_theory() {
        let offer = OfferModel::exponential(2.0).unwrap();
        let residual = ResidualSpec::same_as(&offer);
        let config = SimConfig::new(offer, residual, 1.0, 10.0, 100_000, 99).unwrap();
        let batch = simulate_batch(&config);
        let s = summarize(&batch).unwrap();
        let e = std::f64::consts::E;
        let want_time = 5.0 * (1.0 + e / (10.0 + e));
        assert!(
            (s.time_mean - want_time).abs() < 4.0 * s.time_mean_se,
            "time mean {} vs {want_time}",
            s.time_mean
        );
        let want_price = 2.0 * (10.0_f64 + e).ln();
        assert!(
            (s.price_mean - want_price).abs() < 4.0 * s.price_mean_se,
            "price mean {} vs {want_price}",
            s.price_mean
        );
        // variance within 5 combined standard errors
        let want_var = crate::price::price_var(config.curve(), config.residual(), 10.0).unwrap();
        assert!(
            (s.price_var - want_var).abs() < 5.0 * s.price_var_se,
            "price var {} vs {want_var}",
            s.price_var
        );
    }

    #[test]
    fn interpolated_threshold_matches_exact_policy() {
        // Numeric-psi family: the hot loop runs off the monotone table.
        let offer = OfferModel::beta(2.0, 2.0).unwrap();
        let residual = ResidualSpec::zero();
        let config = SimConfig::new(offer, residual, 1.0, 10.0, 1_000, 5).unwrap();
        assert!(matches!(config.eval, ThresholdEval::Interp(_)));
        for i in 0..200 {
            let t = 10.0 * (i as f64 + 0.5) / 200.0;
            let fast = self_threshold(&config, t);
            let exact = config.curve().mu(t);
            assert!((fast - exact).abs() <= 1e-6, "t={t}: {fast} vs {exact}");
        }
        let batch = simulate_batch(&config);
        assert_eq!(batch.prices.len(), 1_000);
    }

    #[test]
    fn monte_carlo_phi_check_via_quantile_sampling() {
        // phi(x) = E[(X - x)+] against quantile-transform sampling.
        let heavy = [
            (OfferModel::uniform(1.0, 3.0).unwrap(), 1.8, 1_000_000),
            (OfferModel::exponential(2.0).unwrap(), 1.0, 1_000_000),
            (OfferModel::pareto(1.0, 3.0).unwrap(), 1.5, 1_000_000),
            (OfferModel::frechet(2.0).unwrap(), 1.0, 1_000_000),
            (OfferModel::beta(2.0, 2.0).unwrap(), 0.4, 100_000),
            (OfferModel::gamma(2.0, 1.0).unwrap(), 1.5, 100_000),
        ];
        for (model, x, n) in heavy {
            let mut rng = SplitMix64::substream(2024, 1);
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for _ in 0..n {
                let draw = model.quantile(rng.next_open01()).unwrap();
                let v = (draw - x).max(0.0);
                sum += v;
                sum2 += v * v;
            }
            let mean = sum / n as f64;
            let var = (sum2 / n as f64 - mean * mean).max(0.0);
            let se = (var / n as f64).sqrt();
            let want = model.phi(x);
            assert!(
                (mean - want).abs() < 4.0 * se,
                "{}: MC {mean} vs phi {want} (se {se})",
                model.label()
            );
        }
    }

    #[test]
    fn summarize_rejects_empty_and_handles_constant() {
        let batch = SimBatch { prices: vec![], times: vec![], atom_count: 0 };
        assert!(matches!(summarize(&batch), Err(Error::EmptyBatch)));
        let batch = SimBatch {
            prices: vec![2.0, 2.0, 2.0],
            times: vec![1.0, 1.0, 1.0],
            atom_count: 0,
        };
        let s = summarize(&batch).unwrap();
        assert_eq!(s.price_var, 0.0);
        assert_eq!(s.time_var, 0.0);
    }

    #[test]
    fn ecdf_basics() {
        let e = Ecdf::new(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(1.0), 0.25);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(5.0), 1.0);
    }
}
