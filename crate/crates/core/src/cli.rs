//! Command-line front end: parse a run configuration, dispatch to the
//! computation modules, and emit CSV/JSON/SVG artifacts.
//!
//! Configuration can come from flags or from a `key=value` text file passed
//! with `--config`; explicit flags override file values. Every CSV carries
//! a header row and 17-significant-digit numbers, so identical invocations
//! produce byte-identical files.
//!
//! Exit codes: 0 on success, 1 on usage/configuration errors, 2 when a
//! validation run finishes with failing checks.

use crate::asymptotics::tail_report;
use crate::dist::{OfferModel, ResidualSpec};
use crate::policy::{reconstruct_offer_cdf, PolicyCurve};
use crate::sim::{simulate_batch, summarize, SimConfig};
use crate::validate::{figure_replication, format_float, oracle_suite};
use crate::{price, stoptime, Error, Result};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "MOSER_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "moser",
    about = "Optimal selling with Poisson offer arrivals: policies, sale-price and time-to-sale laws, asymptotics, simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold policy mu, mu', h over a time grid (CSV `t,mu,mu_prime,h`)
    Policy(PolicyArgs),
    /// Sale-price CDF/density over an x grid (CSV `x,G,g` + summary JSON)
    Price(PriceArgs),
    /// Time-to-sale CDF with its deadline atom (CSV `r,H` + summary JSON)
    Stoptime(StoptimeArgs),
    /// Tail classification and large-t limits (JSON report)
    Asymptotics(AsymptoticsArgs),
    /// Seeded Monte Carlo of the bidding process (CSV samples + JSON summary)
    Simulate(SimulateArgs),
    /// Figure replications / closed-form oracle suites (JSON report + plot data)
    Validate(ValidateArgs),
    /// Recover the offer CDF from policy samples (CSV `t,mu` -> CSV `x,F`)
    Reconstruct(ReconstructArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// key=value configuration file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory (default: $MOSER_OUT_DIR, else ".")
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct FamilyArgs {
    /// offer family: uniform|exponential|pareto|beta|gamma|frechet|tabulated
    #[arg(long)]
    family: Option<String>,
    /// uniform support lower end
    #[arg(long)]
    a: Option<f64>,
    /// uniform support upper end
    #[arg(long)]
    b: Option<f64>,
    /// exponential mean / gamma scale
    #[arg(long)]
    eta: Option<f64>,
    /// pareto scale (support minimum)
    #[arg(long)]
    xm: Option<f64>,
    /// pareto/beta/gamma/frechet shape
    #[arg(long)]
    alpha: Option<f64>,
    /// beta second shape parameter
    #[arg(long)]
    beta: Option<f64>,
    /// two-column `x,F` CSV for the tabulated family
    #[arg(long)]
    cdf_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PolicyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    family: FamilyArgs,
    /// residual mean mu0 = E[X0]
    #[arg(long)]
    mu0: Option<f64>,
    /// offer arrival rate
    #[arg(long)]
    lambda: Option<f64>,
    /// single marketing period
    #[arg(long)]
    t: Option<f64>,
    /// time grid `start:stop:count` or comma list (overrides --t)
    #[arg(long)]
    t_grid: Option<String>,
}

#[derive(Args, Debug)]
struct PriceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    family: FamilyArgs,
    /// residual kind: same|zero
    #[arg(long)]
    residual: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// evaluation grid `lo:hi:count` (default derived from the model)
    #[arg(long)]
    x_grid: Option<String>,
}

#[derive(Args, Debug)]
struct StoptimeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    family: FamilyArgs,
    /// residual kind: same|zero (or give --mu0 directly)
    #[arg(long)]
    residual: Option<String>,
    /// residual mean; overrides --residual
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// evaluation grid for r (default `0:t:257`)
    #[arg(long)]
    r_grid: Option<String>,
}

#[derive(Args, Debug)]
struct AsymptoticsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    family: FamilyArgs,
    /// residual kind: same|zero
    #[arg(long)]
    residual: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// number of simulated bidding processes
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed (64-bit)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// figure id f2..f7 (histogram-vs-analytic replication)
    #[arg(long)]
    figure: Option<String>,
    /// run the closed-form oracle suite instead of a figure replication
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    lambda: Option<f64>,
    /// marketing periods for the oracle suite, e.g. `2,10`
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// CSV with `t,mu` columns (the policy export format is accepted)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
}

/// Parses argv and runs the selected subcommand; returns the process exit
/// code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Policy(args) => cmd_policy(args),
        Command::Price(args) => cmd_price(args),
        Command::Stoptime(args) => cmd_stoptime(args),
        Command::Asymptotics(args) => cmd_asymptotics(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Flag/config-file resolution: a flag that was given wins; otherwise the
/// config file entry (if any) is parsed.
struct Ctx {
    cfg: BTreeMap<String, String>,
    out_dir: PathBuf,
}

impl Ctx {
    fn new(common: &CommonArgs) -> Result<Self> {
        let mut cfg = BTreeMap::new();
        if let Some(path) = &common.config {
            let text = std::fs::read_to_string(path)?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidData(format!(
                        "config line {}: expected key=value, got {raw:?}",
                        lineno + 1
                    ))
                })?;
                cfg.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let out_dir = common
            .out_dir
            .clone()
            .or_else(|| cfg.get("out-dir").map(PathBuf::from))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { cfg, out_dir })
    }

    fn str_opt(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.cfg.get(key).cloned())
    }

    fn parse_opt<T: std::str::FromStr + Clone>(&self, flag: &Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag.clone());
        }
        match self.cfg.get(key) {
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::InvalidData(format!("config key {key}: cannot parse {raw:?}"))
            }),
            None => Ok(None),
        }
    }

    fn required<T>(&self, value: Option<T>, key: &str) -> Result<T> {
        value.ok_or_else(|| Error::InvalidData(format!("missing required option --{key}")))
    }

    fn req_f64(&self, flag: &Option<f64>, key: &str) -> Result<f64> {
        let v = self.parse_opt(flag, key)?;
        self.required(v, key)
    }

    fn build_offer(&self, fa: &FamilyArgs) -> Result<OfferModel> {
        let family = self.required(self.str_opt(&fa.family, "family"), "family")?;
        match family.as_str() {
            "uniform" => OfferModel::uniform(
                self.req_f64(&fa.a, "a")?,
                self.req_f64(&fa.b, "b")?,
            ),
            "exponential" => OfferModel::exponential(self.req_f64(&fa.eta, "eta")?),
            "pareto" => OfferModel::pareto(
                self.req_f64(&fa.xm, "xm")?,
                self.req_f64(&fa.alpha, "alpha")?,
            ),
            "beta" => OfferModel::beta(
                self.req_f64(&fa.alpha, "alpha")?,
                self.req_f64(&fa.beta, "beta")?,
            ),
            "gamma" => OfferModel::gamma(
                self.req_f64(&fa.alpha, "alpha")?,
                self.req_f64(&fa.eta, "eta")?,
            ),
            "frechet" => OfferModel::frechet(self.req_f64(&fa.alpha, "alpha")?),
            "tabulated" => {
                let path = fa
                    .cdf_file
                    .clone()
                    .or_else(|| self.cfg.get("cdf-file").map(PathBuf::from));
                let path = self.required(path, "cdf-file")?;
                let text = std::fs::read_to_string(path)?;
                OfferModel::tabulated_from_csv(&text)
            }
            other => Err(Error::InvalidData(format!("unknown family {other:?}"))),
        }
    }

    fn build_residual(&self, flag: &Option<String>, offer: &OfferModel) -> Result<ResidualSpec> {
        match self.str_opt(flag, "residual").as_deref().unwrap_or("same") {
            "same" => Ok(ResidualSpec::same_as(offer)),
            "zero" => Ok(ResidualSpec::zero()),
            other => Err(Error::InvalidData(format!(
                "unknown residual kind {other:?} (expected same|zero)"
            ))),
        }
    }

    fn write(&self, name: &str, content: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, content)?;
        eprintln!("wrote {}", path.display());
        Ok(path)
    }
}

/// Payload printing that tolerates a closed stdout (e.g. `moser ... | head`):
/// the files are the artifact of record, so a broken pipe must not abort.
fn emit(payload: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(payload.as_bytes());
}

/// `start:stop:count` linspace or a plain comma list.
fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::InvalidData(format!("bad grid {s:?}: {what}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("start"))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad("stop"))?;
        let count: usize = parts[2].parse().map_err(|_| bad("count"))?;
        if count < 2 || stop <= start {
            return Err(bad("need stop > start and count >= 2"));
        }
        Ok((0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad(p)))
            .collect()
    }
}

fn cmd_policy(args: PolicyArgs) -> Result<i32> {
    let ctx = Ctx::new(&args.common)?;
    let offer = ctx.build_offer(&args.family)?;
    let mu0 = ctx.req_f64(&args.mu0, "mu0")?;
    let lambda = ctx.req_f64(&args.lambda, "lambda")?;
    let curve = PolicyCurve::new(offer, mu0, lambda)?;
    let ts = match ctx.str_opt(&args.t_grid, "t-grid") {
        Some(g) => parse_grid(&g)?,
        None => vec![ctx.req_f64(&args.t, "t")?],
    };
    let mut csv = String::from("t,mu,mu_prime,h\n");
    for &t in &ts {
        if t < 0.0 {
            return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
        }
        csv.push_str(&format!(
            "{},{},{},{}\n",
            format_float(t),
            format_float(curve.mu(t)),
            format_float(curve.mu_prime(t)),
            format_float(curve.h_fn(t)),
        ));
    }
    emit(&csv);
    ctx.write("policy.csv", &csv)?;
    Ok(0)
}

#[derive(serde::Serialize)]
struct PriceSummary {
    t: f64,
    mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var_note: Option<String>,
}

fn cmd_price(args: PriceArgs) -> Result<i32> {
    let ctx = Ctx::new(&args.common)?;
    let offer = ctx.build_offer(&args.family)?;
    let residual = ctx.build_residual(&args.residual, &offer)?;
    let lambda = ctx.req_f64(&args.lambda, "lambda")?;
    let t = ctx.req_f64(&args.t, "t")?;
    let curve = PolicyCurve::new(offer.clone(), residual.mean(), lambda)?;
    let xs = match ctx.str_opt(&args.x_grid, "x-grid") {
        Some(g) => parse_grid(&g)?,
        None => {
            let lo = offer.support_min().min(0.0);
            let hi = if offer.support_max().is_finite() {
                offer.support_max()
            } else {
                curve.mu(t).max(offer.quantile(0.999)?) * 1.5
            };
            parse_grid(&format!("{lo}:{hi}:257"))?
        }
    };
    let has_density = offer.has_density() && residual.has_density();
    let mut csv = String::from("x,G,g\n");
    for &x in &xs {
        let g = if has_density {
            format_float(price::price_pdf(&curve, &residual, t, x)?)
        } else {
            String::new()
        };
        csv.push_str(&format!(
            "{},{},{g}\n",
            format_float(x),
            format_float(price::price_cdf(&curve, &residual, t, x)),
        ));
    }
    let (var, var_note) = match price::price_var(&curve, &residual, t) {
        Ok(v) => (Some(v), None),
        Err(Error::SecondMomentInfinite) => (None, Some("second moment infinite".to_string())),
        Err(e) => return Err(e),
    };
    let summary = PriceSummary { t, mean: price::price_mean(&curve, t), var, var_note };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    emit(&json);
    emit("\n");
    ctx.write("price.csv", &csv)?;
    ctx.write("price.json", &json)?;
    Ok(0)
}

#[derive(serde::Serialize)]
struct StopSummary {
    t: f64,
    atom: f64,
    mean: f64,
    var: f64,
}

fn cmd_stoptime(args: StoptimeArgs) -> Result<i32> {
    let ctx = Ctx::new(&args.common)?;
    let offer = ctx.build_offer(&args.family)?;
    let lambda = ctx.req_f64(&args.lambda, "lambda")?;
    let t = ctx.req_f64(&args.t, "t")?;
    let mu0 = match ctx.parse_opt(&args.mu0, "mu0")? {
        Some(v) => v,
        None => ctx.build_residual(&args.residual, &offer)?.mean(),
    };
    let curve = PolicyCurve::new(offer, mu0, lambda)?;
    let rs = match ctx.str_opt(&args.r_grid, "r-grid") {
        Some(g) => parse_grid(&g)?,
        None => parse_grid(&format!("0:{t}:257"))?,
    };
    let mut csv = String::from("r,H\n");
    for &r in &rs {
        csv.push_str(&format!(
            "{},{}\n",
            format_float(r),
            format_float(stoptime::stop_cdf(&curve, t, r)),
        ));
    }
    let summary = StopSummary {
        t,
        atom: stoptime::atom_prob(&curve, t),
        mean: stoptime::stop_mean(&curve, t),
        var: stoptime::stop_var(&curve, t),
    };
    // one-line record by design
    let json = serde_json::to_string(&summary).expect("summary serializes");
    emit(&json);
    emit("\n");
    ctx.write("stoptime.csv", &csv)?;
    ctx.write("stoptime.json", &json)?;
    Ok(0)
}

fn cmd_asymptotics(args: AsymptoticsArgs) -> Result<i32> {
    let ctx = Ctx::new(&args.common)?;
    let offer = ctx.build_offer(&args.family)?;
    let mu0 = match ctx.parse_opt(&args.mu0, "mu0")? {
        Some(v) => v,
        None => offer.mean().min(0.9 * offer.support_max()),
    };
    let lambda = ctx.parse_opt(&args.lambda, "lambda")?.unwrap_or(1.0);
    let curve = PolicyCurve::new(offer, mu0, lambda)?;
    let report = tail_report(&curve)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(&json);
    emit("\n");
    ctx.write("asymptotics.json", &json)?;
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let ctx = Ctx::new(&args.common)?;
    let offer = ctx.build_offer(&args.family)?;
    let residual = ctx.build_residual(&args.residual, &offer)?;
    let lambda = ctx.req_f64(&args.lambda, "lambda")?;
    let t = ctx.req_f64(&args.t, "t")?;
    let n = ctx.required(ctx.parse_opt(&args.n, "n")?, "n")?;
    let seed = ctx.parse_opt(&args.seed, "seed")?.unwrap_or(0);
    let config = SimConfig::new(offer, residual, lambda, t, n, seed)?;
    let batch = simulate_batch(&config);
    let mut csv = String::from("run,S,T,hit_deadline\n");
    for i in 0..batch.prices.len() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            i,
            format_float(batch.prices[i]),
            format_float(batch.times[i]),
            u8::from(batch.times[i] == t),
        ));
    }
    let summary = summarize(&batch)?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    emit(&json);
    emit("\n");
    ctx.write("simulate.csv", &csv)?;
    ctx.write("simulate_summary.json", &json)?;
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let ctx = Ctx::new(&args.common)?;
    let report = if args.oracle || ctx.cfg.get("oracle").is_some_and(|v| v == "true") {
        let offer = ctx.build_offer(&args.family)?;
        let lambda = ctx.parse_opt(&args.lambda, "lambda")?.unwrap_or(1.0);
        let ts = match ctx.str_opt(&args.t_grid, "t-grid") {
            Some(g) => parse_grid(&g)?,
            None => vec![2.0, 10.0],
        };
        let report = oracle_suite(&offer, lambda, &ts)?;
        ctx.write("validate_report.json", &report.to_json())?;
        report
    } else {
        let figure = ctx.required(ctx.str_opt(&args.figure, "figure"), "figure")?;
        let n = ctx.parse_opt(&args.n, "n")?.unwrap_or(100_000);
        let seed = ctx.parse_opt(&args.seed, "seed")?.unwrap_or(0);
        let out = figure_replication(&figure, n, seed)?;
        ctx.write("validate_report.json", &out.report.to_json())?;
        for (i, plot) in out.plots.iter().enumerate() {
            ctx.write(&format!("validate_{figure}_{i}.csv"), &plot.to_csv())?;
            ctx.write(&format!("validate_{figure}_{i}.svg"), &plot.to_svg())?;
        }
        out.report
    };
    emit(&report.to_json());
    emit("\n");
    Ok(if report.pass { 0 } else { 2 })
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<i32> {
    let ctx = Ctx::new(&args.common)?;
    let input = args
        .input
        .clone()
        .or_else(|| ctx.cfg.get("input").map(PathBuf::from));
    let input = ctx.required(input, "input")?;
    let lambda = ctx.req_f64(&args.lambda, "lambda")?;
    let (ts, mus) = read_policy_samples(&input)?;
    let model = reconstruct_offer_cdf(&ts, &mus, lambda)?;
    let mut csv = String::from("x,F\n");
    if let crate::dist::Family::Tabulated(tab) = model.family() {
        for (x, f) in tab.points() {
            csv.push_str(&format!("{},{}\n", format_float(x), format_float(f)));
        }
    }
    ctx.write("reconstruct.csv", &csv)?;
    Ok(0)
}

/// Reads `t` and `mu` columns from a CSV with a header row; extra columns
/// (the policy export has four) are ignored.
fn read_policy_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidData("empty policy sample file".into()))?;
    let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
    let t_col = cols.iter().position(|&c| c == "t").ok_or_else(|| {
        Error::InvalidData(format!("no `t` column in header {header:?}"))
    })?;
    let mu_col = cols.iter().position(|&c| c == "mu").ok_or_else(|| {
        Error::InvalidData(format!("no `mu` column in header {header:?}"))
    })?;
    let mut ts = Vec::new();
    let mut mus = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(|c| c.trim()).collect();
        if fields.len() <= t_col.max(mu_col) {
            return Err(Error::InvalidData(format!(
                "line {}: expected at least {} columns",
                lineno + 2,
                t_col.max(mu_col) + 1
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidData(format!("line {}: bad number {s:?}", lineno + 2)))
        };
        ts.push(parse(fields[t_col])?);
        mus.push(parse(fields[mu_col])?);
    }
    Ok((ts, mus))
}
