//! Browser bindings for the optimal-selling library.
//!
//! Three interactive operations, each taking a JSON market description and
//! returning JSON curve data ready for canvas plotting:
//! - [`policy_curve`]: the optimal threshold `mu(t)` and hazard `h(t)`,
//! - [`price_distribution`]: the sale-price CDF/density at one `t`, with an
//!   optional Monte Carlo overlay,
//! - [`stop_time`]: the time-to-sale CDF, its deadline atom, the limiting
//!   normalized law, and an optional Monte Carlo overlay.
//!
//! Build with `wasm-pack build --target web` and open `www/index.html`.

use moser::asymptotics::{classify_tail, that_limit};
use moser::dist::{OfferModel, ResidualSpec};
use moser::policy::PolicyCurve;
use moser::sim::{simulate_batch, SimConfig};
use moser::{price, stoptime};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Market description shared by all three operations.
#[derive(Debug, Deserialize)]
struct MarketSpec {
    family: String,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    b: Option<f64>,
    #[serde(default)]
    eta: Option<f64>,
    #[serde(default)]
    xm: Option<f64>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default = "one")]
    lambda: f64,
    /// residual kind: "same" (default) or "zero"
    #[serde(default)]
    residual: Option<String>,
    /// explicit residual mean; honored by `policy_curve` only
    #[serde(default)]
    mu0: Option<f64>,
}

fn one() -> f64 {
    1.0
}

struct Market {
    offer: OfferModel,
    residual: ResidualSpec,
    lambda: f64,
    mu0_override: Option<f64>,
}

fn build_market(json: &str) -> Result<Market, String> {
    let spec: MarketSpec = serde_json::from_str(json).map_err(|e| format!("bad config: {e}"))?;
    let need = |name: &str, v: Option<f64>| v.ok_or_else(|| format!("missing parameter {name}"));
    let offer = match spec.family.as_str() {
        "uniform" => OfferModel::uniform(need("a", spec.a)?, need("b", spec.b)?),
        "exponential" => OfferModel::exponential(need("eta", spec.eta)?),
        "pareto" => OfferModel::pareto(need("xm", spec.xm)?, need("alpha", spec.alpha)?),
        "beta" => OfferModel::beta(need("alpha", spec.alpha)?, need("beta", spec.beta)?),
        "gamma" => OfferModel::gamma(need("alpha", spec.alpha)?, need("eta", spec.eta)?),
        "frechet" => OfferModel::frechet(need("alpha", spec.alpha)?),
        other => return Err(format!("unknown family {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    let residual = match spec.residual.as_deref().unwrap_or("same") {
        "same" => ResidualSpec::same_as(&offer),
        "zero" => ResidualSpec::zero(),
        other => return Err(format!("unknown residual {other:?}")),
    };
    if !(spec.lambda.is_finite() && spec.lambda > 0.0) {
        return Err("lambda must be positive".into());
    }
    Ok(Market { offer, residual, lambda: spec.lambda, mu0_override: spec.mu0 })
}

#[derive(Serialize)]
struct PolicyOut {
    label: String,
    mu0: f64,
    support_max: Option<f64>,
    t: Vec<f64>,
    mu: Vec<f64>,
    h: Vec<f64>,
}

/// Threshold curve `mu(t)` and acceptance hazard `h(t)` on `[0, t_max]`.
#[wasm_bindgen]
pub fn policy_curve(config: &str, t_max: f64, points: usize) -> Result<String, JsValue> {
    policy_curve_json(config, t_max, points).map_err(err)
}

pub fn policy_curve_json(config: &str, t_max: f64, points: usize) -> Result<String, String> {
    let market = build_market(config)?;
    let mu0 = market.mu0_override.unwrap_or_else(|| market.residual.mean());
    let curve = PolicyCurve::new(market.offer.clone(), mu0, market.lambda)
        .map_err(|e| e.to_string())?;
    let n = points.clamp(16, 4096);
    let mut out = PolicyOut {
        label: market.offer.label(),
        mu0,
        support_max: market.offer.support_max().is_finite().then(|| market.offer.support_max()),
        t: Vec::with_capacity(n),
        mu: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
    };
    for i in 0..n {
        let t = t_max.max(1e-9) * i as f64 / (n - 1) as f64;
        out.t.push(t);
        out.mu.push(curve.mu(t));
        out.h.push(curve.h_fn(t));
    }
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct PriceOut {
    label: String,
    t: f64,
    mean: f64,
    var: Option<f64>,
    x: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Option<Vec<f64>>,
    empirical: Option<Vec<f64>>,
    n_sim: usize,
}

/// Sale-price law at marketing period `t`; `n_sim > 0` adds an empirical
/// CDF overlay from that many simulated bidding processes.
#[wasm_bindgen]
pub fn price_distribution(
    config: &str,
    t: f64,
    points: usize,
    n_sim: usize,
    seed: u64,
) -> Result<String, JsValue> {
    price_distribution_json(config, t, points, n_sim, seed).map_err(err)
}

pub fn price_distribution_json(
    config: &str,
    t: f64,
    points: usize,
    n_sim: usize,
    seed: u64,
) -> Result<String, String> {
    let market = build_market(config)?;
    let curve = PolicyCurve::new(market.offer.clone(), market.residual.mean(), market.lambda)
        .map_err(|e| e.to_string())?;
    let n = points.clamp(16, 4096);
    let m = curve.mu(t.max(0.0));
    let lo = market.offer.support_min().min(0.0);
    let hi = if market.offer.support_max().is_finite() {
        market.offer.support_max()
    } else {
        (m - lo) * 1.8 + lo
    };
    let has_density = market.offer.has_density() && market.residual.has_density();
    let mut xs = Vec::with_capacity(n);
    let mut cdf = Vec::with_capacity(n);
    let mut pdf = has_density.then(|| Vec::with_capacity(n));
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        xs.push(x);
        cdf.push(price::price_cdf(&curve, &market.residual, t, x));
        if let Some(p) = pdf.as_mut() {
            p.push(price::price_pdf(&curve, &market.residual, t, x).map_err(|e| e.to_string())?);
        }
    }
    let empirical = if n_sim > 0 {
        let cfg = SimConfig::new(
            market.offer.clone(),
            market.residual.clone(),
            market.lambda,
            t.max(0.0),
            n_sim.min(200_000),
            seed,
        )
        .map_err(|e| e.to_string())?;
        let ecdf = simulate_batch(&cfg).price_ecdf();
        Some(xs.iter().map(|&x| ecdf.eval(x)).collect())
    } else {
        None
    };
    let out = PriceOut {
        label: market.offer.label(),
        t,
        mean: curve.mu(t.max(0.0)),
        var: price::price_var(&curve, &market.residual, t.max(0.0)).ok(),
        x: xs,
        cdf,
        pdf,
        empirical,
        n_sim,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct StopOut {
    label: String,
    t: f64,
    atom: f64,
    mean: f64,
    var: f64,
    gamma: Option<f64>,
    r: Vec<f64>,
    cdf: Vec<f64>,
    limit: Option<Vec<f64>>,
    empirical: Option<Vec<f64>>,
    n_sim: usize,
}

/// Time-to-sale law at marketing period `t`, with the limiting normalized
/// CDF (when the family has an analytic tail class) and an optional
/// empirical overlay.
#[wasm_bindgen]
pub fn stop_time(
    config: &str,
    t: f64,
    points: usize,
    n_sim: usize,
    seed: u64,
) -> Result<String, JsValue> {
    stop_time_json(config, t, points, n_sim, seed).map_err(err)
}

pub fn stop_time_json(
    config: &str,
    t: f64,
    points: usize,
    n_sim: usize,
    seed: u64,
) -> Result<String, String> {
    let market = build_market(config)?;
    let t = t.max(1e-9);
    let curve = PolicyCurve::new(market.offer.clone(), market.residual.mean(), market.lambda)
        .map_err(|e| e.to_string())?;
    let n = points.clamp(16, 4096);
    let class = classify_tail(&market.offer).ok();
    let mut rs = Vec::with_capacity(n);
    let mut cdf = Vec::with_capacity(n);
    let mut limit = class.as_ref().map(|_| Vec::with_capacity(n));
    for i in 0..n {
        let r = t * i as f64 / (n - 1) as f64;
        rs.push(r);
        cdf.push(stoptime::stop_cdf(&curve, t, r));
        if let (Some(l), Some(c)) = (limit.as_mut(), class.as_ref()) {
            l.push(that_limit(c, r / t));
        }
    }
    let empirical = if n_sim > 0 {
        let cfg = SimConfig::new(
            market.offer.clone(),
            market.residual.clone(),
            market.lambda,
            t,
            n_sim.min(200_000),
            seed,
        )
        .map_err(|e| e.to_string())?;
        let ecdf = simulate_batch(&cfg).time_ecdf();
        Some(rs.iter().map(|&r| ecdf.eval(r)).collect())
    } else {
        None
    };
    let out = StopOut {
        label: market.offer.label(),
        t,
        atom: stoptime::atom_prob(&curve, t),
        mean: stoptime::stop_mean(&curve, t),
        var: stoptime::stop_var(&curve, t),
        gamma: class.map(|c| c.gamma),
        r: rs,
        cdf,
        limit,
        empirical,
        n_sim,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

fn err(msg: String) -> JsValue {
    JsValue::from_str(&msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIFORM: &str = r#"{"family":"uniform","a":1,"b":3,"lambda":1}"#;

    #[test]
    fn policy_curve_returns_expected_values() {
        let json = policy_curve_json(UNIFORM, 10.0, 64).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["mu0"], 2.0);
        let mus = v["mu"].as_array().unwrap();
        assert_eq!(mus.len(), 64);
        assert_eq!(mus[0].as_f64().unwrap(), 2.0);
        // mu(10) = 3 - 4/14
        let last = mus[63].as_f64().unwrap();
        assert!((last - (3.0 - 4.0 / 14.0)).abs() < 1e-12);
    }

    #[test]
    fn price_distribution_with_overlay() {
        let json = price_distribution_json(UNIFORM, 2.0, 64, 5_000, 11).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["pdf"].is_array());
        let emp = v["empirical"].as_array().unwrap();
        let cdf = v["cdf"].as_array().unwrap();
        // empirical overlay tracks the analytic CDF loosely at n = 5000
        for (e, c) in emp.iter().zip(cdf) {
            assert!((e.as_f64().unwrap() - c.as_f64().unwrap()).abs() < 0.05);
        }
    }

    #[test]
    fn stop_time_reports_atom_and_gamma() {
        let cfg = r#"{"family":"exponential","eta":2,"lambda":1}"#;
        let json = stop_time_json(cfg, 10.0, 64, 0, 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let e = std::f64::consts::E;
        assert!((v["atom"].as_f64().unwrap() - e / (10.0 + e)).abs() < 1e-12);
        assert_eq!(v["gamma"].as_f64().unwrap(), 1.0);
        assert!(v["empirical"].is_null());
        assert!(v["limit"].is_array());
    }

    #[test]
    fn bad_config_is_an_error() {
        assert!(policy_curve_json("{}", 1.0, 10).is_err());
        assert!(policy_curve_json(r#"{"family":"uniform","a":1}"#, 1.0, 10).is_err());
        assert!(policy_curve_json(r#"{"family":"cauchy"}"#, 1.0, 10).is_err());
    }
}
