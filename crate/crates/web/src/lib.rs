//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every entry point takes a JSON object of overrides shaped like the run
//! config (`{"dwdm": {"isolation_db": 70}, "noise": {...}}`) and returns JSON.

use std::sync::Arc;

use mdi_cvqkd::config::RunConfig;
use mdi_cvqkd::scenario::{max_distance, path_noise, sweep, Path};
use mdi_cvqkd::{build_configuration, RamanTable};
use serde::Serialize;
use serde_json::Value;
use wasm_bindgen::prelude::*;

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

fn config_from(overrides: &str) -> Result<RunConfig, String> {
    let mut value = serde_json::to_value(RunConfig::reference()).map_err(|e| e.to_string())?;
    if !overrides.trim().is_empty() {
        merge(
            &mut value,
            serde_json::from_str(overrides).map_err(|e| e.to_string())?,
        );
    }
    let cfg: RunConfig = serde_json::from_value(value).map_err(|e| e.to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn table() -> Arc<RamanTable> {
    thread_local! {
        static TABLE: Arc<RamanTable> = Arc::new(RamanTable::bundled());
    }
    TABLE.with(Arc::clone)
}

#[derive(Serialize)]
struct Curve {
    ratio: f64,
    length_km: Vec<f64>,
    key_fraction: Vec<f64>,
    max_distance_km: Option<f64>,
}

#[derive(Serialize)]
struct PathReport {
    path: Path,
    length_km: f64,
    raman_w: f64,
    fwm_w: f64,
    lcxt_w: f64,
    prob_raman: f64,
    prob_fwm: f64,
    prob_lcxt: f64,
    excess_noise_snu: f64,
}

#[derive(Serialize)]
struct ReachRow {
    configuration: u32,
    ratio: f64,
    max_distance_km: Option<f64>,
}

/// Key fraction against total length for one configuration, one curve per
/// configured ratio.
pub fn rate_curves_json(configuration: u32, overrides: &str) -> Result<String, String> {
    let cfg = config_from(overrides)?;
    let plan = build_configuration(configuration, cfg.output_power_dbm()).map_err(|e| e.to_string())?;
    let grid = cfg.sweep_grid();
    let curves = cfg
        .run
        .ratios
        .iter()
        .map(|&ratio| {
            let s = cfg.scenario(&plan, ratio, table()).map_err(|e| e.to_string())?;
            let res = sweep(&s, &grid).map_err(|e| e.to_string())?;
            Ok(Curve {
                ratio,
                length_km: res.rows.iter().map(|r| r.total_length_km).collect(),
                key_fraction: res.rows.iter().map(|r| r.key_fraction_bits).collect(),
                max_distance_km: max_distance(&s, cfg.run.search_upper_km, cfg.run.resolution_km)
                    .map_err(|e| e.to_string())?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&curves).map_err(|e| e.to_string())
}

/// Per-segment noise budget at a given total length and ratio.
pub fn noise_budget_json(
    configuration: u32,
    ratio: f64,
    total_km: f64,
    overrides: &str,
) -> Result<String, String> {
    let cfg = config_from(overrides)?;
    let plan = build_configuration(configuration, cfg.output_power_dbm()).map_err(|e| e.to_string())?;
    let s = cfg
        .scenario(&plan, ratio, table())
        .and_then(|s| s.at_total_length(total_km))
        .map_err(|e| e.to_string())?;
    let reports = [(Path::Alice, s.length_alice_km), (Path::Bob, s.length_bob_km)]
        .into_iter()
        .map(|(path, length_km)| {
            let n = path_noise(&s, path).map_err(|e| e.to_string())?;
            Ok(PathReport {
                path,
                length_km,
                raman_w: n.p_raman_w,
                fwm_w: n.p_fwm_w,
                lcxt_w: n.p_lcxt_w,
                prob_raman: n.prob_raman,
                prob_fwm: n.prob_fwm,
                prob_lcxt: n.prob_lcxt,
                excess_noise_snu: n.excess_noise_snu,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&reports).map_err(|e| e.to_string())
}

/// Reach for every configured (configuration × ratio) pair.
pub fn reach_table_json(overrides: &str) -> Result<String, String> {
    let cfg = config_from(overrides)?;
    let mut rows = Vec::new();
    for &id in &cfg.run.configurations {
        let plan = build_configuration(id, cfg.output_power_dbm()).map_err(|e| e.to_string())?;
        for &ratio in &cfg.run.ratios {
            let s = cfg.scenario(&plan, ratio, table()).map_err(|e| e.to_string())?;
            rows.push(ReachRow {
                configuration: id,
                ratio,
                max_distance_km: max_distance(&s, cfg.run.search_upper_km, cfg.run.resolution_km)
                    .map_err(|e| e.to_string())?,
            });
        }
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn rate_curves(configuration: u32, overrides: &str) -> Result<String, JsValue> {
    rate_curves_json(configuration, overrides).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn noise_budget(
    configuration: u32,
    ratio: f64,
    total_km: f64,
    overrides: &str,
) -> Result<String, JsValue> {
    noise_budget_json(configuration, ratio, total_km, overrides).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn reach_table(overrides: &str) -> Result<String, JsValue> {
    reach_table_json(overrides).map_err(|e| JsValue::from_str(&e))
}
