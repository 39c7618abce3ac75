//! Browser bindings for the simulator.
//!
//! Each export takes plain numbers and returns a JSON string so the page can
//! stay framework-free. The `*_json` functions hold the logic and are usable
//! from native code; the `#[wasm_bindgen]` wrappers only convert errors.

use qdba_core::entanglement::{exact_pmf, NoiseSpec};
use qdba_core::harness::{estimate_p_dba, histogram_rng, state_histogram};
use qdba_core::protocol::{run_seeded, ProtocolConfig, RunRecord, TraitorPlacement};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest network the page will simulate; keeps each call interactive.
pub const MAX_PLAYERS: usize = 10;

#[derive(Serialize)]
struct Bar {
    pattern: String,
    exact: f64,
    observed: f64,
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn check_players(n: usize) -> Result<(), String> {
    if n > MAX_PLAYERS {
        return Err(format!("the demo supports at most {MAX_PLAYERS} generals"));
    }
    Ok(())
}

/// Observed outcome frequencies at flip probability `p` next to the
/// noiseless distribution. Patterns never observed and outside the support
/// are omitted.
pub fn distribution_json(n: usize, p: f64, samples: usize, seed: u64) -> Result<String, String> {
    check_players(n)?;
    let exact = exact_pmf(n).map_err(err)?;
    let noise = NoiseSpec::custom(p).map_err(err)?;
    let observed = state_histogram(n, &noise, 1, samples, &mut histogram_rng(seed)).map_err(err)?;
    let mut bars: Vec<Bar> = exact
        .iter()
        .map(|(pattern, prob)| Bar { pattern: pattern.bit_string(), exact: prob, observed: 0.0 })
        .collect();
    for row in observed {
        match bars.iter_mut().find(|b| b.pattern == row.pattern) {
            Some(bar) => bar.observed = row.frequency,
            None => bars.push(Bar { pattern: row.pattern, exact: 0.0, observed: row.frequency }),
        }
    }
    bars.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    serde_json::to_string(&bars).map_err(err)
}

#[derive(Serialize)]
struct CurvePoint {
    p: f64,
    p_dba: f64,
    ci_low: f64,
    ci_high: f64,
}

/// Agreement probability against flip probability on an even grid over [0, 1].
pub fn noise_curve_json(n: usize, m: usize, shots: usize, iterations: usize, points: usize, seed: u64) -> Result<String, String> {
    check_players(n)?;
    if points < 2 {
        return Err("need at least two grid points".into());
    }
    let mut curve = Vec::with_capacity(points);
    for i in 0..points {
        let p = i as f64 / (points - 1) as f64;
        let config = ProtocolConfig {
            players: n,
            traitors: m,
            shots,
            noise: NoiseSpec::custom(p).map_err(err)?,
            ..ProtocolConfig::default()
        };
        let row = estimate_p_dba(&config, iterations, seed).map_err(err)?;
        curve.push(CurvePoint { p, p_dba: row.p_dba, ci_low: row.ci_low, ci_high: row.ci_high });
    }
    serde_json::to_string(&curve).map_err(err)
}

#[derive(Serialize)]
struct RunView {
    record: RunRecord,
    loyalty: Vec<qdba_core::protocol::Loyalty>,
    received: Vec<qdba_core::protocol::Order>,
    games: Vec<qdba_core::protocol::GameRecord>,
}

/// One full protocol run. `placement` is "random", "traitor" or "loyal".
pub fn run_json(n: usize, m: usize, p: f64, shots: usize, placement: &str, seed: u64) -> Result<String, String> {
    check_players(n)?;
    let placement = match placement {
        "random" => TraitorPlacement::Random,
        "traitor" => TraitorPlacement::CommanderTraitor,
        "loyal" => TraitorPlacement::CommanderLoyal,
        other => return Err(format!("unknown placement {other:?}")),
    };
    let config = ProtocolConfig {
        players: n,
        traitors: m,
        placement,
        shots,
        noise: NoiseSpec::custom(p).map_err(err)?,
        seed,
        ..ProtocolConfig::default()
    };
    let result = run_seeded(&config).map_err(err)?;
    let view = RunView {
        record: RunRecord::new(&config, &result),
        loyalty: result.loyalty.clone(),
        received: result.received.clone(),
        games: result.games.clone(),
    };
    serde_json::to_string(&view).map_err(err)
}

#[wasm_bindgen]
pub fn distribution(n: usize, p: f64, samples: usize, seed: u64) -> Result<String, JsValue> {
    distribution_json(n, p, samples, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn noise_curve(n: usize, m: usize, shots: usize, iterations: usize, points: usize, seed: u64) -> Result<String, JsValue> {
    noise_curve_json(n, m, shots, iterations, points, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn run(n: usize, m: usize, p: f64, shots: usize, placement: &str, seed: u64) -> Result<String, JsValue> {
    run_json(n, m, p, shots, placement, seed).map_err(|e| JsValue::from_str(&e))
}
