//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string. The plain-Rust functions of the same
//! name without the `js_` prefix do the work and are what the tests call.

use std::str::FromStr;

use serde_json::{json, Value};
use setpersist::depth::FunctionalSample;
use setpersist::envelope::global_envelope_test;
use setpersist::pipeline::{pooled_grid, Analysis, GridSettings};
use setpersist::simulate::{realisation_rng, Model};
use setpersist::summaries::CurveKind;
use setpersist::{Error, Result};
use wasm_bindgen::prelude::*;

/// Largest raster width the page may request.
pub const MAX_RESOLUTION: usize = 400;
/// Largest number of simulations for one envelope test.
pub const MAX_SIMS: usize = 199;

fn check_resolution(resolution: usize) -> Result<()> {
    if !(32..=MAX_RESOLUTION).contains(&resolution) {
        return Err(Error::InvalidInput(format!(
            "resolution must be in 32..={MAX_RESOLUTION}, got {resolution}"
        )));
    }
    Ok(())
}

fn analyse(model: &str, seed: u64, index: u64, resolution: usize) -> Result<Analysis> {
    check_resolution(resolution)?;
    let model = Model::from_str(model)?;
    let config = model.spec().simulate(&Model::window(), &mut realisation_rng(seed, index))?;
    Analysis::of_config(&config, resolution)
}

fn curve_json(kind: CurveKind, args: &[f64], values: &[f64]) -> Value {
    json!({ "kind": kind.as_str(), "args": args, "values": values })
}

/// One realisation: the raster (row 0 at the bottom), its signed distance
/// field and the persistence diagram.
pub fn realisation(model: &str, seed: u64, resolution: usize) -> Result<String> {
    let a = analyse(model, seed, 0, resolution)?;
    let cells: Vec<u8> = a.raster.cells().iter().map(|&c| c as u8).collect();
    let points: Vec<Value> = a
        .diagram
        .points()
        .iter()
        .map(|p| json!([p.dim, p.birth, if p.death.is_finite() { p.death } else { a.diagram.field_max() }]))
        .collect();
    Ok(json!({
        "nx": a.raster.nx(),
        "ny": a.raster.ny(),
        "cells": cells,
        "field": a.field.values(),
        "field_min": a.field.min(),
        "field_max": a.field.max(),
        "diagram": points,
        "area_fraction": a.raster.count_foreground() as f64 / a.raster.cells().len() as f64,
        "components": a.diagram.count(0),
        "holes": a.diagram.count(1),
    })
    .to_string())
}

/// Summary curve `kind` (APF0, APF1, HZ0, HZ1, CF or ESF) of one realisation.
pub fn summary(model: &str, seed: u64, resolution: usize, kind: &str) -> Result<String> {
    let kind = CurveKind::from_str(kind)?;
    let a = analyse(model, seed, 0, resolution)?;
    let grid = pooled_grid(kind, std::slice::from_ref(&a), &GridSettings::default())?;
    let c = a.curve(kind, &grid)?;
    Ok(curve_json(kind, &c.args, &c.values).to_string())
}

/// Global envelope test of one `observed_model` realisation against `sims`
/// realisations of `null_model`.
pub fn envelope(
    null_model: &str,
    observed_model: &str,
    sims: usize,
    seed: u64,
    resolution: usize,
    kind: &str,
    alpha: f64,
) -> Result<String> {
    if sims > MAX_SIMS {
        return Err(Error::InvalidInput(format!("at most {MAX_SIMS} simulations")));
    }
    if alpha * ((sims + 1) as f64) < 1.0 - 1e-9 {
        return Err(Error::InsufficientSimulations { n: sims, alpha });
    }
    let kind = CurveKind::from_str(kind)?;
    let observed = analyse(observed_model, seed ^ 0x0b5e_4ed0, 0, resolution)?;
    let mut pool = vec![observed];
    for k in 0..sims {
        pool.push(analyse(null_model, seed, k as u64 + 1, resolution)?);
    }
    let grid = pooled_grid(kind, &pool, &GridSettings::default())?;
    let curves = pool
        .iter()
        .map(|a| a.curve(kind, &grid))
        .collect::<Result<Vec<_>>>()?;
    let observed = curves[0].clone();
    let sample = FunctionalSample::new(curves[1..].to_vec())?;
    let r = global_envelope_test(&observed, &sample, alpha)?;
    let outside: Vec<bool> = r.outside(&observed);
    Ok(json!({
        "kind": kind.as_str(),
        "args": grid,
        "lower": r.lower.values,
        "upper": r.upper.values,
        "observed": observed.values,
        "outside": outside,
        "p": r.p_value,
        "rank": r.observed_rank,
        "reject": r.reject,
        "alpha": alpha,
        "sims": sims,
    })
    .to_string())
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&format!("{}: {e}", e.kind())))
}

#[wasm_bindgen(js_name = realisation)]
pub fn js_realisation(model: &str, seed: u32, resolution: usize) -> std::result::Result<String, JsError> {
    js(realisation(model, seed.into(), resolution))
}

#[wasm_bindgen(js_name = summary)]
pub fn js_summary(model: &str, seed: u32, resolution: usize, kind: &str) -> std::result::Result<String, JsError> {
    js(summary(model, seed.into(), resolution, kind))
}

#[wasm_bindgen(js_name = envelope)]
pub fn js_envelope(
    null_model: &str,
    observed_model: &str,
    sims: usize,
    seed: u32,
    resolution: usize,
    kind: &str,
    alpha: f64,
) -> std::result::Result<String, JsError> {
    js(envelope(null_model, observed_model, sims, seed.into(), resolution, kind, alpha))
}

/// Model names accepted by the other exports.
#[wasm_bindgen]
pub fn models() -> String {
    json!(Model::ALL.map(|m| m.as_str())).to_string()
}
