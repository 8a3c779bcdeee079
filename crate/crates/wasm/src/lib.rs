//! Browser bindings for the quantum-walk entanglement-transfer demo.
//!
//! Three operations back the static page in `www/`: per-step position
//! distributions, the average-entanglement curve, and remote-conditioning
//! variance surfaces. Each returns a JSON string for plain-JS consumption.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use triwalk_core::entanglement::{entanglement_curve, EntanglementError};
use triwalk_core::hilbert::{Ensemble, PolarizationAngle};
use triwalk_core::remote::{run_scan, ConditioningScan, DephasedBellSpec};
use triwalk_core::walk::{CoinSpec, WalkConfig, WalkState};

const MAX_STEPS: u32 = 60;
const MAX_GRID_CELLS: usize = 32_400; // 180×180 at 1°

fn initial(visibility: f64) -> Result<Ensemble, String> {
    Ensemble::werner_initial(visibility).map_err(|e| e.to_string())
}

fn check_steps(steps: u32) -> Result<(), String> {
    if steps > MAX_STEPS {
        return Err(format!("steps capped at {MAX_STEPS} for the demo"));
    }
    Ok(())
}

fn walk_distributions_impl(steps: u32, visibility: f64) -> Result<String, String> {
    check_steps(steps)?;
    let mut state = initial(visibility)?;
    let mut records = Vec::new();
    for t in 0..=steps {
        if t > 0 {
            state = state.walk_step(&CoinSpec::Hadamard);
        }
        let positions: Vec<Value> = state
            .position_distribution()
            .iter()
            .map(|(&x, &p)| json!({ "position": x, "probability": p }))
            .collect();
        records.push(json!({ "step": t, "positions": positions }));
    }
    Ok(json!({ "steps": records }).to_string())
}

fn entanglement_curve_impl(steps: u32, visibility: f64) -> Result<String, String> {
    check_steps(steps)?;
    let config = WalkConfig::hadamard(steps);
    let curve = match entanglement_curve(initial(visibility)?, &config, true) {
        Ok(curve) => curve,
        // States at or below the separability threshold have no initial
        // entanglement to normalize by; report the raw curve instead.
        Err(EntanglementError::ZeroInitialEntanglement) => {
            entanglement_curve(initial(visibility)?, &config, false).map_err(|e| e.to_string())?
        }
        Err(e) => return Err(e.to_string()),
    };
    let records: Vec<Value> = curve
        .records
        .iter()
        .map(|r| {
            let positions: Vec<Value> = r
                .positions
                .iter()
                .map(|p| {
                    json!({
                        "position": p.position,
                        "probability": p.probability,
                        "entanglement": p.entanglement,
                        "purity": p.purity,
                    })
                })
                .collect();
            json!({
                "step": r.step,
                "e_avg": r.e_avg,
                "e_normalized": r.e_normalized,
                "positions": positions,
            })
        })
        .collect();
    Ok(json!({ "records": records }).to_string())
}

fn variance_surface_impl(
    steps: u32,
    entangled_weight: f64,
    theta_classical_deg: f64,
    grid_deg: f64,
    visibility: f64,
) -> Result<String, String> {
    check_steps(steps)?;
    if !(grid_deg > 0.0 && grid_deg <= 90.0) {
        return Err("grid resolution must lie in (0, 90] degrees".into());
    }
    let grid_deg_values: Vec<f64> = {
        let mut grid = Vec::new();
        let mut k = 0u32;
        loop {
            let v = grid_deg * k as f64;
            if v >= 180.0 {
                break;
            }
            grid.push(v);
            k += 1;
        }
        grid
    };
    if grid_deg_values.len() * grid_deg_values.len() > MAX_GRID_CELLS {
        return Err("grid too fine for the demo".into());
    }
    let angles: Vec<PolarizationAngle> = grid_deg_values
        .iter()
        .map(|&d| PolarizationAngle::from_degrees(d))
        .collect();
    let scan = ConditioningScan {
        alpha_grid: angles.clone(),
        beta_grid: angles,
        steps,
        entangled_weight,
        reference: DephasedBellSpec::new(PolarizationAngle::from_degrees(theta_classical_deg)),
    };
    let surface = run_scan(&scan, initial(visibility)?).map_err(|e| e.to_string())?;
    let steps_json: Vec<Value> = surface
        .steps
        .iter()
        .map(|s| {
            let cells: Vec<Vec<Value>> = s
                .cells
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|cell| match cell {
                            Some(c) => json!({
                                "raw": c.raw_variance,
                                "normalized": c.normalized_variance,
                                "mass": c.success_probability,
                            }),
                            None => Value::Null,
                        })
                        .collect()
                })
                .collect();
            json!({
                "step": s.step,
                "max_raw": s.max_raw_variance(),
                "cells": cells,
            })
        })
        .collect();
    Ok(json!({
        "alpha_deg": grid_deg_values,
        "beta_deg": grid_deg_values,
        "entangled_weight": entangled_weight,
        "theta_classical_deg": theta_classical_deg,
        "steps": steps_json,
    })
    .to_string())
}

/// Per-step position distributions of the Hadamard walk on a Werner-type
/// initial state (visibility 1 = ideal Bell pair).
#[wasm_bindgen]
pub fn walk_distributions(steps: u32, visibility: f64) -> Result<String, JsValue> {
    walk_distributions_impl(steps, visibility).map_err(|e| JsValue::from_str(&e))
}

/// Average entanglement between the two polarization qubits at every step,
/// with per-position detail.
#[wasm_bindgen]
pub fn entanglement_curve_json(steps: u32, visibility: f64) -> Result<String, JsValue> {
    entanglement_curve_impl(steps, visibility).map_err(|e| JsValue::from_str(&e))
}

/// Remote-conditioning variance surfaces over the (α, β) projection grid
/// for the γ-mixture of the entangled input with a dephased classical
/// reference at `theta_classical_deg`.
#[wasm_bindgen]
pub fn variance_surface(
    steps: u32,
    entangled_weight: f64,
    theta_classical_deg: f64,
    grid_deg: f64,
    visibility: f64,
) -> Result<String, JsValue> {
    variance_surface_impl(steps, entangled_weight, theta_classical_deg, grid_deg, visibility)
        .map_err(|e| JsValue::from_str(&e))
}
