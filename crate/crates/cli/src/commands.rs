//! The four batch commands. Each builds its complete artifact bytes in
//! memory and returns (path, bytes) pairs; nothing touches the filesystem
//! until every computation has succeeded.

use std::path::PathBuf;

use serde_json::{json, Value};

use triwalk_core::entanglement::entanglement_curve;
use triwalk_core::hilbert::Ensemble;
use triwalk_core::hilbert::PolarizationAngle;
use triwalk_core::remote::{run_scan, ConditioningScan, DephasedBellSpec};
use triwalk_core::tomography::{tomography_pipeline, tomography_pipeline_exact};
use triwalk_core::walk::{CoinSpec, WalkConfig, WalkState};

use crate::config::{OutputFormat, RunConfig};
use crate::output::{fmt_f64, json_to_bytes, CsvTable};
use crate::CliError;

type Files = Vec<(PathBuf, Vec<u8>)>;

/// (step, branch, weight, alice_pol, bob_coin, position, re, im)
type AmpRow = (u32, usize, f64, &'static str, &'static str, i32, f64, f64);

fn initial_ensemble(cfg: &RunConfig) -> Result<Ensemble, CliError> {
    Ensemble::werner_initial(cfg.visibility).map_err(|e| CliError::Config(e.to_string()))
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<Files, CliError> {
    let mut state = initial_ensemble(cfg)?;

    let mut dist_rows: Vec<(u32, i32, f64)> = Vec::new();
    let mut amp_rows: Vec<AmpRow> = Vec::new();
    for t in 0..=cfg.steps {
        if t > 0 {
            state = state.walk_step(&CoinSpec::Hadamard);
        }
        for (&x, &p) in state.position_distribution().iter() {
            dist_rows.push((t, x, p));
        }
        for (branch, (w, s)) in state.branches().iter().enumerate() {
            for (&(a, c, x), amp) in s.iter() {
                amp_rows.push((t, branch, *w, a.label(), c.label(), x, amp.re, amp.im));
            }
        }
    }

    let amplitudes_path = cfg.sibling_out("amplitudes");
    match cfg.format {
        OutputFormat::Csv => {
            let mut dist = CsvTable::new(vec!["step", "position", "probability"]);
            for (t, x, p) in dist_rows {
                dist.push(vec![t.to_string(), x.to_string(), fmt_f64(p)]);
            }
            let mut amps = CsvTable::new(vec![
                "step",
                "branch",
                "weight",
                "alice_pol",
                "bob_coin",
                "position",
                "amplitude_re",
                "amplitude_im",
            ]);
            for (t, b, w, a, c, x, re, im) in amp_rows {
                amps.push(vec![
                    t.to_string(),
                    b.to_string(),
                    fmt_f64(w),
                    a.into(),
                    c.into(),
                    x.to_string(),
                    fmt_f64(re),
                    fmt_f64(im),
                ]);
            }
            Ok(vec![
                (cfg.out.clone(), dist.to_bytes()),
                (amplitudes_path, amps.to_bytes()),
            ])
        }
        OutputFormat::Json => {
            let dist: Vec<Value> = dist_rows
                .iter()
                .map(|(t, x, p)| json!({ "step": t, "position": x, "probability": p }))
                .collect();
            let amps: Vec<Value> = amp_rows
                .iter()
                .map(|(t, b, w, a, c, x, re, im)| {
                    json!({
                        "step": t, "branch": b, "weight": w, "alice_pol": a,
                        "bob_coin": c, "position": x, "amplitude_re": re, "amplitude_im": im,
                    })
                })
                .collect();
            let main = json!({
                "command": "evolve",
                "steps": cfg.steps,
                "visibility": cfg.visibility,
                "distributions": dist,
            });
            let dump = json!({
                "command": "evolve",
                "steps": cfg.steps,
                "visibility": cfg.visibility,
                "amplitudes": amps,
            });
            Ok(vec![
                (cfg.out.clone(), json_to_bytes(&main)),
                (amplitudes_path, json_to_bytes(&dump)),
            ])
        }
    }
}

pub fn cmd_entanglement(cfg: &RunConfig) -> Result<Files, CliError> {
    let initial = initial_ensemble(cfg)?;
    let curve = entanglement_curve(initial, &WalkConfig::hadamard(cfg.steps), true)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    match cfg.format {
        OutputFormat::Csv => {
            let mut table = CsvTable::new(vec![
                "step",
                "e_avg",
                "e_normalized",
                "position",
                "probability",
                "entanglement",
                "purity",
                "low_probability",
            ]);
            for record in &curve.records {
                for p in &record.positions {
                    table.push(vec![
                        record.step.to_string(),
                        fmt_f64(record.e_avg),
                        fmt_f64(record.e_normalized.expect("normalization requested")),
                        p.position.to_string(),
                        fmt_f64(p.probability),
                        fmt_f64(p.entanglement),
                        fmt_f64(p.purity),
                        p.low_probability.to_string(),
                    ]);
                }
            }
            Ok(vec![(cfg.out.clone(), table.to_bytes())])
        }
        OutputFormat::Json => {
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
                                "low_probability": p.low_probability,
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
            let value = json!({
                "command": "entanglement",
                "steps": cfg.steps,
                "visibility": cfg.visibility,
                "records": records,
            });
            Ok(vec![(cfg.out.clone(), json_to_bytes(&value))])
        }
    }
}

pub fn cmd_remote_scan(cfg: &RunConfig) -> Result<Files, CliError> {
    let grid: Vec<f64> = cfg.angle_grid_deg();
    let angles: Vec<PolarizationAngle> =
        grid.iter().map(|&d| PolarizationAngle::from_degrees(d)).collect();

    let scenarios: Vec<(&'static str, f64, DephasedBellSpec)> = vec![
        ("entangled", 1.0, DephasedBellSpec::theory_a()),
        ("classical_theory_a", 0.0, DephasedBellSpec::theory_a()),
        ("classical_theory_b", 0.0, DephasedBellSpec::theory_b()),
        ("classical_theory_c", 0.0, DephasedBellSpec::theory_c()),
        (
            "mixed",
            cfg.entangled_weight,
            DephasedBellSpec::new(PolarizationAngle::from_degrees(cfg.theta_classical_deg)),
        ),
    ];

    let mut csv = CsvTable::new(vec![
        "scenario",
        "step",
        "alpha_deg",
        "beta_deg",
        "raw_variance",
        "normalized_variance",
        "success_probability",
        "present",
    ]);
    let mut json_rows: Vec<Value> = Vec::new();

    for (name, weight, reference) in scenarios {
        let scan = ConditioningScan {
            alpha_grid: angles.clone(),
            beta_grid: angles.clone(),
            steps: cfg.steps,
            entangled_weight: weight,
            reference,
        };
        let surface =
            run_scan(&scan, initial_ensemble(cfg)?).map_err(|e| CliError::Runtime(e.to_string()))?;
        for step_surface in &surface.steps {
            for (ia, row) in step_surface.cells.iter().enumerate() {
                for (ib, cell) in row.iter().enumerate() {
                    match cfg.format {
                        OutputFormat::Csv => {
                            let (raw, norm, mass, present) = match cell {
                                Some(c) => (
                                    fmt_f64(c.raw_variance),
                                    fmt_f64(c.normalized_variance),
                                    fmt_f64(c.success_probability),
                                    "true",
                                ),
                                None => (String::new(), String::new(), String::new(), "false"),
                            };
                            csv.push(vec![
                                name.into(),
                                step_surface.step.to_string(),
                                fmt_f64(grid[ia]),
                                fmt_f64(grid[ib]),
                                raw,
                                norm,
                                mass,
                                present.into(),
                            ]);
                        }
                        OutputFormat::Json => {
                            json_rows.push(json!({
                                "scenario": name,
                                "step": step_surface.step,
                                "alpha_deg": grid[ia],
                                "beta_deg": grid[ib],
                                "raw_variance": cell.map(|c| c.raw_variance),
                                "normalized_variance": cell.map(|c| c.normalized_variance),
                                "success_probability": cell.map(|c| c.success_probability),
                                "present": cell.is_some(),
                            }));
                        }
                    }
                }
            }
        }
    }

    let bytes = match cfg.format {
        OutputFormat::Csv => csv.to_bytes(),
        OutputFormat::Json => json_to_bytes(&json!({
            "command": "remote-scan",
            "steps": cfg.steps,
            "entangled_weight": cfg.entangled_weight,
            "theta_classical_deg": cfg.theta_classical_deg,
            "grid_deg": cfg.grid_deg,
            "cells": json_rows,
        })),
    };
    Ok(vec![(cfg.out.clone(), bytes)])
}

pub fn cmd_tomography(cfg: &RunConfig) -> Result<Files, CliError> {
    let initial = initial_ensemble(cfg)?;
    let walk_config = WalkConfig::hadamard(cfg.steps);

    let mut csv = CsvTable::new(vec![
        "step",
        "position",
        "probability",
        "fidelity",
        "purity",
        "chsh",
    ]);
    let mut json_rows: Vec<Value> = Vec::new();

    let mut state = initial.clone();
    for t in 0..=cfg.steps {
        if t > 0 {
            state = state.walk_step(&CoinSpec::Hadamard);
        }
        for x in state.occupied_positions() {
            let result = if cfg.exact {
                tomography_pipeline_exact(initial.clone(), &walk_config, x, t)
            } else {
                let seed = cfg.seed.expect("validated: seed required for sampling");
                tomography_pipeline(initial.clone(), &walk_config, x, t, cfg.shots, seed)
            };
            let (probability, report) = match result {
                Ok(r) => r,
                Err(triwalk_core::tomography::TomographyError::Hilbert(
                    triwalk_core::hilbert::HilbertError::EmptyPosition(_),
                )) => continue,
                Err(e) => return Err(CliError::Runtime(e.to_string())),
            };
            let fidelity = report.fidelity_to_truth.expect("truth supplied by pipeline");
            match cfg.format {
                OutputFormat::Csv => csv.push(vec![
                    t.to_string(),
                    x.to_string(),
                    fmt_f64(probability),
                    fmt_f64(fidelity),
                    fmt_f64(report.purity),
                    fmt_f64(report.chsh),
                ]),
                OutputFormat::Json => {
                    let m = report.rho_hat.matrix();
                    let rho_re: Vec<Vec<f64>> =
                        (0..4).map(|i| (0..4).map(|j| m[(i, j)].re).collect()).collect();
                    let rho_im: Vec<Vec<f64>> =
                        (0..4).map(|i| (0..4).map(|j| m[(i, j)].im).collect()).collect();
                    json_rows.push(json!({
                        "step": t,
                        "position": x,
                        "probability": probability,
                        "fidelity": fidelity,
                        "purity": report.purity,
                        "chsh": report.chsh,
                        "rho_re": rho_re,
                        "rho_im": rho_im,
                    }));
                }
            }
        }
    }

    let bytes = match cfg.format {
        OutputFormat::Csv => csv.to_bytes(),
        OutputFormat::Json => json_to_bytes(&json!({
            "command": "tomography",
            "steps": cfg.steps,
            "visibility": cfg.visibility,
            "shots": cfg.shots,
            "seed": cfg.seed,
            "exact": cfg.exact,
            "reports": json_rows,
        })),
    };
    Ok(vec![(cfg.out.clone(), bytes)])
}
