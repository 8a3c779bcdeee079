//! Remote conditioning: how much control Alice's polarization measurement
//! exerts over Bob's position distribution.
//!
//! Both qubits are projected onto linear polarizations ⟨α| (Alice) and
//! ⟨β| (Bob's coin) and the surviving per-position mass is
//!
//! ```text
//! P_B(x, t) ∝ (1 − γ)·⟨α,β,x| q̂(t) |α,β,x⟩ + γ·|⟨α,β,x|Φ(t)⟩|²
//! ```
//!
//! where γ = `entangled_weight` multiplies the entangled scenario and q̂ is
//! a dephased-Bell classical reference. Distributions are reported
//! normalized with the pre-normalization mass as the joint success
//! probability.
//!
//! Step-t states are taken at the loop's out-coupling point, i.e. with
//! [`crate::walk::evolve_outcoupled`] (a bare shift first, then coin+shift
//! rounds). At step one this makes the classical θ = 0 reference and the
//! entangled scenario produce identical conditioned distributions for
//! every (α, β): the shift separates the two coin components in position
//! before any coin has mixed them, so their coherence cannot reach the
//! per-position projection.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hilbert::{
    Amplitude, Ensemble, HilbertError, PolarizationAngle, PositionDistribution, TripartiteState,
};
use crate::walk::{evolve_outcoupled, CoinSpec, WalkState};

/// Projected mass below which a conditioning outcome counts as empty.
pub const ZERO_SUCCESS_TOL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum RemoteError {
    #[error("total projected mass below {ZERO_SUCCESS_TOL:e}")]
    ZeroSuccess,
    #[error("entangled weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("scan grids must be non-empty")]
    EmptyGrid,
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Dephasing basis for the classical reference; 0 is the linear H/V basis
/// (Theory A), π/4 the diagonal one (Theory B), 24° Theory C.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasedBellSpec {
    pub basis_angle: PolarizationAngle,
}

impl DephasedBellSpec {
    pub fn new(basis_angle: PolarizationAngle) -> Self {
        Self { basis_angle }
    }

    /// Linear H/V dephasing basis.
    pub fn theory_a() -> Self {
        Self::new(PolarizationAngle::from_degrees(0.0))
    }

    /// Diagonal dephasing basis.
    pub fn theory_b() -> Self {
        Self::new(PolarizationAngle::from_degrees(45.0))
    }

    /// 24° dephasing basis.
    pub fn theory_c() -> Self {
        Self::new(PolarizationAngle::from_degrees(24.0))
    }
}

/// The dephased-Bell classical reference: the equal mixture of
/// |θ, θ⊥, 0⟩ and |θ⊥, θ, 0⟩ with θ⊥ = θ + π/2.
///
/// At θ = 0 this is exactly (|H,V,0⟩⟨H,V,0| + |V,H,0⟩⟨V,H,0|)/2.
pub fn make_classical_reference(spec: DephasedBellSpec) -> Ensemble {
    let ket = |angle: PolarizationAngle| {
        let [h, v] = angle.ket();
        [Amplitude::new(h, 0.0), Amplitude::new(v, 0.0)]
    };
    let theta = ket(spec.basis_angle);
    let perp = ket(spec.basis_angle.orthogonal());
    let b1 = TripartiteState::product(theta, perp, 0).expect("product state is normalized");
    let b2 = TripartiteState::product(perp, theta, 0).expect("product state is normalized");
    Ensemble::from_branches(vec![(0.5, b1), (0.5, b2)]).expect("weights are 1/2 + 1/2")
}

/// Unnormalized per-position masses Σ_k w_k·|⟨α,β,x|ψ_k⟩|².
fn projected_masses(
    ensemble: &Ensemble,
    alpha: PolarizationAngle,
    beta: PolarizationAngle,
) -> BTreeMap<i32, f64> {
    let mut masses = BTreeMap::new();
    for (w, state) in ensemble.branches() {
        for (x, amp) in state.projected_position_amplitudes(alpha, beta) {
            *masses.entry(x).or_insert(0.0) += w * amp.norm_sqr();
        }
    }
    masses
}

fn mix_and_normalize(
    entangled: &Ensemble,
    classical: &Ensemble,
    entangled_weight: f64,
    alpha: PolarizationAngle,
    beta: PolarizationAngle,
    step: u32,
) -> Result<(PositionDistribution, f64), RemoteError> {
    let mut masses = BTreeMap::new();
    if entangled_weight > 0.0 {
        for (x, m) in projected_masses(entangled, alpha, beta) {
            *masses.entry(x).or_insert(0.0) += entangled_weight * m;
        }
    }
    if entangled_weight < 1.0 {
        for (x, m) in projected_masses(classical, alpha, beta) {
            *masses.entry(x).or_insert(0.0) += (1.0 - entangled_weight) * m;
        }
    }
    let total: f64 = masses.values().sum();
    if total < ZERO_SUCCESS_TOL {
        return Err(RemoteError::ZeroSuccess);
    }
    let probs = masses.into_iter().map(|(x, m)| (x, m / total)).collect();
    Ok((PositionDistribution::from_parts_unchecked(probs, step), total))
}

/// Evolves both scenarios to step `t` (Hadamard walk, out-coupling
/// timing), projects on (α, β) and mixes with `entangled_weight`.
///
/// Returns the normalized conditioned distribution and the joint success
/// probability (the pre-normalization mass).
pub fn conditioned_distribution(
    entangled: impl Into<Ensemble>,
    classical: &Ensemble,
    entangled_weight: f64,
    alpha: PolarizationAngle,
    beta: PolarizationAngle,
    t: u32,
) -> Result<(PositionDistribution, f64), RemoteError> {
    if !(0.0..=1.0).contains(&entangled_weight) {
        return Err(RemoteError::WeightOutOfRange(entangled_weight));
    }
    let ent = evolve_outcoupled(&entangled.into(), &CoinSpec::Hadamard, t);
    let cl = evolve_outcoupled(classical, &CoinSpec::Hadamard, t);
    mix_and_normalize(&ent, &cl, entangled_weight, alpha, beta, t)
}

/// Σ x²P(x) − (Σ xP(x))² of a normalized distribution.
pub fn variance(dist: &PositionDistribution) -> Result<f64, RemoteError> {
    Ok(dist.variance()?)
}

/// Angle grid and mixing weight of a conditioning scan.
#[derive(Clone, Debug)]
pub struct ConditioningScan {
    pub alpha_grid: Vec<PolarizationAngle>,
    pub beta_grid: Vec<PolarizationAngle>,
    pub steps: u32,
    /// Weight γ of the entangled term (1 = purely entangled scenario,
    /// 0 = purely classical; `classical_weight` is 1 − γ).
    pub entangled_weight: f64,
    pub reference: DephasedBellSpec,
}

impl ConditioningScan {
    /// Default 2°-resolution scan: α, β ∈ {0°, 2°, …, 178°}.
    pub fn with_default_grid(
        steps: u32,
        entangled_weight: f64,
        reference: DephasedBellSpec,
    ) -> Self {
        Self {
            alpha_grid: default_grid(),
            beta_grid: default_grid(),
            steps,
            entangled_weight,
            reference,
        }
    }

    fn validate(&self) -> Result<(), RemoteError> {
        if self.alpha_grid.is_empty() || self.beta_grid.is_empty() {
            return Err(RemoteError::EmptyGrid);
        }
        if !(0.0..=1.0).contains(&self.entangled_weight) {
            return Err(RemoteError::WeightOutOfRange(self.entangled_weight));
        }
        Ok(())
    }
}

/// The 90-point grid {0°, 2°, …, 178°}.
pub fn default_grid() -> Vec<PolarizationAngle> {
    (0..90).map(|k| PolarizationAngle::from_degrees(2.0 * k as f64)).collect()
}

/// One grid cell of a variance surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceCell {
    pub raw_variance: f64,
    /// Min-max normalized within the cell's step; in [0, 1].
    pub normalized_variance: f64,
    pub success_probability: f64,
}

/// Variance surface of one step; `cells[ia][ib]` follows the scan grids,
/// `None` marks zero-success cells (excluded from normalization).
#[derive(Clone, Debug)]
pub struct StepSurface {
    pub step: u32,
    pub cells: Vec<Vec<Option<SurfaceCell>>>,
}

impl StepSurface {
    pub fn max_raw_variance(&self) -> Option<f64> {
        self.cells
            .iter()
            .flatten()
            .flatten()
            .map(|c| c.raw_variance)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

/// Per-step surfaces over steps 1..=steps.
///
/// Step 0 is omitted: every conditioned distribution is a point mass at
/// the origin there, so all variances are 0 and the per-step min-max
/// normalization is undefined.
#[derive(Clone, Debug)]
pub struct VarianceSurface {
    pub entangled_weight: f64,
    pub reference: DephasedBellSpec,
    pub steps: Vec<StepSurface>,
}

/// Runs the full scan: for every step t ∈ [1, scan.steps] and every grid
/// cell, the conditioned variance of the γ-mixture of `entangled_initial`
/// with the scan's classical reference.
pub fn run_scan(
    scan: &ConditioningScan,
    entangled_initial: impl Into<Ensemble>,
) -> Result<VarianceSurface, RemoteError> {
    scan.validate()?;
    let mut ent = entangled_initial.into();
    let mut cl = make_classical_reference(scan.reference);
    let mut steps = Vec::with_capacity(scan.steps as usize);

    for t in 1..=scan.steps {
        if t == 1 {
            ent = ent.shift_step();
            cl = cl.shift_step();
        } else {
            ent = ent.walk_step(&CoinSpec::Hadamard);
            cl = cl.walk_step(&CoinSpec::Hadamard);
        }

        let mut cells: Vec<Vec<Option<(f64, f64)>>> =
            vec![vec![None; scan.beta_grid.len()]; scan.alpha_grid.len()];
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (ia, &alpha) in scan.alpha_grid.iter().enumerate() {
            for (ib, &beta) in scan.beta_grid.iter().enumerate() {
                match mix_and_normalize(&ent, &cl, scan.entangled_weight, alpha, beta, t) {
                    Ok((dist, mass)) => {
                        let v = dist.variance()?;
                        min = min.min(v);
                        max = max.max(v);
                        cells[ia][ib] = Some((v, mass));
                    }
                    Err(RemoteError::ZeroSuccess) => {}
                    Err(e) => return Err(e),
                }
            }
        }

        let span = max - min;
        let normalized = cells
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|cell| {
                        cell.map(|(v, mass)| SurfaceCell {
                            raw_variance: v,
                            normalized_variance: if span > 1e-15 { (v - min) / span } else { 0.0 },
                            success_probability: mass,
                        })
                    })
                    .collect()
            })
            .collect();
        steps.push(StepSurface { step: t, cells: normalized });
    }

    Ok(VarianceSurface {
        entangled_weight: scan.entangled_weight,
        reference: scan.reference,
        steps,
    })
}
