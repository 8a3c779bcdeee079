//! Core state representation: tripartite pure states over
//! (Alice polarization, Bob coin, Bob position), weighted ensembles for
//! mixed states, per-position conditioning to two-qubit densities, and
//! polarization projections.
//!
//! States are sparse maps from basis labels to complex amplitudes. The
//! position index is an unbounded integer; after `t` walk steps the
//! support is contained in `[-t, t]`. Entries with |amplitude|² below
//! [`AMPLITUDE_FLOOR`]² are dropped, which never moves any reported
//! quantity at the tolerances used in this crate.
//!
//! Everything here is immutable after construction; all operations are
//! pure functions returning fresh values.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use thiserror::Error;

/// Complex amplitude type used throughout the crate.
pub type Amplitude = Complex64;

/// Magnitudes below this floor may be pruned from sparse maps.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;

/// Normalization tolerance for states, ensembles and distributions.
pub const NORM_TOL: f64 = 1e-10;

/// Probability below which a position block counts as unoccupied.
pub const EMPTY_POSITION_TOL: f64 = 1e-12;

/// Basis label of one amplitude: (Alice pol, Bob coin, Bob position).
pub type BasisLabel = (Polarization, Polarization, i32);

#[derive(Debug, Error, PartialEq)]
pub enum HilbertError {
    #[error("position {0} is unoccupied (probability below {EMPTY_POSITION_TOL:e})")]
    EmptyPosition(i32),
    #[error("not normalized: |norm² − 1| = {0:e}")]
    NotNormalized(f64),
    #[error("visibility {0} outside [0, 1]")]
    VisibilityOutOfRange(f64),
    #[error("ensemble weights must lie in (0, 1] and sum to 1")]
    BadWeights,
    #[error("invalid density operator: {0}")]
    InvalidDensity(&'static str),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("distribution is not normalized")]
    UnnormalizedDistribution,
    #[error("position {position} lies outside [-{step}, {step}]")]
    SupportOutsideStep { position: i32, step: u32 },
}

/// Photon polarization, the computational basis of both qubits.
///
/// `H = (1, 0)ᵀ`, `V = (0, 1)ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
        }
    }
}

/// Which qubit a polarization projection acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    Alice,
    BobCoin,
}

/// Linear-polarization analysis angle; `θ` denotes cos(θ)|H⟩ + sin(θ)|V⟩.
///
/// Physically meaningful modulo π (the projector is quadratic in the ket).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationAngle {
    radians: f64,
}

impl PolarizationAngle {
    pub fn from_radians(radians: f64) -> Self {
        Self { radians }
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self { radians: degrees.to_radians() }
    }

    pub fn radians(self) -> f64 {
        self.radians
    }

    pub fn degrees(self) -> f64 {
        self.radians.to_degrees()
    }

    /// Ket components (⟨H|θ⟩, ⟨V|θ⟩) = (cos θ, sin θ).
    pub fn ket(self) -> [f64; 2] {
        [self.radians.cos(), self.radians.sin()]
    }

    /// The orthogonal angle θ + π/2.
    pub fn orthogonal(self) -> Self {
        Self { radians: self.radians + std::f64::consts::FRAC_PI_2 }
    }
}

/// Pure state of (Alice pol) ⊗ (Bob coin) ⊗ (Bob position), stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct TripartiteState {
    amps: BTreeMap<BasisLabel, Amplitude>,
    step: u32,
}

impl TripartiteState {
    /// The walk's initial Bell pair (|H⟩⊗|V,0⟩ + |V⟩⊗|H,0⟩)/√2 at step 0.
    pub fn bell_initial() -> Self {
        let w = Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = BTreeMap::new();
        amps.insert((Polarization::H, Polarization::V, 0), w);
        amps.insert((Polarization::V, Polarization::H, 0), w);
        Self { amps, step: 0 }
    }

    /// Product state (Alice ket) ⊗ (coin ket) ⊗ |position⟩.
    ///
    /// Both kets must be normalized within [`NORM_TOL`].
    pub fn product(
        alice: [Amplitude; 2],
        coin: [Amplitude; 2],
        position: i32,
    ) -> Result<Self, HilbertError> {
        let mut amps = BTreeMap::new();
        for a in Polarization::BOTH {
            for c in Polarization::BOTH {
                let v = alice[a.index()] * coin[c.index()];
                if v.norm_sqr() > AMPLITUDE_FLOOR * AMPLITUDE_FLOOR {
                    amps.insert((a, c, position), v);
                }
            }
        }
        Self::from_amplitudes(amps, 0)
    }

    /// Builds a state from explicit amplitudes, validating normalization.
    pub fn from_amplitudes(
        amps: impl IntoIterator<Item = (BasisLabel, Amplitude)>,
        step: u32,
    ) -> Result<Self, HilbertError> {
        let mut map = BTreeMap::new();
        for (label, amp) in amps {
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(HilbertError::NonFinite);
            }
            if label.2.unsigned_abs() > step {
                return Err(HilbertError::SupportOutsideStep { position: label.2, step });
            }
            if amp.norm_sqr() > AMPLITUDE_FLOOR * AMPLITUDE_FLOOR {
                map.insert(label, amp);
            }
        }
        let state = Self { amps: map, step };
        let drift = (state.norm_sqr() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(HilbertError::NotNormalized(drift));
        }
        Ok(state)
    }

    /// Trusted constructor for internal use, pruning sub-floor entries.
    pub(crate) fn from_parts_unchecked(
        amps: BTreeMap<BasisLabel, Amplitude>,
        step: u32,
    ) -> Self {
        let mut map = amps;
        map.retain(|_, v| v.norm_sqr() > AMPLITUDE_FLOOR * AMPLITUDE_FLOOR);
        Self { amps: map, step }
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub(crate) fn with_step(mut self, step: u32) -> Self {
        self.step = step;
        self
    }

    /// Amplitude of one basis label (zero if absent from the sparse map).
    pub fn amplitude(&self, alice: Polarization, coin: Polarization, position: i32) -> Amplitude {
        self.amps
            .get(&(alice, coin, position))
            .copied()
            .unwrap_or_else(|| Amplitude::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Amplitude)> {
        self.amps.iter()
    }

    pub fn nonzero_count(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Occupied positions in ascending order.
    pub fn occupied_positions(&self) -> Vec<i32> {
        let mut xs: Vec<i32> = self.amps.keys().map(|&(_, _, x)| x).collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    /// Probability of finding Bob's photon at each position.
    pub fn position_distribution(&self) -> PositionDistribution {
        let mut probs: BTreeMap<i32, f64> = BTreeMap::new();
        for (&(_, _, x), amp) in &self.amps {
            *probs.entry(x).or_insert(0.0) += amp.norm_sqr();
        }
        PositionDistribution { probs, step: self.step }
    }

    /// The two-qubit (Alice ⊗ coin) state at position `x`, renormalized,
    /// together with the probability of that position.
    pub fn condition_on_position(
        &self,
        x: i32,
    ) -> Result<(TwoQubitDensity, f64), HilbertError> {
        let vec = self.position_block(x);
        let p: f64 = vec.iter().map(|a| a.norm_sqr()).sum();
        if p < EMPTY_POSITION_TOL {
            return Err(HilbertError::EmptyPosition(x));
        }
        let outer = vec * vec.adjoint() / Amplitude::new(p, 0.0);
        Ok((TwoQubitDensity { matrix: outer }, p))
    }

    /// Four-component block (HH, HV, VH, VV) of this state at position `x`.
    pub(crate) fn position_block(&self, x: i32) -> Vector4<Amplitude> {
        Vector4::new(
            self.amplitude(Polarization::H, Polarization::H, x),
            self.amplitude(Polarization::H, Polarization::V, x),
            self.amplitude(Polarization::V, Polarization::H, x),
            self.amplitude(Polarization::V, Polarization::V, x),
        )
    }

    /// Projects one qubit onto cos θ⟨H| + sin θ⟨V|.
    ///
    /// Returns the renormalized post-measurement state (the measured qubit
    /// collapses to |θ⟩) and the success probability. A zero-probability
    /// outcome yields `(None, 0.0)`.
    pub fn project_polarization(
        &self,
        party: Party,
        angle: PolarizationAngle,
    ) -> (Option<TripartiteState>, f64) {
        let bra = angle.ket();
        // Contract the measured qubit: c(other, x) = Σ_p bra[p]·ψ(..p..)
        let mut contracted: BTreeMap<(Polarization, i32), Amplitude> = BTreeMap::new();
        for (&(a, c, x), &amp) in &self.amps {
            let (measured, other) = match party {
                Party::Alice => (a, c),
                Party::BobCoin => (c, a),
            };
            *contracted
                .entry((other, x))
                .or_insert_with(|| Amplitude::new(0.0, 0.0)) += bra[measured.index()] * amp;
        }
        let p: f64 = contracted.values().map(|a| a.norm_sqr()).sum();
        if p < AMPLITUDE_FLOOR {
            return (None, 0.0);
        }
        let scale = 1.0 / p.sqrt();
        let mut amps = BTreeMap::new();
        for ((other, x), amp) in contracted {
            for m in Polarization::BOTH {
                let v = bra[m.index()] * amp * scale;
                if v.norm_sqr() > AMPLITUDE_FLOOR * AMPLITUDE_FLOOR {
                    let label = match party {
                        Party::Alice => (m, other, x),
                        Party::BobCoin => (other, m, x),
                    };
                    amps.insert(label, v);
                }
            }
        }
        (Some(Self { amps, step: self.step }), p)
    }

    /// Per-position amplitudes ⟨α, β, x|ψ⟩ after projecting both qubits.
    pub(crate) fn projected_position_amplitudes(
        &self,
        alpha: PolarizationAngle,
        beta: PolarizationAngle,
    ) -> BTreeMap<i32, Amplitude> {
        let a_bra = alpha.ket();
        let b_bra = beta.ket();
        let mut out: BTreeMap<i32, Amplitude> = BTreeMap::new();
        for (&(a, c, x), &amp) in &self.amps {
            *out.entry(x).or_insert_with(|| Amplitude::new(0.0, 0.0)) +=
                a_bra[a.index()] * b_bra[c.index()] * amp;
        }
        out
    }

    /// Reduced single-qubit density of one party (trace over the rest).
    pub fn qubit_marginal(&self, party: Party) -> Matrix2<Amplitude> {
        let mut m = Matrix2::zeros();
        for (&(a1, c1, x1), &v1) in &self.amps {
            for (&(a2, c2, x2), &v2) in &self.amps {
                if x1 != x2 {
                    continue;
                }
                match party {
                    Party::Alice => {
                        if c1 == c2 {
                            m[(a1.index(), a2.index())] += v1 * v2.conj();
                        }
                    }
                    Party::BobCoin => {
                        if a1 == a2 {
                            m[(c1.index(), c2.index())] += v1 * v2.conj();
                        }
                    }
                }
            }
        }
        m
    }
}

/// Mixed state as a weighted list of pure tripartite branches.
///
/// Every mixture in this problem (dephased Bell references, Werner-style
/// noise, γ-interpolations) has at most five branches, and branches evolve
/// independently under the walk unitary, so this representation is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    branches: Vec<(f64, TripartiteState)>,
}

impl From<TripartiteState> for Ensemble {
    fn from(state: TripartiteState) -> Self {
        Self { branches: vec![(1.0, state)] }
    }
}

impl Ensemble {
    /// Single-branch ensemble wrapping a pure state.
    pub fn pure(state: TripartiteState) -> Self {
        state.into()
    }

    /// Builds an ensemble, validating weights and branch normalization.
    pub fn from_branches(
        branches: Vec<(f64, TripartiteState)>,
    ) -> Result<Self, HilbertError> {
        if branches.is_empty() {
            return Err(HilbertError::BadWeights);
        }
        let mut total = 0.0;
        for (w, state) in &branches {
            if !(*w > 0.0 && *w <= 1.0 + NORM_TOL) {
                return Err(HilbertError::BadWeights);
            }
            let drift = (state.norm_sqr() - 1.0).abs();
            if drift > NORM_TOL {
                return Err(HilbertError::NotNormalized(drift));
            }
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::BadWeights);
        }
        Ok(Self { branches })
    }

    /// Werner-style noisy Bell pair v·|Ψ⁺⟩⟨Ψ⁺| + (1−v)·𝟙/4 at position 0,
    /// realized as the Bell branch plus the four basis product branches.
    pub fn werner_initial(visibility: f64) -> Result<Self, HilbertError> {
        if !(0.0..=1.0).contains(&visibility) || !visibility.is_finite() {
            return Err(HilbertError::VisibilityOutOfRange(visibility));
        }
        let mut branches = Vec::new();
        if visibility > 0.0 {
            branches.push((visibility, TripartiteState::bell_initial()));
        }
        if visibility < 1.0 {
            let w = (1.0 - visibility) / 4.0;
            let one = Amplitude::new(1.0, 0.0);
            let zero = Amplitude::new(0.0, 0.0);
            for a in Polarization::BOTH {
                for c in Polarization::BOTH {
                    let alice = if a == Polarization::H { [one, zero] } else { [zero, one] };
                    let coin = if c == Polarization::H { [one, zero] } else { [zero, one] };
                    branches.push((w, TripartiteState::product(alice, coin, 0)?));
                }
            }
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[(f64, TripartiteState)] {
        &self.branches
    }

    pub(crate) fn map_branches(
        &self,
        f: impl Fn(&TripartiteState) -> TripartiteState,
    ) -> Self {
        Self {
            branches: self.branches.iter().map(|(w, s)| (*w, f(s))).collect(),
        }
    }

    pub fn step(&self) -> u32 {
        self.branches.first().map_or(0, |(_, s)| s.step())
    }

    /// Mixture position distribution Σ_k w_k P_k(x).
    pub fn position_distribution(&self) -> PositionDistribution {
        let mut probs: BTreeMap<i32, f64> = BTreeMap::new();
        for (w, state) in &self.branches {
            for (x, p) in state.position_distribution().probs {
                *probs.entry(x).or_insert(0.0) += w * p;
            }
        }
        PositionDistribution { probs, step: self.step() }
    }

    pub fn occupied_positions(&self) -> Vec<i32> {
        let mut xs: Vec<i32> = self
            .branches
            .iter()
            .flat_map(|(_, s)| s.occupied_positions())
            .collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    /// Mixture density at position `x`, renormalized, with its probability.
    pub fn condition_on_position(
        &self,
        x: i32,
    ) -> Result<(TwoQubitDensity, f64), HilbertError> {
        let mut num = Matrix4::<Amplitude>::zeros();
        let mut p = 0.0;
        for (w, state) in &self.branches {
            let vec = state.position_block(x);
            let block_p: f64 = vec.iter().map(|a| a.norm_sqr()).sum();
            num += (vec * vec.adjoint()) * Amplitude::new(*w, 0.0);
            p += w * block_p;
        }
        if p < EMPTY_POSITION_TOL {
            return Err(HilbertError::EmptyPosition(x));
        }
        Ok((TwoQubitDensity { matrix: num / Amplitude::new(p, 0.0) }, p))
    }

    /// Projects one qubit across all branches; surviving branches are
    /// reweighted by their individual success probabilities.
    pub fn project_polarization(
        &self,
        party: Party,
        angle: PolarizationAngle,
    ) -> (Option<Ensemble>, f64) {
        let mut kept = Vec::new();
        let mut total = 0.0;
        for (w, state) in &self.branches {
            let (remainder, p) = state.project_polarization(party, angle);
            total += w * p;
            if let Some(r) = remainder {
                kept.push((w * p, r));
            }
        }
        if total < AMPLITUDE_FLOOR || kept.is_empty() {
            return (None, 0.0);
        }
        for (w, _) in &mut kept {
            *w /= total;
        }
        (Some(Ensemble { branches: kept }), total)
    }
}

/// 4×4 density operator of (Alice pol) ⊗ (Bob coin), basis order
/// (HH, HV, VH, VV) with Alice's qubit first.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitDensity {
    matrix: Matrix4<Amplitude>,
}

impl TwoQubitDensity {
    /// Validates Hermiticity, unit trace and positive semidefiniteness
    /// (eigenvalues ≥ −1e-9).
    pub fn new(matrix: Matrix4<Amplitude>) -> Result<Self, HilbertError> {
        for i in 0..4 {
            for j in 0..4 {
                let d = matrix[(i, j)] - matrix[(j, i)].conj();
                if d.norm() > NORM_TOL {
                    return Err(HilbertError::InvalidDensity("not Hermitian"));
                }
                if !matrix[(i, j)].re.is_finite() || !matrix[(i, j)].im.is_finite() {
                    return Err(HilbertError::InvalidDensity("non-finite entry"));
                }
            }
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(HilbertError::InvalidDensity("trace is not 1"));
        }
        let density = Self { matrix };
        if density.eigenvalues().iter().any(|&e| e < -1e-9) {
            return Err(HilbertError::InvalidDensity("negative eigenvalue"));
        }
        Ok(density)
    }

    /// Pure-state density |ψ⟩⟨ψ| from a normalized 4-vector.
    pub fn from_pure(ket: Vector4<Amplitude>) -> Result<Self, HilbertError> {
        let n: f64 = ket.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized((n - 1.0).abs()));
        }
        Ok(Self { matrix: ket * ket.adjoint() })
    }

    /// The maximally mixed state 𝟙/4.
    pub fn maximally_mixed() -> Self {
        Self { matrix: Matrix4::identity() * Amplitude::new(0.25, 0.0) }
    }

    /// |Ψ⁺⟩⟨Ψ⁺| with |Ψ⁺⟩ = (|HV⟩ + |VH⟩)/√2.
    pub fn bell_psi_plus() -> Self {
        let w = Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ket = Vector4::new(Amplitude::new(0.0, 0.0), w, w, Amplitude::new(0.0, 0.0));
        Self { matrix: ket * ket.adjoint() }
    }

    #[cfg(test)]
    pub(crate) fn from_matrix_unchecked(matrix: Matrix4<Amplitude>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Matrix4<Amplitude> {
        &self.matrix
    }

    /// Eigenvalues in descending order (real; the matrix is Hermitian).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = nalgebra::SymmetricEigen::new(self.matrix);
        let mut vals = [0.0; 4];
        for (slot, v) in vals.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }
}

/// Probability of finding Bob's photon at each position after some step.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    probs: BTreeMap<i32, f64>,
    step: u32,
}

impl PositionDistribution {
    /// Builds a normalized distribution; probabilities must be nonnegative,
    /// sum to 1 within [`NORM_TOL`], and sit inside [−step, step].
    pub fn normalized(
        probs: BTreeMap<i32, f64>,
        step: u32,
    ) -> Result<Self, HilbertError> {
        let mut total = 0.0;
        for (&x, &p) in &probs {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(HilbertError::NonFinite);
            }
            if x.unsigned_abs() > step {
                return Err(HilbertError::InvalidDensity("support outside [-step, step]"));
            }
            total += p;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::UnnormalizedDistribution);
        }
        Ok(Self { probs, step })
    }

    pub(crate) fn from_parts_unchecked(probs: BTreeMap<i32, f64>, step: u32) -> Self {
        Self { probs, step }
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn prob(&self, x: i32) -> f64 {
        self.probs.get(&x).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i32, &f64)> {
        self.probs.iter()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Mean position Σ x·P(x); requires a normalized distribution.
    pub fn mean(&self) -> Result<f64, HilbertError> {
        self.check_normalized()?;
        Ok(self.probs.iter().map(|(&x, &p)| x as f64 * p).sum())
    }

    /// Variance Σ x²·P(x) − (Σ x·P(x))².
    pub fn variance(&self) -> Result<f64, HilbertError> {
        let mean = self.mean()?;
        let second: f64 = self
            .probs
            .iter()
            .map(|(&x, &p)| (x as f64) * (x as f64) * p)
            .sum();
        Ok((second - mean * mean).max(0.0))
    }

    fn check_normalized(&self) -> Result<(), HilbertError> {
        if (self.total() - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::UnnormalizedDistribution);
        }
        Ok(())
    }
}
