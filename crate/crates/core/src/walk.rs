//! Discrete-time quantum walk on Bob's coin and position subsystems.
//!
//! One step applies a coin rotation at every position followed by the
//! coin-conditioned shift (H moves x → x+1, V moves x → x−1); `t` steps
//! realize U(t) = (ŜĈ)ᵗ. Alice's qubit is acted on by the identity
//! throughout.
//!
//! [`evolve_outcoupled`] provides the loop-geometry variant where the
//! state is read out between the shift element and the coin plate, i.e.
//! Ŝ(ĈŜ)^(t−1): the first step is a bare shift and each later round trip
//! adds one coin and one shift. Remote conditioning uses this timing.

use std::collections::BTreeMap;

use nalgebra::Matrix2;
use thiserror::Error;

use crate::hilbert::{Amplitude, BasisLabel, Ensemble, Polarization, TripartiteState};

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("coin block is not unitary (defect {0:e})")]
    NonUnitaryCoin(f64),
}

/// A validated 2×2 unitary coin block.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinMatrix {
    matrix: Matrix2<Amplitude>,
}

impl CoinMatrix {
    /// Wraps a 2×2 matrix, rejecting it unless U†U = 𝟙 within 1e-10.
    pub fn new(matrix: Matrix2<Amplitude>) -> Result<Self, WalkError> {
        let gram = matrix.adjoint() * matrix;
        let mut defect = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - Amplitude::new(target, 0.0)).norm());
            }
        }
        if defect > 1e-10 {
            return Err(WalkError::NonUnitaryCoin(defect));
        }
        Ok(Self { matrix })
    }

    /// Hadamard coin (1/√2)·[[1, 1], [1, −1]].
    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            matrix: Matrix2::new(
                Amplitude::new(h, 0.0),
                Amplitude::new(h, 0.0),
                Amplitude::new(h, 0.0),
                Amplitude::new(-h, 0.0),
            ),
        }
    }

    pub fn identity() -> Self {
        Self { matrix: Matrix2::identity() }
    }

    pub fn matrix(&self) -> &Matrix2<Amplitude> {
        &self.matrix
    }
}

/// Coin operation specification, uniform or position-dependent.
#[derive(Clone, Debug, PartialEq)]
pub enum CoinSpec {
    /// The Hadamard coin at every position and step.
    Hadamard,
    /// Position-dependent blocks c_{p,q}(x); positions absent from the map
    /// use `default`.
    General {
        default: CoinMatrix,
        per_position: BTreeMap<i32, CoinMatrix>,
    },
}

impl CoinSpec {
    fn block(&self, x: i32) -> Matrix2<Amplitude> {
        match self {
            CoinSpec::Hadamard => *CoinMatrix::hadamard().matrix(),
            CoinSpec::General { default, per_position } => {
                *per_position.get(&x).unwrap_or(default).matrix()
            }
        }
    }
}

/// Walk length and coin choice.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    pub steps: u32,
    pub coin: CoinSpec,
}

impl WalkConfig {
    pub fn hadamard(steps: u32) -> Self {
        Self { steps, coin: CoinSpec::Hadamard }
    }
}

/// Rotates the coin index by the position's unitary block. The step
/// counter is left untouched; [`step`] owns the increment.
pub fn apply_coin(state: &TripartiteState, coin: &CoinSpec) -> TripartiteState {
    let mut out: BTreeMap<BasisLabel, Amplitude> = BTreeMap::new();
    for (&(a, c, x), &amp) in state.iter() {
        let block = coin.block(x);
        for p in Polarization::BOTH {
            let v = block[(p.index(), c.index())] * amp;
            if v.norm_sqr() > 0.0 {
                *out.entry((a, p, x)).or_insert_with(|| Amplitude::new(0.0, 0.0)) += v;
            }
        }
    }
    TripartiteState::from_parts_unchecked(out, state.step())
}

/// Moves coin-H amplitudes to x+1 and coin-V amplitudes to x−1.
pub fn apply_shift(state: &TripartiteState) -> TripartiteState {
    let mut out: BTreeMap<BasisLabel, Amplitude> = BTreeMap::new();
    for (&(a, c, x), &amp) in state.iter() {
        let x2 = match c {
            Polarization::H => x + 1,
            Polarization::V => x - 1,
        };
        out.insert((a, c, x2), amp);
    }
    TripartiteState::from_parts_unchecked(out, state.step())
}

/// One full walk step: coin, then shift, incrementing the step counter.
pub fn step(state: &TripartiteState, coin: &CoinSpec) -> TripartiteState {
    let counter = state.step() + 1;
    apply_shift(&apply_coin(state, coin)).with_step(counter)
}

/// State kinds the walk can drive: pure states and branch ensembles.
pub trait WalkState: Clone {
    fn walk_step(&self, coin: &CoinSpec) -> Self;
    /// A bare shift counted as one step (the loop's first round trip).
    fn shift_step(&self) -> Self;
}

impl WalkState for TripartiteState {
    fn walk_step(&self, coin: &CoinSpec) -> Self {
        step(self, coin)
    }

    fn shift_step(&self) -> Self {
        let counter = self.step() + 1;
        apply_shift(self).with_step(counter)
    }
}

impl WalkState for Ensemble {
    fn walk_step(&self, coin: &CoinSpec) -> Self {
        self.map_branches(|s| step(s, coin))
    }

    fn shift_step(&self) -> Self {
        self.map_branches(|s| {
            let counter = s.step() + 1;
            apply_shift(s).with_step(counter)
        })
    }
}

/// Applies `config.steps` walk steps, U(t) = (ŜĈ)ᵗ.
pub fn evolve<T: WalkState>(initial: &T, config: &WalkConfig) -> T {
    let mut state = initial.clone();
    for _ in 0..config.steps {
        state = state.walk_step(&config.coin);
    }
    state
}

/// Evolution as seen at the out-coupler sitting between the shift element
/// and the coin plate: Ŝ(ĈŜ)^(t−1) for t ≥ 1, identity for t = 0.
pub fn evolve_outcoupled<T: WalkState>(initial: &T, coin: &CoinSpec, steps: u32) -> T {
    if steps == 0 {
        return initial.clone();
    }
    let mut state = initial.shift_step();
    for _ in 1..steps {
        state = state.walk_step(coin);
    }
    state
}
