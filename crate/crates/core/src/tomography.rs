//! Emulation of the two-photon polarization tomography chain: projective
//! settings, Born probabilities, finite-count coincidence sampling, and
//! state reconstruction with similarity metrics.
//!
//! Reconstruction is linear inversion over the overcomplete 36-setting
//! Pauli-eigenbasis grid followed by projection to the Frobenius-closest
//! positive semidefinite unit-trace matrix (eigenvalue clipping with
//! redistribution). Counts are modeled as independent per-setting binomial
//! draws: coincidences with a fixed number of trials per setting, no
//! dark counts, no loss.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::entanglement::{chsh_quantifier, pauli, EntanglementError};
use crate::hilbert::{Amplitude, Ensemble, HilbertError, TwoQubitDensity};
use crate::walk::{evolve, WalkConfig};

#[derive(Debug, Error, PartialEq)]
pub enum TomographyError {
    #[error("expected {expected} settings, got {got}")]
    MissingSetting { expected: usize, got: usize },
    #[error("all counts are zero")]
    DegenerateCounts,
    #[error("count exceeds shots per setting")]
    CountsExceedShots,
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
}

/// The six single-qubit Pauli eigenstates reachable with waveplates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliEigenstate {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl PauliEigenstate {
    pub const ALL: [PauliEigenstate; 6] = [
        PauliEigenstate::H,
        PauliEigenstate::V,
        PauliEigenstate::D,
        PauliEigenstate::A,
        PauliEigenstate::R,
        PauliEigenstate::L,
    ];

    pub fn ket(self) -> Vector2<Amplitude> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = Amplitude::new;
        match self {
            PauliEigenstate::H => Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
            PauliEigenstate::V => Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
            PauliEigenstate::D => Vector2::new(c(h, 0.0), c(h, 0.0)),
            PauliEigenstate::A => Vector2::new(c(h, 0.0), c(-h, 0.0)),
            PauliEigenstate::R => Vector2::new(c(h, 0.0), c(0.0, h)),
            PauliEigenstate::L => Vector2::new(c(h, 0.0), c(0.0, -h)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PauliEigenstate::H => "H",
            PauliEigenstate::V => "V",
            PauliEigenstate::D => "D",
            PauliEigenstate::A => "A",
            PauliEigenstate::R => "R",
            PauliEigenstate::L => "L",
        }
    }

    /// The +1/−1 eigenstates of σ_x, σ_y, σ_z for axis = 0, 1, 2.
    fn of_axis(axis: usize, positive: bool) -> Self {
        match (axis, positive) {
            (0, true) => PauliEigenstate::D,
            (0, false) => PauliEigenstate::A,
            (1, true) => PauliEigenstate::R,
            (1, false) => PauliEigenstate::L,
            (2, true) => PauliEigenstate::H,
            (2, false) => PauliEigenstate::V,
            _ => unreachable!(),
        }
    }

    fn flat_index(self) -> usize {
        Self::ALL.iter().position(|&e| e == self).unwrap()
    }
}

/// One coincidence setting: a projector on each photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementSetting {
    pub alice: PauliEigenstate,
    pub bob: PauliEigenstate,
}

impl MeasurementSetting {
    /// Rank-1 projector Π_A ⊗ Π_B.
    pub fn projector(&self) -> Matrix4<Amplitude> {
        let a = self.alice.ket();
        let b = self.bob.ket();
        let ket = a.kronecker(&b);
        ket * ket.adjoint()
    }
}

/// The full 6×6 Pauli-eigenstate grid in deterministic (HH, HV, … LL) order.
pub fn standard_settings() -> Vec<MeasurementSetting> {
    let mut settings = Vec::with_capacity(36);
    for alice in PauliEigenstate::ALL {
        for bob in PauliEigenstate::ALL {
            settings.push(MeasurementSetting { alice, bob });
        }
    }
    settings
}

/// Born probabilities p_k = tr[ρ Π_k], clamped into [0, 1].
pub fn born_probabilities(rho: &TwoQubitDensity, settings: &[MeasurementSetting]) -> Vec<f64> {
    settings
        .iter()
        .map(|s| (rho.matrix() * s.projector()).trace().re.clamp(0.0, 1.0))
        .collect()
}

/// Coincidence counts for one (x, t) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRecord {
    pub counts: Vec<u64>,
    pub shots_per_setting: u64,
    pub seed: u64,
}

/// Draws `shots` binomial trials per setting, reproducibly from `seed`.
pub fn sample_counts(
    rho: &TwoQubitDensity,
    settings: &[MeasurementSetting],
    shots: u64,
    seed: u64,
) -> CountRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = born_probabilities(rho, settings)
        .into_iter()
        .map(|p| Binomial::new(shots, p).expect("p clamped to [0,1]").sample(&mut rng))
        .collect();
    CountRecord { counts, shots_per_setting: shots, seed }
}

/// Reconstructed state with its similarity metrics.
#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub rho_hat: TwoQubitDensity,
    /// F(ρ, ρ̂) against the supplied true state, when given.
    pub fidelity_to_truth: Option<f64>,
    pub purity: f64,
    pub chsh: f64,
}

/// Uhlmann fidelity F(ρ, σ) = (tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &TwoQubitDensity, sigma: &TwoQubitDensity) -> f64 {
    let sqrt_rho = hermitian_sqrt(rho.matrix());
    let m = sqrt_rho * sigma.matrix() * sqrt_rho;
    let eig = SymmetricEigen::new(m);
    let tr: f64 = eig.eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).sum();
    (tr * tr).min(1.0)
}

fn hermitian_sqrt(m: &Matrix4<Amplitude>) -> Matrix4<Amplitude> {
    let eig = SymmetricEigen::new(*m);
    let mut d = Matrix4::<Amplitude>::zeros();
    for i in 0..4 {
        d[(i, i)] = Amplitude::new(eig.eigenvalues[i].max(0.0).sqrt(), 0.0);
    }
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Linear inversion of the 36 per-setting frequencies into the 4×4 Pauli
/// expansion. Exact on noiseless probabilities; Hermitian and unit-trace
/// by construction, but not necessarily positive.
fn linear_inversion(frequencies: &[f64]) -> Matrix4<Amplitude> {
    let idx = |a: PauliEigenstate, b: PauliEigenstate| a.flat_index() * 6 + b.flat_index();
    let signs = [1.0, -1.0];

    // c[i][j] for i, j ∈ {0 (identity), 1..=3 (x, y, z)}.
    let mut c = [[0.0_f64; 4]; 4];
    c[0][0] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut sum = 0.0;
            for (si, &s) in signs.iter().enumerate() {
                for (sj, &sp) in signs.iter().enumerate() {
                    let a = PauliEigenstate::of_axis(i, si == 0);
                    let b = PauliEigenstate::of_axis(j, sj == 0);
                    sum += s * sp * frequencies[idx(a, b)];
                }
            }
            c[i + 1][j + 1] = sum;
        }
    }
    // Single-qubit terms averaged over the partner's three bases.
    for i in 0..3 {
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        for j in 0..3 {
            for (si, &s) in signs.iter().enumerate() {
                for sj in 0..2 {
                    let ei = PauliEigenstate::of_axis(i, si == 0);
                    let ej = PauliEigenstate::of_axis(j, sj == 0);
                    sum_a += s * frequencies[idx(ei, ej)];
                    sum_b += s * frequencies[idx(ej, ei)];
                }
            }
        }
        c[i + 1][0] = sum_a / 3.0;
        c[0][i + 1] = sum_b / 3.0;
    }

    let id2 = Matrix2::<Amplitude>::identity();
    let op = |i: usize| if i == 0 { id2 } else { pauli(i - 1) };
    let mut rho = Matrix4::<Amplitude>::zeros();
    for (i, row) in c.iter().enumerate() {
        for (j, &coeff) in row.iter().enumerate() {
            rho += op(i).kronecker(&op(j)) * Amplitude::new(coeff / 4.0, 0.0);
        }
    }
    rho
}

/// Frobenius projection onto {PSD, trace 1}: eigen-decompose and project
/// the spectrum onto the probability simplex, keeping the eigenvectors.
fn project_to_density(m: &Matrix4<Amplitude>) -> Matrix4<Amplitude> {
    let eig = SymmetricEigen::new(*m);
    let mut lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut sorted = lambda.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (1.0 - cumulative) / (k + 1) as f64;
        if v + candidate > 0.0 {
            tau = candidate;
        }
    }
    for v in lambda.iter_mut() {
        *v = (*v + tau).max(0.0);
    }
    let mut d = Matrix4::<Amplitude>::zeros();
    for i in 0..4 {
        d[(i, i)] = Amplitude::new(lambda[i], 0.0);
    }
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

fn report_from_frequencies(
    frequencies: &[f64],
    truth: Option<&TwoQubitDensity>,
) -> Result<ReconstructionReport, TomographyError> {
    let rho_hat = TwoQubitDensity::new(project_to_density(&linear_inversion(frequencies)))?;
    let fidelity_to_truth = truth.map(|rho| fidelity(rho, &rho_hat));
    let purity = rho_hat.purity();
    let chsh = chsh_quantifier(&rho_hat)?;
    Ok(ReconstructionReport { rho_hat, fidelity_to_truth, purity, chsh })
}

/// Reconstructs from finite counts; pass the true state to also report
/// fidelity.
pub fn reconstruct(
    counts: &CountRecord,
    truth: Option<&TwoQubitDensity>,
) -> Result<ReconstructionReport, TomographyError> {
    if counts.counts.len() != 36 {
        return Err(TomographyError::MissingSetting { expected: 36, got: counts.counts.len() });
    }
    if counts.counts.iter().any(|&k| k > counts.shots_per_setting) {
        return Err(TomographyError::CountsExceedShots);
    }
    if counts.counts.iter().all(|&k| k == 0) {
        return Err(TomographyError::DegenerateCounts);
    }
    let shots = counts.shots_per_setting as f64;
    let frequencies: Vec<f64> = counts.counts.iter().map(|&k| k as f64 / shots).collect();
    report_from_frequencies(&frequencies, truth)
}

/// Infinite-shot-limit reconstruction directly from Born probabilities.
pub fn reconstruct_exact(
    probabilities: &[f64],
    truth: Option<&TwoQubitDensity>,
) -> Result<ReconstructionReport, TomographyError> {
    if probabilities.len() != 36 {
        return Err(TomographyError::MissingSetting { expected: 36, got: probabilities.len() });
    }
    report_from_frequencies(probabilities, truth)
}

/// Splittable per-cell seed so every (x, t) cell samples an independent,
/// reproducible stream regardless of evaluation order.
pub fn cell_seed(master: u64, x: i32, t: u32) -> u64 {
    // splitmix64 finalizer over the packed coordinates
    let mut z = master
        ^ (x as i64 as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (t as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Full chain for one (x, t) cell: evolve `t` steps with the config's
/// coin, condition on `x`, sample counts and reconstruct.
///
/// Returns the position probability together with the report, whose
/// fidelity is measured against the exact conditioned state.
pub fn tomography_pipeline(
    initial: impl Into<Ensemble>,
    config: &WalkConfig,
    x: i32,
    t: u32,
    shots: u64,
    seed: u64,
) -> Result<(f64, ReconstructionReport), TomographyError> {
    let (rho, probability) = conditioned_cell(initial, config, x, t)?;
    let counts = sample_counts(&rho, &standard_settings(), shots, cell_seed(seed, x, t));
    let report = reconstruct(&counts, Some(&rho))?;
    Ok((probability, report))
}

/// Infinite-shot variant of [`tomography_pipeline`].
pub fn tomography_pipeline_exact(
    initial: impl Into<Ensemble>,
    config: &WalkConfig,
    x: i32,
    t: u32,
) -> Result<(f64, ReconstructionReport), TomographyError> {
    let (rho, probability) = conditioned_cell(initial, config, x, t)?;
    let probs = born_probabilities(&rho, &standard_settings());
    let report = reconstruct_exact(&probs, Some(&rho))?;
    Ok((probability, report))
}

fn conditioned_cell(
    initial: impl Into<Ensemble>,
    config: &WalkConfig,
    x: i32,
    t: u32,
) -> Result<(TwoQubitDensity, f64), TomographyError> {
    let cfg = WalkConfig { steps: t, coin: config.coin.clone() };
    let evolved = evolve(&initial.into(), &cfg);
    Ok(evolved.condition_on_position(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::TripartiteState;
    use approx::assert_abs_diff_eq;
    use rand_distr::StandardNormal;

    fn random_density(rng: &mut ChaCha8Rng) -> TwoQubitDensity {
        let g = Matrix4::from_fn(|_, _| {
            Amplitude::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        let w = g * g.adjoint();
        TwoQubitDensity::new(w / w.trace()).unwrap()
    }

    #[test]
    fn settings_grid_shape_and_order() {
        let settings = standard_settings();
        assert_eq!(settings.len(), 36);
        assert_eq!(settings[0].alice, PauliEigenstate::H);
        assert_eq!(settings[0].bob, PauliEigenstate::H);
        assert_eq!(settings[1].bob, PauliEigenstate::V);
        assert_eq!(settings[35].alice, PauliEigenstate::L);
        assert_eq!(settings[35].bob, PauliEigenstate::L);
    }

    #[test]
    fn partner_settings_sum_to_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(&mut rng);
        let partner = |e: PauliEigenstate| match e {
            PauliEigenstate::H => PauliEigenstate::V,
            PauliEigenstate::V => PauliEigenstate::H,
            PauliEigenstate::D => PauliEigenstate::A,
            PauliEigenstate::A => PauliEigenstate::D,
            PauliEigenstate::R => PauliEigenstate::L,
            PauliEigenstate::L => PauliEigenstate::R,
        };
        for s in standard_settings() {
            let flipped = MeasurementSetting { alice: partner(s.alice), bob: s.bob };
            let p = born_probabilities(&rho, &[s, flipped]);
            let bob_ket = s.bob.ket();
            let pi_b = Matrix2::<Amplitude>::identity().kronecker(&(bob_ket * bob_ket.adjoint()));
            let marginal = (rho.matrix() * pi_b).trace().re;
            assert_abs_diff_eq!(p[0] + p[1], marginal, epsilon = 1e-12);
        }
    }

    #[test]
    fn born_reference_values() {
        let settings = standard_settings();
        let mixed = TwoQubitDensity::maximally_mixed();
        for p in born_probabilities(&mixed, &settings) {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
        }
        let bell = TwoQubitDensity::bell_psi_plus();
        let p_of =
            |a, b| born_probabilities(&bell, &[MeasurementSetting { alice: a, bob: b }])[0];
        assert_abs_diff_eq!(p_of(PauliEigenstate::H, PauliEigenstate::V), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p_of(PauliEigenstate::H, PauliEigenstate::H), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_of(PauliEigenstate::D, PauliEigenstate::D), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p_of(PauliEigenstate::R, PauliEigenstate::L), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let rho = TwoQubitDensity::bell_psi_plus();
        let settings = standard_settings();
        let a = sample_counts(&rho, &settings, 10_000, 99);
        let b = sample_counts(&rho, &settings, 10_000, 99);
        assert_eq!(a, b);
        let c = sample_counts(&rho, &settings, 10_000, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_probability_setting_never_clicks() {
        let rho = TwoQubitDensity::bell_psi_plus();
        let counts = sample_counts(&rho, &standard_settings(), 1_000_000, 1);
        // Setting (H, H) has index 0 and Born probability 0.
        assert_eq!(counts.counts[0], 0);
    }

    #[test]
    fn empirical_frequencies_within_binomial_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = random_density(&mut rng);
        let settings = standard_settings();
        let shots = 1_000_000u64;
        let counts = sample_counts(&rho, &settings, shots, 4321);
        for (p, &k) in born_probabilities(&rho, &settings).iter().zip(&counts.counts) {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            let dev = (k as f64 / shots as f64 - p).abs();
            assert!(dev <= 5.0 * sigma + 1e-9, "dev {dev} > 5σ = {}", 5.0 * sigma);
        }
    }

    #[test]
    fn exact_reconstruction_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let rho = random_density(&mut rng);
            let probs = born_probabilities(&rho, &standard_settings());
            let report = reconstruct_exact(&probs, Some(&rho)).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let d = (report.rho_hat.matrix()[(i, j)] - rho.matrix()[(i, j)]).norm();
                    assert!(d < 1e-10, "entry ({i},{j}) off by {d:e}");
                }
            }
            assert!(report.fidelity_to_truth.unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn degenerate_and_missing_counts_are_rejected() {
        let record = CountRecord { counts: vec![0; 36], shots_per_setting: 100, seed: 0 };
        assert!(matches!(reconstruct(&record, None), Err(TomographyError::DegenerateCounts)));

        let record = CountRecord { counts: vec![1; 20], shots_per_setting: 100, seed: 0 };
        assert!(matches!(
            reconstruct(&record, None),
            Err(TomographyError::MissingSetting { expected: 36, got: 20 })
        ));

        let record = CountRecord { counts: vec![200; 36], shots_per_setting: 100, seed: 0 };
        assert!(matches!(reconstruct(&record, None), Err(TomographyError::CountsExceedShots)));
    }

    #[test]
    fn fidelity_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let a = random_density(&mut rng);
            let b = random_density(&mut rng);
            let f_ab = fidelity(&a, &b);
            let f_ba = fidelity(&b, &a);
            assert_abs_diff_eq!(f_ab, f_ba, epsilon = 1e-9);
            assert!((0.0..=1.0).contains(&f_ab));
            assert!(fidelity(&a, &a) > 1.0 - 1e-9);
            if f_ab > 1.0 - 1e-9 {
                // F = 1 only for identical states.
                let dist: f64 = (0..4)
                    .flat_map(|i| (0..4).map(move |j| (i, j)))
                    .map(|(i, j)| (a.matrix()[(i, j)] - b.matrix()[(i, j)]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(dist < 1e-4);
            }
        }
    }

    #[test]
    fn psd_projection_does_not_increase_distance_to_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let settings = standard_settings();
        let frob = |m: &Matrix4<Amplitude>, rho: &TwoQubitDensity| -> f64 {
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += (m[(i, j)] - rho.matrix()[(i, j)]).norm_sqr();
                }
            }
            s.sqrt()
        };
        let mut before_sum = 0.0;
        let mut after_sum = 0.0;
        for trial in 0..120 {
            let rho = random_density(&mut rng);
            let counts = sample_counts(&rho, &settings, 500, 1000 + trial);
            let freq: Vec<f64> = counts.counts.iter().map(|&k| k as f64 / 500.0).collect();
            let lin = linear_inversion(&freq);
            let proj = project_to_density(&lin);
            before_sum += frob(&lin, &rho);
            after_sum += frob(&proj, &rho);
        }
        assert!(after_sum / 120.0 <= before_sum / 120.0 + 1e-12);
    }

    #[test]
    fn reconstructed_purity_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for trial in 0..20 {
            let rho = random_density(&mut rng);
            let counts = sample_counts(&rho, &standard_settings(), 2000, trial);
            let report = reconstruct(&counts, None).unwrap();
            assert!(report.purity <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn noiseless_pipeline_round_trips_entanglement() {
        let config = WalkConfig::hadamard(0);
        let (p, report) =
            tomography_pipeline_exact(TripartiteState::bell_initial(), &config, 0, 0).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.chsh, 1.0, epsilon = 1e-9);

        for x in [-1, 1] {
            let (p, report) =
                tomography_pipeline_exact(TripartiteState::bell_initial(), &config, x, 1).unwrap();
            assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(report.chsh, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn pipeline_propagates_empty_position() {
        let config = WalkConfig::hadamard(0);
        let err = tomography_pipeline(TripartiteState::bell_initial(), &config, 3, 1, 100, 0);
        assert!(matches!(
            err,
            Err(TomographyError::Hilbert(HilbertError::EmptyPosition(3)))
        ));
    }

    #[test]
    fn cell_seeds_are_distinct() {
        let mut seeds = std::collections::BTreeSet::new();
        for x in -10..=10 {
            for t in 0..10 {
                seeds.insert(cell_seed(42, x, t));
            }
        }
        assert_eq!(seeds.len(), 21 * 10);
    }
}
