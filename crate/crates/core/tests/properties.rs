//! Property tests over randomized states and angles.

use std::collections::BTreeMap;

use proptest::prelude::*;

use triwalk_core::hilbert::{
    Amplitude, Party, Polarization, PolarizationAngle, TripartiteState,
};
use triwalk_core::remote::{conditioned_distribution, make_classical_reference, DephasedBellSpec};
use triwalk_core::walk::{apply_coin, apply_shift, step, CoinSpec};

const SPAN: i32 = 3;

/// Normalized random states on positions [−SPAN, SPAN].
fn arb_state() -> impl Strategy<Value = TripartiteState> {
    let entries = 4 * (2 * SPAN as usize + 1);
    prop::collection::vec((-1.0_f64..1.0, -1.0_f64..1.0), entries)
        .prop_filter_map("norm too small", |parts| {
            let norm_sqr: f64 = parts.iter().map(|(re, im)| re * re + im * im).sum();
            if norm_sqr < 1e-3 {
                return None;
            }
            let scale = norm_sqr.sqrt();
            let mut amps = BTreeMap::new();
            let mut k = 0;
            for a in Polarization::BOTH {
                for c in Polarization::BOTH {
                    for x in -SPAN..=SPAN {
                        let (re, im) = parts[k];
                        k += 1;
                        amps.insert((a, c, x), Amplitude::new(re / scale, im / scale));
                    }
                }
            }
            Some(TripartiteState::from_amplitudes(amps, SPAN as u32).unwrap())
        })
}

proptest! {
    #[test]
    fn conditioning_probabilities_sum_to_one(state in arb_state()) {
        let total: f64 = state
            .occupied_positions()
            .iter()
            .filter_map(|&x| state.condition_on_position(x).ok())
            .map(|(_, p)| p)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditionals_of_pure_states_are_pure(state in arb_state()) {
        for &x in &state.occupied_positions() {
            if let Ok((rho, p)) = state.condition_on_position(x) {
                if p > 1e-9 {
                    prop_assert!((rho.purity() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn coin_and_shift_preserve_norm(state in arb_state()) {
        let coined = apply_coin(&state, &CoinSpec::Hadamard);
        prop_assert!((coined.norm_sqr() - 1.0).abs() < 1e-10);
        let shifted = apply_shift(&coined);
        prop_assert!((shifted.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn support_grows_by_at_most_one_per_step(state in arb_state(), steps in 0u32..4) {
        let mut s = state;
        let mut bound = SPAN;
        for _ in 0..steps {
            s = step(&s, &CoinSpec::Hadamard);
            bound += 1;
        }
        prop_assert!(s.occupied_positions().iter().all(|x| x.abs() <= bound));
    }

    #[test]
    fn orthonormal_projection_pair_resolves_identity(
        state in arb_state(),
        theta_deg in 0.0_f64..180.0,
        alice in prop::bool::ANY,
    ) {
        let party = if alice { Party::Alice } else { Party::BobCoin };
        let theta = PolarizationAngle::from_degrees(theta_deg);
        let (_, p1) = state.project_polarization(party, theta);
        let (_, p2) = state.project_polarization(party, theta.orthogonal());
        prop_assert!((p1 + p2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditioned_distributions_are_pi_periodic(
        alpha_deg in 0.0_f64..180.0,
        beta_deg in 0.0_f64..180.0,
        t in 1u32..4,
    ) {
        let classical = make_classical_reference(DephasedBellSpec::theory_a());
        let bell = TripartiteState::bell_initial();
        let run = |a: f64, b: f64| conditioned_distribution(
            bell.clone(),
            &classical,
            0.6,
            PolarizationAngle::from_degrees(a),
            PolarizationAngle::from_degrees(b),
            t,
        );
        match (run(alpha_deg, beta_deg), run(alpha_deg + 180.0, beta_deg + 180.0)) {
            (Ok((d1, m1)), Ok((d2, m2))) => {
                prop_assert!((m1 - m2).abs() < 1e-12);
                for (&x, &p) in d1.iter() {
                    prop_assert!((p - d2.prob(x)).abs() < 1e-12);
                }
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "periodicity mismatch: {other:?}"),
        }
    }
}
