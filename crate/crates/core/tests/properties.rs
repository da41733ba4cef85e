//! Randomised invariants across modules.

use proptest::prelude::*;

use mbqs_core::freefermion::FreeFermionEngine;
use mbqs_core::quench::{ring_distance, InitialState};
use mbqs_core::scoring::{
    classify, p2_score, CellStatus, CorrelationEstimate, CorrelatorEstimates, P2Score,
};
use mbqs_core::shots::{ShotMetadata, ShotRecordSet};

fn estimates(sites: usize, g2: &[f64]) -> CorrelatorEstimates {
    let est = |value| CorrelationEstimate {
        value,
        stderr: 0.0,
        n_shots: 100,
    };
    CorrelatorEstimates {
        sites,
        one_point: est(0.0),
        g2: g2.iter().map(|&v| est(v)).collect(),
    }
}

proptest! {
    #[test]
    fn chord_distance_is_reflection_symmetric(sites in 2usize..300, a in 0.5f64..20.0, pick in 0.0f64..1.0) {
        let ell = 1 + ((sites - 1) as f64 * pick) as usize % (sites - 1);
        let d = ring_distance(sites, a, ell).unwrap();
        prop_assert_eq!(d, ring_distance(sites, a, sites - ell).unwrap());
        prop_assert!(d >= a * (1.0 - 1e-12));
    }

    #[test]
    fn p2_is_scale_covariant(
        theory in prop::collection::vec(0.05f64..1.0, 1..8),
        signs in prop::collection::vec(any::<bool>(), 8),
        delta in -0.9f64..2.0,
    ) {
        let sites = 2 * theory.len() + 2;
        let mut th: Vec<f64> = theory.iter().zip(&signs).map(|(&v, &s)| if s { v } else { -v }).collect();
        th.push(0.3);
        let exp: Vec<f64> = th.iter().map(|v| v * (1.0 + delta)).collect();
        let p2 = p2_score(&estimates(sites, &exp), &th).unwrap();
        prop_assert!((p2.value - delta.abs()).abs() < 1e-12);
    }

    #[test]
    fn classification_brackets_the_threshold(value in 0.0f64..1.0, stderr in 0.0f64..0.3, eps in 0.01f64..1.0) {
        let p2 = P2Score { sites: 6, value, stderr, nearest_neighbour_only: false };
        match classify(&p2, eps) {
            CellStatus::Pass => prop_assert!(value + stderr <= eps),
            CellStatus::Inconclusive => prop_assert!(value <= eps && eps < value + stderr),
            CellStatus::Fail => prop_assert!(value > eps),
        }
    }

    #[test]
    fn shot_files_round_trip(sites in 1usize..16, rows in prop::collection::vec(any::<u16>(), 1..40), seed in any::<u64>()) {
        let bits: Vec<Vec<u8>> = rows.iter().map(|r| (0..sites).map(|i| ((r >> i) & 1) as u8).collect()).collect();
        let metadata = ShotMetadata {
            device_id: "prop".into(),
            sites,
            a_um: Some(7.5),
            g: 1.0,
            coupling: 1.22,
            initial_state: InitialState::Down,
            t_us: 1.25,
            n_shots: bits.len(),
            seed: Some(seed),
        };
        let set = ShotRecordSet::new(metadata, bits).unwrap();
        let back = ShotRecordSet::parse(set.to_text().unwrap().as_bytes()).unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn free_fermion_correlators_are_bounded(sites in 4usize..40, g in 0.0f64..2.0, t in 0.0f64..20.0, plus in any::<bool>()) {
        let state = if plus { InitialState::Plus } else { InitialState::Down };
        let engine = FreeFermionEngine::from_parts(sites, g, 1.0, state).unwrap();
        let c = engine.correlations(t).unwrap();
        prop_assert!(c.one_point.abs() <= 1.0 + 1e-9);
        for (zz, conn) in c.two_point.iter().zip(&c.connected) {
            prop_assert!(zz.abs() <= 1.0 + 1e-9);
            prop_assert!(conn.abs() <= 2.0 + 1e-9);
        }
    }
}
