mod common;

use common::*;
use offload_core::game;
use offload_core::homogeneous::{
    beneficial_group, homogeneous_equilibrium, homogeneous_view, synthetic_scenario, HomogeneousView,
};
use offload_core::{Error, Scenario, UserProfile};
use proptest::prelude::*;

const K: f64 = 1e-7;

fn template() -> UserProfile {
    UserProfile {
        transmit_power: 0.1,
        channel_gain: 1e-6,
        background_power: 1e-13,
        input_bits: 3.36e6,
        cycles: 1e9,
        local_freq: 1e9,
        cloud_freq: 1e11,
        weight_time: 0.5,
        weight_energy: 0.5,
        energy_per_cycle: 1e-11,
    }
}

fn ratio() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => 0.0f64..13.0,
        // finite negative thresholds exist only above -ω/K = -1e-6
        1 => -9e-7f64..0.0,
        1 => Just(f64::NEG_INFINITY),
    ]
}

fn homogeneous(ratios: &[f64]) -> Scenario {
    synthetic_scenario(5e6, K, ratios, &template()).unwrap()
}

#[test]
fn worked_example_selects_the_top_three() {
    let s = homogeneous(&[5.0, 4.0, 3.0, 2.0]);
    let view = homogeneous_view(&s).unwrap();
    for (got, want) in view.ratios().iter().zip([5.0, 4.0, 3.0, 2.0]) {
        assert!(rel_close(*got, want, 1e-9), "{got} vs {want}");
    }
    assert_eq!(beneficial_group(&view).unwrap().members, [0, 1, 2]);
    let a = homogeneous_equilibrium(&s).unwrap();
    assert_eq!(a.to_string(), "1110");
    assert!(oracle_is_nash(&s, a.bits()));
}

#[test]
fn ranking_is_by_ratio_then_index() {
    let v = HomogeneousView::from_ratios(1.0, &[1.0, 3.0, f64::NEG_INFINITY, 3.0, 2.0]).unwrap();
    assert_eq!(v.order(), [1, 3, 4, 0, 2]);
    assert_eq!(beneficial_group(&v).unwrap().members, [1, 3, 4]);
}

#[test]
fn negative_best_ratio_means_all_local() {
    let s = homogeneous(&[-2e-7, f64::NEG_INFINITY, -1e-7]);
    let view = homogeneous_view(&s).unwrap();
    assert!(matches!(beneficial_group(&view), Err(Error::NoBeneficialGroup { .. })));
    let a = homogeneous_equilibrium(&s).unwrap();
    assert_eq!(a.to_string(), "000");
    assert!(oracle_is_nash(&s, a.bits()));
}

#[test]
fn heterogeneous_access_is_rejected() {
    let s = placed_scenario(4, 3);
    assert!(matches!(homogeneous_view(&s), Err(Error::NotHomogeneous { .. })));
}

#[test]
fn unreachable_ratio_is_rejected() {
    // threshold below -ω cannot be produced by any finite local frequency
    assert!(synthetic_scenario(5e6, K, &[-2.0], &template()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn constructed_profile_is_an_enumerated_equilibrium(ratios in proptest::collection::vec(ratio(), 1..=12)) {
        let s = homogeneous(&ratios);
        let a = homogeneous_equilibrium(&s).unwrap();
        prop_assert!(game::enumerate_equilibria(&s).unwrap().contains(&a));
        prop_assert!(oracle_is_nash(&s, a.bits()));
    }

    #[test]
    fn group_is_the_largest_feasible_prefix(ratios in proptest::collection::vec(-1.0f64..15.0, 1..=20)) {
        let v = HomogeneousView::from_ratios(1.0, &ratios).unwrap();
        prop_assert!(v.ratios().windows(2).all(|w| w[0] >= w[1]));
        match beneficial_group(&v) {
            Ok(g) => {
                let size = g.members.len();
                prop_assert_eq!(&g.members[..], &v.order()[..size]);
                for i in 0..size {
                    prop_assert!(v.ratios()[i] + 1.0 >= size as f64);
                }
                if size < v.len() {
                    prop_assert!(v.ratios()[size] + 1.0 < (size + 1) as f64);
                }
            }
            Err(_) => prop_assert!(v.ratios()[0] < 0.0),
        }
    }
}
