mod common;

use common::*;
use offload_core::game::Game;
use offload_core::mechanism::{
    contention_rng, contention_winner, message_ledger, run_mechanism, ContentionMode, MechanismConfig,
    MESSAGES_PER_UPDATE,
};
use offload_core::DecisionProfile;
use proptest::prelude::*;

fn config(seed: u64, contention: ContentionMode) -> MechanismConfig {
    MechanismConfig {
        contention,
        ..MechanismConfig::with_seed(seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn runs_end_in_verified_equilibria(seed in any::<u64>(), n in 1usize..=12, random_winner in any::<bool>()) {
        let s = mixed_scenario(seed, n);
        let mode = if random_winner { ContentionMode::RandomWinner } else { ContentionMode::UniformBackoff };
        let trace = run_mechanism(&s, &config(seed, mode)).unwrap();
        prop_assert!(trace.converged);
        prop_assert_eq!(&trace.initial_profile, &DecisionProfile::all_offload(n));
        prop_assert!(oracle_is_nash(&s, trace.final_profile.bits()));

        let g = Game::new(&s);
        let mut state = trace.initial_profile.clone();
        let mut phi = trace.initial_potential;
        for r in &trace.slots {
            prop_assert_eq!(&r.contenders, &g.improvers(state.bits()));
            for (m, &mu) in r.interference.iter().enumerate() {
                prop_assert!(rel_close(mu, oracle_interference(&s, state.bits(), m), 1e-12) || mu == 0.0);
            }
            match r.winner {
                Some(w) => {
                    prop_assert!(r.contenders.contains(&w));
                    state = state.flipped(w);
                    prop_assert!(r.potential < phi);
                    prop_assert_eq!(r.messages.counted(), MESSAGES_PER_UPDATE);
                }
                None => {
                    prop_assert!(r.contenders.is_empty());
                    prop_assert_eq!(r.potential, phi);
                    prop_assert_eq!(r.messages.counted(), 0);
                }
            }
            prop_assert_eq!(&r.profile, &state);
            prop_assert!(rel_close(r.system_cost, oracle_cost(&s, state.bits()), 1e-12));
            phi = r.potential;
        }
        prop_assert_eq!(&state, &trace.final_profile);
        prop_assert_eq!(trace.slots.len() as u64, trace.updates + 1);
    }

    #[test]
    fn ledger_counts_three_messages_per_update(seed in any::<u64>(), n in 1usize..=16) {
        let s = placed_scenario(seed, n);
        let trace = run_mechanism(&s, &MechanismConfig::with_seed(seed)).unwrap();
        prop_assert_eq!(trace.messages.total, 3 * trace.updates);
        prop_assert_eq!(&message_ledger(&trace), &trace.messages);
        let pilots: u64 = trace.slots.iter().map(|r| r.messages.pilots).sum();
        prop_assert_eq!(trace.messages.pilots, pilots);
    }
}

#[test]
fn replay_is_deterministic() {
    let s = placed_scenario(11, 14);
    for mode in [ContentionMode::UniformBackoff, ContentionMode::RandomWinner] {
        let a = run_mechanism(&s, &config(5, mode)).unwrap();
        let b = run_mechanism(&s, &config(5, mode)).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn more_quiet_slots_only_extend_the_tail() {
    let s = placed_scenario(3, 10);
    let one = run_mechanism(&s, &MechanismConfig::with_seed(8)).unwrap();
    let three = run_mechanism(
        &s,
        &MechanismConfig {
            quiet_slots: 3,
            ..MechanismConfig::with_seed(8)
        },
    )
    .unwrap();
    assert_eq!(three.final_profile, one.final_profile);
    assert_eq!(three.updates, one.updates);
    assert_eq!(three.slots.len(), one.slots.len() + 2);
}

#[test]
fn slot_cap_reports_non_convergence() {
    let s = placed_scenario(3, 10);
    let cfg = MechanismConfig {
        max_slots: 1,
        ..MechanismConfig::with_seed(8)
    };
    let trace = run_mechanism(&s, &cfg).unwrap();
    assert!(!trace.converged);
    assert_eq!(trace.slots.len(), 1);
}

#[test]
fn contention_is_uniform_over_four_contenders() {
    const DRAWS: usize = 10_000;
    let contenders = [2, 5, 7, 11];
    for mode in [ContentionMode::UniformBackoff, ContentionMode::RandomWinner] {
        let mut rng = contention_rng(2024);
        let mut counts = [0usize; 4];
        for _ in 0..DRAWS {
            let w = contention_winner(&contenders, mode, &mut rng).unwrap();
            counts[contenders.iter().position(|&c| c == w).unwrap()] += 1;
        }
        for c in counts {
            let share = c as f64 / DRAWS as f64;
            assert!((share - 0.25).abs() <= 0.02, "{mode:?}: share {share}");
        }
    }
    assert_eq!(
        contention_winner(&[], ContentionMode::UniformBackoff, &mut contention_rng(0)),
        None
    );
    assert_eq!(
        contention_winner(&[4], ContentionMode::RandomWinner, &mut contention_rng(0)),
        Some(4)
    );
}

#[test]
fn trace_lines_have_a_header_and_one_row_per_slot() {
    let s = placed_scenario(21, 8);
    let trace = run_mechanism(&s, &MechanismConfig::with_seed(21)).unwrap();
    let mut out = Vec::new();
    trace.write_lines(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,winner,profile,potential,system_cost,messages");
    assert_eq!(lines.len(), trace.slots.len() + 1);
    assert!(lines
        .last()
        .unwrap()
        .starts_with(&format!("{},,", trace.slots.len() - 1)));
}

#[test]
fn config_validation() {
    assert!(run_mechanism(
        &placed_scenario(1, 2),
        &MechanismConfig {
            quiet_slots: 0,
            ..Default::default()
        }
    )
    .is_err());
    assert!(serde_json::from_str::<MechanismConfig>(r#"{"seed": 3, "bogus": 1}"#).is_err());
    let cfg: MechanismConfig = serde_json::from_str(r#"{"seed": 3, "contention": "random-winner"}"#).unwrap();
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.contention, ContentionMode::RandomWinner);
    assert_eq!(cfg.quiet_slots, 1);
}
