//! Slotted simulation of the decentralized offloading mechanism.
//!
//! Every user starts offloading. In each decision slot all users measure the
//! interference from current offloaders, work out whether flipping would
//! strictly lower their own overhead, and the users that can improve contend
//! for a single update opportunity. The winner flips and broadcasts a
//! request-to-update (RTU); everyone else keeps its decision. The run ends
//! after `quiet_slots` consecutive slots without an RTU.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game;
use crate::model::{self, DecisionProfile, Scenario};

/// Messages exchanged per decision update: interference enquiry, enquiry
/// reply and RTU broadcast. Pilot transmissions are not counted.
pub const MESSAGES_PER_UPDATE: u64 = 3;

pub const MESSAGE_CONVENTION: &str =
    "decentralized: 3 messages per decision update (interference enquiry, enquiry reply, RTU broadcast); pilots not counted";

/// RNG stream used for contention draws, distinct from scenario generation.
const CONTENTION_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContentionMode {
    /// Each contender draws a backoff uniformly on [0, 1); the earliest wins.
    UniformBackoff,
    /// A contender is picked uniformly at random.
    RandomWinner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MechanismConfig {
    pub quiet_slots: u32,
    pub contention: ContentionMode,
    pub seed: u64,
    pub max_slots: u64,
}

impl MechanismConfig {
    pub fn with_seed(seed: u64) -> Self {
        MechanismConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.quiet_slots == 0 {
            return Err(Error::invalid("quiet_slots", "must be >= 1"));
        }
        if self.max_slots == 0 {
            return Err(Error::invalid("max_slots", "must be >= 1"));
        }
        Ok(())
    }
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig {
            quiet_slots: 1,
            contention: ContentionMode::UniformBackoff,
            seed: 0,
            max_slots: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotMessages {
    /// Pilot transmissions by current offloaders (informational).
    pub pilots: u64,
    pub enquiries: u64,
    pub replies: u64,
    pub rtu: u64,
}

impl SlotMessages {
    /// Messages counted under [`MESSAGE_CONVENTION`].
    pub fn counted(&self) -> u64 {
        self.enquiries + self.replies + self.rtu
    }
}

/// One decision slot. Profile, overheads, potential and cost are the state
/// after the slot's update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub t: u64,
    pub interference: Vec<f64>,
    pub contenders: Vec<usize>,
    pub winner: Option<usize>,
    pub profile: DecisionProfile,
    pub overheads: Vec<f64>,
    pub potential: f64,
    pub system_cost: f64,
    pub messages: SlotMessages,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismTrace {
    pub config: MechanismConfig,
    pub initial_profile: DecisionProfile,
    pub initial_overheads: Vec<f64>,
    pub initial_potential: f64,
    pub initial_system_cost: f64,
    pub slots: Vec<SlotRecord>,
    pub final_profile: DecisionProfile,
    pub updates: u64,
    pub messages: MessageLedger,
    pub converged: bool,
}

impl MechanismTrace {
    pub fn final_system_cost(&self) -> f64 {
        self.slots.last().map_or(self.initial_system_cost, |r| r.system_cost)
    }

    pub fn final_potential(&self) -> f64 {
        self.slots.last().map_or(self.initial_potential, |r| r.potential)
    }

    /// Writes one line per slot: `t,winner,profile,potential,system_cost,messages`.
    pub fn write_lines<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "winner", "profile", "potential", "system_cost", "messages"])?;
        for r in &self.slots {
            w.write_record([
                r.t.to_string(),
                r.winner.map(|n| n.to_string()).unwrap_or_default(),
                r.profile.to_string(),
                r.potential.to_string(),
                r.system_cost.to_string(),
                r.messages.counted().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MessageLedger {
    pub updates: u64,
    pub enquiries: u64,
    pub replies: u64,
    pub rtu: u64,
    pub total: u64,
    pub pilots: u64,
    pub convention: String,
}

/// Recounts messages from the slot records.
pub fn message_ledger(trace: &MechanismTrace) -> MessageLedger {
    ledger_from_slots(&trace.slots)
}

fn ledger_from_slots(slots: &[SlotRecord]) -> MessageLedger {
    let mut ledger = MessageLedger {
        convention: MESSAGE_CONVENTION.to_string(),
        ..Default::default()
    };
    for r in slots {
        ledger.updates += u64::from(r.winner.is_some());
        ledger.enquiries += r.messages.enquiries;
        ledger.replies += r.messages.replies;
        ledger.rtu += r.messages.rtu;
        ledger.pilots += r.messages.pilots;
    }
    ledger.total = ledger.enquiries + ledger.replies + ledger.rtu;
    ledger
}

/// Pick the update winner among `contenders` (ascending user ids).
pub fn contention_winner(contenders: &[usize], mode: ContentionMode, rng: &mut ChaCha8Rng) -> Option<usize> {
    match (contenders.len(), mode) {
        (0, _) => None,
        (_, ContentionMode::UniformBackoff) => {
            let mut best: Option<(f64, usize)> = None;
            for &n in contenders {
                let backoff: f64 = rng.gen();
                if best.is_none_or(|(b, _)| backoff < b) {
                    best = Some((backoff, n));
                }
            }
            best.map(|(_, n)| n)
        }
        (len, ContentionMode::RandomWinner) => Some(contenders[rng.gen_range(0..len)]),
    }
}

pub fn contention_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CONTENTION_STREAM);
    rng
}

fn overheads(s: &Scenario, bits: &[bool]) -> Vec<f64> {
    (0..bits.len())
        .map(|n| model::user_overhead_unchecked(s, bits, n))
        .collect()
}

pub fn run_mechanism(s: &Scenario, cfg: &MechanismConfig) -> Result<MechanismTrace> {
    cfg.validate()?;
    let game = Game::new(s);
    let n = s.len();
    let mut rng = contention_rng(cfg.seed);

    let initial = DecisionProfile::all_offload(n);
    let initial_overheads = overheads(s, initial.bits());
    let initial_potential = game.potential(initial.bits());
    let initial_system_cost = model::system_cost_bits(s, initial.bits());

    let mut current = initial.clone();
    let mut slots = Vec::new();
    let mut quiet = 0u32;
    let mut converged = false;

    for t in 0..cfg.max_slots {
        let bits = current.bits();
        let interference: Vec<f64> = (0..n).map(|m| game.interference(bits, m)).collect();
        let contenders: Vec<usize> = (0..n)
            .filter(|&m| !crate::game::improvement_given(bits[m], interference[m], game.thresholds()[m]).is_empty())
            .collect();
        let pilots = current.offloader_count() as u64;
        let winner = contention_winner(&contenders, cfg.contention, &mut rng);
        let messages = match winner {
            Some(w) => {
                current = current.flipped(w);
                quiet = 0;
                SlotMessages {
                    pilots,
                    enquiries: 1,
                    replies: 1,
                    rtu: 1,
                }
            }
            None => {
                quiet += 1;
                SlotMessages {
                    pilots,
                    ..Default::default()
                }
            }
        };
        let bits = current.bits();
        slots.push(SlotRecord {
            t,
            interference,
            contenders,
            winner,
            profile: current.clone(),
            overheads: overheads(s, bits),
            potential: game.potential(bits),
            system_cost: model::system_cost_bits(s, bits),
            messages,
        });
        if quiet >= cfg.quiet_slots {
            converged = true;
            break;
        }
    }

    let ledger = ledger_from_slots(&slots);
    Ok(MechanismTrace {
        config: *cfg,
        initial_profile: initial,
        initial_overheads,
        initial_potential,
        initial_system_cost,
        updates: ledger.updates,
        messages: ledger,
        final_profile: current,
        slots,
        converged,
    })
}
