//! Best responses, Nash equilibria and the exact potential of the offloading game.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{interference_unchecked, DecisionProfile, Scenario, Threshold};

/// Largest user count accepted by exhaustive enumeration unless overridden.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Multiplier applied when standing in a finite threshold for users that
/// never offload inside the potential.
pub const NEVER_OFFLOAD_SCALE: f64 = 1e3;

/// Strictly improving unilateral moves available to one user. With a binary
/// strategy space this holds at most one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BestResponseSet(Option<bool>);

impl BestResponseSet {
    pub const EMPTY: BestResponseSet = BestResponseSet(None);

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// The improving decision (`true` = offload), if any.
    pub fn target(&self) -> Option<bool> {
        self.0
    }
}

/// Per-scenario quantities reused by every game computation.
#[derive(Debug, Clone)]
pub struct Game<'a> {
    scenario: &'a Scenario,
    received: Vec<f64>,
    thresholds: Vec<Threshold>,
    potential_thresholds: Vec<f64>,
}

impl<'a> Game<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let received: Vec<f64> = scenario.users().iter().map(|u| u.received_power()).collect();
        let thresholds = crate::model::thresholds(scenario);
        let large = never_offload_stand_in(&received, &thresholds);
        let potential_thresholds = thresholds.iter().map(|t| t.value().unwrap_or(-large)).collect();
        Game {
            scenario,
            received,
            thresholds,
            potential_thresholds,
        }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn len(&self) -> usize {
        self.received.len()
    }

    pub fn is_empty(&self) -> bool {
        self.received.is_empty()
    }

    pub fn thresholds(&self) -> &[Threshold] {
        &self.thresholds
    }

    /// Threshold values used inside the potential; users that never offload
    /// get a large negative stand-in.
    pub fn potential_thresholds(&self) -> &[f64] {
        &self.potential_thresholds
    }

    #[inline]
    pub fn interference(&self, bits: &[bool], n: usize) -> f64 {
        interference_unchecked(self.scenario.users(), bits, n)
    }

    /// Best response of `n` against the others' decisions (`true` = offload).
    #[inline]
    pub fn best_response(&self, bits: &[bool], n: usize) -> bool {
        self.thresholds[n].admits(self.interference(bits, n))
    }

    #[inline]
    pub fn improvement(&self, bits: &[bool], n: usize) -> BestResponseSet {
        improvement_given(bits[n], self.interference(bits, n), self.thresholds[n])
    }

    pub fn is_nash(&self, bits: &[bool]) -> bool {
        (0..bits.len()).all(|n| self.improvement(bits, n).is_empty())
    }

    pub fn improvers(&self, bits: &[bool]) -> Vec<usize> {
        (0..bits.len())
            .filter(|&n| !self.improvement(bits, n).is_empty())
            .collect()
    }

    pub fn potential(&self, bits: &[bool]) -> f64 {
        let mut pairs = 0.0;
        let mut offloaded = 0.0;
        let mut local = 0.0;
        for (n, &b) in bits.iter().enumerate() {
            let p = self.received[n];
            if b {
                pairs += p * offloaded;
                offloaded += p;
            } else {
                local += p * self.potential_thresholds[n];
            }
        }
        pairs + local
    }
}

/// Improving move for a user currently at `offloading` who measures `mu`.
/// Exact ties yield no move.
#[inline]
pub fn improvement_given(offloading: bool, mu: f64, threshold: Threshold) -> BestResponseSet {
    match (offloading, threshold) {
        (false, Threshold::Finite(l)) if mu < l => BestResponseSet(Some(true)),
        (true, Threshold::NeverOffload) => BestResponseSet(Some(false)),
        (true, Threshold::Finite(l)) if mu > l => BestResponseSet(Some(false)),
        _ => BestResponseSet::EMPTY,
    }
}

fn never_offload_stand_in(received: &[f64], thresholds: &[Threshold]) -> f64 {
    let total: f64 = received.iter().sum();
    let max_finite = thresholds
        .iter()
        .filter_map(Threshold::value)
        .fold(0.0f64, |acc, l| acc.max(l.abs()));
    NEVER_OFFLOAD_SCALE * max_finite.max(total)
}

/// Best response of user `n` (`true` = offload), ties resolved toward offloading.
pub fn best_response(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<bool> {
    s.check(a, n)?;
    let mu = interference_unchecked(s.users(), a.bits(), n);
    Ok(crate::model::threshold(s, n)?.admits(mu))
}

pub fn improvement_set(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<BestResponseSet> {
    s.check(a, n)?;
    let mu = interference_unchecked(s.users(), a.bits(), n);
    Ok(improvement_given(a.offloads(n), mu, crate::model::threshold(s, n)?))
}

pub fn is_nash(s: &Scenario, a: &DecisionProfile) -> Result<bool> {
    s.check_profile(a)?;
    Ok(Game::new(s).is_nash(a.bits()))
}

pub fn potential(s: &Scenario, a: &DecisionProfile) -> Result<f64> {
    s.check_profile(a)?;
    Ok(Game::new(s).potential(a.bits()))
}

/// All pure Nash equilibria, in lexicographic order of their bit strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    profiles: Vec<DecisionProfile>,
}

impl EquilibriumSet {
    pub fn profiles(&self) -> &[DecisionProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn contains(&self, a: &DecisionProfile) -> bool {
        self.profiles.binary_search(a).is_ok()
    }
}

pub fn enumerate_equilibria(s: &Scenario) -> Result<EquilibriumSet> {
    enumerate_equilibria_with_cap(s, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_equilibria_with_cap(s: &Scenario, cap: usize) -> Result<EquilibriumSet> {
    let n = s.len();
    if n > cap || n >= 64 {
        return Err(Error::CapacityExceeded { users: n, cap });
    }
    let game = Game::new(s);
    let profiles = (0..1u64 << n)
        .map(|k| DecisionProfile::from_index(k, n))
        .filter(|a| game.is_nash(a.bits()))
        .collect();
    Ok(EquilibriumSet { profiles })
}

/// Which improving user moves next along a better-response path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum UpdateRule {
    /// Lowest-index improving user.
    LowestIndex,
    /// Cycle through users, continuing after the last mover.
    RoundRobin,
    /// Uniformly random improving user from a seeded stream.
    Random { seed: u64 },
}

/// Asynchronous better-response dynamics from `start`. Returns the profile
/// after every update; an empty path means `start` is already an equilibrium.
pub fn better_response_path(s: &Scenario, start: &DecisionProfile, rule: UpdateRule) -> Result<Vec<DecisionProfile>> {
    s.check_profile(start)?;
    let game = Game::new(s);
    let n = s.len();
    let mut rng = match rule {
        UpdateRule::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut cursor = 0usize;
    let mut current = start.clone();
    let mut path = Vec::new();
    loop {
        let improvers = game.improvers(current.bits());
        if improvers.is_empty() {
            return Ok(path);
        }
        let mover = match rule {
            UpdateRule::LowestIndex => improvers[0],
            UpdateRule::RoundRobin => *improvers.iter().find(|&&m| m >= cursor).unwrap_or(&improvers[0]),
            UpdateRule::Random { .. } => {
                let rng = rng.as_mut().expect("seeded for random rule");
                improvers[rng.gen_range(0..improvers.len())]
            }
        };
        cursor = (mover + 1) % n;
        current = current.flipped(mover);
        path.push(current.clone());
    }
}
