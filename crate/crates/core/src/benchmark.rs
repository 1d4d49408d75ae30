//! Centralized optimum, baselines and equilibrium efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{self, UpdateRule};
use crate::model::{self, DecisionProfile, Scenario};

/// Above this many users the optimum is found by branch-and-bound.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;

const PRUNE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimumMethod {
    Exhaustive,
    BranchAndBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub profile: DecisionProfile,
    pub cost: f64,
    pub method: OptimumMethod,
}

/// Minimum system cost over all profiles; ties go to the lexicographically
/// smallest profile.
pub fn centralized_optimum(s: &Scenario) -> Result<Optimum> {
    centralized_optimum_with_cap(s, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn centralized_optimum_with_cap(s: &Scenario, cap: usize) -> Result<Optimum> {
    if s.len() <= cap {
        exhaustive_optimum(s, cap)
    } else {
        Ok(branch_and_bound_optimum(s))
    }
}

pub fn exhaustive_optimum(s: &Scenario, cap: usize) -> Result<Optimum> {
    let n = s.len();
    if n > cap || n >= 64 {
        return Err(Error::CapacityExceeded { users: n, cap });
    }
    let mut bits = vec![false; n];
    let mut best = (f64::INFINITY, 0u64);
    for k in 0..1u64 << n {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = (k >> (n - 1 - i)) & 1 == 1;
        }
        let cost = model::system_cost_bits(s, &bits);
        if cost < best.0 {
            best = (cost, k);
        }
    }
    Ok(Optimum {
        profile: DecisionProfile::from_index(best.1, n),
        cost: best.0,
        method: OptimumMethod::Exhaustive,
    })
}

struct Search<'a> {
    scenario: &'a Scenario,
    local: Vec<f64>,
    received: Vec<f64>,
    bits: Vec<bool>,
    best_cost: f64,
    best_bits: Vec<bool>,
    nodes: u64,
}

impl Search<'_> {
    /// Cost lower bound with users `0..depth` fixed. Fixed offloaders see the
    /// interference of the other fixed offloaders; a free user pays at least
    /// the cheaper of local execution and offloading under that interference.
    fn bound(&self, depth: usize) -> f64 {
        let users = self.scenario.users();
        let w = self.scenario.bandwidth();
        let fixed = &self.bits[..depth];
        let mut offloaded = 0.0;
        let mut total = 0.0;
        for (n, &b) in fixed.iter().enumerate() {
            if b {
                offloaded += self.received[n];
                let mu = model::interference_unchecked(&users[..depth], fixed, n);
                total += model::cloud_overhead_at(&users[n], w, mu);
            } else {
                total += self.local[n];
            }
        }
        for (u, &local) in users[depth..].iter().zip(&self.local[depth..]) {
            total += local.min(model::cloud_overhead_at(u, w, offloaded));
        }
        total
    }

    fn offer(&mut self, cost: f64, bits: &[bool]) {
        if cost < self.best_cost || (cost == self.best_cost && bits < self.best_bits.as_slice()) {
            self.best_cost = cost;
            self.best_bits = bits.to_vec();
        }
    }

    fn descend(&mut self, depth: usize) {
        self.nodes += 1;
        if depth == self.bits.len() {
            let cost = model::system_cost_bits(self.scenario, &self.bits);
            let bits = self.bits.clone();
            self.offer(cost, &bits);
            return;
        }
        for choice in [false, true] {
            self.bits[depth] = choice;
            let bound = self.bound(depth + 1);
            if bound <= self.best_cost + PRUNE_SLACK * self.best_cost.abs() {
                self.descend(depth + 1);
            }
        }
        self.bits[depth] = false;
    }
}

/// Exact optimum by depth-first branch-and-bound over users in id order.
pub fn branch_and_bound_optimum(s: &Scenario) -> Optimum {
    branch_and_bound_with_stats(s).0
}

/// Branch-and-bound optimum together with the number of search nodes visited.
pub fn branch_and_bound_with_stats(s: &Scenario) -> (Optimum, u64) {
    let n = s.len();
    let mut search = Search {
        scenario: s,
        local: s.users().iter().map(model::local_overhead).collect(),
        received: s.users().iter().map(|u| u.received_power()).collect(),
        bits: vec![false; n],
        best_cost: f64::INFINITY,
        best_bits: vec![false; n],
        nodes: 0,
    };
    // incumbents: all-local and an equilibrium reached from all-offload
    let all_local = vec![false; n];
    search.offer(model::system_cost_bits(s, &all_local), &all_local);
    let start = DecisionProfile::all_offload(n);
    let ne = game::better_response_path(s, &start, UpdateRule::LowestIndex)
        .expect("profile length matches")
        .pop()
        .unwrap_or(start);
    search.offer(model::system_cost_bits(s, ne.bits()), ne.bits());

    search.descend(0);
    (
        Optimum {
            profile: DecisionProfile::new(search.best_bits),
            cost: search.best_cost,
            method: OptimumMethod::BranchAndBound,
        },
        search.nodes,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub all_local: f64,
    pub all_cloud: f64,
}

pub fn baselines(s: &Scenario) -> Baselines {
    let n = s.len();
    Baselines {
        all_local: model::system_cost_bits(s, &vec![false; n]),
        all_cloud: model::system_cost_bits(s, &vec![true; n]),
    }
}

/// Upper bound on the price of anarchy: `Σ Z^l / Σ min(Z^l, Z̄^c)` where
/// `Z̄^c` is the interference-free cloud overhead.
pub fn poa_bound(s: &Scenario) -> f64 {
    let w = s.bandwidth();
    let (num, den) = s.users().iter().fold((0.0, 0.0), |(num, den), u| {
        let local = model::local_overhead(u);
        let cloud = model::interference_free_cloud_overhead(u, w);
        (num + local, den + local.min(cloud))
    });
    num / den
}

/// Worst equilibrium cost over the optimum cost, from exact enumeration.
pub fn poa(s: &Scenario) -> Result<f64> {
    Ok(equilibrium_report(s)?.poa)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub optimum: Optimum,
    pub equilibria: Vec<DecisionProfile>,
    pub worst_ne_profile: DecisionProfile,
    pub worst_ne_cost: f64,
    pub best_ne_profile: DecisionProfile,
    pub best_ne_cost: f64,
    pub poa: f64,
    pub poa_bound: f64,
    pub baselines: Baselines,
}

pub fn equilibrium_report(s: &Scenario) -> Result<EquilibriumReport> {
    equilibrium_report_with_cap(s, game::DEFAULT_ENUMERATION_CAP)
}

pub fn equilibrium_report_with_cap(s: &Scenario, cap: usize) -> Result<EquilibriumReport> {
    let equilibria = game::enumerate_equilibria_with_cap(s, cap)?;
    let optimum = exhaustive_optimum(s, cap)?;
    let costs: Vec<f64> = equilibria
        .profiles()
        .iter()
        .map(|a| model::system_cost_bits(s, a.bits()))
        .collect();
    // nonempty: the game is a potential game
    let (mut worst, mut best) = (0usize, 0usize);
    for (i, &c) in costs.iter().enumerate() {
        if c > costs[worst] {
            worst = i;
        }
        if c < costs[best] {
            best = i;
        }
    }
    let profiles = equilibria.profiles();
    Ok(EquilibriumReport {
        worst_ne_profile: profiles[worst].clone(),
        worst_ne_cost: costs[worst],
        best_ne_profile: profiles[best].clone(),
        best_ne_cost: costs[best],
        poa: costs[worst] / optimum.cost,
        poa_bound: poa_bound(s),
        baselines: baselines(s),
        equilibria: profiles.to_vec(),
        optimum,
    })
}
