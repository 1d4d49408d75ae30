//! Random instances and independent reference computations shared by the
//! integration tests. The oracles work straight from the user parameters and
//! never call into the library's formulas.
#![allow(dead_code)]

use offload_core::experiments::{generate_scenario, GeneratorSpec};
use offload_core::{DecisionProfile, Scenario, UserProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Heterogeneous user with parameters spread over several orders of magnitude.
/// Some users get a cloud slower than their own CPU and never offload.
pub fn random_user(rng: &mut ChaCha8Rng) -> UserProfile {
    let local_freq = rng.gen_range(0.3e9..1.5e9);
    let weight_time: f64 = rng.gen_range(0.0..1.0);
    let weight_energy = if rng.gen_bool(0.1) {
        1.0 - weight_time
    } else {
        rng.gen_range(0.01..1.0)
    };
    let ghz = local_freq / 1e9;
    UserProfile {
        transmit_power: rng.gen_range(0.05..0.3),
        channel_gain: log_uniform(rng, 1e-9, 1e-4),
        background_power: log_uniform(rng, 1e-13, 1e-10),
        input_bits: log_uniform(rng, 1e5, 2e7),
        cycles: log_uniform(rng, 1e8, 3e9),
        local_freq,
        cloud_freq: if rng.gen_bool(0.05) {
            local_freq * 0.5
        } else {
            log_uniform(rng, 2e9, 2e11)
        },
        weight_time,
        weight_energy,
        energy_per_cycle: 1e-11 * ghz * ghz * rng.gen_range(0.5..2.0),
    }
}

pub fn random_scenario(rng: &mut ChaCha8Rng, n: usize) -> Scenario {
    let bandwidth = log_uniform(rng, 1e6, 2e7);
    let users = (0..n).map(|_| random_user(rng)).collect();
    Scenario::new(bandwidth, users).expect("valid random scenario")
}

/// Scenario from the default placement generator.
pub fn placed_scenario(seed: u64, n: usize) -> Scenario {
    generate_scenario(&GeneratorSpec {
        users: n,
        seed,
        ..Default::default()
    })
    .expect("valid generated scenario")
}

/// Either kind of instance, chosen by the seed.
pub fn mixed_scenario(seed: u64, n: usize) -> Scenario {
    if seed.is_multiple_of(2) {
        placed_scenario(seed, n)
    } else {
        random_scenario(&mut rng(seed), n)
    }
}

pub fn random_profile(rng: &mut ChaCha8Rng, n: usize) -> DecisionProfile {
    DecisionProfile::new((0..n).map(|_| rng.gen_bool(0.5)).collect())
}

pub fn oracle_interference(s: &Scenario, a: &[bool], n: usize) -> f64 {
    let mut total = 0.0;
    for (m, u) in s.users().iter().enumerate() {
        if m != n && a[m] {
            total += u.transmit_power * u.channel_gain;
        }
    }
    total
}

pub fn oracle_local(u: &UserProfile) -> f64 {
    u.weight_time * (u.cycles / u.local_freq) + u.weight_energy * (u.energy_per_cycle * u.cycles)
}

pub fn oracle_cloud(u: &UserProfile, bandwidth: f64, mu: f64) -> f64 {
    let sinr = u.transmit_power * u.channel_gain / (u.background_power + mu);
    // log2(1 + x) accurate for tiny SINR
    let rate = bandwidth * sinr.ln_1p() / std::f64::consts::LN_2;
    let time = u.input_bits / rate + u.cycles / u.cloud_freq;
    let energy = u.transmit_power * u.input_bits / rate;
    u.weight_time * time + u.weight_energy * energy
}

pub fn oracle_overhead(s: &Scenario, a: &[bool], n: usize) -> f64 {
    let u = &s.users()[n];
    if a[n] {
        oracle_cloud(u, s.bandwidth(), oracle_interference(s, a, n))
    } else {
        oracle_local(u)
    }
}

pub fn oracle_cost(s: &Scenario, a: &[bool]) -> f64 {
    (0..a.len()).map(|n| oracle_overhead(s, a, n)).sum()
}

/// Offloading is a best response iff the cloud branch is no worse.
pub fn oracle_best_response(s: &Scenario, a: &[bool], n: usize) -> bool {
    let u = &s.users()[n];
    oracle_cloud(u, s.bandwidth(), oracle_interference(s, a, n)) <= oracle_local(u)
}

/// Whether flipping user `n` strictly lowers its own overhead.
pub fn oracle_improves(s: &Scenario, a: &[bool], n: usize) -> bool {
    let mut b = a.to_vec();
    b[n] = !b[n];
    oracle_overhead(s, &b, n) < oracle_overhead(s, a, n)
}

pub fn oracle_is_nash(s: &Scenario, a: &[bool]) -> bool {
    (0..a.len()).all(|n| !oracle_improves(s, a, n))
}

pub fn all_profiles(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |i| (0..n).map(|k| (i >> (n - 1 - k)) & 1 == 1).collect())
}

pub fn oracle_equilibria(s: &Scenario) -> Vec<String> {
    all_profiles(s.len())
        .filter(|a| oracle_is_nash(s, a))
        .map(|a| bits_string(&a))
        .collect()
}

/// Plain scan; keeps the first (lexicographically smallest) minimiser.
pub fn oracle_optimum(s: &Scenario) -> (Vec<bool>, f64) {
    let mut best = (Vec::new(), f64::INFINITY);
    for a in all_profiles(s.len()) {
        let c = oracle_cost(s, &a);
        if c < best.1 {
            best = (a, c);
        }
    }
    best
}

/// Double-sum potential with caller-supplied per-user local terms.
pub fn oracle_potential(s: &Scenario, a: &[bool], local_terms: &[f64]) -> f64 {
    let p: Vec<f64> = s.users().iter().map(|u| u.transmit_power * u.channel_gain).collect();
    let mut phi = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i < j && a[i] && a[j] {
                phi += p[i] * p[j];
            }
        }
        if !a[i] {
            phi += p[i] * local_terms[i];
        }
    }
    phi
}

pub fn bits_string(a: &[bool]) -> String {
    a.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
