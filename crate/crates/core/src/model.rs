//! Communication and computation overhead model.
//!
//! Every quantity is SI: bandwidth in Hz, powers in watts, data in bits,
//! workloads in CPU cycles, frequencies in cycles per second. Overheads are
//! the user's weighted mix of seconds and joules.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient of the default per-cycle energy rule `ν = 1e-11 · f²` with `f` in GHz.
pub const ENERGY_COEFFICIENT: f64 = 1e-11;

/// Default energy per CPU cycle (J/cycle) for a device running at `local_freq` Hz.
pub fn default_energy_per_cycle(local_freq: f64) -> f64 {
    let ghz = local_freq / 1e9;
    ENERGY_COEFFICIENT * ghz * ghz
}

/// Physical, task and preference parameters of one mobile user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    /// Transmit power `P_n` (W).
    pub transmit_power: f64,
    /// Channel gain to the base station `H_n`.
    pub channel_gain: f64,
    /// Noise plus external interference `ω_n` (W).
    pub background_power: f64,
    /// Offloaded input size `B_n` (bits).
    pub input_bits: f64,
    /// Task workload `D_n` (cycles).
    pub cycles: f64,
    /// Local CPU frequency (cycles/s).
    pub local_freq: f64,
    /// Cloud CPU frequency granted to this user (cycles/s).
    pub cloud_freq: f64,
    /// Weight on processing time, in [0, 1].
    pub weight_time: f64,
    /// Weight on energy, in [0, 1].
    pub weight_energy: f64,
    /// Local energy per cycle `ν_n` (J/cycle).
    pub energy_per_cycle: f64,
}

impl UserProfile {
    /// Received power at the base station, `P_n · H_n`.
    #[inline]
    pub fn received_power(&self) -> f64 {
        self.transmit_power * self.channel_gain
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("transmit_power", self.transmit_power),
            ("channel_gain", self.channel_gain),
            ("background_power", self.background_power),
            ("input_bits", self.input_bits),
            ("cycles", self.cycles),
            ("local_freq", self.local_freq),
            ("cloud_freq", self.cloud_freq),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(field, format!("must be finite and > 0, got {value}")));
            }
        }
        for (field, value) in [("weight_time", self.weight_time), ("weight_energy", self.weight_energy)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::invalid(field, format!("must lie in [0, 1], got {value}")));
            }
        }
        if self.weight_time + self.weight_energy <= 0.0 {
            return Err(Error::invalid("weight_time", "weight_time + weight_energy must be > 0"));
        }
        if !(self.energy_per_cycle.is_finite() && self.energy_per_cycle >= 0.0) {
            return Err(Error::invalid(
                "energy_per_cycle",
                format!("must be finite and >= 0, got {}", self.energy_per_cycle),
            ));
        }
        Ok(())
    }
}

/// Placement record for generated scenarios.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_loss_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_station: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct RawScenario {
    bandwidth: f64,
    users: Vec<UserProfile>,
    #[serde(default)]
    meta: Option<ScenarioMeta>,
}

/// A validated set of users sharing one wireless channel. User ids are the
/// indices into [`Scenario::users`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    bandwidth: f64,
    users: Vec<UserProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<ScenarioMeta>,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        let mut s = Scenario::new(raw.bandwidth, raw.users)?;
        s.meta = raw.meta;
        Ok(s)
    }
}

impl Scenario {
    pub fn new(bandwidth: f64, users: Vec<UserProfile>) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::invalid(
                "bandwidth",
                format!("must be finite and > 0, got {bandwidth}"),
            ));
        }
        if users.is_empty() {
            return Err(Error::invalid("users", "at least one user is required"));
        }
        for (i, u) in users.iter().enumerate() {
            u.validate().map_err(|e| match e {
                Error::InvalidParameter { field, reason } => Error::InvalidParameter {
                    field: format!("users[{i}].{field}"),
                    reason,
                },
                other => other,
            })?;
        }
        Ok(Scenario {
            bandwidth,
            users,
            meta: None,
        })
    }

    pub fn with_meta(mut self, meta: ScenarioMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn users(&self) -> &[UserProfile] {
        &self.users
    }

    pub fn user(&self, n: usize) -> Result<&UserProfile> {
        self.users.get(n).ok_or(Error::UserOutOfRange {
            index: n,
            count: self.users.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn meta(&self) -> Option<&ScenarioMeta> {
        self.meta.as_ref()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub(crate) fn check(&self, a: &DecisionProfile, n: usize) -> Result<()> {
        self.check_profile(a)?;
        if n >= self.users.len() {
            return Err(Error::UserOutOfRange {
                index: n,
                count: self.users.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_profile(&self, a: &DecisionProfile) -> Result<()> {
        if a.len() != self.users.len() {
            return Err(Error::ProfileLength {
                got: a.len(),
                expected: self.users.len(),
            });
        }
        Ok(())
    }
}

/// Joint offloading decisions; `true` means the user offloads.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecisionProfile(Vec<bool>);

impl DecisionProfile {
    pub fn new(bits: Vec<bool>) -> Self {
        DecisionProfile(bits)
    }

    pub fn all_local(n: usize) -> Self {
        DecisionProfile(vec![false; n])
    }

    pub fn all_offload(n: usize) -> Self {
        DecisionProfile(vec![true; n])
    }

    /// Profile number `index` in lexicographic order over `{0,1}^n`, user 0
    /// being the most significant position.
    pub fn from_index(index: u64, n: usize) -> Self {
        DecisionProfile((0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn offloads(&self, n: usize) -> bool {
        self.0[n]
    }

    pub fn set(&mut self, n: usize, offload: bool) {
        self.0[n] = offload;
    }

    pub fn flipped(&self, n: usize) -> Self {
        let mut next = self.clone();
        next.0[n] = !next.0[n];
        next
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn offloader_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for DecisionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for DecisionProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::MalformedProfile(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(DecisionProfile)
    }
}

impl Serialize for DecisionProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DecisionProfile {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Interference level below which offloading is a best response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// The cloud branch can never beat local execution.
    NeverOffload,
    /// Threshold in watts; may be negative.
    Finite(f64),
}

impl Threshold {
    /// Whether offloading is a (weak) best response under `interference`.
    #[inline]
    pub fn admits(&self, interference: f64) -> bool {
        match *self {
            Threshold::NeverOffload => false,
            Threshold::Finite(l) => interference <= l,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Threshold::NeverOffload => None,
            Threshold::Finite(l) => Some(l),
        }
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Threshold::NeverOffload, Threshold::NeverOffload) => Some(Ordering::Equal),
            (Threshold::NeverOffload, Threshold::Finite(_)) => Some(Ordering::Less),
            (Threshold::Finite(_), Threshold::NeverOffload) => Some(Ordering::Greater),
            (Threshold::Finite(a), Threshold::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::NeverOffload => f.write_str("NEVER_OFFLOAD"),
            Threshold::Finite(l) => write!(f, "{l:e}"),
        }
    }
}

// Per-user formulas, parameterised by the received interference.

/// Uplink rate under `interference` watts of co-channel power.
#[inline]
pub fn rate_at(u: &UserProfile, bandwidth: f64, interference: f64) -> f64 {
    bandwidth * (u.received_power() / (u.background_power + interference)).ln_1p() / std::f64::consts::LN_2
}

pub fn local_time(u: &UserProfile) -> f64 {
    u.cycles / u.local_freq
}

pub fn local_energy(u: &UserProfile) -> f64 {
    u.energy_per_cycle * u.cycles
}

pub fn local_overhead(u: &UserProfile) -> f64 {
    u.weight_time * local_time(u) + u.weight_energy * local_energy(u)
}

pub fn cloud_exec_time(u: &UserProfile) -> f64 {
    u.cycles / u.cloud_freq
}

/// Cloud overhead when the user sees `interference` watts from other offloaders.
#[inline]
pub fn cloud_overhead_at(u: &UserProfile, bandwidth: f64, interference: f64) -> f64 {
    let rate = rate_at(u, bandwidth, interference);
    let t_off = u.input_bits / rate;
    let e_off = u.transmit_power * u.input_bits / rate;
    u.weight_time * (t_off + cloud_exec_time(u)) + u.weight_energy * e_off
}

/// Cloud overhead with no co-channel interference.
pub fn interference_free_cloud_overhead(u: &UserProfile, bandwidth: f64) -> f64 {
    cloud_overhead_at(u, bandwidth, 0.0)
}

/// Offloading threshold of a single user on a channel of `bandwidth` Hz.
pub fn threshold_of(u: &UserProfile, bandwidth: f64) -> Threshold {
    let margin = local_overhead(u) - u.weight_time * cloud_exec_time(u);
    if margin <= 0.0 {
        return Threshold::NeverOffload;
    }
    let exponent = (u.weight_time + u.weight_energy * u.transmit_power) * u.input_bits / (bandwidth * margin);
    // 2^x - 1 without cancellation for small x
    let denom = (exponent * std::f64::consts::LN_2).exp_m1();
    Threshold::Finite(u.received_power() / denom - u.background_power)
}

// Scenario-level operations.

/// Co-channel power `Σ_{m≠n, a_m=1} P_m H_m` received alongside user `n`.
pub fn interference(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<f64> {
    s.check(a, n)?;
    Ok(interference_unchecked(s.users(), a.bits(), n))
}

#[inline]
pub(crate) fn interference_unchecked(users: &[UserProfile], bits: &[bool], n: usize) -> f64 {
    users
        .iter()
        .zip(bits)
        .enumerate()
        .filter(|&(m, (_, &b))| b && m != n)
        .map(|(_, (u, _))| u.received_power())
        .sum()
}

pub fn uplink_rate(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<f64> {
    let mu = interference(s, a, n)?;
    Ok(rate_at(&s.users()[n], s.bandwidth(), mu))
}

pub fn offload_time(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<f64> {
    let rate = uplink_rate(s, a, n)?;
    Ok(s.users()[n].input_bits / rate)
}

pub fn offload_energy(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<f64> {
    let rate = uplink_rate(s, a, n)?;
    let u = &s.users()[n];
    Ok(u.transmit_power * u.input_bits / rate)
}

pub fn cloud_overhead(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<f64> {
    let mu = interference(s, a, n)?;
    Ok(cloud_overhead_at(&s.users()[n], s.bandwidth(), mu))
}

/// Overhead `V_n(a)`: local overhead when `a_n = 0`, cloud overhead otherwise.
pub fn user_overhead(s: &Scenario, a: &DecisionProfile, n: usize) -> Result<f64> {
    s.check(a, n)?;
    Ok(user_overhead_unchecked(s, a.bits(), n))
}

#[inline]
pub(crate) fn user_overhead_unchecked(s: &Scenario, bits: &[bool], n: usize) -> f64 {
    let u = &s.users()[n];
    if bits[n] {
        cloud_overhead_at(u, s.bandwidth(), interference_unchecked(s.users(), bits, n))
    } else {
        local_overhead(u)
    }
}

/// Total overhead `Σ_n V_n(a)`.
pub fn system_cost(s: &Scenario, a: &DecisionProfile) -> Result<f64> {
    s.check_profile(a)?;
    Ok(system_cost_bits(s, a.bits()))
}

/// O(N) evaluation of the system cost. Interference is assembled from
/// prefix and suffix sums so no term is ever subtracted.
pub(crate) fn system_cost_bits(s: &Scenario, bits: &[bool]) -> f64 {
    let users = s.users();
    let n = users.len();
    let mut suffix = vec![0.0; n + 1];
    for m in (0..n).rev() {
        suffix[m] = suffix[m + 1] + if bits[m] { users[m].received_power() } else { 0.0 };
    }
    let mut prefix = 0.0;
    let mut total = 0.0;
    for (m, u) in users.iter().enumerate() {
        if bits[m] {
            total += cloud_overhead_at(u, s.bandwidth(), prefix + suffix[m + 1]);
            prefix += u.received_power();
        } else {
            total += local_overhead(u);
        }
    }
    total
}

pub fn threshold(s: &Scenario, n: usize) -> Result<Threshold> {
    Ok(threshold_of(s.user(n)?, s.bandwidth()))
}

pub fn thresholds(s: &Scenario) -> Vec<Threshold> {
    s.users().iter().map(|u| threshold_of(u, s.bandwidth())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_user() -> UserProfile {
        UserProfile {
            transmit_power: 1.0,
            channel_gain: 1.0,
            background_power: 1.0,
            input_bits: 1.0,
            cycles: 1e9,
            local_freq: 1e9,
            cloud_freq: 1e11,
            weight_time: 1.0,
            weight_energy: 0.0,
            energy_per_cycle: 0.0,
        }
    }

    #[test]
    fn rate_with_unit_sinr_is_one_bit() {
        let s = Scenario::new(1.0, vec![unit_user()]).unwrap();
        let r = uplink_rate(&s, &DecisionProfile::all_offload(1), 0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);

        let mut a = unit_user();
        a.transmit_power = 3.0;
        let mut b = unit_user();
        b.transmit_power = 2.0;
        let s = Scenario::new(1.0, vec![a, b]).unwrap();
        let r = uplink_rate(&s, &DecisionProfile::all_offload(2), 0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        // rate ignores the user's own decision
        let r0 = uplink_rate(&s, &"01".parse().unwrap(), 0).unwrap();
        assert_eq!(r, r0);
    }

    #[test]
    fn uplink_rate_rejects_bad_index() {
        let s = Scenario::new(1.0, vec![unit_user()]).unwrap();
        assert!(matches!(
            uplink_rate(&s, &DecisionProfile::all_local(1), 3),
            Err(Error::UserOutOfRange { index: 3, count: 1 })
        ));
        assert!(matches!(
            uplink_rate(&s, &DecisionProfile::all_local(2), 0),
            Err(Error::ProfileLength { .. })
        ));
    }

    #[test]
    fn local_time_and_energy() {
        let mut u = unit_user();
        assert_eq!(local_time(&u), 1.0);
        u.local_freq = 0.5e9;
        assert_eq!(local_time(&u), 2.0);
        u.local_freq = 0.8e9;
        assert!((local_time(&u) - 1.25).abs() < 1e-15);

        assert_eq!(local_energy(&u), 0.0);
        u.energy_per_cycle = 1e-11;
        assert!((local_energy(&u) - 1e-2).abs() < 1e-17);

        u.local_freq = 1e9;
        u.energy_per_cycle = default_energy_per_cycle(u.local_freq);
        assert!((local_energy(&u) - 1e-2).abs() < 1e-17);
    }

    #[test]
    fn local_overhead_weights() {
        let mut u = unit_user();
        u.energy_per_cycle = 1e-11;
        assert_eq!(local_overhead(&u), local_time(&u));
        u.weight_time = 0.0;
        u.weight_energy = 1.0;
        assert_eq!(local_overhead(&u), local_energy(&u));
        u.weight_time = 0.5;
        u.weight_energy = 0.5;
        assert!((local_overhead(&u) - 0.505).abs() < 1e-15);
    }

    #[test]
    fn offload_components() {
        let mut u = unit_user();
        u.transmit_power = 2.0;
        u.background_power = 2.0;
        // SINR = 1 -> R = 1 bit/s
        let s = Scenario::new(1.0, vec![u]).unwrap();
        let a = DecisionProfile::all_offload(1);
        assert!((offload_time(&s, &a, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((offload_energy(&s, &a, 0).unwrap() - 2.0).abs() < 1e-15);
        assert!((cloud_exec_time(&u) - 1e-2).abs() < 1e-18);
        // γT = 1, γE = 0: 1 + 0.01
        assert!((cloud_overhead(&s, &a, 0).unwrap() - 1.01).abs() < 1e-14);
    }

    #[test]
    fn overhead_branches() {
        let mut u = unit_user();
        u.energy_per_cycle = 1e-11;
        let s = Scenario::new(1.0, vec![u, u]).unwrap();
        let local = DecisionProfile::all_local(2);
        assert_eq!(user_overhead(&s, &local, 0).unwrap(), local_overhead(&u));
        let sole: DecisionProfile = "10".parse().unwrap();
        assert_eq!(
            user_overhead(&s, &sole, 0).unwrap(),
            interference_free_cloud_overhead(&u, 1.0)
        );
        assert!((system_cost(&s, &local).unwrap() - 2.0 * local_overhead(&u)).abs() < 1e-15);
    }

    #[test]
    fn threshold_never_offload_when_cloud_exec_dominates() {
        let mut u = unit_user();
        u.cloud_freq = 0.5e9; // cloud slower than the device
        assert_eq!(threshold_of(&u, 1.0), Threshold::NeverOffload);
    }

    #[test]
    fn threshold_zero_at_exact_tie() {
        // γT=1, γE=0, B=1, W=1, D=1e9, Fl=1e9, Fc=1e11: margin = 1 - 0.01 = 0.99,
        // exponent = 1/0.99; choose P*H so that P*H/ω = 2^x - 1.
        let mut u = unit_user();
        let x = 1.0 / 0.99;
        u.transmit_power = 2f64.powf(x) - 1.0;
        let l = threshold_of(&u, 1.0).value().unwrap();
        assert!(l.abs() < 1e-15, "L = {l}");
    }

    #[test]
    fn threshold_ordering() {
        assert!(Threshold::NeverOffload < Threshold::Finite(-1e300));
        assert!(Threshold::Finite(1.0) > Threshold::Finite(0.5));
        assert!(!Threshold::NeverOffload.admits(0.0));
        assert!(Threshold::Finite(0.0).admits(0.0));
    }

    #[test]
    fn validation_reports_field() {
        let mut u = unit_user();
        u.weight_time = 1.5;
        let err = Scenario::new(1.0, vec![unit_user(), u]).unwrap_err();
        assert!(err.to_string().contains("users[1].weight_time"), "{err}");
        u.weight_time = 0.0;
        assert!(u.validate().is_err());
        assert!(Scenario::new(0.0, vec![unit_user()]).is_err());
        assert!(Scenario::new(1.0, vec![]).is_err());
    }

    #[test]
    fn profile_text_and_index() {
        let a: DecisionProfile = "1010".parse().unwrap();
        assert_eq!(a.to_string(), "1010");
        assert_eq!(DecisionProfile::from_index(0b1010, 4), a);
        assert!("10a".parse::<DecisionProfile>().is_err());
        assert_eq!(a.offloader_count(), 2);
    }

    #[test]
    fn scenario_json_is_validated() {
        let s = Scenario::new(5e6, vec![unit_user()]).unwrap();
        let text = s.to_json().unwrap();
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
        let bad = text.replace("\"bandwidth\": 5000000.0", "\"bandwidth\": -1.0");
        assert!(Scenario::from_json(&bad).is_err());
    }
}
