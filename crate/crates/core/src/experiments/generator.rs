use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{default_energy_per_cycle, Scenario, ScenarioMeta, UserProfile};

/// Parameters for random scenario generation. Users are dropped uniformly in
/// a square region with the base station at its center; the channel gain is
/// `d^-α` with `d` floored at `min_distance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorSpec {
    /// Side of the square region (m).
    pub region_side: f64,
    pub users: usize,
    pub path_loss_exponent: f64,
    /// Channel bandwidth (Hz).
    pub bandwidth: f64,
    /// Transmit power (W).
    pub transmit_power: f64,
    /// Background noise and interference (W).
    pub noise_power: f64,
    /// Offloaded data size (bits); 420 KB with 1 KB = 8000 bits.
    pub input_bits: f64,
    /// Task workload (cycles).
    pub cycles: f64,
    /// Local CPU frequencies (Hz), one drawn uniformly per user.
    pub local_freqs: Vec<f64>,
    /// Cloud CPU frequency per user (Hz).
    pub cloud_freq: f64,
    pub weight_time: f64,
    pub weight_energy: f64,
    /// Energy per cycle (J); `None` applies the default frequency rule.
    pub energy_per_cycle: Option<f64>,
    /// Distance floor (m).
    pub min_distance: f64,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            region_side: 50.0,
            users: 20,
            path_loss_exponent: 4.0,
            bandwidth: 5e6,
            transmit_power: 0.1,
            noise_power: 1e-13,
            input_bits: 420.0 * 8000.0,
            cycles: 1000e6,
            local_freqs: vec![0.5e9, 0.8e9, 1.0e9],
            cloud_freq: 100e9,
            weight_time: 0.5,
            weight_energy: 0.5,
            energy_per_cycle: None,
            min_distance: 1.0,
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("region_side", self.region_side),
            ("path_loss_exponent", self.path_loss_exponent),
            ("bandwidth", self.bandwidth),
            ("transmit_power", self.transmit_power),
            ("noise_power", self.noise_power),
            ("input_bits", self.input_bits),
            ("cycles", self.cycles),
            ("cloud_freq", self.cloud_freq),
            ("min_distance", self.min_distance),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(field, format!("must be finite and > 0, got {value}")));
            }
        }
        if self.users == 0 {
            return Err(Error::invalid("users", "must be >= 1"));
        }
        if self.local_freqs.is_empty() || self.local_freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::invalid(
                "local_freqs",
                "must be a nonempty list of positive frequencies",
            ));
        }
        for (field, w) in [("weight_time", self.weight_time), ("weight_energy", self.weight_energy)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid(field, format!("must lie in [0, 1], got {w}")));
            }
        }
        if self.weight_time + self.weight_energy <= 0.0 {
            return Err(Error::invalid("weight_time", "weight_time + weight_energy must be > 0"));
        }
        if let Some(nu) = self.energy_per_cycle {
            if !(nu.is_finite() && nu >= 0.0) {
                return Err(Error::invalid("energy_per_cycle", format!("must be >= 0, got {nu}")));
            }
        }
        Ok(())
    }

    pub fn base_station(&self) -> [f64; 2] {
        [self.region_side / 2.0, self.region_side / 2.0]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GeneratorSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Random scenario, fully determined by `spec` (including its seed).
pub fn generate_scenario(spec: &GeneratorSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut positions = Vec::with_capacity(spec.users);
    let mut freqs = Vec::with_capacity(spec.users);
    for _ in 0..spec.users {
        let x = rng.gen_range(0.0..spec.region_side);
        let y = rng.gen_range(0.0..spec.region_side);
        positions.push([x, y]);
        freqs.push(spec.local_freqs[rng.gen_range(0..spec.local_freqs.len())]);
    }
    build_scenario(spec, &positions, &freqs)
}

/// Scenario with explicit user positions and local frequencies; the user
/// count comes from `positions`.
pub fn build_scenario(spec: &GeneratorSpec, positions: &[[f64; 2]], local_freqs: &[f64]) -> Result<Scenario> {
    spec.validate()?;
    if positions.len() != local_freqs.len() {
        return Err(Error::invalid("local_freqs", "one frequency per position is required"));
    }
    let bs = spec.base_station();
    let users = positions
        .iter()
        .zip(local_freqs)
        .map(|(p, &f)| {
            let d = (p[0] - bs[0]).hypot(p[1] - bs[1]).max(spec.min_distance);
            UserProfile {
                transmit_power: spec.transmit_power,
                channel_gain: d.powf(-spec.path_loss_exponent),
                background_power: spec.noise_power,
                input_bits: spec.input_bits,
                cycles: spec.cycles,
                local_freq: f,
                cloud_freq: spec.cloud_freq,
                weight_time: spec.weight_time,
                weight_energy: spec.weight_energy,
                energy_per_cycle: spec.energy_per_cycle.unwrap_or_else(|| default_energy_per_cycle(f)),
            }
        })
        .collect();
    let meta = ScenarioMeta {
        seed: Some(spec.seed),
        path_loss_exponent: Some(spec.path_loss_exponent),
        base_station: Some(bs),
        positions: positions.to_vec(),
    };
    Ok(Scenario::new(spec.bandwidth, users)?.with_meta(meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_ten_metres_gives_gain_1e_minus_4() {
        let spec = GeneratorSpec::default();
        let bs = spec.base_station();
        let s = build_scenario(&spec, &[[bs[0] + 6.0, bs[1] + 8.0]], &[1e9]).unwrap();
        let h = s.users()[0].channel_gain;
        assert!((h - 1e-4).abs() < 1e-16, "{h}");
    }

    #[test]
    fn distance_floor_applies() {
        let spec = GeneratorSpec::default();
        let s = build_scenario(&spec, &[spec.base_station()], &[1e9]).unwrap();
        assert_eq!(s.users()[0].channel_gain, 1.0);
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let spec = GeneratorSpec {
            seed: 42,
            ..Default::default()
        };
        assert_eq!(generate_scenario(&spec).unwrap(), generate_scenario(&spec).unwrap());
        let other = GeneratorSpec {
            seed: 43,
            ..spec.clone()
        };
        assert_ne!(generate_scenario(&spec).unwrap(), generate_scenario(&other).unwrap());
    }

    #[test]
    fn defaults_match_unit_conventions() {
        let spec = GeneratorSpec::default();
        assert_eq!(spec.input_bits, 3.36e6);
        assert_eq!(spec.cycles, 1e9);
        let s = generate_scenario(&spec).unwrap();
        for u in s.users() {
            assert!(spec.local_freqs.contains(&u.local_freq));
            let ghz = u.local_freq / 1e9;
            assert!((u.energy_per_cycle - 1e-11 * ghz * ghz).abs() < 1e-25);
        }
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(GeneratorSpec::from_json(r#"{"users": 5, "colour": 1}"#).is_err());
        let spec = GeneratorSpec::from_json(r#"{"users": 5, "seed": 9}"#).unwrap();
        assert_eq!(spec.users, 5);
        assert_eq!(spec.bandwidth, 5e6);
        assert!(GeneratorSpec::from_json(r#"{"min_distance": 0}"#).is_err());
    }
}
