//! Equilibrium construction when every user reaches the base station with
//! the same received power `K = P_n H_n`.
//!
//! Users are ranked by `L_n / K` (descending, ties by user id) and the
//! beneficial cloud group is grown greedily along that ranking: user `t`
//! joins while the group including it has at most `L_t / K + 1` members.
//! Members offload, everyone else computes locally.

use crate::error::{Error, Result};
use crate::model::{self, DecisionProfile, Scenario, Threshold, UserProfile};

/// Relative tolerance when checking that all received powers agree.
pub const HOMOGENEITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousView {
    k: f64,
    order: Vec<usize>,
    ratios: Vec<f64>,
}

impl HomogeneousView {
    /// Build a view from raw per-user ratios `L_n / K` (indexed by user id).
    /// `f64::NEG_INFINITY` marks a user that never offloads.
    pub fn from_ratios(k: f64, ratios: &[f64]) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid("k", format!("must be finite and > 0, got {k}")));
        }
        if ratios.is_empty() {
            return Err(Error::invalid("ratios", "at least one user is required"));
        }
        if ratios.iter().any(|r| r.is_nan() || *r == f64::INFINITY) {
            return Err(Error::invalid("ratios", "ratios must be finite or -inf"));
        }
        let mut order: Vec<usize> = (0..ratios.len()).collect();
        // stable: equal ratios keep ascending user id
        order.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]));
        let sorted = order.iter().map(|&i| ratios[i]).collect();
        Ok(HomogeneousView {
            k,
            order,
            ratios: sorted,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// User ids in ranking order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `L_n / K` in ranking order (non-increasing).
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub fn homogeneous_view(s: &Scenario) -> Result<HomogeneousView> {
    let k = s.users()[0].received_power();
    for (n, u) in s.users().iter().enumerate() {
        let p = u.received_power();
        if (p - k).abs() > HOMOGENEITY_TOLERANCE * p.abs().max(k.abs()) {
            return Err(Error::NotHomogeneous {
                user: n,
                value: p,
                expected: k,
            });
        }
    }
    let ratios: Vec<f64> = model::thresholds(s)
        .into_iter()
        .map(|t| match t {
            Threshold::NeverOffload => f64::NEG_INFINITY,
            Threshold::Finite(l) => l / k,
        })
        .collect();
    HomogeneousView::from_ratios(k, &ratios)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeneficialGroup {
    /// Original user ids, in ranking order. Always a prefix of [`HomogeneousView::order`].
    pub members: Vec<usize>,
    /// Number of candidate additions examined.
    pub steps: usize,
}

pub fn beneficial_group(v: &HomogeneousView) -> Result<BeneficialGroup> {
    let top = v.ratios[0];
    if !(top >= 0.0) {
        return Err(Error::NoBeneficialGroup { ratio: top });
    }
    let mut size = 1usize;
    let mut steps = 0usize;
    for &ratio in &v.ratios[1..] {
        steps += 1;
        if (size + 1) as f64 > ratio + 1.0 {
            break;
        }
        size += 1;
    }
    Ok(BeneficialGroup {
        members: v.order[..size].to_vec(),
        steps,
    })
}

/// Equilibrium profile: all-local when the best ratio is negative, otherwise
/// the beneficial group offloads.
pub fn homogeneous_equilibrium(s: &Scenario) -> Result<DecisionProfile> {
    let view = homogeneous_view(s)?;
    let mut a = DecisionProfile::all_local(s.len());
    if view.ratios[0] >= 0.0 {
        for n in beneficial_group(&view)?.members {
            a.set(n, true);
        }
    }
    Ok(a)
}

/// Scenario in which every user has received power `k` and threshold
/// `ratios[n] · k`. Users keep `template`'s parameters except for the channel
/// gain and local CPU frequency, which are solved for. A ratio at or below
/// `-ω / k` cannot be realised as a finite threshold and is an error;
/// `f64::NEG_INFINITY` yields a user that never offloads.
pub fn synthetic_scenario(bandwidth: f64, k: f64, ratios: &[f64], template: &UserProfile) -> Result<Scenario> {
    if template.weight_time <= 0.0 {
        return Err(Error::invalid(
            "weight_time",
            "template must weight time to solve for the local frequency",
        ));
    }
    let mut users = Vec::with_capacity(ratios.len());
    for (n, &ratio) in ratios.iter().enumerate() {
        let mut u = *template;
        u.channel_gain = k / template.transmit_power;
        if ratio == f64::NEG_INFINITY {
            // cloud slower than local: the cloud branch can never win
            u.cloud_freq = u.local_freq * 0.5;
            users.push(u);
            continue;
        }
        let l = ratio * k;
        if !(l + u.background_power > 0.0) || !l.is_finite() {
            return Err(Error::invalid(
                format!("ratios[{n}]"),
                format!("threshold {l:e} W is not above -ω = {:e} W", -u.background_power),
            ));
        }
        let exponent = (k / (l + u.background_power)).ln_1p() / std::f64::consts::LN_2;
        let margin = (u.weight_time + u.weight_energy * u.transmit_power) * u.input_bits / (bandwidth * exponent);
        let z_local = margin + u.weight_time * model::cloud_exec_time(&u);
        let time_part = z_local - u.weight_energy * model::local_energy(&u);
        if !(time_part > 0.0) {
            return Err(Error::invalid(
                format!("ratios[{n}]"),
                "local energy alone exceeds the required local overhead",
            ));
        }
        u.local_freq = u.weight_time * u.cycles / time_part;
        users.push(u);
    }
    Scenario::new(bandwidth, users)
}
