//! Output-channel loss, detector efficiency, calibration and correction.
//!
//! After post-selection on the full photon number, input loss cancels and only
//! the relative transmission of the two output channels matters. With the
//! second channel as reference (`ε4 = 1`), outcome `(k, n-k)` is detected at
//! a rate proportional to `ε3^k · ε4^(n-k)`, times an optional per-outcome
//! detector efficiency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::counts::{CountRecord, DetectionRates};
use crate::multiphoton::{Outcome, OutcomeDistribution};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModel {
    epsilon3: f64,
    #[serde(default = "one")]
    epsilon4: f64,
    /// Relative detection efficiency per outcome, keyed by the two-digit
    /// outcome label (`"20"`, `"11"`, ...). Missing outcomes default to 1.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    detector: BTreeMap<String, f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for LossModel {
    fn default() -> Self {
        Self::trivial()
    }
}

impl LossModel {
    /// `ε3 > 0`. Values above 1 are allowed so that calibrations where the
    /// first channel happens to transmit better remain representable.
    pub fn new(epsilon3: f64) -> Result<Self> {
        if !(epsilon3.is_finite() && epsilon3 > 0.0) {
            return Err(Error::InvalidParameter(format!("relative transmission ε3 = {epsilon3} must be positive")));
        }
        Ok(Self { epsilon3, epsilon4: 1.0, detector: BTreeMap::new() })
    }

    pub fn trivial() -> Self {
        Self { epsilon3: 1.0, epsilon4: 1.0, detector: BTreeMap::new() }
    }

    pub fn with_detector_efficiency(mut self, outcome: Outcome, efficiency: f64) -> Result<Self> {
        if !(efficiency.is_finite() && efficiency > 0.0) {
            return Err(Error::InvalidParameter(format!("detector efficiency {efficiency} must be positive")));
        }
        self.detector.insert(outcome.to_string(), efficiency);
        Ok(self)
    }

    /// Checks a deserialised model.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.epsilon3)?;
        if self.epsilon4 != 1.0 {
            return Err(Error::InvalidParameter(format!("ε4 is the reference channel and must be 1, got {}", self.epsilon4)));
        }
        for (label, eff) in &self.detector {
            Outcome::parse(label)?;
            if !(eff.is_finite() && *eff > 0.0) {
                return Err(Error::InvalidParameter(format!("detector efficiency {eff} for `{label}`")));
            }
        }
        Ok(())
    }

    pub fn epsilon3(&self) -> f64 {
        self.epsilon3
    }

    pub fn epsilon4(&self) -> f64 {
        self.epsilon4
    }

    pub fn is_trivial(&self) -> bool {
        self.epsilon3 == 1.0 && self.detector.values().all(|e| *e == 1.0)
    }

    /// Rate multiplier for one outcome.
    pub fn weight(&self, outcome: Outcome) -> f64 {
        let det = self.detector.get(&outcome.to_string()).copied().unwrap_or(1.0);
        self.epsilon3.powi(outcome.first as i32) * self.epsilon4.powi(outcome.second as i32) * det
    }

    pub fn weights(&self, n: u32) -> Vec<f64> {
        (0..=n).map(|i| self.weight(Outcome::new(n - i, i))).collect()
    }
}

/// Per-outcome detection rates under loss; deliberately not renormalised.
pub fn apply_loss(d: &OutcomeDistribution, loss: &LossModel) -> DetectionRates {
    let rates = d.probs().iter().zip(loss.weights(d.photons())).map(|(p, w)| p * w).collect();
    DetectionRates::new(d.photons(), rates).expect("weights are positive")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossCalibration {
    pub model: LossModel,
    pub epsilon3: f64,
    /// First-order Poisson standard error of `ε3`.
    pub stderr: f64,
}

/// `ε3 = √(C(2,0) / C(0,2))` from a two-photon `|1,1⟩` record; for a process
/// with `P(2,0) = P(0,2)` the bunching counts differ only through loss.
pub fn calibrate_loss(c: &CountRecord) -> Result<LossCalibration> {
    if c.photons() != 2 {
        return Err(Error::CalibrationImpossible(format!(
            "loss calibration needs two-photon counts, got {} photons",
            c.photons()
        )));
    }
    let c20 = c.get(Outcome::new(2, 0)) as f64;
    let c02 = c.get(Outcome::new(0, 2)) as f64;
    if c02 == 0.0 {
        return Err(Error::CalibrationImpossible("C(0,2) = 0".into()));
    }
    if c20 == 0.0 {
        return Err(Error::CalibrationImpossible("C(2,0) = 0 gives zero transmission".into()));
    }
    let epsilon3 = (c20 / c02).sqrt();
    let stderr = epsilon3 * 0.5 * (1.0 / c20 + 1.0 / c02).sqrt();
    Ok(LossCalibration { model: LossModel::new(epsilon3)?, epsilon3, stderr })
}

fn check_photons(n: u32, loss_n: u32) -> Result<()> {
    if n != loss_n {
        return Err(Error::Dimension(format!("{n}-photon data against {loss_n}-photon weights")));
    }
    Ok(())
}

/// Divides by the loss weights and renormalises.
pub fn correct_rates(rates: &DetectionRates, loss: &LossModel) -> Result<OutcomeDistribution> {
    let w = loss.weights(rates.photons());
    check_photons(rates.photons(), w.len() as u32 - 1)?;
    let raw: Vec<f64> = rates.rates().iter().zip(&w).map(|(r, w)| r / w).collect();
    if raw.iter().sum::<f64>() <= 0.0 {
        return Err(Error::EmptyCounts);
    }
    OutcomeDistribution::from_weights(rates.photons(), raw)
}

/// Loss-corrected probabilities from observed counts.
pub fn correct_counts(c: &CountRecord, loss: &LossModel) -> Result<OutcomeDistribution> {
    if c.total() == 0 {
        return Err(Error::EmptyCounts);
    }
    let rates = DetectionRates::new(c.photons(), c.counts().iter().map(|k| *k as f64).collect())?;
    correct_rates(&rates, loss)
}

/// First-order standard errors of the corrected probabilities when the
/// (possibly expected) counts `counts` are independent Poisson variables.
///
/// With `r_j = c_j / w_j` and `S = Σ r_j`, `p_i = r_i / S` and
/// `∂p_i/∂c_j = (δ_ij S - r_i) / (w_j S²)`.
pub fn corrected_stderr(counts: &[f64], loss: &LossModel) -> Vec<f64> {
    let n = counts.len() as u32 - 1;
    let w = loss.weights(n);
    let r: Vec<f64> = counts.iter().zip(&w).map(|(c, w)| c / w).collect();
    let s: f64 = r.iter().sum();
    if s <= 0.0 {
        return vec![0.0; counts.len()];
    }
    (0..counts.len())
        .map(|i| {
            let var: f64 = (0..counts.len())
                .map(|j| {
                    let delta = if i == j { s } else { 0.0 };
                    let d = (delta - r[i]) / (w[j] * s * s);
                    d * d * counts[j]
                })
                .sum();
            var.sqrt()
        })
        .collect()
}
