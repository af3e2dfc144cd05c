//! Detection counts and Poisson counting noise.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::multiphoton::{Outcome, OutcomeDistribution};
use crate::{Error, Result};

/// Counts per outcome for a fixed total photon number; index `i` is outcome
/// `(n - i, i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    n: u32,
    counts: Vec<u64>,
}

impl CountRecord {
    pub fn new(n: u32, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n as usize + 1 {
            return Err(Error::Dimension(format!(
                "{n}-photon counts need {} entries, got {}",
                n + 1,
                counts.len()
            )));
        }
        Ok(Self { n, counts })
    }

    /// Two-photon record from `C(2,0)`, `C(1,1)`, `C(0,2)`.
    pub fn two_photon(c20: u64, c11: u64, c02: u64) -> Self {
        Self { n: 2, counts: vec![c20, c11, c02] }
    }

    pub fn zeros(n: u32) -> Self {
        Self { n, counts: vec![0; n as usize + 1] }
    }

    pub fn photons(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn get(&self, outcome: Outcome) -> u64 {
        if outcome.total() != self.n {
            return 0;
        }
        self.counts[outcome.second as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, u64)> + '_ {
        self.counts.iter().enumerate().map(|(i, c)| (Outcome::new(self.n - i as u32, i as u32), *c))
    }
}

impl fmt::Display for CountRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(o, c)| format!("C({},{})={c}", o.first, o.second)).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Unnormalised per-outcome detection weights (probabilities times channel
/// transmissions and detector efficiencies).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionRates {
    n: u32,
    rates: Vec<f64>,
}

impl DetectionRates {
    pub fn new(n: u32, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != n as usize + 1 {
            return Err(Error::Dimension(format!("{n}-photon rates need {} entries", n + 1)));
        }
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidParameter(format!("detection rate {r} is not a nonnegative number")));
        }
        Ok(Self { n, rates })
    }

    pub fn photons(&self) -> u32 {
        self.n
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

impl From<&OutcomeDistribution> for DetectionRates {
    fn from(d: &OutcomeDistribution) -> Self {
        Self { n: d.photons(), rates: d.probs().to_vec() }
    }
}

fn check_mean(mean_total: f64) -> Result<()> {
    if mean_total.is_finite() && mean_total >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mean count {mean_total} must be finite and nonnegative")))
    }
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
}

/// Independent Poisson counts with means `mean_total · rate`.
pub fn simulate_rates<R: Rng + ?Sized>(rates: &DetectionRates, mean_total: f64, rng: &mut R) -> Result<CountRecord> {
    check_mean(mean_total)?;
    let counts = rates.rates.iter().map(|r| poisson(mean_total * r, rng)).collect();
    CountRecord::new(rates.n, counts)
}

/// Independent Poisson counts with means `mean_total · p(outcome)`.
pub fn simulate_counts<R: Rng + ?Sized>(d: &OutcomeDistribution, mean_total: f64, rng: &mut R) -> Result<CountRecord> {
    simulate_rates(&DetectionRates::from(d), mean_total, rng)
}
