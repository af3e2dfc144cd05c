//! Distribution similarity and uniformity across probe settings.

use serde::Serialize;

use crate::multiphoton::OutcomeDistribution;
use crate::{Error, Result};

/// `F(P, P') = Σ √(P_i P'_i)`.
pub fn statistical_fidelity(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64> {
    if p.photons() != q.photons() {
        return Err(Error::Dimension(format!(
            "fidelity between {}- and {}-photon distributions",
            p.photons(),
            q.photons()
        )));
    }
    let f: f64 = p.probs().iter().zip(q.probs()).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(f.min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniformityMetrics {
    /// Population variance of the averages.
    pub variance: f64,
    /// `max |avg - reference| / reference`, in percent.
    pub max_percent_deviation: f64,
}

pub fn uniformity_metrics(averages: &[f64], reference: f64) -> Result<UniformityMetrics> {
    if averages.is_empty() {
        return Err(Error::InvalidParameter("uniformity of an empty set of averages".into()));
    }
    if !(reference.is_finite() && reference != 0.0) {
        return Err(Error::InvalidParameter(format!("reference value {reference} must be finite and nonzero")));
    }
    let n = averages.len() as f64;
    let mean = averages.iter().sum::<f64>() / n;
    let variance = averages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let max_percent_deviation =
        averages.iter().map(|a| (a - reference).abs() / reference.abs() * 100.0).fold(0.0, f64::max);
    Ok(UniformityMetrics { variance, max_percent_deviation })
}
