//! The virtual laboratory: counting noise, loss, metrics, experiment plans,
//! convergence traces and figure datasets.

pub mod convergence;
pub mod counts;
pub mod figures;
pub mod loss;
pub mod metrics;
pub mod plan;

pub use convergence::{running_average, ConvergenceTrace};
pub use counts::{simulate_counts, simulate_rates, CountRecord, DetectionRates};
pub use figures::{reproduce_figure, FigureConfig, FigureData, FigureId};
pub use loss::{apply_loss, calibrate_loss, correct_counts, correct_rates, LossCalibration, LossModel};
pub use metrics::{statistical_fidelity, uniformity_metrics, UniformityMetrics};
pub use plan::{run_plan, CountBudget, ExperimentPlan, PlanResult};

use crate::su2::{ensemble_d1, ensemble_d2, haar_ensemble, Ensemble};
use crate::{Error, Result};

/// Stream reserved for drawing Haar ensembles from a seed.
const HAAR_STREAM: u64 = u64::MAX;

/// Builds an ensemble from `d1`, `d2` or `haar:K`; Haar ensembles are drawn
/// deterministically from `seed`.
pub fn resolve_ensemble(label: &str, seed: u64) -> Result<Ensemble> {
    match label {
        "d1" => Ok(ensemble_d1()),
        "d2" => Ok(ensemble_d2()),
        _ => {
            let k = label
                .strip_prefix("haar:")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| *k > 0)
                .ok_or_else(|| Error::UnknownLabel(format!("ensemble `{label}` (expected d1, d2 or haar:K)")))?;
            haar_ensemble(k, &mut plan::stream_rng(seed, HAAR_STREAM))
        }
    }
}
