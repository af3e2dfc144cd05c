//! Running averages over randomly drawn ensemble elements.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::counts::simulate_rates;
use super::loss::{apply_loss, correct_counts, correct_rates, corrected_stderr};
use super::plan::{stream_rng, ExperimentPlan};
use super::resolve_ensemble;
use crate::multiphoton::{distribution_with_mismatch, MismatchModel, Outcome, OutcomeDistribution};
use crate::su2::compose_interferometer;
use crate::tables::Tables;
use crate::{Error, Result};

/// Traces use streams above this offset so they never share a stream with
/// `run_plan` tasks.
const TRACE_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub repeat: usize,
    /// `running_mean[i]` averages the first `i + 1` sampled unitaries.
    pub running_mean: Vec<f64>,
    /// First-order Poisson standard error of each running mean.
    pub envelope: Vec<f64>,
    /// Events recorded for each sampled unitary (0 in exact mode).
    pub events: Vec<u64>,
    /// Value the trace converges to: the ensemble average of the analytic
    /// probability under the plan's mismatch and loss correction.
    pub expected: f64,
}

impl ConvergenceTrace {
    pub fn final_mean(&self) -> f64 {
        *self.running_mean.last().expect("nonempty trace")
    }

    pub fn final_envelope(&self) -> f64 {
        *self.envelope.last().expect("nonempty trace")
    }
}

/// Outcome tracked for `n` photons: the probe outcome for one and two
/// photons, `(2,1)` for three.
pub fn tracked_outcome(n: u32) -> Outcome {
    match n {
        1 => Outcome::new(1, 0),
        2 => Outcome::new(1, 1),
        n => Outcome::new(n - 1, 1),
    }
}

/// `repeats` independent traces of length `budget` for the plan's single
/// setting. Unitaries are drawn uniformly from the ensemble; a draw that
/// records no events carries no information and is redrawn.
pub fn running_average(plan: &ExperimentPlan, tables: &Tables, budget: usize, repeats: usize) -> Result<Vec<ConvergenceTrace>> {
    plan.validate()?;
    if budget == 0 {
        return Err(Error::InvalidParameter("trace budget must be positive".into()));
    }
    let settings = plan.resolve_settings(tables)?;
    if settings.len() != 1 {
        return Err(Error::Plan(format!("running averages need exactly one setting, got {}", settings.len())));
    }
    let input = plan.input(&settings)?;
    let outcome = tracked_outcome(input.total());
    let ensemble = resolve_ensemble(&plan.ensemble, plan.seed)?;
    let mismatch = MismatchModel::new(plan.theta)?;

    let expected_dists: Vec<OutcomeDistribution> = ensemble
        .elements()
        .iter()
        .map(|u| distribution_with_mismatch(&compose_interferometer(&settings[0].angles, u), input, &mismatch))
        .collect();
    let rates: Vec<_> = expected_dists.iter().map(|d| apply_loss(d, &plan.loss)).collect();
    let expected = expected_dists.iter().map(|d| d.get(outcome)).sum::<f64>() / ensemble.len() as f64;
    let idx = outcome.second as usize;

    (0..repeats)
        .into_par_iter()
        .map(|repeat| {
            let mut rng = stream_rng(plan.seed, TRACE_STREAM_OFFSET + repeat as u64);
            let mut trace = ConvergenceTrace {
                repeat,
                running_mean: Vec::with_capacity(budget),
                envelope: Vec::with_capacity(budget),
                events: Vec::with_capacity(budget),
                expected,
            };
            let (mut sum, mut var) = (0.0, 0.0);
            for i in 0..budget {
                let (value, v, events) = loop {
                    let e = rng.random_range(0..ensemble.len());
                    match plan.counts.draw_mean(&mut rng) {
                        None => break (correct_rates(&rates[e], &plan.loss)?.probs()[idx], 0.0, 0),
                        Some(mean) => {
                            let c = simulate_rates(&rates[e], mean, &mut rng)?;
                            if c.total() == 0 {
                                continue;
                            }
                            let p = correct_counts(&c, &plan.loss)?.probs()[idx];
                            let lambda: Vec<f64> = rates[e].rates().iter().map(|r| r * mean).collect();
                            let se = corrected_stderr(&lambda, &plan.loss)[idx];
                            break (p, se * se, c.total());
                        }
                    }
                };
                sum += value;
                var += v;
                let n = (i + 1) as f64;
                trace.running_mean.push(sum / n);
                trace.envelope.push(var.sqrt() / n);
                trace.events.push(events);
            }
            Ok(trace)
        })
        .collect()
}
