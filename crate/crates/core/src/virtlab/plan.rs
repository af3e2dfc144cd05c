//! Experiment plans and their execution.
//!
//! A plan is a small TOML document:
//!
//! ```toml
//! version = 1
//! ensemble = "d1"          # d1 | d2 | haar:K
//! settings = ["q19"]       # probe labels, or a family letter: "p", "q", "r"
//! photons = 2              # optional; defaults to the family's photon number
//! theta = 0.244            # mode mismatch in radians
//! seed = 7
//!
//! [counts]                 # "exact", { poisson = { mean } } or { uniform = { min, max } }
//! poisson = { mean = 10000.0 }
//!
//! [loss]                   # optional
//! epsilon3 = 0.9
//! ```
//!
//! Every (setting, element) task draws from its own ChaCha stream, indexed by
//! `setting · K + element`, so results do not depend on thread scheduling.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::{simulate_rates, CountRecord};
use super::loss::{apply_loss, correct_counts, correct_rates, corrected_stderr, LossModel};
use super::resolve_ensemble;
use crate::multiphoton::{distribution_with_mismatch, FockInput, MismatchModel, OutcomeDistribution};
use crate::su2::compose_interferometer;
use crate::tables::{ProbeFamily, ProbeSetting, Tables};
use crate::{Error, Result};

pub const PLAN_VERSION: u32 = 1;

/// How many events each unitary contributes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CountBudget {
    /// Infinite statistics: the corrected distribution is the analytic one.
    #[default]
    Exact,
    /// Poisson counts with a fixed mean number of events.
    Poisson { mean: f64 },
    /// A uniformly drawn integer number of events in `[min, max]`, then
    /// Poisson counts with that mean.
    Uniform { min: u64, max: u64 },
}

impl CountBudget {
    fn validate(&self) -> Result<()> {
        match *self {
            CountBudget::Exact => Ok(()),
            CountBudget::Poisson { mean } if mean.is_finite() && mean >= 0.0 => Ok(()),
            CountBudget::Uniform { min, max } if min <= max => Ok(()),
            other => Err(Error::Plan(format!("invalid count budget {other:?}"))),
        }
    }

    /// Draws the mean number of events for one unitary.
    pub(crate) fn draw_mean<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match *self {
            CountBudget::Exact => None,
            CountBudget::Poisson { mean } => Some(mean),
            CountBudget::Uniform { min, max } => Some(rng.random_range(min..=max) as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub version: u32,
    pub ensemble: String,
    pub settings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons: Option<u32>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub counts: CountBudget,
    #[serde(default)]
    pub loss: LossModel,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn new(ensemble: &str, settings: &[&str]) -> Self {
        Self {
            version: PLAN_VERSION,
            ensemble: ensemble.to_string(),
            settings: settings.iter().map(|s| s.to_string()).collect(),
            photons: None,
            theta: 0.0,
            counts: CountBudget::Exact,
            loss: LossModel::trivial(),
            seed: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| Error::Plan(e.to_string()))?;
        if plan.version != PLAN_VERSION {
            return Err(Error::Plan(format!(
                "unsupported plan version {} (this build reads version {PLAN_VERSION})",
                plan.version
            )));
        }
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serialises")
    }

    /// Expands family letters and checks every label against `tables`.
    pub fn resolve_settings(&self, tables: &Tables) -> Result<Vec<ProbeSetting>> {
        if self.settings.is_empty() {
            return Err(Error::Plan("a plan needs at least one setting".into()));
        }
        let mut out = Vec::new();
        for label in &self.settings {
            match ProbeFamily::parse(label) {
                Some(family) => out.extend(tables.family(family).iter().cloned()),
                None => out.push(tables.probe(label)?.clone()),
            }
        }
        Ok(out)
    }

    /// The Fock input: the `photons` field if set, else the family's photon number.
    pub fn input(&self, settings: &[ProbeSetting]) -> Result<FockInput> {
        let n = match self.photons {
            Some(n) => n,
            None => {
                let n = settings[0].family.photons();
                if settings.iter().any(|s| s.family.photons() != n) {
                    return Err(Error::Plan("settings mix photon numbers; set `photons` explicitly".into()));
                }
                n
            }
        };
        FockInput::standard(n)
    }

    pub fn validate(&self) -> Result<()> {
        self.counts.validate()?;
        self.loss.validate()?;
        MismatchModel::new(self.theta)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementResult {
    pub label: String,
    /// Analytic distribution under the plan's mismatch (before loss).
    pub expected: OutcomeDistribution,
    pub counts: Option<CountRecord>,
    /// Loss-corrected estimate; `None` when no events were recorded.
    pub corrected: Option<OutcomeDistribution>,
    pub stderr: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingResult {
    pub label: String,
    pub elements: Vec<ElementResult>,
    pub expected_average: OutcomeDistribution,
    /// Average of the corrected estimates over elements that recorded events.
    pub average: Option<OutcomeDistribution>,
    pub average_stderr: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanResult {
    pub ensemble: String,
    pub input: FockInput,
    pub theta: f64,
    pub settings: Vec<SettingResult>,
}

/// Seeded generator for stream `stream` of a plan.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `compose → mismatch → loss → counts → correction → average` for every
/// setting and element.
pub fn run_plan(plan: &ExperimentPlan, tables: &Tables) -> Result<PlanResult> {
    plan.validate()?;
    let settings = plan.resolve_settings(tables)?;
    let input = plan.input(&settings)?;
    let ensemble = resolve_ensemble(&plan.ensemble, plan.seed)?;
    let mismatch = MismatchModel::new(plan.theta)?;
    let k = ensemble.len();

    let tasks: Vec<(usize, usize)> = (0..settings.len()).flat_map(|s| (0..k).map(move |e| (s, e))).collect();
    let elements: Vec<ElementResult> = tasks
        .par_iter()
        .map(|&(s, e)| {
            let mut rng = stream_rng(plan.seed, (s * k + e) as u64);
            let t = compose_interferometer(&settings[s].angles, &ensemble.elements()[e]);
            let expected = distribution_with_mismatch(&t, input, &mismatch);
            let rates = apply_loss(&expected, &plan.loss);
            let (counts, corrected, stderr) = match plan.counts.draw_mean(&mut rng) {
                None => (None, Some(correct_rates(&rates, &plan.loss)?), vec![0.0; rates.rates().len()]),
                Some(mean) => {
                    let c = simulate_rates(&rates, mean, &mut rng)?;
                    let observed: Vec<f64> = c.counts().iter().map(|v| *v as f64).collect();
                    let corrected = match correct_counts(&c, &plan.loss) {
                        Ok(d) => Some(d),
                        Err(Error::EmptyCounts) => None,
                        Err(e) => return Err(e),
                    };
                    (Some(c), corrected, corrected_stderr(&observed, &plan.loss))
                }
            };
            Ok(ElementResult { label: ensemble.element_labels()[e].clone(), expected, counts, corrected, stderr })
        })
        .collect::<Result<_>>()?;

    let mut chunks = elements.into_iter();
    let mut results = Vec::with_capacity(settings.len());
    for setting in &settings {
        let elements: Vec<ElementResult> = chunks.by_ref().take(k).collect();
        let expected_average = OutcomeDistribution::average(elements.iter().map(|e| &e.expected))?;
        let measured: Vec<&ElementResult> = elements.iter().filter(|e| e.corrected.is_some()).collect();
        let (average, average_stderr) = if measured.is_empty() {
            (None, vec![0.0; input.total() as usize + 1])
        } else {
            let avg = OutcomeDistribution::average(measured.iter().map(|e| e.corrected.as_ref().expect("filtered")))?;
            let m = measured.len() as f64;
            let se = (0..=input.total() as usize)
                .map(|i| measured.iter().map(|e| e.stderr[i].powi(2)).sum::<f64>().sqrt() / m)
                .collect();
            (Some(avg), se)
        };
        results.push(SettingResult { label: setting.label.clone(), elements, expected_average, average, average_stderr });
    }
    Ok(PlanResult { ensemble: ensemble.label().to_string(), input, theta: plan.theta, settings: results })
}
