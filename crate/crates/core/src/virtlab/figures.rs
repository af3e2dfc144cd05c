//! Plot-ready datasets for the verification figures.
//!
//! Every figure is a list of [`CsvRow`]s with the columns
//! `figure,series,setting_label,element_label,outcome,value,stderr`, where
//! `series` is one of:
//!
//! - `ideal`: exact theory with perfect interference and no noise;
//! - `simulated`: the seeded virtual experiment (mode mismatch θ, Poisson
//!   counts, loss correction);
//! - `haar_ref`: the Haar-measure reference, plain (`haar`) and with the
//!   mismatch model applied (`haar_corrected`).
//!
//! Element labels `mean` carry ensemble averages.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::convergence::running_average;
use super::metrics::uniformity_metrics;
use super::plan::{run_plan, stream_rng, CountBudget, ExperimentPlan, PlanResult};
use super::counts::simulate_counts;
use super::loss::{correct_counts, corrected_stderr};
use crate::format::sig;
use crate::moments::haar_average;
use crate::multiphoton::{
    distribution_with_mismatch, fit_gaussian, hom_dip_scan, mismatch_to_visibility, FockInput, MismatchModel,
    Outcome,
};
use crate::poly::distribution_polynomials;
use crate::su2::{hwp, WavePlateAngles};
use crate::tables::Tables;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["figure", "series", "setting_label", "element_label", "outcome", "value", "stderr"];

/// Mode mismatch inferred from the measured HOM visibility `V = -0.941724`.
pub const DEFAULT_THETA: f64 = 0.244;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Hom,
    Uniformity,
}

impl FigureId {
    pub const ALL: [FigureId; 6] =
        [FigureId::Fig2, FigureId::Fig3, FigureId::Fig4, FigureId::Fig5, FigureId::Hom, FigureId::Uniformity];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Hom => "hom",
            FigureId::Uniformity => "uniformity",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownLabel(format!("figure `{s}`")))
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct FigureConfig {
    pub seed: u64,
    pub theta: f64,
    /// Mean events per (setting, element) for the bar figures and per delay
    /// for the HOM scan.
    pub counts_per_element: f64,
    /// Sampled unitaries per convergence trace.
    pub budget: usize,
    pub repeats: usize,
    pub tables: Tables,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            theta: DEFAULT_THETA,
            counts_per_element: 1000.0,
            budget: 500,
            repeats: 64,
            tables: Tables::bundled(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub figure: String,
    pub series: &'static str,
    pub setting_label: String,
    pub element_label: String,
    pub outcome: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureData {
    pub id: FigureId,
    pub rows: Vec<CsvRow>,
}

impl FigureData {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.id)
    }

    pub fn write_csv_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(CSV_HEADER)?;
        for r in &self.rows {
            writer.write_record([
                r.figure.as_str(),
                r.series,
                &r.setting_label,
                &r.element_label,
                &r.outcome,
                &sig(r.value),
                &sig(r.stderr),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Writes `<dir>/<id>.csv` and returns its path.
    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        self.write_csv_to(std::fs::File::create(&path)?)?;
        Ok(path)
    }

    /// Rows matching a series and element label.
    pub fn select<'a>(&'a self, series: &'a str, element: &'a str) -> impl Iterator<Item = &'a CsvRow> + 'a {
        self.rows.iter().filter(move |r| r.series == series && r.element_label == element)
    }
}

struct Rows {
    rows: Vec<CsvRow>,
}

impl Rows {
    fn push(&mut self, figure: &str, series: &'static str, setting: &str, element: &str, outcome: &str, value: f64, stderr: f64) {
        self.rows.push(CsvRow {
            figure: figure.to_string(),
            series,
            setting_label: setting.to_string(),
            element_label: element.to_string(),
            outcome: outcome.to_string(),
            value,
            stderr,
        });
    }

    /// Per-element and mean rows of one plan result, restricted to `outcomes`.
    fn push_plan(&mut self, figure: &str, series: &'static str, result: &PlanResult, outcomes: &[Outcome], analytic: bool) {
        let n = result.input.total();
        for s in &result.settings {
            for o in outcomes {
                let i = o.second as usize;
                for e in &s.elements {
                    let (v, se) = if analytic {
                        (e.expected.probs()[i], 0.0)
                    } else {
                        match &e.corrected {
                            Some(d) => (d.probs()[i], e.stderr[i]),
                            None => continue,
                        }
                    };
                    self.push(figure, series, &s.label, &e.label, &o.to_string(), v, se);
                }
                let (v, se) = if analytic {
                    (s.expected_average.probs()[i], 0.0)
                } else {
                    match &s.average {
                        Some(d) => (d.probs()[i], s.average_stderr[i]),
                        None => continue,
                    }
                };
                debug_assert_eq!(o.total(), n);
                self.push(figure, series, &s.label, "mean", &o.to_string(), v, se);
            }
        }
    }
}

fn all_outcomes(n: u32) -> Vec<Outcome> {
    (0..=n).map(|i| Outcome::new(n - i, i)).collect()
}

/// Haar averages of every outcome probability for `input` under mismatch `m`.
/// They do not depend on the probe setting.
pub fn haar_reference(input: FockInput, m: &MismatchModel) -> Result<Vec<f64>> {
    Ok(distribution_polynomials(&WavePlateAngles::trivial(), input, m)?.iter().map(haar_average).collect())
}

fn plans(cfg: &FigureConfig, ensemble: &str, family: &str) -> (ExperimentPlan, ExperimentPlan) {
    let mut ideal = ExperimentPlan::new(ensemble, &[family]);
    ideal.seed = cfg.seed;
    let mut sim = ideal.clone();
    sim.theta = cfg.theta;
    sim.counts = CountBudget::Poisson { mean: cfg.counts_per_element };
    (ideal, sim)
}

fn bar_figure(cfg: &FigureConfig, panels: &[(&str, &str)], family: &str, input: FockInput, outcomes: &[Outcome]) -> Result<Rows> {
    let mut rows = Rows { rows: Vec::new() };
    let haar = haar_reference(input, &MismatchModel::perfect())?;
    let corrected = haar_reference(input, &MismatchModel::new(cfg.theta)?)?;
    for (panel, ensemble) in panels {
        let (ideal, sim) = plans(cfg, ensemble, family);
        rows.push_plan(panel, "ideal", &run_plan(&ideal, &cfg.tables)?, outcomes, true);
        rows.push_plan(panel, "simulated", &run_plan(&sim, &cfg.tables)?, outcomes, false);
        for o in outcomes {
            let i = o.second as usize;
            rows.push(panel, "haar_ref", "all", "haar", &o.to_string(), haar[i], 0.0);
            rows.push(panel, "haar_ref", "all", "haar_corrected", &o.to_string(), corrected[i], 0.0);
        }
    }
    Ok(rows)
}

fn fig5(cfg: &FigureConfig) -> Result<Rows> {
    let figure = "fig5";
    let mut rows = Rows { rows: Vec::new() };
    let mut plan = ExperimentPlan::new("d1", &["q19"]);
    plan.seed = cfg.seed;
    plan.theta = cfg.theta;
    plan.counts = CountBudget::Uniform { min: 0, max: 33 };
    let traces = running_average(&plan, &cfg.tables, cfg.budget, cfg.repeats)?;

    let ideal = running_average(&ExperimentPlan { theta: 0.0, counts: CountBudget::Exact, ..plan.clone() }, &cfg.tables, 1, 1)?;
    rows.push(figure, "ideal", "q19", "mean", "11", ideal[0].expected, 0.0);
    rows.push(figure, "ideal", "q19", "mismatch", "11", traces.first().map_or(f64::NAN, |t| t.expected), 0.0);
    let input = FockInput::standard(2)?;
    rows.push(figure, "haar_ref", "q19", "haar", "11", haar_reference(input, &MismatchModel::perfect())?[1], 0.0);
    rows.push(figure, "haar_ref", "q19", "haar_corrected", "11", haar_reference(input, &MismatchModel::new(cfg.theta)?)?[1], 0.0);

    for t in &traces {
        for (i, (m, e)) in t.running_mean.iter().zip(&t.envelope).enumerate() {
            rows.push(figure, "simulated", "q19", &format!("r{}/n{}", t.repeat, i + 1), "11", *m, *e);
        }
    }
    if !traces.is_empty() {
        let k = traces.len() as f64;
        let mean = traces.iter().map(|t| t.final_mean()).sum::<f64>() / k;
        let env = traces.iter().map(|t| t.final_envelope()).sum::<f64>() / k;
        rows.push(figure, "simulated", "q19", "final_mean", "11", mean, env);
    }
    Ok(rows)
}

fn hom(cfg: &FigureConfig) -> Result<Rows> {
    let figure = "hom";
    let setting = "hwp22.5";
    let mut rows = Rows { rows: Vec::new() };
    let t = hwp(22.5)?;
    let m = MismatchModel::new(cfg.theta)?;
    let delays: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
    let ideal = hom_dip_scan(&t, &MismatchModel::perfect(), 1.0, &delays)?;
    let model = hom_dip_scan(&t, &m, 1.0, &delays)?;

    let separated = crate::multiphoton::distinguishable_distribution(&t, FockInput::standard(2)?);
    let full = distribution_with_mismatch(&t, FockInput::standard(2)?, &m);
    let mut rng = stream_rng(cfg.seed, 0);
    let mut measured = Vec::with_capacity(delays.len());
    for (i, d) in delays.iter().enumerate() {
        rows.push(figure, "ideal", setting, &sig(*d), "20", ideal.bunching[i], 0.0);
        // overlap of the two wavepackets at this delay
        let g = (-d * d / 2.0).exp();
        let dist = full.mix(&separated, g)?;
        let c = simulate_counts(&dist, cfg.counts_per_element, &mut rng)?;
        let (p, se) = match correct_counts(&c, &Default::default()) {
            Ok(est) => {
                let obs: Vec<f64> = c.counts().iter().map(|v| *v as f64).collect();
                (est.probs()[0], corrected_stderr(&obs, &Default::default())[0])
            }
            Err(Error::EmptyCounts) => continue,
            Err(e) => return Err(e),
        };
        debug_assert!((dist.probs()[0] - model.bunching[i]).abs() < 1e-12);
        measured.push((*d, p));
        rows.push(figure, "simulated", setting, &sig(*d), "20", p, se);
    }
    rows.push(figure, "ideal", setting, "visibility", "V", ideal.visibility(), 0.0);
    rows.push(figure, "ideal", setting, "visibility_mismatch", "V", mismatch_to_visibility(cfg.theta), 0.0);
    let (x, y): (Vec<f64>, Vec<f64>) = measured.into_iter().unzip();
    let fit = fit_gaussian(&x, &y)?;
    rows.push(figure, "simulated", setting, "fit_visibility", "V", fit.visibility(), 0.0);
    rows.push(figure, "simulated", setting, "fit_sigma", "sigma", fit.sigma, 0.0);
    Ok(rows)
}

fn uniformity(cfg: &FigureConfig) -> Result<Rows> {
    let figure = "uniformity";
    let mut rows = Rows { rows: Vec::new() };
    for (family, n) in [("p", 1u32), ("q", 2)] {
        let input = FockInput::standard(n)?;
        let outcome = if n == 1 { Outcome::new(1, 0) } else { Outcome::new(1, 1) };
        let i = outcome.second as usize;
        let haar = haar_reference(input, &MismatchModel::perfect())?[i];
        let corrected = haar_reference(input, &MismatchModel::new(cfg.theta)?)?[i];
        rows.push(figure, "haar_ref", family, "haar", &outcome.to_string(), haar, 0.0);
        rows.push(figure, "haar_ref", family, "haar_corrected", &outcome.to_string(), corrected, 0.0);
        for ensemble in ["d1", "d2", "haar:12"] {
            let (ideal, sim) = plans(cfg, ensemble, family);
            let averages = |r: &PlanResult, analytic: bool| -> Vec<f64> {
                r.settings
                    .iter()
                    .filter_map(|s| if analytic { Some(&s.expected_average) } else { s.average.as_ref() })
                    .map(|d| d.probs()[i])
                    .collect()
            };
            for (series, plan, analytic, reference) in
                [("ideal", &ideal, true, haar), ("simulated", &sim, false, corrected)]
            {
                let m = uniformity_metrics(&averages(&run_plan(plan, &cfg.tables)?, analytic), reference)?;
                rows.push(figure, series, family, ensemble, "variance", m.variance, 0.0);
                rows.push(figure, series, family, ensemble, "max_percent_deviation", m.max_percent_deviation, 0.0);
            }
        }
    }
    Ok(rows)
}

/// Builds one figure's dataset. Deterministic for a fixed configuration.
pub fn reproduce_figure(id: FigureId, cfg: &FigureConfig) -> Result<FigureData> {
    MismatchModel::new(cfg.theta)?;
    if !(cfg.counts_per_element.is_finite() && cfg.counts_per_element >= 0.0) {
        return Err(Error::InvalidParameter(format!("counts per element {}", cfg.counts_per_element)));
    }
    let rows = match id {
        FigureId::Fig2 => bar_figure(cfg, &[("fig2a", "d1"), ("fig2b", "d2")], "p", FockInput::standard(1)?, &[Outcome::new(1, 0)])?,
        FigureId::Fig3 => bar_figure(
            cfg,
            &[("fig3a", "d1"), ("fig3b", "d2"), ("fig3c", "haar:12")],
            "q",
            FockInput::standard(2)?,
            &[Outcome::new(1, 1)],
        )?,
        FigureId::Fig4 => bar_figure(cfg, &[("fig4", "d2")], "r", FockInput::standard(3)?, &all_outcomes(3))?,
        FigureId::Fig5 => fig5(cfg)?,
        FigureId::Hom => hom(cfg)?,
        FigureId::Uniformity => uniformity(cfg)?,
    };
    Ok(FigureData { id, rows: rows.rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FigureConfig {
        FigureConfig { budget: 40, repeats: 3, ..FigureConfig::default() }
    }

    #[test]
    fn figure_ids() {
        for id in FigureId::ALL {
            assert_eq!(FigureId::parse(id.name()).unwrap(), id);
        }
        assert!(FigureId::parse("fig9").is_err());
    }

    #[test]
    fn fig2_ideal_series_is_one_half() {
        let data = reproduce_figure(FigureId::Fig2, &small()).unwrap();
        let means: Vec<_> = data.select("ideal", "mean").collect();
        assert_eq!(means.len(), 18);
        assert!(means.iter().all(|r| (r.value - 0.5).abs() < 1e-12));
    }

    #[test]
    fn fig3_d1_is_not_uniform() {
        let data = reproduce_figure(FigureId::Fig3, &small()).unwrap();
        let d1: Vec<f64> = data.select("ideal", "mean").filter(|r| r.figure == "fig3a").map(|r| r.value).collect();
        assert_eq!(d1.len(), 25);
        let spread = d1.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - d1.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread > 0.1);
        let d2: Vec<f64> = data.select("ideal", "mean").filter(|r| r.figure == "fig3b").map(|r| r.value).collect();
        assert!(d2.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = small();
        let a = reproduce_figure(FigureId::Hom, &cfg).unwrap();
        let b = reproduce_figure(FigureId::Hom, &cfg).unwrap();
        let (mut wa, mut wb) = (Vec::new(), Vec::new());
        a.write_csv_to(&mut wa).unwrap();
        b.write_csv_to(&mut wb).unwrap();
        assert_eq!(wa, wb);
        assert!(String::from_utf8(wa).unwrap().starts_with("figure,series,setting_label,element_label,outcome,value,stderr\n"));
    }

    #[test]
    fn haar_references() {
        let two = haar_reference(FockInput::standard(2).unwrap(), &MismatchModel::perfect()).unwrap();
        assert!((two[1] - 1.0 / 3.0).abs() < 1e-12);
        let three = haar_reference(FockInput::standard(3).unwrap(), &MismatchModel::perfect()).unwrap();
        assert!(three.iter().all(|p| (p - 0.25).abs() < 1e-12));
        let m = MismatchModel::new(0.244).unwrap();
        let c = haar_reference(FockInput::standard(2).unwrap(), &m).unwrap()[1];
        let expected = m.overlap() / 3.0 + (1.0 - m.overlap()) * 2.0 / 3.0;
        assert!((c - expected).abs() < 1e-12);
    }
}
