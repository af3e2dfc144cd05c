//! Command-line front end.
//!
//! Exit codes: `0` success or a passing design test, `2` a failing design
//! test, `1` any error (bad arguments, unknown labels, invalid input).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::basis::{basis_matrix, reduce_mod_constraint, RowLayout};
use crate::format::sig;
use crate::moments::{design_test, DesignTestReport};
use crate::multiphoton::{visibility_to_mismatch, FockInput, Outcome};
use crate::poly::{expand_probe_polynomial, transition_polynomial, PolynomialR4, ProbeKind};
use crate::tables::{ProbeFamily, Tables};
use crate::virtlab::figures::{FigureConfig, FigureId, DEFAULT_THETA};
use crate::virtlab::{calibrate_loss, reproduce_figure, resolve_ensemble, run_plan, CountRecord, ExperimentPlan};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "photodesign", version, about = "Build, verify and stress-test unitary designs for two-mode optics")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output directory for datasets.
    #[arg(long, global = true, env = "PHOTODESIGN_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Tolerance for design tests.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Mode mismatch θ in radians for simulated series.
    #[arg(long, global = true, default_value_t = DEFAULT_THETA)]
    pub theta: f64,
    /// Mean detection events per (setting, element) in simulated series.
    #[arg(long, global = true, default_value_t = 1000.0)]
    pub counts_per_element: f64,
    /// Directory with replacement settings tables.
    #[arg(long, global = true)]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether an ensemble (d1, d2, haar:K) is a t-design.
    Verify {
        ensemble: String,
        #[arg(long, default_value_t = 2)]
        t: u32,
        /// Print the full per-monomial report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Expand the probe polynomial of a setting (p*, q*, r*) as JSON.
    Expand {
        label: String,
        /// Outcome for three-photon settings, e.g. 21.
        #[arg(long)]
        outcome: Option<String>,
    },
    /// Rank of the coefficient matrix of the p or q settings.
    Rank {
        family: String,
        /// Leave out a setting (repeatable).
        #[arg(long)]
        drop: Vec<String>,
        #[arg(long, default_value = "reduced")]
        layout: String,
    },
    /// Write a figure dataset (fig2, fig3, fig4, fig5, hom, uniformity, all) as CSV.
    Reproduce {
        figure: String,
        /// Sampled unitaries per convergence trace.
        #[arg(long, default_value_t = 500)]
        budget: usize,
        /// Convergence traces.
        #[arg(long, default_value_t = 64)]
        repeats: usize,
    },
    /// Mode mismatch from a HOM visibility, or relative loss from bunching counts.
    Calibrate {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "counts", required_unless_present = "counts")]
        visibility: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["C20", "C02"])]
        counts: Option<Vec<u64>>,
    },
    /// Execute an experiment plan file.
    Run { plan: PathBuf },
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_ERROR,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn tables(config: &CliConfig) -> Result<Tables> {
    match &config.tables {
        Some(dir) => Tables::from_dir(dir),
        None => Ok(Tables::bundled()),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Verify { ensemble, t, json } => verify(cfg, ensemble, *t, *json, out),
        Command::Expand { label, outcome } => expand(cfg, label, outcome.as_deref(), out),
        Command::Rank { family, drop, layout } => rank(cfg, family, drop, layout, out),
        Command::Reproduce { figure, budget, repeats } => reproduce(cfg, figure, *budget, *repeats, out),
        Command::Calibrate { visibility, counts } => calibrate(*visibility, counts.as_deref(), out),
        Command::Run { plan } => run_plan_file(cfg, plan, out),
    }
}

fn verify(cfg: &CliConfig, label: &str, t: u32, as_json: bool, out: &mut dyn Write) -> Result<i32> {
    let ensemble = resolve_ensemble(label, cfg.seed)?;
    let report = design_test(&ensemble, t, cfg.tol)?;
    if as_json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        print_report(&report, out)?;
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

fn print_report(r: &DesignTestReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "ensemble: {} ({} elements)", r.ensemble, r.elements)?;
    writeln!(out, "t: {} ({} monomials of degree {})", r.t, r.rows.len(), 2 * r.t)?;
    writeln!(out, "arithmetic: {}", if r.exact { "exact rational" } else { "floating point" })?;
    writeln!(out, "tolerance: {}", sig(r.tolerance))?;
    writeln!(out, "max deviation: {}", sig(r.max_deviation))?;
    if let Some(w) = &r.witness {
        match &w.exact {
            Some(x) => writeln!(
                out,
                "witness: {} ensemble {} haar {} deviation {}",
                w.monomial, x.ensemble_average, x.haar_average, x.deviation
            )?,
            None => writeln!(
                out,
                "witness: {} ensemble {} haar {} deviation {}",
                w.monomial,
                sig(w.ensemble_average),
                sig(w.haar_average),
                sig(w.deviation)
            )?,
        }
    }
    writeln!(out, "verdict: {}", if r.pass { "PASS" } else { "FAIL" })?;
    Ok(())
}

fn expand(cfg: &CliConfig, label: &str, outcome: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let tables = tables(cfg)?;
    let setting = tables.probe(label)?;
    let (input, outcome) = match setting.family {
        ProbeFamily::P => (ProbeKind::OnePhoton.input(), ProbeKind::OnePhoton.outcome()),
        ProbeFamily::Q => (ProbeKind::TwoPhoton.input(), ProbeKind::TwoPhoton.outcome()),
        ProbeFamily::R => (FockInput::standard(3)?, Outcome::parse(outcome.unwrap_or("21"))?),
    };
    let poly = match setting.family {
        ProbeFamily::P => expand_probe_polynomial(&setting.angles, ProbeKind::OnePhoton)?,
        ProbeFamily::Q => expand_probe_polynomial(&setting.angles, ProbeKind::TwoPhoton)?,
        ProbeFamily::R => transition_polynomial(&setting.angles, input, outcome)?,
    };
    let degree = 2 * input.total();
    let reduced = if degree <= 4 {
        let r = reduce_mod_constraint(&poly, degree)?;
        let round = |v: &[f64]| -> Vec<f64> { v.iter().map(|c| sig(*c).parse().expect("formatted float")).collect() };
        json!({
            "polynomial": printed(&r.to_polynomial()),
            "text": r.to_polynomial().to_string(),
            "basis_coeffs": round(&r.basis_coeffs),
            "lower_coeffs": round(&r.lower_coeffs),
            "constant": round(&[r.constant])[0],
        })
    } else {
        serde_json::Value::Null
    };
    let doc = json!({
        "label": setting.label,
        "omega": setting.angles.omega(),
        "input": [input.n_h(), input.n_v()],
        "outcome": outcome.to_string(),
        "degree": degree,
        "polynomial": printed(&poly),
        "text": poly.to_string(),
        "reduced": reduced,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(EXIT_OK)
}

/// Coefficients rounded to the printed precision, so JSON output is stable.
fn printed(p: &PolynomialR4) -> PolynomialR4 {
    PolynomialR4::from_terms(p.terms().map(|(e, c)| (*e, sig(*c).parse::<f64>().expect("formatted float"))))
}

fn rank(cfg: &CliConfig, family: &str, drop: &[String], layout: &str, out: &mut dyn Write) -> Result<i32> {
    let tables = tables(cfg)?;
    let (family, kind) = match ProbeFamily::parse(family) {
        Some(ProbeFamily::P) => (ProbeFamily::P, ProbeKind::OnePhoton),
        Some(ProbeFamily::Q) => (ProbeFamily::Q, ProbeKind::TwoPhoton),
        _ => return Err(Error::InvalidParameter(format!("rank needs family p or q, got `{family}`"))),
    };
    let layout = RowLayout::parse(layout)
        .ok_or_else(|| Error::InvalidParameter(format!("layout `{layout}` (expected reduced or truncated)")))?;
    let all = tables.family(family);
    for d in drop {
        if !all.iter().any(|s| &s.label == d) {
            return Err(Error::UnknownLabel(format!("`{d}`")));
        }
    }
    let kept: Vec<_> = all.iter().filter(|s| !drop.contains(&s.label)).collect();
    let angles: Vec<_> = kept.iter().map(|s| s.angles).collect();
    let m = basis_matrix(&angles, kind, layout)?;
    writeln!(out, "family: {}", family.letter())?;
    writeln!(out, "layout: {}", if layout == RowLayout::Reduced { "reduced" } else { "truncated" })?;
    writeln!(out, "matrix: {} x {}", m.rows, m.cols)?;
    writeln!(out, "rank: {}", m.rank)?;
    if let (Some(max), Some(min)) = (m.singular_values.first(), m.singular_values.last()) {
        writeln!(out, "largest singular value: {}", sig(*max))?;
        writeln!(out, "smallest singular value: {}", sig(*min))?;
    }
    Ok(EXIT_OK)
}

fn reproduce(cfg: &CliConfig, figure: &str, budget: usize, repeats: usize, out: &mut dyn Write) -> Result<i32> {
    let ids = if figure == "all" { FigureId::ALL.to_vec() } else { vec![FigureId::parse(figure)?] };
    let fc = FigureConfig {
        seed: cfg.seed,
        theta: cfg.theta,
        counts_per_element: cfg.counts_per_element,
        budget,
        repeats,
        tables: tables(cfg)?,
    };
    for id in ids {
        let data = reproduce_figure(id, &fc)?;
        let path = data.write_csv(&cfg.out)?;
        writeln!(out, "{id}: {} rows -> {}", data.rows.len(), path.display())?;
    }
    Ok(EXIT_OK)
}

fn calibrate(visibility: Option<f64>, counts: Option<&[u64]>, out: &mut dyn Write) -> Result<i32> {
    if let Some(v) = visibility {
        let theta = visibility_to_mismatch(v)?;
        writeln!(out, "visibility: {}", sig(v))?;
        writeln!(out, "theta: {}", sig(theta))?;
        writeln!(out, "overlap cos^2(theta): {}", sig(theta.cos().powi(2)))?;
    } else if let Some(&[c20, c02]) = counts {
        let cal = calibrate_loss(&CountRecord::two_photon(c20, 0, c02))?;
        writeln!(out, "C(2,0): {c20}")?;
        writeln!(out, "C(0,2): {c02}")?;
        writeln!(out, "epsilon3: {}", sig(cal.epsilon3))?;
        writeln!(out, "stderr: {}", sig(cal.stderr))?;
    } else {
        return Err(Error::InvalidParameter("calibrate needs --visibility or --counts".into()));
    }
    Ok(EXIT_OK)
}

fn run_plan_file(cfg: &CliConfig, path: &std::path::Path, out: &mut dyn Write) -> Result<i32> {
    let plan = ExperimentPlan::load(path)?;
    let result = run_plan(&plan, &tables(cfg)?)?;
    let n = result.input.total();
    writeln!(out, "ensemble: {}", result.ensemble)?;
    writeln!(out, "input: ({},{})", result.input.n_h(), result.input.n_v())?;
    writeln!(out, "theta: {}", sig(result.theta))?;
    let outcomes: Vec<Outcome> = (0..=n).map(|i| Outcome::new(n - i, i)).collect();
    let header: Vec<String> = outcomes.iter().map(|o| format!("P{o}")).collect();
    writeln!(out, "setting,{},{}", header.join(","), header.iter().map(|h| format!("{h}_expected")).collect::<Vec<_>>().join(","))?;
    for s in &result.settings {
        let measured: Vec<String> = match &s.average {
            Some(d) => d.probs().iter().map(|p| sig(*p)).collect(),
            None => vec!["NaN".into(); outcomes.len()],
        };
        let expected: Vec<String> = s.expected_average.probs().iter().map(|p| sig(*p)).collect();
        writeln!(out, "{},{},{}", s.label, measured.join(","), expected.join(","))?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("photodesign").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn verify_exit_codes() {
        assert_eq!(call(&["verify", "d2", "--t", "2"]).0, EXIT_OK);
        let (code, out, _) = call(&["verify", "d2", "--t", "3"]);
        assert_eq!(code, EXIT_FAIL);
        assert!(out.contains("witness: x1^6 ensemble 3/32 haar 5/64 deviation 1/64"), "{out}");
        assert_eq!(call(&["verify", "d1", "--t", "1"]).0, EXIT_OK);
        assert_eq!(call(&["verify", "d1", "--t", "4"]).0, EXIT_ERROR);
        assert_eq!(call(&["verify", "d9"]).0, EXIT_ERROR);
    }

    #[test]
    fn calibrate_outputs() {
        let (code, out, _) = call(&["calibrate", "--visibility", "-0.941724"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("theta: 0.2438"), "{out}");
        let (code, out, _) = call(&["calibrate", "--counts", "90", "160"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("epsilon3: 0.75\n"), "{out}");
        assert_eq!(call(&["calibrate", "--visibility", "-1.5"]).0, EXIT_ERROR);
        assert_eq!(call(&["calibrate"]).0, EXIT_ERROR);
    }

    #[test]
    fn usage_errors_are_errors() {
        assert_eq!(call(&[]).0, EXIT_ERROR);
        assert_eq!(call(&["frobnicate"]).0, EXIT_ERROR);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }
}
