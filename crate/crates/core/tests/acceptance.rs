//! Acceptance suite: one line per criterion.
//!
//! Runs without the libtest harness so that every criterion is always
//! reported, including the ones that fail.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{all_patterns, brute_force_fock, monte_carlo_moments, random_unitary};
use num_complex::Complex64;
use photodesign::basis::{basis_matrix, RowLayout};
use photodesign::cli;
use photodesign::moments::{design_test, ensemble_average, haar_average, haar_moment};
use photodesign::multiphoton::{
    distribution_with_mismatch, outcome_distribution, transition_probability, visibility_to_mismatch, FockInput,
    MismatchModel, Outcome,
};
use photodesign::poly::{expand_probe_polynomial, PolynomialR4, ProbeKind};
use photodesign::su2::{
    compose_interferometer, ensemble_d1, ensemble_d2, equal_up_to_phase, haar_ensemble, haar_sample,
    process_from_plates, su2_from_params, UnitaryMat2, WavePlateAngles,
};
use photodesign::tables::{design_label_unitary, ProbeFamily, Tables};
use photodesign::virtlab::figures::haar_reference;
use photodesign::virtlab::plan::stream_rng;
use photodesign::virtlab::{
    apply_loss, calibrate_loss, correct_counts, run_plan, running_average, simulate_counts, simulate_rates,
    statistical_fidelity, uniformity_metrics, CountBudget, ExperimentPlan, LossModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome_ = Result<String, String>;

/// Criteria that cannot pass as written; each is explained in the project
/// notes. They are still run and reported.
const KNOWN_UNATTAINABLE: &[u32] = &[5];

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn cli_exit(args: &[&str]) -> i32 {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    cli::run(std::iter::once("photodesign").chain(args.iter().copied()), &mut out, &mut err)
}

fn hom_polynomial() -> PolynomialR4 {
    // |U11 U22 + U12 U21|² = (x1² + y1² - x2² - y2²)²
    let s = PolynomialR4::from_terms([([2, 0, 0, 0], 1.0), ([0, 2, 0, 0], 1.0), ([0, 0, 2, 0], -1.0), ([0, 0, 0, 2], -1.0)]);
    &s * &s
}

fn c1_design_exactness() -> Outcome_ {
    let start = Instant::now();
    for (e, t) in [("d1", 1), ("d2", 1), ("d2", 2)] {
        let ensemble = if e == "d1" { ensemble_d1() } else { ensemble_d2() };
        let r = design_test(&ensemble, t, 0.0).map_err(|x| x.to_string())?;
        ensure!(r.exact, "{e} t={t} did not run in exact arithmetic");
        ensure!(r.pass && r.max_deviation == 0.0, "{e} t={t}: max deviation {}", r.max_deviation);
        ensure!(r.rows.iter().all(|row| row.exact.as_ref().is_some_and(|x| x.deviation == "0")), "{e} t={t}: nonzero exact deviation");
        let code = cli_exit(&["verify", e, "--t", &t.to_string()]);
        ensure!(code == cli::EXIT_OK, "`verify {e} --t {t}` exited {code}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("d1/t1, d2/t1, d2/t2 exact, zero deviation over 10/10/35 monomials in {elapsed:.2?}"))
}

fn c2_failure_witnesses() -> Outcome_ {
    let r = design_test(&ensemble_d1(), 2, 1e-12).map_err(|e| e.to_string())?;
    let w = r.witness.ok_or("d1 t=2 passed")?;
    let x = w.exact.ok_or("d1 t=2 not exact")?;
    ensure!(w.exponents == [4, 0, 0, 0], "d1 witness {}", w.monomial);
    ensure!((x.ensemble_average.as_str(), x.haar_average.as_str(), x.deviation.as_str()) == ("1/4", "1/8", "1/8"), "d1 witness values {x:?}");

    let r = design_test(&ensemble_d2(), 3, 1e-12).map_err(|e| e.to_string())?;
    let w = r.witness.ok_or("d2 t=3 passed")?;
    let x = w.exact.ok_or("d2 t=3 not exact")?;
    ensure!(w.exponents == [6, 0, 0, 0], "d2 witness {}", w.monomial);
    ensure!((x.ensemble_average.as_str(), x.haar_average.as_str(), x.deviation.as_str()) == ("3/32", "5/64", "1/64"), "d2 witness values {x:?}");
    ensure!(cli_exit(&["verify", "d2", "--t", "3"]) == cli::EXIT_FAIL, "`verify d2 --t 3` did not exit 2");

    let anti = ensemble_average(&hom_polynomial(), &ensemble_d1());
    ensure!(anti == 1.0, "anti-bunching average over d1 = {anti}");
    Ok("d1 t=2: x1^4 1/4 vs 1/8 (dev 1/8); d2 t=3: x1^6 3/32 vs 5/64 (dev 1/64); d1 anti-bunching = 1".into())
}

fn c3_ranks() -> Outcome_ {
    let start = Instant::now();
    let tables = Tables::bundled();
    let p: Vec<_> = tables.p.iter().map(|s| s.angles).collect();
    let q: Vec<_> = tables.q.iter().map(|s| s.angles).collect();
    let mp = basis_matrix(&p, ProbeKind::OnePhoton, RowLayout::Reduced).map_err(|e| e.to_string())?;
    let mq = basis_matrix(&q, ProbeKind::TwoPhoton, RowLayout::Reduced).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(mp.rank == 9, "p rank {}", mp.rank);
    ensure!(mq.rank == 25, "q rank {}", mq.rank);
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "p rank 9 (σ_min {:.3}), q rank 25 (σ_min {:.3}) in {elapsed:.2?}",
        mp.singular_values.last().unwrap(),
        mq.singular_values.last().unwrap()
    ))
}

fn c4_table_realisation() -> Outcome_ {
    let tables = Tables::bundled();
    let d2 = ensemble_d2();
    ensure!(tables.design.len() == 12, "{} design rows", tables.design.len());
    for row in &tables.design {
        let u = process_from_plates(&row.angles);
        let labelled = design_label_unitary(&row.label).map_err(|e| e.to_string())?;
        ensure!(equal_up_to_phase(&u, &labelled, 1e-9), "{}: plates do not realise the label", row.label);
        ensure!(d2.elements().iter().any(|e| equal_up_to_phase(&u, e, 1e-9)), "{}: not an element of d2", row.label);
    }
    Ok("all 12 plate products equal their design elements up to phase (tol 1e-9)".into())
}

fn c5_probe_identities() -> Outcome_ {
    let tables = Tables::bundled();
    let p1 = expand_probe_polynomial(&tables.probe("p1").unwrap().angles, ProbeKind::OnePhoton).map_err(|e| e.to_string())?;
    let p1_printed = PolynomialR4::from_terms([([2, 0, 0, 0], 1.0), ([0, 2, 0, 0], 1.0)]);
    ensure!(p1.max_coeff_diff(&p1_printed) < 1e-10, "p1 = {p1}");

    let q1 = expand_probe_polynomial(&tables.probe("q1").unwrap().angles, ProbeKind::TwoPhoton).map_err(|e| e.to_string())?;
    let q1_printed = PolynomialR4::from_terms([
        ([4, 0, 0, 0], 1.0),
        ([2, 0, 2, 0], -2.0),
        ([2, 2, 0, 0], 2.0),
        ([0, 0, 4, 0], 1.0),
        ([0, 2, 2, 0], -2.0),
        ([0, 4, 0, 0], 1.0),
    ]);
    let printed_terms_match = q1_printed.terms().all(|(e, c)| (q1.coeff(e) - c).abs() < 1e-10);
    let restricted = q1.filter(|e| e[3] == 0);
    let extra: Vec<String> =
        q1.terms().filter(|(e, c)| (q1_printed.coeff(e) - **c).abs() >= 1e-10).map(|(e, c)| format!("{c:+.0}*{}", photodesign::poly::monomial_name(e))).collect();
    ensure!(
        q1.max_coeff_diff(&q1_printed) < 1e-10,
        "p1 ok; q1 expansion has {} terms absent from the printed form ({}); printed terms match: {printed_terms_match}; printed = expansion at y2=0: {}",
        extra.len(),
        extra.join(" "),
        restricted.max_coeff_diff(&q1_printed) < 1e-10
    );
    Ok("p1 = x1^2 + y1^2; q1 matches the printed expression".into())
}

fn c6_haar_oracle() -> Outcome_ {
    let start = Instant::now();
    let patterns: Vec<[u32; 4]> = all_patterns(2).into_iter().chain(all_patterns(4)).collect();
    let mc = monte_carlo_moments(&patterns, 10_000_000, 6);
    let mut worst = (0.0f64, [0u32; 4]);
    for (e, (mean, se)) in patterns.iter().zip(&mc) {
        let exact = haar_moment(e);
        let z = if *se > 0.0 { (mean - exact).abs() / se } else { (mean - exact).abs() / 1e-12 };
        if z > worst.0 {
            worst = (z, *e);
        }
    }
    ensure!(worst.0 <= 3.0, "{:?} off by {:.2}σ", worst.1, worst.0);
    let p1 = PolynomialR4::from_terms([([2, 0, 0, 0], 1.0), ([0, 2, 0, 0], 1.0)]);
    ensure!((haar_average(&p1) - 0.5).abs() < 1e-15, "E_Haar[p1] = {}", haar_average(&p1));
    let hom = haar_average(&hom_polynomial());
    ensure!((hom - 1.0 / 3.0).abs() < 1e-15, "E_Haar[hom] = {hom}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "{} patterns within 3σ of 1e7 Marsaglia samples (worst {:.2}σ at {:?}); E[p1]=1/2, E[hom]=1/3; {elapsed:.2?}",
        patterns.len(),
        worst.0,
        worst.1
    ))
}

fn c7_fig5() -> Outcome_ {
    let start = Instant::now();
    let theta = visibility_to_mismatch(-0.941724).map_err(|e| e.to_string())?;
    ensure!((theta - 0.244).abs() < 5e-4, "θ from V = {theta}");
    let tables = Tables::bundled();
    let mut plan = ExperimentPlan::new("d1", &["q19"]);
    plan.theta = 0.244;
    plan.seed = 2019;
    plan.counts = CountBudget::Uniform { min: 0, max: 33 };
    let traces = running_average(&plan, &tables, 500, 64).map_err(|e| e.to_string())?;

    let ideal = running_average(&ExperimentPlan { theta: 0.0, counts: CountBudget::Exact, ..plan.clone() }, &tables, 1, 1)
        .map_err(|e| e.to_string())?[0]
        .expected;
    ensure!((ideal - 0.578).abs() < 5e-4, "ideal θ=0 value {ideal}");

    let k = traces.len() as f64;
    let mean_final = traces.iter().map(|t| t.final_mean()).sum::<f64>() / k;
    let envelope = traces.iter().map(|t| t.final_envelope()).sum::<f64>() / k;
    let model = traces[0].expected;
    let within = (mean_final - 0.594).abs() <= envelope;

    let haar_ref = haar_reference(FockInput::standard(2).unwrap(), &MismatchModel::new(0.244).unwrap()).unwrap()[1];
    let separated_by_100 = traces
        .iter()
        .filter(|t| {
            // index from which every later running mean stays > 3 envelopes from the Haar value
            let last_close = t.running_mean.iter().zip(&t.envelope).rposition(|(m, e)| (m - haar_ref).abs() <= 3.0 * e);
            last_close.map_or(0, |i| i + 1) < 100
        })
        .count();
    let frac = separated_by_100 as f64 / k;
    let elapsed = start.elapsed();
    ensure!(within, "mean final {mean_final:.4} vs 0.594 ± {envelope:.4} (model value {model:.4})");
    ensure!(frac >= 0.95, "only {:.0}% of repeats separate from Haar {haar_ref:.4} by n=100", frac * 100.0);
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "θ={theta:.4}; 64 traces end at {mean_final:.4} (0.594 ± {envelope:.4}; model {model:.4}); θ=0 value {ideal:.6}; {:.0}% separate from Haar {haar_ref:.4} by n=100; {elapsed:.2?}",
        frac * 100.0
    ))
}

fn c8_cross_module() -> Outcome_ {
    let tables = Tables::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let points: Vec<_> = (0..50).map(|_| haar_sample(&mut rng)).collect();
    let mut worst_poly = 0.0f64;
    let mut settings = 0;
    for s in tables.pq_settings() {
        let kind = if s.family == ProbeFamily::P { ProbeKind::OnePhoton } else { ProbeKind::TwoPhoton };
        let f = expand_probe_polynomial(&s.angles, kind).map_err(|e| e.to_string())?;
        for p in &points {
            let t = compose_interferometer(&s.angles, &su2_from_params(p));
            let direct = transition_probability(&t, kind.input(), kind.outcome()).map_err(|e| e.to_string())?;
            worst_poly = worst_poly.max((f.evaluate(p) - direct).abs());
        }
        settings += 1;
    }
    ensure!(settings == 34, "{settings} settings");
    ensure!(worst_poly < 1e-9, "polynomial vs scattering differ by {worst_poly:e}");

    let mut worst_perm = 0.0f64;
    for _ in 0..100 {
        let m = random_unitary(&mut rng);
        let t = UnitaryMat2::new(m).map_err(|e| e.to_string())?;
        for n in 1..=3u32 {
            for n_v in 0..=n {
                let lib = outcome_distribution(&t, FockInput::new(n - n_v, n_v).unwrap());
                let oracle = brute_force_fock(m, (n - n_v) as usize, n_v as usize);
                for (a, b) in lib.probs().iter().zip(&oracle) {
                    worst_perm = worst_perm.max((a - b).abs());
                }
            }
        }
    }
    ensure!(worst_perm < 1e-10, "permanent vs labelled expansion differ by {worst_perm:e}");
    Ok(format!("34 settings x 50 unitaries max diff {worst_poly:.1e}; brute force n<=3 max diff {worst_perm:.1e}"))
}

fn c9_properties() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // normalisation
    for i in 0..500 {
        let t = UnitaryMat2::new(random_unitary(&mut rng)).unwrap();
        let n_h = i % 5;
        let n_v = (i / 5) % 4 + u32::from(n_h == 0);
        let theta = (i as f64 * 0.37) % 1.5;
        let d = distribution_with_mismatch(&t, FockInput::new(n_h, n_v).unwrap(), &MismatchModel::new(theta).unwrap());
        let sum: f64 = d.probs().iter().sum();
        ensure!((sum - 1.0).abs() < 1e-10, "distribution sums to {sum}");
    }

    // loss calibration round trip at 10⁶ counts
    let bs = photodesign::su2::hwp(22.5).unwrap();
    let d = outcome_distribution(&bs, FockInput::standard(2).unwrap());
    for eps in [0.5, 0.75, 0.9, 1.0] {
        let l = LossModel::new(eps).unwrap();
        let c = simulate_rates(&apply_loss(&d, &l), 1e6, &mut rng).unwrap();
        let cal = calibrate_loss(&c).map_err(|e| e.to_string())?;
        ensure!((cal.epsilon3 - eps).abs() <= 3.0 * cal.stderr, "ε3={eps}: calibrated {} ± {}", cal.epsilon3, cal.stderr);
    }

    // corrected probabilities are unbiased: 400 noisy runs at 10⁵ events
    let t = compose_interferometer(&WavePlateAngles::new([0.0, 60.0, 0.0, 60.0]).unwrap(), &UnitaryMat2::identity());
    let truth = distribution_with_mismatch(&t, FockInput::standard(2).unwrap(), &MismatchModel::new(0.244).unwrap());
    let l = LossModel::new(0.8).unwrap();
    let runs: Vec<Vec<f64>> = (0..400)
        .map(|_| {
            let c = simulate_rates(&apply_loss(&truth, &l), 1e5, &mut rng).unwrap();
            correct_counts(&c, &l).unwrap().probs().to_vec()
        })
        .collect();
    for i in 0..3 {
        let xs: Vec<f64> = runs.iter().map(|r| r[i]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        ensure!((m - truth.probs()[i]).abs() <= 3.0 * sd / (xs.len() as f64).sqrt(), "corrected outcome {i}: {m} vs {}", truth.probs()[i]);
        let tv: f64 = runs[0].iter().zip(truth.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        ensure!(tv < 0.01, "total variation {tv}");
    }

    // fidelity bounds and symmetry
    for _ in 0..200 {
        let a = outcome_distribution(&UnitaryMat2::new(random_unitary(&mut rng)).unwrap(), FockInput::standard(3).unwrap());
        let b = outcome_distribution(&UnitaryMat2::new(random_unitary(&mut rng)).unwrap(), FockInput::standard(3).unwrap());
        let f = statistical_fidelity(&a, &b).unwrap();
        ensure!((0.0..=1.0).contains(&f), "fidelity {f}");
        ensure!((f - statistical_fidelity(&b, &a).unwrap()).abs() < 1e-15, "asymmetric fidelity");
        ensure!((statistical_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12, "F(P,P) != 1");
    }

    // twelve Haar samples are not uniform over the q settings
    let tables = Tables::bundled();
    let q_variance = |e: &photodesign::Ensemble| -> f64 {
        let avgs: Vec<f64> = tables
            .q
            .iter()
            .map(|s| {
                e.elements()
                    .iter()
                    .map(|u| photodesign::multiphoton::hom_coincidence(&compose_interferometer(&s.angles, u)))
                    .sum::<f64>()
                    / e.len() as f64
            })
            .collect();
        uniformity_metrics(&avgs, 1.0 / 3.0).unwrap().variance
    };
    let d2_var = q_variance(&ensemble_d2());
    let failing = (0..100u64)
        .filter(|seed| q_variance(&haar_ensemble(12, &mut stream_rng(*seed, 0)).unwrap()) > d2_var)
        .count();
    ensure!(failing >= 95, "only {failing}/100 Haar-12 ensembles are less uniform than d2");

    // ideal vs noisy fidelity at 10⁴ counts
    let mut plan = ExperimentPlan::new("d2", &["q"]);
    plan.counts = CountBudget::Poisson { mean: 1e4 };
    plan.seed = 3;
    let result = run_plan(&plan, &tables).map_err(|e| e.to_string())?;
    let mut min_f = 1.0f64;
    for s in &result.settings {
        for e in &s.elements {
            let f = statistical_fidelity(&e.expected, e.corrected.as_ref().ok_or("no counts")?).unwrap();
            min_f = min_f.min(f);
        }
    }
    ensure!(min_f > 0.99, "minimum fidelity {min_f}");

    let one = simulate_counts(&d, 0.0, &mut rng).unwrap();
    ensure!(one.total() == 0, "zero mean gave counts");
    let _ = Outcome::new(1, 1);
    let _ = Complex64::new(0.0, 0.0);
    Ok(format!(
        "normalisation, loss round trip (4 ε3 values), unbiased correction, fidelity bounds; Haar-12 less uniform than d2 in {failing}/100; min ideal-vs-noisy fidelity {min_f:.4}"
    ))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome_); 9] = [
        (1, "design exactness", c1_design_exactness),
        (2, "design failure witnesses", c2_failure_witnesses),
        (3, "rank checks", c3_ranks),
        (4, "design table realisation", c4_table_realisation),
        (5, "probe polynomial identities", c5_probe_identities),
        (6, "Haar oracle agreement", c6_haar_oracle),
        (7, "running-average reproduction", c7_fig5),
        (8, "cross-module oracle", c8_cross_module),
        (9, "property suite", c9_properties),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(detail) => println!("criterion {id} [PASS] {name}: {detail}"),
            Err(detail) => {
                let known = KNOWN_UNATTAINABLE.contains(&id);
                println!("criterion {id} [FAIL] {name}: {detail}{}", if known { " (known; see notes)" } else { "" });
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed unexpectedly");
        std::process::exit(1);
    }
}
