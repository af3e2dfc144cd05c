// Two-photon interference on a polarising beam splitter with partially
// distinguishable photons, and recovery of the mismatch angle from a
// noisy dip.

use photodesign::multiphoton::{
    distribution_with_mismatch, fit_gaussian, hom_dip_scan, mismatch_to_visibility, outcome_distribution,
    visibility_to_mismatch,
};
use photodesign::su2::hwp;
use photodesign::virtlab::simulate_counts;
use photodesign::{FockInput, MismatchModel, Outcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> photodesign::Result<()> {
    let bs = hwp(22.5)?;
    let input = FockInput::standard(2)?;
    println!("ideal |1,1>: {:?}", outcome_distribution(&bs, input).probs());

    let theta = visibility_to_mismatch(-0.941724)?;
    let m = MismatchModel::new(theta)?;
    println!("theta = {theta:.6}, V back = {:.6}", mismatch_to_visibility(theta));
    println!("with mismatch: {:?}", distribution_with_mismatch(&bs, input, &m).probs());

    let delays: Vec<f64> = (-30..=30).map(|i| i as f64 / 10.0).collect();
    let scan = hom_dip_scan(&bs, &m, 1.0, &delays)?;
    println!("model visibility {:.6}", scan.visibility());

    // noisy bunching fractions at 10⁵ events per delay
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut noisy = Vec::with_capacity(delays.len());
    for p in &scan.bunching {
        let rest = (1.0 - p) / 2.0;
        let d = photodesign::OutcomeDistribution::new(2, vec![*p, 1.0 - p - rest, rest])?;
        let c = simulate_counts(&d, 1e5, &mut rng)?;
        noisy.push(c.get(Outcome::new(2, 0)) as f64 / c.total() as f64);
    }
    let fit = fit_gaussian(&delays, &noisy)?;
    let v = fit.visibility();
    println!("fitted V = {v:.4}, sigma = {:.3}, theta = {:.4}", fit.sigma, visibility_to_mismatch(v)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
