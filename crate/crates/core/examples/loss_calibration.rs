// Calibrating the relative (0,2) detection efficiency from the HOM
// bunching counts and correcting a noisy measurement with it.

use photodesign::multiphoton::outcome_distribution;
use photodesign::su2::hwp;
use photodesign::virtlab::{apply_loss, calibrate_loss, correct_counts, simulate_rates, statistical_fidelity, LossModel};
use photodesign::FockInput;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> photodesign::Result<()> {
    let truth = outcome_distribution(&hwp(22.5)?, FockInput::standard(2)?);
    let loss = LossModel::new(0.75)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let counts = simulate_rates(&apply_loss(&truth, &loss), 2e4, &mut rng)?;
    println!("measured: {counts}");
    let cal = calibrate_loss(&counts)?;
    println!("epsilon3 = {:.4} +/- {:.4}", cal.epsilon3, cal.stderr);

    let raw = photodesign::OutcomeDistribution::from_weights(2, counts.counts().iter().map(|c| *c as f64).collect())?;
    let corrected = correct_counts(&counts, &cal.model)?;
    println!("raw fidelity {:.5}, corrected fidelity {:.5}", statistical_fidelity(&truth, &raw)?, statistical_fidelity(&truth, &corrected)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
