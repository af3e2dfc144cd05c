// Exact t-design test for the four- and twelve-element ensembles and a
// small Haar sample.

use photodesign::moments::design_test;
use photodesign::su2::{ensemble_d1, ensemble_d2, haar_ensemble};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> photodesign::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let haar = haar_ensemble(12, &mut rng)?;
    for ensemble in [ensemble_d1(), ensemble_d2(), haar] {
        for t in 1..=3 {
            let r = design_test(&ensemble, t, 1e-12)?;
            let witness = r.witness.as_ref().map_or(String::new(), |w| match &w.exact {
                Some(x) => format!(" witness {} ({} vs {})", w.monomial, x.ensemble_average, x.haar_average),
                None => format!(" witness {} ({:.4} vs {:.4})", w.monomial, w.ensemble_average, w.haar_average),
            });
            println!(
                "{:>8} t={t}: {} max deviation {:.3e}{witness}",
                r.ensemble,
                if r.pass { "PASS" } else { "FAIL" },
                r.max_deviation
            );
        }
    }
    assert!(design_test(&ensemble_d2(), 2, 0.0)?.pass);
    assert!(!design_test(&ensemble_d1(), 2, 1e-12)?.pass);
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
