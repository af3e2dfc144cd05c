// Exact Haar moments on SU(2) against ensemble averages and a Monte Carlo
// estimate.

use photodesign::moments::{ensemble_average, haar_average, haar_moment, haar_moment_exact, homogeneous_monomials};
use photodesign::poly::monomial_name;
use photodesign::su2::{ensemble_d2, haar_sample};
use photodesign::PolynomialR4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> photodesign::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<_> = (0..200_000).map(|_| haar_sample(&mut rng)).collect();
    let d2 = ensemble_d2();
    println!("{:>14} {:>8} {:>10} {:>10}", "monomial", "exact", "d2", "sampled");
    for e in homogeneous_monomials(4).into_iter().take(8) {
        let f = PolynomialR4::monomial(e, 1.0);
        let mc = samples.iter().map(|p| f.evaluate(p)).sum::<f64>() / samples.len() as f64;
        println!(
            "{:>14} {:>8} {:>10.6} {:>10.6}",
            monomial_name(&e),
            haar_moment_exact(&e).to_string(),
            ensemble_average(&f, &d2),
            mc
        );
        assert!((haar_moment(&e) - ensemble_average(&f, &d2)).abs() < 1e-12);
    }
    let p1 = PolynomialR4::from_terms([([2, 0, 0, 0], 1.0), ([0, 2, 0, 0], 1.0)]);
    println!("E_Haar[x1^2 + y1^2] = {}", haar_average(&p1));
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
