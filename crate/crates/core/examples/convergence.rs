// Running average of the (1,1) probability over unitaries drawn from the
// four-element design, compared with the Haar value.

use photodesign::tables::Tables;
use photodesign::virtlab::figures::haar_reference;
use photodesign::virtlab::{running_average, CountBudget, ExperimentPlan};
use photodesign::{FockInput, MismatchModel};

pub fn run_example() -> photodesign::Result<()> {
    let mut plan = ExperimentPlan::new("d1", &["q19"]);
    plan.theta = 0.244;
    plan.seed = 1;
    plan.counts = CountBudget::Uniform { min: 0, max: 33 };
    let traces = running_average(&plan, &Tables::bundled(), 500, 16)?;
    let haar = haar_reference(FockInput::standard(2)?, &MismatchModel::new(0.244)?)?[1];
    println!("model value {:.4}, Haar value {haar:.4}", traces[0].expected);
    for t in &traces {
        let at = |n: usize| t.running_mean[n - 1];
        println!(
            "repeat {:>2}: n=10 {:.3}  n=100 {:.3}  n=500 {:.4} +/- {:.4}",
            t.repeat,
            at(10),
            at(100),
            t.final_mean(),
            t.final_envelope()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
