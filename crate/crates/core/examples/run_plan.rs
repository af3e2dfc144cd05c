// Loading an experiment plan from TOML and running it on the virtual
// setup.

use photodesign::tables::Tables;
use photodesign::virtlab::{run_plan, statistical_fidelity, ExperimentPlan};

const PLAN: &str = r#"
version = 1
ensemble = "d2"
settings = ["q"]
theta = 0.244
seed = 42

[counts]
poisson = { mean = 2000.0 }

[loss]
epsilon3 = 0.8
"#;

pub fn run_example() -> photodesign::Result<()> {
    let plan = ExperimentPlan::from_toml(PLAN)?;
    let result = run_plan(&plan, &Tables::bundled())?;
    println!("{} settings on {} with input {:?}", result.settings.len(), result.ensemble, result.input);
    for s in result.settings.iter().take(6) {
        let avg = s.average.as_ref().expect("finite counts give an average");
        println!(
            "{:>4}: P11 measured {:.4} expected {:.4}  fidelity {:.5}",
            s.label,
            avg.probs()[1],
            s.expected_average.probs()[1],
            statistical_fidelity(avg, &s.expected_average)?
        );
    }
    println!("round trip:\n{}", plan.to_toml());
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
