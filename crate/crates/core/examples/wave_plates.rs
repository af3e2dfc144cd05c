// Wave-plate Jones matrices, the three-plate process and the probe sandwich.
//
// Builds every element of the twelve-element design from its plate angles
// and checks it against the label in the settings table.

use photodesign::su2::{
    compose_interferometer, equal_up_to_phase, hwp, params_from_unitary, process_from_plates, qwp, to_special_unitary,
};
use photodesign::tables::{design_label_unitary, Tables};

pub fn run_example() -> photodesign::Result<()> {
    let q = qwp(45.0)?;
    let h = hwp(45.0)?;
    println!("QWP(45)^2 == HWP(45): {}", (q * q).max_abs_diff(&h) < 1e-12);

    let tables = Tables::bundled();
    for row in &tables.design {
        let u = process_from_plates(&row.angles);
        let expected = design_label_unitary(&row.label)?;
        let p = params_from_unitary(&to_special_unitary(&u))?;
        println!(
            "{:>18}  theta={:?}  (x1,y1,x2,y2)=({:+.3},{:+.3},{:+.3},{:+.3})  matches={}",
            row.label,
            row.angles.theta(),
            p.x1(),
            p.y1(),
            p.x2(),
            p.y2(),
            equal_up_to_phase(&u, &expected, 1e-9)
        );
        assert!(equal_up_to_phase(&u, &expected, 1e-9));
    }

    // a probe setting wraps the unknown unitary in two fixed plate pairs
    let probe = tables.probe("q5")?;
    let t = compose_interferometer(&probe.angles, &tables.design.first().map(|r| process_from_plates(&r.angles)).unwrap());
    println!("q5 around the first design element: unitarity error {:.1e}", t.unitarity_error());
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
