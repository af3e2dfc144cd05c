// Symbolic expansion of probe probabilities and the rank of the probe
// coefficient matrices.

use photodesign::basis::{basis_matrix, reduce_mod_constraint, RowLayout};
use photodesign::poly::{expand_probe_polynomial, ProbeKind};
use photodesign::tables::Tables;

pub fn run_example() -> photodesign::Result<()> {
    let tables = Tables::bundled();

    let p1 = expand_probe_polynomial(&tables.probe("p1")?.angles, ProbeKind::OnePhoton)?;
    println!("p1 = {p1}");
    let q1 = expand_probe_polynomial(&tables.probe("q1")?.angles, ProbeKind::TwoPhoton)?;
    println!("q1 = {}", q1.pruned(1e-12));
    let reduced = reduce_mod_constraint(&q1, 4)?.to_polynomial().pruned(1e-12);
    println!("q1 on the sphere = {reduced}");

    for (family, kind) in [("p", ProbeKind::OnePhoton), ("q", ProbeKind::TwoPhoton)] {
        let settings: Vec<_> = tables.pq_settings().filter(|s| s.label.starts_with(family)).map(|s| s.angles).collect();
        for layout in [RowLayout::Reduced, RowLayout::Truncated] {
            let m = basis_matrix(&settings, kind, layout)?;
            println!(
                "{family} {layout:?}: {}x{} rank {} (singular values {:.4} .. {:.4})",
                m.rows,
                m.cols,
                m.rank,
                m.singular_values[0],
                m.singular_values.last().unwrap()
            );
        }
    }

    let without_p3: Vec<_> = tables.p.iter().filter(|s| s.label != "p3").map(|s| s.angles).collect();
    let m = basis_matrix(&without_p3, ProbeKind::OnePhoton, RowLayout::Reduced)?;
    println!("p without p3: rank {}", m.rank);
    assert_eq!(m.rank, 8);
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
