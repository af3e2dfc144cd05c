// Regenerates every figure dataset as CSV in a scratch directory.

use photodesign::virtlab::figures::{reproduce_figure, FigureConfig, FigureId};

pub fn run_example() -> photodesign::Result<()> {
    let dir = std::env::temp_dir().join("photodesign-figures");
    std::fs::create_dir_all(&dir)?;
    let cfg = FigureConfig { repeats: 8, ..FigureConfig::default() };
    for id in FigureId::ALL {
        let data = reproduce_figure(id, &cfg)?;
        let path = data.write_csv(&dir)?;
        println!("{:>10}: {:>5} rows -> {}", id.name(), data.rows.len(), path.display());
    }
    let hom = reproduce_figure(FigureId::Hom, &cfg)?;
    if let Some(v) = hom.select("ideal", "visibility").next() {
        println!("HOM visibility {:.6}", v.value);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> photodesign::Result<()> {
    run_example()
}
