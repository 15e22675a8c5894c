//! Orbit curves, a characteristic path and the fundamental domain, written as CSV.

use cobound::output::{self, a_invariant, n_invariant};

fn main() -> cobound::Result<()> {
    let dir = std::env::temp_dir().join("cobound_figures");
    let (a, n) = output::orbit_curves(8, 200);
    println!("A-orbit invariant defect {:.2e}", output::invariant_defect(&a, a_invariant));
    println!("N-orbit invariant defect {:.2e}", output::invariant_defect(&n, n_invariant));
    let path = output::characteristic_path(1.0, 4.5, 100)?;
    println!("path from {:?} to {:?}", path.points[0], path.points[path.points.len() - 1]);
    let p = (1.0, 4.5);
    let home: Vec<_> = output::s3_orbit(p)
        .into_iter()
        .filter(|&q| output::in_fundamental_domain(q))
        .collect();
    println!("S3 image of {p:?} in the fundamental domain: {home:?}");
    let mut curves = vec![output::fundamental_domain_boundary()];
    curves.extend(output::segment_images(200));
    curves.push(path);
    let (file, mut w) = output::create(&dir, "figures.csv")?;
    output::write_curves(&mut w, &curves, &[])?;
    println!("-> {}", file.display());
    Ok(())
}
