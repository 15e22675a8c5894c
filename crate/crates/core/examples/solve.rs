//! Solve for `f0` along characteristics and evaluate the primitive `P`.

use cobound::characteristics::Characteristic;
use cobound::config::{Pipeline, RunConfig};
use cobound::zoo::CocycleSpec;

fn main() -> cobound::Result<()> {
    let p = Pipeline::new(RunConfig {
        cocycle: CocycleSpec::CupOrientation,
        check_grid: 129,
        ..Default::default()
    })?;
    let solver = p.solver()?;
    for (p1, p2) in [(1.0, 4.5), (2.0, 3.0), (4.5, 1.0), (0.3, 6.0)] {
        let ch = Characteristic::of(p1, p2)?;
        println!(
            "f0({p1}, {p2}) = {:+.10}  [{:?}, phi {:.4}, S {:+.4}, T {:+.4}]",
            solver.f0(p1, p2)?,
            ch.region,
            ch.phi,
            ch.s,
            ch.t
        );
    }
    let prim = p.primitive()?;
    let x = [0.1, 1.3, 2.2, 4.0];
    println!("P{x:?} = {:+.10}", prim.try_eval(&x)?);
    Ok(())
}
