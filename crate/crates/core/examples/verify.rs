//! Run a handful of checks, then the same checks against planted violations.

use cobound::config::{Pipeline, RunConfig};
use cobound::verify::Verifier;
use cobound::zoo::CocycleSpec;

fn main() -> cobound::Result<()> {
    let p = Pipeline::new(RunConfig {
        cocycle: CocycleSpec::CupOrientation,
        ..Default::default()
    })?;
    for planted in [false, true] {
        println!("planted = {planted}");
        let v = Verifier::new(&p).planted(planted);
        for id in ["brackets", "kernel_rotation", "frobenius", "f_sharp_antidiagonal", "f0_oracle"] {
            println!("  {}", v.run(id)?.line());
        }
    }
    Ok(())
}
