//! Convergence ladders: midpoint integral in `N`, finite differences in `h`, kernel table in `M`.

use std::f64::consts::PI;

use cobound::config::{Pipeline, RunConfig};
use cobound::convergence::{fd_ladder, integral_ladder, table_ladder};
use cobound::quadrature::CircleRule;
use cobound::zoo::CocycleSpec;

fn main() -> cobound::Result<()> {
    let p = Pipeline::new(RunConfig {
        cocycle: CocycleSpec::CupOrientation,
        check_grid: 129,
        ..Default::default()
    })?;
    let reference = CircleRule::arc(6, PI / 2.0)?;
    let ladders = [
        integral_ladder(&p.cocycle, &reference, &[64, 128, 256, 512], 100, 0)?,
        fd_ladder(&p, &[1e-2, 5e-3, 2.5e-3]),
        table_ladder(&p.cocycle, &p.rule, &[65, 129, 257], p.config.guard)?,
    ];
    for l in &ladders {
        println!("{} in {}: fitted order {:.2}", l.name, l.parameter_name, l.fitted_order());
        for (x, e) in l.parameters.iter().zip(&l.errors) {
            println!("  {x:>10} {e:.3e}");
        }
    }
    Ok(())
}
