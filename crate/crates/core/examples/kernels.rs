//! Tabulate `c_check(0, .)` and the kernel `r` for the cup cocycle.

use std::f64::consts::{PI, TAU};

use cobound::kernels::{KernelTable, TableOptions};
use cobound::quadrature::CircleRule;
use cobound::zoo::cup_orientation;

fn main() -> cobound::Result<()> {
    let c = cup_orientation();
    let rule = CircleRule::arc(6, PI / 2.0)?;
    let table = KernelTable::build(
        &c,
        &rule,
        TableOptions {
            size: 129,
            ..Default::default()
        },
    )?;
    println!("{} knots, sup |r| = {:.6} (sup |c| = 1/3)", table.knots().len(), table.sup_r());
    println!("{:>8} {:>12} {:>12} {:>12} {:>10}", "z", "c_check", "Re r", "Im r", "ode res");
    for k in 1..8 {
        let z = TAU * k as f64 / 8.0;
        let r = table.r_at(z);
        println!(
            "{z:8.4} {:12.8} {:12.8} {:12.8} {:10.2e}",
            table.check_at(z),
            r.re,
            r.im,
            table.ode_residual(z, 1e-5)
        );
    }
    Ok(())
}
