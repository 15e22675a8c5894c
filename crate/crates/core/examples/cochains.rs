//! Cochains on the circle: the cup cocycle, its coboundary and the integrated primitive.

use cobound::cochain::{coboundary_at, integrate_first};
use cobound::quadrature::CircleRule;
use cobound::sampling::Sampler;
use cobound::zoo::{cup_orientation, Cocycle, CocycleSpec};

fn main() -> cobound::Result<()> {
    let c = cup_orientation();
    let s = Sampler::new(7, "cochains_example");
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        worst = worst.max(coboundary_at(&c, &s.admissible(k, 5, 1e-3)).abs());
    }
    println!("cup: max |dc| over 100 tuples = {worst:e}");

    // I(c) integrates out the first variable; d I(c) = c for any fixed rule
    let ic = integrate_first(&c, &CircleRule::midpoint(256)?);
    let x = s.admissible(100, 5, 1e-3);
    println!("cup: dI(c) - c at one tuple = {:.2e}", coboundary_at(&ic, &x) - c.eval(&x));

    for spec in [
        CocycleSpec::Zero,
        CocycleSpec::CupOrientation,
        serde_json::from_str(r#"{"kind":"coboundary_crossratio"}"#).unwrap(),
    ] {
        let cocycle = Cocycle::build(&spec)?;
        println!("{:<22} sup {:.4} claims {:?}", cocycle.name(), cocycle.sup_norm, cocycle.claims);
    }
    Ok(())
}
