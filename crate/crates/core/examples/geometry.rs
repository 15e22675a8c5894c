//! Group elements, the three flows and cross-ratio invariance.

use std::f64::consts::PI;

use cobound::moebius::{cross_ratio_angles, make_a, make_k, make_n, Flow, GroupElement};

fn main() -> cobound::Result<()> {
    let g = GroupElement::iwasawa(0.3, 0.8, -1.2)?;
    println!("g = k(0.3) a(0.8) n(-1.2), normalization defect {:.1e}", g.normalization_defect());
    let back = g.compose(&g.inverse());
    println!("g g^-1 within {:.1e} of the identity", back.distance(&GroupElement::identity()));

    let x = [0.2, 1.1, 2.9, 4.4];
    let y = g.act_tuple(&x);
    println!(
        "cross ratio {:.12} -> {:.12}",
        cross_ratio_angles(x[0], x[1], x[2], x[3]),
        cross_ratio_angles(y[0], y[1], y[2], y[3])
    );

    for flow in [Flow::K, Flow::A, Flow::N] {
        let theta = PI / 3.0;
        let (a, b) = (flow.apply(0.7, flow.apply(0.5, theta)), flow.apply(1.2, theta));
        println!(
            "{}: field at pi/3 = {:.6}, flow is additive within {:.1e}",
            flow.name(),
            flow.field(theta),
            (a - b).abs()
        );
    }
    // the flows are the actions of one-parameter subgroups
    for (name, e) in [("k", make_k(0.4)?), ("a", make_a(0.4)?), ("n", make_n(0.4)?)] {
        println!("{name}(0.4) . 1.0 = {:.12}", e.act(1.0));
    }
    Ok(())
}
