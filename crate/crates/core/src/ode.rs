//! Dormand-Prince 5(4) with step-size control and event location, used as a
//! brute-force oracle for `f0`: flow along the vector fields themselves and
//! accumulate the inhomogeneities, without any closed-form orbit formula.

use serde::{Deserialize, Serialize};

use crate::characteristics::Region;
use crate::error::{Error, Result};
use crate::kernels::Inhomogeneities;
use crate::moebius::{wrap, Flow};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// fifth minus fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Events are located until the bracket or the event function is this small.
    pub event_tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h0: 1e-3,
            h_max: 0.5,
            max_steps: 200_000,
            event_tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    pub t: f64,
    pub y: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    /// Whether integration stopped at a zero of the event function.
    pub event: bool,
}

/// One DP step of size `h`; returns the new state and the error estimate vector.
fn dp_step<F>(f: &mut F, t: f64, y: &[f64], h: f64, k: &mut [Vec<f64>; 7], tmp: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    f(t, y, &mut k[0]);
    for s in 1..7 {
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..s {
                acc += h * A[s][j] * k[j][i];
            }
            tmp[i] = acc;
        }
        f(t + C[s] * h, tmp, &mut k[s]);
    }
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    for i in 0..n {
        let mut acc = y[i];
        let mut e = 0.0;
        for j in 0..7 {
            acc += h * B[j] * k[j][i];
            e += h * E[j] * k[j][i];
        }
        y_new[i] = acc;
        err[i] = e;
    }
    (y_new, err)
}

/// Integrate `y' = f(t, y)` from `t0` towards `t_end`, stopping early at a sign
/// change of `event(t, y)`.
pub fn integrate<F, G>(mut f: F, t0: f64, y0: &[f64], t_end: f64, mut event: Option<G>, opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> f64,
{
    let n = y0.len();
    if n == 0 || !(t0.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidArgument("empty state or non-finite interval".into()));
    }
    let dir = (t_end - t0).signum();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let (mut t, mut y) = (t0, y0.to_vec());
    let mut h = opts.h0.min(opts.h_max).min((t_end - t0).abs());
    let mut g_prev = event.as_mut().map(|g| g(t, &y));
    let (mut steps, mut rejected) = (0, 0);
    while (t_end - t) * dir > 0.0 {
        if steps + rejected >= opts.max_steps {
            return Err(Error::Domain(format!("ODE step budget exhausted at t = {t}")));
        }
        h = h.min((t_end - t).abs());
        let (y_new, err) = dp_step(&mut f, t, &y, dir * h, &mut k, &mut tmp);
        let mut norm = 0.0f64;
        for i in 0..n {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            norm = norm.max((err[i] / sc).abs());
        }
        if !norm.is_finite() {
            h *= 0.25;
            rejected += 1;
            continue;
        }
        if norm > 1.0 {
            h *= (0.9 * norm.powf(-0.2)).max(0.2);
            rejected += 1;
            continue;
        }
        let t_new = t + dir * h;
        if let (Some(g), Some(gp)) = (event.as_mut(), g_prev) {
            let g_new = g(t_new, &y_new);
            if gp == 0.0 || gp.signum() != g_new.signum() {
                let (te, ye) = locate(&mut f, g, t, &y, gp, h, g_new, dir, &mut k, &mut tmp, opts);
                return Ok(OdeSolution {
                    t: te,
                    y: ye,
                    steps: steps + 1,
                    rejected,
                    event: true,
                });
            }
            g_prev = Some(g_new);
        }
        t = t_new;
        y = y_new;
        steps += 1;
        let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).min(5.0) };
        h = (h * grow).min(opts.h_max);
    }
    Ok(OdeSolution {
        t,
        y,
        steps,
        rejected,
        event: false,
    })
}

/// Illinois-style regula falsi on the step size, each trial being a direct step from `(t, y)`.
#[allow(clippy::too_many_arguments)]
fn locate<F, G>(
    f: &mut F,
    g: &mut G,
    t: f64,
    y: &[f64],
    g0: f64,
    h: f64,
    g1: f64,
    dir: f64,
    k: &mut [Vec<f64>; 7],
    tmp: &mut [f64],
    opts: &OdeOptions,
) -> (f64, Vec<f64>)
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> f64,
{
    if g0 == 0.0 {
        return (t, y.to_vec());
    }
    let (mut lo, mut hi) = (0.0, h);
    let (mut glo, mut ghi) = (g0, g1);
    let mut side = 0i8;
    let mut best = (t + dir * h, dp_step(f, t, y, dir * h, k, tmp).0);
    for _ in 0..200 {
        if hi - lo <= opts.event_tol {
            break;
        }
        let mut m = lo + (hi - lo) * glo / (glo - ghi);
        if !(m > lo && m < hi) {
            m = 0.5 * (lo + hi);
        }
        let (ym, _) = dp_step(f, t, y, dir * m, k, tmp);
        let gm = g(t + dir * m, &ym);
        best = (t + dir * m, ym);
        if gm.abs() <= opts.event_tol {
            break;
        }
        if gm.signum() == glo.signum() {
            lo = m;
            glo = gm;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = m;
            ghi = gm;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    best
}

/// `f0(p)` by flowing along the fields: first the `N`-flow from `p` to the
/// antidiagonal, then the `A`-flow from the base point to the same `N`-orbit.
pub fn brute_force_f0(inh: &Inhomogeneities, init: (f64, f64), p1: f64, p2: f64, opts: &OdeOptions) -> Result<f64> {
    let (p1, p2) = (wrap(p1), wrap(p2));
    if p1 == 0.0 || p2 == 0.0 || p1 == p2 {
        return Err(Error::Domain(format!("({p1}, {p2}) is not in the domain")));
    }
    let region = if p1 < p2 { Region::Plus } else { Region::Minus };
    const HORIZON: f64 = 1e5;

    // stage 1: N-flow to phi1 + phi2 = 2 pi
    let sigma = if p1 + p2 > std::f64::consts::TAU { -1.0 } else { 1.0 };
    let n_field = |_: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = sigma * Flow::N.field(y[0]);
        dy[1] = sigma * Flow::N.field(y[1]);
        dy[2] = inh.eval(y[0], y[1]).1;
    };
    let stage1 = integrate(
        n_field,
        0.0,
        &[p1, p2, 0.0],
        HORIZON,
        Some(|_: f64, y: &[f64]| y[0] + y[1] - std::f64::consts::TAU),
        opts,
    )?;
    if !stage1.event {
        return Err(Error::Domain("N-flow did not reach the antidiagonal".into()));
    }
    let phi = stage1.y[0];
    let transport = -sigma * stage1.y[2];

    // stage 2: A-flow from the base point until eta1 = phi
    let (b1, b2) = region.base();
    let sigma_a = (b1.sin() * (phi - b1)).signum();
    let a_field = |_: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = sigma_a * Flow::A.field(y[0]);
        dy[1] = sigma_a * Flow::A.field(y[1]);
        dy[2] = inh.eval(y[0], y[1]).0;
    };
    let sweep = if phi == b1 {
        0.0
    } else {
        let stage2 = integrate(a_field, 0.0, &[b1, b2, 0.0], HORIZON, Some(|_: f64, y: &[f64]| y[0] - phi), opts)?;
        if !stage2.event {
            return Err(Error::Domain("A-flow did not reach the target orbit".into()));
        }
        sigma_a * stage2.y[2]
    };
    let init = match region {
        Region::Plus => init.0,
        Region::Minus => init.1,
    };
    Ok(init + sweep + transport)
}
