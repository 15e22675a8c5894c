//! The two-variable primitive `f0` by integration along characteristics, its
//! rotation-invariant lift `f`, and the primitive `P = I(c) + df`.
//!
//! Every point `p = (p1, p2)` of the domain `Omega+ u Omega-` is reached from
//! `omega+ = (2pi/3, 4pi/3)` or `omega- = (4pi/3, 2pi/3)` by first moving along the
//! `A`-orbit to `(Phi, 2pi - Phi)` (time `S`) and then along the `N`-orbit (time `T`):
//!
//! ```text
//! f0(p) = init + int_0^S F_sharp(a_s omega) ds + int_0^T F_flat(n_t (Phi, 2pi - Phi)) dt
//! ```

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::cochain::{integrate_first, Cochain};
use crate::error::{Error, Result};
use crate::kernels::Inhomogeneities;
use crate::moebius::{flow_a, flow_n, wrap};
use crate::quadrature::{gauss_kronrod, GaussLegendre, Integral};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Which of the two components of the domain a point lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// `0 < p1 < p2 < 2pi`
    Plus,
    /// `0 < p2 < p1 < 2pi`
    Minus,
}

impl Region {
    pub fn base(self) -> (f64, f64) {
        match self {
            Region::Plus => (TAU / 3.0, 2.0 * TAU / 3.0),
            Region::Minus => (2.0 * TAU / 3.0, TAU / 3.0),
        }
    }

    fn index(self) -> usize {
        match self {
            Region::Plus => 0,
            Region::Minus => 1,
        }
    }
}

/// Coordinates `(S, T)` of a point along its characteristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Characteristic {
    pub region: Region,
    /// Where the `N`-orbit meets the antidiagonal: `(phi, 2pi - phi)`.
    pub phi: f64,
    pub s: f64,
    pub t: f64,
}

fn cot_half(x: f64) -> f64 {
    let (s, c) = (0.5 * x).sin_cos();
    c / s
}

/// `T(p) = -(cot(p1/2) + cot(p2/2)) / 2`, the `N`-time from the antidiagonal to `p`.
pub fn t_of(p1: f64, p2: f64) -> f64 {
    -0.5 * (cot_half(p1) + cot_half(p2))
}

/// Foot point `Phi` of the `N`-orbit through `p` on the antidiagonal, on the branch of `p`'s component.
pub fn phi_of(p1: f64, p2: f64) -> Result<f64> {
    let region = region_of(p1, p2)?;
    let k = 0.5 * (cot_half(p1) - cot_half(p2));
    // 2 arccot k lies in (0, pi) exactly when k > 0, i.e. on Omega+
    let phi = 2.0 * (PI / 2.0 - k.atan());
    Ok(match region {
        Region::Plus => phi.min(PI),
        Region::Minus => phi.max(PI),
    })
}

/// `A`-time `S` with `a_S . omega = (phi, 2pi - phi)`.
pub fn s_of(phi: f64, region: Region) -> Result<f64> {
    match region {
        Region::Plus if phi > 0.0 && phi < PI => Ok(((0.5 * phi).tan() / SQRT3).ln()),
        Region::Minus if phi > PI && phi < TAU => Ok(((0.5 * (TAU - phi)).tan() / SQRT3).ln()),
        _ => Err(Error::InvalidArgument(format!(
            "phi = {phi} is not on the {region:?} half of the antidiagonal"
        ))),
    }
}

/// Component of the domain containing `p`.
pub fn region_of(p1: f64, p2: f64) -> Result<Region> {
    let (p1, p2) = (wrap(p1), wrap(p2));
    if p1 == 0.0 || p2 == 0.0 || p1 == p2 || !(p1.is_finite() && p2.is_finite()) {
        return Err(Error::Domain(format!("({p1}, {p2}) is not in the domain")));
    }
    Ok(if p1 < p2 { Region::Plus } else { Region::Minus })
}

impl Characteristic {
    pub fn of(p1: f64, p2: f64) -> Result<Self> {
        let region = region_of(p1, p2)?;
        let (p1, p2) = (wrap(p1), wrap(p2));
        let phi = phi_of(p1, p2)?;
        Ok(Characteristic {
            region,
            phi,
            s: s_of(phi, region)?,
            t: t_of(p1, p2),
        })
    }

    /// The point these coordinates describe.
    pub fn point(&self) -> (f64, f64) {
        let (b1, b2) = self.region.base();
        let (q1, q2) = (flow_a(self.s, b1), flow_a(self.s, b2));
        (flow_n(self.t, q1), flow_n(self.t, q2))
    }
}

/// Tolerances of the characteristic integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// `N`-integrals beyond this `|t|` switch to `t = tan u`.
    pub t_split: f64,
    /// The `A`-integral is tabulated on `[-s_max, s_max]`.
    pub s_max: f64,
    pub s_step: f64,
    /// Cache entries before the memo is cleared.
    pub cache_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            abs_tol: 1e-7,
            max_intervals: 200,
            t_split: 50.0,
            s_max: 10.0,
            s_step: 0.1,
            cache_limit: 1_000_000,
        }
    }
}

/// Cumulative `int_0^s F_sharp(a_u omega) du` on a uniform grid, Hermite-interpolated.
#[derive(Clone, Debug)]
struct SweepTable {
    step: f64,
    origin: usize,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl SweepTable {
    fn build(inh: &Inhomogeneities, region: Region, options: &SolverOptions) -> Self {
        let (b1, b2) = region.base();
        let f = |s: f64| inh.eval(flow_a(s, b1), flow_a(s, b2)).0;
        let half = (options.s_max / options.s_step).ceil() as usize;
        let step = options.s_max / half as f64;
        let n = 2 * half + 1;
        let grid: Vec<f64> = (0..n).map(|k| (k as f64 - half as f64) * step).collect();
        let slopes: Vec<f64> = grid.iter().map(|&s| f(s)).collect();
        let gl = GaussLegendre::new(8).expect("order 8");
        let mut values = vec![0.0; n];
        for k in half + 1..n {
            values[k] = values[k - 1] + gl.integrate(grid[k - 1], grid[k], f);
        }
        for k in (0..half).rev() {
            values[k] = values[k + 1] - gl.integrate(grid[k], grid[k + 1], f);
        }
        SweepTable {
            step,
            origin: half,
            values,
            slopes,
        }
    }

    fn range(&self) -> f64 {
        self.step * self.origin as f64
    }

    fn eval(&self, s: f64) -> f64 {
        let x = s / self.step + self.origin as f64;
        let k = (x.floor() as usize).min(self.values.len() - 2);
        let t = x - k as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h = self.step;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.values[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }
}

/// Evaluation counters.
#[derive(Debug, Default)]
pub struct SolverStats {
    pub evaluations: AtomicU64,
    pub cache_hits: AtomicU64,
    pub unconverged: AtomicU64,
}

/// `f0` on the two-variable domain.
pub struct Solver {
    inh: Arc<Inhomogeneities>,
    options: SolverOptions,
    init: [f64; 2],
    sweeps: [SweepTable; 2],
    cache: Mutex<HashMap<(u64, u64), f64>>,
    stats: SolverStats,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("options", &self.options)
            .field("init", &self.init)
            .finish_non_exhaustive()
    }
}

/// `(a, -a)` with `a = (i1 - i2) / 2`: the closest pair compatible with alternation.
pub fn enforce_alternating_init(i1: f64, i2: f64) -> (f64, f64) {
    let a = 0.5 * (i1 - i2);
    (a, -a)
}

impl Solver {
    pub fn new(inh: Arc<Inhomogeneities>, options: SolverOptions) -> Result<Self> {
        if !(options.abs_tol > 0.0 && options.t_split > 0.0 && options.s_max > 0.0 && options.s_step > 0.0) {
            return Err(Error::InvalidArgument(format!("bad solver options {options:?}")));
        }
        let sweeps = [
            SweepTable::build(&inh, Region::Plus, &options),
            SweepTable::build(&inh, Region::Minus, &options),
        ];
        Ok(Solver {
            inh,
            options,
            init: [0.0, 0.0],
            sweeps,
            cache: Mutex::new(HashMap::new()),
            stats: SolverStats::default(),
        })
    }

    /// Values of `f0` at `omega+` and `omega-`; alternation requires `init- = -init+`.
    pub fn with_init(mut self, plus: f64, minus: f64) -> Self {
        self.init = [plus, minus];
        self
    }

    pub fn inhomogeneities(&self) -> &Inhomogeneities {
        &self.inh
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    /// `int_0^S F_sharp(a_s omega) ds`.
    pub fn sweep_integral(&self, region: Region, s: f64) -> f64 {
        let table = &self.sweeps[region.index()];
        let edge = table.range();
        if s.abs() <= edge {
            return table.eval(s);
        }
        let from = edge.copysign(s);
        let (b1, b2) = region.base();
        let tail = gauss_kronrod(
            |u| self.inh.eval(flow_a(u, b1), flow_a(u, b2)).0,
            from,
            s,
            self.options.abs_tol,
            self.options.max_intervals,
        );
        self.note(&tail);
        table.eval(from) + tail.value
    }

    /// `int_0^T F_flat(n_t (phi, 2pi - phi)) dt`.
    pub fn transport_integral(&self, phi: f64, t: f64) -> f64 {
        let g = |u: f64| self.inh.eval(flow_n(u, phi), flow_n(u, TAU - phi)).1;
        let split = self.options.t_split;
        let head_end = t.clamp(-split, split);
        let head = gauss_kronrod(g, 0.0, head_end, self.options.abs_tol, self.options.max_intervals);
        self.note(&head);
        if t.abs() <= split {
            return head.value;
        }
        // t = tan u on the remainder
        let tail = gauss_kronrod(
            |u| {
                let (s, c) = u.sin_cos();
                g(s / c) / (c * c)
            },
            head_end.atan(),
            t.atan(),
            self.options.abs_tol,
            self.options.max_intervals,
        );
        self.note(&tail);
        head.value + tail.value
    }

    fn note(&self, r: &Integral) {
        if !r.converged {
            self.stats.unconverged.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// `f0(p1, p2)` without the memo.
    pub fn f0_uncached(&self, p1: f64, p2: f64) -> Result<f64> {
        let ch = Characteristic::of(p1, p2)?;
        self.stats.evaluations.fetch_add(1, Ordering::Relaxed);
        let init = self.init[ch.region.index()];
        Ok(init + self.sweep_integral(ch.region, ch.s) + self.transport_integral(ch.phi, ch.t))
    }

    pub fn f0(&self, p1: f64, p2: f64) -> Result<f64> {
        let (p1, p2) = (wrap(p1), wrap(p2));
        let key = (p1.to_bits(), p2.to_bits());
        if let Some(&v) = self.cache.lock().expect("cache lock").get(&key) {
            self.stats.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        let v = self.f0_uncached(p1, p2)?;
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= self.options.cache_limit {
            cache.clear();
        }
        cache.insert(key, v);
        Ok(v)
    }

    /// `f(t0, t1, t2) = f0(t1 - t0, t2 - t0)`.
    pub fn f(&self, t0: f64, t1: f64, t2: f64) -> Result<f64> {
        self.f0(t1 - t0, t2 - t0)
    }
}

/// The lifted `f` as a 2-cochain; degenerate triples evaluate to NaN.
pub fn lift(solver: &Arc<Solver>) -> Cochain {
    let s = solver.clone();
    Cochain::new(3, move |x| s.f(x[0], x[1], x[2]).unwrap_or(f64::NAN))
}

/// The primitive `P = I(c) + df` together with its pieces.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub solver: Arc<Solver>,
    pub integral: Cochain,
    pub f: Cochain,
    pub p: Cochain,
}

impl Primitive {
    pub fn new(solver: Arc<Solver>) -> Self {
        let rule = solver.inhomogeneities().rule().clone();
        Self::with_integral_rule(solver, &rule)
    }

    /// `P` with `I(c)` taken under its own rule.
    pub fn with_integral_rule(solver: Arc<Solver>, rule: &crate::quadrature::CircleRule) -> Self {
        let integral = integrate_first(solver.inhomogeneities().cocycle(), rule);
        let f = lift(&solver);
        let df = crate::cochain::differential(&f);
        let p = integral.add(&df);
        Primitive { solver, integral, f, p }
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != 4 {
            return Err(Error::InvalidArgument(format!("P takes 4 points, got {}", x.len())));
        }
        let v = self.p.eval(x);
        if v.is_nan() {
            return Err(Error::Domain(format!("P is undefined at {x:?}")));
        }
        Ok(v)
    }
}

/// The `S_3` action on `(p1, p2) ~ (0, p1, p2)`: `s1` swaps the first two points, `s2` the last two.
pub fn s1(p: (f64, f64)) -> (f64, f64) {
    (wrap(-p.0), wrap(p.1 - p.0))
}

pub fn s2(p: (f64, f64)) -> (f64, f64) {
    (p.1, p.0)
}
