//! Real functions on tuples of circle points, and the operators acting on them.

use std::fmt;
use std::sync::Arc;

use crate::moebius::{angular_distance, Flow, GroupElement};
use crate::quadrature::CircleRule;

/// Largest arity any evaluator in this crate is asked to handle.
pub const MAX_ARITY: usize = 8;

type Eval = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// An everywhere-defined representative of a function on `(S^1)^n`.
#[derive(Clone)]
pub struct Cochain {
    arity: usize,
    eval: Arc<Eval>,
    sup_bound: Option<f64>,
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cochain")
            .field("arity", &self.arity)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl Cochain {
    pub fn new<F>(arity: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(arity >= 1 && arity <= MAX_ARITY, "arity {arity} out of range");
        Cochain {
            arity,
            eval: Arc::new(f),
            sup_bound: None,
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    pub fn constant(arity: usize, value: f64) -> Self {
        Cochain::new(arity, move |_| value).with_bound(value.abs())
    }

    pub fn zero(arity: usize) -> Self {
        Cochain::constant(arity, 0.0)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    /// Evaluate at a tuple of angles; panics on an arity mismatch.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        (self.eval)(x)
    }

    pub fn scale(&self, k: f64) -> Cochain {
        let q = self.clone();
        let out = Cochain::new(self.arity, move |x| k * q.eval(x));
        match self.sup_bound {
            Some(b) => out.with_bound(b * k.abs()),
            None => out,
        }
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        assert_eq!(self.arity, other.arity);
        let (p, q) = (self.clone(), other.clone());
        let out = Cochain::new(self.arity, move |x| p.eval(x) + q.eval(x));
        match (self.sup_bound, other.sup_bound) {
            (Some(a), Some(b)) => out.with_bound(a + b),
            _ => out,
        }
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        self.add(&other.scale(-1.0))
    }

    /// `x -> q(g.x)`.
    pub fn translate(&self, g: &GroupElement) -> Cochain {
        let (q, g) = (self.clone(), *g);
        let n = self.arity;
        let out = Cochain::new(n, move |x| {
            let mut y = [0.0; MAX_ARITY];
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = g.act(*xi);
            }
            q.eval(&y[..n])
        });
        match self.sup_bound {
            Some(b) => out.with_bound(b),
            None => out,
        }
    }
}

/// Alternating sum over omitted slots, evaluated directly.
#[inline]
pub fn coboundary_at(q: &Cochain, x: &[f64]) -> f64 {
    let n = x.len();
    let mut face = [0.0; MAX_ARITY];
    let mut acc = 0.0;
    for j in 0..n {
        let mut k = 0;
        for (i, &xi) in x.iter().enumerate() {
            if i != j {
                face[k] = xi;
                k += 1;
            }
        }
        let term = q.eval(&face[..n - 1]);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// The homogeneous differential `dq(x_0..x_n) = sum_j (-1)^j q(.. x_j omitted ..)`.
pub fn differential(q: &Cochain) -> Cochain {
    let n = q.arity();
    let inner = q.clone();
    let out = Cochain::new(n + 1, move |x| coboundary_at(&inner, x));
    match q.sup_bound() {
        Some(b) => out.with_bound((n + 1) as f64 * b),
        None => out,
    }
}

/// Average over the first slot: `I(c)(x_1..x_n) = E_eta c(eta, x_1..x_n)`.
///
/// The arguments serve as breakpoints for breakpoint-aware rules.
pub fn integrate_first(c: &Cochain, rule: &CircleRule) -> Cochain {
    let n = c.arity();
    assert!(n >= 2, "integrate_first needs arity at least 2");
    let (c2, rule) = (c.clone(), rule.clone());
    let out = Cochain::new(n - 1, move |x| {
        let mut y = [0.0; MAX_ARITY];
        y[1..n].copy_from_slice(x);
        rule.average(x, |eta| {
            let mut z = y;
            z[0] = eta;
            c2.eval(&z[..n])
        })
    });
    match c.sup_bound() {
        Some(b) => out.with_bound(b),
        None => out,
    }
}

/// All permutations of `0..n` with their signs, in Heap's order.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![(perm.clone(), 1.0)];
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            out.push((perm.clone(), sign));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// `(1/n!) sum_sigma sgn(sigma) q(x_sigma(0), ..)`.
pub fn alternate(q: &Cochain) -> Cochain {
    let n = q.arity();
    let perms = Arc::new(signed_permutations(n));
    let inner = q.clone();
    let norm = 1.0 / perms.len() as f64;
    let out = Cochain::new(n, move |x| {
        let mut y = [0.0; MAX_ARITY];
        let mut acc = 0.0;
        for (p, s) in perms.iter() {
            for (k, &pk) in p.iter().enumerate() {
                y[k] = x[pk];
            }
            acc += s * inner.eval(&y[..n]);
        }
        acc * norm
    });
    match q.sup_bound() {
        Some(b) => out.with_bound(b),
        None => out,
    }
}

/// Finite-difference scheme for Lie derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdStep {
    pub h: f64,
    /// Combine steps `h` and `h/2` to cancel the `h^2` term.
    pub richardson: bool,
}

impl FdStep {
    pub const DEFAULT: FdStep = FdStep {
        h: 1e-4,
        richardson: false,
    };

    pub fn new(h: f64, richardson: bool) -> Self {
        FdStep { h, richardson }
    }
}

impl Default for FdStep {
    fn default() -> Self {
        FdStep::DEFAULT
    }
}

fn central(flow: Flow, q: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let n = x.len();
    let mut plus = [0.0; MAX_ARITY];
    let mut minus = [0.0; MAX_ARITY];
    for i in 0..n {
        plus[i] = flow.apply(h, x[i]);
        minus[i] = flow.apply(-h, x[i]);
    }
    (q(&plus[..n]) - q(&minus[..n])) / (2.0 * h)
}

/// Derivative of `u -> q(flow_u . x)` at `u = 0` by central differences.
pub fn lie_derivative_at(flow: Flow, q: &dyn Fn(&[f64]) -> f64, x: &[f64], step: FdStep) -> f64 {
    let d1 = central(flow, q, x, step.h);
    if !step.richardson {
        return d1;
    }
    let d2 = central(flow, q, x, 0.5 * step.h);
    (4.0 * d2 - d1) / 3.0
}

/// Lie derivative along the diagonal flow of `K`, `A` or `N`.
pub fn lie_derivative(flow: Flow, q: &Cochain, step: FdStep) -> Cochain {
    let inner = q.clone();
    Cochain::new(q.arity(), move |x| lie_derivative_at(flow, &|y: &[f64]| inner.eval(y), x, step))
}

/// Smallest pairwise angular distance in a tuple.
pub fn min_gap(x: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            best = best.min(angular_distance(x[i], x[j]));
        }
    }
    best
}

/// Maximum of a residual over samples, with the number of samples skipped.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residual {
    pub max: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

impl Residual {
    fn push(&mut self, r: f64) {
        self.evaluated += 1;
        // NaN is reported, never hidden
        if r.is_nan() || r > self.max {
            self.max = r;
        }
    }
}

/// `max |dc|` over samples whose points are at least `margin` apart.
pub fn cocycle_residual(c: &Cochain, samples: &[Vec<f64>], margin: f64) -> Residual {
    let mut out = Residual::default();
    for x in samples {
        assert_eq!(x.len(), c.arity() + 1);
        if min_gap(x) < margin {
            out.skipped += 1;
            continue;
        }
        out.push(coboundary_at(c, x).abs());
    }
    if out.skipped > 0 {
        log::debug!("cocycle_residual skipped {} samples near the diagonal", out.skipped);
    }
    out
}

/// `max |q(g.x) - q(x)|` over all pairs of elements and admissible samples.
pub fn invariance_residual(q: &Cochain, elements: &[GroupElement], samples: &[Vec<f64>], margin: f64) -> Residual {
    let mut out = Residual::default();
    for x in samples {
        if min_gap(x) < margin {
            out.skipped += 1;
            continue;
        }
        let base = q.eval(x);
        for g in elements {
            let gx = g.act_tuple(x);
            if min_gap(&gx) < margin {
                out.skipped += 1;
                continue;
            }
            out.push((q.eval(&gx) - base).abs());
        }
    }
    if out.skipped > 0 {
        log::debug!("invariance_residual skipped {} samples near the diagonal", out.skipped);
    }
    out
}
