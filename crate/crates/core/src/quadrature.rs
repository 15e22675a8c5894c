//! Quadrature rules for averages over the circle and for 1-D path integrals.
//!
//! All circle rules are normalised to the rotation-invariant probability
//! measure, so weights sum to one. Sums are accumulated in node order.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::moebius::wrap;

/// Uniform midpoint grid `theta_j = 2 pi (j + 1/2) / N`, weights `1/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn uniform(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidArgument("grid needs at least one node".into()));
        }
        let n = node_count as f64;
        let nodes = (0..node_count).map(|j| TAU * (j as f64 + 0.5) / n).collect();
        let weights = vec![1.0 / n; node_count];
        Ok(QuadratureGrid { nodes, weights })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_j w_j f(theta_j)` in index order.
    pub fn average<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x);
        }
        acc
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_m` from the Chebyshev-like initial guesses.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("Gauss-Legendre order must be positive".into()));
        }
        let m = order;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre on the circle, split at caller-supplied breakpoints.
///
/// Every arc between consecutive breakpoints is cut into pieces no longer than
/// `max_piece` and each piece gets `order` nodes. Integrands that are smooth
/// between breakpoints, including piecewise constant ones, are integrated to
/// high accuracy independently of where the breakpoints fall.
///
/// Integrands that vary on the scale of the gap between two close breakpoints
/// are handled by grading: next to a short arc, pieces start at that arc's
/// length and grow geometrically by `grading`. Grading is off by default.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcRule {
    gl: GaussLegendre,
    max_piece: f64,
    grading: f64,
    min_piece: f64,
}

impl ArcRule {
    pub fn new(order: usize, max_piece: f64) -> Result<Self> {
        if !(max_piece > 0.0 && max_piece.is_finite()) {
            return Err(Error::InvalidArgument(format!("max_piece = {max_piece}")));
        }
        Ok(ArcRule {
            gl: GaussLegendre::new(order)?,
            max_piece,
            grading: 0.0,
            min_piece: 0.0,
        })
    }

    /// Growth ratio of graded pieces; values `<= 1` turn grading off.
    pub fn with_grading(mut self, grading: f64) -> Self {
        self.grading = grading;
        self
    }

    /// Graded pieces are never shorter than this.
    pub fn with_min_piece(mut self, min_piece: f64) -> Self {
        self.min_piece = min_piece;
        self
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn min_piece(&self) -> f64 {
        self.min_piece
    }

    pub fn order(&self) -> usize {
        self.gl.order()
    }

    pub fn max_piece(&self) -> f64 {
        self.max_piece
    }

    /// Append `(theta, weight)` pairs for the normalised circle measure to `out`.
    pub fn nodes_into(&self, breaks: &[f64], out: &mut Vec<(f64, f64)>) {
        let mut buf = [0.0f64; 16];
        let mut heap = Vec::new();
        let cuts: &mut [f64] = if breaks.len() <= buf.len() {
            for (c, &b) in buf.iter_mut().zip(breaks) {
                *c = wrap(b);
            }
            &mut buf[..breaks.len().max(1)]
        } else {
            heap.extend(breaks.iter().map(|&b| wrap(b)));
            &mut heap
        };
        cuts.sort_unstable_by(|a, b| a.total_cmp(b));
        let mut k = 0;
        for i in 0..cuts.len() {
            if k == 0 || (cuts[i] - cuts[k - 1]).abs() >= 1e-15 {
                cuts[k] = cuts[i];
                k += 1;
            }
        }
        let cuts = &cuts[..k];
        let arc_len = |i: usize| {
            let a = cuts[i % k];
            let b = if i % k + 1 < k { cuts[i % k + 1] } else { cuts[0] + TAU };
            b - a
        };
        for i in 0..k {
            let a = cuts[i];
            let len = arc_len(i);
            if len <= 0.0 {
                continue;
            }
            // pieces next to a short neighbouring arc start at that arc's length and double
            let left = arc_len(i + k - 1).min(len).max(self.min_piece);
            let right = arc_len(i + 1).min(len).max(self.min_piece);
            let mid = a + 0.5 * len;
            let mut lo = a;
            let mut step = left;
            while self.grading > 1.0 && step < self.max_piece && lo + step < mid {
                self.push_piece(lo, lo + step, out);
                lo += step;
                step *= self.grading;
            }
            let mut hi = a + len;
            let mut step = right;
            while self.grading > 1.0 && step < self.max_piece && hi - step > mid {
                self.push_piece(hi - step, hi, out);
                hi -= step;
                step *= self.grading;
            }
            let pieces = ((hi - lo) / self.max_piece).ceil().max(1.0) as usize;
            let h = (hi - lo) / pieces as f64;
            for p in 0..pieces {
                self.push_piece(lo + h * p as f64, lo + h * (p + 1) as f64, out);
            }
        }
    }

    #[inline]
    fn push_piece(&self, lo: f64, hi: f64, out: &mut Vec<(f64, f64)>) {
        let half = 0.5 * (hi - lo);
        let mid = lo + half;
        for (&x, &w) in self.gl.nodes.iter().zip(&self.gl.weights) {
            out.push((wrap(mid + half * x), w * half / TAU));
        }
    }

    pub fn nodes(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.nodes_into(breaks, &mut out);
        out
    }
}

/// A rule for averages over the circle.
#[derive(Clone, Debug, PartialEq)]
pub enum CircleRule {
    /// Uniform midpoint grid; ignores breakpoints.
    Midpoint(QuadratureGrid),
    /// Breakpoint-adapted composite Gauss-Legendre.
    Arc(ArcRule),
}

impl CircleRule {
    pub fn midpoint(n: usize) -> Result<Self> {
        Ok(CircleRule::Midpoint(QuadratureGrid::uniform(n)?))
    }

    pub fn arc(order: usize, max_piece: f64) -> Result<Self> {
        Ok(CircleRule::Arc(ArcRule::new(order, max_piece)?))
    }

    /// Replace the contents of `out` with the nodes for these breakpoints.
    pub fn fill(&self, breaks: &[f64], out: &mut Vec<(f64, f64)>) {
        out.clear();
        match self {
            CircleRule::Midpoint(g) => out.extend(g.nodes.iter().copied().zip(g.weights.iter().copied())),
            CircleRule::Arc(r) => r.nodes_into(breaks, out),
        }
    }

    /// `(theta, weight)` pairs, given the points where the integrand may jump.
    pub fn nodes(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        match self {
            CircleRule::Midpoint(g) => g.nodes.iter().copied().zip(g.weights.iter().copied()).collect(),
            CircleRule::Arc(r) => r.nodes(breaks),
        }
    }

    pub fn average<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        match self {
            CircleRule::Midpoint(g) => g.average(f),
            CircleRule::Arc(r) => {
                let mut acc = 0.0;
                for (x, w) in r.nodes(breaks) {
                    acc += w * f(x);
                }
                acc
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CircleRule::Midpoint(g) => format!("midpoint(N={})", g.node_count()),
            CircleRule::Arc(r) => format!(
                "arc(order={}, max_piece={}, grading={}, min_piece={})",
                r.order(),
                r.max_piece(),
                r.grading(),
                r.min_piece()
            ),
        }
    }
}

// Kronrod 15-point extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// False when the subdivision budget ran out before the tolerance was met.
    pub converged: bool,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7, 15) on `[a, b]` with an absolute tolerance.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `abs_tol` or `max_intervals` is reached.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Integral {
    if a == b {
        return Integral {
            converged: true,
            ..Default::default()
        };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut pieces = vec![(a, b, v, e)];
    let mut total_err = e;
    while total_err > abs_tol && pieces.len() < max_intervals {
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
        total_err = pieces.iter().map(|p| p.3).sum();
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    Integral {
        value: pieces.iter().map(|p| p.2).sum(),
        error: total_err,
        evaluations,
        converged: total_err <= abs_tol,
    }
}

/// Pairwise summation with a tree shape fixed by the slice length alone.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
