//! Residual checks for every identity the construction relies on.
//!
//! Each check samples seeded points, measures a residual and compares it with
//! a tolerance. With `planted = true` the object under test is replaced by a
//! deliberately broken one; a sound check must then fail.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::characteristics::{s1, s2, Solver};
use crate::cochain::{coboundary_at, integrate_first, lie_derivative_at, min_gap, Cochain, FdStep};
use crate::config::Pipeline;
use crate::error::{Error, Result};
use crate::kernels::{c_check, sharp_flat_at, Inhomogeneities};
use crate::moebius::{wrap, Flow};
use crate::ode::{brute_force_f0, OdeOptions};
use crate::quadrature::CircleRule;
use crate::sampling::Sampler;

/// Size of every planted violation.
pub const PLANT: f64 = 1e-2;
/// Minimum pairwise gap of sampled tuples.
pub const MARGIN: f64 = 0.05;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub config_hash: String,
    pub runtime_ms: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl CheckReport {
    fn new(id: &str, max_residual: f64, tolerance: f64, sample_count: usize, ctx: &Ctx, started: Instant) -> Self {
        CheckReport {
            check_id: id.to_string(),
            // NaN compares false and fails
            passed: max_residual <= tolerance,
            max_residual,
            tolerance,
            sample_count,
            seed: ctx.seed,
            config_hash: ctx.hash.clone(),
            runtime_ms: started.elapsed().as_millis() as u64,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: serde_json::Value) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    /// One-line summary.
    pub fn line(&self) -> String {
        format!(
            "{} {:<26} residual {:.3e} tol {:.3e} n={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.check_id,
            self.max_residual,
            self.tolerance,
            self.sample_count
        )
    }
}

/// `tol = a / N^2 + b h^2 + c / M^4 + floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub floor: f64,
}

impl ToleranceModel {
    pub fn bound(&self, n: f64, h: f64, m: f64) -> f64 {
        self.a / (n * n) + self.b * h * h + self.c / m.powi(4) + self.floor
    }
}

/// Effective number of nodes per circle of a rule.
pub fn resolution(rule: &CircleRule) -> f64 {
    match rule {
        CircleRule::Midpoint(g) => g.node_count() as f64,
        CircleRule::Arc(r) => (r.order() as f64) * (TAU / r.max_piece()).ceil(),
    }
}

/// Constants frozen from convergence runs (`cobound convergence`) on the cup and
/// smooth families, set 2.5 to 10 times above the largest residual seen.
pub fn frozen_model(check_id: &str, piecewise_constant: bool) -> ToleranceModel {
    let (a, b, c, floor) = match (check_id, piecewise_constant) {
        ("kernel_rotation", true) => (0.0, 2.0, 0.0, 1e-10),
        ("kernel_rotation", false) => (1e-3, 2.0, 0.0, 1e-8),
        ("i_flow", true) => (0.0, 20.0, 0.0, 1e-10),
        ("i_flow", false) => (1e-1, 20.0, 0.0, 1e-6),
        ("dcheck_identity", true) => (0.0, 20.0, 0.0, 1e-10),
        ("dcheck_identity", false) => (1e-1, 20.0, 0.0, 1e-6),
        ("frobenius", _) => (0.0, 20.0, 1e3, 1e-9),
        ("f0_alternation", true) => (0.0, 0.0, 0.0, 1e-6),
        ("f0_alternation", false) => (0.0, 0.0, 0.0, 1e-4),
        _ => (0.0, 0.0, 0.0, 1e-12),
    };
    ToleranceModel { a, b, c, floor }
}

struct Ctx {
    seed: u64,
    hash: String,
}

/// Runs checks against a pipeline.
pub struct Verifier<'a> {
    pub pipeline: &'a Pipeline,
    pub planted: bool,
    ctx: Ctx,
}

fn plant_term(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (k, &xk) in x.iter().enumerate() {
        s += (k + 1) as f64 * xk;
    }
    PLANT * (s.sin() + x[0].cos())
}

impl<'a> Verifier<'a> {
    pub fn new(pipeline: &'a Pipeline) -> Self {
        Verifier {
            planted: pipeline.config.negative_control,
            ctx: Ctx {
                seed: pipeline.config.seed,
                hash: pipeline.config.hash(),
            },
            pipeline,
        }
    }

    pub fn planted(mut self, planted: bool) -> Self {
        self.planted = planted;
        self
    }

    fn sampler(&self, id: &str) -> Sampler {
        Sampler::new(self.ctx.seed, id)
    }

    fn samples(&self) -> usize {
        self.pipeline.config.samples
    }

    fn tol(&self, id: &str, default: f64) -> f64 {
        self.pipeline.config.tolerance(id, default)
    }

    fn model_tol(&self, id: &str) -> (f64, ToleranceModel) {
        let model = frozen_model(id, self.pipeline.cocycle.claims.piecewise_constant);
        let n = resolution(&self.pipeline.rule);
        let bound = model.bound(n, self.pipeline.config.fd_step, self.pipeline.config.check_grid as f64);
        (self.tol(id, bound), model)
    }

    fn plant(&self, x: &[f64]) -> f64 {
        if self.planted {
            plant_term(x)
        } else {
            0.0
        }
    }

    fn step(&self) -> FdStep {
        FdStep::new(self.pipeline.config.fd_step, false)
    }

    /// Commutators of the flows on smooth probes against the bracket relations.
    pub fn brackets(&self, h: f64) -> CheckReport {
        let started = Instant::now();
        let id = "brackets";
        let r = bracket_residual(&self.sampler(id), self.samples(), FdStep::new(h, true), self.planted);
        CheckReport::new(id, r, self.tol(id, 1e-5), self.samples(), &self.ctx, started).with("h", json!(h))
    }

    /// Halving `h` without extrapolation should quarter the commutator error.
    pub fn bracket_order(&self, h: f64) -> CheckReport {
        let started = Instant::now();
        let id = "bracket_order";
        let s = self.sampler(id);
        let e1 = bracket_residual(&s, self.samples(), FdStep::new(h, false), false);
        let e2 = bracket_residual(&s, self.samples(), FdStep::new(0.5 * h, false), false);
        let mut ratio = e1 / e2;
        if self.planted {
            ratio *= 2.0;
        }
        let r = (ratio / 4.0).ln().abs();
        CheckReport::new(id, r, self.tol(id, 1.5f64.ln()), self.samples(), &self.ctx, started)
            .with("ratio", json!(ratio))
            .with("observed_order", json!(ratio.log2()))
    }

    /// `c(x) = c(-x)`.
    pub fn conjugation_symmetry(&self) -> CheckReport {
        let started = Instant::now();
        let id = "conjugation_symmetry";
        let s = self.sampler(id);
        let c = &self.pipeline.cocycle.cochain;
        let mut worst: f64 = 0.0;
        let n = self.samples().max(100);
        for k in 0..n as u64 {
            let x = s.admissible(k, 5, MARGIN);
            let y: Vec<f64> = x.iter().map(|&t| wrap(-t)).collect();
            let r = (c.eval(&x) + self.plant(&x) - c.eval(&y) - self.plant(&y)).abs();
            worst = nan_max(worst, r);
        }
        CheckReport::new(id, worst, self.tol(id, 1e-12), n, &self.ctx, started)
    }

    /// `L_K c_sharp + c_flat` and `L_K c_flat - c_sharp`.
    pub fn kernel_rotation(&self) -> CheckReport {
        let started = Instant::now();
        let id = "kernel_rotation";
        let (c, rule) = (&self.pipeline.cocycle.cochain, &self.pipeline.rule);
        let sharp = |x: &[f64]| sharp_flat_at(c, rule, [x[0], x[1], x[2]]).0 + self.plant(x);
        let flat = |x: &[f64]| sharp_flat_at(c, rule, [x[0], x[1], x[2]]).1;
        let s = self.sampler(id);
        let mut worst: f64 = 0.0;
        for k in 0..self.samples() as u64 {
            let x = s.admissible(k, 3, MARGIN);
            let (cs, cf) = (sharp(&x), flat(&x));
            let r1 = lie_derivative_at(Flow::K, &sharp, &x, self.step()) + cf;
            let r2 = lie_derivative_at(Flow::K, &flat, &x, self.step()) - cs;
            worst = nan_max(worst, r1.abs().max(r2.abs()));
        }
        let (tol, model) = self.model_tol(id);
        CheckReport::new(id, worst, tol, self.samples(), &self.ctx, started).with("model", json!(model))
    }

    /// `L_A I(c) + d c_sharp` and `L_N I(c) + d c_flat` on 4-tuples.
    pub fn i_flow(&self) -> CheckReport {
        let started = Instant::now();
        let id = "i_flow";
        let worst = self.i_flow_residual(self.step());
        let (tol, model) = self.model_tol(id);
        CheckReport::new(id, worst, tol, self.samples(), &self.ctx, started).with("model", json!(model))
    }

    pub fn i_flow_residual(&self, step: FdStep) -> f64 {
        let (c, rule) = (&self.pipeline.cocycle.cochain, &self.pipeline.rule);
        let ic = integrate_first(c, rule);
        let ic_eval = |x: &[f64]| ic.eval(x) + self.plant(x);
        let sharp = crate::kernels::c_sharp(c, rule);
        let flat = crate::kernels::c_flat(c, rule);
        let s = self.sampler("i_flow");
        let mut worst: f64 = 0.0;
        for k in 0..self.samples() as u64 {
            let x = s.admissible(k, 4, MARGIN);
            let r1 = lie_derivative_at(Flow::A, &ic_eval, &x, step) + coboundary_at(&sharp, &x);
            let r2 = lie_derivative_at(Flow::N, &ic_eval, &x, step) + coboundary_at(&flat, &x);
            worst = nan_max(worst, r1.abs().max(r2.abs()));
        }
        worst
    }

    /// `L_K c_sharp - L_N c_sharp + L_A c_flat + d c_check` on triples.
    pub fn dcheck_identity(&self) -> CheckReport {
        let started = Instant::now();
        let id = "dcheck_identity";
        let (c, rule) = (&self.pipeline.cocycle.cochain, &self.pipeline.rule);
        let sharp = |x: &[f64]| sharp_flat_at(c, rule, [x[0], x[1], x[2]]).0;
        let flat = |x: &[f64]| sharp_flat_at(c, rule, [x[0], x[1], x[2]]).1;
        let check = c_check(c, rule);
        let planted = self.planted;
        let check = Cochain::new(2, move |x| check.eval(x) + if planted { plant_term(x) } else { 0.0 });
        let s = self.sampler(id);
        let mut worst: f64 = 0.0;
        for k in 0..self.samples() as u64 {
            let x = s.admissible(k, 3, MARGIN);
            let st = self.step();
            let r = lie_derivative_at(Flow::K, &sharp, &x, st) - lie_derivative_at(Flow::N, &sharp, &x, st)
                + lie_derivative_at(Flow::A, &flat, &x, st)
                + coboundary_at(&check, &x);
            worst = nan_max(worst, r.abs());
        }
        let (tol, model) = self.model_tol(id);
        CheckReport::new(id, worst, tol, self.samples(), &self.ctx, started).with("model", json!(model))
    }

    /// `d(L_K v# + vb)`, `d(L_K vb - v#)` and `d(L_K v# - L_N v# + L_A vb - c_check)` on triples.
    pub fn frobenius(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "frobenius";
        let inh = self.pipeline.inhomogeneities()?;
        let v = inh.v().clone();
        let table = inh.table();
        let planted = self.planted;
        let vs = |x: &[f64]| v.eval_unchecked(x[0], x[1]).re;
        let vf = |x: &[f64]| v.eval_unchecked(x[0], x[1]).im + if planted { plant_term(x) } else { 0.0 };
        let st = self.step();
        let w1 = |x: &[f64]| lie_derivative_at(Flow::K, &vs, x, st) + vf(x);
        let w2 = |x: &[f64]| lie_derivative_at(Flow::K, &vf, x, st) - vs(x);
        let w3 = |x: &[f64]| {
            lie_derivative_at(Flow::K, &vs, x, st) - lie_derivative_at(Flow::N, &vs, x, st) + lie_derivative_at(Flow::A, &vf, x, st)
                - table.check_at(x[1] - x[0])
        };
        let d = |w: &dyn Fn(&[f64]) -> f64, x: &[f64]| w(&[x[1], x[2]]) - w(&[x[0], x[2]]) + w(&[x[0], x[1]]);
        let s = self.sampler(id);
        let mut worst = [0.0f64; 3];
        for k in 0..self.samples() as u64 {
            let x = s.admissible(k, 3, MARGIN);
            worst[0] = nan_max(worst[0], d(&w1, &x).abs());
            worst[1] = nan_max(worst[1], d(&w2, &x).abs());
            worst[2] = nan_max(worst[2], d(&w3, &x).abs());
        }
        let (tol, model) = self.model_tol(id);
        let r = worst.iter().copied().fold(0.0, nan_max);
        Ok(CheckReport::new(id, r, tol, self.samples(), &self.ctx, started)
            .with("components", json!(worst))
            .with("model", json!(model)))
    }

    /// `sup |r| <= |c|_inf + 1e-6` on a uniform grid of 1000 points.
    pub fn r_bound(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "r_bound";
        let inh = self.pipeline.inhomogeneities()?;
        let norm = self.pipeline.cocycle.sup_norm;
        let n = 1000;
        let mut sup: f64 = 0.0;
        for j in 0..n {
            let z = TAU * (j as f64 + 0.5) / n as f64;
            sup = nan_max(sup, inh.table().r_at(z).norm());
        }
        if self.planted {
            sup += 2.0 * norm + 1e-3;
        }
        Ok(CheckReport::new(id, sup - norm, self.tol(id, 1e-6), n, &self.ctx, started)
            .with("sup_r", json!(sup))
            .with("sup_c", json!(norm)))
    }

    /// Residual of `(1 - e^{-iz}) r' - i r + c_check(0, z)` at interior points.
    pub fn r_ode(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "r_ode";
        let inh = self.pipeline.inhomogeneities()?;
        let table = inh.table();
        let n = 200;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let z = 0.05 + (TAU - 0.1) * (j as f64 + 0.5) / n as f64;
            let mut r = table.ode_residual(z, 1e-5);
            if self.planted {
                r += 0.01 * table.r_at(z).norm() + PLANT * 1e-3;
            }
            worst = nan_max(worst, r);
        }
        Ok(CheckReport::new(id, worst, self.tol(id, 1e-6), n, &self.ctx, started))
    }

    /// `c_check(0, z) = -c_check(0, 2pi - z)` by direct quadrature.
    pub fn check_profile_odd(&self) -> CheckReport {
        let started = Instant::now();
        let id = "check_profile_odd";
        let (c, rule) = (&self.pipeline.cocycle.cochain, &self.pipeline.rule);
        let s = self.sampler(id);
        let mut worst: f64 = 0.0;
        let n = self.samples().min(20);
        for k in 0..n as u64 {
            let z = if k == 0 { PI } else { s.uniform(k, 0.05, TAU - 0.05) };
            let a = crate::kernels::check_at(c, rule, 0.0, z) + self.plant(&[z]);
            let b = crate::kernels::check_at(c, rule, 0.0, TAU - z) + self.plant(&[TAU - z]);
            worst = nan_max(worst, (a + b).abs());
        }
        CheckReport::new(id, worst, self.tol(id, 1e-9), n, &self.ctx, started)
    }

    fn inh_eval(&self, inh: &Inhomogeneities, p1: f64, p2: f64) -> (f64, f64) {
        let (a, b) = inh.eval(p1, p2);
        let e = self.plant(&[p1, p2]);
        (a + e, b + e)
    }

    /// `F_sharp(phi, 2pi - phi) = 0`.
    pub fn f_sharp_antidiagonal(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "f_sharp_antidiagonal";
        let inh = self.pipeline.inhomogeneities()?;
        let n = 200;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let phi = 0.01 + (TAU - 0.02) * (j as f64 + 0.5) / n as f64;
            if (phi - PI).abs() < 1e-3 {
                continue;
            }
            worst = nan_max(worst, self.inh_eval(&inh, phi, TAU - phi).0.abs());
        }
        Ok(CheckReport::new(id, worst, self.tol(id, 1e-6), n, &self.ctx, started))
    }

    /// `F_flat` symmetric and `F_sharp` antisymmetric under `(p1, p2) -> (-p2, -p1)`.
    pub fn inhomogeneity_symmetry(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "inhomogeneity_symmetry";
        let inh = self.pipeline.inhomogeneities()?;
        let s = self.sampler(id);
        let n = self.samples().max(50);
        let mut worst: f64 = 0.0;
        for k in 0..n as u64 {
            let x = s.admissible(k, 3, MARGIN);
            let (p1, p2) = (wrap(x[1] - x[0]), wrap(x[2] - x[0]));
            let (a, b) = self.inh_eval(&inh, p1, p2);
            let (c, d) = self.inh_eval(&inh, wrap(-p2), wrap(-p1));
            worst = nan_max(worst, (a + c).abs().max((b - d).abs()));
        }
        Ok(CheckReport::new(id, worst, self.tol(id, 1e-6), n, &self.ctx, started))
    }

    /// `f0(s p) = -f0(p)` for the transpositions `s1`, `s2`.
    pub fn f0_alternation(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "f0_alternation";
        let solver = self.pipeline.solver()?;
        let s = self.sampler(id);
        let n = self.samples();
        let mut worst: f64 = 0.0;
        for k in 0..n as u64 {
            let x = s.admissible(k, 3, MARGIN);
            let p = (wrap(x[1] - x[0]), wrap(x[2] - x[0]));
            let v = solver.f0(p.0, p.1)? + self.plant(&[p.0, p.1]);
            for q in [s1(p), s2(p)] {
                let u = solver.f0(q.0, q.1)? + self.plant(&[q.0, q.1]);
                worst = nan_max(worst, (u + v).abs());
            }
        }
        let (tol, model) = self.model_tol(id);
        Ok(CheckReport::new(id, worst, tol, n, &self.ctx, started).with("model", json!(model)))
    }

    /// Closed-form characteristic integration against a Dormand-Prince flow of the fields.
    pub fn f0_oracle(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "f0_oracle";
        let solver = self.pipeline.solver()?;
        let inh = solver.inhomogeneities();
        let init = self.pipeline.config.effective_init();
        let init = if self.planted { (init.0 + PLANT, init.1) } else { init };
        let s = self.sampler(id);
        let n = self.samples().max(50);
        let mut worst: f64 = 0.0;
        for k in 0..n as u64 {
            let x = s.admissible(k, 3, 0.1);
            let (p1, p2) = (wrap(x[1] - x[0]), wrap(x[2] - x[0]));
            let a = solver.f0_uncached(p1, p2)?;
            let b = brute_force_f0(inh, init, p1, p2, &OdeOptions::default())?;
            worst = nan_max(worst, (a - b).abs());
        }
        Ok(CheckReport::new(id, worst, self.tol(id, 1e-6), n, &self.ctx, started))
    }

    /// `L_A f0 = F_sharp` and `L_N f0 = F_flat` by central differences on the slice `theta0 = 0`.
    pub fn pde_residual(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "pde_residual";
        let solver = self.pipeline.solver()?;
        let inh = solver.inhomogeneities();
        let h = 1e-3;
        let s = self.sampler(id);
        let n = self.samples();
        let mut worst: f64 = 0.0;
        for k in 0..n as u64 {
            let x = s.admissible(k, 3, 0.1);
            let (p1, p2) = (wrap(x[1] - x[0]), wrap(x[2] - x[0]));
            let (fs, ff) = self.inh_eval(inh, p1, p2);
            for (flow, target) in [(Flow::A, fs), (Flow::N, ff)] {
                let up = solver.f0_uncached(flow.apply(h, p1), flow.apply(h, p2))?;
                let down = solver.f0_uncached(flow.apply(-h, p1), flow.apply(-h, p2))?;
                worst = nan_max(worst, ((up - down) / (2.0 * h) - target).abs());
            }
        }
        Ok(CheckReport::new(id, worst, self.tol(id, 1e-3), n, &self.ctx, started).with("h", json!(h)))
    }

    /// `f0(phi, 2pi - phi) = init` along the antidiagonal.
    pub fn antidiagonal_vanishing(&self) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "antidiagonal_vanishing";
        let solver = self.pipeline.solver()?;
        let init = self.pipeline.config.effective_init();
        let n = 100;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let phi = 1e-3 + (TAU - 2e-3) * (j as f64 + 0.5) / n as f64;
            if (phi - PI).abs() < 1e-3 {
                continue;
            }
            let base = if phi < PI { init.0 } else { init.1 };
            let v = solver.f0(phi, TAU - phi)? + self.plant(&[phi]);
            worst = nan_max(worst, (v - base).abs());
        }
        Ok(CheckReport::new(id, worst, self.tol(id, 1e-6), n, &self.ctx, started))
    }

    /// `sup |f0|` over nested sample sets at distance `eps_l` from the singular set.
    pub fn boundedness_scan(&self, levels: &[f64], per_family: usize) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "boundedness_scan";
        let solver = self.pipeline.solver()?;
        let scan = scan_levels(&solver, levels, per_family, self.planted)?;
        let sups: Vec<f64> = scan.iter().map(|l| l.sup).collect();
        let k = sups.len();
        let change = if k >= 2 {
            let (a, b) = (sups[k - 2], sups[k - 1]);
            if a == 0.0 && b == 0.0 {
                0.0
            } else {
                (b - a).abs() / a.abs().max(b.abs())
            }
        } else {
            f64::NAN
        };
        let samples = scan.iter().map(|l| l.points).sum();
        Ok(CheckReport::new(id, change, self.tol(id, 0.1), samples, &self.ctx, started)
            .with("levels", json!(levels))
            .with("sups", json!(sups))
            .with("argmax", json!(scan.iter().map(|l| l.argmax).collect::<Vec<_>>()))
            .with(
                "monotone_doubling",
                json!(k >= 3 && sups[k - 1] >= 2.0 * sups[k - 2] && sups[k - 2] >= 2.0 * sups[k - 3]),
            ))
    }

    /// `max |dP - c|` on 5-tuples.
    pub fn coboundary_residual(&self, samples: usize, tolerance: f64) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "coboundary_residual";
        let prim = self.pipeline.primitive()?;
        let c = &self.pipeline.cocycle.cochain;
        let planted = self.planted;
        let p = prim.p.clone();
        let p = Cochain::new(4, move |x| p.eval(x) + if planted { plant_term(x) } else { 0.0 });
        let s = self.sampler(id);
        let mut worst: f64 = 0.0;
        for k in 0..samples as u64 {
            let x = s.admissible(k, 5, MARGIN);
            worst = nan_max(worst, (coboundary_at(&p, &x) - c.eval(&x)).abs());
        }
        Ok(CheckReport::new(id, worst, self.tol(id, tolerance), samples, &self.ctx, started))
    }

    /// `max |P(g x) - P(x)|` with `g = k a n`, parameters bounded by `bound`.
    pub fn g_invariance(&self, samples: usize, bound: f64, tolerance: f64) -> Result<CheckReport> {
        let started = Instant::now();
        let id = "g_invariance";
        let prim = self.pipeline.primitive()?;
        let s = self.sampler(id);
        let mut worst: f64 = 0.0;
        let (mut used, mut index) = (0, 0u64);
        while used < samples {
            let x = s.admissible(index, 4, MARGIN);
            let g = s.group_element(index, bound);
            index += 1;
            let gx = g.act_tuple(&x);
            if min_gap(&gx) < MARGIN {
                continue;
            }
            used += 1;
            let a = prim.try_eval(&gx)? + self.plant(&gx);
            let b = prim.try_eval(&x)? + self.plant(&x);
            worst = nan_max(worst, (a - b).abs());
        }
        Ok(CheckReport::new(id, worst, self.tol(id, tolerance), samples, &self.ctx, started)
            .with("group_bound", json!(bound))
            .with("draws", json!(index)))
    }

    /// Runs one check by id with its default parameters.
    pub fn run(&self, id: &str) -> Result<CheckReport> {
        let n = self.samples();
        Ok(match id {
            "brackets" => self.brackets(1e-3),
            "bracket_order" => self.bracket_order(1e-2),
            "conjugation_symmetry" => self.conjugation_symmetry(),
            "kernel_rotation" => self.kernel_rotation(),
            "i_flow" => self.i_flow(),
            "dcheck_identity" => self.dcheck_identity(),
            "check_profile_odd" => self.check_profile_odd(),
            "r_bound" => self.r_bound()?,
            "r_ode" => self.r_ode()?,
            "frobenius" => self.frobenius()?,
            "f_sharp_antidiagonal" => self.f_sharp_antidiagonal()?,
            "inhomogeneity_symmetry" => self.inhomogeneity_symmetry()?,
            "f0_alternation" => self.f0_alternation()?,
            "antidiagonal_vanishing" => self.antidiagonal_vanishing()?,
            "pde_residual" => self.pde_residual()?,
            "f0_oracle" => self.f0_oracle()?,
            "boundedness_scan" => self.boundedness_scan(&DEFAULT_LEVELS, 24)?,
            "coboundary_residual" => self.coboundary_residual(n, 1e-3)?,
            "g_invariance" => self.g_invariance(n, 2.0, 1e-3)?,
            other => return Err(Error::InvalidArgument(format!("unknown check `{other}`"))),
        })
    }

    /// Everything `cobound verify` runs, in order.
    pub fn all(&self) -> Result<Vec<CheckReport>> {
        CHECK_IDS.iter().map(|id| self.run(id)).collect()
    }
}

/// Check ids in run order.
pub const CHECK_IDS: [&str; 19] = [
    "brackets",
    "bracket_order",
    "conjugation_symmetry",
    "kernel_rotation",
    "i_flow",
    "dcheck_identity",
    "check_profile_odd",
    "r_bound",
    "r_ode",
    "frobenius",
    "f_sharp_antidiagonal",
    "inhomogeneity_symmetry",
    "f0_alternation",
    "antidiagonal_vanishing",
    "pde_residual",
    "f0_oracle",
    "boundedness_scan",
    "coboundary_residual",
    "g_invariance",
];

/// Distances to the singular set used by the default scan.
pub const DEFAULT_LEVELS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Result of one scan level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanLevel {
    pub eps: f64,
    pub sup: f64,
    pub argmax: (f64, f64),
    pub points: usize,
}

/// Probe points at distance `eps` from `{p_i in {0, 2pi}}` and the diagonal:
/// the segments `(2pi/3, xi)` and `(4pi/3, xi)`, the lines `p1 = eps`,
/// `p2 = 2pi - eps`, and the line `p2 = p1 + eps`.
pub fn scan_points(eps: f64, per_family: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let m = per_family.max(2);
    for j in 0..m {
        let u = j as f64 / (m - 1) as f64;
        let xi = eps + u * (TAU - 2.0 * eps);
        for base in [TAU / 3.0, 2.0 * TAU / 3.0] {
            if (xi - base).abs() >= eps {
                out.push((base, xi));
            }
        }
        let span = eps + u * (TAU - 3.0 * eps);
        out.push((eps, span + eps));
        out.push((span + eps, eps));
        out.push((span, TAU - eps));
        out.push((TAU - eps, span));
        out.push((span, span + eps));
        out.push((span + eps, span));
    }
    out.retain(|&(a, b)| {
        let d = |x: f64| x.min(TAU - x);
        d(a) >= 0.999 * eps && d(b) >= 0.999 * eps && (a - b).abs() >= 0.999 * eps
    });
    out
}

/// Sup of `|f0|` over the union of probe sets down to each level.
pub fn scan_levels(solver: &Solver, levels: &[f64], per_family: usize, planted: bool) -> Result<Vec<ScanLevel>> {
    let mut out: Vec<ScanLevel> = Vec::new();
    let (mut sup, mut argmax, mut points) = (0.0f64, (f64::NAN, f64::NAN), 0);
    for &eps in levels {
        for (p1, p2) in scan_points(eps, per_family) {
            let mut v = solver.f0(p1, p2)?.abs();
            if planted {
                // a logarithmic blow-up towards the singular set
                let d = p1.min(TAU - p1).min(p2.min(TAU - p2)).min((p1 - p2).abs());
                v += PLANT * 100.0 * (1.0 / d).ln();
            }
            points += 1;
            if v > sup || v.is_nan() {
                sup = v;
                argmax = (p1, p2);
            }
        }
        out.push(ScanLevel { eps, sup, argmax, points });
    }
    Ok(out)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

struct Probe {
    value: fn(&[f64]) -> f64,
    grad: fn(&[f64]) -> [f64; 3],
}

const PROBES: [Probe; 2] = [
    Probe {
        value: |x| x[0].sin() * x[2].cos(),
        grad: |x| [x[0].cos() * x[2].cos(), 0.0, -x[0].sin() * x[2].sin()],
    },
    Probe {
        value: |x| (x[0] - 2.0 * x[1]).cos() + (x[1] + x[2]).sin(),
        grad: |x| {
            let a = (x[0] - 2.0 * x[1]).sin();
            let b = (x[1] + x[2]).cos();
            [-a, 2.0 * a + b, b]
        },
    },
];

/// Field coefficient of a combination `sum w_i L_i`.
fn combo_field(w: [f64; 3], t: f64) -> f64 {
    w[0] * Flow::K.field(t) + w[1] * Flow::A.field(t) + w[2] * Flow::N.field(t)
}

fn combo_derivative(w: [f64; 3], q: &dyn Fn(&[f64]) -> f64, x: &[f64], step: FdStep) -> f64 {
    let mut acc = 0.0;
    for (wi, flow) in w.iter().zip(Flow::ALL) {
        if *wi != 0.0 {
            acc += wi * lie_derivative_at(flow, q, x, step);
        }
    }
    acc
}

/// Max over probes, samples and the three relations of `|[L_X, L_Y] q - L_Z q|`,
/// with the commutator by nested differences and `L_Z q` from the exact gradient.
fn bracket_residual(s: &Sampler, samples: usize, step: FdStep, planted: bool) -> f64 {
    let k_minus_n = if planted { [1.0, 0.0, 1.0] } else { [1.0, 0.0, -1.0] };
    // (X, Y, Z) with [L_X, L_Y] = L_Z; weights on (K, A, N)
    let relations = [
        ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], k_minus_n),
        ([1.0, 0.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]),
        ([0.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [1.0, 0.0, 0.0]),
    ];
    let mut worst: f64 = 0.0;
    for k in 0..samples as u64 {
        let x = s.admissible(k, 3, 1e-2);
        for probe in &PROBES {
            let q = |y: &[f64]| (probe.value)(y);
            for (wx, wy, wz) in relations {
                let ly = |y: &[f64]| combo_derivative(wy, &q, y, step);
                let lx = |y: &[f64]| combo_derivative(wx, &q, y, step);
                let comm = combo_derivative(wx, &ly, &x, step) - combo_derivative(wy, &lx, &x, step);
                let g = (probe.grad)(&x);
                let exact: f64 = (0..3).map(|i| combo_field(wz, x[i]) * g[i]).sum();
                worst = nan_max(worst, (comm - exact).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::zoo::CocycleSpec;

    fn zero_pipeline() -> Pipeline {
        Pipeline::new(RunConfig {
            cocycle: CocycleSpec::Zero,
            check_grid: 16,
            samples: 5,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn brackets_pass_and_planted_brackets_fail() {
        let p = zero_pipeline();
        let v = Verifier::new(&p);
        assert!(v.brackets(1e-3).passed);
        assert!(v.bracket_order(1e-2).passed, "{:?}", v.bracket_order(1e-2));
        let v = v.planted(true);
        assert!(!v.brackets(1e-3).passed);
        assert!(!v.bracket_order(1e-2).passed);
    }

    #[test]
    fn constant_probe_has_no_commutator() {
        let q = |_: &[f64]| 3.0;
        let x = [0.1, 1.0, 2.0];
        let st = FdStep::new(1e-3, true);
        let ly = |y: &[f64]| combo_derivative([0.0, 1.0, 0.0], &q, y, st);
        assert_eq!(combo_derivative([1.0, 0.0, 0.0], &ly, &x, st), 0.0);
    }

    #[test]
    fn zero_cocycle_reports_are_exact() {
        let p = zero_pipeline();
        let v = Verifier::new(&p);
        for r in [v.conjugation_symmetry(), v.kernel_rotation(), v.i_flow(), v.check_profile_odd()] {
            assert_eq!(r.max_residual, 0.0, "{}", r.check_id);
            assert!(r.passed);
        }
        let r = v.coboundary_residual(5, 1e-12).unwrap();
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn planted_controls_fail_on_zero_cocycle() {
        let p = zero_pipeline();
        let v = Verifier::new(&p).planted(true);
        assert!(!v.conjugation_symmetry().passed);
        assert!(!v.kernel_rotation().passed);
        assert!(!v.i_flow().passed);
        assert!(!v.r_bound().unwrap().passed);
        assert!(!v.coboundary_residual(5, 1e-3).unwrap().passed);
    }

    #[test]
    fn report_serialises_with_schema_fields() {
        let p = zero_pipeline();
        let r = Verifier::new(&p).conjugation_symmetry();
        let j = serde_json::to_value(&r).unwrap();
        for key in [
            "check_id",
            "passed",
            "max_residual",
            "tolerance",
            "sample_count",
            "seed",
            "config_hash",
            "runtime_ms",
        ] {
            assert!(j.get(key).is_some(), "{key}");
        }
        let nan = CheckReport {
            max_residual: f64::NAN,
            ..r
        };
        assert!(!(nan.max_residual <= nan.tolerance));
    }

    #[test]
    fn scan_points_respect_distance() {
        for &eps in &DEFAULT_LEVELS {
            let pts = scan_points(eps, 11);
            assert!(!pts.is_empty());
            for (a, b) in pts {
                assert!(a > 0.0 && a < TAU && b > 0.0 && b < TAU && a != b);
            }
        }
    }
}
