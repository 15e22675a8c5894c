//! Kernels derived from a 5-cocycle `c`:
//!
//! ```text
//! c_sharp(x1,x2,x3) = E_{eta,phi} cos(phi) c(eta, phi, x1, x2, x3)
//! c_flat (x1,x2,x3) = E_{eta,phi} sin(phi) c(eta, phi, x1, x2, x3)
//! c_check(x1,x2)    = E_{eta,phi,psi} sin(eta - phi) c(eta, phi, psi, x1, x2)
//! r(phi)            = -1/2 (1 - e^{i phi}) int_pi^phi c_check(0, z) / (1 - cos z) dz
//! v(t1, t2)         = e^{i t1} r(t2 - t1)
//! ```
//!
//! and the inhomogeneities `F_sharp = c_sharp(0,.,.) + Re (dv)_0`,
//! `F_flat = c_flat(0,.,.) + Im (dv)_0` on the two-variable domain.

use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::moebius::wrap;
use crate::quadrature::{CircleRule, GaussLegendre};

thread_local! {
    static BUFFERS: std::cell::RefCell<Vec<Vec<(f64, f64)>>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Borrow `k` scratch node buffers for the duration of `f`.
fn with_buffers<R>(k: usize, f: impl FnOnce(&mut [Vec<(f64, f64)>]) -> R) -> R {
    let mut bufs = BUFFERS.with(|b| std::mem::take(&mut *b.borrow_mut()));
    while bufs.len() < k {
        bufs.push(Vec::with_capacity(128));
    }
    let out = f(&mut bufs[..k]);
    BUFFERS.with(|b| *b.borrow_mut() = bufs);
    out
}

/// `(c_sharp(x), c_flat(x))` at a triple, sharing the cocycle evaluations.
pub fn sharp_flat_at(c: &Cochain, rule: &CircleRule, x: [f64; 3]) -> (f64, f64) {
    with_buffers(2, |bufs| {
        let (outer, rest) = bufs.split_at_mut(1);
        let (outer, inner) = (&mut outer[0], &mut rest[0]);
        rule.fill(&x, outer);
        let mut z = [0.0, 0.0, x[0], x[1], x[2]];
        let (mut sharp, mut flat) = (0.0, 0.0);
        for &(eta, we) in outer.iter() {
            rule.fill(&[x[0], x[1], x[2], eta], inner);
            z[0] = eta;
            let (mut s, mut f) = (0.0, 0.0);
            for &(phi, wp) in inner.iter() {
                z[1] = phi;
                let v = wp * c.eval(&z);
                let (sp, cp) = phi.sin_cos();
                s += cp * v;
                f += sp * v;
            }
            sharp += we * s;
            flat += we * f;
        }
        (sharp, flat)
    })
}

/// `c_check(x1, x2)` by a triple average.
pub fn check_at(c: &Cochain, rule: &CircleRule, x1: f64, x2: f64) -> f64 {
    with_buffers(3, |bufs| {
        let (b0, rest) = bufs.split_at_mut(1);
        let (b1, b2) = rest.split_at_mut(1);
        let (outer, middle, inner) = (&mut b0[0], &mut b1[0], &mut b2[0]);
        rule.fill(&[x1, x2], outer);
        let mut z = [0.0, 0.0, 0.0, x1, x2];
        let mut total = 0.0;
        for &(eta, we) in outer.iter() {
            rule.fill(&[x1, x2, eta], middle);
            z[0] = eta;
            let mut acc_phi = 0.0;
            for &(phi, wp) in middle.iter() {
                rule.fill(&[x1, x2, eta, phi], inner);
                z[1] = phi;
                let mut acc_psi = 0.0;
                for &(psi, ws) in inner.iter() {
                    z[2] = psi;
                    acc_psi += ws * c.eval(&z);
                }
                acc_phi += wp * (eta - phi).sin() * acc_psi;
            }
            total += we * acc_phi;
        }
        total
    })
}

pub fn c_sharp(c: &Cochain, rule: &CircleRule) -> Cochain {
    let (c, rule) = (c.clone(), rule.clone());
    let bound = c.sup_bound();
    let out = Cochain::new(3, move |x| sharp_flat_at(&c, &rule, [x[0], x[1], x[2]]).0);
    match bound {
        Some(b) => out.with_bound(b),
        None => out,
    }
}

pub fn c_flat(c: &Cochain, rule: &CircleRule) -> Cochain {
    let (c, rule) = (c.clone(), rule.clone());
    let bound = c.sup_bound();
    let out = Cochain::new(3, move |x| sharp_flat_at(&c, &rule, [x[0], x[1], x[2]]).1);
    match bound {
        Some(b) => out.with_bound(b),
        None => out,
    }
}

/// `c_check` as a 2-cochain, by direct triple quadrature at every point.
pub fn c_check(c: &Cochain, rule: &CircleRule) -> Cochain {
    let (c, rule) = (c.clone(), rule.clone());
    let bound = c.sup_bound();
    let out = Cochain::new(2, move |x| check_at(&c, &rule, x[0], x[1]));
    match bound {
        Some(b) => out.with_bound(b),
        None => out,
    }
}

/// Resolution and guard of a [`KernelTable`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableOptions {
    /// Number of knots `M`.
    pub size: usize,
    /// Knots live in `[guard, 2 pi - guard]`.
    pub guard: f64,
    /// Offset used to sample the one-sided limits of `c_check(0, .)` at `0` and `2 pi`.
    pub limit_offset: f64,
    /// Gauss-Legendre order per knot interval when integrating for `r`.
    pub segment_order: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            size: 513,
            guard: 1e-6,
            limit_offset: 1e-9,
            segment_order: 8,
        }
    }
}

/// Profiles `z -> c_check(0, z)` and `z -> r(z)` on knots graded towards `0` and `2 pi`.
///
/// Knots are `z_k = z(k / (M - 1))` for a map that is geometric near `0` and
/// `2 pi` and close to uniform in between; interpolation is 4-point Lagrange in
/// the knot parameter.
/// Inside the guard band the profiles are joined linearly to their one-sided
/// limits, with `r(0+) = -i c_check(0, 0+)` and `r(2 pi -) = -i c_check(0, 2 pi -)`.
#[derive(Debug)]
pub struct KernelTable {
    options: TableOptions,
    map: KnotMap,
    zeta: Vec<f64>,
    /// `dz/du` at the knots.
    dzeta: Vec<f64>,
    check: Vec<f64>,
    r: Vec<Complex64>,
    limit_lo: f64,
    limit_hi: f64,
    guard_hits: AtomicU64,
}

impl Clone for KernelTable {
    fn clone(&self) -> Self {
        KernelTable {
            options: self.options,
            map: self.map,
            zeta: self.zeta.clone(),
            dzeta: self.dzeta.clone(),
            check: self.check.clone(),
            r: self.r.clone(),
            limit_lo: self.limit_lo,
            limit_hi: self.limit_hi,
            guard_hits: AtomicU64::new(self.guard_hits.load(Ordering::Relaxed)),
        }
    }
}

fn knot(options: &TableOptions, k: usize) -> f64 {
    KnotMap::new(options.guard).z(k as f64 / (options.size - 1) as f64)
}

/// Knot parameter on `[g, pi]`: `U(z) = a ln(z / g) + b (z - g) + c (z - g)^2`,
/// mirrored about `pi` as `U(2 pi - z) = 1 - U(z)`. The log term gives geometric
/// knots near the ends, `c` makes `U'' (pi) = 0` so the mirrored map is `C^2`.
#[derive(Clone, Copy, Debug)]
struct KnotMap {
    g: f64,
    a: f64,
    b: f64,
    c: f64,
}

/// Share of the lower half of the knots spent on the logarithmic part.
const LOG_SHARE: f64 = 0.5;

impl KnotMap {
    fn new(g: f64) -> Self {
        let a = 0.5 * LOG_SHARE / (PI / g).ln();
        let c = a / (2.0 * PI * PI);
        let b = (0.5 - a * (PI / g).ln() - c * (PI - g).powi(2)) / (PI - g);
        KnotMap { g, a, b, c }
    }

    fn lower(&self, y: f64) -> f64 {
        self.a * (y / self.g).ln() + self.b * (y - self.g) + self.c * (y - self.g).powi(2)
    }

    fn lower_slope(&self, y: f64) -> f64 {
        self.a / y + self.b + 2.0 * self.c * (y - self.g)
    }

    /// `u(z)`, clamped to `[0, 1]`.
    fn u(&self, z: f64) -> f64 {
        let y = z.min(TAU - z).clamp(self.g, PI);
        let v = self.lower(y);
        if z <= PI {
            v
        } else {
            1.0 - v
        }
    }

    /// `z(u)` by Newton in `ln z`, from above where the iteration is monotone.
    fn z(&self, u: f64) -> f64 {
        let v = u.min(1.0 - u).clamp(0.0, 0.5);
        let mut x = PI.ln();
        for _ in 0..200 {
            let y = x.exp();
            let step = (self.lower(y) - v) / (self.lower_slope(y) * y);
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let y = x.exp().clamp(self.g, PI);
        if u <= 0.5 {
            y
        } else {
            TAU - y
        }
    }

    /// `dz/du`.
    fn dz(&self, u: f64) -> f64 {
        let z = self.z(u);
        1.0 / self.lower_slope(z.min(TAU - z))
    }
}

impl KernelTable {
    /// Tabulate `c_check(0, .)` with `rule`, then solve for `r`.
    pub fn build(c: &Cochain, rule: &CircleRule, options: TableOptions) -> Result<Self> {
        Self::validate_options(&options)?;
        let zeta: Vec<f64> = (0..options.size).map(|k| knot(&options, k)).collect();
        let check: Vec<f64> = zeta.par_iter().map(|&z| check_at(c, rule, 0.0, z)).collect();
        let limit_lo = check_at(c, rule, 0.0, options.limit_offset);
        let limit_hi = check_at(c, rule, 0.0, TAU - options.limit_offset);
        Ok(Self::from_profile(options, check, limit_lo, limit_hi))
    }

    /// Solve for `r` given a tabulated `c_check(0, .)` on the standard knots.
    pub fn from_profile(options: TableOptions, check: Vec<f64>, limit_lo: f64, limit_hi: f64) -> Self {
        let map = KnotMap::new(options.guard);
        let us = (0..options.size).map(|k| k as f64 / (options.size - 1) as f64);
        let (zeta, dzeta) = us.map(|u| (map.z(u), map.dz(u))).unzip();
        let mut table = KernelTable {
            options,
            map,
            zeta,
            dzeta,
            check,
            r: Vec::new(),
            limit_lo,
            limit_hi,
            guard_hits: AtomicU64::new(0),
        };
        table.r = table.solve_r();
        table
    }

    fn validate_options(o: &TableOptions) -> Result<()> {
        if o.size < 8 {
            return Err(Error::InvalidArgument("kernel table needs at least 8 knots".into()));
        }
        if !(o.guard > 0.0 && o.guard < 0.5) {
            return Err(Error::InvalidArgument(format!("guard {} out of range", o.guard)));
        }
        Ok(())
    }

    /// `J(z_k) = int_pi^{z_k} c_check / (1 - cos)` by Gauss-Legendre in the knot
    /// parameter on each knot interval, where the interpolant is a cubic.
    fn solve_r(&self) -> Vec<Complex64> {
        let m = self.zeta.len();
        let (map, scale) = (KnotMap::new(self.options.guard), 1.0 / (m - 1) as f64);
        let gl = GaussLegendre::new(self.options.segment_order).expect("positive order");
        let integrand = |s: f64| {
            let z = map.z(scale * s);
            self.check_interior(z) / (1.0 - z.cos()) * map.dz(scale * s) * scale
        };
        let u_pi = self.param(PI);
        let seg = |a: f64, b: f64| gl.integrate(a, b, integrand);
        // first knot at or above pi
        let mid = self.zeta.partition_point(|&z| z < PI);
        let mut j = vec![0.0; m];
        if mid < m {
            j[mid] = seg(u_pi, mid as f64);
            for k in (mid + 1)..m {
                j[k] = j[k - 1] + seg((k - 1) as f64, k as f64);
            }
        }
        if mid > 0 {
            j[mid - 1] = seg(u_pi, (mid - 1) as f64);
            for k in (0..mid - 1).rev() {
                j[k] = j[k + 1] + seg((k + 1) as f64, k as f64);
            }
        }
        self.zeta
            .iter()
            .zip(&j)
            .map(|(&z, &jk)| -0.5 * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, z)) * jk)
            .collect()
    }

    pub fn options(&self) -> TableOptions {
        self.options
    }

    pub fn knots(&self) -> &[f64] {
        &self.zeta
    }

    pub fn check_profile(&self) -> &[f64] {
        &self.check
    }

    pub fn r_profile(&self) -> &[Complex64] {
        &self.r
    }

    /// One-sided limits of `c_check(0, .)` at `0+` and `2 pi -`.
    pub fn limits(&self) -> (f64, f64) {
        (self.limit_lo, self.limit_hi)
    }

    /// How many evaluations fell inside the guard band.
    pub fn guard_hits(&self) -> u64 {
        self.guard_hits.load(Ordering::Relaxed)
    }

    fn param(&self, z: f64) -> f64 {
        self.map.u(z) * (self.options.size - 1) as f64
    }

    fn lagrange<T>(&self, values: &[T], z: f64) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let m = values.len();
        let s = self.param(z);
        let i = (s.floor() as isize - 1).clamp(0, m as isize - 4) as usize;
        let t = s - i as f64;
        // nodes at 0, 1, 2, 3 relative to i
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        values[i] * l0 + values[i + 1] * l1 + values[i + 2] * l2 + values[i + 3] * l3
    }

    fn check_interior(&self, z: f64) -> f64 {
        self.lagrange(&self.check, z)
    }

    /// `c_check(0, z)` from the table, `z` taken modulo `2 pi`.
    pub fn check_at(&self, z: f64) -> f64 {
        let z = wrap(z);
        let (g, m) = (self.options.guard, self.zeta.len());
        if z < g {
            self.guard_hits.fetch_add(1, Ordering::Relaxed);
            self.limit_lo + (self.check[0] - self.limit_lo) * z / g
        } else if z > TAU - g {
            self.guard_hits.fetch_add(1, Ordering::Relaxed);
            self.limit_hi + (self.check[m - 1] - self.limit_hi) * (TAU - z) / g
        } else {
            self.check_interior(z)
        }
    }

    /// `r(z)` from the table, `z` taken modulo `2 pi`.
    pub fn r_at(&self, z: f64) -> Complex64 {
        let z = wrap(z);
        let (g, m) = (self.options.guard, self.zeta.len());
        let i = Complex64::new(0.0, 1.0);
        if z < g {
            self.guard_hits.fetch_add(1, Ordering::Relaxed);
            let r0 = -i * self.limit_lo;
            r0 + (self.r[0] - r0) * (z / g)
        } else if z > TAU - g {
            self.guard_hits.fetch_add(1, Ordering::Relaxed);
            let r1 = -i * self.limit_hi;
            r1 + (self.r[m - 1] - r1) * ((TAU - z) / g)
        } else {
            self.hermite_r(z)
        }
    }

    /// `r'(z)` from the defining equation `(1 - e^{-iz}) r' = i r - c_check(0, z)`.
    fn r_derivative(&self, k: usize) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let z = self.zeta[k];
        (i * self.r[k] - self.check[k]) / (Complex64::new(1.0, 0.0) - (-i * z).exp())
    }

    /// Cubic Hermite in the knot parameter, using the exact derivative at each knot.
    fn hermite_r(&self, z: f64) -> Complex64 {
        let m = self.zeta.len();
        let s = self.param(z);
        let k = (s.floor() as usize).min(m - 2);
        let t = s - k as f64;
        let slope = |j: usize| self.r_derivative(j) * (self.dzeta[j] / (m - 1) as f64);
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.r[k] * h00 + slope(k) * h10 + self.r[k + 1] * h01 + slope(k + 1) * h11
    }

    /// `(1 - e^{-i z}) r'(z) - i r(z) + c_check(0, z)` with `r'` by central differences.
    pub fn ode_residual(&self, z: f64, h: f64) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        let dr = (self.r_at(z + h) - self.r_at(z - h)) / (2.0 * h);
        ((Complex64::new(1.0, 0.0) - (-i * z).exp()) * dr - i * self.r_at(z) + self.check_at(z)).norm()
    }

    pub fn sup_r(&self) -> f64 {
        self.r.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV dump: comment header, then `zeta,check,re_r,im_r` rows.
    pub fn write_csv(&self, w: &mut impl Write, quadrature: &str, cocycle: &str) -> Result<()> {
        writeln!(
            w,
            "# M={} guard={:.17e} limit_lo={:.17e} limit_hi={:.17e} N={} cocycle={}",
            self.zeta.len(),
            self.options.guard,
            self.limit_lo,
            self.limit_hi,
            quadrature,
            cocycle
        )?;
        writeln!(w, "zeta,check,re_r,im_r")?;
        for k in 0..self.zeta.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.zeta[k], self.check[k], self.r[k].re, self.r[k].im
            )?;
        }
        Ok(())
    }

    /// Read a dump written by [`write_csv`](Self::write_csv); `r` is re-solved from the profile.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = file.lines();
        let header = lines.next().ok_or_else(|| Error::Config("empty kernel table".into()))??;
        let field = |key: &str| -> Result<f64> {
            header
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix(key))
                .ok_or_else(|| Error::Config(format!("kernel table header lacks {key}")))?
                .parse::<f64>()
                .map_err(|e| Error::Config(e.to_string()))
        };
        let size = field("M=")? as usize;
        let options = TableOptions {
            size,
            guard: field("guard=")?,
            ..TableOptions::default()
        };
        let (lo, hi) = (field("limit_lo=")?, field("limit_hi=")?);
        let mut check = Vec::with_capacity(size);
        for line in lines.skip(1) {
            let line = line?;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Config(format!("bad kernel table row: {line}")));
            }
            check.push(cols[1].trim().parse::<f64>().map_err(|e| Error::Config(e.to_string()))?);
        }
        if check.len() != size {
            return Err(Error::Config(format!("expected {size} rows, found {}", check.len())));
        }
        Self::validate_options(&options)?;
        Ok(Self::from_profile(options, check, lo, hi))
    }
}

/// `v(t1, t2) = e^{i t1} r(t2 - t1)`.
#[derive(Clone, Debug)]
pub struct VField {
    table: Arc<KernelTable>,
}

impl VField {
    pub fn new(table: Arc<KernelTable>) -> Self {
        VField { table }
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    #[inline]
    pub fn eval_unchecked(&self, t1: f64, t2: f64) -> Complex64 {
        Complex64::from_polar(1.0, t1) * self.table.r_at(t2 - t1)
    }

    pub fn eval(&self, t1: f64, t2: f64) -> Result<Complex64> {
        if wrap(t2 - t1) == 0.0 {
            return Err(Error::Domain(format!("v is undefined on the diagonal ({t1}, {t2})")));
        }
        Ok(self.eval_unchecked(t1, t2))
    }

    /// `(dv)_0(p1, p2) = v(p1, p2) - v(0, p2) + v(0, p1)`.
    #[inline]
    pub fn dv0(&self, p1: f64, p2: f64) -> Complex64 {
        self.eval_unchecked(p1, p2) - self.eval_unchecked(0.0, p2) + self.eval_unchecked(0.0, p1)
    }

    pub fn v_sharp(&self) -> Cochain {
        let v = self.clone();
        Cochain::new(2, move |x| v.eval_unchecked(x[0], x[1]).re)
    }

    pub fn v_flat(&self) -> Cochain {
        let v = self.clone();
        Cochain::new(2, move |x| v.eval_unchecked(x[0], x[1]).im)
    }
}

/// Everything needed to evaluate `F_sharp` and `F_flat` on the domain.
#[derive(Clone, Debug)]
pub struct Inhomogeneities {
    cocycle: Cochain,
    rule: CircleRule,
    v: VField,
}

impl Inhomogeneities {
    pub fn new(cocycle: &Cochain, rule: &CircleRule, table: Arc<KernelTable>) -> Self {
        Inhomogeneities {
            cocycle: cocycle.clone(),
            rule: rule.clone(),
            v: VField::new(table),
        }
    }

    /// Tabulate the kernels for `cocycle` and assemble the inhomogeneities.
    pub fn build(cocycle: &Cochain, rule: &CircleRule, options: TableOptions) -> Result<Self> {
        let table = Arc::new(KernelTable::build(cocycle, rule, options)?);
        Ok(Self::new(cocycle, rule, table))
    }

    pub fn v(&self) -> &VField {
        &self.v
    }

    pub fn table(&self) -> &KernelTable {
        self.v.table()
    }

    pub fn rule(&self) -> &CircleRule {
        &self.rule
    }

    pub fn cocycle(&self) -> &Cochain {
        &self.cocycle
    }

    /// `(F_sharp, F_flat)` at `(p1, p2)`.
    #[inline]
    pub fn eval(&self, p1: f64, p2: f64) -> (f64, f64) {
        let (s, f) = sharp_flat_at(&self.cocycle, &self.rule, [0.0, p1, p2]);
        let dv = self.v.dv0(p1, p2);
        (s + dv.re, f + dv.im)
    }

    pub fn f_sharp(&self, p1: f64, p2: f64) -> Result<f64> {
        check_domain(p1, p2)?;
        Ok(self.eval(p1, p2).0)
    }

    pub fn f_flat(&self, p1: f64, p2: f64) -> Result<f64> {
        check_domain(p1, p2)?;
        Ok(self.eval(p1, p2).1)
    }
}

fn check_domain(p1: f64, p2: f64) -> Result<()> {
    if wrap(p1) == 0.0 || wrap(p2) == 0.0 || wrap(p1 - p2) == 0.0 {
        return Err(Error::Domain(format!("({p1}, {p2}) is not in the domain")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;
    use crate::zoo::{cup_orientation, order_sign, CUP_CONSTANT};

    fn arc() -> CircleRule {
        CircleRule::arc(6, PI / 4.0).unwrap()
    }

    #[test]
    fn knot_map_is_a_mirrored_bijection() {
        let map = KnotMap::new(1e-6);
        assert!((map.z(0.0) - 1e-6).abs() < 1e-18 && (map.z(0.5) - PI).abs() < 1e-14);
        for k in 0..=200 {
            let u = k as f64 / 200.0;
            let z = map.z(u);
            // near 2 pi only the mirror is exact, 2 pi - z loses the small end
            if u <= 0.5 {
                assert!((map.u(z) - u).abs() < 1e-13, "u = {u}: {}", map.u(z) - u);
            }
            assert!((map.z(1.0 - u) - (TAU - z)).abs() < 1e-12);
            let h = 1e-6;
            if u > h && u < 1.0 - h {
                let fd = (map.z(u + h) - map.z(u - h)) / (2.0 * h);
                assert!((fd - map.dz(u)).abs() < 1e-6 * (1.0 + fd.abs()), "u = {u}: {fd} vs {}", map.dz(u));
            }
        }
        // geometric near the guard: consecutive knot ratios stay bounded
        let t = TableOptions::default();
        let z: Vec<f64> = (0..8).map(|k| knot(&t, k)).collect();
        assert!(z.windows(2).all(|w| w[1] / w[0] > 1.05 && w[1] / w[0] < 2.0), "{z:?}");
    }

    /// Independent oracle for the cup kernels. With the points sorted,
    /// `c(eta, phi, x) = k s(x) sign(phi - eta) g(eta) g(phi)` where
    /// `g(y) = prod_k sign(x_k - y)`, so the double average splits into
    /// 1-D integrals of step functions that are done exactly.
    fn cup_sharp_flat_oracle(x: [f64; 3]) -> (f64, f64) {
        let s = order_sign(&x);
        let g = |y: f64| x.iter().map(|&xk| (wrap(xk) - y).signum()).product::<f64>();
        let mut cuts: Vec<f64> = x.iter().map(|&v| wrap(v)).collect();
        cuts.push(0.0);
        cuts.push(TAU);
        cuts.sort_by(f64::total_cmp);
        // E_eta E_phi w(phi) sign(phi - eta) g(eta) g(phi), with w = cos or sin.
        // Inner: int_0^{2pi} w(phi) sign(phi - eta) g(phi) dphi = W(eta) computed piecewise.
        let inner = |eta: f64, prim: &dyn Fn(f64) -> f64| {
            let mut acc = 0.0;
            let mut pts = cuts.clone();
            pts.push(eta);
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b <= a {
                    continue;
                }
                let m = 0.5 * (a + b);
                acc += (m - eta).signum() * g(m) * (prim(b) - prim(a));
            }
            acc
        };
        let gl = crate::quadrature::GaussLegendre::new(12).unwrap();
        let mut sharp = 0.0;
        let mut flat = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let ge = g(0.5 * (a + b));
            sharp += ge * gl.integrate(a, b, |eta| inner(eta, &|p: f64| p.sin()));
            flat += ge * gl.integrate(a, b, |eta| inner(eta, &|p: f64| -p.cos()));
        }
        let norm = CUP_CONSTANT * s / (TAU * TAU);
        (norm * sharp, norm * flat)
    }

    #[test]
    fn cup_kernels_match_step_function_oracle() {
        let c = cup_orientation();
        let s = Sampler::new(1, "cup-kernels");
        for k in 0..20 {
            let x = s.admissible(k, 3, 1e-2);
            let got = sharp_flat_at(&c, &arc(), [x[0], x[1], x[2]]);
            let want = cup_sharp_flat_oracle([x[0], x[1], x[2]]);
            assert!((got.0 - want.0).abs() < 1e-12, "{got:?} vs {want:?}");
            assert!((got.1 - want.1).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn constant_and_zero_cocycles_have_trivial_kernels() {
        let rule = CircleRule::midpoint(32).unwrap();
        let one = Cochain::constant(5, 1.0);
        let (s, f) = sharp_flat_at(&one, &rule, [0.2, 1.0, 3.0]);
        assert!(s.abs() < 1e-15 && f.abs() < 1e-15);
        let zero = Cochain::zero(5);
        assert_eq!(check_at(&zero, &arc(), 0.0, 1.0), 0.0);
        let table = KernelTable::build(
            &zero,
            &arc(),
            TableOptions {
                size: 33,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(table.sup_r(), 0.0);
        assert_eq!(table.r_at(0.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cup_check_profile_is_odd_and_rotation_invariant() {
        let c = cup_orientation();
        let rule = arc();
        for &z in &[0.3, 1.1, 2.0, 2.9] {
            let a = check_at(&c, &rule, 0.0, z);
            let b = check_at(&c, &rule, 0.0, TAU - z);
            assert!((a + b).abs() < 1e-12);
            let shifted = check_at(&c, &rule, 1.7, 1.7 + z);
            assert!((a - shifted).abs() < 1e-12);
        }
        assert!(check_at(&c, &rule, 0.0, PI).abs() < 1e-12);
    }

    #[test]
    fn r_vanishes_at_pi_and_solves_its_ode() {
        let c = cup_orientation();
        let table = KernelTable::build(
            &c,
            &arc(),
            TableOptions {
                size: 257,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(table.r_at(PI).norm() < 1e-12);
        for &z in &[0.05, 0.5, 1.5, 3.0, 4.5, 6.0] {
            assert!(table.ode_residual(z, 1e-5) < 1e-5, "z={z}: {}", table.ode_residual(z, 1e-5));
        }
        assert!(table.sup_r() <= CUP_CONSTANT);
    }

    #[test]
    fn v_symmetries_for_alternating_cocycle() {
        let c = cup_orientation();
        let table = Arc::new(
            KernelTable::build(
                &c,
                &arc(),
                TableOptions {
                    size: 129,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        let v = VField::new(table);
        let s = Sampler::new(2, "v-sym");
        for k in 0..30 {
            let x = s.admissible(k, 2, 1e-2);
            let a = v.eval(x[0], x[1]).unwrap();
            let b = v.eval(x[1], x[0]).unwrap();
            // exact up to interpolation error of the table
            assert!((a + b).norm() < 1e-6, "{a} {b}");
            let cnj = v.eval(-x[1], -x[0]).unwrap();
            assert!((a + cnj.conj()).norm() < 1e-6);
        }
        assert!(v.eval(1.0, 1.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = cup_orientation();
        let table = KernelTable::build(
            &c,
            &arc(),
            TableOptions {
                size: 33,
                ..Default::default()
            },
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        table.write_csv(&mut f, "arc", "cup_orientation").unwrap();
        drop(f);
        let back = KernelTable::read_csv(&path).unwrap();
        for (a, b) in table.r_profile().iter().zip(back.r_profile()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
