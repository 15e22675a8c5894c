//! Concrete bounded cocycles to feed the pipeline.
//!
//! | kind                    | arity | alternating | invariant | smooth off diagonals |
//! |-------------------------|-------|-------------|-----------|----------------------|
//! | `zero`                  | 5     | yes         | yes       | yes                  |
//! | `cup_orientation`       | 5     | yes         | yes       | no (piecewise const) |
//! | `coboundary_crossratio` | 5     | yes         | yes       | yes                  |
//! | `mollified_cup`         | 5     | yes         | approx.   | yes                  |
//! | `external`              | 5     | yes         | yes       | tabulated            |

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cochain::{alternate, cocycle_residual, differential, invariance_residual, Cochain, MAX_ARITY};
use crate::error::{Error, Result};
use crate::moebius::{cayley, cross_ratio_angles, wrap};
use crate::quadrature::GaussLegendre;
use crate::sampling::Sampler;

/// Cyclic orientation: `+1` for counter-clockwise triples, `-1` for clockwise, `0` on ties.
#[inline]
pub fn orientation(t0: f64, t1: f64, t2: f64) -> f64 {
    let (a, b, c) = (wrap(t0), wrap(t1), wrap(t2));
    sign(b - a) * sign(c - a) * sign(c - b)
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Parity of the sorting permutation of a tuple, `0` on ties.
#[inline]
pub fn order_sign(x: &[f64]) -> f64 {
    let mut w = [0.0; MAX_ARITY];
    for (wi, &xi) in w.iter_mut().zip(x) {
        *wi = wrap(xi);
    }
    let n = x.len();
    let mut s = 1.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s *= sign(w[j] - w[i]);
        }
    }
    s
}

/// The orientation cocycle as a 3-argument cochain.
pub fn orientation_cochain() -> Cochain {
    Cochain::new(3, |x| orientation(x[0], x[1], x[2])).with_bound(1.0)
}

/// Value of the alternated product `or(x0,x1,x2) or(x2,x3,x4)` on
/// configurations without ties. Obtained by summing the 120 signed terms.
pub const CUP_CONSTANT: f64 = 1.0 / 3.0;

/// The alternated cup product of the orientation cocycle with itself.
///
/// Alternating and rotation-invariant forces the value to depend only on the
/// parity of the cyclic order, so the 120-term sum collapses to a constant.
pub fn cup_orientation() -> Cochain {
    Cochain::new(5, |x| CUP_CONSTANT * order_sign(x)).with_bound(CUP_CONSTANT)
}

/// The same cochain built literally as `alternate(or ⊗ or)`; slow, kept as a reference.
pub fn cup_orientation_reference() -> Cochain {
    alternate(&Cochain::new(5, |x| orientation(x[0], x[1], x[2]) * orientation(x[2], x[3], x[4])))
}

/// Profiles `y -> p(y)` applied to `y = arctan(cross ratio)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileId {
    /// `cos(2y)`.
    Cos2,
    /// `cos(2y) + 0.3 cos(4y)`.
    Cos2Cos4,
    /// `sin(2y)`: its alternation vanishes identically, so the cocycle is zero.
    Sin2,
}

impl ProfileId {
    /// The profile composed with `arctan`, as a function of the cross ratio.
    #[inline]
    pub fn of_cross_ratio(self, x: f64) -> f64 {
        // cos(2 arctan x) = (1 - x^2)/(1 + x^2), continuous through x = infinity
        let c2 = if x.is_finite() {
            if x.abs() > 1e150 {
                -1.0
            } else {
                let x2 = x * x;
                (1.0 - x2) / (1.0 + x2)
            }
        } else if x.is_nan() {
            return 0.0;
        } else {
            -1.0
        };
        match self {
            ProfileId::Cos2 => c2,
            ProfileId::Cos2Cos4 => c2 + 0.3 * (2.0 * c2 * c2 - 1.0),
            ProfileId::Sin2 => {
                if x.is_finite() && x.abs() <= 1e150 {
                    2.0 * x / (1.0 + x * x)
                } else {
                    0.0
                }
            }
        }
    }

    /// The profile as a function of `y`, for plotting and reference checks.
    pub fn of_angle(self, y: f64) -> f64 {
        match self {
            ProfileId::Cos2 => (2.0 * y).cos(),
            ProfileId::Cos2Cos4 => (2.0 * y).cos() + 0.3 * (4.0 * y).cos(),
            ProfileId::Sin2 => (2.0 * y).sin(),
        }
    }

    pub fn sup(self) -> f64 {
        match self {
            ProfileId::Cos2 | ProfileId::Sin2 => 1.0,
            ProfileId::Cos2Cos4 => 1.3,
        }
    }
}

/// `q(x0..x3) = amplitude * profile(arctan(cr(x0, x1; x2, x3)))`, not alternated.
pub fn crossratio_cochain(profile: ProfileId, amplitude: f64) -> Cochain {
    Cochain::new(4, move |x| {
        amplitude * profile.of_cross_ratio(cross_ratio_angles(x[0], x[1], x[2], x[3]))
    })
    .with_bound(amplitude.abs() * profile.sup())
}

// Permutations of slots 1..3 with slot 0 fixed, with signs. They form a
// transversal of the Klein four-group, which fixes the cross ratio.
const COSETS: [([usize; 4], f64); 6] = [
    ([0, 1, 2, 3], 1.0),
    ([0, 2, 1, 3], -1.0),
    ([0, 1, 3, 2], -1.0),
    ([0, 3, 2, 1], -1.0),
    ([0, 2, 3, 1], 1.0),
    ([0, 3, 1, 2], 1.0),
];

/// Alternation of [`crossratio_cochain`] using 6 coset representatives instead of 24 permutations.
#[inline]
pub fn alternated_crossratio(profile: ProfileId, amplitude: f64, x: &[f64]) -> f64 {
    let mut s = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = ((x[i] - x[j]) * 0.5).sin();
            s[i][j] = v;
            s[j][i] = -v;
        }
    }
    let mut acc = 0.0;
    for (p, sg) in COSETS.iter() {
        let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
        let cr = (s[a][c] * s[b][d]) / (s[b][c] * s[a][d]);
        acc += sg * profile.of_cross_ratio(cr);
    }
    amplitude * acc / 6.0
}

/// `c = d(alternate(q))` for the cross-ratio cochain `q`: a smooth invariant coboundary.
pub fn coboundary_crossratio(profile: ProfileId, amplitude: f64) -> Cochain {
    let big_q = crossratio_primitive(profile, amplitude);
    differential(&big_q)
}

/// The alternating invariant primitive `alternate(q)` of [`coboundary_crossratio`].
pub fn crossratio_primitive(profile: ProfileId, amplitude: f64) -> Cochain {
    Cochain::new(4, move |x| alternated_crossratio(profile, amplitude, x)).with_bound(amplitude.abs() * profile.sup())
}

/// Coordinate-wise convolution with a product of smooth bumps of half-width `width`.
///
/// The convolution is discretised by a tensor Gauss-Legendre rule on
/// `[-width, width]` with `nodes` points per coordinate, weighted by
/// `exp(-1/(1-u^2))` and normalised. Because the discrete kernel is a product
/// with unit marginals, the result is still an exact cocycle.
pub fn mollify(c: &Cochain, width: f64, nodes: usize) -> Result<Cochain> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!("mollifier width {width} must be positive")));
    }
    let gl = GaussLegendre::new(nodes)?;
    let mut offsets = Vec::with_capacity(nodes);
    let mut total = 0.0;
    for (&u, &w) in gl.nodes().iter().zip(gl.weights()) {
        let bump = (-1.0 / (1.0 - u * u)).exp();
        offsets.push((width * u, w * bump));
        total += w * bump;
    }
    for o in offsets.iter_mut() {
        o.1 /= total;
    }
    let offsets = Arc::new(offsets);
    let n = c.arity();
    let inner = c.clone();
    let out = Cochain::new(n, move |x| {
        let m = offsets.len();
        let mut idx = [0usize; MAX_ARITY];
        let mut y = [0.0; MAX_ARITY];
        let mut acc = 0.0;
        loop {
            let mut w = 1.0;
            for k in 0..n {
                let (du, wk) = offsets[idx[k]];
                y[k] = x[k] + du;
                w *= wk;
            }
            acc += w * inner.eval(&y[..n]);
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        acc
    });
    Ok(match c.sup_bound() {
        Some(b) => out.with_bound(b),
        None => out,
    })
}

/// A periodic table `values[i * size + j]` at angles `(2 pi i / size, 2 pi j / size)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalTable {
    pub size: usize,
    pub values: Vec<f64>,
}

impl ExternalTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let t: ExternalTable = serde_json::from_str(&text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 || self.values.len() != self.size * self.size {
            return Err(Error::Config(format!(
                "external table needs size >= 2 and size^2 values, got size {} with {} values",
                self.size,
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("external table contains non-finite values".into()));
        }
        Ok(())
    }

    /// Periodic bilinear interpolation.
    pub fn interpolate(&self, a: f64, b: f64) -> f64 {
        let m = self.size;
        let scale = m as f64 / TAU;
        let (u, v) = (wrap(a) * scale, wrap(b) * scale);
        let (i0, j0) = (u.floor() as usize % m, v.floor() as usize % m);
        let (fu, fv) = (u - u.floor(), v - v.floor());
        let (i1, j1) = ((i0 + 1) % m, (j0 + 1) % m);
        let at = |i: usize, j: usize| self.values[i * m + j];
        (1.0 - fu) * ((1.0 - fv) * at(i0, j0) + fv * at(i0, j1)) + fu * ((1.0 - fv) * at(i1, j0) + fv * at(i1, j1))
    }

    /// Tabulate an invariant 5-cochain through its normal form.
    pub fn tabulate(c: &Cochain, size: usize) -> Self {
        let base = [0.0, PI, 3.0 * FRAC_PI_2];
        let mut values = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let a = TAU * i as f64 / size as f64;
                let b = TAU * j as f64 / size as f64;
                values.push(c.eval(&[base[0], base[1], base[2], a, b]));
            }
        }
        ExternalTable { size, values }
    }
}

/// Evaluate an invariant alternating 5-cochain given by its values on
/// `(1, -1, -i, w3, w4)`, stored as a function of the angles of `w3`, `w4`.
///
/// A positively oriented `(z0, z1, z2)` is moved to `(1, -1, -i)` by a unique
/// group element, which sends `z3` to `cayley(cr(z0, z1; z2, z3))`.
pub fn external_cocycle(table: ExternalTable) -> Result<Cochain> {
    table.validate()?;
    let bound = table.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let table = Arc::new(table);
    Ok(Cochain::new(5, move |x| {
        let o = orientation(x[0], x[1], x[2]);
        if o == 0.0 {
            return 0.0;
        }
        let (z0, z1) = if o > 0.0 { (x[0], x[1]) } else { (x[1], x[0]) };
        let z2 = x[2];
        let w3 = cayley(cross_ratio_angles(z0, z1, z2, x[3])).arg();
        let w4 = cayley(cross_ratio_angles(z0, z1, z2, x[4])).arg();
        if !(w3.is_finite() && w4.is_finite()) {
            return 0.0;
        }
        o * table.interpolate(w3, w4)
    })
    .with_bound(bound))
}

/// Which kind of cocycle to build, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CocycleSpec {
    Zero,
    CupOrientation,
    CoboundaryCrossratio {
        #[serde(default = "default_profile")]
        profile: ProfileId,
        #[serde(default = "one")]
        amplitude: f64,
    },
    MollifiedCup {
        width: f64,
        #[serde(default = "default_mollifier_nodes")]
        nodes: usize,
    },
    External {
        path: PathBuf,
        /// Cocycle residual accepted for interpolated data.
        #[serde(default = "default_external_tolerance")]
        tolerance: f64,
    },
}

fn default_profile() -> ProfileId {
    ProfileId::Cos2
}
fn one() -> f64 {
    1.0
}
fn default_mollifier_nodes() -> usize {
    3
}
fn default_external_tolerance() -> f64 {
    1e-2
}

impl Default for CocycleSpec {
    fn default() -> Self {
        CocycleSpec::CupOrientation
    }
}

/// Properties a zoo cocycle is expected to have; checked on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    pub alternating: bool,
    pub invariant: bool,
    pub cocycle: bool,
    /// Piecewise constant, so only breakpoint-aware rules integrate it exactly.
    pub piecewise_constant: bool,
}

/// A validated cocycle together with its description.
#[derive(Clone, Debug)]
pub struct Cocycle {
    pub spec: CocycleSpec,
    pub cochain: Cochain,
    pub claims: Claims,
    /// Sup norm: exact where known, otherwise the maximum over seeded samples.
    pub sup_norm: f64,
    /// For coboundaries, the known alternating invariant primitive.
    pub known_primitive: Option<Cochain>,
}

/// Tolerances for construction-time self-validation.
pub const VALIDATION_COCYCLE_TOL: f64 = 1e-10;
pub const VALIDATION_INVARIANCE_TOL: f64 = 1e-9;
pub const VALIDATION_SAMPLES: u64 = 40;
pub const VALIDATION_MARGIN: f64 = 1e-3;

impl Cocycle {
    pub fn build(spec: &CocycleSpec) -> Result<Self> {
        let exact = Claims {
            alternating: true,
            invariant: true,
            cocycle: true,
            piecewise_constant: false,
        };
        let (cochain, claims, known) = match spec {
            CocycleSpec::Zero => (Cochain::zero(5), exact, Some(Cochain::zero(4))),
            CocycleSpec::CupOrientation => (
                cup_orientation(),
                Claims {
                    piecewise_constant: true,
                    ..exact
                },
                None,
            ),
            CocycleSpec::CoboundaryCrossratio { profile, amplitude } => {
                if !amplitude.is_finite() {
                    return Err(Error::InvalidArgument("amplitude must be finite".into()));
                }
                (
                    coboundary_crossratio(*profile, *amplitude),
                    exact,
                    Some(crossratio_primitive(*profile, *amplitude)),
                )
            }
            CocycleSpec::MollifiedCup { width, nodes } => (
                mollify(&cup_orientation(), *width, *nodes)?,
                Claims { invariant: false, ..exact },
                None,
            ),
            CocycleSpec::External { path, .. } => (external_cocycle(ExternalTable::load(path)?)?, exact, None),
        };
        let sup_norm = estimate_sup(&cochain, spec);
        let out = Cocycle {
            spec: spec.clone(),
            cochain,
            claims,
            sup_norm,
            known_primitive: known,
        };
        out.validate()?;
        Ok(out)
    }

    /// Fail-fast check of the claimed properties on seeded samples.
    pub fn validate(&self) -> Result<()> {
        let s = Sampler::new(0, "zoo-validation");
        let six: Vec<Vec<f64>> = (0..VALIDATION_SAMPLES).map(|k| s.admissible(k, 6, VALIDATION_MARGIN)).collect();
        let tol = match self.spec {
            CocycleSpec::External { tolerance, .. } => tolerance,
            _ => VALIDATION_COCYCLE_TOL,
        };
        let r = cocycle_residual(&self.cochain, &six, VALIDATION_MARGIN);
        if !(r.max <= tol) {
            return Err(Error::Validation(format!("cocycle residual {} exceeds {}", r.max, tol)));
        }
        let five: Vec<Vec<f64>> = (0..VALIDATION_SAMPLES)
            .map(|k| s.admissible(1000 + k, 5, VALIDATION_MARGIN))
            .collect();
        if self.claims.invariant {
            let gs: Vec<_> = (0..4).map(|k| s.group_element(k, 1.0)).collect();
            let r = invariance_residual(&self.cochain, &gs, &five, VALIDATION_MARGIN);
            if !(r.max <= VALIDATION_INVARIANCE_TOL) {
                return Err(Error::Validation(format!(
                    "invariance residual {} exceeds {}",
                    r.max, VALIDATION_INVARIANCE_TOL
                )));
            }
        }
        if self.claims.alternating {
            for x in &five {
                let y = [x[1], x[0], x[2], x[3], x[4]];
                let z = [x[0], x[1], x[2], x[4], x[3]];
                let v = self.cochain.eval(x);
                let err = (self.cochain.eval(&y) + v).abs().max((self.cochain.eval(&z) + v).abs());
                if !(err <= tol) {
                    return Err(Error::Validation(format!("alternation defect {err}")));
                }
            }
        }
        if let Some(b) = self.cochain.sup_bound() {
            if five.iter().any(|x| self.cochain.eval(x).abs() > b * (1.0 + 1e-12)) {
                return Err(Error::Validation("sup bound violated".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self.spec {
            CocycleSpec::Zero => "zero",
            CocycleSpec::CupOrientation => "cup_orientation",
            CocycleSpec::CoboundaryCrossratio { .. } => "coboundary_crossratio",
            CocycleSpec::MollifiedCup { .. } => "mollified_cup",
            CocycleSpec::External { .. } => "external",
        }
    }
}

fn estimate_sup(c: &Cochain, spec: &CocycleSpec) -> f64 {
    match spec {
        CocycleSpec::Zero => 0.0,
        CocycleSpec::CupOrientation => CUP_CONSTANT,
        _ => {
            let s = Sampler::new(0, "zoo-sup");
            (0..2000u64)
                .map(|k| c.eval(&s.admissible(k, 5, VALIDATION_MARGIN)).abs())
                .fold(0.0, f64::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{coboundary_at, signed_permutations};
    use crate::moebius::make_k;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn orientation_basics() {
        assert_eq!(orientation(0.0, FRAC_PI_2, PI), 1.0);
        assert_eq!(orientation(PI, FRAC_PI_2, 0.0), -1.0);
        assert_eq!(orientation(1.0, 1.0, 2.0), 0.0);
        // cyclic shifts keep the orientation
        assert_eq!(orientation(FRAC_PI_2, PI, 0.0), 1.0);
    }

    #[test]
    fn orientation_is_a_cocycle_on_every_ordering() {
        // every cyclic arrangement of four distinct points
        let pts = [0.3, 1.7, 3.1, 5.0];
        for (p, _) in signed_permutations(4) {
            let x: Vec<f64> = p.iter().map(|&i| pts[i]).collect();
            assert_eq!(coboundary_at(&orientation_cochain(), &x), 0.0);
        }
    }

    #[test]
    fn cup_closed_form_matches_literal_alternation() {
        let reference = cup_orientation_reference();
        let fast = cup_orientation();
        let s = Sampler::new(1, "cup");
        for k in 0..50 {
            let x = s.admissible(k, 5, 1e-3);
            assert!((reference.eval(&x) - fast.eval(&x)).abs() < 1e-15);
        }
        let x = [0.0, 0.4 * PI, 0.8 * PI, 1.2 * PI, 1.6 * PI];
        assert!((reference.eval(&x) - CUP_CONSTANT).abs() < 1e-15);
    }

    #[test]
    fn cup_is_cocycle_invariant_and_conjugation_symmetric() {
        let c = cup_orientation();
        let s = Sampler::new(2, "cup2");
        let six: Vec<Vec<f64>> = (0..50).map(|k| s.admissible(k, 6, 1e-3)).collect();
        assert!(cocycle_residual(&c, &six, 1e-3).max <= 1e-12);
        let five: Vec<Vec<f64>> = (0..20).map(|k| s.admissible(100 + k, 5, 1e-3)).collect();
        let gs: Vec<_> = (0..20).map(|k| s.group_element(k, 2.0)).collect();
        assert!(invariance_residual(&c, &gs, &five, 1e-3).max <= 1e-12);
        let x = [0.0, 0.4 * PI, 0.8 * PI, 1.2 * PI, 1.6 * PI];
        let y: Vec<f64> = x.iter().map(|t| -t).collect();
        assert_eq!(c.eval(&x), c.eval(&y));
    }

    #[test]
    fn coset_alternation_matches_full_alternation() {
        for profile in [ProfileId::Cos2, ProfileId::Cos2Cos4] {
            let slow = alternate(&crossratio_cochain(profile, 1.0));
            let s = Sampler::new(3, "cosets");
            for k in 0..50 {
                let x = s.admissible(k, 4, 1e-3);
                assert!((slow.eval(&x) - alternated_crossratio(profile, 1.0, &x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sine_profile_alternates_to_zero() {
        let s = Sampler::new(4, "sin2");
        for k in 0..20 {
            let x = s.admissible(k, 4, 1e-3);
            assert!(alternated_crossratio(ProfileId::Sin2, 1.0, &x).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_matches_its_angular_form() {
        for &x in &[-30.0, -1.0, -0.2, 0.0, 0.7, 4.0] {
            for p in [ProfileId::Cos2, ProfileId::Cos2Cos4, ProfileId::Sin2] {
                assert!((p.of_cross_ratio(x) - p.of_angle(f64::atan(x))).abs() < 1e-14);
            }
        }
        assert_eq!(ProfileId::Cos2.of_cross_ratio(f64::INFINITY), -1.0);
    }

    #[test]
    fn coboundary_is_nonzero_cocycle() {
        let c = Cocycle::build(&CocycleSpec::CoboundaryCrossratio {
            profile: ProfileId::Cos2,
            amplitude: 1.0,
        })
        .unwrap();
        assert!(c.sup_norm > 0.1);
        let zero = coboundary_crossratio(ProfileId::Sin2, 1.0);
        assert!(zero.eval(&[0.1, 1.0, 2.0, 3.5, 5.0]).abs() < 1e-12);
    }

    #[test]
    fn mollifier_properties() {
        assert!(mollify(&cup_orientation(), 0.0, 3).is_err());
        assert!(mollify(&cup_orientation(), -1.0, 3).is_err());
        let z = mollify(&Cochain::zero(5), 0.1, 3).unwrap();
        assert_eq!(z.eval(&[0.0, 1.0, 2.0, 3.0, 4.0]), 0.0);

        let c = cup_orientation();
        let m = mollify(&c, 1e-6, 3).unwrap();
        let s = Sampler::new(5, "moll");
        for k in 0..20 {
            let x = s.admissible(k, 5, 1e-2);
            assert!((m.eval(&x) - c.eval(&x)).abs() < 1e-14);
        }
        let wide = mollify(&c, 0.3, 3).unwrap();
        for k in 0..20 {
            assert!(wide.eval(&s.admissible(100 + k, 5, 1e-3)).abs() <= CUP_CONSTANT + 1e-15);
        }
    }

    #[test]
    fn external_table_reproduces_invariant_cocycle() {
        let c = coboundary_crossratio(ProfileId::Cos2, 1.0);
        let table = ExternalTable::tabulate(&c, 256);
        let ext = external_cocycle(table).unwrap();
        let s = Sampler::new(6, "ext");
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let x = s.admissible(k, 5, 0.2);
            worst = worst.max((ext.eval(&x) - c.eval(&x)).abs());
        }
        assert!(worst < 0.05, "interpolation error {worst}");
        let k = make_k(0.4).unwrap();
        let x = [0.1, 1.3, 2.2, 4.0, 5.5];
        let kx = k.act_tuple(&x);
        assert!((ext.eval(&x) - ext.eval(&kx)).abs() < 1e-9);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = CocycleSpec::CoboundaryCrossratio {
            profile: ProfileId::Cos2,
            amplitude: 2.0,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<CocycleSpec>(&text).unwrap(), spec);
        let parsed: CocycleSpec = serde_json::from_str(r#"{"kind":"cup_orientation"}"#).unwrap();
        assert_eq!(parsed, CocycleSpec::CupOrientation);
    }
}
