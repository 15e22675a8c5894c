//! The group `PU(1,1)` acting on the boundary circle.
//!
//! Elements are stored as `SU(1,1)` matrices
//!
//! ```text
//!     | a      b    |
//!     | conj b conj a |,      |a|^2 - |b|^2 = 1,
//! ```
//!
//! modulo the sign `(a, b) ~ (-a, -b)`. They act on the unit circle by
//! `z -> (a z + b) / (conj(b) z + conj(a))`, and on angles through `z = e^{i theta}`.
//!
//! The three one-parameter subgroups are parametrised so that their fundamental
//! vector fields on the circle are `1`, `sin(theta)` and `1 - cos(theta)`:
//! rotations `k_xi`, hyperbolic `a_s` fixing `+-1`, and parabolic `n_t` fixing `1`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Angles within this distance below `2 pi` are reported as `0`.
const WRAP_SNAP: f64 = 1e-14;

/// Reduce an angle into `[0, 2 pi)` by floored modulo.
#[inline]
pub fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if TAU - r <= WRAP_SNAP {
        0.0
    } else {
        r
    }
}

/// Signed distance between two angles, reduced into `(-pi, pi]`.
#[inline]
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// A point of the circle in angular coordinates, always reduced into `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        Angle(wrap(theta))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_point(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }

    pub fn from_point(z: Complex64) -> Self {
        Angle::new(z.arg())
    }

    /// Complex conjugation on the circle: `theta -> -theta`.
    pub fn conjugate(self) -> Self {
        Angle::new(-self.0)
    }
}

impl std::ops::Add<f64> for Angle {
    type Output = Angle;
    fn add(self, rhs: f64) -> Angle {
        Angle::new(self.0 + rhs)
    }
}

impl std::ops::Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle::new(self.0 - rhs.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// An element of `PU(1,1)`, canonicalised so that equal group elements compare equal.
#[derive(Clone, Copy, Debug)]
pub struct GroupElement {
    a: Complex64,
    b: Complex64,
}

/// Tolerance used by [`GroupElement::approx_eq`] and by `PartialEq`.
const ELEMENT_EQ_TOL: f64 = 1e-10;

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, ELEMENT_EQ_TOL)
    }
}

impl GroupElement {
    /// Build `[g_{a,b}]`, rescaling onto `|a|^2 - |b|^2 = 1`.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        let det = a.norm_sqr() - b.norm_sqr();
        if det <= 0.0 {
            return Err(Error::InvalidArgument(format!("|a|^2 - |b|^2 = {det} is not positive")));
        }
        Ok(Self::normalized(a, b))
    }

    fn normalized(a: Complex64, b: Complex64) -> Self {
        let scale = (a.norm_sqr() - b.norm_sqr()).sqrt();
        let (mut a, mut b) = (a / scale, b / scale);
        let first = [a.re, a.im, b.re, b.im].into_iter().find(|x| *x != 0.0).unwrap_or(1.0);
        if first < 0.0 {
            a = -a;
            b = -b;
        }
        GroupElement { a, b }
    }

    pub fn identity() -> Self {
        GroupElement {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `|a|^2 - |b|^2 - 1`, which construction keeps at rounding level.
    pub fn normalization_defect(&self) -> f64 {
        (self.a.norm_sqr() - self.b.norm_sqr() - 1.0).abs()
    }

    /// Distance between canonical representatives.
    pub fn distance(&self, other: &Self) -> f64 {
        let d1 = (self.a - other.a).norm() + (self.b - other.b).norm();
        let d2 = (self.a + other.a).norm() + (self.b + other.b).norm();
        d1.min(d2)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Matrix product `self * other`: acting by `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        // (a1 b1; b1* a1*) (a2 b2; b2* a2*)
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        Self::normalized(a, b)
    }

    pub fn inverse(&self) -> Self {
        Self::normalized(self.a.conj(), -self.b)
    }

    /// Möbius action on a point of the unit circle.
    #[inline]
    pub fn act_point(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// Action on angles: `e^{i theta'} = (a e^{i theta} + b) / (conj(b) e^{i theta} + conj(a))`.
    #[inline]
    pub fn act(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        wrap(self.act_point(z).arg())
    }

    pub fn act_angle(&self, theta: Angle) -> Angle {
        Angle(self.act(theta.value()))
    }

    /// Derivative of the angular action, `|g'(z)| = 1 / |conj(b) z + conj(a)|^2`.
    #[inline]
    pub fn jacobian(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        1.0 / (self.b.conj() * z + self.a.conj()).norm_sqr()
    }

    /// Diagonal action on a tuple of angles.
    pub fn act_tuple(&self, thetas: &[f64]) -> Vec<f64> {
        thetas.iter().map(|&t| self.act(t)).collect()
    }

    /// `k_xi . a_s . n_t`, the Iwasawa parametrisation `G = KAN`.
    pub fn iwasawa(xi: f64, s: f64, t: f64) -> Result<Self> {
        Ok(make_k(xi)?.compose(&make_a(s)?).compose(&make_n(t)?))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[a={}, b={}]", self.a, self.b)
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {x} is not finite")))
    }
}

/// Rotation `k_xi = [g_{e^{i xi/2}, 0}]`, acting by `theta -> theta + xi`.
pub fn make_k(xi: f64) -> Result<GroupElement> {
    check_finite("xi", xi)?;
    Ok(GroupElement::normalized(
        Complex64::from_polar(1.0, xi / 2.0),
        Complex64::new(0.0, 0.0),
    ))
}

/// Hyperbolic element `a_s = [g_{cosh(-s/2), sinh(-s/2)}]`.
pub fn make_a(s: f64) -> Result<GroupElement> {
    check_finite("s", s)?;
    Ok(GroupElement::normalized(
        Complex64::new((-s / 2.0).cosh(), 0.0),
        Complex64::new((-s / 2.0).sinh(), 0.0),
    ))
}

/// Parabolic element `n_t = [g_{1 + i t/2, -i t/2}]`.
pub fn make_n(t: f64) -> Result<GroupElement> {
    check_finite("t", t)?;
    Ok(GroupElement::normalized(
        Complex64::new(1.0, t / 2.0),
        Complex64::new(0.0, -t / 2.0),
    ))
}

/// Closed-form A-flow: `log|tan(theta/2)|` advances by `s`.
#[inline]
pub fn flow_a(s: f64, theta: f64) -> f64 {
    let (sin_h, cos_h) = (theta / 2.0).sin_cos();
    wrap(2.0 * (s.exp() * sin_h).atan2(cos_h))
}

/// Closed-form N-flow: `cot(theta/2)` decreases by `t`.
#[inline]
pub fn flow_n(t: f64, theta: f64) -> f64 {
    let (sin_h, cos_h) = (theta / 2.0).sin_cos();
    wrap(2.0 * sin_h.atan2(cos_h - t * sin_h))
}

/// The one-parameter subgroups, as flows on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Flow {
    K,
    A,
    N,
}

impl Flow {
    pub const ALL: [Flow; 3] = [Flow::K, Flow::A, Flow::N];

    /// Time-`u` flow applied to a single angle.
    #[inline]
    pub fn apply(self, u: f64, theta: f64) -> f64 {
        match self {
            Flow::K => wrap(theta + u),
            Flow::A => flow_a(u, theta),
            Flow::N => flow_n(u, theta),
        }
    }

    /// Coefficient of the fundamental vector field: `1`, `sin`, `1 - cos`.
    #[inline]
    pub fn field(self, theta: f64) -> f64 {
        match self {
            Flow::K => 1.0,
            Flow::A => theta.sin(),
            Flow::N => 1.0 - theta.cos(),
        }
    }

    pub fn element(self, u: f64) -> Result<GroupElement> {
        match self {
            Flow::K => make_k(u),
            Flow::A => make_a(u),
            Flow::N => make_n(u),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Flow::K => "K",
            Flow::A => "A",
            Flow::N => "N",
        }
    }
}

/// Points closer than this are treated as coincident by [`cross_ratio`].
const COINCIDENCE_TOL: f64 = 1e-14;

/// Cross-ratio `(w0, w1; w2, w3) = (w0-w2)(w1-w3) / ((w1-w2)(w0-w3))`.
///
/// Coincidences in the numerator give `0`; coincidences in the denominator
/// (`w1 = w2` or `w0 = w3`) are an error.
pub fn cross_ratio(w0: Complex64, w1: Complex64, w2: Complex64, w3: Complex64) -> Result<Complex64> {
    if (w1 - w2).norm() < COINCIDENCE_TOL || (w0 - w3).norm() < COINCIDENCE_TOL {
        return Err(Error::DegenerateConfiguration("cross ratio has a vanishing denominator".into()));
    }
    Ok((w0 - w2) * (w1 - w3) / ((w1 - w2) * (w0 - w3)))
}

/// Cross-ratio of four circle points given by angle; real-valued.
///
/// Uses `e^{ia} - e^{ib} = 2i sin((a-b)/2) e^{i(a+b)/2}`, so the phases cancel.
#[inline]
pub fn cross_ratio_angles(t0: f64, t1: f64, t2: f64, t3: f64) -> f64 {
    let s = |x: f64, y: f64| ((x - y) * 0.5).sin();
    (s(t0, t2) * s(t1, t3)) / (s(t1, t2) * s(t0, t3))
}

/// Cayley transform `x -> (x - i) / (x + i)` from the real line to the circle.
pub fn cayley(x: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (Complex64::new(x, 0.0) - i) / (Complex64::new(x, 0.0) + i)
}
