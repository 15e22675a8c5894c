//! Bounded invariant primitives for bounded 4-cocycles on the boundary circle
//! of `PU(1,1)`, computed by quadrature, an ODE solve and integration along
//! characteristics, together with numerical checks of every identity used.
//!
//! The pipeline, for an alternating invariant cocycle `c` of arity 5:
//!
//! 1. [`kernels`] averages `c` into the kernels `c_sharp`, `c_flat` and `c_check`,
//!    solves for `r` and assembles the inhomogeneities `F_sharp`, `F_flat`.
//! 2. [`characteristics`] integrates those along `A`- and `N`-orbits to get `f0`
//!    on the two-variable domain, lifts it to a rotation-invariant `f`, and
//!    returns the primitive `I(c) + df`.
//! 3. [`verify`] measures every intermediate identity and reports residuals;
//!    [`convergence`] records the ladders the tolerances were frozen from.

pub mod characteristics;
pub mod cochain;
pub mod config;
pub mod convergence;
pub mod error;
pub mod kernels;
pub mod moebius;
pub mod ode;
pub mod output;
pub mod quadrature;
pub mod sampling;
pub mod verify;
pub mod zoo;
pub use error::{Error, Result};
