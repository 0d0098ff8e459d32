//! Wavefront Green's functions of viscoelastic media with completely
//! monotone attenuation kernels.
//!
//! A material is a creep compliance `J(t) = J0 + int_0^t J'` or a direct pair
//! `(c0, g)`. [`dispersion::Medium`] extracts the attenuation kernel `g`,
//! [`inversion`] inverts Laplace transforms on a Talbot contour to obtain the
//! wavefront kernel `H(tau, r)` and the field `u(t, x)`, and [`wavefront`]
//! checks the jump criterion, jump amplitude, asymptotic phase and upper
//! bounds by independent routes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cm;
mod error;
pub mod special;

pub use error::{Error, Result};
pub mod config;
pub mod dispersion;
pub mod inversion;
pub mod material;
pub mod run;
pub mod verify;
pub mod wavefront;
