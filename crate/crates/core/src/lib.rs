//! Matrix-free continuation NMPC.
//!
//! The crate is organised bottom-up:
//!
//! * [`krylov`]: dense LU, preconditioned GMRES (no restarts) and MINRES.
//! * [`continuation`]: the optimality residual `F[U, x, t]`, its
//!   forward-difference operator and the per-step continuation update.
//! * [`precond`]: the LU preconditioner rebuilt on a fixed time schedule.
//! * [`tfc`]: the minimum-time test problem with a band-constrained heading.
//! * [`sim`]: the closed-loop simulator, CSV logging and the CLI front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod error;
pub mod krylov;
pub mod precond;
pub mod sim;
pub mod tfc;

pub use error::{Error, Result};
