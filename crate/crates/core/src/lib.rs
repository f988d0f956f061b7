//! Dirichlet energy minimizers of degree-j mappings between circular annuli.
//!
//! * [`closedform`]: radial harmonic minimizers, the bound, hybrid squeezing maps
//!   and their exact energies.
//! * [`polargrid`]: grid maps, polar derivatives, Jacobian, energy quadrature,
//!   winding and degree.
//! * [`optimizer`]: constrained numerical minimization over grid maps.
//! * [`certificates`]: free-Lagrangian identities and lower-bound certificates.
//! * [`cli`]: the `annulus` command line.

// `!(x > y)` comparisons deliberately reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod figure;
pub mod optimizer;
pub mod polargrid;

pub use error::{Error, Result};
