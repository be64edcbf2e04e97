//! Exact extremality testing for continuous piecewise linear functions over
//! the standard triangulation `P_q` of the two-dimensional torus.
//!
//! The pipeline is: [`checks::check_minimality`] gates the input,
//! [`additivity::enumerate_e`] finds the additive triples, and
//! [`driver::decide`] runs either the finite linear-system test or the
//! structural classification with explicit perturbations.

pub mod additivity;
pub mod checks;
pub mod driver;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod imposing;
pub mod io;
pub mod linsys;
pub mod perturb;
pub mod plf;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::{Complex, Face, FaceKind, GridPoint, TorusPoint};
pub use plf::{PLFunction, SlackTable};
pub use scalar::{Rat, Scalar};

/// Exact rational piecewise linear function, the type used throughout the
/// decision procedure.
pub type Function = PLFunction<Rat>;
/// Floating-point variant, handy for plotting and quick evaluation.
pub type FunctionF64 = PLFunction<f64>;
pub type Slack = SlackTable<Rat>;
pub type Point = TorusPoint<Rat>;
