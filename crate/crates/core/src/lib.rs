//! Desk-scale numerical verification of dimension-free volume estimates for
//! sublevel sets of bounded analytic functions.
//!
//! The crate is organised around the ingredients of the estimate:
//!
//! * [`analytic`]: multivariate complex polynomials on the complex unit ball
//!   with a certified sup-norm bound;
//! * [`mobius`]: the radial change of variables `T(z) = φ(Σ z_j²)·z` and
//!   checks of its monotonicity, Jacobian log-concavity, curvature bound and
//!   pre-image convexity;
//! * [`remez`]: the one-dimensional Remez property of bounded analytic
//!   functions on the disk through the Blaschke/outer factorization;
//! * [`kls`]: the geometric Kannan–Lovász–Simonovits inequality for
//!   log-concave weights;
//! * [`volume`]: Monte Carlo distribution of `|F|` on real balls and the
//!   distributional bounds themselves;
//! * [`counterexample`]: thin rectangles on which no function-independent
//!   exponent can work;
//! * [`runner`]: JSON-configured experiments with reproducible reports.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod analytic;
pub mod counterexample;
pub mod error;
pub mod interval;
pub mod kls;
pub mod mobius;
pub mod remez;
pub mod report;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod univariate;
pub mod volume;

pub use error::{Error, Result};
pub use num_complex::Complex64;
