//! Unitary 1- and 2-designs for two-mode (polarisation) optics.
//!
//! The crate is organised bottom-up:
//!
//! - [`su2`]: SU(2) parameters, wave-plate Jones matrices, interferometer
//!   composition, design ensembles and Haar sampling.
//! - [`tables`]: the bundled wave-plate settings (design elements and the
//!   `p`, `q`, `r` probe settings).
//! - [`multiphoton`]: permanents, Fock-state transition probabilities,
//!   partial distinguishability and HOM scans.
//! - [`poly`], [`basis`], [`moments`]: real polynomials in `(x1, y1, x2, y2)`,
//!   constraint reduction and rank checks, Haar moments and the design test.
//! - [`virtlab`]: counting noise, loss calibration, fidelity and uniformity
//!   metrics, plan execution and figure datasets.
//! - [`cli`]: the command-line front end used by the `photodesign` binary.

pub mod basis;
pub mod cli;
mod error;
pub mod format;
pub mod moments;
pub mod multiphoton;
pub mod poly;
pub mod su2;
pub mod tables;
pub mod virtlab;

pub use error::{Error, Result};
pub use multiphoton::{FockInput, MismatchModel, Outcome, OutcomeDistribution};
pub use poly::PolynomialR4;
pub use su2::{Ensemble, Su2Params, UnitaryMat2, WavePlateAngles};
