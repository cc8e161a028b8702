//! Simulator and analytic error models for the Kirchhoff-law-Johnson-noise
//! (KLJN) secure key exchange.
//!
//! Alice and Bob each connect one of two public resistors, `R0 = R` or
//! `R1 = alpha R`, to a shared wire, each driven by its own Johnson-like noise
//! generator. From the mean-square wire voltage and current they learn the
//! loop resistance; when they hold opposite bits (01/10) an observer cannot
//! tell which end holds which resistor and one secret bit is shared. A finite
//! averaging time makes the measured mean squares fluctuate, so an insecure
//! 00 or 11 period is sometimes read as secure. Those are the dangerous
//! errors this crate simulates and models.
//!
//! Module map:
//!
//! - [`noise`]: band-limited Gaussian synthesis and periodograms
//! - [`circuit`]: resistor choice, noise levels, Kirchhoff loop solution
//! - [`estimator`]: finite-time mean squares and squared-noise spectra
//! - [`analytic`]: Rice crossing rate and closed-form error probabilities
//! - [`decision`]: threshold bands, bit interpretation, combined verdict
//! - [`protocol`]: seeded sessions, error accounting, key extraction
//! - [`config`] and [`experiment`]: configuration files and batch runs
//!
//! ```
//! use kljn::analytic::epsilon_combined;
//!
//! let eps = epsilon_combined(0.5, 0.5, 100.0).unwrap();
//! assert!((eps.value - 1.24e-6).abs() < 1e-8);
//! ```

pub mod analytic;
pub mod circuit;
pub mod config;
pub mod decision;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod noise;
pub mod protocol;
pub mod stats;

pub use config::{Mode, SystemConfig};
pub use error::{Error, Result};
