//! Importance sampling with mixtures of mean-shifted Gaussians, where the
//! mixture is chosen by cross-entropy iterations that reduce to EM steps.
//!
//! A typical run picks a starting mixture with one of the [`init`]
//! strategies, refines it with [`ce::run_ce`], and estimates with
//! [`estimator::is_estimate`]:
//!
//! ```
//! use mixtilt::{ce, estimator, init, models, math};
//!
//! let model = models::TwoSidedTail::new(models::TwoSidedTailSpec { a: 1.0, b: -1.5 })?;
//! let theta0 = init::init_approx(&model)?;
//! let cfg = ce::CeConfig { pilot_size: 2000, ..Default::default() };
//! let trace = ce::run_ce(&model, theta0, &cfg, 7)?;
//! let stream = math::RngStream::new(7, math::Phase::FinalIs);
//! let report = estimator::is_estimate(&model, &trace.theta, 20_000, stream)?;
//! assert!((report.estimate - 0.2255).abs() < 4.0 * report.std_error + 1e-3);
//! # Ok::<(), mixtilt::Error>(())
//! ```

pub mod ce;
mod error;
pub mod estimator;
pub mod init;
pub mod math;
pub mod models;
pub mod tilt;

pub use error::{Error, Result};
