//! Numerical laboratory for fractal measures on the moment curve.
//!
//! The library builds random Cantor cascades on `[0,1]`, pushes them forward
//! onto the moment curve `γ(t) = (t, t², …, t^d)`, evaluates the Fourier
//! transforms of the resulting measures by certified oscillatory quadrature,
//! and provides experiment drivers that probe decay exponents, `L^p`
//! integrability thresholds, frequency-cell volumes, martingale
//! concentration, and Knapp-type scaling.
//!
//! Everything is deterministic: randomness comes from counter-based streams
//! keyed by explicit seeds, so identical inputs reproduce identical outputs
//! regardless of evaluation order.
//!
//! ```
//! use momentlab::curve::MomentCurve;
//!
//! let curve = MomentCurve::new(3).unwrap();
//! let p = curve.evaluate(0.5);
//! assert_eq!(p.as_slice(), &[0.5, 0.25, 0.125]);
//! ```

pub mod cascade;
pub mod config;
pub mod curve;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod freq;
pub mod poly;
pub mod quad;
pub mod report;
pub mod run;
pub mod stream;

pub use error::Error;

/// Library version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
