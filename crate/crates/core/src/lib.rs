//! Randers planes `F = |y| + b(cos θ y¹ + sin θ y²)`: lengths and weighted
//! areas of closed Fourier curves, Finsler volume factors, the calculus of
//! variations around the isoperimetric problem, and a constrained optimizer.
//!
//! ```
//! use randers_core::{ClosedCurve, OneFormSpec, RandersPlane, VolumeKind};
//!
//! let plane = RandersPlane::new(OneFormSpec::polar(std::f64::consts::FRAC_PI_2, 0.5)?);
//! let circle = ClosedCurve::circle(1.0)?;
//! let length = randers_core::curve::randers_length(&plane, &circle)?;
//! assert!((length - 3.0 * std::f64::consts::PI).abs() < 1e-10);
//! let area = randers_core::curve::enclosed_area(&circle, VolumeKind::HT, plane.b())?;
//! assert!((area - std::f64::consts::PI).abs() < 1e-10);
//! # Ok::<(), randers_core::Error>(())
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod exprparse;
pub mod fd;
pub mod measure;
pub mod metric;
pub mod optimizer;
pub mod quadrature;
pub mod variational;

pub use curve::{ClosedCurve, CurveSamples, FourierCoord};
pub use error::{Error, Result};
pub use exprparse::Expr;
pub use measure::{PhiSpec, VolumeKind};
pub use metric::{
    AngleField, FundamentalTensor, OneFormSpec, Point, RandersPlane, TangentSample, Vector,
};
pub use optimizer::{OptimizationResult, OptimizerConfig};
pub use variational::{HestenesReport, LagrangeContext};
