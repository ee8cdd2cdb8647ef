//! Benchmark fixtures shared by the `kernels` bench.

use std::f64::consts::FRAC_PI_2;

use randers_core::{ClosedCurve, LagrangeContext, OneFormSpec, RandersPlane, VolumeKind};

/// Polar field `c = π/2`, `b = 0.5`.
pub fn swirl() -> RandersPlane {
    RandersPlane::new(OneFormSpec::polar(FRAC_PI_2, 0.5).expect("valid one-form"))
}

/// Unit circle with its closed-form multiplier under [`swirl`].
pub fn verified_circle() -> (LagrangeContext, ClosedCurve) {
    let plane = swirl();
    let lambda = randers_core::variational::multiplier_for_circle(&plane, VolumeKind::BH, 1.0)
        .expect("circle");
    let ctx = LagrangeContext::new(plane, VolumeKind::BH, lambda).expect("context");
    (ctx, ClosedCurve::circle(1.0).expect("circle"))
}
