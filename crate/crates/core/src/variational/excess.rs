use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::fd;
use crate::metric::{dot, norm, Point, Vector};
use crate::quadrature::periodic_trapezoid;

use super::lagrange::LagrangeContext;

/// Weierstrass excess `E = h(x,u) − h(x,ẋ) − (u − ẋ)·h_ẋ(x,ẋ)`, with the
/// velocity gradient taken by finite differences.
pub fn weierstrass_e(ctx: &LagrangeContext, x: Point, v: Vector, u: Vector) -> Result<f64> {
    if !(norm(u) > 0.0) {
        return Err(Error::domain("comparison direction must be nonzero"));
    }
    let grad = ctx.h_velocity_gradient(x, v)?;
    let d = [u[0] - v[0], u[1] - v[1]];
    Ok(ctx.h(x, u)? - ctx.h(x, v)? - dot(d, grad))
}

/// Closed form `E = (λ/|ẋ|)(|u||ẋ| − ẋ·u)`.
///
/// Written as `λ|u|·2sin²(φ/2)` with `φ` the angle between `u` and `ẋ`, so
/// the sign is exact in floating point.
pub fn weierstrass_e_closed(lambda: f64, v: Vector, u: Vector) -> f64 {
    let phi = (v[0] * u[1] - v[1] * u[0]).atan2(dot(v, u));
    let s = (0.5 * phi).sin();
    lambda * norm(u) * 2.0 * s * s
}

/// `J(γ, u) = ∫ E(γ, γ̇, u(t)) dt` for a comparison field `u(t, x, ẋ)`.
pub fn increment_j<U>(ctx: &LagrangeContext, curve: &ClosedCurve, mut u: U) -> Result<f64>
where
    U: FnMut(f64, Point, Vector) -> Vector,
{
    let samples = curve.samples();
    let mut values = Vec::with_capacity(samples.len());
    for j in 0..samples.len() {
        let (x, v) = (samples.position[j], samples.velocity[j]);
        values.push(weierstrass_e(ctx, x, v, u(samples.t[j], x, v))?);
    }
    Ok(periodic_trapezoid(&values))
}

/// `Σ h_{ẋⁱẋʲ} yⁱ yʲ = λ (ẋ²y¹ − ẋ¹y²)² / |ẋ|³`.
pub fn hdotdot_form(lambda: f64, v: Vector, y: Vector) -> Result<f64> {
    let s = norm(v);
    if !(s > 0.0) {
        return Err(Error::domain("velocity must be nonzero"));
    }
    let cross = v[1] * y[0] - v[0] * y[1];
    Ok(lambda * cross * cross / (s * s * s))
}

/// Same quadratic form from the finite-difference velocity Hessian of `h`.
pub fn hdotdot_form_fd(ctx: &LagrangeContext, x: Point, v: Vector, y: Vector) -> Result<f64> {
    let h = fd::step(fd::SECOND_ORDER_STEP, norm(v), 0.0);
    let m = fd::hessian(|w| ctx.h(x, *w), &v, &[h, h])?;
    Ok(m[0][0] * y[0] * y[0] + 2.0 * m[0][1] * y[0] * y[1] + m[1][1] * y[1] * y[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::VolumeKind;
    use crate::metric::{OneFormSpec, RandersPlane};

    fn ctx(lambda: f64) -> LagrangeContext {
        let plane = RandersPlane::new(OneFormSpec::polar(0.4, 0.6).unwrap());
        LagrangeContext::new(plane, VolumeKind::BH, lambda).unwrap()
    }

    #[test]
    fn excess_examples() {
        let c = ctx(-1.0);
        let e = weierstrass_e(&c, [1.0, 0.5], [0.0, 1.0], [1.0, 0.0]).unwrap();
        assert!((e + 1.0).abs() < 1e-9);
        assert!((weierstrass_e_closed(-1.0, [0.0, 1.0], [1.0, 0.0]) + 1.0).abs() < 1e-15);
        let ray = weierstrass_e(&c, [1.0, 0.5], [0.3, 1.0], [0.9, 3.0]).unwrap();
        assert!(ray.abs() < 1e-10);
        assert!(weierstrass_e_closed(-1.0, [0.3, 1.0], [0.9, 3.0]).abs() < 1e-30);
        // opposite direction: |u||ẋ| − ẋ·u = 2|u||ẋ|
        let opp = weierstrass_e_closed(-0.5, [2.0, 0.0], [-1.0, 0.0]);
        assert!((opp + 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_form_examples() {
        let q = hdotdot_form(-1.0, [0.0, 1.0], [1.0, 0.0]).unwrap();
        assert!((q + 1.0).abs() < 1e-15);
        assert_eq!(hdotdot_form(-1.0, [0.0, 1.0], [0.0, 2.0]).unwrap(), 0.0);
        assert!(hdotdot_form(-1.0, [0.0, 0.0], [1.0, 0.0]).is_err());
        let c = ctx(-1.7);
        for (v, y) in [([0.3, -1.2], [0.5, 0.5]), ([2.0, 1.0], [-1.0, 3.0])] {
            let exact = hdotdot_form(-1.7, v, y).unwrap();
            let approx = hdotdot_form_fd(&c, [0.8, -0.2], v, y).unwrap();
            assert!((exact - approx).abs() < 1e-7, "{exact} vs {approx}");
        }
    }

    #[test]
    fn increment_vanishes_for_tangent_field() {
        let c = ctx(-1.0);
        let circle = ClosedCurve::circle(1.0).unwrap();
        let j = increment_j(&c, &circle, |_, _, v| [2.0 * v[0], 2.0 * v[1]]).unwrap();
        assert!(j.abs() < 1e-8);
        let j = increment_j(&c, &circle, |_, x, _| x).unwrap();
        assert!((j + std::f64::consts::TAU).abs() < 1e-6);
    }
}
