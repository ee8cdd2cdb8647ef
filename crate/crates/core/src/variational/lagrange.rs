use crate::curve::{check_origin_clearance, ClosedCurve, CurveSamples, DEFAULT_R_MIN};
use crate::error::{Error, Result};
use crate::fd;
use crate::measure::{sigma_closed, VolumeKind};
use crate::metric::{dot, norm, AngleField, Point, RandersPlane, Vector};
use crate::quadrature::spectral_derivative;

/// Floor for the spatial finite-difference scale.
const SPATIAL_FLOOR: f64 = 1e-3;

/// The Lagrange function `h = f + λg` of the isoperimetric problem, with
/// `f = (σ/2)(x¹ẋ² − x²ẋ¹)` the area density and `g` the Randers length
/// density.
#[derive(Debug, Clone)]
pub struct LagrangeContext {
    plane: RandersPlane,
    kind: VolumeKind,
    lambda: f64,
    sigma: f64,
}

impl LagrangeContext {
    pub fn new(plane: RandersPlane, kind: VolumeKind, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::domain(format!(
                "multiplier must be finite, got {lambda}"
            )));
        }
        let sigma = sigma_closed(kind, plane.b(), 2)?;
        Ok(LagrangeContext {
            plane,
            kind,
            lambda,
            sigma,
        })
    }

    pub fn plane(&self) -> &RandersPlane {
        &self.plane
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        LagrangeContext::new(self.plane.clone(), self.kind, lambda)
    }

    /// Area density `f`.
    pub fn area_density(&self, x: Point, v: Vector) -> f64 {
        0.5 * self.sigma * (x[0] * v[1] - x[1] * v[0])
    }

    /// Length density `g = |ẋ| + β(x)·ẋ`.
    pub fn length_density(&self, x: Point, v: Vector) -> Result<f64> {
        if !(norm(v) > 0.0) {
            return Err(Error::domain("velocity must be nonzero"));
        }
        self.plane.eval_f(x, v)
    }

    pub fn h(&self, x: Point, v: Vector) -> Result<f64> {
        Ok(self.area_density(x, v) + self.lambda * self.length_density(x, v)?)
    }

    /// `h` for the curve `(r cos t, r sin t)` written in terms of `r`, `ṙ`, `t`.
    pub fn h_polar(&self, r: f64, r_dot: f64, t: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {r}")));
        }
        let b = self.plane.b();
        let theta = self.plane.theta([r * t.cos(), r * t.sin()])?;
        let beta = b * (r_dot * (theta - t).cos() + r * (theta - t).sin());
        Ok(0.5 * self.sigma * r * r + self.lambda * (r.hypot(r_dot) + beta))
    }

    /// `∂h/∂ẋ` at `(x, ẋ)`.
    pub fn h_velocity_gradient(&self, x: Point, v: Vector) -> Result<Vector> {
        let h = fd::step(fd::FIRST_ORDER_STEP, norm(v), 0.0);
        fd::gradient(|w| self.h(x, *w), &v, &[h, h])
    }

    /// `∂h/∂x` at `(x, ẋ)`.
    pub fn h_position_gradient(&self, x: Point, v: Vector) -> Result<Vector> {
        let h = fd::step(fd::FIRST_ORDER_STEP, norm(x), SPATIAL_FLOOR);
        fd::gradient(|p| self.h(*p, v), &x, &[h, h])
    }

    /// Full Hessian of `h` in `(x¹, x², ẋ¹, ẋ²)`.
    pub fn h_hessian(&self, x: Point, v: Vector) -> Result<[[f64; 4]; 4]> {
        let hx = fd::step(fd::SECOND_ORDER_STEP, norm(x), SPATIAL_FLOOR);
        let hv = fd::step(fd::SECOND_ORDER_STEP, norm(v), 0.0);
        fd::hessian(
            |z| self.h([z[0], z[1]], [z[2], z[3]]),
            &[x[0], x[1], v[0], v[1]],
            &[hx, hx, hv, hv],
        )
    }
}

/// Position and velocity gradients of the length density `g`.
pub(crate) fn length_gradients(
    plane: &RandersPlane,
    x: Point,
    v: Vector,
) -> Result<(Vector, Vector)> {
    let g = |p: Point, w: Vector| plane.eval_f(p, w);
    let hx = fd::step(fd::FIRST_ORDER_STEP, norm(x), SPATIAL_FLOOR);
    let hv = fd::step(fd::FIRST_ORDER_STEP, norm(v), 0.0);
    let gx = fd::gradient(|p| g(*p, v), &x, &[hx, hx])?;
    let gv = fd::gradient(|w| g(x, *w), &v, &[hv, hv])?;
    Ok((gx, gv))
}

/// `λ` making circles of radius `a` about the origin extremal:
/// `λ = −a σ / (1 + b θ̇ sin(θ − t))`, where `θ̇ sin(θ − t)` is `0` for a
/// constant angle field and `sin c` for the polar field `θ = t + c`.
pub fn multiplier_for_circle(plane: &RandersPlane, kind: VolumeKind, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "circle radius must be positive, got {a}"
        )));
    }
    let sigma = sigma_closed(kind, plane.b(), 2)?;
    let coupling = match plane.one_form().angle() {
        AngleField::Constant(_) => 0.0,
        AngleField::Polar(c) => c.sin(),
        AngleField::Expression(_) => {
            return Err(Error::Unsupported(
                "no closed-form multiplier for expression angle fields; fit it from the Euler-Lagrange residual".into(),
            ))
        }
    };
    let denom = 1.0 + plane.b() * coupling;
    if !(denom > 0.0) {
        return Err(Error::domain("multiplier denominator is not positive"));
    }
    Ok(-a * sigma / denom)
}

/// Euler–Lagrange residual `∂h/∂xⁱ − d/dt ∂h/∂ẋⁱ` on the sampling grid.
#[derive(Debug, Clone)]
pub struct ElResidual {
    pub t: Vec<f64>,
    pub residual: Vec<Vector>,
}

impl ElResidual {
    pub fn sup_norm(&self) -> f64 {
        self.residual.iter().map(|r| norm(*r)).fold(0.0, f64::max)
    }
}

fn el_of_samples(ctx: &LagrangeContext, samples: &CurveSamples) -> Result<ElResidual> {
    check_origin_clearance(ctx.plane(), samples, DEFAULT_R_MIN)?;
    let n = samples.len();
    let mut hx = Vec::with_capacity(n);
    let mut hv = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for (x, v) in samples.position.iter().zip(&samples.velocity) {
        hx.push(ctx.h_position_gradient(*x, *v)?);
        let gv = ctx.h_velocity_gradient(*x, *v)?;
        hv[0].push(gv[0]);
        hv[1].push(gv[1]);
    }
    let d0 = spectral_derivative(&hv[0]);
    let d1 = spectral_derivative(&hv[1]);
    let residual = (0..n)
        .map(|j| [hx[j][0] - d0[j], hx[j][1] - d1[j]])
        .collect();
    Ok(ElResidual {
        t: samples.t.clone(),
        residual,
    })
}

pub fn el_residual(ctx: &LagrangeContext, curve: &ClosedCurve) -> Result<ElResidual> {
    el_of_samples(ctx, &curve.samples())
}

/// Least-squares multiplier: the `λ` minimizing the discrete L² norm of
/// the Euler–Lagrange residual on `curve`.
pub fn fit_multiplier(plane: &RandersPlane, kind: VolumeKind, curve: &ClosedCurve) -> Result<f64> {
    let samples = curve.samples();
    let area = el_of_samples(&LagrangeContext::new(plane.clone(), kind, 0.0)?, &samples)?;
    let with_length = el_of_samples(&LagrangeContext::new(plane.clone(), kind, 1.0)?, &samples)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (ra, rb) in area.residual.iter().zip(&with_length.residual) {
        let rg = [rb[0] - ra[0], rb[1] - ra[1]];
        num += dot(*ra, rg);
        den += dot(rg, rg);
    }
    if !(den > 0.0) {
        return Err(Error::domain(
            "length density has vanishing Euler-Lagrange operator on this curve",
        ));
    }
    Ok(-num / den)
}

/// How `θ` enters `g` when differentiating along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleConvention {
    /// `θ` is a function of position; `g_x` carries its spatial gradient.
    #[default]
    Spatial,
    /// `θ` is frozen to its values `θ(γ(t))` along the curve, so `g_x = 0`
    /// and only the `t`-derivative of `g_ẋ` remains.
    FrozenAlongCurve,
}

/// `Pᵢ = g_{xⁱ} − d/dt g_{ẋⁱ}` along a curve.
#[derive(Debug, Clone)]
pub struct Normality {
    pub t: Vec<f64>,
    pub p: Vec<Vector>,
    pub min_norm: f64,
    pub max_abs: [f64; 2],
}

impl Normality {
    /// Each component is a nonzero function (max |Pᵢ| above `threshold`).
    pub fn is_normal(&self, threshold: f64) -> bool {
        self.max_abs[0] > threshold && self.max_abs[1] > threshold
    }
}

pub fn normality(
    plane: &RandersPlane,
    curve: &ClosedCurve,
    convention: AngleConvention,
) -> Result<Normality> {
    let samples = curve.samples();
    check_origin_clearance(plane, &samples, DEFAULT_R_MIN)?;
    let n = samples.len();
    let mut gx = Vec::with_capacity(n);
    let mut gv = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for (x, v) in samples.position.iter().zip(&samples.velocity) {
        let (px, pv) = length_gradients(plane, *x, *v)?;
        gx.push(match convention {
            AngleConvention::Spatial => px,
            AngleConvention::FrozenAlongCurve => [0.0, 0.0],
        });
        gv[0].push(pv[0]);
        gv[1].push(pv[1]);
    }
    let d0 = spectral_derivative(&gv[0]);
    let d1 = spectral_derivative(&gv[1]);
    let p: Vec<Vector> = (0..n)
        .map(|j| [gx[j][0] - d0[j], gx[j][1] - d1[j]])
        .collect();
    let min_norm = p.iter().map(|v| norm(*v)).fold(f64::INFINITY, f64::min);
    let max_abs = p.iter().fold([0.0f64; 2], |m, v| {
        [m[0].max(v[0].abs()), m[1].max(v[1].abs())]
    });
    Ok(Normality {
        t: samples.t,
        p,
        min_norm,
        max_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::OneFormSpec;
    use std::f64::consts::PI;

    fn polar(c: f64, b: f64) -> RandersPlane {
        RandersPlane::new(OneFormSpec::polar(c, b).unwrap())
    }

    #[test]
    fn h_examples() {
        let ctx =
            LagrangeContext::new(RandersPlane::euclidean_oracle(), VolumeKind::HT, -1.0).unwrap();
        assert!((ctx.h([1.0, 0.0], [0.0, 1.0]).unwrap() + 0.5).abs() < 1e-15);
        assert!(ctx.h([1.0, 0.0], [0.0, 0.0]).is_err());

        let ctx = LagrangeContext::new(polar(0.0, 0.5), VolumeKind::BH, -0.3).unwrap();
        let expected = 0.75f64.powf(1.5) / 2.0 - 0.3;
        assert!((ctx.h([1.0, 0.0], [0.0, 1.0]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn polar_form_matches_cartesian() {
        let ctx = LagrangeContext::new(polar(0.7, 0.4), VolumeKind::Max, -1.3).unwrap();
        for &(r, rd, t) in &[(1.0, 0.0, 0.3), (0.5, 0.2, 2.0), (2.0, -1.0, 4.5)] {
            let (s, c) = f64::sin_cos(t);
            let x = [r * c, r * s];
            let v = [rd * c - r * s, rd * s + r * c];
            let cart = ctx.h(x, v).unwrap();
            let pol = ctx.h_polar(r, rd, t).unwrap();
            assert!((cart - pol).abs() < 1e-12, "{cart} vs {pol}");
        }
        assert!(ctx.h_polar(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn polar_form_on_circle() {
        let (a, b, c, lambda) = (1.5, 0.6, 0.9, -0.8);
        let ctx = LagrangeContext::new(polar(c, b), VolumeKind::BH, lambda).unwrap();
        let expected = 0.5 * (1.0 - b * b).powf(1.5) * a * a + lambda * a * (1.0 + b * c.sin());
        assert!((ctx.h_polar(a, 0.0, 1.234).unwrap() - expected).abs() < 1e-12);
        let e =
            LagrangeContext::new(RandersPlane::euclidean_oracle(), VolumeKind::BH, lambda).unwrap();
        assert!((e.h_polar(a, 0.0, 0.1).unwrap() - (0.5 * a * a + lambda * a)).abs() < 1e-12);
    }

    #[test]
    fn multiplier_examples() {
        let sigma = 0.75f64.powf(1.5);
        let constant = RandersPlane::new(OneFormSpec::constant(2.0, 0.5).unwrap());
        assert!(
            (multiplier_for_circle(&constant, VolumeKind::BH, 2.0).unwrap() + 2.0 * sigma).abs()
                < 1e-15
        );
        assert!(
            (multiplier_for_circle(&polar(0.0, 0.5), VolumeKind::BH, 1.0).unwrap() + sigma).abs()
                < 1e-15
        );
        let l = multiplier_for_circle(&polar(PI / 2.0, 0.5), VolumeKind::BH, 1.0).unwrap();
        assert!((l + 0.433_012_701_892_219_3).abs() < 1e-12);
        let expr = RandersPlane::new(OneFormSpec::expression("x1", 0.5).unwrap());
        assert!(matches!(
            multiplier_for_circle(&expr, VolumeKind::BH, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn euclidean_circle_is_extremal() {
        let ctx =
            LagrangeContext::new(RandersPlane::euclidean_oracle(), VolumeKind::HT, -2.0).unwrap();
        let c = ClosedCurve::circle(2.0).unwrap();
        assert!(el_residual(&ctx, &c).unwrap().sup_norm() < 1e-8);
    }

    #[test]
    fn area_term_alone_is_not_extremal() {
        let b = 0.5;
        let ctx = LagrangeContext::new(polar(0.3, b), VolumeKind::BH, 0.0).unwrap();
        let a = 1.5;
        let r = el_residual(&ctx, &ClosedCurve::circle(a).unwrap())
            .unwrap()
            .sup_norm();
        assert!((r - ctx.sigma() * a).abs() < 1e-8);
    }

    #[test]
    fn fitted_multiplier_matches_closed_form_on_circle() {
        let plane = polar(PI / 2.0, 0.3);
        let c = ClosedCurve::circle(0.5).unwrap();
        let fit = fit_multiplier(&plane, VolumeKind::Min, &c).unwrap();
        let exact = multiplier_for_circle(&plane, VolumeKind::Min, 0.5).unwrap();
        assert!((fit - exact).abs() < 1e-9);
    }

    #[test]
    fn normality_on_unit_circle() {
        let c = ClosedCurve::circle(1.0).unwrap();
        let frozen = normality(&polar(0.0, 0.5), &c, AngleConvention::FrozenAlongCurve).unwrap();
        assert!((frozen.p[0][0] - 1.0).abs() < 1e-9 && (frozen.p[0][1] + 0.5).abs() < 1e-9);
        // θ = atan2(x², x¹) also varies in space; its gradient cancels the β part of P₂ at t = 0
        let spatial = normality(&polar(0.0, 0.5), &c, AngleConvention::Spatial).unwrap();
        assert!((spatial.p[0][0] - 1.0).abs() < 1e-9 && spatial.p[0][1].abs() < 1e-9);
        let e = normality(
            &RandersPlane::euclidean_oracle(),
            &c,
            AngleConvention::Spatial,
        )
        .unwrap();
        assert!((e.min_norm - 1.0).abs() < 1e-9 && e.is_normal(1e-8));
    }
}
