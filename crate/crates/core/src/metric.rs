//! The Randers metric `F = α + β` on the plane, with `α` Euclidean and
//! `β = b (cos θ(x) dx¹ + sin θ(x) dx²)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::exprparse::Expr;
use crate::fd;

/// Points closer than this to the origin are rejected by polar angle fields.
pub const ORIGIN_EXCLUSION: f64 = 1e-9;

pub type Point = [f64; 2];
pub type Vector = [f64; 2];

pub(crate) fn norm(v: Vector) -> f64 {
    v[0].hypot(v[1])
}

pub(crate) fn dot(a: Vector, b: Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// The angle field `θ(x¹, x²)` of the one-form.
#[derive(Debug, Clone)]
pub enum AngleField {
    /// `θ ≡ c`; the one-form is exact and the plane is Minkowski.
    Constant(f64),
    /// `θ = atan2(x², x¹) + c`.
    Polar(f64),
    /// `θ` given by a user expression in `x1`, `x2`.
    Expression(Expr),
}

impl AngleField {
    /// Parses `θ` from an expression in `x1` and `x2`.
    pub fn expression(source: &str) -> Result<AngleField> {
        Ok(AngleField::Expression(Expr::parse(source, &["x1", "x2"])?))
    }

    pub fn theta(&self, x: Point) -> Result<f64> {
        match self {
            AngleField::Constant(c) => Ok(*c),
            AngleField::Polar(c) => {
                if norm(x) <= ORIGIN_EXCLUSION {
                    return Err(Error::domain(format!(
                        "polar angle field is undefined at ({}, {})",
                        x[0], x[1]
                    )));
                }
                Ok(x[1].atan2(x[0]) + c)
            }
            AngleField::Expression(e) => e.eval(&x),
        }
    }
}

impl fmt::Display for AngleField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleField::Constant(c) => write!(f, "constant:{c}"),
            AngleField::Polar(c) => write!(f, "polar:{c}"),
            AngleField::Expression(e) => write!(f, "expr:\"{}\"", e.source()),
        }
    }
}

/// The one-form `β`: an angle field and its constant Euclidean norm `b`.
#[derive(Debug, Clone)]
pub struct OneFormSpec {
    angle: AngleField,
    amplitude: f64,
}

impl OneFormSpec {
    /// Requires `0 < b < 1`.
    pub fn new(angle: AngleField, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude < 1.0) {
            return Err(Error::domain(format!(
                "one-form amplitude must satisfy 0 < b < 1, got {amplitude}"
            )));
        }
        if let AngleField::Constant(c) | AngleField::Polar(c) = angle {
            if !c.is_finite() {
                return Err(Error::domain("angle offset must be finite"));
            }
        }
        Ok(OneFormSpec { angle, amplitude })
    }

    pub fn constant(c: f64, b: f64) -> Result<Self> {
        Self::new(AngleField::Constant(c), b)
    }

    pub fn polar(c: f64, b: f64) -> Result<Self> {
        Self::new(AngleField::Polar(c), b)
    }

    pub fn expression(source: &str, b: f64) -> Result<Self> {
        Self::new(AngleField::expression(source)?, b)
    }

    /// The constant-angle one-form equal to `p dx¹ + q dx²`.
    pub fn from_exact_one_form(p: f64, q: f64) -> Result<Self> {
        let b = p.hypot(q);
        if b == 0.0 {
            return Err(Error::domain("the zero one-form is degenerate"));
        }
        if b >= 1.0 {
            return Err(Error::domain(format!(
                "p² + q² must be below 1, got norm {b}"
            )));
        }
        Self::constant(q.atan2(p), b)
    }

    /// `b = 0`: the Euclidean plane. Only used as an oracle in tests.
    #[doc(hidden)]
    pub fn euclidean_oracle() -> Self {
        OneFormSpec {
            angle: AngleField::Constant(0.0),
            amplitude: 0.0,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn angle(&self) -> &AngleField {
        &self.angle
    }

    pub fn theta(&self, x: Point) -> Result<f64> {
        self.angle.theta(x)
    }

    /// Components `(b cos θ, b sin θ)` of `β` at `x`.
    pub fn components(&self, x: Point) -> Result<Vector> {
        if self.amplitude == 0.0 {
            return Ok([0.0, 0.0]);
        }
        let theta = self.theta(x)?;
        Ok([self.amplitude * theta.cos(), self.amplitude * theta.sin()])
    }
}

/// A tangent vector `y` at a base point `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentSample {
    pub x: Point,
    pub y: Vector,
}

impl TangentSample {
    pub fn new(x: Point, y: Vector) -> Result<Self> {
        if !(norm(y) > 0.0) {
            return Err(Error::domain("tangent vector must be nonzero"));
        }
        Ok(TangentSample { x, y })
    }
}

/// `g_ij = ½ ∂²F²/∂yⁱ∂yʲ` at a tangent sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalTensor(pub [[f64; 2]; 2]);

impl FundamentalTensor {
    pub fn det(&self) -> f64 {
        let g = &self.0;
        g[0][0] * g[1][1] - g[0][1] * g[1][0]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0[0][0] > 0.0 && self.det() > 0.0
    }

    /// `vᵀ g w`.
    pub fn contract(&self, v: Vector, w: Vector) -> f64 {
        let g = &self.0;
        v[0] * (g[0][0] * w[0] + g[0][1] * w[1]) + v[1] * (g[1][0] * w[0] + g[1][1] * w[1])
    }

    pub fn apply(&self, v: Vector) -> Vector {
        let g = &self.0;
        [
            g[0][0] * v[0] + g[0][1] * v[1],
            g[1][0] * v[0] + g[1][1] * v[1],
        ]
    }
}

/// The plane `(ℝ², F = α + β)` with `α` Euclidean.
#[derive(Debug, Clone)]
pub struct RandersPlane {
    one_form: OneFormSpec,
}

impl RandersPlane {
    pub fn new(one_form: OneFormSpec) -> Self {
        RandersPlane { one_form }
    }

    #[doc(hidden)]
    pub fn euclidean_oracle() -> Self {
        RandersPlane::new(OneFormSpec::euclidean_oracle())
    }

    pub fn one_form(&self) -> &OneFormSpec {
        &self.one_form
    }

    pub fn b(&self) -> f64 {
        self.one_form.amplitude
    }

    pub fn theta(&self, x: Point) -> Result<f64> {
        self.one_form.theta(x)
    }

    /// `F(x, y) = |y| + b (cos θ(x) y¹ + sin θ(x) y²)`.
    pub fn eval_f(&self, x: Point, y: Vector) -> Result<f64> {
        let beta = self.one_form.components(x)?;
        Ok(norm(y) + dot(beta, y))
    }

    /// Fundamental tensor by finite differences of `F²/2` in `y`.
    pub fn fundamental_tensor(&self, sample: &TangentSample) -> Result<FundamentalTensor> {
        let beta = self.one_form.components(sample.x)?;
        let energy = |y: &[f64; 2]| {
            let f = norm(*y) + dot(beta, *y);
            Ok(0.5 * f * f)
        };
        // F²/2 is 2-homogeneous, so the step scales with |y| alone.
        let h = fd::SECOND_ORDER_STEP * norm(sample.y);
        let g = FundamentalTensor(fd::hessian(energy, &sample.y, &[h, h])?);
        if !g.is_positive_definite() {
            return Err(Error::NotPositiveDefinite { det: g.det() });
        }
        Ok(g)
    }

    /// Euclidean radius of the indicatrix `{F(x, ·) = 1}` in direction `ψ`.
    pub fn indicatrix_radius(&self, x: Point, psi: f64) -> Result<f64> {
        let b = self.b();
        if b == 0.0 {
            return Ok(1.0);
        }
        let theta = self.theta(x)?;
        Ok(1.0 / (1.0 + b * (psi - theta).cos()))
    }
}
