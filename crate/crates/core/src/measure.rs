//! Finsler volume forms of the Randers plane.
//!
//! Every density here is a multiple `σ` of the Euclidean area element. Two
//! routes are provided: closed forms for Randers metrics, and the defining
//! integrals / extrema over the indicatrix evaluated numerically. The general
//! `(α,β)`-metric factor `f(b)` is evaluated by quadrature for a user profile
//! `φ(s)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exprparse::Expr;
use crate::fd;
use crate::metric::{Point, RandersPlane, TangentSample};
use crate::quadrature;

/// Nodes scanned before the golden-section refinement of `σ_max`/`σ_min`.
pub const EXTREMUM_SCAN_NODES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VolumeKind {
    /// Busemann-Hausdorff.
    BH,
    /// Holmes-Thompson.
    HT,
    Max,
    Min,
}

impl VolumeKind {
    pub const ALL: [VolumeKind; 4] = [
        VolumeKind::BH,
        VolumeKind::HT,
        VolumeKind::Max,
        VolumeKind::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VolumeKind::BH => "BH",
            VolumeKind::HT => "HT",
            VolumeKind::Max => "Max",
            VolumeKind::Min => "Min",
        }
    }
}

impl fmt::Display for VolumeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VolumeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bh" | "busemann-hausdorff" => Ok(VolumeKind::BH),
            "ht" | "holmes-thompson" => Ok(VolumeKind::HT),
            "max" | "maximum" => Ok(VolumeKind::Max),
            "min" | "minimum" => Ok(VolumeKind::Min),
            _ => Err(Error::domain(format!("unknown volume kind `{s}`"))),
        }
    }
}

/// Closed-form Randers density `σ(b)` in dimension `n`:
/// `(1−b²)^{(n+1)/2}`, `1`, `(1+b)^{n+1}`, `(1−b)^{n+1}`.
pub fn sigma_closed(kind: VolumeKind, b: f64, n: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::domain(format!("b must lie in [0, 1), got {b}")));
    }
    if n < 2 {
        return Err(Error::domain(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let n = n as i32;
    Ok(match kind {
        VolumeKind::BH => (1.0 - b * b).powf(0.5 * (n + 1) as f64),
        VolumeKind::HT => 1.0,
        VolumeKind::Max => (1.0 + b).powi(n + 1),
        VolumeKind::Min => (1.0 - b).powi(n + 1),
    })
}

/// Profile `φ(s)` of an `(α,β)`-metric `F = α φ(β/α)` with `‖β‖_α = b`.
#[derive(Debug, Clone)]
pub struct PhiSpec {
    phi: Expr,
    n: u32,
    b: f64,
}

impl PhiSpec {
    pub fn new(source: &str, n: u32, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if !(0.0..1.0).contains(&b) {
            return Err(Error::domain(format!("b must lie in [0, 1), got {b}")));
        }
        Ok(PhiSpec {
            phi: Expr::parse(source, &["s"])?,
            n,
            b,
        })
    }

    pub fn with_b(&self, b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&b) {
            return Err(Error::domain(format!("b must lie in [0, 1), got {b}")));
        }
        Ok(PhiSpec { b, ..self.clone() })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn phi(&self, s: f64) -> Result<f64> {
        self.phi.eval(&[s])
    }

    /// `T(s) = φ(φ − sφ')^{n−2} [φ − sφ' + (b² − s²)φ'']`.
    pub fn t_factor(&self, s: f64) -> Result<f64> {
        let phi = self.phi(s)?;
        let d1 = fd::derivative(|v| self.phi(v), s, fd::FIRST_ORDER_STEP)?;
        let d2 = fd::second_derivative(|v| self.phi(v), s, fd::SECOND_ORDER_STEP)?;
        let q = phi - s * d1;
        Ok(phi * q.powi(self.n as i32 - 2) * (q + (self.b * self.b - s * s) * d2))
    }

    fn check_regular(&self) -> Result<()> {
        const GRID: usize = 256;
        for j in 0..=GRID {
            let s = self.b * (2.0 * j as f64 / GRID as f64 - 1.0);
            let phi = self.phi(s)?;
            if !(phi > 0.0) {
                return Err(Error::domain(format!("φ({s}) = {phi} is not positive")));
            }
            let t = self.t_factor(s)?;
            if !(t > 0.0) {
                return Err(Error::domain(format!("T({s}) = {t} is not positive")));
            }
        }
        Ok(())
    }
}

/// `f(b)` for an `(α,β)`-metric: the ratio of sine-weighted integrals over
/// `[0, π]` that defines the Busemann-Hausdorff or Holmes-Thompson factor.
pub fn volume_factor_quadrature(phi: &PhiSpec, kind: VolumeKind) -> Result<f64> {
    phi.check_regular()?;
    let weight_power = phi.n as i32 - 2;
    let weight = |t: f64| t.sin().powi(weight_power);
    let base = quadrature::even_integral(|t| Ok(weight(t)), 0.0, PI)?;
    match kind {
        VolumeKind::BH => {
            let n = phi.n as i32;
            let denom = quadrature::even_integral(
                |t| Ok(weight(t) / phi.phi(phi.b * t.cos())?.powi(n)),
                0.0,
                PI,
            )?;
            Ok(base / denom)
        }
        VolumeKind::HT => {
            let numer = quadrature::even_integral(
                |t| Ok(weight(t) * phi.t_factor(phi.b * t.cos())?),
                0.0,
                PI,
            )?;
            Ok(numer / base)
        }
        VolumeKind::Max | VolumeKind::Min => Err(Error::Unsupported(format!(
            "no quadrature formula for the {kind} volume form"
        ))),
    }
}

fn sqrt_det_on_indicatrix(plane: &RandersPlane, x: Point, psi: f64) -> Result<f64> {
    let rho = plane.indicatrix_radius(x, psi)?;
    let y = [rho * psi.cos(), rho * psi.sin()];
    Ok(plane
        .fundamental_tensor(&TangentSample::new(x, y)?)?
        .det()
        .sqrt())
}

/// Density of `kind` at `x` straight from its definition (plane case):
/// unit-ball volume ratio for BH, `det g` integrated over the unit ball for
/// HT, and the extremum of `√det g` over the indicatrix for Max/Min.
pub fn sigma_definition(plane: &RandersPlane, x: Point, kind: VolumeKind) -> Result<f64> {
    match kind {
        VolumeKind::BH => {
            let ball = quadrature::periodic_integral(
                |psi| Ok(0.5 * plane.indicatrix_radius(x, psi)?.powi(2)),
                TAU,
            )?;
            Ok(PI / ball)
        }
        VolumeKind::HT => {
            // det g is 0-homogeneous in y, so the radial integral is ρ²/2.
            let integral = quadrature::periodic_integral(
                |psi| {
                    let rho = plane.indicatrix_radius(x, psi)?;
                    let y = [psi.cos(), psi.sin()];
                    let det = plane.fundamental_tensor(&TangentSample::new(x, y)?)?.det();
                    Ok(det * 0.5 * rho * rho)
                },
                TAU,
            )?;
            Ok(integral / PI)
        }
        VolumeKind::Max => Ok(quadrature::periodic_extremum(
            |psi| sqrt_det_on_indicatrix(plane, x, psi),
            EXTREMUM_SCAN_NODES,
            1.0,
        )?
        .1),
        VolumeKind::Min => Ok(quadrature::periodic_extremum(
            |psi| sqrt_det_on_indicatrix(plane, x, psi),
            EXTREMUM_SCAN_NODES,
            -1.0,
        )?
        .1),
    }
}
