use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fd;
use crate::quadrature::bisect;

/// Grid used to bracket sign changes of the conjugate determinant.
pub const CONJUGATE_SCAN_NODES: usize = 10_000;
/// Default distance kept from the trivial endpoints `0` and `2π`.
pub const CONJUGATE_EPSILON: f64 = 1e-3;
const SERIES_CUTOFF: f64 = 0.5;

/// Coefficients of the Jacobi equation along a circle of radius `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiCoefficients {
    pub a: f64,
    pub lambda: f64,
    pub h1: f64,
    pub h2: f64,
    pub u: f64,
}

impl JacobiCoefficients {
    /// `K(t) = λ sin t cos t / a`.
    pub fn k(&self, t: f64) -> f64 {
        self.lambda * t.sin() * t.cos() / self.a
    }

    /// Largest FD deviation from `dh₁/dt = 0` and `dK/dt = λ cos 2t / a`
    /// over a uniform grid of `nodes` points.
    pub fn derivative_check(&self, nodes: usize) -> Result<(f64, f64)> {
        let (mut dh, mut dk) = (0.0f64, 0.0f64);
        let h1 = self.h1;
        for j in 0..nodes {
            let t = TAU * j as f64 / nodes as f64;
            let d = fd::derivative(|_| Ok(h1), t, fd::FIRST_ORDER_STEP)?;
            dh = dh.max(d.abs());
            let d = fd::derivative(|s| Ok(self.k(s)), t, fd::FIRST_ORDER_STEP)?;
            dk = dk.max((d - self.lambda * (2.0 * t).cos() / self.a).abs());
        }
        Ok((dh, dk))
    }
}

pub fn jacobi_coefficients(a: f64, lambda: f64) -> Result<JacobiCoefficients> {
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "circle radius must be positive, got {a}"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::domain("multiplier must be finite"));
    }
    let a3 = a * a * a;
    Ok(JacobiCoefficients {
        a,
        lambda,
        h1: lambda / a3,
        h2: -lambda / a3,
        u: 1.0 / a,
    })
}

/// `ω(t) = c₁ cos t + c₂ sin t + μa²/λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiSolution {
    pub c1: f64,
    pub c2: f64,
    pub mu: f64,
    pub a: f64,
    pub lambda: f64,
}

impl JacobiSolution {
    pub fn new(c1: f64, c2: f64, mu: f64, a: f64, lambda: f64) -> Result<Self> {
        if !(a > 0.0) || lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::domain("need a > 0 and a finite nonzero multiplier"));
        }
        Ok(JacobiSolution {
            c1,
            c2,
            mu,
            a,
            lambda,
        })
    }

    fn offset(&self) -> f64 {
        self.mu * self.a * self.a / self.lambda
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.c1 * t.cos() + self.c2 * t.sin() + self.offset()
    }

    pub fn omega_ddot(&self, t: f64) -> f64 {
        -self.c1 * t.cos() - self.c2 * t.sin()
    }
}

/// `ω'' + ω − μa²/λ`, evaluated analytically.
pub fn jacobi_residual(sol: &JacobiSolution, t: f64) -> f64 {
    sol.omega_ddot(t) + sol.omega(t) - sol.offset()
}

/// `Δt sin Δt + 2 cos Δt − 2`, by its Taylor series near zero where the
/// direct formula cancels.
pub fn conjugate_bracket(dt: f64) -> f64 {
    if dt.abs() < SERIES_CUTOFF {
        // Σ_{m≥2} (−1)^{m+1} 2(m−1) x^{2m} / (2m)!
        let x2 = dt * dt;
        let mut term = x2 * x2 / 24.0; // x^4 / 4!
        let mut sum = 0.0;
        for m in 2..=10u32 {
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * 2.0 * (m - 1) as f64 * term;
            let next = 2 * m + 1;
            term *= x2 / (next as f64 * (next + 1) as f64);
        }
        sum
    } else {
        dt * dt.sin() + 2.0 * dt.cos() - 2.0
    }
}

/// Determinant whose zeros mark conjugate points: `(a²/λ)(1/a)` times the bracket.
pub fn conjugate_determinant(dt: f64, a: f64, lambda: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "circle radius must be positive, got {a}"
        )));
    }
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::domain("multiplier must be finite and nonzero"));
    }
    Ok(a / lambda * conjugate_bracket(dt))
}

/// Roots of the conjugate determinant in `(ε, 2π − ε)`.
///
/// `Δt = 2π` is the closure of the circle, not a conjugate point.
pub fn find_conjugate_points(a: f64, lambda: f64, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < std::f64::consts::PI) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, π), got {eps}"
        )));
    }
    let det = |dt: f64| conjugate_determinant(dt, a, lambda);
    let (lo, hi) = (eps, TAU - eps);
    let mut roots = Vec::new();
    let mut prev_t = lo;
    let mut prev = det(lo)?;
    for j in 1..=CONJUGATE_SCAN_NODES {
        let t = lo + (hi - lo) * j as f64 / CONJUGATE_SCAN_NODES as f64;
        let v = det(t)?;
        if v == 0.0 {
            roots.push(t);
        } else if prev != 0.0 && prev.signum() != v.signum() {
            roots.push(bisect(&det, prev_t, t, 1e-14)?);
        }
        prev_t = t;
        prev = v;
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn coefficient_examples() {
        let c = jacobi_coefficients(1.0, -1.0).unwrap();
        assert_eq!((c.h1, c.h2, c.u), (-1.0, 1.0, 1.0));
        let c = jacobi_coefficients(2.0, -2.0).unwrap();
        assert_eq!((c.h1, c.u), (-0.25, 0.5));
        assert!((c.k(PI / 4.0) - (-2.0) / 4.0).abs() < 1e-15);
        let (dh, dk) = c.derivative_check(64).unwrap();
        assert_eq!(dh, 0.0);
        assert!(dk < 1e-10);
        assert!(jacobi_coefficients(0.0, -1.0).is_err());
    }

    #[test]
    fn solution_examples() {
        let s = JacobiSolution::new(1.0, 0.0, 0.0, 1.0, -1.0).unwrap();
        assert_eq!(jacobi_residual(&s, 0.7), 0.0);
        let s = JacobiSolution::new(0.0, 0.0, -1.0 / 4.0, 2.0, -1.0).unwrap();
        assert!((s.omega(1.3) - 1.0).abs() < 1e-15);
        assert_eq!(jacobi_residual(&s, 1.3), 0.0);
    }

    #[test]
    fn bracket_values() {
        assert_eq!(conjugate_bracket(0.0), 0.0);
        assert!((conjugate_bracket(PI) + 4.0).abs() < 1e-12);
        assert!((conjugate_bracket(PI / 2.0) - (PI / 2.0 - 2.0)).abs() < 1e-12);
        assert!(conjugate_bracket(TAU).abs() < 1e-12);
        for &x in &[1e-3f64, 0.1, 0.3, 0.49] {
            let lead = -x.powi(4) / 12.0;
            assert!((conjugate_bracket(x) / lead - 1.0).abs() < x * x);
        }
        // series and direct formula meet at the cutoff
        let x = SERIES_CUTOFF;
        let direct = x * x.sin() + 2.0 * x.cos() - 2.0;
        assert!((conjugate_bracket(x - 1e-15) - direct).abs() < 1e-14);
        assert!((conjugate_determinant(PI, 1.0, -1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(conjugate_determinant(PI, 1.0, 0.0).is_err());
    }

    #[test]
    fn no_conjugate_points_on_circles() {
        for &a in &[0.5, 1.0, 2.0] {
            assert!(find_conjugate_points(a, -a, 1e-3).unwrap().is_empty());
        }
        for j in 0..=10_000 {
            let x = 1e-3 + (TAU - 2e-3) * j as f64 / 10_000.0;
            assert!(conjugate_bracket(x) < 0.0, "bracket({x}) >= 0");
        }
    }
}
