//! Finite-difference stencils used for every derivative of the metric and
//! of the Lagrange function.
//!
//! First derivatives use the five-point fourth-order central stencil; second
//! derivatives use Richardson-extrapolated central differences (also fourth
//! order). Steps are chosen per coordinate by the caller, usually relative to
//! the magnitude of the argument.

use crate::error::Result;

/// Relative step for first derivatives.
pub const FIRST_ORDER_STEP: f64 = 1e-3;
/// Relative step for second derivatives.
pub const SECOND_ORDER_STEP: f64 = 2e-3;

/// Step for a coordinate of magnitude `scale`: `rel * max(scale, floor)`.
pub fn step(rel: f64, scale: f64, floor: f64) -> f64 {
    rel * scale.abs().max(floor)
}

pub fn derivative<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let p2 = f(x + 2.0 * h)?;
    let p1 = f(x + h)?;
    let m1 = f(x - h)?;
    let m2 = f(x - 2.0 * h)?;
    Ok((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h))
}

pub fn second_derivative<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let p2 = f(x + 2.0 * h)?;
    let p1 = f(x + h)?;
    let c = f(x)?;
    let m1 = f(x - h)?;
    let m2 = f(x - 2.0 * h)?;
    Ok((-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h))
}

pub fn gradient<const N: usize, F>(mut f: F, x: &[f64; N], h: &[f64; N]) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N]) -> Result<f64>,
{
    let mut grad = [0.0; N];
    for i in 0..N {
        let mut shifted = *x;
        grad[i] = derivative(
            |v| {
                shifted[i] = v;
                f(&shifted)
            },
            x[i],
            h[i],
        )?;
    }
    Ok(grad)
}

pub fn hessian<const N: usize, F>(mut f: F, x: &[f64; N], h: &[f64; N]) -> Result<[[f64; N]; N]>
where
    F: FnMut(&[f64; N]) -> Result<f64>,
{
    let mut hess = [[0.0; N]; N];
    let center = f(x)?;
    let mut at = |di: usize, si: f64, dj: usize, sj: f64| -> Result<f64> {
        let mut p = *x;
        p[di] += si;
        p[dj] += sj;
        f(&p)
    };
    for i in 0..N {
        let hi = h[i];
        let p2 = at(i, 2.0 * hi, i, 0.0)?;
        let p1 = at(i, hi, i, 0.0)?;
        let m1 = at(i, -hi, i, 0.0)?;
        let m2 = at(i, -2.0 * hi, i, 0.0)?;
        hess[i][i] = (-p2 + 16.0 * p1 - 30.0 * center + 16.0 * m1 - m2) / (12.0 * hi * hi);
        for j in 0..i {
            let hj = h[j];
            let mut mixed = |s: f64| -> Result<f64> {
                let pp = at(i, s * hi, j, s * hj)?;
                let pm = at(i, s * hi, j, -s * hj)?;
                let mp = at(i, -s * hi, j, s * hj)?;
                let mm = at(i, -s * hi, j, -s * hj)?;
                Ok((pp - pm - mp + mm) / (4.0 * s * s * hi * hj))
            };
            let fine = mixed(1.0)?;
            let coarse = mixed(2.0)?;
            let value = (4.0 * fine - coarse) / 3.0;
            hess[i][j] = value;
            hess[j][i] = value;
        }
    }
    Ok(hess)
}
