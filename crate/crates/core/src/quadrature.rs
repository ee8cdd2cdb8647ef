//! Quadrature, one-dimensional search and spectral differentiation on
//! uniform periodic grids.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Node count every adaptive rule starts from.
pub const DEFAULT_NODES: usize = 4096;
/// Doubling stops once successive estimates differ by less than this.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const MAX_NODES: usize = 1 << 22;

/// Trapezoid rule for samples of a `2π`-periodic function on `tⱼ = 2πj/N`.
pub fn periodic_trapezoid(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() * std::f64::consts::TAU / values.len() as f64
}

/// Adaptive trapezoid on `[0, period)` for a periodic integrand.
///
/// Starts from `DEFAULT_NODES` nodes and halves the spacing until two
/// successive estimates differ by less than `DEFAULT_TOLERANCE` (relative
/// to the magnitude of the integral once it exceeds one).
pub fn periodic_integral<F>(f: F, period: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    refine(f, 0.0, period, false)
}

/// Adaptive trapezoid on the closed interval `[a, b]` with half-weighted
/// endpoints. Spectrally accurate when the integrand extends evenly to a
/// smooth periodic function, e.g. any smooth function of `cos t` on `[0, π]`.
pub fn even_integral<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    refine(f, a, b, true)
}

fn refine<F>(mut f: F, a: f64, b: f64, closed: bool) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let width = b - a;
    let mut n = DEFAULT_NODES;
    let mut sum = 0.0;
    for j in 0..n {
        sum += f(a + width * j as f64 / n as f64)?;
    }
    if closed {
        sum += 0.5 * (f(b)? - f(a)?);
    }
    let mut estimate = sum * width / n as f64;
    while n < MAX_NODES {
        for j in 0..n {
            sum += f(a + width * (2 * j + 1) as f64 / (2 * n) as f64)?;
        }
        n *= 2;
        let next = sum * width / n as f64;
        let scale = next.abs().max(1.0);
        if (next - estimate).abs() < DEFAULT_TOLERANCE * scale {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Tolerance(format!(
        "trapezoid rule did not settle below {DEFAULT_TOLERANCE:e} with {MAX_NODES} nodes"
    )))
}

/// Golden-section search for the maximizer of a unimodal function on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Scans `nodes` points of a `2π`-periodic function and refines the best one
/// by golden section to `1e-10`. `sign = 1` maximizes, `sign = -1` minimizes.
pub fn periodic_extremum<F>(mut f: F, nodes: usize, sign: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = std::f64::consts::TAU / nodes as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for j in 0..nodes {
        let t = j as f64 * h;
        let v = sign * f(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let (t, v) = golden_section_max(|t| Ok(sign * f(t)?), best.0 - h, best.0 + h, 1e-10)?;
    Ok((t, sign * v))
}

/// Bisection for a sign change of `f` on `[a, b]`, to absolute width `tol`.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Tolerance(format!(
            "no sign change on [{a}, {b}] for bisection"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Derivative of uniformly sampled `2π`-periodic data via the FFT.
/// The Nyquist mode of even-length input is dropped.
pub fn spectral_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    forward.process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        if n.is_multiple_of(2) && j == n / 2 {
            *c = Complex::new(0.0, 0.0);
        } else {
            *c *= Complex::new(0.0, k);
        }
    }
    inverse.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}
