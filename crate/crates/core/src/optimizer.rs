//! Discretized isoperimetric problem: maximize the weighted area of a
//! Fourier curve at fixed Randers length, plus perturbation scans around
//! candidate extremals.
//!
//! The constrained problem is solved by an augmented Lagrangian over the
//! coefficient vector. Each subproblem is minimized with L-BFGS and an
//! Armijo backtracking line search; gradients are central differences over
//! the coefficients, evaluated in parallel.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::curve::{randers_length, randers_length_of_samples, ClosedCurve, DEFAULT_R_MIN};
use crate::error::{Error, Result};
use crate::measure::{sigma_closed, VolumeKind};
use crate::metric::{AngleField, RandersPlane};
use crate::quadrature::bisect;

const LBFGS_MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;
/// Relative central-difference step over coefficients.
const GRADIENT_STEP: f64 = 1e-6;
const BARRIER_WEIGHT: f64 = 1e3;
/// Trial curves slower than this (relative to coefficient size) are rejected.
const REGULARITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Fourier degree `M` of the optimized curve.
    pub degree: usize,
    pub target_length: f64,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub gradient_tolerance: f64,
    pub constraint_tolerance: f64,
    pub r_min: f64,
    /// Recorded with the run; the loop itself is deterministic.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            degree: 16,
            target_length: std::f64::consts::TAU,
            initial_penalty: 10.0,
            penalty_growth: 2.0,
            max_outer: 50,
            max_inner: 500,
            gradient_tolerance: 1e-6,
            constraint_tolerance: 1e-8,
            r_min: DEFAULT_R_MIN,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("target_length", self.target_length),
            ("initial_penalty", self.initial_penalty),
            ("gradient_tolerance", self.gradient_tolerance),
            ("constraint_tolerance", self.constraint_tolerance),
            ("r_min", self.r_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::domain("penalty growth must exceed 1"));
        }
        if self.degree == 0 || self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::domain(
                "degree and iteration budgets must be at least 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub area: f64,
    pub length: f64,
    pub violation: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub curve: ClosedCurve,
    pub area: f64,
    pub length: f64,
    pub violation: f64,
    /// Norm of the area gradient with its length-gradient component removed.
    pub projected_gradient: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl OptimizationResult {
    /// `iteration,area,length,violation,step`, 12 significant digits.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,area,length,violation,step\n");
        for r in &self.trace {
            let _ = writeln!(
                s,
                "{},{:.11e},{:.11e},{:.11e},{:.11e}",
                r.iteration, r.area, r.length, r.violation, r.step
            );
        }
        s
    }
}

struct Problem<'a> {
    plane: &'a RandersPlane,
    sigma: f64,
    degree: usize,
    samples: usize,
    target: f64,
    r_min: f64,
    polar: bool,
}

#[derive(Debug, Clone, Copy)]
struct Measures {
    area: f64,
    length: f64,
    barrier: f64,
}

impl Problem<'_> {
    fn curve(&self, c: &[f64]) -> ClosedCurve {
        ClosedCurve::from_coefficients_unchecked(self.degree, c)
    }

    fn measures(&self, c: &[f64]) -> Result<Measures> {
        let s = self.curve(c).sample(self.samples);
        let length = randers_length_of_samples(self.plane, &s, 0.0)?;
        let barrier = if self.polar {
            let sum: f64 = s
                .position
                .iter()
                .map(|x| (1.0 - x[0].hypot(x[1]) / self.r_min).max(0.0).powi(2))
                .sum();
            BARRIER_WEIGHT * sum * std::f64::consts::TAU / s.len() as f64
        } else {
            0.0
        };
        Ok(Measures {
            area: self.sigma * s.signed_area(),
            length,
            barrier,
        })
    }

    fn merit(&self, c: &[f64], eta: f64, mu: f64) -> Result<f64> {
        let m = self.measures(c)?;
        let d = m.length - self.target;
        Ok(-m.area + eta * d + 0.5 * mu * d * d + m.barrier)
    }

    /// Rejects steps that lose regularity or simplicity.
    fn admissible(&self, c: &[f64]) -> bool {
        let s = self.curve(c).sample(self.samples);
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        s.min_speed() > REGULARITY_FLOOR * scale && s.signed_area() > 0.0 && s.polygon_is_simple()
    }

    fn gradient<F>(&self, c: &[f64], f: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        (0..c.len())
            .into_par_iter()
            .map(|i| {
                let h = GRADIENT_STEP * c[i].abs().max(1.0);
                let mut p = c.to_vec();
                p[i] = c[i] + h;
                let fp = f(&p)?;
                p[i] = c[i] - h;
                let fm = f(&p)?;
                Ok((fp - fm) / (2.0 * h))
            })
            .collect()
    }

    fn projected_gradient(&self, c: &[f64]) -> Result<f64> {
        let ga = self.gradient(c, |p| Ok(self.measures(p)?.area))?;
        let gl = self.gradient(c, |p| Ok(self.measures(p)?.length))?;
        let ll = dot(&gl, &gl);
        let k = if ll > 0.0 { dot(&ga, &gl) / ll } else { 0.0 };
        Ok(ga
            .iter()
            .zip(&gl)
            .map(|(a, l)| (a - k * l).powi(2))
            .sum::<f64>()
            .sqrt())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// L-BFGS two-loop recursion: `-H g`.
fn lbfgs_direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

struct InnerOutcome {
    iterations: usize,
    step: f64,
}

fn minimize_subproblem(
    p: &Problem<'_>,
    c: &mut Vec<f64>,
    eta: f64,
    mu: f64,
    config: &OptimizerConfig,
) -> Result<InnerOutcome> {
    let merit = |x: &[f64]| p.merit(x, eta, mu);
    let mut f = merit(c)?;
    let mut g = p.gradient(c, merit)?;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut travelled = 0.0;
    let mut iterations = 0;
    while iterations < config.max_inner {
        let gn = norm(&g);
        if gn < config.gradient_tolerance {
            break;
        }
        let mut d = lbfgs_direction(&g, &memory);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            memory.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gn * gn;
        }
        let mut t = if memory.is_empty() {
            (1.0 / gn).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = c.iter().zip(&d).map(|(x, di)| x + t * di).collect();
            if p.admissible(&trial) {
                if let Ok(ft) = merit(&trial) {
                    if ft <= f + ARMIJO * t * slope {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        let gnext = p.gradient(&next, merit)?;
        let s: Vec<f64> = next.iter().zip(c.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnext.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if memory.len() == LBFGS_MEMORY {
                memory.pop_front();
            }
            memory.push_back((s.clone(), y, 1.0 / sy));
        }
        travelled += norm(&s);
        *c = next;
        f = fnext;
        g = gnext;
        iterations += 1;
    }
    Ok(InnerOutcome {
        iterations,
        step: travelled,
    })
}

/// Maximizes `A_kind` over Fourier curves of degree `config.degree` subject
/// to `L = config.target_length`, starting from `init`.
pub fn maximize_area(
    plane: &RandersPlane,
    kind: VolumeKind,
    config: &OptimizerConfig,
    init: &ClosedCurve,
) -> Result<OptimizationResult> {
    config.validate()?;
    if !init.samples().polygon_is_simple() {
        return Err(Error::NonSimple);
    }
    let polar = matches!(plane.one_form().angle(), AngleField::Polar(_));
    let init = init.with_degree(config.degree)?;
    let problem = Problem {
        plane,
        sigma: sigma_closed(kind, plane.b(), 2)?,
        degree: config.degree,
        samples: init.default_sample_count(),
        target: config.target_length,
        r_min: config.r_min,
        polar,
    };
    let init_length = randers_length_of_samples(plane, &init.samples(), config.r_min)?;
    if (init_length - config.target_length).abs() > 0.5 * config.target_length {
        return Err(Error::domain(format!(
            "initial length {init_length} is not within 50% of the target {}",
            config.target_length
        )));
    }

    let mut c = init.coefficients();
    let (mut eta, mut mu) = (0.0, config.initial_penalty);
    let mut prev_violation = (init_length - config.target_length).abs();
    let mut best: Option<(Vec<f64>, Measures)> = None;
    let mut trace = Vec::new();
    let mut inner_total = 0;
    let mut converged = false;
    let mut projected = f64::INFINITY;
    let mut outer = 0;

    while outer < config.max_outer {
        outer += 1;
        let inner = minimize_subproblem(&problem, &mut c, eta, mu, config)?;
        inner_total += inner.iterations;
        let m = problem.measures(&c)?;
        let violation = (m.length - config.target_length).abs();
        trace.push(TraceRow {
            iteration: outer,
            area: m.area,
            length: m.length,
            violation,
            step: inner.step,
        });
        if violation < config.constraint_tolerance {
            if best.as_ref().is_none_or(|(_, b)| m.area > b.area) {
                best = Some((c.clone(), m));
            }
            projected = problem.projected_gradient(&c)?;
            if projected < config.gradient_tolerance {
                converged = true;
                break;
            }
        }
        eta += mu * (m.length - config.target_length);
        if violation > 0.25 * prev_violation {
            mu *= config.penalty_growth;
        }
        prev_violation = violation;
    }

    let (coeffs, m) = match best {
        Some(b) => b,
        None => {
            let m = problem.measures(&c)?;
            (c, m)
        }
    };
    if !converged {
        projected = problem.projected_gradient(&coeffs)?;
    }
    let curve = ClosedCurve::from_coefficients(config.degree, &coeffs)?;
    Ok(OptimizationResult {
        curve,
        area: m.area,
        length: m.length,
        violation: (m.length - config.target_length).abs(),
        projected_gradient: projected,
        iterations: outer,
        inner_iterations: inner_total,
        converged,
        trace,
    })
}

/// Scales `curve` about the origin so its Randers length equals `target`.
pub fn match_length(plane: &RandersPlane, curve: &ClosedCurve, target: f64) -> Result<ClosedCurve> {
    let f = |s: f64| Ok(randers_length(plane, &curve.scaled(s))? - target);
    let (mut lo, mut hi) = (0.5, 2.0);
    for _ in 0..20 {
        if f(lo)? <= 0.0 && f(hi)? >= 0.0 {
            let s = bisect(f, lo, hi, 1e-12)?;
            return Ok(curve.scaled(s));
        }
        lo *= 0.5;
        hi *= 2.0;
    }
    Err(Error::Tolerance(
        "could not bracket the length-matching scale".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub mode: usize,
    pub epsilon: f64,
    /// `A(perturbed, length-matched) − A(circle)`.
    pub delta_area: f64,
    /// `(ΔA(ε) + ΔA(−ε)) / ε²`.
    pub curvature: f64,
}

/// Area change of the circle of radius `a` under each mode perturbation,
/// with every perturbed curve rescaled to the circle's Randers length.
pub fn perturbation_scan(
    plane: &RandersPlane,
    kind: VolumeKind,
    a: f64,
    modes: &[usize],
    epsilon: f64,
) -> Result<Vec<ScanRow>> {
    let circle = ClosedCurve::circle(a)?;
    let target = randers_length(plane, &circle)?;
    let sigma = sigma_closed(kind, plane.b(), 2)?;
    let base = sigma * circle.signed_area();
    let delta = |k: usize, e: f64| -> Result<f64> {
        if e == 0.0 {
            return Ok(0.0);
        }
        let c = match_length(plane, &circle.with_mode(k, e * a), target)?;
        let s = c.samples();
        if !s.polygon_is_simple() {
            return Err(Error::NonSimple);
        }
        Ok(sigma * s.signed_area() - base)
    };
    modes
        .iter()
        .map(|&k| {
            if k == 0 {
                return Err(Error::domain("modes are numbered from 1"));
            }
            let plus = delta(k, epsilon)?;
            let minus = delta(k, -epsilon)?;
            let curvature = if epsilon == 0.0 {
                0.0
            } else {
                (plus + minus) / (epsilon * epsilon)
            };
            Ok(ScanRow {
                mode: k,
                epsilon,
                delta_area: plus,
                curvature,
            })
        })
        .collect()
}

/// `L² − 4πA` from the Euclidean length and area; zero only for circles.
pub fn isoperimetric_deficit(curve: &ClosedCurve) -> Result<f64> {
    let s = curve.samples();
    if !s.polygon_is_simple() {
        return Err(Error::NonSimple);
    }
    let l = s.euclidean_length();
    Ok(l * l - 4.0 * std::f64::consts::PI * s.signed_area())
}
