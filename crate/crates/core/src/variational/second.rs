use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::curve::{check_origin_clearance, ClosedCurve, CurveSamples, DEFAULT_R_MIN};
use crate::error::{Error, Result};
use crate::metric::{dot, norm, RandersPlane, Vector};
use crate::quadrature::periodic_trapezoid;

use super::lagrange::{length_gradients, LagrangeContext};

/// Highest frequency in the admissible variation basis.
pub const VARIATION_DEGREE: usize = 8;
/// Highest frequency of `φ` in the tangential atoms `φ(t)ẋ`.
pub const TANGENT_DEGREE: usize = 8;
/// Minimum share of the normal component in an accepted random variation.
pub const MIN_NORMAL_FRACTION: f64 = 1e-6;
const MAX_DRAW_ATTEMPTS: usize = 1000;

/// A variation field `y` and its derivative `ẏ` on a curve's sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Variation {
    pub y: Vec<Vector>,
    pub dy: Vec<Vector>,
}

impl Variation {
    pub fn zeros(n: usize) -> Self {
        Variation {
            y: vec![[0.0; 2]; n],
            dy: vec![[0.0; 2]; n],
        }
    }

    /// Samples `f(t) -> (y, ẏ)` on the grid `t`.
    pub fn from_fn<F>(t: &[f64], mut f: F) -> Self
    where
        F: FnMut(f64) -> (Vector, Vector),
    {
        let (y, dy) = t.iter().map(|&s| f(s)).unzip();
        Variation { y, dy }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let m = |v: &Vector| [s * v[0], s * v[1]];
        Variation {
            y: self.y.iter().map(m).collect(),
            dy: self.dy.iter().map(m).collect(),
        }
    }

    fn axpy(&mut self, a: f64, other: &Variation) {
        for (u, v) in self
            .y
            .iter_mut()
            .zip(&other.y)
            .chain(self.dy.iter_mut().zip(&other.dy))
        {
            u[0] += a * v[0];
            u[1] += a * v[1];
        }
    }

    fn inner(&self, other: &Variation) -> f64 {
        self.y.iter().zip(&other.y).map(|(a, b)| dot(*a, *b)).sum()
    }
}

/// How the isoperimetric constraint on variations is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintMode {
    /// One scalar `∫ Σᵢ (g_{xⁱ}yⁱ + g_{ẋⁱ}ẏⁱ) dt = 0`.
    #[default]
    Summed,
    /// Each `i` separately.
    PerComponent,
}

/// Everything on a curve the second variation and the constraint need,
/// computed once: the 4×4 Hessian of `h` and the gradients of `g` per node.
#[derive(Debug, Clone)]
pub struct SecondVariationForm {
    samples: CurveSamples,
    hessians: Vec<[[f64; 4]; 4]>,
    gx: Vec<Vector>,
    gv: Vec<Vector>,
}

impl SecondVariationForm {
    pub fn new(ctx: &LagrangeContext, curve: &ClosedCurve) -> Result<Self> {
        let samples = curve.samples();
        check_origin_clearance(ctx.plane(), &samples, DEFAULT_R_MIN)?;
        let mut hessians = Vec::with_capacity(samples.len());
        for (x, v) in samples.position.iter().zip(&samples.velocity) {
            hessians.push(ctx.h_hessian(*x, *v)?);
        }
        let (gx, gv) = constraint_gradients(ctx.plane(), &samples)?;
        Ok(SecondVariationForm {
            samples,
            hessians,
            gx,
            gv,
        })
    }

    pub fn samples(&self) -> &CurveSamples {
        &self.samples
    }

    pub fn t(&self) -> &[f64] {
        &self.samples.t
    }

    /// Velocity block `h_{ẋⁱẋʲ}` at node `j`.
    pub fn velocity_hessian(&self, j: usize) -> [[f64; 2]; 2] {
        let m = &self.hessians[j];
        [[m[2][2], m[2][3]], [m[3][2], m[3][3]]]
    }

    fn check_len(&self, v: &Variation) -> Result<()> {
        if v.y.len() != self.samples.len() || v.dy.len() != self.samples.len() {
            return Err(Error::domain(format!(
                "variation has {} nodes, curve grid has {}",
                v.y.len(),
                self.samples.len()
            )));
        }
        Ok(())
    }

    /// `J'' = ∫ 2ω dt`.
    pub fn evaluate(&self, v: &Variation) -> Result<f64> {
        self.check_len(v)?;
        let values: Vec<f64> = (0..v.len())
            .map(|j| {
                let z = [v.y[j][0], v.y[j][1], v.dy[j][0], v.dy[j][1]];
                let m = &self.hessians[j];
                let mut q = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        q += m[a][b] * z[a] * z[b];
                    }
                }
                2.0 * q
            })
            .collect();
        Ok(periodic_trapezoid(&values))
    }

    /// `[∫ (g_{x¹}y¹ + g_{ẋ¹}ẏ¹) dt, ∫ (g_{x²}y² + g_{ẋ²}ẏ²) dt]`.
    pub fn constraint_components(&self, v: &Variation) -> Result<[f64; 2]> {
        self.check_len(v)?;
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let vals: Vec<f64> = (0..v.len())
                .map(|j| self.gx[j][i] * v.y[j][i] + self.gv[j][i] * v.dy[j][i])
                .collect();
            *o = periodic_trapezoid(&vals);
        }
        Ok(out)
    }

    pub fn constraint(&self, v: &Variation) -> Result<f64> {
        let c = self.constraint_components(v)?;
        Ok(c[0] + c[1])
    }

    /// Share `‖y·n‖ / ‖y‖` of the component normal to the curve.
    pub fn normal_fraction(&self, v: &Variation) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (y, w) in v.y.iter().zip(&self.samples.velocity) {
            let n = [w[1] / norm(*w), -w[0] / norm(*w)];
            num += dot(*y, n).powi(2);
            den += dot(*y, *y);
        }
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            0.0
        }
    }
}

fn constraint_gradients(
    plane: &RandersPlane,
    samples: &CurveSamples,
) -> Result<(Vec<Vector>, Vec<Vector>)> {
    let mut gx = Vec::with_capacity(samples.len());
    let mut gv = Vec::with_capacity(samples.len());
    for (x, v) in samples.position.iter().zip(&samples.velocity) {
        let (a, b) = length_gradients(plane, *x, *v)?;
        gx.push(a);
        gv.push(b);
    }
    Ok((gx, gv))
}

pub fn second_variation(ctx: &LagrangeContext, curve: &ClosedCurve, v: &Variation) -> Result<f64> {
    SecondVariationForm::new(ctx, curve)?.evaluate(v)
}

pub fn variation_constraint(
    plane: &RandersPlane,
    curve: &ClosedCurve,
    v: &Variation,
) -> Result<f64> {
    let samples = curve.samples();
    let (gx, gv) = constraint_gradients(plane, &samples)?;
    let form = SecondVariationForm {
        hessians: Vec::new(),
        samples,
        gx,
        gv,
    };
    form.constraint(v)
}

/// `(value, derivative)` of `sin kt` (`cosine = false`) or `1 − cos kt`.
fn atom(k: usize, cosine: bool, t: f64) -> (f64, f64) {
    let kf = k as f64;
    let (s, c) = (kf * t).sin_cos();
    if cosine {
        (1.0 - c, kf * s)
    } else {
        (s, kf * c)
    }
}

/// The basis `{sin kt eᵢ, (1 − cos kt) eᵢ : k ≤ VARIATION_DEGREE}`.
pub fn variation_basis(t: &[f64]) -> Vec<Variation> {
    let mut out = Vec::with_capacity(4 * VARIATION_DEGREE);
    for k in 1..=VARIATION_DEGREE {
        for cosine in [false, true] {
            for i in 0..2 {
                out.push(Variation::from_fn(t, |s| {
                    let (f, df) = atom(k, cosine, s);
                    let mut y = [0.0; 2];
                    let mut dy = [0.0; 2];
                    y[i] = f;
                    dy[i] = df;
                    (y, dy)
                }));
            }
        }
    }
    out
}

/// Draws random admissible variations on a curve: endpoint-vanishing,
/// tangential part removed, projected onto the linearized constraint.
#[derive(Debug)]
pub struct VariationSampler<'a> {
    form: &'a SecondVariationForm,
    mode: ConstraintMode,
    basis: Vec<Variation>,
    tangent: Vec<Variation>,
    tangent_gram: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    /// Tangent-free constraint representers.
    representers: Vec<Variation>,
    representer_gram: DMatrix<f64>,
}

impl<'a> VariationSampler<'a> {
    pub fn new(form: &'a SecondVariationForm, mode: ConstraintMode) -> Result<Self> {
        let s = &form.samples;
        let mut tangent = Vec::with_capacity(2 * TANGENT_DEGREE);
        for k in 1..=TANGENT_DEGREE {
            for cosine in [false, true] {
                let (y, dy) = (0..s.len())
                    .map(|j| {
                        let (f, df) = atom(k, cosine, s.t[j]);
                        let (v, a) = (s.velocity[j], s.acceleration[j]);
                        (
                            [f * v[0], f * v[1]],
                            [df * v[0] + f * a[0], df * v[1] + f * a[1]],
                        )
                    })
                    .unzip();
                tangent.push(Variation { y, dy });
            }
        }
        let m = tangent.len();
        let gram = DMatrix::from_fn(m, m, |i, j| tangent[i].inner(&tangent[j]));
        let tangent_gram = gram.cholesky().ok_or_else(|| {
            Error::Tolerance("tangential basis is degenerate on this curve".into())
        })?;
        let basis = variation_basis(&s.t);

        let mut sampler = VariationSampler {
            form,
            mode,
            basis,
            tangent,
            tangent_gram,
            representers: Vec::new(),
            representer_gram: DMatrix::zeros(0, 0),
        };
        let functionals = sampler.functional_count();
        let mut reps = Vec::with_capacity(functionals);
        for f in 0..functionals {
            let mut z = Variation::zeros(s.len());
            for b in &sampler.basis {
                z.axpy(sampler.functional(f, b)?, b);
            }
            sampler.remove_tangent(&mut z);
            reps.push(z);
        }
        let gram = DMatrix::from_fn(functionals, functionals, |i, j| {
            sampler.functional(i, &reps[j]).unwrap_or(f64::NAN)
        });
        if gram.iter().any(|v| !v.is_finite()) || gram.clone().lu().determinant().abs() < 1e-300 {
            return Err(Error::Tolerance(
                "constraint functional vanishes on the variation basis".into(),
            ));
        }
        sampler.representers = reps;
        sampler.representer_gram = gram;
        Ok(sampler)
    }

    fn functional_count(&self) -> usize {
        match self.mode {
            ConstraintMode::Summed => 1,
            ConstraintMode::PerComponent => 2,
        }
    }

    fn functional(&self, which: usize, v: &Variation) -> Result<f64> {
        match self.mode {
            ConstraintMode::Summed => self.form.constraint(v),
            ConstraintMode::PerComponent => Ok(self.form.constraint_components(v)?[which]),
        }
    }

    fn remove_tangent(&self, v: &mut Variation) {
        let rhs =
            DVector::from_iterator(self.tangent.len(), self.tangent.iter().map(|t| t.inner(v)));
        let c = self.tangent_gram.solve(&rhs);
        for (ci, t) in c.iter().zip(&self.tangent) {
            v.axpy(-ci, t);
        }
    }

    /// Projects `v` in place onto the constraint's null space along the
    /// tangent-free representers.
    pub fn project(&self, v: &mut Variation) -> Result<()> {
        let n = self.representers.len();
        let mut rhs = DVector::zeros(n);
        for i in 0..n {
            rhs[i] = self.functional(i, v)?;
        }
        let c = self
            .representer_gram
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Tolerance("constraint projection is singular".into()))?;
        for (ci, z) in c.iter().zip(&self.representers) {
            v.axpy(-ci, z);
        }
        Ok(())
    }

    /// Makes an arbitrary variation admissible.
    pub fn admissible(&self, mut v: Variation) -> Result<Variation> {
        self.remove_tangent(&mut v);
        self.project(&mut v)?;
        Ok(v)
    }

    /// A random admissible variation with Gaussian basis coefficients.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Variation> {
        for _ in 0..MAX_DRAW_ATTEMPTS {
            let mut v = Variation::zeros(self.form.samples.len());
            for b in &self.basis {
                let c: f64 = rng.sample(StandardNormal);
                v.axpy(c, b);
            }
            let v = self.admissible(v)?;
            if self.form.normal_fraction(&v) >= MIN_NORMAL_FRACTION {
                return Ok(v);
            }
        }
        Err(Error::Tolerance(
            "could not draw a variation with a normal component".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::VolumeKind;
    use crate::metric::OneFormSpec;
    use crate::variational::multiplier_for_circle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn circle_ctx(plane: RandersPlane, kind: VolumeKind) -> (LagrangeContext, ClosedCurve) {
        let lambda = multiplier_for_circle(&plane, kind, 1.0).unwrap();
        (
            LagrangeContext::new(plane, kind, lambda).unwrap(),
            ClosedCurve::circle(1.0).unwrap(),
        )
    }

    #[test]
    fn zero_and_scaling() {
        let plane = RandersPlane::new(OneFormSpec::constant(0.4, 0.3).unwrap());
        let (ctx, c) = circle_ctx(plane, VolumeKind::BH);
        let form = SecondVariationForm::new(&ctx, &c).unwrap();
        let n = form.t().len();
        assert_eq!(form.evaluate(&Variation::zeros(n)).unwrap(), 0.0);
        assert_eq!(form.constraint(&Variation::zeros(n)).unwrap(), 0.0);
        let v = Variation::from_fn(form.t(), |t| {
            ([t.sin(), (2.0 * t).sin()], [t.cos(), 2.0 * (2.0 * t).cos()])
        });
        let one = form.evaluate(&v).unwrap();
        let two = form.evaluate(&v.scaled(2.0)).unwrap();
        assert!((two - 4.0 * one).abs() <= 1e-10 * one.abs());
        assert!(form.evaluate(&Variation::zeros(3)).is_err());
    }

    #[test]
    fn projected_sine_variation_is_negative() {
        let (ctx, c) = circle_ctx(RandersPlane::euclidean_oracle(), VolumeKind::BH);
        let form = SecondVariationForm::new(&ctx, &c).unwrap();
        let sampler = VariationSampler::new(&form, ConstraintMode::Summed).unwrap();
        let v = Variation::from_fn(form.t(), |t| ([t.sin(), 0.0], [t.cos(), 0.0]));
        let v = sampler.admissible(v).unwrap();
        assert!(form.constraint(&v).unwrap().abs() < 1e-12);
        assert!(form.evaluate(&v).unwrap() < 0.0);
    }

    #[test]
    fn radial_variation_projects_to_constraint_null_space() {
        let (ctx, c) = circle_ctx(RandersPlane::euclidean_oracle(), VolumeKind::HT);
        let form = SecondVariationForm::new(&ctx, &c).unwrap();
        let v = Variation::from_fn(form.t(), |t| {
            let (s, co) = t.sin_cos();
            let r = 1.0 - co;
            ([r * co, r * s], [s * co - r * s, s * s + r * co])
        });
        assert!((form.constraint(&v).unwrap() - TAU).abs() < 1e-8);
        let sampler = VariationSampler::new(&form, ConstraintMode::Summed).unwrap();
        let p = sampler.admissible(v).unwrap();
        assert!(form.constraint(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn random_draws_are_admissible_and_negative() {
        let plane = RandersPlane::new(OneFormSpec::polar(PI / 2.0, 0.5).unwrap());
        let (ctx, c) = circle_ctx(plane, VolumeKind::BH);
        let form = SecondVariationForm::new(&ctx, &c).unwrap();
        for mode in [ConstraintMode::Summed, ConstraintMode::PerComponent] {
            let sampler = VariationSampler::new(&form, mode).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..20 {
                let v = sampler.draw(&mut rng).unwrap();
                let [c1, c2] = form.constraint_components(&v).unwrap();
                match mode {
                    ConstraintMode::Summed => assert!((c1 + c2).abs() < 1e-10),
                    ConstraintMode::PerComponent => assert!(c1.abs() < 1e-10 && c2.abs() < 1e-10),
                }
                assert!(v.y[0] == [0.0, 0.0] || norm(v.y[0]) < 1e-12);
                assert!(form.evaluate(&v).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn translation_like_mode_is_not_negative_under_swirling_one_form() {
        // Shifting the circle lowers its Randers length when sin c > 0;
        // the normal mode ρ = sin t then has J'' = 2σπ(1 − 1/(1+b)) > 0.
        let b = 0.5;
        let plane = RandersPlane::new(OneFormSpec::polar(PI / 2.0, b).unwrap());
        let (ctx, c) = circle_ctx(plane, VolumeKind::BH);
        let form = SecondVariationForm::new(&ctx, &c).unwrap();
        let v = Variation::from_fn(form.t(), |t| {
            let (s, co) = t.sin_cos();
            ([s * co, s * s], [co * co - s * s, 2.0 * s * co])
        });
        assert!(form.constraint(&v).unwrap().abs() < 1e-8);
        let j = form.evaluate(&v).unwrap();
        let expected = 2.0 * ctx.sigma() * PI * (1.0 - 1.0 / (1.0 + b));
        assert!((j - expected).abs() < 1e-6, "{j} vs {expected}");
    }
}
