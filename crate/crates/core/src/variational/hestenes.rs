use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;

use crate::curve::{is_simple, ClosedCurve};
use crate::error::{Error, Result};
use crate::metric::{dot, norm, Vector};

use super::excess::{hdotdot_form, weierstrass_e, weierstrass_e_closed};
use super::lagrange::{el_residual, normality, AngleConvention, LagrangeContext};
use super::second::{ConstraintMode, SecondVariationForm, VariationSampler};

/// Tolerances and sample sizes for [`hestenes_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct HestenesConfig {
    /// Condition 1 passes when the EL sup-norm is below this.
    pub el_tolerance: f64,
    /// Condition 2: each `max |Pᵢ|` must exceed this.
    pub normality_threshold: f64,
    /// Number of random `(t, u)` pairs for condition 3.
    pub weierstrass_samples: usize,
    /// Number of random `(t, y)` pairs for condition 5.
    pub quadratic_samples: usize,
    /// Directions within this angle of `±ẋ` (condition 5) or `ẋ`
    /// (condition 3) are skipped, since equality holds on rays.
    pub ray_exclusion: f64,
    /// Condition 3 draws `|u| / |ẋ|` log-uniformly from this range.
    pub magnitude_range: (f64, f64),
    pub constraint_mode: ConstraintMode,
    pub convention: AngleConvention,
}

impl Default for HestenesConfig {
    fn default() -> Self {
        HestenesConfig {
            el_tolerance: 1e-6,
            normality_threshold: 1e-8,
            weierstrass_samples: 2000,
            quadratic_samples: 2000,
            ray_exclusion: 1e-3,
            magnitude_range: (0.1, 10.0),
            constraint_mode: ConstraintMode::Summed,
            convention: AngleConvention::Spatial,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutcome {
    pub name: &'static str,
    pub pass: bool,
    /// Max residual, min normality norm, max `E`, max `J''` or max quadratic
    /// form value, by condition.
    pub evidence: f64,
    pub threshold: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HestenesReport {
    pub kind: String,
    pub lambda: f64,
    pub conditions: [ConditionOutcome; 5],
    /// Largest gap between the finite-difference and closed-form `E`.
    pub weierstrass_closed_gap: f64,
    /// Largest gap between the finite-difference and closed-form `ẏᵀh_ẋẋẏ`.
    pub quadratic_closed_gap: f64,
    pub normality_min_norm: f64,
}

impl HestenesReport {
    pub fn overall(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    /// `key = value` lines, numbers to 12 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "volume_kind = {}", self.kind);
        let _ = writeln!(s, "lambda = {}", fmt12(self.lambda));
        for (i, c) in self.conditions.iter().enumerate() {
            let k = i + 1;
            let _ = writeln!(s, "condition.{k}.name = {}", c.name);
            let _ = writeln!(s, "condition.{k}.pass = {}", c.pass);
            let _ = writeln!(s, "condition.{k}.evidence = {}", fmt12(c.evidence));
            let _ = writeln!(s, "condition.{k}.threshold = {}", fmt12(c.threshold));
            let _ = writeln!(s, "condition.{k}.samples = {}", c.samples);
        }
        let _ = writeln!(
            s,
            "normality.min_joint_norm = {}",
            fmt12(self.normality_min_norm)
        );
        let _ = writeln!(
            s,
            "weierstrass.closed_form_gap = {}",
            fmt12(self.weierstrass_closed_gap)
        );
        let _ = writeln!(
            s,
            "quadratic.closed_form_gap = {}",
            fmt12(self.quadratic_closed_gap)
        );
        let _ = writeln!(
            s,
            "overall = {}",
            if self.overall() { "pass" } else { "fail" }
        );
        s
    }
}

/// 12 significant digits in scientific notation.
pub fn fmt12(v: f64) -> String {
    // no "-0"
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

fn unit(angle: f64) -> Vector {
    [angle.cos(), angle.sin()]
}

fn angle_between(a: Vector, b: Vector) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).atan2(dot(a, b)).abs()
}

/// Checks the five sufficiency conditions on `curve` for `ctx`.
pub fn hestenes_report<R: Rng + ?Sized>(
    ctx: &LagrangeContext,
    curve: &ClosedCurve,
    variation_count: usize,
    config: &HestenesConfig,
    rng: &mut R,
) -> Result<HestenesReport> {
    if !is_simple(curve) {
        return Err(Error::NonSimple);
    }
    let lambda = ctx.lambda();

    let el = el_residual(ctx, curve)?.sup_norm();
    let c1 = ConditionOutcome {
        name: "euler_lagrange",
        pass: el < config.el_tolerance,
        evidence: el,
        threshold: config.el_tolerance,
        samples: curve.default_sample_count(),
    };

    let nm = normality(ctx.plane(), curve, config.convention)?;
    let weakest = nm.max_abs[0].min(nm.max_abs[1]);
    let c2 = ConditionOutcome {
        name: "normality",
        pass: nm.is_normal(config.normality_threshold),
        evidence: weakest,
        threshold: config.normality_threshold,
        samples: nm.t.len(),
    };

    let form = SecondVariationForm::new(ctx, curve)?;
    let samples = form.samples();
    let n = samples.len();
    let (lo, hi) = config.magnitude_range;
    let (llo, lhi) = (lo.ln(), hi.ln());

    let mut max_e = f64::NEG_INFINITY;
    let mut e_gap = 0.0f64;
    let mut taken = 0;
    while taken < config.weierstrass_samples {
        let j = rng.random_range(0..n);
        let (x, v) = (samples.position[j], samples.velocity[j]);
        let dir = unit(rng.random_range(0.0..TAU));
        if angle_between(dir, v) <= config.ray_exclusion {
            continue;
        }
        let mag = norm(v) * rng.random_range(llo..lhi).exp();
        let u = [mag * dir[0], mag * dir[1]];
        let e = weierstrass_e(ctx, x, v, u)?;
        e_gap = e_gap.max((e - weierstrass_e_closed(lambda, v, u)).abs());
        max_e = max_e.max(e);
        taken += 1;
    }
    let c3 = ConditionOutcome {
        name: "weierstrass",
        pass: max_e < 0.0,
        evidence: max_e,
        threshold: 0.0,
        samples: taken,
    };

    let sampler = VariationSampler::new(&form, config.constraint_mode)?;
    let mut max_j = f64::NEG_INFINITY;
    for _ in 0..variation_count {
        let v = sampler.draw(rng)?;
        max_j = max_j.max(form.evaluate(&v)?);
    }
    let c4 = ConditionOutcome {
        name: "second_variation",
        pass: variation_count > 0 && max_j < 0.0,
        evidence: max_j,
        threshold: 0.0,
        samples: variation_count,
    };

    let mut max_q = f64::NEG_INFINITY;
    let mut q_gap = 0.0f64;
    let mut taken = 0;
    while taken < config.quadratic_samples {
        let j = rng.random_range(0..n);
        let v = samples.velocity[j];
        let dir = unit(rng.random_range(0.0..TAU));
        let off = angle_between(dir, v);
        if off <= config.ray_exclusion || PI - off <= config.ray_exclusion {
            continue;
        }
        let y = [norm(v) * dir[0], norm(v) * dir[1]];
        let m = form.velocity_hessian(j);
        let q = m[0][0] * y[0] * y[0] + 2.0 * m[0][1] * y[0] * y[1] + m[1][1] * y[1] * y[1];
        q_gap = q_gap.max((q - hdotdot_form(lambda, v, y)?).abs());
        max_q = max_q.max(q);
        taken += 1;
    }
    let c5 = ConditionOutcome {
        name: "quadratic_form",
        pass: max_q < 0.0,
        evidence: max_q,
        threshold: 0.0,
        samples: taken,
    };

    Ok(HestenesReport {
        kind: ctx.kind().to_string(),
        lambda,
        conditions: [c1, c2, c3, c4, c5],
        weierstrass_closed_gap: e_gap,
        quadratic_closed_gap: q_gap,
        normality_min_norm: nm.min_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::VolumeKind;
    use crate::metric::{OneFormSpec, RandersPlane};
    use crate::variational::multiplier_for_circle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plane() -> RandersPlane {
        RandersPlane::new(OneFormSpec::polar(PI / 2.0, 0.5).unwrap())
    }

    fn quick() -> HestenesConfig {
        HestenesConfig {
            weierstrass_samples: 300,
            quadratic_samples: 300,
            ..HestenesConfig::default()
        }
    }

    #[test]
    fn circle_passes_all_conditions() {
        let lambda = multiplier_for_circle(&plane(), VolumeKind::BH, 1.0).unwrap();
        let ctx = LagrangeContext::new(plane(), VolumeKind::BH, lambda).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = hestenes_report(
            &ctx,
            &ClosedCurve::circle(1.0).unwrap(),
            20,
            &quick(),
            &mut rng,
        )
        .unwrap();
        assert!(r.overall(), "{}", r.to_text());
        assert!(r.weierstrass_closed_gap < 1e-8);
        assert!(r.quadratic_closed_gap < 1e-6);
        assert!(r.to_text().ends_with("overall = pass\n"));
    }

    #[test]
    fn wrong_sign_fails_excess_and_quadratic() {
        let ctx = LagrangeContext::new(plane(), VolumeKind::BH, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = hestenes_report(
            &ctx,
            &ClosedCurve::circle(1.0).unwrap(),
            5,
            &quick(),
            &mut rng,
        )
        .unwrap();
        assert!(!r.conditions[2].pass && !r.conditions[4].pass);
        assert!(!r.overall());
    }

    #[test]
    fn ellipse_fails_euler_lagrange() {
        let ctx = LagrangeContext::new(plane(), VolumeKind::BH, -0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = hestenes_report(
            &ctx,
            &ClosedCurve::ellipse(2.0, 1.0).unwrap(),
            5,
            &quick(),
            &mut rng,
        )
        .unwrap();
        assert!(!r.conditions[0].pass);
    }

    #[test]
    fn equal_seeds_give_identical_reports() {
        let ctx = LagrangeContext::new(plane(), VolumeKind::HT, -0.7).unwrap();
        let c = ClosedCurve::circle(1.0).unwrap();
        let a = hestenes_report(&ctx, &c, 5, &quick(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = hestenes_report(&ctx, &c, 5, &quick(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
