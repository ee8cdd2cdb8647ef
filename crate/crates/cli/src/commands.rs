use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randers_core::curve::{enclosed_area, randers_length};
use randers_core::measure::{sigma_closed, sigma_definition, volume_factor_quadrature};
use randers_core::optimizer::{isoperimetric_deficit, match_length, maximize_area};
use randers_core::variational::{
    conjugate_bracket, conjugate_determinant, find_conjugate_points, fit_multiplier, fmt12,
    hestenes_report, multiplier_for_circle,
};
use randers_core::{
    AngleField, Error, LagrangeContext, OneFormSpec, PhiSpec, RandersPlane, VolumeKind,
};

use crate::config::RunConfig;
use crate::{exit, CliError, Outcome};

fn write_file(dir: Option<&Path>, name: &str, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = dir {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn measure(rc: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let plane = rc.plane()?;
    let curve = rc.curve.load()?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "randers_length = {}",
        fmt12(randers_length(plane, &curve)?)
    );
    let _ = writeln!(s, "euclidean_length = {}", fmt12(curve.euclidean_length()));
    for kind in VolumeKind::ALL {
        let _ = writeln!(
            s,
            "area.{kind} = {}",
            fmt12(enclosed_area(&curve, kind, plane.b())?)
        );
    }
    let _ = writeln!(
        s,
        "isoperimetric_deficit = {}",
        fmt12(isoperimetric_deficit(&curve)?)
    );
    write_file(out, "measure.txt", &s)?;
    Ok(Outcome {
        stdout: s,
        exit: exit::OK,
    })
}

/// Multiplier for verification, and where it came from.
fn verification_multiplier(
    rc: &RunConfig,
    plane: &RandersPlane,
    curve: &randers_core::ClosedCurve,
) -> Result<(f64, &'static str), CliError> {
    if let Some(l) = rc.lambda {
        return Ok((l, "configured"));
    }
    if let Some(a) = rc.curve.circle_radius() {
        match multiplier_for_circle(plane, rc.kind, a) {
            Ok(l) => return Ok((l, "closed-form")),
            Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok((fit_multiplier(plane, rc.kind, curve)?, "least-squares"))
}

pub fn verify(rc: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let plane = rc.plane()?;
    let curve = rc.curve.load()?;
    let (lambda, source) = verification_multiplier(rc, plane, &curve)?;
    let ctx = LagrangeContext::new(plane.clone(), rc.kind, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rc.seed);
    let report = hestenes_report(&ctx, &curve, rc.variations, &rc.hestenes, &mut rng)?;
    let mut s = String::new();
    let _ = writeln!(s, "metric.b = {}", fmt12(plane.b()));
    let _ = writeln!(s, "metric.theta = {}", plane.one_form().angle());
    let _ = writeln!(s, "lambda_source = {source}");
    let _ = writeln!(s, "seed = {}", rc.seed);
    s.push_str(&report.to_text());
    write_file(out, "report.txt", &s)?;
    Ok(Outcome {
        stdout: s,
        exit: if report.overall() {
            exit::OK
        } else {
            exit::CONDITION_FAILED
        },
    })
}

pub fn optimize(rc: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let plane = rc.plane()?;
    let init = rc.curve.load()?;
    // origin clearance is checked before rescaling the start to the target length
    randers_core::curve::randers_length_of_samples(plane, &init.samples(), rc.r_min)?;
    let init = match_length(plane, &init, rc.optimizer.target_length)?;
    let result = maximize_area(plane, rc.kind, &rc.optimizer, &init)?;
    let mut s = String::new();
    let _ = writeln!(s, "converged = {}", result.converged);
    let _ = writeln!(s, "area = {}", fmt12(result.area));
    let _ = writeln!(s, "length = {}", fmt12(result.length));
    let _ = writeln!(s, "violation = {}", fmt12(result.violation));
    let _ = writeln!(
        s,
        "projected_gradient = {}",
        fmt12(result.projected_gradient)
    );
    let _ = writeln!(s, "outer_iterations = {}", result.iterations);
    let _ = writeln!(s, "inner_iterations = {}", result.inner_iterations);
    write_file(out, "summary.txt", &s)?;
    write_file(out, "curve.txt", &result.curve.to_text())?;
    write_file(out, "trace.csv", &result.trace_csv())?;
    Ok(Outcome {
        stdout: s,
        exit: if result.converged {
            exit::OK
        } else {
            exit::NOT_CONVERGED
        },
    })
}

pub fn volume(rc: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let phi = PhiSpec::new(&rc.phi, rc.n, 0.0)?;
    let mut s = String::from(
        "b,bh_quadrature,bh_closed,ht_quadrature,ht_closed,bh_definition,ht_definition,max_definition,max_closed,min_definition,min_closed\n",
    );
    for &b in &rc.b_grid {
        let p = phi.with_b(b)?;
        let bh = volume_factor_quadrature(&p, VolumeKind::BH)?;
        let ht = volume_factor_quadrature(&p, VolumeKind::HT)?;
        let plane = if b > 0.0 {
            RandersPlane::new(OneFormSpec::constant(0.0, b)?)
        } else {
            RandersPlane::euclidean_oracle()
        };
        let def = |k| sigma_definition(&plane, [1.0, 0.0], k);
        let closed = |k| sigma_closed(k, b, rc.n);
        let row = [
            bh,
            closed(VolumeKind::BH)?,
            ht,
            closed(VolumeKind::HT)?,
            def(VolumeKind::BH)?,
            def(VolumeKind::HT)?,
            def(VolumeKind::Max)?,
            closed(VolumeKind::Max)?,
            def(VolumeKind::Min)?,
            closed(VolumeKind::Min)?,
        ];
        let _ = write!(s, "{}", fmt12(b));
        for v in row {
            let _ = write!(s, ",{}", fmt12(v));
        }
        s.push('\n');
    }
    write_file(out, "volume.csv", &s)?;
    Ok(Outcome {
        stdout: s,
        exit: exit::OK,
    })
}

pub fn jacobi(rc: &RunConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let a = rc.jacobi_a;
    let lambda = match (rc.jacobi_lambda, rc.plane.as_ref()) {
        (Some(l), _) => l,
        (None, Some(plane)) if !matches!(plane.one_form().angle(), AngleField::Expression(_)) => {
            multiplier_for_circle(plane, rc.kind, a)?
        }
        (None, Some(_)) => {
            return Err(CliError::Config(
                "jacobi.lambda is required for expression angle fields".into(),
            ))
        }
        (None, None) => -a,
    };
    let roots = find_conjugate_points(a, lambda, rc.jacobi_epsilon)?;
    let mut table = String::from("dt,bracket,determinant\n");
    let rows = rc.jacobi_rows.max(1);
    for j in 0..=rows {
        let dt = TAU * j as f64 / rows as f64;
        let _ = writeln!(
            table,
            "{},{},{}",
            fmt12(dt),
            fmt12(conjugate_bracket(dt)),
            fmt12(conjugate_determinant(dt, a, lambda)?)
        );
    }
    let mut s = String::new();
    let _ = writeln!(s, "# a = {}", fmt12(a));
    let _ = writeln!(s, "# lambda = {}", fmt12(lambda));
    let _ = writeln!(s, "# conjugate_points = {}", roots.len());
    for r in &roots {
        let _ = writeln!(s, "# conjugate_point = {}", fmt12(*r));
    }
    s.push_str(&table);
    write_file(out, "jacobi.csv", &s)?;
    Ok(Outcome {
        stdout: s,
        exit: if roots.is_empty() {
            exit::OK
        } else {
            exit::CONDITION_FAILED
        },
    })
}
