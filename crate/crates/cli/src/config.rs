//! Flat `section.key = value` configuration.
//!
//! Lines are `key = value`; `#` starts a comment; values may be wrapped in
//! double quotes. Keys not listed in [`KEYS`] are rejected.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use randers_core::optimizer::OptimizerConfig;
use randers_core::variational::{ConstraintMode, HestenesConfig};
use randers_core::{AngleField, ClosedCurve, Expr, OneFormSpec, RandersPlane, VolumeKind};

use crate::CliError;

/// Every accepted key with its one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("metric.b", "amplitude of the one-form, 0 < b < 1"),
    (
        "metric.theta",
        "constant:<c> | polar:<c> | expr:\"<θ(x1,x2)>\"",
    ),
    ("metric.kind", "volume form: BH | HT | Max | Min"),
    (
        "curve.source",
        "circle:<a> | ellipse:<rx>:<ry> | <coefficient file>",
    ),
    ("curve.r_min", "origin clearance under polar angle fields"),
    (
        "verify.lambda",
        "multiplier; default: closed form for circles, least squares otherwise",
    ),
    (
        "verify.variations",
        "random admissible variations for condition 4",
    ),
    (
        "verify.weierstrass_samples",
        "random (t, u) pairs for condition 3",
    ),
    (
        "verify.quadratic_samples",
        "random (t, y) pairs for condition 5",
    ),
    (
        "verify.el_tolerance",
        "condition 1 threshold on the residual sup-norm",
    ),
    (
        "verify.normality_threshold",
        "condition 2 threshold on max |P_i|",
    ),
    (
        "verify.ray_exclusion",
        "angle (rad) around rays skipped in conditions 3 and 5",
    ),
    ("verify.constraint", "summed | per-component"),
    ("optimize.degree", "Fourier degree M"),
    ("optimize.target_length", "Randers length L0"),
    ("optimize.initial_penalty", "mu0"),
    (
        "optimize.penalty_growth",
        "factor applied to mu when the violation stalls",
    ),
    ("optimize.max_outer", "outer iterations"),
    ("optimize.max_inner", "inner iterations per subproblem"),
    (
        "optimize.gradient_tolerance",
        "projected-gradient tolerance",
    ),
    (
        "optimize.constraint_tolerance",
        "length-constraint tolerance",
    ),
    ("volume.phi", "profile phi(s) of the (alpha,beta)-metric"),
    ("volume.n", "dimension"),
    ("volume.b_grid", "start:stop:step or comma-separated list"),
    ("jacobi.a", "circle radius"),
    (
        "jacobi.lambda",
        "multiplier; default: closed form for the configured metric",
    ),
    ("jacobi.rows", "rows of the determinant table"),
    ("jacobi.epsilon", "distance kept from 0 and 2pi"),
    ("run.seed", "seed for randomized checks"),
];

/// Raw key/value pairs after overrides, before typing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", i + 1))
            })?;
            raw.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
        self.set(k.trim(), v.trim()).map_err(CliError::Config)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(format!("unknown key `{key}`"));
        }
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// `#` outside double quotes starts a comment.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// A scalar that may be written as a constant expression such as `pi/2`.
fn number(key: &str, v: &str) -> Result<f64, CliError> {
    Expr::parse(v, &[])
        .and_then(|e| e.eval(&[]))
        .map_err(|e| CliError::Config(format!("{key}: `{v}` is not a number ({e})")))
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: `{v}` is not a nonnegative integer")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveSource {
    Circle(f64),
    Ellipse(f64, f64),
    File(PathBuf),
}

impl CurveSource {
    fn parse(v: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = v.split(':').collect();
        match parts.as_slice() {
            ["circle", a] => Ok(CurveSource::Circle(number("curve.source", a)?)),
            ["ellipse", rx, ry] => Ok(CurveSource::Ellipse(
                number("curve.source", rx)?,
                number("curve.source", ry)?,
            )),
            ["circle", ..] | ["ellipse", ..] => {
                Err(CliError::Config(format!("curve.source: malformed `{v}`")))
            }
            _ => Ok(CurveSource::File(PathBuf::from(v))),
        }
    }

    pub fn load(&self) -> Result<ClosedCurve, CliError> {
        Ok(match self {
            CurveSource::Circle(a) => ClosedCurve::circle(*a)?,
            CurveSource::Ellipse(rx, ry) => ClosedCurve::ellipse(*rx, *ry)?,
            CurveSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read curve {}: {e}", p.display()))
                })?;
                ClosedCurve::from_text(&text)?
            }
        })
    }

    /// Radius if the source is a circle about the origin.
    pub fn circle_radius(&self) -> Option<f64> {
        match self {
            CurveSource::Circle(a) => Some(*a),
            _ => None,
        }
    }
}

/// Grid of `b` values for the volume table.
fn b_grid(v: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("volume.b_grid: malformed `{v}`"));
    if v.contains(':') {
        let p: Vec<f64> = v
            .split(':')
            .map(|s| number("volume.b_grid", s))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = p.as_slice() else {
            return Err(bad());
        };
        if !(*step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| start + i as f64 * step).collect())
    } else {
        v.split(',')
            .map(|s| number("volume.b_grid", s.trim()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub plane: Option<RandersPlane>,
    pub kind: VolumeKind,
    pub curve: CurveSource,
    pub r_min: f64,
    pub lambda: Option<f64>,
    pub variations: usize,
    pub hestenes: HestenesConfig,
    pub optimizer: OptimizerConfig,
    pub phi: String,
    pub n: u32,
    pub b_grid: Vec<f64>,
    pub jacobi_a: f64,
    pub jacobi_lambda: Option<f64>,
    pub jacobi_rows: usize,
    pub jacobi_epsilon: f64,
    pub seed: u64,
}

fn angle_field(v: &str) -> Result<AngleField, CliError> {
    if let Some(c) = v.strip_prefix("constant:") {
        Ok(AngleField::Constant(number("metric.theta", c)?))
    } else if let Some(c) = v.strip_prefix("polar:") {
        Ok(AngleField::Polar(number("metric.theta", c)?))
    } else if let Some(src) = v.strip_prefix("expr:") {
        let src = src
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(src);
        Ok(AngleField::expression(src)?)
    } else {
        Err(CliError::Config(format!(
            "metric.theta: expected constant:<c>, polar:<c> or expr:\"...\", got `{v}`"
        )))
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let get = |k: &str| raw.get(k);
        let num = |k: &str, d: f64| get(k).map_or(Ok(d), |v| number(k, v));

        let plane = match (get("metric.b"), get("metric.theta")) {
            (Some(b), Some(t)) => Some(RandersPlane::new(OneFormSpec::new(
                angle_field(t)?,
                number("metric.b", b)?,
            )?)),
            (None, None) => None,
            _ => {
                return Err(CliError::Config(
                    "metric.b and metric.theta must be given together".into(),
                ))
            }
        };
        let kind = match get("metric.kind") {
            Some(v) => v.parse()?,
            None => VolumeKind::BH,
        };
        let curve = CurveSource::parse(get("curve.source").unwrap_or("circle:1"))?;
        let r_min = num("curve.r_min", randers_core::curve::DEFAULT_R_MIN)?;

        let dh = HestenesConfig::default();
        let hestenes = HestenesConfig {
            el_tolerance: num("verify.el_tolerance", dh.el_tolerance)?,
            normality_threshold: num("verify.normality_threshold", dh.normality_threshold)?,
            weierstrass_samples: get("verify.weierstrass_samples")
                .map_or(Ok(dh.weierstrass_samples), |v| {
                    integer("verify.weierstrass_samples", v)
                })?,
            quadratic_samples: get("verify.quadratic_samples")
                .map_or(Ok(dh.quadratic_samples), |v| {
                    integer("verify.quadratic_samples", v)
                })?,
            ray_exclusion: num("verify.ray_exclusion", dh.ray_exclusion)?,
            constraint_mode: match get("verify.constraint").unwrap_or("summed") {
                "summed" => ConstraintMode::Summed,
                "per-component" => ConstraintMode::PerComponent,
                other => {
                    return Err(CliError::Config(format!(
                        "verify.constraint: expected summed or per-component, got `{other}`"
                    )))
                }
            },
            ..dh
        };

        let d = OptimizerConfig::default();
        let seed = get("run.seed").map_or(Ok(0), |v| integer("run.seed", v))?;
        let optimizer = OptimizerConfig {
            degree: get("optimize.degree")
                .map_or(Ok(d.degree), |v| integer("optimize.degree", v))?,
            target_length: num("optimize.target_length", TAU)?,
            initial_penalty: num("optimize.initial_penalty", d.initial_penalty)?,
            penalty_growth: num("optimize.penalty_growth", d.penalty_growth)?,
            max_outer: get("optimize.max_outer")
                .map_or(Ok(d.max_outer), |v| integer("optimize.max_outer", v))?,
            max_inner: get("optimize.max_inner")
                .map_or(Ok(d.max_inner), |v| integer("optimize.max_inner", v))?,
            gradient_tolerance: num("optimize.gradient_tolerance", d.gradient_tolerance)?,
            constraint_tolerance: num("optimize.constraint_tolerance", d.constraint_tolerance)?,
            r_min,
            seed,
        };
        optimizer.validate()?;

        let rc = RunConfig {
            plane,
            kind,
            curve,
            r_min,
            lambda: get("verify.lambda")
                .map(|v| number("verify.lambda", v))
                .transpose()?,
            variations: get("verify.variations")
                .map_or(Ok(200), |v| integer("verify.variations", v))?,
            hestenes,
            optimizer,
            phi: get("volume.phi").unwrap_or("1+s").to_string(),
            n: get("volume.n").map_or(Ok(2), |v| integer("volume.n", v))?,
            b_grid: b_grid(get("volume.b_grid").unwrap_or("0.1:0.9:0.1"))?,
            jacobi_a: num("jacobi.a", 1.0)?,
            jacobi_lambda: get("jacobi.lambda")
                .map(|v| number("jacobi.lambda", v))
                .transpose()?,
            jacobi_rows: get("jacobi.rows").map_or(Ok(64), |v| integer("jacobi.rows", v))?,
            jacobi_epsilon: num(
                "jacobi.epsilon",
                randers_core::variational::CONJUGATE_EPSILON,
            )?,
            seed,
        };
        if !(rc.r_min > 0.0) {
            return Err(CliError::Config("curve.r_min must be positive".into()));
        }
        Ok(rc)
    }

    pub fn plane(&self) -> Result<&RandersPlane, CliError> {
        self.plane
            .as_ref()
            .ok_or_else(|| CliError::Config("metric.b and metric.theta are required".into()))
    }
}
