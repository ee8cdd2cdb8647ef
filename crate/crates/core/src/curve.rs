//! Closed plane curves as truncated Fourier series on `t ∈ [0, 2π]`, their
//! Randers length and their volume-form-weighted enclosed area.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::measure::{sigma_closed, VolumeKind};
use crate::metric::{dot, norm, AngleField, Point, RandersPlane, Vector};
use crate::quadrature::periodic_trapezoid;

/// Curves passing closer than this to the origin are rejected under polar
/// angle fields, where `θ` is singular.
pub const DEFAULT_R_MIN: f64 = 1e-3;

/// One coordinate `a₀ + Σ aₖ cos kt + bₖ sin kt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoord {
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierCoord {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        FourierCoord { mean, cos, sin }
    }

    fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn padded(mut self, degree: usize) -> Self {
        self.cos.resize(degree, 0.0);
        self.sin.resize(degree, 0.0);
        self
    }

    /// Value and first two derivatives, given `cos kt` / `sin kt` tables.
    fn eval(&self, cos_kt: &[f64], sin_kt: &[f64]) -> [f64; 3] {
        let mut out = [self.mean, 0.0, 0.0];
        for k in 0..self.cos.len() {
            let kf = (k + 1) as f64;
            let (a, b) = (self.cos[k], self.sin[k]);
            let (c, s) = (cos_kt[k], sin_kt[k]);
            out[0] += a * c + b * s;
            out[1] += kf * (b * c - a * s);
            out[2] -= kf * kf * (a * c + b * s);
        }
        out
    }
}

fn trig_table(t: f64, degree: usize) -> (Vec<f64>, Vec<f64>) {
    let mut cos_kt = Vec::with_capacity(degree);
    let mut sin_kt = Vec::with_capacity(degree);
    let (s1, c1) = t.sin_cos();
    let (mut c, mut s) = (c1, s1);
    for k in 0..degree {
        if k > 0 && k % 16 == 0 {
            // re-seed to keep the recurrence error bounded
            let (sk, ck) = ((k + 1) as f64 * t).sin_cos();
            c = ck;
            s = sk;
        }
        cos_kt.push(c);
        sin_kt.push(s);
        let next_c = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = next_c;
    }
    (cos_kt, sin_kt)
}

/// Positions, velocities and accelerations on the uniform grid `tⱼ = 2πj/N`.
/// Derivatives are exact termwise derivatives of the series.
#[derive(Debug, Clone)]
pub struct CurveSamples {
    pub t: Vec<f64>,
    pub position: Vec<Point>,
    pub velocity: Vec<Vector>,
    pub acceleration: Vec<Vector>,
}

impl CurveSamples {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn min_speed(&self) -> f64 {
        self.velocity
            .iter()
            .map(|v| norm(*v))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_radius(&self) -> f64 {
        self.position
            .iter()
            .map(|p| norm(*p))
            .fold(f64::INFINITY, f64::min)
    }

    /// `½∮(x¹ẋ² − x²ẋ¹) dt`.
    pub fn signed_area(&self) -> f64 {
        let values: Vec<f64> = self
            .position
            .iter()
            .zip(&self.velocity)
            .map(|(x, v)| 0.5 * (x[0] * v[1] - x[1] * v[0]))
            .collect();
        periodic_trapezoid(&values)
    }

    pub fn euclidean_length(&self) -> f64 {
        let speeds: Vec<f64> = self.velocity.iter().map(|v| norm(*v)).collect();
        periodic_trapezoid(&speeds)
    }

    /// True iff the closed polygon through the samples has no crossing or
    /// touching between non-adjacent edges.
    pub fn polygon_is_simple(&self) -> bool {
        polygon_is_simple(&self.position)
    }
}

/// A closed, regular, positively oriented Fourier curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    coords: [FourierCoord; 2],
}

impl ClosedCurve {
    /// Builds a curve, checking regularity and reversing the orientation if
    /// the enclosed signed area is negative.
    pub fn new(x1: FourierCoord, x2: FourierCoord) -> Result<Self> {
        let mut curve = Self::unchecked(x1, x2);
        let samples = curve.samples();
        let min_speed = samples.min_speed();
        let scale = curve
            .coefficients()
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        if !(min_speed > 1e-12 * scale.max(1e-300)) {
            return Err(Error::Irregular { min_speed });
        }
        if samples.signed_area() < 0.0 {
            curve = curve.reversed();
        }
        Ok(curve)
    }

    /// No regularity or orientation checks.
    pub(crate) fn unchecked(x1: FourierCoord, x2: FourierCoord) -> Self {
        let degree = x1.degree().max(x2.degree()).max(1);
        ClosedCurve {
            coords: [x1.padded(degree), x2.padded(degree)],
        }
    }

    /// Coefficients in interchange order
    /// `(a₁₀, a₁₁..a₁M, b₁₁..b₁M, a₂₀, a₂₁..a₂M, b₂₁..b₂M)`.
    pub fn from_coefficients(degree: usize, coefficients: &[f64]) -> Result<Self> {
        Self::new_from_vector(degree, coefficients, true)
    }

    pub(crate) fn from_coefficients_unchecked(degree: usize, coefficients: &[f64]) -> Self {
        Self::new_from_vector(degree, coefficients, false).expect("unchecked construction")
    }

    fn new_from_vector(degree: usize, c: &[f64], checked: bool) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Format("Fourier degree must be at least 1".into()));
        }
        let len = 2 * (2 * degree + 1);
        if c.len() != len {
            return Err(Error::Format(format!(
                "degree {degree} needs {len} coefficients, got {}",
                c.len()
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("coefficients must be finite".into()));
        }
        let coord = |off: usize| {
            FourierCoord::new(
                c[off],
                c[off + 1..off + 1 + degree].to_vec(),
                c[off + 1 + degree..off + 1 + 2 * degree].to_vec(),
            )
        };
        let (x1, x2) = (coord(0), coord(2 * degree + 1));
        if checked {
            Self::new(x1, x2)
        } else {
            Ok(Self::unchecked(x1, x2))
        }
    }

    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * (2 * self.degree() + 1));
        for c in &self.coords {
            out.push(c.mean);
            out.extend_from_slice(&c.cos);
            out.extend_from_slice(&c.sin);
        }
        out
    }

    /// `(a cos t, a sin t)`.
    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        Self::ellipse(radius, radius)
    }

    /// `(rx cos t, ry sin t)`.
    pub fn ellipse(rx: f64, ry: f64) -> Result<Self> {
        if !(rx > 0.0 && ry > 0.0 && rx.is_finite() && ry.is_finite()) {
            return Err(Error::domain(format!(
                "ellipse semi-axes must be positive, got {rx}, {ry}"
            )));
        }
        Self::new(
            FourierCoord::new(0.0, vec![rx], vec![0.0]),
            FourierCoord::new(0.0, vec![0.0], vec![ry]),
        )
    }

    /// Fits a degree-`degree` series to points sampled uniformly in `t`
    /// (the discrete Fourier projection).
    pub fn from_samples(points: &[Point], degree: usize) -> Result<Self> {
        let n = points.len();
        if degree == 0 || n <= 2 * degree {
            return Err(Error::domain(format!(
                "need more than {} samples for degree {degree}, got {n}",
                2 * degree
            )));
        }
        let mut coords = Vec::with_capacity(2);
        for i in 0..2 {
            let mean = points.iter().map(|p| p[i]).sum::<f64>() / n as f64;
            let mut cos = vec![0.0; degree];
            let mut sin = vec![0.0; degree];
            for (j, p) in points.iter().enumerate() {
                let t = TAU * j as f64 / n as f64;
                let (ck, sk) = trig_table(t, degree);
                for k in 0..degree {
                    cos[k] += 2.0 * p[i] * ck[k] / n as f64;
                    sin[k] += 2.0 * p[i] * sk[k] / n as f64;
                }
            }
            coords.push(FourierCoord::new(mean, cos, sin));
        }
        let x2 = coords.pop().expect("two coordinates");
        let x1 = coords.pop().expect("two coordinates");
        Self::new(x1, x2)
    }

    pub fn degree(&self) -> usize {
        self.coords[0].cos.len()
    }

    pub fn coord(&self, i: usize) -> &FourierCoord {
        &self.coords[i]
    }

    /// Default grid size `max(512, 8M)`.
    pub fn default_sample_count(&self) -> usize {
        (8 * self.degree()).max(512)
    }

    /// Position, velocity and acceleration at `t`.
    pub fn eval(&self, t: f64) -> (Point, Vector, Vector) {
        let (ck, sk) = trig_table(t, self.degree());
        let a = self.coords[0].eval(&ck, &sk);
        let b = self.coords[1].eval(&ck, &sk);
        ([a[0], b[0]], [a[1], b[1]], [a[2], b[2]])
    }

    pub fn position(&self, t: f64) -> Point {
        self.eval(t).0
    }

    pub fn velocity(&self, t: f64) -> Vector {
        self.eval(t).1
    }

    pub fn sample(&self, n: usize) -> CurveSamples {
        let mut s = CurveSamples {
            t: Vec::with_capacity(n),
            position: Vec::with_capacity(n),
            velocity: Vec::with_capacity(n),
            acceleration: Vec::with_capacity(n),
        };
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            let (x, v, a) = self.eval(t);
            s.t.push(t);
            s.position.push(x);
            s.velocity.push(v);
            s.acceleration.push(a);
        }
        s
    }

    pub fn samples(&self) -> CurveSamples {
        self.sample(self.default_sample_count())
    }

    /// Same curve traversed backwards (`t ↦ −t`).
    pub fn reversed(&self) -> Self {
        let flip = |c: &FourierCoord| {
            FourierCoord::new(c.mean, c.cos.clone(), c.sin.iter().map(|v| -v).collect())
        };
        ClosedCurve {
            coords: [flip(&self.coords[0]), flip(&self.coords[1])],
        }
    }

    /// The reparametrized curve `t ↦ x(t + s)`.
    pub fn phase_shifted(&self, s: f64) -> Self {
        let shift = |c: &FourierCoord| {
            let mut out = c.clone();
            for k in 0..c.cos.len() {
                let (sn, cs) = ((k + 1) as f64 * s).sin_cos();
                out.cos[k] = c.cos[k] * cs + c.sin[k] * sn;
                out.sin[k] = c.sin[k] * cs - c.cos[k] * sn;
            }
            out
        };
        ClosedCurve {
            coords: [shift(&self.coords[0]), shift(&self.coords[1])],
        }
    }

    /// Homothety about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |c: &FourierCoord| {
            FourierCoord::new(
                factor * c.mean,
                c.cos.iter().map(|v| factor * v).collect(),
                c.sin.iter().map(|v| factor * v).collect(),
            )
        };
        ClosedCurve {
            coords: [scale(&self.coords[0]), scale(&self.coords[1])],
        }
    }

    pub fn translated(&self, offset: Vector) -> Self {
        let mut out = self.clone();
        out.coords[0].mean += offset[0];
        out.coords[1].mean += offset[1];
        out
    }

    /// Same curve padded with zeros, or truncated, to `degree`.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Format("Fourier degree must be at least 1".into()));
        }
        let fit = |c: &FourierCoord| {
            let mut c = c.clone();
            c.cos.truncate(degree);
            c.sin.truncate(degree);
            c.padded(degree)
        };
        if degree >= self.degree() {
            return Ok(ClosedCurve {
                coords: [fit(&self.coords[0]), fit(&self.coords[1])],
            });
        }
        Self::new(fit(&self.coords[0]), fit(&self.coords[1]))
    }

    /// Adds `z ↦ z + amplitude · e^{-i(k-1)t}` in complex notation. On a
    /// circle this displaces points normally by `amplitude · cos kt` to first
    /// order; `k = 1` is a pure translation.
    pub fn with_mode(&self, k: usize, amplitude: f64) -> Self {
        let mut out = self.clone();
        if k == 1 {
            out.coords[0].mean += amplitude;
            return out;
        }
        let m = k - 1;
        let degree = out.degree().max(m);
        out.coords = [
            out.coords[0].clone().padded(degree),
            out.coords[1].clone().padded(degree),
        ];
        // e^{-imt} = cos mt − i sin mt
        out.coords[0].cos[m - 1] += amplitude;
        out.coords[1].sin[m - 1] -= amplitude;
        out
    }

    pub fn signed_area(&self) -> f64 {
        self.samples().signed_area()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.samples().euclidean_length()
    }

    /// Serializes as the degree on the first line followed by one line of
    /// `2M+1` coefficients per coordinate, each with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.degree());
        for c in &self.coords {
            let line: Vec<String> = std::iter::once(c.mean)
                .chain(c.cos.iter().copied())
                .chain(c.sin.iter().copied())
                .map(|v| format!("{v:.16e}"))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses [`ClosedCurve::to_text`] output; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let degree: usize = tokens
            .next()
            .ok_or_else(|| Error::Format("empty curve file".into()))?
            .parse()
            .map_err(|_| Error::Format("first token must be the Fourier degree".into()))?;
        let coefficients = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Format(format!("malformed coefficient `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coefficients(degree, &coefficients)
    }
}

/// Randers length `∫ |ẋ| + b(cos θ ẋ¹ + sin θ ẋ²) dt` on the default grid.
pub fn randers_length(plane: &RandersPlane, curve: &ClosedCurve) -> Result<f64> {
    randers_length_of_samples(plane, &curve.samples(), DEFAULT_R_MIN)
}

/// Randers length of pre-sampled data; polar angle fields reject samples
/// closer than `r_min` to the origin.
pub fn randers_length_of_samples(
    plane: &RandersPlane,
    samples: &CurveSamples,
    r_min: f64,
) -> Result<f64> {
    check_origin_clearance(plane, samples, r_min)?;
    let integrand = samples
        .position
        .iter()
        .zip(&samples.velocity)
        .map(|(x, v)| {
            let beta = plane.one_form().components(*x)?;
            Ok(norm(*v) + dot(beta, *v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(periodic_trapezoid(&integrand))
}

pub(crate) fn check_origin_clearance(
    plane: &RandersPlane,
    samples: &CurveSamples,
    r_min: f64,
) -> Result<()> {
    if let AngleField::Polar(_) = plane.one_form().angle() {
        let r = samples.min_radius();
        if r < r_min {
            return Err(Error::domain(format!(
                "curve passes within {r:e} of the origin (minimum {r_min:e}) under a polar angle field"
            )));
        }
    }
    Ok(())
}

/// `σ_kind(b) · ½∮(x¹ẋ² − x²ẋ¹) dt` for a simple curve.
pub fn enclosed_area(curve: &ClosedCurve, kind: VolumeKind, b: f64) -> Result<f64> {
    let samples = curve.samples();
    if !samples.polygon_is_simple() {
        return Err(Error::NonSimple);
    }
    Ok(sigma_closed(kind, b, 2)? * samples.signed_area())
}

pub fn is_simple(curve: &ClosedCurve) -> bool {
    curve.samples().polygon_is_simple()
}

/// Symmetric Hausdorff distance between the sampled polylines of two curves.
pub fn sample_distance(a: &ClosedCurve, b: &ClosedCurve, n: usize) -> f64 {
    let pa = a.sample(n).position;
    let pb = b.sample(n).position;
    // points of one curve against the closed polyline of the other, so the
    // result does not depend on how the two are parametrized
    let one_way = |p: &[Point], q: &[Point]| {
        p.iter()
            .map(|x| {
                (0..q.len())
                    .map(|j| segment_distance(*x, q[j], q[(j + 1) % q.len()]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(&pa, &pb).max(one_way(&pb, &pa))
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = dot(ab, ab);
    let s = if len2 > 0.0 {
        (dot(ap, ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (ap[0] - s * ab[0]).hypot(ap[1] - s * ab[1])
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_meet(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn polygon_is_simple(points: &[Point]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let bbox = |i: usize| {
        let (a, b) = (points[i], points[(i + 1) % n]);
        [
            a[0].min(b[0]),
            a[0].max(b[0]),
            a[1].min(b[1]),
            a[1].max(b[1]),
        ]
    };
    let boxes: Vec<[f64; 4]> = (0..n).map(bbox).collect();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (bi, bj) = (&boxes[i], &boxes[j]);
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            if segments_meet(
                points[i],
                points[(i + 1) % n],
                points[j],
                points[(j + 1) % n],
            ) {
                return false;
            }
        }
    }
    true
}
