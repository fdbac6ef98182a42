//! The geometric Kannan–Lovász–Simonovits inequality for log-concave weights.
//!
//! For a convex compact `S`, a closed `E ⊂ S` and `λ > 1`, the set
//! `E_{λ,S}` consists of the points `x ∈ E` such that `|E ∩ J|/|J| ≥ (λ−1)/λ`
//! for every segment `J ∋ x` contained in `S`. The inequality is
//!
//! ```text
//! ∫_{E_{λ,S}} Φ / ∫_S Φ ≤ (∫_E Φ / ∫_S Φ)^λ.
//! ```
//!
//! In one dimension everything is exact: the inner minimization is solved by
//! enumerating candidate endpoints and `Φ` is integrated in closed form. The
//! planar check samples directions and integrates on a grid.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::report::CheckRow;
use crate::rng;

/// Boundary crossings of `E_{λ,S}` are bisected to this width.
pub const BISECTION_WIDTH: f64 = 1e-12;
/// Absolute tolerance of the 1-D check.
pub const CHECK_TOL: f64 = 1e-9;
const CONCAVITY_TOL: f64 = 1e-12;

/// `(λ−1)/λ`.
pub fn ratio_threshold(lambda: f64) -> f64 {
    (lambda - 1.0) / lambda
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::domain("lambda", format!("must be > 1, got {lambda}")));
    }
    Ok(())
}

/// `∫_0^h e^{s t} dt` without cancellation.
fn exp_linear_integral(s: f64, h: f64) -> f64 {
    let x = s * h;
    if x.abs() < 1e-8 {
        h * (1.0 + 0.5 * x)
    } else {
        x.exp_m1() / s
    }
}

/// `Φ = c·exp(L)` with `L` continuous, piecewise linear and concave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogConcaveDensity1D {
    breakpoints: Vec<f64>,
    /// Values of `L` at the breakpoints.
    log_values: Vec<f64>,
    /// `log c`.
    log_scale: f64,
}

impl LogConcaveDensity1D {
    pub fn new(breakpoints: Vec<f64>, log_values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() != log_values.len() {
            return Err(Error::domain("phi", "needs at least two knots with one log-value each"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("phi", "breakpoints must be strictly increasing"));
        }
        if log_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("phi", "log-values must be finite"));
        }
        let slopes: Vec<f64> = (0..breakpoints.len() - 1)
            .map(|i| (log_values[i + 1] - log_values[i]) / (breakpoints[i + 1] - breakpoints[i]))
            .collect();
        if slopes.windows(2).any(|w| w[1] > w[0] + CONCAVITY_TOL * (1.0 + w[0].abs())) {
            return Err(Error::domain("phi", "log-density is not concave"));
        }
        Ok(LogConcaveDensity1D { breakpoints, log_values, log_scale: 0.0 })
    }

    /// `Φ ≡ 1` on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![0.0, 0.0])
    }

    /// `Φ(t) = e^{slope·t}` on `[lo, hi]`.
    pub fn exponential(slope: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![slope * lo, slope * hi])
    }

    /// The same density multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::domain("factor", "must be positive"));
        }
        Ok(LogConcaveDensity1D { log_scale: self.log_scale + factor.ln(), ..self.clone() })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn support(&self) -> Interval {
        Interval { lo: self.breakpoints[0], hi: *self.breakpoints.last().unwrap() }
    }

    fn piece(&self, t: f64) -> usize {
        self.breakpoints
            .partition_point(|&b| b <= t)
            .saturating_sub(1)
            .min(self.breakpoints.len() - 2)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.log_values[i + 1] - self.log_values[i]) / (self.breakpoints[i + 1] - self.breakpoints[i])
    }

    fn log_shape(&self, t: f64) -> f64 {
        let i = self.piece(t);
        self.log_values[i] + self.slope(i) * (t - self.breakpoints[i])
    }

    pub fn log_density(&self, t: f64) -> f64 {
        self.log_scale + self.log_shape(t)
    }

    /// `∫ exp(L)` over `[a, b] ⊂ support`, without the scale factor.
    fn shape_integral(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let mut total = 0.0;
        let mut lo = a;
        let mut i = self.piece(a);
        while lo < b {
            let hi = b.min(self.breakpoints[i + 1]);
            if i + 1 == self.breakpoints.len() - 1 {
                total += self.log_shape(lo).exp() * exp_linear_integral(self.slope(i), b - lo);
                break;
            }
            if hi > lo {
                total += self.log_shape(lo).exp() * exp_linear_integral(self.slope(i), hi - lo);
            }
            lo = hi;
            i += 1;
        }
        total
    }

    fn shape_integral_set(&self, set: &IntervalSet) -> f64 {
        set.components().iter().map(|c| self.shape_integral(c.lo, c.hi)).sum()
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.log_scale.exp() * self.shape_integral(a, b)
    }

    pub fn integral_set(&self, set: &IntervalSet) -> f64 {
        self.log_scale.exp() * self.shape_integral_set(set)
    }
}

/// Sorted candidate endpoints and the cumulative measure of `E` at each.
struct Candidates {
    left: Vec<(f64, f64)>,
    right: Vec<(f64, f64)>,
}

fn candidates(x: f64, e: &IntervalSet, s: Interval) -> Candidates {
    let cumulative = |t: f64| e.measure_within(f64::NEG_INFINITY, t);
    let mut left: Vec<f64> = e.breakpoints().into_iter().filter(|&b| b > s.lo && b < x).collect();
    left.push(s.lo);
    left.push(x);
    let mut right: Vec<f64> = e.breakpoints().into_iter().filter(|&b| b > x && b < s.hi).collect();
    right.push(x);
    right.push(s.hi);
    let tag = |v: Vec<f64>| v.into_iter().map(|t| (t, cumulative(t))).collect();
    Candidates { left: tag(left), right: tag(right) }
}

/// `min |E ∩ J|/|J|` over segments `J ∋ x` with `J ⊂ S`.
///
/// The ratio is monotone in each endpoint between breakpoints of `E`, so the
/// minimum is attained with endpoints in `{s₀, s₁, x}` ∪ breakpoints.
pub fn min_interval_ratio(x: f64, e: &IntervalSet, s: Interval) -> Result<f64> {
    if !s.contains(x) {
        return Err(Error::domain("x", format!("{x} is outside [{}, {}]", s.lo, s.hi)));
    }
    if s.is_degenerate() {
        return Err(Error::domain("S", "must have positive length"));
    }
    Ok(min_ratio_unchecked(x, e, s))
}

fn min_ratio_unchecked(x: f64, e: &IntervalSet, s: Interval) -> f64 {
    let c = candidates(x, e, s);
    let mut best: f64 = 1.0;
    for &(l, fl) in &c.left {
        for &(r, fr) in &c.right {
            if r > l {
                best = best.min(((fr - fl) / (r - l)).clamp(0.0, 1.0));
            }
        }
    }
    best
}

/// Inner approximation of `E_{λ,S}` and the matching outer bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ELambda {
    pub inner: IntervalSet,
    pub outer: IntervalSet,
}

/// `E_{λ,S}` by scanning `resolution` points per component of `E ∩ S` and
/// bisecting every pass/fail crossing.
pub fn e_lambda_1d(e: &IntervalSet, s: Interval, lambda: f64, resolution: usize) -> Result<ELambda> {
    check_lambda(lambda)?;
    if s.is_degenerate() {
        return Err(Error::domain("S", "must have positive length"));
    }
    let theta = ratio_threshold(lambda);
    let passes = |x: f64| min_ratio_unchecked(x, e, s) >= theta;
    let crossing = |mut good: f64, mut bad: f64| {
        while (bad - good).abs() > BISECTION_WIDTH {
            let mid = 0.5 * (good + bad);
            if passes(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        (good, bad)
    };
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for comp in e.clip(s.lo, s.hi).components() {
        let pts: Vec<f64> = if comp.is_degenerate() { vec![comp.lo] } else { comp.grid(resolution.max(2)).collect() };
        let ok: Vec<bool> = pts.iter().map(|&x| passes(x)).collect();
        let mut i = 0;
        while i < pts.len() {
            if !ok[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i + 1 < pts.len() && ok[i + 1] {
                i += 1;
            }
            let (lo_in, lo_out) = if start > 0 { crossing(pts[start], pts[start - 1]) } else { (pts[start], pts[start]) };
            let (hi_in, hi_out) = if i + 1 < pts.len() { crossing(pts[i], pts[i + 1]) } else { (pts[i], pts[i]) };
            inner.push((lo_in, hi_in));
            outer.push((lo_out, hi_out));
            i += 1;
        }
    }
    Ok(ELambda {
        inner: IntervalSet::from_intervals(inner)?,
        outer: IntervalSet::from_intervals(outer)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlsInstance {
    pub s: Interval,
    pub e: IntervalSet,
    pub lambda: f64,
    pub phi: LogConcaveDensity1D,
}

impl KlsInstance {
    pub fn new(s: Interval, e: IntervalSet, lambda: f64, phi: LogConcaveDensity1D) -> Result<Self> {
        let inst = KlsInstance { s, e, lambda, phi };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.s.is_degenerate() {
            return Err(Error::domain("S", "must have positive length"));
        }
        if !self.e.is_subset_of(&self.s) {
            return Err(Error::domain("E", "must be contained in S"));
        }
        if !self.phi.support().contains_interval(&self.s) {
            return Err(Error::domain("phi", "support must contain S"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kls1dReport {
    pub lambda: f64,
    /// Weight ratio of the inner approximation of `E_{λ,S}`.
    pub lhs: f64,
    /// Weight ratio of the outer bound; this is what is compared.
    pub lhs_outer: f64,
    /// `(∫_E Φ / ∫_S Φ)^λ`.
    pub rhs: f64,
    pub e_lambda: ELambda,
    pub pass: bool,
}

impl Kls1dReport {
    pub fn rows(&self) -> Vec<CheckRow> {
        vec![CheckRow::new("kls_1d", self.lhs_outer, self.rhs, self.pass)]
    }
}

pub fn kls_check_1d(inst: &KlsInstance, resolution: usize) -> Result<Kls1dReport> {
    inst.validate()?;
    let e_lambda = e_lambda_1d(&inst.e, inst.s, inst.lambda, resolution)?;
    let total = inst.phi.shape_integral(inst.s.lo, inst.s.hi);
    let lhs = inst.phi.shape_integral_set(&e_lambda.inner) / total;
    let lhs_outer = inst.phi.shape_integral_set(&e_lambda.outer) / total;
    let rhs = (inst.phi.shape_integral_set(&inst.e) / total).powf(inst.lambda);
    Ok(Kls1dReport {
        lambda: inst.lambda,
        lhs,
        lhs_outer,
        rhs,
        e_lambda,
        pass: lhs_outer <= rhs + CHECK_TOL,
    })
}

impl KlsInstance {
    /// A random instance on `S = [0, 1]`: `Φ` with at most `max_pieces`
    /// log-linear pieces (slopes in `[−6, 6]`, sorted decreasing), `E` a union
    /// of at most `max_components` intervals, `λ` uniform in `lambda_range`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize, max_components: usize, lambda_range: (f64, f64)) -> KlsInstance {
        let pieces = rng.random_range(1..=max_pieces.max(1));
        let mut knots: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(0.0..1.0)).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots.insert(0, 0.0);
        knots.push(1.0);
        let mut slopes: Vec<f64> = (1..knots.len()).map(|_| rng.random_range(-6.0..6.0)).collect();
        slopes.sort_by(|a, b| b.total_cmp(a));
        let mut log_values = vec![0.0];
        for (w, slope) in knots.windows(2).zip(&slopes) {
            log_values.push(log_values[log_values.len() - 1] + slope * (w[1] - w[0]));
        }
        let phi = LogConcaveDensity1D::new(knots, log_values).expect("concave by construction");
        let k = rng.random_range(1..=max_components.max(1));
        let parts: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let mut p = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
                p.sort_by(f64::total_cmp);
                (p[0], p[1])
            })
            .collect();
        let e = IntervalSet::from_intervals(parts).expect("sorted endpoints");
        let lambda = rng.random_range(lambda_range.0..=lambda_range.1);
        KlsInstance { s: Interval { lo: 0.0, hi: 1.0 }, e, lambda, phi }
    }
}

/// Text form: `S lo hi`, `lambda x`, `knot t log_phi` (at least two) and
/// any number of `E lo hi` lines.
impl FromStr for KlsInstance {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut s = None;
        let mut lambda = None;
        let mut knots = Vec::new();
        let mut parts = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| Error::Parse { line: i + 1, reason };
            let mut tokens = line.split_whitespace();
            let key = tokens.next().unwrap_or_default();
            let nums = tokens
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(e.to_string()))?;
            match (key, nums.as_slice()) {
                ("S", &[lo, hi]) => s = Some(Interval::new(lo, hi)?),
                ("lambda", &[l]) => lambda = Some(l),
                ("knot", &[t, v]) => knots.push((t, v)),
                ("E", &[lo, hi]) => parts.push((lo, hi)),
                _ => return Err(bad(format!("unrecognized line `{line}`"))),
            }
        }
        let s = s.ok_or_else(|| Error::domain("S", "missing"))?;
        let lambda = lambda.ok_or_else(|| Error::domain("lambda", "missing"))?;
        let phi = if knots.is_empty() {
            LogConcaveDensity1D::uniform(s.lo, s.hi)?
        } else {
            let (t, v) = knots.into_iter().unzip();
            LogConcaveDensity1D::new(t, v)?
        };
        KlsInstance::new(s, IntervalSet::from_intervals(parts)?, lambda, phi)
    }
}

impl fmt::Display for KlsInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "S {:?} {:?}", self.s.lo, self.s.hi)?;
        writeln!(f, "lambda {:?}", self.lambda)?;
        for (t, v) in self.phi.breakpoints.iter().zip(&self.phi.log_values) {
            writeln!(f, "knot {t:?} {:?}", v + self.phi.log_scale)?;
        }
        for c in self.e.components() {
            writeln!(f, "E {:?} {:?}", c.lo, c.hi)?;
        }
        Ok(())
    }
}

/// `log Φ(x) = c + b·x − ½ xᵀAx` with `A` symmetric positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogQuadratic2D {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: f64,
}

impl LogQuadratic2D {
    pub fn new(a: [[f64; 2]; 2], b: [f64; 2], c: f64) -> Result<Self> {
        let tol = 1e-12 * (1.0 + a[0][0].abs() + a[1][1].abs());
        if (a[0][1] - a[1][0]).abs() > tol {
            return Err(Error::domain("phi", "quadratic form must be symmetric"));
        }
        if a[0][0] < -tol || a[1][1] < -tol || a[0][0] * a[1][1] - a[0][1] * a[1][0] < -tol {
            return Err(Error::domain("phi", "quadratic form must be positive semidefinite"));
        }
        Ok(LogQuadratic2D { a, b, c })
    }

    /// Standard Gaussian weight centered at `mean`.
    pub fn gaussian(mean: [f64; 2]) -> Self {
        LogQuadratic2D { a: [[1.0, 0.0], [0.0, 1.0]], b: mean, c: 0.0 }
    }

    pub fn log_density(&self, p: [f64; 2]) -> f64 {
        let q = self.a[0][0] * p[0] * p[0] + 2.0 * self.a[0][1] * p[0] * p[1] + self.a[1][1] * p[1] * p[1];
        self.c + self.b[0] * p[0] + self.b[1] * p[1] - 0.5 * q
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::domain("S", "a polygon needs at least three vertices"));
        }
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) < 0.0 {
                return Err(Error::domain("S", "vertices must be convex and counter-clockwise"));
            }
        }
        let poly = ConvexPolygon { vertices };
        if poly.area() <= 0.0 {
            return Err(Error::domain("S", "polygon has zero area"));
        }
        Ok(poly)
    }

    pub fn rectangle(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        Self::new(vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n).map(|i| cross([0.0, 0.0], self.vertices[i], self.vertices[(i + 1) % n])).sum::<f64>()
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= -tol)
    }

    fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Parameter range `[t₋, t₊]` of `{p + t·d} ∩ S` for `p ∈ S`.
    fn chord(&self, p: [f64; 2], d: [f64; 2]) -> (f64, f64) {
        let n = self.vertices.len();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let v = self.vertices[i];
            let w = self.vertices[(i + 1) % n];
            // inside: cross(v, w, p + t d) ≥ 0, affine in t
            let c0 = cross(v, w, p);
            let c1 = (w[0] - v[0]) * d[1] - (w[1] - v[1]) * d[0];
            if c1 > 0.0 {
                lo = lo.max(-c0 / c1);
            } else if c1 < 0.0 {
                hi = hi.min(-c0 / c1);
            }
        }
        (lo.min(0.0), hi.max(0.0))
    }
}

/// Closed axis-parallel box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl AxisBox {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|k| self.lo[k] <= p[k] && p[k] <= self.hi[k])
    }

    fn corners(&self) -> [[f64; 2]; 4] {
        [self.lo, [self.hi[0], self.lo[1]], self.hi, [self.lo[0], self.hi[1]]]
    }

    /// Parameter range of `{p + t·d}` inside the box (slab method).
    fn chord(&self, p: [f64; 2], d: [f64; 2]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..2 {
            if d[k].abs() < 1e-15 {
                if p[k] < self.lo[k] || p[k] > self.hi[k] {
                    return None;
                }
            } else {
                let a = (self.lo[k] - p[k]) / d[k];
                let b = (self.hi[k] - p[k]) / d[k];
                lo = lo.max(a.min(b));
                hi = hi.min(a.max(b));
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlsInstance2D {
    pub phi: LogQuadratic2D,
    pub s: ConvexPolygon,
    pub e: Vec<AxisBox>,
    pub lambda: f64,
}

impl KlsInstance2D {
    pub fn new(phi: LogQuadratic2D, s: ConvexPolygon, e: Vec<AxisBox>, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        for b in &e {
            if (0..2).any(|k| b.lo[k] > b.hi[k]) {
                return Err(Error::domain("E", "box has lo > hi"));
            }
            if !b.corners().iter().all(|&c| s.contains(c, 1e-12)) {
                return Err(Error::domain("E", "must be contained in S"));
            }
        }
        Ok(KlsInstance2D { phi, s, e, lambda })
    }

    fn in_e(&self, p: [f64; 2]) -> bool {
        self.e.iter().any(|b| b.contains(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kls2dReport {
    pub lambda: f64,
    pub directions: usize,
    pub grid: usize,
    pub lhs_estimate: f64,
    pub rhs_estimate: f64,
    /// Propagated weight of cells straddling a set boundary.
    pub quadrature_error: f64,
    pub pass: bool,
}

impl Kls2dReport {
    pub fn rows(&self) -> Vec<CheckRow> {
        vec![CheckRow::new("kls_2d", self.lhs_estimate, self.rhs_estimate, self.pass)]
    }
}

/// Directions used by the planar check: the two axes, then angles drawn from
/// the seed.
pub fn sample_directions(directions: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, rng::label("kls-directions"), 0);
    (0..directions.max(1))
        .map(|k| match k {
            0 => 0.0,
            1 => std::f64::consts::FRAC_PI_2,
            _ => r.random_range(0.0..std::f64::consts::PI),
        })
        .collect()
}

/// Planar check. A cell center survives into the `E_{λ,S}` estimate if the
/// 1-D ratio condition holds on its chord in every sampled direction, so the
/// estimate contains `E_{λ,S}` up to discretization.
pub fn kls_check_2d(inst: &KlsInstance2D, directions: usize, grid: usize, seed: u64) -> Result<Kls2dReport> {
    if grid < 2 {
        return Err(Error::domain("grid", "must be at least 2"));
    }
    let theta = ratio_threshold(inst.lambda);
    let dirs: Vec<[f64; 2]> = sample_directions(directions, seed).into_iter().map(|a| [a.cos(), a.sin()]).collect();
    let (lo, hi) = inst.s.bounding_box();
    let h = [(hi[0] - lo[0]) / grid as f64, (hi[1] - lo[1]) / grid as f64];
    let center = |i: usize, j: usize| [lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1]];

    let survives = |p: [f64; 2]| {
        dirs.iter().all(|&d| {
            let (t0, t1) = inst.s.chord(p, d);
            let parts: Vec<(f64, f64)> = inst
                .e
                .iter()
                .filter_map(|b| b.chord(p, d))
                .filter_map(|(a, b)| {
                    let (a, b) = (a.max(t0), b.min(t1));
                    (a <= b).then_some((a, b))
                })
                .collect();
            let e_line = IntervalSet::from_intervals(parts).expect("ordered chord ends");
            t1 <= t0 || min_ratio_unchecked(0.0, &e_line, Interval { lo: t0, hi: t1 }) >= theta
        })
    };

    // per cell: (log weight, in S, in E, in E_λ)
    let cells: Vec<(f64, bool, bool, bool)> = (0..grid)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..grid).map(move |i| {
                let p = center(i, j);
                let in_s = inst.s.contains(p, 0.0);
                let in_e = in_s && inst.in_e(p);
                let in_el = in_e && survives(p);
                (inst.phi.log_density(p), in_s, in_e, in_el)
            })
        })
        .collect();
    let shift = cells.iter().filter(|c| c.1).map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::domain("grid", "no cell center falls inside S"));
    }
    let weight = |k: usize| (cells[k].0 - shift).exp();
    let boundary = |k: usize, get: &dyn Fn(usize) -> bool| {
        let (i, j) = (k % grid, k / grid);
        let me = get(k);
        let neighbour = |ii: isize, jj: isize| {
            if ii < 0 || jj < 0 || ii >= grid as isize || jj >= grid as isize {
                false
            } else {
                get(jj as usize * grid + ii as usize)
            }
        };
        let (i, j) = (i as isize, j as isize);
        me && [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)].iter().any(|&(a, b)| neighbour(a, b) != me)
    };
    let (mut int_s, mut int_e, mut int_el) = (0.0, 0.0, 0.0);
    let (mut bd_s, mut bd_e, mut bd_el) = (0.0, 0.0, 0.0);
    let get_s = |k: usize| cells[k].1;
    let get_e = |k: usize| cells[k].2;
    let get_el = |k: usize| cells[k].3;
    for k in 0..cells.len() {
        let w = weight(k);
        if cells[k].1 {
            int_s += w;
            if boundary(k, &get_s) {
                bd_s += w;
            }
        }
        if cells[k].2 {
            int_e += w;
            if boundary(k, &get_e) {
                bd_e += w;
            }
        }
        if cells[k].3 {
            int_el += w;
            if boundary(k, &get_el) {
                bd_el += w;
            }
        }
    }
    let lhs = int_el / int_s;
    let r = int_e / int_s;
    let rhs = r.powf(inst.lambda);
    let err_lhs = (bd_el + lhs * bd_s) / int_s;
    let err_rhs = if r > 0.0 { inst.lambda * rhs / r * (bd_e + r * bd_s) / int_s } else { 0.0 };
    let quadrature_error = err_lhs + err_rhs;
    Ok(Kls2dReport {
        lambda: inst.lambda,
        directions: dirs.len(),
        grid,
        lhs_estimate: lhs,
        rhs_estimate: rhs,
        quadrature_error,
        pass: lhs <= rhs + 3.0 * quadrature_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit() -> Interval {
        Interval { lo: 0.0, hi: 1.0 }
    }

    fn set(parts: &[(f64, f64)]) -> IntervalSet {
        IntervalSet::from_intervals(parts.iter().copied()).unwrap()
    }

    #[test]
    fn ratio_examples() {
        let s = unit();
        assert_eq!(min_interval_ratio(0.3, &set(&[(0.0, 1.0)]), s).unwrap(), 1.0);
        assert_eq!(min_interval_ratio(0.3, &IntervalSet::empty(), s).unwrap(), 0.0);
        for (t, x) in [(0.9, 0.2), (0.5, 0.1), (0.7, 0.7), (0.3, 0.0)] {
            let got = min_interval_ratio(x, &set(&[(0.0, t)]), s).unwrap();
            assert_abs_diff_eq!(got, (t - x) / (1.0 - x), epsilon = 1e-15);
        }
        assert!(min_interval_ratio(1.5, &set(&[(0.0, 0.5)]), s).is_err());
    }

    #[test]
    fn e_lambda_examples() {
        let el = e_lambda_1d(&set(&[(0.0, 0.9)]), unit(), 2.0, 1000).unwrap();
        assert_eq!(el.inner.components().len(), 1);
        assert_abs_diff_eq!(el.inner.components()[0].lo, 0.0);
        assert_abs_diff_eq!(el.inner.components()[0].hi, 0.8, epsilon = 1e-11);
        assert!(el.outer.components()[0].hi >= el.inner.components()[0].hi);

        let el = e_lambda_1d(&set(&[(0.0, 0.5)]), unit(), 2.0, 1000).unwrap();
        assert_eq!(el.inner.measure(), 0.0);
        assert!(el.inner.contains(0.0));

        for lambda in [1.5, 2.0, 10.0] {
            let el = e_lambda_1d(&set(&[(0.0, 1.0)]), unit(), lambda, 100).unwrap();
            assert_eq!(el.inner, set(&[(0.0, 1.0)]));
        }
        assert!(e_lambda_1d(&set(&[(0.0, 1.0)]), unit(), 1.0, 100).is_err());
    }

    #[test]
    fn check_1d_examples() {
        let inst = KlsInstance::new(unit(), set(&[(0.0, 0.9)]), 2.0, LogConcaveDensity1D::uniform(0.0, 1.0).unwrap()).unwrap();
        let rep = kls_check_1d(&inst, 1000).unwrap();
        assert!(rep.pass);
        assert_abs_diff_eq!(rep.lhs, 0.8, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.rhs, 0.81, epsilon = 1e-15);

        let inst = KlsInstance::new(unit(), set(&[(0.0, 1.0)]), 3.0, LogConcaveDensity1D::uniform(0.0, 1.0).unwrap()).unwrap();
        let rep = kls_check_1d(&inst, 100).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.lhs, rep.rhs), (1.0, 1.0));

        // Φ = e^{−x}: E_{3,S} = {x ≤ 0.7}; lhs = (1 − e^{−0.7})/(1 − e^{−1})
        let phi = LogConcaveDensity1D::exponential(-1.0, 0.0, 1.0).unwrap();
        let inst = KlsInstance::new(unit(), set(&[(0.0, 0.9)]), 3.0, phi).unwrap();
        let rep = kls_check_1d(&inst, 1000).unwrap();
        let z = 1.0 - (-1.0f64).exp();
        assert!(rep.pass);
        assert_abs_diff_eq!(rep.lhs, (1.0 - (-0.7f64).exp()) / z, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.rhs, ((1.0 - (-0.9f64).exp()) / z).powi(3), epsilon = 1e-14);
    }

    #[test]
    fn closed_form_integrals() {
        let phi = LogConcaveDensity1D::new(vec![-1.0, 0.0, 2.0], vec![-1.0, 0.0, -4.0]).unwrap();
        // ∫_{-1}^0 e^t + ∫_0^2 e^{-2t}
        let want = (1.0 - (-1.0f64).exp()) + (1.0 - (-4.0f64).exp()) / 2.0;
        assert_abs_diff_eq!(phi.integral(-1.0, 2.0), want, epsilon = 1e-14);
        let want = (1.0 - (-0.5f64).exp()) + (1.0 - (-2.0f64).exp()) / 2.0;
        assert_abs_diff_eq!(phi.integral(-0.5, 1.0), want, epsilon = 1e-14);
        assert!(LogConcaveDensity1D::new(vec![0.0, 1.0, 2.0], vec![0.0, -1.0, 0.0]).is_err());
        assert!(LogConcaveDensity1D::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn scaling_is_bitwise_invariant() {
        let phi = LogConcaveDensity1D::new(vec![0.0, 0.4, 1.0], vec![0.0, 0.3, -0.5]).unwrap();
        let e = set(&[(0.0, 0.3), (0.35, 0.9)]);
        let a = kls_check_1d(&KlsInstance::new(unit(), e.clone(), 2.5, phi.clone()).unwrap(), 500).unwrap();
        let b = kls_check_1d(&KlsInstance::new(unit(), e, 2.5, phi.scaled(7.3).unwrap()).unwrap(), 500).unwrap();
        assert_eq!(a.lhs.to_bits(), b.lhs.to_bits());
        assert_eq!(a.rhs.to_bits(), b.rhs.to_bits());
    }

    #[test]
    fn monotone_in_lambda() {
        let e = set(&[(0.0, 0.45), (0.5, 0.95)]);
        let mut prev = e_lambda_1d(&e, unit(), 1.2, 400).unwrap();
        for lambda in [1.5, 2.0, 3.0, 8.0] {
            let next = e_lambda_1d(&e, unit(), lambda, 400).unwrap();
            assert!(next.inner.is_contained_in(&prev.inner, 1e-10));
            prev = next;
        }
    }

    #[test]
    fn literal_round_trip() {
        let text = "S 0 1\nlambda 2\nknot 0 0\nknot 1 -1\nE 0 0.4\nE 0.5 0.9\n";
        let inst: KlsInstance = text.parse().unwrap();
        assert_eq!(inst.e.components().len(), 2);
        let back: KlsInstance = inst.to_string().parse().unwrap();
        assert_eq!(back, inst);
        assert!("S 0 1\nlambda 0.5\n".parse::<KlsInstance>().is_err());
        assert!("S 0 1\nlambda 2\nE 0 2\n".parse::<KlsInstance>().is_err());
    }

    #[test]
    fn planar_trivial_and_gaussian() {
        let s = ConvexPolygon::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let full = vec![AxisBox { lo: [0.0, 0.0], hi: [1.0, 1.0] }];
        let inst = KlsInstance2D::new(LogQuadratic2D::gaussian([0.5, 0.5]), s.clone(), full, 2.0).unwrap();
        let rep = kls_check_2d(&inst, 8, 60, 1).unwrap();
        assert!(rep.pass);
        assert_eq!((rep.lhs_estimate, rep.rhs_estimate), (1.0, 1.0));

        let half = vec![AxisBox { lo: [0.0, 0.0], hi: [0.5, 1.0] }];
        let inst = KlsInstance2D::new(LogQuadratic2D::gaussian([0.0, 0.0]), s, half, 2.0).unwrap();
        assert!(kls_check_2d(&inst, 8, 100, 2).unwrap().pass);
    }

    #[test]
    fn planar_product_matches_line() {
        let s = ConvexPolygon::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let e = vec![AxisBox { lo: [0.0, 0.0], hi: [0.9, 1.0] }];
        let phi = LogQuadratic2D::new([[0.0, 0.0], [0.0, 0.0]], [-1.0, 0.0], 0.0).unwrap();
        let rep2 = kls_check_2d(&KlsInstance2D::new(phi, s, e, 2.0).unwrap(), 6, 400, 5).unwrap();
        let inst1 = KlsInstance::new(unit(), set(&[(0.0, 0.9)]), 2.0, LogConcaveDensity1D::exponential(-1.0, 0.0, 1.0).unwrap()).unwrap();
        let rep1 = kls_check_1d(&inst1, 1000).unwrap();
        assert!(rep2.pass);
        assert!((rep2.lhs_estimate - rep1.lhs).abs() <= 3.0 * rep2.quadrature_error);
        assert!((rep2.rhs_estimate - rep1.rhs).abs() <= 3.0 * rep2.quadrature_error);
    }

    #[test]
    fn polygon_validation() {
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(tri.area(), 0.5);
        let outside = vec![AxisBox { lo: [0.0, 0.0], hi: [0.8, 0.8] }];
        assert!(KlsInstance2D::new(LogQuadratic2D::gaussian([0.0, 0.0]), tri, outside, 2.0).is_err());
    }

    #[test]
    fn brute_force_scan_agrees() {
        // endpoints on a 1/1000 lattice so the scan sees the exact optimum
        const M: usize = 1000;
        let mut r = rng::stream(77, 77, 0);
        for _ in 0..100 {
            let k = r.random_range(1..=6);
            let parts: Vec<(f64, f64)> = (0..k)
                .map(|_| {
                    let a = r.random_range(0..M);
                    let b = r.random_range(a..=M);
                    (a as f64 / M as f64, b as f64 / M as f64)
                })
                .collect();
            let e = set(&parts);
            let xi = r.random_range(0..=M);
            let x = xi as f64 / M as f64;
            let cumulative: Vec<f64> = (0..=M).map(|i| e.measure_within(f64::NEG_INFINITY, i as f64 / M as f64)).collect();
            let mut brute: f64 = 1.0;
            for l in 0..=xi {
                for rr in xi..=M {
                    if rr > l {
                        brute = brute.min((cumulative[rr] - cumulative[l]) / ((rr - l) as f64 / M as f64));
                    }
                }
            }
            let exact = min_interval_ratio(x, &e, unit()).unwrap();
            assert!((exact - brute.clamp(0.0, 1.0)).abs() <= 1e-8, "{parts:?} x={x}: {exact} vs {brute}");
        }
    }
}
