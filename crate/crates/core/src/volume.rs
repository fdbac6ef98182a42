//! The distribution of `|F|` on real balls and the volume estimates.
//!
//! For `F` analytic in the complex unit ball with `|F| ≤ 1`, a real ball
//! `B ⊂ B(0, 1−ε)` and `M` the `1/e` quantile of `|F|` under the normalized
//! volume on `B`:
//!
//! ```text
//! Vol_B{|F| ≤ (8λ)^{−σ} M} ≤ 1/λ,   Vol_B{|F| ≥ (8λ)^{σ} M} ≤ e^{−λ},
//! σ = 48 ε⁻³ log(1/|F(0)|).
//! ```
//!
//! `σ` is in the thousands for ordinary `F`, so thresholds are handled as
//! logarithms and compared with `log|F|`.

use std::f64::consts::E;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{monomials, MultiPoly};
use crate::error::{Error, Result};
use crate::report::CheckRow;
use crate::rng;
use crate::stats;

/// Slack on `|u| + r ≤ 1 − ε`.
pub const CONTAINMENT_TOL: f64 = 1e-12;
/// The constant `C` of the estimates.
pub const C: f64 = 8.0;
/// Quantile level of `M`: `Vol{|F| ≥ M} = 1/e`.
pub const M_LEVEL: f64 = 1.0 - 1.0 / E;
/// Number of standard errors allowed on every comparison.
pub const SIGMAS: f64 = 3.0;

/// A real ball `B(u, r) ⊂ ℝⁿ ⊂ ℂⁿ` together with the margin `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub epsilon: f64,
}

impl BallSpec {
    pub fn new(center: Vec<f64>, radius: f64, epsilon: f64) -> Result<Self> {
        let spec = BallSpec { center, radius, epsilon };
        spec.validate()?;
        Ok(spec)
    }

    /// `B(0, r)` in `n` dimensions.
    pub fn centered(n: usize, radius: f64, epsilon: f64) -> Result<Self> {
        Self::new(vec![0.0; n], radius, epsilon)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.center.is_empty() {
            return Err(Error::domain("center", "dimension must be at least 1"));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("center", "entries must be finite"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain("epsilon", "must be > 0"));
        }
        if self.epsilon > 0.25 {
            return Err(Error::domain("epsilon", "must be ≤ 0.25"));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::domain("radius", "must be ≥ 0"));
        }
        let u = self.center.iter().map(|c| c * c).sum::<f64>().sqrt();
        if u + self.radius > 1.0 - self.epsilon + CONTAINMENT_TOL {
            return Err(Error::domain(
                "radius",
                format!("|center| + radius = {} exceeds 1 − epsilon = {}", u + self.radius, 1.0 - self.epsilon),
            ));
        }
        Ok(())
    }

    fn place(&self, unit: &[f64], out: &mut [f64]) {
        for ((o, &c), &v) in out.iter_mut().zip(&self.center).zip(unit) {
            *o = c + self.radius * v;
        }
    }
}

fn sample_label() -> u64 {
    rng::label("volume.ball")
}

/// `count` uniform points of the ball.
pub fn sample_ball(spec: &BallSpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let n = spec.dim();
    let chunks = rng::par_chunks(count, rng::CHUNK_SIZE, seed, sample_label(), |r, range| {
        let mut unit = vec![0.0; n];
        range
            .map(|_| {
                rng::unit_ball_point(r, &mut unit);
                let mut x = vec![0.0; n];
                spec.place(&unit, &mut x);
                x
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Empirical law of `|F|` under the normalized volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub sample_count: usize,
    pub sorted_moduli: Vec<f64>,
    pub seed: u64,
}

/// `M` with the standard error of its estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub m: f64,
    pub std_err: f64,
    /// `M` is the `k`-th smallest sample.
    pub k: usize,
}

/// Which side of a threshold a level set lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub fraction: f64,
    pub std_err: f64,
}

impl DistributionSummary {
    /// Sort already-collected moduli.
    pub fn from_values(mut values: Vec<f64>, seed: u64) -> Self {
        stats::sort_values(&mut values);
        DistributionSummary { sample_count: values.len(), sorted_moduli: values, seed }
    }

    pub fn fraction(&self, t: f64, side: Side) -> Fraction {
        let fraction = match side {
            Side::Le => stats::fraction_le(&self.sorted_moduli, t),
            Side::Ge => stats::fraction_ge(&self.sorted_moduli, t),
        };
        Fraction { fraction, std_err: stats::binomial_std_err(fraction, self.sample_count) }
    }

    /// Fraction with `log|F| ≤ log_t` (or `≥`); `log_t` may be far outside the
    /// range of `f64` thresholds.
    pub fn log_fraction(&self, log_t: f64, side: Side) -> f64 {
        let v = &self.sorted_moduli;
        let below = v.partition_point(|&x| x.ln() <= log_t);
        let not_below = v.partition_point(|&x| x.ln() < log_t);
        let count = match side {
            Side::Le => below,
            Side::Ge => v.len() - not_below,
        };
        count as f64 / v.len() as f64
    }

    pub fn quantile_m(&self) -> Result<QuantileEstimate> {
        if self.sorted_moduli.is_empty() {
            return Err(Error::InsufficientSamples("no samples".into()));
        }
        let (k, m) = stats::order_statistic(&self.sorted_moduli, M_LEVEL);
        Ok(QuantileEstimate { m, std_err: stats::quantile_std_err(&self.sorted_moduli, M_LEVEL), k })
    }

    pub fn max(&self) -> f64 {
        self.sorted_moduli.last().copied().unwrap_or(0.0)
    }
}

fn check_function(f: &MultiPoly, spec: &BallSpec) -> Result<()> {
    spec.validate()?;
    if f.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: f.dim() });
    }
    if f.sup_cert() > 1.0 + 1e-12 {
        return Err(Error::domain("F", format!("sup certificate {} exceeds 1", f.sup_cert())));
    }
    Ok(())
}

/// Sorted `|F|` at `count` uniform points of the ball.
pub fn summarize(f: &MultiPoly, spec: &BallSpec, count: usize, seed: u64) -> Result<DistributionSummary> {
    check_function(f, spec)?;
    if count == 0 {
        return Err(Error::InsufficientSamples("count must be ≥ 1".into()));
    }
    let n = spec.dim();
    let runs = rng::par_chunks(count, rng::CHUNK_SIZE, seed, sample_label(), |r, range| {
        let mut ev = f.evaluator();
        let mut unit = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut out: Vec<f64> = range
            .map(|_| {
                rng::unit_ball_point(r, &mut unit);
                spec.place(&unit, &mut x);
                ev.eval_real(&x).norm()
            })
            .collect();
        stats::sort_values(&mut out);
        out
    });
    Ok(DistributionSummary { sample_count: count, sorted_moduli: stats::merge_sorted(runs), seed })
}

/// Monte Carlo estimate of `M` with its standard error.
pub fn quantile_m(f: &MultiPoly, spec: &BallSpec, count: usize, seed: u64) -> Result<QuantileEstimate> {
    if f.is_constant() {
        return Err(Error::Degenerate("F is constant, so its level sets are not null sets".into()));
    }
    summarize(f, spec, count, seed)?.quantile_m()
}

pub fn level_fraction(f: &MultiPoly, spec: &BallSpec, t: f64, side: Side, count: usize, seed: u64) -> Result<Fraction> {
    if !(t >= 0.0) {
        return Err(Error::domain("t", "must be ≥ 0"));
    }
    Ok(summarize(f, spec, count, seed)?.fraction(t, side))
}

/// `C = 8` and `σ = 48 ε⁻³ log(1/|F(0)|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub c: f64,
    pub sigma: f64,
    pub epsilon: f64,
    /// `|F(0)|`.
    pub f0: f64,
}

impl TheoremParams {
    pub fn new(f: &MultiPoly, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 0.25) {
            return Err(Error::domain("epsilon", "must lie in (0, 0.25]"));
        }
        let f0 = f.constant_term().norm();
        if f0 == 0.0 {
            return Err(Error::domain("F", "F(0) = 0 makes sigma infinite"));
        }
        if f0 >= 1.0 {
            return Err(Error::domain("F", "|F(0)| = 1 forces F to be constant"));
        }
        Ok(TheoremParams { c: C, sigma: 48.0 / epsilon.powi(3) * (1.0 / f0).ln(), epsilon, f0 })
    }
}

/// One line of the plain threshold table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    /// `small`, `tail` or `strong`.
    pub check: String,
    pub lambda: f64,
    pub sigma: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub threshold_log: f64,
    pub fraction: f64,
    pub bound: f64,
    pub std_err: f64,
    pub pass: bool,
}

/// Both estimates at one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRow {
    pub lambda: f64,
    /// `log((8λ)^{−σ} M)`.
    pub small_threshold_log: f64,
    pub small_fraction: f64,
    /// `1/λ`.
    pub small_bound: f64,
    pub small_std_err: f64,
    /// `log((8λ)^{σ} M)`.
    pub tail_threshold_log: f64,
    pub tail_fraction: f64,
    /// `e^{−λ}`.
    pub tail_bound: f64,
    pub tail_std_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub dim: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub params: TheoremParams,
    pub m: QuantileEstimate,
    /// `Vol{|F| ≥ M}`, which should be `1/e`.
    pub m_level_fraction: f64,
    pub m_level_std_err: f64,
    pub m_level_pass: bool,
    pub rows: Vec<TheoremRow>,
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::domain("lambdas", "must not be empty"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 1.0 && l.is_finite())) {
        return Err(Error::domain("lambdas", format!("every lambda must be ≥ 1, got {l}")));
    }
    Ok(())
}

/// The one-sided comparison `fraction ≤ bound + 3·se`, with `se` the binomial
/// error at the boundary value.
fn within(fraction: f64, bound: f64, n: usize) -> (f64, bool) {
    let se = stats::binomial_std_err(bound.clamp(0.0, 1.0), n);
    (se, fraction <= bound + SIGMAS * se)
}

pub fn theorem_check(f: &MultiPoly, spec: &BallSpec, lambdas: &[f64], count: usize, seed: u64) -> Result<TheoremReport> {
    let summary = summarize(f, spec, count, seed)?;
    theorem_check_on(f, spec, &summary, lambdas)
}

/// [`theorem_check`] on an existing sample.
pub fn theorem_check_on(f: &MultiPoly, spec: &BallSpec, summary: &DistributionSummary, lambdas: &[f64]) -> Result<TheoremReport> {
    check_function(f, spec)?;
    check_lambdas(lambdas)?;
    let params = TheoremParams::new(f, spec.epsilon)?;
    if f.is_constant() {
        return Err(Error::Degenerate("F is constant".into()));
    }
    let m = summary.quantile_m()?;
    let n = summary.sample_count;
    let log_m = m.m.ln();
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let spread = params.sigma * (C * lambda).ln();
            let small_threshold_log = log_m - spread;
            let small_fraction = summary.log_fraction(small_threshold_log, Side::Le);
            let small_bound = 1.0 / lambda;
            let (small_std_err, small_pass) = within(small_fraction, small_bound, n);
            let tail_threshold_log = log_m + spread;
            let tail_fraction = summary.log_fraction(tail_threshold_log, Side::Ge);
            let tail_bound = (-lambda).exp();
            let (tail_std_err, tail_pass) = within(tail_fraction, tail_bound, n);
            TheoremRow {
                lambda,
                small_threshold_log,
                small_fraction,
                small_bound,
                small_std_err,
                tail_threshold_log,
                tail_fraction,
                tail_bound,
                tail_std_err,
                pass: small_pass && tail_pass,
            }
        })
        .collect();
    let level = summary.fraction(m.m, Side::Ge);
    let m_level_std_err = stats::binomial_std_err(1.0 / E, n);
    Ok(TheoremReport {
        dim: spec.dim(),
        sample_count: n,
        seed: summary.seed,
        params,
        m,
        m_level_fraction: level.fraction,
        m_level_std_err,
        m_level_pass: (level.fraction - 1.0 / E).abs() <= SIGMAS * m_level_std_err,
        rows,
    })
}

impl TheoremReport {
    pub fn threshold_rows(&self) -> Vec<ThresholdRow> {
        let mut out = Vec::new();
        for r in &self.rows {
            let common = |check: &str, threshold_log, fraction, bound, std_err| ThresholdRow {
                check: check.into(),
                lambda: r.lambda,
                sigma: self.params.sigma,
                m: self.m.m,
                threshold_log,
                fraction,
                bound,
                std_err,
                pass: fraction <= bound + SIGMAS * std_err,
            };
            out.push(common("small", r.small_threshold_log, r.small_fraction, r.small_bound, r.small_std_err));
            out.push(common("tail", r.tail_threshold_log, r.tail_fraction, r.tail_bound, r.tail_std_err));
        }
        out
    }

    pub fn rows(&self) -> Vec<CheckRow> {
        let mut out: Vec<CheckRow> = self
            .threshold_rows()
            .into_iter()
            .map(|t| {
                CheckRow::new(format!("theorem.{}[lambda={}]", t.check, t.lambda), t.fraction, t.bound + SIGMAS * t.std_err, t.pass)
                    .n(self.dim)
                    .seed(self.seed)
            })
            .collect();
        out.push(
            CheckRow::new(
                "theorem.m_level_deviation",
                (self.m_level_fraction - 1.0 / E).abs(),
                SIGMAS * self.m_level_std_err,
                self.m_level_pass,
            )
            .n(self.dim)
            .seed(self.seed),
        );
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongRow {
    pub lambda: f64,
    pub c: f64,
    /// `log((8λ)^σ c)`.
    pub threshold_log: f64,
    /// `Vol{|F| ≥ (8λ)^σ c}`.
    pub lhs: f64,
    /// `(Vol{|F| ≥ c})^λ`.
    pub rhs: f64,
    pub std_err: f64,
    pub pass: bool,
}

impl StrongRow {
    pub fn to_row(&self, dim: usize, seed: u64) -> CheckRow {
        CheckRow::new(
            format!("theorem.strong[lambda={},c={:e}]", self.lambda, self.c),
            self.lhs,
            self.rhs + SIGMAS * self.std_err,
            self.pass,
        )
        .n(dim)
        .seed(seed)
    }

    pub fn threshold_row(&self, sigma: f64, m: f64) -> ThresholdRow {
        ThresholdRow {
            check: "strong".into(),
            lambda: self.lambda,
            sigma,
            m,
            threshold_log: self.threshold_log,
            fraction: self.lhs,
            bound: self.rhs,
            std_err: self.std_err,
            pass: self.pass,
        }
    }
}

/// `Vol{|F| ≥ (8λ)^σ c} ≤ (Vol{|F| ≥ c})^λ` from one shared sample.
pub fn strong_form_check(f: &MultiPoly, spec: &BallSpec, c: f64, lambdas: &[f64], count: usize, seed: u64) -> Result<Vec<StrongRow>> {
    let summary = summarize(f, spec, count, seed)?;
    strong_form_check_on(f, spec, &summary, c, lambdas)
}

pub fn strong_form_check_on(
    f: &MultiPoly,
    spec: &BallSpec,
    summary: &DistributionSummary,
    c: f64,
    lambdas: &[f64],
) -> Result<Vec<StrongRow>> {
    check_function(f, spec)?;
    check_lambdas(lambdas)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain("c", "must be positive"));
    }
    let params = TheoremParams::new(f, spec.epsilon)?;
    let n = summary.sample_count;
    let p = summary.log_fraction(c.ln(), Side::Ge);
    let se_p = stats::binomial_std_err(p, n);
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let threshold_log = c.ln() + params.sigma * (C * lambda).ln();
            let lhs = summary.log_fraction(threshold_log, Side::Ge);
            let rhs = p.powf(lambda);
            let se_lhs = stats::binomial_std_err(lhs, n);
            let se_rhs = lambda * p.powf(lambda - 1.0) * se_p;
            let std_err = se_lhs.hypot(se_rhs);
            StrongRow { lambda, c, threshold_log, lhs, rhs, std_err, pass: lhs <= rhs + SIGMAS * std_err }
        })
        .collect())
}

/// Families of test functions that make sense in every dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolyTemplate {
    /// `½(z₁ + 1)`.
    HalfShift,
    RandomQuadratic { seed: u64 },
    RandomCubic { seed: u64 },
}

impl PolyTemplate {
    pub fn name(&self) -> String {
        match self {
            PolyTemplate::HalfShift => "half_shift".into(),
            PolyTemplate::RandomQuadratic { seed } => format!("random_quadratic[{seed}]"),
            PolyTemplate::RandomCubic { seed } => format!("random_cubic[{seed}]"),
        }
    }

    /// The template in `n` variables.
    ///
    /// Random templates draw `F(0)` from the template seed alone and give the
    /// remaining coefficients total modulus `1 − |F(0)|` (less a rounding
    /// guard), so `|F(0)|` and therefore `σ` do not depend on `n`.
    pub fn build(&self, n: usize) -> Result<MultiPoly> {
        let (seed, degree) = match *self {
            PolyTemplate::HalfShift => {
                let half = Complex64::new(0.5, 0.0);
                let mut linear = vec![0; n];
                linear[0] = 1;
                return MultiPoly::new(n, [(linear, half), (vec![0; n], half)]);
            }
            PolyTemplate::RandomQuadratic { seed } => (seed, 2),
            PolyTemplate::RandomCubic { seed } => (seed, 3),
        };
        let mut head = rng::stream(seed, rng::label("volume.template.constant"), 0);
        let modulus: f64 = head.random_range(0.2..0.8);
        let c0 = Complex64::from_polar(modulus, head.random_range(0.0..std::f64::consts::TAU));
        let mut body = rng::stream(seed, rng::label("volume.template.body"), n as u64);
        let others: Vec<(Vec<u32>, Complex64)> = monomials(n, degree)
            .into_iter()
            .filter(|a| a.iter().any(|&e| e > 0))
            .map(|a| {
                let re: f64 = body.sample(rand_distr::StandardNormal);
                let im: f64 = body.sample(rand_distr::StandardNormal);
                (a, Complex64::new(re, im))
            })
            .collect();
        let l1: f64 = others.iter().map(|(_, c)| c.norm()).sum();
        let s = (1.0 - modulus) * (1.0 - 1e-12) / l1;
        let terms = others.into_iter().map(|(a, c)| (a, c * s)).chain([(vec![0; n], c0)]);
        MultiPoly::new(n, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn z(n: usize) -> MultiPoly {
        MultiPoly::coordinate(n, 0).unwrap()
    }

    fn interval() -> BallSpec {
        BallSpec::centered(1, 0.5, 0.25).unwrap()
    }

    #[test]
    fn ball_validation() {
        assert!(BallSpec::centered(2, 0.75, 0.25).is_ok());
        assert!(BallSpec::centered(2, 0.76, 0.25).is_err());
        assert!(BallSpec::new(vec![0.5, 0.0], 0.3, 0.25).is_err());
        let e = BallSpec::centered(2, 0.5, 0.3).unwrap_err();
        assert_eq!(e.to_string(), "epsilon: must be ≤ 0.25");
        assert!(BallSpec::centered(3, 0.0, 0.1).is_ok());
    }

    #[test]
    fn sampling_examples() {
        let pts = sample_ball(&interval(), 100_000, 1).unwrap();
        let mean = pts.iter().map(|p| p[0].abs()).sum::<f64>() / pts.len() as f64;
        // |x| ~ U[0, ½]: mean ¼, sd 1/(4√3)
        let se = 0.25 / 3f64.sqrt() / (pts.len() as f64).sqrt();
        assert!((mean - 0.25).abs() <= 3.0 * se);

        let spec = BallSpec::new(vec![0.1, -0.2, 0.0], 0.0, 0.25).unwrap();
        assert!(sample_ball(&spec, 10, 1).unwrap().iter().all(|p| p == &spec.center));

        let spec = BallSpec::centered(8, 0.7, 0.25).unwrap();
        let pts = sample_ball(&spec, 100_000, 2).unwrap();
        let r2: Vec<f64> = pts.iter().map(|p| p.iter().map(|x| x * x).sum::<f64>() / 0.49).collect();
        let mean = r2.iter().sum::<f64>() / r2.len() as f64;
        // r² = U^{2/n}: E = n/(n+2), Var = n/(n+4) − (n/(n+2))²
        let var = 8.0 / 12.0 - 0.64;
        assert!((mean - 0.8).abs() <= 3.0 * (var / r2.len() as f64).sqrt());
    }

    #[test]
    fn quantile_examples() {
        let q = quantile_m(&z(1), &interval(), 1_000_000, 3).unwrap();
        assert!((q.m - M_LEVEL / 2.0).abs() <= 3.0 * q.std_err, "{q:?}");
        assert_abs_diff_eq!(q.m, 0.31606, epsilon = 2e-3);

        let z2 = MultiPoly::new(1, [(vec![2], Complex64::new(1.0, 0.0))]).unwrap();
        let q = quantile_m(&z2, &interval(), 1_000_000, 3).unwrap();
        assert!((q.m - (M_LEVEL / 2.0).powi(2)).abs() <= 3.0 * q.std_err, "{q:?}");

        let c = MultiPoly::constant(1, Complex64::new(0.5, 0.0)).unwrap();
        assert!(matches!(quantile_m(&c, &interval(), 100, 3), Err(Error::Degenerate(_))));
    }

    #[test]
    fn level_fraction_examples() {
        let f = z(1);
        assert_eq!(level_fraction(&f, &interval(), 0.0, Side::Ge, 1000, 1).unwrap().fraction, 1.0);
        assert_eq!(level_fraction(&f, &interval(), 1.5, Side::Ge, 1000, 1).unwrap().fraction, 0.0);
        let fr = level_fraction(&f, &interval(), 0.25, Side::Le, 100_000, 1).unwrap();
        assert!((fr.fraction - 0.5).abs() <= 3.0 * fr.std_err);
    }

    #[test]
    fn log_fraction_matches_linear() {
        let s = DistributionSummary::from_values(vec![0.0, 0.1, 0.2, 0.2, 0.5], 0);
        for t in [0.05, 0.1, 0.2, 0.3, 0.5, 0.7] {
            assert_eq!(s.log_fraction(f64::ln(t), Side::Le), s.fraction(t, Side::Le).fraction);
            assert_eq!(s.log_fraction(f64::ln(t), Side::Ge), s.fraction(t, Side::Ge).fraction);
        }
        assert_eq!(s.log_fraction(-1e9, Side::Le), 0.2);
    }

    #[test]
    fn theorem_examples() {
        let f = PolyTemplate::HalfShift.build(2).unwrap();
        let spec = BallSpec::centered(2, 0.7, 0.25).unwrap();
        let rep = theorem_check(&f, &spec, &[1.0, 2.0, 50.0], 100_000, 4).unwrap();
        assert_abs_diff_eq!(rep.params.sigma, 3072.0 * 2f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(rep.params.sigma, 2129.35, epsilon = 1e-2);
        assert!(rep.rows.iter().all(|r| r.pass));
        assert_eq!(rep.rows[1].small_fraction, 0.0);
        assert_eq!(rep.rows[2].tail_fraction, 0.0);
        assert!(rep.m_level_pass);

        let zero = z(2);
        assert!(theorem_check(&zero, &spec, &[2.0], 100, 1).is_err());
        let unit = MultiPoly::constant(2, Complex64::new(1.0, 0.0)).unwrap();
        assert!(TheoremParams::new(&unit, 0.25).is_err());
    }

    #[test]
    fn strong_form_examples() {
        let f = PolyTemplate::HalfShift.build(2).unwrap();
        let spec = BallSpec::centered(2, 0.7, 0.25).unwrap();
        let summary = summarize(&f, &spec, 100_000, 9).unwrap();
        let m = summary.quantile_m().unwrap().m;
        let rows = strong_form_check_on(&f, &spec, &summary, 0.3, &[1.0, 2.0]).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        let above = strong_form_check_on(&f, &spec, &summary, 2.0 * summary.max(), &[2.0]).unwrap();
        assert_eq!(above[0].lhs, 0.0);
        let at_m = strong_form_check_on(&f, &spec, &summary, m, &[2.0, 4.0]).unwrap();
        let thm = theorem_check_on(&f, &spec, &summary, &[2.0, 4.0]).unwrap();
        for (s, t) in at_m.iter().zip(&thm.rows) {
            assert_eq!(s.lhs, t.tail_fraction);
            assert_eq!(s.threshold_log, t.tail_threshold_log);
        }
    }

    #[test]
    fn templates_are_dimension_free() {
        for t in [PolyTemplate::HalfShift, PolyTemplate::RandomQuadratic { seed: 5 }, PolyTemplate::RandomCubic { seed: 6 }] {
            let sigmas: Vec<f64> = [1, 2, 4, 8]
                .iter()
                .map(|&n| {
                    let f = t.build(n).unwrap();
                    assert!(f.sup_cert() <= 1.0);
                    TheoremParams::new(&f, 0.25).unwrap().sigma
                })
                .collect();
            assert!(sigmas.iter().all(|s| s.to_bits() == sigmas[0].to_bits()), "{t:?}: {sigmas:?}");
        }
    }

    #[test]
    fn unimodular_multiples_share_moduli() {
        let f = PolyTemplate::RandomCubic { seed: 1 }.build(3).unwrap();
        let spec = BallSpec::centered(3, 0.75, 0.25).unwrap();
        let base = summarize(&f, &spec, 20_000, 5).unwrap();
        for u in [Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] {
            assert_eq!(summarize(&f.scale(u), &spec, 20_000, 5).unwrap(), base);
        }
        let u = Complex64::from_polar(1.0, 0.7);
        let rotated = summarize(&f.scale(u), &spec, 20_000, 5).unwrap();
        for (a, b) in rotated.sorted_moduli.iter().zip(&base.sorted_moduli) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn summaries_independent_of_threads() {
        let f = PolyTemplate::RandomQuadratic { seed: 2 }.build(4).unwrap();
        let spec = BallSpec::centered(4, 0.75, 0.25).unwrap();
        let run = |k| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .unwrap()
                .install(|| summarize(&f, &spec, 200_000, 11).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
