//! Thin rectangles, on which no exponent independent of `F` can work.
//!
//! For a polynomial `Q` and `η` with `η·max_{|z|≤1}|Q| < 1/8`, the function
//! `F(z) = ½[2ηQ(z₁) + z₂ + ½]` is bounded by `7/8` on the unit ball with
//! `|F(0,0)| > 1/8`. On `V_δ = [0, ¼] × {x₂ + ½ ∈ [0, δ]}` it equals
//! `½|2ηQ(x₁) + u|` with `u = x₂ + ½ ∈ [0, δ]`, so as `δ → 0` the law of `|F|`
//! on `V_δ` tends to the law of `|ηQ(t)|` for `t` uniform on `[0, ¼]`, which
//! `Q` can make arbitrary. The exponent a rectangle demands (`σ_eff`) is
//! compared with the fixed exponent the ball estimate allows.
//!
//! Samples are drawn and evaluated in the reduced form above: `x₂ + ½` is
//! never formed, so `δ` far below the spacing of doubles near `½` is fine.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::MultiPoly;
use crate::error::{Error, Result};
use crate::report::CheckRow;
use crate::rng;
use crate::stats;
use crate::univariate::{maximize, UniPoly};
use crate::volume::{DistributionSummary, M_LEVEL, SIGMAS};

/// Margin in `η·max|Q| ≤ 1/8 − ADMISSIBLE_MARGIN`.
pub const ADMISSIBLE_MARGIN: f64 = 1e-9;
/// Boundary points used to bound `max_{|z|≤1}|Q|`.
pub const DISK_POINTS: usize = 10_000;
/// `V_δ ⊂ B(0, ¾)`, so the ball estimate applies with this `ε`.
pub const EPSILON: f64 = 0.25;
/// `σ_eff` is only computed for `λ ≥ LAMBDA_MIN`.
pub const LAMBDA_MIN: f64 = 1.1;
/// Amplitude `η·max_{[0,¼]}|Q|` that relative `δ` is measured against.
pub const REFERENCE_AMPLITUDE: f64 = 0.1;
/// Right end of the `x₁` range.
pub const T_MAX: f64 = 0.25;

/// The polynomial `Q` of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QSpec {
    /// Real coefficients, constant term first.
    Coefficients { coeffs: Vec<f64> },
    /// `T_m(8t − 1)`, which oscillates between `±1` on `[0, ¼]`.
    Chebyshev { m: u32 },
}

impl QSpec {
    pub fn zero() -> Self {
        QSpec::Coefficients { coeffs: vec![] }
    }

    /// `tᵏ`.
    pub fn power(k: u32) -> Self {
        let mut coeffs = vec![0.0; k as usize + 1];
        coeffs[k as usize] = 1.0;
        QSpec::Coefficients { coeffs }
    }

    pub fn poly(&self) -> UniPoly {
        match self {
            QSpec::Coefficients { coeffs } => UniPoly::from_real(coeffs),
            QSpec::Chebyshev { m } => {
                let x = UniPoly::from_real(&[-1.0, 8.0]);
                let two_x = x.scale(Complex64::new(2.0, 0.0));
                let (mut prev, mut cur) = (UniPoly::from_real(&[1.0]), x);
                if *m == 0 {
                    return prev;
                }
                for _ in 1..*m {
                    let next = two_x.mul(&cur).add(&prev.scale(Complex64::new(-1.0, 0.0)));
                    prev = cur;
                    cur = next;
                }
                cur
            }
        }
    }

    /// `Q(t)` for real `t ∈ [0, ¼]`, using the trigonometric form for the
    /// Chebyshev family (its monomial coefficients cancel catastrophically).
    pub fn eval_interval(&self, t: f64) -> f64 {
        match self {
            QSpec::Coefficients { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c),
            QSpec::Chebyshev { m } => (f64::from(*m) * (8.0 * t - 1.0).clamp(-1.0, 1.0).acos()).cos(),
        }
    }

    pub fn degree(&self) -> usize {
        self.poly().degree()
    }

    pub fn name(&self) -> String {
        match self {
            QSpec::Coefficients { coeffs } => format!("coefficients{coeffs:?}"),
            QSpec::Chebyshev { m } => format!("T{m}"),
        }
    }
}

/// Upper bound for `max_{|z|≤1}|Q|`: the smaller of the coefficient sum and
/// the boundary maximum over `DISK_POINTS` roots of unity inflated by
/// `sec(πd/2M)`, which bounds the true maximum for `M > d`.
pub fn certified_disk_max(q: &UniPoly) -> f64 {
    let l1 = q.coefficient_l1();
    let d = q.degree();
    if d == 0 || DISK_POINTS <= d {
        return l1;
    }
    let sampled = (0..DISK_POINTS)
        .into_par_iter()
        .map(|k| q.eval(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / DISK_POINTS as f64)).norm())
        .reduce(|| 0.0, f64::max);
    let rounding = 4.0 * (d as f64 + 1.0) * f64::EPSILON * l1;
    let inflated = sampled / (PI * d as f64 / (2.0 * DISK_POINTS as f64)).cos() + rounding;
    inflated.min(l1)
}

/// How `η` is chosen for a given `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EtaRule {
    Fixed(f64),
    /// `η = c / max_{|z|≤1}|Q|`, i.e. `Q` normalized on the disk times `c`.
    DiskFraction(f64),
}

/// Units of `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaUnits {
    #[default]
    Absolute,
    /// `δ` is scaled by `η·max_{[0,¼]}|Q| / REFERENCE_AMPLITUDE`. The law of
    /// `|F|/s` on `V_δ` is the same for `(η, δ)` and `(sη, sδ)`, so this
    /// reproduces a rectangle of width `δ` for `Q` normalized to amplitude
    /// `REFERENCE_AMPLITUDE` on `[0, ¼]` while keeping `η` admissible.
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleF {
    pub q: QSpec,
    pub eta: f64,
    pub disk_max: f64,
    /// `max_{[0,¼]}|Q|`.
    pub interval_max: f64,
    /// `½(2η·disk_max + 3/2)`, a bound for `|F|` on the unit ball.
    pub sup_bound: f64,
    /// `|F(0,0)|`.
    pub f00: f64,
    /// `½(½ − 2η·disk_max)`.
    pub f00_lower_bound: f64,
    /// `48 ε⁻³ log(1/|F(0,0)|)` with `ε = ¼`.
    pub sigma_theorem: f64,
}

pub fn build_f(q: QSpec, eta: f64) -> Result<CounterexampleF> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain("eta", "must be positive"));
    }
    let poly = q.poly();
    let disk_max = certified_disk_max(&poly);
    if eta * disk_max > 0.125 - ADMISSIBLE_MARGIN {
        return Err(Error::domain(
            "eta",
            format!("eta·max|Q| = {} is not below 1/8", eta * disk_max),
        ));
    }
    let interval_max = if poly.is_zero() {
        0.0
    } else {
        match q {
            QSpec::Chebyshev { .. } => 1.0,
            QSpec::Coefficients { .. } => {
                maximize(|t| q.eval_interval(t).abs(), crate::interval::Interval { lo: 0.0, hi: T_MAX }, 10_000).1
            }
        }
    };
    let f00 = 0.5 * (2.0 * eta * q.eval_interval(0.0) + 0.5).abs();
    Ok(CounterexampleF {
        eta,
        disk_max,
        interval_max,
        sup_bound: 0.5 * (2.0 * eta * disk_max + 1.5),
        f00,
        f00_lower_bound: 0.5 * (0.5 - 2.0 * eta * disk_max),
        sigma_theorem: 48.0 / EPSILON.powi(3) * (1.0 / f00).ln(),
        q,
    })
}

pub fn build_with_rule(q: QSpec, rule: EtaRule) -> Result<CounterexampleF> {
    let eta = match rule {
        EtaRule::Fixed(eta) => eta,
        EtaRule::DiskFraction(c) => {
            let m = certified_disk_max(&q.poly());
            if m == 0.0 {
                c
            } else {
                c / m
            }
        }
    };
    build_f(q, eta)
}

impl CounterexampleF {
    /// `F` as a polynomial in two variables.
    pub fn multipoly(&self) -> Result<MultiPoly> {
        let half = Complex64::new(0.5, 0.0);
        let q_terms = self
            .q
            .poly()
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, &c)| (vec![k as u32, 0], c * self.eta))
            .collect::<Vec<_>>();
        MultiPoly::new(2, q_terms.into_iter().chain([(vec![0, 1], half), (vec![0, 0], half * 0.5)]))
    }

    /// `|F(t, u − ½)| = ½|2ηQ(t) + u|`.
    pub fn modulus_reduced(&self, t: f64, u: f64) -> f64 {
        0.5 * (2.0 * self.eta * self.q.eval_interval(t) + u).abs()
    }

    /// The rectangle width in absolute units.
    pub fn physical_delta(&self, delta: f64, units: DeltaUnits) -> Result<f64> {
        check_delta(delta)?;
        match units {
            DeltaUnits::Absolute => Ok(delta),
            DeltaUnits::Relative => {
                let amplitude = self.eta * self.interval_max;
                if amplitude == 0.0 {
                    return Err(Error::domain("delta_units", "relative units need a nonzero Q"));
                }
                Ok(delta * amplitude / REFERENCE_AMPLITUDE)
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.q.degree()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::domain("delta", format!("must lie in (0, 0.5], got {delta}")));
    }
    Ok(())
}

/// Sorted `|F|` at `count` uniform points of `V_δ`, `δ` in absolute units.
pub fn rect_distribution(cf: &CounterexampleF, delta: f64, count: usize, seed: u64) -> Result<DistributionSummary> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::domain("delta", format!("must lie in (0, 0.5], got {delta}")));
    }
    sample_moduli(count, seed, "counterexample.rect", |r| {
        let t = r.random_range(0.0..=T_MAX);
        let u = r.random_range(0.0..=delta);
        cf.modulus_reduced(t, u)
    })
}

/// Sorted `|ηQ(t)|` for `count` uniform `t ∈ [0, ¼]`.
pub fn limit_distribution(cf: &CounterexampleF, count: usize, seed: u64) -> Result<DistributionSummary> {
    sample_moduli(count, seed, "counterexample.limit", |r| {
        let t = r.random_range(0.0..=T_MAX);
        (cf.eta * cf.q.eval_interval(t)).abs()
    })
}

fn sample_moduli<F>(count: usize, seed: u64, name: &str, draw: F) -> Result<DistributionSummary>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    if count == 0 {
        return Err(Error::InsufficientSamples("count must be ≥ 1".into()));
    }
    let runs = rng::par_chunks(count, rng::CHUNK_SIZE, seed, rng::label(name), |r, range| {
        let mut v: Vec<f64> = range.map(|_| draw(r)).collect();
        stats::sort_values(&mut v);
        v
    });
    Ok(DistributionSummary { sample_count: count, sorted_moduli: stats::merge_sorted(runs), seed })
}

/// `σ_eff` with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEff {
    pub lambda: f64,
    pub m: f64,
    /// Supremum of thresholds `t` with `fraction{|F| ≤ t} ≤ 1/λ`.
    pub t_star: f64,
    pub sigma_eff: f64,
    pub std_err: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= LAMBDA_MIN && lambda.is_finite()) {
        return Err(Error::domain("lambda", format!("must be ≥ {LAMBDA_MIN}, got {lambda}")));
    }
    Ok(())
}

/// `log(M/t*)/log(8λ)` for an empirical law.
pub fn sigma_eff_of(summary: &DistributionSummary, lambda: f64) -> Result<SigmaEff> {
    check_lambda(lambda)?;
    let v = &summary.sorted_moduli;
    let n = v.len();
    if n < 3 {
        return Err(Error::InsufficientSamples("need at least 3 samples".into()));
    }
    let m = summary.quantile_m()?;
    let t_star = v[((n as f64 / lambda).floor() as usize).min(n - 1)];
    if t_star == 0.0 {
        return Err(Error::InsufficientSamples("t* = 0: all small-value mass sits at zero; increase N".into()));
    }
    let log8l = (8.0 * lambda).ln();
    let se_log_m = m.std_err / m.m;
    let se_log_t = stats::quantile_std_err(v, 1.0 / lambda) / t_star;
    Ok(SigmaEff {
        lambda,
        m: m.m,
        t_star,
        sigma_eff: (m.m / t_star).ln() / log8l,
        std_err: se_log_m.hypot(se_log_t) / log8l,
    })
}

pub fn sigma_eff(cf: &CounterexampleF, delta: f64, lambda: f64, count: usize, seed: u64) -> Result<SigmaEff> {
    sigma_eff_of(&rect_distribution(cf, delta, count, seed)?, lambda)
}

/// `|{t ∈ [lo, hi] : |g(t)| ≤ s}|` by bracketing the roots of `|g| − s` on
/// a grid of `cells` cells and bisecting each sign change.
pub fn sublevel_measure(g: impl Fn(f64) -> f64, lo: f64, hi: f64, s: f64, cells: usize) -> f64 {
    let h = |t: f64| g(t).abs() - s;
    let step = (hi - lo) / cells as f64;
    let crossing = |mut a: f64, mut b: f64, ha: f64| {
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if (h(mid) <= 0.0) == (ha <= 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let mut total = 0.0;
    let mut a = lo;
    let mut ha = h(a);
    for i in 1..=cells {
        let b = if i == cells { hi } else { lo + i as f64 * step };
        let hb = h(b);
        total += match (ha <= 0.0, hb <= 0.0) {
            (true, true) => b - a,
            (false, false) => 0.0,
            (true, false) => crossing(a, b, ha) - a,
            (false, true) => b - crossing(a, b, ha),
        };
        a = b;
        ha = hb;
    }
    total
}

/// Nodes and weights of 5-point Gauss–Legendre on `[−1, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫_lo^hi w(a(t)) dt` for `w` smooth between the given `levels` of `a`:
/// every cell of a uniform grid is split where `a` crosses a level and each
/// piece gets 5-point Gauss–Legendre.
pub fn piecewise_integral(
    a: impl Fn(f64) -> f64,
    w: impl Fn(f64) -> f64,
    levels: &[f64],
    lo: f64,
    hi: f64,
    cells: usize,
) -> f64 {
    let step = (hi - lo) / cells as f64;
    let crossing = |mut x: f64, mut y: f64, level: f64| {
        let below = a(x) <= level;
        for _ in 0..80 {
            let mid = 0.5 * (x + y);
            if (a(mid) <= level) == below {
                x = mid;
            } else {
                y = mid;
            }
        }
        0.5 * (x + y)
    };
    let mut total = 0.0;
    let mut cuts = Vec::new();
    for i in 0..cells {
        let x0 = lo + i as f64 * step;
        let x1 = if i + 1 == cells { hi } else { x0 + step };
        let (a0, a1) = (a(x0), a(x1));
        cuts.clear();
        cuts.push(x0);
        for &l in levels {
            if (a0 <= l) != (a1 <= l) {
                cuts.push(crossing(x0, x1, l));
            }
        }
        cuts.push(x1);
        cuts.sort_by(f64::total_cmp);
        for seg in cuts.windows(2) {
            let (c, h) = (0.5 * (seg[0] + seg[1]), 0.5 * (seg[1] - seg[0]));
            total += h * GAUSS5.iter().map(|&(x, wt)| wt * w(a(c + h * x))).sum::<f64>();
        }
    }
    total
}

/// Independent CDF of `|F|` on `V_δ` (or of the limit law when `δ = 0`).
///
/// For fixed `t` the `u`-probability of `|2ηQ(t) + u| ≤ 2s` is an explicit
/// piecewise-linear function of `a = 2ηQ(t)`; the `t`-integral is taken by
/// [`piecewise_integral`] with the kinks of that function as levels.
pub struct QuadratureOracle<'a> {
    cf: &'a CounterexampleF,
    delta: f64,
    cells: usize,
}

impl<'a> QuadratureOracle<'a> {
    pub fn new(cf: &'a CounterexampleF, delta: f64) -> Self {
        let cells = 64 * cf.degree().max(1) + 2000;
        QuadratureOracle { cf, delta, cells }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        let cf = self.cf;
        let a = |t: f64| 2.0 * cf.eta * cf.q.eval_interval(t);
        let r = 2.0 * s;
        let d = self.delta;
        let measure = if d == 0.0 {
            piecewise_integral(a, |v| if v.abs() <= r { 1.0 } else { 0.0 }, &[-r, r], 0.0, T_MAX, self.cells)
        } else {
            // |{u ∈ [0, δ] : −r − a ≤ u ≤ r − a}| / δ
            let w = |v: f64| ((d.min(r - v) - (-r - v).max(0.0)).max(0.0)) / d;
            piecewise_integral(a, w, &[-r - d, -r, r - d, r], 0.0, T_MAX, self.cells)
        };
        measure / T_MAX
    }

    /// Smallest `s` with `cdf(s) ≥ p`, by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let mut lo = 0.0;
        let mut hi = 0.5 * (2.0 * self.cf.eta * self.cf.interval_max + self.delta) * (1.0 + 1e-9) + f64::MIN_POSITIVE;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn sigma_eff(&self, lambda: f64) -> f64 {
        (self.quantile(M_LEVEL) / self.quantile(1.0 / lambda)).ln() / (8.0 * lambda).ln()
    }
}

/// One line of the growth table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "degQ")]
    pub deg_q: usize,
    #[serde(rename = "F0")]
    pub f0: f64,
    pub sigma_theorem: f64,
    pub lambda: f64,
    pub sigma_eff: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

/// Monte Carlo versus quadrature for one member and `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub q: String,
    pub lambda: f64,
    pub sigma_mc: f64,
    pub sigma_oracle: f64,
    pub std_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub family: Vec<String>,
    pub delta: f64,
    pub delta_units: DeltaUnits,
    pub rows: Vec<GrowthRow>,
    pub oracle: Vec<OracleRow>,
    /// `σ_eff(next)/σ_eff(previous)` along the family, per `λ`.
    pub ratios: Vec<(f64, Vec<f64>)>,
    pub sigma_eff_increasing: bool,
    /// `max σ_theorem / min σ_theorem` across the family.
    pub sigma_theorem_spread: f64,
    pub sigma_theorem_bounded: bool,
    pub pass: bool,
}

impl GrowthReport {
    pub fn check_rows(&self) -> Vec<CheckRow> {
        let mut out = Vec::new();
        for (lambda, ratios) in &self.ratios {
            let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let worst = if worst.is_finite() { worst } else { 1.0 };
            out.push(CheckRow::lower(
                format!("counterexample.sigma_eff_min_step_ratio[lambda={lambda}]"),
                worst,
                1.0,
                ratios.iter().all(|&r| r > 1.0),
            ));
        }
        out.push(CheckRow::new("counterexample.sigma_theorem_spread", self.sigma_theorem_spread, 2.0, self.sigma_theorem_bounded));
        for o in &self.oracle {
            out.push(CheckRow::new(
                format!("counterexample.oracle_agreement[{},lambda={}]", o.q, o.lambda),
                (o.sigma_mc - o.sigma_oracle).abs(),
                SIGMAS * o.std_err,
                o.pass,
            ));
        }
        out
    }
}

/// `σ_eff` per family member and `λ`, with the quadrature cross-check.
pub fn growth_experiment(
    family: &[QSpec],
    eta_rule: EtaRule,
    delta: f64,
    delta_units: DeltaUnits,
    lambdas: &[f64],
    count: usize,
    seed: u64,
) -> Result<GrowthReport> {
    if family.is_empty() {
        return Err(Error::domain("family", "must not be empty"));
    }
    if lambdas.is_empty() {
        return Err(Error::domain("lambdas", "must not be empty"));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    let mut rows = Vec::new();
    let mut oracle = Vec::new();
    let mut sigmas: Vec<Vec<f64>> = vec![Vec::new(); lambdas.len()];
    let mut theorem = Vec::new();
    for (i, q) in family.iter().enumerate() {
        let cf = build_with_rule(q.clone(), eta_rule)?;
        let d = cf.physical_delta(delta, delta_units)?;
        let member_seed = rng::derive_seed(seed, rng::label("counterexample.growth"), i as u64);
        let summary = rect_distribution(&cf, d, count, member_seed)?;
        let quad = QuadratureOracle::new(&cf, d);
        theorem.push(cf.sigma_theorem);
        for (j, &lambda) in lambdas.iter().enumerate() {
            let est = sigma_eff_of(&summary, lambda)?;
            let sigma_oracle = quad.sigma_eff(lambda);
            sigmas[j].push(est.sigma_eff);
            rows.push(GrowthRow {
                deg_q: cf.degree(),
                f0: cf.f00,
                sigma_theorem: cf.sigma_theorem,
                lambda,
                sigma_eff: est.sigma_eff,
                n: count,
                seed: member_seed,
            });
            oracle.push(OracleRow {
                q: q.name(),
                lambda,
                sigma_mc: est.sigma_eff,
                sigma_oracle,
                std_err: est.std_err,
                pass: (est.sigma_eff - sigma_oracle).abs() <= SIGMAS * est.std_err,
            });
        }
    }
    let ratios: Vec<(f64, Vec<f64>)> = lambdas
        .iter()
        .zip(&sigmas)
        .map(|(&l, s)| (l, s.windows(2).map(|w| w[1] / w[0]).collect()))
        .collect();
    let sigma_eff_increasing = sigmas.iter().all(|s| s.windows(2).all(|w| w[1] > w[0]));
    let max = theorem.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = theorem.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma_theorem_spread = max / min;
    let sigma_theorem_bounded = sigma_theorem_spread < 2.0;
    let oracle_ok = oracle.iter().all(|o| o.pass);
    Ok(GrowthReport {
        family: family.iter().map(QSpec::name).collect(),
        delta,
        delta_units,
        rows,
        oracle,
        ratios,
        sigma_eff_increasing,
        sigma_theorem_spread,
        sigma_theorem_bounded,
        pass: sigma_eff_increasing && sigma_theorem_bounded && oracle_ok,
    })
}

/// Two-sample Kolmogorov distance between the rectangle law and the limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub q: String,
    pub delta: f64,
    pub physical_delta: f64,
    pub n: usize,
    pub distance: f64,
    /// `√(2/N)`, the scale of the two-sample statistic under equal laws.
    pub noise_floor: f64,
}

pub fn ks_rect_vs_limit(cf: &CounterexampleF, delta: f64, units: DeltaUnits, count: usize, seed: u64) -> Result<KsReport> {
    let d = cf.physical_delta(delta, units)?;
    let rect = rect_distribution(cf, d, count, rng::derive_seed(seed, rng::label("counterexample.ks"), 0))?;
    let limit = limit_distribution(cf, count, rng::derive_seed(seed, rng::label("counterexample.ks"), 1))?;
    Ok(KsReport {
        q: cf.q.name(),
        delta,
        physical_delta: d,
        n: count,
        distance: stats::ks_two_sample(&rect.sorted_moduli, &limit.sorted_moduli),
        noise_floor: (2.0 / count as f64).sqrt(),
    })
}

/// `log(2(1 − 1/e))/log(16)`: `σ_eff` at `λ = 2` for a uniform law on `[0, a]`.
pub fn uniform_sigma_eff(lambda: f64) -> f64 {
    ((1.0 - 1.0 / E) * lambda).ln() / (8.0 * lambda).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn build_examples() {
        let cf = build_f(QSpec::Coefficients { coeffs: vec![1.0] }, 0.1).unwrap();
        assert_abs_diff_eq!(cf.f00, 0.35, epsilon = 1e-15);
        let cf = build_f(QSpec::zero(), 0.1).unwrap();
        assert_abs_diff_eq!(cf.f00, 0.25);
        assert!(build_f(QSpec::Coefficients { coeffs: vec![1.0] }, 0.2).is_err());

        let cf = build_with_rule(QSpec::Chebyshev { m: 10 }, EtaRule::DiskFraction(0.1)).unwrap();
        assert!(cf.f00 >= 0.15);
        assert!(cf.sup_bound <= 0.875 + 1e-12);
        assert!(cf.f00 >= cf.f00_lower_bound && cf.f00_lower_bound > 0.125);
    }

    #[test]
    fn chebyshev_disk_max_is_value_at_minus_one() {
        for m in [1u32, 4, 8, 16, 32] {
            let p = QSpec::Chebyshev { m }.poly();
            let t9 = (f64::from(m) * 9f64.acosh()).cosh();
            assert!((p.coefficient_l1() / t9 - 1.0).abs() < 1e-10, "m={m}");
            assert!((certified_disk_max(&p) / t9 - 1.0).abs() < 1e-10);
            // trigonometric and monomial forms agree where the latter is usable
            if m <= 8 {
                for k in 0..=20 {
                    let t = 0.25 * k as f64 / 20.0;
                    assert_abs_diff_eq!(p.eval_real(t).re, QSpec::Chebyshev { m }.eval_interval(t), epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn reduced_form_matches_polynomial() {
        let cf = build_f(QSpec::Coefficients { coeffs: vec![0.3, -1.0, 2.0] }, 0.02).unwrap();
        let f = cf.multipoly().unwrap();
        assert!(f.sup_cert() <= 0.875 + 1e-12);
        for (t, u) in [(0.0, 0.0), (0.1, 0.3), (0.25, 0.5), (0.17, 0.01)] {
            let direct = f.eval_real(&[t, u - 0.5]).unwrap().norm();
            assert_abs_diff_eq!(direct, cf.modulus_reduced(t, u), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(f.eval_real(&[0.0, 0.0]).unwrap().norm(), cf.f00, epsilon = 1e-15);
    }

    #[test]
    fn distribution_examples() {
        let zero = build_f(QSpec::zero(), 0.1).unwrap();
        let d = rect_distribution(&zero, 0.5, 10_000, 1).unwrap();
        assert!(d.max() <= 0.25);
        let d = rect_distribution(&zero, 1e-6, 10_000, 1).unwrap();
        assert!(d.max() <= 0.5e-6);

        let one = build_f(QSpec::Coefficients { coeffs: vec![1.0] }, 0.1).unwrap();
        let lim = limit_distribution(&one, 1000, 2).unwrap();
        assert!(lim.sorted_moduli.iter().all(|&v| v == 0.1));

        let lin = build_f(QSpec::power(1), 0.1).unwrap();
        let lim = limit_distribution(&lin, 100_000, 2).unwrap();
        let ks = stats::ks_vs_cdf(&lim.sorted_moduli, |s| (s / 0.025).clamp(0.0, 1.0));
        assert!(ks < 0.01, "{ks}");

        let cheb = build_with_rule(QSpec::Chebyshev { m: 6 }, EtaRule::DiskFraction(0.1)).unwrap();
        let d = rect_distribution(&cheb, 0.5, 10_000, 3).unwrap();
        assert!(d.max() <= 0.875);
    }

    #[test]
    fn sigma_eff_uniform_law() {
        let zero = build_f(QSpec::zero(), 0.1).unwrap();
        let est = sigma_eff(&zero, 1e-3, 2.0, 1_000_000, 4).unwrap();
        assert_abs_diff_eq!(uniform_sigma_eff(2.0), 0.0845, epsilon = 1e-4);
        assert!((est.sigma_eff - uniform_sigma_eff(2.0)).abs() <= 3.0 * est.std_err, "{est:?}");
        assert!(sigma_eff(&zero, 1e-3, 1.05, 1000, 4).is_err());
    }

    #[test]
    fn piecewise_integral_closed_forms() {
        // ∫_0^¼ t² dt with a kink level that is crossed
        let v = piecewise_integral(|t| t, |a| a * a, &[0.1], 0.0, 0.25, 3);
        assert_abs_diff_eq!(v, 0.25f64.powi(3) / 3.0, epsilon = 1e-15);
        let v = piecewise_integral(|t| t, |a| if a <= 0.1 { 1.0 } else { 0.0 }, &[0.1], 0.0, 0.25, 3);
        assert_abs_diff_eq!(v, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn sublevel_measure_closed_forms() {
        // |t − 0.1| ≤ 0.05 on [0, ¼]
        assert_abs_diff_eq!(sublevel_measure(|t| t - 0.1, 0.0, 0.25, 0.05, 10), 0.1, epsilon = 1e-14);
        // t² ≤ s
        assert_abs_diff_eq!(sublevel_measure(|t| t * t, 0.0, 0.25, 0.01, 7), 0.1, epsilon = 1e-14);
        assert_eq!(sublevel_measure(|_| 1.0, 0.0, 0.25, 0.5, 7), 0.0);
    }

    #[test]
    fn oracle_agrees_on_uniform_and_chebyshev() {
        let zero = build_f(QSpec::zero(), 0.1).unwrap();
        let quad = QuadratureOracle::new(&zero, 1e-3);
        assert_abs_diff_eq!(quad.sigma_eff(2.0), uniform_sigma_eff(2.0), epsilon = 1e-6);

        let cf = build_with_rule(QSpec::Chebyshev { m: 4 }, EtaRule::DiskFraction(0.1)).unwrap();
        let d = cf.physical_delta(1e-3, DeltaUnits::Relative).unwrap();
        let est = sigma_eff(&cf, d, 2.0, 1_000_000, 5).unwrap();
        let q = QuadratureOracle::new(&cf, d).sigma_eff(2.0);
        assert!((est.sigma_eff - q).abs() <= 3.0 * est.std_err, "{est:?} vs {q}");
    }

    #[test]
    fn power_family_grows() {
        let rep = growth_experiment(
            &[QSpec::power(1), QSpec::power(2)],
            EtaRule::Fixed(0.1),
            1e-3,
            DeltaUnits::Relative,
            &[2.0],
            200_000,
            6,
        )
        .unwrap();
        assert!(rep.sigma_eff_increasing, "{:?}", rep.rows);
        assert!(rep.sigma_theorem_bounded);

        let single = growth_experiment(&[QSpec::Coefficients { coeffs: vec![1.0] }], EtaRule::Fixed(0.1), 1e-3, DeltaUnits::Absolute, &[2.0], 10_000, 1).unwrap();
        assert_eq!(single.rows.len(), 1);
        assert!(single.sigma_eff_increasing);
    }

    #[test]
    fn growth_csv_header() {
        let row = GrowthRow { deg_q: 4, f0: 0.25, sigma_theorem: 1.0, lambda: 2.0, sigma_eff: 0.1, n: 10, seed: 1 };
        let text = crate::report::csv_string(&["degQ", "F0", "sigma_theorem", "lambda", "sigma_eff", "N", "seed"], &[row]).unwrap();
        assert!(text.starts_with("degQ,F0,sigma_theorem,lambda,sigma_eff,N,seed\n4,0.25,"));
    }
}
