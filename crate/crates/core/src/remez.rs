//! The Remez property of bounded analytic functions on the unit disk.
//!
//! A [`DiskFunction`] is `f = c·U·B` with a finite Blaschke product `B` and an
//! outer-type factor `U` given by finitely many atoms of the boundary measure:
//! `log|U(z)| = −Σ w_k (1 − |z|²)/|ζ_k − z|²`. Everything the checks need
//! (values at `±a`, minima over `[−a, a]`, suprema over sets) is evaluated in
//! log-modulus form so that tiny values do not underflow.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::report::CheckRow;
use crate::univariate::{maximize, UniPoly};

/// Zeros must satisfy `|ζ| ≤ 1 − ZERO_MARGIN`.
pub const ZERO_MARGIN: f64 = 1e-9;
/// Atom locations must lie on the circle within this tolerance.
pub const CIRCLE_TOL: f64 = 1e-12;
/// Relative tolerance of every inequality check.
pub const REL_TOL: f64 = 1e-9;
/// Grid for maxima over `I` (and minima over `[−a, a]`).
pub const INTERVAL_GRID: usize = 100_000;
/// Grid for minima in the factor bounds.
pub const FACTOR_GRID: usize = 10_000;
/// Grid per component of `E` for suprema.
pub const SET_GRID: usize = 1_000;
/// Splitting threshold between the two Blaschke sub-products.
pub const SPLIT_THRESHOLD: f64 = 2.0 / 3.0;

fn log_slack() -> f64 {
    REL_TOL.ln_1p()
}

/// A point mass `weight·δ_{e^{iθ}}` of the boundary measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: f64,
    pub weight: f64,
}

impl Atom {
    pub fn location(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// The Poisson-type kernel `(1 − |z|²)/|ζ − z|²` at `z`.
    fn kernel(&self, z: Complex64) -> f64 {
        (1.0 - z.norm_sqr()) / (self.location() - z).norm_sqr()
    }
}

/// `c · Π (z − ζ)/(1 − z ζ̄) · exp(−Σ w_k (ζ_k + z)/(ζ_k − z))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskFunction {
    zeros: Vec<Complex64>,
    atoms: Vec<Atom>,
    /// Argument of the unimodular constant.
    phase: f64,
}

impl DiskFunction {
    pub fn new(zeros: Vec<Complex64>, atoms: Vec<Atom>, phase: f64) -> Result<Self> {
        for z in &zeros {
            if !(z.norm() <= 1.0 - ZERO_MARGIN) {
                return Err(Error::domain("zero", format!("{z} is not strictly inside the disk")));
            }
        }
        for a in &atoms {
            if !(a.weight > 0.0 && a.weight.is_finite() && a.theta.is_finite()) {
                return Err(Error::domain("atom", format!("weight {} must be positive", a.weight)));
            }
        }
        if !phase.is_finite() {
            return Err(Error::domain("const", "phase must be finite"));
        }
        Ok(DiskFunction { zeros, atoms, phase })
    }

    /// Atom given by its location on the circle.
    pub fn atom_at(location: Complex64, weight: f64) -> Result<Atom> {
        if (location.norm() - 1.0).abs() > CIRCLE_TOL {
            return Err(Error::domain("atom", format!("{location} is not on the unit circle")));
        }
        Ok(Atom { theta: location.arg(), weight })
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn unimodular_const(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::domain("z", format!("|z| = {} is not inside the disk", z.norm())));
        }
        let blaschke: Complex64 = self.zeros.iter().map(|&zeta| blaschke_factor(z, zeta)).product();
        let exponent: Complex64 = self
            .atoms
            .iter()
            .map(|a| {
                let zeta = a.location();
                -a.weight * (zeta + z) / (zeta - z)
            })
            .sum();
        Ok(self.unimodular_const() * blaschke * exponent.exp())
    }

    /// `log|U(x)|` on the real diameter.
    pub fn log_outer(&self, x: f64) -> f64 {
        let z = Complex64::new(x, 0.0);
        -self.atoms.iter().map(|a| a.weight * a.kernel(z)).sum::<f64>()
    }

    /// `log|f(x)|` on the real diameter.
    pub fn log_modulus(&self, x: f64) -> f64 {
        log_blaschke(&self.zeros, x) + self.log_outer(x)
    }

    /// A random instance: up to `max_zeros` zeros spread from the center to
    /// near the circle (some on the real axis) and up to `max_atoms` atoms.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_zeros: usize, max_atoms: usize) -> DiskFunction {
        let nz = rng.random_range(0..=max_zeros);
        let zeros = (0..nz)
            .map(|_| {
                let radius: f64 = match rng.random_range(0..3) {
                    0 => rng.random::<f64>().sqrt(),
                    1 => 1.0 - 10f64.powf(-rng.random_range(1.0..6.0)),
                    _ => rng.random_range(0.0..0.99),
                };
                let radius = radius.min(1.0 - 2.0 * ZERO_MARGIN);
                let theta = if rng.random_bool(0.2) {
                    if rng.random_bool(0.5) { 0.0 } else { std::f64::consts::PI }
                } else {
                    rng.random_range(0.0..std::f64::consts::TAU)
                };
                Complex64::from_polar(radius, theta)
            })
            .collect();
        let na = rng.random_range(0..=max_atoms);
        let atoms = (0..na)
            .map(|_| Atom {
                theta: rng.random_range(0.0..std::f64::consts::TAU),
                weight: 10f64.powf(rng.random_range(-3.0..0.0)),
            })
            .collect();
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        DiskFunction { zeros, atoms, phase }
    }
}

/// `(z − ζ)/(1 − z ζ̄)`.
pub fn blaschke_factor(z: Complex64, zeta: Complex64) -> Complex64 {
    (z - zeta) / (Complex64::new(1.0, 0.0) - z * zeta.conj())
}

/// `log Π |b_ζ(x)|` over the given zeros.
pub fn log_blaschke(zeros: &[Complex64], x: f64) -> f64 {
    let z = Complex64::new(x, 0.0);
    zeros.iter().map(|&zeta| blaschke_factor(z, zeta).norm().ln()).sum()
}

/// `(1 − |ζ|²)/|1 + aζ|² + (1 − |ζ|²)/|1 − aζ|²`.
pub fn split_criterion(zeta: Complex64, a: f64) -> f64 {
    let m = 1.0 - zeta.norm_sqr();
    let one = Complex64::new(1.0, 0.0);
    m / (one + zeta * a).norm_sqr() + m / (one - zeta * a).norm_sqr()
}

/// Zeros partitioned by the splitting criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub atoms: Vec<Atom>,
    /// Zeros with criterion `≤ 2/3`.
    pub b1_zeros: Vec<Complex64>,
    /// Zeros with criterion `> 2/3`.
    pub b2_zeros: Vec<Complex64>,
}

impl Factorization {
    pub fn n(&self) -> usize {
        self.b2_zeros.len()
    }
}

pub fn split_zeros(zeros: &[Complex64], a: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    check_a(a)?;
    Ok(zeros.iter().partition(|&&z| split_criterion(z, a) <= SPLIT_THRESHOLD))
}

pub fn factorize(f: &DiskFunction, a: f64) -> Result<Factorization> {
    let (b1_zeros, b2_zeros) = split_zeros(&f.zeros, a)?;
    Ok(Factorization { atoms: f.atoms.clone(), b1_zeros, b2_zeros })
}

fn check_a(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("a", format!("must lie in (0, 1), got {a}")));
    }
    Ok(())
}

fn check_nonvanishing(f: &DiskFunction, a: f64) -> Result<()> {
    for x in [a, -a] {
        if !f.log_modulus(x).is_finite() {
            return Err(Error::VanishesAt(x));
        }
    }
    Ok(())
}

/// Results of the four factor estimates, all in log form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorBoundsReport {
    pub a: f64,
    pub log_outer_min: f64,
    /// `log |U(−a)U(a)|^{1/(1−a²)}`.
    pub log_outer_min_bound: f64,
    pub log_b1_min: f64,
    /// `log |B₁(a)B₁(−a)|^{2/(1−a²)}`.
    pub log_b1_min_bound: f64,
    pub n: usize,
    /// `3/(1−a²)·log(1/|B₂(a)B₂(−a)|)`.
    pub n_bound: f64,
    /// `log(max|R| / min|R|)` on `[−a, a]`.
    pub log_r_ratio: f64,
    /// `N·log(2/(1−a))`.
    pub log_r_ratio_bound: f64,
    /// `N·log((1+a)/(1−a))`, the sharper intermediate bound.
    pub log_r_ratio_sharp_bound: f64,
    pub outer_pass: bool,
    pub b1_pass: bool,
    pub n_pass: bool,
    pub r_pass: bool,
    pub all_pass: bool,
}

impl FactorBoundsReport {
    pub fn rows(&self) -> Vec<CheckRow> {
        vec![
            CheckRow::lower("remez.outer_min", self.log_outer_min, self.log_outer_min_bound, self.outer_pass),
            CheckRow::lower("remez.b1_min", self.log_b1_min, self.log_b1_min_bound, self.b1_pass),
            CheckRow::new("remez.zero_count", self.n as f64, self.n_bound, self.n_pass),
            CheckRow::new("remez.r_ratio", self.log_r_ratio, self.log_r_ratio_bound, self.r_pass),
        ]
    }
}

/// Minimum of `g` on `[−a, a]` via grid and refinement.
fn minimize_on(g: impl Fn(f64) -> f64, a: f64) -> f64 {
    -maximize(|x| -g(x), Interval { lo: -a, hi: a }, FACTOR_GRID).1
}

/// The outer, `B₁`, zero-count and `R` estimates on `[−a, a]`.
pub fn factor_bounds(f: &DiskFunction, a: f64) -> Result<FactorBoundsReport> {
    check_a(a)?;
    check_nonvanishing(f, a)?;
    let fac = factorize(f, a)?;
    let slack = log_slack();
    let q = 1.0 - a * a;

    let log_outer_min = minimize_on(|x| f.log_outer(x), a);
    let log_outer_min_bound = (f.log_outer(a) + f.log_outer(-a)) / q;

    let log_b1_min = minimize_on(|x| log_blaschke(&fac.b1_zeros, x), a);
    let log_b1_min_bound = 2.0 * (log_blaschke(&fac.b1_zeros, a) + log_blaschke(&fac.b1_zeros, -a)) / q;

    let n = fac.n();
    let n_bound = -3.0 / q * (log_blaschke(&fac.b2_zeros, a) + log_blaschke(&fac.b2_zeros, -a));

    // log|R(x)| = −Σ log|1 − x ζ̄|
    let log_r = |x: f64| -> f64 {
        -fac.b2_zeros
            .iter()
            .map(|z| (Complex64::new(1.0, 0.0) - z.conj() * x).norm().ln())
            .sum::<f64>()
    };
    let log_r_max = maximize(log_r, Interval { lo: -a, hi: a }, FACTOR_GRID).1;
    let log_r_min = minimize_on(log_r, a);
    let log_r_ratio = log_r_max - log_r_min;
    let log_r_ratio_bound = n as f64 * (2.0 / (1.0 - a)).ln();
    let log_r_ratio_sharp_bound = n as f64 * ((1.0 + a) / (1.0 - a)).ln();

    let outer_pass = log_outer_min >= log_outer_min_bound - slack;
    let b1_pass = log_b1_min >= log_b1_min_bound - slack;
    let n_pass = n as f64 <= n_bound * (1.0 + REL_TOL);
    let r_pass = log_r_ratio <= log_r_ratio_bound + slack;
    Ok(FactorBoundsReport {
        a,
        log_outer_min,
        log_outer_min_bound,
        log_b1_min,
        log_b1_min_bound,
        n,
        n_bound,
        log_r_ratio,
        log_r_ratio_bound,
        log_r_ratio_sharp_bound,
        outer_pass,
        b1_pass,
        n_pass,
        r_pass,
        all_pass: outer_pass && b1_pass && n_pass && r_pass,
    })
}

/// `sup_E g` with `SET_GRID` points per component plus refinement.
fn sup_on_set(g: impl Fn(f64) -> f64 + Copy, e: &IntervalSet) -> f64 {
    e.components()
        .iter()
        .map(|c| maximize(g, *c, SET_GRID).1)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_set(interval: &Interval, e: &IntervalSet) -> Result<()> {
    if e.is_empty() || e.measure() <= 0.0 {
        return Err(Error::EmptySet);
    }
    if !e.is_subset_of(interval) {
        return Err(Error::domain("E", "must be contained in I"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRemezReport {
    pub degree: usize,
    /// `max_I |P|`.
    pub lhs: f64,
    pub log_lhs: f64,
    pub sup_e: f64,
    /// `log((4|I|/|E|)^N · sup_E|P|)`.
    pub log_rhs: f64,
    pub pass: bool,
}

/// `max_I|P| ≤ (4|I|/|E|)^N sup_E|P|` with `N = deg P`.
pub fn classical_remez_check(p: &UniPoly, interval: Interval, e: &IntervalSet) -> Result<ClassicalRemezReport> {
    check_set(&interval, e)?;
    let degree = p.degree();
    let log_abs = |x: f64| p.eval_real(x).norm().ln();
    let log_lhs = maximize(log_abs, interval, INTERVAL_GRID).1;
    let log_sup_e = sup_on_set(log_abs, e);
    let log_rhs = degree as f64 * (4.0 * interval.len() / e.measure()).ln() + log_sup_e;
    let pass = p.is_zero() || log_lhs <= log_rhs + log_slack();
    Ok(ClassicalRemezReport {
        degree,
        lhs: log_lhs.exp(),
        log_lhs,
        sup_e: log_sup_e.exp(),
        log_rhs,
        pass,
    })
}

impl ClassicalRemezReport {
    /// Log-scale row; `log 0` is reported as `−f64::MAX`.
    pub fn row(&self) -> CheckRow {
        let finite = |v: f64| v.max(-f64::MAX);
        CheckRow::new("remez.classical", finite(self.log_lhs), finite(self.log_rhs), self.pass).n(self.degree)
    }
}

/// `3/(1−a)·log(1/|f(a)f(−a)|)`, the exponent produced by the factor estimates.
pub fn sigma_for(f: &DiskFunction, a: f64) -> Result<f64> {
    check_a(a)?;
    check_nonvanishing(f, a)?;
    Ok(-3.0 / (1.0 - a) * (f.log_modulus(a) + f.log_modulus(-a)))
}

/// `3/(1−a)·log(1/|f(a)|)`, the exponent in the symmetric statement of the
/// lemma; reported alongside [`sigma_for`].
pub fn sigma_symmetric(f: &DiskFunction, a: f64) -> Result<f64> {
    check_a(a)?;
    check_nonvanishing(f, a)?;
    Ok(-3.0 / (1.0 - a) * f.log_modulus(a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemezReport {
    pub a: f64,
    pub max_i: f64,
    pub sup_e: f64,
    pub log_max_i: f64,
    pub log_sup_e: f64,
    pub sigma: f64,
    pub sigma_symmetric: f64,
    /// `log((8|I|/|E|)^σ · sup_E|f|)`.
    pub log_bound: f64,
    /// `log_bound − log_max_i`.
    pub margin: f64,
    pub pass: bool,
}

impl RemezReport {
    pub fn row(&self) -> CheckRow {
        CheckRow::new("remez.lemma", self.log_max_i, self.log_bound, self.pass)
    }
}

/// `max_I|f| ≤ (8|I|/|E|)^σ sup_E|f|` for `I ⊂ [−a, a]`, `E ⊂ I`.
pub fn remez_check(f: &DiskFunction, a: f64, interval: Interval, e: &IntervalSet) -> Result<RemezReport> {
    check_a(a)?;
    if interval.lo < -a || interval.hi > a {
        return Err(Error::domain("I", format!("[{}, {}] is not inside [-{a}, {a}]", interval.lo, interval.hi)));
    }
    check_set(&interval, e)?;
    let sigma = sigma_for(f, a)?;
    let sigma_symmetric = sigma_symmetric(f, a)?;
    let log_abs = |x: f64| f.log_modulus(x);
    let log_max_i = maximize(log_abs, interval, INTERVAL_GRID).1;
    let log_sup_e = sup_on_set(log_abs, e);
    let log_bound = sigma * (8.0 * interval.len() / e.measure()).ln() + log_sup_e;
    Ok(RemezReport {
        a,
        max_i: log_max_i.exp(),
        sup_e: log_sup_e.exp(),
        log_max_i,
        log_sup_e,
        sigma,
        sigma_symmetric,
        log_bound,
        margin: log_bound - log_max_i,
        pass: log_max_i <= log_bound + log_slack(),
    })
}

/// A random sub-interval `I ⊂ [−a, a]` and a union `E ⊂ I` of at most
/// `max_components` intervals with `|E| ≥ min_fraction·|I|`.
pub fn random_interval_and_set<R: Rng + ?Sized>(
    rng: &mut R,
    a: f64,
    max_components: usize,
    min_fraction: f64,
) -> (Interval, IntervalSet) {
    let mut ends = [rng.random_range(-a..a), rng.random_range(-a..a)];
    ends.sort_by(f64::total_cmp);
    if ends[1] - ends[0] < 1e-3 * a {
        ends = [-a, a];
    }
    let interval = Interval { lo: ends[0], hi: ends[1] };
    loop {
        let k = rng.random_range(1..=max_components.max(1));
        let parts: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let mut p = [rng.random_range(interval.lo..interval.hi), rng.random_range(interval.lo..interval.hi)];
                p.sort_by(f64::total_cmp);
                (p[0], p[1])
            })
            .collect();
        let e = IntervalSet::from_intervals(parts).expect("sorted endpoints");
        if e.measure() >= min_fraction * interval.len() {
            return (interval, e);
        }
    }
}

/// Text form: `zero re im`, `atom theta weight` and `const theta` lines.
impl FromStr for DiskFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut zeros = Vec::new();
        let mut atoms = Vec::new();
        let mut phase = 0.0;
        for (i, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| Error::Parse { line: i + 1, reason };
            let mut tokens = line.split_whitespace();
            let kind = tokens.next().unwrap_or_default();
            let nums = tokens
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(e.to_string()))?;
            match (kind, nums.as_slice()) {
                ("zero", &[re, im]) => zeros.push(Complex64::new(re, im)),
                ("atom", &[theta, weight]) => atoms.push(Atom { theta, weight }),
                ("const", &[theta]) => phase = theta,
                _ => return Err(bad(format!("unrecognized line `{line}`"))),
            }
        }
        DiskFunction::new(zeros, atoms, phase)
    }
}

impl fmt::Display for DiskFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for z in &self.zeros {
            writeln!(f, "zero {:?} {:?}", z.re, z.im)?;
        }
        for a in &self.atoms {
            writeln!(f, "atom {:?} {:?}", a.theta, a.weight)?;
        }
        writeln!(f, "const {:?}", self.phase)
    }
}
