//! JSON-configured experiments and their report files.
//!
//! A run writes `manifest.json` (tool version, master seed and the fully
//! resolved configuration), `report.json` (every check row, a summary and
//! per-section details) and `report.csv` (the section's table). Feeding a
//! manifest back in as the config reproduces the report byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::MultiPoly;
use crate::counterexample::{self, DeltaUnits, EtaRule, QSpec};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::kls::{self, AxisBox, ConvexPolygon, KlsInstance, KlsInstance2D, LogQuadratic2D};
use crate::mobius::{self, MapParams};
use crate::remez::{self, DiskFunction};
use crate::report::{self, CheckRow};
use crate::rng;
use crate::univariate::UniPoly;
use crate::volume::{self, BallSpec, PolyTemplate};
use crate::Complex64;

pub const TOOL: &str = "sublevel-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Theorem,
    LemmaA,
    LemmaB,
    LemmaC,
    Counterexample,
    All,
}

impl Subcommand {
    pub const SECTIONS: [Subcommand; 5] = [
        Subcommand::LemmaC,
        Subcommand::LemmaA,
        Subcommand::LemmaB,
        Subcommand::Theorem,
        Subcommand::Counterexample,
    ];

    /// Prefix shared by the check names a section emits.
    pub fn row_prefix(self) -> &'static str {
        match self {
            Subcommand::Theorem => "theorem.",
            Subcommand::LemmaA => "kls",
            Subcommand::LemmaB => "remez.",
            Subcommand::LemmaC => "mobius.",
            Subcommand::Counterexample => "counterexample.",
            Subcommand::All => "",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Theorem => "theorem",
            Subcommand::LemmaA => "lemma-a",
            Subcommand::LemmaB => "lemma-b",
            Subcommand::LemmaC => "lemma-c",
            Subcommand::Counterexample => "counterexample",
            Subcommand::All => "all",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Subcommand::All]
            .into_iter()
            .chain(Subcommand::SECTIONS)
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand `{s}`")))
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_count(field: &str, v: usize, min: usize) -> Result<()> {
    if v < min {
        return Err(invalid(format!("{field} must be ≥ {min}")));
    }
    Ok(())
}

fn check_range(field: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(v >= lo && v <= hi) {
        return Err(invalid(format!("{field} must lie in [{lo}, {hi}], got {v}")));
    }
    Ok(())
}

fn check_lambdas(field: &str, lambdas: &[f64], min: f64) -> Result<()> {
    if lambdas.is_empty() {
        return Err(invalid(format!("{field} must not be empty")));
    }
    for &l in lambdas {
        if !(l >= min && l.is_finite()) {
            return Err(invalid(format!("{field} entries must be ≥ {min}, got {l}")));
        }
    }
    Ok(())
}

fn interval_of(field: &str, v: [f64; 2]) -> Result<Interval> {
    if !(v[0] <= v[1]) {
        return Err(invalid(format!("{field} must satisfy lo ≤ hi")));
    }
    Ok(Interval { lo: v[0], hi: v[1] })
}

fn set_of(field: &str, parts: &[[f64; 2]]) -> Result<IntervalSet> {
    IntervalSet::from_intervals(parts.iter().map(|p| (p[0], p[1]))).map_err(|e| invalid(format!("{field}: {e}")))
}

// ---------------------------------------------------------------- theorem

/// A test function: a dimension-generic template or a polynomial literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionInput {
    /// Evaluated in every dimension of `dims`.
    Template(PolyTemplate),
    /// `re im α₁ … αₙ` lines; evaluated in its own dimension only.
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremInputs {
    pub functions: Vec<FunctionInput>,
    pub dims: Vec<usize>,
    pub epsilon: f64,
    /// Radius of the centred ball; `1 − ε` when absent.
    #[serde(default)]
    pub radius: Option<f64>,
    pub lambdas: Vec<f64>,
    pub samples: usize,
    /// Superlevel probabilities `q`; the strong form is checked at the `c`
    /// with `Vol{|F| ≥ c} ≈ q`, and always at `c = M`.
    pub strong_levels: Vec<f64>,
}

impl Default for TheoremInputs {
    fn default() -> Self {
        TheoremInputs {
            functions: vec![
                FunctionInput::Template(PolyTemplate::HalfShift),
                FunctionInput::Template(PolyTemplate::RandomQuadratic { seed: 1 }),
                FunctionInput::Template(PolyTemplate::RandomCubic { seed: 2 }),
            ],
            dims: vec![1, 2, 4, 8],
            epsilon: 0.25,
            radius: None,
            lambdas: vec![1.5, 2.0, 4.0, 8.0],
            samples: 1_000_000,
            strong_levels: vec![0.5, 0.1],
        }
    }
}

impl TheoremInputs {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(invalid("theorem.epsilon must be positive"));
        }
        if self.epsilon > 0.25 {
            return Err(invalid("theorem.epsilon must be ≤ 0.25"));
        }
        if let Some(r) = self.radius {
            check_range("theorem.radius", r, 0.0, 1.0 - self.epsilon)?;
        }
        if self.functions.is_empty() {
            return Err(invalid("theorem.functions must not be empty"));
        }
        if self.functions.iter().any(|f| matches!(f, FunctionInput::Template(_))) && self.dims.is_empty() {
            return Err(invalid("theorem.dims must not be empty"));
        }
        if self.dims.contains(&0) {
            return Err(invalid("theorem.dims entries must be ≥ 1"));
        }
        check_lambdas("theorem.lambdas", &self.lambdas, 1.0)?;
        check_count("theorem.samples", self.samples, 3)?;
        for &q in &self.strong_levels {
            if !(q > 0.0 && q < 1.0) {
                return Err(invalid(format!("theorem.strong_levels entries must lie in (0, 1), got {q}")));
            }
        }
        for (i, f) in self.functions.iter().enumerate() {
            if let FunctionInput::Literal(text) = f {
                text.parse::<MultiPoly>().map_err(|e| invalid(format!("theorem.functions[{i}]: {e}")))?;
            }
        }
        Ok(())
    }
}

/// One line of the theorem CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCsvRow {
    pub function: String,
    pub n: usize,
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

impl TheoremCsvRow {
    fn new(function: &str, n: usize, r: volume::ThresholdRow) -> Self {
        TheoremCsvRow {
            function: function.into(),
            n,
            check: r.check,
            lambda: r.lambda,
            sigma: r.sigma,
            m: r.m,
            threshold_log: r.threshold_log,
            fraction: r.fraction,
            bound: r.bound,
            std_err: r.std_err,
            pass: r.pass,
        }
    }
}

fn theorem_section(inp: &TheoremInputs, seed: u64) -> Result<Section> {
    let mut cases: Vec<(String, MultiPoly)> = Vec::new();
    let mut templates: Vec<(String, Vec<usize>)> = Vec::new();
    for f in &inp.functions {
        match f {
            FunctionInput::Template(t) => {
                let mut idx = Vec::new();
                for &n in &inp.dims {
                    idx.push(cases.len());
                    cases.push((t.name(), t.build(n)?));
                }
                templates.push((t.name(), idx));
            }
            FunctionInput::Literal(text) => {
                let p: MultiPoly = text.parse()?;
                cases.push((format!("literal[{}]", cases.len()), p));
            }
        }
    }
    let radius = inp.radius.unwrap_or(1.0 - inp.epsilon);
    let label = rng::label("runner.theorem.case");
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    let mut details = Vec::new();
    let mut sigmas = Vec::new();
    for (i, (name, f)) in cases.iter().enumerate() {
        let spec = BallSpec::centered(f.dim(), radius, inp.epsilon)?;
        let case_seed = rng::derive_seed(seed, label, i as u64);
        let summary = volume::summarize(f, &spec, inp.samples, case_seed)?;
        let rep = volume::theorem_check_on(f, &spec, &summary, &inp.lambdas)?;
        let mut levels = vec![rep.m.m];
        levels.extend(
            inp.strong_levels
                .iter()
                .map(|q| crate::stats::order_statistic(&summary.sorted_moduli, 1.0 - q).1)
                .filter(|&c| c > 0.0),
        );
        let mut strong = Vec::new();
        for &c in &levels {
            strong.extend(volume::strong_form_check_on(f, &spec, &summary, c, &inp.lambdas)?);
        }
        let tag = |r: CheckRow| CheckRow { check: format!("{}@{name}", r.check), ..r };
        rows.extend(rep.rows().into_iter().map(tag));
        rows.extend(strong.iter().map(|s| tag(s.to_row(f.dim(), case_seed))));
        let mut table = rep.threshold_rows();
        table.extend(strong.iter().map(|s| s.threshold_row(rep.params.sigma, rep.m.m)));
        csv_rows.extend(table.into_iter().map(|row| TheoremCsvRow::new(name, f.dim(), row)));
        sigmas.push(rep.params.sigma);
        details.push(json!({ "function": name, "n": f.dim(), "report": rep, "strong": strong }));
    }
    // σ must not depend on the dimension
    for (name, idx) in &templates {
        let first = sigmas[idx[0]];
        let spread = idx.iter().map(|&i| (sigmas[i] - first).abs()).fold(0.0, f64::max);
        let same = idx.iter().all(|&i| sigmas[i].to_bits() == first.to_bits());
        rows.push(CheckRow::new(format!("theorem.sigma_dimension_spread@{name}"), spread, 0.0, same));
    }
    let csv = report::csv_string(
        &["function", "n", "check", "lambda", "sigma", "M", "threshold_log", "fraction", "bound", "std_err", "pass"],
        &csv_rows,
    )?;
    Ok(Section { rows, csv, details: json!(details) })
}

// ---------------------------------------------------------------- lemma A

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarInput {
    /// Mean of the standard Gaussian weight.
    pub gaussian_mean: [f64; 2],
    /// Counter-clockwise vertices of `S`.
    pub polygon: Vec<[f64; 2]>,
    /// Boxes `[[x_lo, y_lo], [x_hi, y_hi]]` whose union is `E`.
    pub boxes: Vec<[[f64; 2]; 2]>,
    pub lambda: f64,
    pub directions: usize,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaAInputs {
    pub random_instances: usize,
    pub max_pieces: usize,
    pub max_components: usize,
    pub lambda_range: [f64; 2],
    /// Grid points per component of `E` when locating `E_{λ,S}`.
    pub resolution: usize,
    /// Instance literals (`S`, `lambda`, `knot`, `E` lines).
    pub instances: Vec<String>,
    pub planar: Vec<PlanarInput>,
}

impl Default for LemmaAInputs {
    fn default() -> Self {
        LemmaAInputs {
            random_instances: 200,
            max_pieces: 8,
            max_components: 10,
            lambda_range: [1.1, 5.0],
            resolution: 1000,
            instances: vec![
                "S 0 1\nlambda 2\nknot 0 0\nknot 1 0\nE 0 0.9\n".into(),
                "S 0 1\nlambda 3\nknot 0 0\nknot 1 -1\nE 0 0.9\n".into(),
            ],
            planar: vec![PlanarInput {
                gaussian_mean: [0.0, 0.0],
                polygon: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                boxes: vec![[[0.0, 0.0], [0.5, 1.0]]],
                lambda: 2.0,
                directions: 16,
                grid: 200,
            }],
        }
    }
}

impl LemmaAInputs {
    fn validate(&self) -> Result<()> {
        check_count("lemma_a.max_pieces", self.max_pieces, 1)?;
        check_count("lemma_a.max_components", self.max_components, 1)?;
        check_count("lemma_a.resolution", self.resolution, 2)?;
        let [lo, hi] = self.lambda_range;
        if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid("lemma_a.lambda_range must satisfy 1 ≤ lo ≤ hi"));
        }
        for (i, text) in self.instances.iter().enumerate() {
            text.parse::<KlsInstance>().map_err(|e| invalid(format!("lemma_a.instances[{i}]: {e}")))?;
        }
        for (i, p) in self.planar.iter().enumerate() {
            planar_instance(p).map_err(|e| invalid(format!("lemma_a.planar[{i}]: {e}")))?;
            check_count(&format!("lemma_a.planar[{i}].directions"), p.directions, 1)?;
            check_count(&format!("lemma_a.planar[{i}].grid"), p.grid, 2)?;
        }
        Ok(())
    }
}

fn planar_instance(p: &PlanarInput) -> Result<KlsInstance2D> {
    let s = ConvexPolygon::new(p.polygon.clone())?;
    let e = p.boxes.iter().map(|b| AxisBox { lo: b[0], hi: b[1] }).collect();
    KlsInstance2D::new(LogQuadratic2D::gaussian(p.gaussian_mean), s, e, p.lambda)
}

fn lemma_a_section(inp: &LemmaAInputs, seed: u64) -> Result<Section> {
    let label = rng::label("runner.lemma_a.random");
    let random: Vec<(u64, KlsInstance)> = (0..inp.random_instances)
        .map(|i| {
            let s = rng::derive_seed(seed, label, i as u64);
            let mut r = rng::stream(s, label, 0);
            (s, KlsInstance::random(&mut r, inp.max_pieces, inp.max_components, (inp.lambda_range[0], inp.lambda_range[1])))
        })
        .collect();
    let random_reports = random
        .par_iter()
        .map(|(_, inst)| kls::kls_check_1d(inst, inp.resolution))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (i, ((s, _), rep)) in random.iter().zip(&random_reports).enumerate() {
        rows.extend(rep.rows().into_iter().map(|r| CheckRow { check: format!("{}[random {i}]", r.check), ..r }.seed(*s)));
    }
    let mut explicit = Vec::new();
    for (i, text) in inp.instances.iter().enumerate() {
        let rep = kls::kls_check_1d(&text.parse()?, inp.resolution)?;
        rows.extend(rep.rows().into_iter().map(|r| CheckRow { check: format!("{}[instance {i}]", r.check), ..r }));
        explicit.push(rep);
    }
    let plabel = rng::label("runner.lemma_a.planar");
    let mut planar = Vec::new();
    for (i, p) in inp.planar.iter().enumerate() {
        let s = rng::derive_seed(seed, plabel, i as u64);
        let rep = kls::kls_check_2d(&planar_instance(p)?, p.directions, p.grid, s)?;
        rows.extend(rep.rows().into_iter().map(|r| CheckRow { check: format!("{}[planar {i}]", r.check), ..r }.seed(s)));
        planar.push(rep);
    }
    let csv = report::csv_string(&CHECK_HEADER, &rows)?;
    let details = json!({
        "random": { "instances": random_reports.len(), "passed": random_reports.iter().filter(|r| r.pass).count() },
        "instances": explicit.iter().map(|r| json!({ "lambda": r.lambda, "lhs": r.lhs, "lhs_outer": r.lhs_outer, "rhs": r.rhs, "pass": r.pass })).collect::<Vec<_>>(),
        "planar": planar,
    });
    Ok(Section { rows, csv, details })
}

// ---------------------------------------------------------------- lemma B

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemezInput {
    /// `zero re im` / `atom theta weight` / `const theta` lines.
    pub function: String,
    pub a: f64,
    pub interval: [f64; 2],
    pub e: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalInput {
    /// Complex coefficients `[re, im]`, constant term first.
    pub coeffs: Vec<[f64; 2]>,
    pub interval: [f64; 2],
    pub e: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaBInputs {
    pub random_instances: usize,
    pub max_zeros: usize,
    pub max_atoms: usize,
    pub a_range: [f64; 2],
    pub max_components: usize,
    /// Lower bound for `|E|/|I|` in random instances.
    pub min_fraction: f64,
    pub classical_instances: usize,
    pub classical_max_degree: usize,
    pub functions: Vec<RemezInput>,
    pub polynomials: Vec<ClassicalInput>,
}

impl Default for LemmaBInputs {
    fn default() -> Self {
        let mut x8 = vec![[0.0, 0.0]; 9];
        x8[8] = [1.0, 0.0];
        LemmaBInputs {
            random_instances: 500,
            max_zeros: 30,
            max_atoms: 5,
            a_range: [0.5, 0.99],
            max_components: 10,
            min_fraction: 0.01,
            classical_instances: 100,
            classical_max_degree: 20,
            functions: vec![RemezInput {
                function: "zero 0 0\n".into(),
                a: 0.9,
                interval: [0.0, 0.9],
                e: vec![[0.0, 0.09]],
            }],
            polynomials: vec![ClassicalInput { coeffs: x8, interval: [0.0, 1.0], e: vec![[0.0, 0.5]] }],
        }
    }
}

impl LemmaBInputs {
    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.a_range;
        if !(lo > 0.0 && hi >= lo && hi < 1.0) {
            return Err(invalid("lemma_b.a_range must satisfy 0 < lo ≤ hi < 1"));
        }
        check_count("lemma_b.max_components", self.max_components, 1)?;
        check_range("lemma_b.min_fraction", self.min_fraction, 0.0, 1.0)?;
        for (i, f) in self.functions.iter().enumerate() {
            f.function.parse::<DiskFunction>().map_err(|e| invalid(format!("lemma_b.functions[{i}].function: {e}")))?;
            check_range(&format!("lemma_b.functions[{i}].a"), f.a, f64::MIN_POSITIVE, 1.0 - 1e-12)?;
            interval_of(&format!("lemma_b.functions[{i}].interval"), f.interval)?;
            set_of(&format!("lemma_b.functions[{i}].e"), &f.e)?;
        }
        for (i, p) in self.polynomials.iter().enumerate() {
            interval_of(&format!("lemma_b.polynomials[{i}].interval"), p.interval)?;
            set_of(&format!("lemma_b.polynomials[{i}].e"), &p.e)?;
        }
        Ok(())
    }
}

fn random_classical<R: Rng + ?Sized>(r: &mut R, max_degree: usize, max_components: usize) -> (UniPoly, Interval, IntervalSet) {
    let degree = r.random_range(0..=max_degree);
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::new(r.sample(rand_distr::StandardNormal), r.sample(rand_distr::StandardNormal)))
        .collect();
    let (interval, e) = remez::random_interval_and_set(r, 1.0, max_components, 0.01);
    (UniPoly::new(coeffs), interval, e)
}

fn lemma_b_section(inp: &LemmaBInputs, seed: u64) -> Result<Section> {
    let label = rng::label("runner.lemma_b.random");
    let random: Vec<Vec<CheckRow>> = (0..inp.random_instances)
        .into_par_iter()
        .map(|i| -> Result<Vec<CheckRow>> {
            let s = rng::derive_seed(seed, label, i as u64);
            let mut r = rng::stream(s, label, 0);
            let f = DiskFunction::random(&mut r, inp.max_zeros, inp.max_atoms);
            let a = r.random_range(inp.a_range[0]..=inp.a_range[1]);
            let (interval, e) = remez::random_interval_and_set(&mut r, a, inp.max_components, inp.min_fraction);
            let mut rows = vec![remez::remez_check(&f, a, interval, &e)?.row()];
            rows.extend(remez::factor_bounds(&f, a)?.rows());
            Ok(rows.into_iter().map(|row| CheckRow { check: format!("{}[random {i}]", row.check), ..row }.seed(s)).collect())
        })
        .collect::<Result<_>>()?;
    let clabel = rng::label("runner.lemma_b.classical");
    let classical: Vec<CheckRow> = (0..inp.classical_instances)
        .into_par_iter()
        .map(|i| -> Result<CheckRow> {
            let s = rng::derive_seed(seed, clabel, i as u64);
            let mut r = rng::stream(s, clabel, 0);
            let (p, interval, e) = random_classical(&mut r, inp.classical_max_degree, inp.max_components);
            let row = remez::classical_remez_check(&p, interval, &e)?.row();
            Ok(CheckRow { check: format!("{}[random {i}]", row.check), ..row }.seed(s))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<CheckRow> = random.into_iter().flatten().collect();
    rows.extend(classical);
    let mut explicit = Vec::new();
    for (i, f) in inp.functions.iter().enumerate() {
        let func: DiskFunction = f.function.parse()?;
        let rep = remez::remez_check(&func, f.a, interval_of("interval", f.interval)?, &set_of("e", &f.e)?)?;
        let bounds = remez::factor_bounds(&func, f.a)?;
        let tag = |row: CheckRow| CheckRow { check: format!("{}[function {i}]", row.check), ..row };
        rows.push(tag(rep.row()));
        rows.extend(bounds.rows().into_iter().map(tag));
        explicit.push(json!({ "remez": rep, "factor_bounds": bounds }));
    }
    let mut polys = Vec::new();
    for (i, p) in inp.polynomials.iter().enumerate() {
        let poly = UniPoly::new(p.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect());
        let rep = remez::classical_remez_check(&poly, interval_of("interval", p.interval)?, &set_of("e", &p.e)?)?;
        let row = rep.row();
        rows.push(CheckRow { check: format!("{}[polynomial {i}]", row.check), ..row });
        polys.push(rep);
    }
    let csv = report::csv_string(&CHECK_HEADER, &rows)?;
    let details = json!({
        "random_instances": inp.random_instances,
        "classical_instances": inp.classical_instances,
        "functions": explicit,
        "polynomials": polys,
    });
    Ok(Section { rows, csv, details })
}

// ---------------------------------------------------------------- lemma C

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaCInputs {
    pub deltas: Vec<f64>,
    /// Dimensions for the Jacobian log-concavity check.
    pub dims: Vec<usize>,
    pub radial_grid: usize,
    pub r_grid: usize,
    pub alpha_grid: usize,
    pub logconcavity_trials: usize,
    /// Test balls `[center_norm, radius]` as fractions of the image radius.
    pub preimage_balls: Vec<[f64; 2]>,
    pub preimage_trials: usize,
}

impl Default for LemmaCInputs {
    fn default() -> Self {
        LemmaCInputs {
            deltas: vec![1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0],
            dims: vec![2, 8, 32],
            radial_grid: 10_000,
            r_grid: 10_000,
            alpha_grid: 360,
            logconcavity_trials: 100_000,
            preimage_balls: vec![[0.0, 0.6], [0.3, 0.6], [0.639, 0.359]],
            preimage_trials: 20_000,
        }
    }
}

impl LemmaCInputs {
    fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(invalid("lemma_c.deltas must not be empty"));
        }
        for &d in &self.deltas {
            if !(d > 0.0 && d <= 0.125) {
                return Err(invalid(format!("lemma_c.deltas entries must lie in (0, 0.125], got {d}")));
            }
        }
        if self.dims.contains(&0) {
            return Err(invalid("lemma_c.dims entries must be ≥ 1"));
        }
        check_count("lemma_c.radial_grid", self.radial_grid, 2)?;
        check_count("lemma_c.r_grid", self.r_grid, 2)?;
        check_count("lemma_c.alpha_grid", self.alpha_grid, 2)?;
        for (i, b) in self.preimage_balls.iter().enumerate() {
            if !(b[0] >= 0.0 && b[1] >= 0.0 && b[0] + b[1] < 1.0) {
                return Err(invalid(format!(
                    "lemma_c.preimage_balls[{i}] must have nonnegative entries summing to less than 1"
                )));
            }
        }
        Ok(())
    }
}

fn lemma_c_section(inp: &LemmaCInputs, seed: u64) -> Result<Section> {
    let mut rows = Vec::new();
    let mut details = Vec::new();
    let label = rng::label("runner.lemma_c");
    for (i, &delta) in inp.deltas.iter().enumerate() {
        let params = MapParams::new(delta)?;
        let radial = mobius::check_radial_profile(&params, inp.radial_grid)?;
        let curvature = mobius::check_curvature(&params, inp.r_grid, inp.alpha_grid)?;
        rows.extend(radial.rows());
        rows.extend(curvature.rows());
        let mut logc = Vec::new();
        for (j, &n) in inp.dims.iter().enumerate() {
            let s = rng::derive_seed(seed, label, (i * 1000 + j) as u64);
            let rep = mobius::check_logconcavity(&params, n, inp.logconcavity_trials, s)?;
            rows.extend(rep.rows());
            logc.push(rep);
        }
        let image = params.image_radius();
        let mut pre = Vec::new();
        for (j, b) in inp.preimage_balls.iter().enumerate() {
            let s = rng::derive_seed(seed, label, (i * 1000 + 500 + j) as u64);
            let rep = mobius::check_preimage_convexity(&params, b[0] * image, b[1] * image, inp.preimage_trials, s)?;
            rows.extend(rep.rows());
            pre.push(rep);
        }
        details.push(json!({ "delta": delta, "radial": radial, "curvature": curvature, "logconcavity": logc, "preimage": pre }));
    }
    let rows: Vec<CheckRow> = rows.into_iter().map(|r| CheckRow { check: format!("mobius.{}", r.check), ..r }).collect();
    let csv = report::csv_string(&CHECK_HEADER, &rows)?;
    Ok(Section { rows, csv, details: json!(details) })
}

// ---------------------------------------------------------------- counterexample

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KsInput {
    pub q: QSpec,
    pub delta: f64,
    pub samples: usize,
    pub max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleInputs {
    pub family: Vec<QSpec>,
    pub eta_rule: EtaRule,
    pub delta: f64,
    pub delta_units: DeltaUnits,
    pub lambdas: Vec<f64>,
    pub samples: usize,
    /// Required `σ_eff(next)/σ_eff(previous)` along the family, if any.
    #[serde(default)]
    pub min_growth_ratio: Option<f64>,
    pub ks: Vec<KsInput>,
}

impl Default for CounterexampleInputs {
    fn default() -> Self {
        CounterexampleInputs {
            family: [4, 8, 16, 32].map(|m| QSpec::Chebyshev { m }).to_vec(),
            eta_rule: EtaRule::DiskFraction(0.1),
            delta: 1e-3,
            delta_units: DeltaUnits::Relative,
            lambdas: vec![2.0],
            samples: 1_000_000,
            min_growth_ratio: Some(1.5),
            ks: vec![KsInput { q: QSpec::Chebyshev { m: 16 }, delta: 1e-4, samples: 1_000_000, max_distance: 0.01 }],
        }
    }
}

impl CounterexampleInputs {
    fn validate(&self) -> Result<()> {
        if self.family.is_empty() {
            return Err(invalid("counterexample.family must not be empty"));
        }
        check_range("counterexample.delta", self.delta, f64::MIN_POSITIVE, 0.5)?;
        check_lambdas("counterexample.lambdas", &self.lambdas, counterexample::LAMBDA_MIN)?;
        check_count("counterexample.samples", self.samples, 3)?;
        for (i, k) in self.ks.iter().enumerate() {
            check_range(&format!("counterexample.ks[{i}].delta"), k.delta, f64::MIN_POSITIVE, 0.5)?;
            check_count(&format!("counterexample.ks[{i}].samples"), k.samples, 1)?;
        }
        for (i, q) in self.family.iter().enumerate() {
            counterexample::build_with_rule(q.clone(), self.eta_rule)
                .map_err(|e| invalid(format!("counterexample.family[{i}]: {e}")))?;
        }
        Ok(())
    }
}

fn counterexample_section(inp: &CounterexampleInputs, seed: u64) -> Result<Section> {
    let growth = counterexample::growth_experiment(
        &inp.family,
        inp.eta_rule,
        inp.delta,
        inp.delta_units,
        &inp.lambdas,
        inp.samples,
        rng::derive_seed(seed, rng::label("runner.counterexample.growth"), 0),
    )?;
    let mut rows = growth.check_rows();
    if let Some(min_ratio) = inp.min_growth_ratio {
        for (lambda, ratios) in &growth.ratios {
            for (k, &r) in ratios.iter().enumerate() {
                let step = format!("{}/{}", growth.family[k + 1], growth.family[k]);
                rows.push(CheckRow::lower(
                    format!("counterexample.sigma_eff_ratio[{step},lambda={lambda}]"),
                    r,
                    min_ratio,
                    r >= min_ratio,
                ));
            }
        }
    }
    let klabel = rng::label("runner.counterexample.ks");
    let mut ks = Vec::new();
    for (i, k) in inp.ks.iter().enumerate() {
        let cf = counterexample::build_with_rule(k.q.clone(), inp.eta_rule)?;
        let s = rng::derive_seed(seed, klabel, i as u64);
        let rep = counterexample::ks_rect_vs_limit(&cf, k.delta, inp.delta_units, k.samples, s)?;
        rows.push(
            CheckRow::new(format!("counterexample.ks[{},delta={}]", rep.q, k.delta), rep.distance, k.max_distance, rep.distance <= k.max_distance)
                .delta(rep.physical_delta)
                .seed(s),
        );
        ks.push(rep);
    }
    let csv = report::csv_string(&["degQ", "F0", "sigma_theorem", "lambda", "sigma_eff", "N", "seed"], &growth.rows)?;
    Ok(Section { rows, csv, details: json!({ "growth": growth, "ks": ks }) })
}

// ---------------------------------------------------------------- config and run

/// One experiment. Missing sections take their documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When present it must agree with the subcommand being run.
    #[serde(default)]
    pub subcommand: Option<Subcommand>,
    pub seed: u64,
    /// Where reports go unless the caller overrides it. Never echoed into the
    /// manifest, so output location does not change report bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub theorem: Option<TheoremInputs>,
    #[serde(default)]
    pub lemma_a: Option<LemmaAInputs>,
    #[serde(default)]
    pub lemma_b: Option<LemmaBInputs>,
    #[serde(default)]
    pub lemma_c: Option<LemmaCInputs>,
    #[serde(default)]
    pub counterexample: Option<CounterexampleInputs>,
}

impl ExperimentConfig {
    /// Every section at its default, as used by [`suite`].
    pub fn defaults(seed: u64) -> Self {
        let cfg = ExperimentConfig {
            subcommand: None,
            seed,
            output_dir: None,
            theorem: None,
            lemma_a: None,
            lemma_b: None,
            lemma_c: None,
            counterexample: None,
        };
        ExperimentConfig { subcommand: None, ..cfg.resolved(Subcommand::All) }
    }

    /// Parse a config, or a manifest written by a previous run.
    pub fn from_json(text: &str) -> Result<Self> {
        if let Ok(m) = serde_json::from_str::<Manifest>(text) {
            return Ok(m.config);
        }
        serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The sections `cmd` runs, with defaults filled in and the rest removed.
    pub fn resolved(&self, cmd: Subcommand) -> Self {
        let wants = |s: Subcommand| cmd == Subcommand::All || cmd == s;
        ExperimentConfig {
            subcommand: Some(cmd),
            seed: self.seed,
            output_dir: None,
            theorem: wants(Subcommand::Theorem).then(|| self.theorem.clone().unwrap_or_default()),
            lemma_a: wants(Subcommand::LemmaA).then(|| self.lemma_a.clone().unwrap_or_default()),
            lemma_b: wants(Subcommand::LemmaB).then(|| self.lemma_b.clone().unwrap_or_default()),
            lemma_c: wants(Subcommand::LemmaC).then(|| self.lemma_c.clone().unwrap_or_default()),
            counterexample: wants(Subcommand::Counterexample).then(|| self.counterexample.clone().unwrap_or_default()),
        }
    }

    pub fn validate(&self, cmd: Subcommand) -> Result<()> {
        if let Some(own) = self.subcommand {
            if own != cmd {
                return Err(invalid(format!("subcommand is `{own}` in the config but `{cmd}` was requested")));
            }
        }
        let r = self.resolved(cmd);
        if let Some(t) = &r.theorem {
            t.validate()?;
        }
        if let Some(a) = &r.lemma_a {
            a.validate()?;
        }
        if let Some(b) = &r.lemma_b {
            b.validate()?;
        }
        if let Some(c) = &r.lemma_c {
            c.validate()?;
        }
        if let Some(x) = &r.counterexample {
            x.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: Subcommand,
    pub seed: u64,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub failing: Vec<String>,
    /// Smallest margin per check family (the name up to `[` or `@`).
    pub worst_margins: BTreeMap<String, f64>,
}

impl Summary {
    pub fn of(rows: &[CheckRow]) -> Self {
        let mut worst_margins: BTreeMap<String, f64> = BTreeMap::new();
        for r in rows {
            let family = r.check.split(['[', '@']).next().unwrap_or(&r.check).to_string();
            let m = worst_margins.entry(family).or_insert(f64::INFINITY);
            *m = m.min(r.margin);
        }
        let failing: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| r.check.clone()).collect();
        Summary { checks: rows.len(), passed: rows.len() - failing.len(), failed: failing.len(), failing, worst_margins }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub manifest: Manifest,
    pub rows: Vec<CheckRow>,
    pub summary: Summary,
    pub details: Value,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}

pub const CHECK_HEADER: [&str; 8] = ["check", "delta", "n", "seed", "statistic", "bound", "margin", "pass"];

struct Section {
    rows: Vec<CheckRow>,
    csv: String,
    details: Value,
}

fn section_seed(master: u64, cmd: Subcommand) -> u64 {
    rng::derive_seed(master, rng::label(cmd.name()), 0)
}

fn run_section(cfg: &ExperimentConfig, cmd: Subcommand) -> Result<Section> {
    let seed = section_seed(cfg.seed, cmd);
    let missing = || invalid(format!("section for `{cmd}` is missing"));
    match cmd {
        Subcommand::Theorem => theorem_section(cfg.theorem.as_ref().ok_or_else(missing)?, seed),
        Subcommand::LemmaA => lemma_a_section(cfg.lemma_a.as_ref().ok_or_else(missing)?, seed),
        Subcommand::LemmaB => lemma_b_section(cfg.lemma_b.as_ref().ok_or_else(missing)?, seed),
        Subcommand::LemmaC => lemma_c_section(cfg.lemma_c.as_ref().ok_or_else(missing)?, seed),
        Subcommand::Counterexample => counterexample_section(cfg.counterexample.as_ref().ok_or_else(missing)?, seed),
        Subcommand::All => unreachable!("`all` is split into sections"),
    }
}

fn manifest_for(cfg: &ExperimentConfig, cmd: Subcommand) -> Manifest {
    Manifest { tool: TOOL.into(), version: VERSION.into(), subcommand: cmd, seed: cfg.seed, config: cfg.resolved(cmd) }
}

fn write_files(dir: &Path, report: &ExperimentReport, csv: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    report::write_json(&dir.join("manifest.json"), &report.manifest)?;
    report::write_json(&dir.join("report.json"), report)?;
    std::fs::write(dir.join("report.csv"), csv)?;
    Ok(())
}

/// Validate, execute and (when `out` is given) write the report files.
///
/// `all` writes each section to a subdirectory named after it and a combined
/// report at the top level.
pub fn run(config: &ExperimentConfig, cmd: Subcommand, out: Option<&Path>) -> Result<ExperimentReport> {
    config.validate(cmd)?;
    let cfg = config.resolved(cmd);
    if cmd != Subcommand::All {
        let section = run_section(&cfg, cmd)?;
        let report = ExperimentReport {
            manifest: manifest_for(&cfg, cmd),
            summary: Summary::of(&section.rows),
            rows: section.rows,
            details: section.details,
        };
        if let Some(dir) = out {
            write_files(dir, &report, &section.csv)?;
        }
        return Ok(report);
    }
    let mut rows = Vec::new();
    let mut details = serde_json::Map::new();
    for part in Subcommand::SECTIONS {
        let section = run_section(&cfg, part)?;
        let sub = ExperimentReport {
            manifest: manifest_for(&cfg, part),
            summary: Summary::of(&section.rows),
            rows: section.rows,
            details: Value::Null,
        };
        if let Some(dir) = out {
            let sub = ExperimentReport { details: section.details.clone(), ..sub.clone() };
            write_files(&dir.join(part.name()), &sub, &section.csv)?;
        }
        details.insert(part.name().into(), json!({ "summary": sub.summary, "details": section.details }));
        rows.extend(sub.rows);
    }
    let report = ExperimentReport {
        manifest: manifest_for(&cfg, cmd),
        summary: Summary::of(&rows),
        details: Value::Object(details),
        rows,
    };
    if let Some(dir) = out {
        write_files(dir, &report, &report::csv_string(&CHECK_HEADER, &report.rows)?)?;
    }
    Ok(report)
}

/// [`run`] inside a dedicated pool of `threads` workers.
pub fn run_with_threads(config: &ExperimentConfig, cmd: Subcommand, out: Option<&Path>, threads: usize) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| invalid(format!("threads: {e}")))?;
    pool.install(|| run(config, cmd, out))
}

/// Verdict for one acceptance criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub pass: bool,
    pub checks: usize,
    pub failing: Vec<String>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} ({} checks", self.criterion, self.checks)?;
        if !self.failing.is_empty() {
            write!(f, "; failing: {}", self.failing.join(", "))?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub report: ExperimentReport,
    pub verdicts: Vec<Verdict>,
}

/// The full default suite at `seed`, one verdict per section.
pub fn suite(seed: u64, out: Option<&Path>) -> Result<SuiteReport> {
    let report = run(&ExperimentConfig::defaults(seed), Subcommand::All, out)?;
    let verdicts = Subcommand::SECTIONS
        .iter()
        .map(|part| {
            let prefix = part.row_prefix();
            let rows: Vec<&CheckRow> = report.rows.iter().filter(|r| r.check.starts_with(prefix)).collect();
            let failing: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| r.check.clone()).collect();
            Verdict { criterion: part.name().into(), pass: failing.is_empty() && !rows.is_empty(), checks: rows.len(), failing }
        })
        .collect();
    Ok(SuiteReport { report, verdicts })
}
