//! Drive the experiment runner from a JSON config and re-run from the
//! manifest it writes.

use sublevel_lab::runner::{self, ExperimentConfig, Subcommand};

fn main() -> sublevel_lab::Result<()> {
    let text = include_str!("../configs/theorem_half_shift.json");
    let cfg = ExperimentConfig::from_json(text)?;
    let out = std::env::temp_dir().join("sublevel-lab-config-run");
    let report = runner::run(&cfg, Subcommand::Theorem, Some(&out))?;
    println!("{} of {} checks passed; files in {}", report.summary.passed, report.summary.checks, out.display());
    for (family, margin) in &report.summary.worst_margins {
        println!("  worst margin {family:<34} {margin:.4}");
    }

    let again = runner::run(&ExperimentConfig::load(&out.join("manifest.json"))?, Subcommand::Theorem, None)?;
    println!("manifest re-run identical: {}", again == report);

    let bad = ExperimentConfig::from_json(r#"{"seed": 1, "theorem": {"functions": [{"template": {"kind": "half_shift"}}],
        "dims": [2], "epsilon": 0.3, "lambdas": [2], "samples": 1000, "strong_levels": []}}"#)?;
    if let Err(e) = runner::run(&bad, Subcommand::Theorem, None) {
        println!("rejected: {e}");
    }
    Ok(())
}
