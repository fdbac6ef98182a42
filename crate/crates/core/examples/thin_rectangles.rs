//! Thin rectangles: |F| on V_delta tends to the law of |eta Q(t)| on [0, 1/4],
//! and the exponent a rectangle demands is measured against the theorem's.

use sublevel_lab::counterexample::{self, DeltaUnits, EtaRule, QSpec, QuadratureOracle};

fn main() -> sublevel_lab::Result<()> {
    let t16 = counterexample::build_with_rule(QSpec::Chebyshev { m: 16 }, EtaRule::DiskFraction(0.1))?;
    println!("T16: eta = {:.3e}, |F(0,0)| = {:.6}, theorem sigma = {:.1}", t16.eta, t16.f00, t16.sigma_theorem);
    for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
        let ks = counterexample::ks_rect_vs_limit(&t16, delta, DeltaUnits::Relative, 200_000, 9)?;
        println!("  delta = {delta:e}: KS distance to the limit law {:.4}", ks.distance);
    }

    // higher powers put more of [0, 1/4] near the zero of Q
    let family = [QSpec::power(1), QSpec::power(2), QSpec::power(4)];
    let rule = EtaRule::DiskFraction(0.1);
    let rep = counterexample::growth_experiment(&family, rule, 1e-3, DeltaUnits::Relative, &[2.0], 400_000, 4)?;
    for (name, row) in rep.family.iter().zip(&rep.rows) {
        println!("{name:>6}: sigma_eff = {:.4}, theorem sigma = {:.1}", row.sigma_eff, row.sigma_theorem);
    }

    let cf = counterexample::build_f(QSpec::zero(), 0.1)?;
    let oracle = QuadratureOracle::new(&cf, 1e-3);
    println!(
        "Q = 0: quadrature sigma_eff {:.5}, uniform closed form {:.5}",
        oracle.sigma_eff(2.0),
        counterexample::uniform_sigma_eff(2.0)
    );
    Ok(())
}
