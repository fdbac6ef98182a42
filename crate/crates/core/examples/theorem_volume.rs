//! Monte Carlo distribution of |F| on a real ball and the distributional
//! bounds, for one template lifted to several dimensions. The exponent
//! depends only on epsilon and |F(0)|, so it is the same in every row.

use sublevel_lab::volume::{self, BallSpec, PolyTemplate};

fn main() -> sublevel_lab::Result<()> {
    let template = PolyTemplate::RandomCubic { seed: 2 };
    let lambdas = [1.5, 2.0, 4.0, 8.0];
    for n in [1, 2, 4, 8, 16] {
        let f = template.build(n)?;
        let spec = BallSpec::centered(n, 0.75, 0.25)?;
        let rep = volume::theorem_check(&f, &spec, &lambdas, 200_000, 42)?;
        let ok = rep.rows.iter().all(|r| r.pass);
        println!(
            "n = {n:>2}: sigma = {:.3}, M = {:.5} +/- {:.1e}, Vol{{|F| >= M}} = {:.4}, all rows pass: {ok}",
            rep.params.sigma, rep.m.m, rep.m.std_err, rep.m_level_fraction
        );
    }

    let f = template.build(4)?;
    let spec = BallSpec::centered(4, 0.75, 0.25)?;
    let summary = volume::summarize(&f, &spec, 200_000, 42)?;
    // at c = M the right side is exp(-lambda), the tail bound
    let c = summary.quantile_m()?.m;
    for row in volume::strong_form_check_on(&f, &spec, &summary, c, &lambdas)? {
        println!("strong form at c = M, lambda = {}: {:.3e} <= {:.3e}", row.lambda, row.lhs, row.rhs);
    }
    Ok(())
}
