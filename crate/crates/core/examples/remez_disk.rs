//! Bounded analytic functions on the disk as constant x Blaschke product x
//! atomic outer factor, the zero splitting and the Remez-type estimate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sublevel_lab::interval::{Interval, IntervalSet};
use sublevel_lab::remez::{self, DiskFunction};
use sublevel_lab::univariate::UniPoly;

fn main() -> sublevel_lab::Result<()> {
    let f: DiskFunction = "zero 0 0\nzero 0.3 0.8\natom 0 0.1\nconst 0.5".parse()?;
    let a = 0.9;
    let fac = remez::factorize(&f, a)?;
    println!("zeros split into {} near and {} far from [-a, a]", fac.n(), fac.b1_zeros.len());

    let bounds = remez::factor_bounds(&f, a)?;
    for row in bounds.rows() {
        println!("  {:<18} {:>10.4} vs {:>10.4}  {}", row.check, row.statistic, row.bound, row.pass);
    }

    let interval = Interval::new(-0.5, 0.8)?;
    let e = IntervalSet::from_intervals([(-0.4, -0.35), (0.1, 0.12)])?;
    let rep = remez::remez_check(&f, a, interval, &e)?;
    println!("max_I |f| = {:.4}, sup_E |f| = {:.4}", rep.max_i, rep.sup_e);
    println!("sigma = {:.3} (symmetric form {:.3}), log margin {:.2}", rep.sigma, rep.sigma_symmetric, rep.margin);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = DiskFunction::random(&mut rng, 30, 5);
    let (i, e) = remez::random_interval_and_set(&mut rng, 0.95, 10, 0.01);
    let rep = remez::remez_check(&g, 0.95, i, &e)?;
    println!("random instance: {} zeros, pass = {}, log margin {:.1}", g.zeros().len(), rep.pass, rep.margin);

    let x8 = UniPoly::from_real(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let c = remez::classical_remez_check(&x8, Interval::new(0.0, 1.0)?, &IntervalSet::single(0.0, 0.5)?)?;
    println!("x^8 on [0,1], E = [0,1/2]: max {:.3}, bound exp({:.3}) = 4^8", c.lhs, c.log_rhs);
    Ok(())
}
