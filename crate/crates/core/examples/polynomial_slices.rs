//! Multivariate polynomials on the complex unit ball: parsing, the l1 sup
//! certificate, normalization and restriction to a complex line.

use sublevel_lab::analytic::{admissible_halflength, ComplexVec, MultiPoly};
use sublevel_lab::Complex64;

fn main() -> sublevel_lab::Result<()> {
    // z1*z2 + 0.5*z1 + 0.5
    let p: MultiPoly = "1 0 1 1\n0.5 0 1 0\n0.5 0 0 0".parse()?;
    println!("p = {}", p.to_string().replace('\n', " | "));
    println!("l1 certificate        {:.4}", p.certify_sup());
    println!("sampled lower bound   {:.4}", p.sampled_sup_lower_bound(20_000, 7));

    let q = p.normalize()?;
    println!("after normalize       {:.4}", q.certify_sup());

    let z = ComplexVec::new(vec![Complex64::new(0.3, 0.1), Complex64::new(0.0, 0.5)])?;
    println!("q(0.3+0.1i, 0.5i)     {:.6}", q.eval(&z)?);

    let base = [0.1, 0.2];
    let dir = [1.0, 0.0];
    let h = admissible_halflength(&base, &dir);
    let slice = q.restrict_to_line(&base, &dir, 0.99 * h)?;
    let t = Complex64::new(0.2, -0.3);
    println!("halflength limit      {h:.6}");
    println!("slice(t) = {:.6}, q(base + t dir) = {:.6}", slice.eval(t), q.eval(&slice.point(t))?);

    match q.restrict_to_line(&[0.0, 0.0], &dir, 1.5) {
        Err(e) => println!("too long: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
