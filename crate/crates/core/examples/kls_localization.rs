//! The localization inequality for log-concave weights: the set E_lambda,S
//! of points of E that are dense in every interval around them, exactly in
//! one dimension and by sampled directions in the plane.

use sublevel_lab::interval::{Interval, IntervalSet};
use sublevel_lab::kls::{self, AxisBox, ConvexPolygon, KlsInstance, KlsInstance2D, LogConcaveDensity1D, LogQuadratic2D};

fn main() -> sublevel_lab::Result<()> {
    let s = Interval::new(0.0, 1.0)?;
    let e = IntervalSet::single(0.0, 0.9)?;
    for lambda in [1.5, 2.0, 4.0] {
        let el = kls::e_lambda_1d(&e, s, lambda, 1000)?;
        println!("lambda = {lambda}: E_lambda = {:?}", el.inner.components());
    }

    let flat = KlsInstance::new(s, e.clone(), 2.0, LogConcaveDensity1D::uniform(0.0, 1.0)?)?;
    let rep = kls::kls_check_1d(&flat, 1000)?;
    println!("uniform weight:     lhs {:.10} <= rhs {:.10}", rep.lhs, rep.rhs);

    let inst: KlsInstance = "S 0 1\nlambda 3\nknot 0 0\nknot 0.5 1\nknot 1 -2\nE 0 0.3\nE 0.4 0.95".parse()?;
    let rep = kls::kls_check_1d(&inst, 1000)?;
    println!("tent weight:        lhs {:.6} <= rhs {:.6}  {}", rep.lhs_outer, rep.rhs, rep.pass);

    let square = ConvexPolygon::rectangle([0.0, 0.0], [1.0, 1.0])?;
    let half = vec![AxisBox { lo: [0.0, 0.0], hi: [0.5, 1.0] }];
    let planar = KlsInstance2D::new(LogQuadratic2D::gaussian([0.0, 0.0]), square, half, 2.0)?;
    let rep = kls::kls_check_2d(&planar, 16, 200, 3)?;
    println!(
        "gaussian on square: lhs {:.4} <= rhs {:.4} (+/- {:.1e})  {}",
        rep.lhs_estimate, rep.rhs_estimate, rep.quadrature_error, rep.pass
    );
    Ok(())
}
