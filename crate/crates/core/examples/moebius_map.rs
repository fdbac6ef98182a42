//! The radial change of variables T(z) = phi(sum z_j^2) z and the checks of
//! its geometry: monotone profile, image radius, log-concave Jacobian,
//! curvature of line images and convexity of ball pre-images.

use sublevel_lab::mobius::{self, MapParams};

fn main() -> sublevel_lab::Result<()> {
    for delta in [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0] {
        let p = MapParams::new(delta)?;
        println!("delta = {delta}: A = {:.6}, R0 = {:.6}, r0 = {:.6}", p.A(), p.R0(), p.r0());
        println!("  J(r0) in n = 3      {:.5}", mobius::jacobian_t(p.r0(), 3, &p)?);

        let radial = mobius::check_radial_profile(&p, 10_000)?;
        let curv = mobius::check_curvature(&p, 2_000, 180)?;
        let logc = mobius::check_logconcavity(&p, 8, 20_000, 1)?;
        let image = p.image_radius();
        let pre = mobius::check_preimage_convexity(&p, 0.64 * image, 0.35 * image, 5_000, 2)?;
        for row in radial.rows().iter().chain(&curv.rows()).chain(&logc.rows()).chain(&pre.rows()) {
            println!("  {:<34} {:>12.6} vs {:>10.6}  {}", row.check, row.statistic, row.bound, row.pass);
        }
    }
    Ok(())
}
