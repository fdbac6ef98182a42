//! The radial change of variables `T(z) = φ(Σ z_j²)·z` with
//! `φ(ζ) = (A − ζ)/(1 − Aζ)`, `A = 1 − δ³`, and numerical checks of its
//! geometric properties on the real ball `B(0, r₀)`, `r₀² = 1 − 3δ − δ³`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ComplexVec;
use crate::error::{Error, Result};
use crate::report::CheckRow;
use crate::rng;

/// Minimum admissible `|1 − Aζ|`.
pub const POLE_TOL: f64 = 1e-15;
/// Tolerance for algebraic identities and sampled midpoint defects.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for grid maxima.
pub const GRID_TOL: f64 = 1e-6;
/// Rounding allowance when testing the sign of second differences.
pub const SECOND_DIFF_TOL: f64 = 1e-13;
/// Margin by which a test ball must sit inside `T B(0, r₀)`.
pub const CONTAINMENT_MARGIN: f64 = 1e-9;
/// Upper bound on the curvature of images of lines.
pub const CURVATURE_BOUND: f64 = 25.0 / 27.0;
/// Upper bound on `|φ′|/φ` over `[0, R₀]`.
pub const LOG_DERIVATIVE_BOUND: f64 = 1.0 / 30.0;

/// Chunk size for randomized map checks.
const CHECK_CHUNK: usize = 1 << 12;

/// The parameter `δ`; everything else is derived from it on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    delta: f64,
}

impl MapParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 0.125) {
            return Err(Error::domain("delta", format!("must lie in (0, 1/8], got {delta}")));
        }
        Ok(MapParams { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `A = 1 − δ³`.
    #[allow(non_snake_case)]
    pub fn A(&self) -> f64 {
        1.0 - self.delta.powi(3)
    }

    /// `a = √A`, the radius of the real sphere sent to the origin.
    pub fn a(&self) -> f64 {
        self.A().sqrt()
    }

    /// `R₀ = 1 − 3δ − δ³`.
    #[allow(non_snake_case)]
    pub fn R0(&self) -> f64 {
        1.0 - 3.0 * self.delta - self.delta.powi(3)
    }

    /// `r₀ = √R₀`.
    pub fn r0(&self) -> f64 {
        self.R0().sqrt()
    }

    /// `φ` on real arguments.
    pub fn phi_real(&self, r2: f64) -> f64 {
        let a = self.A();
        (a - r2) / (-a).mul_add(r2, 1.0)
    }

    /// `φ′(R) = −(1 − A²)/(1 − AR)²`.
    pub fn phi_prime(&self, r2: f64) -> f64 {
        let a = self.A();
        -(1.0 - a * a) / (1.0 - a * r2).powi(2)
    }

    /// `φ″(R) = −2A(1 − A²)/(1 − AR)³`.
    pub fn phi_second(&self, r2: f64) -> f64 {
        let a = self.A();
        -2.0 * a * (1.0 - a * a) / (1.0 - a * r2).powi(3)
    }

    /// Radial profile `g(r) = r·φ(r²)`: `|T(x)| = g(|x|)`.
    pub fn radial(&self, r: f64) -> f64 {
        r * self.phi_real(r * r)
    }

    /// Radius of `T B(0, r₀)`, i.e. `r₀·φ(R₀)`.
    pub fn image_radius(&self) -> f64 {
        self.radial(self.r0())
    }

    /// Inverse of the radial profile on `[0, r₀]` by bisection.
    pub fn radial_inverse(&self, s: f64) -> Result<f64> {
        let top = self.image_radius();
        if !(0.0..=top).contains(&s) {
            return Err(Error::domain("radius", format!("{s} is outside [0, {top}]")));
        }
        let (mut lo, mut hi) = (0.0, self.r0());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.radial(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// `φ(ζ) = (A − ζ)/(1 − Aζ)`.
pub fn phi(zeta: Complex64, params: &MapParams) -> Result<Complex64> {
    let a = params.A();
    let den = Complex64::new(1.0, 0.0) - zeta * a;
    if den.norm() <= POLE_TOL {
        return Err(Error::PoleProximity(den.norm()));
    }
    Ok((Complex64::new(a, 0.0) - zeta) / den)
}

/// `T(z) = φ(Σ z_j²)·z` on the complex unit ball.
pub fn apply_t(z: &ComplexVec, params: &MapParams) -> Result<ComplexVec> {
    if z.norm() >= 1.0 {
        return Err(Error::domain("z", format!("|z| = {} is outside the unit ball", z.norm())));
    }
    Ok(z.scale(phi(z.square_sum(), params)?))
}

/// `T(x) = φ(|x|²)·x` for a real point.
pub fn apply_t_real(x: &[f64], params: &MapParams) -> Vec<f64> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let s = params.phi_real(r2);
    x.iter().map(|v| v * s).collect()
}

/// `|det D_x T| = (φ(R) + 2Rφ′(R))·φ(R)^{n−1}` at `|x| = r`, `R = r²`.
pub fn jacobian_t(r: f64, n: usize, params: &MapParams) -> Result<f64> {
    check_radius(r, params)?;
    if n == 0 {
        return Err(Error::domain("n", "dimension must be positive"));
    }
    Ok(log_jacobian(r, n, params).exp())
}

/// `log |det D_x T|`; no range checks.
pub fn log_jacobian(r: f64, n: usize, params: &MapParams) -> f64 {
    let big_r = r * r;
    let p = params.phi_real(big_r);
    let radial_factor = p + 2.0 * big_r * params.phi_prime(big_r);
    radial_factor.ln() + (n as f64 - 1.0) * p.ln()
}

fn check_radius(r: f64, params: &MapParams) -> Result<()> {
    let r0 = params.r0();
    if !(0.0..=r0).contains(&r) {
        return Err(Error::domain("r", format!("{r} is outside [0, r0 = {r0}]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfileReport {
    pub delta: f64,
    pub grid_points: usize,
    /// Smallest forward difference of `r·φ(r²)` on the grid.
    pub min_derivative: f64,
    pub image_radius: f64,
    pub image_radius_bound: f64,
    /// Largest `|φ′(R)|/φ(R)` on the grid.
    pub max_log_derivative: f64,
    pub pass: bool,
}

impl RadialProfileReport {
    pub fn rows(&self) -> Vec<CheckRow> {
        vec![
            CheckRow::lower("radial_min_forward_difference", self.min_derivative, 0.0, self.min_derivative > 0.0)
                .delta(self.delta),
            CheckRow::lower(
                "image_radius",
                self.image_radius,
                self.image_radius_bound,
                self.image_radius > self.image_radius_bound,
            )
            .delta(self.delta),
            CheckRow::new(
                "max_log_derivative",
                self.max_log_derivative,
                LOG_DERIVATIVE_BOUND,
                self.max_log_derivative <= LOG_DERIVATIVE_BOUND,
            )
            .delta(self.delta),
        ]
    }
}

/// Monotonicity of the radial profile, the image radius, and `|φ′|/φ`.
pub fn check_radial_profile(params: &MapParams, grid_points: usize) -> Result<RadialProfileReport> {
    if grid_points < 2 {
        return Err(Error::domain("grid_points", "need at least 2"));
    }
    let r0 = params.r0();
    let h = r0 / (grid_points - 1) as f64;
    let rs: Vec<f64> = (0..grid_points)
        .map(|i| if i == grid_points - 1 { r0 } else { h * i as f64 })
        .collect();
    let g: Vec<f64> = rs.iter().map(|&r| params.radial(r)).collect();
    let min_derivative = g.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let max_log_derivative = rs
        .iter()
        .map(|&r| {
            let big_r = r * r;
            params.phi_prime(big_r).abs() / params.phi_real(big_r)
        })
        .fold(0.0, f64::max);
    let image_radius = params.image_radius();
    let image_radius_bound = 1.0 - 2.0 * params.delta();
    Ok(RadialProfileReport {
        delta: params.delta(),
        grid_points,
        min_derivative,
        image_radius,
        image_radius_bound,
        max_log_derivative,
        pass: min_derivative > 0.0 && image_radius > image_radius_bound && max_log_derivative <= LOG_DERIVATIVE_BOUND,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogConcavityReport {
    pub delta: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Most negative `log J(mid) − ½(log J(x) + log J(y))`.
    pub worst_defect: f64,
    /// Largest second difference of `φ(r²)` on the radial grid.
    pub phi_max_second_difference: f64,
    /// Largest second difference of `φ(r²) + 2r²φ′(r²)` on the radial grid.
    pub radial_factor_max_second_difference: f64,
    pub pass: bool,
}

impl LogConcavityReport {
    pub fn rows(&self) -> Vec<CheckRow> {
        vec![
            CheckRow::lower("logconcavity_midpoint_defect", self.worst_defect, -IDENTITY_TOL, self.worst_defect >= -IDENTITY_TOL)
                .delta(self.delta)
                .n(self.n)
                .seed(self.seed),
            CheckRow::new(
                "phi_radial_concavity",
                self.phi_max_second_difference,
                SECOND_DIFF_TOL,
                self.phi_max_second_difference <= SECOND_DIFF_TOL,
            )
            .delta(self.delta),
            CheckRow::new(
                "radial_factor_concavity",
                self.radial_factor_max_second_difference,
                SECOND_DIFF_TOL,
                self.radial_factor_max_second_difference <= SECOND_DIFF_TOL,
            )
            .delta(self.delta),
        ]
    }
}

/// Points of the radial grid on `[0, r₀]` used for concavity checks.
pub const RADIAL_GRID: usize = 10_000;

fn max_second_difference(values: &[f64]) -> f64 {
    values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Midpoint log-concavity of the Jacobian on random pairs of `B(0, r₀) ⊂ ℝⁿ`
/// plus radial concavity of both Jacobian factors.
pub fn check_logconcavity(params: &MapParams, n: usize, trials: usize, seed: u64) -> Result<LogConcavityReport> {
    if n == 0 {
        return Err(Error::domain("n", "dimension must be positive"));
    }
    let r0 = params.r0();
    let label = rng::label("mobius.logconcavity");
    let worst_defect = rng::par_chunks(trials, CHECK_CHUNK, seed, label, |rng, range| {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut worst = f64::INFINITY;
        for _ in range {
            rng::unit_ball_point(rng, &mut x);
            rng::unit_ball_point(rng, &mut y);
            let (mut nx, mut ny, mut nm) = (0.0, 0.0, 0.0);
            for (a, b) in x.iter().zip(&y) {
                let (a, b) = (a * r0, b * r0);
                nx += a * a;
                ny += b * b;
                nm += 0.25 * (a + b) * (a + b);
            }
            let d = midpoint_defect(nx.sqrt(), ny.sqrt(), nm.sqrt(), n, params);
            worst = worst.min(d);
        }
        worst
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let worst_defect = if trials == 0 { 0.0 } else { worst_defect };

    let h = r0 / (RADIAL_GRID - 1) as f64;
    let (phis, factors): (Vec<f64>, Vec<f64>) = (0..RADIAL_GRID)
        .map(|i| {
            let r = if i == RADIAL_GRID - 1 { r0 } else { h * i as f64 };
            let big_r = r * r;
            let p = params.phi_real(big_r);
            (p, p + 2.0 * big_r * params.phi_prime(big_r))
        })
        .unzip();
    let phi_max_second_difference = max_second_difference(&phis);
    let radial_factor_max_second_difference = max_second_difference(&factors);
    Ok(LogConcavityReport {
        delta: params.delta(),
        n,
        trials,
        seed,
        worst_defect,
        phi_max_second_difference,
        radial_factor_max_second_difference,
        pass: worst_defect >= -IDENTITY_TOL
            && phi_max_second_difference <= SECOND_DIFF_TOL
            && radial_factor_max_second_difference <= SECOND_DIFF_TOL,
    })
}

/// `log J(mid) − ½(log J(x) + log J(y))` given the three radii.
pub fn midpoint_defect(rx: f64, ry: f64, rmid: f64, n: usize, params: &MapParams) -> f64 {
    log_jacobian(rmid, n, params) - 0.5 * (log_jacobian(rx, n, params) + log_jacobian(ry, n, params))
}

/// First and second derivatives at `t = 0` of the image `σ(t) = T(r·x + t·v)`
/// of a line, in the plane spanned by `x = e₁` and `v` at angle `alpha`.
pub fn line_image_derivatives(params: &MapParams, r: f64, alpha: f64) -> ([f64; 2], [f64; 2]) {
    let big_r = r * r;
    let p = params.phi_real(big_r);
    let dp = params.phi_prime(big_r);
    let ddp = params.phi_second(big_r);
    let (sa, ca) = alpha.sin_cos();
    let v = [ca, sa];
    let x = [1.0, 0.0];
    let d1 = [p * v[0] + 2.0 * big_r * dp * ca * x[0], p * v[1] + 2.0 * big_r * dp * ca * x[1]];
    let xc = 2.0 * r * dp + 4.0 * r * big_r * ddp * ca * ca;
    let vc = 4.0 * r * dp * ca;
    let d2 = [vc * v[0] + xc * x[0], vc * v[1] + xc * x[1]];
    (d1, d2)
}

/// `|σ′ × σ″| / |σ′|³` at `t = 0`.
pub fn line_image_curvature(params: &MapParams, r: f64, alpha: f64) -> f64 {
    let (d1, d2) = line_image_derivatives(params, r, alpha);
    let cross = (d1[0] * d2[1] - d1[1] * d2[0]).abs();
    let speed = (d1[0] * d1[0] + d1[1] * d1[1]).sqrt();
    cross / speed.powi(3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub delta: f64,
    pub r_grid: usize,
    pub alpha_grid: usize,
    pub max_curvature: f64,
    pub argmax_r: f64,
    pub argmax_alpha: f64,
    pub pass: bool,
}

impl CurvatureReport {
    pub fn rows(&self) -> Vec<CheckRow> {
        vec![CheckRow::new("max_curvature", self.max_curvature, CURVATURE_BOUND, self.pass).delta(self.delta)]
    }
}

/// Largest curvature of images of lines through points of `B(0, r₀)`.
pub fn check_curvature(params: &MapParams, r_grid: usize, alpha_grid: usize) -> Result<CurvatureReport> {
    if r_grid < 2 || alpha_grid < 2 {
        return Err(Error::domain("grid", "both grids need at least 2 points"));
    }
    let r0 = params.r0();
    let hr = r0 / (r_grid - 1) as f64;
    let ha = std::f64::consts::PI / (alpha_grid - 1) as f64;
    let (max_curvature, argmax_r, argmax_alpha) = (0..r_grid)
        .into_par_iter()
        .map(|i| {
            let r = if i == r_grid - 1 { r0 } else { hr * i as f64 };
            (0..alpha_grid)
                .map(|j| {
                    let alpha = ha * j as f64;
                    (line_image_curvature(params, r, alpha), r, alpha)
                })
                .fold((f64::NEG_INFINITY, 0.0, 0.0), pick_max)
        })
        .reduce(|| (f64::NEG_INFINITY, 0.0, 0.0), pick_max);
    Ok(CurvatureReport {
        delta: params.delta(),
        r_grid,
        alpha_grid,
        max_curvature,
        argmax_r,
        argmax_alpha,
        pass: max_curvature <= CURVATURE_BOUND + GRID_TOL,
    })
}

// ties resolved by position so the reduction is order independent
fn pick_max(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if (a.1, a.2) <= (b.1, b.2) {
                a
            } else {
                b
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageReport {
    pub delta: f64,
    pub center_norm: f64,
    pub radius: f64,
    pub trials: usize,
    pub seed: u64,
    pub violations: usize,
    pub pass: bool,
}

impl PreimageReport {
    pub fn rows(&self) -> Vec<CheckRow> {
        vec![CheckRow::new("preimage_convexity_violations", self.violations as f64, 0.0, self.pass)
            .delta(self.delta)
            .seed(self.seed)]
    }
}

/// Midpoint convexity of `S = B(0, r₀) ∩ T⁻¹B` for the planar ball `B` with
/// center `(center_norm, 0)` and the given radius.
///
/// Points of `S` are produced by pulling uniform and boundary points of `B`
/// back through the radial inverse of `T`.
pub fn check_preimage_convexity(
    params: &MapParams,
    center_norm: f64,
    radius: f64,
    trials: usize,
    seed: u64,
) -> Result<PreimageReport> {
    if !(center_norm >= 0.0 && radius >= 0.0) {
        return Err(Error::domain("ball", "center norm and radius must be nonnegative"));
    }
    let image = params.image_radius();
    if center_norm + radius >= image - CONTAINMENT_MARGIN {
        return Err(Error::domain(
            "ball",
            format!("B(c, {radius}) with |c| = {center_norm} is not inside T B(0, r0) of radius {image}"),
        ));
    }
    let r0 = params.r0();
    let center = [center_norm, 0.0];
    let pull_back = |y: [f64; 2]| -> [f64; 2] {
        let s = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if s == 0.0 {
            return [0.0, 0.0];
        }
        // s < image radius by the containment check
        let r = params.radial_inverse(s.min(image)).unwrap_or(r0);
        [y[0] * r / s, y[1] * r / s]
    };
    let label = rng::label("mobius.preimage");
    let violations: usize = rng::par_chunks(trials, CHECK_CHUNK, seed, label, |rng, range| {
        let mut bad = 0usize;
        for i in range {
            let mut pick = |on_boundary: bool| {
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let rho: f64 = if on_boundary { 1.0 } else { rng.random::<f64>().sqrt() };
                pull_back([center[0] + radius * rho * theta.cos(), center[1] + radius * rho * theta.sin()])
            };
            // alternate interior and boundary pairs
            let p = pick(i % 2 == 0);
            let q = pick(true);
            let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let tm = apply_t_real(&m, params);
            let dist = ((tm[0] - center[0]).powi(2) + (tm[1] - center[1]).powi(2)).sqrt();
            let inside_ball = (m[0] * m[0] + m[1] * m[1]).sqrt() <= r0 + 1e-12;
            if !(inside_ball && dist <= radius + 1e-12) {
                bad += 1;
            }
        }
        bad
    })
    .into_iter()
    .sum();
    Ok(PreimageReport {
        delta: params.delta(),
        center_norm,
        radius,
        trials,
        seed,
        violations,
        pass: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p8() -> MapParams {
        MapParams::new(0.125).unwrap()
    }

    #[test]
    fn params_domain() {
        assert!(MapParams::new(0.0).is_err());
        assert!(MapParams::new(0.13).is_err());
        let p = p8();
        assert!(0.0 < p.R0() && p.R0() < p.A() && p.A() < 1.0);
        assert!(p.r0() < p.a() && p.a() < 1.0);
        assert_eq!(p.R0(), 0.623046875);
    }

    #[test]
    fn phi_examples() {
        let p = p8();
        assert_eq!(phi(Complex64::new(0.0, 0.0), &p).unwrap(), Complex64::new(p.A(), 0.0));
        assert_eq!(phi(Complex64::new(p.A(), 0.0), &p).unwrap(), Complex64::new(0.0, 0.0));
        let v = phi(Complex64::new(p.R0(), 0.0), &p).unwrap();
        assert_abs_diff_eq!(v.re, 0.991617, epsilon = 1e-6);
        assert!(matches!(phi(Complex64::new(1.0 / p.A(), 0.0), &p), Err(Error::PoleProximity(_))));
    }

    #[test]
    fn t_examples() {
        let p = p8();
        let zero = ComplexVec::from_real(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(apply_t(&zero, &p).unwrap(), zero);
        // sphere |x| = a collapses to the origin
        let a = p.a();
        let x = ComplexVec::from_real(&[a / 2f64.sqrt(), a / 2f64.sqrt()]).unwrap();
        assert!(apply_t(&x, &p).unwrap().norm() < 1e-12);
        let x = ComplexVec::from_real(&[p.r0(), 0.0]).unwrap();
        assert_abs_diff_eq!(apply_t(&x, &p).unwrap().norm(), 0.78271, epsilon = 1e-5);
        let outside = ComplexVec::from_real(&[1.0, 0.0]).unwrap();
        assert!(apply_t(&outside, &p).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let p = p8();
        assert_abs_diff_eq!(jacobian_t(0.0, 3, &p).unwrap(), p.A().powi(3), epsilon = 1e-15);
        assert_abs_diff_eq!(jacobian_t(p.r0(), 3, &p).unwrap(), 0.94163, epsilon = 1e-5);
        let r = 0.4;
        let big_r = r * r;
        assert_abs_diff_eq!(
            jacobian_t(r, 1, &p).unwrap(),
            p.phi_real(big_r) + 2.0 * big_r * p.phi_prime(big_r),
            epsilon = 1e-15
        );
        assert!(jacobian_t(p.r0() + 1e-6, 3, &p).is_err());
    }

    #[test]
    fn jacobian_matches_finite_difference_determinant() {
        // independent route: det of a central-difference Jacobian of T in ℝ³
        let p = p8();
        let x = [0.3, -0.2, 0.4];
        let h = 1e-6;
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (tp, tm) = (apply_t_real(&xp, &p), apply_t_real(&xm, &p));
            for i in 0..3 {
                m[i][j] = (tp[i] - tm[i]) / (2.0 * h);
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_abs_diff_eq!(det.abs(), jacobian_t(r, 3, &p).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn jacobian_factorization() {
        let p = MapParams::new(1.0 / 16.0).unwrap();
        for &r in &[0.0, 0.3, 0.6, p.r0()] {
            for n in [1usize, 2, 7, 64] {
                let lhs = jacobian_t(r, n, &p).unwrap();
                let rhs = jacobian_t(r, 1, &p).unwrap() * p.phi_real(r * r).powi(n as i32 - 1);
                assert!(lhs > 0.0);
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn phi_is_an_involution() {
        for delta in [1.0 / 32.0, 1.0 / 16.0, 0.125] {
            let p = MapParams::new(delta).unwrap();
            for i in 0..=100 {
                let big_r = p.R0() * i as f64 / 100.0;
                let inner = p.phi_real(big_r);
                let err = (p.phi_real(inner) - big_r).abs();
                // rounding of the inner value is amplified by |φ′(inner)|
                let tol = 1e-12_f64.max(2.0 * f64::EPSILON * p.phi_prime(inner).abs());
                assert!(err <= tol, "delta {delta} R {big_r} err {err:e}");
            }
        }
    }

    #[test]
    fn radial_profile_examples() {
        let rep = check_radial_profile(&p8(), 10_000).unwrap();
        assert!(rep.pass);
        assert_abs_diff_eq!(rep.image_radius, 0.78271, epsilon = 1e-5);
        assert_abs_diff_eq!(rep.max_log_derivative, 0.0275, epsilon = 1e-4);
        let rep = check_radial_profile(&MapParams::new(1.0 / 32.0).unwrap(), 1000).unwrap();
        assert!(rep.pass && rep.image_radius > 0.9375);
        assert!(check_radial_profile(&p8(), 1).is_err());
    }

    #[test]
    fn radial_inverse_round_trip() {
        let p = p8();
        for i in 0..=20 {
            let r = p.r0() * i as f64 / 20.0;
            assert_abs_diff_eq!(p.radial_inverse(p.radial(r)).unwrap(), r, epsilon = 1e-14);
        }
    }

    #[test]
    fn midpoint_identity() {
        let p = p8();
        assert_eq!(midpoint_defect(0.4, 0.4, 0.4, 5, &p), 0.0);
    }

    #[test]
    fn radial_triple_second_difference() {
        let p = p8();
        let r0 = p.r0();
        let f = |r: f64| {
            let big_r = r * r;
            (p.phi_real(big_r) + 2.0 * big_r * p.phi_prime(big_r)).ln()
        };
        assert!(f(r0) - 2.0 * f(r0 / 2.0) + f(0.0) <= 0.0);
    }

    #[test]
    fn logconcavity_small_run() {
        let rep = check_logconcavity(&p8(), 2, 20_000, 7).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn curvature_formulas_match_finite_differences() {
        let p = p8();
        for &(r, alpha) in &[(0.3, 0.7), (0.7, 2.0), (p.r0(), 1.1)] {
            let (d1, d2) = line_image_derivatives(&p, r, alpha);
            let sigma = |t: f64| apply_t_real(&[r + t * alpha.cos(), t * alpha.sin()], &p);
            let h = 1e-4;
            let (sp, s0, sm) = (sigma(h), sigma(0.0), sigma(-h));
            for k in 0..2 {
                assert_abs_diff_eq!((sp[k] - sm[k]) / (2.0 * h), d1[k], epsilon = 1e-7);
                assert_abs_diff_eq!((sp[k] - 2.0 * s0[k] + sm[k]) / (h * h), d2[k], epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn curvature_degenerate_cases() {
        let p = p8();
        assert_abs_diff_eq!(line_image_curvature(&p, 0.5, 0.0), 0.0, epsilon = 1e-15);
        assert_eq!(line_image_curvature(&p, 0.0, 1.0), 0.0);
        let rep = check_curvature(&p, 200, 90).unwrap();
        assert!(rep.pass && rep.max_curvature < CURVATURE_BOUND);
    }

    #[test]
    fn preimage_examples() {
        let p = p8();
        assert!(check_preimage_convexity(&p, 0.0, 0.5, 20_000, 1).unwrap().pass);
        assert!(check_preimage_convexity(&p, 0.5, 0.28, 20_000, 2).unwrap().pass);
        assert!(check_preimage_convexity(&p, 0.3, 0.0, 1_000, 3).unwrap().pass);
        assert!(check_preimage_convexity(&p, 0.5, 0.3, 10, 4).is_err());
    }
}
