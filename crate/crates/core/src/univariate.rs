//! Univariate polynomials with complex coefficients, and grid-plus-refinement
//! extremum search on real intervals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::interval::Interval;

/// `Σ c_k t^k`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniPoly {
    coeffs: Vec<Complex64>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        UniPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial `Π (t - r_k)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::constant(Complex64::new(1.0, 0.0)), |p, &r| {
            p.mul(&Self::new(vec![-r, Complex64::new(1.0, 0.0)]))
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degree of the highest nonzero coefficient; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    pub fn eval_real(&self, t: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        UniPoly::new(
            (0..n)
                .map(|k| *self.coeffs.get(k).unwrap_or(&zero) + *other.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn powi(&self, k: u32) -> UniPoly {
        (0..k).fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// `Σ |c_k|`, an upper bound for the modulus on the closed unit disk.
    pub fn coefficient_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximum of a real function on `[lo, hi]` located by a uniform grid followed
/// by golden-section refinement around the largest grid local maxima.
///
/// Returns `(argmax, max)`. The result never exceeds the true supremum, so
/// using it as a supremum on a set can only make an upper-bound check harder.
pub fn maximize<F>(f: F, interval: Interval, grid_points: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if interval.is_degenerate() {
        return (interval.lo, f(interval.lo));
    }
    let xs: Vec<f64> = interval.grid(grid_points).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (xs[0], ys[0]);
    for (&x, &y) in xs.iter().zip(&ys) {
        if y > best.1 {
            best = (x, y);
        }
    }
    // local maxima, strongest first
    let mut peaks: Vec<usize> = (0..xs.len())
        .filter(|&i| {
            let left = i == 0 || ys[i] >= ys[i - 1];
            let right = i + 1 == xs.len() || ys[i] >= ys[i + 1];
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| ys[b].total_cmp(&ys[a]));
    for &i in peaks.iter().take(4) {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(xs.len() - 1)];
        let (x, y) = golden_max(&f, a, b, 60);
        if y > best.1 {
            best = (x, y);
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
        if b - a < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
