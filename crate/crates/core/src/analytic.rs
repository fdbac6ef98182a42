//! Multivariate complex polynomials on the complex unit ball of `ℂⁿ`:
//! evaluation, sup-norm certification, normalization and restriction to
//! complex lines.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::univariate::UniPoly;

/// Tolerance for unit-direction and ball-exit checks.
pub const GEOMETRY_TOL: f64 = 1e-12;

/// A point of `ℂⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("dim", "a point needs at least one coordinate"));
        }
        Ok(ComplexVec(entries))
    }

    pub fn from_real(x: &[f64]) -> Result<Self> {
        Self::new(x.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ z_j²` (no conjugation).
    pub fn square_sum(&self) -> Complex64 {
        self.0.iter().map(|z| z * z).sum()
    }

    pub fn scale(&self, s: Complex64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z * s).collect())
    }
}

/// One monomial `c · z^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: Complex64,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// `Σ_α c_α z^α` in `n` variables, with terms kept in ascending multi-index
/// order so evaluation is bit-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPoly {
    dim: usize,
    terms: Vec<Term>,
    sup_cert: f64,
}

impl MultiPoly {
    /// Repeated multi-indices are summed; zero coefficients are dropped.
    pub fn new<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        if dim == 0 {
            return Err(Error::domain("dim", "must be at least 1"));
        }
        let mut map: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: alpha.len() });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::domain("coefficient", "must be finite"));
            }
            *map.entry(alpha).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let terms: Vec<Term> = map
            .into_iter()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(exponents, coeff)| Term { exponents, coeff })
            .collect();
        let mut p = MultiPoly { dim, terms, sup_cert: 0.0 };
        p.sup_cert = p.certify_sup();
        Ok(p)
    }

    /// The coordinate function `z_{var}` (zero-based).
    pub fn coordinate(dim: usize, var: usize) -> Result<Self> {
        if var >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: var + 1 });
        }
        let mut alpha = vec![0; dim];
        alpha[var] = 1;
        Self::new(dim, [(alpha, Complex64::new(1.0, 0.0))])
    }

    pub fn constant(dim: usize, c: Complex64) -> Result<Self> {
        Self::new(dim, [(vec![0; dim], c)])
    }

    /// Embed a univariate polynomial as a function of coordinate `var`.
    pub fn from_univariate(q: &UniPoly, dim: usize, var: usize) -> Result<Self> {
        if var >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: var + 1 });
        }
        Self::new(
            dim,
            q.coeffs().iter().enumerate().map(|(k, &c)| {
                let mut alpha = vec![0; dim];
                alpha[var] = k as u32;
                (alpha, c)
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// The stored certificate: an upper bound for `sup |p|` on the complex unit ball.
    pub fn sup_cert(&self) -> f64 {
        self.sup_cert
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no term has positive degree.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.degree() == 0)
    }

    /// `p(0)`.
    pub fn constant_term(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.degree() == 0)
            .map_or(Complex64::new(0.0, 0.0), |t| t.coeff)
    }

    /// `Σ_α |c_α|`, valid as a bound for `sup |p|` on the complex unit ball
    /// because `|z^α| ≤ 1` there.
    pub fn certify_sup(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Scale so that the certificate equals one.
    pub fn normalize(&self) -> Result<MultiPoly> {
        let cert = self.certify_sup();
        if cert == 0.0 {
            return Err(Error::ZeroPolynomial);
        }
        Ok(self.scale(Complex64::new(1.0 / cert, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> MultiPoly {
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|t| Term { exponents: t.exponents.clone(), coeff: t.coeff * s })
            .filter(|t| t.coeff.norm_sqr() > 0.0)
            .collect();
        let mut p = MultiPoly { dim: self.dim, terms, sup_cert: 0.0 };
        p.sup_cert = p.certify_sup();
        p
    }

    /// The same function viewed in `new_dim ≥ dim` variables.
    pub fn lift(&self, new_dim: usize) -> Result<MultiPoly> {
        if new_dim < self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: new_dim });
        }
        Self::new(
            new_dim,
            self.terms.iter().map(|t| {
                let mut alpha = t.exponents.clone();
                alpha.resize(new_dim, 0);
                (alpha, t.coeff)
            }),
        )
    }

    pub fn eval(&self, z: &ComplexVec) -> Result<Complex64> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.dim() });
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = t.coeff;
            for (zj, &e) in z.entries().iter().zip(&t.exponents) {
                if e > 0 {
                    m *= zj.powu(e);
                }
            }
            sum += m;
        }
        Ok(sum)
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.evaluator().eval_real(x))
    }

    /// A precompiled evaluator for repeated evaluation at real points.
    pub fn evaluator(&self) -> RealEvaluator<'_> {
        RealEvaluator::new(self)
    }

    /// Restrict to the complex line `base + t·direction`, `|t| ≤ halflength`.
    pub fn restrict_to_line(&self, base: &[f64], direction: &[f64], halflength: f64) -> Result<LineSlice> {
        if base.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: base.len() });
        }
        if direction.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: direction.len() });
        }
        let dnorm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if (dnorm - 1.0).abs() > GEOMETRY_TOL {
            return Err(Error::NonUnitDirection(dnorm));
        }
        if !(halflength > 0.0) {
            return Err(Error::domain("halflength", "must be positive"));
        }
        let limit = admissible_halflength(base, direction);
        if !(halflength <= limit - GEOMETRY_TOL) {
            return Err(Error::SliceExitsBall { halflength, limit });
        }
        let mut poly = UniPoly::constant(Complex64::new(0.0, 0.0));
        for t in &self.terms {
            let mut m = UniPoly::constant(t.coeff);
            for ((&b, &d), &e) in base.iter().zip(direction).zip(&t.exponents) {
                if e > 0 {
                    let lin = UniPoly::new(vec![Complex64::new(b, 0.0), Complex64::new(d, 0.0)]);
                    m = m.mul(&lin.powi(e));
                }
            }
            poly = poly.add(&m);
        }
        Ok(LineSlice {
            base: base.to_vec(),
            direction: direction.to_vec(),
            halflength,
            poly,
        })
    }

    /// Largest `|p|` seen at `samples` random points of the complex unit
    /// sphere: a lower bound for the sup, reported next to the certificate.
    pub fn sampled_sup_lower_bound(&self, samples: usize, seed: u64) -> f64 {
        let label = rng::label("analytic.sampled_sup");
        let n = self.dim;
        rng::par_chunks(samples, rng::CHUNK_SIZE, seed, label, |r, range| {
            let mut best: f64 = 0.0;
            let mut g = vec![0.0; 2 * n];
            for _ in range {
                let mut s: f64 = 0.0;
                for v in g.iter_mut() {
                    *v = r.sample(StandardNormal);
                    s += *v * *v;
                }
                let s = s.sqrt();
                let z: Vec<Complex64> = (0..n).map(|j| Complex64::new(g[2 * j] / s, g[2 * j + 1] / s)).collect();
                let v = self.eval(&ComplexVec(z)).map(|c| c.norm()).unwrap_or(0.0);
                best = best.max(v);
            }
            best
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// A polynomial with independent complex Gaussian coefficients on every
    /// monomial of total degree `≤ max_degree` (unnormalized).
    pub fn random_dense<R: Rng + ?Sized>(dim: usize, max_degree: u32, rng: &mut R) -> Result<MultiPoly> {
        let terms = monomials(dim, max_degree)
            .into_iter()
            .map(|alpha| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                (alpha, Complex64::new(re, im))
            })
            .collect::<Vec<_>>();
        Self::new(dim, terms)
    }
}

/// Largest halflength `h` with `{base + t·direction : |t| ≤ h} ⊂ B_c(0,1)`.
pub fn admissible_halflength(base: &[f64], direction: &[f64]) -> f64 {
    let bd: f64 = base.iter().zip(direction).map(|(b, d)| b * d).sum();
    let bb: f64 = base.iter().map(|b| b * b).sum();
    let disc = 1.0 - bb + bd * bd;
    if disc <= 0.0 {
        return 0.0;
    }
    disc.sqrt() - bd.abs()
}

/// Every multi-index in `dim` variables with total degree `≤ max_degree`,
/// in ascending lexicographic order.
pub fn monomials(dim: usize, max_degree: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(dim, budget - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max_degree, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// Repeated real-point evaluation with a reusable power table.
#[derive(Debug, Clone)]
pub struct RealEvaluator<'a> {
    poly: &'a MultiPoly,
    max_exp: Vec<usize>,
    offsets: Vec<usize>,
    powers: Vec<f64>,
}

impl<'a> RealEvaluator<'a> {
    fn new(poly: &'a MultiPoly) -> Self {
        let mut max_exp = vec![0usize; poly.dim];
        for t in &poly.terms {
            for (m, &e) in max_exp.iter_mut().zip(&t.exponents) {
                *m = (*m).max(e as usize);
            }
        }
        let mut offsets = Vec::with_capacity(poly.dim);
        let mut total = 0;
        for &m in &max_exp {
            offsets.push(total);
            total += m + 1;
        }
        RealEvaluator { poly, max_exp, offsets, powers: vec![1.0; total] }
    }

    /// `p(x)` for a real point; the caller guarantees `x.len() == dim`.
    pub fn eval_real(&mut self, x: &[f64]) -> Complex64 {
        for (j, &xj) in x.iter().enumerate() {
            let off = self.offsets[j];
            let mut acc = 1.0;
            for k in 1..=self.max_exp[j] {
                acc *= xj;
                self.powers[off + k] = acc;
            }
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.poly.terms {
            let mut m = 1.0;
            for (j, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    m *= self.powers[self.offsets[j] + e as usize];
                }
            }
            sum += t.coeff * m;
        }
        sum
    }
}

/// `t ↦ p(base + t·direction)` together with the slice geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSlice {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub halflength: f64,
    pub poly: UniPoly,
}

impl LineSlice {
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.poly.eval(t)
    }

    /// The point `base + t·direction` of `ℂⁿ`.
    pub fn point(&self, t: Complex64) -> ComplexVec {
        ComplexVec(
            self.base
                .iter()
                .zip(&self.direction)
                .map(|(&b, &d)| Complex64::new(b, 0.0) + t * d)
                .collect(),
        )
    }
}

/// Text form: one `coeff_re coeff_im α₁ … αₙ` line per term; `#` comments.
impl FromStr for MultiPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut dim = None;
        let mut terms = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let bad = |reason: String| Error::Parse { line: i + 1, reason };
            if tokens.len() < 3 {
                return Err(bad("expected `re im α₁ … αₙ`".into()));
            }
            let re: f64 = tokens[0].parse().map_err(|e| bad(format!("{e}")))?;
            let im: f64 = tokens[1].parse().map_err(|e| bad(format!("{e}")))?;
            let alpha = tokens[2..]
                .iter()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("exponent: {e}")))?;
            match dim {
                None => dim = Some(alpha.len()),
                Some(d) if d != alpha.len() => {
                    return Err(bad(format!("expected {d} exponents, found {}", alpha.len())))
                }
                _ => {}
            }
            terms.push((alpha, Complex64::new(re, im)));
        }
        let dim = dim.ok_or(Error::Parse { line: 0, reason: "no terms".into() })?;
        MultiPoly::new(dim, terms)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            write!(f, "{:?} {:?}", t.coeff.re, t.coeff.im)?;
            for e in &t.exponents {
                write!(f, " {e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn half_shift(dim: usize) -> MultiPoly {
        let mut e1 = vec![0; dim];
        e1[0] = 1;
        MultiPoly::new(dim, [(e1, c(0.5, 0.0)), (vec![0; dim], c(0.5, 0.0))]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let z1 = MultiPoly::coordinate(2, 0).unwrap();
        let z = ComplexVec::new(vec![c(0.3, 0.0), c(0.0, 0.5)]).unwrap();
        assert_eq!(z1.eval(&z).unwrap(), c(0.3, 0.0));

        let one = MultiPoly::constant(2, c(1.0, 0.0)).unwrap();
        assert_eq!(one.eval(&z).unwrap(), c(1.0, 0.0));

        let p = half_shift(2);
        assert_eq!(p.eval(&ComplexVec::from_real(&[0.0, 0.0]).unwrap()).unwrap(), c(0.5, 0.0));
    }

    #[test]
    fn eval_dimension_mismatch() {
        let p = half_shift(2);
        let z = ComplexVec::from_real(&[0.1]).unwrap();
        assert_eq!(p.eval(&z), Err(Error::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn certify_examples() {
        assert_eq!(half_shift(2).certify_sup(), 1.0);
        // ½[2·0.1·1 + z₂ + ½] with Q ≡ 1
        let f = MultiPoly::new(2, [(vec![0, 0], c(0.35, 0.0)), (vec![0, 1], c(0.5, 0.0))]).unwrap();
        assert!((f.certify_sup() - 0.85).abs() < 1e-15);
        let zero = MultiPoly::new(3, Vec::<(Vec<u32>, Complex64)>::new()).unwrap();
        assert_eq!(zero.certify_sup(), 0.0);
    }

    #[test]
    fn normalize_examples() {
        let p = MultiPoly::new(1, [(vec![1], c(2.0, 0.0))]).unwrap().normalize().unwrap();
        assert_eq!(p, MultiPoly::coordinate(1, 0).unwrap());

        let p = MultiPoly::new(2, [(vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(1.0, 0.0))]).unwrap();
        let q = p.normalize().unwrap();
        assert_eq!(q.terms()[0].coeff, c(0.5, 0.0));
        assert_eq!(q.terms()[1].coeff, c(0.5, 0.0));

        assert_eq!(half_shift(3).normalize().unwrap(), half_shift(3));

        let zero = MultiPoly::new(1, Vec::<(Vec<u32>, Complex64)>::new()).unwrap();
        assert_eq!(zero.normalize(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn restrict_examples() {
        let z1 = MultiPoly::coordinate(2, 0).unwrap();
        let s = z1.restrict_to_line(&[0.0, 0.0], &[1.0, 0.0], 0.9).unwrap();
        assert_eq!(s.poly, UniPoly::from_real(&[0.0, 1.0]));

        // z₁z₂ from (0.1, 0.2) along e₁: 0.2(0.1 + t)
        let p = MultiPoly::new(2, [(vec![1, 1], c(1.0, 0.0))]).unwrap();
        let s = p.restrict_to_line(&[0.1, 0.2], &[1.0, 0.0], 0.5).unwrap();
        let expect = [0.02, 0.2];
        for (got, want) in s.poly.coeffs().iter().zip(expect) {
            assert!((got - c(want, 0.0)).norm() < 1e-16);
        }

        assert!(matches!(
            z1.restrict_to_line(&[0.0, 0.0], &[1.0, 0.0], 1.5),
            Err(Error::SliceExitsBall { .. })
        ));
        assert!(matches!(
            z1.restrict_to_line(&[0.0, 0.0], &[1.0, 0.1], 0.5),
            Err(Error::NonUnitDirection(_))
        ));
    }

    #[test]
    fn admissible_halflength_geometry() {
        assert!((admissible_halflength(&[0.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
        // base on the direction axis: 1 - |b|
        assert!((admissible_halflength(&[0.5, 0.0], &[1.0, 0.0]) - 0.5).abs() < 1e-15);
        // orthogonal: sqrt(1 - |b|²)
        assert!((admissible_halflength(&[0.6, 0.0], &[0.0, 1.0]) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn monomial_count() {
        // C(n + d, d)
        assert_eq!(monomials(8, 3).len(), 165);
        assert_eq!(monomials(1, 4).len(), 5);
        let m = monomials(2, 2);
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn literal_round_trip() {
        let p: MultiPoly = "# ½(z₁+1)\n0.5 0 1 0\n0.5 0 0 0\n".parse().unwrap();
        assert_eq!(p, half_shift(2));
        let back: MultiPoly = p.to_string().parse().unwrap();
        assert_eq!(back, p);
        assert!("0.5 0 1\n0.5 0 1 0".parse::<MultiPoly>().is_err());
        assert!("0.5 x 1".parse::<MultiPoly>().is_err());
    }

    #[test]
    fn sampled_lower_bound_below_certificate() {
        let p = half_shift(3);
        let lb = p.sampled_sup_lower_bound(2000, 5);
        assert!(lb <= p.certify_sup() + 1e-12);
        assert!(lb > 0.9);
    }

    #[test]
    fn constancy_flags() {
        assert!(MultiPoly::constant(2, c(0.3, 0.0)).unwrap().is_constant());
        assert!(!half_shift(2).is_constant());
        assert_eq!(half_shift(2).constant_term(), c(0.5, 0.0));
    }
}
