//! Exact polynomial algebra in the space-time variables `(x_1, ..., x_N, t)`.
//!
//! Polynomials are sparse maps from exponent vectors to arbitrary-precision
//! rationals. The grading that matters throughout is the *caloric* one, where
//! the time variable counts twice: `|a|_c = a_1 + ... + a_N + 2 a_{N+1}`.
//! Under this grading the heat operator `H = Δ - ∂_t` lowers degree by two
//! and `w = t - |x|^2` is homogeneous of degree two.

mod bareiss;
mod correction;
mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use bareiss::{determinant, solve_exact, ExactMatrix};
pub use correction::{cached_system, caloric_extension, solve_correction, CorrectionSystem};
pub use text::parse_polynomial;

/// Exponent vector `(a_1, ..., a_N, a_{N+1})`; the last slot is the power of `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// Builds a multi-index from `N + 1` exponents (spatial first, time last).
    pub fn new(exponents: Vec<u32>) -> Self {
        assert!(exponents.len() >= 2, "a multi-index needs N >= 1 spatial slots plus time");
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim + 1])
    }

    /// Spatial dimension `N`.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn spatial(&self) -> &[u32] {
        &self.0[..self.dim()]
    }

    pub fn time(&self) -> u32 {
        self.0[self.dim()]
    }

    pub fn caloric_height(&self) -> u32 {
        caloric_height(self)
    }

    fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Graded order: caloric height first, then lexicographic on exponents.
    pub fn graded_cmp(&self, other: &MultiIndex) -> Ordering {
        self.caloric_height()
            .cmp(&other.caloric_height())
            .then_with(|| self.0.cmp(&other.0))
    }

    /// All multi-indices of dimension `dim` with caloric height `<= m`, in graded order.
    pub fn graded_basis(dim: usize, m: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0u32; dim + 1];
        enumerate_bounded(&mut current, 0, m, &mut out);
        out.sort_by(|a, b| a.graded_cmp(b));
        out
    }
}

fn enumerate_bounded(current: &mut Vec<u32>, slot: usize, budget: u32, out: &mut Vec<MultiIndex>) {
    if slot == current.len() {
        out.push(MultiIndex(current.clone()));
        return;
    }
    let weight = if slot + 1 == current.len() { 2 } else { 1 };
    let mut e = 0;
    while e * weight <= budget {
        current[slot] = e;
        enumerate_bounded(current, slot + 1, budget - e * weight, out);
        e += 1;
    }
    current[slot] = 0;
}

/// `a_1 + ... + a_N + 2 a_{N+1}`.
pub fn caloric_height(alpha: &MultiIndex) -> u32 {
    let n = alpha.dim();
    alpha.0[..n].iter().sum::<u32>() + 2 * alpha.0[n]
}

/// Caloric degree; the zero polynomial sits at minus infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaloricDegree {
    NegInfinity,
    Finite(u32),
}

impl CaloricDegree {
    pub fn finite(self) -> Option<u32> {
        match self {
            CaloricDegree::NegInfinity => None,
            CaloricDegree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for CaloricDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaloricDegree::NegInfinity => f.write_str("-inf"),
            CaloricDegree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Sparse polynomial in `(x_1, ..., x_N, t)` with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is polynomial
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "spatial dimension must be at least 1");
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        Self::monomial(c, MultiIndex::zero(dim))
    }

    pub fn monomial(c: BigRational, alpha: MultiIndex) -> Self {
        let mut p = Polynomial::zero(alpha.dim());
        if !c.is_zero() {
            p.terms.insert(alpha, c);
        }
        p
    }

    /// The spatial coordinate `x_j` (0-based `j`).
    pub fn x(dim: usize, j: usize) -> Self {
        assert!(j < dim);
        let mut e = vec![0; dim + 1];
        e[j] = 1;
        Self::monomial(BigRational::one(), MultiIndex(e))
    }

    pub fn t(dim: usize) -> Self {
        let mut e = vec![0; dim + 1];
        e[dim] = 1;
        Self::monomial(BigRational::one(), MultiIndex(e))
    }

    /// `w(x, t) = t - |x|^2`, which vanishes exactly on the paraboloid `t = |x|^2`.
    pub fn w(dim: usize) -> Self {
        let mut p = Self::t(dim);
        for j in 0..dim {
            let mut e = vec![0; dim + 1];
            e[j] = 2;
            p.add_term(MultiIndex(e), -BigRational::one());
        }
        p
    }

    /// Builds from `(coefficient, exponents)` pairs, merging duplicates.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BigRational, Vec<u32>)>,
    {
        let mut p = Polynomial::zero(dim);
        for (c, e) in terms {
            if e.len() != dim + 1 {
                return Err(Error::DimensionMismatch { expected: dim + 1, got: e.len() });
            }
            p.add_term(MultiIndex(e), c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> BigRational {
        self.terms.get(alpha).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> CaloricDegree {
        self.terms
            .keys()
            .map(caloric_height)
            .max()
            .map_or(CaloricDegree::NegInfinity, CaloricDegree::Finite)
    }

    /// Adds `c * z^alpha`, dropping the entry if it cancels.
    pub fn add_term(&mut self, alpha: MultiIndex, c: BigRational) {
        debug_assert_eq!(alpha.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, v)| (a.clone(), v * c)).collect(),
        }
    }

    fn check_dim(&self, other: &Polynomial) {
        assert_eq!(self.dim, other.dim, "polynomials of different spatial dimension");
    }

    /// Partial derivative with respect to variable `var` (`var == N` is `t`).
    pub fn derivative(&self, var: usize) -> Polynomial {
        assert!(var <= self.dim);
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in &self.terms {
            let e = alpha.0[var];
            if e == 0 {
                continue;
            }
            let mut beta = alpha.0.clone();
            beta[var] -= 1;
            out.add_term(MultiIndex(beta), c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Spatial Laplacian `Σ_j ∂²/∂x_j²`.
    pub fn laplacian(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in &self.terms {
            for j in 0..self.dim {
                let e = alpha.0[j];
                if e < 2 {
                    continue;
                }
                let mut beta = alpha.0.clone();
                beta[j] -= 2;
                let factor = BigInt::from(e) * BigInt::from(e - 1);
                out.add_term(MultiIndex(beta), c * BigRational::from_integer(factor));
            }
        }
        out
    }

    /// Exact evaluation at a rational point of length `N + 1`.
    pub fn eval_rational(&self, z: &[BigRational]) -> Result<BigRational> {
        if z.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, got: z.len() });
        }
        let mut acc = BigRational::zero();
        for (alpha, c) in &self.terms {
            let mut term = c.clone();
            for (zi, &e) in z.iter().zip(&alpha.0) {
                if e > 0 {
                    term *= num_traits::pow(zi.clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Floating-point evaluation at a point of length `N + 1`.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, got: z.len() });
        }
        Ok(self.to_float().eval(z))
    }

    /// Floating-point copy for repeated evaluation.
    pub fn to_float(&self) -> FloatPolynomial {
        FloatPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.0.clone(), c.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        }
    }

    /// Substitutes `t <- |x|^2`. The result has no `t` dependence and is zero
    /// exactly when `w` divides `self`.
    pub fn substitute_paraboloid(&self) -> Polynomial {
        let dim = self.dim;
        let mut norm_sq = Polynomial::zero(dim);
        for j in 0..dim {
            let mut e = vec![0; dim + 1];
            e[j] = 2;
            norm_sq.add_term(MultiIndex(e), BigRational::one());
        }
        let mut powers = vec![Polynomial::constant(dim, BigRational::one())];
        let mut out = Polynomial::zero(dim);
        for (alpha, c) in &self.terms {
            let k = alpha.time() as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap() * &norm_sq;
                powers.push(next);
            }
            let mut spatial = alpha.0.clone();
            spatial[dim] = 0;
            let mono = Polynomial::monomial(c.clone(), MultiIndex(spatial));
            out = out + &(&mono * &powers[k]);
        }
        out
    }

    /// Returns `p(s·x + b, s²·t + c)`. Parabolic scalings and translations map
    /// caloric polynomials to caloric polynomials.
    pub fn parabolic_substitute(&self, scale: &BigRational, shift_x: &[BigRational], shift_t: &BigRational) -> Polynomial {
        let dim = self.dim;
        assert_eq!(shift_x.len(), dim);
        let scale_t = scale * scale;
        // Affine images of each variable, and their powers on demand.
        let mut images: Vec<Polynomial> = (0..dim)
            .map(|j| Polynomial::x(dim, j).scale(scale) + &Polynomial::constant(dim, shift_x[j].clone()))
            .collect();
        images.push(Polynomial::t(dim).scale(&scale_t) + &Polynomial::constant(dim, shift_t.clone()));
        let mut power_cache: Vec<Vec<Polynomial>> = vec![vec![Polynomial::constant(dim, BigRational::one())]; dim + 1];

        let mut out = Polynomial::zero(dim);
        for (alpha, c) in &self.terms {
            let mut term = Polynomial::constant(dim, c.clone());
            for (var, &e) in alpha.0.iter().enumerate() {
                let cache = &mut power_cache[var];
                while cache.len() <= e as usize {
                    let next = cache.last().unwrap() * &images[var];
                    cache.push(next);
                }
                if e > 0 {
                    term = &term * &cache[e as usize];
                }
            }
            out = out + &term;
        }
        images.clear();
        out
    }
}

/// Applies the heat operator `H = Δ - ∂_t` exactly.
pub fn apply_heat(p: &Polynomial) -> Polynomial {
    p.laplacian() - &p.derivative(p.dim)
}

/// Applies the formal adjoint `H* = Δ + ∂_t` exactly.
pub fn apply_adjoint_heat(p: &Polynomial) -> Polynomial {
    p.laplacian() + &p.derivative(p.dim)
}

/// Evaluates `p` at a floating-point point `(x_1, ..., x_N, t)`.
pub fn evaluate(p: &Polynomial, z: &[f64]) -> Result<f64> {
    p.eval(z)
}

/// Substitutes `t <- |x|^2` into `p`.
pub fn substitute_paraboloid(p: &Polynomial) -> Polynomial {
    p.substitute_paraboloid()
}

impl Add<&Polynomial> for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: &Polynomial) -> Polynomial {
        self.check_dim(rhs);
        for (a, c) in &rhs.terms {
            self.add_term(a.clone(), c.clone());
        }
        self
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        self + &rhs
    }
}

impl Sub<&Polynomial> for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: &Polynomial) -> Polynomial {
        self.check_dim(rhs);
        for (a, c) in &rhs.terms {
            self.add_term(a.clone(), -c.clone());
        }
        self
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        self - &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(mut self) -> Polynomial {
        for v in self.terms.values_mut() {
            *v = -v.clone();
        }
        self
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.check_dim(rhs);
        let mut out = Polynomial::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_polynomial(self))
    }
}

impl std::str::FromStr for Polynomial {
    type Err = Error;
    /// Parses with the spatial dimension inferred from the highest `x` index (at least 1).
    fn from_str(s: &str) -> Result<Self> {
        text::parse_polynomial_infer(s)
    }
}

/// Floating-point mirror of a [`Polynomial`] for fast repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPolynomial {
    dim: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl FloatPolynomial {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates at `(x_1, ..., x_N, t)`; the caller guarantees the length.
    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim + 1);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(z)
                    .fold(*c, |acc, (&k, &v)| if k == 0 { acc } else { acc * v.powi(k as i32) })
            })
            .sum()
    }

    pub fn eval_split(&self, x: &[f64], t: f64) -> f64 {
        let mut z = Vec::with_capacity(x.len() + 1);
        z.extend_from_slice(x);
        z.push(t);
        self.eval(&z)
    }
}

/// Exact rational conversion of a finite float (no rounding).
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

/// Continued-fraction snap: the simplest rational within `tol` of `v` whose
/// denominator does not exceed `max_den`, if any.
pub fn snap_rational(v: f64, tol: f64, max_den: i64) -> Option<BigRational> {
    if !v.is_finite() {
        return None;
    }
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    let mut x = v;
    for _ in 0..40 {
        let a = x.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a_i = a as i128;
        let h_next = a_i * h + h_prev;
        let k_next = a_i * k + k_prev;
        if k_next > max_den as i128 {
            return None;
        }
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
        if ((h as f64) / (k as f64) - v).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h), BigInt::from(k)));
        }
        let frac = x - a;
        if frac.abs() < 1e-300 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn poly(dim: usize, s: &str) -> Polynomial {
        parse_polynomial(s, dim).unwrap()
    }

    #[test]
    fn caloric_height_examples() {
        assert_eq!(caloric_height(&MultiIndex::new(vec![2, 0])), 2);
        assert_eq!(caloric_height(&MultiIndex::new(vec![1, 0, 1])), 3);
        for n in 1..4 {
            assert_eq!(caloric_height(&MultiIndex::zero(n)), 0);
        }
    }

    #[test]
    fn heat_operator_examples() {
        assert_eq!(apply_heat(&Polynomial::w(1)), Polynomial::constant(1, q(-3, 1)));
        for n in 1..=4 {
            assert_eq!(
                apply_heat(&Polynomial::w(n)),
                Polynomial::constant(n, q(-(2 * n as i64 + 1), 1))
            );
            assert!(apply_heat(&poly(n, "x1^2 + 2*t")).is_zero());
            assert!(apply_heat(&Polynomial::constant(n, q(7, 3))).is_zero());
        }
    }

    #[test]
    fn adjoint_heat_examples() {
        assert_eq!(apply_adjoint_heat(&Polynomial::t(1)), Polynomial::constant(1, q(1, 1)));
        assert_eq!(apply_adjoint_heat(&poly(1, "x^2")), Polynomial::constant(1, q(2, 1)));
        assert!(apply_adjoint_heat(&Polynomial::constant(2, q(5, 1))).is_zero());
    }

    #[test]
    fn evaluate_examples() {
        let w = Polynomial::w(1);
        assert_eq!(w.eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(w.eval(&[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(poly(1, "x^2 + 2*t").eval(&[1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(poly(1, "x^2 + 2*t").eval_rational(&[q(1, 2), q(1, 3)]).unwrap(), q(11, 12));
        assert!(matches!(w.eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn paraboloid_substitution_examples() {
        assert!(Polynomial::w(3).substitute_paraboloid().is_zero());
        assert_eq!(Polynomial::t(1).substitute_paraboloid(), poly(1, "x^2"));
        assert_eq!(poly(1, "x^2 + 2*t").substitute_paraboloid(), poly(1, "3*x^2"));
        assert_eq!(poly(2, "t^2").substitute_paraboloid(), poly(2, "x1^4 + 2*x1^2*x2^2 + x2^4"));
    }

    #[test]
    fn degree_bookkeeping() {
        assert_eq!(Polynomial::zero(2).degree(), CaloricDegree::NegInfinity);
        assert!(CaloricDegree::NegInfinity < CaloricDegree::Finite(0));
        assert_eq!(poly(2, "x1*t^2 + x2^3").degree(), CaloricDegree::Finite(5));
        let h = apply_heat(&poly(1, "x^4 + t^3"));
        assert!(h.degree() <= CaloricDegree::Finite(4));
    }

    #[test]
    fn graded_basis_order() {
        let basis = MultiIndex::graded_basis(1, 2);
        let exps: Vec<_> = basis.iter().map(|a| a.exponents().to_vec()).collect();
        assert_eq!(exps, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0]]);
        assert_eq!(MultiIndex::graded_basis(3, 8).len(), 295);
    }

    #[test]
    fn parabolic_substitution_preserves_calorcity() {
        let u = poly(1, "x^3 + 6*x*t");
        let v = u.parabolic_substitute(&q(2, 3), &[q(-1, 5)], &q(7, 2));
        assert!(apply_heat(&v).is_zero());
        // v(x, t) = u(2x/3 - 1/5, 4t/9 + 7/2)
        let z = [q(1, 2), q(1, 4)];
        let direct = u.eval_rational(&[q(1, 3) - q(1, 5), q(1, 9) + q(7, 2)]).unwrap();
        assert_eq!(v.eval_rational(&z).unwrap(), direct);
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_rational(2.9999999999999996, 1e-12, 1000), Some(q(3, 1)));
        assert_eq!(snap_rational(0.333333333333333, 1e-12, 1000), Some(q(1, 3)));
        assert_eq!(snap_rational(-0.6666666666666667, 1e-12, 1000), Some(q(-2, 3)));
        assert_eq!(snap_rational(std::f64::consts::PI, 1e-14, 1000), None);
    }
}
