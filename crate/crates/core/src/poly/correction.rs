//! The correction solve `H(wq) = -Hp` and the caloric extension `u_p = wq + p`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::Zero;

use super::bareiss::{determinant, solve_exact, ExactMatrix};
use super::{apply_heat, CaloricDegree, MultiIndex, Polynomial};
use crate::error::{Error, Result};

/// Matrix of `T(q) = H(wq)` on the polynomials of caloric degree `<= m`.
///
/// Column `j` holds the coefficients of `H(w e_j)` for the `j`-th basis
/// monomial `e_j`, with the basis in graded order.
#[derive(Debug, Clone)]
pub struct CorrectionSystem {
    dim: usize,
    degree: u32,
    basis: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    matrix: ExactMatrix,
    determinant: BigRational,
}

impl CorrectionSystem {
    /// Assembles `T` on `P_m` for spatial dimension `dim` and checks that it is invertible.
    pub fn build(dim: usize, m: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("spatial dimension must be at least 1".into()));
        }
        let basis = MultiIndex::graded_basis(dim, m);
        let index: HashMap<MultiIndex, usize> =
            basis.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let w = Polynomial::w(dim);
        let mut matrix = ExactMatrix::zeros(basis.len());
        for (j, e) in basis.iter().enumerate() {
            let column = apply_heat(&(&w * &Polynomial::monomial(BigRational::from_integer(1.into()), e.clone())));
            for (alpha, c) in column.terms() {
                // T preserves caloric height, so every image term is in the basis.
                let i = *index.get(alpha).expect("H(w e) stays in P_m");
                matrix.set(i, j, c.clone());
            }
        }
        let det = determinant(&matrix);
        if det.is_zero() {
            return Err(Error::SingularSystem { dim, degree: m });
        }
        Ok(CorrectionSystem { dim, degree: m, basis, index, matrix, determinant: det })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    pub fn determinant(&self) -> &BigRational {
        &self.determinant
    }

    fn coefficients(&self, p: &Polynomial) -> Result<Vec<BigRational>> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        let mut v = vec![BigRational::zero(); self.basis.len()];
        for (alpha, c) in p.terms() {
            let i = self.index.get(alpha).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "polynomial of caloric degree {} exceeds the system degree {}",
                    p.degree(),
                    self.degree
                ))
            })?;
            v[*i] = c.clone();
        }
        Ok(v)
    }

    fn polynomial_from(&self, v: Vec<BigRational>) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (alpha, c) in self.basis.iter().zip(v) {
            p.add_term(alpha.clone(), c);
        }
        p
    }

    /// Solves `H(wq) = rhs` for `q` in `P_m`.
    pub fn solve(&self, rhs: &Polynomial) -> Result<Polynomial> {
        let b = self.coefficients(rhs)?;
        let x = solve_exact(&self.matrix, &b).ok_or(Error::SingularSystem { dim: self.dim, degree: self.degree })?;
        Ok(self.polynomial_from(x))
    }

    /// The unique `q` with `H(wq) = -Hp`, verified exactly.
    pub fn correction_for(&self, p: &Polynomial) -> Result<Polynomial> {
        let rhs = -apply_heat(p);
        let q = self.solve(&rhs)?;
        let residual = apply_heat(&(&Polynomial::w(self.dim) * &q)) - &rhs;
        if !residual.is_zero() {
            return Err(Error::ResidualNotZero);
        }
        Ok(q)
    }

    /// `u_p = wq + p`, caloric and equal to `p` on the paraboloid.
    pub fn extend(&self, p: &Polynomial) -> Result<Polynomial> {
        let q = self.correction_for(p)?;
        Ok(&Polynomial::w(self.dim) * &q + p)
    }
}

/// The caloric degree of `-Hp`, i.e. the smallest `m` whose `P_m` holds the correction.
fn correction_degree(p: &Polynomial) -> CaloricDegree {
    apply_heat(p).degree()
}

type SystemCache = Mutex<HashMap<(usize, u32), Arc<CorrectionSystem>>>;

/// The system for `(dim, m)`, built once per process and shared.
pub fn cached_system(dim: usize, m: u32) -> Result<Arc<CorrectionSystem>> {
    static CACHE: OnceLock<SystemCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(sys) = cache.lock().unwrap().get(&(dim, m)) {
        return Ok(Arc::clone(sys));
    }
    let sys = Arc::new(CorrectionSystem::build(dim, m)?);
    cache.lock().unwrap().entry((dim, m)).or_insert_with(|| Arc::clone(&sys));
    Ok(sys)
}

/// Solves `H(wq) = -Hp` on `P_m` with `m` the caloric degree of `-Hp`.
pub fn solve_correction(p: &Polynomial) -> Result<Polynomial> {
    match correction_degree(p) {
        CaloricDegree::NegInfinity => Ok(Polynomial::zero(p.dim())),
        CaloricDegree::Finite(m) => cached_system(p.dim(), m)?.correction_for(p),
    }
}

/// The unique caloric polynomial agreeing with `p` on `t = |x|^2`.
pub fn caloric_extension(p: &Polynomial) -> Result<Polynomial> {
    let q = solve_correction(p)?;
    Ok(&Polynomial::w(p.dim()) * &q + p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::bareiss::determinant_gauss;
    use crate::poly::parse_polynomial;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn poly(dim: usize, s: &str) -> Polynomial {
        parse_polynomial(s, dim).unwrap()
    }

    #[test]
    fn hand_derived_system_n1_m2() {
        let sys = CorrectionSystem::build(1, 2).unwrap();
        let names: Vec<_> = sys.basis().iter().map(|a| a.exponents().to_vec()).collect();
        assert_eq!(names, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0]]);
        // Columns: T(1) = -3, T(x) = -7x, T(t) = x^2 - 4t, T(x^2) = 2t - 13x^2.
        let expected = [
            [-3, 0, 0, 0],
            [0, -7, 0, 0],
            [0, 0, -4, 2],
            [0, 0, 1, -13],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(sys.matrix().get(i, j), &q(v, 1), "entry ({i}, {j})");
            }
        }
        assert_eq!(sys.determinant(), &q(1050, 1));
    }

    #[test]
    fn degree_zero_systems() {
        for n in 1..=4 {
            let sys = CorrectionSystem::build(n, 0).unwrap();
            assert_eq!(sys.matrix().size(), 1);
            assert_eq!(sys.matrix().get(0, 0), &q(-(2 * n as i64 + 1), 1));
        }
    }

    #[test]
    fn block_determinant_agrees_with_plain_gauss() {
        for (n, m) in [(1, 6), (2, 4), (3, 3)] {
            let sys = CorrectionSystem::build(n, m).unwrap();
            let rows: Vec<Vec<BigRational>> = (0..sys.matrix().size()).map(|i| sys.matrix().row(i).to_vec()).collect();
            assert_eq!(sys.determinant(), &determinant_gauss(&rows), "N={n}, m={m}");
        }
    }

    #[test]
    fn correction_examples() {
        assert_eq!(solve_correction(&Polynomial::t(1)).unwrap(), Polynomial::constant(1, q(-1, 3)));
        assert_eq!(solve_correction(&poly(1, "x^2")).unwrap(), Polynomial::constant(1, q(2, 3)));
        assert!(solve_correction(&poly(1, "x^2 + 2*t")).unwrap().is_zero());
    }

    #[test]
    fn extension_examples() {
        let expected = poly(1, "1/3*x^2 + 2/3*t");
        assert_eq!(caloric_extension(&poly(1, "x^2")).unwrap(), expected);
        assert_eq!(caloric_extension(&Polynomial::t(1)).unwrap(), expected);
        assert_eq!(caloric_extension(&poly(2, "5")).unwrap(), poly(2, "5"));
    }

    #[test]
    fn system_rejects_oversized_rhs() {
        let sys = CorrectionSystem::build(1, 2).unwrap();
        assert!(sys.solve(&poly(1, "x^3")).is_err());
        assert!(sys.solve(&poly(2, "x1")).is_err());
    }

    #[test]
    fn reused_system_matches_fresh_solve() {
        let sys = CorrectionSystem::build(2, 6).unwrap();
        let p = poly(2, "3/7*x1^3*x2 - 2*x2^2*t + 5*t^2 - x1");
        assert_eq!(sys.extend(&p).unwrap(), caloric_extension(&p).unwrap());
    }
}
