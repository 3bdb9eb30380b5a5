//! Fraction-free (Bareiss) elimination over the rationals.
//!
//! Rows are first cleared of denominators, then eliminated in `BigInt`
//! arithmetic where every division is exact. Square systems whose sparsity
//! graph splits into independent blocks are eliminated block by block; the
//! correction matrices are block diagonal (by caloric height and by the
//! parity of each spatial exponent), which keeps the dense work small.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Dense square matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    n: usize,
    entries: Vec<BigRational>,
}

impl ExactMatrix {
    pub fn zeros(n: usize) -> Self {
        ExactMatrix { n, entries: vec![BigRational::zero(); n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        ExactMatrix { n, entries: rows.into_iter().flatten().collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Index sets of the connected components of the symmetric sparsity graph.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !self.get(i, j).is_zero() {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(i);
        }
        groups
    }

    fn sub_block(&self, idx: &[usize]) -> Vec<Vec<BigRational>> {
        idx.iter()
            .map(|&i| idx.iter().map(|&j| self.get(i, j).clone()).collect())
            .collect()
    }
}

/// Multiplies each row by the lcm of its denominators. Returns the integer
/// rows and the multipliers used.
fn clear_denominators(rows: &[Vec<BigRational>]) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut out = Vec::with_capacity(rows.len());
    let mut scales = Vec::with_capacity(rows.len());
    for row in rows {
        let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        out.push(
            row.iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect::<Vec<_>>(),
        );
        scales.push(lcm);
    }
    (out, scales)
}

/// In-place Bareiss forward elimination on the first `n` columns of `m`
/// (extra columns are carried along). Returns the permutation sign, or
/// `None` if the leading `n x n` block is singular.
fn bareiss_forward(m: &mut [Vec<BigInt>], n: usize) -> Option<i32> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !m[i][k].is_zero())?;
        if pivot != k {
            m.swap(pivot, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..cols {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    Some(sign)
}

/// Plain Bareiss determinant of a dense rational matrix (no block splitting).
pub fn determinant_dense(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    if n == 0 {
        return BigRational::one();
    }
    let (mut ints, scales) = clear_denominators(rows);
    let Some(sign) = bareiss_forward(&mut ints, n) else {
        return BigRational::zero();
    };
    let scale = scales.iter().fold(BigInt::one(), |acc, s| acc * s);
    let det = &ints[n - 1][n - 1] * BigInt::from(sign);
    BigRational::new(det, scale)
}

/// Exact determinant, computed as the product of block determinants.
pub fn determinant(m: &ExactMatrix) -> BigRational {
    m.blocks()
        .iter()
        .map(|idx| determinant_dense(&m.sub_block(idx)))
        .fold(BigRational::one(), |acc, d| acc * d)
}

/// Solves `m x = rhs` exactly; `None` when `m` is singular.
pub fn solve_exact(m: &ExactMatrix, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    assert_eq!(rhs.len(), m.size());
    let mut x = vec![BigRational::zero(); m.size()];
    for idx in m.blocks() {
        let mut rows = m.sub_block(&idx);
        for (row, &i) in rows.iter_mut().zip(&idx) {
            row.push(rhs[i].clone());
        }
        let sol = solve_dense(&rows)?;
        for (v, &i) in sol.into_iter().zip(&idx) {
            x[i] = v;
        }
    }
    Some(x)
}

/// Solves a dense augmented system `[A | b]` (each row has `n + 1` entries).
fn solve_dense(augmented: &[Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let n = augmented.len();
    let (mut ints, _) = clear_denominators(augmented);
    bareiss_forward(&mut ints, n)?;
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(ints[i][n].clone());
        for j in i + 1..n {
            if !ints[i][j].is_zero() {
                acc -= &x[j] * BigRational::from_integer(ints[i][j].clone());
            }
        }
        let pivot = &ints[i][i];
        debug_assert!(!pivot.is_zero());
        x[i] = acc / BigRational::from_integer(pivot.clone());
    }
    Some(x)
}

/// Cofactor-free reference: rational Gaussian elimination with fractions.
/// Kept for cross-checking the fraction-free path.
#[cfg(test)]
pub(crate) fn determinant_gauss(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k].clone();
        for i in k + 1..n {
            let f = &m[i][k] / &m[k][k];
            for j in k..n {
                let v = &m[k][j] * &f;
                m[i][j] -= v;
            }
        }
    }
    det
}
