//! Spin-1/2 tensor-product space on `N` sites.
//!
//! Basis convention, fixed for the whole crate: site `i` (1-based) is bit
//! `i - 1` of the basis index, spin up is 1 and spin down is 0. The
//! pseudovacuum (all spins down) is index 0. Auxiliary spaces used by the
//! monodromy matrix sit on the bits above the quantum sites.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

/// Strictly increasing list of 1-based spin-up positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Vec<usize>);

impl Occupation {
    pub fn new(sites: Vec<usize>, n: usize) -> Result<Self> {
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidOccupation(format!("{sites:?} is not strictly increasing")));
        }
        if sites.iter().any(|&s| s == 0 || s > n) {
            return Err(Error::InvalidOccupation(format!("{sites:?} has a site outside 1..={n}")));
        }
        Ok(Occupation(sites))
    }

    pub fn empty() -> Self {
        Occupation(Vec::new())
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Occupation((1..=n).filter(|&s| index >> (s - 1) & 1 == 1).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().map(|&s| 1usize << (s - 1)).sum()
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    /// Componentwise `self >= other` for equal-size sets: every particle of
    /// `other` can reach its counterpart in `self` by moving right.
    pub fn dominates(&self, other: &Occupation) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// All `m`-particle occupations on `n` sites, ordered lexicographically on
/// the sorted site list.
pub fn sector(n: usize, m: usize) -> Vec<Occupation> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Occupation>) {
        if left == 0 {
            out.push(Occupation(cur.clone()));
            return;
        }
        for s in start..=n {
            if n - s + 1 < left {
                break;
            }
            cur.push(s);
            rec(s + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m <= n {
        rec(1, n, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// `k`-element subsets of `0..n` in lexicographic order (0-based).
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    sector(n, k)
        .into_iter()
        .map(|o| o.sites().iter().map(|s| s - 1).collect())
        .collect()
}

pub fn basis_vector<T: Field>(dim: usize, index: usize) -> Vec<T> {
    let mut v = vec![T::zero(); dim];
    v[index] = T::one();
    v
}

/// Left-multiplies `v` by a 4x4 gate acting on bits `a` and `b`. The gate's
/// local index is `bit_a + 2 * bit_b`.
pub fn apply_gate<T: Field>(v: &mut [T], a: usize, b: usize, gate: &Matrix<T>) {
    let (ma, mb) = (1usize << a, 1usize << b);
    for base in 0..v.len() {
        if base & (ma | mb) != 0 {
            continue;
        }
        let idx = [base, base | ma, base | mb, base | ma | mb];
        if idx.iter().all(|&i| v[i].is_zero()) {
            continue;
        }
        let old: [T; 4] = std::array::from_fn(|l| v[idx[l]].clone());
        for (l, &target) in idx.iter().enumerate() {
            let mut acc = T::zero();
            for (lp, x) in old.iter().enumerate() {
                let g = &gate[(l, lp)];
                if !g.is_zero() && !x.is_zero() {
                    acc = acc + g.clone() * x.clone();
                }
            }
            v[target] = acc;
        }
    }
}

/// Right-multiplies a row vector `w` by the gate: `w <- w^T G`.
pub fn apply_gate_left<T: Field>(w: &mut [T], a: usize, b: usize, gate: &Matrix<T>) {
    apply_gate(w, a, b, &gate.transpose());
}

/// The gate embedded as a `2^nbits` square matrix.
pub fn embed_gate<T: Field>(nbits: usize, a: usize, b: usize, gate: &Matrix<T>) -> Matrix<T> {
    let dim = 1 << nbits;
    let mut out = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let mut col = basis_vector::<T>(dim, j);
        apply_gate(&mut col, a, b, gate);
        out.set_column(j, &col);
    }
    out
}

/// Left-multiplies every column of `m` by the embedded gate.
pub fn apply_gate_to_matrix<T: Field>(m: &mut Matrix<T>, a: usize, b: usize, gate: &Matrix<T>) {
    for j in 0..m.cols() {
        let mut col = m.column(j);
        apply_gate(&mut col, a, b, gate);
        m.set_column(j, &col);
    }
}

/// Relabels sites: position `p` (0-based) of the input is carried to site
/// `perm[p]` of the output. As an operator, `P|c> = |c'>` with
/// `c'_{perm[p]} = c_p`.
pub fn permutation_operator<T: Field>(n: usize, perm: &[usize]) -> Matrix<T> {
    let dim = 1 << n;
    let mut out = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let i = permute_index(j, perm);
        out[(i, j)] = T::one();
    }
    out
}

pub fn permute_index(index: usize, perm: &[usize]) -> usize {
    perm.iter()
        .enumerate()
        .filter(|(p, _)| index >> p & 1 == 1)
        .map(|(_, &s)| 1usize << s)
        .sum()
}

/// Number operator `n_i` on 1-based site `site`.
pub fn number_operator<T: Field>(n: usize, site: usize) -> Matrix<T> {
    let dim = 1 << n;
    Matrix::diagonal(
        (0..dim)
            .map(|i| if i >> (site - 1) & 1 == 1 { T::one() } else { T::zero() })
            .collect(),
    )
}

/// Raising operator on 1-based `site`.
pub fn sigma_plus<T: Field>(n: usize, site: usize) -> Matrix<T> {
    let dim = 1 << n;
    let mask = 1 << (site - 1);
    let mut out = Matrix::zeros(dim, dim);
    for j in (0..dim).filter(|j| j & mask == 0) {
        out[(j | mask, j)] = T::one();
    }
    out
}

/// Lowering operator on 1-based `site`.
pub fn sigma_minus<T: Field>(n: usize, site: usize) -> Matrix<T> {
    sigma_plus(n, site).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    #[test]
    fn occupation_indexing() {
        let o = Occupation::new(vec![1, 3], 4).unwrap();
        assert_eq!(o.index(), 0b101);
        assert_eq!(Occupation::from_index(0b101, 4), o);
        assert!(Occupation::new(vec![2, 2], 4).is_err());
        assert!(Occupation::new(vec![0], 4).is_err());
        assert!(Occupation::new(vec![5], 4).is_err());
        assert_eq!(Occupation::empty().index(), 0);
    }

    #[test]
    fn sectors_are_lexicographic() {
        let s: Vec<Vec<usize>> = sector(4, 2).iter().map(|o| o.sites().to_vec()).collect();
        assert_eq!(s, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        assert_eq!(sector(3, 0), vec![Occupation::empty()]);
        assert!(sector(2, 3).is_empty());
    }

    #[test]
    fn dominance_order() {
        let a = Occupation::new(vec![2, 4], 4).unwrap();
        let b = Occupation::new(vec![1, 3], 4).unwrap();
        assert!(a.dominates(&b));
        assert!(!b.dominates(&a));
    }

    #[test]
    fn permutation_swaps_sites() {
        // swap sites 1 and 2 on three sites
        let p = permutation_operator::<Rational>(3, &[1, 0, 2]);
        let v = basis_vector::<Rational>(8, 0b001);
        assert_eq!(p.apply(&v).unwrap(), basis_vector::<Rational>(8, 0b010));
        assert_eq!(p.mul(&p).unwrap(), Matrix::identity(8));
    }

    #[test]
    fn sigma_plus_raises() {
        let sp = sigma_plus::<Rational>(2, 2);
        let v = sp.apply(&basis_vector::<Rational>(4, 0)).unwrap();
        assert_eq!(v, basis_vector::<Rational>(4, 0b10));
        let sm = sigma_minus::<Rational>(2, 2);
        assert_eq!(sm.apply(&v).unwrap(), basis_vector::<Rational>(4, 0));
    }
}
