//! The factorizing operator `Ô` (so that `F = Ô^{-1}`), its dual `Õ`, the
//! diagonal normalization `f̂ = Õ Ô`, and the F-basis forms of `A`, `B`, `C`.
//!
//! `Ô` is built two ways:
//!
//! * as the ordered product `F̂_1 F̂_2 ... F̂_N` with
//!   `F̂_i = (1 - n_i) + T_i n_i`, `T_i = S_{i+1,i} S_{i+2,i} ... S_{N,i}`;
//! * column by column from `B(xi_{n_1}) ... B(xi_{n_M}) |0>`.
//!
//! Both must agree exactly, and `Ô^{-1} A(t) Ô` must be diagonal.

use crate::chain::{ChainSpec, Entry};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;
use crate::space::{
    apply_gate, basis_vector, permutation_operator, sector, sigma_minus, sigma_plus, Occupation,
};

fn s_gate_between<T: Field>(chain: &ChainSpec<T>, j: usize, n: usize) -> Result<Matrix<T>> {
    // S_{j,n}(xi_j, xi_n)
    chain.s_matrix(&chain.xi()[j - 1], &chain.xi()[n - 1])
}

/// `T_n v`, with `T_n = S_{n+1,n} ... S_{N,n}` (1-based `n`).
fn apply_t_n<T: Field>(chain: &ChainSpec<T>, n: usize, gates: &[Matrix<T>], v: &mut [T]) {
    for (offset, g) in gates.iter().enumerate().rev() {
        let j = n + 1 + offset;
        apply_gate(v, j - 1, n - 1, g);
    }
    let _ = chain;
}

fn t_n_gates<T: Field>(chain: &ChainSpec<T>, n: usize) -> Result<Vec<Matrix<T>>> {
    (n + 1..=chain.n()).map(|j| s_gate_between(chain, j, n)).collect()
}

/// `T_n` as a dense operator; `T_N` is the identity.
pub fn t_n<T: Field>(chain: &ChainSpec<T>, n: usize) -> Result<Matrix<T>> {
    if n == 0 || n > chain.n() {
        return Err(Error::InvalidOccupation(format!("site {n} outside 1..={}", chain.n())));
    }
    let gates = t_n_gates(chain, n)?;
    let dim = chain.dim();
    let mut m = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let mut col = basis_vector(dim, j);
        apply_t_n(chain, n, &gates, &mut col);
        m.set_column(j, &col);
    }
    Ok(m)
}

/// `Ô = F̂_1 F̂_2 ... F̂_N`, applied in exactly that operator order.
pub fn o_hat_product<T: Field>(chain: &ChainSpec<T>) -> Result<Matrix<T>> {
    let n = chain.n();
    let dim = chain.dim();
    let all_gates: Vec<Vec<Matrix<T>>> = (1..=n).map(|i| t_n_gates(chain, i)).collect::<Result<_>>()?;
    let mut m = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let mut v = basis_vector::<T>(dim, j);
        for i in (1..=n).rev() {
            // F̂_i v = (1 - n_i) v + T_i n_i v
            let mask = 1 << (i - 1);
            let mut occupied: Vec<T> =
                v.iter().enumerate().map(|(k, x)| if k & mask != 0 { x.clone() } else { T::zero() }).collect();
            apply_t_n(chain, i, &all_gates[i - 1], &mut occupied);
            for (k, x) in v.iter_mut().enumerate() {
                let keep = if k & mask == 0 { x.clone() } else { T::zero() };
                *x = keep + occupied[k].clone();
            }
        }
        m.set_column(j, &v);
    }
    Ok(m)
}

/// `Ô_{m,n} = <m| B(xi_{n_1}) ... B(xi_{n_M}) |0>` with `n_1 < ... < n_M`.
pub fn o_hat_from_b<T: Field>(chain: &ChainSpec<T>) -> Result<Matrix<T>> {
    let dim = chain.dim();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); dim];
    columns[0] = chain.vacuum();
    let mut order: Vec<usize> = (1..dim).collect();
    order.sort_by_key(|j| j.count_ones());
    for j in order {
        let lowest = j.trailing_zeros() as usize;
        let rest = j & !(1 << lowest);
        columns[j] = chain.apply(Entry::B, &chain.xi()[lowest], &columns[rest])?;
    }
    Matrix::from_columns(dim, &columns)
}

/// `Õ_{m,n} = <0| C(xi_{m_1}) ... C(xi_{m_M}) |n>`.
pub fn o_tilde<T: Field>(chain: &ChainSpec<T>) -> Result<Matrix<T>> {
    let dim = chain.dim();
    let mut rows: Vec<Vec<T>> = vec![Vec::new(); dim];
    rows[0] = chain.vacuum();
    let mut order: Vec<usize> = (1..dim).collect();
    order.sort_by_key(|j| j.count_ones());
    for j in order {
        let highest = (usize::BITS - 1 - j.leading_zeros()) as usize;
        let rest = j & !(1 << highest);
        rows[j] = chain.apply_left(Entry::C, &chain.xi()[highest], &rows[rest])?;
    }
    Ok(Matrix::from_fn(dim, dim, |i, j| rows[i][j].clone()))
}

/// Closed form of the diagonal `f̂`:
/// `f({n}) = prod_k prod_{alpha not in {n}} c~(xi_alpha - xi_{n_k})`,
/// indexed by basis state.
pub fn f_hat<T: Field>(chain: &ChainSpec<T>) -> Result<Vec<T>> {
    let n = chain.n();
    let xi = chain.xi();
    (0..chain.dim())
        .map(|j| {
            let occ = Occupation::from_index(j, n);
            let mut f = T::one();
            for &nk in occ.sites() {
                for alpha in (1..=n).filter(|a| !occ.contains(*a)) {
                    f = f * chain.weights().c_tilde(&(xi[alpha - 1].clone() - xi[nk - 1].clone()))?;
                }
            }
            Ok(f)
        })
        .collect()
}

/// `Ô`, `Õ` and `f̂` for one chain.
#[derive(Debug, Clone)]
pub struct FactorizingOperator<T: Field> {
    pub o_hat: Matrix<T>,
    pub o_tilde: Matrix<T>,
    pub f_hat: Vec<T>,
    pub chain: ChainSpec<T>,
}

impl<T: Field> FactorizingOperator<T> {
    pub fn new(chain: &ChainSpec<T>) -> Result<Self> {
        Ok(FactorizingOperator {
            o_hat: o_hat_product(chain)?,
            o_tilde: o_tilde(chain)?,
            f_hat: f_hat(chain)?,
            chain: chain.clone(),
        })
    }

    /// `Ô^{-1} = f̂^{-1} Õ`.
    pub fn inverse(&self) -> Result<Matrix<T>> {
        let dim = self.chain.dim();
        let mut inv = self.o_tilde.clone();
        for (i, f) in self.f_hat.iter().enumerate() {
            if f.is_zero() {
                return Err(vanishing_entry(&self.chain, i));
            }
            let r = T::one() / f.clone();
            for j in 0..dim {
                inv[(i, j)] = inv[(i, j)].clone() * r.clone();
            }
        }
        Ok(inv)
    }

    /// `Ô^{-1} X Ô`.
    pub fn conjugate(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.inverse()?.mul(x)?.mul(&self.o_hat)
    }

    /// Rows/columns of one particle-number sector, in [`sector`] order.
    pub fn sector_block(m: &Matrix<T>, n: usize, particles: usize) -> Matrix<T> {
        let idx: Vec<usize> = sector(n, particles).iter().map(Occupation::index).collect();
        m.select(&idx, &idx)
    }

    /// Fixture file: per-sector blocks of `Ô`, `Õ` and `f̂`.
    pub fn to_fixture_json(&self) -> serde_json::Value {
        let n = self.chain.n();
        let sectors: Vec<serde_json::Value> = (0..=n)
            .map(|m| {
                let occ = sector(n, m);
                serde_json::json!({
                    "m": m,
                    "basis": occ.iter().map(|o| o.sites().to_vec()).collect::<Vec<_>>(),
                    "o_hat": Self::sector_block(&self.o_hat, n, m).to_json(),
                    "o_tilde": Self::sector_block(&self.o_tilde, n, m).to_json(),
                    "f_hat": occ.iter().map(|o| self.f_hat[o.index()].to_json()).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "chain": self.chain.to_json(),
            "basis_order": "site 1 = least significant bit; sectors lexicographic on sorted sites",
            "sectors": sectors,
        })
    }
}

fn vanishing_entry<T: Field>(chain: &ChainSpec<T>, index: usize) -> Error {
    let n = chain.n();
    let occ = Occupation::from_index(index, n);
    let xi = chain.xi();
    for &nk in occ.sites() {
        for alpha in (1..=n).filter(|a| !occ.contains(*a)) {
            let c = chain.weights().c_tilde(&(xi[alpha - 1].clone() - xi[nk - 1].clone()));
            if c.map(|c| c.is_zero()).unwrap_or(true) {
                return Error::VanishingNormalization { occupation: occ.to_string(), a: alpha, b: nk };
            }
        }
    }
    Error::VanishingNormalization { occupation: occ.to_string(), a: 0, b: 0 }
}

/// `Ô^{-1}` via `f̂^{-1} Õ`.
pub fn o_inverse<T: Field>(chain: &ChainSpec<T>) -> Result<Matrix<T>> {
    FactorizingOperator::new(chain)?.inverse()
}

/// Diagonal `A^F(t)`: entry `prod_{alpha not in {n}} c~(xi_alpha - t)`.
pub fn a_f<T: Field>(chain: &ChainSpec<T>, t: &T) -> Result<Matrix<T>> {
    let n = chain.n();
    let c: Vec<T> = chain
        .xi()
        .iter()
        .map(|x| chain.weights().c_tilde(&(x.clone() - t.clone())))
        .collect::<Result<_>>()?;
    let diag = (0..chain.dim())
        .map(|j| {
            (1..=n)
                .filter(|s| j >> (s - 1) & 1 == 0)
                .fold(T::one(), |acc, s| acc * c[s - 1].clone())
        })
        .collect();
    Ok(Matrix::diagonal(diag))
}

/// Quasilocal `B^F(t) = sum_x sigma_x^+ b~(xi_x - t) prod_{alpha != x} w_alpha`,
/// with `w_alpha = c~(xi_alpha - t) / c~(xi_alpha - xi_x)` on empty sites and
/// 1 on occupied ones.
pub fn b_f<T: Field>(chain: &ChainSpec<T>, t: &T) -> Result<Matrix<T>> {
    let n = chain.n();
    let dim = chain.dim();
    let w = chain.weights();
    let xi = chain.xi();
    let mut m = Matrix::zeros(dim, dim);
    for x in 1..=n {
        let bx = w.b_tilde(&(xi[x - 1].clone() - t.clone()))?;
        let mut empty_factor = Vec::with_capacity(n);
        for alpha in 1..=n {
            empty_factor.push(if alpha == x {
                T::one()
            } else {
                w.c_tilde(&(xi[alpha - 1].clone() - t.clone()))?
                    .checked_div(&w.c_tilde(&(xi[alpha - 1].clone() - xi[x - 1].clone()))?, "c~(xi_a - xi_x)")?
            });
        }
        let mask = 1 << (x - 1);
        for j in (0..dim).filter(|j| j & mask == 0) {
            let amp = (1..=n)
                .filter(|&a| a != x && j >> (a - 1) & 1 == 0)
                .fold(bx.clone(), |acc, a| acc * empty_factor[a - 1].clone());
            m[(j | mask, j)] = amp;
        }
    }
    Ok(m)
}

/// Quasilocal `C^F(t) = sum_x sigma_x^- b~(xi_x - t) prod_{alpha != x} w_alpha`,
/// with `w_alpha = c~(xi_alpha - t)` on empty sites and
/// `c~(xi_x - xi_alpha)^{-1}` on occupied ones.
pub fn c_f<T: Field>(chain: &ChainSpec<T>, t: &T) -> Result<Matrix<T>> {
    let n = chain.n();
    let dim = chain.dim();
    let w = chain.weights();
    let xi = chain.xi();
    let mut m = Matrix::zeros(dim, dim);
    for x in 1..=n {
        let bx = w.b_tilde(&(xi[x - 1].clone() - t.clone()))?;
        let mut empty = Vec::with_capacity(n);
        let mut occupied = Vec::with_capacity(n);
        for alpha in 1..=n {
            if alpha == x {
                empty.push(T::one());
                occupied.push(T::one());
            } else {
                empty.push(w.c_tilde(&(xi[alpha - 1].clone() - t.clone()))?);
                occupied.push(w.c_tilde_inv(&(xi[x - 1].clone() - xi[alpha - 1].clone()))?);
            }
        }
        let mask = 1 << (x - 1);
        for j in (0..dim).filter(|j| j & mask != 0) {
            let amp = (1..=n).filter(|&a| a != x).fold(bx.clone(), |acc, a| {
                if j >> (a - 1) & 1 == 1 {
                    acc * occupied[a - 1].clone()
                } else {
                    acc * empty[a - 1].clone()
                }
            });
            m[(j & !mask, j)] = amp;
        }
    }
    Ok(m)
}

/// Sum of single spin flips, used to check the quasilocal shape.
pub fn flip_support<T: Field>(n: usize, raise: bool) -> Matrix<T> {
    let dim = 1 << n;
    (1..=n).fold(Matrix::zeros(dim, dim), |acc, s| {
        let op = if raise { sigma_plus(n, s) } else { sigma_minus(n, s) };
        acc.add(&op).expect("same shape")
    })
}

/// Chain re-ordered so that position `p` (0-based) carries site `perm[p]`:
/// returns the chain with `xi` permuted accordingly and the relabelling
/// operator `P` taking positions back to sites.
pub fn reordered<T: Field>(chain: &ChainSpec<T>, perm: &[usize]) -> Result<(ChainSpec<T>, Matrix<T>)> {
    let n = chain.n();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidChain(format!("{perm:?} is not a permutation of 0..{n}")));
    }
    let xi = perm.iter().map(|&p| chain.xi()[p].clone()).collect();
    Ok((chain.with_xi(xi)?, permutation_operator(n, perm)))
}

/// `Ô` for the site ordering `perm`, expressed on the original sites:
/// `P Ô(xi_perm) P^{-1}`.
pub fn o_hat_for_ordering<T: Field>(chain: &ChainSpec<T>, perm: &[usize]) -> Result<Matrix<T>> {
    let (permuted, p) = reordered(chain, perm)?;
    p.mul(&o_hat_product(&permuted)?)?.mul(&p.transpose())
}

/// Monodromy entry built with the sites multiplied in the order `perm`.
pub fn operator_for_ordering<T: Field>(
    chain: &ChainSpec<T>,
    perm: &[usize],
    entry: Entry,
    t: &T,
) -> Result<Matrix<T>> {
    let (permuted, p) = reordered(chain, perm)?;
    p.mul(&permuted.operator(entry, t)?)?.mul(&p.transpose())
}

/// F-basis form `Ô_perm^{-1} X_perm(t) Ô_perm` of a monodromy entry for the
/// ordering `perm`.
pub fn f_basis_entry_for_ordering<T: Field>(
    chain: &ChainSpec<T>,
    perm: &[usize],
    entry: Entry,
    t: &T,
) -> Result<Matrix<T>> {
    let (permuted, p) = reordered(chain, perm)?;
    let fo = FactorizingOperator::new(&permuted)?;
    let local = fo.conjugate(&permuted.operator(entry, t)?)?;
    p.mul(&local)?.mul(&p.transpose())
}

/// The S-matrix exchanging positions `i` and `i + 1` (1-based) of ordering
/// `perm`: `S_{perm(i+1), perm(i)}(xi_{perm(i+1)}, xi_{perm(i)})`, embedded.
pub fn exchange_operator<T: Field>(chain: &ChainSpec<T>, perm: &[usize], i: usize) -> Result<Matrix<T>> {
    let (lo, hi) = (perm[i - 1], perm[i]);
    let gate = chain.s_matrix(&chain.xi()[hi], &chain.xi()[lo])?;
    Ok(crate::space::embed_gate(chain.n(), hi, lo, &gate))
}

/// Result of one adjacent-transposition check.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationCheck {
    /// 1-based position of the exchanged pair `(i, i+1)`.
    pub i: usize,
    pub pass: bool,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub checks: Vec<FactorizationCheck>,
}

impl FactorizationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks `Ô = S_{i+1,i} Ô^{(i,i+1)}` for every adjacent pair, where
/// `Ô^{(i,i+1)}` is `Ô` of the chain with `xi_i <-> xi_{i+1}` relabelled back
/// onto the original sites.
pub fn verify_factorization<T: Field>(chain: &ChainSpec<T>, tol: f64) -> Result<FactorizationReport> {
    let n = chain.n();
    let o = o_hat_product(chain)?;
    let identity: Vec<usize> = (0..n).collect();
    let mut checks = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        chain.swapped(i)?;
        let mut perm = identity.clone();
        perm.swap(i - 1, i);
        let swapped = o_hat_for_ordering(chain, &perm)?;
        let rhs = exchange_operator(chain, &identity, i)?.mul(&swapped)?;
        checks.push(FactorizationCheck { i, pass: o.approx_eq(&rhs, tol), max_abs_diff: o.max_abs_diff(&rhs) });
    }
    Ok(FactorizationReport { checks })
}

/// Composes the adjacent exchanges of `word` (1-based positions applied left
/// to right) into `R` with `Ô = R Ô_sigma`; returns `(R, sigma)`.
pub fn compose_exchanges<T: Field>(chain: &ChainSpec<T>, word: &[usize]) -> Result<(Matrix<T>, Vec<usize>)> {
    let n = chain.n();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut r = Matrix::identity(chain.dim());
    for &i in word {
        if i == 0 || i >= n {
            return Err(Error::InvalidChain(format!("no adjacent pair ({i}, {})", i + 1)));
        }
        r = r.mul(&exchange_operator(chain, &perm, i)?)?;
        perm.swap(i - 1, i);
    }
    Ok((r, perm))
}
