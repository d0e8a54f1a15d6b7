//! Inhomogeneous spin-1/2 chain: S-matrix, monodromy matrix entries,
//! vacuum and transfer eigenvalues, Bethe-equation residuals.
//!
//! The S-matrix is normalized to `a = 1` with
//! `b~(t) = phi(eta)/phi(t+eta)` and `c~(t) = phi(t)/phi(t+eta)`. The
//! monodromy matrix is the ordered product `S_10(xi_1,t) ... S_N0(xi_N,t)`
//! and its entries are read as `<beta|T_0|alpha> = [[A, B], [C, D]]_{alpha beta}`
//! with index 1 = up, 2 = down. Hence `B = <down_0|T|up_0>` raises one
//! quantum spin and `C = <up_0|T|down_0>` lowers one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{scalar_from_json, scalar_into, Field, Regime};
use crate::matrix::Matrix;
use crate::space::{apply_gate, apply_gate_left, apply_gate_to_matrix, basis_vector};

/// Practical ceiling for dense exact operators (`4096^2` entries).
pub const MAX_SITES: usize = 12;

/// Regime plus crossing parameter: everything needed to evaluate weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights<T> {
    regime: Regime,
    eta: T,
}

impl<T: Field> Weights<T> {
    pub fn new(regime: Regime, eta: T) -> Result<Self> {
        let w = Weights { regime, eta };
        if w.phi(&w.eta)?.is_zero() {
            return Err(Error::InvalidChain("eta must be nonzero (phi(eta) = 0)".into()));
        }
        Ok(w)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn eta(&self) -> &T {
        &self.eta
    }

    pub fn phi(&self, t: &T) -> Result<T> {
        self.regime.phi(t)
    }

    pub fn phi_eta(&self) -> Result<T> {
        self.phi(&self.eta)
    }

    /// `phi(t + shift * eta)` for `shift` in {-1, 0, 1, 2}.
    pub fn phi_shift(&self, t: &T, shift: i64) -> Result<T> {
        let s = T::from_ratio(shift, 1) * self.eta.clone();
        self.phi(&(t.clone() + s))
    }

    fn normalization(&self, t: &T) -> Result<T> {
        let n = self.phi_shift(t, 1)?;
        if n.is_zero() {
            return Err(Error::PoleCollision {
                what: "S-matrix normalization phi(t + eta) vanishes".into(),
                a: t.to_string(),
                b: self.eta.to_string(),
            });
        }
        Ok(n)
    }

    pub fn b_tilde(&self, t: &T) -> Result<T> {
        let den = self.normalization(t)?;
        Ok(self.phi_eta()? / den)
    }

    pub fn c_tilde(&self, t: &T) -> Result<T> {
        let den = self.normalization(t)?;
        Ok(self.phi(t)? / den)
    }

    pub fn c_tilde_inv(&self, t: &T) -> Result<T> {
        let num = self.phi_shift(t, 1)?;
        let den = self.phi(t)?;
        if den.is_zero() {
            return Err(Error::PoleCollision {
                what: "c~(t) vanishes, its inverse is singular".into(),
                a: t.to_string(),
                b: "0".into(),
            });
        }
        Ok(num / den)
    }

    /// The 4x4 S-matrix at difference parameter `u = t1 - t2`, local index
    /// `bit_1 + 2 * bit_2`.
    pub fn s_gate(&self, u: &T) -> Result<Matrix<T>> {
        let b = self.b_tilde(u)?;
        let c = self.c_tilde(u)?;
        let mut s = Matrix::zeros(4, 4);
        s[(0, 0)] = T::one();
        s[(3, 3)] = T::one();
        s[(1, 1)] = c.clone();
        s[(2, 2)] = c;
        s[(1, 2)] = b.clone();
        s[(2, 1)] = b;
        Ok(s)
    }

    /// `S_12(t1, t2)`.
    pub fn s_matrix(&self, t1: &T, t2: &T) -> Result<Matrix<T>> {
        self.s_gate(&(t1.clone() - t2.clone()))
    }

    pub fn to_complex(&self) -> Weights<Complex64> {
        Weights { regime: self.regime, eta: self.eta.to_c64() }
    }
}

/// Which factor carries the spectral parameter first in `S(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `S_{i0}(xi_i, t)`: the chain's own monodromy matrix.
    SiteFirst,
    /// `S_{0i}(t, xi_i)`: the lattice used for the domain-wall partition function.
    AuxFirst,
}

/// Entry of the monodromy matrix in the auxiliary space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    A,
    B,
    C,
    D,
}

impl Entry {
    /// (auxiliary input bit, auxiliary output bit), up = 1.
    fn aux_bits(self) -> (usize, usize) {
        match self {
            Entry::A => (1, 1),
            Entry::B => (1, 0),
            Entry::C => (0, 1),
            Entry::D => (0, 0),
        }
    }
}

/// Gates of the monodromy product in operator order (site 1 leftmost).
fn monodromy_gates<T: Field>(
    weights: &Weights<T>,
    xi: &[T],
    t: &T,
    orientation: Orientation,
) -> Result<Vec<Matrix<T>>> {
    xi.iter()
        .map(|x| {
            let u = match orientation {
                Orientation::SiteFirst => x.clone() - t.clone(),
                Orientation::AuxFirst => t.clone() - x.clone(),
            };
            weights.s_gate(&u).map_err(|e| match e {
                Error::PoleCollision { .. } => Error::PoleCollision {
                    what: "spectral parameter hits a monodromy pole".into(),
                    a: t.to_string(),
                    b: x.to_string(),
                },
                other => other,
            })
        })
        .collect()
}

/// `X(t) v` for a monodromy entry `X` on the lattice with inhomogeneities
/// `xi` (no chain invariants are checked).
pub fn apply_entry<T: Field>(
    weights: &Weights<T>,
    xi: &[T],
    t: &T,
    orientation: Orientation,
    entry: Entry,
    v: &[T],
) -> Result<Vec<T>> {
    let n = xi.len();
    let dim = 1usize << n;
    if v.len() != dim {
        return Err(Error::DimensionMismatch(format!("state of length {} on {n} sites", v.len())));
    }
    let gates = monodromy_gates(weights, xi, t, orientation)?;
    let (aux_in, aux_out) = entry.aux_bits();
    let mut full = vec![T::zero(); 2 * dim];
    full[aux_in * dim..(aux_in + 1) * dim].clone_from_slice(v);
    for (site, g) in gates.iter().enumerate().rev() {
        apply_gate(&mut full, site, n, g);
    }
    Ok(full[aux_out * dim..(aux_out + 1) * dim].to_vec())
}

/// `w^T X(t)` for a row vector `w`.
pub fn apply_entry_left<T: Field>(
    weights: &Weights<T>,
    xi: &[T],
    t: &T,
    orientation: Orientation,
    entry: Entry,
    w: &[T],
) -> Result<Vec<T>> {
    let n = xi.len();
    let dim = 1usize << n;
    if w.len() != dim {
        return Err(Error::DimensionMismatch(format!("state of length {} on {n} sites", w.len())));
    }
    let gates = monodromy_gates(weights, xi, t, orientation)?;
    let (aux_in, aux_out) = entry.aux_bits();
    let mut full = vec![T::zero(); 2 * dim];
    full[aux_out * dim..(aux_out + 1) * dim].clone_from_slice(w);
    for (site, g) in gates.iter().enumerate() {
        apply_gate_left(&mut full, site, n, g);
    }
    Ok(full[aux_in * dim..(aux_in + 1) * dim].to_vec())
}

/// Checks that a parameter list has no repeated values.
pub fn ensure_distinct<T: Field>(set: &'static str, values: &[T]) -> Result<()> {
    for i in 0..values.len() {
        for j in 0..i {
            if values[i] == values[j] {
                return Err(Error::CoincidingParameters { set, value: values[i].to_string() });
            }
        }
    }
    Ok(())
}

/// The four monodromy entries as dense `2^N` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy<T: Field> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
    pub d: Matrix<T>,
}

/// Chain length, regime, crossing parameter and inhomogeneities.
///
/// Invariants: `1 <= N <= MAX_SITES`, `phi(eta) != 0`, and for all `i != j`
/// both `phi(xi_i - xi_j)` and `phi(xi_i - xi_j + eta)` are nonzero (for the
/// rational regime: distinct and no `±eta` differences).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec<T> {
    weights: Weights<T>,
    xi: Vec<T>,
}

impl<T: Field> ChainSpec<T> {
    pub fn new(regime: Regime, eta: T, xi: Vec<T>) -> Result<Self> {
        let weights = Weights::new(regime, eta)?;
        Self::from_weights(weights, xi)
    }

    pub fn from_weights(weights: Weights<T>, xi: Vec<T>) -> Result<Self> {
        let n = xi.len();
        if n == 0 {
            return Err(Error::InvalidChain("chain length must be positive".into()));
        }
        if n > MAX_SITES {
            return Err(Error::InvalidChain(format!("N = {n} exceeds the dense ceiling {MAX_SITES}")));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = xi[i].clone() - xi[j].clone();
                if negligible(&weights.phi(&d)?) {
                    return Err(Error::InvalidChain(format!(
                        "inhomogeneities xi_{} and xi_{} coincide ({})",
                        j + 1,
                        i + 1,
                        xi[i]
                    )));
                }
                if negligible(&weights.phi_shift(&d, 1)?) {
                    return Err(Error::InvalidChain(format!(
                        "xi_{} - xi_{} = -eta ({} - {}), c~ between these sites is singular",
                        i + 1,
                        j + 1,
                        xi[i],
                        xi[j]
                    )));
                }
            }
        }
        Ok(ChainSpec { weights, xi })
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn regime(&self) -> Regime {
        self.weights.regime
    }

    pub fn eta(&self) -> &T {
        &self.weights.eta
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    /// Same weights with a new inhomogeneity list (re-validated).
    pub fn with_xi(&self, xi: Vec<T>) -> Result<Self> {
        Self::from_weights(self.weights.clone(), xi)
    }

    /// `xi_i <-> xi_{i+1}` for 1-based `i`.
    pub fn swapped(&self, i: usize) -> Result<Self> {
        if i == 0 || i >= self.n() {
            return Err(Error::InvalidChain(format!("no adjacent pair ({i}, {})", i + 1)));
        }
        let mut xi = self.xi.clone();
        xi.swap(i - 1, i);
        self.with_xi(xi)
    }

    pub fn to_complex(&self) -> ChainSpec<Complex64> {
        ChainSpec {
            weights: self.weights.to_complex(),
            xi: self.xi.iter().map(Field::to_c64).collect(),
        }
    }

    pub fn s_matrix(&self, t1: &T, t2: &T) -> Result<Matrix<T>> {
        self.weights.s_matrix(t1, t2)
    }

    pub fn apply(&self, entry: Entry, t: &T, v: &[T]) -> Result<Vec<T>> {
        apply_entry(&self.weights, &self.xi, t, Orientation::SiteFirst, entry, v)
    }

    pub fn apply_left(&self, entry: Entry, t: &T, w: &[T]) -> Result<Vec<T>> {
        apply_entry_left(&self.weights, &self.xi, t, Orientation::SiteFirst, entry, w)
    }

    /// `X(t_1) X(t_2) ... X(t_k) v`.
    pub fn apply_product(&self, entry: Entry, ts: &[T], v: &[T]) -> Result<Vec<T>> {
        ts.iter().rev().try_fold(v.to_vec(), |acc, t| self.apply(entry, t, &acc))
    }

    /// `w^T X(t_1) ... X(t_k)`.
    pub fn apply_product_left(&self, entry: Entry, ts: &[T], w: &[T]) -> Result<Vec<T>> {
        ts.iter().try_fold(w.to_vec(), |acc, t| self.apply_left(entry, t, &acc))
    }

    pub fn vacuum(&self) -> Vec<T> {
        basis_vector(self.dim(), 0)
    }

    /// Dense operator for one monodromy entry.
    pub fn operator(&self, entry: Entry, t: &T) -> Result<Matrix<T>> {
        let dim = self.dim();
        let mut m = Matrix::zeros(dim, dim);
        for j in 0..dim {
            let col = self.apply(entry, t, &basis_vector(dim, j))?;
            m.set_column(j, &col);
        }
        Ok(m)
    }

    pub fn monodromy(&self, t: &T) -> Result<Monodromy<T>> {
        let full = self.monodromy_embedded(t, self.n(), self.n() + 1)?;
        let dim = self.dim();
        let block = |out: usize, inp: usize| {
            let rows: Vec<usize> = (0..dim).map(|q| q + out * dim).collect();
            let cols: Vec<usize> = (0..dim).map(|q| q + inp * dim).collect();
            full.select(&rows, &cols)
        };
        Ok(Monodromy { a: block(1, 1), b: block(0, 1), c: block(1, 0), d: block(0, 0) })
    }

    /// `T_0(t)` as a matrix on `total_bits` qubits with the auxiliary space
    /// on bit `aux_bit` (quantum sites on bits `0..N`).
    pub fn monodromy_embedded(&self, t: &T, aux_bit: usize, total_bits: usize) -> Result<Matrix<T>> {
        let gates = monodromy_gates(&self.weights, &self.xi, t, Orientation::SiteFirst)?;
        let mut m = Matrix::identity(1 << total_bits);
        for (site, g) in gates.iter().enumerate().rev() {
            apply_gate_to_matrix(&mut m, site, aux_bit, g);
        }
        Ok(m)
    }

    /// Transfer matrix `Z(t) = A(t) + D(t)`.
    pub fn transfer_matrix(&self, t: &T) -> Result<Matrix<T>> {
        self.operator(Entry::A, t)?.add(&self.operator(Entry::D, t)?)
    }

    /// `a(t) = prod_alpha c~(xi_alpha - t)`.
    pub fn vacuum_eigenvalue(&self, t: &T) -> Result<T> {
        self.xi.iter().try_fold(T::one(), |acc, x| {
            let c = self.weights.c_tilde(&(x.clone() - t.clone())).map_err(|_| Error::PoleCollision {
                what: "t = xi + eta is a pole of a(t)".into(),
                a: t.to_string(),
                b: x.to_string(),
            })?;
            Ok(acc * c)
        })
    }

    /// `f(t_i) = prod_{alpha != i} c~(t_alpha - t_i) / c~(t_i - t_alpha)`.
    pub fn bethe_rhs(&self, roots: &[T], i: usize) -> Result<T> {
        let ti = &roots[i];
        roots.iter().enumerate().filter(|&(a, _)| a != i).try_fold(T::one(), |acc, (_, ta)| {
            let num = self.weights.c_tilde(&(ta.clone() - ti.clone()))?;
            let den = self.weights.c_tilde_inv(&(ti.clone() - ta.clone()))?;
            Ok(acc * num * den)
        })
    }

    /// Per-root residual `a(t_i) - f(t_i)`; all zero iff on-shell.
    pub fn bae_residual(&self, roots: &[T]) -> Result<Vec<T>> {
        ensure_distinct("Bethe roots", roots)?;
        (0..roots.len())
            .map(|i| Ok(self.vacuum_eigenvalue(&roots[i])? - self.bethe_rhs(roots, i)?))
            .collect()
    }

    /// `Lambda(t) = a(t) prod c~^{-1}(t_alpha - t) + prod c~^{-1}(t - t_alpha)`.
    pub fn transfer_eigenvalue(&self, t: &T, roots: &[T]) -> Result<T> {
        let mut first = self.vacuum_eigenvalue(t)?;
        let mut second = T::one();
        for ta in roots {
            first = first * self.weights.c_tilde_inv(&(ta.clone() - t.clone()))?;
            second = second * self.weights.c_tilde_inv(&(t.clone() - ta.clone()))?;
        }
        Ok(first + second)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ChainSpecJson {
            regime: self.regime(),
            n: self.n(),
            eta: self.eta().to_json(),
            xi: self.xi.iter().map(Field::to_json).collect(),
        })
        .expect("chain spec serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: ChainSpecJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        raw.build()
    }
}

fn negligible<T: Field>(x: &T) -> bool {
    if T::EXACT {
        x.is_zero()
    } else {
        x.magnitude() <= 1e-12
    }
}

/// Wire format: `{"regime":"xxx","n":2,"eta":"1","xi":["0","2"]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpecJson {
    pub regime: Regime,
    pub n: usize,
    pub eta: serde_json::Value,
    pub xi: Vec<serde_json::Value>,
}

impl ChainSpecJson {
    /// True when every value is an exact rational (and the regime allows it).
    pub fn is_exact(&self) -> Result<bool> {
        if self.regime == Regime::Xxz {
            return Ok(false);
        }
        let mut exact = scalar_from_json(&self.eta)?.is_exact();
        for x in &self.xi {
            exact &= scalar_from_json(x)?.is_exact();
        }
        Ok(exact)
    }

    pub fn build<T: Field>(&self) -> Result<ChainSpec<T>> {
        if self.n != self.xi.len() {
            return Err(Error::InvalidChain(format!("n = {} but {} inhomogeneities", self.n, self.xi.len())));
        }
        let eta = scalar_into(&scalar_from_json(&self.eta)?)?;
        let xi = self
            .xi
            .iter()
            .map(|x| scalar_into(&scalar_from_json(x)?))
            .collect::<Result<Vec<T>>>()?;
        ChainSpec::new(self.regime, eta, xi)
    }
}
