//! Scalar products `S_M({lambda}, {t}) = <0| C(lambda_1)...C(lambda_M) B(t_1)...B(t_M) |0>`
//! by several independent routes, the on-shell determinant, and the norm.
//!
//! Routes:
//!
//! * [`sp_direct`]: contraction with the chain's own operators.
//! * [`sp_subset_sum`]: sum over splits `{lambda} u {t} = {mu} u {nu}` of
//!   `prod a(nu) Phi_M(t, mu) Phi_M(lambda, mu) prod c~(mu_i - nu_j)^{-1}`.
//! * [`sp_partition_form`]: the same sum grouped by how many `t` land in `nu`.
//! * [`sp_fbasis`]: sum over F-basis coordinates `{x}`.
//! * [`sp_onshell_rewrite`]: the two sign-factor forms valid on-shell.
//! * [`sp_slavnov`] and [`sp_slavnov_jacobian`]: determinants, on-shell only.

use crate::chain::{ensure_distinct, ChainSpec, Entry, Weights};
use crate::error::{Error, Result};
use crate::field::{sign, Field};
#[cfg(test)]
use crate::field::numerically_close;
use crate::matrix::{dot, Matrix};
use crate::partition::{izergin_det, phi_m_cleared, phi_m_det, vandermonde, vandermonde_rev};
use crate::space::subsets;

/// Residual magnitude below which a float root set counts as on-shell.
pub const ONSHELL_TOLERANCE: f64 = 1e-10;

/// Which set a merged parameter came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Lambda,
    T,
}

fn complement(n: usize, chosen: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !chosen.contains(i)).collect()
}

fn pick<T: Clone>(values: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| values[i].clone()).collect()
}

/// Sign of the permutation moving the positions `chosen` (sorted) to the front.
fn front_parity(chosen: &[usize]) -> usize {
    chosen.iter().enumerate().map(|(i, &p)| p - i).sum::<usize>() % 2
}

fn check_pair<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<()> {
    if lambda.len() != t.len() {
        return Err(Error::SizeMismatch { left: lambda.len(), right: t.len() });
    }
    if t.len() > chain.n() {
        return Err(Error::TooManyParticles { m: t.len(), n: chain.n() });
    }
    ensure_distinct("lambda", lambda)?;
    ensure_distinct("t", t)
}

fn check_disjoint<T: Field>(lambda: &[T], t: &[T]) -> Result<()> {
    for l in lambda {
        if t.contains(l) {
            return Err(Error::CoincidingParameters { set: "lambda and t", value: l.to_string() });
        }
    }
    Ok(())
}

/// `<0| C(lambda) ... B(t) ... |0>` with no restriction on `lambda` vs `t`.
pub fn sp_contract<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<T> {
    if lambda.len() != t.len() {
        return Err(Error::SizeMismatch { left: lambda.len(), right: t.len() });
    }
    if t.len() > chain.n() {
        return Err(Error::TooManyParticles { m: t.len(), n: chain.n() });
    }
    let ket = chain.apply_product(Entry::B, t, &chain.vacuum())?;
    let bra = chain.apply_product_left(Entry::C, lambda, &chain.vacuum())?;
    Ok(dot(&bra, &ket))
}

/// Direct contraction for two disjoint parameter sets.
pub fn sp_direct<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<T> {
    check_pair(chain, lambda, t)?;
    check_disjoint(lambda, t)?;
    sp_contract(chain, lambda, t)
}

/// `<0| C(t) ... B(t) ... |0>`: the squared norm of a Bethe vector by contraction.
pub fn norm_direct<T: Field>(chain: &ChainSpec<T>, t: &[T]) -> Result<T> {
    sp_contract(chain, t, t)
}

/// Split sum with an arbitrary weight on `nu`. `weight(value, origin, index)`
/// receives the index within its own set.
pub fn subset_sum_with<T: Field>(
    w: &Weights<T>,
    lambda: &[T],
    t: &[T],
    weight: &dyn Fn(&T, Origin, usize) -> Result<T>,
) -> Result<T> {
    let m = t.len();
    if lambda.len() != m {
        return Err(Error::SizeMismatch { left: lambda.len(), right: m });
    }
    let merged: Vec<(T, Origin, usize)> = lambda
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), Origin::Lambda, i))
        .chain(t.iter().enumerate().map(|(i, x)| (x.clone(), Origin::T, i)))
        .collect();
    let values: Vec<T> = merged.iter().map(|m| m.0.clone()).collect();
    ensure_distinct("lambda u t", &values)?;
    let mut total = T::zero();
    for mu_idx in subsets(2 * m, m) {
        let nu_idx = complement(2 * m, &mu_idx);
        let of = |idx: &[usize], origin: Origin| -> Vec<T> {
            idx.iter().filter(|&&j| merged[j].1 == origin).map(|&j| values[j].clone()).collect()
        };
        let (lb, ta) = (of(&mu_idx, Origin::Lambda), of(&mu_idx, Origin::T));
        let (ln, tk) = (of(&nu_idx, Origin::Lambda), of(&nu_idx, Origin::T));
        let term = || -> Result<T> {
            // Phi_M(t, mu) reduces to Phi_m(t_k, lambda_beta) at mu n t = t_alpha, and
            // Phi_M(lambda, mu) to Phi_{M-m}(lambda_n, t_alpha); the cross factors
            // c~(lambda_beta - t_k)^{-1}, c~(t_alpha - lambda_n)^{-1} are absorbed.
            let mut term = phi_m_cleared(w, &tk, &lb)? * phi_m_cleared(w, &ln, &ta)?;
            for &j in &nu_idx {
                let (v, origin, k) = &merged[j];
                term = term * weight(v, *origin, *k)?;
            }
            for (mus, nus) in [(&lb, &ln), (&ta, &tk)] {
                for mu in mus.iter() {
                    for nu in nus.iter() {
                        term = term * w.c_tilde_inv(&(mu.clone() - nu.clone()))?;
                    }
                }
            }
            Ok(term)
        };
        total = total + term().map_err(|e| split_error(e, &values, &mu_idx))?;
    }
    Ok(total)
}

fn split_error<T: Field>(e: Error, values: &[T], mu_idx: &[usize]) -> Error {
    let mu: Vec<String> = mu_idx.iter().map(|&i| values[i].to_string()).collect();
    match e {
        Error::PoleCollision { what, a, b } => {
            Error::PoleCollision { what: format!("split mu = {{{}}}: {what}", mu.join(", ")), a, b }
        }
        Error::DivisionByZero(what) => Error::PoleCollision {
            what: format!("split mu = {{{}}}: {what}", mu.join(", ")),
            a: String::new(),
            b: String::new(),
        },
        other => other,
    }
}

/// Split sum with the chain's `a(nu)`.
pub fn sp_subset_sum<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<T> {
    check_pair(chain, lambda, t)?;
    subset_sum_with(chain.weights(), lambda, t, &|v, _, _| chain.vacuum_eigenvalue(v))
}

/// The split sum grouped by `m = |{t} n {nu}|`:
/// `sum prod a(lambda_n) a(t_k) Phi_m(t_k, lambda_beta) Phi_{M-m}(lambda_n, t_alpha)
///  prod c~^{-1}(lambda_beta - lambda_n) c~^{-1}(t_alpha - t_k) c~^{-1}(t_alpha - lambda_n) c~^{-1}(lambda_beta - t_k)`.
/// The last two products are folded into the `Phi`s, which cancels their
/// removable poles at `lambda_beta - t_k = -eta` and `t_alpha - lambda_n = -eta`.
pub fn sp_partition_form<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<T> {
    check_pair(chain, lambda, t)?;
    check_disjoint(lambda, t)?;
    let w = chain.weights();
    let big_m = t.len();
    let mut total = T::zero();
    for m in 0..=big_m {
        for k_idx in subsets(big_m, m) {
            let alpha_idx = complement(big_m, &k_idx);
            let (tk, ta) = (pick(t, &k_idx), pick(t, &alpha_idx));
            for n_idx in subsets(big_m, big_m - m) {
                let beta_idx = complement(big_m, &n_idx);
                let (ln, lb) = (pick(lambda, &n_idx), pick(lambda, &beta_idx));
                let mut term = phi_m_cleared(w, &tk, &lb)? * phi_m_cleared(w, &ln, &ta)?;
                for x in tk.iter().chain(&ln) {
                    term = term * chain.vacuum_eigenvalue(x)?;
                }
                for (mus, nus) in [(&lb, &ln), (&ta, &tk)] {
                    for mu in mus.iter() {
                        for nu in nus.iter() {
                            term = term * w.c_tilde_inv(&(mu.clone() - nu.clone()))?;
                        }
                    }
                }
                total = total + term;
            }
        }
    }
    Ok(total)
}

/// F-basis coordinate sum:
/// `prod a(t) prod a(lambda) sum_{x} prod c~(xi_alpha - xi_x)^{-1}
///  (Phi_M(lambda, xi_x) prod c~(xi_x - lambda)^{-1}) (Phi_M(t, xi_x) prod c~(xi_x - t)^{-1})`.
pub fn sp_fbasis<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<T> {
    check_pair(chain, lambda, t)?;
    let w = chain.weights();
    let xi = chain.xi();
    let n = chain.n();
    let mut prefactor = T::one();
    for x in t.iter().chain(lambda) {
        prefactor = prefactor * chain.vacuum_eigenvalue(x)?;
    }
    let mut total = T::zero();
    for x_idx in subsets(n, t.len()) {
        let xs = pick(xi, &x_idx);
        let mut term = phi_m_det(w, lambda, &xs)? * phi_m_det(w, t, &xs)?;
        for x in &xs {
            for alpha in complement(n, &x_idx) {
                term = term * w.c_tilde_inv(&(xi[alpha].clone() - x.clone()))?;
            }
            for p in lambda.iter().chain(t) {
                term = term * w.c_tilde_inv(&(x.clone() - p.clone()))?;
            }
        }
        total = total + term;
    }
    Ok(prefactor * total)
}

/// Residuals of the Bethe equations, or [`Error::OffShell`] if any is
/// nonzero (exact field) or at least [`ONSHELL_TOLERANCE`] in magnitude.
pub fn ensure_on_shell<T: Field>(chain: &ChainSpec<T>, t: &[T]) -> Result<Vec<T>> {
    let residuals = chain.bae_residual(t)?;
    let ok = residuals.iter().all(|r| if T::EXACT { r.is_zero() } else { r.magnitude() < ONSHELL_TOLERANCE });
    if !ok {
        return Err(Error::OffShell { residuals: residuals.iter().map(|r| r.to_string()).collect() });
    }
    Ok(residuals)
}

/// Which of the two printed on-shell rewrites to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rewrite {
    /// `prod(lambda_beta - lambda_n + eta)(t_k - t_alpha + eta)(t_alpha - lambda_n + eta)(lambda_beta - t_k + eta)`.
    Products,
    /// `(-1)^{Mm} prod(t - lambda_n + eta) prod(t - lambda_beta - eta)` with the two ratio products.
    Factored,
}

/// On-shell rewrite of the split sum with explicit parity signs
/// `(-1)^{P_k} (-1)^{P_n}`. The sign is the parity of moving `{t_k}` to the
/// front of `{t}` and `{lambda_beta}` to the front of `{lambda}`, times
/// `(-1)^{m(m-1)/2 + (M-m)(M-m-1)/2 + M(M-1)/2}` from reordering the
/// Vandermonde factors of the two `Phi`s.
pub fn sp_onshell_rewrite<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T], form: Rewrite) -> Result<T> {
    check_pair(chain, lambda, t)?;
    check_disjoint(lambda, t)?;
    ensure_on_shell(chain, t)?;
    let w = chain.weights();
    let big_m = t.len();
    let pshift = |x: T, k: i64| w.phi_shift(&x, k);
    let mut total = T::zero();
    for m in 0..=big_m {
        let base = m * (m.saturating_sub(1)) / 2
            + (big_m - m) * (big_m - m).saturating_sub(1) / 2
            + big_m * big_m.saturating_sub(1) / 2;
        for k_idx in subsets(big_m, m) {
            let alpha_idx = complement(big_m, &k_idx);
            let (tk, ta) = (pick(t, &k_idx), pick(t, &alpha_idx));
            for n_idx in subsets(big_m, big_m - m) {
                let beta_idx = complement(big_m, &n_idx);
                let (ln, lb) = (pick(lambda, &n_idx), pick(lambda, &beta_idx));
                let parity = base + front_parity(&k_idx) + front_parity(&beta_idx);
                let mut term = sign::<T>(parity) * izergin_det(w, &tk, &lb)? * izergin_det(w, &ln, &ta)?;
                for x in &ln {
                    term = term * chain.vacuum_eigenvalue(x)?;
                }
                match form {
                    Rewrite::Products => {
                        for b in &lb {
                            for n in &ln {
                                term = term * pshift(b.clone() - n.clone(), 1)?;
                            }
                            for k in &tk {
                                term = term * pshift(b.clone() - k.clone(), 1)?;
                            }
                        }
                        for a in &ta {
                            for k in &tk {
                                term = term * pshift(k.clone() - a.clone(), 1)?;
                            }
                            for n in &ln {
                                term = term * pshift(a.clone() - n.clone(), 1)?;
                            }
                        }
                    }
                    Rewrite::Factored => {
                        term = term * sign::<T>(big_m * m);
                        for ti in t {
                            for n in &ln {
                                term = term * pshift(ti.clone() - n.clone(), 1)?;
                            }
                            for b in &lb {
                                term = term * pshift(ti.clone() - b.clone(), -1)?;
                            }
                        }
                        for k in &tk {
                            for a in &ta {
                                term = term * pshift(k.clone() - a.clone(), 1)?;
                            }
                            for n in &ln {
                                term = term.checked_div(&pshift(k.clone() - n.clone(), 1)?, "t_k - lambda_n + eta")?;
                            }
                        }
                        for b in &lb {
                            for n in &ln {
                                term = term * pshift(b.clone() - n.clone(), 1)?;
                            }
                            for a in &ta {
                                term = term.checked_div(&pshift(b.clone() - a.clone(), 1)?, "lambda_beta - t_alpha + eta")?;
                            }
                        }
                    }
                }
                total = total + term;
            }
        }
    }
    let den = vandermonde(w, t)? * vandermonde_rev(w, lambda)?;
    total.checked_div(&den, "Vandermonde of t and lambda")
}

/// Slavnov matrix
/// `M_ij = phi(eta)/phi(t_i - lambda_j) (a(lambda_j) prod_{alpha != i} phi(t_alpha - lambda_j + eta)
///        - prod_{alpha != i} phi(t_alpha - lambda_j - eta))`
/// for an arbitrary function `a`.
pub fn slavnov_matrix<T: Field>(
    w: &Weights<T>,
    lambda: &[T],
    t: &[T],
    a: &dyn Fn(&T) -> Result<T>,
) -> Result<Matrix<T>> {
    let pe = w.phi_eta()?;
    let a_vals: Vec<T> = lambda.iter().map(a).collect::<Result<_>>()?;
    Matrix::try_from_fn(t.len(), lambda.len(), |i, j| {
        let mut plus = a_vals[j].clone();
        let mut minus = T::one();
        for (alpha, ta) in t.iter().enumerate() {
            if alpha != i {
                let u = ta.clone() - lambda[j].clone();
                plus = plus * w.phi_shift(&u, 1)?;
                minus = minus * w.phi_shift(&u, -1)?;
            }
        }
        let lead = pe.checked_div(&w.phi(&(t[i].clone() - lambda[j].clone()))?, "t_i - lambda_j")?;
        Ok(lead * (plus - minus))
    })
}

/// `det M / (prod_{i<j} phi(t_i - t_j) prod_{j<i} phi(lambda_i - lambda_j))`
/// for an arbitrary `a`, with no on-shell check.
pub fn slavnov_with<T: Field>(w: &Weights<T>, lambda: &[T], t: &[T], a: &dyn Fn(&T) -> Result<T>) -> Result<T> {
    if t.is_empty() {
        return Ok(T::one());
    }
    let det = slavnov_matrix(w, lambda, t, a)?.det()?;
    det.checked_div(&(vandermonde(w, t)? * vandermonde_rev(w, lambda)?), "Vandermonde of t and lambda")
}

/// Slavnov determinant; refuses off-shell `t`.
pub fn sp_slavnov<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<T> {
    check_pair(chain, lambda, t)?;
    check_disjoint(lambda, t)?;
    ensure_on_shell(chain, t)?;
    slavnov_with(chain.weights(), lambda, t, &|x| chain.vacuum_eigenvalue(x))
}

/// `d/dt_i Lambda(lambda; {t})`, from the closed form of the transfer eigenvalue.
pub fn transfer_eigenvalue_derivative<T: Field>(chain: &ChainSpec<T>, lambda: &T, t: &[T], i: usize) -> Result<T> {
    let w = chain.weights();
    let d = |x: T| chain.regime().log_derivative(&x);
    let eta = chain.eta().clone();
    let mut first = chain.vacuum_eigenvalue(lambda)?;
    let mut second = T::one();
    for ta in t {
        first = first * w.c_tilde_inv(&(ta.clone() - lambda.clone()))?;
        second = second * w.c_tilde_inv(&(lambda.clone() - ta.clone()))?;
    }
    let u = t[i].clone() - lambda.clone();
    let df = d(u.clone() + eta.clone())? - d(u.clone())?;
    let ds = d(-u.clone() + eta)? - d(-u)?;
    Ok(first * df - second * ds)
}

/// How the `(-1)^M` of the Jacobian form is carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianSign {
    /// `(-1)^M prod_{i,j} phi(t_i - lambda_j)`.
    Explicit,
    /// `prod_{i,j} phi(lambda_i - t_j)`.
    Absorbed,
}

/// `S_M = (-1)^M prod phi(t_i - lambda_j) / (prod_{i<j} phi(t_i - t_j) prod_{j<i} phi(lambda_i - lambda_j))
///        * det(d Lambda(lambda_j) / d t_i)`.
pub fn sp_slavnov_jacobian<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T], convention: JacobianSign) -> Result<T> {
    check_pair(chain, lambda, t)?;
    check_disjoint(lambda, t)?;
    ensure_on_shell(chain, t)?;
    let w = chain.weights();
    let big_m = t.len();
    if big_m == 0 {
        return Ok(T::one());
    }
    let jac = Matrix::try_from_fn(big_m, big_m, |i, j| transfer_eigenvalue_derivative(chain, &lambda[j], t, i))?;
    let mut pre = match convention {
        JacobianSign::Explicit => sign::<T>(big_m),
        JacobianSign::Absorbed => T::one(),
    };
    for ti in t {
        for lj in lambda {
            pre = pre
                * match convention {
                    JacobianSign::Explicit => w.phi(&(ti.clone() - lj.clone()))?,
                    JacobianSign::Absorbed => w.phi(&(lj.clone() - ti.clone()))?,
                };
        }
    }
    let den = vandermonde(w, t)? * vandermonde_rev(w, lambda)?;
    (pre * jac.det()?).checked_div(&den, "Vandermonde of t and lambda")
}

/// `-(ln a)'(x) = sum_alpha [d(xi_alpha - x) - d(xi_alpha - x + eta)]`.
fn minus_log_a_prime<T: Field>(chain: &ChainSpec<T>, x: &T) -> Result<T> {
    let d = |u: T| chain.regime().log_derivative(&u);
    chain.xi().iter().try_fold(T::zero(), |acc, xa| {
        let u = xa.clone() - x.clone();
        Ok(acc + d(u.clone())? - d(u + chain.eta().clone())?)
    })
}

/// `(ln c~)'(x) = d(x) - d(x + eta)`.
fn log_c_prime<T: Field>(chain: &ChainSpec<T>, x: T) -> Result<T> {
    let d = |u: T| chain.regime().log_derivative(&u);
    Ok(d(x.clone())? - d(x + chain.eta().clone())?)
}

/// `N_ij = -d/dt_j ln(a(t_i)/f(t_i))`, differentiating the logarithm of each factor.
pub fn gaudin_matrix_log<T: Field>(chain: &ChainSpec<T>, t: &[T]) -> Result<Matrix<T>> {
    let m = t.len();
    Matrix::try_from_fn(m, m, |i, j| {
        if i == j {
            let mut v = minus_log_a_prime(chain, &t[i])?;
            for (alpha, ta) in t.iter().enumerate() {
                if alpha != i {
                    v = v - log_c_prime(chain, ta.clone() - t[i].clone())?
                        - log_c_prime(chain, t[i].clone() - ta.clone())?;
                }
            }
            Ok(v)
        } else {
            Ok(log_c_prime(chain, t[j].clone() - t[i].clone())? + log_c_prime(chain, t[i].clone() - t[j].clone())?)
        }
    })
}

/// `N_ij = phi(2 eta) / (phi(t_ij + eta) phi(t_ij - eta))` off the diagonal and
/// `N_ii = -(ln a)'(t_i) - sum_{alpha != i} N_{alpha i}`.
pub fn gaudin_matrix_explicit<T: Field>(chain: &ChainSpec<T>, t: &[T]) -> Result<Matrix<T>> {
    let w = chain.weights();
    let two_eta = chain.eta().clone() + chain.eta().clone();
    let p2 = w.phi(&two_eta)?;
    let kernel = |x: T| -> Result<T> {
        let den = w.phi_shift(&x, 1)? * w.phi_shift(&x, -1)?;
        p2.checked_div(&den, "t_i - t_j = +-eta")
    };
    let m = t.len();
    Matrix::try_from_fn(m, m, |i, j| {
        if i == j {
            let mut v = minus_log_a_prime(chain, &t[i])?;
            for (alpha, ta) in t.iter().enumerate() {
                if alpha != i {
                    v = v - kernel(ta.clone() - t[i].clone())?;
                }
            }
            Ok(v)
        } else {
            kernel(t[i].clone() - t[j].clone())
        }
    })
}

/// `N = L D` with `L_ij = delta_ij + (1 - delta_ij) N_ij / N_jj`, `D = diag(N_jj)`.
pub fn gaudin_factorization<T: Field>(n: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let m = n.rows();
    let diag = n.diagonal_entries();
    let l = Matrix::try_from_fn(m, m, |i, j| {
        if i == j {
            Ok(T::one())
        } else {
            n[(i, j)].checked_div(&diag[j], "vanishing diagonal Gaudin entry")
        }
    })?;
    Ok((l, Matrix::diagonal(diag)))
}

/// Norm of a Bethe vector together with its intermediate matrices.
#[derive(Debug, Clone)]
pub struct GaudinNorm<T: Field> {
    pub value: T,
    pub matrix: Matrix<T>,
    pub forms_agree: bool,
    pub factorization_holds: bool,
}

/// `N_M = phi(eta)^M prod_{i != j} phi(t_i - t_j + eta)/phi(t_i - t_j) det N`; refuses off-shell `t`.
pub fn gaudin_norm<T: Field>(chain: &ChainSpec<T>, t: &[T], tol: f64) -> Result<GaudinNorm<T>> {
    if t.len() > chain.n() {
        return Err(Error::TooManyParticles { m: t.len(), n: chain.n() });
    }
    ensure_distinct("t", t)?;
    ensure_on_shell(chain, t)?;
    let w = chain.weights();
    let log_form = gaudin_matrix_log(chain, t)?;
    let explicit = gaudin_matrix_explicit(chain, t)?;
    let (l, d) = gaudin_factorization(&explicit)?;
    let factorization_holds = l.mul(&d)?.approx_eq(&explicit, tol);
    let mut value = crate::field::powi(&w.phi_eta()?, t.len());
    for (i, ti) in t.iter().enumerate() {
        for (j, tj) in t.iter().enumerate() {
            if i != j {
                let u = ti.clone() - tj.clone();
                value = value * w.phi_shift(&u, 1)?.checked_div(&w.phi(&u)?, "t_i - t_j")?;
            }
        }
    }
    if !t.is_empty() {
        value = value * explicit.det()?;
    }
    Ok(GaudinNorm { value, forms_agree: log_form.approx_eq(&explicit, tol), matrix: explicit, factorization_holds })
}

/// Richardson extrapolation of `sp_slavnov(t + h, t)` to `h = 0` from `h`, `h/2`, `h/4`.
pub fn slavnov_limit<T: Field>(chain: &ChainSpec<T>, t: &[T], h: &T) -> Result<T> {
    let two = T::from_usize(2);
    let mut values = Vec::with_capacity(3);
    let mut step = h.clone();
    for _ in 0..3 {
        let lambda: Vec<T> = t.iter().map(|x| x.clone() + step.clone()).collect();
        values.push(sp_slavnov(chain, &lambda, t)?);
        step = step / two.clone();
    }
    // (8 S(h/4) - 6 S(h/2) + S(h)) / 3
    let combo = T::from_usize(8) * values[2].clone() - T::from_usize(6) * values[1].clone() + values[0].clone();
    Ok(combo / T::from_usize(3))
}

/// Both sides of the residue recursion at `lambda_1 -> t_1`, for the split sum
/// with weights `a(lambda)` on `lambda` and `f(t_i)` on `t`.
///
/// The left side `(t_1 - lambda_1) S_M` is sampled at `lambda_1 = t_1 + k h`
/// for `k = 1, 2, 3` and extrapolated quadratically to `h = 0`. The right side is
/// `phi(eta) (a(t_1) - f(t_1)) prod_{alpha != 1} c~^{-1}(t_alpha - t_1) c~^{-1}(lambda_alpha - t_1) S_{M-1}`
/// where `S_{M-1}` drops `lambda_1, t_1`, weights `lambda` by
/// `a(nu) c~(nu - t_1)/c~(t_1 - nu)` and `t` by `f` over the reduced set.
pub fn residue_recursion<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T], h: &T) -> Result<(T, T)> {
    check_pair(chain, lambda, t)?;
    if t.is_empty() {
        return Err(Error::SizeMismatch { left: 0, right: 1 });
    }
    let w = chain.weights();
    let f_over = |set: &[T], i: usize| chain.bethe_rhs(set, i);
    let sample = |k: usize| -> Result<T> {
        let eps = T::from_usize(k) * h.clone();
        let mut lam = lambda.to_vec();
        lam[0] = t[0].clone() + eps.clone();
        let s = subset_sum_with(w, &lam, t, &|v, origin, i| match origin {
            Origin::Lambda => chain.vacuum_eigenvalue(v),
            Origin::T => f_over(t, i),
        })?;
        Ok(-eps * s)
    };
    let (g1, g2, g3) = (sample(1)?, sample(2)?, sample(3)?);
    let three = T::from_usize(3);
    let lhs = three.clone() * g1 - three * g2 + g3;

    let t1 = &t[0];
    let mut rhs = w.phi_eta()? * (chain.vacuum_eigenvalue(t1)? - f_over(t, 0)?);
    for (ta, la) in t[1..].iter().zip(&lambda[1..]) {
        rhs = rhs * w.c_tilde_inv(&(ta.clone() - t1.clone()))? * w.c_tilde_inv(&(la.clone() - t1.clone()))?;
    }
    let (lam_r, t_r) = (&lambda[1..], &t[1..]);
    let reduced = subset_sum_with(w, lam_r, t_r, &|v, origin, i| match origin {
        Origin::Lambda => {
            let ratio = w.c_tilde(&(v.clone() - t1.clone()))?
                .checked_div(&w.c_tilde(&(t1.clone() - v.clone()))?, "c~(t_1 - nu)")?;
            Ok(chain.vacuum_eigenvalue(v)? * ratio)
        }
        Origin::T => f_over(t_r, i),
    })?;
    Ok((lhs, rhs * reduced))
}
