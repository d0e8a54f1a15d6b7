//! Pointwise checks of the determinant and summation identities behind the
//! scalar-product formulas. Every check compares two independently computed
//! values; with rationals the comparison is exact.

use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::{ChainSpec, Weights};
use crate::error::{Error, Result};
use crate::field::{Field, Rational, DEFAULT_TOLERANCE};
use crate::fixtures::{Bounds, Sampler};
use crate::matrix::Matrix;
use crate::partition::{phi_m_det, phi_m_direct};
use crate::scalar_products::{sp_direct, sp_fbasis};
use crate::space::subsets;

/// One identity at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub fixture: Value,
    pub lhs: Value,
    pub rhs: Value,
    pub pass: bool,
}

impl IdentityReport {
    fn new<T: Field>(id: impl Into<String>, fixture: Value, lhs: &T, rhs: &T) -> Self {
        IdentityReport {
            id: id.into(),
            fixture,
            lhs: lhs.to_json(),
            rhs: rhs.to_json(),
            pass: lhs.approx_eq(rhs, DEFAULT_TOLERANCE),
        }
    }
}

fn values<T: Field>(v: &[T]) -> Value {
    Value::Array(v.iter().map(Field::to_json).collect())
}

fn inv<T: Field>(x: T, what: &str) -> Result<T> {
    x.inv(what)
}

fn b2_matrix<T: Field>(t: &[T], lambda: &[T], eta: &T) -> Result<Matrix<T>> {
    Matrix::try_from_fn(t.len(), lambda.len(), |i, j| {
        let u = t[i].clone() - lambda[j].clone();
        inv(u.clone() * (u + eta.clone()), "t_i - lambda_j in {0, -eta}")
    })
}

/// Row and column reductions of `M_ij = 1/((t_i - lambda_j)(t_i - lambda_j + eta))`.
///
/// Row form: `M'_1j = M_1j + sum_{x != 1} C_x M_xj` with
/// `C_x = -prod_beta (t_x - lambda_beta + eta)/(t_1 - lambda_beta + eta) prod_{alpha != 1,x} (t_1 - t_alpha)/(t_x - t_alpha)`
/// equals
/// `1/((t_1 - lambda_j)(t_1 - lambda_j + eta)) prod_{alpha != 1} (t_1 - t_alpha)/(lambda_j - t_alpha)
///  prod_{beta != j} (lambda_j - lambda_beta + eta)/(t_1 - lambda_beta + eta)`.
///
/// Column form: `M'_i1 = M_i1 + sum_{x != 1} C_x M_ix` with
/// `C_x = -prod_alpha (lambda_x - t_alpha)/(lambda_1 - t_alpha) prod_{beta != 1,x} (lambda_1 - lambda_beta)/(lambda_x - lambda_beta)`
/// equals
/// `1/((t_i - lambda_1)(t_i - lambda_1 + eta)) prod_{alpha != i} (t_i - t_alpha + eta)/(lambda_1 - t_alpha)
///  prod_{beta != 1} (lambda_1 - lambda_beta)/(t_i - lambda_beta + eta)`.
pub fn row_reduction_b2<T: Field>(t: &[T], lambda: &[T], eta: &T) -> Result<Vec<IdentityReport>> {
    if t.len() != lambda.len() || t.is_empty() {
        return Err(Error::SizeMismatch { left: t.len(), right: lambda.len() });
    }
    let m = t.len();
    let fixture = json!({"t": values(t), "lambda": values(lambda), "eta": eta.to_json()});
    let mat = b2_matrix(t, lambda, eta)?;
    let mut reports = Vec::new();

    let mut row_c = vec![T::zero(); m];
    for x in 1..m {
        let mut c = -T::one();
        for lb in lambda {
            c = c * (t[x].clone() - lb.clone() + eta.clone());
            c = c * inv(t[0].clone() - lb.clone() + eta.clone(), "t_1 - lambda_beta + eta")?;
        }
        for (a, ta) in t.iter().enumerate() {
            if a != 0 && a != x {
                c = c * (t[0].clone() - ta.clone()) * inv(t[x].clone() - ta.clone(), "t_x - t_alpha")?;
            }
        }
        row_c[x] = c;
    }
    let mut reduced = mat.clone();
    for j in 0..m {
        let mut v = mat[(0, j)].clone();
        for x in 1..m {
            v = v + row_c[x].clone() * mat[(x, j)].clone();
        }
        reduced[(0, j)] = v.clone();
        let u = t[0].clone() - lambda[j].clone();
        let mut closed = inv(u.clone() * (u + eta.clone()), "t_1 - lambda_j")?;
        for ta in &t[1..] {
            closed = closed * (t[0].clone() - ta.clone()) * inv(lambda[j].clone() - ta.clone(), "lambda_j - t_alpha")?;
        }
        for (b, lb) in lambda.iter().enumerate() {
            if b != j {
                closed = closed
                    * (lambda[j].clone() - lb.clone() + eta.clone())
                    * inv(t[0].clone() - lb.clone() + eta.clone(), "t_1 - lambda_beta + eta")?;
            }
        }
        reports.push(IdentityReport::new(format!("row_reduction_b2.row[{}]", j + 1), fixture.clone(), &v, &closed));
    }
    reports.push(IdentityReport::new("row_reduction_b2.det", fixture.clone(), &reduced.det()?, &mat.det()?));

    let mut col_c = vec![T::zero(); m];
    for x in 1..m {
        let mut c = -T::one();
        for ta in t {
            c = c * (lambda[x].clone() - ta.clone()) * inv(lambda[0].clone() - ta.clone(), "lambda_1 - t_alpha")?;
        }
        for (b, lb) in lambda.iter().enumerate() {
            if b != 0 && b != x {
                c = c * (lambda[0].clone() - lb.clone()) * inv(lambda[x].clone() - lb.clone(), "lambda_x - lambda_beta")?;
            }
        }
        col_c[x] = c;
    }
    let mut reduced = mat.clone();
    for i in 0..m {
        let mut v = mat[(i, 0)].clone();
        for x in 1..m {
            v = v + col_c[x].clone() * mat[(i, x)].clone();
        }
        reduced[(i, 0)] = v.clone();
        let u = t[i].clone() - lambda[0].clone();
        let mut closed = inv(u.clone() * (u + eta.clone()), "t_i - lambda_1")?;
        for (a, ta) in t.iter().enumerate() {
            if a != i {
                closed = closed
                    * (t[i].clone() - ta.clone() + eta.clone())
                    * inv(lambda[0].clone() - ta.clone(), "lambda_1 - t_alpha")?;
            }
        }
        for lb in &lambda[1..] {
            closed = closed
                * (lambda[0].clone() - lb.clone())
                * inv(t[i].clone() - lb.clone() + eta.clone(), "t_i - lambda_beta + eta")?;
        }
        reports.push(IdentityReport::new(format!("row_reduction_b2.column[{}]", i + 1), fixture.clone(), &v, &closed));
    }
    reports.push(IdentityReport::new("row_reduction_b2.column_det", fixture, &reduced.det()?, &mat.det()?));
    Ok(reports)
}

/// Vanishing contour integral of `f(z)/((z - t_1)(z - lambda_j) prod_{alpha != 1}(z - t_alpha))`
/// with `f(z) = prod_{beta != j} (z - lambda_beta + eta)/(t_1 - lambda_beta + eta)`:
/// the residues at `t_x`, `x != 1`, against minus those at `t_1` and `lambda_j`.
/// `j` is zero-based.
pub fn residue_sum<T: Field>(t: &[T], lambda: &[T], j: usize, eta: &T) -> Result<IdentityReport> {
    if t.len() != lambda.len() || j >= lambda.len() {
        return Err(Error::SizeMismatch { left: t.len(), right: lambda.len() });
    }
    let f = |z: &T| -> Result<T> {
        lambda.iter().enumerate().filter(|&(b, _)| b != j).try_fold(T::one(), |acc, (_, lb)| {
            Ok(acc * (z.clone() - lb.clone() + eta.clone())
                * inv(t[0].clone() - lb.clone() + eta.clone(), "t_1 - lambda_beta + eta")?)
        })
    };
    let lj = &lambda[j];
    let mut lhs = T::zero();
    for x in 1..t.len() {
        let mut den = (t[x].clone() - t[0].clone()) * (t[x].clone() - lj.clone());
        for (a, ta) in t.iter().enumerate() {
            if a != 0 && a != x {
                den = den * (t[x].clone() - ta.clone());
            }
        }
        lhs = lhs + f(&t[x])? * inv(den, "residue at t_x")?;
    }
    let mut d1 = t[0].clone() - lj.clone();
    let mut d2 = lj.clone() - t[0].clone();
    for ta in &t[1..] {
        d1 = d1 * (t[0].clone() - ta.clone());
        d2 = d2 * (lj.clone() - ta.clone());
    }
    let rhs = -(f(&t[0])? * inv(d1, "residue at t_1")? + f(lj)? * inv(d2, "residue at lambda_j")?);
    let fixture = json!({"t": values(t), "lambda": values(lambda), "j": j + 1, "eta": eta.to_json()});
    Ok(IdentityReport::new("residue_sum", fixture, &lhs, &rhs))
}

/// Coordinate-sum summand `prod_{alpha not in x, j} (xi_alpha - xi_{x_j})^{-1} prod_{i,j} (xi_{x_i} - lambda_j)^{-1}`.
fn simplified_term<T: Field>(xi: &[T], lambda: &[T], x: &[usize]) -> Result<T> {
    let mut den = T::one();
    for &xj in x {
        for (a, xa) in xi.iter().enumerate() {
            if !x.contains(&a) {
                den = den * (xa.clone() - xi[xj].clone());
            }
        }
        for l in lambda {
            den = den * (xi[xj].clone() - l.clone());
        }
    }
    inv(den, "xi_x - lambda_j")
}

/// `sum_{x_1 < ... < x_M} prod (xi_alpha - xi_x)^{-1} prod (xi_x - lambda)^{-1} = prod_{alpha, i} (xi_alpha - lambda_i)^{-1}`,
/// and the relaxed sum over all tuples with the `prod_{i != j}(xi_{x_i} - xi_{x_j})` numerator,
/// which counts each set `M!` times.
pub fn simplified_sum_s<T: Field>(xi: &[T], lambda: &[T]) -> Result<Vec<IdentityReport>> {
    let (n, m) = (xi.len(), lambda.len());
    if m > n {
        return Err(Error::TooManyParticles { m, n });
    }
    let mut closed = T::one();
    for x in xi {
        for l in lambda {
            closed = closed * inv(x.clone() - l.clone(), "xi_alpha = lambda_i")?;
        }
    }
    let mut constrained = T::zero();
    for x in subsets(n, m) {
        constrained = constrained + simplified_term(xi, lambda, &x)?;
    }
    let mut relaxed = T::zero();
    let mut factorial = T::one();
    for k in 1..=m {
        factorial = factorial * T::from_usize(k);
    }
    for tuple in tuples(n, m) {
        let mut num = T::one();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    num = num * (xi[tuple[i]].clone() - xi[tuple[j]].clone());
                }
            }
        }
        if num.is_zero() {
            continue;
        }
        let mut den = T::one();
        for &xj in &tuple {
            for (a, xa) in xi.iter().enumerate() {
                if a != xj {
                    den = den * (xa.clone() - xi[xj].clone());
                }
            }
            for l in lambda {
                den = den * (xi[xj].clone() - l.clone());
            }
        }
        relaxed = relaxed + num * inv(den, "xi_x - lambda_j")?;
    }
    let fixture = json!({"xi": values(xi), "lambda": values(lambda)});
    Ok(vec![
        IdentityReport::new("simplified_sum_S", fixture.clone(), &constrained, &closed),
        IdentityReport::new("simplified_sum_S.relaxed", fixture, &relaxed, &(factorial * closed)),
    ])
}

/// All `n^m` index tuples.
fn tuples(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out.into_iter().flat_map(|p| (0..n).map(move |k| [p.clone(), vec![k]].concat())).collect();
    }
    out
}

/// `Phi_M(xi, t)` with `xi_2 = xi_1 + eta` and, separately, `xi_2 = xi_1 - eta`,
/// compared against zero.
pub fn phi_vanishing<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<Vec<IdentityReport>> {
    if xi.len() < 2 {
        return Err(Error::SizeMismatch { left: xi.len(), right: 2 });
    }
    let mut reports = Vec::new();
    for (label, k) in [("plus", 1i64), ("minus", -1)] {
        let mut shifted = xi.to_vec();
        shifted[1] = xi[0].clone() + w.eta().clone() * T::from_ratio(k, 1);
        let value = phi_m_direct(w, &shifted, t)?;
        let fixture = json!({"xi": values(&shifted), "t": values(t), "eta": w.eta().to_json()});
        reports.push(IdentityReport::new(format!("phi_vanishing.{label}"), fixture, &value, &T::zero()));
    }
    Ok(reports)
}

/// The coordinate sum over sets `{x}` against the relaxed sum over all tuples
/// `(x_1..x_M)` of
/// `prod_j [prod_{alpha != x_j} c~(xi_alpha - xi_{x_j}) prod_i c~(xi_{x_j} - t_i) c~(xi_{x_j} - lambda_i)]^{-1}
///  prod_{i != j} (xi_{x_i} - xi_{x_j})/(xi_{x_i} - xi_{x_j} + eta) Phi_M(t, xi_x) Phi_M(lambda, xi_x)`,
/// divided by `M!` and multiplied by `prod a(t) a(lambda)`; both against contraction.
pub fn fbasis_relaxation<T: Field>(chain: &ChainSpec<T>, lambda: &[T], t: &[T]) -> Result<Vec<IdentityReport>> {
    let w = chain.weights();
    let xi = chain.xi();
    let m = t.len();
    let mut relaxed = T::zero();
    for tuple in tuples(chain.n(), m) {
        let xs: Vec<T> = tuple.iter().map(|&k| xi[k].clone()).collect();
        let mut num = T::one();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    num = num * w.c_tilde(&(xs[i].clone() - xs[j].clone()))?;
                }
            }
        }
        if num.is_zero() {
            continue;
        }
        let mut term = num * phi_m_direct(w, t, &xs)? * phi_m_direct(w, lambda, &xs)?;
        for (j, x) in xs.iter().enumerate() {
            for (a, xa) in xi.iter().enumerate() {
                if a != tuple[j] {
                    term = term * w.c_tilde_inv(&(xa.clone() - x.clone()))?;
                }
            }
            for p in t.iter().chain(lambda) {
                term = term * w.c_tilde_inv(&(x.clone() - p.clone()))?;
            }
        }
        relaxed = relaxed + term;
    }
    let mut factor = T::one();
    for k in 1..=m {
        factor = factor * T::from_usize(k);
    }
    let mut prefactor = T::one();
    for p in t.iter().chain(lambda) {
        prefactor = prefactor * chain.vacuum_eigenvalue(p)?;
    }
    let relaxed = prefactor * relaxed / factor;
    let constrained = sp_fbasis(chain, lambda, t)?;
    let direct = sp_direct(chain, lambda, t)?;
    let fixture = json!({"chain": chain.to_json(), "lambda": values(lambda), "t": values(t)});
    Ok(vec![
        IdentityReport::new("fbasis_relaxation.relaxed_vs_constrained", fixture.clone(), &relaxed, &constrained),
        IdentityReport::new("fbasis_relaxation.constrained_vs_direct", fixture, &constrained, &direct),
    ])
}

/// Which identities [`run_all`] evaluates.
pub const IDENTITY_IDS: [&str; 5] = ["row_reduction_b2", "residue_sum", "simplified_sum_S", "phi_vanishing", "fbasis_relaxation"];

/// Evaluates every identity at `samples` random rational points.
pub fn run_all(seed: u64, samples: usize) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for id in IDENTITY_IDS {
        out.extend(run_identity(id, seed, samples)?);
    }
    Ok(out)
}

/// Evaluates one identity (by id) at `samples` random rational points.
pub fn run_identity(id: &str, seed: u64, samples: usize) -> Result<Vec<IdentityReport>> {
    let mut s = Sampler::new(seed, Bounds::default());
    let mut out = Vec::new();
    for k in 0..samples {
        let m = 1 + k % 3;
        match id {
            "row_reduction_b2" | "residue_sum" => {
                let eta = s.nonzero()?;
                let t = s.generic(m, &[], &eta, &[1])?;
                let lambda = s.generic(m, &t, &eta, &[1])?;
                if id == "row_reduction_b2" {
                    out.extend(row_reduction_b2(&t, &lambda, &eta)?);
                } else {
                    let j = s.usize_in(0, m - 1);
                    out.push(residue_sum(&t, &lambda, j, &eta)?);
                }
            }
            "simplified_sum_S" => {
                let n = s.usize_in(m, m + 2);
                let xi = s.generic(n, &[], &Rational::from_ratio(0, 1), &[])?;
                let lambda = s.generic(m, &xi, &Rational::from_ratio(0, 1), &[])?;
                out.extend(simplified_sum_s(&xi, &lambda)?);
            }
            "phi_vanishing" => {
                let m = 2 + k % 2;
                let eta = s.nonzero()?;
                let w = Weights::new(crate::field::Regime::Xxx, eta.clone())?;
                let xi = s.generic(m, &[], &eta, &[1, 2])?;
                let t = s.generic(m, &xi, &eta, &[1, 2])?;
                out.extend(phi_vanishing(&w, &xi, &t)?);
            }
            "fbasis_relaxation" => {
                let n = s.usize_in(m.max(2), 4);
                let chain = s.chain(n)?;
                let eta = chain.eta().clone();
                let t = s.generic(m, chain.xi(), &eta, &[1])?;
                let mut avoid = chain.xi().to_vec();
                avoid.extend(t.iter().cloned());
                let lambda = s.generic(m, &avoid, &eta, &[1])?;
                out.extend(fbasis_relaxation(&chain, &lambda, &t)?);
            }
            other => return Err(Error::Parse(format!("unknown identity {other:?}"))),
        }
    }
    Ok(out)
}

/// `Phi_M` closed form against contraction, as a report (used by batch runs).
pub fn phi_routes<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<IdentityReport> {
    let fixture = json!({"xi": values(xi), "t": values(t), "eta": w.eta().to_json()});
    Ok(IdentityReport::new("phi_m_det_vs_direct", fixture, &phi_m_det(w, xi, t)?, &phi_m_direct(w, xi, t)?))
}
