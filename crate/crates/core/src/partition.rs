//! Domain-wall partition function
//! `Phi_M({xi}, {t}) = <1...1| B(t_1) ... B(t_M) |0>` on an `M`-site lattice
//! with inhomogeneities `xi`, built from `S_{0i}(t, xi_i)`.
//!
//! Rational closed form
//!
//! ```text
//! Phi_M = prod_{i,j} (t_i - xi_j) / (prod_{i<j} (t_i - t_j) prod_{j<i} (xi_i - xi_j))
//!         * det[ eta / ((t_i - xi_j)(t_i - xi_j + eta)) ]
//! ```
//!
//! and every difference `x` becomes `phi(x)` in the trigonometric regime.
//! Row `i` of the determinant is multiplied out by `prod_j phi(t_i - xi_j)`,
//! so `t_i = xi_j` needs no special treatment.

use crate::chain::{apply_entry, ensure_distinct, Entry, Orientation, Weights};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

fn pole(what: &str, a: &impl ToString, b: &impl ToString) -> Error {
    Error::PoleCollision { what: what.into(), a: a.to_string(), b: b.to_string() }
}

fn check_sizes<T>(xi: &[T], t: &[T]) -> Result<()> {
    if xi.len() != t.len() {
        return Err(Error::SizeMismatch { left: xi.len(), right: t.len() });
    }
    Ok(())
}

/// `prod_{i<j} phi(x_i - x_j)`.
pub fn vandermonde<T: Field>(w: &Weights<T>, x: &[T]) -> Result<T> {
    let mut v = T::one();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            v = v * w.phi(&(x[i].clone() - x[j].clone()))?;
        }
    }
    Ok(v)
}

/// `prod_{j<i} phi(x_i - x_j)`.
pub fn vandermonde_rev<T: Field>(w: &Weights<T>, x: &[T]) -> Result<T> {
    let mut v = T::one();
    for i in 0..x.len() {
        for j in 0..i {
            v = v * w.phi(&(x[i].clone() - x[j].clone()))?;
        }
    }
    Ok(v)
}

/// The bare Izergin matrix `phi(eta) / (phi(t_i - xi_j) phi(t_i - xi_j + eta))`.
pub fn izergin_matrix<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<Matrix<T>> {
    check_sizes(xi, t)?;
    let pe = w.phi_eta()?;
    Matrix::try_from_fn(t.len(), xi.len(), |i, j| {
        let u = t[i].clone() - xi[j].clone();
        let den = w.phi(&u)? * w.phi_shift(&u, 1)?;
        if den.is_zero() {
            return Err(pole("t_i - xi_j in {0, -eta}", &t[i], &xi[j]));
        }
        Ok(pe.clone() / den)
    })
}

/// Determinant of [`izergin_matrix`]: the "det(xi, t)" shorthand.
pub fn izergin_det<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<T> {
    if t.is_empty() {
        return Ok(T::one());
    }
    izergin_matrix(w, xi, t)?.det()
}

/// Closed-form `Phi_M(xi, t)` (inhomogeneities `xi`, arguments `t`).
pub fn phi_m_det<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<T> {
    check_sizes(xi, t)?;
    ensure_distinct("xi", xi)?;
    ensure_distinct("t", t)?;
    let m = t.len();
    if m == 0 {
        return Ok(T::one());
    }
    let pe = w.phi_eta()?;
    let rows = Matrix::try_from_fn(m, m, |i, j| {
        let shifted = w.phi_shift(&(t[i].clone() - xi[j].clone()), 1)?;
        if shifted.is_zero() {
            return Err(pole("t_i - xi_j = -eta", &t[i], &xi[j]));
        }
        let mut num = pe.clone();
        for (k, x) in xi.iter().enumerate() {
            if k != j {
                num = num * w.phi(&(t[i].clone() - x.clone()))?;
            }
        }
        Ok(num / shifted)
    })?;
    let den = vandermonde(w, t)? * vandermonde_rev(w, xi)?;
    rows.det()?.checked_div(&den, "Vandermonde of Phi_M")
}

/// `Phi_M(xi, t) prod_{i,j} c~(t_i - xi_j)^{-1}`, whose only poles are at `t_i = xi_j`:
/// `det(phi(eta) prod_{k != j} phi(u_ik + eta) / phi(u_ij)) / (prod_{i<j} phi(t_i - t_j) prod_{j<i} phi(xi_i - xi_j))`.
pub fn phi_m_cleared<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<T> {
    check_sizes(xi, t)?;
    ensure_distinct("xi", xi)?;
    ensure_distinct("t", t)?;
    let m = t.len();
    if m == 0 {
        return Ok(T::one());
    }
    let pe = w.phi_eta()?;
    let rows = Matrix::try_from_fn(m, m, |i, j| {
        let u = t[i].clone() - xi[j].clone();
        let den = w.phi(&u)?;
        if den.is_zero() {
            return Err(pole("t_i = xi_j", &t[i], &xi[j]));
        }
        let mut num = pe.clone();
        for (k, x) in xi.iter().enumerate() {
            if k != j {
                num = num * w.phi_shift(&(t[i].clone() - x.clone()), 1)?;
            }
        }
        Ok(num / den)
    })?;
    let den = vandermonde(w, t)? * vandermonde_rev(w, xi)?;
    rows.det()?.checked_div(&den, "Vandermonde of Phi_M")
}

/// `Phi_M` by contracting `<1..1| B(t_1)...B(t_M) |0>` on the lattice.
pub fn phi_m_direct<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<T> {
    check_sizes(xi, t)?;
    let m = t.len();
    let dim = 1usize << m;
    let mut v = vec![T::zero(); dim];
    v[0] = T::one();
    for tk in t.iter().rev() {
        v = apply_entry(w, xi, tk, Orientation::AuxFirst, Entry::B, &v)?;
    }
    Ok(v[dim - 1].clone())
}

/// `f_{xi_i}(t_1) = b~(t_1 - xi_i) prod_{alpha != i} c~(t_1 - xi_alpha) / c~(xi_i - xi_alpha)`.
pub fn first_row_weight<T: Field>(w: &Weights<T>, xi: &[T], t1: &T, i: usize) -> Result<T> {
    let mut f = w.b_tilde(&(t1.clone() - xi[i].clone()))?;
    for (a, xa) in xi.iter().enumerate() {
        if a != i {
            let num = w.c_tilde(&(t1.clone() - xa.clone()))?;
            let den = w.c_tilde(&(xi[i].clone() - xa.clone()))?;
            f = f * num.checked_div(&den, "c~(xi_i - xi_alpha)")?;
        }
    }
    Ok(f)
}

/// `Phi_M` from the first-row development
/// `Phi_M = sum_i f_{xi_i}(t_1) Phi_{M-1}(xi \ xi_i, t \ t_1)`, recursively.
pub fn phi_m_first_row<T: Field>(w: &Weights<T>, xi: &[T], t: &[T]) -> Result<T> {
    check_sizes(xi, t)?;
    if t.is_empty() {
        return Ok(T::one());
    }
    let mut total = T::zero();
    for i in 0..xi.len() {
        let rest: Vec<T> = xi.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, x)| x.clone()).collect();
        total = total + first_row_weight(w, xi, &t[0], i)? * phi_m_first_row(w, &rest, &t[1..])?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, Regime};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn xxx(eta: Rational) -> Weights<Rational> {
        Weights::new(Regime::Xxx, eta).unwrap()
    }

    #[test]
    fn single_site() {
        let w = xxx(q(1, 1));
        let (xi, t) = (q(1, 3), q(5, 2));
        let expected = q(1, 1) / (t.clone() - xi.clone() + q(1, 1));
        assert_eq!(phi_m_det(&w, &[xi.clone()], &[t.clone()]).unwrap(), expected);
        assert_eq!(phi_m_direct(&w, &[xi], &[t]).unwrap(), expected);
    }

    #[test]
    fn reduction_example() {
        let w = xxx(q(1, 1));
        let xi = [q(0, 1), q(2, 1)];
        let v = phi_m_det(&w, &xi, &[q(0, 1), q(4, 1)]).unwrap();
        assert_eq!(v, q(1, 3));
        assert_eq!(v, phi_m_direct(&w, &xi, &[q(0, 1), q(4, 1)]).unwrap());
        assert_eq!(v, phi_m_det(&w, &[q(2, 1)], &[q(4, 1)]).unwrap());
    }

    #[test]
    fn cleared_form() {
        let w = xxx(q(1, 2));
        let (xi, t) = ([q(0, 1), q(5, 3), q(-4, 7)], [q(1, 3), q(9, 4), q(-2, 5)]);
        let mut expected = phi_m_direct(&w, &xi, &t).unwrap();
        for ti in &t {
            for x in &xi {
                expected = expected * w.c_tilde_inv(&(ti.clone() - x.clone())).unwrap();
            }
        }
        assert_eq!(phi_m_cleared(&w, &xi, &t).unwrap(), expected);
        // t - xi = -eta is a pole of Phi_1 but not of the cleared product.
        assert_eq!(phi_m_cleared(&w, &[q(1, 1)], &[q(1, 2)]).unwrap(), q(-1, 1));
    }

    #[test]
    fn empty_lattice() {
        let w = xxx(q(1, 1));
        assert_eq!(phi_m_det::<Rational>(&w, &[], &[]).unwrap(), q(1, 1));
        assert_eq!(phi_m_direct::<Rational>(&w, &[], &[]).unwrap(), q(1, 1));
    }

    #[test]
    fn eta_spacing_is_not_a_zero() {
        // Neither slot produces a zero at M = 2: with xi_2 = xi_1 + eta the
        // closed form vanishes only for t_1 = t_2, and symmetrically.
        let w = xxx(q(1, 1));
        let t = [q(3, 7), q(-5, 4)];
        for xi in [[q(0, 1), q(1, 1)], [q(0, 1), q(-1, 1)]] {
            let v = phi_m_det(&w, &xi, &t).unwrap();
            assert_eq!(v, phi_m_direct(&w, &xi, &t).unwrap());
            assert_ne!(v, q(0, 1));
            let v = phi_m_det(&w, &t, &xi).unwrap();
            assert_eq!(v, phi_m_direct(&w, &t, &xi).unwrap());
            assert_ne!(v, q(0, 1));
        }
    }

    #[test]
    fn errors() {
        let w = xxx(q(1, 1));
        assert!(matches!(
            phi_m_det(&w, &[q(0, 1), q(0, 1)], &[q(1, 1), q(2, 1)]),
            Err(Error::CoincidingParameters { .. })
        ));
        assert!(matches!(phi_m_det(&w, &[q(0, 1)], &[q(-1, 1)]), Err(Error::PoleCollision { .. })));
        assert!(matches!(phi_m_det(&w, &[q(0, 1)], &[]), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn xxz_routes_agree() {
        let w = Weights::new(Regime::Xxz, Complex64::new(0.3, 0.2)).unwrap();
        let xi = [Complex64::new(0.1, 0.0), Complex64::new(-0.4, 0.3), Complex64::new(0.7, -0.1)];
        let t = [Complex64::new(0.25, 0.1), Complex64::new(-0.6, -0.2), Complex64::new(1.1, 0.05)];
        let d = phi_m_det(&w, &xi, &t).unwrap();
        assert!(d.approx_eq(&phi_m_direct(&w, &xi, &t).unwrap(), 1e-10));
        assert!(d.approx_eq(&phi_m_first_row(&w, &xi, &t).unwrap(), 1e-10));
    }

    fn distinct_params(len: usize) -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::btree_set((-60i64..=60, 1i64..=5), len)
            .prop_map(|s| s.into_iter().map(|(n, d)| q(n, d)).collect::<Vec<_>>())
            .prop_filter("distinct", |v: &Vec<Rational>| (1..v.len()).all(|i| !v[..i].contains(&v[i])))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn closed_form_matches_contraction(m in 1usize..=4, xi in distinct_params(4), t in distinct_params(4)) {
            let w = xxx(q(1, 2));
            let (xi, t) = (&xi[..m], &t[..m]);
            let d = phi_m_det(&w, xi, t);
            prop_assume!(d.is_ok());
            let d = d.unwrap();
            prop_assert_eq!(&d, &phi_m_direct(&w, xi, t).unwrap());
            // the development divides by c~(xi_i - xi_alpha)
            let spaced = xi.iter().any(|a| xi.iter().any(|b| a.clone() - b.clone() == q(1, 2)));
            if !spaced {
                prop_assert_eq!(&d, &phi_m_first_row(&w, xi, t).unwrap());
            }
        }

        #[test]
        fn symmetric_in_each_set(xi in distinct_params(3), t in distinct_params(3)) {
            let w = xxx(q(2, 3));
            let d = phi_m_direct(&w, &xi, &t).unwrap_or_else(|_| q(0, 1));
            let xi_p = [xi[2].clone(), xi[0].clone(), xi[1].clone()];
            let t_p = [t[1].clone(), t[2].clone(), t[0].clone()];
            prop_assert_eq!(&d, &phi_m_direct(&w, &xi_p, &t).unwrap_or_else(|_| q(0, 1)));
            prop_assert_eq!(&d, &phi_m_direct(&w, &xi, &t_p).unwrap_or_else(|_| q(0, 1)));
        }

        #[test]
        fn reduction_at_coinciding_pair(xi in distinct_params(3), t in distinct_params(3)) {
            let w = xxx(q(1, 1));
            let mut t = t;
            t[0] = xi[0].clone();
            prop_assume!((1..3).all(|i| t[i] != t[0]));
            let full = phi_m_det(&w, &xi, &t);
            let reduced = phi_m_det(&w, &xi[1..], &t[1..]);
            prop_assume!(full.is_ok() && reduced.is_ok());
            prop_assert_eq!(full.unwrap(), reduced.unwrap());
        }
    }
}
