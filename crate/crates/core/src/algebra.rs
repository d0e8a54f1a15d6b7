//! Exchange relations of the monodromy matrix as checkable matrix identities.

use crate::chain::{ChainSpec, Entry, Weights};
use crate::error::Result;
use crate::field::Field;
use crate::matrix::Matrix;
use crate::space::embed_gate;

/// One identity evaluated on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub name: &'static str,
    pub pass: bool,
    pub max_abs_diff: f64,
}

impl RelationCheck {
    fn compare<T: Field>(name: &'static str, lhs: &Matrix<T>, rhs: &Matrix<T>, tol: f64) -> Self {
        RelationCheck { name, pass: lhs.approx_eq(rhs, tol), max_abs_diff: lhs.max_abs_diff(rhs) }
    }
}

/// `S_12 S_13 S_23 = S_23 S_13 S_12` on three spaces with parameters `u_1, u_2, u_3`.
pub fn yang_baxter<T: Field>(w: &Weights<T>, u: [&T; 3], tol: f64) -> Result<RelationCheck> {
    let s = |a: usize, b: usize| -> Result<Matrix<T>> {
        Ok(embed_gate(3, a, b, &w.s_matrix(u[a], u[b])?))
    };
    let (s12, s13, s23) = (s(0, 1)?, s(0, 2)?, s(1, 2)?);
    let lhs = s12.mul(&s13)?.mul(&s23)?;
    let rhs = s23.mul(&s13)?.mul(&s12)?;
    Ok(RelationCheck::compare("yang-baxter", &lhs, &rhs, tol))
}

/// `T_0(t) T_0'(t') S_00'(t, t') = S_00'(t, t') T_0'(t') T_0(t)` on the
/// quantum space extended by two auxiliary spaces.
pub fn rtt<T: Field>(chain: &ChainSpec<T>, t: &T, tp: &T, tol: f64) -> Result<RelationCheck> {
    let n = chain.n();
    let bits = n + 2;
    let t0 = chain.monodromy_embedded(t, n, bits)?;
    let t0p = chain.monodromy_embedded(tp, n + 1, bits)?;
    let s = embed_gate(bits, n, n + 1, &chain.s_matrix(t, tp)?);
    let lhs = t0.mul(&t0p)?.mul(&s)?;
    let rhs = s.mul(&t0p)?.mul(&t0)?;
    Ok(RelationCheck::compare("rtt", &lhs, &rhs, tol))
}

/// `A(t) B(q) = c~(q-t)^{-1} B(q) A(t) - b~(q-t)/c~(q-t) B(t) A(q)`.
pub fn ab_relation<T: Field>(chain: &ChainSpec<T>, t: &T, q: &T, tol: f64) -> Result<RelationCheck> {
    let w = chain.weights();
    let u = q.clone() - t.clone();
    let cinv = w.c_tilde_inv(&u)?;
    let ratio = w.b_tilde(&u)? * cinv.clone();
    let (at, bq) = (chain.operator(Entry::A, t)?, chain.operator(Entry::B, q)?);
    let (bt, aq) = (chain.operator(Entry::B, t)?, chain.operator(Entry::A, q)?);
    let lhs = at.mul(&bq)?;
    let rhs = bq.mul(&at)?.scale(&cinv).sub(&bt.mul(&aq)?.scale(&ratio))?;
    Ok(RelationCheck::compare("ab", &lhs, &rhs, tol))
}

/// `[B(q), C(t)] = b~(t-q)/c~(t-q) (D(q) A(t) - D(t) A(q))`.
pub fn bc_relation<T: Field>(chain: &ChainSpec<T>, t: &T, q: &T, tol: f64) -> Result<RelationCheck> {
    let w = chain.weights();
    let u = t.clone() - q.clone();
    let ratio = w.b_tilde(&u)? * w.c_tilde_inv(&u)?;
    let lhs = chain.operator(Entry::B, q)?.commutator(&chain.operator(Entry::C, t)?)?;
    let dq_at = chain.operator(Entry::D, q)?.mul(&chain.operator(Entry::A, t)?)?;
    let dt_aq = chain.operator(Entry::D, t)?.mul(&chain.operator(Entry::A, q)?)?;
    let rhs = dq_at.sub(&dt_aq)?.scale(&ratio);
    Ok(RelationCheck::compare("bc", &lhs, &rhs, tol))
}

/// `[X(t), X(q)] = 0`.
pub fn commuting_entry<T: Field>(
    chain: &ChainSpec<T>,
    entry: Entry,
    t: &T,
    q: &T,
    tol: f64,
) -> Result<RelationCheck> {
    let name = match entry {
        Entry::A => "[A(t),A(q)]=0",
        Entry::B => "[B(t),B(q)]=0",
        Entry::C => "[C(t),C(q)]=0",
        Entry::D => "[D(t),D(q)]=0",
    };
    let c = chain.operator(entry, t)?.commutator(&chain.operator(entry, q)?)?;
    Ok(RelationCheck::compare(name, &c, &Matrix::zeros(c.rows(), c.cols()), tol))
}

/// `[Z(t), Z(q)] = 0` for the transfer matrix `Z = A + D`.
pub fn transfer_commute<T: Field>(chain: &ChainSpec<T>, t: &T, q: &T, tol: f64) -> Result<RelationCheck> {
    let c = chain.transfer_matrix(t)?.commutator(&chain.transfer_matrix(q)?)?;
    Ok(RelationCheck::compare("[Z(t),Z(q)]=0", &c, &Matrix::zeros(c.rows(), c.cols()), tol))
}

/// Every relation above for one chain and parameter pair.
pub fn all_relations<T: Field>(chain: &ChainSpec<T>, t: &T, q: &T, tol: f64) -> Result<Vec<RelationCheck>> {
    let three = [&chain.xi()[0], t, q];
    Ok(vec![
        yang_baxter(chain.weights(), three, tol)?,
        rtt(chain, t, q, tol)?,
        ab_relation(chain, t, q, tol)?,
        bc_relation(chain, t, q, tol)?,
        commuting_entry(chain, Entry::B, t, q, tol)?,
        commuting_entry(chain, Entry::C, t, q, tol)?,
        transfer_commute(chain, t, q, tol)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, Regime};
    use num_complex::Complex64;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn relations_hold_exactly() {
        let chain = ChainSpec::new(Regime::Xxx, q(2, 3), vec![q(0, 1), q(7, 5), q(-3, 4)]).unwrap();
        for check in all_relations(&chain, &q(1, 7), &q(-5, 2), 0.0).unwrap() {
            assert!(check.pass, "{} fails", check.name);
        }
    }

    #[test]
    fn relations_hold_for_xxz() {
        let chain = ChainSpec::new(
            Regime::Xxz,
            Complex64::new(0.4, 0.1),
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.9, -0.2), Complex64::new(-0.5, 0.3)],
        )
        .unwrap();
        let (t, u) = (Complex64::new(0.2, 0.05), Complex64::new(-0.7, 0.1));
        for check in all_relations(&chain, &t, &u, 1e-9).unwrap() {
            assert!(check.pass, "{} fails: {}", check.name, check.max_abs_diff);
        }
    }

    #[test]
    fn broken_relation_is_detected() {
        let chain = ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(2, 1)]).unwrap();
        let a = chain.operator(Entry::A, &q(1, 3)).unwrap();
        let b = chain.operator(Entry::B, &q(4, 1)).unwrap();
        let check = RelationCheck::compare("ab-swapped", &a.mul(&b).unwrap(), &b.mul(&a).unwrap(), 0.0);
        assert!(!check.pass);
    }
}
