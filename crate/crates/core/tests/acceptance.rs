//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always print, in order.
//! Criteria 6 and 10 contain the claim that `Phi_M` vanishes at
//! `xi_i - xi_j = +-eta`, which does not hold; those two are expected to print
//! FAIL, and the run fails if they ever pass or if anything else fails.

use std::time::{Duration, Instant};

use fbasis_core::algebra::all_relations;
use fbasis_core::bethe::{solve_bae, SolveOptions, Solution};
use fbasis_core::fbasis::{
    a_f, b_f, c_f, f_basis_entry_for_ordering, f_hat, o_hat_from_b, o_hat_product, verify_factorization,
    FactorizingOperator,
};
use fbasis_core::fixtures::{Bounds, Sampler};
use fbasis_core::identities::{phi_vanishing, run_identity, simplified_sum_s};
use fbasis_core::partition::{phi_m_det, phi_m_direct};
use fbasis_core::scalar_products::{
    gaudin_norm, norm_direct, slavnov_limit, sp_direct, sp_fbasis, sp_slavnov, sp_slavnov_jacobian, sp_subset_sum,
    JacobianSign,
};
use fbasis_core::{ChainSpec, ComplexFloat, Entry, ExactChain, Field, Rational, Regime, Weights};
use num_complex::Complex64;
use serde_json::json;

/// Relative agreement required of float routes.
const REL_TOL: f64 = 1e-9;
/// Relative overlap below which two Bethe states count as orthogonal.
const ORTHO_TOL: f64 = 1e-8;
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn sampler() -> Sampler {
    Sampler::new(SEED, Bounds::default())
}

/// Random chains with `N` cycling through `sizes`.
fn chains(s: &mut Sampler, count: usize, sizes: &[usize]) -> Result<Vec<ExactChain>, String> {
    (0..count).map(|k| s.chain(sizes[k % sizes.len()]).map_err(e)).collect()
}

/// Points avoiding `xi`, `xi +- eta` and each other.
fn generic_points(s: &mut Sampler, chain: &ExactChain, avoid: &[Rational], count: usize) -> Result<Vec<Rational>, String> {
    let mut all = chain.xi().to_vec();
    all.extend_from_slice(avoid);
    s.generic(count, &all, chain.eta(), &[1]).map_err(e)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut s = sampler();
    for chain in chains(&mut s, 20, &[2, 3, 4, 5, 6])? {
        let (a, b) = (o_hat_product(&chain).map_err(e)?, o_hat_from_b(&chain).map_err(e)?);
        ensure(a == b, || format!("routes differ at xi = {:?}", chain.to_json()))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("20 chains, N = 2..6, {:.2?}", elapsed))
}

fn criterion_2() -> Outcome {
    let mut s = sampler();
    let mut count = 0;
    for chain in chains(&mut s, 20, &[2, 3, 4, 5, 6])? {
        let op = FactorizingOperator::new(&chain).map_err(e)?;
        for t in generic_points(&mut s, &chain, &[], 3)? {
            let lhs = op.conjugate(&chain.operator(Entry::A, &t).map_err(e)?).map_err(e)?;
            ensure(lhs == a_f(&chain, &t).map_err(e)?, || format!("A^F differs at t = {t}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} (chain, t) pairs, N <= 6"))
}

fn criterion_3() -> Outcome {
    let mut s = sampler();
    for chain in chains(&mut s, 8, &[2, 3, 4, 5])? {
        let report = verify_factorization(&chain, 0.0).map_err(e)?;
        ensure(report.all_pass(), || format!("exchange fails on {}", chain.to_json()))?;
    }
    let chain = s.chain(3).map_err(e)?;
    let t = generic_points(&mut s, &chain, &[], 1)?.remove(0);
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for entry in [Entry::A, Entry::B, Entry::C, Entry::D] {
        let reference = f_basis_entry_for_ordering(&chain, &perms[0], entry, &t).map_err(e)?;
        for p in &perms[1..] {
            let other = f_basis_entry_for_ordering(&chain, p, entry, &t).map_err(e)?;
            ensure(other == reference, || format!("{entry:?} differs for ordering {p:?}"))?;
        }
    }
    Ok("adjacent exchanges on 8 chains (N <= 5); 4 entries x 6 orderings at N = 3".into())
}

fn criterion_4() -> Outcome {
    let mut s = sampler();
    for chain in chains(&mut s, 10, &[2, 3, 4, 5])? {
        let op = FactorizingOperator::new(&chain).map_err(e)?;
        let product = op.o_tilde.mul(&op.o_hat).map_err(e)?;
        let closed = f_hat(&chain).map_err(e)?;
        ensure(product.is_diagonal() && product.diagonal_entries() == closed, || {
            format!("O~ O != f^ on {}", chain.to_json())
        })?;
    }
    let chain = ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(2, 1)]).map_err(e)?;
    let f = f_hat(&chain).map_err(e)?;
    ensure(f[1] == q(2, 3) && f[2] == q(2, 1), || format!("N = 2 one-particle entries {} and {}", f[1], f[2]))?;
    Ok("10 chains, N <= 5; N = 2 fixture f = (2/3, 2)".into())
}

fn criterion_5() -> Outcome {
    let mut s = sampler();
    let mut count = 0;
    for chain in chains(&mut s, 8, &[2, 3, 4, 5])? {
        let op = FactorizingOperator::new(&chain).map_err(e)?;
        for t in generic_points(&mut s, &chain, &[], 3)? {
            let b = op.conjugate(&chain.operator(Entry::B, &t).map_err(e)?).map_err(e)?;
            let c = op.conjugate(&chain.operator(Entry::C, &t).map_err(e)?).map_err(e)?;
            ensure(b == b_f(&chain, &t).map_err(e)?, || format!("B^F differs at t = {t}"))?;
            ensure(c == c_f(&chain, &t).map_err(e)?, || format!("C^F differs at t = {t}"))?;
            count += 1;
        }
        let n = chain.n();
        let b_at_xi: Vec<_> = chain.xi().iter().map(|x| b_f(&chain, x)).collect::<Result<_, _>>().map_err(e)?;
        for mask in 0..chain.dim() {
            let mut v = chain.vacuum();
            for site in (0..n).filter(|k| mask >> k & 1 == 1) {
                v = b_at_xi[site].apply(&v).map_err(e)?;
            }
            let want: Vec<Rational> = (0..chain.dim()).map(|j| if j == mask { q(1, 1) } else { q(0, 1) }).collect();
            ensure(v == want, || format!("prod b_f(xi_n)|0> != |n> for mask {mask:b}"))?;
        }
    }
    Ok(format!("{count} (chain, t) pairs and every basis state, N <= 5"))
}

/// Returns the three clause results separately: (det = direct, reduction, vanishing).
fn criterion_6() -> (Result<String, String>, Result<String, String>, Result<String, String>) {
    let mut s = sampler();
    let mut det = Ok(String::new());
    let mut reduction = Ok(String::new());
    let mut vanishing = Ok(String::new());
    for k in 0..20 {
        let m = 1 + k % 4;
        let Ok(eta) = s.nonzero() else { return (Err("sampling".into()), Err("sampling".into()), Err("sampling".into())) };
        let w = Weights::new(Regime::Xxx, eta.clone()).unwrap();
        let xi = s.generic(m, &[], &eta, &[1]).unwrap();
        let t = s.generic(m, &xi, &eta, &[1]).unwrap();
        if det.is_ok() && phi_m_det(&w, &xi, &t).ok() != phi_m_direct(&w, &xi, &t).ok() {
            det = Err(format!("det != direct at M = {m}"));
        }
        let mut t1 = t.clone();
        t1[0] = xi[0].clone();
        let full = phi_m_det(&w, &xi, &t1).ok();
        let reduced = phi_m_det(&w, &xi[1..], &t1[1..]).ok();
        if reduction.is_ok() && (full.is_none() || full != reduced || full != phi_m_direct(&w, &xi, &t1).ok()) {
            reduction = Err(format!("reduction fails at M = {m}"));
        }
        if m >= 2 && vanishing.is_ok() {
            match phi_vanishing(&w, &xi, &t) {
                Ok(reports) => {
                    if let Some(r) = reports.iter().find(|r| !r.pass) {
                        vanishing = Err(format!("{}: Phi = {} at {}", r.id, r.lhs, r.fixture));
                    }
                }
                Err(err) => vanishing = Err(err.to_string()),
            }
        }
    }
    (det, reduction, vanishing)
}

fn criterion_7() -> Outcome {
    let mut s = sampler();
    for (k, chain) in chains(&mut s, 20, &[2, 3, 4, 5, 6])?.into_iter().enumerate() {
        let m = 1 + k % 2;
        let t = generic_points(&mut s, &chain, &[], m)?;
        let l = generic_points(&mut s, &chain, &t, m)?;
        let direct = sp_direct(&chain, &l, &t).map_err(e)?;
        let subset = sp_subset_sum(&chain, &l, &t).map_err(e)?;
        let fbasis = sp_fbasis(&chain, &l, &t).map_err(e)?;
        ensure(direct == subset && direct == fbasis, || {
            format!("routes disagree: {direct}, {subset}, {fbasis} at {}", json!({"l": l.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "t": t.iter().map(|x| x.to_string()).collect::<Vec<_>>()}))
        })?;
    }
    let chain = ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(2, 1)]).map_err(e)?;
    let (l, t) = ([q(4, 1)], [q(5, 1)]);
    for v in [sp_direct(&chain, &l, &t), sp_subset_sum(&chain, &l, &t), sp_fbasis(&chain, &l, &t)] {
        ensure(v.as_ref().ok() == Some(&q(19, 24)), || format!("N = 2 fixture gives {v:?}"))?;
    }
    Ok("20 off-shell fixtures, M <= 2, N <= 6; N = 2 fixture 19/24".into())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let chain = ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(2, 1)]).map_err(e)?;
    let report = solve_bae(&chain, 1, &[], SolveOptions::default()).map_err(e)?;
    let t = match report.solutions.as_slice() {
        [Solution::Exact(r)] => r.roots.clone(),
        other => return Err(format!("expected one exact root, got {other:?}")),
    };
    ensure(t == [q(3, 2)], || format!("root {t:?}"))?;
    let l = [q(4, 1)];
    let slavnov = sp_slavnov(&chain, &l, &t).map_err(e)?;
    ensure(slavnov == q(-2, 3) && slavnov == sp_direct(&chain, &l, &t).map_err(e)?, || format!("Slavnov {slavnov}"))?;
    let norm = gaudin_norm(&chain, &t, 0.0).map_err(e)?;
    ensure(norm.value == q(8, 3) && norm.value == norm_direct(&chain, &t).map_err(e)?, || format!("norm {}", norm.value))?;
    let limit = slavnov_limit(&chain.to_complex(), &[t[0].to_c64()], &Complex64::new(1e-3, 0.0)).map_err(e)?;
    ensure((limit - Complex64::new(8.0 / 3.0, 0.0)).norm() < 1e-6, || format!("limit {limit}"))?;

    let chain4 = ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(7, 5), q(-3, 4), q(13, 6)]).map_err(e)?;
    let fc = chain4.to_complex();
    let sets: Vec<Vec<ComplexFloat>> = solve_bae(&chain4, 2, &[], SolveOptions::default())
        .map_err(e)?
        .solutions
        .iter()
        .map(Solution::roots_c64)
        .collect();
    ensure(sets.len() >= 2, || format!("only {} root sets", sets.len()))?;
    let lambda = [Complex64::new(0.37, 0.1), Complex64::new(-0.81, 0.0)];
    let mut worst_rel = 0f64;
    for t in &sets {
        let (s_val, d_val) = (sp_slavnov(&fc, &lambda, t).map_err(e)?, sp_direct(&fc, &lambda, t).map_err(e)?);
        worst_rel = worst_rel.max((s_val - d_val).norm() / d_val.norm().max(1.0));
    }
    ensure(worst_rel < REL_TOL, || format!("Slavnov vs direct relative {worst_rel:e}"))?;
    let mut worst_overlap = 0f64;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let overlap = sp_direct(&fc, &sets[i], &sets[j]).map_err(e)?.norm();
            let scale = (norm_direct(&fc, &sets[i]).map_err(e)? * norm_direct(&fc, &sets[j]).map_err(e)?).norm().sqrt();
            worst_overlap = worst_overlap.max(overlap / scale);
        }
    }
    ensure(worst_overlap < ORTHO_TOL, || format!("overlap {worst_overlap:e}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "t = 3/2, Slavnov -2/3, norm 8/3; N = 4: {} root sets, rel {worst_rel:.1e}, overlap {worst_overlap:.1e}, {elapsed:.2?}",
        sets.len()
    ))
}

fn criterion_9() -> Outcome {
    let mut fixtures = vec![(ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(2, 1)]).map_err(e)?, vec![q(3, 2)])];
    let mut pairs = Sampler::new(21, Bounds::small());
    for _ in 0..4 {
        fixtures.push(pairs.onshell_pair().map_err(e)?);
    }
    let mut s = sampler();
    let mut count = 0;
    for (chain, t) in &fixtures {
        for _ in 0..3 {
            let l = generic_points(&mut s, chain, t, t.len())?;
            let slavnov = sp_slavnov(chain, &l, t).map_err(e)?;
            for sign in [JacobianSign::Explicit, JacobianSign::Absorbed] {
                let jac = sp_slavnov_jacobian(chain, &l, t, sign).map_err(e)?;
                ensure(jac == slavnov, || format!("Jacobian {jac} vs Slavnov {slavnov}"))?;
            }
            count += 1;
        }
    }
    Ok(format!("{} on-shell fixtures (N = 2 and four exact N = 4, M = 2), {count} lambda sets", fixtures.len()))
}

/// Per-identity results plus the hand example.
fn criterion_10() -> (Vec<(&'static str, Result<usize, String>)>, Result<(), String>) {
    let ids = ["row_reduction_b2", "residue_sum", "simplified_sum_S", "phi_vanishing"];
    let results = ids
        .iter()
        .map(|&id| {
            let outcome = run_identity(id, SEED, 100).map_err(e).and_then(|reports| {
                match reports.iter().find(|r| !r.pass) {
                    Some(r) => Err(format!("{} of {} fail, e.g. {} lhs {} rhs {}", reports.iter().filter(|r| !r.pass).count(), reports.len(), r.id, r.lhs, r.rhs)),
                    None => Ok(reports.len()),
                }
            });
            (id, outcome)
        })
        .collect();
    let hand = simplified_sum_s(&[q(0, 1), q(2, 1)], &[q(4, 1)])
        .map_err(e)
        .and_then(|r| ensure(r[0].lhs == json!("1/8") && r[0].pass, || format!("hand example gives {}", r[0].lhs)));
    (results, hand)
}

fn criterion_11() -> Outcome {
    let mut s = sampler();
    let mut count = 0;
    for chain in chains(&mut s, 8, &[1, 2, 3, 4])? {
        let p = generic_points(&mut s, &chain, &[], 2)?;
        for c in all_relations(&chain, &p[0], &p[1], 0.0).map_err(e)? {
            ensure(c.pass, || format!("{} fails on {}", c.name, chain.to_json()))?;
            count += 1;
        }
    }
    Ok(format!("{count} relation checks on 8 chains, N <= 4"))
}

fn line(unexpected: &mut Vec<usize>, k: usize, outcome: &Outcome, expect_pass: bool) {
    let (status, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let note = if expect_pass { "" } else { " [known red]" };
    println!("criterion {k:>2}: {status}{note} - {detail}");
    if outcome.is_ok() != expect_pass {
        unexpected.push(k);
    }
}

fn main() {
    let mut unexpected = Vec::new();

    line(&mut unexpected, 1, &criterion_1(), true);
    line(&mut unexpected, 2, &criterion_2(), true);
    line(&mut unexpected, 3, &criterion_3(), true);
    line(&mut unexpected, 4, &criterion_4(), true);
    line(&mut unexpected, 5, &criterion_5(), true);

    let (det, reduction, vanishing) = criterion_6();
    let six = match (&det, &reduction, &vanishing) {
        (Ok(_), Ok(_), Err(v)) => Err(format!("det = direct (M <= 4) and reduction hold; vanishing does not: {v}")),
        (Ok(_), Ok(_), Ok(_)) => Ok("det = direct, reduction and vanishing all hold".into()),
        _ => Err(format!("det: {det:?}; reduction: {reduction:?}; vanishing: {vanishing:?}")),
    };
    // Only the vanishing clause may fail.
    if det.is_err() || reduction.is_err() {
        unexpected.push(6);
    }
    line(&mut unexpected, 6, &six, false);

    line(&mut unexpected, 7, &criterion_7(), true);
    line(&mut unexpected, 8, &criterion_8(), true);
    line(&mut unexpected, 9, &criterion_9(), true);

    let (ids, hand) = criterion_10();
    let mut parts = Vec::new();
    let mut all_ok = hand.is_ok();
    for (id, r) in &ids {
        match r {
            Ok(n) => parts.push(format!("{id} {n} checks over 100 fixtures")),
            Err(m) => {
                all_ok = false;
                parts.push(format!("{id}: {m}"));
                if *id != "phi_vanishing" {
                    unexpected.push(10);
                }
            }
        }
    }
    if hand.is_err() {
        unexpected.push(10);
    }
    parts.push(format!("hand example {}", if hand.is_ok() { "1/8" } else { "wrong" }));
    let ten = if all_ok { Ok(parts.join("; ")) } else { Err(parts.join("; ")) };
    line(&mut unexpected, 10, &ten, false);

    line(&mut unexpected, 11, &criterion_11(), true);

    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
