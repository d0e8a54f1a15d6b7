//! Bethe root finding and certification.
//!
//! The solver runs damped Newton in complex floats on the pole-cleared equations
//! `P_i - Q_i = 0` with
//! `P_i = prod_alpha phi(xi_alpha - t_i) prod_{alpha != i} phi(t_alpha - t_i + eta)` and
//! `Q_i = (-1)^{M-1} prod_alpha phi(xi_alpha - t_i + eta) prod_{alpha != i} phi(t_i - t_alpha + eta)`,
//! which is `a(t_i) = f(t_i)` multiplied through by its denominators.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::field::{Field, Regime};
use crate::matrix::Matrix;
use crate::scalar_products::ONSHELL_TOLERANCE;
use crate::space::subsets;

/// A root set with its Bethe residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheRoots<T: Field> {
    pub roots: Vec<T>,
    pub residuals: Vec<T>,
    pub certified: bool,
}

impl<T: Field> BetheRoots<T> {
    pub fn field(&self) -> &'static str {
        T::NAME
    }

    pub fn to_json(&self) -> Value {
        json!({
            "roots": self.roots.iter().map(Field::to_json).collect::<Vec<_>>(),
            "residuals": self.residuals.iter().map(Field::to_json).collect::<Vec<_>>(),
            "certified": self.certified,
            "field": T::NAME,
        })
    }
}

/// Recomputes the residuals of `roots` in the chain's own field.
pub fn certify<T: Field>(chain: &ChainSpec<T>, roots: &[T]) -> Result<BetheRoots<T>> {
    let residuals = chain.bae_residual(roots)?;
    let certified = residuals.iter().all(|r| if T::EXACT { r.is_zero() } else { r.magnitude() < ONSHELL_TOLERANCE });
    Ok(BetheRoots { roots: roots.to_vec(), residuals, certified })
}

/// A solution either promoted to the chain's exact field or kept as floats.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution<T: Field> {
    Exact(BetheRoots<T>),
    Float(BetheRoots<Complex64>),
}

impl<T: Field> Solution<T> {
    pub fn certified(&self) -> bool {
        match self {
            Solution::Exact(r) => r.certified,
            Solution::Float(r) => r.certified,
        }
    }

    pub fn roots_c64(&self) -> Vec<Complex64> {
        match self {
            Solution::Exact(r) => r.roots.iter().map(Field::to_c64).collect(),
            Solution::Float(r) => r.roots.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Solution::Exact(r) => r.to_json(),
            Solution::Float(r) => r.to_json(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Roots closer than this are treated as collapsed.
    pub collapse: f64,
    /// Stop once the relative Newton step falls below this.
    pub step_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iter: 200, collapse: 1e-8, step_tol: 1e-15 }
    }
}

/// Outcome of a solve: deduplicated solutions and the seeds that failed.
#[derive(Debug, Clone)]
pub struct SolveReport<T: Field> {
    pub solutions: Vec<Solution<T>>,
    pub failures: Vec<(Vec<Complex64>, Error)>,
}

/// Default seeds: every `M`-subset of `xi_i + eta/2`, and the same subsets with
/// consecutive pairs split to `+- i eta/2` around their midpoint.
pub fn default_seeds(xi: &[Complex64], eta: Complex64, m: usize) -> Vec<Vec<Complex64>> {
    let half = eta / 2.0;
    let base: Vec<Complex64> = xi.iter().map(|x| x + half).collect();
    let mut seeds = Vec::new();
    for idx in subsets(base.len(), m) {
        let s: Vec<Complex64> = idx.iter().map(|&i| base[i]).collect();
        seeds.push(s.clone());
        if m >= 2 {
            let mut c = s;
            for pair in c.chunks_mut(2) {
                if let [a, b] = pair {
                    let mid = (*a + *b) / 2.0;
                    *a = mid + Complex64::i() * half;
                    *b = mid - Complex64::i() * half;
                }
            }
            seeds.push(c);
        }
    }
    seeds
}

struct Factor {
    arg: Complex64,
    grad: Vec<(usize, f64)>,
}

fn dphi(regime: Regime, x: Complex64) -> Complex64 {
    match regime {
        Regime::Xxx => Complex64::new(1.0, 0.0),
        Regime::Xxz => x.cosh(),
    }
}

fn phi(regime: Regime, x: Complex64) -> Complex64 {
    match regime {
        Regime::Xxx => x,
        Regime::Xxz => x.sinh(),
    }
}

/// Value and gradient of a product of `phi` factors.
fn product(regime: Regime, factors: &[Factor], m: usize) -> (Complex64, Vec<Complex64>) {
    let values: Vec<Complex64> = factors.iter().map(|f| phi(regime, f.arg)).collect();
    let value = values.iter().product();
    let mut grad = vec![Complex64::new(0.0, 0.0); m];
    for (k, f) in factors.iter().enumerate() {
        let rest: Complex64 = values.iter().enumerate().filter(|&(l, _)| l != k).map(|(_, v)| v).product();
        let d = dphi(regime, f.arg) * rest;
        for &(j, c) in &f.grad {
            grad[j] += d * c;
        }
    }
    (value, grad)
}

/// Pole-cleared residuals and their Jacobian.
fn system(chain: &ChainSpec<Complex64>, t: &[Complex64]) -> (Vec<Complex64>, Matrix<Complex64>) {
    let (regime, eta, m) = (chain.regime(), *chain.eta(), t.len());
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let mut f = Vec::with_capacity(m);
    let mut jac = Matrix::zeros(m, m);
    for i in 0..m {
        let mut p = Vec::new();
        let mut q = Vec::new();
        for x in chain.xi() {
            p.push(Factor { arg: x - t[i], grad: vec![(i, -1.0)] });
            q.push(Factor { arg: x - t[i] + eta, grad: vec![(i, -1.0)] });
        }
        for a in (0..m).filter(|&a| a != i) {
            p.push(Factor { arg: t[a] - t[i] + eta, grad: vec![(a, 1.0), (i, -1.0)] });
            q.push(Factor { arg: t[i] - t[a] + eta, grad: vec![(i, 1.0), (a, -1.0)] });
        }
        let (pv, pg) = product(regime, &p, m);
        let (qv, qg) = product(regime, &q, m);
        f.push(pv - sign * qv);
        for j in 0..m {
            jac[(i, j)] = pg[j] - sign * qg[j];
        }
    }
    (f, jac)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn min_separation(t: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            best = best.min((t[i] - t[j]).norm());
        }
    }
    best
}

/// Damped Newton from one seed. Returns the converged root set.
pub fn newton(chain: &ChainSpec<Complex64>, seed: &[Complex64], opts: SolveOptions) -> Result<Vec<Complex64>> {
    let seed_str = || format!("{seed:?}");
    let m = seed.len();
    let mut t = seed.to_vec();
    let (mut f, mut jac) = system(chain, &t);
    let mut damping = 1.0;
    for _ in 0..opts.max_iter {
        if min_separation(&t) < opts.collapse {
            return Err(Error::RootCollapse { separation: opts.collapse });
        }
        let rhs = Matrix::from_fn(m, 1, |i, _| -f[i]);
        let step: Vec<Complex64> = match jac.solve(&rhs) {
            Ok(s) => (0..m).map(|i| s[(i, 0)]).collect(),
            Err(_) => return Err(Error::NonConvergence { iterations: 0, seed: seed_str() }),
        };
        let scale = 1f64.max(norm(&t));
        if norm(&step) <= opts.step_tol * scale || norm(&f) == 0.0 {
            return Ok(t);
        }
        let current = norm(&f);
        let mut lambda = damping;
        loop {
            let trial: Vec<Complex64> = t.iter().zip(&step).map(|(x, d)| x + d * lambda).collect();
            let (tf, tj) = system(chain, &trial);
            if norm(&tf) < current || lambda < 1e-6 {
                if norm(&step) * lambda <= 1e-13 * scale && norm(&tf) >= current {
                    // Stalled at float precision.
                    return Ok(t);
                }
                t = trial;
                f = tf;
                jac = tj;
                break;
            }
            lambda /= 2.0;
        }
        damping = (lambda * 2.0).min(1.0);
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, seed: seed_str() })
}

fn same_set(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        if let Some(j) = (0..b.len()).find(|&j| !used[j] && (x - b[j]).norm() <= tol * 1f64.max(x.norm())) {
            used[j] = true;
            true
        } else {
            false
        }
    })
}

fn promote<T: Field>(chain: &ChainSpec<T>, roots: &[Complex64]) -> Option<BetheRoots<T>> {
    if !T::EXACT {
        return None;
    }
    let exact: Vec<T> = roots.iter().map(|z| T::from_c64(*z)).collect::<Option<_>>()?;
    let certified = certify(chain, &exact).ok()?;
    certified.certified.then_some(certified)
}

/// Solves the Bethe equations for `m` roots from `seeds` (or [`default_seeds`]
/// when empty). Solutions are deduplicated up to permutation and sorted by
/// their real parts.
pub fn solve_bae<T: Field>(
    chain: &ChainSpec<T>,
    m: usize,
    seeds: &[Vec<Complex64>],
    opts: SolveOptions,
) -> Result<SolveReport<T>> {
    if m > chain.n() {
        return Err(Error::TooManyParticles { m, n: chain.n() });
    }
    if m == 0 {
        return Ok(SolveReport { solutions: vec![Solution::Exact(certify(chain, &[])?)], failures: vec![] });
    }
    let float_chain = chain.to_complex();
    let seeds: Vec<Vec<Complex64>> = if seeds.is_empty() {
        default_seeds(float_chain.xi(), *float_chain.eta(), m)
    } else {
        seeds.to_vec()
    };
    let mut found: Vec<Vec<Complex64>> = Vec::new();
    let mut failures = Vec::new();
    for seed in seeds {
        if seed.len() != m {
            failures.push((seed.clone(), Error::SizeMismatch { left: seed.len(), right: m }));
            continue;
        }
        let outcome = newton(&float_chain, &seed, opts).and_then(|t| {
            let c = certify(&float_chain, &t)?;
            if c.certified {
                Ok(t)
            } else {
                Err(Error::OffShell { residuals: c.residuals.iter().map(|r| r.to_string()).collect() })
            }
        });
        match outcome {
            Ok(mut t) => {
                t.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                if !found.iter().any(|f| same_set(f, &t, 1e-7)) {
                    found.push(t);
                }
            }
            Err(e) => failures.push((seed, e)),
        }
    }
    found.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let solutions = found
        .into_iter()
        .map(|t| match promote(chain, &t) {
            Some(exact) => Ok(Solution::Exact(exact)),
            None => Ok(Solution::Float(certify(&float_chain, &t)?)),
        })
        .collect::<Result<Vec<_>>>()?;
    if solutions.is_empty() {
        if let Some((_, e)) = failures.first() {
            return Err(e.clone());
        }
    }
    Ok(SolveReport { solutions, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Entry;
    use crate::field::Rational;
    use crate::scalar_products::{norm_direct, sp_direct, sp_slavnov};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn fixture() -> ChainSpec<Rational> {
        ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(2, 1)]).unwrap()
    }

    fn chain4() -> ChainSpec<Rational> {
        ChainSpec::new(Regime::Xxx, q(1, 1), vec![q(0, 1), q(7, 5), q(-3, 4), q(13, 6)]).unwrap()
    }

    #[test]
    fn certify_examples() {
        let chain = fixture();
        let ok = certify(&chain, &[q(3, 2)]).unwrap();
        assert!(ok.certified);
        assert_eq!(ok.residuals, vec![q(0, 1)]);
        let bad = certify(&chain, &[q(1, 2)]).unwrap();
        assert!(!bad.certified);
        assert_eq!(bad.residuals, vec![q(-8, 5)]);
        assert!(certify::<Rational>(&chain, &[]).unwrap().certified);
    }

    #[test]
    fn single_root_is_promoted() {
        let chain = fixture();
        let report = solve_bae(&chain, 1, &[], SolveOptions::default()).unwrap();
        assert_eq!(report.solutions.len(), 1);
        match &report.solutions[0] {
            Solution::Exact(r) => {
                assert_eq!(r.roots, vec![q(3, 2)]);
                assert!(r.certified);
            }
            other => panic!("expected an exact root, got {other:?}"),
        }
    }

    #[test]
    fn empty_root_set() {
        let report = solve_bae(&fixture(), 0, &[], SolveOptions::default()).unwrap();
        assert!(matches!(&report.solutions[..], [Solution::Exact(r)] if r.roots.is_empty() && r.certified));
    }

    #[test]
    fn too_many_roots() {
        assert!(matches!(solve_bae(&fixture(), 3, &[], SolveOptions::default()), Err(Error::TooManyParticles { .. })));
    }

    #[test]
    fn two_roots_on_four_sites() {
        let chain = chain4();
        let fc = chain.to_complex();
        let report = solve_bae(&chain, 2, &[], SolveOptions::default()).unwrap();
        assert!(report.solutions.len() >= 2, "{report:?}");
        let sets: Vec<Vec<Complex64>> = report.solutions.iter().map(Solution::roots_c64).collect();
        for t in &sets {
            // Eigenvector of the transfer matrix.
            let v = fc.apply_product(Entry::B, t, &fc.vacuum()).unwrap();
            for u in [Complex64::new(0.3, 0.0), Complex64::new(-1.1, 0.2), Complex64::new(2.5, -0.4)] {
                let lam = fc.transfer_eigenvalue(&u, t).unwrap();
                let zv = fc.transfer_matrix(&u).unwrap().apply(&v).unwrap();
                let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max) * lam.norm().max(1.0);
                for (a, b) in zv.iter().zip(&v) {
                    assert!((a - b * lam).norm() < 1e-8 * scale);
                }
            }
            // Slavnov against contraction.
            let lambda = [Complex64::new(0.37, 0.1), Complex64::new(-0.81, 0.0)];
            let s = sp_slavnov(&fc, &lambda, t).unwrap();
            let d = sp_direct(&fc, &lambda, t).unwrap();
            assert!(s.approx_eq(&d, 1e-9), "{s} vs {d}");
        }
        let (a, b) = (&sets[0], &sets[1]);
        let overlap = sp_direct(&fc, a, b).unwrap().norm();
        let norms = (norm_direct(&fc, a).unwrap() * norm_direct(&fc, b).unwrap()).norm().sqrt();
        assert!(overlap / norms < 1e-8);
    }

    #[test]
    fn xxz_onshell_routes() {
        use crate::scalar_products::{gaudin_norm, sp_slavnov_jacobian, JacobianSign};
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let chain = ChainSpec::new(Regime::Xxz, c(0.4, 0.0), vec![c(0.0, 0.0), c(0.7, 0.0), c(-0.45, 0.0), c(1.2, 0.0)])
            .unwrap();
        let report = solve_bae(&chain, 2, &[], SolveOptions::default()).unwrap();
        assert!(!report.solutions.is_empty());
        let lambda = [c(0.21, 0.05), c(-0.33, 0.0)];
        for sol in &report.solutions {
            let t = sol.roots_c64();
            let d = sp_direct(&chain, &lambda, &t).unwrap();
            assert!(sp_slavnov(&chain, &lambda, &t).unwrap().approx_eq(&d, 1e-9));
            assert!(sp_slavnov_jacobian(&chain, &lambda, &t, JacobianSign::Explicit).unwrap().approx_eq(&d, 1e-9));
            let norm = gaudin_norm(&chain, &t, 1e-9).unwrap();
            assert!(norm.forms_agree && norm.factorization_holds);
            assert!(norm.value.approx_eq(&norm_direct(&chain, &t).unwrap(), 1e-8));
        }
    }

    #[test]
    fn permuted_roots_certify_alike() {
        let chain = chain4();
        let report = solve_bae(&chain, 2, &[], SolveOptions::default()).unwrap();
        let t = report.solutions[0].roots_c64();
        let fc = chain.to_complex();
        let swapped = [t[1], t[0]];
        assert_eq!(certify(&fc, &t).unwrap().certified, certify(&fc, &swapped).unwrap().certified);
    }

    #[test]
    fn user_seed_of_wrong_size_fails() {
        let report = solve_bae(&fixture(), 1, &[vec![Complex64::new(1.0, 0.0)], vec![]], SolveOptions::default()).unwrap();
        assert_eq!(report.solutions.len(), 1);
        assert_eq!(report.failures.len(), 1);
    }
}
