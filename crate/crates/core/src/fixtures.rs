//! Deterministic random rational fixtures.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, ChainSpecJson};
use crate::error::{Error, Result};
use crate::field::{Field, Rational, Regime};

/// Integer ranges (inclusive) for sampled numerators, denominators and chain lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub num: (i64, i64),
    pub den: (i64, i64),
    pub n: (usize, usize),
    pub max_attempts: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { num: (-24, 24), den: (1, 7), n: (2, 6), max_attempts: 1000 }
    }
}

impl Bounds {
    /// Small heights and a large attempt budget, for constructions that need a
    /// rational square to turn up.
    pub fn small() -> Self {
        Bounds { num: (-9, 9), den: (1, 3), n: (4, 4), max_attempts: 200_000 }
    }

    pub fn with_n(self, lo: usize, hi: usize) -> Self {
        Bounds { n: (lo, hi), ..self }
    }
}

/// Seeded sampler of rationals and generic parameter sets.
pub struct Sampler {
    rng: ChaCha8Rng,
    bounds: Bounds,
}

impl Sampler {
    pub fn new(seed: u64, bounds: Bounds) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), bounds }
    }

    pub fn rational(&mut self) -> Rational {
        let (lo, hi) = self.bounds.num;
        let (dlo, dhi) = self.bounds.den;
        let num = self.rng.gen_range(lo..=hi);
        let den = self.rng.gen_range(dlo.max(1)..=dhi.max(1));
        Rational::from_ratio(num, den)
    }

    pub fn nonzero(&mut self) -> Result<Rational> {
        for _ in 0..self.bounds.max_attempts {
            let q = self.rational();
            if !q.is_zero() {
                return Ok(q);
            }
        }
        Err(Error::FixtureBounds { attempts: self.bounds.max_attempts })
    }

    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    /// `count` new values such that no two of them, nor any of them and an
    /// element of `avoid`, differ by `0` or `+-k eta` for `k` in `shifts`.
    pub fn generic(&mut self, count: usize, avoid: &[Rational], eta: &Rational, shifts: &[i64]) -> Result<Vec<Rational>> {
        let mut taken: Vec<Rational> = avoid.to_vec();
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            attempts += 1;
            if attempts > self.bounds.max_attempts {
                return Err(Error::FixtureBounds { attempts: self.bounds.max_attempts });
            }
            let cand = self.rational();
            let clash = taken.iter().any(|x| {
                let d = cand.clone() - x.clone();
                d.is_zero()
                    || shifts.iter().any(|&k| {
                        let s = eta.clone() * Rational::from_ratio(k, 1);
                        d == s || d == -s
                    })
            });
            if !clash {
                taken.push(cand.clone());
                out.push(cand);
            }
        }
        Ok(out)
    }

    /// A four-site rational chain with an exact two-root solution of the Bethe
    /// equations.
    ///
    /// The inhomogeneities `(x_1, x_2, c - eta - x_1, c - eta - x_2)` are
    /// invariant under `xi -> c - eta - xi`, so the roots `(t_1, c - t_1)` satisfy
    /// `a(t_2) = 1/a(t_1)` and `f(t_2) = 1/f(t_1)`, and the second equation
    /// follows from the first. The first equation is a quadratic for `x_2`;
    /// samples are drawn until its discriminant is a rational square, which
    /// needs small heights ([`Bounds::small`]).
    pub fn onshell_pair(&mut self) -> Result<(ChainSpec<Rational>, Vec<Rational>)> {
        let one = Rational::from_ratio(1, 1);
        for _ in 0..self.bounds.max_attempts {
            let eta = self.nonzero()?;
            let (t1, x1, c) = (self.rational(), self.rational(), self.rational());
            let t2 = c.clone() - t1.clone();
            let d = t2.clone() - t1.clone();
            let dd = c.clone() - eta.clone() - t1.clone() - t1.clone();
            let g = |x: &Rational| -> Option<Rational> {
                let den = x.clone() - t1.clone() + eta.clone();
                (!den.is_zero()).then(|| (x.clone() - t1.clone()) / den)
            };
            let (Some(g1), Some(g1r)) = (g(&x1), g(&(c.clone() - eta.clone() - x1.clone()))) else { continue };
            if d.is_zero() || (d.clone() + eta.clone()).is_zero() || (d.clone() - eta.clone()).is_zero() {
                continue;
            }
            // f(t_1) = c~(t_2 - t_1)/c~(t_1 - t_2) = (d - eta)/(d + eta)
            let f1 = (d.clone() - eta.clone()) / (d + eta.clone());
            let base = g1 * g1r;
            if base.is_zero() || f1 == base {
                continue;
            }
            let k = f1 / base;
            // u = x_2 - t_1 solves u^2 - D u + P = 0, P = K eta (D + eta)/(1 - K)
            let p = k.clone() * eta.clone() * (dd.clone() + eta.clone()) / (one.clone() - k);
            let disc = dd.clone() * dd.clone() - Rational::from_ratio(4, 1) * p;
            let Some(root) = rational_sqrt(&disc) else { continue };
            let u = (dd + root) / Rational::from_ratio(2, 1);
            let x2 = t1.clone() + u;
            let cc = c.clone() - eta.clone();
            let xi = vec![x1.clone(), x2.clone(), cc.clone() - x1, cc - x2];
            let Ok(chain) = ChainSpec::new(Regime::Xxx, eta, xi) else { continue };
            let roots = vec![t1, t2];
            if roots.iter().any(|t| chain.xi().contains(t)) {
                continue;
            }
            match chain.bae_residual(&roots) {
                Ok(r) if r.iter().all(|x| x.is_zero()) => return Ok((chain, roots)),
                _ => continue,
            }
        }
        Err(Error::FixtureBounds { attempts: self.bounds.max_attempts })
    }

    /// A rational XXX chain of length `n` with generic inhomogeneities.
    pub fn chain(&mut self, n: usize) -> Result<ChainSpec<Rational>> {
        let eta = self.nonzero()?;
        let xi = self.generic(n, &[], &eta, &[1])?;
        ChainSpec::new(Regime::Xxx, eta, xi)
    }
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyFactorization,
    Phi,
    Sp,
    Norm,
    SolveBae,
    Identities,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    SubsetSum,
    Fbasis,
    Slavnov,
    Jacobian,
    All,
}

/// One batch job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub chain: ChainSpecJson,
    pub command: Command,
    pub method: Method,
    pub out: Option<String>,
    pub tol: Option<f64>,
    pub seed: u64,
}

/// `count` valid rational chains with `N` drawn from `bounds.n`.
pub fn fixture_gen(seed: u64, count: usize, bounds: Bounds) -> Result<Vec<RunConfig>> {
    let mut sampler = Sampler::new(seed, bounds);
    (0..count)
        .map(|k| {
            let n = sampler.usize_in(bounds.n.0.max(1), bounds.n.1.max(bounds.n.0).max(1));
            let chain = sampler.chain(n)?;
            let json = chain.to_json();
            Ok(RunConfig {
                chain: serde_json::from_value(json).map_err(|e| Error::Parse(e.to_string()))?,
                command: Command::All,
                method: Method::All,
                out: None,
                tol: None,
                seed: seed.wrapping_add(k as u64),
            })
        })
        .collect()
}
