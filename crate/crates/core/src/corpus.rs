//! Seeded collections of codes, priors and small ensembles for batch checks.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::info::CqState;
use crate::linalg::DensityMatrix;
use crate::qrac::{Ensemble, Qrac};
use crate::rng::{self, tag};

/// Random codes must beat this worst-case success to enter a corpus.
pub const MIN_RANDOM_P: f64 = 0.55;
pub const ATTEMPTS_PER_CODE: usize = 200;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub code: Qrac,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusSummary {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub p: f64,
}

impl CorpusEntry {
    pub fn new(name: impl Into<String>, code: Qrac) -> Self {
        Self {
            name: name.into(),
            code,
        }
    }

    pub fn summary(&self) -> CorpusSummary {
        CorpusSummary {
            name: self.name.clone(),
            n: self.code.n(),
            m: self.code.m(),
            p: self.code.claimed_p(),
        }
    }
}

pub fn standard() -> CorpusEntry {
    CorpusEntry::new("standard", Qrac::standard_2to1())
}

pub fn tensor_powers(ks: impl IntoIterator<Item = usize>) -> Result<Vec<CorpusEntry>> {
    let base = Qrac::standard_2to1();
    ks.into_iter()
        .map(|k| Ok(CorpusEntry::new(format!("tensor{k}"), base.tensor_power(k)?)))
        .collect()
}

pub fn identities(ns: impl IntoIterator<Item = usize>) -> Result<Vec<CorpusEntry>> {
    ns.into_iter()
        .map(|n| Ok(CorpusEntry::new(format!("identity{n}"), Qrac::identity_encoding(n)?)))
        .collect()
}

/// Random codes with `2 <= n <= max_n`, `1 <= m <= min(max_m, n)` and
/// worst-case success above [`MIN_RANDOM_P`]. Sizes are drawn per attempt;
/// gives up after `ATTEMPTS_PER_CODE * count` attempts and returns what it has.
pub fn random_codes(count: usize, max_n: usize, max_m: usize, seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::with_capacity(count);
    let max_n = max_n.max(2);
    for attempt in 0..(ATTEMPTS_PER_CODE * count) as u64 {
        if out.len() == count {
            break;
        }
        let mut r = rng::stream(seed, &[tag::CORPUS, attempt]);
        let n = r.random_range(2..=max_n);
        let m = r.random_range(1..=max_m.min(n).max(1));
        let code = Qrac::random(n, m, rng::derive_seed(seed, &[tag::CORPUS, attempt]))?;
        if code.claimed_p() > MIN_RANDOM_P {
            out.push(CorpusEntry::new(format!("random[n={n},m={m},#{attempt}]"), code));
        }
    }
    Ok(out)
}

/// The uniform prior followed by `count` seeded random priors, every third
/// of them sparse.
pub fn priors(code: &Qrac, count: usize, seed: u64) -> Vec<Ensemble> {
    std::iter::once(Ensemble::uniform(code))
        .chain((0..count as u64).map(|k| {
            Ensemble::random(code, rng::derive_seed(seed, &[tag::PRIOR, k]), k % 3 == 2)
        }))
        .collect()
}

#[derive(Clone, Debug)]
pub struct TwoStateEnsemble {
    pub p0: f64,
    pub rho0: DensityMatrix,
    pub p1: f64,
    pub rho1: DensityMatrix,
}

/// Random two-state ensembles on one or two qubits.
pub fn two_state_ensembles(count: usize, seed: u64) -> Result<Vec<TwoStateEnsemble>> {
    (0..count as u64)
        .map(|k| {
            let dim = if k % 2 == 0 { 2 } else { 4 };
            let cq = CqState::random(2, dim, rng::derive_seed(seed, &[tag::ENSEMBLE, k]))?;
            Ok(TwoStateEnsemble {
                p0: cq.probs()[0],
                rho0: cq.states()[0].clone(),
                p1: cq.probs()[1],
                rho1: cq.states()[1].clone(),
            })
        })
        .collect()
}

/// The two bit-conditioned mixtures of the standard code for bit `i`,
/// `rho_b = (1/2) sum_{x: x_i = b} rho_x`.
pub fn standard_bit_ensemble(i: usize) -> TwoStateEnsemble {
    let q = Qrac::standard_2to1();
    let mixture = |b: usize| {
        let members: Vec<&DensityMatrix> = (0..4)
            .filter(|&x| crate::bits::bit(x, i, 2) == b)
            .map(|x| q.state(x))
            .collect();
        DensityMatrix::mixture(&[0.5, 0.5], &members).expect("valid mixture")
    };
    TwoStateEnsemble {
        p0: 0.5,
        rho0: mixture(0),
        p1: 0.5,
        rho1: mixture(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_codes_meet_the_threshold() {
        let codes = random_codes(12, 5, 3, 1).unwrap();
        assert_eq!(codes.len(), 12);
        for c in &codes {
            assert!(c.code.claimed_p() > MIN_RANDOM_P);
            assert!(c.code.n() <= 5 && c.code.m() <= 3);
        }
        let again = random_codes(12, 5, 3, 1).unwrap();
        assert_eq!(
            codes.iter().map(|c| &c.name).collect::<Vec<_>>(),
            again.iter().map(|c| &c.name).collect::<Vec<_>>()
        );
    }

    #[test]
    fn priors_start_uniform() {
        let q = Qrac::standard_2to1();
        let ps = priors(&q, 5, 0);
        assert_eq!(ps.len(), 6);
        assert_eq!(ps[0].prior(), &[0.25; 4]);
        assert!(ps[3].prior().iter().any(|&p| p == 0.0));
    }

    #[test]
    fn bit_ensemble_states() {
        let e = standard_bit_ensemble(1);
        assert!((e.rho0.matrix().trace().re - 1.0).abs() < 1e-12);
        assert_eq!(two_state_ensembles(4, 0).unwrap()[1].rho0.dim(), 4);
    }
}
