//! Whole-string decoding: exact expected Hamming distance between the encoded
//! string and a measurement outcome, Monte-Carlo sampling of outcomes, the
//! identification bound `sum_x Tr(Q_x rho_x) <= 2^m`, and Markov tails.

use rand::Rng;
use serde::Serialize;

use crate::bits;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Povm};
use crate::pgm::{PgmBundle, MAX_FULL_BITS};
use crate::qrac::{Ensemble, Qrac};
use crate::rng::{self, tag, StreamRng};

/// Slack when comparing exact values against analytic bounds.
pub const TOL_BOUND: f64 = 1e-8;

/// Something that yields a `{0,1}^n`-labelled outcome distribution.
#[derive(Clone, Copy, Debug)]
pub enum Measurement<'a> {
    Pgm(&'a PgmBundle),
    Povm(&'a Povm),
}

impl<'a> From<&'a PgmBundle> for Measurement<'a> {
    fn from(p: &'a PgmBundle) -> Self {
        Measurement::Pgm(p)
    }
}

impl<'a> From<&'a Povm> for Measurement<'a> {
    fn from(p: &'a Povm) -> Self {
        Measurement::Povm(p)
    }
}

impl Measurement<'_> {
    fn dim(&self) -> usize {
        match self {
            Measurement::Pgm(p) => p.dim(),
            Measurement::Povm(p) => p.dim(),
        }
    }

    /// Two-outcome marginal per bit: `F^{(i)}_b = sum_{y : y_i = b} E_y`.
    pub fn marginals(&self, n: usize) -> Result<Vec<Povm>> {
        match self {
            Measurement::Pgm(p) => {
                if p.marginals().len() != n {
                    return Err(Error::LabelMismatch {
                        n,
                        detail: format!("PGM has {} marginals", p.marginals().len()),
                    });
                }
                Ok(p.marginals().to_vec())
            }
            Measurement::Povm(p) => marginal_povms(p, n),
        }
    }
}

fn check_labels(povm: &Povm, n: usize) -> Result<()> {
    if let Some(&bad) = povm.labels().iter().find(|&&l| l >> n != 0) {
        return Err(Error::LabelMismatch {
            n,
            detail: format!("label {bad} is not an {n}-bit string"),
        });
    }
    Ok(())
}

/// Marginalizes a `{0,1}^n`-labelled POVM onto each bit.
pub fn marginal_povms(povm: &Povm, n: usize) -> Result<Vec<Povm>> {
    check_labels(povm, n)?;
    let dim = povm.dim();
    (1..=n)
        .map(|i| {
            let mut parts = [ComplexMatrix::zeros(dim), ComplexMatrix::zeros(dim)];
            for (&y, e) in povm.labels().iter().zip(povm.elements()) {
                parts[bits::bit(y, i, n)].add_scaled(e, 1.0);
            }
            let [f0, f1] = parts;
            Povm::from_parts_unchecked(vec![0, 1], vec![f0, f1])
        })
        .collect()
}

/// `E[d_H(x, y) | x] = sum_i Tr(F^{(i)}_{1 - x_i} rho_x)` for every `x`.
pub fn per_x_expected_hamming(code: &Qrac, marginals: &[Povm]) -> Vec<f64> {
    let n = code.n();
    (0..1usize << n)
        .map(|x| {
            let rho = code.state(x).matrix();
            (1..=n)
                .map(|i| marginals[i - 1].elements()[1 - bits::bit(x, i, n)].expectation(rho))
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct HammingReport {
    pub n: usize,
    pub p: f64,
    pub expected_dh: f64,
    pub per_bit_error: Vec<f64>,
    pub per_x_expected_dh: Vec<f64>,
    /// `2 p (1 - p) n`
    pub bound: f64,
    pub satisfied: bool,
    pub tolerance: f64,
}

impl HammingReport {
    /// One row per bit: `i, per_bit_error, bound_share`.
    pub fn to_csv(&self) -> String {
        let share = self.bound / self.n as f64;
        let mut out = String::from("i,per_bit_error,bound_share\n");
        for (k, e) in self.per_bit_error.iter().enumerate() {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", k + 1, e, share));
        }
        out
    }
}

pub fn hamming_bound(p: f64, n: usize) -> f64 {
    2.0 * p * (1.0 - p) * n as f64
}

/// Exact `E_{x ~ P, y}[d_H(x, y)]` through the per-bit marginals of the
/// measurement; no sampling.
pub fn expected_hamming_exact(e: &Ensemble, measurement: Measurement) -> Result<HammingReport> {
    let code = e.code();
    let n = code.n();
    if measurement.dim() != code.dim() {
        return Err(Error::DimensionMismatch {
            expected: code.dim(),
            found: measurement.dim(),
        });
    }
    let marginals = measurement.marginals(n)?;
    let per_x = per_x_expected_hamming(code, &marginals);
    let per_bit_error: Vec<f64> = (1..=n)
        .map(|i| {
            e.prior()
                .iter()
                .enumerate()
                .filter(|(_, p)| **p != 0.0)
                .map(|(x, p)| {
                    p * marginals[i - 1].elements()[1 - bits::bit(x, i, n)]
                        .expectation(code.state(x).matrix())
                })
                .sum()
        })
        .collect();
    let expected_dh = per_bit_error.iter().sum();
    let p = code.claimed_p();
    let bound = hamming_bound(p, n);
    Ok(HammingReport {
        n,
        p,
        expected_dh,
        per_bit_error,
        per_x_expected_dh: per_x,
        bound,
        satisfied: expected_dh <= bound + TOL_BOUND,
        tolerance: TOL_BOUND,
    })
}

/// Inverse-CDF sampler over the outcome distribution `Tr(E_y rho_x)`,
/// with outcomes in ascending label order.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    labels: Vec<usize>,
    cdf: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new(code: &Qrac, x: usize, povm: &Povm) -> Result<Self> {
        if code.n() > MAX_FULL_BITS {
            return Err(Error::SizeCap {
                what: "sampled outcome bits",
                value: code.n(),
                limit: MAX_FULL_BITS,
            });
        }
        check_labels(povm, code.n())?;
        if povm.dim() != code.dim() {
            return Err(Error::DimensionMismatch {
                expected: code.dim(),
                found: povm.dim(),
            });
        }
        let rho = code.state(x);
        let mut outcomes: Vec<(usize, f64)> = povm
            .labels()
            .iter()
            .zip(povm.probabilities(rho))
            .map(|(&l, p)| (l, p.max(0.0)))
            .collect();
        outcomes.sort_by_key(|&(l, _)| l);
        let total: f64 = outcomes.iter().map(|(_, p)| p).sum();
        let mut acc = 0.0;
        let cdf = outcomes
            .iter()
            .map(|(_, p)| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Self {
            labels: outcomes.into_iter().map(|(l, _)| l).collect(),
            cdf,
        })
    }

    pub fn sample(&self, rng: &mut StreamRng) -> usize {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u);
        self.labels[k.min(self.labels.len() - 1)]
    }
}

/// One outcome `y` for input `x`, from the stream keyed by `(seed, x)`.
pub fn sample_decode(code: &Qrac, x: usize, povm: &Povm, seed: u64) -> Result<usize> {
    let sampler = OutcomeSampler::new(code, x, povm)?;
    let mut rng = rng::stream(seed, &[tag::SAMPLE, x as u64, 0]);
    Ok(sampler.sample(&mut rng))
}

/// `count` outcomes for input `x`; replicate `r` uses stream `(seed, x, r)`.
pub fn sample_decode_many(
    code: &Qrac,
    x: usize,
    povm: &Povm,
    seed: u64,
    count: usize,
) -> Result<Vec<usize>> {
    let sampler = OutcomeSampler::new(code, x, povm)?;
    let mut rng = rng::stream(seed, &[tag::SAMPLE, x as u64, 1]);
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NayakCheck {
    /// `sum_x Tr(Q_x rho_x)`
    pub lhs: f64,
    /// `2^m`
    pub rhs: f64,
    pub ok: bool,
    pub tolerance: f64,
}

pub fn nayak_identification_check(code: &Qrac, povm: &Povm) -> Result<NayakCheck> {
    if code.n() > MAX_FULL_BITS {
        return Err(Error::SizeCap {
            what: "identification bits",
            value: code.n(),
            limit: MAX_FULL_BITS,
        });
    }
    check_labels(povm, code.n())?;
    let lhs = povm
        .labels()
        .iter()
        .zip(povm.elements())
        .map(|(&x, q)| q.expectation(code.state(x).matrix()))
        .sum();
    let rhs = code.dim() as f64;
    Ok(NayakCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + TOL_BOUND,
        tolerance: TOL_BOUND,
    })
}

/// Markov bound `Pr[d_H > c E[d_H]] <= 1/c`; reported as 0 when the expected
/// distance is 0.
pub fn markov_tail(report: &HammingReport, c: f64) -> Result<f64> {
    if c <= 1.0 {
        return Err(Error::DomainError(format!("Markov factor {c} must exceed 1")));
    }
    if report.expected_dh == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / c)
}
