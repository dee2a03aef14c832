//! Pretty good measurement for an ensemble `{(P_x, rho_x)}` and the one-bit
//! measurements it induces by ignoring all but one bit of the outcome.
//!
//! With `rho = sum_x P_x rho_x` the outcome operators are
//! `Q_y = P_y rho^{-1/2} rho_y rho^{-1/2}` and the bit-`i` marginal is
//! `F_b = rho^{-1/2} (sum_{y : y_i = b} P_y rho_y) rho^{-1/2}`. When `rho` is
//! rank deficient the operators only sum to the support projector; the
//! complement `I - Pi_supp` is added to the outcome labelled `0...0` (and so
//! to every `F_0`). Code states lie inside the support, so no probability
//! `Tr(Q_y rho_x)` changes.

use serde::Serialize;

use crate::bits;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, inv_sqrt_with_support, trace_norm, ComplexMatrix, DensityMatrix, Povm,
    SUPPORT_CUTOFF,
};
use crate::qrac::Ensemble;

/// Largest `n` for which the full `2^n`-outcome table is materialized.
pub const MAX_FULL_BITS: usize = 12;
/// Largest `n` for marginal-only construction.
pub const MAX_MARGINAL_BITS: usize = 16;
/// Slack for the `p_PGM >= p_max^2 + (1-p_max)^2/(k-1)` check.
pub const PGM_BOUND_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmMode {
    /// Only the `n` two-outcome marginals.
    Marginals,
    /// Marginals plus every `Q_y`.
    Full,
}

#[derive(Clone, Debug)]
pub struct PgmBundle {
    full: Option<Povm>,
    marginals: Vec<Povm>,
    support_cutoff: f64,
    support_rank: usize,
}

impl PgmBundle {
    pub fn full(&self) -> Option<&Povm> {
        self.full.as_ref()
    }

    pub fn full_table(&self) -> Result<&Povm> {
        self.full.as_ref().ok_or(Error::MissingFullTable)
    }

    /// Two-outcome `{F_0, F_1}` for bit `i` (1-based).
    pub fn marginal(&self, i: usize) -> Result<&Povm> {
        if i == 0 || i > self.marginals.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.marginals.len(),
            });
        }
        Ok(&self.marginals[i - 1])
    }

    pub fn marginals(&self) -> &[Povm] {
        &self.marginals
    }

    pub fn support_cutoff(&self) -> f64 {
        self.support_cutoff
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    pub fn dim(&self) -> usize {
        self.marginals[0].dim()
    }
}

/// PGM for an arbitrary finite ensemble; outcome `k` identifies state `k`.
pub fn pretty_good_measurement(priors: &[f64], states: &[&DensityMatrix]) -> Result<Povm> {
    if priors.len() != states.len() || states.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            found: priors.len(),
        });
    }
    let dim = states[0].dim();
    let mut rho = ComplexMatrix::zeros(dim);
    for (p, s) in priors.iter().zip(states) {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        rho.add_scaled(s.matrix(), *p);
    }
    let (inv_sqrt, support, _) = inv_sqrt_with_support(&rho, SUPPORT_CUTOFF)?;
    let remainder = ComplexMatrix::identity(dim).sub(&support);
    let mut elements: Vec<ComplexMatrix> = priors
        .iter()
        .zip(states)
        .map(|(p, s)| inv_sqrt.sandwich(&s.matrix().scale(*p)).hermitian_part())
        .collect();
    elements[0] = elements[0].add(&remainder);
    Povm::from_parts_unchecked((0..states.len()).collect(), elements)
}

pub fn build_pgm(e: &Ensemble, mode: PgmMode) -> Result<PgmBundle> {
    build_pgm_with_cutoff(e, mode, SUPPORT_CUTOFF)
}

pub fn build_pgm_with_cutoff(e: &Ensemble, mode: PgmMode, cutoff: f64) -> Result<PgmBundle> {
    let n = e.n();
    let limit = match mode {
        PgmMode::Full => MAX_FULL_BITS,
        PgmMode::Marginals => MAX_MARGINAL_BITS,
    };
    if n > limit {
        return Err(Error::SizeCap {
            what: "PGM bits",
            value: n,
            limit,
        });
    }
    let code = e.code();
    let dim = code.dim();
    let rho = e.average_state();
    let (inv_sqrt, support, rank) = inv_sqrt_with_support(rho.matrix(), cutoff)?;
    let remainder = ComplexMatrix::identity(dim).sub(&support);

    let marginals = (1..=n)
        .map(|i| {
            let mut parts = [ComplexMatrix::zeros(dim), ComplexMatrix::zeros(dim)];
            for (x, (p, s)) in e.prior().iter().zip(code.encoder()).enumerate() {
                if *p != 0.0 {
                    parts[bits::bit(x, i, n)].add_scaled(s.matrix(), *p);
                }
            }
            let [a0, a1] = parts;
            let f0 = inv_sqrt.sandwich(&a0).hermitian_part().add(&remainder);
            let f1 = inv_sqrt.sandwich(&a1).hermitian_part();
            Povm::from_parts_unchecked(vec![0, 1], vec![f0, f1])
        })
        .collect::<Result<Vec<_>>>()?;

    let full = match mode {
        PgmMode::Marginals => None,
        PgmMode::Full => {
            let mut elements: Vec<ComplexMatrix> = e
                .prior()
                .iter()
                .zip(code.encoder())
                .map(|(p, s)| {
                    if *p == 0.0 {
                        ComplexMatrix::zeros(dim)
                    } else {
                        inv_sqrt.sandwich(&s.matrix().scale(*p)).hermitian_part()
                    }
                })
                .collect();
            elements[0] = elements[0].add(&remainder);
            Some(Povm::from_parts_unchecked(
                (0..1usize << n).collect(),
                elements,
            )?)
        }
    };

    Ok(PgmBundle {
        full,
        marginals,
        support_cutoff: cutoff,
        support_rank: rank,
    })
}

/// `sum_x P_x Tr(Q_x rho_x)`
pub fn success_prob_full(e: &Ensemble, pg: &PgmBundle) -> Result<f64> {
    let full = pg.full_table()?;
    Ok(e.prior()
        .iter()
        .zip(e.code().encoder())
        .zip(full.elements())
        .map(|((p, s), q)| p * q.expectation(s.matrix()))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BitSuccess {
    pub probability: f64,
    /// One of `P(x_i = 0)`, `P(x_i = 1)` vanishes, so the bit is known a priori.
    pub trivial: bool,
}

/// `sum_x P_x Tr(F^{(i)}_{x_i} rho_x)` for bit `i` (1-based).
pub fn per_bit_success(e: &Ensemble, pg: &PgmBundle, i: usize) -> Result<BitSuccess> {
    let n = e.n();
    let marginal = pg.marginal(i)?;
    let mut weight = [0.0; 2];
    for (x, p) in e.prior().iter().enumerate() {
        weight[bits::bit(x, i, n)] += p;
    }
    if weight[0] == 0.0 || weight[1] == 0.0 {
        return Ok(BitSuccess {
            probability: 1.0,
            trivial: true,
        });
    }
    let probability = e
        .prior()
        .iter()
        .zip(e.code().encoder())
        .enumerate()
        .filter(|(_, (p, _))| **p != 0.0)
        .map(|(x, (p, s))| p * marginal.elements()[bits::bit(x, i, n)].expectation(s.matrix()))
        .sum();
    Ok(BitSuccess {
        probability,
        trivial: false,
    })
}

fn check_two_state_prior(p0: f64, p1: f64) -> Result<()> {
    if p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > 1e-9 {
        return Err(Error::DomainError(format!(
            "two-state prior ({p0}, {p1}) is not a distribution"
        )));
    }
    Ok(())
}

/// Optimal average success for discriminating `rho0` from `rho1`:
/// `(1 + ||p0 rho0 - p1 rho1||_1) / 2`.
pub fn helstrom_pmax(p0: f64, rho0: &DensityMatrix, p1: f64, rho1: &DensityMatrix) -> Result<f64> {
    check_two_state_prior(p0, p1)?;
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: rho1.dim(),
        });
    }
    let gamma = rho0.matrix().scale(p0).sub(&rho1.matrix().scale(p1));
    Ok(0.5 * (1.0 + trace_norm(&gamma)))
}

/// The measurement attaining [`helstrom_pmax`]: outcome 0 is the projector
/// onto the positive eigenspace of `p0 rho0 - p1 rho1`.
pub fn helstrom_measurement(
    p0: f64,
    rho0: &DensityMatrix,
    p1: f64,
    rho1: &DensityMatrix,
) -> Result<Povm> {
    check_two_state_prior(p0, p1)?;
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: rho1.dim(),
        });
    }
    let gamma = rho0.matrix().scale(p0).sub(&rho1.matrix().scale(p1));
    let eig = eig_hermitian(&gamma.hermitian_part())?;
    let m0 = eig.apply(|l| if l > 0.0 { 1.0 } else { 0.0 }).hermitian_part();
    let m1 = ComplexMatrix::identity(rho0.dim()).sub(&m0);
    Povm::two_outcome(m0, m1)
}

/// Average success of the PGM for the two-state ensemble `{(p0,rho0),(p1,rho1)}`.
pub fn two_state_pgm_success(
    p0: f64,
    rho0: &DensityMatrix,
    p1: f64,
    rho1: &DensityMatrix,
) -> Result<f64> {
    check_two_state_prior(p0, p1)?;
    let pgm = pretty_good_measurement(&[p0, p1], &[rho0, rho1])?;
    Ok(p0 * pgm.elements()[0].expectation(rho0.matrix())
        + p1 * pgm.elements()[1].expectation(rho1.matrix()))
}

/// `p_max^2 + (1 - p_max)^2 / (outcomes - 1)`
pub fn pgm_lower_bound(p_max: f64, outcomes: usize) -> f64 {
    p_max * p_max + (1.0 - p_max).powi(2) / (outcomes as f64 - 1.0)
}

pub fn check_pgm_lower_bound(p_pgm: f64, p_max: f64, outcomes: usize) -> bool {
    outcomes >= 2 && p_pgm >= pgm_lower_bound(p_max, outcomes) - PGM_BOUND_TOL
}
