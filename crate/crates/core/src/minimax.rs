//! Worst-case decoding. The zero-sum game between a prior over `{0,1}^n`
//! (maximizer) and a `2^n`-outcome POVM (minimizer) with payoff
//! `f(P, Q) = E_{x ~ P, y ~ Tr(Q_y rho_x)}[d_H(x, y)]` is solved by
//! multiplicative weights on the prior, answering each prior with its PGM.
//! The returned measurement is the operator-level average of those PGMs,
//! which is itself a POVM.

use serde::Serialize;

use crate::bits;
use crate::decoding::{hamming_bound, marginal_povms, per_x_expected_hamming};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Povm};
use crate::pgm::{build_pgm, PgmMode};
use crate::qrac::{Ensemble, Qrac};

pub const MAX_SOLVER_BITS: usize = 8;
pub const MAX_SOLVER_QUBITS: usize = 4;
pub const DEFAULT_MAX_ITERS: usize = 2000;
/// The solver also waits for `gap <= GAP_FRACTION * n`.
pub const GAP_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct WorstCase {
    pub per_x: Vec<f64>,
    pub max_x: f64,
    /// Lexicographically smallest maximizer.
    pub argmax_x: usize,
}

fn worst_of(per_x: Vec<f64>) -> WorstCase {
    let (argmax_x, max_x) = per_x
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bx, bv), (x, v)| {
            if v > bv {
                (x, v)
            } else {
                (bx, bv)
            }
        });
    WorstCase {
        per_x,
        max_x,
        argmax_x,
    }
}

/// `E[d_H(x, y)]` for every `x` under `measurement`, plus max and argmax.
pub fn evaluate_worstcase(code: &Qrac, measurement: &Povm) -> Result<WorstCase> {
    if measurement.dim() != code.dim() {
        return Err(Error::DimensionMismatch {
            expected: code.dim(),
            found: measurement.dim(),
        });
    }
    let marginals = marginal_povms(measurement, code.n())?;
    Ok(worst_of(per_x_expected_hamming(code, &marginals)))
}

#[derive(Clone, Debug, Serialize)]
pub struct GameSolution {
    #[serde(skip)]
    pub measurement: Povm,
    /// `max_x E[d_H | x]` under `measurement`.
    pub worst_x_value: f64,
    pub argmax_x: usize,
    /// `f(P, PGM(P))` for the prior `P` of the reported iteration.
    pub avg_value_at_final_prior: f64,
    pub final_prior: Vec<f64>,
    /// `(1/t) sum_s f(P_s, PGM(P_s))`, the prior player's average payoff.
    pub avg_value_running: f64,
    /// `worst_x_value - avg_value_running`; by the no-regret property of
    /// multiplicative weights this is at most `n sqrt(ln(2^n) / (2 max_iters))`.
    pub gap: f64,
    pub gap_limit: f64,
    pub iterations: usize,
    pub target: f64,
    pub converged: bool,
    pub learning_rate: f64,
    pub seed: u64,
    /// Worst-case string of the averaged measurement after each iteration.
    pub prior_trace: Vec<usize>,
    /// Worst-case value of the averaged measurement after each iteration.
    pub value_trace: Vec<f64>,
}

impl GameSolution {
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            #[serde(flatten)]
            solution: &'a GameSolution,
            measurement: Vec<Vec<Vec<[f64; 2]>>>,
        }
        let measurement = self
            .measurement
            .elements()
            .iter()
            .map(|e| {
                (0..e.dim())
                    .map(|r| (0..e.dim()).map(|c| [e[(r, c)].re, e[(r, c)].im]).collect())
                    .collect()
            })
            .collect();
        Ok(serde_json::to_string(&Doc {
            solution: self,
            measurement,
        })?)
    }
}

fn softmax(logw: &[f64]) -> Vec<f64> {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Learning rate `sqrt(8 ln(2^n) / max_iters)`.
pub fn learning_rate(n: usize, max_iters: usize) -> f64 {
    (8.0 * n as f64 * std::f64::consts::LN_2 / max_iters as f64).sqrt()
}

/// Runs multiplicative weights until the averaged measurement's worst-case
/// expected Hamming distance is at most `2p(1-p)n + eps n`, where `p` is the
/// code's claimed success. On failure the best iterate travels inside
/// [`Error::NotConverged`].
pub fn solve_worstcase(code: &Qrac, eps: f64, max_iters: usize, seed: u64) -> Result<GameSolution> {
    let n = code.n();
    if n > MAX_SOLVER_BITS {
        return Err(Error::SizeCap {
            what: "minimax bits",
            value: n,
            limit: MAX_SOLVER_BITS,
        });
    }
    if code.m() > MAX_SOLVER_QUBITS {
        return Err(Error::SizeCap {
            what: "minimax qubits",
            value: code.m(),
            limit: MAX_SOLVER_QUBITS,
        });
    }
    if !(eps > 0.0) || max_iters == 0 {
        return Err(Error::DomainError(format!(
            "need eps > 0 and max_iters >= 1 (got {eps}, {max_iters})"
        )));
    }

    let strings = 1usize << n;
    let dim = code.dim();
    let target = hamming_bound(code.claimed_p(), n) + eps * n as f64;
    let gap_limit = GAP_FRACTION * n as f64;
    let mut payoff_sum = 0.0;
    let lr = learning_rate(n, max_iters);

    let mut logw = vec![0.0; strings];
    let mut mean_table = vec![ComplexMatrix::zeros(dim); strings];
    let mut mean_marginals = vec![[ComplexMatrix::zeros(dim), ComplexMatrix::zeros(dim)]; n];
    let mut prior_trace = Vec::new();
    let mut value_trace = Vec::new();
    let mut best: Option<GameSolution> = None;

    for t in 1..=max_iters {
        let prior = softmax(&logw);
        let ensemble = Ensemble::new(code, prior.clone())?;
        let pgm = build_pgm(&ensemble, PgmMode::Full)?;
        let per_x = per_x_expected_hamming(code, pgm.marginals());
        let avg: f64 = prior.iter().zip(&per_x).map(|(p, v)| p * v).sum();
        payoff_sum += avg;
        let running = payoff_sum / t as f64;

        let w = 1.0 / t as f64;
        for (acc, q) in mean_table.iter_mut().zip(pgm.full_table()?.elements()) {
            *acc = acc.scale(1.0 - w);
            acc.add_scaled(q, w);
        }
        for (acc, f) in mean_marginals.iter_mut().zip(pgm.marginals()) {
            for b in 0..2 {
                acc[b] = acc[b].scale(1.0 - w);
                acc[b].add_scaled(&f.elements()[b], w);
            }
        }
        let marginals: Vec<Povm> = mean_marginals
            .iter()
            .map(|[f0, f1]| Povm::from_parts_unchecked(vec![0, 1], vec![f0.clone(), f1.clone()]))
            .collect::<Result<_>>()?;
        let wc = worst_of(per_x_expected_hamming(code, &marginals));
        prior_trace.push(wc.argmax_x);
        value_trace.push(wc.max_x);

        let gap = wc.max_x - running;
        let converged = wc.max_x <= target && gap <= gap_limit;
        let improves = best.as_ref().is_none_or(|b| wc.max_x < b.worst_x_value);
        if improves || converged {
            best = Some(GameSolution {
                measurement: Povm::from_parts_unchecked(
                    (0..strings).collect(),
                    mean_table.clone(),
                )?,
                worst_x_value: wc.max_x,
                argmax_x: wc.argmax_x,
                avg_value_at_final_prior: avg,
                final_prior: prior,
                avg_value_running: running,
                gap,
                gap_limit,
                iterations: t,
                target,
                converged,
                learning_rate: lr,
                seed,
                prior_trace: Vec::new(),
                value_trace: Vec::new(),
            });
        }
        if converged {
            break;
        }
        for (lw, d) in logw.iter_mut().zip(&per_x) {
            *lw += lr * d / n as f64;
        }
    }

    let mut solution = best.expect("at least one iteration ran");
    solution.prior_trace = prior_trace;
    solution.value_trace = value_trace;
    if solution.converged {
        Ok(solution)
    } else {
        Err(Error::NotConverged(Box::new(solution)))
    }
}

/// Expected Hamming distance for every `x` when the measurement always
/// outputs `y` (helper for tests and reports).
pub fn constant_output_distances(n: usize, y: usize) -> Vec<f64> {
    (0..1usize << n).map(|x| bits::hamming(x, y) as f64).collect()
}
