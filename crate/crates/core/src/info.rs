//! Entropies, max-relative entropy and max channel capacity, plus checks for
//! the cq-state operator inequalities, data processing of max capacity, and
//! the qubit lower bound `m >= (1 - H(2p(1-p))) n - log2(n+1)`.
//!
//! All logarithms are base 2.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, partial_trace, tensor, ComplexMatrix, DensityMatrix, Povm, TOL_PSD,
};
use crate::pgm::{build_pgm, PgmMode};
use crate::qrac::{Ensemble, Qrac};
use crate::rng::{self, tag};

/// Eigenvalues below this fraction of the largest count as zero in `x log x`.
pub const ENTROPY_CUTOFF: f64 = 1e-15;
/// Row-sum tolerance for channels.
pub const TOL_CHANNEL: f64 = 1e-12;
/// Slack for inequality checks on information quantities.
pub const TOL_INFO: f64 = 1e-8;

fn xlogx_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    let cutoff = ENTROPY_CUTOFF * max;
    values
        .iter()
        .filter(|&&v| v > cutoff && v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

pub fn shannon_entropy(dist: &[f64]) -> f64 {
    xlogx_sum(dist.iter().copied())
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    xlogx_sum(rho.eigenvalues()).max(0.0)
}

fn matrix_entropy(a: &ComplexMatrix) -> Result<f64> {
    Ok(xlogx_sum(eig_hermitian(a)?.values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition {
    pub dim_a: usize,
    pub dim_b: usize,
}

fn check_split(rho: &DensityMatrix, dims: &[usize]) -> Result<()> {
    if dims.iter().product::<usize>() != rho.dim() {
        return Err(Error::BadSplit(format!(
            "{dims:?} does not factor dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// `H(A|B) = H(AB) - H(B)`
pub fn conditional_entropy(rho_ab: &DensityMatrix, split: Bipartition) -> Result<f64> {
    let dims = [split.dim_a, split.dim_b];
    check_split(rho_ab, &dims)?;
    let rho_b = partial_trace(rho_ab.matrix(), &dims, &[1])?;
    Ok(von_neumann_entropy(rho_ab) - matrix_entropy(&rho_b)?)
}

/// `I(A:B) = H(A) + H(B) - H(AB)`
pub fn mutual_information(rho_ab: &DensityMatrix, split: Bipartition) -> Result<f64> {
    let dims = [split.dim_a, split.dim_b];
    check_split(rho_ab, &dims)?;
    let rho_a = partial_trace(rho_ab.matrix(), &dims, &[0])?;
    let rho_b = partial_trace(rho_ab.matrix(), &dims, &[1])?;
    Ok(matrix_entropy(&rho_a)? + matrix_entropy(&rho_b)? - von_neumann_entropy(rho_ab))
}

/// `I(A:B|C) = I(A:BC) - I(A:C)` for a tripartite state with dims `[a, b, c]`.
pub fn conditional_mutual_information(rho_abc: &DensityMatrix, dims: [usize; 3]) -> Result<f64> {
    check_split(rho_abc, &dims)?;
    let [a, b, c] = dims;
    let i_a_bc = mutual_information(rho_abc, Bipartition { dim_a: a, dim_b: b * c })?;
    let rho_ac = DensityMatrix::from_matrix_unchecked(partial_trace(
        rho_abc.matrix(),
        &dims,
        &[0, 2],
    )?);
    let i_a_c = mutual_information(&rho_ac, Bipartition { dim_a: a, dim_b: c })?;
    Ok(i_a_bc - i_a_c)
}

pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::DomainError(format!("binary entropy of {q}")));
    }
    Ok(shannon_entropy(&[q, 1.0 - q]))
}

/// `log2 max_y p(y)/q(y)` over the support of `p`; `+inf` when `p` puts mass
/// where `q` has none.
pub fn d_max_classical(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different alphabets");
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| if *qi > 0.0 { pi / qi } else { f64::INFINITY })
        .fold(0.0_f64, f64::max)
        .log2()
}

/// A stochastic map from `in_size` inputs to distributions over `out_size`
/// outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelDocument", into = "ChannelDocument")]
pub struct ClassicalChannel {
    table: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDocument {
    in_size: usize,
    out_size: usize,
    table: Vec<Vec<f64>>,
}

impl TryFrom<ChannelDocument> for ClassicalChannel {
    type Error = Error;

    fn try_from(doc: ChannelDocument) -> Result<Self> {
        let ch = ClassicalChannel::new(doc.table)?;
        if ch.in_size() != doc.in_size || ch.out_size() != doc.out_size {
            return Err(Error::InvalidChannel("declared sizes disagree with table".into()));
        }
        Ok(ch)
    }
}

impl From<ClassicalChannel> for ChannelDocument {
    fn from(ch: ClassicalChannel) -> Self {
        Self {
            in_size: ch.in_size(),
            out_size: ch.out_size(),
            table: ch.table,
        }
    }
}

impl ClassicalChannel {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let out = table
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidChannel("no input symbols".into()))?;
        if out == 0 {
            return Err(Error::InvalidChannel("no output symbols".into()));
        }
        for (x, row) in table.iter().enumerate() {
            if row.len() != out {
                return Err(Error::InvalidChannel(format!("row {x} has {} entries", row.len())));
            }
            if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidChannel(format!("row {x} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > TOL_CHANNEL {
                return Err(Error::InvalidChannel(format!("row {x} sums to {s}")));
            }
        }
        Ok(Self { table })
    }

    /// Rows are clipped at zero before validation; intended for tables
    /// computed as `Tr(E_y rho_x)`, where rounding can leave `-1e-17`.
    pub fn from_computed(mut table: Vec<Vec<f64>>) -> Result<Self> {
        for row in &mut table {
            for v in row.iter_mut() {
                if *v < 0.0 && *v > -1e-12 {
                    *v = 0.0;
                }
            }
        }
        Self::new(table)
    }

    pub fn identity(k: usize) -> Self {
        Self {
            table: (0..k)
                .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn constant(in_size: usize, row: Vec<f64>) -> Result<Self> {
        Self::new(vec![row; in_size])
    }

    /// `E(x)(k) = Tr(M_k rho_x)` for a measurement `M`.
    pub fn from_measurement(states: &[DensityMatrix], povm: &Povm) -> Result<Self> {
        Self::from_computed(states.iter().map(|s| povm.probabilities(s)).collect())
    }

    /// Random channel with Dirichlet-distributed rows.
    pub fn random(in_size: usize, out_size: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, &[tag::CHANNEL, in_size as u64, out_size as u64]);
        let table = (0..in_size)
            .map(|_| {
                let w: Vec<f64> = (0..out_size)
                    .map(|_| -(1.0 - rng.random::<f64>()).ln())
                    .collect();
                let t: f64 = w.iter().sum();
                w.into_iter().map(|v| v / t).collect()
            })
            .collect();
        Self { table }
    }

    pub fn in_size(&self) -> usize {
        self.table.len()
    }

    pub fn out_size(&self) -> usize {
        self.table[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.table[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// `(post . self)(x)(b) = sum_y self(x)(y) post(y)(b)`
    pub fn then(&self, post: &ClassicalChannel) -> Result<Self> {
        if post.in_size() != self.out_size() {
            return Err(Error::DimensionMismatch {
                expected: self.out_size(),
                found: post.in_size(),
            });
        }
        let table = self
            .table
            .iter()
            .map(|row| {
                (0..post.out_size())
                    .map(|b| row.iter().zip(&post.table).map(|(p, r)| p * r[b]).sum())
                    .collect()
            })
            .collect();
        Self::from_computed(table)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.table {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let table = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|c| {
                        c.trim().parse::<f64>().map_err(|e| {
                            Error::InvalidChannel(format!("bad cell {c:?}: {e}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(table)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CMax {
    /// Bits.
    pub value: f64,
    /// `sigma(y) ∝ max_x E(x)(y)`
    pub argmin_sigma: Vec<f64>,
    /// `sum_y max_x E(x)(y) = 2^value`
    pub scale: f64,
}

/// Max channel capacity in closed form: with every input in the support,
/// `min_sigma max_x D_max(E(x) || sigma)` is attained at
/// `sigma(y) ∝ max_x E(x)(y)`, giving `log2 sum_y max_x E(x)(y)`.
pub fn c_max(channel: &ClassicalChannel) -> CMax {
    let col_max: Vec<f64> = (0..channel.out_size())
        .map(|y| {
            channel
                .rows()
                .iter()
                .map(|r| r[y])
                .fold(0.0_f64, f64::max)
        })
        .collect();
    let scale: f64 = col_max.iter().sum();
    CMax {
        value: scale.log2(),
        argmin_sigma: col_max.iter().map(|v| v / scale).collect(),
        scale,
    }
}

/// `max_x D_max(E(x) || sigma)` for a candidate reference distribution.
pub fn max_dmax(channel: &ClassicalChannel, sigma: &[f64]) -> f64 {
    channel
        .rows()
        .iter()
        .map(|r| d_max_classical(r, sigma))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest `max_x D_max(E(x) || sigma)` found over random reference
/// distributions (random perturbations of the closed-form optimum plus
/// Dirichlet draws). Used as a falsification check on [`c_max`].
pub fn c_max_random_search(channel: &ClassicalChannel, trials: usize, seed: u64) -> f64 {
    let mut rng = rng::stream(seed, &[tag::CHANNEL, 0xC3A7]);
    let opt = c_max(channel).argmin_sigma;
    let k = channel.out_size();
    let mut best = f64::INFINITY;
    for t in 0..trials {
        let sigma: Vec<f64> = if t % 2 == 0 {
            (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect()
        } else {
            opt.iter()
                .map(|v| v * (1.0 + 0.2 * (rng.random::<f64>() - 0.5)))
                .collect()
        };
        let s: f64 = sigma.iter().sum();
        let sigma: Vec<f64> = sigma.iter().map(|v| v / s).collect();
        best = best.min(max_dmax(channel, &sigma));
    }
    best
}

/// `I(X:Y)` in bits for input distribution `prior`.
pub fn classical_mutual_information(prior: &[f64], channel: &ClassicalChannel) -> f64 {
    let out: Vec<f64> = (0..channel.out_size())
        .map(|y| prior.iter().zip(channel.rows()).map(|(p, r)| p * r[y]).sum())
        .collect();
    let h_y_given_x: f64 = prior
        .iter()
        .zip(channel.rows())
        .map(|(p, r)| p * shannon_entropy(r))
        .sum();
    shannon_entropy(&out) - h_y_given_x
}

/// Shannon capacity by Blahut–Arimoto iteration.
pub fn shannon_capacity(channel: &ClassicalChannel, iterations: usize) -> f64 {
    let nx = channel.in_size();
    let ny = channel.out_size();
    let mut prior = vec![1.0 / nx as f64; nx];
    for _ in 0..iterations {
        let out: Vec<f64> = (0..ny)
            .map(|y| prior.iter().zip(channel.rows()).map(|(p, r)| p * r[y]).sum())
            .collect();
        let d: Vec<f64> = channel
            .rows()
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&out)
                    .filter(|(e, _)| **e > 0.0)
                    .map(|(e, o)| e * (e / o).ln())
                    .sum::<f64>()
            })
            .collect();
        let w: Vec<f64> = prior.iter().zip(&d).map(|(p, di)| p * di.exp()).collect();
        let t: f64 = w.iter().sum();
        prior = w.into_iter().map(|v| v / t).collect();
    }
    classical_mutual_information(&prior, channel)
}

/// `rho_XA = sum_x p_x |x><x| ⊗ rho_A^x`
#[derive(Clone, Debug)]
pub struct CqState {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl CqState {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() || probs.is_empty() {
            return Err(Error::BadSplit(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        if probs.iter().any(|&p| p < 0.0) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::DomainError("cq probabilities are not a distribution".into()));
        }
        let d = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(Self { probs, states })
    }

    /// Random cq-state with random mixed conditional states.
    pub fn random(labels: usize, dim: usize, seed: u64) -> Result<Self> {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rng::stream(seed, &[tag::ENSEMBLE, labels as u64, dim as u64]);
        let w: Vec<f64> = (0..labels).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let t: f64 = w.iter().sum();
        let states = (0..labels)
            .map(|_| {
                let rank = rng.random_range(1..=dim);
                let mut acc = ComplexMatrix::zeros(dim);
                for _ in 0..rank {
                    let v: Vec<crate::linalg::C64> = (0..dim)
                        .map(|_| {
                            crate::linalg::C64::new(
                                StandardNormal.sample(&mut rng),
                                StandardNormal.sample(&mut rng),
                            )
                        })
                        .collect();
                    acc.add_scaled(&ComplexMatrix::outer(&v), 1.0);
                }
                let tr = acc.trace().re;
                DensityMatrix::new(acc.scale(1.0 / tr))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(w.into_iter().map(|v| v / t).collect(), states)
    }

    pub fn labels(&self) -> usize {
        self.probs.len()
    }

    pub fn dim_a(&self) -> usize {
        self.states[0].dim()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn joint(&self) -> DensityMatrix {
        let k = self.labels();
        let mut acc = ComplexMatrix::zeros(k * self.dim_a());
        for (x, (p, s)) in self.probs.iter().zip(&self.states).enumerate() {
            let mut proj = vec![0.0; k];
            proj[x] = *p;
            acc.add_scaled(&tensor(&ComplexMatrix::from_real_diagonal(&proj), s.matrix()), 1.0);
        }
        DensityMatrix::from_matrix_unchecked(acc)
    }

    pub fn marginal_a(&self) -> DensityMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_a());
        for (p, s) in self.probs.iter().zip(&self.states) {
            acc.add_scaled(s.matrix(), *p);
        }
        DensityMatrix::from_matrix_unchecked(acc)
    }

    /// `I(X:A)`
    pub fn holevo_information(&self) -> Result<f64> {
        mutual_information(
            &self.joint(),
            Bipartition {
                dim_a: self.labels(),
                dim_b: self.dim_a(),
            },
        )
    }
}

/// Upper bound `log2 |A| = m` on the max-information of an `m`-qubit cq-state.
pub fn i_max_cq_upper(m_qubits: usize) -> f64 {
    m_qubits as f64
}

/// Checks `rho_XA <= I_X ⊗ rho_A` and `rho_XA <= rho_X ⊗ I_A` through the
/// smallest eigenvalue of each difference.
pub fn cq_imax_within_log_dim(cq: &CqState) -> Result<bool> {
    let joint = cq.joint();
    let k = cq.labels();
    let id_x_rho_a = tensor(&ComplexMatrix::identity(k), cq.marginal_a().matrix());
    let rho_x_id_a = tensor(
        &ComplexMatrix::from_real_diagonal(cq.probs()),
        &ComplexMatrix::identity(cq.dim_a()),
    );
    let first = eig_hermitian(&id_x_rho_a.sub(joint.matrix()))?.min();
    let second = eig_hermitian(&rho_x_id_a.sub(joint.matrix()))?.min();
    Ok(first >= -TOL_PSD && second >= -TOL_PSD)
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityCheck {
    pub c_max_processed: f64,
    pub c_max_measured: f64,
    pub log_dim: f64,
    pub ok: bool,
}

/// Data processing for max capacity: measuring the A register of `cq` with
/// `measurement` and post-processing outcomes with `post` can only lower
/// `C_max`, and measuring yields at most `log2 dim(A)`.
pub fn measured_cmax_check(
    cq: &CqState,
    measurement: &Povm,
    post: &ClassicalChannel,
) -> Result<MonotonicityCheck> {
    if measurement.dim() != cq.dim_a() {
        return Err(Error::BadSplit(format!(
            "measurement acts on dimension {}, register has {}",
            measurement.dim(),
            cq.dim_a()
        )));
    }
    let measured = ClassicalChannel::from_measurement(cq.states(), measurement)?;
    let processed = measured.then(post)?;
    let c_processed = c_max(&processed).value;
    let c_measured = c_max(&measured).value;
    let log_dim = (cq.dim_a() as f64).log2();
    Ok(MonotonicityCheck {
        c_max_processed: c_processed,
        c_max_measured: c_measured,
        log_dim,
        ok: c_processed <= c_measured + TOL_INFO && c_measured <= log_dim + TOL_INFO,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QubitLowerBound {
    /// `(1 - H(2p(1-p))) n - log2(n+1)`
    pub bound: f64,
    /// `(1 - H(p)) n`, the optimal bound, for comparison.
    pub nayak: f64,
}

pub fn qubit_lower_bound(n: usize, p: f64) -> Result<QubitLowerBound> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::DomainError(format!("success probability {p} not in (1/2, 1]")));
    }
    let nf = n as f64;
    Ok(QubitLowerBound {
        bound: (1.0 - binary_entropy(2.0 * p * (1.0 - p))?) * nf - (nf + 1.0).log2(),
        nayak: (1.0 - binary_entropy(p)?) * nf,
    })
}

/// Entropy of the marginal of a classical joint distribution on the given
/// coordinates.
pub fn joint_entropy(joint: &[(Vec<usize>, f64)], coords: &[usize]) -> f64 {
    let mut marginal: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (outcome, p) in joint {
        let key: Vec<usize> = coords.iter().map(|&c| outcome[c]).collect();
        *marginal.entry(key).or_insert(0.0) += p;
    }
    shannon_entropy(&marginal.into_values().collect::<Vec<_>>())
}

/// `H(target | given)` on a classical joint distribution.
pub fn classical_conditional_entropy(
    joint: &[(Vec<usize>, f64)],
    target: &[usize],
    given: &[usize],
) -> f64 {
    let all: Vec<usize> = target.iter().chain(given).copied().collect();
    joint_entropy(joint, &all) - joint_entropy(joint, given)
}

/// The quantities in the lower-bound argument, on the exact joint
/// distribution of `X` uniform, `Y` the outcome of the uniform-prior PGM and
/// `D = d_H(X, Y)`.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyChain {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub expected_d: f64,
    pub h_x: f64,
    pub h_x_given_y: f64,
    pub h_x_given_yd: f64,
    pub mutual_information: f64,
    pub lower_bound: f64,
    /// `H(X|Y,D) <= H(X|Y)`
    pub conditioning_ok: bool,
    /// `H(X|Y) <= H(X|Y,D) + log2(n+1)`
    pub distance_register_ok: bool,
    /// `H(X|Y,D) <= H(2p(1-p)) n`
    pub hamming_ball_ok: bool,
    /// `lower_bound <= I(X:Y) <= m`
    pub sandwich_ok: bool,
    pub tolerance: f64,
}

impl EntropyChain {
    pub fn ok(&self) -> bool {
        self.conditioning_ok && self.distance_register_ok && self.hamming_ball_ok && self.sandwich_ok
    }
}

pub fn entropy_chain(code: &Qrac) -> Result<EntropyChain> {
    let n = code.n();
    let p = code.claimed_p();
    let ensemble = Ensemble::uniform(code);
    let pgm = build_pgm(&ensemble, PgmMode::Full)?;
    let full = pgm.full_table()?;
    let px = 1.0 / (1usize << n) as f64;
    let mut joint = Vec::new();
    for x in 0..1usize << n {
        for (&y, q) in full.labels().iter().zip(full.elements()) {
            let pr = px * q.expectation(code.state(x).matrix()).max(0.0);
            if pr > 0.0 {
                joint.push((vec![x, y, bits::hamming(x, y)], pr));
            }
        }
    }
    let total: f64 = joint.iter().map(|(_, p)| p).sum();
    joint.iter_mut().for_each(|(_, p)| *p /= total);

    let expected_d = joint.iter().map(|(o, p)| o[2] as f64 * p).sum();
    let h_x = joint_entropy(&joint, &[0]);
    let h_x_given_y = classical_conditional_entropy(&joint, &[0], &[1]);
    let h_x_given_yd = classical_conditional_entropy(&joint, &[0], &[1, 2]);
    let mutual_information = h_x - h_x_given_y;
    let nf = n as f64;
    let q = 2.0 * p * (1.0 - p);
    let lower_bound = (1.0 - binary_entropy(q.min(1.0))?) * nf - (nf + 1.0).log2();
    Ok(EntropyChain {
        n,
        m: code.m(),
        p,
        expected_d,
        h_x,
        h_x_given_y,
        h_x_given_yd,
        mutual_information,
        lower_bound,
        conditioning_ok: h_x_given_yd <= h_x_given_y + TOL_INFO,
        distance_register_ok: h_x_given_y <= h_x_given_yd + (nf + 1.0).log2() + TOL_INFO,
        hamming_ball_ok: h_x_given_yd <= binary_entropy(q.min(1.0))? * nf + TOL_INFO,
        sandwich_ok: lower_bound <= mutual_information + TOL_INFO
            && mutual_information <= code.m() as f64 + TOL_INFO,
        tolerance: TOL_INFO,
    })
}
