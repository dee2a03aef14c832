//! Conversion of a quantum random access code into a classical one.
//!
//! A shared `(r, d)` symmetrizes the code (encode `SHIFT_d(x ⊕ r)`, undo the
//! shift and XOR after the uniform-prior PGM), the measured string is sent
//! through the channel compressor, and a sampled set `S` of shifts replaces
//! the shared randomness by an index in the message.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits;
use crate::compression::{build_scheme, exact_output_distribution, CompressionScheme};
use crate::decoding::hamming_bound;
use crate::error::{Error, Result};
use crate::info::ClassicalChannel;
use crate::pgm::{build_pgm, PgmBundle, PgmMode};
use crate::qrac::{Ensemble, Qrac};
use crate::rng::{self, tag};

pub const MAX_CHANNEL_BITS: usize = 8;
pub const MAX_RAC_BITS: usize = 6;
pub const DEFAULT_C_NEWMAN: f64 = 8.0;
pub const MAX_RESAMPLES: usize = 16;
pub const TOL_RAC: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SharedShift {
    pub r: usize,
    pub d: usize,
}

/// `(SHIFT_d(x))_i = x_{((i + d - 1) mod n) + 1}`: a left rotation by `d`.
pub fn shift(x: usize, d: usize, n: usize) -> Result<usize> {
    if d == 0 || d > n {
        return Err(Error::BadShift { d, n });
    }
    let full = (1usize << n) - 1;
    let d = d % n;
    if d == 0 {
        return Ok(x & full);
    }
    Ok(((x << d) | (x >> (n - d))) & full)
}

/// Inverse of [`shift`], i.e. `SHIFT_{n-d}`.
pub fn unshift(y: usize, d: usize, n: usize) -> Result<usize> {
    if d == 0 || d > n {
        return Err(Error::BadShift { d, n });
    }
    shift(y, if d == n { n } else { n - d }, n)
}

impl SharedShift {
    pub fn encode_input(&self, x: usize, n: usize) -> Result<usize> {
        shift(x ^ self.r, self.d, n)
    }

    pub fn decode_output(&self, y_prime: usize, n: usize) -> Result<usize> {
        Ok(unshift(y_prime, self.d, n)? ^ self.r)
    }
}

/// All `n 2^n` shifts, i.e. the uniform distribution over `s`.
pub fn all_shifts(n: usize) -> Vec<SharedShift> {
    (1..=n)
        .flat_map(|d| (0..1usize << n).map(move |r| SharedShift { r, d }))
        .collect()
}

fn check_bits(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit {
        return Err(Error::SizeCap {
            what,
            value: n,
            limit,
        });
    }
    Ok(())
}

/// Exact distribution of Bob's output `y` on input `x` under shift `s`.
pub fn symmetrized_roundtrip(
    q: &Qrac,
    x: usize,
    s: SharedShift,
    pgm_uniform: &PgmBundle,
) -> Result<Vec<f64>> {
    let n = q.n();
    check_bits(n, MAX_CHANNEL_BITS, "symmetrized outcome bits")?;
    let full = pgm_uniform.full_table()?;
    let rho = q.state(s.encode_input(x, n)?);
    let mut dist = vec![0.0; 1 << n];
    for (&y_prime, el) in full.labels().iter().zip(full.elements()) {
        dist[s.decode_output(y_prime, n)?] += el.expectation(rho.matrix()).max(0.0);
    }
    Ok(dist)
}

pub fn effective_channel(q: &Qrac, s: SharedShift, pgm_uniform: &PgmBundle) -> Result<ClassicalChannel> {
    check_bits(q.n(), MAX_CHANNEL_BITS, "effective channel bits")?;
    let rows = (0..1usize << q.n())
        .map(|x| symmetrized_roundtrip(q, x, s, pgm_uniform))
        .collect::<Result<Vec<_>>>()?;
    ClassicalChannel::from_computed(rows)
}

/// Uniform-prior PGM statistics of a code, from which every symmetrized
/// quantity is a relabeling.
#[derive(Clone, Debug)]
pub struct SymmetrizedCode {
    n: usize,
    /// `Tr(Q_{y'} rho_{x'})`
    outcome: Vec<Vec<f64>>,
    /// `Tr(F^{(j)}_{1 - x'_j} rho_{x'})`, `j` zero-based.
    bit_error: Vec<Vec<f64>>,
    uniform_error: f64,
}

impl SymmetrizedCode {
    pub fn new(q: &Qrac) -> Result<Self> {
        let n = q.n();
        check_bits(n, MAX_CHANNEL_BITS, "symmetrized code bits")?;
        let pgm = build_pgm(&Ensemble::uniform(q), PgmMode::Full)?;
        let full = pgm.full_table()?;
        let outcome = (0..1usize << n)
            .into_par_iter()
            .map(|x| {
                let mut row = vec![0.0; 1 << n];
                for (&y, el) in full.labels().iter().zip(full.elements()) {
                    row[y] = el.expectation(q.state(x).matrix()).max(0.0);
                }
                row
            })
            .collect::<Vec<_>>();
        let bit_error: Vec<Vec<f64>> = (0..1usize << n)
            .map(|x| {
                (1..=n)
                    .map(|j| {
                        let wrong = 1 - bits::bit(x, j, n);
                        pgm.marginals()[j - 1]
                            .element(wrong)
                            .map(|f| f.expectation(q.state(x).matrix()))
                            .unwrap_or(0.0)
                    })
                    .collect()
            })
            .collect();
        let total: f64 = bit_error.iter().flatten().sum();
        let uniform_error = total / ((1usize << n) * n) as f64;
        Ok(Self {
            n,
            outcome,
            bit_error,
            uniform_error,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `E_{s ~ U}[P_sxi]`, the same for every `(x, i)`.
    pub fn uniform_error(&self) -> f64 {
        self.uniform_error
    }

    /// `P_sxi = Pr[y_i != x_i]` under shift `s`; `i` is one-based.
    pub fn error(&self, s: SharedShift, x: usize, i: usize) -> Result<f64> {
        let n = self.n;
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let x_prime = s.encode_input(x, n)?;
        let j = (i + n - s.d % n - 1) % n;
        Ok(self.bit_error[x_prime][j])
    }

    pub fn channel(&self, s: SharedShift) -> Result<ClassicalChannel> {
        let n = self.n;
        let rows = (0..1usize << n)
            .map(|x| {
                let x_prime = s.encode_input(x, n)?;
                (0..1usize << n)
                    .map(|y| Ok(self.outcome[x_prime][s.encode_input(y, n)?]))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ClassicalChannel::from_computed(rows)
    }
}

/// `1 - E[d_H(x, y)] / n` under the uniform prior and its PGM.
pub fn per_bit_success_symmetrized(q: &Qrac) -> Result<f64> {
    Ok(1.0 - SymmetrizedCode::new(q)?.uniform_error())
}

pub fn newman_set_size(n: usize, eta: f64, c_newman: f64) -> usize {
    ((c_newman * n as f64 / (eta * eta)).ceil() as usize).max(1)
}

pub fn sample_newman_set(n: usize, eta: f64, seed: u64, c_newman: f64) -> Result<Vec<SharedShift>> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::DomainError(format!("eta = {eta} not in (0, 1)")));
    }
    if !(c_newman > 0.0) {
        return Err(Error::DomainError(format!("c_newman = {c_newman} must be positive")));
    }
    let mut rng = rng::stream(seed, &[tag::NEWMAN, n as u64]);
    Ok((0..newman_set_size(n, eta, c_newman))
        .map(|_| SharedShift {
            r: rng.random_range(0..1usize << n),
            d: rng.random_range(1..=n),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BadEventReport {
    pub ok: bool,
    pub worst_margin: f64,
    pub uniform_error: f64,
    pub offending: Vec<(usize, usize)>,
}

fn bad_events(table: &SymmetrizedCode, set: &[SharedShift], eta: f64) -> Result<BadEventReport> {
    let n = table.n();
    let size = set.len() as f64;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut offending = Vec::new();
    for x in 0..1usize << n {
        for i in 1..=n {
            let mut acc = 0.0;
            for &s in set {
                acc += table.error(s, x, i)?;
            }
            let margin = acc / size - table.uniform_error();
            worst_margin = worst_margin.max(margin);
            if margin > eta / 2.0 {
                offending.push((x, i));
            }
        }
    }
    Ok(BadEventReport {
        ok: offending.is_empty(),
        worst_margin,
        uniform_error: table.uniform_error(),
        offending,
    })
}

/// Checks `E_{s ~ S}[P_sxi] <= E_{s ~ U}[P_sxi] + eta/2` for every `(x, i)`.
pub fn verify_no_bad_event(q: &Qrac, set: &[SharedShift], eta: f64) -> Result<BadEventReport> {
    check_bits(q.n(), MAX_RAC_BITS, "bad-event check bits")?;
    if set.is_empty() {
        return Err(Error::DomainError("empty shift set".into()));
    }
    bad_events(&SymmetrizedCode::new(q)?, set, eta)
}

#[derive(Clone, Debug)]
pub struct RacCodebook {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub eta: f64,
    pub c_newman: f64,
    pub seed: u64,
    pub attempts: usize,
    pub s_set: Vec<SharedShift>,
    /// Index into `schemes` for each element of `s_set`.
    pub scheme_of: Vec<usize>,
    pub schemes: Vec<CompressionScheme>,
    pub scheme_hashes: Vec<String>,
    pub index_bits_s: u32,
    pub scheme_index_bits: u32,
    pub total_message_bits: u32,
    pub success_floor: f64,
    pub bad_event: Option<BadEventReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RacMessage {
    pub s_index: usize,
    /// Compressed index; `0` is FAIL.
    pub sent_index: u64,
}

fn ceil_log2(k: usize) -> u32 {
    if k <= 1 {
        0
    } else {
        usize::BITS - (k - 1).leading_zeros()
    }
}

fn channel_hash(ch: &ClassicalChannel) -> String {
    let digest = Sha256::digest(ch.to_csv().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Length ceiling `m + ceil(log2 |S|) + ceil(log2 ln(2/eta)) + 2`.
pub fn message_bits_bound(m: usize, set_size: usize, eta: f64) -> f64 {
    m as f64 + ceil_log2(set_size) as f64 + (2.0 / eta).ln().log2().ceil() + 2.0
}

impl RacCodebook {
    /// Builds the codebook for a given shift set without checking bad events.
    pub fn from_set(q: &Qrac, eta: f64, s_set: Vec<SharedShift>) -> Result<Self> {
        check_bits(q.n(), MAX_RAC_BITS, "RAC bits")?;
        let table = SymmetrizedCode::new(q)?;
        Self::assemble(q, &table, eta, s_set)
    }

    fn assemble(q: &Qrac, table: &SymmetrizedCode, eta: f64, s_set: Vec<SharedShift>) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::DomainError(format!("eta = {eta} not in (0, 1)")));
        }
        if s_set.is_empty() {
            return Err(Error::DomainError("empty shift set".into()));
        }
        let mut distinct: BTreeMap<SharedShift, usize> = BTreeMap::new();
        for &s in &s_set {
            let next = distinct.len();
            distinct.entry(s).or_insert(next);
        }
        let mut ordered: Vec<(SharedShift, usize)> = distinct.iter().map(|(s, k)| (*s, *k)).collect();
        ordered.sort_by_key(|(_, k)| *k);
        let schemes = ordered
            .par_iter()
            .map(|(s, _)| build_scheme(&table.channel(*s)?, eta / 2.0))
            .collect::<Result<Vec<_>>>()?;
        let scheme_hashes = schemes.iter().map(|s| channel_hash(&s.channel)).collect();
        let scheme_of = s_set.iter().map(|s| distinct[s]).collect();
        let index_bits_s = ceil_log2(s_set.len());
        let scheme_index_bits = schemes.iter().map(|s| s.index_bits).max().unwrap_or(0);
        let p = q.claimed_p();
        Ok(Self {
            n: q.n(),
            m: q.m(),
            p,
            eta,
            c_newman: f64::NAN,
            seed: 0,
            attempts: 0,
            s_set,
            scheme_of,
            schemes,
            scheme_hashes,
            index_bits_s,
            scheme_index_bits,
            total_message_bits: index_bits_s + scheme_index_bits,
            success_floor: 1.0 - hamming_bound(p, 1) - eta,
            bad_event: None,
        })
    }

    pub fn message_bits_bound(&self) -> f64 {
        message_bits_bound(self.m, self.s_set.len(), self.eta)
    }

    pub fn scheme(&self, s_index: usize) -> &CompressionScheme {
        &self.schemes[self.scheme_of[s_index]]
    }

    /// Alice: choose `s` from `S` with private randomness, then compress the
    /// symmetrized outcome for `x`.
    pub fn encode(&self, x: usize, shared_seed: u64, private_seed: u64) -> Result<RacMessage> {
        if x >= 1 << self.n {
            return Err(Error::IndexOutOfRange { index: x, n: 1 << self.n });
        }
        let mut private = rng::stream(private_seed, &[tag::ALICE, tag::NEWMAN, x as u64]);
        let s_index = private.random_range(0..self.s_set.len());
        let sent_index = self.scheme(s_index).encode(x, shared_seed, s_index as u64)?;
        Ok(RacMessage { s_index, sent_index })
    }

    /// Bob: reconstruct `y` and answer query `i` (one-based).
    pub fn decode(&self, msg: RacMessage, shared_seed: u64, i: usize) -> Result<usize> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        if msg.s_index >= self.s_set.len() {
            return Err(Error::IndexOutOfRange {
                index: msg.s_index,
                n: self.s_set.len(),
            });
        }
        let y = self
            .scheme(msg.s_index)
            .decode(msg.sent_index, shared_seed, msg.s_index as u64)?;
        Ok(bits::bit(y, i, self.n))
    }

    pub fn pack(&self, msg: RacMessage) -> u64 {
        (msg.s_index as u64) << self.scheme_index_bits | msg.sent_index
    }

    pub fn unpack(&self, word: u64) -> RacMessage {
        RacMessage {
            s_index: (word >> self.scheme_index_bits) as usize,
            sent_index: word & ((1u64 << self.scheme_index_bits) - 1),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let schemes: BTreeMap<&str, &CompressionScheme> = self
            .scheme_hashes
            .iter()
            .map(String::as_str)
            .zip(&self.schemes)
            .collect();
        let s_set: Vec<serde_json::Value> = self
            .s_set
            .iter()
            .zip(&self.scheme_of)
            .map(|(s, k)| serde_json::json!({"r": s.r, "d": s.d, "scheme": self.scheme_hashes[*k]}))
            .collect();
        let doc = serde_json::json!({
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "eta": self.eta,
            "c_newman": if self.c_newman.is_finite() { Some(self.c_newman) } else { None },
            "seed": self.seed,
            "attempts": self.attempts,
            "set_size": self.s_set.len(),
            "index_bits_s": self.index_bits_s,
            "scheme_index_bits": self.scheme_index_bits,
            "total_message_bits": self.total_message_bits,
            "message_bits_bound": self.message_bits_bound(),
            "success_floor": self.success_floor,
            "bad_event": self.bad_event,
            "s_set": s_set,
            "schemes": schemes,
        });
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

pub fn build_rac(q: &Qrac, eta: f64, seed: u64, c_newman: f64) -> Result<RacCodebook> {
    check_bits(q.n(), MAX_RAC_BITS, "RAC bits")?;
    let table = SymmetrizedCode::new(q)?;
    let mut best_margin = f64::INFINITY;
    for attempt in 0..MAX_RESAMPLES {
        let set = sample_newman_set(
            q.n(),
            eta,
            rng::derive_seed(seed, &[tag::NEWMAN, attempt as u64]),
            c_newman,
        )?;
        let report = bad_events(&table, &set, eta)?;
        best_margin = best_margin.min(report.worst_margin);
        if report.ok {
            let mut book = RacCodebook::assemble(q, &table, eta, set)?;
            book.c_newman = c_newman;
            book.seed = seed;
            book.attempts = attempt + 1;
            book.bad_event = Some(report);
            return Ok(book);
        }
    }
    Err(Error::DerandomizationFailed {
        attempts: MAX_RESAMPLES,
        worst_margin: best_margin,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RacValidation {
    pub min_success: f64,
    pub floor: f64,
    pub tolerance: f64,
    pub ok: bool,
    pub total_message_bits: u32,
    pub message_bits_bound: f64,
    pub length_ok: bool,
    /// `(x, i, success)`
    pub rows: Vec<(usize, usize, f64)>,
}

impl RacValidation {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,i,success\n");
        for (x, i, s) in &self.rows {
            out.push_str(&format!("{x},{i},{s:.16e}\n"));
        }
        out
    }
}

/// Exact success `avg_s [(1 - f_s(x)) (1 - P_sxi) + f_s(x) / 2]` for every
/// `(x, i)`, where `f_s(x)` is the compressor's failure probability.
pub fn validate_rac(book: &RacCodebook, q: &Qrac) -> Result<RacValidation> {
    let n = q.n();
    check_bits(n, MAX_RAC_BITS, "RAC validation bits")?;
    if n != book.n {
        return Err(Error::DimensionMismatch {
            expected: book.n,
            found: n,
        });
    }
    let table = SymmetrizedCode::new(q)?;
    let fail: Vec<Vec<f64>> = book
        .schemes
        .iter()
        .map(|s| {
            (0..1usize << n)
                .map(|x| exact_output_distribution(s, x).map(|d| d.fail_prob))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let size = book.s_set.len() as f64;
    let rows = (0..1usize << n)
        .into_par_iter()
        .map(|x| {
            (1..=n)
                .map(|i| {
                    let mut acc = 0.0;
                    for (s, &k) in book.s_set.iter().zip(&book.scheme_of) {
                        let f = fail[k][x];
                        acc += (1.0 - f) * (1.0 - table.error(*s, x, i)?) + 0.5 * f;
                    }
                    Ok((x, i, acc / size))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let min_success = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let floor = 1.0 - hamming_bound(q.claimed_p(), 1) - book.eta;
    let bound = book.message_bits_bound();
    Ok(RacValidation {
        min_success,
        floor,
        tolerance: TOL_RAC,
        ok: min_success >= floor - TOL_RAC,
        total_message_bits: book.total_message_bits,
        message_bits_bound: bound,
        length_ok: book.total_message_bits as f64 <= bound,
        rows,
    })
}
