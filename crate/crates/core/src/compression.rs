//! One-way rejection-sampling compression of a classical channel's output.
//!
//! Alice and Bob share an iid stream `z_1, z_2, ...` drawn from a reference
//! distribution `Z`. Alice accepts `z_i` with probability
//! `E(x)(z_i) / (2^{a(x)} Z(z_i))` and sends the first accepted index, or the
//! FAIL message `0` if none of the first `n_cap` is accepted. Bob outputs the
//! indexed sample, or a uniform symbol from private randomness on FAIL.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{c_max, ClassicalChannel};
use crate::rng::{self, tag, StreamRng};

/// Tolerance for the per-cell check that accepted samples are distributed as
/// `E(x)`.
pub const TOL_CONDITIONAL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompressionScheme {
    pub channel: ClassicalChannel,
    pub z: Vec<f64>,
    /// `a(x) = D_max(E(x) || Z)` in bits.
    pub a: Vec<f64>,
    /// `2^{a(x)}`, kept separately so acceptance uses the exact ratio.
    pub ratio: Vec<f64>,
    pub c_max: f64,
    pub eta: f64,
    pub n_cap: u64,
    pub index_bits: u32,
}

pub fn build_scheme(channel: &ClassicalChannel, eta: f64) -> Result<CompressionScheme> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::DomainError(format!("eta = {eta} not in (0, 1)")));
    }
    let cm = c_max(channel);
    let z = cm.argmin_sigma;
    let ratio: Vec<f64> = channel
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&z)
                .filter(|(e, _)| **e > 0.0)
                .map(|(e, zy)| e / zy)
                .fold(1.0_f64, f64::max)
        })
        .collect();
    let a = ratio.iter().map(|r| r.log2()).collect();
    let n_cap = ((cm.scale * (1.0 / eta).ln()).ceil() as u64).max(1);
    Ok(CompressionScheme {
        channel: channel.clone(),
        z,
        a,
        ratio,
        c_max: cm.value,
        eta,
        n_cap,
        index_bits: u64::BITS - n_cap.leading_zeros(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub replicate: u64,
    pub x: usize,
    /// `None` is the FAIL message.
    pub sent_index: Option<u64>,
    pub output_y: usize,
    pub message_bits: u32,
    pub shared_seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputDistribution {
    pub dist: Vec<f64>,
    pub tv_error: f64,
    pub fail_prob: f64,
}

impl CompressionScheme {
    pub fn in_size(&self) -> usize {
        self.channel.in_size()
    }

    pub fn out_size(&self) -> usize {
        self.channel.out_size()
    }

    fn check_input(&self, x: usize) -> Result<()> {
        if x >= self.in_size() {
            return Err(Error::IndexOutOfRange {
                index: x,
                n: self.in_size(),
            });
        }
        Ok(())
    }

    fn shared_stream(&self, shared_seed: u64, replicate: u64) -> (StreamRng, WeightedIndex<f64>) {
        let sampler = WeightedIndex::new(&self.z).expect("reference distribution has mass");
        (rng::stream(shared_seed, &[tag::SHARED, replicate]), sampler)
    }

    /// Probability that a single shared sample `y` is accepted on input `x`.
    pub fn acceptance(&self, x: usize, y: usize) -> f64 {
        let e = self.channel.row(x)[y];
        if e == 0.0 {
            0.0
        } else {
            (e / (self.ratio[x] * self.z[y])).min(1.0)
        }
    }

    /// Alice's message: the first accepted index in `1..=n_cap`, or `0`.
    pub fn encode(&self, x: usize, shared_seed: u64, replicate: u64) -> Result<u64> {
        self.check_input(x)?;
        let (mut shared, sampler) = self.shared_stream(shared_seed, replicate);
        let mut coins = rng::stream(shared_seed, &[tag::ALICE, x as u64, replicate]);
        for i in 1..=self.n_cap {
            let y = sampler.sample(&mut shared);
            if coins.random::<f64>() < self.acceptance(x, y) {
                return Ok(i);
            }
        }
        Ok(0)
    }

    /// Bob's output for a received message.
    pub fn decode(&self, message: u64, shared_seed: u64, replicate: u64) -> Result<usize> {
        if message > self.n_cap {
            return Err(Error::IndexOutOfRange {
                index: message as usize,
                n: self.n_cap as usize,
            });
        }
        if message == 0 {
            let mut private = rng::stream(shared_seed, &[tag::BOB, replicate]);
            return Ok(private.random_range(0..self.out_size()));
        }
        let (mut shared, sampler) = self.shared_stream(shared_seed, replicate);
        let mut y = 0;
        for _ in 0..message {
            y = sampler.sample(&mut shared);
        }
        Ok(y)
    }

    /// Conditional distribution of an accepted sample, `Z(y) acc(y) / sum`.
    pub fn accepted_distribution(&self, x: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..self.out_size())
            .map(|y| self.z[y] * self.acceptance(x, y))
            .collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|v| v / t).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn run_protocol(
    scheme: &CompressionScheme,
    x: usize,
    shared_seed: u64,
    replicate: u64,
) -> Result<ProtocolRun> {
    let message = scheme.encode(x, shared_seed, replicate)?;
    let output_y = scheme.decode(message, shared_seed, replicate)?;
    Ok(ProtocolRun {
        replicate,
        x,
        sent_index: (message != 0).then_some(message),
        output_y,
        message_bits: scheme.index_bits,
        shared_seed,
    })
}

/// Runs replicates `0..runs` in parallel; the result is in replicate order.
pub fn simulate(
    scheme: &CompressionScheme,
    x: usize,
    runs: u64,
    shared_seed: u64,
) -> Result<Vec<ProtocolRun>> {
    (0..runs)
        .into_par_iter()
        .map(|r| run_protocol(scheme, x, shared_seed, r))
        .collect()
}

pub fn exact_output_distribution(scheme: &CompressionScheme, x: usize) -> Result<OutputDistribution> {
    scheme.check_input(x)?;
    let fail_prob = (1.0 - 1.0 / scheme.ratio[x]).powf(scheme.n_cap as f64);
    let k = scheme.out_size() as f64;
    let row = scheme.channel.row(x);
    let dist = row
        .iter()
        .map(|e| (1.0 - fail_prob) * e + fail_prob / k)
        .collect();
    let tv_to_uniform = 0.5 * row.iter().map(|e| (e - 1.0 / k).abs()).sum::<f64>();
    Ok(OutputDistribution {
        dist,
        tv_error: fail_prob * tv_to_uniform,
        fail_prob,
    })
}

pub fn trace_csv(runs: &[ProtocolRun]) -> String {
    let mut out = String::from("replicate,x,sent_index,output_y\n");
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.replicate,
            r.x,
            r.sent_index.unwrap_or(0),
            r.output_y
        ));
    }
    out
}
