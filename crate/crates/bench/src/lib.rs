//! Fixed workloads shared by the benchmarks.

use qraclab::info::{ClassicalChannel, CqState};
use qraclab::{DensityMatrix, Ensemble, Qrac};

/// A random mixed state on `qubits` qubits.
pub fn mixed_state(qubits: usize, seed: u64) -> DensityMatrix {
    CqState::random(1, 1 << qubits, seed)
        .expect("valid size")
        .states()[0]
        .clone()
}

/// Uniform prior over the `k`-fold tensor power of the standard code.
pub fn tensor_ensemble(k: usize) -> Ensemble {
    let q = Qrac::standard_2to1().tensor_power(k).expect("small power");
    Ensemble::uniform(&q)
}

pub fn square_channel(size: usize) -> ClassicalChannel {
    ClassicalChannel::random(size, size, 7)
}
