//! Quantum random access codes: pretty good measurements, expected Hamming
//! distance decoding, worst-case minimax decoders, max-information bounds,
//! one-shot channel compression and the conversion of quantum codes into
//! classical random access codes with shared randomness.

pub mod bits;
pub mod compression;
pub mod corpus;
pub mod decoding;
pub mod error;
pub mod harness;
pub mod info;
pub mod linalg;
pub mod minimax;
pub mod pgm;
pub mod qrac;
pub mod rac;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, Povm, C64};
pub use qrac::{Ensemble, Qrac};
