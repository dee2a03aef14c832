//! Quantum random access codes: an encoder table `x -> rho_x` over all
//! `x in {0,1}^n` plus one two-outcome decoder per bit position.

use std::f64::consts::PI;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::linalg::{tensor, ComplexMatrix, DensityMatrix, Povm, C64, MAX_DIM, TOL_TRACE};
use crate::pgm::helstrom_measurement;
use crate::rng::{self, tag};

/// Largest number of encoded bits.
pub const MAX_BITS: usize = 16;
/// Cap on `2^n * dim^2`, the number of complex entries in an encoder table.
pub const MAX_TABLE_ENTRIES: usize = 1 << 24;
/// Slack used when checking success probabilities against the claimed `p`.
pub const TOL_P: f64 = 1e-9;

/// Rejects `(n, m)` whose encoder table would exceed the crate's caps.
pub fn check_table(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > MAX_BITS {
        return Err(Error::SizeCap {
            what: "encoded bits",
            value: n,
            limit: MAX_BITS,
        });
    }
    if m > 10 {
        return Err(Error::SizeCap {
            what: "matrix dimension",
            value: 1 << m.min(40),
            limit: MAX_DIM,
        });
    }
    let entries = (1usize << n) << (2 * m);
    if entries > MAX_TABLE_ENTRIES {
        return Err(Error::SizeCap {
            what: "encoder table entries",
            value: entries,
            limit: MAX_TABLE_ENTRIES,
        });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Qrac {
    n: usize,
    m: usize,
    encoder: Arc<Vec<DensityMatrix>>,
    decoders: Vec<Povm>,
    claimed_p: f64,
}

impl Qrac {
    pub fn new(
        n: usize,
        m: usize,
        encoder: Vec<DensityMatrix>,
        decoders: Vec<Povm>,
        claimed_p: f64,
    ) -> Result<Self> {
        check_table(n, m)?;
        let dim = 1usize << m;
        if encoder.len() != 1 << n {
            return Err(Error::InvalidQrac(format!(
                "encoder has {} states, expected 2^{n}",
                encoder.len()
            )));
        }
        if let Some(bad) = encoder.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if decoders.len() != n {
            return Err(Error::InvalidQrac(format!(
                "{} decoders for {n} bits",
                decoders.len()
            )));
        }
        for (i, d) in decoders.iter().enumerate() {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d.dim(),
                });
            }
            if d.labels() != [0, 1] {
                return Err(Error::InvalidQrac(format!(
                    "decoder {} must have outcomes [0, 1]",
                    i + 1
                )));
            }
        }
        if !(0.0..=1.0).contains(&claimed_p) {
            return Err(Error::DomainError(format!("claimed_p {claimed_p} not in [0,1]")));
        }
        Ok(Self {
            n,
            m,
            encoder: Arc::new(encoder),
            decoders,
            claimed_p,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    pub fn claimed_p(&self) -> f64 {
        self.claimed_p
    }

    pub fn encoder(&self) -> &[DensityMatrix] {
        &self.encoder
    }

    pub fn state(&self, x: usize) -> &DensityMatrix {
        &self.encoder[x]
    }

    pub fn decoders(&self) -> &[Povm] {
        &self.decoders
    }

    /// Decoder for bit `i` (1-based).
    pub fn decoder(&self, i: usize) -> Result<&Povm> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(&self.decoders[i - 1])
    }

    pub fn with_claimed_p(mut self, p: f64) -> Self {
        self.claimed_p = p;
        self
    }

    /// Same encoder with replaced decoders (used for negative controls).
    pub fn with_decoders(&self, decoders: Vec<Povm>) -> Result<Self> {
        Self::new(
            self.n,
            self.m,
            self.encoder.as_ref().clone(),
            decoders,
            self.claimed_p,
        )
    }

    /// `Tr(M^{(i)}_b rho_x)`.
    pub fn decode_probability(&self, i: usize, x: usize, b: usize) -> f64 {
        let decoder = &self.decoders[i - 1];
        decoder.elements()[b].expectation(self.encoder[x].matrix())
    }

    /// The standard 2-into-1 code: `x = 0b` maps to
    /// `cos(pi/8)|0> + (-1)^b sin(pi/8)|1>` and `x = 1b` to
    /// `(-1)^b sin(pi/8)|0> + cos(pi/8)|1>`; bit 1 is read in the
    /// computational basis and bit 2 in the Hadamard basis.
    pub fn standard_2to1() -> Self {
        let (c, s) = ((PI / 8.0).cos(), (PI / 8.0).sin());
        let re = |v: f64| C64::new(v, 0.0);
        let encoder = (0..4)
            .map(|x| {
                let sign = if x & 1 == 1 { -1.0 } else { 1.0 };
                let psi = if x >> 1 == 0 {
                    [re(c), re(sign * s)]
                } else {
                    [re(sign * s), re(c)]
                };
                DensityMatrix::pure(&psi).expect("unit vector")
            })
            .collect();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let computational = Povm::from_basis(&[vec![re(1.0), re(0.0)], vec![re(0.0), re(1.0)]])
            .expect("basis");
        let hadamard =
            Povm::from_basis(&[vec![re(h), re(h)], vec![re(h), re(-h)]]).expect("basis");
        Self::new(2, 1, encoder, vec![computational, hadamard], c * c).expect("valid code")
    }

    /// `rho_x = |x><x|` on `n` qubits, read out in the computational basis.
    pub fn identity_encoding(n: usize) -> Result<Self> {
        if n == 0 || n > 10 {
            return Err(Error::SizeCap {
                what: "identity encoding bits",
                value: n,
                limit: 10,
            });
        }
        check_table(n, n)?;
        let dim = 1 << n;
        let encoder = (0..dim)
            .map(|x| DensityMatrix::basis_state(dim, x))
            .collect::<Result<Vec<_>>>()?;
        let decoders = (1..=n)
            .map(|i| {
                let diag = |b: usize| -> Vec<f64> {
                    (0..dim)
                        .map(|y| if bits::bit(y, i, n) == b { 1.0 } else { 0.0 })
                        .collect()
                };
                Povm::two_outcome(
                    ComplexMatrix::from_real_diagonal(&diag(0)),
                    ComplexMatrix::from_real_diagonal(&diag(1)),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, n, encoder, decoders, 1.0)
    }

    /// `k`-fold tensor power: `x` is split into `k` blocks of `base.n` bits,
    /// the first block being the most significant, and each block is encoded
    /// independently by `base`.
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::DomainError("tensor power k must be >= 1".into()));
        }
        let n = k * self.n;
        let m = k * self.m;
        check_table(n, m)?;
        if k == 1 {
            return Ok(self.clone());
        }
        let block_mask = (1usize << self.n) - 1;
        let encoder = (0..1usize << n)
            .map(|x| {
                let mut acc = self.encoder[x >> (self.n * (k - 1))].matrix().clone();
                for b in 1..k {
                    let block = (x >> (self.n * (k - 1 - b))) & block_mask;
                    acc = tensor(&acc, self.encoder[block].matrix());
                }
                DensityMatrix::from_matrix_unchecked(acc)
            })
            .collect();
        let base_dim = self.dim();
        let decoders = (1..=n)
            .map(|i| {
                let block = (i - 1) / self.n;
                let local = &self.decoders[(i - 1) % self.n];
                let before = ComplexMatrix::identity(base_dim.pow(block as u32));
                let after = ComplexMatrix::identity(base_dim.pow((k - 1 - block) as u32));
                let lift = |e: &ComplexMatrix| tensor(&tensor(&before, e), &after);
                Povm::two_outcome(lift(&local.elements()[0]), lift(&local.elements()[1]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, m, encoder, decoders, self.claimed_p)
    }

    /// Random pure-state encoder (normalized complex Gaussian vectors) with
    /// per-bit Helstrom decoders for the uniform-prior bit ensembles. The
    /// claimed `p` is the measured worst-case success, which may be <= 1/2.
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > 12 {
            return Err(Error::SizeCap {
                what: "random code bits",
                value: n,
                limit: 12,
            });
        }
        if m == 0 || m > 6 {
            return Err(Error::SizeCap {
                what: "random code qubits",
                value: m,
                limit: 6,
            });
        }
        let dim = 1 << m;
        let mut rng = rng::stream(seed, &[tag::ENCODER, n as u64, m as u64]);
        let encoder = (0..1usize << n)
            .map(|_| {
                let psi: Vec<C64> = (0..dim)
                    .map(|_| {
                        C64::new(
                            StandardNormal.sample(&mut rng),
                            StandardNormal.sample(&mut rng),
                        )
                    })
                    .collect();
                DensityMatrix::pure(&psi)
            })
            .collect::<Result<Vec<_>>>()?;
        let half = (1usize << n) as f64 / 2.0;
        let decoders = (1..=n)
            .map(|i| {
                let mut rho = [ComplexMatrix::zeros(dim), ComplexMatrix::zeros(dim)];
                for (x, state) in encoder.iter().enumerate() {
                    rho[bits::bit(x, i, n)].add_scaled(state.matrix(), 1.0 / half);
                }
                let [r0, r1] = rho.map(DensityMatrix::from_matrix_unchecked);
                helstrom_measurement(0.5, &r0, 0.5, &r1)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut code = Self::new(n, m, encoder, decoders, 0.0)?;
        code.claimed_p = code.validate().worst_case_p.clamp(0.0, 1.0);
        Ok(code)
    }

    /// Checks the defining inequality `Tr(M^{(i)}_{x_i} rho_x) >= p` for
    /// every `(i, x)`.
    pub fn validate(&self) -> ValidationReport {
        let mut worst = f64::INFINITY;
        let mut offending = Vec::new();
        for x in 0..1usize << self.n {
            for i in 1..=self.n {
                let p = self.decode_probability(i, x, bits::bit(x, i, self.n));
                worst = worst.min(p);
                if p < self.claimed_p - TOL_P {
                    offending.push((i, x));
                }
            }
        }
        ValidationReport {
            worst_case_p: worst,
            claimed_p: self.claimed_p,
            offending,
            degenerate: worst <= 0.5,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&QracDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: QracDocument = serde_json::from_str(s)?;
        doc.try_into()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub worst_case_p: f64,
    pub claimed_p: f64,
    /// `(i, x)` pairs whose success falls below `claimed_p - TOL_P`.
    pub offending: Vec<(usize, usize)>,
    /// Worst-case success is no better than guessing.
    pub degenerate: bool,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.offending.is_empty()
    }
}

/// A prior over `{0,1}^n` attached to a code's encoder table.
#[derive(Clone, Debug)]
pub struct Ensemble {
    prior: Vec<f64>,
    code: Qrac,
}

impl Ensemble {
    pub fn new(code: &Qrac, prior: Vec<f64>) -> Result<Self> {
        if prior.len() != 1 << code.n() {
            return Err(Error::DimensionMismatch {
                expected: 1 << code.n(),
                found: prior.len(),
            });
        }
        if prior.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::DomainError("prior has negative entries".into()));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::DomainError(format!("prior sums to {total}")));
        }
        Ok(Self {
            prior,
            code: code.clone(),
        })
    }

    pub fn uniform(code: &Qrac) -> Self {
        let k = 1usize << code.n();
        Self {
            prior: vec![1.0 / k as f64; k],
            code: code.clone(),
        }
    }

    /// Draws a prior from the flat Dirichlet distribution; when `sparse` is
    /// set, roughly half of the strings get probability zero.
    pub fn random(code: &Qrac, seed: u64, sparse: bool) -> Self {
        use rand::Rng;
        let k = 1usize << code.n();
        let mut rng = rng::stream(seed, &[tag::PRIOR, code.n() as u64]);
        let mut w: Vec<f64> = (0..k)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        if sparse && k > 1 {
            let keep = rng.random_range(0..k);
            for (x, v) in w.iter_mut().enumerate() {
                if x != keep && rng.random_bool(0.5) {
                    *v = 0.0;
                }
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        Self {
            prior: w,
            code: code.clone(),
        }
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn code(&self) -> &Qrac {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    /// `sum_x P_x rho_x`
    pub fn average_state(&self) -> DensityMatrix {
        let mut acc = ComplexMatrix::zeros(self.code.dim());
        for (p, s) in self.prior.iter().zip(self.code.encoder()) {
            if *p != 0.0 {
                acc.add_scaled(s.matrix(), *p);
            }
        }
        debug_assert!((acc.trace().re - 1.0).abs() < TOL_TRACE);
        DensityMatrix::from_matrix_unchecked(acc.hermitian_part())
    }
}

type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn matrix_to_json(a: &ComplexMatrix) -> JsonMatrix {
    (0..a.dim())
        .map(|r| (0..a.dim()).map(|c| [a[(r, c)].re, a[(r, c)].im]).collect())
        .collect()
}

fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidQrac("matrix rows must be square".into()));
    }
    ComplexMatrix::from_row_major(
        dim,
        rows.iter()
            .flatten()
            .map(|&[re, im]| C64::new(re, im))
            .collect(),
    )
}

/// JSON layout: `{n, m, claimed_p, encoder, decoders}` with matrices as nested
/// row arrays of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QracDocument {
    n: usize,
    m: usize,
    claimed_p: f64,
    encoder: Vec<JsonMatrix>,
    decoders: Vec<Vec<JsonMatrix>>,
}

impl From<&Qrac> for QracDocument {
    fn from(q: &Qrac) -> Self {
        Self {
            n: q.n,
            m: q.m,
            claimed_p: q.claimed_p,
            encoder: q.encoder.iter().map(|s| matrix_to_json(s.matrix())).collect(),
            decoders: q
                .decoders
                .iter()
                .map(|d| d.elements().iter().map(matrix_to_json).collect())
                .collect(),
        }
    }
}

impl TryFrom<QracDocument> for Qrac {
    type Error = Error;

    fn try_from(doc: QracDocument) -> Result<Self> {
        let encoder = doc
            .encoder
            .iter()
            .map(|rows| DensityMatrix::new(matrix_from_json(rows)?))
            .collect::<Result<Vec<_>>>()?;
        let decoders = doc
            .decoders
            .iter()
            .map(|elements| {
                if elements.len() != 2 {
                    return Err(Error::InvalidQrac("decoders need two elements".into()));
                }
                Povm::two_outcome(
                    matrix_from_json(&elements[0])?,
                    matrix_from_json(&elements[1])?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Qrac::new(doc.n, doc.m, encoder, decoders, doc.claimed_p)
    }
}
