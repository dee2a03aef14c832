//! Batch verification suites and their machine-readable reports.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::compression::{build_scheme, exact_output_distribution, simulate, TOL_CONDITIONAL};
use crate::corpus::{self, CorpusEntry, CorpusSummary};
use crate::decoding::{expected_hamming_exact, hamming_bound, nayak_identification_check, TOL_BOUND};
use crate::error::{Error, Result};
use crate::info::{
    c_max, c_max_random_search, d_max_classical, entropy_chain, cq_imax_within_log_dim, measured_cmax_check,
    qubit_lower_bound, ClassicalChannel, CqState, TOL_INFO,
};
use crate::minimax::{solve_worstcase, GameSolution};
use crate::pgm::{
    build_pgm, check_pgm_lower_bound, helstrom_pmax, pgm_lower_bound, per_bit_success,
    success_prob_full, two_state_pgm_success, PgmMode, PGM_BOUND_TOL,
};
use crate::qrac::{Ensemble, Qrac};
use crate::rac::{
    build_rac, per_bit_success_symmetrized, validate_rac, SymmetrizedCode, all_shifts, TOL_RAC,
};
use crate::rng::{self, tag};

pub const SCHEMA_VERSION: u32 = 1;
/// Tolerance for values the worked example pins exactly.
pub const TOL_EXACT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, limit: f64, tolerance: f64) -> Self {
        Self::new(name, value, limit, tolerance, Relation::Le)
    }

    pub fn ge(name: impl Into<String>, value: f64, limit: f64, tolerance: f64) -> Self {
        Self::new(name, value, limit, tolerance, Relation::Ge)
    }

    pub fn eq(name: impl Into<String>, value: f64, limit: f64, tolerance: f64) -> Self {
        Self::new(name, value, limit, tolerance, Relation::Eq)
    }

    /// A boolean property, recorded as `value == 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::eq(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    pub fn new(name: impl Into<String>, value: f64, limit: f64, tolerance: f64, relation: Relation) -> Self {
        let passed = match relation {
            Relation::Le => value <= limit + tolerance,
            Relation::Ge => value >= limit - tolerance,
            Relation::Eq => (value - limit).abs() <= tolerance,
        };
        Self {
            name: name.into(),
            value,
            limit,
            tolerance,
            relation,
            passed,
        }
    }

    /// A failed computation recorded as a failing check.
    pub fn error(name: impl Into<String>, err: &Error) -> Self {
        let mut c = Self::holds(format!("{}: {err}", name.into()), false);
        c.value = f64::NAN;
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Pgm,
    Hamming,
    Minimax,
    Info,
    Compress,
    Convert,
    Bounds,
    All,
}

impl SuiteKind {
    pub const EACH: [SuiteKind; 7] = [
        SuiteKind::Pgm,
        SuiteKind::Hamming,
        SuiteKind::Minimax,
        SuiteKind::Info,
        SuiteKind::Compress,
        SuiteKind::Convert,
        SuiteKind::Bounds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteKind::Pgm => "pgm",
            SuiteKind::Hamming => "hamming",
            SuiteKind::Minimax => "minimax",
            SuiteKind::Info => "info",
            SuiteKind::Compress => "compress",
            SuiteKind::Convert => "convert",
            SuiteKind::Bounds => "bounds",
            SuiteKind::All => "all",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::EACH
            .iter()
            .chain(std::iter::once(&SuiteKind::All))
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| Error::DomainError(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    /// Largest number of encoded bits in the corpus.
    pub n: usize,
    /// Largest number of qubits for random codes.
    pub m: usize,
    pub eta: f64,
    pub eps: f64,
    pub seed: u64,
    pub c_newman: f64,
    /// Random priors per code.
    pub seeds: usize,
    /// Random codes in the corpus.
    pub codes: usize,
    pub max_iters: usize,
    /// Random two-state ensembles and random channels.
    pub ensembles: usize,
    /// Monte Carlo runs per compression check.
    pub runs: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: 4,
            m: 2,
            eta: 0.2,
            eps: 0.02,
            seed: 0,
            c_newman: crate::rac::DEFAULT_C_NEWMAN,
            seeds: 20,
            codes: 20,
            max_iters: crate::minimax::DEFAULT_MAX_ITERS,
            ensembles: 100,
            runs: 20_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: SuiteKind,
    pub config: SuiteConfig,
    pub corpus: Vec<CorpusSummary>,
    pub checks: Vec<Check>,
    pub total: usize,
    pub failures: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl SuiteReport {
    fn new(suite: SuiteKind, config: &SuiteConfig, corpus: Vec<CorpusSummary>, checks: Vec<Check>) -> Self {
        let failures = checks.iter().filter(|c| !c.passed).count();
        Self {
            schema_version: SCHEMA_VERSION,
            suite,
            config: config.clone(),
            corpus,
            total: checks.len(),
            failures,
            passed: failures == 0,
            checks,
            timestamp: None,
            elapsed_seconds: None,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,limit,tolerance,relation,passed\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&c.name),
                csv_float(c.value),
                csv_float(c.limit),
                csv_float(c.tolerance),
                match c.relation {
                    Relation::Le => "<=",
                    Relation::Ge => ">=",
                    Relation::Eq => "==",
                },
                c.passed
            ));
        }
        out
    }
}

/// RFC 4180 quoting.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// 17 significant digits.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub schema_version: u32,
    pub states: Vec<String>,
    pub p_qrac: f64,
    pub worst_case_p: f64,
    pub p_pgm: f64,
    pub per_bit: Vec<f64>,
    /// `max_y || Q_y - rho_y / 2 ||_F`
    pub pgm_deviation_from_half_states: f64,
    pub expected_dh: f64,
    pub bound: f64,
    pub identification_sum: f64,
    pub identification_limit: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// The two-bits-into-one-qubit example, end to end.
pub fn demo_2to1() -> Result<DemoReport> {
    let q = Qrac::standard_2to1();
    let e = Ensemble::uniform(&q);
    let pgm = build_pgm(&e, PgmMode::Full)?;
    let full = pgm.full_table()?;
    let deviation = full
        .labels()
        .iter()
        .zip(full.elements())
        .map(|(&y, el)| el.sub(&q.state(y).matrix().scale(0.5)).frobenius_norm())
        .fold(0.0, f64::max);
    let p_pgm = success_prob_full(&e, &pgm)?;
    let per_bit = (1..=2)
        .map(|i| per_bit_success(&e, &pgm, i).map(|b| b.probability))
        .collect::<Result<Vec<_>>>()?;
    let hamming = expected_hamming_exact(&e, (&pgm).into())?;
    let nayak = nayak_identification_check(&q, full)?;
    let p_qrac = (std::f64::consts::PI / 8.0).cos().powi(2);
    let worst = q.validate().worst_case_p;
    let mut checks = vec![
        Check::eq("demo/worst_case_p", worst, p_qrac, TOL_EXACT),
        Check::le("demo/pgm_is_half_states", deviation, 0.0, TOL_EXACT),
        Check::eq("demo/p_pgm", p_pgm, 0.5, TOL_EXACT),
        Check::eq("demo/expected_dh", hamming.expected_dh, 0.5, TOL_EXACT),
        Check::eq("demo/bound", hamming.bound, 0.5, TOL_EXACT),
        Check::eq("demo/identification_sum", nayak.lhs, 2.0, TOL_EXACT),
    ];
    for (i, b) in per_bit.iter().enumerate() {
        checks.push(Check::eq(format!("demo/per_bit[{}]", i + 1), *b, 0.75, TOL_EXACT));
    }
    Ok(DemoReport {
        schema_version: SCHEMA_VERSION,
        states: (0..4).map(|x| bits::to_string(x, 2)).collect(),
        p_qrac,
        worst_case_p: worst,
        p_pgm,
        per_bit,
        pgm_deviation_from_half_states: deviation,
        expected_dh: hamming.expected_dh,
        bound: hamming.bound,
        identification_sum: nayak.lhs,
        identification_limit: nayak.rhs,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Standard code, tensor powers `k` with `2k <= n` (`k <= 4`), identity
/// encodings up to `min(n, 6)` bits and `cfg.codes` random codes.
pub fn build_corpus(cfg: &SuiteConfig, max_random_n: usize, max_random_m: usize) -> Result<Vec<CorpusEntry>> {
    let mut entries = vec![corpus::standard()];
    entries.extend(corpus::tensor_powers(2..=(cfg.n / 2).min(4))?);
    entries.extend(corpus::identities(1..=cfg.n.min(6))?);
    entries.extend(corpus::random_codes(
        cfg.codes,
        max_random_n,
        max_random_m,
        rng::derive_seed(cfg.seed, &[tag::CORPUS]),
    )?);
    Ok(entries)
}

fn summaries(entries: &[CorpusEntry]) -> Vec<CorpusSummary> {
    entries.iter().map(CorpusEntry::summary).collect()
}

fn collect<T>(name: &str, r: Result<T>, checks: &mut Vec<Check>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            checks.push(Check::error(name, &e));
            None
        }
    }
}

pub fn pgm_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut checks = demo_2to1()?.checks;

    let ensembles = corpus::two_state_ensembles(cfg.ensembles, rng::derive_seed(cfg.seed, &[tag::ENSEMBLE]))?;
    let slacks = ensembles
        .par_iter()
        .map(|e| {
            let p_max = helstrom_pmax(e.p0, &e.rho0, e.p1, &e.rho1)?;
            let p_pgm = two_state_pgm_success(e.p0, &e.rho0, e.p1, &e.rho1)?;
            Ok((p_pgm - pgm_lower_bound(p_max, 2), check_pgm_lower_bound(p_pgm, p_max, 2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = slacks.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let violations = slacks.iter().filter(|s| !s.1).count();
    checks.push(Check::ge(
        format!("pgm/two_state/min_slack[{}]", slacks.len()),
        worst,
        0.0,
        PGM_BOUND_TOL,
    ));
    checks.push(Check::le("pgm/two_state/violations", violations as f64, 0.0, 0.0));

    for i in 1..=2 {
        let e = corpus::standard_bit_ensemble(i);
        let p_max = helstrom_pmax(e.p0, &e.rho0, e.p1, &e.rho1)?;
        let p_pgm = two_state_pgm_success(e.p0, &e.rho0, e.p1, &e.rho1)?;
        checks.push(Check::eq(format!("pgm/bit_ensemble[{i}]/p_pgm"), p_pgm, 0.75, TOL_EXACT));
        checks.push(Check::eq(
            format!("pgm/bit_ensemble[{i}]/lower_bound"),
            pgm_lower_bound(p_max, 2),
            0.75,
            TOL_EXACT,
        ));
    }

    let entries = build_corpus(cfg, cfg.n.min(6), cfg.m.min(3))?;
    let per_code: Vec<Vec<Check>> = entries
        .par_iter()
        .map(|entry| {
            let mut out = Vec::new();
            let name = format!("pgm/{}", entry.name);
            if entry.code.n() > crate::pgm::MAX_FULL_BITS {
                return out;
            }
            if let Some(pg) = collect(&name, build_pgm(&Ensemble::uniform(&entry.code), PgmMode::Full), &mut out) {
                let ok = pg.full().map(|p| p.validate().is_ok()).unwrap_or(false)
                    && pg.marginals().iter().all(|m| m.validate().is_ok());
                out.push(Check::holds(format!("{name}/valid_povm"), ok));
            }
            out
        })
        .collect();
    checks.extend(per_code.into_iter().flatten());
    Ok(SuiteReport::new(SuiteKind::Pgm, cfg, summaries(&entries), checks))
}

pub fn hamming_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let entries = build_corpus(cfg, cfg.n.min(6), cfg.m.min(3))?;
    let per_code: Vec<Vec<Check>> = entries
        .par_iter()
        .enumerate()
        .map(|(k, entry)| {
            let mut out = Vec::new();
            let name = format!("hamming/{}", entry.name);
            let ensembles = corpus::priors(&entry.code, cfg.seeds, rng::derive_seed(cfg.seed, &[tag::PRIOR, k as u64]));
            let mut worst_excess = f64::NEG_INFINITY;
            let mut violations = 0usize;
            for e in &ensembles {
                let r = build_pgm(e, PgmMode::Marginals)
                    .and_then(|pg| expected_hamming_exact(e, (&pg).into()));
                match r {
                    Ok(r) => {
                        worst_excess = worst_excess.max(r.expected_dh - r.bound);
                        violations += usize::from(!r.satisfied);
                    }
                    Err(err) => out.push(Check::error(&name, &err)),
                }
            }
            out.push(Check::le(
                format!("{name}/max_excess_over_bound[{}]", ensembles.len()),
                worst_excess,
                0.0,
                TOL_BOUND,
            ));
            out.push(Check::le(format!("{name}/violations"), violations as f64, 0.0, 0.0));
            out
        })
        .collect();
    let mut checks: Vec<Check> = per_code.into_iter().flatten().collect();
    let q = Qrac::standard_2to1();
    let e = Ensemble::uniform(&q);
    let r = expected_hamming_exact(&e, (&build_pgm(&e, PgmMode::Marginals)?).into())?;
    checks.push(Check::eq("hamming/standard/expected_dh", r.expected_dh, 0.5, TOL_EXACT));
    checks.push(Check::eq("hamming/standard/bound", r.bound, 0.5, TOL_EXACT));
    Ok(SuiteReport::new(SuiteKind::Hamming, cfg, summaries(&entries), checks))
}

/// Checks for one solver run: the target, the duality gap and the
/// per-iterate Hamming bound.
pub fn minimax_checks(name: &str, code: &Qrac, sol: &GameSolution, eps: f64) -> Vec<Check> {
    let n = code.n() as f64;
    let bound = hamming_bound(code.claimed_p(), code.n());
    vec![
        Check::le(format!("{name}/worst_x_value"), sol.worst_x_value, bound + eps * n, 0.0),
        Check::le(format!("{name}/gap"), sol.gap, crate::minimax::GAP_FRACTION * n, 0.0),
        Check::le(format!("{name}/avg_value_at_final_prior"), sol.avg_value_at_final_prior, bound, TOL_BOUND),
        Check::holds(format!("{name}/valid_povm"), sol.measurement.validate().is_ok()),
    ]
}

pub fn minimax_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut entries = vec![corpus::standard()];
    entries.extend(corpus::tensor_powers(2..=(cfg.n / 2).clamp(1, 3))?);
    entries.extend(corpus::random_codes(
        cfg.codes,
        cfg.n.clamp(2, 5),
        cfg.m.clamp(1, 3),
        rng::derive_seed(cfg.seed, &[tag::CORPUS, 1]),
    )?);
    let per_code: Vec<Vec<Check>> = entries
        .par_iter()
        .map(|entry| {
            let name = format!("minimax/{}", entry.name);
            match solve_worstcase(&entry.code, cfg.eps, cfg.max_iters, cfg.seed) {
                Ok(sol) => minimax_checks(&name, &entry.code, &sol, cfg.eps),
                Err(Error::NotConverged(sol)) => minimax_checks(&name, &entry.code, &sol, cfg.eps),
                Err(e) => vec![Check::error(&name, &e)],
            }
        })
        .collect();
    let checks = per_code.into_iter().flatten().collect();
    Ok(SuiteReport::new(SuiteKind::Minimax, cfg, summaries(&entries), checks))
}

pub fn info_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let worked = [
        ("identity4", ClassicalChannel::identity(4), 2.0),
        ("constant", ClassicalChannel::constant(3, vec![0.2, 0.3, 0.5])?, 0.0),
        ("skewed", ClassicalChannel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]])?, 1.7f64.log2()),
    ];
    for (name, ch, expected) in &worked {
        checks.push(Check::eq(format!("info/c_max/{name}"), c_max(ch).value, *expected, TOL_EXACT));
    }

    let channels: Vec<Vec<Check>> = (0..cfg.ensembles as u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(cfg.seed, &[tag::CHANNEL, k]);
            use rand::Rng;
            let (a, b) = (r.random_range(1..=16), r.random_range(1..=16));
            let ch = ClassicalChannel::random(a, b, rng::derive_seed(cfg.seed, &[tag::CHANNEL, k]));
            let cm = c_max(&ch);
            let searched = c_max_random_search(&ch, 200, k);
            let name = format!("info/c_max/random[{k}:{a}x{b}]");
            vec![
                Check::ge(format!("{name}/search_not_below"), searched, cm.value, TOL_EXACT),
                Check::le(
                    format!("{name}/attained"),
                    crate::info::max_dmax(&ch, &cm.argmin_sigma),
                    cm.value,
                    TOL_EXACT,
                ),
                Check::le(format!("{name}/log_min_alphabet"), cm.value, (a.min(b) as f64).log2(), TOL_EXACT),
            ]
        })
        .collect();
    checks.extend(channels.into_iter().flatten());

    let mut cq_ok = 0usize;
    for k in 0..cfg.ensembles as u64 {
        let cq = CqState::random(2 + (k as usize % 3), 2 << (k % 2), rng::derive_seed(cfg.seed, &[tag::ENSEMBLE, k]))?;
        cq_ok += usize::from(cq_imax_within_log_dim(&cq)?);
    }
    checks.push(Check::eq("info/cq_operator_inequalities", cq_ok as f64, cfg.ensembles as f64, 0.0));

    let same = [0.2, 0.3, 0.5];
    checks.push(Check::eq("info/d_max/equal", d_max_classical(&same, &same), 0.0, 0.0));
    checks.push(Check::eq("info/d_max/ratio_two", d_max_classical(&[0.5, 0.5], &[0.25, 0.75]), 1.0, TOL_EXACT));

    let entries = build_corpus(cfg, cfg.n.min(6), cfg.m.min(3))?;
    let per_code: Vec<Vec<Check>> = entries
        .par_iter()
        .map(|entry| {
            let name = format!("info/{}", entry.name);
            let code = &entry.code;
            let r: Result<Vec<Check>> = (|| {
                let pg = build_pgm(&Ensemble::uniform(code), PgmMode::Full)?;
                let k = 1usize << code.n();
                let cq = CqState::new(vec![1.0 / k as f64; k], code.encoder().to_vec())?;
                let id = ClassicalChannel::identity(k);
                let mc = measured_cmax_check(&cq, pg.full_table()?, &id)?;
                let constant = ClassicalChannel::constant(k, {
                    let mut row = vec![0.0; k];
                    row[0] = 1.0;
                    row
                })?;
                let mc0 = measured_cmax_check(&cq, pg.full_table()?, &constant)?;
                Ok(vec![
                    Check::le(format!("{name}/measured_c_max"), mc.c_max_measured, code.m() as f64, TOL_INFO),
                    Check::holds(format!("{name}/data_processing"), mc.ok && mc0.ok),
                    Check::eq(format!("{name}/constant_post_c_max"), mc0.c_max_processed, 0.0, TOL_INFO),
                ])
            })();
            r.unwrap_or_else(|e| vec![Check::error(&name, &e)])
        })
        .collect();
    checks.extend(per_code.into_iter().flatten());
    Ok(SuiteReport::new(SuiteKind::Info, cfg, summaries(&entries), checks))
}

pub fn compress_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut channels = vec![
        ("identity4".to_string(), ClassicalChannel::identity(4)),
        ("constant".to_string(), ClassicalChannel::constant(3, vec![0.2, 0.3, 0.5])?),
        ("skewed".to_string(), ClassicalChannel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]])?),
    ];
    for k in 0..cfg.ensembles.min(50) as u64 {
        let mut r = rng::stream(cfg.seed, &[tag::CHANNEL, 1, k]);
        use rand::Rng;
        let (a, b) = (r.random_range(1..=8), r.random_range(2..=8));
        channels.push((
            format!("random[{k}:{a}x{b}]"),
            ClassicalChannel::random(a, b, rng::derive_seed(cfg.seed, &[tag::CHANNEL, 1, k])),
        ));
    }
    let etas = [0.1, 0.05];
    let jobs: Vec<(usize, f64)> = (0..channels.len()).flat_map(|c| etas.map(|e| (c, e))).collect();
    let per_job: Vec<Vec<Check>> = jobs
        .par_iter()
        .map(|&(c, eta)| {
            let (label, ch) = &channels[c];
            let name = format!("compress/{label}/eta={eta}");
            let r: Result<Vec<Check>> = (|| {
                let s = build_scheme(ch, eta)?;
                let mut out = Vec::new();
                let mut worst_tv = 0.0_f64;
                let mut worst_cond = 0.0_f64;
                for x in 0..ch.in_size() {
                    worst_tv = worst_tv.max(exact_output_distribution(&s, x)?.tv_error);
                    for (a, e) in s.accepted_distribution(x).iter().zip(ch.row(x)) {
                        worst_cond = worst_cond.max((a - e).abs());
                    }
                }
                out.push(Check::le(format!("{name}/tv_error"), worst_tv, eta, 0.0));
                out.push(Check::le(format!("{name}/accepted_is_row"), worst_cond, 0.0, TOL_CONDITIONAL));
                let length = s.c_max.ceil() + (1.0 / eta).ln().log2().ceil() + 2.0;
                out.push(Check::le(format!("{name}/index_bits"), s.index_bits as f64, length, 0.0));
                // first-draw acceptance is Bernoulli(2^{-a(x)})
                let runs = simulate(&s, 0, cfg.runs, rng::derive_seed(cfg.seed, &[tag::SHARED, c as u64]))?;
                let expected = 1.0 / s.ratio[0];
                let rate = runs.iter().filter(|r| r.sent_index == Some(1)).count() as f64 / cfg.runs as f64;
                let sigma = (expected * (1.0 - expected) / cfg.runs as f64).sqrt();
                out.push(Check::le(format!("{name}/acceptance_rate_deviation"), (rate - expected).abs(), 4.0 * sigma, 1e-12));
                Ok(out)
            })();
            r.unwrap_or_else(|e| vec![Check::error(&name, &e)])
        })
        .collect();
    let checks = per_job.into_iter().flatten().collect();
    Ok(SuiteReport::new(SuiteKind::Compress, cfg, Vec::new(), checks))
}

/// Codes for the conversion suite: identity encodings up to `min(n, 4)` bits,
/// the standard code when `n >= 2`, and its square when `n >= 4`.
pub fn convert_corpus(cfg: &SuiteConfig) -> Result<Vec<CorpusEntry>> {
    let mut entries = corpus::identities(1..=cfg.n.min(4))?;
    if cfg.n >= 2 {
        entries.push(corpus::standard());
    }
    if cfg.n >= 4 {
        entries.extend(corpus::tensor_powers([2])?);
    }
    Ok(entries)
}

pub fn convert_checks(name: &str, code: &Qrac, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let table = SymmetrizedCode::new(code)?;
    let expected = 1.0 - per_bit_success_symmetrized(code)?;
    let shifts = all_shifts(code.n());
    let mut worst_dev = 0.0_f64;
    let mut worst_cmax = f64::NEG_INFINITY;
    for x in 0..1usize << code.n() {
        for i in 1..=code.n() {
            let mut acc = 0.0;
            for &s in &shifts {
                acc += table.error(s, x, i)?;
            }
            worst_dev = worst_dev.max((acc / shifts.len() as f64 - expected).abs());
        }
    }
    out.push(Check::le(format!("{name}/symmetrized_error_constant"), worst_dev, 0.0, TOL_EXACT));
    out.push(Check::ge(
        format!("{name}/symmetrized_success"),
        1.0 - expected,
        1.0 - hamming_bound(code.claimed_p(), 1),
        TOL_BOUND,
    ));
    match build_rac(code, cfg.eta, cfg.seed, cfg.c_newman) {
        Ok(book) => {
            for s in &book.schemes {
                worst_cmax = worst_cmax.max(s.c_max);
            }
            out.push(Check::le(format!("{name}/effective_channel_c_max"), worst_cmax, code.m() as f64, TOL_EXACT));
            let v = validate_rac(&book, code)?;
            out.push(Check::ge(format!("{name}/min_success"), v.min_success, v.floor, TOL_RAC));
            out.push(Check::le(
                format!("{name}/total_message_bits"),
                v.total_message_bits as f64,
                v.message_bits_bound,
                0.0,
            ));
            out.push(Check::eq(
                format!("{name}/message_bits_ledger"),
                book.total_message_bits as f64,
                (book.index_bits_s + book.scheme_index_bits) as f64,
                0.0,
            ));
        }
        Err(e) => out.push(Check::error(name, &e)),
    }
    Ok(out)
}

pub fn convert_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let entries = convert_corpus(cfg)?;
    let per_code: Vec<Vec<Check>> = entries
        .par_iter()
        .map(|entry| {
            let name = format!("convert/{}/eta={}", entry.name, cfg.eta);
            convert_checks(&name, &entry.code, cfg).unwrap_or_else(|e| vec![Check::error(&name, &e)])
        })
        .collect();
    let checks = per_code.into_iter().flatten().collect();
    Ok(SuiteReport::new(SuiteKind::Convert, cfg, summaries(&entries), checks))
}

pub fn bounds_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let entries = build_corpus(cfg, cfg.n.min(6), cfg.m.min(3))?;
    let per_code: Vec<Vec<Check>> = entries
        .par_iter()
        .map(|entry| {
            let name = format!("bounds/{}", entry.name);
            let code = &entry.code;
            let r: Result<Vec<Check>> = (|| {
                let mut out = Vec::new();
                let pg = build_pgm(&Ensemble::uniform(code), PgmMode::Full)?;
                let nayak = nayak_identification_check(code, pg.full_table()?)?;
                out.push(Check::le(format!("{name}/identification_sum"), nayak.lhs, nayak.rhs, nayak.tolerance));
                if code.claimed_p() > 0.5 {
                    let lb = qubit_lower_bound(code.n(), code.claimed_p())?;
                    out.push(Check::ge(format!("{name}/qubits_vs_lower_bound"), code.m() as f64, lb.bound, TOL_BOUND));
                }
                Ok(out)
            })();
            r.unwrap_or_else(|e| vec![Check::error(&name, &e)])
        })
        .collect();
    let mut checks: Vec<Check> = per_code.into_iter().flatten().collect();
    let q = Qrac::standard_2to1();
    let pg = build_pgm(&Ensemble::uniform(&q), PgmMode::Full)?;
    checks.push(Check::eq(
        "bounds/standard/identification_sum",
        nayak_identification_check(&q, pg.full_table()?)?.lhs,
        2.0,
        TOL_EXACT,
    ));
    for (label, code) in [("standard", q.clone()), ("tensor2", q.tensor_power(2)?)] {
        let chain = entropy_chain(&code)?;
        let name = format!("bounds/{label}/entropy_chain");
        checks.push(Check::le(format!("{name}/conditioning"), chain.h_x_given_yd, chain.h_x_given_y, TOL_INFO));
        checks.push(Check::le(
            format!("{name}/distance_register"),
            chain.h_x_given_y,
            chain.h_x_given_yd + ((code.n() + 1) as f64).log2(),
            TOL_INFO,
        ));
        checks.push(Check::holds(format!("{name}/all_steps"), chain.ok()));
    }
    Ok(SuiteReport::new(SuiteKind::Bounds, cfg, summaries(&entries), checks))
}

pub fn run_suite(kind: SuiteKind, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match kind {
        SuiteKind::Pgm => pgm_suite(cfg),
        SuiteKind::Hamming => hamming_suite(cfg),
        SuiteKind::Minimax => minimax_suite(cfg),
        SuiteKind::Info => info_suite(cfg),
        SuiteKind::Compress => compress_suite(cfg),
        SuiteKind::Convert => convert_suite(cfg),
        SuiteKind::Bounds => bounds_suite(cfg),
        SuiteKind::All => {
            let mut checks = Vec::new();
            let mut corpus: Vec<CorpusSummary> = Vec::new();
            for k in SuiteKind::EACH {
                let r = run_suite(k, cfg)?;
                checks.extend(r.checks);
                for c in r.corpus {
                    if !corpus.iter().any(|e| e.name == c.name) {
                        corpus.push(c);
                    }
                }
            }
            Ok(SuiteReport::new(SuiteKind::All, cfg, corpus, checks))
        }
    }
}

/// What a failing run leaves behind for tooling.
#[derive(Clone, Debug, Serialize)]
pub struct FailureManifest {
    pub schema_version: u32,
    pub command: String,
    pub error: Option<String>,
    pub failed_checks: Vec<Check>,
}

impl FailureManifest {
    pub fn from_report(command: &str, report: &SuiteReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            error: None,
            failed_checks: report.failed_checks().cloned().collect(),
        }
    }

    pub fn from_error(command: &str, err: &dyn fmt::Display) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            error: Some(err.to_string()),
            failed_checks: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            n: 2,
            m: 1,
            seeds: 3,
            codes: 3,
            ensembles: 10,
            runs: 2000,
            max_iters: 500,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn demo_values() {
        let d = demo_2to1().unwrap();
        assert!(d.passed, "{:?}", d.checks);
        assert!((d.p_qrac - 0.853_553_39).abs() < 1e-8);
        assert_eq!(d.per_bit.len(), 2);
    }

    #[test]
    fn small_suites_pass() {
        let cfg = small();
        for kind in SuiteKind::EACH {
            let r = run_suite(kind, &cfg).unwrap();
            let failed: Vec<_> = r.failed_checks().collect();
            assert!(r.passed, "{kind}: {failed:?}");
            assert!(r.total > 0);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small();
        let a = run_suite(SuiteKind::Hamming, &cfg).unwrap().to_json().unwrap();
        let b = run_suite(SuiteKind::Hamming, &cfg).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn check_relations() {
        assert!(Check::le("a", 1.0, 1.0, 0.0).passed);
        assert!(!Check::le("a", 1.1, 1.0, 0.05).passed);
        assert!(Check::ge("a", 0.95, 1.0, 0.05).passed);
        assert!(Check::eq("a", 1.0 + 1e-10, 1.0, 1e-9).passed);
        assert!(!Check::holds("a", false).passed);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(csv_float(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn suite_names_roundtrip() {
        for k in SuiteKind::EACH {
            assert_eq!(k.as_str().parse::<SuiteKind>().unwrap(), k);
        }
        assert!("nope".parse::<SuiteKind>().is_err());
    }
}
