//! Acceptance criteria, one PASS/FAIL line each. Every quantity reported by
//! the library is recomputed here through an independent route: a Jacobi
//! eigensolver on the real embedding of Hermitian matrices, an LP solver for
//! the max channel capacity, and direct geometric-series sums for the
//! compression protocol.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use qraclab::bits::{bit, hamming};
use qraclab::compression::{build_scheme, simulate, CompressionScheme};
use qraclab::corpus::{self, CorpusEntry};
use qraclab::decoding::{expected_hamming_exact, hamming_bound, nayak_identification_check, Measurement};
use qraclab::harness::{demo_2to1, run_suite, SuiteConfig, SuiteKind};
use qraclab::info::{c_max, c_max_random_search, entropy_chain, max_dmax, ClassicalChannel};
use qraclab::minimax::{solve_worstcase, DEFAULT_MAX_ITERS};
use qraclab::pgm::{build_pgm, helstrom_pmax, two_state_pgm_success, PgmMode};
use qraclab::rac::{build_rac, effective_channel, validate_rac, DEFAULT_C_NEWMAN};
use qraclab::rng;
use qraclab::{ComplexMatrix, DensityMatrix, Ensemble, Povm, Qrac};
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

// ---------------------------------------------------------------- oracles

type Real = Vec<Vec<f64>>;

/// `[[Re A, -Im A], [Im A, Re A]]`, symmetric when `A` is Hermitian; every
/// eigenvalue of `A` appears twice.
fn embed(a: &ComplexMatrix) -> Real {
    let d = a.dim();
    let mut r = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            let z = a[(i, j)];
            r[i][j] = z.re;
            r[i + d][j + d] = z.re;
            r[i][j + d] = -z.im;
            r[i + d][j] = z.im;
        }
    }
    r
}

fn jacobi(mut a: Real) -> (Vec<f64>, Real) {
    let n = a.len();
    let mut v: Real = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(1e-300);
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[p][q] * a[p][q]).sum();
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

fn spectral_apply(a: &Real, f: impl Fn(f64) -> f64) -> Real {
    let n = a.len();
    let (vals, v) = jacobi(a.clone());
    let fv: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| v[i][k] * fv[k] * v[j][k]).sum()).collect())
        .collect()
}

fn real_mul(a: &Real, b: &Real) -> Real {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn real_trace(a: &Real) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// `Re Tr(AB)` summed entry by entry.
fn tr(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

fn oracle_helstrom(p0: f64, r0: &DensityMatrix, p1: f64, r1: &DensityMatrix) -> f64 {
    let gamma = r0.matrix().scale(p0).sub(&r1.matrix().scale(p1));
    let (vals, _) = jacobi(embed(&gamma));
    0.5 * (1.0 + 0.5 * vals.iter().map(|l| l.abs()).sum::<f64>())
}

fn oracle_pgm_success(p0: f64, r0: &DensityMatrix, p1: f64, r1: &DensityMatrix) -> f64 {
    let avg = r0.matrix().scale(p0).add(&r1.matrix().scale(p1));
    let s = spectral_apply(&embed(&avg), |l| if l > 1e-12 { 1.0 / l.sqrt() } else { 0.0 });
    [(p0, r0), (p1, r1)]
        .iter()
        .map(|(p, r)| {
            let er = embed(r.matrix());
            let m = real_mul(&real_mul(&s, &er), &real_mul(&s, &er));
            p * p * real_trace(&m) / 2.0
        })
        .sum()
}

fn oracle_binary_entropy(q: f64) -> f64 {
    [q, 1.0 - q].iter().filter(|&&v| v > 0.0).map(|v| -v * v.log2()).sum()
}

fn oracle_entropy(dist: impl IntoIterator<Item = f64>) -> f64 {
    dist.into_iter().filter(|&v| v > 0.0).map(|v| -v * v.log2()).sum()
}

/// Smallest `p` over `(x, i)` of `Tr(M^(i)_{x_i} rho_x)`.
fn oracle_worst_p(q: &Qrac) -> f64 {
    let n = q.n();
    let mut worst = f64::INFINITY;
    for x in 0..1usize << n {
        for i in 1..=n {
            let m = q.decoder(i).unwrap().element(bit(x, i, n)).unwrap();
            worst = worst.min(tr(m, q.state(x).matrix()));
        }
    }
    worst
}

/// `E[d_H]` for each `x`, read straight off a full-table measurement.
fn oracle_per_x_hamming(q: &Qrac, povm: &Povm) -> Vec<f64> {
    (0..1usize << q.n())
        .map(|x| {
            povm.labels()
                .iter()
                .zip(povm.elements())
                .map(|(&y, el)| tr(el, q.state(x).matrix()) * hamming(x, y) as f64)
                .sum()
        })
        .collect()
}

/// `log2` of the minimum of `sum_y w_y` subject to `w_y >= E(x)(y)` for every
/// `x` in the support; `w = t sigma` linearizes `E(x) <= t sigma`.
fn oracle_lp_imax(ch: &ClassicalChannel, support: &[usize]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..ch.out_size()).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for &x in support {
        for (y, &e) in ch.row(x).iter().enumerate() {
            lp.add_constraint(&[(w[y], 1.0)], ComparisonOp::Ge, e);
        }
    }
    lp.solve().expect("feasible LP").objective().log2()
}

/// Output distribution of the rejection protocol, summed as a truncated
/// geometric series from the channel alone.
struct ProtocolOracle {
    z: Vec<f64>,
    ratio: Vec<f64>,
    n_cap: u64,
    dist: Vec<Vec<f64>>,
    first_accept: Vec<f64>,
}

fn protocol_oracle(ch: &ClassicalChannel, eta: f64) -> ProtocolOracle {
    let k = ch.out_size();
    let colmax: Vec<f64> = (0..k).map(|y| ch.rows().iter().map(|r| r[y]).fold(0.0, f64::max)).collect();
    let scale: f64 = colmax.iter().sum();
    let z: Vec<f64> = colmax.iter().map(|c| c / scale).collect();
    let n_cap = ((scale * (1.0 / eta).ln()).ceil() as u64).max(1);
    let mut ratio = Vec::new();
    let mut dist = Vec::new();
    let mut first_accept = Vec::new();
    for row in ch.rows() {
        let r = row.iter().zip(&z).filter(|(e, _)| **e > 0.0).map(|(e, zy)| e / zy).fold(1.0, f64::max);
        let per_draw: Vec<f64> = row.iter().zip(&z).map(|(e, zy)| zy * (e / (r * zy)).min(1.0)).collect();
        let q: f64 = per_draw.iter().sum();
        let mut out = vec![0.0; k];
        let mut survive = 1.0;
        for _ in 0..n_cap {
            for (o, w) in out.iter_mut().zip(&per_draw) {
                *o += survive * w;
            }
            survive *= 1.0 - q;
        }
        for o in &mut out {
            *o += survive / k as f64;
        }
        ratio.push(r);
        dist.push(out);
        first_accept.push(q);
    }
    ProtocolOracle {
        z,
        ratio,
        n_cap,
        dist,
        first_accept,
    }
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum::<f64>()
}

// ------------------------------------------------------------------ corpus

fn hamming_corpus() -> Vec<CorpusEntry> {
    let mut c = vec![corpus::standard()];
    c.extend(corpus::tensor_powers([2, 3, 4]).unwrap());
    c.extend(corpus::random_codes(200, 6, 3, 1).unwrap());
    c
}

fn full_corpus() -> Vec<CorpusEntry> {
    let mut c = hamming_corpus();
    c.extend(corpus::identities(1..=6).unwrap());
    c
}

fn random_channel(k: u64, max_in: usize, max_out: usize) -> ClassicalChannel {
    let mut r = rng::stream(2024, &[rng::tag::CHANNEL, k]);
    let (ins, outs) = (r.random_range(1..=max_in), r.random_range(1..=max_out));
    let dense = ClassicalChannel::random(ins, outs, rng::derive_seed(2024, &[rng::tag::CHANNEL, k]));
    if k % 3 != 2 {
        return dense;
    }
    let table = dense
        .rows()
        .iter()
        .map(|row| {
            let keep = r.random_range(0..outs);
            let mut row: Vec<f64> =
                row.iter().enumerate().map(|(y, &e)| if y == keep || r.random_bool(0.5) { e } else { 0.0 }).collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|e| *e /= s);
            row
        })
        .collect();
    ClassicalChannel::new(table).unwrap()
}

fn worked_channels() -> Vec<(&'static str, ClassicalChannel, f64)> {
    vec![
        ("identity4", ClassicalChannel::identity(4), 2.0),
        ("constant", ClassicalChannel::constant(3, vec![0.2, 0.3, 0.5]).unwrap(), 0.0),
        ("skewed", ClassicalChannel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap(), 1.7f64.log2()),
    ]
}

// ---------------------------------------------------------------- criteria

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_worked_example() -> Outcome {
    let d = demo_2to1().map_err(|e| e.to_string())?;
    let p = (std::f64::consts::PI / 8.0).cos().powi(2);
    ensure((d.p_qrac - p).abs() <= 1e-9, || format!("p = {}", d.p_qrac))?;
    ensure((d.p_qrac - 0.853_553_39).abs() <= 5e-9, || format!("p = {} vs 0.85355339", d.p_qrac))?;
    ensure((d.p_pgm - 0.5).abs() <= 1e-9, || format!("p_pgm = {}", d.p_pgm))?;
    for b in &d.per_bit {
        ensure((b - 0.75).abs() <= 1e-9, || format!("per-bit success {b}"))?;
    }
    let q = Qrac::standard_2to1();
    ensure((oracle_worst_p(&q) - p).abs() <= 1e-9, || "oracle p differs".into())?;
    Ok(format!("p = {:.10}, p_pgm = {:.10}, per-bit = {:?}", d.p_qrac, d.p_pgm, d.per_bit))
}

fn c2_pgm_inequality() -> Outcome {
    let ens = corpus::two_state_ensembles(500, 17).map_err(|e| e.to_string())?;
    let worst = ens
        .par_iter()
        .enumerate()
        .map(|(k, e)| -> Result<f64, String> {
            let pmax = helstrom_pmax(e.p0, &e.rho0, e.p1, &e.rho1).map_err(|e| e.to_string())?;
            let ppgm = two_state_pgm_success(e.p0, &e.rho0, e.p1, &e.rho1).map_err(|e| e.to_string())?;
            let o_max = oracle_helstrom(e.p0, &e.rho0, e.p1, &e.rho1);
            let o_pgm = oracle_pgm_success(e.p0, &e.rho0, e.p1, &e.rho1);
            ensure((pmax - o_max).abs() <= 1e-9, || format!("#{k}: p_max {pmax} vs oracle {o_max}"))?;
            ensure((ppgm - o_pgm).abs() <= 1e-9, || format!("#{k}: p_pgm {ppgm} vs oracle {o_pgm}"))?;
            let margin = o_pgm - (o_max * o_max + (1.0 - o_max).powi(2));
            ensure(margin >= -1e-8, || format!("#{k}: violated by {margin}"))?;
            Ok(margin)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    for i in 1..=2 {
        let e = corpus::standard_bit_ensemble(i);
        let ppgm = oracle_pgm_success(e.p0, &e.rho0, e.p1, &e.rho1);
        let pmax = oracle_helstrom(e.p0, &e.rho0, e.p1, &e.rho1);
        let lower = pmax * pmax + (1.0 - pmax).powi(2);
        ensure((ppgm - 0.75).abs() <= 1e-9 && (lower - 0.75).abs() <= 1e-9, || {
            format!("bit {i}: p_pgm {ppgm}, bound {lower}")
        })?;
    }
    Ok(format!("500 ensembles, smallest margin {worst:.3e}; bit ensembles at 3/4"))
}

fn c3_hamming_bound() -> Outcome {
    let codes = hamming_corpus();
    ensure(codes.len() == 204, || format!("corpus has {} codes", codes.len()))?;
    let results = codes
        .par_iter()
        .map(|entry| -> Result<(usize, f64), String> {
            let q = &entry.code;
            let p = q.claimed_p();
            ensure(p > 0.55 && p <= oracle_worst_p(q) + 1e-9, || format!("{}: claimed p {p}", entry.name))?;
            let bound = 2.0 * p * (1.0 - p) * q.n() as f64;
            let mut worst = f64::NEG_INFINITY;
            for e in corpus::priors(q, 20, 9) {
                let pg = build_pgm(&e, PgmMode::Full).map_err(|e| e.to_string())?;
                let rep = expected_hamming_exact(&e, Measurement::from(&pg)).map_err(|e| e.to_string())?;
                let per_x = oracle_per_x_hamming(q, pg.full_table().map_err(|e| e.to_string())?);
                let oracle: f64 = e.prior().iter().zip(&per_x).map(|(w, v)| w * v).sum();
                ensure((oracle - rep.expected_dh).abs() <= 1e-9, || {
                    format!("{}: {} vs full-table {oracle}", entry.name, rep.expected_dh)
                })?;
                ensure(oracle <= bound + 1e-8, || format!("{}: E[d_H] {oracle} > {bound}", entry.name))?;
                worst = worst.max(oracle - bound);
            }
            Ok((21, worst))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let q = Qrac::standard_2to1();
    let pg = build_pgm(&Ensemble::uniform(&q), PgmMode::Full).unwrap();
    let dh: f64 = oracle_per_x_hamming(&q, pg.full_table().unwrap()).iter().sum::<f64>() / 4.0;
    let bound = hamming_bound(q.claimed_p(), 2);
    ensure((dh - 0.5).abs() <= 1e-9 && (bound - 0.5).abs() <= 1e-9, || format!("standard: {dh} vs {bound}"))?;
    let pairs: usize = results.iter().map(|r| r.0).sum();
    let slack = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("{} codes, {pairs} priors, zero violations, largest E[d_H] - bound = {slack:.3e}", codes.len()))
}

fn c4_worst_case_solver() -> Outcome {
    let mut codes = vec![corpus::standard()];
    codes.extend(corpus::tensor_powers([2, 3]).unwrap());
    codes.extend(corpus::random_codes(50, 5, 3, 2).unwrap());
    ensure(codes.len() == 53, || format!("corpus has {} codes", codes.len()))?;
    let eps = 0.02;
    let rows = codes
        .par_iter()
        .map(|entry| -> Result<f64, String> {
            let q = &entry.code;
            let n = q.n() as f64;
            let sol = solve_worstcase(q, eps, DEFAULT_MAX_ITERS, 3).map_err(|e| e.to_string())?;
            let per_x = oracle_per_x_hamming(q, &sol.measurement);
            let worst = per_x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ensure((worst - sol.worst_x_value).abs() <= 1e-9, || {
                format!("{}: reported {} vs recomputed {worst}", entry.name, sol.worst_x_value)
            })?;
            let mut total = ComplexMatrix::zeros(q.dim());
            for el in sol.measurement.elements() {
                total = total.add(el);
            }
            ensure(total.max_abs_diff(&ComplexMatrix::identity(q.dim())) <= 1e-9, || {
                format!("{}: measurement does not sum to identity", entry.name)
            })?;
            let limit = hamming_bound(q.claimed_p(), q.n()) + eps * n;
            ensure(worst <= limit, || format!("{}: worst {worst} > {limit}", entry.name))?;
            ensure(sol.gap <= 0.05 * n, || format!("{}: gap {} > {}", entry.name, sol.gap, 0.05 * n))?;
            Ok(sol.gap / n)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_gap = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("{} codes certified, largest gap/n = {max_gap:.4}", codes.len()))
}

fn c5_identification_bound() -> Outcome {
    let mut codes = hamming_corpus();
    codes.extend(corpus::identities(1..=4).unwrap());
    let pairs = codes
        .par_iter()
        .map(|entry| -> Result<usize, String> {
            let q = &entry.code;
            let mut count = 0;
            for e in corpus::priors(q, 3, 5) {
                let pg = build_pgm(&e, PgmMode::Full).map_err(|e| e.to_string())?;
                let full = pg.full_table().map_err(|e| e.to_string())?;
                let lhs: f64 = (0..1usize << q.n()).map(|x| tr(full.element(x).unwrap(), q.state(x).matrix())).sum();
                let lib = nayak_identification_check(q, full).map_err(|e| e.to_string())?;
                ensure((lib.lhs - lhs).abs() <= 1e-9, || format!("{}: {} vs {lhs}", entry.name, lib.lhs))?;
                let rhs = (1u64 << q.m()) as f64;
                ensure(lhs <= rhs + 1e-8, || format!("{}: {lhs} > {rhs}", entry.name))?;
                count += 1;
            }
            Ok(count)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum::<usize>();
    let q = Qrac::standard_2to1();
    let pg = build_pgm(&Ensemble::uniform(&q), PgmMode::Full).unwrap();
    let full = pg.full_table().unwrap();
    let lhs: f64 = (0..4).map(|x| tr(full.element(x).unwrap(), q.state(x).matrix())).sum();
    ensure((lhs - 2.0).abs() <= 1e-9, || format!("standard sum {lhs}"))?;
    Ok(format!("{pairs} (code, measurement) pairs within 2^m; standard sum = {lhs:.12}"))
}

fn c6_cmax_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    for (name, ch, expected) in worked_channels() {
        let cm = c_max(&ch);
        let lp = oracle_lp_imax(&ch, &(0..ch.in_size()).collect::<Vec<_>>());
        ensure((cm.value - expected).abs() <= 1e-9 && (lp - expected).abs() <= 1e-9, || {
            format!("{name}: closed form {}, LP {lp}, expected {expected}", cm.value)
        })?;
    }
    for k in 0..200 {
        let ch = random_channel(k, 16, 16);
        let cm = c_max(&ch);
        let all: Vec<usize> = (0..ch.in_size()).collect();
        let lp = oracle_lp_imax(&ch, &all);
        ensure((cm.value - lp).abs() <= 1e-9, || format!("channel {k}: {} vs LP {lp}", cm.value))?;
        ensure((max_dmax(&ch, &cm.argmin_sigma) - cm.value).abs() <= 1e-9, || {
            format!("channel {k}: sigma does not attain the minimum")
        })?;
        let half: Vec<usize> = all.iter().copied().filter(|x| x % 2 == 0).collect();
        ensure(oracle_lp_imax(&ch, &half) <= lp + 1e-9, || format!("channel {k}: sub-support exceeds full"))?;
        let search = c_max_random_search(&ch, 200, k);
        ensure(search >= cm.value - 1e-12, || format!("channel {k}: random sigma beats the minimum"))?;
        worst = worst.max((cm.value - lp).abs());
    }
    Ok(format!("3 worked channels and 200 random channels; largest |closed form - LP| = {worst:.2e}"))
}

fn check_scheme(name: &str, ch: &ClassicalChannel, eta: f64, mc_runs: u64) -> Result<f64, String> {
    let s: CompressionScheme = build_scheme(ch, eta).map_err(|e| e.to_string())?;
    let o = protocol_oracle(ch, eta);
    ensure(s.n_cap == o.n_cap, || format!("{name}: n_cap {} vs {}", s.n_cap, o.n_cap))?;
    ensure(tv(&s.z, &o.z) <= 1e-12, || format!("{name}: reference distribution differs"))?;
    let mut worst_tv = 0.0_f64;
    for x in 0..ch.in_size() {
        let t = tv(&o.dist[x], ch.row(x));
        ensure(t <= eta, || format!("{name} x={x}: tv {t} > {eta}"))?;
        let lib = qraclab::compression::exact_output_distribution(&s, x).map_err(|e| e.to_string())?;
        ensure((lib.tv_error - t).abs() <= 1e-12, || format!("{name} x={x}: tv {} vs {t}", lib.tv_error))?;
        ensure((o.first_accept[x] - 1.0 / o.ratio[x]).abs() <= 1e-12, || {
            format!("{name} x={x}: acceptance {} vs 2^-a {}", o.first_accept[x], 1.0 / o.ratio[x])
        })?;
        ensure((s.a[x] - o.ratio[x].log2()).abs() <= 1e-12, || format!("{name} x={x}: a(x) differs"))?;
        worst_tv = worst_tv.max(t);
    }
    let bits_limit = s.c_max.ceil() + (1.0 / eta).ln().log2().ceil() + 2.0;
    ensure(f64::from(s.index_bits) <= bits_limit, || format!("{name}: {} bits > {bits_limit}", s.index_bits))?;

    let x = (0..ch.in_size()).max_by(|&a, &b| o.ratio[a].total_cmp(&o.ratio[b])).unwrap();
    let q = 2f64.powf(-s.a[x]);
    let runs = simulate(&s, x, mc_runs, 0x5eed).map_err(|e| e.to_string())?;
    let hits = runs.iter().filter(|r| r.sent_index == Some(1)).count() as f64;
    let rate = hits / mc_runs as f64;
    let sigma = (q * (1.0 - q) / mc_runs as f64).sqrt();
    ensure((rate - q).abs() <= 4.0 * sigma + 1e-12, || {
        format!("{name} x={x}: acceptance rate {rate} vs {q} (sigma {sigma})")
    })?;
    let mut counts = vec![0u64; ch.out_size()];
    for r in &runs {
        counts[r.output_y] += 1;
    }
    for (y, (&c, &p)) in counts.iter().zip(&o.dist[x]).enumerate() {
        let h = c as f64 / mc_runs as f64;
        let sd = (p * (1.0 - p) / mc_runs as f64).sqrt();
        ensure((h - p).abs() <= 5.0 * sd + 1e-12, || format!("{name} x={x} y={y}: frequency {h} vs {p}"))?;
    }
    Ok(worst_tv)
}

fn c7_compression() -> Outcome {
    let mut channels: Vec<(String, ClassicalChannel)> =
        worked_channels().into_iter().map(|(n, c, _)| (n.to_string(), c)).collect();
    channels.extend((0..20).map(|k| (format!("random#{k}"), random_channel(1000 + k, 8, 8))));
    let mut worst = Vec::new();
    for eta in [0.1, 0.05] {
        let tvs = channels
            .par_iter()
            .map(|(name, ch)| check_scheme(name, ch, eta, 100_000))
            .collect::<Result<Vec<_>, _>>()?;
        worst.push(tvs.into_iter().fold(0.0, f64::max));
    }
    Ok(format!(
        "{} channels; largest tv {:.3e} at eta 0.1, {:.3e} at eta 0.05; MC within 4 sigma",
        channels.len(),
        worst[0],
        worst[1]
    ))
}

fn c8_rac_end_to_end() -> Outcome {
    let mut codes: Vec<(String, Qrac)> =
        (1..=4).map(|n| (format!("identity{n}"), Qrac::identity_encoding(n).unwrap())).collect();
    codes.push(("standard".into(), Qrac::standard_2to1()));
    let mut lines = Vec::new();
    for (name, q) in &codes {
        let pg = build_pgm(&Ensemble::uniform(q), PgmMode::Full).map_err(|e| e.to_string())?;
        for eta in [0.3, 0.2] {
            let book = build_rac(q, eta, 11, DEFAULT_C_NEWMAN).map_err(|e| format!("{name} eta={eta}: {e}"))?;
            let v = validate_rac(&book, q).map_err(|e| e.to_string())?;
            let n = q.n();
            let p = q.claimed_p();
            let floor = 1.0 - 2.0 * p * (1.0 - p) - eta;
            let mut success = vec![vec![0.0; n]; 1 << n];
            for (s, &k) in book.s_set.iter().zip(&book.scheme_of) {
                let ch = effective_channel(q, *s, &pg).map_err(|e| e.to_string())?;
                let scheme = &book.schemes[k];
                let drift = ch.rows().iter().zip(scheme.channel.rows()).map(|(a, b)| tv(a, b)).fold(0.0, f64::max);
                ensure(drift <= 1e-10, || format!("{name}: scheme channel differs by {drift}"))?;
                ensure((scheme.eta - eta / 2.0).abs() <= 1e-15, || format!("{name}: per-shift budget {}", scheme.eta))?;
                let o = protocol_oracle(&ch, scheme.eta);
                for (x, row) in success.iter_mut().enumerate() {
                    for (i, acc) in row.iter_mut().enumerate() {
                        *acc += o.dist[x]
                            .iter()
                            .enumerate()
                            .filter(|(y, _)| bit(*y, i + 1, n) == bit(x, i + 1, n))
                            .map(|(_, w)| w)
                            .sum::<f64>();
                    }
                }
            }
            let size = book.s_set.len() as f64;
            let min = success.iter().flatten().map(|s| s / size).fold(f64::INFINITY, f64::min);
            ensure((min - v.min_success).abs() <= 1e-9, || {
                format!("{name} eta={eta}: validation {} vs direct {min}", v.min_success)
            })?;
            ensure(v.ok && min >= floor - 1e-8, || format!("{name} eta={eta}: {min} < floor {floor}"))?;
            let limit = q.m() as f64
                + (book.s_set.len() as f64).log2().ceil()
                + (2.0 / eta).ln().log2().ceil()
                + 2.0;
            ensure(f64::from(book.total_message_bits) <= limit, || {
                format!("{name} eta={eta}: {} bits > {limit}", book.total_message_bits)
            })?;
            lines.push(format!("{name}@{eta}: {min:.4}>={floor:.4}, {}b<={limit}", book.total_message_bits));
        }
    }
    Ok(lines.join("; "))
}

fn c9_bound_consistency() -> Outcome {
    let codes = full_corpus();
    let mut tightest = f64::INFINITY;
    for entry in &codes {
        let q = &entry.code;
        let n = q.n() as f64;
        let p = oracle_worst_p(q).min(1.0);
        ensure(q.claimed_p() <= p + 1e-9, || format!("{}: claimed p above {p}", entry.name))?;
        let weak = (1.0 - oracle_binary_entropy(2.0 * p * (1.0 - p))) * n - (n + 1.0).log2();
        let slack = q.m() as f64 - weak;
        ensure(slack >= -1e-8, || format!("{}: m = {} < {weak}", entry.name, q.m()))?;
        tightest = tightest.min(slack);
    }
    for (name, q) in [("standard", Qrac::standard_2to1()), ("tensor2", Qrac::standard_2to1().tensor_power(2).unwrap())] {
        let n = q.n();
        let nf = n as f64;
        let size = 1usize << n;
        let pg = build_pgm(&Ensemble::uniform(&q), PgmMode::Full).unwrap();
        let full = pg.full_table().unwrap();
        let mut pxy = vec![vec![0.0; size]; size];
        for x in 0..size {
            for (&y, el) in full.labels().iter().zip(full.elements()) {
                pxy[x][y] += tr(el, q.state(x).matrix()).max(0.0) / size as f64;
            }
        }
        let py: Vec<f64> = (0..size).map(|y| (0..size).map(|x| pxy[x][y]).sum()).collect();
        let mut pyd = vec![vec![0.0; n + 1]; size];
        for x in 0..size {
            for y in 0..size {
                pyd[y][hamming(x, y)] += pxy[x][y];
            }
        }
        let h_xy = oracle_entropy(pxy.iter().flatten().copied());
        let h_y = oracle_entropy(py.iter().copied());
        let h_yd = oracle_entropy(pyd.iter().flatten().copied());
        let h_x_given_y = h_xy - h_y;
        let h_x_given_yd = h_xy - h_yd;
        let ed: f64 = (0..size).flat_map(|x| (0..size).map(move |y| (x, y))).map(|(x, y)| pxy[x][y] * hamming(x, y) as f64).sum();
        let info = nf - h_x_given_y;
        let chain = entropy_chain(&q).map_err(|e| e.to_string())?;
        for (label, mine, theirs) in [
            ("H(X|Y)", h_x_given_y, chain.h_x_given_y),
            ("H(X|YD)", h_x_given_yd, chain.h_x_given_yd),
            ("E[d]", ed, chain.expected_d),
        ] {
            ensure((mine - theirs).abs() <= 1e-9, || format!("{name}: {label} {theirs} vs {mine}"))?;
        }
        let ball = nf * oracle_binary_entropy((ed / nf).min(0.5));
        let checks = [
            ("conditioning", h_x_given_yd <= h_x_given_y + 1e-9),
            ("distance register", h_x_given_y <= h_x_given_yd + (nf + 1.0).log2() + 1e-9),
            ("hamming ball", h_x_given_yd <= ball + 1e-9),
            ("holevo", info <= q.m() as f64 + 1e-9),
            ("sandwich", nf - ball - (nf + 1.0).log2() <= info + 1e-9),
            ("library", chain.ok()),
        ];
        for (label, ok) in checks {
            ensure(ok, || format!("{name}: {label} inequality fails"))?;
        }
    }
    Ok(format!("{} codes, smallest m - bound = {tightest:.4}; entropy chain holds on standard and tensor2", codes.len()))
}

fn c10_determinism() -> Outcome {
    let cfg = SuiteConfig {
        n: 2,
        m: 1,
        seeds: 4,
        codes: 4,
        ensembles: 20,
        runs: 3000,
        max_iters: 400,
        seed: 9,
        ..SuiteConfig::default()
    };
    let run = |threads: usize, kind: SuiteKind| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_suite(kind, &cfg).map(|r| (r.to_json().unwrap(), r.to_csv())))
            .map_err(|e| e.to_string())
    };
    let mut kinds = 0;
    for kind in SuiteKind::EACH {
        let a = run(1, kind)?;
        let b = run(4, kind)?;
        let c = run(4, kind)?;
        ensure(a == b && b == c, || format!("{kind}: reports differ between runs"))?;
        kinds += 1;
    }
    Ok(format!("{kinds} suites byte-identical across 1- and 4-thread runs"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("1 worked example", Duration::from_secs(1), c1_worked_example),
        ("2 PGM inequality", Duration::from_secs(10), c2_pgm_inequality),
        ("3 Hamming bound", Duration::from_secs(120), c3_hamming_bound),
        ("4 worst-case solver", Duration::from_secs(300), c4_worst_case_solver),
        ("5 identification bound", Duration::from_secs(30), c5_identification_bound),
        ("6 c_max oracle", Duration::from_secs(60), c6_cmax_oracle),
        ("7 compression protocol", Duration::from_secs(60), c7_compression),
        ("8 RAC end to end", Duration::from_secs(600), c8_rac_end_to_end),
        ("9 bound consistency", Duration::from_secs(60), c9_bound_consistency),
        ("10 determinism", Duration::from_secs(600), c10_determinism),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?} ({d})")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name:<24} {:>9.3}s  {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<24} {:>9.3}s  {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
