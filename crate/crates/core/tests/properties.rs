use proptest::prelude::*;

use qraclab::compression::{build_scheme, exact_output_distribution};
use qraclab::corpus;
use qraclab::decoding::{expected_hamming_exact, hamming_bound, Measurement};
use qraclab::info::{binary_entropy, c_max, d_max_classical, max_dmax, CqState, ClassicalChannel};
use qraclab::linalg::trace_distance;
use qraclab::minimax::evaluate_worstcase;
use qraclab::pgm::{build_pgm, check_pgm_lower_bound, helstrom_pmax, two_state_pgm_success, PgmMode};
use qraclab::rac::{shift, unshift, SharedShift};
use qraclab::{ComplexMatrix, Ensemble, Qrac};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), qubits in 1usize..=2) {
        let cq = CqState::random(3, 1 << qubits, seed).unwrap();
        let [a, b, c] = [&cq.states()[0], &cq.states()[1], &cq.states()[2]];
        let ab = trace_distance(a, b).unwrap();
        prop_assert!((ab - trace_distance(b, a).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!(trace_distance(a, a).unwrap() < 1e-9);
        prop_assert!(ab <= trace_distance(a, c).unwrap() + trace_distance(c, b).unwrap() + 1e-12);
    }

    #[test]
    fn pgm_is_a_measurement(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=2, sparse in any::<bool>()) {
        let q = Qrac::random(n, m, seed).unwrap();
        let e = Ensemble::random(&q, seed ^ 0xabcd, sparse);
        let pg = build_pgm(&e, PgmMode::Full).unwrap();
        let full = pg.full_table().unwrap();
        let mut total = ComplexMatrix::zeros(q.dim());
        for el in full.elements() {
            total = total.add(el);
        }
        prop_assert!(total.max_abs_diff(&ComplexMatrix::identity(q.dim())) < 1e-9);
        for x in 0..1usize << n {
            let probs = full.probabilities(q.state(x));
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(probs.iter().all(|&v| v >= -1e-10));
        }
    }

    #[test]
    fn pgm_lower_bound_holds(seed in any::<u64>()) {
        let e = &corpus::two_state_ensembles(1, seed).unwrap()[0];
        let pmax = helstrom_pmax(e.p0, &e.rho0, e.p1, &e.rho1).unwrap();
        let ppgm = two_state_pgm_success(e.p0, &e.rho0, e.p1, &e.rho1).unwrap();
        prop_assert!(ppgm <= pmax + 1e-9);
        prop_assert!(check_pgm_lower_bound(ppgm, pmax, 2));
    }

    #[test]
    fn expected_distance_within_bound(seed in any::<u64>(), n in 2usize..=4, m in 1usize..=2) {
        let q = Qrac::random(n, m.min(n), seed).unwrap();
        prop_assume!(q.claimed_p() > 0.5);
        let e = Ensemble::random(&q, seed.rotate_left(7), false);
        let pg = build_pgm(&e, PgmMode::Marginals).unwrap();
        let rep = expected_hamming_exact(&e, Measurement::from(&pg)).unwrap();
        prop_assert!(rep.expected_dh <= hamming_bound(q.claimed_p(), n) + 1e-8);
    }

    #[test]
    fn worst_case_is_linear_in_the_measurement(seed in any::<u64>(), w in 0.0f64..=1.0) {
        let q = Qrac::random(3, 1, seed).unwrap();
        let a = build_pgm(&Ensemble::uniform(&q), PgmMode::Full).unwrap();
        let b = build_pgm(&Ensemble::random(&q, seed ^ 1, true), PgmMode::Full).unwrap();
        let (a, b) = (a.full_table().unwrap(), b.full_table().unwrap());
        let mixed = evaluate_worstcase(&q, &a.mix(b, w).unwrap()).unwrap();
        let ea = evaluate_worstcase(&q, a).unwrap();
        let eb = evaluate_worstcase(&q, b).unwrap();
        for x in 0..8 {
            let expected = (1.0 - w) * ea.per_x[x] + w * eb.per_x[x];
            prop_assert!((mixed.per_x[x] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn shift_is_a_bijection(n in 1usize..=8, d in 0usize..16, r in any::<usize>()) {
        let size = 1usize << n;
        let d = d % n + 1;
        let s = SharedShift { r: r % size, d };
        let mut seen = vec![false; size];
        for x in 0..size {
            let y = shift(x, d, n).unwrap();
            prop_assert!(!seen[y]);
            seen[y] = true;
            prop_assert_eq!(unshift(y, d, n).unwrap(), x);
            if d < n {
                prop_assert_eq!(shift(y, n - d, n).unwrap(), x);
            }
            prop_assert_eq!(s.decode_output(s.encode_input(x, n).unwrap(), n).unwrap(), x);
            prop_assert_eq!(y.count_ones(), x.count_ones());
        }
    }

    #[test]
    fn dmax_is_nonnegative(seed in any::<u64>(), k in 1usize..=8) {
        let ch = ClassicalChannel::random(2, k, seed);
        let d = d_max_classical(ch.row(0), ch.row(1));
        prop_assert!(d >= -1e-12);
        prop_assert!(d_max_classical(ch.row(0), ch.row(0)).abs() < 1e-12);
    }

    #[test]
    fn cmax_shrinks_under_post_processing(seed in any::<u64>(), a in 1usize..=6, b in 1usize..=6, c in 1usize..=6) {
        let ch = ClassicalChannel::random(a, b, seed);
        let post = ClassicalChannel::random(b, c, seed.wrapping_add(1));
        let before = c_max(&ch);
        let after = c_max(&ch.then(&post).unwrap());
        prop_assert!(after.value <= before.value + 1e-12);
        prop_assert!(before.value >= -1e-12);
        prop_assert!(before.value <= (a.min(b) as f64).log2() + 1e-12);
        prop_assert!(max_dmax(&ch, &vec![1.0 / b as f64; b]) >= before.value - 1e-12);
    }

    #[test]
    fn compression_meets_its_budget(seed in any::<u64>(), a in 1usize..=8, b in 1usize..=8, eta in 0.01f64..0.5) {
        let ch = ClassicalChannel::random(a, b, seed);
        let s = build_scheme(&ch, eta).unwrap();
        prop_assert!(f64::from(s.index_bits) <= s.c_max.ceil() + (1.0 / eta).ln().log2().ceil() + 2.0);
        prop_assert!(f64::from(s.index_bits) <= (s.c_max + (1.0 / eta).ln().log2()).ceil() + 1.0);
        prop_assert!((s.z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for x in 0..a {
            let out = exact_output_distribution(&s, x).unwrap();
            prop_assert!(out.tv_error <= eta + 1e-12);
            prop_assert!((out.dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(s.a[x] >= -1e-12 && s.a[x] <= s.c_max + 1e-12);
            let acc = s.accepted_distribution(x);
            for (u, v) in acc.iter().zip(ch.row(x)) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binary_entropy_is_symmetric(q in 0.0f64..=1.0) {
        let h = binary_entropy(q).unwrap();
        prop_assert!((h - binary_entropy(1.0 - q).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-15..=1.0 + 1e-12).contains(&h));
    }
}
