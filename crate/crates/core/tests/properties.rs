use proptest::prelude::*;

use sysid::datagen::d3_representation;
use sysid::io::{csv_string, read_csv};
use sysid::linalg::{delta_rank, singular_values, truncation_projector, DenseMatrix};
use sysid::sdsi::{commutator_norms, symmetrize};
use sysid::solver::{slr_solve, verify_bound, SolverConfig};
use sysid::trajectory::{hankel, TimeSeries};
use sysid::c64;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(m, n)| {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), m * n)
            .prop_map(move |v| DenseMatrix::from_iterator(m, n, v.into_iter().map(|(a, b)| c64::new(a, b))))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_rank_ignores_transpose_and_adjoint(a in matrix(7, 7), delta in 1e-3f64..20.0) {
        let r = delta_rank(&a, delta).unwrap().r;
        prop_assert_eq!(delta_rank(&a.transpose(), delta).unwrap().r, r);
        prop_assert_eq!(delta_rank(&a.adjoint(), delta).unwrap().r, r);
    }

    #[test]
    fn delta_rank_counts_singular_values_above_delta(a in matrix(6, 6), delta in 1e-3f64..20.0) {
        let sv = singular_values(&a).unwrap();
        let r = delta_rank(&a, delta).unwrap().r;
        prop_assert_eq!(r, sv.iter().filter(|&&s| s > delta).count());
        prop_assert!(r <= a.nrows().min(a.ncols()));
    }

    #[test]
    fn truncation_error_is_bounded(a in matrix(6, 6), delta in 1e-2f64..5.0) {
        if let Ok((u, report)) = truncation_projector(&a, delta) {
            let err = (&a - &u * (u.adjoint() * &a)).norm();
            let k = a.nrows().min(a.ncols());
            prop_assert!(err <= ((k - report.r) as f64).sqrt() * delta + 1e-12 * a.norm());
        }
    }

    #[test]
    fn sparse_solution_respects_rank_cap_and_bound(
        a in matrix(8, 6),
        seed in prop::collection::vec(-5.0f64..5.0, 8 * 3),
        delta in prop::sample::select(vec![1e-1, 1e-3, 1e-6]),
    ) {
        let y = DenseMatrix::from_fn(a.nrows(), 3, |i, j| c64::new(seed[i * 3 + j], 0.0));
        let cfg = SolverConfig::new(delta, 20, 1e-10);
        if let Ok(sol) = slr_solve(&a, &y, &cfg) {
            for support in &sol.supports {
                prop_assert!(support.len() <= sol.truncation_rank);
            }
            prop_assert!(verify_bound(&a, &y, &sol, &cfg).unwrap().into_iter().all(|ok| ok));
        }
    }

    #[test]
    fn csv_round_trip_is_exact(
        values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..40),
        complex in any::<bool>(),
    ) {
        let samples: Vec<Vec<c64>> = values
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| vec![c64::new(c[0], if complex { c[1] } else { 0.0 }), c64::new(c[1], 0.0)])
            .collect();
        prop_assume!(!samples.is_empty());
        let series = TimeSeries::from_samples(&samples, 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, csv_string(&series).unwrap()).unwrap();
        let back = read_csv(&path).unwrap();
        prop_assert_eq!(back.data(), series.data());
        // one sample carries no spacing
        prop_assert_eq!(back.dt(), if samples.len() > 1 { 0.5 } else { 1.0 });
    }

    #[test]
    fn symmetrized_operator_commutes_and_is_idempotent(
        entries in prop::collection::vec(-3.0f64..3.0, 36 * 4),
        lag in 1usize..=2,
    ) {
        let side = 6 * lag;
        let a = DenseMatrix::from_fn(side, side, |i, j| c64::new(entries[i * side + j], 0.0));
        let group = d3_representation();
        let sym = symmetrize(&a, &group, lag).unwrap();
        prop_assert!(commutator_norms(&sym, &group, lag).into_iter().all(|c| c <= 1e-12 * (1.0 + a.norm())));
        let again = symmetrize(&sym, &group, lag).unwrap();
        prop_assert!((again - &sym).norm() <= 1e-12 * (1.0 + a.norm()));
        prop_assert!(sym.norm() <= a.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn hankel_stacks_consecutive_samples(values in prop::collection::vec(-1.0f64..1.0, 4..30), lag in 1usize..4) {
        let series = TimeSeries::from_scalar(&values, 1.0).unwrap();
        prop_assume!(lag < values.len());
        let h = hankel(&series, lag).unwrap();
        prop_assert_eq!(h.shape(), (lag, values.len() - lag + 1));
        for i in 0..lag {
            for t in 0..h.ncols() {
                prop_assert_eq!(h[(i, t)].re, values[i + t]);
            }
        }
    }
}
