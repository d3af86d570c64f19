use proptest::prelude::*;

use spcov::matrix::{frobenius_norm, is_positive_definite, min_singular_value, operator_norm, sample_covariance};
use spcov::simulation::sample_gaussian;
use spcov::solvers::glasso_weighted;
use spcov::{
    estimate, DataTable, EstimatorConfig, LambdaGrid, Matrix, Penalty, SolverOptions, SymMatrix, Target,
    WeightMatrix,
};

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-2.0..2.0f64, r * c).prop_map(move |v| Matrix::from_vec(r, c, v).unwrap())
    })
}

/// Sample covariance of `p + 4` rows of mixed draws plus a ridge.
fn covariance(max_p: usize) -> impl Strategy<Value = SymMatrix> {
    (2..=max_p).prop_flat_map(|p| {
        let m = p + 4;
        prop::collection::vec(-1.5..1.5f64, m * p).prop_map(move |v| {
            let s = sample_covariance(&DataTable::new(m, p, v).unwrap(), false).unwrap();
            SymMatrix::from_fn(p, |i, j| s.get(i, j) + if i == j { 0.05 } else { 0.0 })
        })
    })
}

fn penalty() -> impl Strategy<Value = Penalty> {
    (0usize..3, 0.01..1.5f64).prop_map(|(k, l)| match k {
        0 => Penalty::l1(l).unwrap(),
        1 => Penalty::scad(l, 3.7).unwrap(),
        _ => Penalty::hard(l).unwrap(),
    })
}

fn target() -> impl Strategy<Value = Target> {
    (0..Target::ALL.len()).prop_map(|k| Target::ALL[k])
}

fn rel_fro(a: &SymMatrix, b: &SymMatrix) -> f64 {
    frobenius_norm(&a.sub(b).unwrap()) / frobenius_norm(b)
}

proptest! {
    #[test]
    fn product_norm_bounds((a, b) in (1usize..=6).prop_flat_map(|k| (
        (k..=8).prop_flat_map(move |m| prop::collection::vec(-2.0..2.0f64, m * k)
            .prop_map(move |v| Matrix::from_vec(m, k, v).unwrap())),
        (1usize..=6).prop_flat_map(move |q| prop::collection::vec(-2.0..2.0f64, k * q)
            .prop_map(move |v| Matrix::from_vec(k, q, v).unwrap())),
    ))) {
        let ab = a.matmul(&b).unwrap();
        let op = operator_norm(&a).unwrap();
        let smin = min_singular_value(&a).unwrap();
        let (fab, fb) = (frobenius_norm(&ab), frobenius_norm(&b));
        let slack = 1e-9 * (1.0 + op * fb);
        prop_assert!(fab <= op * fb + slack);
        prop_assert!(smin * fb <= fab + slack);
    }

    #[test]
    fn entries_bounded_by_operator_norm(a in matrix(7, 7)) {
        let op = operator_norm(&a).unwrap();
        let max_entry = a.data().iter().fold(0.0_f64, |x, v| x.max(v.abs()));
        prop_assert!(max_entry <= op * (1.0 + 1e-9));
    }

    #[test]
    fn penalty_is_nondecreasing_and_concave(pen in penalty(), x in 0.0..5.0f64, h in 1e-3..1.0f64) {
        prop_assert_eq!(pen.value(0.0), 0.0);
        let (d0, d1) = (pen.derivative(x), pen.derivative(x + h));
        prop_assert!(d0 >= 0.0 && d1 >= 0.0);
        prop_assert!(d1 <= d0 + 1e-12);
        prop_assert!(d0 <= pen.slope_at_origin() + 1e-12);
        prop_assert!(pen.value(x + h) >= pen.value(x) - 1e-12);
        // midpoint concavity
        let mid = pen.value(x + h / 2.0);
        prop_assert!(mid + 1e-12 >= 0.5 * (pen.value(x) + pen.value(x + h)));
    }

    #[test]
    fn penalty_increment_matches_derivative_bounds(pen in penalty(), x in 0.0..5.0f64, h in 1e-3..1.0f64) {
        let inc = pen.value(x + h) - pen.value(x);
        prop_assert!(inc <= h * pen.derivative(x) + 1e-10);
        prop_assert!(inc >= h * pen.derivative(x + h) - 1e-10);
    }

    #[test]
    fn grid_text_matches_log_spacing(lo in 0.01..1.0f64, ratio in 1.5..50.0f64, k in 2usize..30) {
        let g = LambdaGrid::log_spaced(lo, lo * ratio, k).unwrap();
        let parsed: LambdaGrid = format!("{lo}:{}:{k}", lo * ratio).parse().unwrap();
        prop_assert_eq!(parsed.len(), k);
        for (a, b) in parsed.values().iter().zip(g.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimates_are_positive_definite(s in covariance(6), pen in penalty(), t in target()) {
        let pen = pen.with_lambda(pen.lambda().min(0.6)).unwrap();
        let r = estimate(&s, &EstimatorConfig::new(t, pen)).unwrap();
        prop_assert!(is_positive_definite(&r.estimate));
        prop_assert!(is_positive_definite(&r.implied_precision().unwrap()));
    }

    #[test]
    fn lla_objective_never_increases(s in covariance(6), pen in penalty(), t in target()) {
        let mut cfg = EstimatorConfig::new(t, pen);
        cfg.lla_iters = 4;
        let r = estimate(&s, &cfg).unwrap();
        for w in r.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0), "{:?}", r.objective_trace);
        }
    }

    #[test]
    fn glasso_commutes_with_permutation(s in covariance(7), lambda in 0.01..0.5f64, seed in any::<u64>()) {
        let p = s.dim();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut state = seed;
        for i in (1..p).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let w = WeightMatrix::uniform(p, lambda).unwrap();
        let opts = SolverOptions { tol: 1e-10, ..SolverOptions::default() };
        let base = glasso_weighted(&s, &w, &opts).unwrap().value.permuted(&perm);
        let moved = glasso_weighted(&s.permuted(&perm), &w, &opts).unwrap().value;
        prop_assert!(rel_fro(&moved, &base) < 1e-6);
    }

    #[test]
    fn heavy_penalty_gives_diagonal_precision(s in covariance(6)) {
        let w = WeightMatrix::uniform(s.dim(), 10.0 * s.max_abs()).unwrap();
        let omega = glasso_weighted(&s, &w, &SolverOptions::default()).unwrap().value;
        prop_assert_eq!(omega.max_abs_offdiag(), 0.0);
        for i in 0..s.dim() {
            prop_assert!((omega.get(i, i) * s.get(i, i) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_is_reproducible(s in covariance(5), n in 1usize..40, seed in any::<u64>()) {
        let a = sample_gaussian(&s, n, seed).unwrap();
        let b = sample_gaussian(&s, n, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}
