//! Comparisons against independent numerical oracles on random inputs.

mod common;

use ndarray::Array2;
use perron_lsa::blocks::{block_diagonal_permutation, verify_perron};
use perron_lsa::perturb::{
    eigvalue_correction, eigvector_correction, two_by_two_eigen, EigenBasis, Order, TwoByTwoProblem,
};
use perron_lsa::spectral::{
    correlation_entry_from_svd, frobenius_residual_from, gram_correlation, svd, svd_dense,
    DEFAULT_TOL,
};
use rand::Rng;

#[test]
fn singular_values_match_nalgebra() {
    let mut rng = common::rng(11);
    for _ in 0..30 {
        let rows = rng.random_range(2..12);
        let cols = rng.random_range(2..12);
        let m = common::random_counts(&mut rng, rows, cols, 0.4);
        if m.nnz() == 0 {
            continue;
        }
        let s = svd(&m, DEFAULT_TOL).unwrap();
        let oracle = common::singular_values(&m.to_dense());
        for h in 0..s.rank() {
            assert!((s.sigma()[h] - oracle[h]).abs() <= 1e-10 * oracle[0]);
        }
        for &x in &oracle[s.rank()..] {
            assert!(x <= 1e-8 * oracle[0]);
        }
    }
}

#[test]
fn right_vectors_span_gram_eigenvectors() {
    let mut rng = common::rng(12);
    for _ in 0..20 {
        let m = common::random_counts(&mut rng, 9, 7, 0.5);
        let s = svd(&m, DEFAULT_TOL).unwrap();
        let a = m.to_dense();
        let g = a.t().dot(&a);
        for h in 0..s.rank() {
            let v = s.right(h);
            let gv = g.dot(&v);
            let lambda = s.sigma()[h] * s.sigma()[h];
            let err = (&gv - &(&v * lambda))
                .mapv(f64::abs)
                .fold(0.0f64, |x, &y| x.max(y));
            assert!(err <= 1e-9 * g.iter().fold(1.0f64, |x, y| x.max(y.abs())));
        }
    }
}

#[test]
fn correlations_from_svd_match_gram() {
    let mut rng = common::rng(13);
    let m = common::random_counts(&mut rng, 10, 8, 0.5);
    let s = svd(&m, DEFAULT_TOL).unwrap();
    let g = gram_correlation(&m);
    for i in 0..8 {
        for j in 0..8 {
            let c = correlation_entry_from_svd(&s, i, j).unwrap();
            assert!((c - g[[i, j]]).abs() <= 1e-9 * (1.0 + g[[i, j]].abs()));
        }
    }
}

#[test]
fn eckart_young_residuals() {
    let mut rng = common::rng(14);
    for _ in 0..25 {
        let rows = rng.random_range(3..10);
        let cols = rng.random_range(3..10);
        let a = Array2::from_shape_fn((rows, cols), |_| rng.random_range(0.0..1.0));
        let s = svd_dense(&a, DEFAULT_TOL).unwrap();
        let sv = common::singular_values(&a);
        for k in 0..=s.rank() {
            let r = frobenius_residual_from(&a, &s, k).unwrap();
            let tail: f64 = sv[k..].iter().map(|x| x * x).sum();
            let fro: f64 = a.iter().map(|x| x * x).sum();
            assert!(
                (r.explicit - tail).abs() <= 1e-6 * tail.max(1e-10 * fro),
                "k={k}: {} vs {tail}",
                r.explicit
            );
        }
    }
}

/// Positive v1 with simple sigma_1 exactly when the document graph is connected.
#[test]
fn perron_positivity_iff_connected() {
    let mut rng = common::rng(15);
    let (mut reducible, mut irreducible) = (0, 0);
    for _ in 0..200 {
        let density = rng.random_range(0.1..0.45);
        let m = common::random_counts(&mut rng, 8, 8, density);
        if m.nnz() == 0 {
            continue;
        }
        let s = svd(&m, DEFAULT_TOL).unwrap();
        let d = verify_perron(&m, &s);
        let connected = d.n_components == 1;
        assert_eq!(d.v1_strictly_positive && d.sigma1_simple, connected);
        if connected {
            irreducible += 1;
        } else {
            reducible += 1;
            assert!(block_diagonal_permutation(&m).is_block_diagonal());
        }
    }
    assert!(
        reducible > 20 && irreducible > 20,
        "{reducible} / {irreducible}"
    );
}

fn quadratic_oracle(p: &TwoByTwoProblem) -> (f64, f64, [f64; 2]) {
    let (x, y) = (p.a + p.eps * p.d, p.b + p.eps * p.f);
    let c = p.eps * p.z;
    let mean = 0.5 * (x + y);
    let r = (0.25 * (x - y) * (x - y) + c * c).sqrt();
    let l1 = mean + r;
    // Two null-space candidates of M - l1 I; keep the larger one.
    let u = [c, l1 - x];
    let w = [l1 - y, c];
    let pick = if u[0].hypot(u[1]) >= w[0].hypot(w[1]) {
        u
    } else {
        w
    };
    let n = pick[0].hypot(pick[1]);
    (l1, mean - r, [pick[0] / n, pick[1] / n])
}

#[test]
fn two_by_two_matches_quadratic_formula() {
    let mut rng = common::rng(16);
    for _ in 0..1000 {
        let b = rng.random_range(0.0..2.0);
        let a = b + rng.random_range(0.0..2.0);
        let p = TwoByTwoProblem::new(
            a,
            b,
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..1.0),
        )
        .unwrap();
        let sol = two_by_two_eigen(&p).unwrap();
        let (l1, l2, v1) = quadratic_oracle(&p);
        assert!((sol.lambda1 - l1).abs() < 1e-12);
        assert!((sol.lambda2 - l2).abs() < 1e-12);
        let sign = (sol.v1[0] * v1[0] + sol.v1[1] * v1[1]).signum();
        assert!((sol.v1[0] - sign * v1[0]).abs() < 1e-12);
        assert!((sol.v1[1] - sign * v1[1]).abs() < 1e-12);
        let dot = sol.v1[0] * sol.v2[0] + sol.v1[1] * sol.v2[1];
        assert!(dot.abs() < 1e-12);
    }
}

#[test]
fn two_by_two_degenerate_gap_mixes_evenly() {
    let mut rng = common::rng(17);
    for _ in 0..100 {
        let a = rng.random_range(0.0..3.0);
        let d = rng.random_range(-1.0..1.0);
        let z = rng.random_range(0.1..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let p = TwoByTwoProblem::new(a, a, d, d, z, rng.random_range(0.01..1.0)).unwrap();
        let sol = two_by_two_eigen(&p).unwrap();
        for x in sol.v1.iter().chain(&sol.v2) {
            assert!((x.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }
}

struct Instance {
    basis: EigenBasis,
    d: Array2<f64>,
    b: Array2<f64>,
}

/// `D = Q diag(n, ..., 1) Q^T` with a random perturbation direction.
fn instance(seed: u64, n: usize) -> Instance {
    let mut rng = common::rng(seed);
    let q = common::random_orthogonal(&mut rng, n);
    let values = Array2::from_diag(&ndarray::Array1::from_iter((0..n).map(|i| (n - i) as f64)));
    let d = q.dot(&values).dot(&q.t());
    let b = common::random_symmetric(&mut rng, n);
    let basis = EigenBasis::from_symmetric(&d).unwrap();
    Instance { basis, d, b }
}

fn defects(inst: &Instance, eps: f64) -> (f64, f64) {
    let n = inst.d.nrows();
    let targets: Vec<usize> = (0..n).collect();
    let (exact_values, exact_vectors) = common::eigh_desc(&(&inst.d + &(&inst.b * eps)));
    let second =
        eigvalue_correction(&inst.basis, &inst.b, eps, Order::Second, &targets, 1e-6).unwrap();
    let vectors = eigvector_correction(&inst.basis, &inst.b, eps, &targets, 1e-6).unwrap();
    let mut vec_defect = 0.0f64;
    let mut val_defect = 0.0f64;
    for i in 0..n {
        let exact = exact_vectors.column(i);
        let pred = &vectors[i].normalized;
        let sign = pred.dot(&exact).signum();
        let diff = pred - &(&exact * sign);
        vec_defect = vec_defect.max(diff.dot(&diff).sqrt());
        val_defect = val_defect.max((second[i] - exact_values[i]).abs());
    }
    (vec_defect, val_defect)
}

#[test]
fn halving_eps_shrinks_defects_by_expected_orders() {
    for seed in 0..20 {
        let inst = instance(100 + seed, 6);
        let eps = 1e-2;
        let (v1, l1) = defects(&inst, eps);
        let (v2, l2) = defects(&inst, eps / 2.0);
        let vr = v1 / v2;
        let lr = l1 / l2;
        assert!(
            (vr - 4.0).abs() <= 0.25 * 4.0,
            "seed {seed}: vector ratio {vr}"
        );
        assert!(
            (lr - 8.0).abs() <= 0.30 * 8.0,
            "seed {seed}: value ratio {lr}"
        );
    }
}
