//! Shared oracles and generators for the integration tests. The oracles use
//! nalgebra so they share no code with the crate's own Jacobi routines.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use perron_lsa::corpus::TermDocumentMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_na(a: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Eigenpairs of a symmetric matrix, values descending.
pub fn eigh_desc(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let e = SymmetricEigen::new(to_na(a));
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((a.nrows(), order.len()), |(r, k)| {
        e.eigenvectors[(r, order[k])]
    });
    (values, vectors)
}

/// Singular values descending, from nalgebra's SVD.
pub fn singular_values(a: &Array2<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Cosines between the rows of `rep` (zero rows give 0).
pub fn row_cosines(rep: &Array2<f64>) -> Array2<f64> {
    let n = rep.nrows();
    let norms: Vec<f64> = (0..n).map(|i| rep.row(i).dot(&rep.row(i)).sqrt()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| {
        if norms[i] == 0.0 || norms[j] == 0.0 {
            0.0
        } else {
            rep.row(i).dot(&rep.row(j)) / (norms[i] * norms[j])
        }
    })
}

/// `rows x cols` nonnegative integer matrix, each entry nonzero with
/// probability `density`, values 1..=3.
pub fn random_counts(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    density: f64,
) -> TermDocumentMatrix {
    let a = Array2::from_shape_fn((rows, cols), |_| {
        if rng.random::<f64>() < density {
            rng.random_range(1..=3) as f64
        } else {
            0.0
        }
    });
    TermDocumentMatrix::from_dense(&a).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric matrix with entries uniform in [-1, 1].
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let x = rng.random_range(-1.0..1.0);
            b[[i, j]] = x;
            b[[j, i]] = x;
        }
    }
    b
}

/// Random orthogonal matrix from the eigenvectors of a random symmetric one.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    eigh_desc(&random_symmetric(rng, n)).1
}
