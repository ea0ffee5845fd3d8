//! Dense kernels: one-sided (Hestenes) Jacobi SVD and cyclic Jacobi for
//! symmetric eigenproblems. Both use a fixed row-cyclic pair order, so the
//! output is a pure function of the input bits.

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1, Axis};

const MAX_SWEEPS: usize = 100;

/// Unsorted factors from [`jacobi_svd`]: `a * v = w`, columns of `w`
/// mutually orthogonal, `sigma[j] = |w_j|`.
#[derive(Debug, Clone)]
pub struct RawSvd {
    pub sigma: Vec<f64>,
    pub w: Array2<f64>,
    pub v: Array2<f64>,
    pub sweeps: usize,
}

/// One-sided Jacobi on the columns of `a` (m x n).
pub fn jacobi_svd(a: &Array2<f64>) -> RawSvd {
    let (m, n) = a.dim();
    // column-major working copies
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * (m.max(1) as f64).sqrt();
    let mut sweeps = 0;
    for sweep in 0..MAX_SWEEPS {
        sweeps = sweep + 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = dots(&w[p], &w[q]);
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s) = rotation(alpha, beta, gamma);
                let (wp, wq) = pair_mut(&mut w, p, q);
                rotate(wp, wq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = w.iter().map(|c| norm(c)).collect();
    let mut w_out = Array2::zeros((m, n));
    let mut v_out = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..m {
            w_out[[i, j]] = w[j][i];
        }
        for i in 0..n {
            v_out[[i, j]] = v[j][i];
        }
    }
    RawSvd {
        sigma,
        w: w_out,
        v: v_out,
        sweeps,
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in nonincreasing order (ties keep the original
/// diagonal order) with eigenvectors as columns.
pub fn symmetric_eigen(s: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = s.nrows();
    assert_eq!(n, s.ncols(), "symmetric_eigen needs a square matrix");
    let mut a = s.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
                .map(|(p, q)| a[[p, q]] * a[[p, q]])
                .sum();
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[[p, q]];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let akp = a[[k, p]];
                        let akq = a[[k, q]];
                        a[[k, p]] = c * akp - sn * akq;
                        a[[k, q]] = sn * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[[p, k]];
                        let aqk = a[[q, k]];
                        a[[p, k]] = c * apk - sn * aqk;
                        a[[q, k]] = sn * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[[k, p]];
                        let vkq = v[[k, q]];
                        v[[k, p]] = c * vkp - sn * vkq;
                        v[[k, q]] = sn * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    let order = descending_order(&diag);
    let values = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let vectors = v.select(Axis(1), &order);
    (values, vectors)
}

/// Indices sorting `x` in nonincreasing order; stable for ties.
pub fn descending_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].total_cmp(&x[i]));
    idx
}

/// Flips `v` so its largest-magnitude entry is positive; among entries whose
/// magnitudes agree to 1e-12 relative, the lowest index decides. Returns
/// whether the vector was flipped.
pub fn normalize_sign(mut v: ArrayViewMut1<f64>) -> bool {
    let pivot = sign_pivot(v.view());
    match pivot {
        Some(i) if v[i] < 0.0 => {
            v.mapv_inplace(|x| -x);
            true
        }
        _ => false,
    }
}

/// Index that determines the sign convention, `None` for the zero vector.
pub fn sign_pivot(v: ArrayView1<f64>) -> Option<usize> {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return None;
    }
    v.iter().position(|x| x.abs() >= max * (1.0 - 1e-12))
}

fn dots(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut g = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        a += xi * xi;
        b += yi * yi;
        g += xi * yi;
    }
    (a, b, g)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn rotation(alpha: f64, beta: f64, gamma: f64) -> (f64, f64) {
    let zeta = (beta - alpha) / (2.0 * gamma);
    let t = if zeta == 0.0 {
        1.0
    } else if zeta.abs() > 1e150 {
        0.5 / zeta
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t)
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

fn pair_mut<T>(v: &mut [T], p: usize, q: usize) -> (&mut T, &mut T) {
    debug_assert!(p < q);
    let (lo, hi) = v.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}
