//! Singular triplets, arbitrary-subset truncation and the correlation
//! identities linking `A^T A` to the right singular vectors.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::corpus::TermDocumentMatrix;
use crate::error::{Error, Result};
use crate::linalg;
use crate::par::Execution;

/// Default numeric-rank cutoff, relative to the largest singular value.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Relative gap below which neighbouring singular values count as equal.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Tag written to SVD dumps describing the sign convention.
pub const SIGN_CONVENTION: &str =
    "right-vector-max-abs-positive;ties-lowest-index;left-follows-right";

/// Nonzero singular values with their left (terms x r) and right
/// (docs x r) singular vectors, sorted by nonincreasing sigma.
///
/// Each right vector has its largest-magnitude entry positive (lowest index on
/// ties); the paired left vector carries the same sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriplets {
    sigma: Array1<f64>,
    u: Array2<f64>,
    v: Array2<f64>,
    tol: f64,
}

impl SvdTriplets {
    /// Assembles triplets from parts (e.g. a dump file). Shapes and ordering
    /// are checked; orthonormality is not.
    pub fn from_parts(
        sigma: Array1<f64>,
        u: Array2<f64>,
        v: Array2<f64>,
        tol: f64,
    ) -> Result<Self> {
        let r = sigma.len();
        if u.ncols() != r || v.ncols() != r {
            return Err(Error::DimensionMismatch(format!(
                "sigma has {r} values, U has {} columns, V has {}",
                u.ncols(),
                v.ncols()
            )));
        }
        if sigma.windows(2).into_iter().any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("sigma must be nonincreasing".into()));
        }
        if sigma.iter().any(|&s| s.is_nan() || s <= 0.0) {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        Ok(Self { sigma, u, v, tol })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn n_terms(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_docs(&self) -> usize {
        self.v.nrows()
    }

    pub fn sigma(&self) -> &Array1<f64> {
        &self.sigma
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn v(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Right singular vector `h` (0-based).
    pub fn right(&self, h: usize) -> ArrayView1<'_, f64> {
        self.v.column(h)
    }

    /// Left singular vector `h` (0-based).
    pub fn left(&self, h: usize) -> ArrayView1<'_, f64> {
        self.u.column(h)
    }

    /// Groups of 0-based indices whose consecutive singular values differ by
    /// less than `DEGENERACY_GAP * sigma_1`. Only groups of two or more are
    /// returned.
    pub fn degenerate_clusters(&self) -> Vec<Vec<usize>> {
        let Some(&s1) = self.sigma.first() else {
            return Vec::new();
        };
        let gap = DEGENERACY_GAP * s1;
        let mut out = Vec::new();
        let mut cur = vec![0];
        for h in 1..self.rank() {
            if self.sigma[h - 1] - self.sigma[h] < gap {
                cur.push(h);
            } else {
                if cur.len() > 1 {
                    out.push(std::mem::take(&mut cur));
                }
                cur = vec![h];
            }
        }
        if cur.len() > 1 {
            out.push(cur);
        }
        out
    }

    /// Whether triplet `h` (0-based) sits in a degenerate cluster.
    pub fn is_degenerate(&self, h: usize) -> bool {
        self.degenerate_clusters().iter().any(|c| c.contains(&h))
    }
}

/// 1-based, strictly increasing triplet indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletSelection {
    indices: Vec<usize>,
}

impl TripletSelection {
    pub fn new(mut indices: Vec<usize>, rank: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "triplet index {} selected twice",
                w[0]
            )));
        }
        for &i in &indices {
            if i == 0 || i > rank {
                return Err(Error::IndexOutOfRange {
                    what: "triplet",
                    index: i,
                    limit: rank,
                });
            }
        }
        Ok(Self { indices })
    }

    pub fn all(rank: usize) -> Self {
        Self {
            indices: (1..=rank).collect(),
        }
    }

    pub fn first(k: usize, rank: usize) -> Result<Self> {
        Self::new((1..=k).collect(), rank)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i - 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub(crate) fn check(&self, rank: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i > rank => Err(Error::IndexOutOfRange {
                what: "triplet",
                index: i,
                limit: rank,
            }),
            _ => Ok(()),
        }
    }
}

pub fn svd(m: &TermDocumentMatrix, tol: f64) -> Result<SvdTriplets> {
    if m.nnz() == 0 {
        return Err(Error::ZeroMatrix);
    }
    svd_dense(&m.to_dense(), tol)
}

/// Thin SVD of a dense matrix via one-sided Jacobi. Triplets with
/// `sigma <= tol * sigma_1` are dropped.
pub fn svd_dense(a: &Array2<f64>, tol: f64) -> Result<SvdTriplets> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "svd tolerance must be in (0, 1), got {tol}"
        )));
    }
    if a.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let raw = linalg::jacobi_svd(a);
    let order = linalg::descending_order(&raw.sigma);
    let s1 = raw.sigma[order[0]];
    let keep: Vec<usize> = order
        .into_iter()
        .take_while(|&j| raw.sigma[j] > tol * s1)
        .collect();
    let sigma = Array1::from_iter(keep.iter().map(|&j| raw.sigma[j]));
    let mut v = raw.v.select(Axis(1), &keep);
    let mut u = raw.w.select(Axis(1), &keep);
    for (h, &s) in sigma.iter().enumerate() {
        u.column_mut(h).mapv_inplace(|x| x / s);
        if linalg::normalize_sign(v.column_mut(h)) {
            u.column_mut(h).mapv_inplace(|x| -x);
        }
    }
    Ok(SvdTriplets { sigma, u, v, tol })
}

/// `sum over h in sel of sigma_h * u_h * v_h^T` (terms x docs).
pub fn reconstruct(s: &SvdTriplets, sel: &TripletSelection) -> Result<Array2<f64>> {
    sel.check(s.rank())?;
    let mut out = Array2::zeros((s.n_terms(), s.n_docs()));
    for h in sel.zero_based() {
        let sig = s.sigma[h];
        let u = s.left(h);
        let v = s.right(h);
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            let su = sig * ui;
            for (j, &vj) in v.iter().enumerate() {
                out[[i, j]] += su * vj;
            }
        }
    }
    Ok(out)
}

/// Document correlation matrix `C = A^T A`.
pub fn gram_correlation(m: &TermDocumentMatrix) -> Array2<f64> {
    gram_correlation_with(m, Execution::default())
}

pub fn gram_correlation_with(m: &TermDocumentMatrix, exec: Execution) -> Array2<f64> {
    let n = m.n_docs();
    let cols = m.columns();
    let rows = exec.map_range(n, |i| {
        let mut dense = vec![0.0; m.n_terms()];
        for &(t, v) in &cols[i] {
            dense[t] = v;
        }
        cols.iter()
            .map(|col| col.iter().map(|&(t, v)| dense[t] * v).sum::<f64>())
            .collect::<Vec<f64>>()
    });
    let mut c = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, x) in row.into_iter().enumerate() {
            c[[i, j]] = x;
        }
    }
    c
}

/// `<d_i, d_j>` rebuilt from the right singular vectors:
/// `sum_h sigma_h^2 v_h(i) v_h(j)`.
pub fn correlation_entry_from_svd(s: &SvdTriplets, i: usize, j: usize) -> Result<f64> {
    for &d in &[i, j] {
        if d >= s.n_docs() {
            return Err(Error::IndexOutOfRange {
                what: "document",
                index: d + 1,
                limit: s.n_docs(),
            });
        }
    }
    Ok(s.sigma
        .iter()
        .zip(s.v.row(i))
        .zip(s.v.row(j))
        .map(|((sg, a), b)| sg * sg * a * b)
        .sum())
}

/// Squared Frobenius residual of the rank-k truncation, computed both by
/// explicit subtraction and from the spectral tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub k: usize,
    pub explicit: f64,
    pub spectral_tail: f64,
}

impl ResidualReport {
    /// Relative disagreement between the two routes. Tails below
    /// `1e-10 * |A|_F^2` are measured against that floor.
    pub fn relative_gap(&self, frobenius_sq: f64) -> f64 {
        let scale = self.spectral_tail.max(1e-10 * frobenius_sq);
        if scale == 0.0 {
            return (self.explicit - self.spectral_tail).abs();
        }
        (self.explicit - self.spectral_tail).abs() / scale
    }
}

/// `|A - A_k|_F^2`, checked against `sigma_{k+1}^2 + ... + sigma_r^2` to 1e-6
/// relative.
pub fn frobenius_residual(m: &TermDocumentMatrix, k: usize) -> Result<ResidualReport> {
    let s = svd(m, DEFAULT_TOL)?;
    frobenius_residual_from(&m.to_dense(), &s, k)
}

pub fn frobenius_residual_from(
    a: &Array2<f64>,
    s: &SvdTriplets,
    k: usize,
) -> Result<ResidualReport> {
    if k > s.rank() {
        return Err(Error::IndexOutOfRange {
            what: "truncation rank",
            index: k,
            limit: s.rank(),
        });
    }
    let ak = if k == 0 {
        Array2::zeros(a.dim())
    } else {
        reconstruct(s, &TripletSelection::first(k, s.rank())?)?
    };
    let explicit: f64 = (a - &ak).iter().map(|x| x * x).sum();
    let spectral_tail: f64 = s.sigma.iter().skip(k).map(|x| x * x).sum();
    let report = ResidualReport {
        k,
        explicit,
        spectral_tail,
    };
    let fro: f64 = a.iter().map(|x| x * x).sum();
    if report.relative_gap(fro) > 1e-6 {
        return Err(Error::EckartYoungViolation {
            explicit,
            tail: spectral_tail,
        });
    }
    Ok(report)
}
