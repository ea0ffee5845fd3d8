//! Perturbation of decomposable document-correlation matrices.
//!
//! `M = D + eps * B` with `D` block diagonal. The 2x2 case has a closed
//! form; the general case uses the Rayleigh-Schrodinger series to second
//! order in the eigenvalues and first order in the eigenvectors. The bridge
//! word case is `B = w w^T` for a single term shared by otherwise separate
//! blocks.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2, ArrayView1};
use serde::Serialize;
use serde_json::json;

use crate::blocks::BlockReport;
use crate::corpus::TermDocumentMatrix;
use crate::error::{Error, Result};
use crate::linalg::{normalize_sign, symmetric_eigen};
use crate::spectral::{gram_correlation, DEFAULT_TOL};

/// Ratio standing in for "much smaller than" in regime classification.
pub const DEFAULT_THETA: f64 = 0.1;
/// Eigenvalue gaps at or below `gap_tol * |lambda_1|` count as degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

/// `D + eps B` with `D = diag(a, b)` and `B = [[d, z], [z, f]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoByTwoProblem {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub f: f64,
    pub z: f64,
    pub eps: f64,
}

impl TwoByTwoProblem {
    pub fn new(a: f64, b: f64, d: f64, f: f64, z: f64, eps: f64) -> Result<Self> {
        if ![a, b, d, f, z, eps].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument(
                "2x2 parameters must be finite".into(),
            ));
        }
        if a < b {
            return Err(Error::InvalidArgument(format!(
                "expected a >= b, got a={a}, b={b}"
            )));
        }
        Ok(TwoByTwoProblem { a, b, d, f, z, eps })
    }

    /// `a + eps d - (b + eps f)`.
    pub fn shifted_gap(&self) -> f64 {
        (self.a - self.b) + self.eps * (self.d - self.f)
    }

    pub fn coupling(&self) -> f64 {
        self.eps * self.z
    }

    pub fn matrix(&self) -> Array2<f64> {
        let e = self.eps;
        ndarray::array![
            [self.a + e * self.d, e * self.z],
            [e * self.z, self.b + e * self.f]
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoByTwoSolution {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    /// `None` when the coupling vanishes.
    pub g: Option<f64>,
    pub n: f64,
}

pub fn two_by_two_eigen(p: &TwoByTwoProblem) -> Result<TwoByTwoSolution> {
    let ez = p.coupling();
    let delta = p.shifted_gap();
    let base1 = p.a + p.eps * p.d;
    let base2 = p.b + p.eps * p.f;
    if ez == 0.0 {
        if delta == 0.0 {
            return Err(Error::DegenerateInput);
        }
        return Ok(TwoByTwoSolution {
            lambda1: base1,
            lambda2: base2,
            v1: [1.0, 0.0],
            v2: [0.0, 1.0],
            g: None,
            n: 1.0,
        });
    }
    let s = delta.hypot(2.0 * ez);
    // G and ez^2/G, avoiding cancellation when delta < 0
    let (g, shift) = if delta >= 0.0 {
        let g = 0.5 * (delta + s);
        (g, 2.0 * ez * ez / (delta + s))
    } else {
        (2.0 * ez * ez / (s - delta), 0.5 * (s - delta))
    };
    let ratio = ez / g;
    let n = (1.0 + ratio * ratio).sqrt();
    Ok(TwoByTwoSolution {
        lambda1: base1 + shift,
        lambda2: base2 - shift,
        v1: [1.0 / n, ratio / n],
        v2: [-ratio / n, 1.0 / n],
        g: Some(g),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Unperturbed,
    PseudoZero,
    Mixed,
    /// Between the two bounds: `theta * gap < |eps z| < gap / theta`.
    Intermediate {
        pseudo_zero_bound: f64,
        mixed_bound: f64,
    },
}

pub fn classify_regime(p: &TwoByTwoProblem, theta: f64) -> Regime {
    if p.eps == 0.0 {
        return Regime::Unperturbed;
    }
    let coupling = p.coupling().abs();
    let gap = p.shifted_gap().abs();
    if gap == 0.0 {
        return if coupling > 0.0 {
            Regime::Mixed
        } else {
            Regime::PseudoZero
        };
    }
    if coupling <= theta * gap {
        Regime::PseudoZero
    } else if coupling >= gap / theta {
        Regime::Mixed
    } else {
        Regime::Intermediate {
            pseudo_zero_bound: theta * gap,
            mixed_bound: gap / theta,
        }
    }
}

/// Eigenpairs of the unperturbed matrix, vectors as columns, with optional
/// block tags used to split correction terms.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    values: Array1<f64>,
    vectors: Array2<f64>,
    tags: Option<Vec<usize>>,
}

impl EigenBasis {
    pub fn new(values: Array1<f64>, vectors: Array2<f64>) -> Result<Self> {
        if vectors.ncols() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues but {} eigenvectors",
                values.len(),
                vectors.ncols()
            )));
        }
        Ok(EigenBasis {
            values,
            vectors,
            tags: None,
        })
    }

    /// Full eigendecomposition of a symmetric matrix, sign-normalized.
    pub fn from_symmetric(d: &Array2<f64>) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} is not square",
                d.dim()
            )));
        }
        let (values, mut vectors) = symmetric_eigen(d);
        for mut c in vectors.columns_mut() {
            normalize_sign(c.view_mut());
        }
        EigenBasis::new(values, vectors)
    }

    pub fn with_tags(mut self, tags: Vec<usize>) -> Result<Self> {
        if tags.len() != self.values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} tags for {} eigenpairs",
                tags.len(),
                self.values.len()
            )));
        }
        self.tags = Some(tags);
        Ok(self)
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn tags(&self) -> Option<&[usize]> {
        self.tags.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> ArrayView1<'_, f64> {
        self.vectors.column(i)
    }

    /// Pairs `(i, j)` (1-based) with `i` in `targets` and
    /// `|lambda_i - lambda_j| <= gap_tol * |lambda_1|`.
    pub fn degenerate_pairs(&self, targets: &[usize], gap_tol: f64) -> Vec<(usize, usize)> {
        let scale = self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let thr = gap_tol * scale;
        let mut out = Vec::new();
        for &i in targets {
            for j in 0..self.len() {
                if j != i && (self.values[i] - self.values[j]).abs() <= thr {
                    out.push((i.min(j) + 1, i.max(j) + 1));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn check(&self, b: &Array2<f64>, targets: &[usize], gap_tol: f64) -> Result<()> {
        let n = self.vectors.nrows();
        if b.dim() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "perturbation is {:?}, basis vectors have length {n}",
                b.dim()
            )));
        }
        if let Some(&bad) = targets.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange {
                what: "eigenpair",
                index: bad + 1,
                limit: self.len(),
            });
        }
        if gap_tol.is_nan() || gap_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gap_tol must be > 0, got {gap_tol}"
            )));
        }
        let pairs = self.degenerate_pairs(targets, gap_tol);
        if !pairs.is_empty() {
            return Err(Error::DegenerateSpectrum { pairs, gap_tol });
        }
        Ok(())
    }

    /// `C[j, i] = v_j^T B v_i` for every basis vector `j` and target `i`.
    fn couplings(&self, b: &Array2<f64>, targets: &[usize]) -> Array2<f64> {
        let mut c = Array2::zeros((self.len(), targets.len()));
        for (col, &i) in targets.iter().enumerate() {
            let bv = b.dot(&self.vector(i));
            for j in 0..self.len() {
                c[[j, col]] = self.vector(j).dot(&bv);
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

/// Series-corrected eigenvalues for `targets` (0-based).
pub fn eigvalue_correction(
    basis: &EigenBasis,
    b: &Array2<f64>,
    eps: f64,
    order: Order,
    targets: &[usize],
    gap_tol: f64,
) -> Result<Array1<f64>> {
    basis.check(b, targets, gap_tol)?;
    let c = basis.couplings(b, targets);
    Ok(corrected_values(basis, &c, eps, order, targets))
}

fn corrected_values(
    basis: &EigenBasis,
    c: &Array2<f64>,
    eps: f64,
    order: Order,
    targets: &[usize],
) -> Array1<f64> {
    Array1::from_iter(targets.iter().enumerate().map(|(col, &i)| {
        let li = basis.values[i];
        let mut value = li + eps * c[[i, col]];
        if order == Order::Second {
            let second: f64 = (0..basis.len())
                .filter(|&j| j != i)
                .map(|j| c[[j, col]] * c[[j, col]] / (li - basis.values[j]))
                .sum();
            value += eps * eps * second;
        }
        value
    }))
}

/// One coefficient `eps * v_j^T B v_i / (lambda_i - lambda_j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionTerm {
    /// 1-based basis index.
    pub j: usize,
    pub coefficient: f64,
    /// `None` when the basis carries no block tags.
    pub same_block: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorCorrection {
    /// 1-based basis index.
    pub index: usize,
    pub base: Array1<f64>,
    /// Sum of all first-order terms.
    pub correction: Array1<f64>,
    pub same_block: Array1<f64>,
    pub different_block: Array1<f64>,
    /// `base + correction`, before renormalization.
    pub raw: Array1<f64>,
    pub normalized: Array1<f64>,
    /// Nonzero coefficients only.
    pub terms: Vec<CorrectionTerm>,
}

/// First-order corrected eigenvectors for `targets` (0-based).
pub fn eigvector_correction(
    basis: &EigenBasis,
    b: &Array2<f64>,
    eps: f64,
    targets: &[usize],
    gap_tol: f64,
) -> Result<Vec<VectorCorrection>> {
    basis.check(b, targets, gap_tol)?;
    let c = basis.couplings(b, targets);
    Ok(corrected_vectors(basis, &c, eps, targets))
}

fn corrected_vectors(
    basis: &EigenBasis,
    c: &Array2<f64>,
    eps: f64,
    targets: &[usize],
) -> Vec<VectorCorrection> {
    let n = basis.vectors.nrows();
    targets
        .iter()
        .enumerate()
        .map(|(col, &i)| {
            let li = basis.values[i];
            let mut same = Array1::zeros(n);
            let mut diff = Array1::zeros(n);
            let mut untagged = Array1::zeros(n);
            let mut terms = Vec::new();
            for j in 0..basis.len() {
                if j == i || c[[j, col]] == 0.0 {
                    continue;
                }
                let coefficient = eps * c[[j, col]] / (li - basis.values[j]);
                let vj = basis.vector(j);
                let same_block = basis.tags.as_ref().map(|t| t[j] == t[i]);
                match same_block {
                    Some(true) => same.scaled_add(coefficient, &vj),
                    Some(false) => diff.scaled_add(coefficient, &vj),
                    None => untagged.scaled_add(coefficient, &vj),
                }
                terms.push(CorrectionTerm {
                    j: j + 1,
                    coefficient,
                    same_block,
                });
            }
            let correction = &same + &diff + &untagged;
            let base = basis.vector(i).to_owned();
            let raw = &base + &correction;
            let norm = raw.dot(&raw).sqrt();
            let normalized = if norm > 0.0 { &raw / norm } else { raw.clone() };
            VectorCorrection {
                index: i + 1,
                base,
                correction,
                same_block: same,
                different_block: diff,
                raw,
                normalized,
                terms,
            }
        })
        .collect()
}

/// `v_11^M ~ (v_11; delta v_21) / N` from the leaders of the two strongest
/// blocks containing the bridge word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominantPair {
    pub delta: f64,
    pub n: f64,
    pub vector: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationPrediction {
    pub order: u8,
    pub eps: f64,
    /// 1-based basis indices.
    pub targets: Vec<usize>,
    pub unperturbed_values: Vec<f64>,
    pub first_order_values: Vec<f64>,
    pub second_order_values: Vec<f64>,
    /// Values at `order`.
    pub corrected_values: Vec<f64>,
    /// docs x targets, unit columns.
    pub corrected_vectors: Array2<f64>,
    pub vectors: Vec<VectorCorrection>,
    pub dominant_pair: Option<DominantPair>,
}

/// Value and vector corrections in one pass.
pub fn predict(
    basis: &EigenBasis,
    b: &Array2<f64>,
    eps: f64,
    order: Order,
    targets: &[usize],
    gap_tol: f64,
) -> Result<PerturbationPrediction> {
    basis.check(b, targets, gap_tol)?;
    let c = basis.couplings(b, targets);
    let first = corrected_values(basis, &c, eps, Order::First, targets);
    let second = corrected_values(basis, &c, eps, Order::Second, targets);
    let vectors = corrected_vectors(basis, &c, eps, targets);
    let mut corrected_vectors = Array2::zeros((basis.vectors.nrows(), targets.len()));
    for (k, vc) in vectors.iter().enumerate() {
        corrected_vectors.column_mut(k).assign(&vc.normalized);
    }
    Ok(PerturbationPrediction {
        order: order.as_u8(),
        eps,
        targets: targets.iter().map(|i| i + 1).collect(),
        unperturbed_values: targets.iter().map(|&i| basis.values[i]).collect(),
        corrected_values: match order {
            Order::First => first.to_vec(),
            Order::Second => second.to_vec(),
        },
        first_order_values: first.to_vec(),
        second_order_values: second.to_vec(),
        corrected_vectors,
        vectors,
        dominant_pair: None,
    })
}

impl PerturbationPrediction {
    pub fn vector_for(&self, index: usize) -> Option<&VectorCorrection> {
        self.vectors.iter().find(|v| v.index == index)
    }

    /// Singular values implied by the corrected eigenvalues.
    pub fn corrected_sigma(&self) -> Vec<f64> {
        self.corrected_values
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .collect()
    }

    /// JSON with one V / SBP / DBP / PV table per target (1-based docs).
    pub fn to_json(&self) -> serde_json::Value {
        let tables: Vec<_> = self
            .vectors
            .iter()
            .map(|vc| {
                let rows: Vec<_> = (0..vc.base.len())
                    .map(|d| {
                        json!({
                            "doc": d + 1,
                            "v": vc.base[d],
                            "sbp": vc.same_block[d],
                            "dbp": vc.different_block[d],
                            "pv": vc.raw[d],
                        })
                    })
                    .collect();
                let terms: Vec<_> = vc
                    .terms
                    .iter()
                    .map(|t| json!({"j": t.j, "coefficient": t.coefficient, "same_block": t.same_block}))
                    .collect();
                json!({
                    "index": vc.index,
                    "rows": rows,
                    "terms": terms,
                    "normalized": vc.normalized.to_vec(),
                })
            })
            .collect();
        json!({
            "order": self.order,
            "eps": self.eps,
            "targets": self.targets,
            "unperturbed_values": self.unperturbed_values,
            "first_order_values": self.first_order_values,
            "second_order_values": self.second_order_values,
            "corrected_values": self.corrected_values,
            "corrected_sigma": self.corrected_sigma(),
            "tables": tables,
            "dominant_pair": self.dominant_pair.as_ref().map(|p| json!({
                "delta": p.delta,
                "n": p.n,
                "vector": p.vector.to_vec(),
            })),
        })
    }
}

/// One unperturbed block of a bridge-word setup.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeBlock {
    /// Global document ids, ascending.
    pub docs: Vec<usize>,
    pub matrix: TermDocumentMatrix,
    /// Bridge word counts over `docs`.
    pub w: Array1<f64>,
}

/// Separate blocks plus one word occurring in several of them.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeWordSetup {
    blocks: Vec<BridgeBlock>,
    n_docs: usize,
    eps: f64,
}

impl BridgeWordSetup {
    /// Two blocks stacked block-diagonally: documents of `block1` come first.
    pub fn new(
        block1: TermDocumentMatrix,
        block2: TermDocumentMatrix,
        w1: Array1<f64>,
        w2: Array1<f64>,
    ) -> Result<Self> {
        let n1 = block1.n_docs();
        let n2 = block2.n_docs();
        let blocks = vec![
            BridgeBlock {
                docs: (0..n1).collect(),
                matrix: block1,
                w: w1,
            },
            BridgeBlock {
                docs: (n1..n1 + n2).collect(),
                matrix: block2,
                w: w2,
            },
        ];
        BridgeWordSetup::from_blocks(blocks, n1 + n2)
    }

    pub fn from_blocks(blocks: Vec<BridgeBlock>, n_docs: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (k, b) in blocks.iter().enumerate() {
            if b.docs.len() != b.matrix.n_docs() || b.w.len() != b.docs.len() {
                return Err(Error::DimensionMismatch(format!(
                    "block {} has {} docs, a {}-column matrix and a length-{} bridge vector",
                    k + 1,
                    b.docs.len(),
                    b.matrix.n_docs(),
                    b.w.len()
                )));
            }
            if b.w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "bridge vector of block {} must be finite and nonnegative",
                    k + 1
                )));
            }
            for &d in &b.docs {
                if d >= n_docs {
                    return Err(Error::IndexOutOfRange {
                        what: "document",
                        index: d + 1,
                        limit: n_docs,
                    });
                }
                if !seen.insert(d) {
                    return Err(Error::OverlappingBlocks(format!(
                        "document {} appears in more than one block",
                        d + 1
                    )));
                }
            }
        }
        Ok(BridgeWordSetup {
            blocks,
            n_docs,
            eps: 1.0,
        })
    }

    /// Splits a matrix that contains the bridge term. `blocks` are 0-based
    /// document sets; every document with entries outside the bridge row must
    /// belong to one, and no other term may span two blocks.
    pub fn from_matrix(
        m: &TermDocumentMatrix,
        blocks: &[BTreeSet<usize>],
        bridge_term: usize,
    ) -> Result<Self> {
        if bridge_term >= m.n_terms() {
            return Err(Error::IndexOutOfRange {
                what: "term",
                index: bridge_term + 1,
                limit: m.n_terms(),
            });
        }
        let mut block_of = vec![None; m.n_docs()];
        for (k, docs) in blocks.iter().enumerate() {
            for &d in docs {
                if d >= m.n_docs() {
                    return Err(Error::IndexOutOfRange {
                        what: "document",
                        index: d + 1,
                        limit: m.n_docs(),
                    });
                }
                if block_of[d].is_some() {
                    return Err(Error::OverlappingBlocks(format!(
                        "document {} appears in more than one block",
                        d + 1
                    )));
                }
                block_of[d] = Some(k);
            }
        }
        let mut term_block: Vec<Option<usize>> = vec![None; m.n_terms()];
        let mut unassigned = BTreeSet::new();
        for &(t, d, _) in m.entries() {
            if t == bridge_term {
                continue;
            }
            let Some(k) = block_of[d] else {
                unassigned.insert(d + 1);
                continue;
            };
            match term_block[t] {
                Some(prev) if prev != k => {
                    return Err(Error::OverlappingBlocks(format!(
                        "term {} occurs in blocks {} and {}",
                        t + 1,
                        prev + 1,
                        k + 1
                    )));
                }
                _ => term_block[t] = Some(k),
            }
        }
        if !unassigned.is_empty() {
            return Err(Error::IncompleteAssignment(
                unassigned.into_iter().collect(),
            ));
        }
        let mut out = Vec::with_capacity(blocks.len());
        for (k, docs) in blocks.iter().enumerate() {
            let docs: Vec<usize> = docs.iter().copied().collect();
            let terms: Vec<usize> = (0..m.n_terms())
                .filter(|&t| term_block[t] == Some(k))
                .collect();
            let matrix = m.submatrix(&terms, &docs)?;
            let w = Array1::from_iter(docs.iter().map(|&d| m.get(bridge_term, d)));
            out.push(BridgeBlock { docs, matrix, w });
        }
        BridgeWordSetup::from_blocks(out, m.n_docs())
    }

    /// Same setup with the bridge perturbation scaled by `eps`.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn blocks(&self) -> &[BridgeBlock] {
        &self.blocks
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Bridge word counts over all documents.
    pub fn bridge_vector(&self) -> Array1<f64> {
        let mut w = Array1::zeros(self.n_docs);
        for b in &self.blocks {
            for (k, &d) in b.docs.iter().enumerate() {
                w[d] = b.w[k];
            }
        }
        w
    }

    /// `D`: block Gram matrices placed on the diagonal.
    pub fn unperturbed_gram(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n_docs, self.n_docs));
        for b in &self.blocks {
            let g = gram_correlation(&b.matrix);
            for (i, &di) in b.docs.iter().enumerate() {
                for (j, &dj) in b.docs.iter().enumerate() {
                    d[[di, dj]] = g[[i, j]];
                }
            }
        }
        d
    }

    /// `B = w w^T` (unscaled).
    pub fn perturbation(&self) -> Array2<f64> {
        let w = self.bridge_vector();
        let col = w.view().insert_axis(ndarray::Axis(1));
        col.dot(&col.t())
    }

    /// Eigenbasis of `D` assembled from per-block eigenpairs with zero
    /// padding; documents outside every block become unit vectors with
    /// eigenvalue 0. Tags are block indices.
    pub fn basis(&self) -> Result<EigenBasis> {
        let mut pairs: Vec<(f64, usize, Array1<f64>)> = Vec::with_capacity(self.n_docs);
        let mut covered = vec![false; self.n_docs];
        for (k, b) in self.blocks.iter().enumerate() {
            let g = gram_correlation(&b.matrix);
            let (values, vectors) = symmetric_eigen(&g);
            for (h, &lam) in values.iter().enumerate() {
                let mut v = Array1::zeros(self.n_docs);
                for (i, &d) in b.docs.iter().enumerate() {
                    v[d] = vectors[[i, h]];
                }
                normalize_sign(v.view_mut());
                pairs.push((lam, k, v));
            }
            for &d in &b.docs {
                covered[d] = true;
            }
        }
        let extra = self.blocks.len();
        for d in (0..self.n_docs).filter(|&d| !covered[d]) {
            let mut v = Array1::zeros(self.n_docs);
            v[d] = 1.0;
            pairs.push((0.0, extra + d, v));
        }
        // stable: ties keep block order
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
        let values = Array1::from_iter(pairs.iter().map(|p| p.0));
        let mut vectors = Array2::zeros((self.n_docs, pairs.len()));
        for (h, p) in pairs.iter().enumerate() {
            vectors.column_mut(h).assign(&p.2);
        }
        let tags = pairs.iter().map(|p| p.1).collect();
        EigenBasis::new(values, vectors)?.with_tags(tags)
    }
}

/// Indices (0-based) of the nonzero eigenvalues of `basis`.
pub fn nonzero_indices(basis: &EigenBasis) -> Vec<usize> {
    let scale = basis.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (0..basis.len())
        .filter(|&i| basis.values()[i] > DEFAULT_TOL * scale)
        .collect()
}

/// First-order prediction for a bridge word. `targets` are 0-based indices
/// into the sorted spectrum of `D`; `None` means every nonzero eigenvalue.
pub fn bridge_word_prediction(
    setup: &BridgeWordSetup,
    targets: Option<&[usize]>,
    gap_tol: f64,
) -> Result<PerturbationPrediction> {
    let basis = setup.basis()?;
    let targets = match targets {
        Some(t) => t.to_vec(),
        None => nonzero_indices(&basis),
    };
    let b = setup.perturbation();
    let mut prediction = predict(&basis, &b, setup.eps, Order::First, &targets, gap_tol)?;
    prediction.dominant_pair = dominant_pair(setup, &basis);
    Ok(prediction)
}

fn dominant_pair(setup: &BridgeWordSetup, basis: &EigenBasis) -> Option<DominantPair> {
    let tags = basis.tags()?;
    // leaders of the blocks the word touches, largest eigenvalue first
    let mut leaders: Vec<usize> = (0..setup.blocks.len())
        .filter(|&k| setup.blocks[k].w.iter().any(|&x| x != 0.0))
        .filter_map(|k| (0..basis.len()).find(|&h| tags[h] == k))
        .collect();
    leaders.sort_by(|&x, &y| {
        basis.values()[y]
            .total_cmp(&basis.values()[x])
            .then(x.cmp(&y))
    });
    let (&i1, &i2) = (leaders.first()?, leaders.get(1)?);
    let gap = basis.values()[i1] - basis.values()[i2];
    if gap == 0.0 {
        return None;
    }
    let w = setup.bridge_vector();
    let v11 = basis.vector(i1);
    let v21 = basis.vector(i2);
    let delta = setup.eps * w.dot(&v11) * w.dot(&v21) / gap;
    let n = (1.0 + delta * delta).sqrt();
    let vector = (&v11 + &(&v21 * delta)) / n;
    Some(DominantPair { delta, n, vector })
}

/// Term-wise split `A^T A = D + B`: terms whose documents lie inside one
/// block feed `D`, terms spanning several blocks feed `B`. Documents without
/// entries need no block.
pub fn split_decomposition(
    m: &TermDocumentMatrix,
    blocks: &BlockReport,
) -> Result<(Array2<f64>, Array2<f64>)> {
    split_by_assignment(m, &blocks.assignment(m.n_docs()))
}

pub fn split_by_assignment(
    m: &TermDocumentMatrix,
    assignment: &[Option<usize>],
) -> Result<(Array2<f64>, Array2<f64>)> {
    if assignment.len() != m.n_docs() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} documents, matrix has {}",
            assignment.len(),
            m.n_docs()
        )));
    }
    let missing: Vec<usize> = (0..m.n_docs())
        .filter(|&d| assignment[d].is_none())
        .filter(|&d| m.entries().iter().any(|e| e.1 == d))
        .map(|d| d + 1)
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteAssignment(missing));
    }
    let n = m.n_docs();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m.n_terms()];
    for &(t, d, x) in m.entries() {
        rows[t].push((d, x));
    }
    let mut d_mat = Array2::zeros((n, n));
    let mut b_mat = Array2::zeros((n, n));
    for row in &rows {
        let Some(&(first, _)) = row.first() else {
            continue;
        };
        let inside = row.iter().all(|&(d, _)| assignment[d] == assignment[first]);
        let target = if inside { &mut d_mat } else { &mut b_mat };
        for &(i, xi) in row {
            for &(j, xj) in row {
                target[[i, j]] += xi * xj;
            }
        }
    }
    Ok((d_mat, b_mat))
}
