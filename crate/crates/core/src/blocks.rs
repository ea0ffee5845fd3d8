//! Block structure of the document graph.
//!
//! For the symmetric nonnegative `A^T A`, reducibility is the same as
//! decomposability, and every irreducible block owns exactly one
//! sign-homogeneous right singular vector (its Perron vector) whose support
//! is the block. [`detect_blocks`] reads the blocks off the singular vectors;
//! [`connected_components`] is the exact graph oracle.

use std::collections::{BTreeSet, VecDeque};

use ndarray::{Array2, ArrayView1};
use serde::Serialize;
use serde_json::json;

use crate::corpus::TermDocumentMatrix;
use crate::error::{Error, Result};
use crate::spectral::{gram_correlation, SvdTriplets, DEGENERACY_GAP};

/// Entries at or below this fraction of the vector's largest magnitude are
/// treated as true zeros.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;
/// Nonzero entries at or below this fraction of the largest magnitude are
/// reported as pseudo-zeros.
pub const DEFAULT_PSEUDO_TOL: f64 = 0.3;

/// A connected piece of the bipartite term-document graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub docs: BTreeSet<usize>,
    pub terms: BTreeSet<usize>,
}

/// Breadth-first components of the graph with an edge `term -- doc` whenever
/// `a[term, doc] > 0`. Documents without entries are left out. Components are
/// ordered by their smallest document id.
pub fn connected_components(m: &TermDocumentMatrix) -> Vec<Component> {
    let mut doc_terms = vec![Vec::new(); m.n_docs()];
    let mut term_docs = vec![Vec::new(); m.n_terms()];
    for &(t, d, _) in m.entries() {
        doc_terms[d].push(t);
        term_docs[t].push(d);
    }
    let mut doc_seen = vec![false; m.n_docs()];
    let mut term_seen = vec![false; m.n_terms()];
    let mut out = Vec::new();
    for start in 0..m.n_docs() {
        if doc_seen[start] || doc_terms[start].is_empty() {
            continue;
        }
        let mut comp = Component {
            docs: BTreeSet::new(),
            terms: BTreeSet::new(),
        };
        let mut queue = VecDeque::from([start]);
        doc_seen[start] = true;
        while let Some(d) = queue.pop_front() {
            comp.docs.insert(d);
            for &t in &doc_terms[d] {
                if term_seen[t] {
                    continue;
                }
                term_seen[t] = true;
                comp.terms.insert(t);
                for &d2 in &term_docs[t] {
                    if !doc_seen[d2] {
                        doc_seen[d2] = true;
                        queue.push_back(d2);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Support and sign pattern of a singular vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorProfile {
    /// Entries with `|v_i| > zero_tol * max|v|`.
    pub support: BTreeSet<usize>,
    /// All support entries share one sign.
    pub sign_homogeneous: bool,
    /// Support entries with `|v_i| <= pseudo_tol * max|v|`.
    pub pseudo_zeros: BTreeSet<usize>,
    pub max_abs: f64,
}

impl VectorProfile {
    /// Support without the pseudo-zeros.
    pub fn core(&self) -> BTreeSet<usize> {
        self.support
            .difference(&self.pseudo_zeros)
            .copied()
            .collect()
    }
}

pub fn classify_vector(
    v: ArrayView1<f64>,
    zero_tol: f64,
    pseudo_tol: f64,
) -> Result<VectorProfile> {
    check_tolerances(zero_tol, pseudo_tol)?;
    let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max_abs == 0.0 {
        return Err(Error::ZeroVector);
    }
    let zero = zero_tol * max_abs;
    let pseudo = pseudo_tol * max_abs;
    let mut support = BTreeSet::new();
    let mut pseudo_zeros = BTreeSet::new();
    let mut pos = false;
    let mut neg = false;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() <= zero {
            continue;
        }
        support.insert(i);
        if x > 0.0 {
            pos = true;
        } else {
            neg = true;
        }
        if x.abs() <= pseudo {
            pseudo_zeros.insert(i);
        }
    }
    Ok(VectorProfile {
        support,
        sign_homogeneous: !(pos && neg),
        pseudo_zeros,
        max_abs,
    })
}

fn check_tolerances(zero_tol: f64, pseudo_tol: f64) -> Result<()> {
    if !(zero_tol > 0.0 && zero_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "zero_tol must be in (0, 1), got {zero_tol}"
        )));
    }
    if !(pseudo_tol >= zero_tol && pseudo_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "pseudo_tol must be in [zero_tol, 1), got {pseudo_tol}"
        )));
    }
    Ok(())
}

/// One detected block and its leading (Perron) singular triplet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub docs: BTreeSet<usize>,
    /// Support of the paired left singular vector.
    pub terms: BTreeSet<usize>,
    /// 1-based triplet index.
    pub leading: usize,
    pub sigma: f64,
    pub pseudo_zeros: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    /// In scan order (descending sigma of the leading vector).
    pub blocks: Vec<Block>,
    /// The leading supports partition every non-isolated document.
    pub exact: bool,
    /// Non-isolated documents not claimed by any leading vector.
    pub uncovered: BTreeSet<usize>,
    pub zero_tol: f64,
    pub pseudo_tol: f64,
}

impl BlockReport {
    pub fn leading_indices(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.leading).collect()
    }

    pub fn doc_sets(&self) -> Vec<BTreeSet<usize>> {
        self.blocks.iter().map(|b| b.docs.clone()).collect()
    }

    /// Block index per document, `None` when uncovered or isolated.
    pub fn assignment(&self, n_docs: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_docs];
        for (k, b) in self.blocks.iter().enumerate() {
            for &d in &b.docs {
                if d < n_docs {
                    out[d] = Some(k);
                }
            }
        }
        out
    }

    /// JSON view with 1-based ids.
    pub fn to_json(&self) -> serde_json::Value {
        let one = |s: &BTreeSet<usize>| s.iter().map(|i| i + 1).collect::<Vec<_>>();
        json!({
            "components": self.blocks.iter().map(|b| one(&b.docs)).collect::<Vec<_>>(),
            "terms": self.blocks.iter().map(|b| one(&b.terms)).collect::<Vec<_>>(),
            "leading": self.leading_indices(),
            "sigma": self.blocks.iter().map(|b| b.sigma).collect::<Vec<_>>(),
            "pseudo_zeros": self.blocks.iter().map(|b| one(&b.pseudo_zeros)).collect::<Vec<_>>(),
            "exact": self.exact,
            "uncovered": one(&self.uncovered),
            "zero_tol": self.zero_tol,
            "pseudo_tol": self.pseudo_tol,
        })
    }
}

/// Scans right singular vectors in sigma order and keeps every
/// sign-homogeneous vector whose support avoids the documents already
/// claimed. Each kept vector leads one block.
pub fn detect_blocks(s: &SvdTriplets, zero_tol: f64, pseudo_tol: f64) -> Result<BlockReport> {
    check_tolerances(zero_tol, pseudo_tol)?;
    let clusters = s.degenerate_clusters();
    let mut claimed = BTreeSet::new();
    let mut blocks: Vec<Block> = Vec::new();
    for h in 0..s.rank() {
        let profile = classify_vector(s.right(h), zero_tol, pseudo_tol)?;
        if !profile.sign_homogeneous || !profile.support.is_disjoint(&claimed) {
            continue;
        }
        if let Some(cluster) = clusters.iter().find(|c| c.contains(&h)) {
            let partner = cluster.iter().copied().find(|&g| g != h).unwrap_or(h);
            return Err(Error::Degenerate {
                first: h.min(partner) + 1,
                second: h.max(partner) + 1,
                sigma: s.sigma()[h],
            });
        }
        let left = classify_vector(s.left(h), zero_tol, pseudo_tol)?;
        claimed.extend(profile.support.iter().copied());
        blocks.push(Block {
            docs: profile.support,
            terms: left.support,
            leading: h + 1,
            sigma: s.sigma()[h],
            pseudo_zeros: profile.pseudo_zeros,
        });
    }
    let uncovered: BTreeSet<usize> = non_isolated_docs(s, zero_tol)
        .difference(&claimed)
        .copied()
        .collect();
    Ok(BlockReport {
        exact: uncovered.is_empty(),
        blocks,
        uncovered,
        zero_tol,
        pseudo_tol,
    })
}

/// Documents with a nonzero row in `V` (i.e. a nonzero column in `A`).
fn non_isolated_docs(s: &SvdTriplets, zero_tol: f64) -> BTreeSet<usize> {
    (0..s.n_docs())
        .filter(|&i| s.v().row(i).iter().any(|x| x.abs() > zero_tol))
        .collect()
}

/// Consistency of the first right singular vector with graph connectivity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronDiagnostic {
    pub v1_strictly_positive: bool,
    pub sigma1_simple: bool,
    /// 0-based documents where `v1` is a true zero.
    pub v1_zero_docs: Vec<usize>,
    /// Graph components, isolated documents counted as their own component.
    pub n_components: usize,
    /// Positive `v1` with simple `sigma_1` implies one component.
    pub positive_implies_connected: bool,
    /// True zeros in `v1` imply more than one component.
    pub zeros_imply_disconnected: bool,
}

impl PerronDiagnostic {
    pub fn consistent(&self) -> bool {
        self.positive_implies_connected && self.zeros_imply_disconnected
    }
}

pub fn verify_perron(m: &TermDocumentMatrix, s: &SvdTriplets) -> PerronDiagnostic {
    verify_perron_with(m, s, DEFAULT_ZERO_TOL)
}

pub fn verify_perron_with(
    m: &TermDocumentMatrix,
    s: &SvdTriplets,
    zero_tol: f64,
) -> PerronDiagnostic {
    let v1 = s.right(0);
    let max = v1.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let v1_zero_docs: Vec<usize> = v1
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() <= zero_tol * max)
        .map(|(i, _)| i)
        .collect();
    let v1_strictly_positive = v1.iter().all(|&x| x > zero_tol * max);
    let sigma1_simple =
        s.rank() == 1 || s.sigma()[0] - s.sigma()[1] >= DEGENERACY_GAP * s.sigma()[0];
    let n_components = connected_components(m).len() + m.empty_docs().len();
    PerronDiagnostic {
        positive_implies_connected: !(v1_strictly_positive && sigma1_simple) || n_components == 1,
        zeros_imply_disconnected: v1_zero_docs.is_empty() || n_components > 1,
        v1_strictly_positive,
        sigma1_simple,
        v1_zero_docs,
        n_components,
    }
}

/// Simultaneous permutation grouping documents by component (isolated
/// documents last) and the largest `A^T A` entry left outside the diagonal
/// blocks after applying it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationCheck {
    pub permutation: Vec<usize>,
    pub block_sizes: Vec<usize>,
    pub max_off_block: f64,
}

impl PermutationCheck {
    pub fn is_block_diagonal(&self) -> bool {
        self.max_off_block == 0.0
    }
}

pub fn block_diagonal_permutation(m: &TermDocumentMatrix) -> PermutationCheck {
    let comps = connected_components(m);
    let gram = gram_correlation(m);
    let mut permutation = Vec::with_capacity(m.n_docs());
    let mut block_sizes = Vec::new();
    for c in &comps {
        permutation.extend(c.docs.iter().copied());
        block_sizes.push(c.docs.len());
    }
    for d in m.empty_docs() {
        permutation.push(d);
        block_sizes.push(1);
    }
    let mut block_of = vec![0; permutation.len()];
    let mut pos = 0;
    for (k, &size) in block_sizes.iter().enumerate() {
        for slot in &mut block_of[pos..pos + size] {
            *slot = k;
        }
        pos += size;
    }
    let permuted: Array2<f64> =
        Array2::from_shape_fn(gram.dim(), |(i, j)| gram[[permutation[i], permutation[j]]]);
    let mut max_off_block = 0.0f64;
    for ((i, j), &x) in permuted.indexed_iter() {
        if block_of[i] != block_of[j] {
            max_off_block = max_off_block.max(x.abs());
        }
    }
    PermutationCheck {
        permutation,
        block_sizes,
        max_off_block,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{svd, DEFAULT_TOL};
    use ndarray::array;

    #[test]
    fn single_entry_is_one_component() {
        let m = TermDocumentMatrix::from_triplets(2, 2, vec![(1, 0, 1.0)]).unwrap();
        let c = connected_components(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].docs, BTreeSet::from([0]));
        assert_eq!(c[0].terms, BTreeSet::from([1]));
    }

    #[test]
    fn profile_of_positive_vector() {
        let v = array![0.5, 0.6, 0.62];
        let p = classify_vector(v.view(), DEFAULT_ZERO_TOL, DEFAULT_PSEUDO_TOL).unwrap();
        assert_eq!(p.support, BTreeSet::from([0, 1, 2]));
        assert!(p.sign_homogeneous);
        assert!(p.pseudo_zeros.is_empty());
    }

    #[test]
    fn profile_errors() {
        let z = array![0.0, 0.0];
        assert_eq!(
            classify_vector(z.view(), 1e-8, 0.3).unwrap_err().name(),
            "ZeroVector"
        );
        let v = array![1.0];
        assert!(classify_vector(v.view(), 0.5, 0.1).is_err());
    }

    #[test]
    fn one_by_one_matrix() {
        let m = TermDocumentMatrix::from_triplets(1, 1, vec![(0, 0, 2.0)]).unwrap();
        let s = svd(&m, DEFAULT_TOL).unwrap();
        let r = detect_blocks(&s, DEFAULT_ZERO_TOL, DEFAULT_PSEUDO_TOL).unwrap();
        assert_eq!(r.leading_indices(), vec![1]);
        assert!(r.exact);
    }

    #[test]
    fn equal_blocks_are_degenerate() {
        let m = TermDocumentMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let s = svd(&m, DEFAULT_TOL).unwrap();
        let err = detect_blocks(&s, DEFAULT_ZERO_TOL, DEFAULT_PSEUDO_TOL).unwrap_err();
        assert_eq!(err.name(), "Degenerate");
    }

    #[test]
    fn all_ones_is_consistent() {
        let m = TermDocumentMatrix::from_dense(&Array2::ones((3, 3))).unwrap();
        let s = svd(&m, DEFAULT_TOL).unwrap();
        let d = verify_perron(&m, &s);
        assert!(d.v1_strictly_positive);
        assert_eq!(d.n_components, 1);
        assert!(d.consistent());
    }

    #[test]
    fn isolated_document_counts_as_component() {
        let m =
            TermDocumentMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)])
                .unwrap();
        let s = svd(&m, DEFAULT_TOL).unwrap();
        let d = verify_perron(&m, &s);
        assert_eq!(d.v1_zero_docs, vec![2]);
        assert_eq!(d.n_components, 2);
        assert!(d.consistent());
        let p = block_diagonal_permutation(&m);
        assert_eq!(p.permutation, vec![0, 1, 2]);
        assert!(p.is_block_diagonal());
    }
}
