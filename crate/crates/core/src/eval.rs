//! Retrieval over full, truncated and leading-vector representations.
//!
//! Queries are folded into the reduced space with `v_q(h) = <u_h, q> / sigma_h`,
//! so folding a training column gives back its row of `V`. Documents and
//! queries are compared by cosine; evaluation uses interpolated precision on
//! a fixed recall grid.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::Serialize;

use crate::corpus::{TermDocumentMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::spectral::{SvdTriplets, TripletSelection};

/// Cosines at or below this count as "not retrieved".
pub const RETRIEVAL_TOL: f64 = 1e-8;

/// Cosines between columns, with the indices of zero columns (whose row and
/// column are left at 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosineMatrix {
    pub values: Array2<f64>,
    pub zero_columns: Vec<usize>,
}

pub fn cosine_matrix(rep: &Array2<f64>) -> CosineMatrix {
    cosine_matrix_with(rep, Execution::default())
}

pub fn cosine_matrix_with(rep: &Array2<f64>, exec: Execution) -> CosineMatrix {
    let n = rep.ncols();
    let norms: Vec<f64> = rep
        .columns()
        .into_iter()
        .map(|c| c.dot(&c).sqrt())
        .collect();
    let rows = exec.map_range(n, |i| {
        let ci = rep.column(i);
        (0..n)
            .map(|j| {
                if norms[i] == 0.0 || norms[j] == 0.0 {
                    0.0
                } else if i == j {
                    1.0
                } else {
                    clamp_cos(ci.dot(&rep.column(j)) / (norms[i] * norms[j]))
                }
            })
            .collect::<Vec<f64>>()
    });
    let mut values = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        values.row_mut(i).assign(&Array1::from(row));
    }
    // exact symmetry regardless of summation order
    for i in 0..n {
        for j in (i + 1)..n {
            values[[j, i]] = values[[i, j]];
        }
    }
    CosineMatrix {
        values,
        zero_columns: (0..n).filter(|&i| norms[i] == 0.0).collect(),
    }
}

fn clamp_cos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Sparse query over the corpus vocabulary.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct QueryVector {
    weights: BTreeMap<usize, f64>,
    dropped: usize,
}

impl QueryVector {
    /// Counts each known term once per occurrence; unknown terms are dropped
    /// and counted.
    pub fn from_terms<S: AsRef<str>>(terms: &[S], vocab: &Vocabulary) -> Self {
        let mut q = QueryVector::default();
        for t in terms {
            match vocab.id(t.as_ref()) {
                Some(id) => *q.weights.entry(id).or_insert(0.0) += 1.0,
                None => q.dropped += 1,
            }
        }
        q
    }

    pub fn from_weights(pairs: &[(usize, f64)], n_terms: usize) -> Result<Self> {
        let mut q = QueryVector::default();
        for &(t, w) in pairs {
            if t >= n_terms {
                return Err(Error::IndexOutOfRange {
                    what: "term",
                    index: t + 1,
                    limit: n_terms,
                });
            }
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "query weight {w} is not finite"
                )));
            }
            *q.weights.entry(t).or_insert(0.0) += w;
        }
        q.weights.retain(|_, w| *w != 0.0);
        Ok(q)
    }

    /// Same transform as the corpus weighting: `w -> ln(1 + w) * g[t]`.
    pub fn log_entropy_weighted(&self, global: &[f64]) -> QueryVector {
        let weights = self
            .weights
            .iter()
            .map(|(&t, &w)| (t, (1.0 + w).ln() * global.get(t).copied().unwrap_or(0.0)))
            .filter(|(_, w)| *w != 0.0)
            .collect();
        QueryVector {
            weights,
            dropped: self.dropped,
        }
    }

    pub fn weights(&self) -> &BTreeMap<usize, f64> {
        &self.weights
    }

    /// Out-of-vocabulary terms seen while building.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_dense(&self, n_terms: usize) -> Array1<f64> {
        let mut q = Array1::zeros(n_terms);
        for (&t, &w) in &self.weights {
            if t < n_terms {
                q[t] = w;
            }
        }
        q
    }

    fn dot_column(&self, col: ArrayView1<f64>) -> f64 {
        self.weights.iter().map(|(&t, &w)| w * col[t]).sum()
    }
}

/// `<u_h, q> / sigma_h` for each selected triplet, in selection order.
pub fn fold_query(q: &QueryVector, s: &SvdTriplets, sel: &TripletSelection) -> Result<Array1<f64>> {
    if q.is_empty() {
        return Err(Error::EmptyQuery);
    }
    check_query(q, s.n_terms())?;
    check_selection(sel, s)?;
    Ok(Array1::from_iter(
        sel.zero_based()
            .into_iter()
            .map(|h| q.dot_column(s.left(h)) / s.sigma()[h]),
    ))
}

fn check_query(q: &QueryVector, n_terms: usize) -> Result<()> {
    match q.weights.keys().next_back() {
        Some(&t) if t >= n_terms => Err(Error::IndexOutOfRange {
            what: "term",
            index: t + 1,
            limit: n_terms,
        }),
        _ => Ok(()),
    }
}

fn check_selection(sel: &TripletSelection, s: &SvdTriplets) -> Result<()> {
    if sel.is_empty() {
        return Err(Error::InvalidArgument("empty triplet selection".into()));
    }
    sel.check(s.rank())
}

/// How reduced-space coordinates are scaled before taking cosines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `sigma_h v_h(i)`: cosines equal those between columns of the
    /// truncated reconstruction.
    #[default]
    ScaledV,
    /// Raw rows of `V`.
    UnscaledV,
}

/// Document representation prepared for repeated query ranking.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    kind: IndexKind,
    /// docs x dims
    docs: Array2<f64>,
    norms: Vec<f64>,
}

#[derive(Debug, Clone)]
enum IndexKind {
    /// Documents are columns in term space.
    TermSpace { n_terms: usize },
    /// Query coordinates are `<u_h, q> * scale[h]`.
    Reduced { u: Array2<f64>, scale: Vec<f64> },
}

impl RetrievalIndex {
    pub fn full(m: &TermDocumentMatrix) -> Self {
        RetrievalIndex::dense(&m.to_dense())
    }

    /// Columns of `rep` (terms x docs) as documents, e.g. a reconstruction.
    pub fn dense(rep: &Array2<f64>) -> Self {
        let docs = rep.t().to_owned();
        RetrievalIndex::new(
            IndexKind::TermSpace {
                n_terms: rep.nrows(),
            },
            docs,
        )
    }

    pub fn reduced(
        s: &SvdTriplets,
        sel: &TripletSelection,
        comparison: Comparison,
    ) -> Result<Self> {
        check_selection(sel, s)?;
        let idx = sel.zero_based();
        let u = s.u().select(Axis(1), &idx);
        let mut docs = s.v().select(Axis(1), &idx);
        let scale: Vec<f64> = match comparison {
            Comparison::ScaledV => {
                for (k, &h) in idx.iter().enumerate() {
                    docs.column_mut(k).mapv_inplace(|x| x * s.sigma()[h]);
                }
                vec![1.0; idx.len()]
            }
            Comparison::UnscaledV => idx.iter().map(|&h| 1.0 / s.sigma()[h]).collect(),
        };
        Ok(RetrievalIndex::new(IndexKind::Reduced { u, scale }, docs))
    }

    fn new(kind: IndexKind, docs: Array2<f64>) -> Self {
        let norms = docs.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
        RetrievalIndex { kind, docs, norms }
    }

    pub fn n_docs(&self) -> usize {
        self.docs.nrows()
    }

    pub fn n_terms(&self) -> usize {
        match &self.kind {
            IndexKind::TermSpace { n_terms } => *n_terms,
            IndexKind::Reduced { u, .. } => u.nrows(),
        }
    }

    /// Query coordinates in the index space.
    pub fn project(&self, q: &QueryVector) -> Result<Array1<f64>> {
        if q.is_empty() {
            return Err(Error::EmptyQuery);
        }
        check_query(q, self.n_terms())?;
        Ok(match &self.kind {
            IndexKind::TermSpace { n_terms } => q.to_dense(*n_terms),
            IndexKind::Reduced { u, scale } => Array1::from_iter(
                u.columns()
                    .into_iter()
                    .zip(scale)
                    .map(|(col, sc)| q.dot_column(col) * sc),
            ),
        })
    }

    /// Cosine of the query with every document, in document order.
    pub fn cosines(&self, q: &QueryVector) -> Result<Array1<f64>> {
        let x = self.project(q)?;
        let qn = x.dot(&x).sqrt();
        Ok(Array1::from_iter(
            self.docs
                .rows()
                .into_iter()
                .zip(&self.norms)
                .map(|(row, &dn)| {
                    if qn == 0.0 || dn == 0.0 {
                        0.0
                    } else {
                        clamp_cos(row.dot(&x) / (qn * dn))
                    }
                }),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ranked {
    pub doc: usize,
    pub cosine: f64,
}

/// Every document by descending cosine, ties by ascending id.
pub fn rank_documents(q: &QueryVector, index: &RetrievalIndex) -> Result<Vec<Ranked>> {
    let cos = index.cosines(q)?;
    let mut out: Vec<Ranked> = cos
        .iter()
        .enumerate()
        .map(|(doc, &cosine)| Ranked { doc, cosine })
        .collect();
    out.sort_by(|a, b| b.cosine.total_cmp(&a.cosine).then(a.doc.cmp(&b.doc)));
    Ok(out)
}

/// Document ids with cosine above [`RETRIEVAL_TOL`], in rank order.
pub fn retrieved(ranking: &[Ranked]) -> Vec<usize> {
    ranking
        .iter()
        .filter(|r| r.cosine > RETRIEVAL_TOL)
        .map(|r| r.doc)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallGrid {
    levels: Vec<f64>,
}

impl Default for RecallGrid {
    /// 0.15, 0.20, ..., 0.95.
    fn default() -> Self {
        RecallGrid {
            levels: (0..17).map(|i| f64::from(15 + 5 * i) / 100.0).collect(),
        }
    }
}

impl RecallGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("recall grid is empty".into()));
        }
        if levels.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidArgument(
                "recall levels must be in (0, 1]".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("recall levels must increase".into()));
        }
        Ok(RecallGrid { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionRecallCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub mean_precision: f64,
}

/// Interpolated precision of a ranked list: at each level, the best precision
/// at any cutoff whose recall reaches the level (0 when none does).
pub fn precision_recall(
    ranked: &[usize],
    relevant: &BTreeSet<usize>,
    grid: &RecallGrid,
) -> Result<PrecisionRecallCurve> {
    if relevant.is_empty() {
        return Err(Error::NoRelevantDocs);
    }
    let total = relevant.len() as f64;
    let mut points = Vec::with_capacity(ranked.len());
    let mut hits = 0usize;
    for (k, d) in ranked.iter().enumerate() {
        if relevant.contains(d) {
            hits += 1;
        }
        points.push((hits as f64 / total, hits as f64 / (k + 1) as f64));
    }
    // best precision from each cutoff onward
    let mut best_after = vec![0.0f64; points.len() + 1];
    for k in (0..points.len()).rev() {
        best_after[k] = best_after[k + 1].max(points[k].1);
    }
    let precision: Vec<f64> = grid
        .levels()
        .iter()
        .map(|&level| {
            points
                .iter()
                .position(|&(r, _)| r >= level - 1e-12)
                .map_or(0.0, |k| best_after[k])
        })
        .collect();
    let mean_precision = precision.iter().sum::<f64>() / precision.len() as f64;
    Ok(PrecisionRecallCurve {
        recall: grid.levels().to_vec(),
        precision,
        mean_precision,
    })
}

/// Graded judgments per query; grade >= 1 counts as relevant.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RelevanceJudgments {
    grades: BTreeMap<String, BTreeMap<usize, u8>>,
}

impl RelevanceJudgments {
    pub fn new() -> Self {
        RelevanceJudgments::default()
    }

    pub fn insert(&mut self, qid: &str, doc: usize, grade: u8) -> Result<()> {
        if grade > 2 {
            return Err(Error::InvalidArgument(format!(
                "grade {grade} not in 0..=2"
            )));
        }
        self.grades
            .entry(qid.to_string())
            .or_default()
            .insert(doc, grade);
        Ok(())
    }

    pub fn grade(&self, qid: &str, doc: usize) -> Option<u8> {
        self.grades.get(qid)?.get(&doc).copied()
    }

    pub fn relevant(&self, qid: &str) -> BTreeSet<usize> {
        self.grades
            .get(qid)
            .map(|g| g.iter().filter(|(_, &x)| x >= 1).map(|(&d, _)| d).collect())
            .unwrap_or_default()
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.grades.keys().map(String::as_str)
    }

    pub fn check_docs(&self, n_docs: usize) -> Result<()> {
        for g in self.grades.values() {
            if let Some(&d) = g.keys().next_back().filter(|&&d| d >= n_docs) {
                return Err(Error::IndexOutOfRange {
                    what: "document",
                    index: d + 1,
                    limit: n_docs,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub qid: String,
    pub curve: PrecisionRecallCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSummary {
    pub per_query: Vec<QueryResult>,
    /// Queries left out: no in-vocabulary term or no relevant document.
    pub skipped: Vec<String>,
    pub recall: Vec<f64>,
    /// Mean over evaluated queries, per recall level.
    pub precision: Vec<f64>,
    pub mean_precision: f64,
}

/// Ranks every query against `index` and averages the interpolated curves.
/// Results keep query order regardless of `exec`.
pub fn evaluate(
    queries: &[(String, QueryVector)],
    judgments: &RelevanceJudgments,
    index: &RetrievalIndex,
    grid: &RecallGrid,
    exec: Execution,
) -> Result<EvaluationSummary> {
    judgments.check_docs(index.n_docs())?;
    let results = exec.map_slice(queries, |(qid, q)| -> Result<Option<QueryResult>> {
        let relevant = judgments.relevant(qid);
        if relevant.is_empty() || q.is_empty() {
            return Ok(None);
        }
        let ranking = rank_documents(q, index)?;
        let curve = precision_recall(&retrieved(&ranking), &relevant, grid)?;
        Ok(Some(QueryResult {
            qid: qid.clone(),
            curve,
        }))
    });
    let mut per_query = Vec::new();
    let mut skipped = Vec::new();
    for ((qid, _), r) in queries.iter().zip(results) {
        match r? {
            Some(res) => per_query.push(res),
            None => skipped.push(qid.clone()),
        }
    }
    if per_query.is_empty() {
        return Err(Error::NoRelevantDocs);
    }
    let n = per_query.len() as f64;
    let precision: Vec<f64> = (0..grid.levels().len())
        .map(|k| per_query.iter().map(|r| r.curve.precision[k]).sum::<f64>() / n)
        .collect();
    let mean_precision = precision.iter().sum::<f64>() / precision.len() as f64;
    Ok(EvaluationSummary {
        per_query,
        skipped,
        recall: grid.levels().to_vec(),
        precision,
        mean_precision,
    })
}
