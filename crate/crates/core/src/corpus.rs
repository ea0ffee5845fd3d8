//! Corpus preprocessing: tokenization, the term-document matrix, log-entropy
//! weighting, per-word partition entropy and frequency-preserving shuffles.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Ordered list of normalized terms; position is the 0-based row id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from an ordered term list, rejecting duplicates.
    pub fn from_terms<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for term in terms {
            let term = term.into();
            if vocab.index.contains_key(&term) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate vocabulary term {term:?}"
                )));
            }
            vocab.insert(term);
        }
        Ok(vocab)
    }

    /// Returns the id of `term`, appending it if new.
    pub fn insert(&mut self, term: String) -> usize {
        if let Some(&id) = self.index.get(&term) {
            return id;
        }
        let id = self.terms.len();
        self.index.insert(term.clone(), id);
        self.terms.push(term);
        id
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Sparse nonnegative term-document matrix (rows = terms, columns = docs).
///
/// Entries are kept sorted by `(term, doc)` with no duplicates and no stored
/// zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocumentMatrix {
    n_terms: usize,
    n_docs: usize,
    entries: Vec<(usize, usize, f64)>,
    doc_labels: Option<Vec<String>>,
}

impl TermDocumentMatrix {
    pub fn from_triplets(
        n_terms: usize,
        n_docs: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(t, d, v) in &entries {
            if t >= n_terms {
                return Err(Error::IndexOutOfRange {
                    what: "term",
                    index: t + 1,
                    limit: n_terms,
                });
            }
            if d >= n_docs {
                return Err(Error::IndexOutOfRange {
                    what: "document",
                    index: d + 1,
                    limit: n_docs,
                });
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "entry ({}, {}) has value {v}; values must be finite and >= 0",
                    t + 1,
                    d + 1
                )));
            }
        }
        entries.retain(|e| e.2 != 0.0);
        entries.sort_by_key(|e| (e.0, e.1));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::InvalidArgument(format!(
                "duplicate entry for term {} document {}",
                w[0].0 + 1,
                w[0].1 + 1
            )));
        }
        Ok(Self {
            n_terms,
            n_docs,
            entries,
            doc_labels: None,
        })
    }

    /// Sparse copy of a dense nonnegative matrix.
    pub fn from_dense(dense: &Array2<f64>) -> Result<Self> {
        let (m, n) = dense.dim();
        let entries = dense
            .indexed_iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|((t, d), &v)| (t, d, v))
            .collect();
        Self::from_triplets(m, n, entries)
    }

    pub fn with_doc_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_docs {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} documents",
                labels.len(),
                self.n_docs
            )));
        }
        self.doc_labels = Some(labels);
        Ok(self)
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn doc_labels(&self) -> Option<&[String]> {
        self.doc_labels.as_deref()
    }

    pub fn get(&self, term: usize, doc: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(term, doc), |e| (e.0, e.1))
            .map(|i| self.entries[i].2)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n_terms, self.n_docs));
        for &(t, d, v) in &self.entries {
            a[[t, d]] = v;
        }
        a
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n_terms];
        for &(t, _, v) in &self.entries {
            s[t] += v;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n_docs];
        for &(_, d, v) in &self.entries {
            s[d] += v;
        }
        s
    }

    /// Sparse columns: for each document, its `(term, value)` pairs.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n_docs];
        for &(t, d, v) in &self.entries {
            cols[d].push((t, v));
        }
        cols
    }

    /// Documents without any nonzero entry.
    pub fn empty_docs(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_docs];
        for &(_, d, _) in &self.entries {
            seen[d] = true;
        }
        (0..self.n_docs).filter(|&d| !seen[d]).collect()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    /// True when every stored value is a whole number.
    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|e| e.2.fract() == 0.0)
    }

    /// Restriction to the given terms and documents, re-indexed in the order
    /// given.
    pub fn submatrix(&self, terms: &[usize], docs: &[usize]) -> Result<Self> {
        let mut term_pos = vec![None; self.n_terms];
        for (k, &t) in terms.iter().enumerate() {
            *term_pos.get_mut(t).ok_or(Error::IndexOutOfRange {
                what: "term",
                index: t + 1,
                limit: self.n_terms,
            })? = Some(k);
        }
        let mut doc_pos = vec![None; self.n_docs];
        for (k, &d) in docs.iter().enumerate() {
            *doc_pos.get_mut(d).ok_or(Error::IndexOutOfRange {
                what: "document",
                index: d + 1,
                limit: self.n_docs,
            })? = Some(k);
        }
        let entries = self
            .entries
            .iter()
            .filter_map(|&(t, d, v)| Some((term_pos[t]?, doc_pos[d]?, v)))
            .collect();
        Self::from_triplets(terms.len(), docs.len(), entries)
    }
}

/// Disjoint sets of 0-based document ids, one per topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicPartition {
    topics: Vec<BTreeSet<usize>>,
    names: Vec<String>,
}

impl TopicPartition {
    /// Unnamed topics get the names `topic1`, `topic2`, ...
    pub fn new(topics: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<Self> {
        let names = match names {
            Some(n) if n.len() != topics.len() => {
                return Err(Error::InvalidPartition(format!(
                    "{} names for {} topics",
                    n.len(),
                    topics.len()
                )))
            }
            Some(n) => n,
            None => (1..=topics.len()).map(|i| format!("topic{i}")).collect(),
        };
        let mut seen = BTreeSet::new();
        let mut sets = Vec::with_capacity(topics.len());
        for (k, topic) in topics.into_iter().enumerate() {
            let set: BTreeSet<usize> = topic.into_iter().collect();
            for &d in &set {
                if !seen.insert(d) {
                    return Err(Error::InvalidPartition(format!(
                        "document {} appears in more than one topic (second: {})",
                        d + 1,
                        names[k]
                    )));
                }
            }
            sets.push(set);
        }
        Ok(Self {
            topics: sets,
            names,
        })
    }

    pub fn topics(&self) -> &[BTreeSet<usize>] {
        &self.topics
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Checks every id is below `n_docs`.
    pub fn check_docs(&self, n_docs: usize) -> Result<()> {
        for topic in &self.topics {
            if let Some(&d) = topic.iter().next_back().filter(|&&d| d >= n_docs) {
                return Err(Error::IndexOutOfRange {
                    what: "document",
                    index: d + 1,
                    limit: n_docs,
                });
            }
        }
        Ok(())
    }

    /// Topic index per document, `None` for documents outside every topic.
    pub fn assignment(&self, n_docs: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_docs];
        for (k, topic) in self.topics.iter().enumerate() {
            for &d in topic {
                if d < n_docs {
                    out[d] = Some(k);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub stoplist: BTreeSet<String>,
    /// Terms whose corpus total is below this are dropped.
    pub min_total_frequency: usize,
    pub singularization: BTreeMap<String, String>,
    pub lowercase: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            stoplist: BTreeSet::new(),
            min_total_frequency: 3,
            singularization: BTreeMap::new(),
            lowercase: true,
        }
    }
}

impl CorpusConfig {
    /// Stoplist and singular forms used for the bundled example corpus.
    pub fn example_titles() -> Self {
        let stop = [
            "a", "and", "by", "for", "from", "in", "non", "of", "on", "the",
        ];
        let singular = [
            ("features", "feature"),
            ("networks", "network"),
            ("memories", "memory"),
        ];
        Self {
            stoplist: stop.iter().map(|s| s.to_string()).collect(),
            min_total_frequency: 3,
            singularization: singular
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            lowercase: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_total_frequency < 1 {
            return Err(Error::InvalidArgument(
                "min_total_frequency must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Splits on every non-alphanumeric character (hyphens included), then
/// lowercases, drops stop words and maps plural forms.
pub fn tokenize(text: &str, config: &CorpusConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if config.lowercase {
                t.to_lowercase()
            } else {
                t.to_string()
            }
        })
        .filter(|t| !config.stoplist.contains(t))
        .map(|t| config.singularization.get(&t).cloned().unwrap_or(t))
        .collect()
}

/// Counts tokens per document. Terms with corpus total below
/// `min_total_frequency` are dropped; the vocabulary keeps first-appearance
/// order of the surviving terms. Documents left without tokens stay as zero
/// columns (see [`TermDocumentMatrix::empty_docs`]).
pub fn build_matrix<S: AsRef<str>>(
    docs: &[S],
    config: &CorpusConfig,
) -> Result<(TermDocumentMatrix, Vocabulary)> {
    config.validate()?;
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut order = Vocabulary::new();
    let mut counts: Vec<BTreeMap<usize, u64>> = Vec::with_capacity(docs.len());
    for doc in docs {
        let mut c = BTreeMap::new();
        for tok in tokenize(doc.as_ref(), config) {
            *c.entry(order.insert(tok)).or_insert(0u64) += 1;
        }
        counts.push(c);
    }
    let mut totals = vec![0u64; order.len()];
    for c in &counts {
        for (&t, &n) in c {
            totals[t] += n;
        }
    }
    let mut vocab = Vocabulary::new();
    let mut remap = vec![None; order.len()];
    for (t, term) in order.terms().iter().enumerate() {
        if totals[t] >= config.min_total_frequency as u64 {
            remap[t] = Some(vocab.insert(term.clone()));
        }
    }
    if vocab.is_empty() {
        return Err(Error::AllTermsFiltered {
            min_total_frequency: config.min_total_frequency,
        });
    }
    let entries = counts
        .iter()
        .enumerate()
        .flat_map(|(d, c)| {
            let remap = &remap;
            c.iter()
                .filter_map(move |(&t, &n)| remap[t].map(|row| (row, d, n as f64)))
        })
        .collect();
    let m = TermDocumentMatrix::from_triplets(vocab.len(), docs.len(), entries)?;
    Ok((m, vocab))
}

/// Global log-entropy weights `g_j = 1 + sum_i p_ij ln(p_ij) / ln(n_docs)`
/// with `p_ij = a_ij / sum_i a_ij`. Terms without occurrences get 0.
pub fn log_entropy_global_weights(m: &TermDocumentMatrix) -> Vec<f64> {
    let n = m.n_docs();
    let row_sums = m.row_sums();
    let mut entropy = vec![0.0; m.n_terms()];
    for &(t, _, v) in m.entries() {
        let p = v / row_sums[t];
        entropy[t] += p * p.ln();
    }
    // with a single document the normalized entropy is 0/0; treat the
    // global weight as 1
    let log_n = if n > 1 {
        (n as f64).ln()
    } else {
        f64::INFINITY
    };
    entropy
        .iter()
        .zip(&row_sums)
        .map(|(h, &total)| if total > 0.0 { 1.0 + h / log_n } else { 0.0 })
        // rounding leaves ~1e-16 for perfectly uniform rows; snap those to 0
        .map(|g| if g < 1e-12 { 0.0 } else { g })
        .collect()
}

/// Log-entropy weighting: `a_ij -> ln(1 + a_ij) * g_j`, see
/// [`log_entropy_global_weights`].
pub fn apply_log_entropy_weighting(m: &TermDocumentMatrix) -> TermDocumentMatrix {
    let global = log_entropy_global_weights(m);
    let entries = m
        .entries()
        .iter()
        .map(|&(t, d, v)| (t, d, (1.0 + v).ln() * global[t]))
        .collect();
    TermDocumentMatrix::from_triplets(m.n_terms(), m.n_docs(), entries)
        .expect("weighting keeps indices and nonnegativity")
}

/// Normalized entropy of one term's distribution over the partitions:
/// `S = -1/ln(P) * sum_j p_j ln p_j` with `p_j` proportional to
/// `n_j / N_j` (term count in partition j over all tokens in partition j).
pub fn word_partition_entropy(
    m: &TermDocumentMatrix,
    partition: &TopicPartition,
    term: usize,
) -> Result<f64> {
    if term >= m.n_terms() {
        return Err(Error::IndexOutOfRange {
            what: "term",
            index: term + 1,
            limit: m.n_terms(),
        });
    }
    let p_count = partition.len();
    if p_count < 2 {
        return Err(Error::InvalidPartition(
            "entropy needs at least two partitions".into(),
        ));
    }
    partition.check_docs(m.n_docs())?;
    let assign = partition.assignment(m.n_docs());
    let mut sizes = vec![0.0; p_count];
    let mut counts = vec![0.0; p_count];
    let mut total = 0.0;
    for &(t, d, v) in m.entries() {
        if let Some(k) = assign[d] {
            sizes[k] += v;
            if t == term {
                counts[k] += v;
            }
        }
        if t == term {
            total += v;
            if assign[d].is_none() {
                return Err(Error::InvalidPartition(format!(
                    "term {} occurs in document {} outside every partition",
                    term + 1,
                    d + 1
                )));
            }
        }
    }
    if total == 0.0 {
        return Err(Error::TermAbsent { term: term + 1 });
    }
    let ratios: Vec<f64> = counts
        .iter()
        .zip(&sizes)
        .map(|(&n, &size)| if n > 0.0 { n / size } else { 0.0 })
        .collect();
    let norm: f64 = ratios.iter().sum();
    let h: f64 = ratios
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| {
            let p = r / norm;
            -p * p.ln()
        })
        .sum();
    // + 0.0 turns a negative zero into zero
    Ok((h / (p_count as f64).ln()).clamp(0.0, 1.0) + 0.0)
}

/// Entropy of every term with a nonzero total, in term order.
pub fn all_word_entropies(m: &TermDocumentMatrix, partition: &TopicPartition) -> Result<Vec<f64>> {
    let sums = m.row_sums();
    (0..m.n_terms())
        .filter(|&t| sums[t] > 0.0)
        .map(|t| word_partition_entropy(m, partition, t))
        .collect()
}

/// Reassigns every token occurrence to a random document, keeping each term's
/// total. One token is first placed in each document (documents visited in a
/// random order) so no column ends up empty; the rest land uniformly.
pub fn shuffle_preserving_totals(m: &TermDocumentMatrix, seed: u64) -> Result<TermDocumentMatrix> {
    if !m.is_integral() {
        return Err(Error::InvalidArgument(
            "shuffling needs integer counts (shuffle before weighting)".into(),
        ));
    }
    let n_docs = m.n_docs();
    let mut tokens: Vec<usize> = Vec::new();
    for &(t, _, v) in m.entries() {
        tokens.extend(std::iter::repeat_n(t, v as usize));
    }
    if tokens.len() < n_docs || n_docs == 0 {
        return Err(Error::Infeasible {
            tokens: tokens.len() as u64,
            docs: n_docs,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tokens.shuffle(&mut rng);
    let mut docs: Vec<usize> = (0..n_docs).collect();
    docs.shuffle(&mut rng);
    let mut counts: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (k, &t) in tokens.iter().enumerate() {
        let d = if k < n_docs {
            docs[k]
        } else {
            rng.random_range(0..n_docs)
        };
        *counts.entry((t, d)).or_insert(0.0) += 1.0;
    }
    let entries = counts.into_iter().map(|((t, d), v)| (t, d, v)).collect();
    TermDocumentMatrix::from_triplets(m.n_terms(), n_docs, entries)
}

/// One shuffle per seed, in seed order.
pub fn shuffle_ensemble(
    m: &TermDocumentMatrix,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<TermDocumentMatrix>> {
    exec.map_slice(seeds, |&s| shuffle_preserving_totals(m, s))
        .into_iter()
        .collect()
}
