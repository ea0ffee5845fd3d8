//! Choosing the singular triplets that carry each topic.
//!
//! Two per-topic scores over the right singular vectors: the share of the
//! topic's squared Frobenius norm each triplet carries, and the absolute dot
//! product of each vector with the topic's indicator vector.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::corpus::TopicPartition;
use crate::error::{Error, Result};
use crate::spectral::{SvdTriplets, TripletSelection};

/// Candidates inspected by [`SelectionPolicy::CrossCheck`].
pub const SHORTLIST: usize = 3;
/// Concentrations closer than this are treated as equal.
const CONCENTRATION_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicNorms {
    pub name: String,
    /// `sum_h contributions[h]`, which equals the squared norm of the
    /// topic's columns.
    pub frobenius_sq: f64,
    /// `sigma_h^2 * sum_{i in T} v_h(i)^2`, indexed by `h - 1`.
    pub contributions: Vec<f64>,
    /// 1-based triplet indices, largest contribution first.
    pub ranking: Vec<usize>,
}

impl TopicNorms {
    /// Fraction of `frobenius_sq` carried by the given 1-based triplets.
    pub fn cumulative_fraction(&self, indices: &[usize]) -> f64 {
        if self.frobenius_sq == 0.0 {
            return 0.0;
        }
        let set: BTreeSet<usize> = indices.iter().copied().collect();
        set.iter()
            .filter_map(|&h| self.contributions.get(h.wrapping_sub(1)))
            .sum::<f64>()
            / self.frobenius_sq
    }

    pub fn top(&self, n: usize) -> &[usize] {
        &self.ranking[..n.min(self.ranking.len())]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicNormReport {
    pub topics: Vec<TopicNorms>,
}

pub fn topic_norm_contributions(
    s: &SvdTriplets,
    partition: &TopicPartition,
) -> Result<TopicNormReport> {
    check_partition(s, partition)?;
    let topics = partition
        .topics()
        .iter()
        .zip(partition.names())
        .map(|(docs, name)| {
            let contributions: Vec<f64> = (0..s.rank())
                .map(|h| {
                    let v = s.right(h);
                    let sg = s.sigma()[h];
                    sg * sg * docs.iter().map(|&i| v[i] * v[i]).sum::<f64>()
                })
                .collect();
            TopicNorms {
                name: name.clone(),
                frobenius_sq: contributions.iter().sum(),
                ranking: rank_desc(&contributions),
                contributions,
            }
        })
        .collect();
    Ok(TopicNormReport { topics })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicScores {
    pub name: String,
    /// `|sum_{i in T} v_h(i)|`, indexed by `h - 1`.
    pub scores: Vec<f64>,
    /// Best `top_n` 1-based triplet indices with their scores.
    pub ranked: Vec<(usize, f64)>,
}

pub fn indicator_dot_products(
    s: &SvdTriplets,
    partition: &TopicPartition,
    top_n: usize,
) -> Result<Vec<TopicScores>> {
    if top_n == 0 {
        return Err(Error::InvalidArgument("top_n must be at least 1".into()));
    }
    check_partition(s, partition)?;
    Ok(partition
        .topics()
        .iter()
        .zip(partition.names())
        .map(|(docs, name)| {
            let scores: Vec<f64> = (0..s.rank())
                .map(|h| {
                    let v = s.right(h);
                    docs.iter().map(|&i| v[i]).sum::<f64>().abs()
                })
                .collect();
            let ranked = rank_desc(&scores)
                .into_iter()
                .take(top_n)
                .map(|h| (h, scores[h - 1]))
                .collect();
            TopicScores {
                name: name.clone(),
                scores,
                ranked,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Highest indicator dot product.
    #[default]
    DotProduct,
    /// Among the dot-product shortlist, the vector most concentrated on the
    /// topic (`sum_{i in T} v_h(i)^2`); ties go to the higher dot product,
    /// then the smaller index.
    CrossCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub index: usize,
    pub dot: f64,
    pub concentration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicChoice {
    pub name: String,
    pub chosen: usize,
    pub shortlist: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadingSelection {
    pub policy: SelectionPolicy,
    pub per_topic: Vec<TopicChoice>,
    pub selection: TripletSelection,
}

pub fn select_leading_vectors(
    s: &SvdTriplets,
    partition: &TopicPartition,
    policy: SelectionPolicy,
) -> Result<LeadingSelection> {
    let scores = indicator_dot_products(s, partition, SHORTLIST)?;
    let mut per_topic = Vec::with_capacity(scores.len());
    for (topic, docs) in scores.into_iter().zip(partition.topics()) {
        let shortlist: Vec<Candidate> = topic
            .ranked
            .iter()
            .map(|&(h, dot)| {
                let v = s.right(h - 1);
                Candidate {
                    index: h,
                    dot,
                    concentration: docs.iter().map(|&i| v[i] * v[i]).sum(),
                }
            })
            .collect();
        let chosen = match policy {
            SelectionPolicy::DotProduct => shortlist[0].index,
            SelectionPolicy::CrossCheck => {
                let mut best = &shortlist[0];
                for c in &shortlist[1..] {
                    let diff = c.concentration - best.concentration;
                    if diff > CONCENTRATION_TIE
                        || (diff.abs() <= CONCENTRATION_TIE && c.dot > best.dot)
                    {
                        best = c;
                    }
                }
                best.index
            }
        };
        per_topic.push(TopicChoice {
            name: topic.name,
            chosen,
            shortlist,
        });
    }
    let chosen: BTreeSet<usize> = per_topic.iter().map(|c| c.chosen).collect();
    let selection = TripletSelection::new(chosen.into_iter().collect(), s.rank())?;
    Ok(LeadingSelection {
        policy,
        per_topic,
        selection,
    })
}

fn check_partition(s: &SvdTriplets, partition: &TopicPartition) -> Result<()> {
    partition.check_docs(s.n_docs())?;
    if let Some(k) = partition.topics().iter().position(|t| t.is_empty()) {
        return Err(Error::EmptyTopic(k + 1));
    }
    Ok(())
}

/// 1-based indices by descending value; ties keep the smaller index.
fn rank_desc(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (1..=x.len()).collect();
    idx.sort_by(|&a, &b| x[b - 1].total_cmp(&x[a - 1]));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TermDocumentMatrix;
    use crate::spectral::{svd, DEFAULT_TOL};
    use ndarray::array;

    fn two_blocks() -> SvdTriplets {
        let a = array![[2.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        svd(&TermDocumentMatrix::from_dense(&a).unwrap(), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn contributions_sum_to_topic_norm() {
        let s = two_blocks();
        let p = TopicPartition::new(vec![vec![0, 1], vec![2]], None).unwrap();
        let r = topic_norm_contributions(&s, &p).unwrap();
        assert!((r.topics[0].frobenius_sq - 7.0).abs() < 1e-12);
        assert!((r.topics[1].frobenius_sq - 1.0).abs() < 1e-12);
        assert!((r.topics[0].cumulative_fraction(&[1, 2, 3]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_topic_is_rejected() {
        let s = two_blocks();
        let p = TopicPartition::new(vec![vec![0, 1], vec![]], None).unwrap();
        assert_eq!(
            topic_norm_contributions(&s, &p).unwrap_err().name(),
            "EmptyTopic"
        );
        let q = TopicPartition::new(vec![vec![0]], None).unwrap();
        assert!(indicator_dot_products(&s, &q, 0).is_err());
    }

    #[test]
    fn leading_vectors_of_blocks() {
        let s = two_blocks();
        let p = TopicPartition::new(vec![vec![0, 1], vec![2]], None).unwrap();
        for policy in [SelectionPolicy::DotProduct, SelectionPolicy::CrossCheck] {
            let sel = select_leading_vectors(&s, &p, policy).unwrap();
            assert_eq!(sel.selection.indices(), &[1, 2]);
        }
    }

    #[test]
    fn cross_check_prefers_concentrated_vector() {
        // v1 has the larger dot product but a fifth of its mass outside the
        // topic; v2 sits inside it
        let a = array![[0.0, 2.0, 2.0, 1.0, 1.0], [1.0, 0.0, 0.0, 0.0, 0.0]];
        let s = svd(&TermDocumentMatrix::from_dense(&a).unwrap(), DEFAULT_TOL).unwrap();
        let p = TopicPartition::new(vec![vec![0, 1, 2]], None).unwrap();
        let dot = select_leading_vectors(&s, &p, SelectionPolicy::DotProduct).unwrap();
        let cross = select_leading_vectors(&s, &p, SelectionPolicy::CrossCheck).unwrap();
        assert_eq!(dot.per_topic[0].chosen, 1);
        assert_eq!(cross.per_topic[0].chosen, 2);
    }
}
