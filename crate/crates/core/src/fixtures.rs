//! Bundled 21-term x 25-document example with three disjoint topics
//! (Brownian motion, allosteric proteins, neural networks), plus a variant
//! where the word "kinetic" links documents 1, 8 and 10 across the first two
//! topics. Terms are listed alphabetically.

use crate::corpus::{TermDocumentMatrix, TopicPartition, Vocabulary};
use crate::io::{parse_matrix, parse_partition, parse_vocabulary};

pub const PE1_MATRIX: &str = include_str!("../data/pe1.matrix");
pub const PE1_VOCAB: &str = include_str!("../data/pe1.vocab");
pub const PE1_PARTITION: &str = include_str!("../data/pe1.partition");
/// Retained words of each document, one document per line.
pub const PE1_DOCS: &str = include_str!("../data/pe1_docs.txt");
pub const PE1_KINETIC_MATRIX: &str = include_str!("../data/pe1_kinetic.matrix");
pub const PE1_KINETIC_VOCAB: &str = include_str!("../data/pe1_kinetic.vocab");

/// 0-based id of "kinetic" in the perturbed vocabulary.
pub const KINETIC_TERM: usize = 21;
/// 0-based documents containing "kinetic".
pub const KINETIC_DOCS: [usize; 3] = [0, 7, 9];

pub fn pe1_matrix() -> TermDocumentMatrix {
    parse_matrix(PE1_MATRIX, "pe1.matrix").expect("bundled matrix parses")
}

pub fn pe1_vocabulary() -> Vocabulary {
    parse_vocabulary(PE1_VOCAB, "pe1.vocab").expect("bundled vocabulary parses")
}

pub fn pe1_partition() -> TopicPartition {
    parse_partition(PE1_PARTITION, "pe1.partition").expect("bundled partition parses")
}

pub fn pe1_documents() -> Vec<&'static str> {
    PE1_DOCS.lines().collect()
}

pub fn pe1_kinetic_matrix() -> TermDocumentMatrix {
    parse_matrix(PE1_KINETIC_MATRIX, "pe1_kinetic.matrix").expect("bundled matrix parses")
}

pub fn pe1_kinetic_vocabulary() -> Vocabulary {
    parse_vocabulary(PE1_KINETIC_VOCAB, "pe1_kinetic.vocab").expect("bundled vocabulary parses")
}
