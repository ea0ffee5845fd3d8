//! Plain-text and JSON file formats. All ids in files are 1-based.
//!
//! * matrix: header `n_terms n_docs nnz`, then `term_id doc_id value` lines
//! * vocabulary: one term per line, line number = term id
//! * partition: `name: doc doc ...`
//! * queries: `qid: term term ...`
//! * judgments: `qid doc_id grade`
//! * curve: CSV `recall,precision`
//!
//! Blank lines and lines starting with `#` are ignored everywhere except in
//! vocabulary files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::{TermDocumentMatrix, TopicPartition, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{PrecisionRecallCurve, RelevanceJudgments};
use crate::spectral::{SvdTriplets, SIGN_CONVENTION};

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn parse_id(tok: &str, path: &str, line: usize, what: &str) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(0) | Err(_) => Err(parse_err(
            path,
            line,
            format!("bad {what} id {tok:?} (ids are 1-based)"),
        )),
        Ok(v) => Ok(v - 1),
    }
}

/// An empty text yields a 0 x 0 matrix.
pub fn parse_matrix(text: &str, path: &str) -> Result<TermDocumentMatrix> {
    let mut lines = content_lines(text);
    let Some((hline, header)) = lines.next() else {
        return TermDocumentMatrix::from_triplets(0, 0, Vec::new());
    };
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 {
        return Err(parse_err(
            path,
            hline,
            "header must be `n_terms n_docs nnz`",
        ));
    }
    let dims: Vec<usize> = h
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(path, hline, format!("bad count {t:?}")))
        })
        .collect::<Result<_>>()?;
    let (n_terms, n_docs, nnz) = (dims[0], dims[1], dims[2]);
    let mut entries = Vec::with_capacity(nnz);
    for (ln, l) in lines {
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(parse_err(path, ln, "expected `term_id doc_id value`"));
        }
        let t = parse_id(tok[0], path, ln, "term")?;
        let d = parse_id(tok[1], path, ln, "document")?;
        let v: f64 = tok[2]
            .parse()
            .map_err(|_| parse_err(path, ln, format!("bad value {:?}", tok[2])))?;
        if t >= n_terms || d >= n_docs {
            return Err(parse_err(
                path,
                ln,
                format!("entry ({}, {}) outside {n_terms} x {n_docs}", t + 1, d + 1),
            ));
        }
        entries.push((t, d, v));
    }
    if entries.len() != nnz {
        return Err(parse_err(
            path,
            hline,
            format!("header declares {nnz} entries, found {}", entries.len()),
        ));
    }
    TermDocumentMatrix::from_triplets(n_terms, n_docs, entries)
}

pub fn read_matrix(path: &Path) -> Result<TermDocumentMatrix> {
    parse_matrix(&read(path)?, &path.display().to_string())
}

pub fn format_matrix(m: &TermDocumentMatrix) -> String {
    let mut out = format!("{} {} {}\n", m.n_terms(), m.n_docs(), m.nnz());
    for &(t, d, v) in m.entries() {
        let _ = writeln!(out, "{} {} {}", t + 1, d + 1, v);
    }
    out
}

pub fn parse_vocabulary(text: &str, path: &str) -> Result<Vocabulary> {
    let terms: Vec<&str> = text.lines().map(str::trim).collect();
    let end = terms
        .iter()
        .rposition(|t| !t.is_empty())
        .map_or(0, |i| i + 1);
    if let Some(i) = terms[..end].iter().position(|t| t.is_empty()) {
        return Err(parse_err(path, i + 1, "empty term"));
    }
    Vocabulary::from_terms(terms[..end].iter().copied())
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    parse_vocabulary(&read(path)?, &path.display().to_string())
}

pub fn format_vocabulary(v: &Vocabulary) -> String {
    v.terms().iter().map(|t| format!("{t}\n")).collect()
}

fn split_labelled<'a>(l: &'a str, path: &str, ln: usize) -> Result<(&'a str, &'a str)> {
    let (name, rest) = l
        .split_once(':')
        .ok_or_else(|| parse_err(path, ln, "expected `name: ...`"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(parse_err(path, ln, "empty name"));
    }
    Ok((name, rest))
}

pub fn parse_partition(text: &str, path: &str) -> Result<TopicPartition> {
    let mut names = Vec::new();
    let mut topics = Vec::new();
    for (ln, l) in content_lines(text) {
        let (name, rest) = split_labelled(l, path, ln)?;
        let docs = rest
            .split_whitespace()
            .map(|t| parse_id(t, path, ln, "document"))
            .collect::<Result<Vec<_>>>()?;
        names.push(name.to_string());
        topics.push(docs);
    }
    TopicPartition::new(topics, Some(names))
}

pub fn read_partition(path: &Path) -> Result<TopicPartition> {
    parse_partition(&read(path)?, &path.display().to_string())
}

pub fn format_partition(p: &TopicPartition) -> String {
    let mut out = String::new();
    for (name, docs) in p.names().iter().zip(p.topics()) {
        let ids: Vec<String> = docs.iter().map(|d| (d + 1).to_string()).collect();
        let _ = writeln!(out, "{name}: {}", ids.join(" "));
    }
    out
}

/// Queries in file order; terms are lowercased.
pub fn parse_queries(text: &str, path: &str) -> Result<Vec<(String, Vec<String>)>> {
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for (ln, l) in content_lines(text) {
        let (qid, rest) = split_labelled(l, path, ln)?;
        if out.iter().any(|(q, _)| q == qid) {
            return Err(parse_err(path, ln, format!("duplicate query id {qid:?}")));
        }
        out.push((
            qid.to_string(),
            rest.split_whitespace().map(str::to_lowercase).collect(),
        ));
    }
    Ok(out)
}

pub fn read_queries(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    parse_queries(&read(path)?, &path.display().to_string())
}

pub fn parse_judgments(text: &str, path: &str) -> Result<RelevanceJudgments> {
    let mut j = RelevanceJudgments::new();
    for (ln, l) in content_lines(text) {
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(parse_err(path, ln, "expected `qid doc_id grade`"));
        }
        let d = parse_id(tok[1], path, ln, "document")?;
        let g: u8 = tok[2]
            .parse()
            .ok()
            .filter(|g| *g <= 2)
            .ok_or_else(|| parse_err(path, ln, format!("grade {:?} not in 0..=2", tok[2])))?;
        j.insert(tok[0], d, g)?;
    }
    Ok(j)
}

pub fn read_judgments(path: &Path) -> Result<RelevanceJudgments> {
    parse_judgments(&read(path)?, &path.display().to_string())
}

/// One document per line; blank lines are empty documents.
pub fn read_documents(path: &Path) -> Result<Vec<String>> {
    Ok(read(path)?.lines().map(str::to_string).collect())
}

pub fn format_curve(c: &PrecisionRecallCurve) -> String {
    curve_csv(&c.recall, &c.precision)
}

pub fn curve_csv(recall: &[f64], precision: &[f64]) -> String {
    let mut out = String::from("recall,precision\n");
    for (r, p) in recall.iter().zip(precision) {
        let _ = writeln!(out, "{r},{p}");
    }
    out
}

/// Row-major dense matrix for JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseJson {
    pub fn from_array(a: &Array2<f64>) -> Self {
        DenseJson {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }

    pub fn to_array(&self) -> Result<Array2<f64>> {
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone())
            .map_err(|e| Error::DimensionMismatch(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdDump {
    pub n_terms: usize,
    pub n_docs: usize,
    pub rank: usize,
    pub tol: f64,
    pub sign_convention: String,
    pub sigma: Vec<f64>,
    pub u: DenseJson,
    pub v: DenseJson,
}

impl SvdDump {
    pub fn from_svd(s: &SvdTriplets) -> Self {
        SvdDump {
            n_terms: s.n_terms(),
            n_docs: s.n_docs(),
            rank: s.rank(),
            tol: s.tol(),
            sign_convention: SIGN_CONVENTION.to_string(),
            sigma: s.sigma().to_vec(),
            u: DenseJson::from_array(s.u()),
            v: DenseJson::from_array(s.v()),
        }
    }

    pub fn to_svd(&self) -> Result<SvdTriplets> {
        let u = self.u.to_array()?;
        let v = self.v.to_array()?;
        if u.dim() != (self.n_terms, self.rank) || v.dim() != (self.n_docs, self.rank) {
            return Err(Error::DimensionMismatch(format!(
                "U is {:?}, V is {:?}, header says {} x {} with rank {}",
                u.dim(),
                v.dim(),
                self.n_terms,
                self.n_docs,
                self.rank
            )));
        }
        SvdTriplets::from_parts(self.sigma.clone().into(), u, v, self.tol)
    }
}

pub fn read_svd(path: &Path) -> Result<SvdTriplets> {
    let dump: SvdDump = serde_json::from_str(&read(path)?)?;
    dump.to_svd()
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}
