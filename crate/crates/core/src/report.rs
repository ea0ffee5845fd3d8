//! Aligned plain-text tables for the human-readable outputs.

use crate::blocks::BlockReport;
use crate::perturb::PerturbationPrediction;
use crate::select::{LeadingSelection, TopicNormReport};
use crate::spectral::SvdTriplets;

/// Fixed 4-decimal rendering without a negative zero.
pub fn fmt4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Columns separated by two spaces; the first column is left-aligned, the
/// rest right-aligned.
pub fn table(headers: &[String], rows: &[Vec<String>]) -> String {
    let ncol = headers.len();
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (k, cell) in r.iter().enumerate().take(ncol) {
            width[k] = width[k].max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .take(ncol)
            .map(|(k, c)| {
                if k == 0 {
                    format!("{c:<w$}", w = width[k])
                } else {
                    format!("{c:>w$}", w = width[k])
                }
            })
            .collect();
        let mut s = parts.join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(headers);
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

fn owned(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

/// Leading right singular vectors, one row per document.
pub fn singular_vector_table(s: &SvdTriplets, k: usize) -> String {
    let k = k.min(s.rank());
    let mut headers = vec!["doc".to_string()];
    headers.extend((1..=k).map(|h| format!("v{h}")));
    let mut rows: Vec<Vec<String>> = (0..s.n_docs())
        .map(|d| {
            let mut r = vec![format!("d{}", d + 1)];
            r.extend((0..k).map(|h| fmt4(s.v()[[d, h]])));
            r
        })
        .collect();
    let mut sig = vec!["sigma".to_string()];
    sig.extend((0..k).map(|h| fmt4(s.sigma()[h])));
    rows.push(sig);
    table(&headers, &rows)
}

pub fn block_table(r: &BlockReport) -> String {
    let headers = owned(&["block", "leading", "sigma", "docs", "terms"]);
    let rows: Vec<Vec<String>> = r
        .blocks
        .iter()
        .enumerate()
        .map(|(k, b)| {
            vec![
                (k + 1).to_string(),
                b.leading.to_string(),
                fmt4(b.sigma),
                id_list(b.docs.iter()),
                id_list(b.terms.iter()),
            ]
        })
        .collect();
    let mut out = table(&headers, &rows);
    out.push_str(&format!("exact: {}\n", r.exact));
    out
}

fn id_list<'a>(ids: impl Iterator<Item = &'a usize>) -> String {
    ids.map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Four most important vectors per topic and the share they carry.
pub fn topic_norm_table(r: &TopicNormReport) -> String {
    let headers = owned(&[
        "topic",
        "1st vector",
        "2nd vector",
        "3rd vector",
        "4th vector",
        "fraction",
    ]);
    let rows: Vec<Vec<String>> = r
        .topics
        .iter()
        .map(|t| {
            let top = t.top(4);
            let mut row = vec![t.name.clone()];
            for k in 0..4 {
                row.push(top.get(k).map_or(String::new(), |h| h.to_string()));
            }
            row.push(fmt4(t.cumulative_fraction(top)));
            row
        })
        .collect();
    table(&headers, &rows)
}

/// Chosen vector per topic, ordered by vector index.
pub fn leading_selection_table(sel: &LeadingSelection) -> String {
    let headers = owned(&["right singular vector", "topic"]);
    let mut pairs: Vec<(usize, &str)> = sel
        .per_topic
        .iter()
        .map(|c| (c.chosen, c.name.as_str()))
        .collect();
    pairs.sort();
    let rows: Vec<Vec<String>> = pairs
        .into_iter()
        .map(|(h, name)| vec![h.to_string(), name.to_string()])
        .collect();
    table(&headers, &rows)
}

/// Per target: unperturbed vector, same-block and different-block terms and
/// their sum, one row per document.
pub fn perturbation_table(p: &PerturbationPrediction) -> String {
    let mut out = String::new();
    for (k, vc) in p.vectors.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let i = vc.index;
        let headers = vec![
            "doc".to_string(),
            format!("V{i}"),
            "SBP".to_string(),
            "DBP".to_string(),
            format!("PV{i}"),
        ];
        let rows: Vec<Vec<String>> = (0..vc.base.len())
            .map(|d| {
                vec![
                    format!("d{}", d + 1),
                    fmt4(vc.base[d]),
                    fmt4(vc.same_block[d]),
                    fmt4(vc.different_block[d]),
                    fmt4(vc.raw[d]),
                ]
            })
            .collect();
        out.push_str(&table(&headers, &rows));
    }
    out
}

/// One column per representation, one row of mean precisions.
pub fn mean_precision_table(configs: &[(String, f64)]) -> String {
    let mut headers = vec![String::new()];
    headers.extend(configs.iter().map(|(n, _)| n.clone()));
    let mut row = vec!["mean precision".to_string()];
    row.extend(configs.iter().map(|(_, m)| fmt4(*m)));
    table(&headers, &[row])
}
