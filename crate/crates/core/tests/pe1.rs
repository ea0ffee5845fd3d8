//! The bundled three-topic example: published spectrum, vectors, blocks,
//! bridge-word prediction and retrieval behaviour.
#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;

use approx::assert_abs_diff_eq;
use ndarray::Array2;
use perron_lsa::blocks::{self, connected_components, detect_blocks};
use perron_lsa::corpus::{all_word_entropies, shuffle_preserving_totals, CorpusConfig};
use perron_lsa::eval::{Comparison, QueryVector, RetrievalIndex};
use perron_lsa::fixtures::{self, KINETIC_DOCS, KINETIC_TERM};
use perron_lsa::perturb::{
    bridge_word_prediction, split_decomposition, BridgeWordSetup, DEFAULT_GAP_TOL,
};
use perron_lsa::select::{select_leading_vectors, topic_norm_contributions, SelectionPolicy};
use perron_lsa::spectral::{self, reconstruct, svd, SvdTriplets, TripletSelection, DEFAULT_TOL};

const SIGMA: [f64; 5] = [3.5329, 2.8746, 2.3345, 2.2456, 2.1960];
const EIGEN: [f64; 5] = [12.4815, 8.2633, 5.4501, 5.0428, 4.8224];

/// Published right singular vectors v1..v5, documents 1..25.
const V: [[f64; 5]; 25] = [
    [0.0, 0.0, 0.0, 0.0, 0.1924],
    [0.0, 0.0, 0.0, 0.0, 0.4927],
    [0.0, 0.0, 0.0, 0.0, 0.0503],
    [0.0, 0.0, 0.0, 0.0, 0.5991],
    [0.0, 0.0, 0.0, 0.0, 0.5991],
    [0.3751, 0.0, 0.0, -0.3012, 0.0],
    [0.1378, 0.0, 0.0, -0.2071, 0.0],
    [0.3846, 0.0, 0.0, 0.6176, 0.0],
    [0.2531, 0.0, 0.0, 0.0248, 0.0],
    [0.3524, 0.0, 0.0, -0.1693, 0.0],
    [0.2559, 0.0, 0.0, 0.2194, 0.0],
    [0.5129, 0.0, 0.0, -0.5082, 0.0],
    [0.4190, 0.0, 0.0, 0.3864, 0.0],
    [0.0, 0.0805, -0.2612, 0.0, 0.0],
    [0.0, 0.1588, -0.2966, 0.0, 0.0],
    [0.0, 0.4907, -0.1222, 0.0, 0.0],
    [0.0, 0.3124, -0.4791, 0.0, 0.0],
    [0.0, 0.3514, 0.3179, 0.0, 0.0],
    [0.0, 0.2884, 0.2570, 0.0, 0.0],
    [0.0, 0.3319, 0.1744, 0.0, 0.0],
    [0.0, 0.1588, -0.2966, 0.0, 0.0],
    [0.0, 0.1060, -0.0467, 0.0, 0.0],
    [0.0, 0.1918, -0.4219, 0.0, 0.0],
    [0.0, 0.1752, 0.2452, 0.0, 0.0],
    [0.0, 0.4574, 0.2712, 0.0, 0.0],
];

fn pe1_svd() -> SvdTriplets {
    svd(&fixtures::pe1_matrix(), DEFAULT_TOL).unwrap()
}

fn docs(range: std::ops::RangeInclusive<usize>) -> BTreeSet<usize> {
    range.map(|d| d - 1).collect()
}

#[test]
fn published_singular_values() {
    let s = pe1_svd();
    for h in 0..5 {
        assert_abs_diff_eq!(s.sigma()[h], SIGMA[h], epsilon = 1e-3);
        assert_abs_diff_eq!(s.sigma()[h] * s.sigma()[h], EIGEN[h], epsilon = 1e-3);
    }
}

#[test]
fn published_right_vectors_up_to_sign() {
    let s = pe1_svd();
    for h in 0..5 {
        let v = s.right(h);
        let dot: f64 = (0..25).map(|d| v[d] * V[d][h]).sum();
        let sign = dot.signum();
        for d in 0..25 {
            assert_abs_diff_eq!(sign * v[d], V[d][h], epsilon = 1e-3);
        }
    }
}

#[test]
fn matrix_matches_document_text() {
    let (m, vocab) = perron_lsa::corpus::build_matrix(
        &fixtures::pe1_documents(),
        &CorpusConfig {
            min_total_frequency: 1,
            ..CorpusConfig::default()
        },
    )
    .unwrap();
    let reference = fixtures::pe1_matrix();
    let ref_vocab = fixtures::pe1_vocabulary();
    assert_eq!(m.nnz(), reference.nnz());
    for &(t, d, v) in m.entries() {
        let r = ref_vocab.id(vocab.term(t).unwrap()).unwrap();
        assert_eq!(reference.get(r, d), v);
    }
}

#[test]
fn three_blocks_with_leading_vectors_5_1_2() {
    let s = pe1_svd();
    let r = detect_blocks(&s, blocks::DEFAULT_ZERO_TOL, blocks::DEFAULT_PSEUDO_TOL).unwrap();
    assert!(r.exact);
    let mut found: Vec<(BTreeSet<usize>, usize)> = r
        .blocks
        .iter()
        .map(|b| (b.docs.clone(), b.leading))
        .collect();
    found.sort();
    assert_eq!(
        found,
        vec![(docs(1..=5), 5), (docs(6..=13), 1), (docs(14..=25), 2)]
    );
    let oracle: BTreeSet<BTreeSet<usize>> = connected_components(&fixtures::pe1_matrix())
        .into_iter()
        .map(|c| c.docs)
        .collect();
    assert_eq!(oracle, r.doc_sets().into_iter().collect());
}

#[test]
fn split_puts_only_kinetic_in_b() {
    let m = fixtures::pe1_kinetic_matrix();
    let s = svd(&fixtures::pe1_matrix(), DEFAULT_TOL).unwrap();
    let r = detect_blocks(&s, blocks::DEFAULT_ZERO_TOL, blocks::DEFAULT_PSEUDO_TOL).unwrap();
    let (d, b) = split_decomposition(&m, &r).unwrap();
    let mut expected = Array2::<f64>::zeros((25, 25));
    for &i in &KINETIC_DOCS {
        for &j in &KINETIC_DOCS {
            expected[[i, j]] = 1.0;
        }
    }
    assert_eq!(b, expected);
    let gram = m.to_dense().t().dot(&m.to_dense());
    assert_eq!(&d + &b, gram);
}

/// Published rows (doc, V, SBP, DBP, PV) for one target vector.
type Table = &'static [(usize, f64, f64, f64, f64)];

const PV1: Table = &[
    (1, 0.0, 0.0, 0.0716, 0.0716),
    (2, 0.0, 0.0, 0.0070, 0.0070),
    (3, 0.0, 0.0, 0.0062, 0.0062),
    (4, 0.0, 0.0, 0.0009, 0.0009),
    (5, 0.0, 0.0, 0.0009, 0.0009),
    (6, 0.3751, -0.0198, 0.0, 0.3553),
    (7, 0.1378, -0.0154, 0.0, 0.1224),
    (8, 0.3846, 0.0535, 0.0, 0.4381),
    (9, 0.2531, -0.0062, 0.0, 0.2469),
    (10, 0.3524, 0.0480, 0.0, 0.4004),
    (11, 0.2559, -0.0059, 0.0, 0.2500),
    (12, 0.5129, -0.0354, 0.0, 0.4775),
    (13, 0.4190, -0.0160, 0.0, 0.4030),
];

const PV5: Table = &[
    (1, 0.1924, 0.0755, 0.0, 0.2679),
    (2, 0.4927, 0.0086, 0.0, 0.5013),
    (3, 0.0503, 0.0193, 0.0, 0.0696),
    (4, 0.5991, -0.0165, 0.0, 0.5826),
    (5, 0.5991, -0.0165, 0.0, 0.5826),
    (6, 0.0, 0.0, 0.1200, 0.1200),
    (7, 0.0, 0.0, 0.0416, 0.0416),
    (8, 0.0, 0.0, -0.2322, -0.2322),
    (9, 0.0, 0.0, 0.0040, 0.0040),
    (10, 0.0, 0.0, 0.1291, 0.1291),
    (11, 0.0, 0.0, -0.0905, -0.0905),
    (12, 0.0, 0.0, 0.1616, 0.1616),
    (13, 0.0, 0.0, -0.2057, -0.2057),
];

fn kinetic_prediction() -> perron_lsa::perturb::PerturbationPrediction {
    let m = fixtures::pe1_kinetic_matrix();
    let p = fixtures::pe1_partition();
    let setup = BridgeWordSetup::from_matrix(&m, p.topics(), KINETIC_TERM).unwrap();
    bridge_word_prediction(&setup, None, DEFAULT_GAP_TOL).unwrap()
}

/// Basis index (1-based) whose unperturbed vector matches published column `h`.
fn basis_index_for(pred: &perron_lsa::perturb::PerturbationPrediction, h: usize) -> usize {
    pred.vectors
        .iter()
        .find(|vc| (0..25).all(|d| (vc.base[d].abs() - V[d][h].abs()).abs() < 1e-3))
        .map(|vc| vc.index)
        .unwrap()
}

fn check_rows(pred: &perron_lsa::perturb::PerturbationPrediction, h: usize, rows: Table) {
    let vc = pred.vector_for(basis_index_for(pred, h)).unwrap();
    let sign = if (0..25).map(|d| vc.base[d] * V[d][h]).sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    for &(doc, v, sbp, dbp, pv) in rows {
        let d = doc - 1;
        assert_abs_diff_eq!(sign * vc.base[d], v, epsilon = 1e-3);
        assert_abs_diff_eq!(sign * vc.same_block[d], sbp, epsilon = 1e-3);
        assert_abs_diff_eq!(sign * vc.different_block[d], dbp, epsilon = 1e-3);
        assert_abs_diff_eq!(sign * vc.raw[d], pv, epsilon = 1e-3);
    }
}

#[test]
fn kinetic_prediction_pv1_and_pv5() {
    let pred = kinetic_prediction();
    check_rows(&pred, 0, PV1);
    check_rows(&pred, 4, PV5);
}

#[test]
fn kinetic_prediction_pv4_consistent_rows() {
    // d7, d12 and the SBP sign of d13 are printed inconsistently with
    // V + SBP + DBP = PV; the remaining rows are checked as published.
    let rows: Table = &[
        (1, 0.0, 0.0, 0.2351, 0.2351),
        (2, 0.0, 0.0, 0.2090, 0.2090),
        (3, 0.0, 0.0, 0.0582, 0.0582),
        (4, 0.0, 0.0, 0.2005, 0.2005),
        (5, 0.0, 0.0, 0.2005, 0.2005),
        (6, -0.3012, -0.0030, 0.0, -0.3042),
        (8, 0.6176, 0.0206, 0.0, 0.6382),
        (9, 0.0248, 0.0191, 0.0, 0.0439),
        (10, -0.1693, 0.1248, 0.0, -0.0445),
        (11, 0.2194, -0.0163, 0.0, 0.2031),
    ];
    let pred = kinetic_prediction();
    check_rows(&pred, 3, rows);
}

#[test]
fn kinetic_prediction_is_close_to_exact_decomposition() {
    let pred = kinetic_prediction();
    let m = fixtures::pe1_kinetic_matrix().to_dense();
    let (values, vectors) = common::eigh_desc(&m.t().dot(&m));
    // The prediction's leading vector tracks the exact one.
    let vc = pred.vector_for(pred.targets[0]).unwrap();
    let dot = vc.normalized.dot(&vectors.column(0)).abs();
    assert!(dot > 0.99, "overlap {dot}");
    assert!((pred.first_order_values[0] - values[0]).abs() < 0.1 * values[0]);
    assert!(
        vc.raw.iter().all(|&x| x >= -1e-12),
        "leading vector stays nonnegative"
    );
}

#[test]
fn leading_vector_cosines_are_block_indicators() {
    let s = pe1_svd();
    let sel = TripletSelection::new(vec![1, 2, 5], s.rank()).unwrap();
    let ak = reconstruct(&s, &sel).unwrap();
    let c = common::row_cosines(&ak.t().to_owned());
    let block = |d: usize| match d {
        0..=4 => 0,
        5..=12 => 1,
        _ => 2,
    };
    for i in 0..25 {
        for j in 0..25 {
            let expected = if block(i) == block(j) { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(c[[i, j]], expected, epsilon = 1e-8);
        }
    }
}

#[test]
fn brownian_query_needs_the_fifth_vector() {
    let s = pe1_svd();
    let vocab = fixtures::pe1_vocabulary();
    let q = QueryVector::from_terms(&["brownian"], &vocab);
    let index = |ids: Vec<usize>| {
        let sel = TripletSelection::new(ids, s.rank()).unwrap();
        RetrievalIndex::reduced(&s, &sel, Comparison::ScaledV).unwrap()
    };
    let c123 = index(vec![1, 2, 3]).cosines(&q).unwrap();
    assert!(c123.iter().all(|c| c.abs() <= 1e-8));
    let c125 = index(vec![1, 2, 5]).cosines(&q).unwrap();
    for d in 0..25 {
        if d < 5 {
            assert!(c125[d] > 1e-8);
        } else {
            assert!(c125[d].abs() <= 1e-8);
        }
    }
}

#[test]
fn topic_contributions_sum_to_topic_norm() {
    let m = fixtures::pe1_matrix();
    let s = pe1_svd();
    let p = fixtures::pe1_partition();
    let r = topic_norm_contributions(&s, &p).unwrap();
    let a = m.to_dense();
    for (t, docs) in r.topics.iter().zip(p.topics()) {
        let direct: f64 = docs.iter().map(|&d| a.column(d).dot(&a.column(d))).sum();
        assert!((t.frobenius_sq - direct).abs() <= 1e-8 * direct);
    }
}

#[test]
fn selection_picks_the_block_leaders() {
    let s = pe1_svd();
    let p = fixtures::pe1_partition();
    for policy in [SelectionPolicy::DotProduct, SelectionPolicy::CrossCheck] {
        let sel = select_leading_vectors(&s, &p, policy).unwrap();
        assert_eq!(sel.selection.indices(), &[1, 2, 5]);
    }
}

#[test]
fn entropies_zero_then_positive_after_shuffles() {
    let m = fixtures::pe1_matrix();
    let p = fixtures::pe1_partition();
    assert!(all_word_entropies(&m, &p)
        .unwrap()
        .iter()
        .all(|&h| h == 0.0));
    for seed in 0..10 {
        let sh = shuffle_preserving_totals(&m, seed).unwrap();
        assert_eq!(sh.row_sums(), m.row_sums());
        let h = all_word_entropies(&sh, &p).unwrap();
        let mean = h.iter().sum::<f64>() / h.len() as f64;
        assert!(mean > 0.3, "seed {seed}: mean entropy {mean}");
    }
}

#[test]
fn residual_matches_tail_energy() {
    let a = fixtures::pe1_matrix().to_dense();
    let s = pe1_svd();
    for k in 0..=s.rank() {
        let r = spectral::frobenius_residual_from(&a, &s, k).unwrap();
        let sv = common::singular_values(&a);
        let tail: f64 = sv[k..].iter().map(|x| x * x).sum();
        assert!((r.explicit - tail).abs() <= 1e-6 * tail.max(1.0), "k={k}");
    }
}

#[test]
fn dominant_pair_from_published_leaders() {
    // allosteric leader v1 and Brownian leader v5, kinetic in documents 1, 8, 10
    let w_v11 = V[7][0] + V[9][0];
    let w_v21 = V[0][4];
    let delta = w_v11 * w_v21 / (EIGEN[0] - EIGEN[4]);
    let pair = kinetic_prediction().dominant_pair.unwrap();
    assert_abs_diff_eq!(pair.delta, delta, epsilon = 1e-4);
    assert_abs_diff_eq!(pair.n, (1.0 + delta * delta).sqrt(), epsilon = 1e-6);
    assert_abs_diff_eq!(pair.vector[0], delta * V[0][4] / pair.n, epsilon = 1e-4);
    assert_abs_diff_eq!(pair.vector[11], V[11][0] / pair.n, epsilon = 1e-3);
}
