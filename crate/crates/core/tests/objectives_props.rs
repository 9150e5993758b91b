mod common;

use std::collections::BTreeMap;

use common::{mol, CELECOXIB};
use molbo::chem::parse_formula;
use molbo::objectives::{
    auc_topk, auc_topk_scores, default_objectives, summarize_runs, ObjectiveConfig, ObjectiveSpec, OracleState,
    Provenance, RunHistory,
};
use molbo::rng::stream_rng;
use molbo::Error;
use proptest::prelude::*;
use rand::Rng;

/// Re-sort the whole prefix at every step.
fn auc_oracle(scores: &[f64], k: usize, budget: usize) -> f64 {
    let mut area = 0.0;
    let mut last = 0.0;
    for t in 1..=scores.len() {
        let mut prefix = scores[..t].to_vec();
        prefix.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let top = &prefix[..k.min(t)];
        last = top.iter().sum::<f64>() / top.len() as f64;
        area += last;
    }
    (area + (budget - scores.len()) as f64 * last) / budget as f64
}

#[test]
fn auc_matches_resort_oracle() {
    let mut rng = stream_rng(41, 0);
    for _ in 0..200 {
        let n = rng.random_range(1..=300);
        let budget = n + rng.random_range(0..200);
        let k = rng.random_range(1..=15);
        let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let got = auc_topk_scores(&scores, k, budget).unwrap();
        assert!((got - auc_oracle(&scores, k, budget)).abs() < 1e-12);
    }
}

#[test]
fn auc_trivial_cases() {
    for c in [0.0, 0.1, 0.3, 1.0 / 3.0, 0.7, 1.0] {
        for n in [1, 7, 10, 11, 250] {
            assert_eq!(auc_topk_scores(&vec![c; n], 10, 500).unwrap(), c);
        }
    }
    assert_eq!(auc_topk_scores(&[1.0], 10, 100).unwrap(), 1.0);
    // Every prefix top-10 mean is 0.4 once the first ten calls tie.
    let mut s = vec![0.4; 10];
    s.extend([0.1, 0.2, 0.05]);
    assert_eq!(auc_topk_scores(&s, 10, 50).unwrap(), 0.4);
}

#[test]
fn auc_rejects_bad_input() {
    assert!(auc_topk_scores(&[], 10, 10).is_err());
    assert!(auc_topk_scores(&[0.5; 5], 10, 4).is_err());
    assert!(auc_topk_scores(&[0.5, 1.5], 10, 4).is_err());
    assert!(auc_topk_scores(&[0.5], 0, 4).is_err());
}

#[test]
fn oracle_budget_and_cache() {
    let spec = ObjectiveConfig::celecoxib_rediscovery().build().unwrap();
    let mut oracle = OracleState::new(3);
    let (s, hit) = oracle.call(&spec, &mol(CELECOXIB), Provenance::Init).unwrap();
    assert!((s - 1.0).abs() < 1e-15 && !hit);
    let kekule = mol("CC1=CC=C(C=C1)C1=CC(=NN1C1=CC=C(C=C1)S(N)(=O)=O)C(F)(F)F");
    assert_eq!(oracle.call(&spec, &kekule, Provenance::Bo).unwrap(), (s, true));
    oracle.call(&spec, &mol("CCO"), Provenance::Bo).unwrap();
    oracle.call(&spec, &mol("CCN"), Provenance::Bo).unwrap();
    assert_eq!(oracle.remaining(), 0);
    assert!(matches!(
        oracle.call(&spec, &mol("CCC"), Provenance::Bo),
        Err(Error::BudgetExhausted { budget: 3 })
    ));
    // Cached molecules stay free after exhaustion.
    assert!(oracle.call(&spec, &mol("OCC"), Provenance::Bo).unwrap().1);
    let h = oracle.history();
    assert_eq!(h.len(), 3);
    assert_eq!(h.entries.iter().map(|e| e.call_index).collect::<Vec<_>>(), vec![1, 2, 3]);
}

#[test]
fn history_top10_column_matches_oracle() {
    let spec = ObjectiveSpec::isomer("iso", parse_formula("C7H8N2O2").unwrap());
    let mut oracle = OracleState::new(100);
    let corpus = ["CCO", "CCN", "c1ccccc1", "CC(=O)N", "NC(=O)c1ccccc1", "Nc1ccc(cc1)C(=O)O", "CCCCCCC", "OCCO"];
    let mut rng = stream_rng(42, 0);
    for i in 0..60 {
        let base = corpus[i % corpus.len()];
        let smi = format!("{base}{}", "C".repeat(rng.random_range(0..6) + i / corpus.len()));
        let _ = oracle.call(&spec, &mol(&smi), Provenance::Bo).unwrap();
    }
    let h = oracle.history();
    let scores = h.scores();
    for (t, e) in h.entries.iter().enumerate() {
        let mut prefix = scores[..=t].to_vec();
        prefix.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let top = &prefix[..10.min(t + 1)];
        let m = top.iter().sum::<f64>() / top.len() as f64;
        assert!((e.top10_mean - m).abs() < 1e-12);
    }
    let text = h.to_jsonl();
    assert_eq!(RunHistory::from_jsonl(&text).unwrap(), *h);
    assert_eq!(auc_topk(h, 10, 100).unwrap(), auc_topk_scores(&scores, 10, 100).unwrap());
}

#[test]
fn objective_values() {
    for cfg in default_objectives() {
        let spec = cfg.build().unwrap();
        for smi in ["CCO", CELECOXIB, "c1ccccc1"] {
            let v = spec.evaluate(&mol(smi));
            assert!((0.0..=1.0).contains(&v), "{} on {smi}: {v}", cfg.name);
        }
        for t in spec.targets() {
            if spec.targets().len() == 1 {
                assert!((spec.evaluate(t) - 1.0).abs() < 1e-15);
            }
        }
        assert_eq!(spec.to_config().build().unwrap().to_config(), spec.to_config());
    }
    let iso = ObjectiveSpec::isomer("iso", parse_formula("C7H8N2O2").unwrap());
    // 4-aminobenzohydrazide-like exact formula match.
    assert_eq!(iso.evaluate(&mol("NNC(=O)c1ccc(O)cc1")), 1.0);
    let off_by_one = iso.evaluate(&mol("NNC(=O)c1ccccc1"));
    assert!((off_by_one - (-1.0f64 / 4.0).exp()).abs() < 1e-15);
}

#[test]
fn summary_table() {
    let mut per = BTreeMap::new();
    per.insert("a".to_string(), vec![0.2, 0.4, 0.6]);
    per.insert("b".to_string(), vec![0.5]);
    let t = summarize_runs(&per).unwrap();
    assert!((t.rows[0].mean - 0.4).abs() < 1e-15);
    assert!((t.rows[0].std - 0.2).abs() < 1e-15);
    assert!((t.sum - 0.9).abs() < 1e-15);
    let tsv = t.to_tsv();
    assert!(tsv.starts_with("objective\tmean\tstd\tn\n"));
    assert!(tsv.lines().last().unwrap().starts_with("Sum\t"));
}

proptest! {
    #[test]
    fn auc_monotone_under_improvement(
        scores in prop::collection::vec(0.0f64..1.0, 1..80),
        extra in 0usize..50,
        idx in any::<prop::sample::Index>(),
        bump in 0.0f64..1.0,
        k in 1usize..12,
    ) {
        let budget = scores.len() + extra;
        let before = auc_topk_scores(&scores, k, budget).unwrap();
        let mut better = scores.clone();
        let i = idx.index(better.len());
        better[i] = (better[i] + bump).min(1.0);
        let after = auc_topk_scores(&better, k, budget).unwrap();
        prop_assert!(after >= before - 1e-15);
        prop_assert!((before - auc_oracle(&scores, k, budget)).abs() < 1e-12);
    }
}
