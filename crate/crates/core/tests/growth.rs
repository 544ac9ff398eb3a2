use psvf_core::transfer::{spectral_radius, DEFAULT_TOL};
use psvf_core::{TransferMatrix, TransitionGraph};

fn check(graph: &TransitionGraph, rho: f64) {
    let growth = graph.word_growth(30).unwrap();
    assert!((growth - rho.ln()).abs() <= 0.05, "{growth} vs {}", rho.ln());
    let s = spectral_radius(&TransferMatrix::adjacency(graph), DEFAULT_TOL).unwrap();
    assert!((s.radius - rho).abs() < 1e-9);
}

#[test]
fn k3_word_growth_is_log_two() {
    check(&TransitionGraph::zk(3).unwrap(), 2.0);
}

#[test]
fn golden_mean_word_growth() {
    check(&TransitionGraph::golden_mean(4).unwrap(), (1.0 + 13f64.sqrt()) / 2.0);
}

#[test]
fn petal_words_are_all_admissible() {
    let g = TransitionGraph::petal(3).unwrap();
    assert_eq!(g.admissible_word_count(30).unwrap(), num_bigint::BigUint::from(3u32).pow(30));
}
