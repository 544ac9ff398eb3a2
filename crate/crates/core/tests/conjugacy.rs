use psvf_core::flow::{arc_point, integrate};
use psvf_core::model::build_zk;
use psvf_core::symbolic::{itinerary, seq_distance, traj_distance, verify_conjugacy};
use psvf_core::{ArcPartition, BranchPolicy, Error, Itinerary, TransitionGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const WORD_LEN: usize = 50;

fn run(k: u32, word: &[usize], dt: f64) -> psvf_core::Trajectory {
    let psvf = build_zk(k).unwrap();
    let partition = ArcPartition::zk(k).unwrap();
    let p0 = arc_point(&partition, word[0], 0.0);
    integrate(&psvf, p0, BranchPolicy::Prescribed(word.to_vec()), word.len() as f64 - 0.5, dt).unwrap()
}

#[test]
fn random_admissible_words_are_reproduced_and_shift_conjugate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in [2u32, 3] {
        let graph = TransitionGraph::zk(k).unwrap();
        for _ in 0..50 {
            let word = graph.random_word(WORD_LEN, &mut rng).unwrap();
            let traj = run(k, &word, 1e-3);
            let s = itinerary(&traj, traj.partition()).unwrap();
            assert_eq!(s.symbols, word, "k={k}");
            assert!(verify_conjugacy(&traj, traj.partition()).unwrap());
        }
    }
}

fn centred(s: Itinerary) -> Itinerary {
    let half = (s.len() / 2) as i64;
    Itinerary::new(s.symbols, -half, s.alphabet)
}

#[test]
fn same_word_means_same_orbit() {
    let word = vec![0, 1, 3, 2, 0, 1, 2, 1, 3, 3, 2, 0];
    let a = run(3, &word, 1e-3);
    let b = run(3, &word, 5e-4);
    let partition = ArcPartition::zk(3).unwrap();
    let d = traj_distance(&a, &b, &partition, 10).unwrap();
    assert!(d.value < 1e-6, "{}", d.value);
    let sa = centred(itinerary(&a, &partition).unwrap());
    let sb = centred(itinerary(&b, &partition).unwrap());
    assert_eq!(seq_distance(&sa, &sb, 5).unwrap().value, 0.0);
}

#[test]
fn different_words_are_apart_in_both_metrics() {
    let partition = ArcPartition::zk(3).unwrap();
    let a = run(3, &[0, 1, 3, 3, 2, 0, 0], 1e-3);
    let b = run(3, &[0, 1, 3, 2, 0, 0, 0], 1e-3);
    let dab = traj_distance(&a, &b, &partition, 6).unwrap();
    let dba = traj_distance(&b, &a, &partition, 6).unwrap();
    assert!(dab.value > 1e-3);
    assert!((dab.value - dba.value).abs() < 1e-12);
    let sa = centred(itinerary(&a, &partition).unwrap());
    let sb = centred(itinerary(&b, &partition).unwrap());
    let d = seq_distance(&sa, &sb, 3).unwrap().value;
    assert!(d > 0.0);
    assert_eq!(d, seq_distance(&sb, &sa, 3).unwrap().value);
}

#[test]
fn distance_needs_fold_anchored_starts() {
    let psvf = build_zk(3).unwrap();
    let partition = ArcPartition::zk(3).unwrap();
    let a = integrate(&psvf, arc_point(&partition, 1, 0.3), BranchPolicy::AlwaysLeft, 4.0, 1e-3).unwrap();
    let b = run(3, &[1, 2, 1, 2, 1], 1e-3);
    assert!(matches!(traj_distance(&a, &b, &partition, 4), Err(Error::Unanchored { .. })));
}
