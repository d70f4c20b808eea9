use std::sync::Arc;

use proptest::prelude::*;

use llp_core::eval::{auc, hits_at_k, ScoreSet};
use llp_core::graph::Graph;
use llp_core::losses::{loss_dist, loss_rank, Segments};
use llp_core::splits::{check_invariants, frac_count, production_split, transductive_split, Split};
use llp_core::synthetic::random_graph;
use llp_core::tensor::{Tape, Tensor};

fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![(0u8..6).prop_map(|x| x as f64 / 5.0), 0.0..1.0f64], 1..40)
}

fn segments() -> impl Strategy<Value = (Vec<usize>, Vec<f64>, Vec<f64>)> {
    prop::collection::vec(2usize..12, 1..5).prop_flat_map(|lengths| {
        let m: usize = lengths.iter().sum();
        (
            Just(lengths),
            prop::collection::vec(-4.0..4.0f64, m),
            prop::collection::vec(-4.0..4.0f64, m),
        )
    })
}

fn rank_value(student: &[f64], teacher: &[f64], lengths: &[usize], delta: f64) -> f64 {
    let tape = Tape::new();
    let s = tape.leaf(&Tensor::column_vector(student.to_vec()));
    let seg = Segments::from_lengths(lengths.iter().copied());
    loss_rank(s, teacher, &seg, delta).unwrap().loss.item().unwrap()
}

fn kl(student: &[f64], teacher: &[f64], lengths: &[usize], tau: f64) -> f64 {
    let tape = Tape::new();
    let s = tape.leaf(&Tensor::column_vector(student.to_vec()));
    let seg = Segments::from_lengths(lengths.iter().copied());
    loss_dist(s, teacher, &seg, tau).unwrap().loss.item().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hits_is_monotone_in_k_and_bounded(pos in scores(), neg in scores(), k in 1usize..30) {
        let s = ScoreSet::new(pos, neg);
        let a = hits_at_k(&s, k).unwrap();
        let b = hits_at_k(&s, k + 1).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(a <= b);
        prop_assert_eq!(hits_at_k(&s, s.neg.len() + 1).unwrap(), 1.0);
    }

    #[test]
    fn auc_is_antisymmetric(pos in scores(), neg in scores()) {
        let a = auc(&ScoreSet::new(pos.clone(), neg.clone())).unwrap();
        let b = auc(&ScoreSet::new(neg, pos)).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_loss_is_bounded_below_by_zero((lengths, s, t) in segments(), delta in 0.0..0.5f64) {
        let v = rank_value(&s, &t, &lengths, delta);
        prop_assert!(v >= 0.0);
        // a student that copies the teacher pays at most the dead-zone constant
        prop_assert!(rank_value(&t, &t, &lengths, delta) <= delta + 1e-12);
    }

    #[test]
    fn kl_is_nonnegative_and_shift_invariant((lengths, s, t) in segments(), tau in 0.2..3.0f64, c in -5.0..5.0f64) {
        let v = kl(&s, &t, &lengths, tau);
        prop_assert!(v >= -1e-12);
        let shifted: Vec<f64> = s.iter().map(|x| x + c).collect();
        prop_assert!((kl(&shifted, &t, &lengths, tau) - v).abs() < 1e-9);
    }

    #[test]
    fn kl_shrinks_along_the_path_to_the_teacher((lengths, s, t) in segments(), tau in 0.2..3.0f64) {
        let mut last = f64::INFINITY;
        for step in 0..=10 {
            let w = step as f64 / 10.0;
            let mix: Vec<f64> = s.iter().zip(&t).map(|(a, b)| (1.0 - w) * a + w * b).collect();
            let v = kl(&mix, &t, &lengths, tau);
            prop_assert!(v <= last + 1e-12);
            last = v;
        }
        prop_assert!(last.abs() < 1e-10);
    }

    #[test]
    fn transductive_splits_partition_edges(seed in 0u64..1000, val in 0.0..0.3f64, test in 0.0..0.3f64) {
        let g: Graph<f64> = random_graph(120, 6.0, 2, seed).unwrap();
        let t = transductive_split(&g, val, test, seed).unwrap();
        let e = g.num_edges();
        prop_assert_eq!(t.val_pos.len(), frac_count(val, e));
        prop_assert_eq!(t.test_pos.len(), frac_count(test, e));
        prop_assert_eq!(t.val_neg.len(), t.val_pos.len());
        prop_assert_eq!(t.test_neg.len(), t.test_pos.len());
        let split = Split::Transductive(t);
        prop_assert_eq!(check_invariants(&g, &split), Ok(()));
    }

    #[test]
    fn production_splits_keep_new_nodes_out_of_training(seed in 0u64..1000, frac in 0.1..0.5f64) {
        let g: Graph<f64> = random_graph(150, 6.0, 2, seed).unwrap();
        let p = production_split(&g, frac, seed).unwrap();
        prop_assert_eq!(p.new_nodes.len(), frac_count(frac, 150));
        prop_assert_eq!(p.existing_nodes.len() + p.new_nodes.len(), 150);
        for e in p.train_pos.iter().chain(p.val_pos.iter()).chain(p.val_neg.iter()) {
            prop_assert!(!p.is_new(e.u) && !p.is_new(e.v));
        }
        for v in p.new_nodes.iter() {
            prop_assert_eq!(p.train_message_graph.degree(*v), 0);
        }
        let split = Split::Production(p);
        prop_assert_eq!(check_invariants(&g, &split), Ok(()));
    }
}

#[test]
fn split_counts_on_a_path() {
    let pairs: Vec<(usize, usize)> = (0..100).map(|i| (i, i + 1)).collect();
    let g = Graph::from_pairs(Arc::new(Tensor::<f64>::zeros(101, 1)), pairs).unwrap();
    let t = transductive_split(&g, 0.05, 0.15, 0).unwrap();
    assert_eq!((t.train_pos.len(), t.val_pos.len(), t.test_pos.len()), (80, 5, 15));
}
