use std::collections::HashSet;

use proptest::prelude::*;

use polyseries::jobgraph::{validate, ConvKind, JobGraph, MonomialShape};

fn shape(n: usize) -> impl Strategy<Value = MonomialShape> {
    prop::sample::subsequence((1..=n).collect::<Vec<_>>(), 1..=n).prop_flat_map(|indices| {
        let len = indices.len();
        (Just(indices), prop::collection::vec(1u32..=3, len))
            .prop_map(|(indices, exponents)| MonomialShape { indices, exponents })
    })
}

fn structure() -> impl Strategy<Value = (usize, Vec<MonomialShape>)> {
    (1usize..=10).prop_flat_map(|n| (Just(n), prop::collection::vec(shape(n), 1..=50)))
}

fn ceil_log2(mut len: usize) -> usize {
    let mut steps = 0;
    while len > 1 {
        len = len.div_ceil(2);
        steps += 1;
    }
    steps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_graphs_validate((n, shapes) in structure()) {
        let g = JobGraph::from_shapes(n, &shapes).unwrap();
        prop_assert!(validate(&g).is_ok(), "{}", validate(&g).unwrap_err());
    }

    #[test]
    fn job_counts_and_layers((n, shapes) in structure()) {
        let g = JobGraph::from_shapes(n, &shapes).unwrap();
        let expected: usize = shapes.iter().map(|s| if s.len() == 1 { 1 } else { 3 * s.len() - 3 }).sum();
        prop_assert_eq!(g.conv_job_count(), expected);
        prop_assert_eq!(g.copies.len(), shapes.iter().filter(|s| s.len() == 1).count());
        prop_assert_eq!(g.conv_layers.len(), shapes.iter().map(|s| s.len()).max().unwrap());

        for job in g.conv_jobs().filter(|j| j.kind == ConvKind::Cross) {
            let nk = shapes[job.monomial - 1].len();
            let j = job.index;
            prop_assert_eq!(job.layer, j.max(nk - 2 - j) + 1);
        }

        let mut occurrences = vec![0usize; n];
        for s in &shapes {
            for &i in &s.indices {
                occurrences[i - 1] += 1;
            }
        }
        let mut lengths = vec![shapes.len() + 1];
        lengths.extend(occurrences.iter().copied().filter(|&c| c > 0));
        prop_assert_eq!(g.add_job_count(), lengths.iter().map(|l| l - 1).sum::<usize>());
        prop_assert_eq!(g.add_layers.len(), ceil_log2(*lengths.iter().max().unwrap()));
        for (i, slot) in g.gradient_slots.iter().enumerate() {
            prop_assert_eq!(slot.is_some(), occurrences[i] > 0);
        }
    }

    #[test]
    fn every_dynamic_slot_is_written((n, shapes) in structure()) {
        let g = JobGraph::from_shapes(n, &shapes).unwrap();
        let written: HashSet<usize> = g
            .conv_jobs()
            .map(|j| j.out)
            .chain(g.copies.iter().map(|c| c.dst))
            .collect();
        for slot in 1..g.total_slots() {
            prop_assert!(g.layout.is_static(slot) || written.contains(&slot), "slot {} never written", slot);
        }
        for job in g.add_jobs() {
            for slot in [job.src, job.dst] {
                prop_assert!(slot == 0 || written.contains(&slot));
            }
        }
    }
}
