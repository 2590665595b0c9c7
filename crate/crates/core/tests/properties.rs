mod common;

use bisimlab::engine::{
    refine_step, run_from, run_to_stable, verify_trace, StepOutcome, Strategy as Refine,
};
use bisimlab::families::gen_sequential_splitter;
use bisimlab::lts::{is_stable, is_stable_under, is_valid_refinement};
use bisimlab::oracle::{bisimilarity_oracle, min_irc_bruteforce, search_valid_sequences};
use bisimlab::oracle_es::end_structure_partition;
use bisimlab::parallel::{
    enumerate_valid_refinements, parallel_round, pirc_run, pointer_jump_distances,
};
use bisimlab::roberts::{canonical_rotation, least_repeating_prefix, roberts_partition, rotate};
use bisimlab::{Lts, Partition, RefinementTrace, Transition};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_lts(max_n: usize, max_actions: usize) -> impl Strategy<Value = Lts> {
    (1..=max_n, 1..=max_actions).prop_flat_map(|(n, a)| {
        (
            proptest::collection::vec((0..n, 0..a, 0..n), 0..=2 * n * a),
            proptest::collection::vec(0..3usize, n),
        )
            .prop_map(move |(edges, labels)| {
                let names = (0..a).map(|i| format!("a{i}")).collect();
                let transitions = edges.into_iter().map(|(s, x, t)| Transition::new(s, x, t));
                Lts::new(n, names, transitions, common::dense(labels)).unwrap()
            })
    })
}

fn arb_partition(n: usize) -> impl Strategy<Value = Partition> {
    proptest::collection::vec(0..4usize, n).prop_map(common::dense)
}

/// Single-splitter step by rescanning every `(block, action)` pair.
fn plain_single_splitter_step(lts: &Lts, pi: &Partition) -> Option<Partition> {
    for b in 0..pi.block_count() {
        for a in 0..lts.action_count() {
            let reaches = |s: usize| lts.successors(s, a).iter().any(|&t| pi.block_of(t) == b);
            let unstable: Vec<usize> = (0..pi.block_count())
                .filter(|&c| {
                    let m = pi.members(c);
                    m.iter().any(|&s| reaches(s)) && !m.iter().all(|&s| reaches(s))
                })
                .collect();
            if unstable.is_empty() {
                continue;
            }
            let labels = (0..lts.state_count())
                .map(|s| {
                    let c = pi.block_of(s);
                    2 * c + usize::from(unstable.contains(&c) && reaches(s))
                })
                .collect();
            return Some(common::dense(labels));
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn engines_match_oracle(lts in arb_lts(12, 3)) {
        let oracle = bisimilarity_oracle(&lts);
        prop_assert!(is_stable(&lts, &oracle).unwrap());
        for strategy in Refine::ALL {
            let trace = run_to_stable(&lts, strategy);
            prop_assert_eq!(verify_trace(&lts, &trace), Ok(()));
            prop_assert_eq!(trace.last(), &oracle);
        }
        let rounds = pirc_run(&lts);
        prop_assert_eq!(rounds.trace.last(), &oracle);
    }

    #[test]
    fn checker_agrees_with_literal_validity(lts in arb_lts(8, 2)) {
        for strategy in Refine::ALL {
            let trace = run_to_stable(&lts, strategy);
            for (before, after) in trace.windows() {
                prop_assert!(is_valid_refinement(&lts, &before, &after).unwrap());
            }
        }
    }

    #[test]
    fn signature_and_literal_validity_coincide(
        (lts, pi, next) in arb_lts(7, 2).prop_flat_map(|lts| {
            let n = lts.state_count();
            (Just(lts), arb_partition(n), arb_partition(n))
        })
    ) {
        let next = bisimlab::common_refinement(&pi, &next).unwrap();
        let literal = is_valid_refinement(&lts, &pi, &next).unwrap();
        let trace = RefinementTrace::from_partitions(vec![pi.clone(), next.clone()]).unwrap();
        let checked = verify_trace(&lts, &trace);
        // The checker also demands a stable end, so compare the step alone.
        let step_ok = match &checked {
            Ok(()) => true,
            Err(f) => f.reason == bisimlab::engine::FailureReason::NotStable,
        };
        prop_assert_eq!(literal, step_ok);
        if checked.is_ok() {
            prop_assert!(is_stable(&lts, &next).unwrap());
        }
    }

    #[test]
    fn single_splitter_follows_canonical_order(lts in arb_lts(10, 3)) {
        let trace = run_to_stable(&lts, Refine::SingleSplitter);
        let mut pi = lts.initial_partition().clone();
        for after in trace.partitions().skip(1) {
            let expected = plain_single_splitter_step(&lts, &pi);
            prop_assert_eq!(expected.as_ref(), Some(&after));
            match refine_step(&lts, &pi, Refine::SingleSplitter).unwrap() {
                StepOutcome::Refined { partition, .. } => prop_assert_eq!(&partition, &after),
                StepOutcome::Stable => prop_assert!(false, "stable too early"),
            }
            pi = after;
        }
        prop_assert!(plain_single_splitter_step(&lts, &pi).is_none());
    }

    #[test]
    fn brute_force_minimum_is_a_lower_bound(lts in arb_lts(6, 2)) {
        let search = search_valid_sequences(&lts, 10).unwrap();
        let oracle = bisimilarity_oracle(&lts);
        // Every valid sequence ends in the coarsest stable refinement.
        prop_assert_eq!(search.terminals.clone(), vec![oracle]);
        for strategy in Refine::ALL {
            prop_assert!(search.min_irc <= run_to_stable(&lts, strategy).total_irc());
        }
        prop_assert!(search.min_irc <= pirc_run(&lts).trace.total_irc());
    }

    #[test]
    fn rounds_are_finest_valid_refinements(lts in arb_lts(8, 2)) {
        let mut pi = lts.initial_partition().clone();
        loop {
            let finest = parallel_round(&lts, &pi).unwrap();
            let all = enumerate_valid_refinements(&lts, &pi, None).unwrap();
            if finest == pi {
                prop_assert!(all.is_empty());
                break;
            }
            prop_assert!(all.contains(&finest));
            for candidate in &all {
                prop_assert!(is_valid_refinement(&lts, &pi, candidate).unwrap());
                prop_assert!(finest.refines(candidate));
            }
            pi = finest;
        }
    }

    #[test]
    fn enumeration_matches_literal_filter(lts in arb_lts(6, 2)) {
        let pi = lts.initial_partition();
        let mut fast = enumerate_valid_refinements(&lts, pi, None).unwrap();
        let mut slow: Vec<Partition> = all_refinements(pi)
            .into_iter()
            .filter(|p| is_valid_refinement(&lts, pi, p).unwrap())
            .collect();
        fast.sort_by_key(Partition::canonical_assignment);
        slow.sort_by_key(Partition::canonical_assignment);
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn end_structure_partition_sits_between(lts in arb_lts(12, 2)) {
        let es = end_structure_partition(&lts);
        prop_assert!(es.refines(lts.initial_partition()));
        prop_assert!(bisimilarity_oracle(&lts).refines(&es));
        let trace = run_from(&lts, &es, Refine::SingleSplitter).unwrap();
        prop_assert_eq!(verify_trace(&lts, &trace), Ok(()));
    }

    #[test]
    fn stability_matches_signature_fixpoint(lts in arb_lts(8, 2)) {
        let pi = lts.initial_partition();
        let fixpoint = parallel_round(&lts, pi).unwrap() == *pi;
        prop_assert_eq!(fixpoint, is_stable(&lts, pi).unwrap());
        let unstable_under_some = pi.blocks().any(|b| !is_stable_under(&lts, pi, b).unwrap());
        prop_assert_eq!(unstable_under_some, !fixpoint);
    }

    #[test]
    fn repeating_prefix_matches_divisor_search(word in proptest::collection::vec(0..3usize, 1..24)) {
        let (v, e) = least_repeating_prefix(&word).unwrap();
        let brute = (1..=word.len())
            .find(|&p| word.len() % p == 0 && (0..word.len()).all(|i| word[i] == word[i % p]))
            .unwrap();
        prop_assert_eq!(v.len(), brute);
        prop_assert_eq!(v.len() * e, word.len());
    }

    #[test]
    fn rotation_is_least_and_invariant(word in proptest::collection::vec(0..3usize, 1..20)) {
        let (least, offset) = canonical_rotation(&word);
        prop_assert_eq!(&rotate(&word, offset), &least);
        let brute = (0..word.len()).map(|i| rotate(&word, i)).min().unwrap();
        prop_assert_eq!(&least, &brute);
        for i in 0..word.len() {
            prop_assert_eq!(&canonical_rotation(&rotate(&word, i)).0, &least);
        }
    }

    #[test]
    fn reduction_rule_preserves_words(r in proptest::collection::vec(0..2usize, 1..8)) {
        // x = last(r): x·r^ω equals rotate_right(r)^ω.
        let x = *r.last().unwrap();
        let p = r.len();
        let lhs: Vec<usize> = std::iter::once(x).chain(r.iter().copied().cycle()).take(3 * p).collect();
        let right = rotate(&r, p - 1);
        let rhs: Vec<usize> = right.iter().copied().cycle().take(3 * p).collect();
        prop_assert_eq!(lhs, rhs);
    }
}

fn all_refinements(pi: &Partition) -> Vec<Partition> {
    // Every labelling of states refined by pi, deduplicated.
    let n = pi.state_count();
    let mut out: Vec<Partition> = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        let candidate = bisimlab::common_refinement(pi, &common::dense(labels.clone())).unwrap();
        if !out.contains(&candidate) {
            out.push(candidate);
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            labels[i] += 1;
            if labels[i] < n {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn roberts_matches_oracle_and_counts_linearly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let lts = common::random_functional(&mut rng, 300);
        let result = roberts_partition(&lts).unwrap();
        assert_eq!(result.partition, bisimilarity_oracle(&lts));
        let n = lts.state_count();
        assert!(
            result.comparisons <= 8 * n,
            "{} comparisons for n={n}",
            result.comparisons
        );
        worst = worst.max(result.comparisons as f64 / n as f64);
        // Keys and partition agree.
        let keys = result.keys();
        for s in 0..n {
            for t in 0..n {
                assert_eq!(keys[s] == keys[t], result.partition.same_block(s, t));
            }
        }
    }
    assert!(worst > 0.0);
}

#[test]
fn roberts_cross_cycle_keys() {
    // Two cycles with labels AN and NA, and one with AAN: the first two
    // share their anchor, so states align across cycles.
    let t = Transition::new;
    let lts = Lts::new(
        7,
        vec!["a".into()],
        [
            t(0, 0, 1),
            t(1, 0, 0),
            t(2, 0, 3),
            t(3, 0, 2),
            t(4, 0, 5),
            t(5, 0, 6),
            t(6, 0, 4),
        ],
        Partition::from_block_of(vec![0, 1, 1, 0, 0, 0, 1]).unwrap(),
    )
    .unwrap();
    let result = roberts_partition(&lts).unwrap();
    assert!(result.partition.same_block(0, 3));
    assert!(result.partition.same_block(1, 2));
    assert!(!result.partition.same_block(0, 4));
    assert_eq!(result.key(0).anchor, result.key(2).anchor);
    assert_ne!(result.key(0).anchor, result.key(4).anchor);
    assert_eq!(result.partition, bisimilarity_oracle(&lts));
}

#[test]
fn random_nondeterministic_roberts_input_is_rejected() {
    let t = Transition::new;
    let lts = Lts::new(
        2,
        vec!["a".into()],
        [t(0, 0, 0), t(0, 0, 1)],
        Partition::unit(2),
    )
    .unwrap();
    assert!(roberts_partition(&lts).is_err());
}

#[test]
fn sequential_splitter_minimum_is_its_only_sequence() {
    for n in 3..=9 {
        let lts = gen_sequential_splitter(n).unwrap();
        assert_eq!(min_irc_bruteforce(&lts, 10).unwrap(), n - 2);
    }
}

#[test]
fn pointer_jumping_on_random_forests() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    use rand::Rng;
    for _ in 0..100 {
        let n = rng.gen_range(2..200);
        // Each state points to a smaller one; state 0 is the target.
        let transitions: Vec<Transition> = (1..n)
            .map(|s| Transition::new(s, 0, rng.gen_range(0..s)))
            .collect();
        let lts = Lts::new(n, vec!["a".into()], transitions, Partition::unit(n)).unwrap();
        let (dist, rounds) = pointer_jump_distances(&lts, &[0]).unwrap();
        let mut longest = 0;
        for s in 0..n {
            let mut u = s;
            let mut walked = 0;
            while u != 0 {
                u = lts.next(u, 0).unwrap();
                walked += 1;
            }
            assert_eq!(dist[s], walked);
            longest = longest.max(walked);
        }
        let expected = (usize::BITS - (longest.max(1) - 1).leading_zeros()) as usize;
        assert_eq!(rounds, if longest <= 1 { 0 } else { expected });
    }
}
