#![allow(dead_code)]

use bisimlab::{Lts, Partition, Transition};
use rand::Rng;

/// Random partition of `0..n` into at most `max_blocks` blocks.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize, max_blocks: usize) -> Partition {
    let blocks = rng.gen_range(1..=max_blocks.min(n).max(1));
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
    dense(labels)
}

/// Relabels arbitrary labels by first occurrence.
pub fn dense(labels: Vec<usize>) -> Partition {
    let mut map = std::collections::HashMap::new();
    let block_of = labels
        .into_iter()
        .map(|l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    Partition::from_block_of(block_of).unwrap()
}

/// Random system with `1..=max_n` states and `1..=max_actions` actions.
/// Deterministic systems have exactly one successor per state and action;
/// otherwise every state has between zero and three.
pub fn random_lts<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_actions: usize,
    deterministic: bool,
) -> Lts {
    let n = rng.gen_range(1..=max_n);
    let actions = rng.gen_range(1..=max_actions);
    let mut transitions = Vec::new();
    for s in 0..n {
        for a in 0..actions {
            let count = if deterministic {
                1
            } else {
                rng.gen_range(0..=3)
            };
            for _ in 0..count {
                transitions.push(Transition::new(s, a, rng.gen_range(0..n)));
            }
        }
    }
    let names = (0..actions).map(|a| format!("a{a}")).collect();
    let pi = random_partition(rng, n, 4);
    Lts::new(n, names, transitions, pi).unwrap()
}

/// Random deterministic one-action system with `2..=max_n` states and a
/// random two-block initial partition. Half of the instances are built
/// from cycles with periodic labels and random trees, so that cycle words
/// are proper powers and different cycles share behaviour.
pub fn random_functional<R: Rng>(rng: &mut R, max_n: usize) -> Lts {
    let n = rng.gen_range(2..=max_n);
    let mut next = vec![0usize; n];
    let mut label = vec![0usize; n];
    if rng.gen_bool(0.5) {
        for s in 0..n {
            next[s] = rng.gen_range(0..n);
            label[s] = rng.gen_range(0..2);
        }
    } else {
        let pattern: Vec<usize> = (0..rng.gen_range(1..=4))
            .map(|_| rng.gen_range(0..2))
            .collect();
        let mut s = 0;
        while s < n {
            let reps = rng.gen_range(1..=3);
            let len = (pattern.len() * reps).min(n - s);
            let shift = rng.gen_range(0..pattern.len());
            for i in 0..len {
                next[s + i] = s + (i + 1) % len;
                label[s + i] = pattern[(i + shift) % pattern.len()];
            }
            s += len;
            if rng.gen_bool(0.5) {
                break;
            }
        }
        for t in s..n {
            next[t] = rng.gen_range(0..t);
            label[t] = rng.gen_range(0..2);
        }
    }
    if label.iter().all(|&l| l == label[0]) {
        label[0] = 1 - label[0];
    }
    let transitions = (0..n).map(|s| Transition::new(s, 0, next[s]));
    Lts::new(n, vec!["a".into()], transitions, dense(label)).unwrap()
}
