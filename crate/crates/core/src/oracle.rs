//! Brute-force oracles: greatest bisimulation by pairwise relation
//! refinement, and the exact minimum refinement cost by exhaustive search
//! over valid refinement sequences.
//!
//! Neither routine uses the partition refinement engines, so both can be
//! used to check them.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::lts::{is_stable, is_valid_refinement, Lts};
use crate::partition::{refinement_cost, Partition, State};

pub const DEFAULT_BRUTE_FORCE_BOUND: usize = 10;

struct PairRelation {
    n: usize,
    bits: Vec<bool>,
}

impl PairRelation {
    fn get(&self, s: State, t: State) -> bool {
        self.bits[s * self.n + t]
    }

    fn remove(&mut self, s: State, t: State) {
        self.bits[s * self.n + t] = false;
        self.bits[t * self.n + s] = false;
    }
}

/// Partition induced by the greatest bisimulation that respects the
/// initial partition.
///
/// Starts from "same initial block" on pairs and deletes pairs lacking
/// matching transitions until nothing changes. Deleting `(s, t)` only
/// re-queues pairs of predecessors under a common action.
pub fn bisimilarity_oracle(lts: &Lts) -> Partition {
    let n = lts.state_count();
    let pi0 = lts.initial_partition();
    let mut rel = PairRelation {
        n,
        bits: vec![false; n * n],
    };
    let mut queued = vec![false; n * n];
    let mut work: VecDeque<(State, State)> = VecDeque::new();
    for s in 0..n {
        for t in 0..n {
            if pi0.same_block(s, t) {
                rel.bits[s * n + t] = true;
                if s < t {
                    queued[s * n + t] = true;
                    work.push_back((s, t));
                }
            }
        }
    }

    let matched = |rel: &PairRelation, s: State, t: State| {
        (0..lts.action_count()).all(|a| {
            let ss = lts.successors(s, a);
            let ts = lts.successors(t, a);
            ss.iter().all(|&s2| ts.iter().any(|&t2| rel.get(s2, t2)))
                && ts.iter().all(|&t2| ss.iter().any(|&s2| rel.get(s2, t2)))
        })
    };

    while let Some((s, t)) = work.pop_front() {
        queued[s * n + t] = false;
        if !rel.get(s, t) || matched(&rel, s, t) {
            continue;
        }
        rel.remove(s, t);
        for a in 0..lts.action_count() {
            for &p in lts.predecessors(s, a) {
                for &q in lts.predecessors(t, a) {
                    let (p, q) = if p < q { (p, q) } else { (q, p) };
                    if p != q && rel.get(p, q) && !queued[p * n + q] {
                        queued[p * n + q] = true;
                        work.push_back((p, q));
                    }
                }
            }
        }
    }

    let mut block_of = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if block_of[s] != usize::MAX {
            continue;
        }
        for t in s..n {
            if rel.get(s, t) {
                block_of[t] = next;
            }
        }
        next += 1;
    }
    Partition::from_block_of(block_of).expect("bisimilarity is an equivalence")
}

/// Outcome of the exhaustive search over valid refinement sequences.
#[derive(Debug, Clone)]
pub struct SequenceSearch {
    pub min_irc: usize,
    /// Distinct stable partitions in which some valid sequence ends.
    pub terminals: Vec<Partition>,
    /// Distinct partitions visited.
    pub visited: usize,
}

/// Exact minimum total refinement cost over all valid refinement
/// sequences from the initial partition, for systems of at most `bound`
/// states.
pub fn min_irc_bruteforce(lts: &Lts, bound: usize) -> Result<usize> {
    Ok(search_valid_sequences(lts, bound)?.min_irc)
}

/// Depth-first enumeration of every valid refinement sequence, memoised on
/// canonical partition encodings.
pub fn search_valid_sequences(lts: &Lts, bound: usize) -> Result<SequenceSearch> {
    if lts.state_count() > bound {
        return Err(Error::BoundExceeded {
            what: "LTS",
            size: lts.state_count(),
            bound,
        });
    }
    let mut memo: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut terminals: HashSet<Partition> = HashSet::new();
    let min_irc = cheapest(lts, lts.initial_partition(), &mut memo, &mut terminals)?;
    let mut terminals: Vec<Partition> = terminals.into_iter().collect();
    terminals.sort_by_key(Partition::canonical_assignment);
    Ok(SequenceSearch {
        min_irc,
        terminals,
        visited: memo.len(),
    })
}

fn cheapest(
    lts: &Lts,
    pi: &Partition,
    memo: &mut HashMap<Vec<usize>, usize>,
    terminals: &mut HashSet<Partition>,
) -> Result<usize> {
    let key = pi.canonical_assignment();
    if let Some(&cost) = memo.get(&key) {
        return Ok(cost);
    }
    let best = if is_stable(lts, pi)? {
        terminals.insert(pi.clone());
        0
    } else {
        let mut best = usize::MAX;
        for candidate in refinements_of(pi) {
            if is_valid_refinement(lts, pi, &candidate)? {
                let rest = cheapest(lts, &candidate, memo, terminals)?;
                best = best.min(refinement_cost(pi, &candidate)? + rest);
            }
        }
        debug_assert_ne!(
            best,
            usize::MAX,
            "unstable partitions always have a valid refinement"
        );
        best
    };
    memo.insert(key, best);
    Ok(best)
}

/// All set partitions of `0..k` as restricted growth strings.
pub(crate) fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for label in 0..=limit {
            prefix.push(label);
            grow(prefix, max.max(label), k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(k), 0, k, &mut out);
    out
}

/// Every refinement of `pi` (including `pi` itself).
fn refinements_of(pi: &Partition) -> Vec<Partition> {
    let per_block: Vec<Vec<Vec<usize>>> = pi.blocks().map(|b| set_partitions(b.len())).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_block.len()];
    loop {
        let mut block_of = vec![0usize; pi.state_count()];
        let mut next = 0;
        for (b, members) in pi.blocks().enumerate() {
            let labels = &per_block[b][choice[b]];
            let used = labels.iter().max().map_or(0, |m| m + 1);
            for (i, &s) in members.iter().enumerate() {
                block_of[s] = next + labels[i];
            }
            next += used;
        }
        out.push(Partition::from_block_of(block_of).expect("dense by construction"));
        // Odometer over the per-block choices.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] < per_block[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::Transition;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..7).map(|k| set_partitions(k).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn refinements_count_is_product_of_bell_numbers() {
        let pi = Partition::from_block_of(vec![0, 0, 0, 1, 1]).unwrap();
        assert_eq!(refinements_of(&pi).len(), 5 * 2);
    }

    #[test]
    fn self_loop_is_one_class() {
        let lts = Lts::new(
            1,
            vec!["a".into()],
            [Transition::new(0, 0, 0)],
            Partition::unit(1),
        )
        .unwrap();
        assert_eq!(bisimilarity_oracle(&lts), Partition::unit(1));
        assert_eq!(min_irc_bruteforce(&lts, 10).unwrap(), 0);
    }

    #[test]
    fn nondeterministic_classic() {
        // a.(b + c) versus a.b + a.c
        let t = Transition::new;
        let lts = Lts::new(
            7,
            vec!["a".into(), "b".into(), "c".into()],
            [
                t(0, 0, 1),
                t(1, 1, 6),
                t(1, 2, 6),
                t(2, 0, 3),
                t(2, 0, 4),
                t(3, 1, 6),
                t(4, 2, 6),
            ],
            Partition::unit(7),
        )
        .unwrap();
        let bisim = bisimilarity_oracle(&lts);
        assert!(!bisim.same_block(0, 2));
        assert!(bisim.same_block(5, 6));
        assert!(is_stable(&lts, &bisim).unwrap());
    }

    #[test]
    fn brute_force_refuses_large_input() {
        let lts = Lts::new(11, vec![], [], Partition::unit(11)).unwrap();
        assert!(matches!(
            min_irc_bruteforce(&lts, 10),
            Err(Error::BoundExceeded {
                size: 11,
                bound: 10,
                ..
            })
        ));
    }
}
