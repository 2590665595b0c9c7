//! Round-based parallel refinement: each round replaces the partition by
//! its finest valid refinement. Also exhaustive enumeration of valid
//! refinements and pointer jumping on chains.

use crate::engine::{split_by_classes, BoundCheck, Relation};
use crate::error::{Error, Result};
use crate::families::Family;
use crate::lts::{signature_ids, Lts};
use crate::oracle::set_partitions;
use crate::partition::{Partition, State};
use crate::trace::RefinementTrace;

/// State bound for [`enumerate_valid_refinements`] without an explicit limit.
pub const DEFAULT_ENUMERATION_BOUND: usize = 12;

/// The finest valid refinement of `pi`: every block split into classes of
/// equal one-step signature. Returns `pi` itself iff it is stable.
pub fn parallel_round(lts: &Lts, pi: &Partition) -> Result<Partition> {
    lts.check_partition(pi)?;
    let class = signature_ids(lts, pi);
    Ok(split_by_classes(pi, &class))
}

#[derive(Debug, Clone)]
pub struct RoundTrace {
    pub trace: RefinementTrace,
    /// Number of refinements performed.
    pub rounds: usize,
}

impl RoundTrace {
    pub fn partitions(&self) -> Vec<Partition> {
        self.trace.partitions().collect()
    }

    /// Partitions including the starting one: `rounds + 1`.
    pub fn partition_count(&self) -> usize {
        self.trace.partition_count()
    }

    pub fn block_counts(&self) -> Vec<usize> {
        self.trace.partitions().map(|p| p.block_count()).collect()
    }
}

/// Iterates [`parallel_round`] from the initial partition until stable.
pub fn pirc_run(lts: &Lts) -> RoundTrace {
    let mut trace = RefinementTrace::new(lts.initial_partition().clone());
    loop {
        let next = parallel_round(lts, trace.last()).expect("partition fits the system");
        if next.block_count() == trace.last().block_count() {
            break;
        }
        trace.push(next, None).expect("rounds refine");
    }
    RoundTrace {
        rounds: trace.steps(),
        trace,
    }
}

/// Round counts known for recognised families. For `D_n` both the number
/// of refinements (`n - 2`) and of partitions (`n - 1`) are checked.
pub fn round_bound_checks(family: Family, run: &RoundTrace) -> Vec<BoundCheck> {
    match family {
        Family::Bisplitter { k } => vec![BoundCheck::new(
            "bisplitter_rounds",
            Relation::Equal,
            k - 1,
            run.rounds,
        )],
        Family::SequentialSplitter { n } => vec![
            BoundCheck::new("seqsplit_rounds", Relation::Equal, n - 2, run.rounds),
            BoundCheck::new(
                "seqsplit_partitions",
                Relation::Equal,
                n - 1,
                run.partition_count(),
            ),
        ],
        Family::FanIn { .. } => vec![BoundCheck::new(
            "fanin_rounds",
            Relation::Equal,
            1,
            run.rounds,
        )],
        _ => Vec::new(),
    }
}

/// Every valid refinement of `pi`.
///
/// A refinement is valid iff it is strict and coarser than the signature
/// split of `pi`, so the candidates are, per block, the set partitions of
/// its signature classes. Without `limit` the system may have at most
/// [`DEFAULT_ENUMERATION_BOUND`] states; with `limit` the call refuses when
/// more than `limit` refinements exist.
pub fn enumerate_valid_refinements(
    lts: &Lts,
    pi: &Partition,
    limit: Option<usize>,
) -> Result<Vec<Partition>> {
    lts.check_partition(pi)?;
    if limit.is_none() && lts.state_count() > DEFAULT_ENUMERATION_BOUND {
        return Err(Error::BoundExceeded {
            what: "LTS",
            size: lts.state_count(),
            bound: DEFAULT_ENUMERATION_BOUND,
        });
    }
    let class = signature_ids(lts, pi);
    // Signature classes of every block, each as its member list.
    let per_block: Vec<Vec<Vec<State>>> = pi
        .blocks()
        .map(|members| {
            let mut groups: Vec<Vec<State>> = Vec::new();
            for &s in members {
                match groups.iter_mut().find(|g| class[g[0]] == class[s]) {
                    Some(g) => g.push(s),
                    None => groups.push(vec![s]),
                }
            }
            groups
        })
        .collect();
    let total = per_block
        .iter()
        .map(|groups| bell(groups.len()))
        .try_fold(1usize, |acc, b| b.and_then(|b| acc.checked_mul(b)))
        .map(|c| c - 1);
    if let Some(limit) = limit {
        match total {
            Some(count) if count <= limit => {}
            _ => return Err(Error::LimitExceeded { limit }),
        }
    }
    let choices: Vec<Vec<Vec<usize>>> = per_block
        .iter()
        .map(|groups| set_partitions(groups.len()))
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; choices.len()];
    loop {
        let mut block_of = vec![0usize; lts.state_count()];
        let mut next = 0;
        for (b, groups) in per_block.iter().enumerate() {
            let labels = &choices[b][pick[b]];
            for (g, group) in groups.iter().enumerate() {
                for &s in group {
                    block_of[s] = next + labels[g];
                }
            }
            next += labels.iter().max().map_or(0, |m| m + 1);
        }
        if next > pi.block_count() {
            out.push(Partition::from_block_of(block_of).expect("dense by construction"));
        }
        let mut i = 0;
        loop {
            if i == pick.len() {
                return Ok(out);
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn bell(k: usize) -> Option<usize> {
    // Bell triangle.
    let mut row = vec![1usize];
    for _ in 0..k {
        let mut next = vec![*row.last().expect("rows are nonempty")];
        for &x in &row {
            next.push(next.last().expect("nonempty").checked_add(x)?);
        }
        row = next;
    }
    Some(row[0])
}

/// Distance of every state to `target` along a chain, by pointer jumping.
/// Returns the distances and the number of jumping rounds.
///
/// Every state outside `target` must have exactly one successor (over all
/// actions) and reach `target`.
pub fn pointer_jump_distances(lts: &Lts, target: &[State]) -> Result<(Vec<usize>, usize)> {
    let n = lts.state_count();
    let mut in_target = vec![false; n];
    for &t in target {
        if t >= n {
            return Err(Error::StateOutOfRange {
                state: t,
                state_count: n,
            });
        }
        in_target[t] = true;
    }
    let mut next: Vec<State> = (0..n).collect();
    let mut weight = vec![0usize; n];
    for s in (0..n).filter(|&s| !in_target[s]) {
        let mut succ = (0..lts.action_count()).flat_map(|a| lts.successors(s, a).iter().copied());
        let first = succ.next();
        let single = match first {
            Some(t) => succ.all(|u| u == t),
            None => false,
        };
        if !single {
            return Err(Error::Unsupported(format!(
                "state {s} must have exactly one successor"
            )));
        }
        next[s] = first.expect("checked above");
        weight[s] = 1;
    }
    // Every state must reach the target.
    let mut reaches = in_target.clone();
    let mut on_path = vec![false; n];
    for s in 0..n {
        let mut path = Vec::new();
        let mut u = s;
        while !reaches[u] && !on_path[u] {
            on_path[u] = true;
            path.push(u);
            u = next[u];
        }
        for &p in &path {
            on_path[p] = false;
        }
        if !reaches[u] {
            return Err(Error::Unsupported(format!(
                "state {s} does not reach the target"
            )));
        }
        for p in path {
            reaches[p] = true;
        }
    }
    let mut rounds = 0;
    while (0..n).any(|s| !in_target[next[s]]) {
        let (old_next, old_weight) = (next.clone(), weight.clone());
        for s in 0..n {
            weight[s] = old_weight[s] + old_weight[old_next[s]];
            next[s] = old_next[old_next[s]];
        }
        rounds += 1;
    }
    Ok((weight, rounds))
}
