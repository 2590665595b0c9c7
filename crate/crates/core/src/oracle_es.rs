//! Refinement with an end-structure oracle: the initial partition is first
//! refined, at no cost, by the bisimilarity classes of end-structure states.
//! Also the projections used to transfer refinement sequences from `B_k`
//! and `C_k` down to smaller bisplitters.

use std::collections::HashMap;

use crate::engine::{family_bound_checks, run_from, BoundCheck, CostReport, Relation, Strategy};
use crate::error::{Error, Result};
use crate::families::{Family, LayeredLayout};
use crate::lts::Lts;
use crate::oracle::bisimilarity_oracle;
use crate::partition::{Partition, State};
use crate::roberts::end_structures;
use crate::trace::RefinementTrace;

/// Bisimilarity classes of end-structure states (with all their members),
/// plus the remainder of every initial block.
pub fn end_structure_partition(lts: &Lts) -> Partition {
    let bisim = bisimilarity_oracle(lts);
    let mut oracle_class = vec![false; bisim.block_count()];
    for e in end_structures(lts) {
        for s in e.states {
            oracle_class[bisim.block_of(s)] = true;
        }
    }
    let mut ids: HashMap<(bool, usize), usize> = HashMap::new();
    let block_of = (0..lts.state_count())
        .map(|s| {
            let key = if oracle_class[bisim.block_of(s)] {
                (true, bisim.block_of(s))
            } else {
                (false, lts.initial_partition().block_of(s))
            };
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect();
    Partition::from_block_of(block_of).expect("dense by construction")
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub base_lts: Lts,
    /// The updated initial partition.
    pub updated_partition: Partition,
    pub trace: RefinementTrace,
}

pub fn run_with_oracle(lts: &Lts, strategy: Strategy) -> OracleRun {
    let updated_partition = end_structure_partition(lts);
    let trace = run_from(lts, &updated_partition, strategy).expect("partition fits the system");
    OracleRun {
        base_lts: lts.clone(),
        updated_partition,
        trace,
    }
}

/// Lower bound on oracle runs of `B_k`: `IRC(B_{k-2}) = (k-3)·2^(k-3)`.
pub fn oracle_irc_lower(k: usize) -> usize {
    if k <= 3 {
        0
    } else {
        (k - 3) << (k - 3)
    }
}

/// Cost summary of an oracle run, with the bounds for recognised families.
pub fn oracle_costs(run: &OracleRun) -> CostReport {
    let trace = &run.trace;
    let mut bound_checks = Vec::new();
    match Family::identify(&run.base_lts) {
        Some(Family::Bisplitter { k }) if k >= 2 => {
            bound_checks.push(BoundCheck::new(
                "oracle_initial_blocks",
                Relation::Equal,
                4,
                run.updated_partition.block_count(),
            ));
            if k >= 3 {
                bound_checks.push(BoundCheck::new(
                    "oracle_irc_lower",
                    Relation::AtLeast,
                    oracle_irc_lower(k),
                    trace.total_irc(),
                ));
            }
        }
        Some(family @ Family::SequentialSplitter { .. }) => {
            bound_checks = family_bound_checks(family, trace.steps(), trace.total_irc());
        }
        _ => {}
    }
    CostReport {
        n: run.base_lts.state_count(),
        m: run.base_lts.transition_count(),
        steps: trace.steps(),
        total_irc: trace.total_irc(),
        final_blocks: trace.last().block_count(),
        step_costs: trace.step_costs(),
        bound_checks,
    }
}

/// Image of `pi` under a partial map from states to `0..target_count`.
fn project(pi: &Partition, target_count: usize, preimage: impl Fn(State) -> State) -> Partition {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let block_of = (0..target_count)
        .map(|t| {
            let next = ids.len();
            *ids.entry(pi.block_of(preimage(t))).or_insert(next)
        })
        .collect();
    Partition::from_block_of(block_of).expect("dense by construction")
}

/// Projects a partition of `B_k`'s states to `B_{k-2}` by dropping the
/// prefix `11`; states not starting with `11` are ignored.
pub fn project_prefix11(pi: &Partition, k: usize) -> Result<Partition> {
    if k <= 2 {
        return Err(Error::InvalidParameter("k must be > 2".into()));
    }
    if k > usize::BITS as usize - 1 || pi.state_count() != 1 << k {
        return Err(Error::SizeMismatch {
            expected: 1usize.checked_shl(k as u32).unwrap_or(0),
            found: pi.state_count(),
        });
    }
    let high = 3 << (k - 2);
    Ok(project(pi, 1 << (k - 2), |sigma| high | sigma))
}

/// Projects a partition of `C_k`'s states to `B_k` through the stake states
/// at `level`.
pub fn project_level(pi: &Partition, k: usize, level: usize) -> Result<Partition> {
    if !(2..=8).contains(&k) {
        return Err(Error::InvalidParameter("k must be between 2 and 8".into()));
    }
    let layout = LayeredLayout::new(k);
    if pi.state_count() != layout.state_count() {
        return Err(Error::SizeMismatch {
            expected: layout.state_count(),
            found: pi.state_count(),
        });
    }
    if !(1..=layout.levels()).contains(&level) {
        return Err(Error::InvalidParameter(format!(
            "level must be between 1 and {}",
            layout.levels()
        )));
    }
    Ok(project(pi, layout.strings(), |sigma| {
        layout.stake(sigma, level)
    }))
}

/// Drops consecutive duplicates.
pub fn dedup_partitions(partitions: Vec<Partition>) -> Vec<Partition> {
    let mut out: Vec<Partition> = Vec::with_capacity(partitions.len());
    for p in partitions {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

/// Maps every partition of `trace`, removes duplicates, and replaces the
/// first remaining image by `start`.
pub fn project_trace(
    trace: &RefinementTrace,
    start: &Partition,
    map: impl Fn(&Partition) -> Result<Partition>,
) -> Result<RefinementTrace> {
    let images = trace
        .partitions()
        .map(|p| map(&p))
        .collect::<Result<Vec<_>>>()?;
    let mut images = dedup_partitions(images);
    images[0] = start.clone();
    RefinementTrace::from_partitions(dedup_partitions(images))
}
