//! Refinement traces: a starting partition followed by refinement steps.
//!
//! Long traces (thousands of steps on a few thousand states) are stored as
//! per-step deltas of the block assignment; partitions are rebuilt on
//! demand by replaying them.

use crate::error::{Error, Result};
use crate::lts::ActionId;
use crate::partition::{refinement_cost, BlockId, Partition, State};

/// The splitter that caused a single-splitter step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Splitter {
    pub block: BlockId,
    pub action: ActionId,
}

#[derive(Debug, Clone)]
struct Step {
    changes: Vec<(State, BlockId)>,
    cost: usize,
    splitter: Option<Splitter>,
}

#[derive(Debug, Clone)]
pub struct RefinementTrace {
    first: Partition,
    last: Partition,
    steps: Vec<Step>,
    total_irc: usize,
}

impl RefinementTrace {
    pub fn new(initial: Partition) -> RefinementTrace {
        RefinementTrace {
            last: initial.clone(),
            first: initial,
            steps: Vec::new(),
            total_irc: 0,
        }
    }

    /// Builds a trace from an explicit partition sequence. Every partition
    /// must refine its predecessor; strictness is not required here and is
    /// left to [`crate::engine::verify_trace`].
    pub fn from_partitions(partitions: Vec<Partition>) -> Result<RefinementTrace> {
        let mut iter = partitions.into_iter();
        let first = iter.next().ok_or_else(|| {
            Error::InvalidParameter("a trace needs at least one partition".into())
        })?;
        let mut trace = RefinementTrace::new(first);
        for next in iter {
            trace.push(next, None)?;
        }
        Ok(trace)
    }

    /// Appends a partition refining the current last one.
    pub fn push(&mut self, next: Partition, splitter: Option<Splitter>) -> Result<usize> {
        let cost = refinement_cost(&self.last, &next)?;
        let changes = (0..next.state_count())
            .filter(|&s| next.block_of(s) != self.last.block_of(s))
            .map(|s| (s, next.block_of(s)))
            .collect();
        self.steps.push(Step {
            changes,
            cost,
            splitter,
        });
        self.total_irc += cost;
        self.last = next;
        Ok(cost)
    }

    pub fn first(&self) -> &Partition {
        &self.first
    }

    pub fn last(&self) -> &Partition {
        &self.last
    }

    /// Number of refinements, i.e. partitions minus one.
    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    pub fn partition_count(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn step_costs(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.cost).collect()
    }

    pub fn splitters(&self) -> Vec<Option<Splitter>> {
        self.steps.iter().map(|s| s.splitter).collect()
    }

    pub fn total_irc(&self) -> usize {
        self.total_irc
    }

    /// Replays the trace, yielding every partition from first to last.
    pub fn partitions(&self) -> impl Iterator<Item = Partition> + '_ {
        let mut assignment = self.first.assignment().to_vec();
        let mut pending = Some(self.first.clone());
        let mut steps = self.steps.iter();
        std::iter::from_fn(move || {
            if let Some(p) = pending.take() {
                return Some(p);
            }
            let step = steps.next()?;
            for &(s, b) in &step.changes {
                assignment[s] = b;
            }
            Some(Partition::from_block_of(assignment.clone()).expect("replayed trace stays dense"))
        })
    }

    /// Consecutive `(before, after)` pairs.
    pub fn windows(&self) -> impl Iterator<Item = (Partition, Partition)> + '_ {
        let mut iter = self.partitions();
        let mut prev = iter.next();
        std::iter::from_fn(move || {
            let next = iter.next()?;
            let before = prev.replace(next.clone())?;
            Some((before, next))
        })
    }
}
