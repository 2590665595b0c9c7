//! Partition refinement engines producing costed refinement traces, and the
//! trace checker.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::Result;
use crate::families::{Family, LayeredLayout};
use crate::lts::{signature_ids, ActionId, Lts};
use crate::partition::{BlockId, Partition, State};
use crate::trace::{RefinementTrace, Splitter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Split by the first unstable `(splitter block, action)` pair, ordered
    /// by block id then action index. Every block unstable under that pair
    /// is split in the same step.
    SingleSplitter,
    /// Split every block into classes of equal one-step signature.
    FullSignature,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::SingleSplitter, Strategy::FullSignature];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SingleSplitter => "single-splitter",
            Strategy::FullSignature => "full-signature",
        }
    }

    pub fn from_name(name: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Stable,
    Refined {
        partition: Partition,
        splitter: Option<Splitter>,
    },
}

/// Splits each block of `pi` by `class` (which must refine `pi`). In every
/// block the largest part keeps the block id, ties going to the part with
/// the smallest state; other parts get fresh ids ordered by parent block
/// and smallest state.
pub(crate) fn split_by_classes(pi: &Partition, class: &[usize]) -> Partition {
    let mut block_of = pi.assignment().to_vec();
    let mut next = pi.block_count();
    let mut parts: Vec<(usize, Vec<State>)> = Vec::new();
    for members in pi.blocks() {
        parts.clear();
        for &s in members {
            match parts.iter_mut().find(|(c, _)| *c == class[s]) {
                Some((_, part)) => part.push(s),
                None => parts.push((class[s], vec![s])),
            }
        }
        if parts.len() < 2 {
            continue;
        }
        let keep = (0..parts.len())
            .max_by(|&i, &j| parts[i].1.len().cmp(&parts[j].1.len()).then(j.cmp(&i)))
            .expect("nonempty");
        for (i, (_, part)) in parts.iter().enumerate() {
            if i != keep {
                for &s in part {
                    block_of[s] = next;
                }
                next += 1;
            }
        }
    }
    Partition::from_block_of(block_of).expect("split keeps ids dense")
}

/// Working state of the single-splitter strategy. Pairs absent from
/// `dirty` are known to split nothing.
struct SplitterRefiner<'a> {
    lts: &'a Lts,
    block_of: Vec<BlockId>,
    members: Vec<Vec<State>>,
    dirty: BTreeSet<(BlockId, ActionId)>,
    mark: Vec<usize>,
    epoch: usize,
    hits: Vec<usize>,
}

impl<'a> SplitterRefiner<'a> {
    fn new(lts: &'a Lts, pi: &Partition) -> SplitterRefiner<'a> {
        let members: Vec<Vec<State>> = pi.blocks().map(<[State]>::to_vec).collect();
        let dirty = (0..members.len())
            .flat_map(|b| (0..lts.action_count()).map(move |a| (b, a)))
            .collect();
        SplitterRefiner {
            lts,
            block_of: pi.assignment().to_vec(),
            hits: vec![0; members.len()],
            members,
            dirty,
            mark: vec![0; lts.state_count()],
            epoch: 0,
        }
    }

    fn partition(&self) -> Partition {
        Partition::from_block_of(self.block_of.clone()).expect("dense by construction")
    }

    /// Performs the next split in canonical order, or returns `None` when
    /// the partition is stable.
    fn split_next(&mut self) -> Option<Splitter> {
        while let Some((splitter, action)) = self.dirty.pop_first() {
            self.epoch += 1;
            let mut touched: Vec<BlockId> = Vec::new();
            for i in 0..self.members[splitter].len() {
                let t = self.members[splitter][i];
                for &s in self.lts.predecessors(t, action) {
                    if self.mark[s] != self.epoch {
                        self.mark[s] = self.epoch;
                        let b = self.block_of[s];
                        if self.hits[b] == 0 {
                            touched.push(b);
                        }
                        self.hits[b] += 1;
                    }
                }
            }
            let mut unstable: Vec<BlockId> = touched
                .iter()
                .copied()
                .filter(|&b| self.hits[b] < self.members[b].len())
                .collect();
            for &b in &touched {
                self.hits[b] = 0;
            }
            if unstable.is_empty() {
                continue;
            }
            unstable.sort_unstable();
            for b in unstable {
                self.split_block(b);
            }
            return Some(Splitter {
                block: splitter,
                action,
            });
        }
        None
    }

    fn split_block(&mut self, b: BlockId) {
        let (inside, outside): (Vec<State>, Vec<State>) = self.members[b]
            .iter()
            .partition(|&&s| self.mark[s] == self.epoch);
        let first = self.members[b][0];
        let inside_keeps =
            inside.len() > outside.len() || (inside.len() == outside.len() && inside[0] == first);
        let (kept, moved) = if inside_keeps {
            (inside, outside)
        } else {
            (outside, inside)
        };
        let fresh = self.members.len();
        for &s in &moved {
            self.block_of[s] = fresh;
        }
        self.members[b] = kept;
        self.members.push(moved);
        self.hits.push(0);
        for a in 0..self.lts.action_count() {
            self.dirty.insert((b, a));
            self.dirty.insert((fresh, a));
        }
    }
}

/// One refinement step from `pi`, or [`StepOutcome::Stable`] iff `pi` is
/// stable.
pub fn refine_step(lts: &Lts, pi: &Partition, strategy: Strategy) -> Result<StepOutcome> {
    lts.check_partition(pi)?;
    Ok(match strategy {
        Strategy::SingleSplitter => {
            let mut refiner = SplitterRefiner::new(lts, pi);
            match refiner.split_next() {
                Some(splitter) => StepOutcome::Refined {
                    partition: refiner.partition(),
                    splitter: Some(splitter),
                },
                None => StepOutcome::Stable,
            }
        }
        Strategy::FullSignature => match signature_split(lts, pi) {
            Some(partition) => StepOutcome::Refined {
                partition,
                splitter: None,
            },
            None => StepOutcome::Stable,
        },
    })
}

fn signature_split(lts: &Lts, pi: &Partition) -> Option<Partition> {
    let class = signature_ids(lts, pi);
    let classes = class.iter().max().map_or(0, |c| c + 1);
    (classes > pi.block_count()).then(|| split_by_classes(pi, &class))
}

/// Refines the system's initial partition until it is stable.
pub fn run_to_stable(lts: &Lts, strategy: Strategy) -> RefinementTrace {
    run_from(lts, lts.initial_partition(), strategy).expect("initial partition fits the system")
}

/// Refines `start` until it is stable.
pub fn run_from(lts: &Lts, start: &Partition, strategy: Strategy) -> Result<RefinementTrace> {
    lts.check_partition(start)?;
    let mut trace = RefinementTrace::new(start.clone());
    match strategy {
        Strategy::SingleSplitter => {
            let mut refiner = SplitterRefiner::new(lts, start);
            while let Some(splitter) = refiner.split_next() {
                trace.push(refiner.partition(), Some(splitter))?;
            }
        }
        Strategy::FullSignature => {
            while let Some(next) = signature_split(lts, trace.last()) {
                trace.push(next, None)?;
            }
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    AtLeast,
}

impl Relation {
    pub fn holds(self, measured: usize, theoretical: usize) -> bool {
        match self {
            Relation::Equal => measured == theoretical,
            Relation::AtLeast => measured >= theoretical,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equal => "=",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub name: String,
    pub relation: Relation,
    pub theoretical: usize,
    pub measured: usize,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(name: &str, relation: Relation, theoretical: usize, measured: usize) -> BoundCheck {
        BoundCheck {
            name: name.to_string(),
            relation,
            theoretical,
            measured,
            pass: relation.holds(measured, theoretical),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub n: usize,
    pub m: usize,
    /// Number of refinements in the trace.
    pub steps: usize,
    pub total_irc: usize,
    pub final_blocks: usize,
    pub step_costs: Vec<usize>,
    pub bound_checks: Vec<BoundCheck>,
}

/// Exact refinement cost of every valid sequence on `B_k`.
pub fn bisplitter_irc(k: usize) -> usize {
    (k - 1) << (k - 1)
}

/// Lower bound on the refinement cost of `C_k`: `2^k · IRC(B_k)`.
pub fn layered_irc_lower(k: usize) -> usize {
    bisplitter_irc(k) << k
}

/// Family bounds applicable to a trace of `family` starting at its initial
/// partition.
pub fn family_bound_checks(family: Family, steps: usize, total_irc: usize) -> Vec<BoundCheck> {
    match family {
        Family::Bisplitter { k } => vec![BoundCheck::new(
            "bisplitter_exact_irc",
            Relation::Equal,
            bisplitter_irc(k),
            total_irc,
        )],
        Family::Layered { k } if k >= 3 => vec![BoundCheck::new(
            "layered_irc_lower",
            Relation::AtLeast,
            layered_irc_lower(k),
            total_irc,
        )],
        Family::SequentialSplitter { n } => vec![BoundCheck::new(
            "seqsplit_refinements",
            Relation::Equal,
            n - 2,
            steps,
        )],
        _ => Vec::new(),
    }
}

/// Summarises a trace. Bound checks are attached when the system is a
/// recognised family member and the trace starts at its initial partition.
pub fn trace_costs(lts: &Lts, trace: &RefinementTrace) -> Result<CostReport> {
    lts.check_partition(trace.first())?;
    let bound_checks = match Family::identify(lts) {
        Some(family) if trace.first() == lts.initial_partition() => {
            family_bound_checks(family, trace.steps(), trace.total_irc())
        }
        _ => Vec::new(),
    };
    Ok(CostReport {
        n: lts.state_count(),
        m: lts.transition_count(),
        steps: trace.steps(),
        total_irc: trace.total_irc(),
        final_blocks: trace.last().block_count(),
        step_costs: trace.step_costs(),
        bound_checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    SizeMismatch,
    NotARefinement,
    NotStrict,
    /// The pair is separated although neither state has a witness.
    NoWitness,
    /// The final partition is not stable; the pair differs in signature.
    NotStable,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::SizeMismatch => "partition size does not match the system",
            FailureReason::NotARefinement => "not a refinement of the previous partition",
            FailureReason::NotStrict => "refinement is not strict",
            FailureReason::NoWitness => "separated pair has no one-step witness",
            FailureReason::NotStable => "final partition is not stable",
        })
    }
}

/// First failure found by [`verify_trace`]. `step` is the index of the
/// partition at fault: `i` for the refinement from partition `i - 1` to
/// partition `i`, the last index for a stability failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFailure {
    pub step: usize,
    pub pair: Option<(State, State)>,
    pub reason: FailureReason,
}

impl fmt::Display for TraceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)?;
        if let Some((s, t)) = self.pair {
            write!(f, " (states {s} and {t})")?;
        }
        Ok(())
    }
}

impl std::error::Error for TraceFailure {}

/// Checks that every step is a valid refinement and that the last
/// partition is stable.
///
/// A step is valid iff it is strict and never separates two states with
/// the same one-step signature under the previous partition, so only the
/// blocks that actually split are examined.
pub fn verify_trace(lts: &Lts, trace: &RefinementTrace) -> std::result::Result<(), TraceFailure> {
    let n = lts.state_count();
    let fail = |step, pair, reason| TraceFailure { step, pair, reason };
    if trace.first().state_count() != n {
        return Err(fail(0, None, FailureReason::SizeMismatch));
    }
    for (step, (before, after)) in trace.windows().enumerate() {
        if !after.refines(&before) {
            return Err(fail(step + 1, None, FailureReason::NotARefinement));
        }
        if after.block_count() == before.block_count() {
            return Err(fail(step + 1, None, FailureReason::NotStrict));
        }
        for block in before.blocks() {
            let b = after.block_of(block[0]);
            if block.iter().all(|&s| after.block_of(s) == b) {
                continue;
            }
            if let Some(pair) = same_signature_split(lts, &before, block, |s| after.block_of(s)) {
                return Err(fail(step + 1, Some(pair), FailureReason::NoWitness));
            }
        }
    }
    let last = trace.last();
    let class = signature_ids(lts, last);
    for block in last.blocks() {
        if let Some(&t) = block.iter().find(|&&t| class[t] != class[block[0]]) {
            return Err(fail(
                trace.steps(),
                Some((block[0], t)),
                FailureReason::NotStable,
            ));
        }
    }
    Ok(())
}

/// A pair of `block` members with equal signature under `pi` but different
/// `target` values.
fn same_signature_split(
    lts: &Lts,
    pi: &Partition,
    block: &[State],
    target: impl Fn(State) -> usize,
) -> Option<(State, State)> {
    let mut seen: HashMap<Vec<(ActionId, BlockId)>, State> = HashMap::new();
    for &s in block {
        let mut sig: Vec<(ActionId, BlockId)> = (0..lts.action_count())
            .flat_map(|a| {
                lts.successors(s, a)
                    .iter()
                    .map(move |&t| (a, pi.block_of(t)))
            })
            .collect();
        sig.sort_unstable();
        sig.dedup();
        match seen.get(&sig) {
            Some(&first) if target(first) != target(s) => return Some((first, s)),
            Some(_) => {}
            None => {
                seen.insert(sig, s);
            }
        }
    }
    None
}

/// Whether `pi` (a partition of `C_k`) separates every pair of stake
/// states at level `l` from each other at all lower levels `m ≥ l` too.
pub fn downward_separation_holds(k: usize, pi: &Partition) -> bool {
    let layout = LayeredLayout::new(k);
    let strings = layout.strings();
    (1..layout.levels()).all(|level| {
        (0..strings).all(|s1| {
            (s1 + 1..strings).all(|s2| {
                let apart = |l| !pi.same_block(layout.stake(s1, l), layout.stake(s2, l));
                !apart(level) || apart(level + 1)
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{gen_bisplitter, gen_sequential_splitter};

    #[test]
    fn full_signature_step_on_b3_splits_prefix_blocks() {
        let lts = gen_bisplitter(3).unwrap();
        let StepOutcome::Refined { partition, .. } =
            refine_step(&lts, lts.initial_partition(), Strategy::FullSignature).unwrap()
        else {
            panic!("B_3 initial partition is unstable");
        };
        let expected = Partition::from_blocks(8, &[vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]);
        assert_eq!(partition, expected.unwrap());
    }

    #[test]
    fn stable_input_is_reported() {
        let lts = gen_bisplitter(3).unwrap();
        for strategy in Strategy::ALL {
            assert_eq!(
                refine_step(&lts, &Partition::discrete(8), strategy).unwrap(),
                StepOutcome::Stable
            );
        }
    }

    #[test]
    fn d8_first_step_peels_one_state() {
        let lts = gen_sequential_splitter(8).unwrap();
        let expected = Partition::from_blocks(8, &[(0..6).collect(), vec![6], vec![7]]).unwrap();
        for strategy in Strategy::ALL {
            match refine_step(&lts, lts.initial_partition(), strategy).unwrap() {
                StepOutcome::Refined { partition, .. } => assert_eq!(partition, expected),
                StepOutcome::Stable => panic!("D_8 initial partition is unstable"),
            }
        }
    }

    #[test]
    fn retained_block_keeps_its_id() {
        let pi = Partition::unit(5);
        let split = split_by_classes(&pi, &[0, 1, 1, 1, 0]);
        assert_eq!(split.assignment(), &[1, 0, 0, 0, 1]);
        let tie = split_by_classes(&pi, &[1, 1, 0, 0, 2]);
        assert_eq!(tie.assignment(), &[0, 0, 1, 1, 2]);
    }

    #[test]
    fn bisplitter_costs() {
        for k in 2..=6 {
            let lts = gen_bisplitter(k).unwrap();
            for strategy in Strategy::ALL {
                let trace = run_to_stable(&lts, strategy);
                assert_eq!(trace.total_irc(), bisplitter_irc(k), "k={k} {strategy}");
                assert_eq!(verify_trace(&lts, &trace), Ok(()));
                let report = trace_costs(&lts, &trace).unwrap();
                assert!(report.bound_checks.iter().all(|c| c.pass));
                assert_eq!(report.final_blocks, 1 << k);
            }
        }
    }

    #[test]
    fn d8_takes_six_refinements() {
        let lts = gen_sequential_splitter(8).unwrap();
        for strategy in Strategy::ALL {
            let trace = run_to_stable(&lts, strategy);
            assert_eq!(trace.steps(), 6);
            assert_eq!(trace.total_irc(), 6);
        }
    }

    #[test]
    fn stable_start_gives_empty_trace() {
        let lts = gen_bisplitter(3).unwrap();
        let trace = run_from(&lts, &Partition::discrete(8), Strategy::SingleSplitter).unwrap();
        let report = trace_costs(&lts, &trace).unwrap();
        assert_eq!((report.steps, report.total_irc), (0, 0));
    }

    #[test]
    fn verify_rejects_repeated_partition() {
        let lts = gen_sequential_splitter(4).unwrap();
        let trace = run_to_stable(&lts, Strategy::FullSignature);
        let mut parts: Vec<Partition> = trace.partitions().collect();
        parts.insert(1, parts[0].clone());
        let bad = RefinementTrace::from_partitions(parts).unwrap();
        let failure = verify_trace(&lts, &bad).unwrap_err();
        assert_eq!(
            (failure.step, failure.reason),
            (1, FailureReason::NotStrict)
        );
    }

    #[test]
    fn verify_rejects_split_without_witness() {
        // Two states with a self-loop each, identical behaviour.
        let lts = Lts::new(
            2,
            vec!["a".into()],
            [
                crate::lts::Transition::new(0, 0, 0),
                crate::lts::Transition::new(1, 0, 1),
            ],
            Partition::unit(2),
        )
        .unwrap();
        let bad =
            RefinementTrace::from_partitions(vec![Partition::unit(2), Partition::discrete(2)])
                .unwrap();
        let failure = verify_trace(&lts, &bad).unwrap_err();
        assert_eq!(failure.reason, FailureReason::NoWitness);
        assert_eq!(failure.pair, Some((0, 1)));
    }

    #[test]
    fn verify_rejects_unstable_end() {
        let lts = gen_sequential_splitter(5).unwrap();
        let trace = RefinementTrace::new(lts.initial_partition().clone());
        let failure = verify_trace(&lts, &trace).unwrap_err();
        assert_eq!(
            (failure.step, failure.reason),
            (0, FailureReason::NotStable)
        );
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::from_name(s.name()), Some(s));
        }
        assert_eq!(Strategy::from_name("hopcroft"), None);
    }
}
