//! Labelled transition systems with an initial partition, and the
//! stability and validity predicates that every refinement is judged by.

use crate::error::{Error, Result};
use crate::partition::{BlockId, Partition, State};

pub type ActionId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: State,
    pub action: ActionId,
    pub target: State,
}

impl Transition {
    pub fn new(source: State, action: ActionId, target: State) -> Transition {
        Transition {
            source,
            action,
            target,
        }
    }
}

/// An LTS over states `0..n` with named actions and an initial partition.
///
/// Transitions are kept sorted by `(source, action, target)` without
/// duplicates, and the initial partition is stored in canonical
/// (first-occurrence) block numbering, so two structurally equal systems
/// compare equal field by field.
#[derive(Debug, Clone)]
pub struct Lts {
    state_count: usize,
    actions: Vec<String>,
    transitions: Vec<Transition>,
    initial_partition: Partition,
    deterministic: bool,
    // CSR adjacency, indexed by `state * action_count + action`.
    out_offsets: Vec<usize>,
    out_targets: Vec<State>,
    in_offsets: Vec<usize>,
    in_sources: Vec<State>,
}

impl Lts {
    pub fn new(
        state_count: usize,
        actions: Vec<String>,
        transitions: impl IntoIterator<Item = Transition>,
        initial_partition: Partition,
    ) -> Result<Lts> {
        if initial_partition.state_count() != state_count {
            return Err(Error::SizeMismatch {
                expected: state_count,
                found: initial_partition.state_count(),
            });
        }
        let mut transitions: Vec<Transition> = transitions.into_iter().collect();
        for t in &transitions {
            for s in [t.source, t.target] {
                if s >= state_count {
                    return Err(Error::StateOutOfRange {
                        state: s,
                        state_count,
                    });
                }
            }
            if t.action >= actions.len() {
                return Err(Error::ActionOutOfRange {
                    action: t.action,
                    action_count: actions.len(),
                });
            }
        }
        transitions.sort_unstable();
        transitions.dedup();

        let slots = state_count * actions.len();
        let mut out_offsets = vec![0usize; slots + 1];
        let mut in_offsets = vec![0usize; slots + 1];
        for t in &transitions {
            out_offsets[t.source * actions.len() + t.action + 1] += 1;
            in_offsets[t.target * actions.len() + t.action + 1] += 1;
        }
        for i in 0..slots {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        // Sorted transitions already give targets in slot order.
        let out_targets: Vec<State> = transitions.iter().map(|t| t.target).collect();
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0; transitions.len()];
        for t in &transitions {
            let slot = t.target * actions.len() + t.action;
            in_sources[cursor[slot]] = t.source;
            cursor[slot] += 1;
        }
        let deterministic = (0..slots).all(|i| out_offsets[i + 1] - out_offsets[i] == 1);

        Ok(Lts {
            state_count,
            actions,
            transitions,
            initial_partition: initial_partition.canonical(),
            deterministic,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial_partition(&self) -> &Partition {
        &self.initial_partition
    }

    /// Exactly one outgoing transition per state and action.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Targets of `state` under `action`, sorted.
    pub fn successors(&self, state: State, action: ActionId) -> &[State] {
        let slot = state * self.actions.len() + action;
        &self.out_targets[self.out_offsets[slot]..self.out_offsets[slot + 1]]
    }

    /// Sources reaching `state` under `action`, sorted.
    pub fn predecessors(&self, state: State, action: ActionId) -> &[State] {
        let slot = state * self.actions.len() + action;
        &self.in_sources[self.in_offsets[slot]..self.in_offsets[slot + 1]]
    }

    /// The unique `action`-successor in a deterministic system.
    pub fn next(&self, state: State, action: ActionId) -> Option<State> {
        match self.successors(state, action) {
            [t] => Some(*t),
            _ => None,
        }
    }

    /// The same system with a different initial partition.
    pub fn with_initial_partition(&self, partition: Partition) -> Result<Lts> {
        if partition.state_count() != self.state_count {
            return Err(Error::SizeMismatch {
                expected: self.state_count,
                found: partition.state_count(),
            });
        }
        let mut lts = self.clone();
        lts.initial_partition = partition.canonical();
        Ok(lts)
    }

    pub(crate) fn check_partition(&self, pi: &Partition) -> Result<()> {
        if pi.state_count() != self.state_count {
            return Err(Error::SizeMismatch {
                expected: self.state_count,
                found: pi.state_count(),
            });
        }
        Ok(())
    }
}

impl PartialEq for Lts {
    fn eq(&self, other: &Lts) -> bool {
        self.state_count == other.state_count
            && self.actions == other.actions
            && self.transitions == other.transitions
            && self.initial_partition.assignment() == other.initial_partition.assignment()
    }
}

impl Eq for Lts {}

/// Whether every block of `pi` is uniform, for every action, in reaching
/// `splitter`.
pub fn is_stable_under(lts: &Lts, pi: &Partition, splitter: &[State]) -> Result<bool> {
    lts.check_partition(pi)?;
    let n = lts.state_count();
    let mut in_splitter = vec![false; n];
    for &s in splitter {
        if s >= n {
            return Err(Error::StateOutOfRange {
                state: s,
                state_count: n,
            });
        }
        in_splitter[s] = true;
    }
    for action in 0..lts.action_count() {
        for block in pi.blocks() {
            let reaches = |s: State| lts.successors(s, action).iter().any(|&t| in_splitter[t]);
            let first = reaches(block[0]);
            if block[1..].iter().any(|&s| reaches(s) != first) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `pi` is stable under each of its own blocks.
pub fn is_stable(lts: &Lts, pi: &Partition) -> Result<bool> {
    lts.check_partition(pi)?;
    for block in pi.blocks() {
        if !is_stable_under(lts, pi, block)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Some `s --a--> s'` such that no `a`-successor of `t` shares a block of
/// `pi` with `s'`.
fn has_witness(lts: &Lts, pi: &Partition, s: State, t: State) -> bool {
    (0..lts.action_count()).any(|a| {
        lts.successors(s, a).iter().any(|&s2| {
            lts.successors(t, a)
                .iter()
                .all(|&t2| !pi.same_block(s2, t2))
        })
    })
}

/// Literal validity check: `pi_next` strictly refines `pi`, and every pair
/// that `pi` keeps together but `pi_next` separates has a one-step witness
/// (in either direction).
pub fn is_valid_refinement(lts: &Lts, pi: &Partition, pi_next: &Partition) -> Result<bool> {
    lts.check_partition(pi)?;
    lts.check_partition(pi_next)?;
    if !pi_next.refines(pi) || pi_next.block_count() == pi.block_count() {
        return Ok(false);
    }
    for block in pi.blocks() {
        for (i, &s) in block.iter().enumerate() {
            for &t in &block[i + 1..] {
                if !pi_next.same_block(s, t)
                    && !has_witness(lts, pi, s, t)
                    && !has_witness(lts, pi, t, s)
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// One-step signature of every state under `pi`: its own block followed by
/// the sorted, deduplicated `(action, reached block)` pairs. Returns a
/// dense signature id per state, numbered by first occurrence.
pub(crate) fn signature_ids(lts: &Lts, pi: &Partition) -> Vec<usize> {
    let n = lts.state_count();
    let mut sigs: Vec<(BlockId, Vec<(ActionId, BlockId)>)> = Vec::with_capacity(n);
    for s in 0..n {
        let mut reached: Vec<(ActionId, BlockId)> = (0..lts.action_count())
            .flat_map(|a| lts.successors(s, a).iter().map(move |&t| (a, t)))
            .map(|(a, t)| (a, pi.block_of(t)))
            .collect();
        reached.sort_unstable();
        reached.dedup();
        sigs.push((pi.block_of(s), reached));
    }
    let mut order: Vec<State> = (0..n).collect();
    order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]).then(a.cmp(&b)));
    let mut class = vec![0usize; n];
    let mut first_of_class: Vec<State> = Vec::new();
    for (i, &s) in order.iter().enumerate() {
        if i == 0 || sigs[order[i - 1]] != sigs[s] {
            first_of_class.push(s);
        }
        class[s] = first_of_class.len() - 1;
    }
    // Renumber classes by smallest member so ids do not depend on how
    // signatures happen to sort.
    let mut rank: Vec<usize> = (0..first_of_class.len()).collect();
    rank.sort_by_key(|&c| first_of_class[c]);
    let mut renumber = vec![0; rank.len()];
    for (new, &old) in rank.iter().enumerate() {
        renumber[old] = new;
    }
    class.iter().map(|&c| renumber[c]).collect()
}
