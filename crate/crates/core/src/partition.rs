//! Partitions of a dense state set `0..n`.
//!
//! A [`Partition`] stores a block id per state together with the members of
//! every block (sorted ascending). Block ids are dense, `0..block_count`, but
//! otherwise carry no meaning: equality and hashing are structural, i.e. two
//! partitions are equal when they induce the same equivalence on states.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub type State = usize;
pub type BlockId = usize;

#[derive(Clone)]
pub struct Partition {
    block_of: Vec<BlockId>,
    offsets: Vec<usize>,
    states: Vec<State>,
}

impl Partition {
    /// Builds a partition from a block assignment. Block ids must be dense:
    /// every id in `0..=max` has at least one state.
    pub fn from_block_of(block_of: Vec<BlockId>) -> Result<Partition> {
        let block_count = block_of.iter().map(|&b| b + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; block_count];
        for &b in &block_of {
            sizes[b] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&c| c == 0) {
            return Err(Error::InvalidPartition(format!(
                "block id {empty} has no states"
            )));
        }
        Ok(Self::build(block_of, block_count))
    }

    /// Builds a partition of `0..state_count` from explicit blocks.
    pub fn from_blocks<B: AsRef<[State]>>(state_count: usize, blocks: &[B]) -> Result<Partition> {
        const UNSET: usize = usize::MAX;
        let mut block_of = vec![UNSET; state_count];
        for (id, block) in blocks.iter().enumerate() {
            let block = block.as_ref();
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {id} is empty")));
            }
            for &s in block {
                if s >= state_count {
                    return Err(Error::StateOutOfRange {
                        state: s,
                        state_count,
                    });
                }
                if block_of[s] != UNSET {
                    return Err(Error::InvalidPartition(format!(
                        "state {s} occurs in more than one block"
                    )));
                }
                block_of[s] = id;
            }
        }
        if let Some(s) = block_of.iter().position(|&b| b == UNSET) {
            return Err(Error::InvalidPartition(format!("state {s} is in no block")));
        }
        Ok(Self::build(block_of, blocks.len()))
    }

    /// The partition with a single block (empty partition when `n = 0`).
    pub fn unit(state_count: usize) -> Partition {
        let count = usize::from(state_count > 0);
        Self::build(vec![0; state_count], count)
    }

    /// The partition into singletons.
    pub fn discrete(state_count: usize) -> Partition {
        Self::build((0..state_count).collect(), state_count)
    }

    fn build(block_of: Vec<BlockId>, block_count: usize) -> Partition {
        let mut offsets = vec![0usize; block_count + 1];
        for &b in &block_of {
            offsets[b + 1] += 1;
        }
        for i in 0..block_count {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut states = vec![0; block_of.len()];
        for (s, &b) in block_of.iter().enumerate() {
            states[cursor[b]] = s;
            cursor[b] += 1;
        }
        Partition {
            block_of,
            offsets,
            states,
        }
    }

    pub fn state_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn block_of(&self, state: State) -> BlockId {
        self.block_of[state]
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.block_of
    }

    /// Members of `block`, sorted ascending.
    pub fn members(&self, block: BlockId) -> &[State] {
        &self.states[self.offsets[block]..self.offsets[block + 1]]
    }

    pub fn block_size(&self, block: BlockId) -> usize {
        self.offsets[block + 1] - self.offsets[block]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[State]> + '_ {
        (0..self.block_count()).map(move |b| self.members(b))
    }

    pub fn same_block(&self, s: State, t: State) -> bool {
        self.block_of[s] == self.block_of[t]
    }

    pub fn is_discrete(&self) -> bool {
        self.block_count() == self.state_count()
    }

    /// Block assignment relabelled by first occurrence; equal for
    /// structurally equal partitions.
    pub fn canonical_assignment(&self) -> Vec<BlockId> {
        let mut relabel = vec![usize::MAX; self.block_count()];
        let mut next = 0;
        self.block_of
            .iter()
            .map(|&b| {
                if relabel[b] == usize::MAX {
                    relabel[b] = next;
                    next += 1;
                }
                relabel[b]
            })
            .collect()
    }

    /// The same partition with block ids assigned by first occurrence.
    pub fn canonical(&self) -> Partition {
        Self::build(self.canonical_assignment(), self.block_count())
    }

    /// Blocks as sorted state lists, ordered by their smallest state.
    pub fn sorted_blocks(&self) -> Vec<Vec<State>> {
        let mut blocks: Vec<Vec<State>> = self.blocks().map(<[State]>::to_vec).collect();
        blocks.sort_by_key(|b| b[0]);
        blocks
    }

    /// True iff every block of `self` lies inside a block of `coarse`.
    /// Both partitions must cover the same number of states.
    pub fn refines(&self, coarse: &Partition) -> bool {
        self.state_count() == coarse.state_count()
            && self.blocks().all(|block| {
                let b = coarse.block_of(block[0]);
                block.iter().all(|&s| coarse.block_of(s) == b)
            })
    }

    #[cfg(test)]
    pub(crate) fn debug_check(&self) {
        debug_assert_eq!(self.offsets.last().copied(), Some(self.state_count()));
        debug_assert!((0..self.block_count()).all(|b| self.block_size(b) > 0));
        debug_assert!(
            (0..self.block_count()).all(|b| self.members(b).iter().all(|&s| self.block_of[s] == b))
        );
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Partition) -> bool {
        if self.state_count() != other.state_count() || self.block_count() != other.block_count() {
            return false;
        }
        let mut map = vec![usize::MAX; self.block_count()];
        for (s, &b) in self.block_of.iter().enumerate() {
            let o = other.block_of[s];
            if map[b] == usize::MAX {
                map[b] = o;
            } else if map[b] != o {
                return false;
            }
        }
        true
    }
}

impl Eq for Partition {}

impl Hash for Partition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_assignment().hash(state);
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sorted_blocks()).finish()
    }
}

fn check_same_size(a: &Partition, b: &Partition) -> Result<()> {
    if a.state_count() != b.state_count() {
        return Err(Error::SizeMismatch {
            expected: a.state_count(),
            found: b.state_count(),
        });
    }
    Ok(())
}

/// Whether every block of `fine` is a subset of some block of `coarse`.
pub fn is_refinement(fine: &Partition, coarse: &Partition) -> Result<bool> {
    check_same_size(coarse, fine)?;
    Ok(fine.refines(coarse))
}

/// The partition whose blocks are the nonempty intersections of blocks of
/// `p1` and `p2`. Block ids follow first occurrence.
pub fn common_refinement(p1: &Partition, p2: &Partition) -> Result<Partition> {
    check_same_size(p1, p2)?;
    let mut ids: HashMap<(BlockId, BlockId), BlockId> = HashMap::new();
    let block_of = (0..p1.state_count())
        .map(|s| {
            let next = ids.len();
            *ids.entry((p1.block_of(s), p2.block_of(s))).or_insert(next)
        })
        .collect();
    let count = ids.len();
    Ok(Partition::build(block_of, count))
}

/// Refinement cost: for every block of `pi`, its size minus the size of the
/// largest block of `pi_next` inside it.
pub fn refinement_cost(pi: &Partition, pi_next: &Partition) -> Result<usize> {
    check_same_size(pi, pi_next)?;
    if !pi_next.refines(pi) {
        return Err(Error::NotARefinement);
    }
    let mut largest = vec![0usize; pi.block_count()];
    for block in pi_next.blocks() {
        let parent = pi.block_of(block[0]);
        largest[parent] = largest[parent].max(block.len());
    }
    Ok((0..pi.block_count())
        .map(|b| pi.block_size(b) - largest[b])
        .sum())
}
