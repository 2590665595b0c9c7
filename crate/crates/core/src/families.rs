//! Generators for the adversarial families: bisplitters `B_k`, layered
//! bisplitters `C_k`, sequential splitters `D_n`, the fan-in family with
//! parallel cost 1, and the one-action example used for Roberts' algorithm.
//!
//! State numbering is fixed so that files and traces are reproducible:
//!
//! * `B_k`: state id = integer value of the bitstring, first bit most
//!   significant.
//! * `C_k`: stakes column-major (`[σ,1] .. [σ,2^k]` for σ = 0, 1, ...), then
//!   the tree gadget of every σ in breadth-first (heap) order.
//! * `D_n`: state `i` of the chain `1..n` has id `i - 1`.
//! * fan-in: `b_0 .. b_{k-1}` first, then `a_0 .. a_{2^k-1}`.

use std::fmt;

use crate::error::{Error, Result};
use crate::lts::{Lts, Transition};
use crate::partition::{Partition, State};

const MAX_BISPLITTER_K: usize = 20;
const MAX_LAYERED_K: usize = 8;
const MAX_FANIN_K: usize = 20;
const MAX_CHAIN_N: usize = 1 << 24;

/// A bitstring with 1-indexed access.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> BitString {
        BitString { bits }
    }

    /// The length-`len` bitstring whose integer value is `value`.
    pub fn from_index(value: usize, len: usize) -> BitString {
        BitString {
            bits: (1..=len).map(|i| (value >> (len - i)) & 1 == 1).collect(),
        }
    }

    pub fn parse(text: &str) -> Option<BitString> {
        text.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(BitString::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at 1-indexed position `i`.
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    /// Inclusive 1-indexed subword `σ[i:j]`; empty when `j < i`.
    pub fn subword(&self, i: usize, j: usize) -> BitString {
        if j < i {
            return BitString::new(Vec::new());
        }
        BitString::new(self.bits[i - 1..j].to_vec())
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    fn bit(self) -> usize {
        match self {
            Letter::A => 0,
            Letter::B => 1,
        }
    }
}

/// A word over `{a, b}` addressing a node of a tree gadget.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TreeAddress {
    pub word: Vec<Letter>,
}

impl TreeAddress {
    pub fn parse(text: &str) -> Option<TreeAddress> {
        text.chars()
            .map(|c| match c {
                'a' => Some(Letter::A),
                'b' => Some(Letter::B),
                _ => None,
            })
            .collect::<Option<Vec<Letter>>>()
            .map(|word| TreeAddress { word })
    }

    /// Binary evaluation with `a = 0`, `b = 1`, most significant first.
    pub fn bin(&self) -> usize {
        self.word.iter().fold(0, |acc, l| 2 * acc + l.bit())
    }

    pub fn push(&self, letter: Letter) -> TreeAddress {
        let mut word = self.word.clone();
        word.push(letter);
        TreeAddress { word }
    }
}

impl fmt::Display for TreeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("ε");
        }
        for l in &self.word {
            f.write_str(match l {
                Letter::A => "a",
                Letter::B => "b",
            })?;
        }
        Ok(())
    }
}

/// Index `j` of the bisplitter action `a_j` that the word simulates:
/// `min(bin(word) + 1, k - 1)`.
pub fn lbl(word: &TreeAddress, k: usize) -> usize {
    (word.bin() + 1).min(k - 1)
}

/// Height of the tree gadget of `C_k`, clamped at zero for `k = 2`.
pub fn gadget_height(k: usize) -> usize {
    // ceil(log2((k-1)/2)) = ceil(log2(k-1)) - 1
    ceil_log2(k - 1).saturating_sub(1)
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Target of `σ --a_i--> σ'` in `B_k`, on integer-encoded bitstrings.
pub fn bisplitter_target(k: usize, sigma: usize, i: usize) -> usize {
    debug_assert!(i >= 1 && i < k);
    let bit = |pos: usize| (sigma >> (k - pos)) & 1;
    if bit(i + 1) == 0 {
        sigma
    } else {
        let kept = sigma >> (k - i + 1);
        ((kept << 1) | (1 - bit(i))) << (k - i)
    }
}

/// The bisplitter `B_k`: `2^k` states, actions `a1 .. a{k-1}`, initial
/// partition by first bit.
pub fn gen_bisplitter(k: usize) -> Result<Lts> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be ≥ 1".into()));
    }
    if k > MAX_BISPLITTER_K {
        return Err(Error::InvalidParameter(format!(
            "k must be ≤ {MAX_BISPLITTER_K}"
        )));
    }
    let n = 1usize << k;
    let actions = (1..k).map(|i| format!("a{i}")).collect();
    let transitions = (0..n).flat_map(|sigma| {
        (1..k).map(move |i| Transition::new(sigma, i - 1, bisplitter_target(k, sigma, i)))
    });
    let block_of = (0..n).map(|sigma| sigma >> (k - 1)).collect();
    Lts::new(n, actions, transitions, Partition::from_block_of(block_of)?)
}

/// If `members` (sorted) is a prefix block `B_σ` of `B_k`, returns `σ`.
pub fn prefix_block(k: usize, members: &[State]) -> Option<BitString> {
    let size = members.len();
    if size == 0 || !size.is_power_of_two() || size > 1 << k {
        return None;
    }
    let depth = size.trailing_zeros() as usize;
    let first = members[0];
    let contiguous = members.iter().enumerate().all(|(i, &s)| s == first + i);
    (first.is_multiple_of(size) && contiguous).then(|| BitString::from_index(first >> depth, k - depth))
}

/// A state of `C_k` in structured form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayeredState {
    /// `[σ, level]`, `1 ≤ level ≤ 2^k`.
    Stake { sigma: usize, level: usize },
    /// `⟨σ, w⟩` with `w` the heap-ordered node index of the gadget.
    Tree { sigma: usize, node: usize },
}

/// State numbering of the layered bisplitter `C_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayeredLayout {
    pub k: usize,
    pub height: usize,
}

impl LayeredLayout {
    pub fn new(k: usize) -> LayeredLayout {
        LayeredLayout {
            k,
            height: gadget_height(k),
        }
    }

    pub fn strings(&self) -> usize {
        1 << self.k
    }

    /// Stake length, equal to the number of bitstrings.
    pub fn levels(&self) -> usize {
        1 << self.k
    }

    pub fn tree_size(&self) -> usize {
        (1 << (self.height + 1)) - 1
    }

    pub fn state_count(&self) -> usize {
        self.strings() * (self.levels() + self.tree_size())
    }

    pub fn stake(&self, sigma: usize, level: usize) -> State {
        debug_assert!((1..=self.levels()).contains(&level));
        sigma * self.levels() + level - 1
    }

    pub fn tree(&self, sigma: usize, node: usize) -> State {
        self.strings() * self.levels() + sigma * self.tree_size() + node
    }

    /// Heap index of the node addressed by `address`.
    pub fn node_of(&self, address: &TreeAddress) -> usize {
        (1 << address.word.len()) - 1 + address.bin()
    }

    pub fn address_of(&self, node: usize) -> TreeAddress {
        let depth = (usize::BITS - 1 - (node + 1).leading_zeros()) as usize;
        let pos = node + 1 - (1 << depth);
        TreeAddress {
            word: (0..depth)
                .map(|i| {
                    if (pos >> (depth - 1 - i)) & 1 == 1 {
                        Letter::B
                    } else {
                        Letter::A
                    }
                })
                .collect(),
        }
    }

    pub fn decode(&self, state: State) -> LayeredState {
        let stakes = self.strings() * self.levels();
        if state < stakes {
            LayeredState::Stake {
                sigma: state / self.levels(),
                level: state % self.levels() + 1,
            }
        } else {
            let rest = state - stakes;
            LayeredState::Tree {
                sigma: rest / self.tree_size(),
                node: rest % self.tree_size(),
            }
        }
    }
}

/// The layered bisplitter `C_k` over actions `a`, `b`.
pub fn gen_layered_bisplitter(k: usize) -> Result<Lts> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be ≥ 2".into()));
    }
    if k > MAX_LAYERED_K {
        return Err(Error::InvalidParameter(format!(
            "k must be ≤ {MAX_LAYERED_K}"
        )));
    }
    let layout = LayeredLayout::new(k);
    let levels = layout.levels();
    let mut transitions = Vec::with_capacity(2 * layout.state_count());
    for sigma in 0..layout.strings() {
        for level in 1..=levels {
            let target = if level < levels {
                layout.stake(sigma, level + 1)
            } else {
                layout.tree(sigma, 0)
            };
            for action in 0..2 {
                transitions.push(Transition::new(layout.stake(sigma, level), action, target));
            }
        }
        let first_leaf = (1 << layout.height) - 1;
        for node in 0..layout.tree_size() {
            let source = layout.tree(sigma, node);
            for (action, letter) in [Letter::A, Letter::B].into_iter().enumerate() {
                let target = if node < first_leaf {
                    layout.tree(sigma, 2 * node + 1 + action)
                } else {
                    let j = lbl(&layout.address_of(node).push(letter), k);
                    layout.stake(bisplitter_target(k, sigma, j), 1)
                };
                transitions.push(Transition::new(source, action, target));
            }
        }
    }
    // C^l_0 and C^l_1 for every level, then C_ε.
    let tree_block = 2 * levels;
    let block_of = (0..layout.state_count())
        .map(|s| match layout.decode(s) {
            LayeredState::Stake { sigma, level } => 2 * (level - 1) + (sigma >> (k - 1)),
            LayeredState::Tree { .. } => tree_block,
        })
        .collect();
    Lts::new(
        layout.state_count(),
        vec!["a".into(), "b".into()],
        transitions,
        Partition::from_block_of(block_of)?,
    )
}

/// The sequential splitter `D_n`: a chain into a self-loop, last state
/// separated initially.
pub fn gen_sequential_splitter(n: usize) -> Result<Lts> {
    if n <= 2 {
        return Err(Error::InvalidParameter("n must be > 2".into()));
    }
    if n > MAX_CHAIN_N {
        return Err(Error::InvalidParameter(format!(
            "n must be ≤ {MAX_CHAIN_N}"
        )));
    }
    let transitions = (0..n).map(|i| Transition::new(i, 0, (i + 1).min(n - 1)));
    let block_of = (0..n).map(|i| usize::from(i == n - 1)).collect();
    Lts::new(
        n,
        vec!["a".into()],
        transitions,
        Partition::from_block_of(block_of)?,
    )
}

/// The fan-in family: `a_i --> b_j` iff bit `j` of `i` is set; all `a`
/// states share one initial block and every `b_j` is a singleton.
pub fn gen_fanin_splitter(k: usize) -> Result<Lts> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be ≥ 1".into()));
    }
    if k > MAX_FANIN_K {
        return Err(Error::InvalidParameter(format!(
            "k must be ≤ {MAX_FANIN_K}"
        )));
    }
    let n = k + (1 << k);
    let transitions = (0..1usize << k).flat_map(|i| {
        (0..k)
            .filter(move |j| (i >> j) & 1 == 1)
            .map(move |j| Transition::new(k + i, 0, j))
    });
    let block_of = (0..n).map(|s| s.min(k)).collect();
    Lts::new(
        n,
        vec!["a".into()],
        transitions,
        Partition::from_block_of(block_of)?,
    )
}

/// Names of the one-action example's states, in state-id order.
pub const ROBERTS_EXAMPLE_STATES: [&str; 22] = [
    "c1", "c2", "c3", "c4", "c5", "c6", //
    "s11", "s12", "s13", "s14", //
    "s21", "s22", "s23", //
    "s31", "s32", //
    "s41", "s42", "s43", "s44", //
    "s51", "s52", "s53",
];

const ROBERTS_EXAMPLE_EDGES: [(&str, &str); 22] = [
    ("c1", "c2"),
    ("c2", "c3"),
    ("c3", "c4"),
    ("c4", "c5"),
    ("c5", "c6"),
    ("c6", "c1"),
    ("s14", "s13"),
    ("s13", "s12"),
    ("s12", "s11"),
    ("s11", "c1"),
    ("s23", "s21"),
    ("s22", "s21"),
    ("s21", "c2"),
    ("s32", "c3"),
    ("s31", "c3"),
    ("s44", "s41"),
    ("s43", "s41"),
    ("s42", "s41"),
    ("s41", "c4"),
    ("s53", "s52"),
    ("s52", "c5"),
    ("s51", "c5"),
];

const ROBERTS_EXAMPLE_ACCEPTING: [&str; 15] = [
    "c1", "c3", "c4", "c6", "s11", "s13", "s14", "s21", "s22", "s23", "s31", "s42", "s43", "s44",
    "s52",
];

pub fn roberts_example_state(name: &str) -> Option<State> {
    ROBERTS_EXAMPLE_STATES.iter().position(|&s| s == name)
}

/// The deterministic one-action example: a six-cycle with five trees.
/// Block 0 holds the accepting states (symbol `A`), block 1 the others
/// (`N`).
pub fn gen_roberts_example() -> Lts {
    let id = |name| roberts_example_state(name).expect("fixture names are consistent");
    let transitions = ROBERTS_EXAMPLE_EDGES
        .iter()
        .map(|&(from, to)| Transition::new(id(from), 0, id(to)));
    let block_of = ROBERTS_EXAMPLE_STATES
        .iter()
        .map(|name| usize::from(!ROBERTS_EXAMPLE_ACCEPTING.contains(name)))
        .collect();
    Lts::new(
        ROBERTS_EXAMPLE_STATES.len(),
        vec!["a".into()],
        transitions,
        Partition::from_block_of(block_of).expect("fixture partition"),
    )
    .expect("fixture is well formed")
}

/// A generated family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Bisplitter { k: usize },
    Layered { k: usize },
    SequentialSplitter { n: usize },
    FanIn { k: usize },
    RobertsExample,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bisplitter { .. } => "bisplitter",
            Family::Layered { .. } => "layered",
            Family::SequentialSplitter { .. } => "seqsplit",
            Family::FanIn { .. } => "fanin",
            Family::RobertsExample => "roberts-example",
        }
    }

    /// The family's size parameter, if it has one.
    pub fn parameter(&self) -> Option<(&'static str, usize)> {
        match *self {
            Family::Bisplitter { k } | Family::Layered { k } | Family::FanIn { k } => {
                Some(("k", k))
            }
            Family::SequentialSplitter { n } => Some(("n", n)),
            Family::RobertsExample => None,
        }
    }

    pub fn generate(&self) -> Result<Lts> {
        match *self {
            Family::Bisplitter { k } => gen_bisplitter(k),
            Family::Layered { k } => gen_layered_bisplitter(k),
            Family::SequentialSplitter { n } => gen_sequential_splitter(n),
            Family::FanIn { k } => gen_fanin_splitter(k),
            Family::RobertsExample => Ok(gen_roberts_example()),
        }
    }

    /// Recognises a generated family member by regenerating the candidate
    /// matching the system's shape and comparing structurally.
    pub fn identify(lts: &Lts) -> Option<Family> {
        let n = lts.state_count();
        let actions = lts.actions();
        let mut candidates = Vec::new();
        if n.is_power_of_two() {
            let k = n.trailing_zeros() as usize;
            let expected = (1..k).map(|i| format!("a{i}"));
            if k >= 1 && actions.len() == k - 1 && actions.iter().cloned().eq(expected) {
                candidates.push(Family::Bisplitter { k });
            }
        }
        if actions == ["a", "b"] {
            candidates.extend(
                (2..=MAX_LAYERED_K)
                    .filter(|&k| LayeredLayout::new(k).state_count() == n)
                    .map(|k| Family::Layered { k }),
            );
        }
        if actions == ["a"] {
            if n > 2 {
                candidates.push(Family::SequentialSplitter { n });
            }
            candidates.extend(
                (1..=MAX_FANIN_K)
                    .filter(|&k| k + (1 << k) == n)
                    .map(|k| Family::FanIn { k }),
            );
            if n == ROBERTS_EXAMPLE_STATES.len() {
                candidates.push(Family::RobertsExample);
            }
        }
        candidates
            .into_iter()
            .find(|family| family.generate().is_ok_and(|generated| &generated == lts))
    }
}
