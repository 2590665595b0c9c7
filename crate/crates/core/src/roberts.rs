//! Roberts' linear-time bisimilarity for one-action systems in which every
//! state has at most one successor.
//!
//! Every state eventually runs into a cycle, so its behaviour is an infinite
//! word over initial-partition block ids: a finite prefix followed by the
//! cycle's repeating prefix `v` forever. Cycles are named by the least
//! rotation of `v` (Booth) after reducing to the primitive period (KMP);
//! tree states are labelled backwards from their cycle roots.
//!
//! A state without successors ends its word; its key has an empty rotation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lts::Lts;
use crate::partition::{Partition, State};

/// A minimal nonempty transition-closed set of states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndStructure {
    /// Sorted members.
    pub states: Vec<State>,
    /// For one-action systems with at most one successor per state: the
    /// cycle in transition order, starting at its smallest state. Empty for
    /// a deadlock state and for other systems.
    pub cycle: Vec<State>,
    /// For the same systems: `(root, tree states)` for each state of the
    /// structure, tree states in breadth-first order away from the root.
    pub trees: Vec<(State, Vec<State>)>,
}

/// One action, and at most one successor per state.
fn is_functional(lts: &Lts) -> bool {
    lts.action_count() == 1 && (0..lts.state_count()).all(|s| lts.successors(s, 0).len() <= 1)
}

fn out_offsets(lts: &Lts) -> Vec<usize> {
    let mut offsets = vec![0usize; lts.state_count() + 1];
    for t in lts.transitions() {
        offsets[t.source + 1] += 1;
    }
    for i in 0..lts.state_count() {
        offsets[i + 1] += offsets[i];
    }
    offsets
}

/// Strongly connected components (iterative Tarjan). Returns the component
/// of every state and the number of components.
fn strongly_connected(lts: &Lts) -> (Vec<usize>, usize) {
    const NONE: usize = usize::MAX;
    let n = lts.state_count();
    let offsets = out_offsets(lts);
    let edges = lts.transitions();
    let mut index = vec![NONE; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![NONE; n];
    let mut stack: Vec<State> = Vec::new();
    let mut call: Vec<(State, usize)> = Vec::new();
    let mut counter = 0;
    let mut comps = 0;
    for root in 0..n {
        if index[root] != NONE {
            continue;
        }
        call.push((root, offsets[root]));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if *edge < offsets[v + 1] {
                let w = edges[*edge].target;
                *edge += 1;
                if index[w] == NONE {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("component members are stacked");
                    on_stack[w] = false;
                    comp[w] = comps;
                    if w == v {
                        break;
                    }
                }
                comps += 1;
            }
        }
    }
    (comp, comps)
}

/// The end structures of `lts`, ordered by smallest member: the bottom
/// strongly connected components.
pub fn end_structures(lts: &Lts) -> Vec<EndStructure> {
    let n = lts.state_count();
    let (comp, comps) = strongly_connected(lts);
    let mut bottom = vec![true; comps];
    for t in lts.transitions() {
        if comp[t.source] != comp[t.target] {
            bottom[comp[t.source]] = false;
        }
    }
    let mut members: Vec<Vec<State>> = vec![Vec::new(); comps];
    for s in 0..n {
        if bottom[comp[s]] {
            members[comp[s]].push(s);
        }
    }
    let mut structures: Vec<EndStructure> = members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|states| EndStructure {
            states,
            cycle: Vec::new(),
            trees: Vec::new(),
        })
        .collect();
    structures.sort_by_key(|e| e.states[0]);
    if is_functional(lts) {
        let mut in_structure = vec![false; n];
        for e in &structures {
            for &s in &e.states {
                in_structure[s] = true;
            }
        }
        for e in &mut structures {
            let start = e.states[0];
            if lts.next(start, 0).is_some() {
                let mut s = start;
                loop {
                    e.cycle.push(s);
                    s = lts.next(s, 0).expect("cycle states have successors");
                    if s == start {
                        break;
                    }
                }
            }
            let roots = if e.cycle.is_empty() {
                vec![start]
            } else {
                e.cycle.clone()
            };
            e.trees = roots
                .into_iter()
                .map(|root| (root, breadth_first(lts, root, &in_structure)))
                .collect();
        }
    }
    structures
}

/// Tree states hanging off `root`, breadth first.
fn breadth_first(lts: &Lts, root: State, in_structure: &[bool]) -> Vec<State> {
    let mut order: Vec<State> = Vec::new();
    let mut head = 0;
    for &child in lts.predecessors(root, 0) {
        if !in_structure[child] {
            order.push(child);
        }
    }
    while head < order.len() {
        let s = order[head];
        head += 1;
        order.extend_from_slice(lts.predecessors(s, 0));
    }
    order
}

/// KMP failure function: `fail[i]` is the length of the longest proper
/// border of `word[..i]`.
fn failure_function<T: Eq>(word: &[T], comparisons: &mut usize) -> Vec<usize> {
    let mut fail = vec![0usize; word.len() + 1];
    let mut k = 0;
    for i in 1..word.len() {
        loop {
            *comparisons += 1;
            if word[i] == word[k] {
                k += 1;
                break;
            }
            if k == 0 {
                break;
            }
            k = fail[k];
        }
        fail[i + 1] = k;
    }
    fail
}

fn period_of<T: Eq>(word: &[T], comparisons: &mut usize) -> Result<usize> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("word must be nonempty".into()));
    }
    let fail = failure_function(word, comparisons);
    let period = word.len() - fail[word.len()];
    Ok(if word.len().is_multiple_of(period) {
        period
    } else {
        word.len()
    })
}

/// The shortest `v` with `word = v^e`, and `e`.
pub fn least_repeating_prefix<T: Eq + Clone>(word: &[T]) -> Result<(Vec<T>, usize)> {
    let period = period_of(word, &mut 0)?;
    Ok((word[..period].to_vec(), word.len() / period))
}

/// Booth's algorithm: offset `o` such that `v[o..] ++ v[..o]` is the least
/// rotation, taking the smallest such offset.
fn least_rotation_offset<T: Ord>(v: &[T], comparisons: &mut usize) -> usize {
    let n = v.len();
    if n == 0 {
        return 0;
    }
    let at = |i: usize| &v[i % n];
    let mut fail: Vec<isize> = vec![-1; 2 * n];
    let mut k: usize = 0;
    for j in 1..2 * n {
        let sj = at(j);
        let mut i = fail[j - k - 1];
        loop {
            if i == -1 {
                break;
            }
            *comparisons += 1;
            let cand = at(k + i as usize + 1);
            if sj == cand {
                break;
            }
            if sj < cand {
                k = j - i as usize - 1;
            }
            i = fail[i as usize];
        }
        if i == -1 {
            *comparisons += 1;
            let cand = at(k);
            if sj != cand {
                if sj < cand {
                    k = j;
                }
                fail[j - k] = -1;
            } else {
                fail[j - k] = 0;
            }
        } else {
            fail[j - k] = i + 1;
        }
    }
    k % n
}

/// Least rotation of `v` and its offset `o` (the rotation is
/// `v[o..] ++ v[..o]`).
pub fn canonical_rotation<T: Ord + Clone>(v: &[T]) -> (Vec<T>, usize) {
    let offset = least_rotation_offset(v, &mut 0);
    (rotate(v, offset), offset)
}

/// `v[i..] ++ v[..i]`.
pub fn rotate<T: Clone>(v: &[T], i: usize) -> Vec<T> {
    if v.is_empty() {
        return Vec::new();
    }
    let i = i % v.len();
    v[i..].iter().chain(&v[..i]).cloned().collect()
}

/// Behaviour key of a state: the word `prefix · rotation^ω` over initial
/// block ids. An empty `rotation` means the word ends after `prefix`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassKey {
    pub prefix: Vec<usize>,
    pub rotation: Vec<usize>,
    /// Least rotation of `rotation`; names the cycle's behaviour.
    pub anchor: Vec<usize>,
}

impl ClassKey {
    /// `prefix` followed by one copy of `rotation`.
    pub fn word(&self) -> Vec<usize> {
        self.prefix.iter().chain(&self.rotation).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Tail {
    Cycle { anchor: usize, phase: usize },
    Halt,
}

/// Prefixes as a trie: the node of `x·p` is the `x`-child of the node of
/// `p`; node 0 is the empty prefix.
#[derive(Debug, Clone, Default)]
struct PrefixTrie {
    parent: Vec<(usize, usize)>,
    children: HashMap<(usize, usize), usize>,
}

impl PrefixTrie {
    fn new() -> PrefixTrie {
        PrefixTrie {
            parent: vec![(0, 0)],
            children: HashMap::new(),
        }
    }

    fn child(&mut self, node: usize, symbol: usize) -> usize {
        let next = self.parent.len();
        let id = *self.children.entry((node, symbol)).or_insert(next);
        if id == next {
            self.parent.push((node, symbol));
        }
        id
    }

    fn word(&self, mut node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while node != 0 {
            let (parent, symbol) = self.parent[node];
            out.push(symbol);
            node = parent;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RobertsResult {
    pub partition: Partition,
    pub end_structures: Vec<EndStructure>,
    /// Symbol comparisons performed (period, rotation and labelling).
    pub comparisons: usize,
    keys: Vec<(usize, Tail)>,
    anchors: Vec<Vec<usize>>,
    trie: PrefixTrie,
}

impl RobertsResult {
    pub fn key(&self, state: State) -> ClassKey {
        let (node, tail) = self.keys[state];
        let prefix = self.trie.word(node);
        match tail {
            Tail::Cycle { anchor, phase } => {
                let anchor = self.anchors[anchor].clone();
                ClassKey {
                    prefix,
                    rotation: rotate(&anchor, phase),
                    anchor,
                }
            }
            Tail::Halt => ClassKey {
                prefix,
                rotation: Vec::new(),
                anchor: Vec::new(),
            },
        }
    }

    pub fn keys(&self) -> Vec<ClassKey> {
        (0..self.keys.len()).map(|s| self.key(s)).collect()
    }
}

/// Bisimilarity classes of a one-action system with at most one successor
/// per state.
pub fn roberts_partition(lts: &Lts) -> Result<RobertsResult> {
    if lts.action_count() != 1 {
        return Err(Error::Unsupported("Roberts requires one action".into()));
    }
    if !is_functional(lts) {
        return Err(Error::Unsupported(
            "Roberts requires at most one successor per state".into(),
        ));
    }
    let n = lts.state_count();
    let symbol = |s: State| lts.initial_partition().block_of(s);
    let structures = end_structures(lts);
    let mut comparisons = 0;
    let mut trie = PrefixTrie::new();
    let mut anchors: Vec<Vec<usize>> = Vec::new();
    let mut anchor_ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut keys: Vec<(usize, Tail)> = vec![(0, Tail::Halt); n];

    for e in &structures {
        let mut roots: Vec<State> = Vec::new();
        if e.cycle.is_empty() {
            let d = e.states[0];
            keys[d] = (trie.child(0, symbol(d)), Tail::Halt);
            roots.push(d);
        } else {
            let word: Vec<usize> = e.cycle.iter().map(|&s| symbol(s)).collect();
            let period = period_of(&word, &mut comparisons)?;
            let v = &word[..period];
            let offset = least_rotation_offset(v, &mut comparisons);
            let least = rotate(v, offset);
            let next = anchors.len();
            let anchor = *anchor_ids.entry(least.clone()).or_insert(next);
            if anchor == next {
                anchors.push(least);
            }
            for (i, &s) in e.cycle.iter().enumerate() {
                let phase = (i % period + period - offset) % period;
                keys[s] = (0, Tail::Cycle { anchor, phase });
            }
            roots.extend_from_slice(&e.cycle);
        }
        for (_, tree) in &e.trees {
            for &s in tree {
                let parent = lts.next(s, 0).expect("tree states have successors");
                let (node, tail) = keys[parent];
                let x = symbol(s);
                comparisons += 1;
                keys[s] = match tail {
                    Tail::Cycle { anchor, phase } if node == 0 => {
                        let p = anchors[anchor].len();
                        let last = anchors[anchor][(phase + p - 1) % p];
                        if x == last {
                            (
                                0,
                                Tail::Cycle {
                                    anchor,
                                    phase: (phase + p - 1) % p,
                                },
                            )
                        } else {
                            (trie.child(0, x), tail)
                        }
                    }
                    _ => (trie.child(node, x), tail),
                };
            }
        }
    }

    let mut class_ids: HashMap<(usize, Tail), usize> = HashMap::new();
    let block_of = keys
        .iter()
        .map(|key| {
            let next = class_ids.len();
            *class_ids.entry(*key).or_insert(next)
        })
        .collect();
    Ok(RobertsResult {
        partition: Partition::from_block_of(block_of)?,
        end_structures: structures,
        comparisons,
        keys,
        anchors,
        trie,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        gen_bisplitter, gen_roberts_example, gen_sequential_splitter, roberts_example_state,
    };

    const A: usize = 0;
    const N: usize = 1;

    fn letters(s: &str) -> Vec<usize> {
        s.chars().map(|c| if c == 'A' { A } else { N }).collect()
    }

    #[test]
    fn repeating_prefix_examples() {
        assert_eq!(
            least_repeating_prefix(&letters("ANAANA")).unwrap(),
            (letters("ANA"), 2)
        );
        assert_eq!(
            least_repeating_prefix(&letters("A")).unwrap(),
            (letters("A"), 1)
        );
        assert_eq!(
            least_repeating_prefix(&letters("AANA")).unwrap(),
            (letters("AANA"), 1)
        );
        assert_eq!(
            least_repeating_prefix(&letters("AAAA")).unwrap(),
            (letters("A"), 4)
        );
        assert!(least_repeating_prefix::<usize>(&[]).is_err());
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(canonical_rotation(&letters("ANA")), (letters("AAN"), 2));
        assert_eq!(canonical_rotation(&letters("AAN")), (letters("AAN"), 0));
        assert_eq!(canonical_rotation(&letters("NAA")), (letters("AAN"), 1));
        assert_eq!(
            canonical_rotation(&[3, 1, 2, 1, 1]),
            (vec![1, 1, 3, 1, 2], 3)
        );
    }

    #[test]
    fn end_structures_of_families() {
        let b3 = end_structures(&gen_bisplitter(3).unwrap());
        let states: Vec<Vec<usize>> = b3.iter().map(|e| e.states.clone()).collect();
        assert_eq!(states, vec![vec![0], vec![4]]);
        let d8 = end_structures(&gen_sequential_splitter(8).unwrap());
        assert_eq!(d8.len(), 1);
        assert_eq!(d8[0].cycle, vec![7]);
        assert_eq!(d8[0].trees[0].1, (0..7).rev().collect::<Vec<_>>());
        let fig = end_structures(&gen_roberts_example());
        assert_eq!(fig.len(), 1);
        assert_eq!(fig[0].cycle, (0..6).collect::<Vec<_>>());
        let hanging: usize = fig[0].trees.iter().map(|(_, t)| t.len()).sum();
        assert_eq!(hanging, 16);
    }

    #[test]
    fn figure_one_keys() {
        let lts = gen_roberts_example();
        let result = roberts_partition(&lts).unwrap();
        let key = |name: &str| result.key(roberts_example_state(name).unwrap());
        let plain = |r: &str| ClassKey {
            prefix: vec![],
            rotation: letters(r),
            anchor: letters("AAN"),
        };
        assert_eq!(key("c1"), plain("ANA"));
        assert_eq!(key("c4"), plain("ANA"));
        assert_eq!(key("c2"), plain("NAA"));
        assert_eq!(key("c3"), plain("AAN"));
        assert_eq!(key("s11"), plain("AAN"));
        assert_eq!(key("s41").word(), letters("NANA"));
        assert_eq!(key("s41").prefix, letters("N"));
        for s in ["s42", "s43", "s44"] {
            assert_eq!(key(s).prefix, letters("AN"));
            assert_eq!(key(s).word(), letters("ANANA"));
        }
        assert_eq!(result.partition.block_count(), 7);
        let same = |a: &str, b: &str| {
            result.partition.same_block(
                roberts_example_state(a).unwrap(),
                roberts_example_state(b).unwrap(),
            )
        };
        assert!(same("s11", "c6"));
        assert!(!same("s31", "s42"));
    }

    #[test]
    fn deadlocks_end_words() {
        use crate::lts::Transition;
        let t = Transition::new;
        // 0 -> 1 (halt), 2 -> 3 (halt); 1 and 3 share a block, 0 and 2 too.
        let pi = Partition::from_block_of(vec![0, 1, 0, 1]).unwrap();
        let lts = Lts::new(4, vec!["a".into()], [t(0, 0, 1), t(2, 0, 3)], pi).unwrap();
        let result = roberts_partition(&lts).unwrap();
        assert_eq!(result.partition.block_count(), 2);
        assert!(result.key(1).rotation.is_empty());
    }

    #[test]
    fn rejects_other_systems() {
        let b3 = gen_bisplitter(3).unwrap();
        assert_eq!(
            roberts_partition(&b3).unwrap_err(),
            Error::Unsupported("Roberts requires one action".into())
        );
    }
}
