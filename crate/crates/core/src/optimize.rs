//! Bounded local optimization: among strings with the same segmental content,
//! keep only those using the fewest technical symbols.
//!
//! A weighted subset construction over segment letters (technical transitions
//! act as weighted silent moves) records, for every segmental prefix, the
//! cheapest cost of reaching each state. Pairing the input with that
//! construction keeps exactly the transitions that stay on a cheapest path.

use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::cmp::Reverse;

use crate::alphabet::SymbolSet;
use crate::fsa::{Automaton, Label, Pc, StateId};

/// Per-symbol weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cost {
    pub technical: u32,
    pub segment: u32,
}

impl Default for Cost {
    fn default() -> Self {
        Cost {
            technical: 1,
            segment: 0,
        }
    }
}

/// Upper bound on subset states before giving up and returning the input.
pub const MAX_SUBSETS: usize = 20_000;

type Costs = Vec<Option<u32>>;

struct Split {
    /// (technical part, segment part, pc, target) per transition of a state
    edges: Vec<Vec<(SymbolSet, SymbolSet, Pc, StateId)>>,
}

impl Split {
    fn new(a: &Automaton) -> Self {
        let space = a.space();
        let edges = (0..a.num_states())
            .map(|q| {
                a.edges(q)
                    .iter()
                    .map(|e| {
                        let l = e.label.as_ref().expect("normalized");
                        (
                            l.set.intersection(space.technical()),
                            l.set.intersection(space.segments()),
                            l.pc,
                            e.target,
                        )
                    })
                    .collect()
            })
            .collect();
        Split { edges }
    }

    /// Cheapest costs after any number of technical moves; returns the
    /// normalized vector and the subtracted minimum.
    fn closure(&self, mut costs: Costs, cost: Cost) -> (Costs, u32) {
        let mut heap: BinaryHeap<Reverse<(u32, StateId)>> = costs
            .iter()
            .enumerate()
            .filter_map(|(q, c)| c.map(|c| Reverse((c, q))))
            .collect();
        while let Some(Reverse((c, q))) = heap.pop() {
            if costs[q] != Some(c) {
                continue;
            }
            for (tech, _, _, t) in &self.edges[q] {
                if tech.is_empty() {
                    continue;
                }
                let nc = c + cost.technical;
                if costs[*t].is_none_or(|old| nc < old) {
                    costs[*t] = Some(nc);
                    heap.push(Reverse((nc, *t)));
                }
            }
        }
        let min = costs.iter().flatten().copied().min().unwrap_or(0);
        for c in costs.iter_mut().flatten() {
            *c -= min;
        }
        (costs, min)
    }
}

/// Splits overlapping sets into disjoint blocks, each listing the indices of
/// the sets containing it.
fn refine(sets: &[SymbolSet]) -> Vec<(SymbolSet, Vec<usize>)> {
    let mut blocks: Vec<(SymbolSet, Vec<usize>)> = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let mut rest = set.clone();
        let mut next = Vec::with_capacity(blocks.len() + 1);
        for (b, members) in blocks {
            if rest.is_empty() || !b.intersects(&rest) {
                next.push((b, members));
                continue;
            }
            let inside = b.intersection(&rest);
            let outside = b.difference(&rest);
            rest = rest.difference(&b);
            if !outside.is_empty() {
                next.push((outside, members.clone()));
            }
            let mut members = members;
            members.push(i);
            next.push((inside, members));
        }
        if !rest.is_empty() {
            next.push((rest, vec![i]));
        }
        blocks = next;
    }
    blocks
}

/// Keeps, for every segmental projection, exactly the cheapest strings.
/// Returns the input unchanged if the subset construction exceeds
/// [`MAX_SUBSETS`].
pub fn bounded_local_optimization(a: &Automaton, cost: Cost) -> Automaton {
    let a = a.normalize();
    let split = Split::new(&a);
    let n = a.num_states();

    // subset construction over segment letters
    let mut subsets: Vec<Costs> = Vec::new();
    let mut index: HashMap<Costs, usize> = HashMap::new();
    // per subset: (letters, pc, target subset, offset)
    let mut moves: Vec<Vec<(SymbolSet, Pc, usize, u32)>> = Vec::new();
    let mut start = vec![None; n];
    start[a.start()] = Some(0);
    let (start, _) = split.closure(start, cost);
    index.insert(start.clone(), 0);
    subsets.push(start);
    let mut queue = VecDeque::from([0usize]);
    while let Some(d) = queue.pop_front() {
        let costs = subsets[d].clone();
        let mut out = Vec::new();
        for pc in [Pc::Consumer, Pc::Producer] {
            let mut items: Vec<(SymbolSet, StateId, u32)> = Vec::new();
            for (q, c) in costs.iter().enumerate() {
                let Some(c) = c else { continue };
                for (_, seg, epc, t) in &split.edges[q] {
                    if *epc == pc && !seg.is_empty() {
                        items.push((seg.clone(), *t, c + cost.segment));
                    }
                }
            }
            let sets: Vec<SymbolSet> = items.iter().map(|i| i.0.clone()).collect();
            let mut grouped: BTreeMap<(Costs, u32), SymbolSet> = BTreeMap::new();
            for (block, members) in refine(&sets) {
                let mut raw = vec![None; n];
                for &m in &members {
                    let (_, t, c) = items[m];
                    if raw[t].is_none_or(|old| c < old) {
                        raw[t] = Some(c);
                    }
                }
                let (next, offset) = split.closure(raw, cost);
                grouped
                    .entry((next, offset))
                    .and_modify(|s| s.union_with(&block))
                    .or_insert(block);
            }
            for ((next, offset), letters) in grouped {
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if subsets.len() >= MAX_SUBSETS {
                            log::warn!("bounded local optimization gave up after {MAX_SUBSETS} subsets");
                            return a;
                        }
                        let id = subsets.len();
                        index.insert(next.clone(), id);
                        subsets.push(next);
                        queue.push_back(id);
                        id
                    }
                };
                out.push((letters, pc, id, offset));
            }
        }
        moves.push(out);
    }
    moves.resize_with(subsets.len(), Vec::new);

    // product of the input with the subset construction, tight moves only
    let mut result = Automaton::empty(a.space());
    let mut pairs: HashMap<(StateId, usize), StateId> = HashMap::new();
    pairs.insert((a.start(), 0), 0);
    let mut queue = VecDeque::from([(a.start(), 0usize)]);
    let is_final = |q: StateId, d: usize| {
        let costs = &subsets[d];
        let best = (0..n).filter(|&f| a.is_final(f)).filter_map(|f| costs[f]).min();
        a.is_final(q) && costs[q].is_some() && costs[q] == best
    };
    result.set_final(0, is_final(a.start(), 0));
    while let Some((q, d)) = queue.pop_front() {
        let from = pairs[&(q, d)];
        let cq = subsets[d][q].expect("reachable pairs have a cost");
        let mut targets: Vec<(Label, StateId, usize)> = Vec::new();
        for (tech, seg, pc, t) in &split.edges[q] {
            if !tech.is_empty() && subsets[d][*t] == Some(cq + cost.technical) {
                targets.push((Label::new(tech.clone(), *pc), *t, d));
            }
            if seg.is_empty() {
                continue;
            }
            for (letters, mpc, d2, offset) in &moves[d] {
                if mpc != pc || !letters.intersects(seg) {
                    continue;
                }
                if subsets[*d2][*t].map(|c| c + offset) == Some(cq + cost.segment) {
                    targets.push((Label::new(letters.intersection(seg), *pc), *t, *d2));
                }
            }
        }
        for (label, t, d2) in targets {
            let to = match pairs.get(&(t, d2)) {
                Some(&id) => id,
                None => {
                    let id = result.add_state();
                    result.set_final(id, is_final(t, d2));
                    pairs.insert((t, d2), id);
                    queue.push_back((t, d2));
                    id
                }
            };
            result.add_edge(from, label, to);
        }
    }
    result.normalize()
}
