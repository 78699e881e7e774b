//! Enrichment operators: repeat/skip transitions, self loops, ignore, and the
//! adjacency rules used by the grammar.

use std::collections::HashSet;
use std::sync::Arc;

use crate::alphabet::{Symbol, SymbolSet, SymbolSpace, Technical};
use crate::error::{Error, Result};
use crate::fsa::{Automaton, Label, Pc, StateId};

/// The technical symbol `t`, under both marks in a marked space.
fn technical_set(a: &Automaton, t: Technical) -> SymbolSet {
    let space = a.space();
    let idx = space.index_of(&Symbol::Technical(t));
    if space.is_marked() {
        SymbolSet::from_indices(space.len(), [idx, idx + space.base_len()])
    } else {
        SymbolSet::singleton(space.len(), idx)
    }
}

/// For every transition `q -> p` carrying a non-repeat symbol, adds the
/// consumer transition `p -repeat-> q`.
pub fn add_repeats(a: &Automaton) -> Result<Automaton> {
    if !a.is_normalized() {
        return Err(Error::NotNormalized("add_repeats"));
    }
    let repeat = technical_set(a, Technical::Repeat);
    let label = Label::consumer(repeat.clone());
    let mut out = a.clone();
    let mut seen: HashSet<(StateId, StateId)> = HashSet::new();
    for (q, l, p) in a.transitions() {
        if !l.set.difference(&repeat).is_empty() && seen.insert((p, q)) {
            out.add_edge(p, label.clone(), q);
        }
    }
    Ok(out)
}

/// For every transition `q -> p` carrying a non-skip symbol, adds the
/// consumer transition `q -skip-> p`.
pub fn add_skips(a: &Automaton) -> Result<Automaton> {
    if !a.is_normalized() {
        return Err(Error::NotNormalized("add_skips"));
    }
    let skip = technical_set(a, Technical::Skip);
    let label = Label::consumer(skip.clone());
    let mut out = a.clone();
    let mut seen: HashSet<(StateId, StateId)> = HashSet::new();
    for (q, l, p) in a.transitions() {
        if !l.set.difference(&skip).is_empty() && seen.insert((q, p)) {
            out.add_edge(q, label.clone(), p);
        }
    }
    Ok(out)
}

/// A consumer self loop over all segments at every state.
pub fn add_self_loops(a: &Automaton) -> Automaton {
    let a = a.normalize();
    let label = Label::consumer(a.space().segments().clone());
    let mut out = a.clone();
    for q in 0..a.num_states() {
        out.add_edge(q, label.clone(), q);
    }
    out
}

/// Segment self loops only at states with an outgoing segmental transition
/// whose label lies inside `cond`.
pub fn add_self_loop_before(cond: &SymbolSet, a: &Automaton) -> Result<Automaton> {
    if cond.is_empty() {
        return Err(Error::EmptyCondition(a.space().describe(cond)));
    }
    let technical = a.space().technical();
    let label = Label::consumer(a.space().segments().clone());
    let mut out = a.clone();
    for q in 0..a.num_states() {
        let trigger = a.edges(q).iter().any(|e| {
            e.label
                .as_ref()
                .is_some_and(|l| !l.set.intersects(technical) && l.set.is_subset(cond))
        });
        if trigger {
            out.add_edge(q, label.clone(), q);
        }
    }
    Ok(out)
}

/// Consumer self loop labeled `set` at every state.
pub fn ignore_set(a: &Automaton, set: &SymbolSet, pc: Pc) -> Automaton {
    let mut out = a.clone();
    let label = Label::new(set.clone(), pc);
    for q in 0..a.num_states() {
        out.add_edge(q, label.clone(), q);
    }
    out
}

/// Strings of `a` with strings of `b` freely interspersed.
pub fn ignore(a: &Automaton, b: &Automaton) -> Result<Automaton> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch);
    }
    let b = b.normalize();
    if b.num_states() == 1 && b.is_final(0) {
        let mut out = a.clone();
        for e in b.edges(0) {
            let l = e.label.clone().expect("normalized");
            for q in 0..a.num_states() {
                out.add_edge(q, l.clone(), q);
            }
        }
        return Ok(out);
    }
    let mut out = a.clone();
    for q in 0..a.num_states() {
        let offset = out.num_states();
        for _ in 0..b.num_states() {
            out.add_state();
        }
        for (p, l, r) in b.transitions() {
            out.add_edge(p + offset, l.clone(), r + offset);
        }
        out.add_epsilon(q, b.start() + offset);
        for p in 0..b.num_states() {
            if b.is_final(p) {
                out.add_epsilon(p + offset, q);
            }
        }
    }
    Ok(out)
}

/// Direction of a monotonic rule's context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleDir {
    Right,
    Left,
}

/// All-consumer constraint forbidding the segment factor `(A∖B)·C` (right
/// context) or `C·(A∖B)` (left context). Technical symbols are transparent.
pub fn monotonic_rule(
    space: &Arc<SymbolSpace>,
    dir: RuleDir,
    focus: &SymbolSet,
    result: &SymbolSet,
    context: &SymbolSet,
) -> Automaton {
    let segs = space.segments();
    let bad = focus.difference(result).intersection(segs);
    let ctx = context.intersection(segs);
    // state 1 remembers that the last segment was `first`; `second` must not follow
    let (first, second) = match dir {
        RuleDir::Right => (bad, ctx),
        RuleDir::Left => (ctx, bad),
    };
    let mut out = Automaton::epsilon(space);
    let s1 = out.add_state();
    out.set_final(s1, true);
    for (q, allowed) in [(0, segs.clone()), (s1, segs.difference(&second))] {
        out.add_edge(q, Label::consumer(allowed.intersection(&first)), s1);
        out.add_edge(q, Label::consumer(allowed.difference(&first)), 0);
        out.add_edge(q, Label::consumer(space.technical().clone()), q);
    }
    out
}
