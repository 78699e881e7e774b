//! Set-labeled, resource-conscious finite-state acceptors.
//!
//! A transition carries a [`Label`]: a non-empty [`SymbolSet`] plus a
//! producer/consumer bit. For determinization and minimization the pc bit is
//! part of the letter, so the language of an automaton is a set of strings of
//! [`Letter`]s `(symbol, pc)`. Intersection comes in two flavours: the open
//! one combines pc bits by OR, the closed one only lets producers meet
//! producers.
//!
//! Automata are immutable values; every operation returns a new automaton.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alphabet::{SymbolSet, SymbolSpace, TypeFormula};
use crate::error::{Error, Result};

pub type StateId = usize;

/// Resource polarity of a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pc {
    Consumer,
    Producer,
}

impl Pc {
    pub fn or(self, other: Pc) -> Pc {
        if self == Pc::Producer || other == Pc::Producer {
            Pc::Producer
        } else {
            Pc::Consumer
        }
    }

    pub fn is_producer(self) -> bool {
        self == Pc::Producer
    }
}

/// Payload of one transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub set: SymbolSet,
    pub pc: Pc,
}

impl Label {
    pub fn new(set: SymbolSet, pc: Pc) -> Self {
        Label { set, pc }
    }

    pub fn producer(set: SymbolSet) -> Self {
        Label::new(set, Pc::Producer)
    }

    pub fn consumer(set: SymbolSet) -> Self {
        Label::new(set, Pc::Consumer)
    }
}

/// One concrete letter of the language: a symbol index with its pc bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub symbol: usize,
    pub pc: Pc,
}

/// A transition; `label == None` is an epsilon move.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub label: Option<Label>,
    pub target: StateId,
}

#[derive(Clone, Debug)]
pub struct Automaton {
    space: Arc<SymbolSpace>,
    start: StateId,
    finals: Vec<bool>,
    edges: Vec<Vec<Edge>>,
    normalized: bool,
}

fn check_space(a: &Automaton, b: &Automaton) -> Result<()> {
    if Arc::ptr_eq(&a.space, &b.space) || *a.space == *b.space {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

impl Automaton {
    /// The empty language: a single non-final state.
    pub fn empty(space: &Arc<SymbolSpace>) -> Self {
        Automaton {
            space: space.clone(),
            start: 0,
            finals: vec![false],
            edges: vec![vec![]],
            normalized: true,
        }
    }

    /// The language containing only the empty string.
    pub fn epsilon(space: &Arc<SymbolSpace>) -> Self {
        Automaton {
            space: space.clone(),
            start: 0,
            finals: vec![true],
            edges: vec![vec![]],
            normalized: true,
        }
    }

    /// A single transition; an empty label set yields the empty language.
    pub fn symbol(space: &Arc<SymbolSpace>, label: Label) -> Self {
        if label.set.is_empty() {
            return Automaton::empty(space);
        }
        let mut a = Automaton::epsilon(space);
        a.finals[0] = false;
        let end = a.add_state();
        a.set_final(end, true);
        a.add_edge(0, label, end);
        a
    }

    pub fn from_formula(space: &Arc<SymbolSpace>, formula: &TypeFormula, pc: Pc) -> Result<Self> {
        Ok(Automaton::symbol(space, Label::new(space.denote(formula)?, pc)))
    }

    /// `Σ*` over the whole alphabet with the given polarity.
    pub fn universal(space: &Arc<SymbolSpace>, pc: Pc) -> Self {
        let mut a = Automaton::epsilon(space);
        a.add_edge(0, Label::new(space.all().clone(), pc), 0);
        a.normalized = true;
        a
    }

    /// Concatenation of single-transition steps.
    pub fn string(space: &Arc<SymbolSpace>, labels: &[Label]) -> Self {
        let mut a = Automaton::epsilon(space);
        a.finals[0] = false;
        let mut q = 0;
        for l in labels {
            let next = a.add_state();
            a.add_edge(q, l.clone(), next);
            q = next;
        }
        a.set_final(q, true);
        a
    }

    pub fn add_state(&mut self) -> StateId {
        self.normalized = false;
        self.finals.push(false);
        self.edges.push(Vec::new());
        self.finals.len() - 1
    }

    pub fn add_edge(&mut self, from: StateId, label: Label, to: StateId) {
        self.normalized = false;
        if !label.set.is_empty() {
            self.edges[from].push(Edge {
                label: Some(label),
                target: to,
            });
        }
    }

    pub fn add_epsilon(&mut self, from: StateId, to: StateId) {
        self.normalized = false;
        self.edges[from].push(Edge {
            label: None,
            target: to,
        });
    }

    pub fn set_final(&mut self, state: StateId, is_final: bool) {
        self.normalized = false;
        self.finals[state] = is_final;
    }

    pub fn set_start(&mut self, state: StateId) {
        self.normalized = false;
        self.start = state;
    }

    pub fn space(&self) -> &Arc<SymbolSpace> {
        &self.space
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn is_final(&self, state: StateId) -> bool {
        self.finals[state]
    }

    pub fn edges(&self, state: StateId) -> &[Edge] {
        &self.edges[state]
    }

    /// All labeled transitions as `(from, label, to)`.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &Label, StateId)> + '_ {
        self.edges.iter().enumerate().flat_map(|(q, es)| {
            es.iter()
                .filter_map(move |e| e.label.as_ref().map(|l| (q, l, e.target)))
        })
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_epsilon_free(&self) -> bool {
        self.edges.iter().flatten().all(|e| e.label.is_some())
    }

    /// True when no string is accepted.
    pub fn is_empty(&self) -> bool {
        let reach = self.forward_reach();
        !(0..self.num_states()).any(|q| reach[q] && self.finals[q])
    }

    fn append_states(&mut self, other: &Automaton) -> StateId {
        let offset = self.num_states();
        self.finals.extend_from_slice(&other.finals);
        for es in &other.edges {
            self.edges.push(
                es.iter()
                    .map(|e| Edge {
                        label: e.label.clone(),
                        target: e.target + offset,
                    })
                    .collect(),
            );
        }
        self.normalized = false;
        offset
    }

    pub fn concat(&self, other: &Automaton) -> Result<Automaton> {
        check_space(self, other)?;
        let mut a = self.clone();
        let offset = a.append_states(other);
        for q in 0..self.num_states() {
            if self.finals[q] {
                a.finals[q] = false;
                a.add_epsilon(q, other.start + offset);
            }
        }
        Ok(a)
    }

    pub fn union(&self, other: &Automaton) -> Result<Automaton> {
        check_space(self, other)?;
        let mut a = Automaton::epsilon(&self.space);
        a.finals[0] = false;
        let o1 = a.append_states(self);
        let o2 = a.append_states(other);
        a.add_epsilon(0, self.start + o1);
        a.add_epsilon(0, other.start + o2);
        Ok(a)
    }

    pub fn star(&self) -> Automaton {
        let mut a = Automaton::epsilon(&self.space);
        let offset = a.append_states(self);
        a.add_epsilon(0, self.start + offset);
        for q in 0..self.num_states() {
            if self.finals[q] {
                a.add_epsilon(q + offset, 0);
            }
        }
        a
    }

    pub fn plus(&self) -> Automaton {
        let mut a = self.clone();
        for q in 0..self.num_states() {
            if self.finals[q] {
                a.add_epsilon(q, self.start);
            }
        }
        a
    }

    pub fn option(&self) -> Automaton {
        self.union(&Automaton::epsilon(&self.space))
            .expect("same space")
    }

    /// Rewrites every label set into `space` with `f`; empty results drop the
    /// transition.
    pub fn map_sets(
        &self,
        space: &Arc<SymbolSpace>,
        f: impl Fn(&SymbolSet) -> SymbolSet,
    ) -> Automaton {
        let edges = self
            .edges
            .iter()
            .map(|es| {
                es.iter()
                    .filter_map(|e| match &e.label {
                        None => Some(e.clone()),
                        Some(l) => {
                            let set = f(&l.set);
                            (!set.is_empty()).then(|| Edge {
                                label: Some(Label::new(set, l.pc)),
                                target: e.target,
                            })
                        }
                    })
                    .collect()
            })
            .collect();
        Automaton {
            space: space.clone(),
            start: self.start,
            finals: self.finals.clone(),
            edges,
            normalized: false,
        }
    }

    /// ε-free, deterministic over (set, pc) letters, minimal, trim, and with
    /// states numbered canonically.
    pub fn normalize(&self) -> Automaton {
        if self.normalized {
            return self.clone();
        }
        let mut a = self.remove_epsilon().trim().determinize().minimize().canonicalize();
        a.normalized = true;
        a
    }

    fn forward_reach(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(q) = stack.pop() {
            for e in &self.edges[q] {
                if !seen[e.target] {
                    seen[e.target] = true;
                    stack.push(e.target);
                }
            }
        }
        seen
    }

    fn backward_reach(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (q, es) in self.edges.iter().enumerate() {
            for e in es {
                rev[e.target].push(q);
            }
        }
        let mut seen = self.finals.clone();
        let mut stack: Vec<StateId> = (0..n).filter(|&q| seen[q]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Drops states that are not both accessible and co-accessible.
    pub fn trim(&self) -> Automaton {
        let fw = self.forward_reach();
        let bw = self.backward_reach();
        if !(fw[self.start] && bw[self.start]) {
            return Automaton::empty(&self.space);
        }
        let mut map = vec![usize::MAX; self.num_states()];
        let mut a = Automaton {
            space: self.space.clone(),
            start: 0,
            finals: Vec::new(),
            edges: Vec::new(),
            normalized: false,
        };
        for q in 0..self.num_states() {
            if fw[q] && bw[q] {
                map[q] = a.finals.len();
                a.finals.push(self.finals[q]);
                a.edges.push(Vec::new());
            }
        }
        for q in 0..self.num_states() {
            if map[q] == usize::MAX {
                continue;
            }
            for e in &self.edges[q] {
                if map[e.target] != usize::MAX {
                    a.edges[map[q]].push(Edge {
                        label: e.label.clone(),
                        target: map[e.target],
                    });
                }
            }
        }
        a.start = map[self.start];
        a
    }

    fn epsilon_closure(&self, q: StateId) -> Vec<StateId> {
        let mut seen = HashSet::new();
        let mut stack = vec![q];
        seen.insert(q);
        while let Some(p) = stack.pop() {
            for e in &self.edges[p] {
                if e.label.is_none() && seen.insert(e.target) {
                    stack.push(e.target);
                }
            }
        }
        let mut out: Vec<StateId> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    pub fn remove_epsilon(&self) -> Automaton {
        if self.is_epsilon_free() {
            return self.clone();
        }
        let n = self.num_states();
        let mut a = Automaton {
            space: self.space.clone(),
            start: self.start,
            finals: vec![false; n],
            edges: vec![Vec::new(); n],
            normalized: false,
        };
        for q in 0..n {
            let closure = self.epsilon_closure(q);
            let mut seen = HashSet::new();
            for &p in &closure {
                a.finals[q] |= self.finals[p];
                for e in &self.edges[p] {
                    if e.label.is_some() && seen.insert(e) {
                        a.edges[q].push(e.clone());
                    }
                }
            }
        }
        a
    }

    /// Subset construction; outgoing labels are refined into disjoint blocks
    /// per pc value. Expects an ε-free automaton.
    fn determinize(&self) -> Automaton {
        let mut a = Automaton {
            space: self.space.clone(),
            start: 0,
            finals: Vec::new(),
            edges: Vec::new(),
            normalized: false,
        };
        let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut queue = VecDeque::new();
        let first = vec![self.start];
        index.insert(first.clone(), 0);
        a.finals.push(self.finals[self.start]);
        a.edges.push(Vec::new());
        queue.push_back(first);
        while let Some(subset) = queue.pop_front() {
            let from = index[&subset];
            for pc in [Pc::Consumer, Pc::Producer] {
                let mut per_target: BTreeMap<StateId, SymbolSet> = BTreeMap::new();
                for &q in &subset {
                    for e in &self.edges[q] {
                        let l = e.label.as_ref().expect("epsilon-free");
                        if l.pc == pc {
                            per_target
                                .entry(e.target)
                                .and_modify(|s| s.union_with(&l.set))
                                .or_insert_with(|| l.set.clone());
                        }
                    }
                }
                let mut grouped: BTreeMap<Vec<StateId>, SymbolSet> = BTreeMap::new();
                for (set, targets) in refine(per_target) {
                    grouped
                        .entry(targets)
                        .and_modify(|s| s.union_with(&set))
                        .or_insert(set);
                }
                for (targets, set) in grouped {
                    let to = match index.get(&targets) {
                        Some(&id) => id,
                        None => {
                            let id = a.finals.len();
                            a.finals.push(targets.iter().any(|&t| self.finals[t]));
                            a.edges.push(Vec::new());
                            index.insert(targets.clone(), id);
                            queue.push_back(targets);
                            id
                        }
                    };
                    a.edges[from].push(Edge {
                        label: Some(Label::new(set, pc)),
                        target: to,
                    });
                }
            }
        }
        a
    }

    /// Moore partition refinement on a trim deterministic automaton; parallel
    /// transitions towards one class merge their label sets.
    fn minimize(&self) -> Automaton {
        let n = self.num_states();
        let mut class: Vec<usize> = self.finals.iter().map(|&f| f as usize).collect();
        let mut count = class.iter().collect::<HashSet<_>>().len();
        loop {
            let mut sigs: HashMap<(usize, Vec<(usize, Pc, SymbolSet)>), usize> = HashMap::new();
            let mut next = vec![0; n];
            for q in 0..n {
                let sig = (class[q], self.grouped_edges(q, &class));
                let len = sigs.len();
                next[q] = *sigs.entry(sig).or_insert(len);
            }
            class = next;
            if sigs.len() == count {
                break;
            }
            count = sigs.len();
        }
        let mut a = Automaton {
            space: self.space.clone(),
            start: class[self.start],
            finals: vec![false; count],
            edges: vec![Vec::new(); count],
            normalized: false,
        };
        let mut done = vec![false; count];
        for q in 0..n {
            let c = class[q];
            if done[c] {
                continue;
            }
            done[c] = true;
            a.finals[c] = self.finals[q];
            a.edges[c] = self
                .grouped_edges(q, &class)
                .into_iter()
                .map(|(t, pc, set)| Edge {
                    label: Some(Label::new(set, pc)),
                    target: t,
                })
                .collect();
        }
        a
    }

    fn grouped_edges(&self, q: StateId, class: &[usize]) -> Vec<(usize, Pc, SymbolSet)> {
        let mut grouped: BTreeMap<(usize, Pc), SymbolSet> = BTreeMap::new();
        for e in &self.edges[q] {
            let l = e.label.as_ref().expect("epsilon-free");
            grouped
                .entry((class[e.target], l.pc))
                .and_modify(|s| s.union_with(&l.set))
                .or_insert_with(|| l.set.clone());
        }
        grouped.into_iter().map(|((c, pc), s)| (c, pc, s)).collect()
    }

    /// Renumbers states in breadth-first order with edges sorted by label.
    fn canonicalize(&self) -> Automaton {
        let n = self.num_states();
        let mut map = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        map[self.start] = 0;
        order.push(self.start);
        queue.push_back(self.start);
        let mut sorted: Vec<Vec<Edge>> = self.edges.clone();
        for es in &mut sorted {
            es.sort_by(|x, y| x.label.cmp(&y.label));
        }
        while let Some(q) = queue.pop_front() {
            for e in &sorted[q] {
                if map[e.target] == usize::MAX {
                    map[e.target] = order.len();
                    order.push(e.target);
                    queue.push_back(e.target);
                }
            }
        }
        let mut a = Automaton {
            space: self.space.clone(),
            start: 0,
            finals: Vec::with_capacity(order.len()),
            edges: Vec::with_capacity(order.len()),
            normalized: false,
        };
        for &q in &order {
            a.finals.push(self.finals[q]);
            a.edges.push(
                sorted[q]
                    .iter()
                    .map(|e| Edge {
                        label: e.label.clone(),
                        target: map[e.target],
                    })
                    .collect(),
            );
        }
        a
    }

    /// Whether the automaton is deterministic over (symbol, pc) letters.
    pub fn is_deterministic(&self) -> bool {
        self.edges.iter().all(|es| {
            es.iter().enumerate().all(|(i, e)| match &e.label {
                None => false,
                Some(l) => es[i + 1..].iter().all(|f| match &f.label {
                    None => false,
                    Some(m) => l.pc != m.pc || !l.set.intersects(&m.set),
                }),
            })
        })
    }

    /// Whether the given concrete string is accepted.
    pub fn accepts(&self, word: &[Letter]) -> bool {
        let closure = |states: &HashSet<StateId>| -> HashSet<StateId> {
            let mut out = HashSet::new();
            for &q in states {
                out.extend(self.epsilon_closure(q));
            }
            out
        };
        let mut current = closure(&HashSet::from([self.start]));
        for letter in word {
            let mut next = HashSet::new();
            for &q in &current {
                for e in &self.edges[q] {
                    if let Some(l) = &e.label {
                        if l.pc == letter.pc && l.set.contains(letter.symbol) {
                            next.insert(e.target);
                        }
                    }
                }
            }
            current = closure(&next);
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|&q| self.finals[q])
    }

    /// Number of accepting label paths of the normalized automaton, `None`
    /// when the language is infinite.
    pub fn count_paths(&self) -> Option<u128> {
        let a = self.normalize();
        #[derive(Clone, Copy, PartialEq)]
        enum Visit {
            New,
            Active,
            Done(u128),
        }
        fn go(a: &Automaton, q: StateId, memo: &mut [Visit]) -> Option<u128> {
            match memo[q] {
                Visit::Done(n) => return Some(n),
                Visit::Active => return None,
                Visit::New => {}
            }
            memo[q] = Visit::Active;
            let mut total = a.finals[q] as u128;
            for e in &a.edges[q] {
                total += go(a, e.target, memo)?;
            }
            memo[q] = Visit::Done(total);
            Some(total)
        }
        let mut memo = vec![Visit::New; a.num_states()];
        go(&a, a.start, &mut memo)
    }

    /// Accepting label paths of the normalized automaton, at most `max_len`
    /// transitions long, in depth-first label order.
    pub fn label_paths(&self, max_len: usize) -> Vec<Vec<Label>> {
        let a = self.normalize();
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        fn go<'a>(
            a: &'a Automaton,
            q: StateId,
            budget: usize,
            prefix: &mut Vec<&'a Label>,
            out: &mut Vec<Vec<Label>>,
        ) {
            if a.finals[q] {
                out.push(prefix.iter().map(|l| (*l).clone()).collect());
            }
            if budget == 0 {
                return;
            }
            for e in &a.edges[q] {
                prefix.push(e.label.as_ref().expect("normalized"));
                go(a, e.target, budget - 1, prefix, out);
                prefix.pop();
            }
        }
        go(&a, a.start, max_len, &mut prefix, &mut out);
        out
    }

    /// Serializes the automaton; sets are hex bitsets.
    pub fn to_json(&self) -> String {
        let doc = AutomatonJson {
            alphabet_size: self.space.len(),
            marked: self.space.is_marked(),
            states: self.num_states(),
            start: self.start,
            finals: (0..self.num_states()).filter(|&q| self.finals[q]).collect(),
            transitions: self
                .edges
                .iter()
                .enumerate()
                .flat_map(|(q, es)| {
                    es.iter().map(move |e| TransitionJson {
                        from: q,
                        to: e.target,
                        set: e.label.as_ref().map(|l| l.set.to_hex()),
                        pc: e.label.as_ref().map(|l| l.pc),
                    })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(space: &Arc<SymbolSpace>, text: &str) -> Result<Automaton> {
        let doc: AutomatonJson = serde_json::from_str(text)?;
        if doc.alphabet_size != space.len() || doc.marked != space.is_marked() {
            return Err(Error::SpaceMismatch);
        }
        if doc.states == 0 || doc.start >= doc.states {
            return Err(Error::Malformed("start state out of range".into()));
        }
        let mut a = Automaton {
            space: space.clone(),
            start: doc.start,
            finals: vec![false; doc.states],
            edges: vec![Vec::new(); doc.states],
            normalized: false,
        };
        for f in doc.finals {
            *a.finals
                .get_mut(f)
                .ok_or_else(|| Error::Malformed(format!("final state {f} out of range")))? = true;
        }
        for t in doc.transitions {
            if t.from >= doc.states || t.to >= doc.states {
                return Err(Error::Malformed("transition state out of range".into()));
            }
            match (t.set, t.pc) {
                (None, None) => a.add_epsilon(t.from, t.to),
                (Some(hex), Some(pc)) => {
                    let set = SymbolSet::from_hex(space.len(), &hex)?;
                    if set.is_empty() {
                        return Err(Error::Malformed("empty transition label".into()));
                    }
                    a.add_edge(t.from, Label::new(set, pc), t.to)
                }
                _ => return Err(Error::Malformed("label needs both set and pc".into())),
            }
        }
        a.normalized = false;
        Ok(a)
    }

    /// Graphviz rendering; producer transitions are drawn bold.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph fsa {\n  rankdir=LR;\n  node [shape=circle];\n");
        s.push_str("  __start [shape=point];\n");
        for q in 0..self.num_states() {
            if self.finals[q] {
                let _ = writeln!(s, "  {q} [shape=doublecircle];");
            } else {
                let _ = writeln!(s, "  {q};");
            }
        }
        let _ = writeln!(s, "  __start -> {};", self.start);
        for (q, es) in self.edges.iter().enumerate() {
            for e in es {
                match &e.label {
                    None => {
                        let _ = writeln!(s, "  {q} -> {} [label=\"eps\", style=dashed];", e.target);
                    }
                    Some(l) => {
                        let text = self.space.describe(&l.set).replace('\\', "\\\\").replace('"', "\\\"");
                        let style = if l.pc.is_producer() {
                            ", style=bold, fontname=\"Helvetica-Bold\""
                        } else {
                            ""
                        };
                        let flag = if l.pc.is_producer() { "P" } else { "C" };
                        let _ = writeln!(s, "  {q} -> {} [label=\"{flag} {text}\"{style}];", e.target);
                    }
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Serialize, Deserialize)]
struct AutomatonJson {
    alphabet_size: usize,
    marked: bool,
    states: usize,
    start: StateId,
    finals: Vec<StateId>,
    transitions: Vec<TransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    from: StateId,
    to: StateId,
    set: Option<String>,
    pc: Option<Pc>,
}

/// Splits possibly overlapping sets into disjoint blocks, each with the sorted
/// list of targets it leads to.
fn refine(per_target: BTreeMap<StateId, SymbolSet>) -> Vec<(SymbolSet, Vec<StateId>)> {
    let mut blocks: Vec<(SymbolSet, Vec<StateId>)> = Vec::new();
    for (target, set) in per_target {
        let mut rest = set;
        let mut next = Vec::with_capacity(blocks.len() + 2);
        for (b, ts) in blocks {
            if rest.is_empty() || !b.intersects(&rest) {
                next.push((b, ts));
                continue;
            }
            let inside = b.intersection(&rest);
            let outside = b.difference(&rest);
            rest = rest.difference(&b);
            if !outside.is_empty() {
                next.push((outside, ts.clone()));
            }
            let mut ts = ts;
            ts.push(target);
            next.push((inside, ts));
        }
        if !rest.is_empty() {
            next.push((rest, vec![target]));
        }
        blocks = next;
    }
    blocks
}

fn product(a: &Automaton, b: &Automaton, combine: impl Fn(Pc, Pc) -> Option<Pc>) -> Result<Automaton> {
    check_space(a, b)?;
    let a = a.remove_epsilon();
    let b = b.remove_epsilon();
    let mut out = Automaton {
        space: a.space.clone(),
        start: 0,
        finals: vec![a.finals[a.start] && b.finals[b.start]],
        edges: vec![Vec::new()],
        normalized: false,
    };
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    index.insert((a.start, b.start), 0);
    let mut queue = VecDeque::from([(a.start, b.start)]);
    while let Some((p, q)) = queue.pop_front() {
        let from = index[&(p, q)];
        for ea in &a.edges[p] {
            let la = ea.label.as_ref().expect("epsilon-free");
            for eb in &b.edges[q] {
                let lb = eb.label.as_ref().expect("epsilon-free");
                let Some(pc) = combine(la.pc, lb.pc) else {
                    continue;
                };
                if !la.set.intersects(&lb.set) {
                    continue;
                }
                let key = (ea.target, eb.target);
                let to = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = out.finals.len();
                        out.finals.push(a.finals[key.0] && b.finals[key.1]);
                        out.edges.push(Vec::new());
                        index.insert(key, id);
                        queue.push_back(key);
                        id
                    }
                };
                out.edges[from].push(Edge {
                    label: Some(Label::new(la.set.intersection(&lb.set), pc)),
                    target: to,
                });
            }
        }
    }
    Ok(out.trim())
}

/// Product where matching labels combine their pc bits by OR.
pub fn intersect_open(a: &Automaton, b: &Automaton) -> Result<Automaton> {
    product(a, b, |x, y| Some(x.or(y)))
}

/// Product that only matches producer against producer.
pub fn intersect_closed(a: &Automaton, b: &Automaton) -> Result<Automaton> {
    product(a, b, |x, y| {
        (x.is_producer() && y.is_producer()).then_some(Pc::Producer)
    })
}

/// Closed intersection with the universal producer language: every
/// unmatched consumer transition disappears.
pub fn closed_interpretation(a: &Automaton) -> Automaton {
    let sigma = Automaton::universal(a.space(), Pc::Producer);
    intersect_closed(a, &sigma).expect("same space")
}

/// Languages over (symbol, pc) letters are equal.
pub fn equivalent(a: &Automaton, b: &Automaton) -> Result<bool> {
    check_space(a, b)?;
    let (x, y) = (a.normalize(), b.normalize());
    Ok(x.finals == y.finals && x.edges == y.edges && x.start == y.start)
}

/// All accepted concrete strings of at most `max_len` letters, ordered by
/// length and then lexicographically by (symbol index, pc).
pub fn enumerate(a: &Automaton, max_len: usize) -> Vec<Vec<Letter>> {
    let a = a.normalize();
    let n = a.num_states();
    let moves: Vec<Vec<(Letter, StateId)>> = (0..n)
        .map(|q| {
            let mut m: Vec<(Letter, StateId)> = a.edges[q]
                .iter()
                .flat_map(|e| {
                    let l = e.label.as_ref().expect("normalized");
                    l.set.iter().map(move |symbol| (Letter { symbol, pc: l.pc }, e.target))
                })
                .collect();
            m.sort();
            m
        })
        .collect();
    // finish[k][q]: some path of exactly k letters leads from q to a final state
    let mut finish = vec![a.finals.clone()];
    for k in 1..=max_len {
        let prev = &finish[k - 1];
        let row = (0..n)
            .map(|q| a.edges[q].iter().any(|e| prev[e.target]))
            .collect();
        finish.push(row);
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    fn go(
        moves: &[Vec<(Letter, StateId)>],
        finish: &[Vec<bool>],
        q: StateId,
        left: usize,
        prefix: &mut Vec<Letter>,
        out: &mut Vec<Vec<Letter>>,
    ) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for &(letter, t) in &moves[q] {
            if finish[left - 1][t] {
                prefix.push(letter);
                go(moves, finish, t, left - 1, prefix, out);
                prefix.pop();
            }
        }
    }
    for len in 0..=max_len {
        if finish[len][a.start] {
            go(&moves, &finish, a.start, len, &mut prefix, &mut out);
        }
    }
    out
}

/// Symbol strings of [`enumerate`] with pc bits dropped, deduplicated.
pub fn enumerate_symbols(a: &Automaton, max_len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = enumerate(a, max_len)
        .into_iter()
        .map(|w| w.into_iter().map(|l| l.symbol).collect())
        .collect();
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    out.dedup();
    out
}
