//! Independent oracles for integration tests: a plain letter-level NFA built
//! by expanding set labels, with the enrichment definitions applied directly.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use olpm::alphabet::{Symbol, SymbolSet, SymbolSpace, Technical};
use olpm::fsa::{Automaton, Label, Letter, Pc};
use rand::rngs::StdRng;
use rand::Rng;

/// Classical NFA over `(symbol, pc)` letters.
#[derive(Debug, Clone)]
pub struct Nfa {
    pub start: usize,
    pub finals: Vec<bool>,
    pub trans: Vec<Vec<(Letter, usize)>>,
}

impl Nfa {
    /// Expands every set label into one transition per symbol.
    pub fn from_automaton(a: &Automaton) -> Nfa {
        let mut trans = vec![Vec::new(); a.num_states()];
        for q in 0..a.num_states() {
            for e in a.edges(q) {
                let l = e.label.as_ref().expect("no epsilon moves expected");
                for symbol in l.set.iter() {
                    trans[q].push((Letter { symbol, pc: l.pc }, e.target));
                }
            }
        }
        Nfa {
            start: a.start(),
            finals: (0..a.num_states()).map(|q| a.is_final(q)).collect(),
            trans,
        }
    }

    fn letters(&self) -> BTreeSet<Letter> {
        self.trans.iter().flatten().map(|(l, _)| *l).collect()
    }

    fn step(&self, states: &BTreeSet<usize>, letter: Letter) -> BTreeSet<usize> {
        states
            .iter()
            .flat_map(|&q| self.trans[q].iter().filter(move |(l, _)| *l == letter).map(|(_, t)| *t))
            .collect()
    }

    fn accepts_any(&self, states: &BTreeSet<usize>) -> bool {
        states.iter().any(|&q| self.finals[q])
    }

    /// Definition: for every transition q -x-> p add p -repeat-> q.
    pub fn add_repeats(&self, space: &SymbolSpace) -> Nfa {
        let repeat = Letter {
            symbol: space.index_of(&Symbol::Technical(Technical::Repeat)),
            pc: Pc::Consumer,
        };
        let mut out = self.clone();
        let mut seen = HashSet::new();
        for (q, ts) in self.trans.iter().enumerate() {
            for &(l, p) in ts {
                if l.symbol != repeat.symbol && seen.insert((p, q)) {
                    out.trans[p].push((repeat, q));
                }
            }
        }
        out
    }

    /// Definition: for every transition q -x-> p add q -skip-> p.
    pub fn add_skips(&self, space: &SymbolSpace) -> Nfa {
        let skip = Letter {
            symbol: space.index_of(&Symbol::Technical(Technical::Skip)),
            pc: Pc::Consumer,
        };
        let mut out = self.clone();
        let mut seen = HashSet::new();
        for (q, ts) in self.trans.iter().enumerate() {
            for &(l, p) in ts {
                if l.symbol != skip.symbol && seen.insert((q, p)) {
                    out.trans[q].push((skip, p));
                }
            }
        }
        out
    }

    /// Definition: a consumer loop for every symbol of `sigma` at every state.
    pub fn add_self_loops(&self, sigma: &[usize]) -> Nfa {
        let mut out = self.clone();
        for q in 0..self.trans.len() {
            for &s in sigma {
                out.trans[q].push((Letter { symbol: s, pc: Pc::Consumer }, q));
            }
        }
        out
    }

    /// All accepted words up to `max_len`, sorted by length then letters.
    pub fn words(&self, max_len: usize) -> Vec<Vec<Letter>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![(self.start, Vec::new())];
        while let Some((q, w)) = stack.pop() {
            if self.finals[q] {
                out.insert((w.len(), w.clone()));
            }
            if w.len() == max_len {
                continue;
            }
            for &(l, t) in &self.trans[q] {
                let mut w2 = w.clone();
                w2.push(l);
                stack.push((t, w2));
            }
        }
        out.into_iter().map(|(_, w)| w).collect()
    }
}

/// Checks that two NFAs accept the same words of every length up to
/// `max_len`, by walking pairs of reachable subsets level by level.
pub fn agree_upto(x: &Nfa, y: &Nfa, max_len: usize) -> Result<(), String> {
    let letters: Vec<Letter> = x.letters().union(&y.letters()).copied().collect();
    let mut level: BTreeSet<(BTreeSet<usize>, BTreeSet<usize>, Vec<Letter>)> = BTreeSet::new();
    level.insert((BTreeSet::from([x.start]), BTreeSet::from([y.start]), Vec::new()));
    let mut seen = HashSet::new();
    for depth in 0..=max_len {
        let mut next = BTreeSet::new();
        for (a, b, witness) in &level {
            if x.accepts_any(a) != y.accepts_any(b) {
                return Err(format!("disagree on {witness:?} (length {depth})"));
            }
            if depth == max_len {
                continue;
            }
            for &l in &letters {
                let a2 = x.step(a, l);
                let b2 = y.step(b, l);
                if a2.is_empty() && b2.is_empty() {
                    continue;
                }
                if seen.insert((depth + 1, a2.clone(), b2.clone())) {
                    let mut w = witness.clone();
                    w.push(l);
                    next.insert((a2, b2, w));
                }
            }
        }
        level = next;
    }
    Ok(())
}

/// Four concrete segment symbols of the space.
pub fn small_alphabet(space: &SymbolSpace) -> Vec<usize> {
    space.segments().iter().step_by(97).take(4).collect()
}

/// Random automaton with at most `max_states` states over a random subset of
/// `alphabet`.
pub fn random_automaton(space: &Arc<SymbolSpace>, alphabet: &[usize], max_states: usize, rng: &mut StdRng) -> Automaton {
    let n = rng.gen_range(1..=max_states);
    let k = rng.gen_range(1..=alphabet.len());
    let syms = &alphabet[..k];
    let mut a = Automaton::empty(space);
    for _ in 1..n {
        a.add_state();
    }
    for q in 0..n {
        a.set_final(q, rng.gen_bool(0.4));
        for _ in 0..rng.gen_range(0..=3) {
            let mut set = SymbolSet::empty(space.len());
            for &s in syms {
                if rng.gen_bool(0.5) {
                    set.insert(s);
                }
            }
            if set.is_empty() {
                set.insert(syms[rng.gen_range(0..k)]);
            }
            let pc = if rng.gen_bool(0.5) { Pc::Producer } else { Pc::Consumer };
            a.add_edge(q, Label::new(set, pc), rng.gen_range(0..n));
        }
    }
    a
}

/// Consumer `Σ*` over the given symbols plus the technical symbols.
pub fn small_sigma(space: &Arc<SymbolSpace>, alphabet: &[usize]) -> Automaton {
    let mut set = space.technical().clone();
    for &s in alphabet {
        set.insert(s);
    }
    let mut a = Automaton::epsilon(space);
    a.add_edge(0, Label::consumer(set), 0);
    a
}
