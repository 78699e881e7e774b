//! Syllabification support: the sonority contour automaton and helpers to
//! read syllable structure off symbol strings. The constraints themselves are
//! grammar macros (`syllabification`, `prosodic_constraints`, `stress`,
//! `word`).

use std::sync::Arc;

use crate::alphabet::{Mark, Role, Segment, Symbol, SymbolSet, SymbolSpace};
use crate::combinators::Grammar;
use crate::error::Result;
use crate::fsa::{Automaton, Label};

/// All-consumer automaton over the marked space: each segment carries `up`
/// iff the next segment is more sonorous, and the last segment is `down`.
/// Technical symbols do not occur.
pub fn sonority_differences(marked: &Arc<SymbolSpace>) -> Automaton {
    assert!(marked.is_marked(), "sonority marks live in the marked space");
    let inv = marked.inventory();
    let ranks = inv.phonemes().iter().map(|p| p.sonority as usize).max().unwrap_or(0) + 1;
    // classes[m][r]: marked segments of sonority r carrying mark m
    let mut classes = vec![vec![SymbolSet::empty(marked.len()); ranks]; 2];
    for i in marked.segments().iter() {
        if let Symbol::Segment(s) = marked.symbol(i) {
            let m = marked.mark(i).expect("marked space") as usize;
            classes[m][marked.phoneme(s.phoneme).sonority as usize].insert(i);
        }
    }
    let state = |m: usize, r: usize| 1 + m * ranks + r;
    let mut a = Automaton::epsilon(marked);
    for _ in 0..2 * ranks {
        a.add_state();
    }
    for m in 0..2 {
        for r in 0..ranks {
            a.set_final(state(m, r), m == Mark::Down as usize);
            a.add_edge(0, Label::consumer(classes[m][r].clone()), state(m, r));
        }
    }
    for m in 0..2 {
        for r in 0..ranks {
            for m2 in 0..2 {
                for r2 in 0..ranks {
                    if (r < r2) == (m == Mark::Up as usize) {
                        a.add_edge(state(m, r), Label::consumer(classes[m2][r2].clone()), state(m2, r2));
                    }
                }
            }
        }
    }
    a.normalize()
}

/// Sonority marks of a segment string as computed pairwise.
pub fn marks_of(space: &SymbolSpace, segments: &[Symbol]) -> Result<Vec<Mark>> {
    let mut out = Vec::with_capacity(segments.len());
    for (i, s) in segments.iter().enumerate() {
        out.push(match segments.get(i + 1) {
            Some(next) => crate::alphabet::up_down_mark(space, s, next)?,
            None => {
                crate::alphabet::up_down_mark(space, s, s)?;
                Mark::Down
            }
        });
    }
    Ok(out)
}

pub fn syllabification(g: &Grammar) -> Result<Automaton> {
    g.compile_str("syllabification")
}

pub fn prosodic_constraints(g: &Grammar) -> Result<Automaton> {
    g.compile_str("prosodic_constraints")
}

pub fn stress(g: &Grammar) -> Result<Automaton> {
    g.compile_str("stress")
}

pub fn positional_classification(g: &Grammar) -> Result<Automaton> {
    g.compile_str("positional_classification")
}

pub fn word(g: &Grammar) -> Result<Automaton> {
    g.compile_str("word")
}

/// Splits a fully specified segment string into syllables of shape CV or CVC,
/// where a long vowel's second half counts as a coda. Returns `None` when the
/// roles do not parse that way.
pub fn syllables(space: &SymbolSpace, segments: &[Segment]) -> Option<Vec<Vec<Segment>>> {
    let vowel = |s: &Segment| space.phoneme(s.phoneme).is_vowel;
    let mut out = Vec::new();
    let mut i = 0;
    while i < segments.len() {
        let start = i;
        let onset = &segments[i];
        if onset.role != Role::Ons || vowel(onset) {
            return None;
        }
        let nucleus = segments.get(i + 1)?;
        if nucleus.role != Role::Nuc || !vowel(nucleus) {
            return None;
        }
        i += 2;
        if segments.get(i).is_some_and(|s| s.role == Role::Cod && vowel(s)) {
            i += 1;
        }
        if segments.get(i).is_some_and(|s| s.role == Role::Cod && !vowel(s)) {
            i += 1;
        }
        out.push(segments[start..i].to_vec());
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Position, Stress, Sync};
    use crate::fsa::enumerate;

    fn seg(space: &SymbolSpace, name: &str) -> Symbol {
        Symbol::Segment(Segment {
            phoneme: space.inventory().index_of(name).unwrap(),
            sync: Sync::Edge,
            stress: Stress::Stressed,
            role: Role::Ons,
            position: Position::Medial,
        })
    }

    fn word(space: &SymbolSpace, w: &[&str]) -> Vec<Symbol> {
        w.iter().map(|p| seg(space, p)).collect()
    }

    #[test]
    fn oracle_marks() {
        let s = SymbolSpace::temiar();
        use Mark::*;
        assert_eq!(marks_of(&s, &word(&s, &["k", "O", "O", "w"])).unwrap(), vec![Up, Down, Down, Down]);
        assert_eq!(
            marks_of(&s, &word(&s, &["s", "@", "l", "O", "g"])).unwrap(),
            vec![Up, Down, Up, Down, Down]
        );
        assert_eq!(marks_of(&s, &word(&s, &["k"])).unwrap(), vec![Down]);
    }

    #[test]
    fn automaton_agrees_with_oracle() {
        let plain = SymbolSpace::temiar();
        let marked = plain.marked_twin();
        let a = sonority_differences(&marked);
        for w in [vec!["k", "O", "O", "w"], vec!["s", "@", "l", "O", "g"], vec!["k"], vec!["y", "a", "a", "p"]] {
            let syms = word(&plain, &w);
            let marks = marks_of(&plain, &syms).unwrap();
            // restrict to this exact symbol sequence and read off the marks
            let labels: Vec<Label> = syms
                .iter()
                .map(|s| Label::consumer(marked.lift(&SymbolSet::singleton(plain.len(), plain.index_of(s)))))
                .collect();
            let path = Automaton::string(&marked, &labels);
            let r = crate::fsa::intersect_open(&a, &path).unwrap();
            let words = enumerate(&r, w.len());
            assert_eq!(words.len(), 1, "{w:?}");
            let got: Vec<Mark> = words[0].iter().map(|l| marked.mark(l.symbol).unwrap()).collect();
            assert_eq!(got, marks, "{w:?}");
        }
    }

    #[test]
    fn syllable_parsing() {
        let s = SymbolSpace::temiar();
        let mk = |name: &str, role| Segment {
            phoneme: s.inventory().index_of(name).unwrap(),
            sync: Sync::Edge,
            stress: Stress::Stressed,
            role,
            position: Position::Medial,
        };
        let koow = [mk("k", Role::Ons), mk("O", Role::Nuc), mk("O", Role::Cod), mk("w", Role::Cod)];
        assert_eq!(syllables(&s, &koow).unwrap().len(), 1);
        let bad = [mk("k", Role::Ons), mk("O", Role::Nuc), mk("w", Role::Ons)];
        assert!(syllables(&s, &bad).is_none());
        let vfirst = [mk("a", Role::Nuc), mk("k", Role::Cod)];
        assert!(syllables(&s, &vfirst).is_none());
    }
}
