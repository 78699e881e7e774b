//! The grammar language: macro environment and compilation of terms to
//! automata.
//!
//! Formulas mentioning the sonority marks `up`/`down` compile in the marked
//! twin of the symbol space. Such an automaton is only meaningful once it has
//! been intersected with `sonority_differences`, which ties every mark to the
//! actual sonority contour; after that the marks are projected away when the
//! enclosing macro returns.

pub mod ast;
pub mod parser;

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

pub use ast::{Expr, MacroDef};
pub use parser::{parse_expr, parse_formula, parse_grammar, to_formula};

use crate::alphabet::{SymbolSet, SymbolSpace, TypeFormula};
use crate::enrich;
use crate::error::{Error, Result};
use crate::fsa::{self, Automaton, Label, Pc};
use crate::optimize;
use crate::prosody;

/// Builtin operators with their arity.
pub const BUILTINS: &[(&str, usize)] = &[
    ("producer", 1),
    ("consumer", 1),
    ("add_repeats", 1),
    ("add_skips", 1),
    ("add_self_loops", 1),
    ("add_self_loop_before", 2),
    ("ignore", 2),
    ("closed_interpretation", 1),
    ("stringToSegments", 1),
    ("literal_segments", 1),
    ("sonority_differences", 0),
    ("optimize", 1),
];

/// Inner vowels and their outer partners.
const ALTERNATING_VOWELS: &[(&str, &str)] = &[("@", "E"), ("e", "i"), ("o", "u")];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marks {
    /// Plain space.
    None,
    /// Marked space, marks not yet tied to sonority.
    Free,
    /// Marked space, intersected with `sonority_differences`.
    Tied,
}

#[derive(Debug, Clone)]
struct Value {
    fsa: Automaton,
    marks: Marks,
}

/// A loaded grammar: macro definitions over one symbol space.
pub struct Grammar {
    space: Arc<SymbolSpace>,
    marked: Arc<SymbolSpace>,
    macros: HashMap<(String, usize), MacroDef>,
    order: Vec<(String, usize)>,
    cache: Mutex<HashMap<String, Value>>,
}

impl std::fmt::Debug for Grammar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grammar")
            .field("macros", &self.order)
            .finish_non_exhaustive()
    }
}

fn is_builtin(name: &str, arity: usize) -> bool {
    BUILTINS.iter().any(|&(n, a)| n == name && a == arity)
}

impl Grammar {
    pub fn new(space: &Arc<SymbolSpace>) -> Self {
        Grammar {
            space: space.clone(),
            marked: space.marked_twin(),
            macros: HashMap::new(),
            order: Vec::new(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_source(space: &Arc<SymbolSpace>, src: &str) -> Result<Self> {
        let mut g = Grammar::new(space);
        g.load(src)?;
        Ok(g)
    }

    /// Adds all definitions of `src`.
    pub fn load(&mut self, src: &str) -> Result<()> {
        for def in parse_grammar(src)? {
            self.define(def)?;
        }
        self.check_cycles()
    }

    pub fn define(&mut self, def: MacroDef) -> Result<()> {
        let key = (def.name.clone(), def.params.len());
        if is_builtin(&key.0, key.1) || self.macros.contains_key(&key) {
            return Err(Error::MacroRedefined {
                name: key.0,
                arity: key.1,
            });
        }
        let mut seen = HashSet::new();
        for p in &def.params {
            if !seen.insert(p) {
                return Err(Error::Type(format!(
                    "parameter `{p}` occurs twice in `{}`",
                    def.name
                )));
            }
        }
        self.order.push(key.clone());
        self.macros.insert(key, def);
        self.cache.lock().expect("cache lock").clear();
        Ok(())
    }

    fn check_cycles(&self) -> Result<()> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit(
            g: &Grammar,
            key: &(String, usize),
            state: &mut HashMap<(String, usize), Mark>,
        ) -> Result<()> {
            match state.get(key) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::Active) => return Err(Error::CyclicMacro(key.0.clone())),
                None => {}
            }
            state.insert(key.clone(), Mark::Active);
            let mut calls = Vec::new();
            g.macros[key].body.calls(&mut calls);
            for c in calls {
                if g.macros.contains_key(&c) {
                    visit(g, &c, state)?;
                }
            }
            state.insert(key.clone(), Mark::Done);
            Ok(())
        }
        let mut state = HashMap::new();
        for key in &self.order {
            visit(self, key, &mut state)?;
        }
        Ok(())
    }

    pub fn space(&self) -> &Arc<SymbolSpace> {
        &self.space
    }

    pub fn has_macro(&self, name: &str, arity: usize) -> bool {
        self.macros.contains_key(&(name.to_string(), arity))
    }

    /// Macro names with arities, in definition order.
    pub fn macros(&self) -> impl Iterator<Item = (&str, usize)> {
        self.order.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn compile_str(&self, src: &str) -> Result<Automaton> {
        self.compile(&parse_expr(src)?)
    }

    /// Compiles a closed term to a normalized automaton over the plain space.
    pub fn compile(&self, e: &Expr) -> Result<Automaton> {
        let v = self.value(e)?;
        self.plain(v)
    }

    /// Denotation of a type formula term over the plain space.
    pub fn denote(&self, e: &Expr) -> Result<SymbolSet> {
        self.space.denote(&to_formula(e)?)
    }

    fn plain(&self, v: Value) -> Result<Automaton> {
        match v.marks {
            Marks::None => Ok(v.fsa),
            Marks::Tied => Ok(self.project(&v.fsa)),
            Marks::Free => Err(Error::UnresolvedMark),
        }
    }

    fn project(&self, a: &Automaton) -> Automaton {
        a.map_sets(&self.space, |s| self.marked.project(s)).normalize()
    }

    fn lift(&self, v: &Value) -> Automaton {
        if v.marks == Marks::None {
            v.fsa.map_sets(&self.marked, |s| self.marked.lift(s))
        } else {
            v.fsa.clone()
        }
    }

    /// Brings operands into one space.
    fn harmonize(&self, vs: &[Value]) -> Vec<Automaton> {
        if vs.iter().all(|v| v.marks == Marks::None) {
            vs.iter().map(|v| v.fsa.clone()).collect()
        } else {
            vs.iter().map(|v| self.lift(v)).collect()
        }
    }

    fn combine_marks(vs: &[Value]) -> Marks {
        if vs.iter().any(|v| v.marks == Marks::Free) {
            Marks::Free
        } else if vs.iter().any(|v| v.marks == Marks::Tied) {
            Marks::Tied
        } else {
            Marks::None
        }
    }

    fn formula_space(&self, f: &TypeFormula) -> &Arc<SymbolSpace> {
        if f.mentions_mark() {
            &self.marked
        } else {
            &self.space
        }
    }

    fn value(&self, e: &Expr) -> Result<Value> {
        let done = |fsa: Automaton, marks| Ok(Value { fsa: fsa.normalize(), marks });
        match e {
            Expr::Concat(xs) | Expr::Union(xs) => {
                let is_concat = matches!(e, Expr::Concat(_));
                if xs.is_empty() {
                    let a = if is_concat {
                        Automaton::epsilon(&self.space)
                    } else {
                        Automaton::empty(&self.space)
                    };
                    return done(a, Marks::None);
                }
                let vs = xs.iter().map(|x| self.value(x)).collect::<Result<Vec<_>>>()?;
                let marks = Self::combine_marks(&vs);
                let mut fsas = self.harmonize(&vs).into_iter();
                let mut acc = fsas.next().expect("non-empty");
                for a in fsas {
                    acc = if is_concat { acc.concat(&a)? } else { acc.union(&a)? };
                }
                done(acc, marks)
            }
            Expr::Star(x) => {
                let v = self.value(x)?;
                done(v.fsa.star(), v.marks)
            }
            Expr::Plus(x) => {
                let v = self.value(x)?;
                done(v.fsa.plus(), v.marks)
            }
            Expr::Optional(x) => {
                let v = self.value(x)?;
                done(v.fsa.option(), v.marks)
            }
            Expr::And(a, b) => {
                let vs = [self.value(a)?, self.value(b)?];
                let marks = if vs.iter().any(|v| v.marks == Marks::Tied) {
                    Marks::Tied
                } else {
                    Self::combine_marks(&vs)
                };
                let fsas = self.harmonize(&vs);
                done(fsa::intersect_open(&fsas[0], &fsas[1])?, marks)
            }
            Expr::Or(..) => Err(Error::Type(format!(
                "`;` combines type formulas only, use {{..}} for union: `{e}`"
            ))),
            Expr::Not(_) => Err(Error::Type(format!(
                "`~` complements type formulas only: `{e}`"
            ))),
            Expr::Rule {
                dir,
                focus,
                result,
                context,
            } => {
                let fs = [to_formula(focus)?, to_formula(result)?, to_formula(context)?];
                let marked = fs.iter().any(|f| f.mentions_mark());
                let space = if marked { &self.marked } else { &self.space };
                let sets = fs.iter().map(|f| space.denote(f)).collect::<Result<Vec<_>>>()?;
                let a = enrich::monotonic_rule(space, *dir, &sets[0], &sets[1], &sets[2]);
                done(a, if marked { Marks::Free } else { Marks::None })
            }
            Expr::Atom(a) => Err(Error::Type(format!(
                "type `{e}` used as a language; wrap it in producer(..) or consumer(..)",
                e = crate::alphabet::quote_atom(a)
            ))),
            Expr::Var(v) => Err(Error::UnboundVariable(v.clone())),
            Expr::Str(s) => Err(Error::Type(format!(
                "string \"{s}\" outside stringToSegments/literal_segments"
            ))),
            Expr::Call { name, args } => self.call(e, name, args),
        }
    }

    fn call(&self, e: &Expr, name: &str, args: &[Expr]) -> Result<Value> {
        let key = (name.to_string(), args.len());
        if let Some(def) = self.macros.get(&key) {
            let cache_key = e.to_string();
            if let Some(v) = self.cache.lock().expect("cache lock").get(&cache_key) {
                return Ok(v.clone());
            }
            let body = def.body.substitute(&|v: &str| {
                def.params.iter().position(|p| p == v).map(|i| args[i].clone())
            });
            let mut v = self.value(&body)?;
            if v.marks == Marks::Tied {
                v = Value {
                    fsa: self.project(&v.fsa),
                    marks: Marks::None,
                };
            }
            log::debug!(
                "compiled {cache_key}: {} states, {} transitions",
                v.fsa.num_states(),
                v.fsa.num_transitions()
            );
            self.cache
                .lock()
                .expect("cache lock")
                .insert(cache_key, v.clone());
            return Ok(v);
        }
        let plain_arg = |i: usize| -> Result<Automaton> { self.plain(self.value(&args[i])?) };
        let plain = |a: Automaton| Ok(Value { fsa: a.normalize(), marks: Marks::None });
        match (name, args.len()) {
            ("producer" | "consumer", 1) => {
                let f = to_formula(&args[0])?;
                let space = self.formula_space(&f);
                let pc = if name == "producer" { Pc::Producer } else { Pc::Consumer };
                let a = Automaton::symbol(space, Label::new(space.denote(&f)?, pc));
                let marks = if space.is_marked() { Marks::Free } else { Marks::None };
                Ok(Value { fsa: a.normalize(), marks })
            }
            ("add_repeats", 1) => plain(enrich::add_repeats(&plain_arg(0)?)?),
            ("add_skips", 1) => plain(enrich::add_skips(&plain_arg(0)?)?),
            ("add_self_loops", 1) => plain(enrich::add_self_loops(&plain_arg(0)?)),
            ("add_self_loop_before", 2) => {
                let cond = self.denote(&args[0])?;
                plain(enrich::add_self_loop_before(&cond, &plain_arg(1)?)?)
            }
            ("ignore", 2) => plain(enrich::ignore(&plain_arg(0)?, &plain_arg(1)?)?),
            ("closed_interpretation", 1) => plain(fsa::closed_interpretation(&plain_arg(0)?)),
            ("optimize", 1) => plain(optimize::bounded_local_optimization(
                &plain_arg(0)?,
                optimize::Cost::default(),
            )),
            ("stringToSegments" | "literal_segments", 1) => match &args[0] {
                Expr::Str(s) => plain(self.segments(s, name == "stringToSegments")?),
                other => Err(Error::Type(format!("{name} expects a string, got `{other}`"))),
            },
            ("sonority_differences", 0) => Ok(Value {
                fsa: prosody::sonority_differences(&self.marked),
                marks: Marks::Tied,
            }),
            _ if args.is_empty() && self.space.is_atom(name) => Err(Error::Type(format!(
                "type `{name}` used as a language; wrap it in producer(..) or consumer(..)"
            ))),
            _ => Err(Error::UnknownMacro {
                name: name.to_string(),
                arity: args.len(),
            }),
        }
    }

    /// Producer string of the phonemes spelled by `text`, matched greedily by
    /// longest name. With `alternate`, inner vowels also admit their outer
    /// partner.
    pub fn segments(&self, text: &str, alternate: bool) -> Result<Automaton> {
        let inv = self.space.inventory();
        let mut labels = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let best = inv
                .phonemes()
                .iter()
                .filter(|p| rest.starts_with(p.name.as_str()))
                .max_by_key(|p| p.name.len())
                .ok_or_else(|| Error::UnknownSegment(rest.to_string()))?;
            let mut set = self.space.atom(&best.name)?.clone();
            if alternate {
                if let Some(&(_, outer)) = ALTERNATING_VOWELS.iter().find(|(i, _)| *i == best.name) {
                    if inv.index_of(outer).is_some() {
                        set.union_with(self.space.atom(outer)?);
                    }
                }
            }
            labels.push(Label::producer(set));
            rest = &rest[best.name.len()..];
        }
        Ok(Automaton::string(&self.space, &labels).normalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::{enumerate_symbols, equivalent};

    fn grammar(src: &str) -> Grammar {
        Grammar::from_source(&SymbolSpace::temiar(), src).unwrap()
    }

    #[test]
    fn concat_of_atoms() {
        let g = grammar("");
        let a = g.compile_str("[consumer(a&':1'&stressed&'Ons'&initial), consumer(k&':1'&stressed&'Ons'&initial)]").unwrap();
        let words = enumerate_symbols(&a, 3);
        assert_eq!(words.len(), 1);
        assert_eq!(words[0].len(), 2);
    }

    #[test]
    fn singleton_union_is_identity() {
        let g = grammar("");
        let a = g.compile_str("{[producer(k), consumer(a)*]}").unwrap();
        let b = g.compile_str("[producer(k), consumer(a)*]").unwrap();
        assert!(equivalent(&a, &b).unwrap());
        assert!(g.compile_str("{}").unwrap().is_empty());
    }

    #[test]
    fn macros_substitute_arguments() {
        let g = grammar("twice(X) := [X, X].\nkk := twice(producer(k)).");
        let a = g.compile_str("kk").unwrap();
        let b = g.compile_str("[producer(k), producer(k)]").unwrap();
        assert!(equivalent(&a, &b).unwrap());
    }

    #[test]
    fn macro_errors() {
        let space = SymbolSpace::temiar();
        assert!(matches!(
            Grammar::from_source(&space, "f := g.\ng := [f, f]."),
            Err(Error::CyclicMacro(_))
        ));
        assert!(matches!(
            Grammar::from_source(&space, "f := producer(a).\nf := producer(k)."),
            Err(Error::MacroRedefined { .. })
        ));
        assert!(matches!(
            Grammar::from_source(&space, "producer(X) := consumer(X)."),
            Err(Error::MacroRedefined { .. })
        ));
        let g = grammar("f(X) := X.");
        assert!(matches!(g.compile_str("nosuch"), Err(Error::UnknownMacro { .. })));
        assert!(matches!(g.compile_str("f(a, b)"), Err(Error::UnknownMacro { .. })));
        assert!(matches!(g.compile_str("producer(nosuch)"), Err(Error::UnknownAtom(_))));
        assert!(matches!(g.compile_str("segment"), Err(Error::Type(_))));
        assert!(matches!(g.compile_str("{producer(a)};{producer(k)}"), Err(Error::Type(_))));
    }

    #[test]
    fn unresolved_marks_are_rejected() {
        let g = grammar("");
        assert!(matches!(g.compile_str("consumer(up)"), Err(Error::UnresolvedMark)));
        let tied = g.compile_str("sonority_differences & [consumer(up), consumer(down)]").unwrap();
        let words = enumerate_symbols(&tied, 2);
        for w in &words {
            let son: Vec<u8> = w
                .iter()
                .map(|&i| match g.space().symbol(i) {
                    crate::alphabet::Symbol::Segment(s) => g.space().phoneme(s.phoneme).sonority,
                    _ => unreachable!(),
                })
                .collect();
            assert!(son[0] < son[1]);
        }
        assert!(!words.is_empty());
    }

    #[test]
    fn string_to_segments() {
        let g = grammar("");
        let a = g.segments("s@lOg", true).unwrap();
        assert_eq!(a.num_states(), 6);
        let second = a.transitions().find(|(q, _, _)| *q == 1).unwrap().1.clone();
        assert_eq!(second.set, g.space().denote(&parse_formula("'@';'E'").unwrap()).unwrap());
        assert_eq!(second.pc, Pc::Producer);
        let lit = g.segments("s@lOg", false).unwrap();
        let second = lit.transitions().find(|(q, _, _)| *q == 1).unwrap().1.clone();
        assert_eq!(second.set, g.space().denote(&parse_formula("'@'").unwrap()).unwrap());
        assert_eq!(g.segments("", true).unwrap().num_states(), 1);
        assert!(matches!(g.segments("kX", true), Err(Error::UnknownSegment(_))));
        let koow = g.compile_str("stringToSegments(\"kOOw\")").unwrap();
        assert_eq!(koow.num_transitions(), 4);
    }

    #[test]
    fn rule_with_empty_context_is_vacuous() {
        let g = grammar("");
        let r = g.compile_str("segment -r-> ons / ~segment").unwrap();
        assert!(equivalent(&r, &Automaton::universal(g.space(), Pc::Consumer)).unwrap());
    }
}
