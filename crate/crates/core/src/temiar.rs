//! The Temiar fragment: lexicon, paradigm cells and surface rendering.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::alphabet::{Stress, Symbol, SymbolSpace, Sync, Technical};
use crate::combinators::{parse_expr, Grammar, MacroDef};
use crate::error::{Error, Result};
use crate::fsa::{enumerate, Automaton, Letter, Pc};
use crate::optimize::{bounded_local_optimization, Cost};

/// The grammar shipped with the crate.
pub const GRAMMAR: &str = include_str!("../grammar/temiar.olpm");
/// Lexical entries beyond those defined in the grammar itself.
pub const LEXICON: &str = include_str!("../grammar/lexicon.tsv");
/// Roots defined directly in [`GRAMMAR`].
pub const GRAMMAR_ROOTS: &[&str] = &["koow", "selog", "yaap"];

/// Entry flags of the lexicon format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    HasPrefinalSyllable,
    AlternatingLabial,
    AlternatingCoronal,
    AlternatingVelar,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::HasPrefinalSyllable => "has_prefinal_syllable",
            Flag::AlternatingLabial => "alternating_labial",
            Flag::AlternatingCoronal => "alternating_coronal",
            Flag::AlternatingVelar => "alternating_velar",
        }
    }

    fn parse(s: &str) -> Option<Flag> {
        [
            Flag::HasPrefinalSyllable,
            Flag::AlternatingLabial,
            Flag::AlternatingCoronal,
            Flag::AlternatingVelar,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }

    /// Root-final stop replaced by an alternating macro.
    fn final_stop(self) -> Option<&'static str> {
        match self {
            Flag::HasPrefinalSyllable => None,
            Flag::AlternatingLabial => Some("p"),
            Flag::AlternatingCoronal => Some("t"),
            Flag::AlternatingVelar => Some("k"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub name: String,
    pub root: String,
    pub flags: BTreeSet<Flag>,
}

impl LexiconEntry {
    /// Grammar term defining the entry's stem.
    pub fn stem_term(&self) -> Result<String> {
        let alternating: Vec<Flag> = self.flags.iter().copied().filter(|f| f.final_stop().is_some()).collect();
        if alternating.len() > 1 {
            return Err(Error::Lexicon {
                line: 0,
                message: format!("`{}` has more than one alternating final", self.name),
            });
        }
        let segments = if self.flags.contains(&Flag::HasPrefinalSyllable) {
            "stringToSegments"
        } else {
            "literal_segments"
        };
        let material = match alternating.first() {
            Some(flag) => {
                let stop = flag.final_stop().expect("alternating flag");
                let prefix = self.root.strip_suffix(stop).ok_or_else(|| Error::Lexicon {
                    line: 0,
                    message: format!("`{}` must end in `{stop}` to be {}", self.root, flag.name()),
                })?;
                format!("[{segments}(\"{prefix}\"), {}]", flag.name())
            }
            None => format!("{segments}(\"{}\")", self.root),
        };
        let mut term = format!("stem0({material})");
        if self.flags.contains(&Flag::HasPrefinalSyllable) {
            term.push_str(" & has_prefinal_syllable");
        }
        Ok(term)
    }
}

/// Parses `name TAB root TAB flags` lines; `#` starts a comment.
pub fn parse_lexicon(text: &str) -> Result<Vec<LexiconEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Lexicon {
            line: i + 1,
            message,
        };
        let cols: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if cols.len() < 2 || cols.len() > 3 {
            return Err(err(format!("expected `name<TAB>root<TAB>flags`, got `{line}`")));
        }
        let name = cols[0];
        if !name.starts_with(|c: char| c.is_ascii_lowercase())
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(err(format!("`{name}` is not a valid entry name")));
        }
        let mut flags = BTreeSet::new();
        for f in cols.get(2).map_or("", |s| s).split(',').map(str::trim).filter(|s| !s.is_empty()) {
            flags.insert(Flag::parse(f).ok_or_else(|| err(format!("unknown flag `{f}`")))?);
        }
        out.push(LexiconEntry {
            name: name.to_string(),
            root: cols[1].to_string(),
            flags,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Voice {
    Active,
    Causative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Aspect {
    Perfective,
    Simulfactive,
    Continuative,
}

impl fmt::Display for Voice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Voice::Active => "active",
            Voice::Causative => "causative",
        })
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aspect::Perfective => "perfective",
            Aspect::Simulfactive => "simulfactive",
            Aspect::Continuative => "continuative",
        })
    }
}

/// Row order of the paradigm table.
pub const CELLS: [(Voice, Aspect); 6] = [
    (Voice::Active, Aspect::Perfective),
    (Voice::Active, Aspect::Simulfactive),
    (Voice::Active, Aspect::Continuative),
    (Voice::Causative, Aspect::Perfective),
    (Voice::Causative, Aspect::Simulfactive),
    (Voice::Causative, Aspect::Continuative),
];

/// The term conjoined into `wordform` for one cell.
pub fn cell_term(root: &str, voice: Voice, aspect: Aspect) -> String {
    let mut parts = vec![root.to_string()];
    match aspect {
        Aspect::Perfective => {}
        Aspect::Simulfactive => parts.push("simulfactive".into()),
        Aspect::Continuative => parts.push("continuative".into()),
    }
    if voice == Voice::Causative {
        parts.push("causative".into());
    }
    parts.join(" & ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadigmCell {
    pub root: String,
    pub voice: Voice,
    pub aspect: Aspect,
    pub surfaces: Vec<String>,
}

/// Grammar plus lexicon.
#[derive(Debug)]
pub struct Temiar {
    grammar: Grammar,
    roots: BTreeSet<String>,
    optimize: bool,
    max_len: usize,
}

impl Temiar {
    /// The built-in grammar and lexicon over the built-in inventory.
    pub fn new() -> Result<Self> {
        Temiar::with_grammar(&SymbolSpace::temiar(), GRAMMAR)
    }

    /// A grammar source plus the built-in lexicon entries it can host.
    pub fn with_grammar(space: &Arc<SymbolSpace>, source: &str) -> Result<Self> {
        let grammar = Grammar::from_source(space, source)?;
        let roots = GRAMMAR_ROOTS
            .iter()
            .filter(|r| grammar.has_macro(r, 0))
            .map(|r| r.to_string())
            .collect();
        let mut t = Temiar {
            grammar,
            roots,
            optimize: true,
            max_len: 32,
        };
        let extra: Vec<LexiconEntry> = parse_lexicon(LEXICON)?
            .into_iter()
            .filter(|e| !t.grammar.has_macro(&e.name, 0))
            .collect();
        t.add_lexicon(&extra)?;
        Ok(t)
    }

    /// Defines each entry as a zero-argument macro.
    pub fn add_lexicon(&mut self, entries: &[LexiconEntry]) -> Result<()> {
        for e in entries {
            let body = parse_expr(&e.stem_term()?)?;
            self.grammar.define(MacroDef {
                name: e.name.clone(),
                params: Vec::new(),
                body,
                line: 0,
            })?;
            self.roots.insert(e.name.clone());
        }
        Ok(())
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn space(&self) -> &Arc<SymbolSpace> {
        self.grammar.space()
    }

    pub fn roots(&self) -> impl Iterator<Item = &str> {
        self.roots.iter().map(String::as_str)
    }

    pub fn set_optimize(&mut self, on: bool) {
        self.optimize = on;
    }

    pub fn set_max_len(&mut self, max_len: usize) {
        self.max_len = max_len;
    }

    /// Compiles an arbitrary term, optimizing if enabled.
    pub fn eval(&self, term: &str) -> Result<Automaton> {
        let a = self.grammar.compile_str(term)?;
        Ok(if self.optimize {
            bounded_local_optimization(&a, Cost::default())
        } else {
            a
        })
    }

    /// `wordform(X)` for the conjunction `x`, optimized if enabled.
    pub fn wordform(&self, x: &str) -> Result<Automaton> {
        self.eval(&format!("wordform({x})"))
    }

    /// Rendered surface forms, deduplicated, in enumeration order.
    pub fn surfaces(&self, a: &Automaton) -> Vec<String> {
        let mut seen = BTreeSet::new();
        enumerate(a, self.max_len)
            .iter()
            .map(|w| surface(self.space(), w))
            .filter(|s| seen.insert(s.clone()))
            .collect()
    }

    pub fn cell(&self, root: &str, voice: Voice, aspect: Aspect) -> Result<ParadigmCell> {
        if !self.roots.contains(root) {
            return Err(Error::UnknownRoot(root.to_string()));
        }
        let a = self.wordform(&cell_term(root, voice, aspect))?;
        Ok(ParadigmCell {
            root: root.to_string(),
            voice,
            aspect,
            surfaces: self.surfaces(&a),
        })
    }

    /// All six cells for `root`, in table order.
    pub fn paradigm(&self, root: &str) -> Result<Vec<ParadigmCell>> {
        CELLS.iter().map(|&(v, a)| self.cell(root, v, a)).collect()
    }

    /// Tab-separated table with one column per root.
    pub fn paradigm_table(&self, roots: &[&str]) -> Result<String> {
        let columns = roots.iter().map(|r| self.paradigm(r)).collect::<Result<Vec<_>>>()?;
        let mut out = format!("voice\taspect\t{}\n", roots.join("\t"));
        for (row, (voice, aspect)) in CELLS.iter().enumerate() {
            out.push_str(&format!("{voice}\t{aspect}"));
            for col in &columns {
                out.push('\t');
                out.push_str(&col[row].surfaces.join(","));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Phoneme names in order, technical symbols dropped.
pub fn surface(space: &SymbolSpace, word: &[Letter]) -> String {
    word.iter()
        .filter_map(|l| match space.symbol(l.symbol) {
            Symbol::Segment(s) => Some(space.phoneme(s.phoneme).name.as_str()),
            Symbol::Technical(_) => None,
        })
        .collect()
}

/// Full symbol string: technical symbols by name, segments as
/// `name:sync/role/stress/position`, producers marked with `!`.
pub fn annotate(space: &SymbolSpace, word: &[Letter]) -> String {
    word.iter()
        .map(|l| {
            let bang = if l.pc == Pc::Producer { "!" } else { "" };
            match space.symbol(l.symbol) {
                Symbol::Technical(Technical::Skip) => format!("skip{bang}"),
                Symbol::Technical(Technical::Repeat) => format!("repeat{bang}"),
                Symbol::Segment(s) => format!(
                    "{}:{}/{}/{}/{}{bang}",
                    space.phoneme(s.phoneme).name,
                    if s.sync == Sync::Edge { 1 } else { 0 },
                    s.role.name(),
                    if s.stress == Stress::Stressed { "str" } else { "unstr" },
                    match s.position {
                        crate::alphabet::Position::Initial => "ini",
                        crate::alphabet::Position::Medial => "med",
                        crate::alphabet::Position::Final => "fin",
                    }
                ),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicon_parsing() {
        let entries = parse_lexicon(LEXICON).unwrap();
        assert!(entries.iter().any(|e| e.name == "pet" && e.flags.contains(&Flag::AlternatingCoronal)));
        let bad = parse_lexicon("x\tabc\tnosuch");
        assert!(matches!(bad, Err(Error::Lexicon { line: 1, .. })));
        let e = &parse_lexicon("selook\ts@lOOk\thas_prefinal_syllable,alternating_velar").unwrap()[0];
        assert_eq!(
            e.stem_term().unwrap(),
            "stem0([stringToSegments(\"s@lOO\"), alternating_velar]) & has_prefinal_syllable"
        );
        let e = &parse_lexicon("x\tkaa\talternating_labial").unwrap()[0];
        assert!(e.stem_term().is_err());
    }

    #[test]
    fn cell_terms() {
        assert_eq!(cell_term("koow", Voice::Active, Aspect::Perfective), "koow");
        assert_eq!(
            cell_term("selog", Voice::Causative, Aspect::Simulfactive),
            "selog & simulfactive & causative"
        );
    }

    #[test]
    fn surface_rendering() {
        let s = SymbolSpace::temiar();
        assert_eq!(surface(&s, &[]), "");
        let skip = s.index_of(&Symbol::Technical(Technical::Skip));
        let only = [Letter { symbol: skip, pc: Pc::Producer }];
        assert_eq!(surface(&s, &only), "");
    }

    #[test]
    fn unknown_root() {
        let t = Temiar::new().unwrap();
        assert!(matches!(t.paradigm("nosuch"), Err(Error::UnknownRoot(_))));
    }
}
