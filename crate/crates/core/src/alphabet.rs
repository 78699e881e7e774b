//! The typed symbol space.
//!
//! A symbol is either one of the two technical marks `skip` and `repeat`, or a
//! segment: a phoneme together with a synchronisation bit (`:1` on base edges,
//! `:0` inside), a stress value, a syllable role and a word position. Every
//! combination is enumerated exactly once, so a set of symbols is a fixed-width
//! bitset and a type formula denotes one such bitset.
//!
//! Syllable roles are decomposed into the two binary features `ons` and `cod`:
//!
//! | role | ons | cod |
//! |------|-----|-----|
//! | Ons  |  +  |  -  |
//! | Nuc  |  -  |  -  |
//! | Cod  |  -  |  +  |
//! | CO   |  +  |  +  |
//!
//! The sonority marks `up`/`down` are not part of a symbol. They only exist in
//! the *marked twin* of a space (see [`SymbolSpace::marked_twin`]), which
//! doubles every symbol with a mark and is used while sonority-based
//! syllabification is being resolved.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Segment variants per phoneme: 2 sync × 2 stress × 4 roles × 3 positions.
pub const VARIANTS_PER_PHONEME: usize = 48;
/// `skip` and `repeat`.
pub const TECHNICAL_SYMBOLS: usize = 2;

const RESERVED_ATOMS: &[&str] = &[
    "segment",
    "anything",
    "skip",
    "repeat",
    "technical",
    "up",
    "down",
    ":1",
    ":0",
    "stressed",
    "unstressed",
    "ons",
    "cod",
    "Ons",
    "Nuc",
    "Cod",
    "CO",
    "initial",
    "medial",
    "final",
];

/// One entry of a phoneme inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeSpec {
    pub name: String,
    pub is_vowel: bool,
    pub sonority: u8,
    pub features: BTreeSet<String>,
}

impl PhonemeSpec {
    /// Builds a phoneme; `vowel` or `consonant` is added to the features when
    /// neither is given, based on `is_vowel`.
    pub fn new<I, S>(name: &str, is_vowel: bool, sonority: u8, features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut features: BTreeSet<String> = features.into_iter().map(Into::into).collect();
        if !features.contains("vowel") && !features.contains("consonant") {
            features.insert(if is_vowel { "vowel" } else { "consonant" }.to_string());
        }
        PhonemeSpec {
            name: name.to_string(),
            is_vowel,
            sonority,
            features,
        }
    }
}

/// A validated, ordered list of phonemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inventory {
    phonemes: Vec<PhonemeSpec>,
}

/// Phoneme table used by the Temiar grammar: `name TAB sonority TAB features`.
///
/// Sonority: stops 0 < fricatives 1 < nasals 2 < liquids 3 < glides 4 < vowels 5.
pub const TEMIAR_INVENTORY: &str = "\
# name\tsonority\tfeatures
k\t0\tconsonant,stop,voiceless_stop,velar
g\t0\tconsonant,stop,velar
t\t0\tconsonant,stop,voiceless_stop,coronal
p\t0\tconsonant,stop,voiceless_stop,labial
s\t1\tconsonant,fricative,coronal
m\t2\tconsonant,nasal,labial
n\t2\tconsonant,nasal,coronal
N\t2\tconsonant,nasal,velar
l\t3\tconsonant,liquid,coronal
r\t3\tconsonant,liquid,coronal
w\t4\tconsonant,glide,labial
y\t4\tconsonant,glide,palatal
a\t5\tvowel,open
@\t5\tvowel,close_mid,central
E\t5\tvowel,open_mid,front
O\t5\tvowel,open_mid,back
e\t5\tvowel,close_mid,front
i\t5\tvowel,close,front
o\t5\tvowel,close_mid,back
u\t5\tvowel,close,back
";

impl Inventory {
    pub fn new(phonemes: Vec<PhonemeSpec>) -> Result<Self> {
        if phonemes.is_empty() {
            return Err(Error::EmptyInventory);
        }
        let mut names = BTreeSet::new();
        for p in &phonemes {
            if RESERVED_ATOMS.contains(&p.name.as_str()) {
                return Err(Error::AtomClash(p.name.clone()));
            }
            if !names.insert(p.name.as_str()) {
                return Err(Error::DuplicatePhoneme(p.name.clone()));
            }
            let vowel = p.features.contains("vowel");
            let consonant = p.features.contains("consonant");
            if vowel == consonant || vowel != p.is_vowel {
                return Err(Error::VowelConsonant(p.name.clone()));
            }
        }
        for p in &phonemes {
            for f in &p.features {
                if RESERVED_ATOMS.contains(&f.as_str()) || names.contains(f.as_str()) {
                    return Err(Error::AtomClash(f.clone()));
                }
            }
        }
        Ok(Inventory { phonemes })
    }

    /// Parses the tab-separated table format. Blank lines and `#` comments
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut phonemes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = if line.contains('\t') {
                line.split('\t').map(str::trim).collect()
            } else {
                line.split_whitespace().collect()
            };
            let name = fields[0];
            if name.is_empty() {
                return Err(Error::InventoryFormat {
                    line: i + 1,
                    message: "missing phoneme name".into(),
                });
            }
            let sonority = match fields.get(1).filter(|s| !s.is_empty()) {
                None => return Err(Error::MissingSonority(name.to_string())),
                Some(s) => s.parse::<u8>().map_err(|_| Error::InventoryFormat {
                    line: i + 1,
                    message: format!("bad sonority rank `{s}`"),
                })?,
            };
            let features: BTreeSet<String> = fields
                .get(2)
                .map(|f| {
                    f.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default();
            let is_vowel = features.contains("vowel");
            phonemes.push(PhonemeSpec::new(name, is_vowel, sonority, features));
        }
        Inventory::new(phonemes)
    }

    pub fn temiar() -> Self {
        Inventory::parse(TEMIAR_INVENTORY).expect("built-in inventory is valid")
    }

    pub fn phonemes(&self) -> &[PhonemeSpec] {
        &self.phonemes
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.phonemes.iter().position(|p| p.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technical {
    Skip,
    Repeat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sync {
    /// `:1`, a base edge.
    Edge,
    /// `:0`, base interior.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stress {
    Stressed,
    Unstressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Ons,
    Nuc,
    Cod,
    CO,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Ons, Role::Nuc, Role::Cod, Role::CO];

    pub fn from_features(ons: bool, cod: bool) -> Role {
        match (ons, cod) {
            (true, false) => Role::Ons,
            (false, false) => Role::Nuc,
            (false, true) => Role::Cod,
            (true, true) => Role::CO,
        }
    }

    pub fn ons(self) -> bool {
        matches!(self, Role::Ons | Role::CO)
    }

    pub fn cod(self) -> bool {
        matches!(self, Role::Cod | Role::CO)
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Ons => "Ons",
            Role::Nuc => "Nuc",
            Role::Cod => "Cod",
            Role::CO => "CO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    Initial,
    Medial,
    Final,
}

/// Sonority movement from a segment to the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub phoneme: usize,
    pub sync: Sync,
    pub stress: Stress,
    pub role: Role,
    pub position: Position,
}

impl Segment {
    fn variant(&self) -> usize {
        let sync = self.sync as usize;
        let stress = self.stress as usize;
        let role = self.role as usize;
        let pos = self.position as usize;
        sync * 24 + stress * 12 + role * 3 + pos
    }

    fn from_variant(phoneme: usize, v: usize) -> Segment {
        const SYNC: [Sync; 2] = [Sync::Edge, Sync::Interior];
        const STRESS: [Stress; 2] = [Stress::Stressed, Stress::Unstressed];
        const POS: [Position; 3] = [Position::Initial, Position::Medial, Position::Final];
        Segment {
            phoneme,
            sync: SYNC[v / 24],
            stress: STRESS[(v / 12) % 2],
            role: Role::ALL[(v / 3) % 4],
            position: POS[v % 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Technical(Technical),
    Segment(Segment),
}

/// A set of symbols of one space, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolSet {
    words: Box<[u64]>,
}

impl SymbolSet {
    pub fn empty(width: usize) -> Self {
        SymbolSet {
            words: vec![0; width.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn full(width: usize) -> Self {
        let mut s = Self::empty(width);
        for i in 0..width {
            s.insert(i);
        }
        s
    }

    pub fn singleton(width: usize, index: usize) -> Self {
        let mut s = Self::empty(width);
        s.insert(index);
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(width: usize, indices: I) -> Self {
        let mut s = Self::empty(width);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, index: usize) {
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn remove(&mut self, index: usize) {
        self.words[index / 64] &= !(1 << (index % 64));
    }

    pub fn contains(&self, index: usize) -> bool {
        self.words
            .get(index / 64)
            .is_some_and(|w| w & (1 << (index % 64)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersects(&self, other: &SymbolSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &SymbolSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &SymbolSet) -> SymbolSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &SymbolSet) -> SymbolSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &SymbolSet) -> SymbolSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn union_with(&mut self, other: &SymbolSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    fn zip_with(&self, other: &SymbolSet, f: impl Fn(u64, u64) -> u64) -> SymbolSet {
        debug_assert_eq!(self.words.len(), other.words.len());
        SymbolSet {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// Number of 64-bit words backing the set.
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Hex rendering: one 16-digit big-endian group per 64-bit word, lowest
    /// word first.
    pub fn to_hex(&self) -> String {
        self.words.iter().map(|w| format!("{w:016x}")).collect()
    }

    pub fn from_hex(width: usize, hex: &str) -> Result<Self> {
        let mut s = Self::empty(width);
        if hex.len() != s.words.len() * 16 {
            return Err(Error::Malformed(format!(
                "bitset has {} hex digits, expected {}",
                hex.len(),
                s.words.len() * 16
            )));
        }
        for (i, w) in s.words.iter_mut().enumerate() {
            *w = u64::from_str_radix(&hex[i * 16..i * 16 + 16], 16)
                .map_err(|e| Error::Malformed(e.to_string()))?;
        }
        if s.iter().any(|i| i >= width) {
            return Err(Error::Malformed("bitset exceeds the alphabet".into()));
        }
        Ok(s)
    }
}

impl fmt::Debug for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Boolean combination of type atoms: `&` conjunction, `;` disjunction, `~`
/// negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeFormula {
    Atom(String),
    And(Box<TypeFormula>, Box<TypeFormula>),
    Or(Box<TypeFormula>, Box<TypeFormula>),
    Not(Box<TypeFormula>),
}

impl TypeFormula {
    pub fn atom(name: &str) -> Self {
        TypeFormula::Atom(name.to_string())
    }

    pub fn and(self, other: TypeFormula) -> Self {
        TypeFormula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: TypeFormula) -> Self {
        TypeFormula::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        TypeFormula::Not(Box::new(self))
    }

    /// Conjunction of all given atoms.
    pub fn all_of(atoms: &[&str]) -> Self {
        let mut it = atoms.iter().map(|a| TypeFormula::atom(a));
        let first = it.next().expect("at least one atom");
        it.fold(first, TypeFormula::and)
    }

    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            TypeFormula::Atom(a) => out.push(a),
            TypeFormula::And(a, b) | TypeFormula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            TypeFormula::Not(a) => a.collect_atoms(out),
        }
    }

    pub fn mentions_technical(&self) -> bool {
        self.atoms()
            .iter()
            .any(|a| matches!(*a, "skip" | "repeat" | "technical" | "anything"))
    }

    pub fn mentions_mark(&self) -> bool {
        self.atoms().iter().any(|a| matches!(*a, "up" | "down"))
    }

    fn precedence(&self) -> u8 {
        match self {
            TypeFormula::Or(..) => 0,
            TypeFormula::And(..) => 1,
            TypeFormula::Not(..) | TypeFormula::Atom(..) => 2,
        }
    }
}

/// Renders an atom, quoting it unless it is a plain lower-case identifier.
pub fn quote_atom(name: &str) -> String {
    let mut chars = name.chars();
    let plain = chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_string()
    } else {
        format!("'{name}'")
    }
}

impl fmt::Display for TypeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, sub: &TypeFormula, min: u8| {
            if sub.precedence() < min {
                write!(f, "({sub})")
            } else {
                write!(f, "{sub}")
            }
        };
        match self {
            TypeFormula::Atom(a) => write!(f, "{}", quote_atom(a)),
            TypeFormula::And(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "&")?;
                wrap(f, b, 2)
            }
            TypeFormula::Or(a, b) => {
                wrap(f, a, 0)?;
                write!(f, ";")?;
                wrap(f, b, 1)
            }
            TypeFormula::Not(a) => {
                write!(f, "~")?;
                wrap(f, a, 2)
            }
        }
    }
}

/// The enumerated alphabet of one inventory.
#[derive(Debug)]
pub struct SymbolSpace {
    inventory: Inventory,
    marked: bool,
    base_len: usize,
    atoms: HashMap<String, SymbolSet>,
    segments: SymbolSet,
    all: SymbolSet,
}

impl PartialEq for SymbolSpace {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other) || (self.marked == other.marked && self.inventory == other.inventory)
    }
}

impl Eq for SymbolSpace {}

/// Enumerates all symbols of `inventory` and assigns them stable indices.
pub fn build_space(inventory: Inventory) -> Result<Arc<SymbolSpace>> {
    if inventory.is_empty() {
        return Err(Error::EmptyInventory);
    }
    Ok(Arc::new(SymbolSpace::new(inventory, false)))
}

impl SymbolSpace {
    fn new(inventory: Inventory, marked: bool) -> Self {
        let base_len = inventory.len() * VARIANTS_PER_PHONEME + TECHNICAL_SYMBOLS;
        let mut space = SymbolSpace {
            inventory,
            marked,
            base_len,
            atoms: HashMap::new(),
            segments: SymbolSet::empty(0),
            all: SymbolSet::empty(0),
        };
        space.atoms = space.atom_table();
        space.segments = space.atoms["segment"].clone();
        space.all = SymbolSet::full(space.len());
        space
    }

    pub fn temiar() -> Arc<SymbolSpace> {
        build_space(Inventory::temiar()).expect("built-in inventory is valid")
    }

    /// The same alphabet with every symbol doubled by a sonority mark.
    pub fn marked_twin(&self) -> Arc<SymbolSpace> {
        Arc::new(SymbolSpace::new(self.inventory.clone(), true))
    }

    pub fn is_marked(&self) -> bool {
        self.marked
    }

    pub fn inventory(&self) -> &Inventory {
        &self.inventory
    }

    /// Total number of symbols (bits per set).
    pub fn len(&self) -> usize {
        if self.marked {
            2 * self.base_len
        } else {
            self.base_len
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of symbols of the unmarked alphabet.
    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn empty_set(&self) -> SymbolSet {
        SymbolSet::empty(self.len())
    }

    pub fn all(&self) -> &SymbolSet {
        &self.all
    }

    pub fn segments(&self) -> &SymbolSet {
        &self.segments
    }

    pub fn technical(&self) -> &SymbolSet {
        &self.atoms["technical"]
    }

    pub fn index_of(&self, symbol: &Symbol) -> usize {
        let n = self.inventory.len();
        match symbol {
            Symbol::Technical(Technical::Skip) => n * VARIANTS_PER_PHONEME,
            Symbol::Technical(Technical::Repeat) => n * VARIANTS_PER_PHONEME + 1,
            Symbol::Segment(s) => s.phoneme * VARIANTS_PER_PHONEME + s.variant(),
        }
    }

    /// Index of `symbol` carrying `mark` in the marked twin.
    pub fn marked_index_of(&self, symbol: &Symbol, mark: Mark) -> usize {
        mark as usize * self.base_len + self.index_of(symbol)
    }

    pub fn symbol(&self, index: usize) -> Symbol {
        let base = index % self.base_len;
        let n = self.inventory.len();
        if base >= n * VARIANTS_PER_PHONEME {
            if base == n * VARIANTS_PER_PHONEME {
                Symbol::Technical(Technical::Skip)
            } else {
                Symbol::Technical(Technical::Repeat)
            }
        } else {
            Symbol::Segment(Segment::from_variant(
                base / VARIANTS_PER_PHONEME,
                base % VARIANTS_PER_PHONEME,
            ))
        }
    }

    pub fn mark(&self, index: usize) -> Option<Mark> {
        if !self.marked {
            None
        } else if index < self.base_len {
            Some(Mark::Up)
        } else {
            Some(Mark::Down)
        }
    }

    pub fn phoneme(&self, index: usize) -> &PhonemeSpec {
        &self.inventory.phonemes[index]
    }

    /// Symbols of a plain set lifted into this (marked) space under both marks.
    pub fn lift(&self, plain: &SymbolSet) -> SymbolSet {
        debug_assert!(self.marked);
        let mut out = self.empty_set();
        for i in plain.iter() {
            out.insert(i);
            out.insert(i + self.base_len);
        }
        out
    }

    /// Forgets the marks of a set of this (marked) space.
    pub fn project(&self, marked: &SymbolSet) -> SymbolSet {
        debug_assert!(self.marked);
        let mut out = SymbolSet::empty(self.base_len);
        for i in marked.iter() {
            out.insert(i % self.base_len);
        }
        out
    }

    fn atom_table(&self) -> HashMap<String, SymbolSet> {
        let mut table: HashMap<String, SymbolSet> = HashMap::new();
        let mut add = |name: &str, i: usize| {
            table
                .entry(name.to_string())
                .or_insert_with(|| SymbolSet::empty(self.len()))
                .insert(i)
        };
        for i in 0..self.len() {
            if let Some(mark) = self.mark(i) {
                add(if mark == Mark::Up { "up" } else { "down" }, i);
            }
            add("anything", i);
            match self.symbol(i) {
                Symbol::Technical(t) => {
                    add("technical", i);
                    add(if t == Technical::Skip { "skip" } else { "repeat" }, i);
                }
                Symbol::Segment(s) => {
                    add("segment", i);
                    let p = &self.inventory.phonemes[s.phoneme];
                    add(&p.name, i);
                    for f in &p.features {
                        add(f, i);
                    }
                    add(if s.sync == Sync::Edge { ":1" } else { ":0" }, i);
                    add(
                        if s.stress == Stress::Stressed {
                            "stressed"
                        } else {
                            "unstressed"
                        },
                        i,
                    );
                    if s.role.ons() {
                        add("ons", i);
                    }
                    if s.role.cod() {
                        add("cod", i);
                    }
                    add(s.role.name(), i);
                    add(
                        match s.position {
                            Position::Initial => "initial",
                            Position::Medial => "medial",
                            Position::Final => "final",
                        },
                        i,
                    );
                }
            }
        }
        for name in RESERVED_ATOMS {
            if self.marked || !matches!(*name, "up" | "down") {
                table
                    .entry(name.to_string())
                    .or_insert_with(|| SymbolSet::empty(self.len()));
            }
        }
        table
    }

    pub fn is_atom(&self, name: &str) -> bool {
        self.atoms.contains_key(name) || matches!(name, "up" | "down")
    }

    /// Denotation of a single atom.
    pub fn atom(&self, name: &str) -> Result<&SymbolSet> {
        match self.atoms.get(name) {
            Some(s) => Ok(s),
            None if matches!(name, "up" | "down") => Err(Error::UnresolvedMark),
            None => Err(Error::UnknownAtom(name.to_string())),
        }
    }

    /// Denotation of a type formula. Negation complements within the segment
    /// subspace unless the negated formula itself mentions technical atoms.
    pub fn denote(&self, formula: &TypeFormula) -> Result<SymbolSet> {
        Ok(match formula {
            TypeFormula::Atom(a) => self.atom(a)?.clone(),
            TypeFormula::And(a, b) => self.denote(a)?.intersection(&self.denote(b)?),
            TypeFormula::Or(a, b) => self.denote(a)?.union(&self.denote(b)?),
            TypeFormula::Not(a) => {
                let universe = if a.mentions_technical() {
                    &self.all
                } else {
                    &self.segments
                };
                universe.difference(&self.denote(a)?)
            }
        })
    }

    /// Compact type formula describing `set`, in the grammar's notation.
    pub fn describe(&self, set: &SymbolSet) -> String {
        if set.is_empty() {
            return "{}".to_string();
        }
        if set == &self.all {
            return "anything".to_string();
        }
        let mut alts: Vec<String> = Vec::new();
        let segs = set.intersection(&self.segments);
        if segs == self.segments {
            alts.push("segment".to_string());
        } else if !segs.is_empty() {
            alts.extend(self.describe_segments(&segs));
        }
        let n = self.inventory.len() * VARIANTS_PER_PHONEME;
        let marks: &[usize] = if self.marked { &[0, 1] } else { &[0] };
        for (offset, name) in [(0, "skip"), (1, "repeat")] {
            let present: Vec<usize> = marks
                .iter()
                .copied()
                .filter(|&m| set.contains(m * self.base_len + n + offset))
                .collect();
            match present.len() {
                0 => {}
                l if l == marks.len() => alts.push(name.to_string()),
                _ => alts.push(format!(
                    "{name}&{}",
                    if present[0] == 0 { "up" } else { "down" }
                )),
            }
        }
        alts.join(";")
    }

    fn describe_segments(&self, segs: &SymbolSet) -> Vec<String> {
        let n = self.inventory.len();
        let marks = if self.marked { 2 } else { 1 };
        // per phoneme: set of variant tuples (sync, stress, role, pos[, mark])
        let mut groups: BTreeMap<BTreeSet<Vec<u8>>, Vec<usize>> = BTreeMap::new();
        for p in 0..n {
            let mut tuples = BTreeSet::new();
            for m in 0..marks {
                for v in 0..VARIANTS_PER_PHONEME {
                    if segs.contains(m * self.base_len + p * VARIANTS_PER_PHONEME + v) {
                        let mut t =
                            vec![(v / 24) as u8, ((v / 12) % 2) as u8, ((v / 3) % 4) as u8, (v % 3) as u8];
                        if self.marked {
                            t.push(m as u8);
                        }
                        tuples.insert(t);
                    }
                }
            }
            if !tuples.is_empty() {
                groups.entry(tuples).or_default().push(p);
            }
        }
        let mut dims = vec![2u8, 2, 4, 3];
        if self.marked {
            dims.push(2);
        }
        let mut out = Vec::new();
        for (tuples, phonemes) in groups {
            let phon = self.describe_phonemes(&phonemes);
            for bx in decompose(&tuples, &dims) {
                let mut parts: Vec<String> = Vec::new();
                if let Some(p) = &phon {
                    parts.push(p.clone());
                }
                for (d, mask) in bx.iter().enumerate() {
                    if let Some(s) = describe_dim(d, *mask, dims[d]) {
                        parts.push(s);
                    }
                }
                if parts.is_empty() {
                    parts.push("segment".to_string());
                }
                out.push(parts.join("&"));
            }
        }
        out
    }

    fn describe_phonemes(&self, phonemes: &[usize]) -> Option<String> {
        let n = self.inventory.len();
        if phonemes.len() == n {
            return None;
        }
        let vowels: Vec<usize> = (0..n).filter(|&p| self.inventory.phonemes[p].is_vowel).collect();
        let consonants: Vec<usize> = (0..n).filter(|&p| !self.inventory.phonemes[p].is_vowel).collect();
        if phonemes == vowels.as_slice() {
            return Some("vowel".to_string());
        }
        if phonemes == consonants.as_slice() {
            return Some("consonant".to_string());
        }
        let names: Vec<String> = phonemes
            .iter()
            .map(|&p| quote_atom(&self.inventory.phonemes[p].name))
            .collect();
        Some(if names.len() == 1 {
            names[0].clone()
        } else {
            format!("({})", names.join(";"))
        })
    }
}

/// Splits a set of tuples over small dimensions into a union of boxes (one
/// value mask per dimension).
fn decompose(tuples: &BTreeSet<Vec<u8>>, dims: &[u8]) -> Vec<Vec<u8>> {
    if dims.is_empty() {
        return if tuples.is_empty() { vec![] } else { vec![vec![]] };
    }
    let mut by_residual: BTreeMap<BTreeSet<Vec<u8>>, u8> = BTreeMap::new();
    for v in 0..dims[0] {
        let residual: BTreeSet<Vec<u8>> = tuples
            .iter()
            .filter(|t| t[0] == v)
            .map(|t| t[1..].to_vec())
            .collect();
        if !residual.is_empty() {
            *by_residual.entry(residual).or_default() |= 1 << v;
        }
    }
    let mut out = Vec::new();
    for (residual, mask) in by_residual {
        for sub in decompose(&residual, &dims[1..]) {
            let mut b = vec![mask];
            b.extend(sub);
            out.push(b);
        }
    }
    out
}

fn describe_dim(dim: usize, mask: u8, size: u8) -> Option<String> {
    if mask == (1u8 << size) - 1 {
        return None;
    }
    let pick = |names: &[&str]| -> String {
        let chosen: Vec<String> = (0..names.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| quote_atom(names[i]))
            .collect();
        if chosen.len() == 1 {
            chosen[0].clone()
        } else {
            format!("({})", chosen.join(";"))
        }
    };
    Some(match dim {
        0 => pick(&[":1", ":0"]),
        1 => pick(&["stressed", "unstressed"]),
        2 => match mask {
            0b1001 => "ons".to_string(),
            0b1100 => "cod".to_string(),
            0b0110 => "~ons".to_string(),
            0b0011 => "~cod".to_string(),
            0b0111 => "~'CO'".to_string(),
            _ => pick(&["Ons", "Nuc", "Cod", "CO"]),
        },
        3 => match mask {
            0b011 => "~final".to_string(),
            0b110 => "~initial".to_string(),
            0b101 => "~medial".to_string(),
            _ => pick(&["initial", "medial", "final"]),
        },
        _ => pick(&["up", "down"]),
    })
}

/// Whether sonority rises from `s` to `next`.
pub fn up_down_mark(space: &SymbolSpace, s: &Symbol, next: &Symbol) -> Result<Mark> {
    match (s, next) {
        (Symbol::Segment(a), Symbol::Segment(b)) => {
            let ra = space.phoneme(a.phoneme).sonority;
            let rb = space.phoneme(b.phoneme).sonority;
            Ok(if ra < rb { Mark::Up } else { Mark::Down })
        }
        _ => Err(Error::TechnicalSymbol("up_down_mark")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(space: &SymbolSpace, name: &str) -> Symbol {
        Symbol::Segment(Segment {
            phoneme: space.inventory().index_of(name).unwrap(),
            sync: Sync::Edge,
            stress: Stress::Stressed,
            role: Role::Ons,
            position: Position::Medial,
        })
    }

    fn parse(f: &str) -> TypeFormula {
        crate::combinators::parse_formula(f).unwrap()
    }

    #[test]
    fn alphabet_sizes() {
        let one = Inventory::new(vec![PhonemeSpec::new("a", true, 5, ["vowel"])]).unwrap();
        assert_eq!(build_space(one).unwrap().len(), 50);
        let temiar = SymbolSpace::temiar();
        assert_eq!(temiar.inventory().len(), 20);
        assert_eq!(temiar.len(), 962);
        assert_eq!(temiar.marked_twin().len(), 2 * 962);
    }

    #[test]
    fn empty_and_duplicate_inventories_are_rejected() {
        assert!(matches!(Inventory::new(vec![]), Err(Error::EmptyInventory)));
        let dup = vec![
            PhonemeSpec::new("a", true, 5, ["vowel"]),
            PhonemeSpec::new("a", true, 5, ["vowel"]),
        ];
        assert!(matches!(Inventory::new(dup), Err(Error::DuplicatePhoneme(_))));
        assert!(matches!(
            Inventory::parse("k\t\tconsonant\n"),
            Err(Error::MissingSonority(_))
        ));
        assert!(matches!(
            Inventory::parse("k\n"),
            Err(Error::MissingSonority(_))
        ));
        assert!(matches!(
            Inventory::parse("ons\t0\tconsonant\n"),
            Err(Error::AtomClash(_))
        ));
    }

    #[test]
    fn indices_round_trip() {
        let space = SymbolSpace::temiar();
        for i in 0..space.len() {
            assert_eq!(space.index_of(&space.symbol(i)), i);
        }
        let marked = space.marked_twin();
        for i in 0..marked.len() {
            let m = marked.mark(i).unwrap();
            assert_eq!(marked.marked_index_of(&marked.symbol(i), m), i);
        }
    }

    #[test]
    fn role_atoms() {
        let space = SymbolSpace::temiar();
        let nuc = space.denote(&parse("'Nuc'")).unwrap();
        for i in nuc.iter() {
            match space.symbol(i) {
                Symbol::Segment(s) => assert!(!s.role.ons() && !s.role.cod()),
                Symbol::Technical(_) => panic!("technical symbol in Nuc"),
            }
        }
        assert_eq!(nuc.len(), 20 * 12);

        let not_co = space.denote(&parse("~'CO'")).unwrap();
        assert_eq!(not_co.len(), 20 * 36);
        assert!(!not_co.contains(space.index_of(&Symbol::Technical(Technical::Skip))));

        let tech = space.denote(&parse("skip;repeat")).unwrap();
        assert_eq!(tech.len(), 2);
        assert_eq!(&tech, space.technical());
    }

    #[test]
    fn anything_covers_technical_symbols() {
        let space = SymbolSpace::temiar();
        let any = space.denote(&parse("anything")).unwrap();
        assert_eq!(any.len(), space.len());
        assert_eq!(space.denote(&parse("segment")).unwrap().len(), 960);
        // complement of a formula mentioning technical atoms spans the whole alphabet
        let not_skip = space.denote(&parse("~skip")).unwrap();
        assert_eq!(not_skip.len(), space.len() - 1);
    }

    #[test]
    fn unknown_atoms_and_unresolved_marks() {
        let space = SymbolSpace::temiar();
        assert!(matches!(
            space.denote(&parse("nosuch")),
            Err(Error::UnknownAtom(_))
        ));
        assert!(matches!(
            space.denote(&parse("up&ons")),
            Err(Error::UnresolvedMark)
        ));
        let marked = space.marked_twin();
        let up = marked.denote(&parse("up")).unwrap();
        assert_eq!(up.len(), 962);
        assert!(up.iter().all(|i| marked.mark(i) == Some(Mark::Up)));
    }

    #[test]
    fn sonority_marks() {
        let space = SymbolSpace::temiar();
        let (k, o, g) = (seg(&space, "k"), seg(&space, "O"), seg(&space, "g"));
        assert_eq!(up_down_mark(&space, &k, &o).unwrap(), Mark::Up);
        assert_eq!(up_down_mark(&space, &o, &o).unwrap(), Mark::Down);
        assert_eq!(up_down_mark(&space, &o, &g).unwrap(), Mark::Down);
        assert!(up_down_mark(&space, &Symbol::Technical(Technical::Skip), &o).is_err());
    }

    #[test]
    fn describe_is_denotation_preserving() {
        let space = SymbolSpace::temiar();
        for f in [
            "k&':1'&stressed&'Ons'",
            "('@';'E')&':0'&unstressed",
            "segment&~'Nuc'",
            "p&final;m&medial&cod",
            "skip;repeat",
            "vowel&~stressed",
            "a&':0'&unstressed;repeat",
        ] {
            let set = space.denote(&parse(f)).unwrap();
            let described = space.describe(&set);
            assert_eq!(space.denote(&parse(&described)).unwrap(), set, "{f} -> {described}");
        }
        assert_eq!(space.describe(space.all()), "anything");
        assert_eq!(space.describe(space.segments()), "segment");
        assert_eq!(space.describe(&space.empty_set()), "{}");
    }

    #[test]
    fn hex_round_trip() {
        let space = SymbolSpace::temiar();
        let set = space.denote(&parse("(k;w)&':1'")).unwrap();
        let hex = set.to_hex();
        assert_eq!(SymbolSet::from_hex(space.len(), &hex).unwrap(), set);
        assert!(SymbolSet::from_hex(space.len(), "00").is_err());
    }

    #[test]
    fn formula_display_round_trips() {
        for f in ["a&(b;c)", "~(a;b)&c", "'E';'@'", "~~'CO'", "a;b&c"] {
            let parsed = parse(f);
            assert_eq!(parse(&parsed.to_string()), parsed);
        }
    }
}
