use thiserror::Error;

/// Everything that can go wrong while building spaces, automata and grammars.
#[derive(Debug, Error)]
pub enum Error {
    #[error("phoneme inventory is empty")]
    EmptyInventory,
    #[error("duplicate phoneme `{0}`")]
    DuplicatePhoneme(String),
    #[error("phoneme `{0}` has no sonority rank")]
    MissingSonority(String),
    #[error("phoneme `{0}` must carry exactly one of the features `vowel` and `consonant`")]
    VowelConsonant(String),
    #[error("name `{0}` clashes with a reserved type atom or another phoneme")]
    AtomClash(String),
    #[error("inventory line {line}: {message}")]
    InventoryFormat { line: usize, message: String },

    #[error("unknown type atom `{0}`")]
    UnknownAtom(String),
    #[error("sonority marks `up`/`down` must be resolved by intersecting with sonority_differences")]
    UnresolvedMark,
    #[error("operands belong to different symbol spaces")]
    SpaceMismatch,
    #[error("{0} requires a normalized (minimal, epsilon-free) automaton")]
    NotNormalized(&'static str),
    #[error("{0} is only defined on segments, got a technical symbol")]
    TechnicalSymbol(&'static str),
    #[error("condition `{0}` denotes the empty set")]
    EmptyCondition(String),

    #[error("unknown macro `{name}/{arity}`")]
    UnknownMacro { name: String, arity: usize },
    #[error("macro `{name}/{arity}` is already defined")]
    MacroRedefined { name: String, arity: usize },
    #[error("macro `{0}` is defined in terms of itself")]
    CyclicMacro(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("ill-formed expression: {0}")]
    Type(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no phoneme matches `{0}` in segment string")]
    UnknownSegment(String),

    #[error("`{0}` denotes the empty language")]
    EmptyLanguage(String),
    #[error("unknown root `{0}`")]
    UnknownRoot(String),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("malformed automaton: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
