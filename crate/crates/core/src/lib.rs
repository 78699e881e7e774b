//! One-level prosodic morphology with set-labeled, resource-conscious
//! finite-state automata, and a grammar of Temiar aspectual reduplication.
//!
//! ```
//! let t = olpm::temiar::Temiar::new().unwrap();
//! let a = t.wordform("koow & simulfactive").unwrap();
//! assert_eq!(t.surfaces(&a), vec!["kakOOw"]);
//! ```

pub mod alphabet;
pub mod cli;
pub mod combinators;
pub mod enrich;
pub mod error;
pub mod fsa;
pub mod optimize;
pub mod prosody;
pub mod temiar;

pub use error::{Error, Result};
