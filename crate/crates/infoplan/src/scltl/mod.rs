//! Syntactically co-safe LTL: formulas, parsing, finite-word semantics,
//! and translation to a deterministic finite automaton.
//!
//! Formulas are built from atomic propositions with negation allowed on
//! atoms only, conjunction, disjunction, strong next (`X`), eventually
//! (`F`), and until (`U`). Satisfaction is decided over finite, nonempty
//! words of letters; every satisfying word stays satisfying under
//! extension, which is what makes the fragment usable as a mission
//! specification with a definite completion point.

mod automaton;
mod formula;
mod parser;

pub use automaton::{translate, Fsa};
pub use formula::{normalize, progress, word_satisfies, EmptyWord, Formula};
pub use parser::{parse_formula, ParseError};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest supported atomic proposition set. Letters are alphabet subsets
/// and the translation enumerates all of them, so the cap keeps automata
/// construction obviously finite and cheap.
pub const MAX_ATOMS: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ApSetError {
    #[error("too many atomic propositions: {0} (limit {MAX_ATOMS})")]
    TooMany(usize),
    #[error("duplicate atomic proposition `{0}`")]
    Duplicate(String),
    #[error("invalid atomic proposition name `{0}`")]
    InvalidName(String),
}

/// Ordered set of atomic proposition names. The declaration order fixes
/// the bit layout of [`Letter`] and is shared by every structure built on
/// top of it, so two components agree on letters exactly when they were
/// created from equal `ApSet`s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApSet {
    names: Vec<String>,
}

impl ApSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, ApSetError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_ATOMS {
            return Err(ApSetError::TooMany(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if !is_valid_atom_name(name) {
                return Err(ApSetError::InvalidName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(ApSetError::Duplicate(name.clone()));
            }
        }
        Ok(ApSet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    /// Number of distinct letters, `2^|AP|`.
    pub fn letter_count(&self) -> usize {
        1usize << self.names.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.letter_count() as u32).map(Letter)
    }

    /// Builds a letter from atom names; unknown names are an error.
    pub fn letter(&self, active: &[&str]) -> Result<Letter, ApSetError> {
        let mut bits = 0u32;
        for name in active {
            let idx = self
                .index_of(name)
                .ok_or_else(|| ApSetError::InvalidName((*name).to_string()))?;
            bits |= 1 << idx;
        }
        Ok(Letter(bits))
    }

    pub fn format_letter(&self, letter: Letter) -> String {
        let active: Vec<&str> = (0..self.len())
            .filter(|&i| letter.contains(i))
            .map(|i| self.names[i].as_str())
            .collect();
        format!("{{{}}}", active.join(","))
    }
}

/// `true` and `false` always lex as constants, so declaring them as atoms
/// would make the atoms unreferencable. The operator names `U`/`X`/`F`
/// stay legal: a declared atom wins in operand position while operator
/// position keeps its usual meaning, which is what lets a region atom be
/// called `U` without giving up the until operator.
fn is_valid_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "true" | "false")
}

/// One alphabet symbol: the set of atomic propositions holding at a
/// position, packed as a bitset in [`ApSet`] declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter(pub u32);

impl Letter {
    pub const EMPTY: Letter = Letter(0);

    pub fn contains(self, atom: usize) -> bool {
        self.0 & (1 << atom) != 0
    }

    pub fn with(self, atom: usize) -> Letter {
        Letter(self.0 | (1 << atom))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0b{:b}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ap_set_rejects_keywords_and_duplicates() {
        assert_eq!(
            ApSet::new(["a", "a"]),
            Err(ApSetError::Duplicate("a".into()))
        );
        assert_eq!(
            ApSet::new(["true"]),
            Err(ApSetError::InvalidName("true".into()))
        );
        assert_eq!(
            ApSet::new(["9lives"]),
            Err(ApSetError::InvalidName("9lives".into()))
        );
        assert!(ApSet::new(["D1", "D2", "C", "U"]).is_ok());
    }

    #[test]
    fn letters_follow_declaration_order() {
        let ap = ApSet::new(["a", "b", "c"]).unwrap();
        let l = ap.letter(&["a", "c"]).unwrap();
        assert!(l.contains(0) && !l.contains(1) && l.contains(2));
        assert_eq!(l.index(), 0b101);
        assert_eq!(ap.format_letter(l), "{a,c}");
        assert_eq!(ap.letters().count(), 8);
    }
}
