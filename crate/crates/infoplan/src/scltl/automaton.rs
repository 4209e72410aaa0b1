use super::formula::{normalize, progress_normalized};
use super::{ApSet, Formula, Letter};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;

/// Deterministic finite automaton over alphabet `2^AP`, complete in the
/// sense that every state has exactly one successor per letter.
///
/// States are the normalized residual formulas reachable from the
/// translated formula by progression; a state is accepting exactly when
/// its residual is `true`, so accepting states are absorbing and the
/// accepted language is closed under extension (good prefixes stay good).
#[derive(Debug, Clone, Serialize)]
pub struct Fsa {
    ap: ApSet,
    /// Human-readable residual of each state, for exports and traces.
    labels: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    /// Row-major transition table, `trans[state * letter_count + letter]`.
    trans: Vec<usize>,
}

/// Compiles a co-safe formula to its automaton by breadth-first formula
/// progression. Residuals are memoized by their normal form, which keeps
/// the state space finite; a `false` residual, when reachable, acts as
/// the rejecting sink for dead prefixes.
pub fn translate(f: &Formula, ap: &ApSet) -> Fsa {
    let n_letters = ap.letter_count();
    let root = normalize(f);
    let mut ids: HashMap<Formula, usize> = HashMap::new();
    let mut states: Vec<Formula> = Vec::new();
    let mut trans: Vec<usize> = Vec::new();
    ids.insert(root.clone(), 0);
    states.push(root);

    let mut at = 0;
    while at < states.len() {
        // States never shrink, so indexing stays valid while we extend.
        let current = states[at].clone();
        for letter in ap.letters() {
            let residual = progress_normalized(&current, letter);
            let next_id = match ids.get(&residual) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    ids.insert(residual.clone(), id);
                    states.push(residual);
                    id
                }
            };
            trans.push(next_id);
        }
        at += 1;
    }
    debug_assert_eq!(trans.len(), states.len() * n_letters);

    Fsa {
        labels: states.iter().map(|s| s.display(ap).to_string()).collect(),
        accepting: states.iter().map(|s| *s == Formula::True).collect(),
        initial: 0,
        trans,
        ap: ap.clone(),
    }
}

impl Fsa {
    pub fn ap(&self) -> &ApSet {
        &self.ap
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn label(&self, state: usize) -> &str {
        &self.labels[state]
    }

    pub fn step(&self, state: usize, letter: Letter) -> usize {
        self.trans[state * self.ap.letter_count() + letter.index()]
    }

    /// Runs the word from the initial state and reports acceptance of the
    /// final state. The empty word is accepted only when the initial
    /// residual is already `true`.
    pub fn accepts(&self, word: &[Letter]) -> bool {
        let mut state = self.initial;
        for &letter in word {
            state = self.step(state, letter);
        }
        self.accepting[state]
    }

    /// Graphviz rendering: accepting states as double circles, edges
    /// grouped per state pair and labeled with their letters.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph fsa {\n  rankdir=LR;\n  init [shape=point];\n");
        for (id, label) in self.labels.iter().enumerate() {
            let shape = if self.accepting[id] {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(
                out,
                "  s{id} [shape={shape}, label=\"{}\"];",
                label.replace('"', "\\\"")
            );
        }
        let _ = writeln!(out, "  init -> s{};", self.initial);
        for src in 0..self.labels.len() {
            let mut grouped: Vec<(usize, Vec<Letter>)> = Vec::new();
            for letter in self.ap.letters() {
                let dst = self.step(src, letter);
                match grouped.iter_mut().find(|(d, _)| *d == dst) {
                    Some((_, letters)) => letters.push(letter),
                    None => grouped.push((dst, vec![letter])),
                }
            }
            for (dst, letters) in grouped {
                let label: Vec<String> =
                    letters.iter().map(|&l| self.ap.format_letter(l)).collect();
                let _ = writeln!(out, "  s{src} -> s{dst} [label=\"{}\"];", label.join(" | "));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("automaton serialization cannot fail")
    }
}
