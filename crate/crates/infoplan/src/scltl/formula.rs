use super::{ApSet, Letter};
use rand::Rng;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// A syntactically co-safe LTL formula. Negation appears on atoms only;
/// `Next` is strong (it requires that a next position exists).
///
/// Atoms are indices into an [`ApSet`] so that structural equality,
/// ordering, and hashing are cheap; rendering back to names goes through
/// [`Formula::display`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(usize),
    NegAtom(usize),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Eventually(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("word must contain at least one letter")]
pub struct EmptyWord;

impl Formula {
    /// `F true`: satisfied by every nonempty word and by no empty
    /// remainder. Progression uses it as the residual of a discharged
    /// strong next, where plain `true` would wrongly accept at the end of
    /// the word; normalization therefore never folds it away.
    pub(crate) fn some_position() -> Formula {
        Formula::Eventually(Box::new(Formula::True))
    }

    fn is_some_position(&self) -> bool {
        matches!(self, Formula::Eventually(f) if **f == Formula::True)
    }

    pub fn display<'a>(&'a self, ap: &'a ApSet) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, ap }
    }

    /// Draws a random co-safe formula with at most `atoms` distinct atoms
    /// and nesting depth at most `depth`. Useful for fuzzing the automaton
    /// translation against the direct word semantics.
    pub fn sample<R: Rng>(rng: &mut R, atoms: usize, depth: usize) -> Formula {
        assert!(atoms > 0, "need at least one atom to sample formulas");
        let leaf = |rng: &mut R| match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            i if i < 6 => Formula::Atom(rng.gen_range(0..atoms)),
            _ => Formula::NegAtom(rng.gen_range(0..atoms)),
        };
        if depth == 0 {
            return leaf(rng);
        }
        match rng.gen_range(0..10) {
            0 | 1 => Formula::And(
                Box::new(Self::sample(rng, atoms, depth - 1)),
                Box::new(Self::sample(rng, atoms, depth - 1)),
            ),
            2 | 3 => Formula::Or(
                Box::new(Self::sample(rng, atoms, depth - 1)),
                Box::new(Self::sample(rng, atoms, depth - 1)),
            ),
            4 | 5 => Formula::Until(
                Box::new(Self::sample(rng, atoms, depth - 1)),
                Box::new(Self::sample(rng, atoms, depth - 1)),
            ),
            6 => Formula::Next(Box::new(Self::sample(rng, atoms, depth - 1))),
            7 => Formula::Eventually(Box::new(Self::sample(rng, atoms, depth - 1))),
            _ => leaf(rng),
        }
    }
}

/// Finite-word satisfaction at position 0. Words must be nonempty; `Next`
/// demands an existing successor position, and `Until`/`Eventually`
/// demand a witness position inside the word.
pub fn word_satisfies(f: &Formula, w: &[Letter]) -> Result<bool, EmptyWord> {
    if w.is_empty() {
        return Err(EmptyWord);
    }
    Ok(holds_at(f, w, 0))
}

fn holds_at(f: &Formula, w: &[Letter], i: usize) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => w[i].contains(*a),
        Formula::NegAtom(a) => !w[i].contains(*a),
        Formula::And(l, r) => holds_at(l, w, i) && holds_at(r, w, i),
        Formula::Or(l, r) => holds_at(l, w, i) || holds_at(r, w, i),
        Formula::Next(g) => i + 1 < w.len() && holds_at(g, w, i + 1),
        Formula::Eventually(g) => (i..w.len()).any(|j| holds_at(g, w, j)),
        Formula::Until(l, r) => {
            (i..w.len()).any(|j| holds_at(r, w, j) && (i..j).all(|m| holds_at(l, w, m)))
        }
    }
}

/// Rewrites a formula into the canonical shape used as automaton state:
/// constants folded, and/or chains flattened with sorted deduplicated
/// operands, `l U true` and friends collapsed. Syntactic equality of
/// normal forms is what makes residual memoization effective.
pub fn normalize(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) | Formula::NegAtom(_) => f.clone(),
        Formula::And(l, r) => and(normalize(l), normalize(r)),
        Formula::Or(l, r) => or(normalize(l), normalize(r)),
        Formula::Next(g) => next(normalize(g)),
        Formula::Eventually(g) => eventually(normalize(g)),
        Formula::Until(l, r) => until(normalize(l), normalize(r)),
    }
}

/// One progression step: the returned residual is satisfied by exactly
/// the continuations `w` such that `letter · w` satisfies `f`, with the
/// end-of-word case decided by whether the residual is literally `true`.
pub fn progress(f: &Formula, letter: Letter) -> Formula {
    progress_normalized(&normalize(f), letter)
}

/// Progression on an already-normalized formula; translation keeps all
/// states normalized so it skips the re-normalization pass.
pub(crate) fn progress_normalized(f: &Formula, letter: Letter) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(a) => {
            if letter.contains(*a) {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::NegAtom(a) => {
            if letter.contains(*a) {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::And(l, r) => and(
            progress_normalized(l, letter),
            progress_normalized(r, letter),
        ),
        Formula::Or(l, r) => or(
            progress_normalized(l, letter),
            progress_normalized(r, letter),
        ),
        // Consuming a letter discharges the next operator. `X true` must
        // not progress to plain `true`: the obligation "a next position
        // exists" is met only once another letter actually arrives.
        Formula::Next(g) => {
            if **g == Formula::True {
                Formula::some_position()
            } else {
                (**g).clone()
            }
        }
        Formula::Eventually(g) => or(progress_normalized(g, letter), f.clone()),
        Formula::Until(l, r) => or(
            progress_normalized(r, letter),
            and(progress_normalized(l, letter), f.clone()),
        ),
    }
}

// Smart constructors. Inputs must already be normalized; outputs are.
//
// Boolean structure is kept in canonical disjunctive normal form over the
// temporal/literal bases, with subset absorption between clauses. Plain
// flatten-and-sort is not enough: progression of nested untils otherwise
// generates ever-deeper `A | (B & previous)` residuals that are all
// semantically equal, and translation would never close. Absorption
// collapses them, and since progression only ever produces bases drawn
// from the original formula's subterms, the residual space stays finite.

/// A clause is a conjunction of base formulas (anything that is not a
/// boolean connective or constant); a formula in DNF is a set of clauses.
/// `{}` encodes `false` and `{{}}` encodes `true`.
type Clause = BTreeSet<Formula>;
type Dnf = BTreeSet<Clause>;

fn and(a: Formula, b: Formula) -> Formula {
    from_dnf(simplify(to_dnf(Formula::And(Box::new(a), Box::new(b)))))
}

fn or(a: Formula, b: Formula) -> Formula {
    from_dnf(simplify(to_dnf(Formula::Or(Box::new(a), Box::new(b)))))
}

/// Distributes conjunction over disjunction. Anything that is not a
/// boolean connective or constant is an opaque base literal.
fn to_dnf(f: Formula) -> Dnf {
    match f {
        Formula::False => Dnf::new(),
        Formula::True => [Clause::new()].into_iter().collect(),
        Formula::Or(l, r) => {
            let mut clauses = to_dnf(*l);
            clauses.extend(to_dnf(*r));
            clauses
        }
        Formula::And(l, r) => {
            let left = to_dnf(*l);
            let right = to_dnf(*r);
            let mut product = Dnf::new();
            for cl in &left {
                for cr in &right {
                    product.insert(cl.union(cr).cloned().collect::<Clause>());
                }
            }
            product
        }
        base => {
            let clause: Clause = [base].into_iter().collect();
            [clause].into_iter().collect()
        }
    }
}

fn simplify(mut clauses: Dnf) -> Dnf {
    // `true` as a clause absorbs everything.
    if clauses.contains(&Clause::new()) {
        let mut only_true = Dnf::new();
        only_true.insert(Clause::new());
        return only_true;
    }
    // Within a clause, the nonempty-word marker is implied by any other
    // base, since every base requires at least one position.
    let marker = Formula::some_position();
    clauses = clauses
        .into_iter()
        .map(|mut c| {
            if c.len() > 1 {
                c.remove(&marker);
            }
            c
        })
        .collect();
    // Across clauses, the marker clause absorbs all others for the same
    // reason, and any superset of a clause is redundant.
    let marker_clause: Clause = [marker].into_iter().collect();
    if clauses.contains(&marker_clause) {
        let mut only_marker = Dnf::new();
        only_marker.insert(marker_clause);
        return only_marker;
    }
    let list: Vec<Clause> = clauses.iter().cloned().collect();
    clauses.retain(|c| {
        !list
            .iter()
            .any(|other| other.len() < c.len() && other.is_subset(c))
    });
    clauses
}

fn from_dnf(clauses: Dnf) -> Formula {
    if clauses.is_empty() {
        return Formula::False;
    }
    if clauses.contains(&Clause::new()) {
        return Formula::True;
    }
    let disjuncts: Vec<Formula> = clauses
        .into_iter()
        .map(|clause| rebuild(clause.into_iter(), Formula::And))
        .collect();
    rebuild(disjuncts.into_iter(), Formula::Or)
}

fn rebuild(
    items: impl DoubleEndedIterator<Item = Formula>,
    join: fn(Box<Formula>, Box<Formula>) -> Formula,
) -> Formula {
    let mut acc: Option<Formula> = None;
    for item in items.rev() {
        acc = Some(match acc {
            None => item,
            Some(rest) => join(Box::new(item), Box::new(rest)),
        });
    }
    acc.expect("rebuild requires at least one item")
}

fn next(g: Formula) -> Formula {
    match g {
        Formula::False => Formula::False,
        // `X (F true)` and `X true` both say "at least two positions".
        g if g == Formula::True || g.is_some_position() => Formula::Next(Box::new(Formula::True)),
        g => Formula::Next(Box::new(g)),
    }
}

fn eventually(g: Formula) -> Formula {
    match g {
        Formula::False => Formula::False,
        Formula::Eventually(inner) => Formula::Eventually(inner),
        g => Formula::Eventually(Box::new(g)),
    }
}

fn until(l: Formula, r: Formula) -> Formula {
    if r == Formula::False {
        return Formula::False;
    }
    if r == Formula::True || r.is_some_position() {
        // The witness can be the current position, whatever `l` is.
        return Formula::some_position();
    }
    if l == Formula::True || l.is_some_position() {
        return eventually(r);
    }
    if l == Formula::False {
        return r;
    }
    Formula::Until(Box::new(l), Box::new(r))
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    ap: &'a ApSet,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self.f, self.ap, 0, out)
    }
}

/// Binding strength, mirroring the parser: `|` < `&` < `U` < unary.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 0,
        Formula::And(..) => 1,
        Formula::Until(..) => 2,
        Formula::Next(..) | Formula::Eventually(..) => 3,
        _ => 4,
    }
}

fn write_prec(f: &Formula, ap: &ApSet, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) < min {
        write!(out, "(")?;
        write_prec(f, ap, 0, out)?;
        return write!(out, ")");
    }
    match f {
        Formula::True => write!(out, "true"),
        Formula::False => write!(out, "false"),
        Formula::Atom(a) => write!(out, "{}", ap.name(*a)),
        Formula::NegAtom(a) => write!(out, "!{}", ap.name(*a)),
        Formula::And(l, r) => {
            write_prec(l, ap, 2, out)?;
            write!(out, " & ")?;
            write_prec(r, ap, 2, out)
        }
        Formula::Or(l, r) => {
            write_prec(l, ap, 1, out)?;
            write!(out, " | ")?;
            write_prec(r, ap, 1, out)
        }
        Formula::Until(l, r) => {
            write_prec(l, ap, 3, out)?;
            write!(out, " U ")?;
            write_prec(r, ap, 2, out)
        }
        Formula::Next(g) => {
            write!(out, "X ")?;
            write_prec(g, ap, 3, out)
        }
        Formula::Eventually(g) => {
            write!(out, "F ")?;
            write_prec(g, ap, 3, out)
        }
    }
}
