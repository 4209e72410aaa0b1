use super::{ApSet, Formula};
use thiserror::Error;

/// Grammar, loosest binding first:
///
/// ```text
/// formula := or
/// or      := and ('|' and)*
/// and     := until ('&' until)*
/// until   := unary ('U' unary)*        right associative
/// unary   := '!' atom | 'X' unary | 'F' unary | atom
///          | 'true' | 'false' | '(' formula ')'
/// atom    := [A-Za-z][A-Za-z0-9_]*
/// ```
///
/// Identifiers are resolved by position: where an operand is expected, a
/// declared atom name wins even if it collides with `U`/`X`/`F`; where a
/// binary operator is expected, `U` always means until. That keeps
/// missions like `!U U C` (avoid the region called `U` until `C`) legal.
pub fn parse_formula(text: &str, ap: &ApSet) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        at: 0,
        end_pos: text.chars().count() + 1,
        ap,
    };
    let formula = parser.or()?;
    match parser.peek() {
        None => Ok(formula),
        Some((_, pos)) => Err(ParseError::Syntax {
            pos: *pos,
            msg: "unexpected trailing input".into(),
        }),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared atom `{name}` at position {pos}")]
    UndeclaredAtom { pos: usize, name: String },
    #[error("negation applies to atoms only (position {pos})")]
    NegationOnNonAtom { pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
}

/// Positions are 1-based character offsets into the input.
fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '!' | '&' | '|' | '(' | ')' => {
                out.push((
                    match c {
                        '!' => Tok::Bang,
                        '&' => Tok::Amp,
                        '|' => Tok::Pipe,
                        '(' => Tok::LParen,
                        _ => Tok::RParen,
                    },
                    pos,
                ));
                i += 1;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    at: usize,
    end_pos: usize,
    ap: &'a ApSet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.tokens.get(self.at)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let tok = self.tokens.get(self.at).cloned();
        if tok.is_some() {
            self.at += 1;
        }
        tok
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while matches!(self.peek(), Some((Tok::Pipe, _))) {
            self.at += 1;
            let rhs = self.and()?;
            acc = Formula::Or(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.until()?;
        while matches!(self.peek(), Some((Tok::Amp, _))) {
            self.at += 1;
            let rhs = self.until()?;
            acc = Formula::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let mut operands = vec![self.unary()?];
        // Operator position: a bare `U` here is always the until keyword.
        while matches!(self.peek(), Some((Tok::Ident(s), _)) if s == "U") {
            self.at += 1;
            operands.push(self.unary()?);
        }
        let mut acc = operands.pop().expect("at least one operand");
        while let Some(lhs) = operands.pop() {
            acc = Formula::Until(Box::new(lhs), Box::new(acc));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some((Tok::Bang, bang_pos)) => match self.bump() {
                Some((Tok::Ident(name), pos)) => match self.ap.index_of(&name) {
                    Some(idx) => Ok(Formula::NegAtom(idx)),
                    None if name == "true" || name == "false" => {
                        Err(ParseError::NegationOnNonAtom { pos: bang_pos })
                    }
                    None if matches!(name.as_str(), "U" | "X" | "F") => {
                        Err(ParseError::NegationOnNonAtom { pos: bang_pos })
                    }
                    None => Err(ParseError::UndeclaredAtom { pos, name }),
                },
                _ => Err(ParseError::NegationOnNonAtom { pos: bang_pos }),
            },
            Some((Tok::Ident(name), pos)) => {
                if name == "true" {
                    return Ok(Formula::True);
                }
                if name == "false" {
                    return Ok(Formula::False);
                }
                // Operand position: declared atoms shadow operator names.
                if let Some(idx) = self.ap.index_of(&name) {
                    return Ok(Formula::Atom(idx));
                }
                match name.as_str() {
                    "X" => Ok(Formula::Next(Box::new(self.unary()?))),
                    "F" => Ok(Formula::Eventually(Box::new(self.unary()?))),
                    "U" => Err(ParseError::Syntax {
                        pos,
                        msg: "until operator is missing its left operand".into(),
                    }),
                    _ => Err(ParseError::UndeclaredAtom { pos, name }),
                }
            }
            Some((Tok::LParen, open_pos)) => {
                let inner = self.or()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((_, pos)) => Err(ParseError::Syntax {
                        pos,
                        msg: "expected `)`".into(),
                    }),
                    None => Err(ParseError::Syntax {
                        pos: open_pos,
                        msg: "unclosed parenthesis".into(),
                    }),
                }
            }
            Some((tok, pos)) => Err(ParseError::Syntax {
                pos,
                msg: format!("expected a formula, found `{}`", tok.describe()),
            }),
            None => Err(ParseError::Syntax {
                pos: self.end_pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

impl Tok {
    fn describe(&self) -> &str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mission_ap() -> ApSet {
        ApSet::new(["D1", "D2", "C", "U"]).unwrap()
    }

    #[test]
    fn parses_ordered_visit_mission() {
        let ap = mission_ap();
        let f = parse_formula("(!U U C) & (!C U D2) & (!D2 U D1)", &ap).unwrap();
        // Three until clauses joined by conjunction, with the atom named
        // `U` resolved in operand position.
        fn count_untils(f: &Formula) -> usize {
            match f {
                Formula::Until(l, r) => 1 + count_untils(l) + count_untils(r),
                Formula::And(l, r) | Formula::Or(l, r) => count_untils(l) + count_untils(r),
                Formula::Next(g) | Formula::Eventually(g) => count_untils(g),
                _ => 0,
            }
        }
        assert!(matches!(f, Formula::And(..)));
        assert_eq!(count_untils(&f), 3);
        let u = ap.index_of("U").unwrap();
        let c = ap.index_of("C").unwrap();
        if let Formula::And(inner, _) = &f {
            if let Formula::And(first, _) = &**inner {
                assert_eq!(
                    **first,
                    Formula::Until(Box::new(Formula::NegAtom(u)), Box::new(Formula::Atom(c)))
                );
            } else {
                panic!("expected nested conjunction, got {inner:?}");
            }
        }
    }

    #[test]
    fn until_is_right_associative() {
        let ap = ApSet::new(["a", "b", "c"]).unwrap();
        let f = parse_formula("a U b U c", &ap).unwrap();
        assert_eq!(
            f,
            Formula::Until(
                Box::new(Formula::Atom(0)),
                Box::new(Formula::Until(
                    Box::new(Formula::Atom(1)),
                    Box::new(Formula::Atom(2))
                ))
            )
        );
    }

    #[test]
    fn precedence_binds_not_then_temporal_then_and_then_or() {
        let ap = ApSet::new(["a", "b", "c"]).unwrap();
        let f = parse_formula("!a U b & X c | F a", &ap).unwrap();
        // ((!a U b) & (X c)) | (F a)
        assert_eq!(
            f,
            Formula::Or(
                Box::new(Formula::And(
                    Box::new(Formula::Until(
                        Box::new(Formula::NegAtom(0)),
                        Box::new(Formula::Atom(1))
                    )),
                    Box::new(Formula::Next(Box::new(Formula::Atom(2))))
                )),
                Box::new(Formula::Eventually(Box::new(Formula::Atom(0))))
            )
        );
    }

    #[test]
    fn constants_parse() {
        let ap = ApSet::new(["a"]).unwrap();
        assert_eq!(parse_formula("true", &ap).unwrap(), Formula::True);
        assert_eq!(parse_formula("false", &ap).unwrap(), Formula::False);
    }

    #[test]
    fn negation_of_compound_is_rejected() {
        let ap = ApSet::new(["a", "b"]).unwrap();
        assert_eq!(
            parse_formula("!(a U b)", &ap),
            Err(ParseError::NegationOnNonAtom { pos: 1 })
        );
        assert_eq!(
            parse_formula("!true", &ap),
            Err(ParseError::NegationOnNonAtom { pos: 1 })
        );
    }

    #[test]
    fn undeclared_atoms_are_reported_with_position() {
        let ap = ApSet::new(["a"]).unwrap();
        assert_eq!(
            parse_formula("a U zone", &ap),
            Err(ParseError::UndeclaredAtom {
                pos: 5,
                name: "zone".into()
            })
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let ap = ApSet::new(["a", "b"]).unwrap();
        assert_eq!(
            parse_formula("(a U b", &ap),
            Err(ParseError::Syntax {
                pos: 1,
                msg: "unclosed parenthesis".into()
            })
        );
        assert!(matches!(
            parse_formula("a b", &ap),
            Err(ParseError::Syntax { pos: 3, .. })
        ));
        assert!(matches!(
            parse_formula("a U", &ap),
            Err(ParseError::Syntax { pos: 4, .. })
        ));
        assert!(matches!(
            parse_formula("", &ap),
            Err(ParseError::Syntax { pos: 1, .. })
        ));
        assert!(matches!(
            parse_formula("a ? b", &ap),
            Err(ParseError::Syntax { pos: 3, .. })
        ));
    }
}
