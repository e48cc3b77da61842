//! Recursive-descent parser for the formula language.
//!
//! Grammar sketch (whitespace-insensitive, all binaries parenthesized):
//!
//! ```text
//! formula  := qhead formula | "(" formula OP slash? formula ")" | "~"? atom
//! qhead    := "(" QKIND VAR (("/" | "\") varset)? ")"
//! QKIND    := "E" | "A" | "Q." NAME | "TQ." NAME
//! OP       := "&" | "|" | "<->"
//! slash    := "/" varset                (not allowed after "<->")
//! varset   := "{" (VAR ("," VAR)*)? "}"
//! atom     := NAME "(" term ("," term)* ")" | term ("=" | "!=") term
//! term     := VAR | "#" NAME
//! ```
//!
//! `<->` is surface syntax: `(a <-> b)` parses to `((a & b) | (na & nb))`
//! where `na`, `nb` are the atomic-negation normal forms; both sides must
//! be quantifier-free and slash-free.

use crate::syntax::{Formula, QuantKind, Term, VarSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Eq,
    Neq,
    And,
    Or,
    Iff,
    Slash,
    Backslash,
    Tilde,
    Hash,
    Ident(String),
    QIdent { team: bool, name: String },
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = input.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
                continue;
            }
            '(' => toks.push((start, Tok::LParen)),
            ')' => toks.push((start, Tok::RParen)),
            '{' => toks.push((start, Tok::LBrace)),
            '}' => toks.push((start, Tok::RBrace)),
            ',' => toks.push((start, Tok::Comma)),
            '&' => toks.push((start, Tok::And)),
            '|' => toks.push((start, Tok::Or)),
            '/' => toks.push((start, Tok::Slash)),
            '\\' => toks.push((start, Tok::Backslash)),
            '~' => toks.push((start, Tok::Tilde)),
            '#' => toks.push((start, Tok::Hash)),
            '=' => toks.push((start, Tok::Eq)),
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((start, Tok::Neq));
                    i += 1;
                } else {
                    return Err(Error::Parse { pos: start, msg: "expected `!=`".into() });
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((start, Tok::Iff));
                    i += 2;
                } else {
                    return Err(Error::Parse { pos: start, msg: "expected `<->`".into() });
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &input[i..j];
                // Q.name / TQ.name are single tokens
                if (word == "Q" || word == "TQ") && bytes.get(j) == Some(&b'.') {
                    let mut k = j + 1;
                    while k < bytes.len()
                        && ((bytes[k] as char).is_ascii_alphanumeric() || bytes[k] == b'_')
                    {
                        k += 1;
                    }
                    if k == j + 1 {
                        return Err(Error::Parse {
                            pos: j,
                            msg: format!("expected quantifier name after `{word}.`"),
                        });
                    }
                    toks.push((start, Tok::QIdent { team: word == "TQ", name: input[j + 1..k].into() }));
                    i = k;
                    continue;
                }
                toks.push((start, Tok::Ident(word.into())));
                i = j;
                continue;
            }
            _ => {
                return Err(Error::Parse { pos: start, msg: format!("unexpected character `{c}`") });
            }
        }
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.here(), msg: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected {what}"))
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected {what}"))
            }
        }
    }

    fn varset(&mut self) -> Result<VarSet> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut set = VarSet::new();
        if self.peek() == Some(&Tok::RBrace) {
            self.next();
            return Ok(set);
        }
        loop {
            set.insert(self.ident("variable")?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBrace) => return Ok(set),
                _ => {
                    self.pos = self.pos.saturating_sub(1);
                    return self.err("expected `,` or `}`");
                }
            }
        }
    }

    /// Attempt `( QKIND VAR slash? )`; on failure the caller backtracks.
    fn try_qhead(&mut self) -> Result<(QuantKind, String, VarSet, bool)> {
        self.expect(Tok::LParen, "`(`")?;
        let kind = match self.next() {
            Some(Tok::Ident(s)) if s == "E" => QuantKind::Exists,
            Some(Tok::Ident(s)) if s == "A" => QuantKind::Forall,
            Some(Tok::QIdent { team: false, name }) => QuantKind::Mostowski(name),
            Some(Tok::QIdent { team: true, name }) => QuantKind::Team(name),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected quantifier");
            }
        };
        let var = self.ident("quantified variable")?;
        let (slash, backslash) = match self.peek() {
            Some(Tok::Slash) => {
                self.next();
                (self.varset()?, false)
            }
            Some(Tok::Backslash) => {
                self.next();
                (self.varset()?, true)
            }
            _ => (VarSet::new(), false),
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok((kind, var, slash, backslash))
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::LParen) => {
                let save = self.pos;
                if let Ok((kind, var, slash, backslash)) = self.try_qhead() {
                    let body = self.formula()?;
                    return Ok(Formula::Quant {
                        kind,
                        var,
                        slash,
                        backslash,
                        body: Box::new(body),
                    });
                }
                self.pos = save;
                self.binary()
            }
            Some(Tok::Tilde) => {
                self.next();
                let atom = self.atom()?;
                match atom {
                    Formula::Atom { rel, args, negated } => {
                        Ok(Formula::Atom { rel, args, negated: !negated })
                    }
                    Formula::Eq { left, right, negated } => {
                        Ok(Formula::Eq { left, right, negated: !negated })
                    }
                    _ => unreachable!(),
                }
            }
            _ => self.atom(),
        }
    }

    fn binary(&mut self) -> Result<Formula> {
        self.expect(Tok::LParen, "`(`")?;
        let left = self.formula()?;
        let op = self.next();
        let (is_and, iff) = match op {
            Some(Tok::And) => (true, false),
            Some(Tok::Or) => (false, false),
            Some(Tok::Iff) => (false, true),
            // redundant grouping parentheses around a single formula
            Some(Tok::RParen) => return Ok(left),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected `&`, `|` or `<->`");
            }
        };
        let slash = if !iff && self.peek() == Some(&Tok::Slash) {
            self.next();
            self.varset()?
        } else {
            VarSet::new()
        };
        let right = self.formula()?;
        self.expect(Tok::RParen, "`)`")?;
        if iff {
            let pos = self.here();
            let expand = |e: Error| match e {
                Error::Syntax(msg) => Error::Parse { pos, msg },
                other => other,
            };
            let nl = left.negate_quantifier_free().map_err(expand)?;
            let nr = right.negate_quantifier_free().map_err(expand)?;
            return Ok(Formula::or(Formula::and(left, right), Formula::and(nl, nr)));
        }
        Ok(if is_and {
            Formula::And { left: Box::new(left), right: Box::new(right), slash }
        } else {
            Formula::Or { left: Box::new(left), right: Box::new(right), slash }
        })
    }

    fn term(&mut self) -> Result<Term> {
        match self.next() {
            Some(Tok::Hash) => Ok(Term::Const(self.ident("constant name")?)),
            Some(Tok::Ident(s)) => Ok(Term::Var(s)),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected term")
            }
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        // relation atom: NAME "(" …; otherwise an equality between terms
        if let (Some(Tok::Ident(_)), Some((_, Tok::LParen))) =
            (self.peek(), self.toks.get(self.pos + 1))
        {
            let rel = self.ident("relation name")?;
            self.expect(Tok::LParen, "`(`")?;
            let mut args = vec![self.term()?];
            loop {
                match self.next() {
                    Some(Tok::Comma) => args.push(self.term()?),
                    Some(Tok::RParen) => break,
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return self.err("expected `,` or `)`");
                    }
                }
            }
            return Ok(Formula::Atom { rel, args, negated: false });
        }
        let left = self.term()?;
        let negated = match self.next() {
            Some(Tok::Eq) => false,
            Some(Tok::Neq) => true,
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected `=` or `!=`");
            }
        };
        let right = self.term()?;
        Ok(Formula::Eq { left, right, negated })
    }
}

/// Parse a formula; errors carry the byte offset of the offending token.
pub fn parse(input: &str) -> Result<Formula> {
    let toks = lex(input)?;
    let mut p = Parser { toks, pos: 0, end: input.len() };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input after formula");
    }
    Ok(f)
}
