//! Hand-rolled recursive-descent parser for the rule language, mode
//! declarations and ground-fact files. Statements are terminated by `.`;
//! `%` starts a line comment; capitalized (or `_`-prefixed) tokens are
//! variables; `not` marks negation-as-failure.

use std::collections::BTreeMap;
use std::fmt;

use crate::logic::{Atom, Literal, Rule, RuleId, Term};
use crate::modes::{ModeArg, ModeDeclaration, ModeKind, PlaceKind};
use crate::{Time, Weight};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    ColonDash,
    Plus,
    Minus,
    Hash,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == b'%' {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_ascii_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                return Ok(out);
            };
            let tok = match c {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'#' => {
                    self.bump();
                    Tok::Hash
                }
                b':' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        Tok::ColonDash
                    } else {
                        return Err(self.error("expected '-' after ':'"));
                    }
                }
                b'-' => {
                    if self.peek2().is_some_and(|d| d.is_ascii_digit()) {
                        self.bump();
                        Tok::Number(self.number("-")?)
                    } else {
                        self.bump();
                        Tok::Minus
                    }
                }
                c if c.is_ascii_digit() => Tok::Number(self.number("")?),
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut s = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                            s.push(self.bump().unwrap() as char);
                        } else {
                            break;
                        }
                    }
                    let first = s.as_bytes()[0];
                    if first.is_ascii_uppercase() || first == b'_' {
                        Tok::Var(s)
                    } else {
                        Tok::Ident(s)
                    }
                }
                other => return Err(self.error(format!("unexpected character '{}'", other as char))),
            };
            out.push(Spanned { tok, line, col });
        }
    }

    fn number(&mut self, prefix: &str) -> Result<String, ParseError> {
        let mut s = String::from(prefix);
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(self.bump().unwrap() as char);
            } else {
                break;
            }
        }
        if self.peek() == Some(b'.') && self.peek2().is_some_and(|d| d.is_ascii_digit()) {
            s.push(self.bump().unwrap() as char);
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    s.push(self.bump().unwrap() as char);
                } else {
                    break;
                }
            }
        }
        Ok(s)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    arities: BTreeMap<String, usize>,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: Lexer::new(src).tokens()?,
            pos: 0,
            arities: BTreeMap::new(),
        })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn check_arity(&mut self, predicate: &str, arity: usize) -> Result<(), ParseError> {
        let (line, col) = self.here();
        match self.arities.get(predicate) {
            Some(&known) if known != arity => Err(ParseError {
                line,
                col,
                message: format!(
                    "predicate {predicate} used with arity {arity}, previously {known}"
                ),
            }),
            _ => {
                self.arities.insert(predicate.to_string(), arity);
                Ok(())
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.bump().cloned() {
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let args = self.term_list()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Const(name))
                }
            }
            Some(Tok::Var(name)) => Ok(Term::Var(name)),
            Some(Tok::Number(n)) => Ok(Term::Const(n)),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error("expected a term"))
            }
        }
    }

    fn term_list(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut out = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            out.push(self.term()?);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let Some(Tok::Ident(predicate)) = self.bump().cloned() else {
            self.pos = self.pos.saturating_sub(1);
            return Err(self.error("expected a predicate symbol"));
        };
        self.expect(Tok::LParen, "'(' after predicate")?;
        let args = self.term_list()?;
        self.expect(Tok::RParen, "')'")?;
        self.check_arity(&predicate, args.len())?;
        Ok(Atom::new(predicate, args))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        if self.peek() == Some(&Tok::Ident("not".into())) {
            self.pos += 1;
            Ok(Literal::neg(self.atom()?))
        } else {
            Ok(Literal::pos(self.atom()?))
        }
    }

    fn rule(&mut self, default_weight: Weight) -> Result<Rule, ParseError> {
        let weight = if let Some(Tok::Number(n)) = self.peek() {
            let w = n
                .parse::<Weight>()
                .map_err(|_| self.error("bad weight literal"))?;
            self.pos += 1;
            w
        } else {
            default_weight
        };
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::ColonDash) {
            self.pos += 1;
            body.push(self.literal()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                body.push(self.literal()?);
            }
        }
        self.expect(Tok::Dot, "'.' to end the statement")?;
        Ok(Rule::new(RuleId(0), head, body, weight))
    }

    fn mode_arg(&mut self) -> Result<ModeArg, ParseError> {
        match self.bump().cloned() {
            Some(Tok::Plus) => Ok(ModeArg::Place(PlaceKind::Input, self.type_name()?)),
            Some(Tok::Minus) => Ok(ModeArg::Place(PlaceKind::Output, self.type_name()?)),
            Some(Tok::Hash) => Ok(ModeArg::Place(PlaceKind::Constant, self.type_name()?)),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = vec![self.mode_arg()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.mode_arg()?);
                    }
                    self.expect(Tok::RParen, "')'")?;
                    Ok(ModeArg::Compound(name, args))
                } else {
                    Ok(ModeArg::Const(name))
                }
            }
            Some(Tok::Number(n)) => Ok(ModeArg::Const(n)),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error("expected a mode template argument"))
            }
        }
    }

    fn type_name(&mut self) -> Result<String, ParseError> {
        match self.bump().cloned() {
            Some(Tok::Ident(name)) => Ok(name),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error("expected a placemarker type name"))
            }
        }
    }

    fn mode(&mut self) -> Result<ModeDeclaration, ParseError> {
        let (line, col) = self.here();
        let Some(Tok::Ident(kw)) = self.bump().cloned() else {
            return Err(ParseError {
                line,
                col,
                message: "expected modeh(...) or modeb(...)".into(),
            });
        };
        let kind = match kw.as_str() {
            "modeh" => ModeKind::Head,
            "modeb" => ModeKind::Body,
            other => {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("expected modeh or modeb, got {other}"),
                })
            }
        };
        self.expect(Tok::LParen, "'('")?;
        let negated = if self.peek() == Some(&Tok::Ident("not".into())) {
            if kind == ModeKind::Head {
                return Err(self.error("head modes cannot be negated"));
            }
            self.pos += 1;
            true
        } else {
            false
        };
        let Some(Tok::Ident(predicate)) = self.bump().cloned() else {
            self.pos = self.pos.saturating_sub(1);
            return Err(self.error("expected a predicate symbol"));
        };
        self.expect(Tok::LParen, "'('")?;
        let mut args = vec![self.mode_arg()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.mode_arg()?);
        }
        self.expect(Tok::RParen, "')'")?;
        self.expect(Tok::RParen, "')'")?;
        self.expect(Tok::Dot, "'.' to end the statement")?;
        let decl = ModeDeclaration {
            kind,
            negated,
            predicate,
            args,
        };
        decl.validate().map_err(|m| ParseError {
            line,
            col,
            message: m,
        })?;
        Ok(decl)
    }
}

/// Parses weighted rules, one per `.`-terminated statement. Statements
/// without a weight prefix get `default_weight`. Rule ids are sequential
/// from zero; callers re-assign them when inserting into a theory.
pub fn parse_rules(src: &str, default_weight: Weight) -> Result<Vec<Rule>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    while !p.at_end() {
        let mut rule = p.rule(default_weight)?;
        rule.id = RuleId(out.len() as u64);
        out.push(rule);
    }
    Ok(out)
}

/// Parses mode declarations.
pub fn parse_modes(src: &str) -> Result<Vec<ModeDeclaration>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    while !p.at_end() {
        out.push(p.mode()?);
    }
    Ok(out)
}

/// A time-stamped ground fact of the observation stream.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StreamRecord {
    pub time: Time,
    pub fact: Atom,
}

/// Parses ground facts whose last argument is the (non-negative integer)
/// time point.
pub fn parse_facts(src: &str) -> Result<Vec<StreamRecord>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    while !p.at_end() {
        let (line, col) = p.here();
        let atom = p.atom()?;
        p.expect(Tok::Dot, "'.' to end the statement")?;
        let record = record_from_atom(atom).map_err(|message| ParseError {
            line,
            col,
            message,
        })?;
        out.push(record);
    }
    Ok(out)
}

pub(crate) fn record_from_atom(fact: Atom) -> Result<StreamRecord, String> {
    if !fact.is_ground() {
        return Err(format!("fact is not ground: {fact:?}"));
    }
    let time = match fact.args.last() {
        Some(Term::Const(c)) => c
            .parse::<Time>()
            .map_err(|_| format!("last argument of {fact:?} is not an integer time"))?,
        _ => return Err(format!("fact {fact:?} has no time argument")),
    };
    if time < 0 {
        return Err(format!("negative time point {time}"));
    }
    Ok(StreamRecord { time, fact })
}
