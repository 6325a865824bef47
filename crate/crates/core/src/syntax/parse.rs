//! Concrete syntax.
//!
//! ```text
//! T ::= end | X | rec X . T
//!     | ?[T, ..., T].T | ![T, ..., T].T
//!     | +{ l: T, ..., l: T } | &{ l: T, ..., l: T }
//!     | ( T )
//! ```
//!
//! Variables start with an uppercase letter, labels with a lowercase one.
//! `#` starts a comment that runs to the end of the line.

use std::fmt;

use super::{chain_is_contractive, is_ident_rest, render, Label, SessionType, SyntaxError, Var};

const MAX_NESTING: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Parse a closed or open session type, rejecting non-contractive recursion,
/// duplicate labels and empty payload or branch lists.
pub fn parse(text: &str) -> Result<SessionType, SyntaxError> {
    Parser::new(text, true).parse_all()
}

/// Like [`parse`] but accepts non-contractive recursion.
///
/// Terms obtained this way must not be handed to `unfold` or to the
/// decision procedures.
pub fn parse_unchecked(text: &str) -> Result<SessionType, SyntaxError> {
    Parser::new(text, false).parse_all()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Sym(char),
    Eof,
}

struct Parser<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
    binders: Vec<&'a str>,
    depth: usize,
    check_contractive: bool,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, check_contractive: bool) -> Self {
        Parser { src, offset: 0, line: 1, column: 1, binders: Vec::new(), depth: 0, check_contractive }
    }

    fn pos(&self) -> Position {
        Position { line: self.line, column: self.column }
    }

    fn error<T>(&self, pos: Position, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::Parse { pos, message: message.into() })
    }

    fn bump(&mut self, c: char) {
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
    }

    fn skip_trivia(&mut self) {
        let mut in_comment = false;
        while let Some(c) = self.src[self.offset..].chars().next() {
            if in_comment {
                in_comment = c != '\n';
            } else if c == '#' {
                in_comment = true;
            } else if !c.is_whitespace() {
                break;
            }
            self.bump(c);
        }
    }

    /// Next token and its start position, without consuming it.
    fn peek(&mut self) -> (Tok<'a>, Position) {
        self.skip_trivia();
        let pos = self.pos();
        let rest = &self.src[self.offset..];
        let tok = match rest.chars().next() {
            None => Tok::Eof,
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let len = rest.find(|c: char| !is_ident_rest(c)).unwrap_or(rest.len());
                Tok::Ident(&rest[..len])
            }
            Some(c) => Tok::Sym(c),
        };
        (tok, pos)
    }

    fn next(&mut self) -> (Tok<'a>, Position) {
        let (tok, pos) = self.peek();
        match &tok {
            Tok::Ident(s) => s.chars().for_each(|c| self.bump(c)),
            Tok::Sym(c) => self.bump(*c),
            Tok::Eof => {}
        }
        (tok, pos)
    }

    fn expect(&mut self, sym: char) -> Result<Position, SyntaxError> {
        match self.next() {
            (Tok::Sym(c), pos) if c == sym => Ok(pos),
            (tok, pos) => self.error(pos, format!("expected `{sym}`, found {}", describe(&tok))),
        }
    }

    fn parse_all(mut self) -> Result<SessionType, SyntaxError> {
        let t = self.parse_type()?;
        match self.next() {
            (Tok::Eof, _) => Ok(t),
            (tok, pos) => self.error(pos, format!("unexpected {} after type", describe(&tok))),
        }
    }

    fn parse_type(&mut self) -> Result<SessionType, SyntaxError> {
        if self.depth >= MAX_NESTING {
            let pos = self.peek().1;
            return self.error(pos, "type nested too deeply");
        }
        self.depth += 1;
        let t = self.parse_type_inner();
        self.depth -= 1;
        t
    }

    fn parse_type_inner(&mut self) -> Result<SessionType, SyntaxError> {
        let (tok, pos) = self.next();
        match tok {
            Tok::Ident("end") => Ok(SessionType::end()),
            Tok::Ident("rec") => self.parse_rec(pos),
            Tok::Ident(name) if name.starts_with(|c: char| c.is_ascii_uppercase()) => Ok(self.variable(name)),
            Tok::Sym('?') => {
                let (payloads, cont) = self.parse_message(pos)?;
                SessionType::input(payloads, cont).map_err(|e| with_pos(e, pos))
            }
            Tok::Sym('!') => {
                let (payloads, cont) = self.parse_message(pos)?;
                SessionType::output(payloads, cont).map_err(|e| with_pos(e, pos))
            }
            Tok::Sym('+') => {
                let branches = self.parse_choice()?;
                SessionType::select(branches).map_err(|e| with_pos(e, pos))
            }
            Tok::Sym('&') => {
                let branches = self.parse_choice()?;
                SessionType::branch(branches).map_err(|e| with_pos(e, pos))
            }
            Tok::Sym('(') => {
                let t = self.parse_type()?;
                self.expect(')')?;
                Ok(t)
            }
            tok => self.error(pos, format!("expected a session type, found {}", describe(&tok))),
        }
    }

    fn variable(&self, name: &str) -> SessionType {
        if let Some(index) = self.binders.iter().rev().position(|b| *b == name) {
            return SessionType::bound(index as u32);
        }
        super::intern::make(super::Shape::Var(Var::Free(name.into())))
    }

    fn parse_rec(&mut self, pos: Position) -> Result<SessionType, SyntaxError> {
        let name = match self.next() {
            (Tok::Ident(n), _) if n.starts_with(|c: char| c.is_ascii_uppercase()) => n,
            (tok, p) => {
                return self
                    .error(p, format!("expected a type variable after `rec`, found {}", describe(&tok)))
            }
        };
        self.expect('.')?;
        self.binders.push(name);
        let body = self.parse_type();
        self.binders.pop();
        let t = SessionType::rec_nameless(body?);
        if self.check_contractive && !chain_is_contractive(&t) {
            return Err(SyntaxError::NotContractive { pos: Some(pos), term: render(&t) });
        }
        Ok(t)
    }

    fn parse_message(&mut self, pos: Position) -> Result<(Vec<SessionType>, SessionType), SyntaxError> {
        self.expect('[')?;
        let mut payloads = Vec::new();
        if !matches!(self.peek().0, Tok::Sym(']')) {
            loop {
                payloads.push(self.parse_type()?);
                match self.next() {
                    (Tok::Sym(','), _) if matches!(self.peek().0, Tok::Sym(']')) => {
                        self.next();
                        break;
                    }
                    (Tok::Sym(','), _) => continue,
                    (Tok::Sym(']'), _) => break,
                    (tok, p) => {
                        return self.error(p, format!("expected `,` or `]`, found {}", describe(&tok)))
                    }
                }
            }
        } else {
            self.next();
        }
        if payloads.is_empty() {
            return Err(SyntaxError::EmptyArity { pos: Some(pos), what: "payload list" });
        }
        self.expect('.')?;
        let cont = self.parse_type()?;
        Ok((payloads, cont))
    }

    fn parse_choice(&mut self) -> Result<Vec<(Label, SessionType)>, SyntaxError> {
        let open = self.expect('{')?;
        let mut branches: Vec<(Label, SessionType)> = Vec::new();
        loop {
            let (tok, pos) = self.next();
            let label = match tok {
                Tok::Sym('}') => break,
                Tok::Ident(l) => {
                    Label::new(l).or_else(|_| self.error(pos, format!("`{l}` is not a valid label")))?
                }
                tok => return self.error(pos, format!("expected a label, found {}", describe(&tok))),
            };
            if branches.iter().any(|(l, _)| *l == label) {
                return Err(SyntaxError::DuplicateLabel { pos: Some(pos), label: label.to_string() });
            }
            self.expect(':')?;
            branches.push((label, self.parse_type()?));
            match self.next() {
                (Tok::Sym(','), _) => continue,
                (Tok::Sym('}'), _) => break,
                (tok, p) => return self.error(p, format!("expected `,` or `}}`, found {}", describe(&tok))),
            }
        }
        if branches.is_empty() {
            return Err(SyntaxError::EmptyArity { pos: Some(open), what: "label set" });
        }
        Ok(branches)
    }
}

fn with_pos(e: SyntaxError, at: Position) -> SyntaxError {
    match e {
        SyntaxError::EmptyArity { pos: None, what } => SyntaxError::EmptyArity { pos: Some(at), what },
        SyntaxError::DuplicateLabel { pos: None, label } => {
            SyntaxError::DuplicateLabel { pos: Some(at), label }
        }
        e => e,
    }
}

fn describe(tok: &Tok<'_>) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".to_string(),
    }
}
