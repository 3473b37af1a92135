//! Tokenizer shared by the model and rule-library parsers.
//!
//! Both surface languages use the same lexical conventions: `--` line
//! comments, double-quoted strings with backslash escapes, and the operator
//! set below. Maximal munch applies, so `**`, `::`, `->`, `=>`, `<=`, `>=`
//! and `<>` are single tokens.

use crate::span::Span;
use std::fmt;
use thiserror::Error;

/// Syntax error with a 1-based source position.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    pub fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    ColonColon,
    Dot,
    Semi,
    Arrow,    // ->
    Implies,  // =>
    Le,       // <= (clause arrow and comparison)
    Lt,
    Ge,
    Gt,
    Eq,       // =
    Ne,       // <>
    Plus,
    Minus,
    Star,
    StarStar, // ** (claim text delimiter)
    Slash,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Int(v) => write!(f, "integer `{v}`"),
            TokenKind::Real(v) => write!(f, "real `{v}`"),
            TokenKind::Str(_) => write!(f, "string literal"),
            TokenKind::LBrace => write!(f, "`{{`"),
            TokenKind::RBrace => write!(f, "`}}`"),
            TokenKind::LParen => write!(f, "`(`"),
            TokenKind::RParen => write!(f, "`)`"),
            TokenKind::LBracket => write!(f, "`[`"),
            TokenKind::RBracket => write!(f, "`]`"),
            TokenKind::Comma => write!(f, "`,`"),
            TokenKind::Colon => write!(f, "`:`"),
            TokenKind::ColonColon => write!(f, "`::`"),
            TokenKind::Dot => write!(f, "`.`"),
            TokenKind::Semi => write!(f, "`;`"),
            TokenKind::Arrow => write!(f, "`->`"),
            TokenKind::Implies => write!(f, "`=>`"),
            TokenKind::Le => write!(f, "`<=`"),
            TokenKind::Lt => write!(f, "`<`"),
            TokenKind::Ge => write!(f, "`>=`"),
            TokenKind::Gt => write!(f, "`>`"),
            TokenKind::Eq => write!(f, "`=`"),
            TokenKind::Ne => write!(f, "`<>`"),
            TokenKind::Plus => write!(f, "`+`"),
            TokenKind::Minus => write!(f, "`-`"),
            TokenKind::Star => write!(f, "`*`"),
            TokenKind::StarStar => write!(f, "`**`"),
            TokenKind::Slash => write!(f, "`/`"),
            TokenKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

/// Tokenize an entire source text. The result always ends with an `Eof`
/// token carrying the position just past the input.
pub fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia();
        let span = Span::new(lx.line, lx.col);
        if lx.at_end() {
            out.push(Token {
                kind: TokenKind::Eof,
                span,
            });
            return Ok(out);
        }
        let kind = lx.next_token(span)?;
        out.push(Token { kind, span });
    }
}

impl<'a> Lexer<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> u8 {
        if self.at_end() {
            0
        } else {
            self.src[self.pos]
        }
    }

    fn peek2(&self) -> u8 {
        if self.pos + 1 >= self.src.len() {
            0
        } else {
            self.src[self.pos + 1]
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn skip_trivia(&mut self) {
        loop {
            while !self.at_end() && self.peek().is_ascii_whitespace() {
                self.bump();
            }
            if self.peek() == b'-' && self.peek2() == b'-' {
                while !self.at_end() && self.peek() != b'\n' {
                    self.bump();
                }
            } else {
                return;
            }
        }
    }

    fn next_token(&mut self, span: Span) -> Result<TokenKind, ParseError> {
        let c = self.peek();
        if c.is_ascii_alphabetic() || c == b'_' {
            return Ok(self.ident());
        }
        if c.is_ascii_digit() {
            return self.number(span);
        }
        if c == b'"' {
            return self.string(span);
        }
        self.bump();
        let two = |lx: &mut Lexer<'a>, kind: TokenKind| {
            lx.bump();
            Ok(kind)
        };
        match c {
            b'{' => Ok(TokenKind::LBrace),
            b'}' => Ok(TokenKind::RBrace),
            b'(' => Ok(TokenKind::LParen),
            b')' => Ok(TokenKind::RParen),
            b'[' => Ok(TokenKind::LBracket),
            b']' => Ok(TokenKind::RBracket),
            b',' => Ok(TokenKind::Comma),
            b';' => Ok(TokenKind::Semi),
            b'.' => Ok(TokenKind::Dot),
            b'+' => Ok(TokenKind::Plus),
            b'/' => Ok(TokenKind::Slash),
            b':' if self.peek() == b':' => two(self, TokenKind::ColonColon),
            b':' => Ok(TokenKind::Colon),
            b'-' if self.peek() == b'>' => two(self, TokenKind::Arrow),
            b'-' => Ok(TokenKind::Minus),
            b'=' if self.peek() == b'>' => two(self, TokenKind::Implies),
            b'=' => Ok(TokenKind::Eq),
            b'<' if self.peek() == b'=' => two(self, TokenKind::Le),
            b'<' if self.peek() == b'>' => two(self, TokenKind::Ne),
            b'<' => Ok(TokenKind::Lt),
            b'>' if self.peek() == b'=' => two(self, TokenKind::Ge),
            b'>' => Ok(TokenKind::Gt),
            b'*' if self.peek() == b'*' => two(self, TokenKind::StarStar),
            b'*' => Ok(TokenKind::Star),
            _ => Err(ParseError::new(
                span,
                format!("unexpected character `{}`", c as char),
            )),
        }
    }

    fn ident(&mut self) -> TokenKind {
        let start = self.pos;
        while !self.at_end() && (self.peek().is_ascii_alphanumeric() || self.peek() == b'_') {
            self.bump();
        }
        TokenKind::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self, span: Span) -> Result<TokenKind, ParseError> {
        let start = self.pos;
        while self.peek().is_ascii_digit() {
            self.bump();
        }
        // A dot makes this a real only when a digit follows; `1.x` is the
        // integer 1 followed by a path dot.
        if self.peek() == b'.' && self.peek2().is_ascii_digit() {
            self.bump();
            while self.peek().is_ascii_digit() {
                self.bump();
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let v: f64 = text
                .parse()
                .map_err(|_| ParseError::new(span, format!("invalid real literal `{text}`")))?;
            Ok(TokenKind::Real(v))
        } else {
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let v: i64 = text.parse().map_err(|_| {
                ParseError::new(span, format!("integer literal `{text}` out of range"))
            })?;
            Ok(TokenKind::Int(v))
        }
    }

    fn string(&mut self, span: Span) -> Result<TokenKind, ParseError> {
        self.bump(); // opening quote
        let mut out = String::new();
        loop {
            if self.at_end() || self.peek() == b'\n' {
                return Err(ParseError::new(span, "unterminated string literal"));
            }
            let c = self.bump();
            match c {
                b'"' => return Ok(TokenKind::Str(out)),
                b'\\' => {
                    if self.at_end() {
                        return Err(ParseError::new(span, "unterminated string literal"));
                    }
                    let esc = self.bump();
                    match esc {
                        b'"' => out.push('"'),
                        b'\\' => out.push('\\'),
                        b'n' => out.push('\n'),
                        b't' => out.push('\t'),
                        b'r' => out.push('\r'),
                        other => {
                            return Err(ParseError::new(
                                span,
                                format!("unknown escape `\\{}`", other as char),
                            ))
                        }
                    }
                }
                _ => {
                    // Re-decode multi-byte UTF-8 sequences byte by byte.
                    out.push(c as char);
                    if c >= 0x80 {
                        let mut bytes = vec![c];
                        while !self.at_end() && self.peek() >= 0x80 && self.peek() < 0xC0 {
                            bytes.push(self.bump());
                        }
                        out.pop();
                        out.push_str(&String::from_utf8_lossy(&bytes));
                    }
                }
            }
        }
    }
}

/// Escape a string for re-emission as a source literal.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}
