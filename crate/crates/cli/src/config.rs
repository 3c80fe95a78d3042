//! Self-describing nested key-value configuration format.
//!
//! One file fully determines a run, including the seed. The grammar is a
//! small strict subset of the usual key-value conventions:
//!
//! ```text
//! # comment to end of line
//! fixture = "lasso2d"
//! step = 1.0
//! radii = [0.1, 0.05, 0.01]
//! stratification = { on = 0.4, off = 0.4, mixed = 0.2 }
//! ```
//!
//! Values are strings (double-quoted, with \\ \" \n \t \r escapes), finite
//! numbers, `true`/`false`, arrays, and tables. Keys are bare
//! `[A-Za-z0-9_-]` identifiers or quoted strings. Entries are separated by
//! newlines or commas; trailing separators are fine. Duplicate keys and
//! non-finite numbers are errors, and nesting is capped so malformed input
//! cannot recurse unboundedly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigValue {
    Str(String),
    Num(f64),
    Bool(bool),
    Array(Vec<ConfigValue>),
    Table(BTreeMap<String, ConfigValue>),
}

impl ConfigValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            ConfigValue::Str(_) => "string",
            ConfigValue::Num(_) => "number",
            ConfigValue::Bool(_) => "boolean",
            ConfigValue::Array(_) => "array",
            ConfigValue::Table(_) => "table",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("malformed config at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config key `{key}`: {message}")]
    Key { key: String, message: String },
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn key(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Key {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Sep,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, usize)>, ConfigError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            match c {
                ' ' | '\t' | '\r' => {
                    self.chars.next();
                }
                '\n' => {
                    self.chars.next();
                    self.line += 1;
                    if !matches!(out.last(), Some((Tok::Sep, _)) | None) {
                        out.push((Tok::Sep, self.line));
                    }
                }
                '#' => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                '{' => self.push_single(&mut out, Tok::LBrace),
                '}' => self.push_single(&mut out, Tok::RBrace),
                '[' => self.push_single(&mut out, Tok::LBracket),
                ']' => self.push_single(&mut out, Tok::RBracket),
                ',' => self.push_single(&mut out, Tok::Comma),
                '=' => self.push_single(&mut out, Tok::Eq),
                '"' => {
                    let s = self.string()?;
                    out.push((Tok::Str(s), self.line));
                }
                c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                    let n = self.number()?;
                    out.push((Tok::Num(n), self.line));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut ident = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                            ident.push(c);
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Ident(ident), self.line));
                }
                other => {
                    return Err(ConfigError::at(
                        self.line,
                        format!("unexpected character {other:?}"),
                    ))
                }
            }
        }
        Ok(out)
    }

    fn push_single(&mut self, out: &mut Vec<(Tok, usize)>, tok: Tok) {
        self.chars.next();
        out.push((tok, self.line));
    }

    fn string(&mut self) -> Result<String, ConfigError> {
        self.chars.next(); // opening quote
        let mut s = String::new();
        loop {
            match self.chars.next() {
                None => return Err(ConfigError::at(self.line, "unterminated string")),
                Some('"') => return Ok(s),
                Some('\n') => return Err(ConfigError::at(self.line, "newline in string")),
                Some('\\') => match self.chars.next() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    other => {
                        return Err(ConfigError::at(
                            self.line,
                            format!("invalid escape {other:?}"),
                        ))
                    }
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self) -> Result<f64, ConfigError> {
        let mut text = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E') {
                text.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        let value: f64 = text
            .parse()
            .map_err(|_| ConfigError::at(self.line, format!("invalid number `{text}`")))?;
        if !value.is_finite() {
            return Err(ConfigError::at(self.line, "non-finite number"));
        }
        Ok(value)
    }
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|(_, l)| *l)
            .unwrap_or(1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn skip_seps(&mut self) {
        while matches!(self.peek(), Some(Tok::Sep)) {
            self.pos += 1;
        }
    }

    /// One or more separators (newline or comma).
    fn separators(&mut self) -> bool {
        let mut seen = false;
        while matches!(self.peek(), Some(Tok::Sep) | Some(Tok::Comma)) {
            self.pos += 1;
            seen = true;
        }
        seen
    }

    fn key(&mut self) -> Result<String, ConfigError> {
        match self.next() {
            Some(Tok::Ident(k)) => Ok(k),
            Some(Tok::Str(k)) => Ok(k),
            other => Err(ConfigError::at(
                self.line(),
                format!("expected a key, found {other:?}"),
            )),
        }
    }

    fn pair(
        &mut self,
        map: &mut BTreeMap<String, ConfigValue>,
        depth: usize,
    ) -> Result<(), ConfigError> {
        let line = self.line();
        let key = self.key()?;
        match self.next() {
            Some(Tok::Eq) => {}
            other => {
                return Err(ConfigError::at(
                    line,
                    format!("expected `=` after key `{key}`, found {other:?}"),
                ))
            }
        }
        self.skip_seps();
        let value = self.value(depth)?;
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::at(line, format!("duplicate key `{key}`")));
        }
        Ok(())
    }

    fn value(&mut self, depth: usize) -> Result<ConfigValue, ConfigError> {
        if depth > MAX_DEPTH {
            return Err(ConfigError::at(self.line(), "nesting too deep"));
        }
        let line = self.line();
        match self.next() {
            Some(Tok::Str(s)) => Ok(ConfigValue::Str(s)),
            Some(Tok::Num(n)) => Ok(ConfigValue::Num(n)),
            Some(Tok::Ident(id)) => match id.as_str() {
                "true" => Ok(ConfigValue::Bool(true)),
                "false" => Ok(ConfigValue::Bool(false)),
                other => Err(ConfigError::at(
                    line,
                    format!("expected a value, found bare word `{other}`"),
                )),
            },
            Some(Tok::LBracket) => {
                let mut items = Vec::new();
                self.skip_seps();
                if matches!(self.peek(), Some(Tok::RBracket)) {
                    self.pos += 1;
                    return Ok(ConfigValue::Array(items));
                }
                loop {
                    items.push(self.value(depth + 1)?);
                    let had_sep = self.separators();
                    if matches!(self.peek(), Some(Tok::RBracket)) {
                        self.pos += 1;
                        return Ok(ConfigValue::Array(items));
                    }
                    if !had_sep {
                        return Err(ConfigError::at(self.line(), "expected `,` or `]` in array"));
                    }
                    if self.peek().is_none() {
                        return Err(ConfigError::at(self.line(), "unterminated array"));
                    }
                }
            }
            Some(Tok::LBrace) => {
                let mut map = BTreeMap::new();
                self.skip_seps();
                if matches!(self.peek(), Some(Tok::RBrace)) {
                    self.pos += 1;
                    return Ok(ConfigValue::Table(map));
                }
                loop {
                    self.pair(&mut map, depth + 1)?;
                    let had_sep = self.separators();
                    if matches!(self.peek(), Some(Tok::RBrace)) {
                        self.pos += 1;
                        return Ok(ConfigValue::Table(map));
                    }
                    if !had_sep {
                        return Err(ConfigError::at(self.line(), "expected `,` or `}` in table"));
                    }
                    if self.peek().is_none() {
                        return Err(ConfigError::at(self.line(), "unterminated table"));
                    }
                }
            }
            other => Err(ConfigError::at(
                line,
                format!("expected a value, found {other:?}"),
            )),
        }
    }
}

/// Parse a configuration document into its top-level key-value table.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, ConfigValue>, ConfigError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut map = BTreeMap::new();
    parser.skip_seps();
    while parser.peek().is_some() {
        parser.pair(&mut map, 0)?;
        if parser.peek().is_some() && !parser.separators() {
            return Err(ConfigError::at(
                parser.line(),
                "expected newline or `,` between entries",
            ));
        }
        parser.skip_seps();
    }
    Ok(map)
}

fn valid_bare_key(k: &str) -> bool {
    !k.is_empty()
        && k.chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && k.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && k != "true"
        && k != "false"
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn write_value(out: &mut String, v: &ConfigValue) {
    match v {
        ConfigValue::Str(s) => {
            let _ = write!(out, "\"{}\"", escape(s));
        }
        ConfigValue::Num(n) => {
            let _ = write!(out, "{n}");
        }
        ConfigValue::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ConfigValue::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, item);
            }
            out.push(']');
        }
        ConfigValue::Table(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                out.push_str(if i > 0 { ", " } else { " " });
                if valid_bare_key(k) {
                    out.push_str(k);
                } else {
                    let _ = write!(out, "\"{}\"", escape(k));
                }
                out.push_str(" = ");
                write_value(out, v);
            }
            out.push_str(if map.is_empty() { "}" } else { " }" });
        }
    }
}

/// Canonical serialization: one top-level entry per line, sorted keys.
/// `parse_config(serialize_config(&m)) == m` for every representable map.
pub fn serialize_config(map: &BTreeMap<String, ConfigValue>) -> String {
    let mut out = String::new();
    for (k, v) in map {
        if valid_bare_key(k) {
            out.push_str(k);
        } else {
            let _ = write!(out, "\"{}\"", escape(k));
        }
        out.push_str(" = ");
        write_value(&mut out, v);
        out.push('\n');
    }
    out
}
