//! S-expression reader for the KiCad board file format.
//!
//! KiCad files are nested parenthesized forms. Atoms are either bare symbols
//! (`segment`, `F.Cu`), quoted strings with backslash escapes (`"Net 1"`),
//! or numbers (`1.27`, `-3`). The reader keeps the source line of every node
//! so later stages can point at the offending form, and it never panics on
//! malformed input: every byte is either consumed or reported as an error.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unbalanced parenthesis at line {0}")]
    UnbalancedParen(usize),
    #[error("unterminated string starting at line {0}")]
    UnterminatedString(usize),
    #[error("document contains no forms")]
    EmptyDocument,
    #[error("unexpected content after the first form at line {0}")]
    TrailingContent(usize),
}

/// One node of the parsed tree, tagged with the line it started on.
#[derive(Debug, Clone, PartialEq)]
pub struct SExpr {
    pub value: Value,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    List(Vec<SExpr>),
    Symbol(String),
    /// A quoted string, stored unescaped.
    Str(String),
    /// A numeric atom; the original spelling is kept for diagnostics.
    Number { value: f64, text: String },
}

impl SExpr {
    pub fn as_list(&self) -> Option<&[SExpr]> {
        match &self.value {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    /// Text content of a Symbol or Str atom. KiCad quotes layer and net
    /// names inconsistently across versions, so most lookups accept both.
    pub fn as_str(&self) -> Option<&str> {
        match &self.value {
            Value::Symbol(s) | Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match &self.value {
            Value::Number { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Text of any atom. Numbers yield their original spelling, so pad
    /// numbers written as `(pad 1 ...)` and `(pad "1" ...)` read the same.
    pub fn atom_text(&self) -> Option<&str> {
        match &self.value {
            Value::Symbol(s) | Value::Str(s) => Some(s),
            Value::Number { text, .. } => Some(text),
            Value::List(_) => None,
        }
    }

    /// Head symbol of a list node, e.g. `segment` for `(segment ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_str()
    }

    /// True for list nodes whose head symbol is `name`.
    pub fn is_form(&self, name: &str) -> bool {
        self.head() == Some(name)
    }

    /// All child forms `(name ...)` of this list node.
    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SExpr> {
        self.as_list()
            .unwrap_or(&[])
            .iter()
            .filter(move |n| n.is_form(name))
    }

    /// First child form `(name ...)` of this list node.
    pub fn child_named<'a>(&'a self, name: &str) -> Option<&'a SExpr> {
        self.as_list()
            .unwrap_or(&[])
            .iter()
            .find(|n| n.is_form(name))
    }

    /// Positional argument `idx` (0 = the element right after the head).
    pub fn arg(&self, idx: usize) -> Option<&SExpr> {
        self.as_list()?.get(idx + 1)
    }

    /// Renders the tree back to text. Numbers use the shortest decimal
    /// spelling that round-trips through f64, so reparsing the output
    /// reproduces the same numeric values.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    fn write_canonical(&self, out: &mut String) {
        match &self.value {
            Value::List(items) => {
                out.push('(');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    item.write_canonical(out);
                }
                out.push(')');
            }
            Value::Symbol(s) => out.push_str(s),
            Value::Str(s) => {
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
            }
            Value::Number { value, .. } => {
                let _ = write!(out, "{value}");
            }
        }
    }
}

/// Parses a complete document and returns its single top-level form.
pub fn parse_sexpr(text: &str) -> Result<SExpr, ParseError> {
    let mut tokens = Tokenizer::new(text);
    // Frames of open lists; each carries the line of its opening paren.
    let mut stack: Vec<(usize, Vec<SExpr>)> = Vec::new();
    let mut root: Option<SExpr> = None;

    while let Some(token) = tokens.next()? {
        if root.is_some() && !matches!(token, Token::RParen(_)) {
            return Err(ParseError::TrailingContent(token.line()));
        }
        let completed = match token {
            Token::LParen(line) => {
                stack.push((line, Vec::new()));
                None
            }
            Token::RParen(line) => match stack.pop() {
                Some((open_line, items)) => Some(SExpr {
                    value: Value::List(items),
                    line: open_line,
                }),
                None => return Err(ParseError::UnbalancedParen(line)),
            },
            Token::Atom { text, line } => Some(SExpr {
                value: classify_atom(&text),
                line,
            }),
            Token::Str { text, line } => Some(SExpr {
                value: Value::Str(text),
                line,
            }),
        };
        if let Some(node) = completed {
            match stack.last_mut() {
                Some((_, items)) => items.push(node),
                None => root = Some(node),
            }
        }
    }

    if let Some((open_line, _)) = stack.last() {
        return Err(ParseError::UnbalancedParen(*open_line));
    }
    root.ok_or(ParseError::EmptyDocument)
}

/// An atom is a Number exactly when it is spelled like a decimal literal.
/// Plain `f64` parsing alone would also accept `inf` and `nan`, which must
/// stay symbols.
fn classify_atom(text: &str) -> Value {
    let numeric_shape = text.bytes().any(|b| b.is_ascii_digit())
        && text
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E'));
    if numeric_shape {
        if let Ok(value) = text.parse::<f64>() {
            return Value::Number {
                value,
                text: text.to_string(),
            };
        }
    }
    Value::Symbol(text.to_string())
}

enum Token {
    LParen(usize),
    RParen(usize),
    Atom { text: String, line: usize },
    Str { text: String, line: usize },
}

impl Token {
    fn line(&self) -> usize {
        match self {
            Token::LParen(line) | Token::RParen(line) => *line,
            Token::Atom { line, .. } | Token::Str { line, .. } => *line,
        }
    }
}

struct Tokenizer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(text: &'a str) -> Self {
        Tokenizer {
            chars: text.chars().peekable(),
            line: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c == Some('\n') {
            self.line += 1;
        }
        c
    }

    fn next(&mut self) -> Result<Option<Token>, ParseError> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('(') => {
                    let line = self.line;
                    self.bump();
                    return Ok(Some(Token::LParen(line)));
                }
                Some(')') => {
                    let line = self.line;
                    self.bump();
                    return Ok(Some(Token::RParen(line)));
                }
                Some('"') => {
                    let line = self.line;
                    self.bump();
                    return Ok(Some(Token::Str {
                        text: self.read_string(line)?,
                        line,
                    }));
                }
                Some(_) => {
                    let line = self.line;
                    let mut text = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                            break;
                        }
                        text.push(c);
                        self.bump();
                    }
                    return Ok(Some(Token::Atom { text, line }));
                }
            }
        }
    }

    fn read_string(&mut self, start_line: usize) -> Result<String, ParseError> {
        let mut text = String::new();
        loop {
            match self.bump() {
                None => return Err(ParseError::UnterminatedString(start_line)),
                Some('"') => return Ok(text),
                Some('\\') => match self.bump() {
                    None => return Err(ParseError::UnterminatedString(start_line)),
                    Some('n') => text.push('\n'),
                    Some('t') => text.push('\t'),
                    Some('r') => text.push('\r'),
                    // Unknown escapes pass the character through; KiCad
                    // only ever emits \" and \\ but older exporters vary.
                    Some(c) => text.push(c),
                },
                Some(c) => text.push(c),
            }
        }
    }
}
