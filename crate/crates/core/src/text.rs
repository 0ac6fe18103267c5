//! Shared tokenizer for the tree, pattern and rule text formats.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Bare(String),
    Quoted(String),
    /// `?name`, `$name` or `@name`.
    Sigil(char, String),
    LParen,
    RParen,
    Comma,
    Arrow,
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn is_bare_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn is_bare_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_bare_char)
}

/// Writes a label, quoting it when it is not a bare identifier.
pub(crate) fn write_label(out: &mut String, label: &str) {
    if is_bare_label(label) {
        out.push_str(label);
    } else {
        out.push('"');
        for c in label.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: l,
                column: col,
            })
        };
        match c {
            c if c.is_whitespace() => {
                bump!();
            }
            '(' => {
                bump!();
                push(&mut out, Tok::LParen);
            }
            ')' => {
                bump!();
                push(&mut out, Tok::RParen);
            }
            ',' => {
                bump!();
                push(&mut out, Tok::Comma);
            }
            '~' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    push(&mut out, Tok::Arrow);
                } else {
                    return Err(ParseError::new(l, col, "expected '~>'"));
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(ParseError::new(l, col, "unterminated quoted label")),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            Some(other) => {
                                return Err(ParseError::new(
                                    line,
                                    column - 1,
                                    format!("invalid escape '\\{other}'"),
                                ))
                            }
                            None => {
                                return Err(ParseError::new(l, col, "unterminated quoted label"))
                            }
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                if s.is_empty() {
                    return Err(ParseError::new(l, col, "labels must be non-empty"));
                }
                push(&mut out, Tok::Quoted(s));
            }
            '?' | '$' | '@' => {
                bump!();
                let mut name = String::new();
                while let Some(&n) = chars.peek() {
                    if is_bare_char(n) {
                        name.push(n);
                        bump!();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(ParseError::new(
                        l,
                        col,
                        format!("malformed sigil '{c}': expected a variable name"),
                    ));
                }
                push(&mut out, Tok::Sigil(c, name));
            }
            c if is_bare_char(c) => {
                let mut s = String::new();
                while let Some(&n) = chars.peek() {
                    if is_bare_char(n) {
                        s.push(n);
                        bump!();
                    } else {
                        break;
                    }
                }
                push(&mut out, Tok::Bare(s));
            }
            other => {
                return Err(ParseError::new(
                    l,
                    col,
                    format!("unexpected character '{other}'"),
                ))
            }
        }
    }
    Ok(out)
}

/// Cursor over a token stream with end-of-input locations.
pub(crate) struct Cursor<'a> {
    toks: &'a [Spanned],
    idx: usize,
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Spanned], text: &str) -> Self {
        let line = text.lines().count().max(1);
        let column = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
        Cursor {
            toks,
            idx: 0,
            end: (line, column),
        }
    }

    pub fn peek(&self) -> Option<&'a Spanned> {
        self.toks.get(self.idx)
    }

    pub fn next(&mut self) -> Option<&'a Spanned> {
        let t = self.toks.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn error_here(&self, message: impl Into<String>) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(t.line, t.column, message),
            None => ParseError::new(self.end.0, self.end.1, message),
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if &t.tok == tok => {
                self.idx += 1;
                Ok(())
            }
            _ => Err(self.error_here(format!("expected {what}"))),
        }
    }
}

/// Generic recursive-descent parser for `label | label "(" item ("," item)* ")"`.
pub(crate) fn parse_nested<L>(
    cur: &mut Cursor<'_>,
    leaf: &mut impl FnMut(&Spanned) -> Result<L, ParseError>,
) -> Result<(L, Vec<Nested<L>>), ParseError> {
    let head = cur
        .next()
        .ok_or_else(|| cur.error_here("expected a label"))?;
    let label = leaf(head)?;
    let mut children = Vec::new();
    if matches!(cur.peek(), Some(Spanned { tok: Tok::LParen, .. })) {
        cur.next();
        loop {
            let (l, c) = parse_nested(cur, leaf)?;
            children.push(Nested {
                label: l,
                children: c,
                line: head.line,
                column: head.column,
            });
            match cur.next() {
                Some(Spanned { tok: Tok::Comma, .. }) => continue,
                Some(Spanned { tok: Tok::RParen, .. }) => break,
                Some(t) => {
                    return Err(ParseError::new(t.line, t.column, "expected ',' or ')'"));
                }
                None => return Err(cur.error_here("expected ',' or ')'")),
            }
        }
    }
    Ok((label, children))
}

pub(crate) struct Nested<L> {
    pub label: L,
    pub children: Vec<Nested<L>>,
    #[allow(dead_code)]
    pub line: usize,
    #[allow(dead_code)]
    pub column: usize,
}
