//! Propositional formulas as syntax trees, and formula-pair datasets.
//!
//! Connectives become the labels `not`, `and`, `or`, `imp` and `iff`; the
//! constants `0`/`false` and `1`/`true` become `false` and `true`. Binding
//! strength decreases from `!` over `&`, `|` and `->` to `<->`. `&` and `|`
//! group to the left, `->` to the right, and `<->` does not chain.

use std::collections::HashMap;

use crate::error::{ParseError, Result};
use crate::tree::Tree;

const CONNECTIVES: [&str; 5] = ["not", "and", "or", "imp", "iff"];
const CONSTANTS: [&str; 2] = ["false", "true"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FormulaOptions {
    /// Collect unparenthesised chains of `&` or `|` into one node.
    pub nary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Var(String),
    Const(&'static str),
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| ParseError::new(1, col + 1, msg);
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '→' => Tok::Imp,
            '↔' => Tok::Iff,
            '0' => Tok::Const("false"),
            '1' => Tok::Const("true"),
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Imp
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() => {
                while i + 1 < chars.len() && chars[i + 1].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word: String = chars[start..=i].iter().collect();
                match word.as_str() {
                    "true" => Tok::Const("true"),
                    "false" => Tok::Const("false"),
                    w if w.starts_with(|c: char| c.is_ascii_uppercase()) => Tok::Var(word),
                    _ => return Err(err(start, format!("'{word}' is not a variable; variables start with an upper-case letter"))),
                }
            }
            c => return Err(err(start, format!("unexpected character '{c}'"))),
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    opts: FormulaOptions,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, c)| *c) + 1
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(1, self.col(), msg)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Tree, ParseError> {
        let left = self.imp()?;
        if !self.eat(&Tok::Iff) {
            return Ok(left);
        }
        let right = self.imp()?;
        if self.peek() == Some(&Tok::Iff) {
            return Err(self.error("chained '<->' is ambiguous; add parentheses"));
        }
        Ok(Tree::new("iff", vec![left, right]))
    }

    fn imp(&mut self) -> Result<Tree, ParseError> {
        let left = self.binary(&Tok::Or, "or", Self::and)?;
        if self.eat(&Tok::Imp) {
            let right = self.imp()?;
            return Ok(Tree::new("imp", vec![left, right]));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Tree, ParseError> {
        self.binary(&Tok::And, "and", Self::unary)
    }

    fn binary(
        &mut self,
        op: &Tok,
        label: &str,
        next: fn(&mut Self) -> Result<Tree, ParseError>,
    ) -> Result<Tree, ParseError> {
        let mut operands = vec![next(self)?];
        while self.eat(op) {
            operands.push(next(self)?);
        }
        if operands.len() == 1 {
            return Ok(operands.pop().expect("one operand"));
        }
        if self.opts.nary {
            return Ok(Tree::new(label, operands));
        }
        let mut it = operands.into_iter();
        let mut acc = it.next().expect("operand");
        for o in it {
            acc = Tree::new(label, vec![acc, o]);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Tree, ParseError> {
        if self.eat(&Tok::Not) {
            return Ok(Tree::new("not", vec![self.unary()?]));
        }
        match self.peek().cloned() {
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(Tree::leaf(v))
            }
            Some(Tok::Const(c)) => {
                self.pos += 1;
                Ok(Tree::leaf(c))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(t) => Err(self.error(format!("unexpected {t:?}"))),
            None => Err(self.error("unexpected end of formula")),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Tree> {
    parse_formula_with(text, FormulaOptions::default())
}

pub fn parse_formula_with(text: &str, opts: FormulaOptions) -> Result<Tree> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        opts,
    };
    let tree = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.error("unexpected input after the formula").into());
    }
    Ok(tree)
}

fn precedence(label: &str) -> u8 {
    match label {
        "iff" => 1,
        "imp" => 2,
        "or" => 3,
        "and" => 4,
        "not" => 5,
        _ => 6,
    }
}

fn is_variable(label: &str) -> bool {
    label.starts_with(|c: char| c.is_ascii_uppercase()) && label.chars().all(|c| c.is_ascii_alphanumeric())
}

/// Writes a formula tree back as text, with as few parentheses as
/// [`parse_formula_with`] needs to rebuild the same tree.
pub fn print_formula(t: &Tree) -> Result<String> {
    print_formula_with(t, FormulaOptions::default())
}

pub fn print_formula_with(t: &Tree, opts: FormulaOptions) -> Result<String> {
    let mut out = String::new();
    write(t, opts, &mut out)?;
    Ok(out)
}

fn write(t: &Tree, opts: FormulaOptions, out: &mut String) -> Result<()> {
    let bad = |msg: String| crate::error::Error::InvalidInput(msg);
    let label = t.label();
    let kids = t.children();
    let arity_ok = match label {
        "not" => kids.len() == 1,
        "and" | "or" => kids.len() == 2 || (opts.nary && kids.len() > 2),
        "imp" | "iff" => kids.len() == 2,
        l if CONSTANTS.contains(&l) || is_variable(l) => kids.is_empty(),
        l => return Err(bad(format!("'{l}' is neither a connective, a constant nor a variable"))),
    };
    if !arity_ok {
        return Err(bad(format!("'{label}' has {} children", kids.len())));
    }
    let prec = precedence(label);
    let child = |c: &Tree, parens: bool, out: &mut String| -> Result<()> {
        if parens {
            out.push('(');
        }
        write(c, opts, out)?;
        if parens {
            out.push(')');
        }
        Ok(())
    };
    match label {
        "not" => {
            out.push('!');
            child(&kids[0], precedence(kids[0].label()) < prec, out)?;
        }
        "and" | "or" | "imp" | "iff" => {
            let op = match label {
                "and" => " & ",
                "or" => " | ",
                "imp" => " -> ",
                _ => " <-> ",
            };
            for (i, c) in kids.iter().enumerate() {
                if i > 0 {
                    out.push_str(op);
                }
                let cp = precedence(c.label());
                let same_side_ok = match label {
                    "and" | "or" => i == 0 && !opts.nary,
                    "imp" => i == 1,
                    _ => false,
                };
                child(c, cp < prec || (cp == prec && !same_side_ok), out)?;
            }
        }
        l => out.push_str(l),
    }
    Ok(())
}

/// Renames the variables of each pair by first occurrence in the target:
/// `P1, P2, ...`. Source variables missing from the target continue the
/// numbering in source order.
pub fn unify_variables(pairs: &[(Tree, Tree)]) -> Vec<(Tree, Tree)> {
    let is_var = |l: &str| !CONNECTIVES.contains(&l) && !CONSTANTS.contains(&l);
    pairs
        .iter()
        .map(|(source, target)| {
            let mut names: HashMap<String, String> = HashMap::new();
            for t in [target, source] {
                for (_, sub) in t.nodes() {
                    let l = sub.label();
                    if sub.is_leaf() && is_var(l) && !names.contains_key(l) {
                        let fresh = format!("P{}", names.len() + 1);
                        names.insert(l.to_string(), fresh);
                    }
                }
            }
            let mut rename = |l: &str| names.get(l).cloned().unwrap_or_else(|| l.to_string());
            (source.map_labels(&mut rename), target.map_labels(&mut rename))
        })
        .collect()
}

/// Reads `attempt ::: solution` lines into (attempt, solution) trees. Blank
/// lines and lines starting with `#` are skipped.
pub fn parse_dataset(text: &str, opts: FormulaOptions) -> Result<Vec<(Tree, Tree)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at_line = |e: crate::error::Error| match e {
            crate::error::Error::Parse(p) => ParseError::new(n + 1, p.column, p.message).into(),
            other => other,
        };
        let (attempt, solution) = line
            .split_once(":::")
            .ok_or_else(|| ParseError::new(n + 1, 1, "expected 'attempt ::: solution'"))?;
        out.push((
            parse_formula_with(attempt, opts).map_err(at_line)?,
            parse_formula_with(solution, opts).map_err(at_line)?,
        ));
    }
    Ok(out)
}
