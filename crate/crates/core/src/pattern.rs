//! Tree patterns with node and tree variables, and their matches.
//!
//! Matching is positional: the degree condition forces every pattern node to
//! map to the node at the same relative path, so a match is determined by the
//! image of the pattern root.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};
use crate::text::{self, Cursor, Nested, Tok};
use crate::tree::{Position, Tree};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PatternLabel {
    Const(String),
    NodeVar(String),
    TreeVar(String),
    /// Only valid in interval patterns.
    IntervalVar(String),
}

impl PatternLabel {
    pub fn is_var(&self) -> bool {
        !matches!(self, PatternLabel::Const(_))
    }

    /// Tree and interval variables must be leaves.
    pub fn is_leaf_only(&self) -> bool {
        matches!(self, PatternLabel::TreeVar(_) | PatternLabel::IntervalVar(_))
    }

    pub fn name(&self) -> &str {
        match self {
            PatternLabel::Const(s)
            | PatternLabel::NodeVar(s)
            | PatternLabel::TreeVar(s)
            | PatternLabel::IntervalVar(s) => s,
        }
    }

    pub(crate) fn write(&self, out: &mut String) {
        match self {
            PatternLabel::Const(l) => text::write_label(out, l),
            PatternLabel::NodeVar(n) => {
                out.push('?');
                out.push_str(n);
            }
            PatternLabel::TreeVar(n) => {
                out.push('$');
                out.push_str(n);
            }
            PatternLabel::IntervalVar(n) => {
                out.push('@');
                out.push_str(n);
            }
        }
    }
}

impl fmt::Display for PatternLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

/// A pattern node. Shared by plain and interval patterns.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PNode {
    pub label: PatternLabel,
    pub children: Vec<PNode>,
}

impl PNode {
    pub fn new(label: PatternLabel, children: Vec<PNode>) -> PNode {
        PNode { label, children }
    }

    pub fn leaf(label: PatternLabel) -> PNode {
        PNode::new(label, Vec::new())
    }

    pub fn from_tree(t: &Tree) -> PNode {
        PNode::new(
            PatternLabel::Const(t.label().to_string()),
            t.children().iter().map(PNode::from_tree).collect(),
        )
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(PNode::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.height() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.children
            .iter()
            .map(PNode::max_degree)
            .max()
            .unwrap_or(0)
            .max(self.children.len())
    }

    pub fn get(&self, p: &Position) -> Option<&PNode> {
        let mut cur = self;
        for &i in p.indices() {
            cur = cur.children.get(i)?;
        }
        Some(cur)
    }

    /// `(position, node)` in pre-order.
    pub fn nodes(&self) -> Vec<(Position, &PNode)> {
        let mut out = Vec::new();
        fn walk<'a>(n: &'a PNode, path: &mut Vec<usize>, out: &mut Vec<(Position, &'a PNode)>) {
            out.push((Position::from_indices(path.clone()), n));
            for (i, c) in n.children.iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Variables in pre-order of first occurrence, without duplicates.
    pub fn variables(&self) -> Vec<PatternLabel> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (_, n) in self.nodes() {
            if n.label.is_var() && seen.insert(n.label.clone()) {
                out.push(n.label.clone());
            }
        }
        out
    }

    pub fn has_interval_vars(&self) -> bool {
        matches!(self.label, PatternLabel::IntervalVar(_))
            || self.children.iter().any(PNode::has_interval_vars)
    }

    pub fn map_labels(&self, f: &mut impl FnMut(&PatternLabel) -> PatternLabel) -> PNode {
        PNode::new(
            f(&self.label),
            self.children.iter().map(|c| c.map_labels(f)).collect(),
        )
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for (p, n) in self.nodes() {
            if n.label.is_leaf_only() && !n.children.is_empty() {
                return Err(Error::InvalidPattern(format!(
                    "variable {} at {p} must be a leaf",
                    n.label
                )));
            }
            if let PatternLabel::Const(l) = &n.label {
                if l.is_empty() {
                    return Err(Error::InvalidPattern(format!("empty label at {p}")));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn write(&self, out: &mut String) {
        self.label.write(out);
        if !self.children.is_empty() {
            out.push('(');
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.write(out);
            }
            out.push(')');
        }
    }
}

impl fmt::Display for PNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

/// Parses a pattern node at the cursor. Interval variables are accepted here;
/// callers decide whether they are allowed.
pub(crate) fn parse_pnode(cur: &mut Cursor<'_>) -> Result<PNode, ParseError> {
    let mut leaf = |s: &text::Spanned| -> Result<(PatternLabel, usize, usize), ParseError> {
        let label = match &s.tok {
            Tok::Bare(l) | Tok::Quoted(l) => PatternLabel::Const(l.clone()),
            Tok::Sigil('?', n) => PatternLabel::NodeVar(n.clone()),
            Tok::Sigil('$', n) => PatternLabel::TreeVar(n.clone()),
            Tok::Sigil('@', n) => PatternLabel::IntervalVar(n.clone()),
            _ => return Err(ParseError::new(s.line, s.column, "expected a label")),
        };
        Ok((label, s.line, s.column))
    };
    let ((label, line, column), children) = text::parse_nested(cur, &mut leaf)?;
    fn build(
        label: PatternLabel,
        line: usize,
        column: usize,
        children: Vec<Nested<(PatternLabel, usize, usize)>>,
    ) -> Result<PNode, ParseError> {
        if label.is_leaf_only() && !children.is_empty() {
            return Err(ParseError::new(
                line,
                column,
                format!("variable {label} must be a leaf"),
            ));
        }
        let kids = children
            .into_iter()
            .map(|n| {
                let (l, li, co) = n.label;
                build(l, li, co, n.children)
            })
            .collect::<Result<_, _>>()?;
        Ok(PNode::new(label, kids))
    }
    build(label, line, column, children)
}

pub(crate) fn parse_pnode_str(text: &str) -> Result<PNode, ParseError> {
    let toks = text::tokenize(text)?;
    let mut cur = Cursor::new(&toks, text);
    let node = parse_pnode(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error_here("unexpected trailing input"));
    }
    Ok(node)
}

/// A tree pattern over constants, node variables and tree variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePattern {
    root: PNode,
}

impl TreePattern {
    pub fn new(root: PNode) -> Result<TreePattern> {
        root.validate()?;
        if root.has_interval_vars() {
            return Err(Error::InvalidPattern(
                "interval variables are not allowed in plain tree patterns".into(),
            ));
        }
        Ok(TreePattern { root })
    }

    /// A variable-free pattern denoting exactly `t`.
    pub fn from_tree(t: &Tree) -> TreePattern {
        TreePattern {
            root: PNode::from_tree(t),
        }
    }

    pub fn root(&self) -> &PNode {
        &self.root
    }

    pub fn into_root(self) -> PNode {
        self.root
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn variables(&self) -> Vec<PatternLabel> {
        self.root.variables()
    }

    pub fn nodes(&self) -> Vec<(Position, &PNode)> {
        self.root.nodes()
    }

    pub fn label_at(&self, p: &Position) -> Option<&PatternLabel> {
        self.root.get(p).map(|n| &n.label)
    }
}

impl fmt::Display for TreePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl fmt::Debug for TreePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreePattern({self})")
    }
}

impl FromStr for TreePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_pattern(s)
    }
}

pub fn parse_pattern(text: &str) -> Result<TreePattern> {
    let toks = text::tokenize(text)?;
    let mut cur = Cursor::new(&toks, text);
    let node = parse_pnode(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error_here("unexpected trailing input").into());
    }
    if let Some((p, n)) = node
        .nodes()
        .into_iter()
        .find(|(_, n)| matches!(n.label, PatternLabel::IntervalVar(_)))
    {
        return Err(Error::InvalidPattern(format!(
            "interval variable {} at {p} needs an interval pattern",
            n.label
        )));
    }
    TreePattern::new(node)
}

pub fn serialize_pattern(p: &TreePattern) -> String {
    p.to_string()
}

/// Values assigned to the variables of a matched pattern.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct VariableBinding {
    pub nodes: BTreeMap<String, String>,
    pub trees: BTreeMap<String, Tree>,
}

impl VariableBinding {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.trees.is_empty()
    }
}

/// A match of a pattern into a tree, identified by the root image.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Match {
    pub root_image: Position,
    pub binding: VariableBinding,
}

impl Match {
    /// The tree position a pattern position maps to.
    pub fn image(&self, pattern_pos: &Position) -> Position {
        self.root_image.concat(pattern_pos)
    }

    /// The full node map in pre-order of the pattern.
    pub fn map(&self, p: &TreePattern) -> Vec<(Position, Position)> {
        p.nodes()
            .into_iter()
            .map(|(w, _)| {
                let img = self.image(&w);
                (w, img)
            })
            .collect()
    }
}

fn match_node(n: &PNode, t: &Tree, b: &mut VariableBinding) -> bool {
    match &n.label {
        PatternLabel::TreeVar(y) => match b.trees.get(y) {
            Some(prev) => prev == t,
            None => {
                b.trees.insert(y.clone(), t.clone());
                true
            }
        },
        PatternLabel::IntervalVar(_) => false,
        label => {
            if n.children.len() != t.degree() {
                return false;
            }
            match label {
                PatternLabel::Const(l) => {
                    if l != t.label() {
                        return false;
                    }
                }
                PatternLabel::NodeVar(x) => match b.nodes.get(x) {
                    Some(prev) if prev != t.label() => return false,
                    Some(_) => {}
                    None => {
                        b.nodes.insert(x.clone(), t.label().to_string());
                    }
                },
                _ => unreachable!(),
            }
            n.children
                .iter()
                .zip(t.children())
                .all(|(c, tc)| match_node(c, tc, b))
        }
    }
}

/// Matches `root` against the tree node `t` directly.
pub(crate) fn match_subtree(root: &PNode, t: &Tree) -> Option<VariableBinding> {
    let mut b = VariableBinding::default();
    match_node(root, t, &mut b).then_some(b)
}

pub fn match_at(p: &TreePattern, t: &Tree, v: &Position) -> Option<Match> {
    let sub = t.get(v)?;
    match_subtree(&p.root, sub).map(|binding| Match {
        root_image: v.clone(),
        binding,
    })
}

/// Matches at every position of `t`, in pre-order of the root image.
pub fn all_matches(p: &TreePattern, t: &Tree) -> Vec<Match> {
    t.nodes()
        .into_iter()
        .filter_map(|(v, sub)| {
            match_subtree(&p.root, &sub).map(|binding| Match {
                root_image: v,
                binding,
            })
        })
        .collect()
}

pub fn binding_of(m: &Match, _p: &TreePattern, _t: &Tree) -> VariableBinding {
    m.binding.clone()
}

/// Builds the tree denoted by `p` under `b`. Returns `None` if a variable is
/// unbound or an interval variable occurs.
pub(crate) fn instantiate_node(n: &PNode, b: &VariableBinding) -> Option<Tree> {
    match &n.label {
        PatternLabel::TreeVar(y) => b.trees.get(y).cloned(),
        PatternLabel::IntervalVar(_) => None,
        label => {
            let l = match label {
                PatternLabel::Const(l) => l.clone(),
                PatternLabel::NodeVar(x) => b.nodes.get(x)?.clone(),
                _ => unreachable!(),
            };
            let children = n
                .children
                .iter()
                .map(|c| instantiate_node(c, b))
                .collect::<Option<Vec<_>>>()?;
            Some(Tree::new(l, children))
        }
    }
}

pub fn instantiate(p: &TreePattern, b: &VariableBinding) -> Option<Tree> {
    instantiate_node(&p.root, b)
}

/// Independent check of the four match conditions for an explicit node map.
///
/// Works on the flat position map rather than recursing over the pattern, so
/// it can be used to cross-check [`match_at`].
pub fn verify_match_map(p: &TreePattern, t: &Tree, map: &BTreeMap<Position, Position>) -> bool {
    let nodes = p.nodes();
    if map.len() != nodes.len() {
        return false;
    }
    let images: BTreeSet<&Position> = map.values().collect();
    if images.len() != map.len() {
        return false;
    }
    let mut node_vals: BTreeMap<&str, &str> = BTreeMap::new();
    let mut tree_vals: BTreeMap<&str, Tree> = BTreeMap::new();
    for (w, n) in &nodes {
        let Some(img) = map.get(w) else { return false };
        let Some(sub) = t.get(img) else { return false };
        match &n.label {
            PatternLabel::Const(l) => {
                if l != sub.label() {
                    return false;
                }
            }
            PatternLabel::NodeVar(x) => {
                if *node_vals.entry(x.as_str()).or_insert(sub.label()) != sub.label() {
                    return false;
                }
            }
            PatternLabel::TreeVar(y) => {
                if *tree_vals.entry(y.as_str()).or_insert_with(|| sub.clone()) != *sub {
                    return false;
                }
            }
            PatternLabel::IntervalVar(_) => return false,
        }
        if !n.label.is_leaf_only() {
            if sub.degree() != n.children.len() {
                return false;
            }
            for i in 0..n.children.len() {
                if map.get(&w.child(i)) != Some(&img.child(i)) {
                    return false;
                }
            }
        }
    }
    true
}
