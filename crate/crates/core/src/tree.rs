//! Labelled ordered trees, positions and contexts.
//!
//! A [`Tree`] is an immutable, reference-counted value. Every node caches a
//! structural hash computed bottom-up at construction, so isomorphism checks
//! between unrelated subtrees usually fail after a single integer comparison.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ParseError, Result};
use crate::text::{self, Cursor, Nested, Tok};

/// A path of child indices from the root. The root is the empty path.
///
/// The derived ordering is lexicographic on the index sequence, which is
/// exactly pre-order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn from_indices(indices: impl Into<Vec<usize>>) -> Self {
        Position(indices.into())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn parent(&self) -> Option<Position> {
        if self.0.is_empty() {
            None
        } else {
            Some(Position(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `self` is an ancestor of `other`, or equal to it.
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn concat(&self, suffix: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&suffix.0);
        Position(v)
    }

    /// The remainder of `self` after removing `prefix`, if it is one.
    pub fn strip_prefix(&self, prefix: &Position) -> Option<Position> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|s| Position(s.to_vec()))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position({self})")
    }
}

impl FromStr for Position {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(Position::root());
        }
        let mut out = Vec::new();
        let mut column = 1;
        for part in s.split('.') {
            let idx = part
                .parse::<usize>()
                .map_err(|_| ParseError::new(1, column, format!("invalid child index '{part}'")))?;
            out.push(idx);
            column += part.len() + 1;
        }
        Ok(Position(out))
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Position {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

struct Node {
    label: Arc<str>,
    children: Vec<Tree>,
    hash: u64,
    size: usize,
    height: usize,
}

/// An ordered tree with a non-empty string label on every node.
#[derive(Clone)]
pub struct Tree(Arc<Node>);

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn mix(mut h: u64, x: u64) -> u64 {
    for b in x.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn label_hash(label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

impl Tree {
    pub fn leaf(label: impl Into<Arc<str>>) -> Tree {
        Tree::new(label, Vec::new())
    }

    /// Builds a node. Panics if the label is empty.
    pub fn new(label: impl Into<Arc<str>>, children: Vec<Tree>) -> Tree {
        let label = label.into();
        assert!(!label.is_empty(), "tree labels must be non-empty");
        let mut hash = mix(label_hash(&label), children.len() as u64);
        let mut size = 1;
        let mut height = 0;
        for c in &children {
            hash = mix(hash, c.0.hash);
            size += c.0.size;
            height = height.max(c.0.height + 1);
        }
        Tree(Arc::new(Node {
            label,
            children,
            hash,
            size,
            height,
        }))
    }

    /// Checked constructor from an explicit position-to-label map.
    pub fn from_positions<L: AsRef<str>>(labels: &BTreeMap<Position, L>) -> Result<Tree> {
        if !labels.contains_key(&Position::root()) {
            return Err(Error::InvalidInput("position set lacks the root".into()));
        }
        for p in labels.keys() {
            if let Some(parent) = p.parent() {
                if !labels.contains_key(&parent) {
                    return Err(Error::InvalidInput(format!(
                        "position set is not prefix-closed at {p}"
                    )));
                }
                let last = p.last().unwrap();
                if last > 0 && !labels.contains_key(&parent.child(last - 1)) {
                    return Err(Error::InvalidInput(format!(
                        "position set is not left-closed at {p}"
                    )));
                }
            }
            if labels[p].as_ref().is_empty() {
                return Err(Error::InvalidInput(format!("empty label at {p}")));
            }
        }
        fn build<L: AsRef<str>>(labels: &BTreeMap<Position, L>, p: Position) -> Tree {
            let mut children = Vec::new();
            let mut i = 0;
            while labels.contains_key(&p.child(i)) {
                children.push(build(labels, p.child(i)));
                i += 1;
            }
            Tree::new(labels[&p].as_ref(), children)
        }
        Ok(build(labels, Position::root()))
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn label_arc(&self) -> &Arc<str> {
        &self.0.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.0.children
    }

    pub fn degree(&self) -> usize {
        self.0.children.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.0.children.is_empty()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.0.size
    }

    /// Length of the longest root-to-leaf path; a single node has height 0.
    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn ptr_eq(&self, other: &Tree) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn get(&self, p: &Position) -> Option<&Tree> {
        let mut cur = self;
        for &i in p.indices() {
            cur = cur.0.children.get(i)?;
        }
        Some(cur)
    }

    pub fn contains(&self, p: &Position) -> bool {
        self.get(p).is_some()
    }

    pub fn label_at(&self, p: &Position) -> Option<&str> {
        self.get(p).map(|t| t.label())
    }

    pub fn subtree(&self, p: &Position) -> Result<Tree> {
        self.get(p)
            .cloned()
            .ok_or_else(|| Error::UnknownPosition(p.clone()))
    }

    /// All positions in pre-order.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.size());
        let mut path = Vec::new();
        fn walk(t: &Tree, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            out.push(Position(path.clone()));
            for (i, c) in t.children().iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut path, &mut out);
        out
    }

    /// `(position, subtree)` for every node, in pre-order.
    pub fn nodes(&self) -> Vec<(Position, Tree)> {
        let mut out = Vec::with_capacity(self.size());
        fn walk(t: &Tree, path: &mut Vec<usize>, out: &mut Vec<(Position, Tree)>) {
            out.push((Position(path.clone()), t.clone()));
            for (i, c) in t.children().iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn labels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each(&mut |t| {
            out.insert(t.label().to_string());
        });
        out
    }

    pub fn max_degree(&self) -> usize {
        let mut d = 0;
        self.for_each(&mut |t| d = d.max(t.degree()));
        d
    }

    fn for_each(&self, f: &mut impl FnMut(&Tree)) {
        f(self);
        for c in self.children() {
            c.for_each(f);
        }
    }

    /// Replaces the subtree at `p` by `t`.
    pub fn replace(&self, p: &Position, t: Tree) -> Result<Tree> {
        fn go(cur: &Tree, path: &[usize], t: Tree) -> Option<Tree> {
            match path.split_first() {
                None => Some(t),
                Some((&i, rest)) => {
                    let child = cur.children().get(i)?;
                    let new_child = go(child, rest, t)?;
                    let mut children = cur.children().to_vec();
                    children[i] = new_child;
                    Some(Tree::new(cur.label_arc().clone(), children))
                }
            }
        }
        go(self, p.indices(), t).ok_or_else(|| Error::UnknownPosition(p.clone()))
    }

    pub fn map_labels(&self, f: &mut impl FnMut(&str) -> String) -> Tree {
        let label = f(self.label());
        let children = self.children().iter().map(|c| c.map_labels(f)).collect();
        Tree::new(label, children)
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Tree) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        self.0.hash == other.0.hash
            && self.0.size == other.0.size
            && self.0.label == other.0.label
            && self.0.children == other.0.children
    }
}

impl Eq for Tree {}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Tree) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Tree {
    /// Label first, then children lexicographically.
    fn cmp(&self, other: &Tree) -> Ordering {
        if self.ptr_eq(other) {
            return Ordering::Equal;
        }
        self.label()
            .cmp(other.label())
            .then_with(|| self.children().cmp(other.children()))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_tree(self))
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({self})")
    }
}

impl FromStr for Tree {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_tree(s)
    }
}

impl Serialize for Tree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&serialize_tree(self))
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_tree(&s).map_err(serde::de::Error::custom)
    }
}

/// Ordered-tree equality: same positions and the same label everywhere.
pub fn is_isomorphic(t1: &Tree, t2: &Tree) -> bool {
    t1 == t2
}

/// A tree with a designated hole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    tree: Tree,
    hole: Position,
}

impl Context {
    pub fn new(tree: Tree, hole: Position) -> Result<Context> {
        if !tree.contains(&hole) {
            return Err(Error::UnknownPosition(hole));
        }
        Ok(Context { tree, hole })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn hole(&self) -> &Position {
        &self.hole
    }

    pub fn plug(&self, t: Tree) -> Tree {
        self.tree
            .replace(&self.hole, t)
            .expect("hole is checked on construction")
    }
}

pub fn plug(ctx: &Context, t: Tree) -> Tree {
    ctx.plug(t)
}

/// True iff `v1 = v2` and the trees agree everywhere outside the subtree at
/// that position.
pub fn contexts_isomorphic(t1: &Tree, v1: &Position, t2: &Tree, v2: &Position) -> Result<bool> {
    if !t1.contains(v1) {
        return Err(Error::UnknownPosition(v1.clone()));
    }
    if !t2.contains(v2) {
        return Err(Error::UnknownPosition(v2.clone()));
    }
    if v1 != v2 {
        return Ok(false);
    }
    let (mut a, mut b) = (t1, t2);
    for &i in v1.indices() {
        if a.label() != b.label() || a.degree() != b.degree() {
            return Ok(false);
        }
        for j in 0..a.degree() {
            if j != i && a.children()[j] != b.children()[j] {
                return Ok(false);
            }
        }
        a = &a.children()[i];
        b = &b.children()[i];
    }
    Ok(true)
}

pub fn parse_tree(text: &str) -> Result<Tree, ParseError> {
    let toks = text::tokenize(text)?;
    let mut cur = Cursor::new(&toks, text);
    let (label, children) = text::parse_nested(&mut cur, &mut |s| match &s.tok {
        Tok::Bare(l) | Tok::Quoted(l) => Ok(l.clone()),
        Tok::Sigil(c, _) => Err(ParseError::new(
            s.line,
            s.column,
            format!("reserved sigil '{c}' cannot start a tree label; quote the label"),
        )),
        _ => Err(ParseError::new(s.line, s.column, "expected a label")),
    })?;
    if !cur.at_end() {
        return Err(cur.error_here("unexpected trailing input"));
    }
    fn build(label: String, children: Vec<Nested<String>>) -> Tree {
        Tree::new(
            label,
            children
                .into_iter()
                .map(|n| build(n.label, n.children))
                .collect(),
        )
    }
    Ok(build(label, children))
}

/// Canonical text: no whitespace, labels quoted only when needed.
pub fn serialize_tree(t: &Tree) -> String {
    let mut out = String::new();
    fn go(t: &Tree, out: &mut String) {
        text::write_label(out, t.label());
        if !t.is_leaf() {
            out.push('(');
            for (i, c) in t.children().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                go(c, out);
            }
            out.push(')');
        }
    }
    go(t, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    fn p(s: &str) -> Position {
        s.parse().unwrap()
    }

    #[test]
    fn parses_nested_tree() {
        let tree = t("a(b(d,e),c)");
        assert_eq!(tree.label(), "a");
        assert_eq!(tree.children()[0], t("b(d,e)"));
        assert_eq!(tree.children()[1], t("c"));
        assert_eq!(tree.size(), 5);
        assert_eq!(tree.height(), 2);
    }

    #[test]
    fn parses_quoted_labels() {
        let tree = t("\"a(b\"(c)");
        assert_eq!(tree.label(), "a(b");
        assert_eq!(tree.children()[0].label(), "c");
        assert_eq!(serialize_tree(&tree), "\"a(b\"(c)");
        let esc = t(r#""q\"\\""#);
        assert_eq!(esc.label(), "q\"\\");
        assert_eq!(parse_tree(&serialize_tree(&esc)).unwrap(), esc);
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(t(" a ( b , c\n) "), t("a(b,c)"));
    }

    #[test]
    fn rejects_sigils_and_syntax_errors() {
        let e = parse_tree("a(?x)").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        assert!(parse_tree("$Y").is_err());
        assert!(parse_tree("\"?x\"").is_ok());
        let e = parse_tree("a(b,\n  )").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(parse_tree("a(b c)").is_err());
        assert!(parse_tree("a()").is_err());
        assert!(parse_tree("").is_err());
        assert!(parse_tree("a b").is_err());
    }

    #[test]
    fn serializes_canonically() {
        assert_eq!(serialize_tree(&t("b")), "b");
        let src = t("b( b(l_1_2, l_1_2), b(b, b) )");
        assert_eq!(serialize_tree(&src), "b(b(l_1_2,l_1_2),b(b,b))");
    }

    #[test]
    fn positions_display_and_parse() {
        assert_eq!(Position::root().to_string(), "-");
        assert_eq!(p("0.1").indices(), &[0, 1]);
        assert_eq!(p("-"), Position::root());
        assert!("0.x".parse::<Position>().is_err());
        let tree = t("a(b(d,e),c)");
        let ps: Vec<String> = tree.positions().iter().map(|p| p.to_string()).collect();
        assert_eq!(ps, ["-", "0", "0.0", "0.1", "1"]);
    }

    #[test]
    fn subtree_extraction() {
        let tree = t("a(b(d,e),c)");
        assert_eq!(tree.subtree(&p("0")).unwrap(), t("b(d,e)"));
        assert_eq!(tree.subtree(&Position::root()).unwrap(), tree);
        assert_eq!(t("a(b,c)").subtree(&p("1")).unwrap(), t("c"));
        assert!(matches!(
            tree.subtree(&p("2")),
            Err(Error::UnknownPosition(_))
        ));
    }

    #[test]
    fn isomorphism_respects_order() {
        assert!(is_isomorphic(&t("a(b,c)"), &t("a(b,c)")));
        assert!(!is_isomorphic(&t("a(b,c)"), &t("a(c,b)")));
    }

    #[test]
    fn plug_replaces_hole() {
        let ctx = Context::new(t("a(b,c)"), p("0")).unwrap();
        assert_eq!(ctx.plug(t("d(e)")), t("a(d(e),c)"));
        let root = Context::new(t("a(b,c)"), Position::root()).unwrap();
        assert_eq!(root.plug(t("u")), t("u"));
        assert!(Context::new(t("a"), p("0")).is_err());
    }

    #[test]
    fn context_isomorphism() {
        let s = t("and(imp(B,D),A)");
        let g = t("and(imp(D,B),A)");
        assert!(contexts_isomorphic(&s, &p("0"), &g, &p("0")).unwrap());
        assert!(contexts_isomorphic(&t("x"), &Position::root(), &t("y(z)"), &Position::root()).unwrap());
        assert!(!contexts_isomorphic(&t("a(b,c)"), &p("0"), &t("a(b,d)"), &p("0")).unwrap());
        assert!(!contexts_isomorphic(&s, &p("0"), &g, &p("1")).unwrap());
        assert!(contexts_isomorphic(&s, &p("5"), &g, &p("0")).is_err());
    }

    #[test]
    fn checked_constructor() {
        let mut m = BTreeMap::new();
        m.insert(Position::root(), "a");
        m.insert(p("0"), "b");
        assert_eq!(Tree::from_positions(&m).unwrap(), t("a(b)"));
        m.insert(p("2"), "c");
        assert!(Tree::from_positions(&m).is_err());
        m.remove(&p("2"));
        m.insert(p("0.0.0"), "c");
        assert!(Tree::from_positions(&m).is_err());
    }
}
