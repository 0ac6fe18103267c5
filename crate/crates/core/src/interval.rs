//! Patterns and transformations with interval variables.
//!
//! An interval variable `@Z` matches a possibly empty run of consecutive
//! siblings. Repeated occurrences must capture isomorphic sequences. Deciding
//! whether a match exists is NP-hard, so the matcher is a budgeted
//! backtracking search: pattern children are processed left to right and
//! shorter intervals are tried first.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::pattern::{parse_pnode, PNode, PatternLabel};
use crate::text::{self, Cursor, Tok};
use crate::transform::{relocate, split_rule_name, strip_comment};
use crate::tree::{contexts_isomorphic, Position, Tree};

pub const DEFAULT_DECISION_BUDGET: u64 = 10_000_000;

/// A tree pattern that may contain interval variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntervalPattern {
    root: PNode,
}

impl IntervalPattern {
    pub fn new(root: PNode) -> Result<IntervalPattern> {
        root.validate()?;
        if matches!(root.label, PatternLabel::IntervalVar(_)) {
            return Err(Error::InvalidPattern(
                "the pattern root cannot be an interval variable".into(),
            ));
        }
        Ok(IntervalPattern { root })
    }

    pub fn root(&self) -> &PNode {
        &self.root
    }
}

impl fmt::Display for IntervalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

pub fn parse_interval_pattern(text: &str) -> Result<IntervalPattern> {
    IntervalPattern::new(crate::pattern::parse_pnode_str(text)?)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntervalTransformation {
    pub name: String,
    body: IntervalPattern,
    head: IntervalPattern,
}

impl IntervalTransformation {
    pub fn new(
        name: impl Into<String>,
        body: IntervalPattern,
        head: IntervalPattern,
    ) -> Result<Self> {
        let vars = body.root.variables();
        for v in head.root.variables() {
            if !vars.contains(&v) {
                return Err(Error::InvalidRule(format!(
                    "head variable {v} does not occur in the body"
                )));
            }
        }
        Ok(IntervalTransformation {
            name: name.into(),
            body,
            head,
        })
    }

    pub fn body(&self) -> &IntervalPattern {
        &self.body
    }

    pub fn head(&self) -> &IntervalPattern {
        &self.head
    }
}

impl fmt::Display for IntervalTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~> {}", self.body, self.head)
    }
}

pub fn parse_interval_rule(text: &str) -> Result<IntervalTransformation> {
    parse_interval_rule_named("rho", text)
}

pub fn parse_interval_rule_named(name: &str, text: &str) -> Result<IntervalTransformation> {
    let toks = text::tokenize(text)?;
    let mut cur = Cursor::new(&toks, text);
    let body = parse_pnode(&mut cur)?;
    cur.expect(&Tok::Arrow, "'~>'")?;
    let head = parse_pnode(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error_here("unexpected trailing input").into());
    }
    IntervalTransformation::new(name, IntervalPattern::new(body)?, IntervalPattern::new(head)?)
}

/// Same format as plain rule files, with `@name` allowed.
pub fn parse_interval_rule_file(text: &str) -> Result<Vec<IntervalTransformation>> {
    let mut rules: Vec<IntervalTransformation> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let (name, body, offset) = match split_rule_name(line) {
            Some((n, rest, off)) => (n.to_string(), rest, off),
            None => (format!("rho{}", rules.len() + 1), line, 0),
        };
        if rules.iter().any(|r| r.name == name) {
            return Err(Error::InvalidRule(format!("duplicate rule name '{name}'")));
        }
        rules.push(parse_interval_rule_named(&name, body).map_err(|e| relocate(e, i + 1, offset))?);
    }
    Ok(rules)
}

/// A witness for an interval match.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct IntervalMatch {
    pub root_image: Position,
    /// Pattern position to the tree positions it covers. Non-interval nodes
    /// map to singletons.
    pub map: BTreeMap<Position, Vec<Position>>,
    pub nodes: BTreeMap<String, String>,
    pub trees: BTreeMap<String, Tree>,
    pub intervals: BTreeMap<String, Vec<Tree>>,
}

struct Matcher {
    budget: u64,
    used: u64,
    exhausted: bool,
}

type Cont<'k> = dyn FnMut(&mut Matcher, IntervalMatch) -> bool + 'k;

impl Matcher {
    fn tick(&mut self) -> bool {
        self.used += 1;
        if self.used > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }

    /// Returns true to stop the whole search.
    fn node(
        &mut self,
        n: &PNode,
        t: &Tree,
        tpos: &Position,
        ppos: &Position,
        mut st: IntervalMatch,
        k: &mut Cont<'_>,
    ) -> bool {
        if !self.tick() {
            return true;
        }
        st.map.insert(ppos.clone(), vec![tpos.clone()]);
        match &n.label {
            PatternLabel::TreeVar(y) => {
                match st.trees.get(y) {
                    Some(prev) if prev != t => return false,
                    Some(_) => {}
                    None => {
                        st.trees.insert(y.clone(), t.clone());
                    }
                }
                k(self, st)
            }
            PatternLabel::IntervalVar(_) => false,
            PatternLabel::Const(l) => {
                if l != t.label() {
                    return false;
                }
                self.seq(&n.children, 0, t.children(), 0, tpos, ppos, st, k)
            }
            PatternLabel::NodeVar(x) => {
                match st.nodes.get(x) {
                    Some(prev) if prev != t.label() => return false,
                    Some(_) => {}
                    None => {
                        st.nodes.insert(x.clone(), t.label().to_string());
                    }
                }
                self.seq(&n.children, 0, t.children(), 0, tpos, ppos, st, k)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn seq(
        &mut self,
        cs: &[PNode],
        i: usize,
        ts: &[Tree],
        j: usize,
        tpos: &Position,
        ppos: &Position,
        st: IntervalMatch,
        k: &mut Cont<'_>,
    ) -> bool {
        if i == cs.len() {
            return if j == ts.len() { k(self, st) } else { false };
        }
        let c = &cs[i];
        let cpos = ppos.child(i);
        if let PatternLabel::IntervalVar(z) = &c.label {
            let fixed = cs[i + 1..]
                .iter()
                .filter(|c| !matches!(c.label, PatternLabel::IntervalVar(_)))
                .count();
            let avail = ts.len() - j;
            if avail < fixed {
                return false;
            }
            let lens: Vec<usize> = match st.intervals.get(z) {
                Some(prev) => {
                    if prev.len() > avail - fixed || ts[j..j + prev.len()] != prev[..] {
                        return false;
                    }
                    vec![prev.len()]
                }
                None => (0..=avail - fixed).collect(),
            };
            for len in lens {
                if !self.tick() {
                    return true;
                }
                let mut next = st.clone();
                next.intervals
                    .entry(z.clone())
                    .or_insert_with(|| ts[j..j + len].to_vec());
                next.map
                    .insert(cpos.clone(), (j..j + len).map(|q| tpos.child(q)).collect());
                if self.seq(cs, i + 1, ts, j + len, tpos, ppos, next, k) {
                    return true;
                }
            }
            false
        } else {
            if j >= ts.len() {
                return false;
            }
            self.node(c, &ts[j], &tpos.child(j), &cpos, st, &mut |m, st| {
                m.seq(cs, i + 1, ts, j + 1, tpos, ppos, st, k)
            })
        }
    }
}

/// Runs `visit` on every match at `v` until it returns true. Errors when the
/// decision budget runs out first.
fn for_each_match(
    p: &IntervalPattern,
    t: &Tree,
    v: &Position,
    budget: u64,
    visit: &mut dyn FnMut(&IntervalMatch) -> bool,
) -> Result<()> {
    let Some(sub) = t.get(v) else {
        return Err(Error::UnknownPosition(v.clone()));
    };
    let mut m = Matcher {
        budget,
        used: 0,
        exhausted: false,
    };
    let st = IntervalMatch {
        root_image: v.clone(),
        ..Default::default()
    };
    m.node(&p.root, sub, v, &Position::root(), st, &mut |_, st| visit(&st));
    if m.exhausted {
        return Err(Error::ResourceLimit(format!(
            "interval matching exceeded {budget} decisions"
        )));
    }
    Ok(())
}

pub fn interval_match_at(p: &IntervalPattern, t: &Tree, v: &Position) -> Result<Option<IntervalMatch>> {
    interval_match_at_with(p, t, v, DEFAULT_DECISION_BUDGET)
}

pub fn interval_match_at_with(
    p: &IntervalPattern,
    t: &Tree,
    v: &Position,
    budget: u64,
) -> Result<Option<IntervalMatch>> {
    let mut found = None;
    for_each_match(p, t, v, budget, &mut |m| {
        found = Some(m.clone());
        true
    })?;
    Ok(found)
}

/// All matches at `v` in discovery order.
pub fn interval_matches_at(
    p: &IntervalPattern,
    t: &Tree,
    v: &Position,
    budget: u64,
) -> Result<Vec<IntervalMatch>> {
    let mut out = Vec::new();
    for_each_match(p, t, v, budget, &mut |m| {
        out.push(m.clone());
        false
    })?;
    Ok(out)
}

fn instantiate(n: &PNode, m: &IntervalMatch) -> Option<Vec<Tree>> {
    Some(match &n.label {
        PatternLabel::TreeVar(y) => vec![m.trees.get(y)?.clone()],
        PatternLabel::IntervalVar(z) => m.intervals.get(z)?.clone(),
        PatternLabel::Const(l) | PatternLabel::NodeVar(l) => {
            let label = match &n.label {
                PatternLabel::NodeVar(_) => m.nodes.get(l)?.clone(),
                _ => l.clone(),
            };
            let mut children = Vec::new();
            for c in &n.children {
                children.extend(instantiate(c, m)?);
            }
            vec![Tree::new(label, children)]
        }
    })
}

/// The head instantiated under a match; the head root is never an interval.
pub fn instantiate_head(rho: &IntervalTransformation, m: &IntervalMatch) -> Option<Tree> {
    instantiate(&rho.head.root, m).and_then(|mut v| v.pop())
}

pub fn interval_apply_at(rho: &IntervalTransformation, t: &Tree, v: &Position) -> Result<Vec<Tree>> {
    interval_apply_at_with(rho, t, v, DEFAULT_DECISION_BUDGET)
}

/// All distinct results of applying `rho` at `v`, in discovery order.
pub fn interval_apply_at_with(
    rho: &IntervalTransformation,
    t: &Tree,
    v: &Position,
    budget: u64,
) -> Result<Vec<Tree>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in interval_matches_at(&rho.body, t, v, budget)? {
        if let Some(sub) = instantiate_head(rho, &m) {
            let res = t.replace(v, sub)?;
            if seen.insert(res.clone()) {
                out.push(res);
            }
        }
    }
    Ok(out)
}

pub fn interval_explains(
    rho: &IntervalTransformation,
    t: &Tree,
    t_star: &Tree,
) -> Result<Option<(Position, IntervalMatch)>> {
    interval_explains_with(rho, t, t_star, DEFAULT_DECISION_BUDGET)
}

/// First position (pre-order) and match whose instantiated head turns `t`
/// into `t_star`.
pub fn interval_explains_with(
    rho: &IntervalTransformation,
    t: &Tree,
    t_star: &Tree,
    budget: u64,
) -> Result<Option<(Position, IntervalMatch)>> {
    for v in t.positions() {
        if !contexts_isomorphic(t, &v, t_star, &v).unwrap_or(false) {
            continue;
        }
        let want = t_star.get(&v).expect("same context implies the position exists");
        let mut found = None;
        for_each_match(&rho.body, t, &v, budget, &mut |m| {
            if instantiate_head(rho, m).as_ref() == Some(want) {
                found = Some(m.clone());
                true
            } else {
                false
            }
        })?;
        if let Some(m) = found {
            return Ok(Some((v, m)));
        }
    }
    Ok(None)
}

/// Breadth-first search over interval rewrites, up to `s` steps. Returns the
/// sequence of `(rule index, position, result)`.
pub fn interval_explains_in_steps(
    rules: &[IntervalTransformation],
    t: &Tree,
    t_star: &Tree,
    s: usize,
    max_trees: usize,
) -> Result<Option<Vec<(usize, Position, Tree)>>> {
    if t == t_star {
        return Ok(Some(Vec::new()));
    }
    let mut parent: std::collections::HashMap<Tree, (Tree, usize, Position)> = Default::default();
    let mut visited = HashSet::new();
    visited.insert(t.clone());
    let mut frontier = vec![t.clone()];
    for _ in 0..s {
        let mut next = Vec::new();
        for cur in &frontier {
            for v in cur.positions() {
                for (ri, rule) in rules.iter().enumerate() {
                    for res in interval_apply_at(rule, cur, &v)? {
                        if !visited.insert(res.clone()) {
                            continue;
                        }
                        if visited.len() > max_trees {
                            return Err(Error::ResourceLimit(format!(
                                "interval search exceeded {max_trees} trees"
                            )));
                        }
                        parent.insert(res.clone(), (cur.clone(), ri, v.clone()));
                        if &res == t_star {
                            let mut steps = Vec::new();
                            let mut node = res;
                            while let Some((prev, ri, pos)) = parent.get(&node).cloned() {
                                steps.push((ri, pos, node));
                                node = prev;
                            }
                            steps.reverse();
                            return Ok(Some(steps));
                        }
                        next.push(res);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

/// Independent check of the interval match conditions: disjoint images,
/// singletons for ordinary nodes, contiguous child runs for interval
/// variables, and consistent values for repeated variables.
pub fn verify_interval_match(p: &IntervalPattern, t: &Tree, m: &IntervalMatch) -> bool {
    let mut used: HashSet<&Position> = HashSet::new();
    for imgs in m.map.values() {
        for q in imgs {
            if !used.insert(q) {
                return false;
            }
        }
    }
    for (w, n) in p.root.nodes() {
        let Some(imgs) = m.map.get(&w) else { return false };
        match &n.label {
            PatternLabel::IntervalVar(z) => {
                let Some(val) = m.intervals.get(z) else { return false };
                if imgs.len() != val.len() {
                    return false;
                }
                for (q, want) in imgs.iter().zip(val) {
                    if t.get(q) != Some(want) {
                        return false;
                    }
                }
                for pair in imgs.windows(2) {
                    let (a, b) = (&pair[0], &pair[1]);
                    if a.parent() != b.parent() || a.last().map(|x| x + 1) != b.last() {
                        return false;
                    }
                }
            }
            label => {
                if imgs.len() != 1 {
                    return false;
                }
                let Some(sub) = t.get(&imgs[0]) else { return false };
                let ok = match label {
                    PatternLabel::Const(l) => l == sub.label(),
                    PatternLabel::NodeVar(x) => m.nodes.get(x).map(String::as_str) == Some(sub.label()),
                    PatternLabel::TreeVar(y) => m.trees.get(y) == Some(sub),
                    PatternLabel::IntervalVar(_) => unreachable!(),
                };
                if !ok {
                    return false;
                }
                if !label.is_leaf_only() {
                    // Children images, concatenated in order, are exactly the
                    // node's children.
                    let mut covered = Vec::new();
                    for i in 0..n.children.len() {
                        let Some(ci) = m.map.get(&w.child(i)) else { return false };
                        covered.extend(ci.iter().cloned());
                    }
                    let expect: Vec<Position> = (0..sub.degree()).map(|q| imgs[0].child(q)).collect();
                    if covered != expect {
                        return false;
                    }
                }
            }
        }
    }
    m.map.get(&Position::root()).map(|v| v.as_slice()) == Some(std::slice::from_ref(&m.root_image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{match_at, parse_pattern};
    use crate::tree::parse_tree;

    fn t(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    fn ip(s: &str) -> IntervalPattern {
        parse_interval_pattern(s).unwrap()
    }

    fn root() -> Position {
        Position::root()
    }

    #[test]
    fn conjunction_with_false() {
        let m = interval_match_at(&ip("and(@Z1,false,@Z2)"), &t("and(A,false,B)"), &root())
            .unwrap()
            .unwrap();
        assert_eq!(m.intervals["Z1"], vec![t("A")]);
        assert_eq!(m.intervals["Z2"], vec![t("B")]);
        assert!(verify_interval_match(&ip("and(@Z1,false,@Z2)"), &t("and(A,false,B)"), &m));
    }

    #[test]
    fn empty_interval() {
        let m = interval_match_at(&ip("a(@Z)"), &t("a"), &root()).unwrap().unwrap();
        assert!(m.intervals["Z"].is_empty());
    }

    #[test]
    fn string_pattern_gadget() {
        let p = ip("a(0,?y1,@Z1,1,?y1,@Z1,0)");
        let pos = t("a(0,0,1,1,1,0,1,1,0)");
        let m = interval_match_at(&p, &pos, &root()).unwrap().unwrap();
        assert_eq!(m.nodes["y1"], "0");
        assert_eq!(m.intervals["Z1"], vec![t("1"), t("1")]);
        assert!(verify_interval_match(&p, &pos, &m));
        assert!(interval_match_at(&p, &t("a(0,0,1,1,0)"), &root()).unwrap().is_none());
    }

    #[test]
    fn swap_or_not() {
        let rho = parse_interval_rule("a(@Z1,@Z2) ~> b(@Z2,@Z1)").unwrap();
        let res = interval_apply_at(&rho, &t("a(c,d)"), &root()).unwrap();
        assert_eq!(res.len(), 2);
        assert!(res.contains(&t("b(d,c)")));
        assert!(res.contains(&t("b(c,d)")));
    }

    #[test]
    fn agrees_with_plain_matching() {
        let tree = t("f(g(a,b),g(a,b),c)");
        for pat in ["?x($A,$A,c)", "f(g(?u,?v),$B,?w)", "?x", "g(a,b)"] {
            let plain = parse_pattern(pat).unwrap();
            for v in tree.positions() {
                let a = match_at(&plain, &tree, &v).is_some();
                let b = interval_match_at(&ip(pat), &tree, &v).unwrap().is_some();
                assert_eq!(a, b, "{pat} at {v}");
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let p = ip("a(@A,@B,@C,@D,z)");
        let tree = t("a(b,b,b,b,b,b,b,b,b,b,b,b)");
        assert!(matches!(
            interval_match_at_with(&p, &tree, &root(), 50),
            Err(Error::ResourceLimit(_))
        ));
        assert!(interval_match_at(&p, &tree, &root()).unwrap().is_none());
    }

    #[test]
    fn rule_validation() {
        assert!(parse_interval_rule("a(@Z) ~> b(@Y)").is_err());
        assert!(parse_interval_rule("@Z ~> b").is_err());
        assert!(parse_interval_rule("a(@Z(b)) ~> b").is_err());
        let rs = parse_interval_rule_file("rel: a(@Z1) ~> b(@Z1)\n# c\ndel: ?x(@Z1,a(@Z3),@Z2) ~> ?x(@Z1,@Z3,@Z2)\n").unwrap();
        assert_eq!(rs.len(), 2);
        assert_eq!(rs[1].to_string(), "?x(@Z1,a(@Z3),@Z2) ~> ?x(@Z1,@Z3,@Z2)");
    }
}
