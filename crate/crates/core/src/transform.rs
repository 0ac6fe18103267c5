//! Tree pattern transformations, their application, and bounded multi-step
//! explanation search.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::pattern::{
    instantiate, match_at, parse_pnode, verify_match_map, PNode, PatternLabel, TreePattern,
};
use crate::text::{self, Cursor, Tok};
use crate::tree::{contexts_isomorphic, Context, Position, Tree};

/// A rule `body ~> head`. Every head variable occurs in the body.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transformation {
    pub name: String,
    body: TreePattern,
    head: TreePattern,
}

impl Transformation {
    pub fn new(name: impl Into<String>, body: TreePattern, head: TreePattern) -> Result<Self> {
        let body_vars = body.variables();
        for v in head.variables() {
            if !body_vars.contains(&v) {
                return Err(Error::InvalidRule(format!(
                    "head variable {v} does not occur in the body"
                )));
            }
        }
        Ok(Transformation {
            name: name.into(),
            body,
            head,
        })
    }

    pub fn body(&self) -> &TreePattern {
        &self.body
    }

    pub fn head(&self) -> &TreePattern {
        &self.head
    }

    /// Total number of pattern nodes.
    pub fn size(&self) -> usize {
        self.body.size() + self.head.size()
    }

    /// Renames variables to `x1, x2, ...` and `Y1, Y2, ...` in pre-order of
    /// their first occurrence in the body.
    pub fn canonical(&self) -> Transformation {
        let rename = canonical_renaming(self.body.root());
        let apply = |p: &TreePattern| {
            TreePattern::new(p.root().map_labels(&mut |l| rename.get(l).cloned().unwrap_or_else(|| l.clone())))
                .expect("renaming keeps patterns valid")
        };
        Transformation {
            name: self.name.clone(),
            body: apply(&self.body),
            head: apply(&self.head),
        }
    }

    /// Equality up to variable renaming, ignoring names.
    pub fn equivalent(&self, other: &Transformation) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.body == b.body && a.head == b.head
    }
}

pub(crate) fn canonical_renaming(body: &PNode) -> HashMap<PatternLabel, PatternLabel> {
    let (mut nx, mut ny, mut nz) = (0, 0, 0);
    let mut out = HashMap::new();
    for v in body.variables() {
        let renamed = match v {
            PatternLabel::NodeVar(_) => {
                nx += 1;
                PatternLabel::NodeVar(format!("x{nx}"))
            }
            PatternLabel::TreeVar(_) => {
                ny += 1;
                PatternLabel::TreeVar(format!("Y{ny}"))
            }
            PatternLabel::IntervalVar(_) => {
                nz += 1;
                PatternLabel::IntervalVar(format!("Z{nz}"))
            }
            PatternLabel::Const(_) => continue,
        };
        out.insert(v, renamed);
    }
    out
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~> {}", self.body, self.head)
    }
}

impl fmt::Debug for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self)
    }
}

/// An ordered list of uniquely named rules.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct RuleSet {
    rules: Vec<Transformation>,
}

impl RuleSet {
    pub fn new(rules: Vec<Transformation>) -> Result<RuleSet> {
        let mut seen = HashSet::new();
        for r in &rules {
            if !seen.insert(r.name.as_str()) {
                return Err(Error::InvalidRule(format!("duplicate rule name '{}'", r.name)));
            }
        }
        Ok(RuleSet { rules })
    }

    pub fn rules(&self) -> &[Transformation] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Transformation> {
        self.rules.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}: {}", r.name, r)?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceStep {
    pub rule: String,
    pub position: Position,
    pub result: Tree,
}

/// A rewrite sequence; the last result is the target.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct ApplicationTrace {
    pub steps: Vec<TraceStep>,
}

impl ApplicationTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Replays the trace from `source`, checking every step with the
    /// independent checker, and returns the final tree.
    pub fn replay(&self, gamma: &RuleSet, source: &Tree) -> Result<Tree> {
        let mut cur = source.clone();
        for (k, st) in self.steps.iter().enumerate() {
            let rule = gamma.get(&st.rule).ok_or_else(|| {
                Error::Verification(format!("step {k} uses unknown rule '{}'", st.rule))
            })?;
            if !check_application(rule, &cur, &st.position, &st.result) {
                return Err(Error::Verification(format!(
                    "step {k}: {} at {} does not turn {cur} into {}",
                    st.rule, st.position, st.result
                )));
            }
            cur = st.result.clone();
        }
        Ok(cur)
    }
}

impl fmt::Display for ApplicationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("(no steps)");
        }
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}@{} => {}", s.rule, s.position, s.result)?;
        }
        Ok(())
    }
}

pub fn apply_at(rho: &Transformation, t: &Tree, v: &Position) -> Option<Tree> {
    let m = match_at(&rho.body, t, v)?;
    let new_sub = instantiate(&rho.head, &m.binding)?;
    Some(Context::new(t.clone(), v.clone()).ok()?.plug(new_sub))
}

/// Every position where `rho` applies, with the result, in pre-order.
pub fn apply_all(rho: &Transformation, t: &Tree) -> Vec<(Position, Tree)> {
    t.positions()
        .into_iter()
        .filter_map(|v| apply_at(rho, t, &v).map(|r| (v, r)))
        .collect()
}

/// The pre-order-least position where applying `rho` yields `t_star`.
pub fn explains(rho: &Transformation, t: &Tree, t_star: &Tree) -> Option<Position> {
    t.positions().into_iter().find(|v| {
        contexts_isomorphic(t, v, t_star, v).unwrap_or(false)
            && apply_at(rho, t, v).is_some_and(|r| &r == t_star)
    })
}

/// Budgets for [`explains_in_steps`].
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    /// Maximum number of distinct trees stored across the search.
    pub max_frontier: usize,
    /// Intermediate trees larger than this factor times the larger input are
    /// not explored.
    pub size_factor: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_frontier: 1_000_000,
            size_factor: 64,
        }
    }
}

pub fn explains_in_steps(
    gamma: &RuleSet,
    t: &Tree,
    t_star: &Tree,
    s: usize,
) -> Result<Option<ApplicationTrace>> {
    explains_in_steps_with(gamma, t, t_star, s, SearchBudget::default())
}

/// Breadth-first search for a shortest trace of length at most `s`.
///
/// Successors are generated per tree in pre-order of the position and then by
/// rule index, so the returned trace is deterministic. Returns a resource
/// error if the answer would be "no" but part of the space was cut off by the
/// budget.
pub fn explains_in_steps_with(
    gamma: &RuleSet,
    t: &Tree,
    t_star: &Tree,
    s: usize,
    budget: SearchBudget,
) -> Result<Option<ApplicationTrace>> {
    if t == t_star {
        return Ok(Some(ApplicationTrace::default()));
    }
    let size_cap = budget.size_factor.saturating_mul(t.size().max(t_star.size()));
    let mut parent: HashMap<Tree, (Tree, usize, Position)> = HashMap::new();
    let mut visited: HashSet<Tree> = HashSet::new();
    visited.insert(t.clone());
    let mut frontier = vec![t.clone()];
    let mut pruned = false;

    let rebuild = |parent: &HashMap<Tree, (Tree, usize, Position)>, last: (Tree, usize, Position)| {
        let mut steps = Vec::new();
        let (mut prev, mut ri, mut pos) = last.clone();
        let mut result = t_star.clone();
        loop {
            steps.push(TraceStep {
                rule: gamma.rules[ri].name.clone(),
                position: pos.clone(),
                result: result.clone(),
            });
            if &prev == t {
                break;
            }
            let (pp, pri, ppos) = parent[&prev].clone();
            result = prev;
            prev = pp;
            ri = pri;
            pos = ppos;
        }
        steps.reverse();
        ApplicationTrace { steps }
    };

    for depth in 1..=s {
        let last_layer = depth == s;
        let mut next = Vec::new();
        for cur in &frontier {
            for v in cur.positions() {
                for (ri, rule) in gamma.rules.iter().enumerate() {
                    let Some(res) = apply_at(rule, cur, &v) else { continue };
                    if &res == t_star {
                        return Ok(Some(rebuild(&parent, (cur.clone(), ri, v))));
                    }
                    if last_layer || visited.contains(&res) {
                        continue;
                    }
                    if res.size() > size_cap {
                        pruned = true;
                        continue;
                    }
                    if visited.len() >= budget.max_frontier {
                        return Err(Error::ResourceLimit(format!(
                            "multi-step search exceeded {} stored trees",
                            budget.max_frontier
                        )));
                    }
                    visited.insert(res.clone());
                    parent.insert(res.clone(), (cur.clone(), ri, v.clone()));
                    next.push(res);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    if pruned {
        return Err(Error::ResourceLimit(format!(
            "intermediate trees above {size_cap} nodes were cut off"
        )));
    }
    Ok(None)
}

/// Independent check that applying `rho` at `v` turns `t` into `t_star`.
///
/// Builds the body and head node maps explicitly, checks them with the flat
/// match checker, compares variable values between the two sides, and checks
/// that the contexts agree.
pub fn check_application(rho: &Transformation, t: &Tree, v: &Position, t_star: &Tree) -> bool {
    if !contexts_isomorphic(t, v, t_star, v).unwrap_or(false) {
        return false;
    }
    let body_map: BTreeMap<Position, Position> = rho
        .body
        .nodes()
        .into_iter()
        .map(|(w, _)| {
            let img = v.concat(&w);
            (w, img)
        })
        .collect();
    let head_map: BTreeMap<Position, Position> = rho
        .head
        .nodes()
        .into_iter()
        .map(|(w, _)| {
            let img = v.concat(&w);
            (w, img)
        })
        .collect();
    if !verify_match_map(&rho.body, t, &body_map) || !verify_match_map(&rho.head, t_star, &head_map)
    {
        return false;
    }
    // Every tree position under v in t_star must be covered by the head map
    // or lie inside a tree-variable image.
    let value = |p: &TreePattern, tree: &Tree, var: &PatternLabel| -> Option<Tree> {
        p.nodes()
            .into_iter()
            .find(|(_, n)| &n.label == var)
            .and_then(|(w, _)| tree.get(&v.concat(&w)).cloned())
    };
    for var in rho.head.variables() {
        let (Some(b), Some(h)) = (value(&rho.body, t, &var), value(&rho.head, t_star, &var)) else {
            return false;
        };
        let same = match var {
            PatternLabel::NodeVar(_) => b.label() == h.label(),
            _ => b == h,
        };
        if !same {
            return false;
        }
    }
    true
}

/// Parses `BODY ~> HEAD`.
pub fn parse_rule(text: &str) -> Result<Transformation> {
    parse_rule_named("rho", text)
}

pub fn parse_rule_named(name: &str, text: &str) -> Result<Transformation> {
    let toks = text::tokenize(text)?;
    let mut cur = Cursor::new(&toks, text);
    let body = parse_pnode(&mut cur)?;
    cur.expect(&Tok::Arrow, "'~>'")?;
    let head = parse_pnode(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error_here("unexpected trailing input").into());
    }
    if body.has_interval_vars() || head.has_interval_vars() {
        return Err(Error::InvalidRule(
            "interval variables need an interval transformation".into(),
        ));
    }
    Transformation::new(name, TreePattern::new(body)?, TreePattern::new(head)?)
}

pub fn serialize_rule(rho: &Transformation) -> String {
    rho.to_string()
}

/// Splits `name: rest`, if the line starts with an identifier and a colon.
pub(crate) fn split_rule_name(line: &str) -> Option<(&str, &str, usize)> {
    let trimmed = line.trim_start();
    let end = trimmed
        .char_indices()
        .find(|&(_, c)| !text::is_bare_char(c))
        .map(|(i, _)| i)
        .unwrap_or(trimmed.len());
    if end == 0 {
        return None;
    }
    let rest = trimmed[end..].trim_start();
    let rest = rest.strip_prefix(':')?;
    let offset = line.len() - rest.len();
    Some((&trimmed[..end], rest, offset))
}

/// Shifts an error from a single-line parse to its place in a file.
pub(crate) fn relocate(e: Error, line: usize, col_offset: usize) -> Error {
    match e {
        Error::Parse(p) => Error::Parse(ParseError::new(
            line + p.line - 1,
            if p.line == 1 { p.column + col_offset } else { p.column },
            p.message,
        )),
        other => other,
    }
}

/// Parses a rule file: one `name: BODY ~> HEAD` per line, `#` comments.
/// Lines without a name get `rho1`, `rho2`, ... by position.
pub fn parse_rule_file(text: &str) -> Result<RuleSet> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let (name, body, offset) = match split_rule_name(line) {
            Some((n, rest, off)) => (n.to_string(), rest, off),
            None => (format!("rho{}", rules.len() + 1), line, 0),
        };
        let rule = parse_rule_named(&name, body).map_err(|e| relocate(e, i + 1, offset))?;
        rules.push(rule);
    }
    RuleSet::new(rules)
}

/// Removes a trailing `#` comment that is not inside quotes.
pub(crate) fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if in_quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
            }
        } else if c == '"' {
            in_quote = true;
        } else if c == '#' {
            return &line[..i];
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree;

    fn t(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    fn r(s: &str) -> Transformation {
        parse_rule(s).unwrap()
    }

    fn p(s: &str) -> Position {
        s.parse().unwrap()
    }

    #[test]
    fn rule_parsing() {
        let swap = r("?x1($Y1,$Y2) ~> ?x1($Y2,$Y1)");
        assert_eq!(swap.to_string(), "?x1($Y1,$Y2) ~> ?x1($Y2,$Y1)");
        assert!(parse_rule("a ~> a").is_ok());
        assert!(matches!(parse_rule("?x ~> ?y"), Err(Error::InvalidRule(_))));
        assert!(parse_rule("?x ~> $x").is_err());
        assert!(parse_rule("a ~ b").is_err());
        assert!(parse_rule("a b").is_err());
    }

    #[test]
    fn rule_file() {
        let text = "# comment\nswap: ?x($A,$B) ~> ?x($B,$A)\n\n\"#\" ~> b # trailing\n";
        let rs = parse_rule_file(text).unwrap();
        assert_eq!(rs.len(), 2);
        assert_eq!(rs.rules()[0].name, "swap");
        assert_eq!(rs.rules()[1].name, "rho2");
        assert_eq!(rs.rules()[1].body().to_string(), "\"#\"");
        let again = parse_rule_file(&rs.to_string()).unwrap();
        assert_eq!(again, rs);
        let err = parse_rule_file("a ~> a\nr: a(b ~> c").unwrap_err();
        match err {
            Error::Parse(pe) => assert_eq!(pe.line, 2),
            other => panic!("{other}"),
        }
        assert!(parse_rule_file("r: a ~> a\nr: b ~> b").is_err());
    }

    #[test]
    fn example_2_1() {
        let rho = r("?x1($Y1,$Y2) ~> ?x1($Y2,$Y1)");
        assert_eq!(apply_at(&rho, &t("a(b(d,e),c)"), &Position::root()).unwrap(), t("a(c,b(d,e))"));
        assert_eq!(apply_at(&rho, &t("b(e(d,g),c)"), &p("0")).unwrap(), t("b(e(g,d),c)"));
    }

    #[test]
    fn fig1_pairs() {
        let rho = r("?x1($Y1,$Y2) ~> ?x1($Y2,$Y1)");
        let s1 = t("imp(E,and(not(A),not(C)))");
        let g1 = t("imp(and(not(A),not(C)),E)");
        let s2 = t("and(imp(B,D),A)");
        let g2 = t("and(imp(D,B),A)");
        assert_eq!(apply_at(&rho, &s1, &Position::root()).unwrap(), g1);
        assert_eq!(explains(&rho, &s1, &g1), Some(Position::root()));
        assert_eq!(explains(&rho, &s2, &g2), Some(p("0")));
    }

    #[test]
    fn identity_and_apply_all() {
        let id = r("?x ~> ?x");
        let leaf = t("a(b,c)");
        assert_eq!(apply_at(&id, &leaf, &p("0")).unwrap(), leaf);
        assert_eq!(explains(&id, &leaf, &leaf), Some(p("0")));
        assert_eq!(explains(&id, &t("a"), &t("a")), Some(Position::root()));
        let id_all = r("$Y ~> $Y");
        assert_eq!(explains(&id_all, &leaf, &leaf), Some(Position::root()));

        let swap = r("?x($Y1,$Y2) ~> ?x($Y2,$Y1)");
        let res = apply_all(&swap, &t("a(b,a(c,d))"));
        let at: Vec<_> = res.iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(at, ["-", "1"]);
        assert!(apply_all(&r("z ~> y"), &t("a(b)")).is_empty());
    }

    #[test]
    fn example_d3() {
        let swap = r("?x($Y1,$Y2) ~> ?x($Y2,$Y1)");
        let res = apply_all(&swap, &t("a(b,a(c,b))"));
        assert_eq!(res[0], (Position::root(), t("a(a(c,b),b)")));
        assert_eq!(res[1], (p("1"), t("a(b,a(b,c))")));
        let gamma = RuleSet::new(vec![swap]).unwrap();
        let tr = explains_in_steps(&gamma, &t("a(b,a(c,b))"), &t("a(a(b,c),b)"), 2)
            .unwrap()
            .unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.replay(&gamma, &t("a(b,a(c,b))")).unwrap(), t("a(a(b,c),b)"));
        assert!(explains_in_steps(&gamma, &t("a(b,a(c,b))"), &t("a(a(b,c),b)"), 1)
            .unwrap()
            .is_none());
    }

    #[test]
    fn zero_steps() {
        let gamma = RuleSet::default();
        let tr = explains_in_steps(&gamma, &t("a"), &t("a"), 0).unwrap().unwrap();
        assert!(tr.is_empty());
        assert!(explains_in_steps(&gamma, &t("a"), &t("b"), 3).unwrap().is_none());
    }

    #[test]
    fn budget_is_reported() {
        let grow = r("?x ~> f(?x,?x)");
        let gamma = RuleSet::new(vec![grow]).unwrap();
        let budget = SearchBudget {
            max_frontier: 10,
            size_factor: 64,
        };
        let res = explains_in_steps_with(&gamma, &t("a"), &t("z"), 6, budget);
        assert!(matches!(res, Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn checker() {
        let rho = r("?x1($Y1,$Y2) ~> ?x1($Y2,$Y1)");
        assert!(check_application(&rho, &t("b(e(d,g),c)"), &p("0"), &t("b(e(g,d),c)")));
        assert!(!check_application(&rho, &t("b(e(d,g),c)"), &p("0"), &t("b(e(g,d),x)")));
        assert!(!check_application(&rho, &t("b(e(d,g),c)"), &p("0"), &t("b(f(g,d),c)")));
        assert!(!check_application(&rho, &t("b(e(d,g),c)"), &Position::root(), &t("b(e(g,d),c)")));
    }

    #[test]
    fn canonical_names() {
        let a = r("?u($P,?v) ~> ?v($P)");
        assert_eq!(a.canonical().to_string(), "?x1($Y1,?x2) ~> ?x2($Y1)");
        assert!(a.equivalent(&r("?a($B,?c) ~> ?c($B)")));
        assert!(!a.equivalent(&r("?a($B,?c) ~> ?a($B)")));
    }
}
