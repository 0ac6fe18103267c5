//! Exhaustive learner for small instances, used as a reference for the SAT
//! and exact learners.
//!
//! For one-step instances the search is complete: every rule of a solution
//! explains some pair on its own, so it is among the rules that rewrite a
//! subtree of that pair's source into the matching subtree of its target,
//! and those are enumerated exactly. For more steps, rules are drawn from a
//! size-bounded pool whose bodies match a source subtree.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::instance::{explain_pair, LearningInstance};
use crate::pattern::{PNode, PatternLabel, TreePattern};
use crate::transform::{apply_at, explains, RuleSet, Transformation};
use crate::tree::{contexts_isomorphic, Position, Tree};

#[derive(Clone, Debug)]
pub struct BruteConfig {
    /// Node bound for bodies and heads in the multi-step pool.
    pub max_size: usize,
    /// Work budget: the total number of patterns and rules generated.
    pub max_candidates: usize,
    /// Abort when more rule tuples than this would be tried.
    pub max_tuples: u64,
    /// Only apply rules at the root (one-step instances).
    pub root_only: bool,
}

impl Default for BruteConfig {
    fn default() -> Self {
        BruteConfig {
            max_size: 4,
            max_candidates: 2_000_000,
            max_tuples: 50_000_000,
            root_only: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Value {
    Node(String),
    Tree(Tree),
}

#[derive(Clone, Default)]
struct Vars {
    list: Vec<(PatternLabel, Value)>,
    nodes: usize,
    trees: usize,
}

impl Vars {
    fn fresh(&self, v: Value) -> (PatternLabel, Vars) {
        let mut next = self.clone();
        let label = match &v {
            Value::Node(_) => {
                next.nodes += 1;
                PatternLabel::NodeVar(format!("x{}", next.nodes))
            }
            Value::Tree(_) => {
                next.trees += 1;
                PatternLabel::TreeVar(format!("Y{}", next.trees))
            }
        };
        next.list.push((label.clone(), v));
        (label, next)
    }

    /// A fresh variable or any earlier one holding the same value.
    fn choices(&self, v: Value) -> Vec<(PatternLabel, Vars)> {
        let mut out: Vec<(PatternLabel, Vars)> = self
            .list
            .iter()
            .filter(|(_, w)| *w == v)
            .map(|(l, _)| (l.clone(), self.clone()))
            .collect();
        out.push(self.fresh(v));
        out
    }
}

struct Limit {
    left: usize,
}

impl Limit {
    fn take(&mut self, n: usize) -> Result<()> {
        if n > self.left {
            return Err(Error::ResourceLimit("too many candidate patterns".into()));
        }
        self.left -= n;
        Ok(())
    }
}

/// Every pattern with at most `budget` nodes that matches `u` at its root,
/// with the variables it introduces. Variables may repeat when their values
/// agree. With `general` set, only fresh variables are used.
fn bodies(u: &Tree, vars: &Vars, budget: usize, general: bool, lim: &mut Limit) -> Result<Vec<(PNode, Vars, usize)>> {
    if budget == 0 {
        return Ok(Vec::new());
    }
    let choices = |v: Value| if general { vec![vars.fresh(v)] } else { vars.choices(v) };
    let mut out = Vec::new();
    for (l, vs) in choices(Value::Tree(u.clone())) {
        out.push((PNode::leaf(l), vs, 1));
    }
    if budget > u.degree() {
        let mut heads = Vec::new();
        if !general {
            heads.push((PatternLabel::Const(u.label().to_string()), vars.clone()));
        }
        heads.extend(choices(Value::Node(u.label().to_string())));
        for (label, vs) in heads {
            let mut partial: Vec<(Vec<PNode>, Vars, usize)> = vec![(Vec::new(), vs, 1)];
            for child in u.children() {
                let mut next = Vec::new();
                for (kids, vs, size) in partial {
                    for (k, vs2, ks) in bodies(child, &vs, budget - size, general, lim)? {
                        let mut kids = kids.clone();
                        kids.push(k);
                        next.push((kids, vs2, size + ks));
                    }
                }
                lim.take(next.len())?;
                partial = next;
            }
            out.extend(partial.into_iter().map(|(kids, vs, size)| (PNode::new(label.clone(), kids), vs, size)));
        }
    }
    lim.take(out.len())?;
    Ok(out)
}

/// Every head that instantiates to `u` under the values of `vars`.
fn heads_for(u: &Tree, vars: &Vars, lim: &mut Limit) -> Result<Vec<PNode>> {
    let mut out = Vec::new();
    for (l, v) in &vars.list {
        if matches!(v, Value::Tree(t) if t == u) {
            out.push(PNode::leaf(l.clone()));
        }
    }
    let mut labels = vec![PatternLabel::Const(u.label().to_string())];
    for (l, v) in &vars.list {
        if matches!(v, Value::Node(n) if n == u.label()) {
            labels.push(l.clone());
        }
    }
    let mut forests: Vec<Vec<PNode>> = vec![Vec::new()];
    for child in u.children() {
        let options = heads_for(child, vars, lim)?;
        let mut next = Vec::new();
        for f in &forests {
            for o in &options {
                let mut f = f.clone();
                f.push(o.clone());
                next.push(f);
            }
        }
        lim.take(next.len())?;
        forests = next;
    }
    for l in labels {
        for f in &forests {
            out.push(PNode::new(l.clone(), f.clone()));
        }
    }
    Ok(out)
}

/// Every pattern with at most `budget` nodes over the constants `labels`
/// and the variables of `vars`.
fn any_patterns(labels: &BTreeSet<String>, vars: &Vars, budget: usize, lim: &mut Limit) -> Result<Vec<(PNode, usize)>> {
    if budget == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (l, _) in vars.list.iter().filter(|(l, _)| matches!(l, PatternLabel::TreeVar(_))) {
        out.push((PNode::leaf(l.clone()), 1));
    }
    let inner: Vec<PatternLabel> = labels
        .iter()
        .map(|l| PatternLabel::Const(l.clone()))
        .chain(vars.list.iter().filter(|(l, _)| matches!(l, PatternLabel::NodeVar(_))).map(|(l, _)| l.clone()))
        .collect();
    for (kids, size) in any_forests(labels, vars, budget - 1, lim)? {
        for l in &inner {
            out.push((PNode::new(l.clone(), kids.clone()), size + 1));
        }
    }
    lim.take(out.len())?;
    Ok(out)
}

fn any_forests(labels: &BTreeSet<String>, vars: &Vars, budget: usize, lim: &mut Limit) -> Result<Vec<(Vec<PNode>, usize)>> {
    let mut out = vec![(Vec::new(), 0)];
    if budget == 0 {
        return Ok(out);
    }
    for (first, fs) in any_patterns(labels, vars, budget, lim)? {
        for (rest, rs) in any_forests(labels, vars, budget - fs, lim)? {
            let mut kids = vec![first.clone()];
            kids.extend(rest);
            out.push((kids, fs + rs));
        }
    }
    lim.take(out.len())?;
    Ok(out)
}

fn rule(body: PNode, head: PNode) -> Result<Transformation> {
    Ok(Transformation::new("rho", TreePattern::new(body)?, TreePattern::new(head)?)?.canonical())
}

/// All rules with at most `max_size` nodes in body and head whose body
/// matches some subtree of the source, over the labels of the pair, up to
/// renaming of variables.
pub fn enumerate_candidates(pair: (&Tree, &Tree), max_size: usize) -> Result<Vec<Transformation>> {
    enumerate_limited(pair, max_size, &mut Limit { left: BruteConfig::default().max_candidates })
}

fn enumerate_limited(pair: (&Tree, &Tree), max_size: usize, lim: &mut Limit) -> Result<Vec<Transformation>> {
    let (t, t_star) = pair;
    let labels: BTreeSet<String> = t.labels().union(&t_star.labels()).cloned().collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (_, sub) in t.nodes() {
        for (body, vars, _) in bodies(&sub, &Vars::default(), max_size, false, lim)? {
            for (head, _) in any_patterns(&labels, &vars, max_size, lim)? {
                let r = rule(body.clone(), head)?;
                if seen.insert(r.to_string()) {
                    lim.take(1)?;
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

/// All rules that rewrite `t` into `t_star` in one application.
pub fn explaining_rules(t: &Tree, t_star: &Tree) -> Result<Vec<Transformation>> {
    explaining_limited(t, t_star, false, &mut Limit { left: BruteConfig::default().max_candidates })
}

/// With `general` set, bodies use only fresh variables. A constant or a
/// repeated variable in a body only restricts where the rule matches, and
/// where it does match the generalised body gives the same result, so for
/// covering pairs in one step nothing is lost.
fn explaining_limited(t: &Tree, t_star: &Tree, general: bool, lim: &mut Limit) -> Result<Vec<Transformation>> {
    explaining_at(t, t_star, t.positions(), general, lim)
}

fn explaining_at(
    t: &Tree,
    t_star: &Tree,
    positions: Vec<Position>,
    general: bool,
    lim: &mut Limit,
) -> Result<Vec<Transformation>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for v in positions {
        let (Some(sub), Some(sub_star)) = (t.get(&v), t_star.get(&v)) else { continue };
        if !contexts_isomorphic(t, &v, t_star, &v)? {
            continue;
        }
        for (body, vars, _) in bodies(sub, &Vars::default(), usize::MAX, general, lim)? {
            for head in heads_for(sub_star, &vars, lim)? {
                let r = rule(body.clone(), head)?;
                if seen.insert(r.to_string()) {
                    lim.take(1)?;
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

fn named(rules: Vec<Transformation>) -> Result<RuleSet> {
    RuleSet::new(
        rules
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r.name = format!("rho{}", i + 1);
                r
            })
            .collect(),
    )
}

/// A rule set of at most `r` rules explaining the required number of pairs
/// in at most `s` steps, or `None` if the search space holds none.
pub fn learn_brute(inst: &LearningInstance) -> Result<Option<RuleSet>> {
    learn_brute_with(inst, &BruteConfig::default())
}

pub fn learn_brute_with(inst: &LearningInstance, cfg: &BruteConfig) -> Result<Option<RuleSet>> {
    inst.validate()?;
    if cfg.root_only && inst.steps != 1 {
        return Err(Error::InvalidInstance("root-only search needs s = 1".into()));
    }
    if inst.steps == 1 {
        one_step(inst, cfg)
    } else {
        multi_step(inst, cfg)
    }
}

struct Cover<'a> {
    inst: &'a LearningInstance,
    candidates: HashMap<usize, Vec<(Transformation, Vec<usize>)>>,
    failed: HashSet<(Vec<usize>, usize, usize)>,
    lim: Limit,
    root_only: bool,
}

impl Cover<'_> {
    /// Candidates for pair `p`, each with the pairs it explains.
    fn candidates(&mut self, p: usize) -> Result<&Vec<(Transformation, Vec<usize>)>> {
        if !self.candidates.contains_key(&p) {
            let pair = &self.inst.pairs[p];
            let mut by_set: HashMap<Vec<usize>, Transformation> = HashMap::new();
            let mut order = Vec::new();
            let root = Position::root();
            let positions = if self.root_only { vec![root.clone()] } else { pair.source.positions() };
            for r in explaining_at(&pair.source, &pair.target, positions, true, &mut self.lim)? {
                let set: Vec<usize> = (0..self.inst.pairs.len())
                    .filter(|&q| {
                        let (t, t_star) = (&self.inst.pairs[q].source, &self.inst.pairs[q].target);
                        q == p
                            || if self.root_only {
                                apply_at(&r, t, &root).as_ref() == Some(t_star)
                            } else {
                                explains(&r, t, t_star).is_some()
                            }
                    })
                    .collect();
                if let Entry::Vacant(e) = by_set.entry(set) {
                    order.push(e.key().clone());
                    e.insert(r);
                }
            }
            let list = order
                .into_iter()
                .map(|s| {
                    let r = by_set.remove(&s).expect("recorded");
                    (r, s)
                })
                .collect();
            self.candidates.insert(p, list);
        }
        Ok(&self.candidates[&p])
    }

    fn search(&mut self, open: Vec<usize>, rules: usize, skips: usize) -> Result<Option<Vec<Transformation>>> {
        if open.len() <= skips {
            return Ok(Some(Vec::new()));
        }
        let key = (open.clone(), rules, skips);
        if rules == 0 || self.failed.contains(&key) {
            return Ok(None);
        }
        let p = open[0];
        for (r, covered) in self.candidates(p)?.clone() {
            let rest: Vec<usize> = open.iter().copied().filter(|q| !covered.contains(q)).collect();
            if let Some(mut found) = self.search(rest, rules - 1, skips)? {
                found.insert(0, r);
                return Ok(Some(found));
            }
        }
        if skips > 0 {
            if let Some(found) = self.search(open[1..].to_vec(), rules, skips - 1)? {
                return Ok(Some(found));
            }
        }
        self.failed.insert(key);
        Ok(None)
    }
}

fn one_step(inst: &LearningInstance, cfg: &BruteConfig) -> Result<Option<RuleSet>> {
    let n = inst.pairs.len();
    let skips = n - inst.required_pairs();
    let mut cover = Cover {
        inst,
        candidates: HashMap::new(),
        failed: HashSet::new(),
        lim: Limit { left: cfg.max_candidates },
        root_only: cfg.root_only,
    };
    match cover.search((0..n).collect(), inst.rules, skips)? {
        Some(rules) => named(rules).map(Some),
        None => Ok(None),
    }
}

fn multi_step(inst: &LearningInstance, cfg: &BruteConfig) -> Result<Option<RuleSet>> {
    let mut lim = Limit { left: cfg.max_candidates };
    let mut seen = HashSet::new();
    let mut pool = Vec::new();
    for p in &inst.pairs {
        let found = explaining_limited(&p.source, &p.target, true, &mut lim)?
            .into_iter()
            .chain(enumerate_limited((&p.source, &p.target), cfg.max_size, &mut lim)?);
        for r in found {
            if seen.insert(r.to_string()) {
                pool.push(r);
            }
        }
    }
    let need = inst.required_pairs();
    let mut tried: u64 = 0;
    let mut pick = vec![0usize; 0];
    for size in 1..=inst.rules.min(pool.len()) {
        pick.clear();
        pick.extend(0..size);
        loop {
            tried += 1;
            if tried > cfg.max_tuples {
                return Err(Error::ResourceLimit(format!("more than {} rule tuples", cfg.max_tuples)));
            }
            let set = named(pick.iter().map(|&i| pool[i].clone()).collect())?;
            let mut explained = 0;
            for (k, pair) in inst.pairs.iter().enumerate() {
                if explain_pair(&set, &pair.source, &pair.target, inst.steps)?.is_some() {
                    explained += 1;
                }
                if explained + (inst.pairs.len() - k - 1) < need {
                    break;
                }
            }
            if explained >= need {
                return Ok(Some(set));
            }
            if !next_combination(&mut pick, pool.len()) {
                break;
            }
        }
    }
    Ok(None)
}

fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    for i in (0..k).rev() {
        if pick[i] < n - k + i {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
