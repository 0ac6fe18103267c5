//! Polynomial-time learner for a single rule applied once at the root of
//! every pair, and its generalisation to one fixed position per pair.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::LearningInstance;
use crate::pattern::{PNode, PatternLabel, TreePattern};
use crate::transform::{apply_at, Transformation};
use crate::tree::{contexts_isomorphic, Position, Tree};

/// For every position of a list of trees, the label of each tree there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequirementTree {
    pub positions: BTreeMap<Position, Vec<Option<String>>>,
}

impl RequirementTree {
    pub fn new(trees: &[Tree]) -> RequirementTree {
        let mut positions: BTreeMap<Position, Vec<Option<String>>> = BTreeMap::new();
        for (i, t) in trees.iter().enumerate() {
            for (p, sub) in t.nodes() {
                positions.entry(p).or_insert_with(|| vec![None; trees.len()])[i] = Some(sub.label().to_string());
            }
        }
        RequirementTree { positions }
    }

    fn complete(&self, p: &Position) -> bool {
        self.positions.get(p).is_some_and(|row| row.iter().all(Option::is_some))
    }

    fn children(&self, p: &Position) -> Vec<Position> {
        (0..)
            .map(|c| p.child(c))
            .take_while(|c| self.positions.contains_key(c))
            .collect()
    }
}

fn var_name(prefix: char, index: usize) -> String {
    format!("{prefix}{index:04}")
}

/// The largest pattern matching every source at the root. Every variable
/// occurs once.
pub fn alg_body(sources: &[Tree]) -> Result<TreePattern> {
    if sources.is_empty() {
        return Err(Error::InvalidInput("alg_body needs at least one source".into()));
    }
    let map = RequirementTree::new(sources);
    let mut body: BTreeSet<Position> = BTreeSet::new();
    body.insert(Position::root());
    // BTreeMap order visits parents before children.
    for p in map.positions.keys() {
        let Some(parent) = p.parent() else { continue };
        if body.contains(&parent) && map.children(&parent).iter().all(|s| map.complete(s)) {
            body.insert(p.clone());
        }
    }
    let mut counter = 0;
    fn build(
        p: &Position,
        sources: &[Tree],
        body: &BTreeSet<Position>,
        counter: &mut usize,
    ) -> PNode {
        *counter += 1;
        let me = *counter;
        let children: Vec<PNode> = (0..)
            .map(|c| p.child(c))
            .take_while(|c| body.contains(c))
            .map(|c| build(&c, sources, body, counter))
            .collect();
        let leaf_everywhere = sources.iter().all(|t| t.get(p).is_some_and(Tree::is_leaf));
        let label = if !children.is_empty() || leaf_everywhere {
            PatternLabel::NodeVar(var_name('x', me))
        } else {
            PatternLabel::TreeVar(var_name('Y', me))
        };
        PNode::new(label, children)
    }
    TreePattern::new(build(&Position::root(), sources, &body, &mut counter))
}

/// The labels that can produce `label` at `p_l` of `t_star` from `t`: the
/// constant itself and the body variables at positions of `t` carrying it.
pub fn alg_possibilities(
    sigma: &TreePattern,
    label: &str,
    p_l: &Position,
    t: &Tree,
    t_star: &Tree,
) -> BTreeSet<PatternLabel> {
    let mut out = BTreeSet::new();
    let Some(target_sub) = t_star.get(p_l) else {
        return out;
    };
    out.insert(PatternLabel::Const(label.to_string()));
    for (p, sub) in t.nodes() {
        if sub.label() != label {
            continue;
        }
        match sigma.label_at(&p) {
            Some(l @ PatternLabel::TreeVar(_)) => {
                if sub == *target_sub {
                    out.insert(l.clone());
                }
            }
            Some(l @ PatternLabel::NodeVar(_)) => {
                out.insert(l.clone());
            }
            _ => {}
        }
    }
    out
}

/// The only head that can work with `sigma`, or `None` when no label fits
/// the root of every target.
pub fn alg_head(req: &RequirementTree, sigma: &TreePattern, pairs: &[(Tree, Tree)]) -> Result<Option<TreePattern>> {
    let mut head: BTreeMap<Position, BTreeSet<PatternLabel>> = BTreeMap::new();
    for (p, row) in &req.positions {
        let mut acc: Option<BTreeSet<PatternLabel>> = None;
        for ((t, t_star), label) in pairs.iter().zip(row) {
            let poss = match label {
                Some(l) => alg_possibilities(sigma, l, p, t, t_star),
                None => BTreeSet::new(),
            };
            acc = Some(match acc {
                None => poss,
                Some(a) => a.intersection(&poss).cloned().collect(),
            });
        }
        head.insert(p.clone(), acc.unwrap_or_default());
    }
    let pick = |set: &BTreeSet<PatternLabel>| -> PatternLabel {
        let least = |f: fn(&PatternLabel) -> bool| set.iter().filter(|l| f(l)).min_by(|a, b| a.name().cmp(b.name())).cloned();
        least(|l| matches!(l, PatternLabel::TreeVar(_)))
            .or_else(|| least(|l| matches!(l, PatternLabel::NodeVar(_))))
            .unwrap_or_else(|| set.iter().next().expect("non-empty").clone())
    };
    fn build(
        p: &Position,
        head: &BTreeMap<Position, BTreeSet<PatternLabel>>,
        pick: &dyn Fn(&BTreeSet<PatternLabel>) -> PatternLabel,
    ) -> Option<PNode> {
        let set = head.get(p).filter(|s| !s.is_empty())?;
        let label = pick(set);
        let children = if matches!(label, PatternLabel::TreeVar(_)) {
            Vec::new()
        } else {
            (0..).map_while(|c| build(&p.child(c), head, pick)).collect()
        };
        Some(PNode::new(label, children))
    }
    build(&Position::root(), &head, &pick).map(TreePattern::new).transpose()
}

/// A single rule that rewrites every source into its target when applied at
/// the root, if one exists.
pub fn learn_root(inst: &LearningInstance) -> Result<Option<Transformation>> {
    inst.validate()?;
    if inst.steps != 1 || inst.rules != 1 {
        return Err(Error::InvalidInstance(format!(
            "the exact learner needs s = 1 and r = 1, got s = {} and r = {}",
            inst.steps, inst.rules
        )));
    }
    let pairs: Vec<(Tree, Tree)> = inst.pairs.iter().map(|p| (p.source.clone(), p.target.clone())).collect();
    learn_pairs_at_root(&pairs)
}

fn learn_pairs_at_root(pairs: &[(Tree, Tree)]) -> Result<Option<Transformation>> {
    let in_sources: BTreeSet<String> = pairs.iter().flat_map(|(t, _)| t.labels()).collect();
    let target_sets: Vec<BTreeSet<String>> = pairs.iter().map(|(_, t)| t.labels()).collect();
    let in_targets: BTreeSet<&String> = target_sets.iter().flatten().collect();
    for l in in_targets {
        if !in_sources.contains(l) && !target_sets.iter().all(|s| s.contains(l)) {
            return Ok(None);
        }
    }
    let sources: Vec<Tree> = pairs.iter().map(|(t, _)| t.clone()).collect();
    let targets: Vec<Tree> = pairs.iter().map(|(_, t)| t.clone()).collect();
    let sigma = alg_body(&sources)?;
    let req = RequirementTree::new(&targets);
    let Some(tau) = alg_head(&req, &sigma, pairs)? else {
        return Ok(None);
    };
    let rule = Transformation::new("rho1", sigma, tau)?;
    let works = pairs
        .iter()
        .all(|(t, t_star)| apply_at(&rule, t, &Position::root()).as_ref() == Some(t_star));
    Ok(works.then(|| rule.canonical()))
}

/// As [`learn_root`], with the rule applied at a given position of each
/// pair. Source and target must agree outside the subtree at that position.
pub fn learn_at_positions(inst: &LearningInstance, positions: &[Position]) -> Result<Option<Transformation>> {
    inst.validate()?;
    if positions.len() != inst.pairs.len() {
        return Err(Error::InvalidInput(format!(
            "{} positions given for {} pairs",
            positions.len(),
            inst.pairs.len()
        )));
    }
    let mut pairs = Vec::new();
    for (i, (pair, v)) in inst.pairs.iter().zip(positions).enumerate() {
        let (Some(s), Some(t)) = (pair.source.get(v), pair.target.get(v)) else {
            return Err(Error::UnknownPosition(v.clone()));
        };
        if !contexts_isomorphic(&pair.source, v, &pair.target, v)? {
            return Err(Error::InvalidInput(format!(
                "pair {}: the trees differ outside the subtree at {v}",
                i + 1
            )));
        }
        pairs.push((s.clone(), t.clone()));
    }
    learn_pairs_at_root(&pairs)
}
