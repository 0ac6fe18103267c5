use std::collections::BTreeMap;

use super::build::{Meta, Sym};
use super::{Encoding, Solution};
use crate::error::{Error, Result};
use crate::instance::{explain_pair, LearningInstance};
use crate::pattern::{PNode, PatternLabel, TreePattern};
use crate::sat::{Model, Var};
use crate::transform::{apply_at, ApplicationTrace, RuleSet, TraceStep, Transformation};
use crate::tree::{Position, Tree};

fn mismatch(msg: String) -> Error {
    Error::Verification(msg)
}

fn side_pattern(meta: &Meta, rows: &[Vec<Option<Var>>], model: &Model) -> Result<PNode> {
    let chosen = |w: usize| -> Result<Sym> {
        let mut hit = None;
        for (ix, v) in rows[w].iter().enumerate() {
            if v.is_some_and(|v| model.value(v)) {
                if hit.is_some() {
                    return Err(mismatch(format!(
                        "pattern node {} has two labels",
                        meta.sk.position(w)
                    )));
                }
                hit = Some(meta.sym_of(ix));
            }
        }
        hit.ok_or_else(|| mismatch(format!("pattern node {} has no label", meta.sk.position(w))))
    };
    fn build(meta: &Meta, w: usize, chosen: &dyn Fn(usize) -> Result<Sym>) -> Result<PNode> {
        let label = match chosen(w)? {
            Sym::Unused => unreachable!("only used nodes are built"),
            Sym::Const(c) => PatternLabel::Const(meta.labels[c].clone()),
            Sym::Node(u) => PatternLabel::NodeVar(format!("x{}", u + 1)),
            Sym::Tree(u) => PatternLabel::TreeVar(format!("Y{}", u + 1)),
        };
        let mut children = Vec::new();
        for c in 0..meta.sk.arity() {
            match meta.sk.child(w, c) {
                Some(wc) if chosen(wc)? != Sym::Unused => children.push(build(meta, wc, chosen)?),
                _ => break,
            }
        }
        Ok(PNode::new(label, children))
    }
    if chosen(0)? == Sym::Unused {
        return Err(mismatch("pattern root is unused".into()));
    }
    build(meta, 0, &chosen)
}

/// Every rule of the encoding, canonically renamed and named `rho1`, ...
pub fn decode_rules(model: &Model, enc: &Encoding) -> Result<Vec<Transformation>> {
    let meta = &enc.meta;
    meta.rules
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let body = TreePattern::new(side_pattern(meta, &r.body, model)?)?;
            let head = TreePattern::new(side_pattern(meta, &r.head, model)?)?;
            Ok(Transformation::new(format!("rho{}", j + 1), body, head)?.canonical())
        })
        .collect()
}

fn decode_layer(meta: &Meta, rows: &[Vec<Option<Var>>], model: &Model) -> Result<Tree> {
    let mut labels = BTreeMap::new();
    for (p, row) in rows.iter().enumerate() {
        let code = row
            .iter()
            .position(|v| v.is_some_and(|v| model.value(v)))
            .ok_or_else(|| mismatch(format!("intermediate node {} has no label", meta.sk.position(p))))?;
        if let Some(l) = meta.code_label(code) {
            labels.insert(meta.sk.position(p).clone(), l.to_string());
        }
    }
    Tree::from_positions(&labels)
}

/// Reads rules and traces off a model and re-verifies them.
///
/// Only rules that some selected pair applies are returned, renumbered
/// `rho1, rho2, ...`. Any disagreement between the model and the semantics
/// of the decoded rules is an error.
pub fn decode(model: &Model, enc: &Encoding, inst: &LearningInstance) -> Result<Solution> {
    let meta = &enc.meta;
    if !model.satisfies(&enc.formula) {
        return Err(mismatch("the model does not satisfy the encoding".into()));
    }
    let raw = decode_rules(model, enc)?;

    let mut chosen: Vec<Option<Vec<(usize, Position)>>> = Vec::new();
    let mut used = vec![false; raw.len()];
    for (i, pv) in meta.pairs.iter().enumerate() {
        if pv.sel.is_some_and(|v| !model.value(v)) {
            chosen.push(None);
            continue;
        }
        let mut seq = Vec::new();
        for (k, st) in pv.steps.iter().enumerate() {
            if let Some((j, pos, _)) = st.maps.iter().find(|&&(_, _, m)| model.value(m)) {
                used[*j] = true;
                seq.push((*j, pos.clone()));
            } else if st.idle.is_some_and(|v| model.value(v)) {
                break;
            } else {
                return Err(mismatch(format!("pair {} has no application at step {}", i + 1, k + 1)));
            }
        }
        chosen.push(Some(seq));
    }

    let mut names = vec![String::new(); raw.len()];
    let mut kept = Vec::new();
    for (j, rule) in raw.into_iter().enumerate() {
        if used[j] {
            let mut rule = rule;
            rule.name = format!("rho{}", kept.len() + 1);
            names[j] = rule.name.clone();
            kept.push(rule);
        }
    }
    let rules = RuleSet::new(kept)?;

    let mut traces = Vec::new();
    for (i, (pair, seq)) in inst.pairs.iter().zip(&chosen).enumerate() {
        let Some(seq) = seq else {
            traces.push(explain_pair(&rules, &pair.source, &pair.target, inst.steps)?);
            continue;
        };
        let pv = &meta.pairs[i];
        let mut cur = pair.source.clone();
        let mut steps = Vec::new();
        for (k, (j, pos)) in seq.iter().enumerate() {
            let rule = rules.get(&names[*j]).expect("used rules are kept");
            let res = apply_at(rule, &cur, pos).ok_or_else(|| {
                mismatch(format!("pair {}: {} does not apply at {pos} in {cur}", i + 1, names[*j]))
            })?;
            if let Some(rows) = pv.layers.get(k) {
                let expected = decode_layer(meta, rows, model)?;
                if expected != res {
                    return Err(mismatch(format!(
                        "pair {}: step {} yields {res}, the model says {expected}",
                        i + 1,
                        k + 1
                    )));
                }
            }
            steps.push(TraceStep {
                rule: names[*j].clone(),
                position: pos.clone(),
                result: res.clone(),
            });
            cur = res;
        }
        let trace = ApplicationTrace { steps };
        if trace.replay(&rules, &pair.source)? != pair.target {
            return Err(mismatch(format!("pair {}: the trace does not reach the target", i + 1)));
        }
        if explain_pair(&rules, &pair.source, &pair.target, inst.steps)?.is_none() {
            return Err(mismatch(format!(
                "pair {}: the decoded rules do not explain it in {} steps",
                i + 1,
                inst.steps
            )));
        }
        traces.push(Some(trace));
    }
    let explained = traces.iter().filter(|t| t.is_some()).count();
    if explained < inst.required_pairs() {
        return Err(mismatch(format!(
            "{explained} pairs explained, {} required",
            inst.required_pairs()
        )));
    }
    Ok(Solution { rules, traces })
}
