//! Learning instances: example pairs plus step, rule and ratio budgets.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::{apply_all, explains_in_steps, ApplicationTrace, RuleSet, TraceStep};
use crate::tree::Tree;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Pair {
    pub source: Tree,
    pub target: Tree,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LearningInstance {
    pub pairs: Vec<Pair>,
    pub steps: usize,
    pub rules: usize,
    #[serde(default = "one")]
    pub ratio: f64,
}

fn one() -> f64 {
    1.0
}

impl LearningInstance {
    pub fn new(pairs: Vec<(Tree, Tree)>, steps: usize, rules: usize) -> Result<LearningInstance> {
        let inst = LearningInstance {
            pairs: pairs
                .into_iter()
                .map(|(source, target)| Pair { source, target })
                .collect(),
            steps,
            rules,
            ratio: 1.0,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_ratio(mut self, ratio: f64) -> Result<LearningInstance> {
        self.ratio = ratio;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rules(&self, rules: usize) -> LearningInstance {
        LearningInstance {
            rules,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::InvalidInstance("an instance needs at least one pair".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidInstance("the step bound must be positive".into()));
        }
        if self.rules == 0 {
            return Err(Error::InvalidInstance("the rule bound must be positive".into()));
        }
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::InvalidInstance(format!(
                "ratio {} is outside (0, 1]",
                self.ratio
            )));
        }
        Ok(())
    }

    /// Number of pairs that must be explained: `ceil(q * n)`.
    pub fn required_pairs(&self) -> usize {
        let n = self.pairs.len();
        ((self.ratio * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize
    }

    /// All labels occurring in any pair.
    pub fn alphabet(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for p in &self.pairs {
            out.extend(p.source.labels());
            out.extend(p.target.labels());
        }
        out
    }

    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        self.pairs.iter().flat_map(|p| [&p.source, &p.target])
    }

    pub fn max_degree(&self) -> usize {
        self.trees().map(Tree::max_degree).max().unwrap_or(0)
    }

    pub fn max_height(&self) -> usize {
        self.trees().map(Tree::height).max().unwrap_or(0)
    }

    pub fn from_json(text: &str) -> Result<LearningInstance> {
        let inst: LearningInstance = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInstance(format!("malformed instance: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LearningInstance> {
        LearningInstance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Per pair, a trace of at most `steps` applications or `None`.
    pub fn check(&self, gamma: &RuleSet) -> Result<Vec<Option<ApplicationTrace>>> {
        self.pairs
            .iter()
            .map(|p| explain_pair(gamma, &p.source, &p.target, self.steps))
            .collect()
    }

    /// Whether `gamma` explains at least the required number of pairs.
    pub fn is_solved_by(&self, gamma: &RuleSet) -> Result<bool> {
        let explained = self.check(gamma)?.iter().filter(|t| t.is_some()).count();
        Ok(explained >= self.required_pairs())
    }
}

/// A trace of between 1 and `s` applications turning `t` into `t_star`.
///
/// Learning requires every pair to be rewritten at least once, so a pair with
/// equal trees needs a rule that reproduces the tree.
pub fn explain_pair(
    gamma: &RuleSet,
    t: &Tree,
    t_star: &Tree,
    s: usize,
) -> Result<Option<ApplicationTrace>> {
    if s == 0 {
        return Ok(None);
    }
    if t != t_star {
        return explains_in_steps(gamma, t, t_star, s);
    }
    let mut successors = Vec::new();
    for rule in gamma.rules() {
        for (v, res) in apply_all(rule, t) {
            let step = TraceStep {
                rule: rule.name.clone(),
                position: v,
                result: res.clone(),
            };
            if &res == t_star {
                return Ok(Some(ApplicationTrace { steps: vec![step] }));
            }
            successors.push(step);
        }
    }
    if s == 1 {
        return Ok(None);
    }
    for first in successors {
        if let Some(rest) = explains_in_steps(gamma, &first.result, t_star, s - 1)? {
            let mut steps = vec![first];
            steps.extend(rest.steps);
            return Ok(Some(ApplicationTrace { steps }));
        }
    }
    Ok(None)
}
