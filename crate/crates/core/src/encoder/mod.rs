//! CNF encoding of the learning problem, model decoding, and the SAT-based
//! learner.
//!
//! Rules are encoded over a fixed skeleton of pattern positions. Every pattern
//! node carries one label out of: unused, a constant, a node variable slot or
//! a tree variable slot. Variable slot `u` belongs to skeleton position `u`:
//! its first body occurrence is at `u`, so variables are named by position and
//! no two encodings of the same rule differ only by renaming.
//!
//! Single-step instances are encoded directly against the example trees.
//! Multi-step instances add one layer of label variables per intermediate
//! tree; the layers live on the same skeleton, which makes the encoding
//! complete only for derivations whose trees fit the skeleton.

mod build;
mod decode;
mod skeleton;

pub use decode::{decode, decode_rules};
pub use skeleton::Skeleton;

use crate::error::{Error, Result};
use crate::instance::LearningInstance;
use crate::sat::{solve_external, CnfFormula, Model, SolveResult, Solver, VarRegistry};
use crate::transform::{ApplicationTrace, RuleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkeletonMode {
    /// All words over `0..d` up to length `h`.
    Full,
    /// Only positions that occur in some (re-rooted) subtree of the instance.
    Observed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphabetMode {
    /// Intermediate trees may use every label of the instance.
    Global,
    /// Intermediate trees of a pair only use the labels of that pair.
    PerPair,
}

#[derive(Clone, Debug)]
pub struct EncoderConfig {
    pub skeleton: SkeletonMode,
    pub alphabet: AlphabetMode,
    /// Number of node variable slots; all skeleton positions by default.
    pub node_vars: Option<usize>,
    /// Number of tree variable slots; all skeleton positions by default.
    pub tree_vars: Option<usize>,
    /// Orders the rule encodings lexicographically.
    pub symmetry_breaking: bool,
    pub max_skeleton: usize,
    /// Exactly-one constraints up to this size are pairwise, larger ones use
    /// a ladder.
    pub pairwise_limit: usize,
    /// Use the layered encoding for single-step instances as well.
    pub layered: bool,
    /// Only allow applications at the root.
    pub root_only: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            skeleton: SkeletonMode::Full,
            alphabet: AlphabetMode::Global,
            node_vars: None,
            tree_vars: None,
            symmetry_breaking: false,
            max_skeleton: 10_000,
            pairwise_limit: 32,
            layered: false,
            root_only: false,
        }
    }
}

/// An encoded instance together with what is needed to decode its models.
pub struct Encoding {
    pub formula: CnfFormula,
    pub registry: VarRegistry,
    pub(crate) meta: build::Meta,
}

impl Encoding {
    pub fn skeleton(&self) -> &Skeleton {
        &self.meta.sk
    }
}

pub fn encode(inst: &LearningInstance) -> Result<Encoding> {
    encode_with(inst, &EncoderConfig::default())
}

pub fn encode_with(inst: &LearningInstance, cfg: &EncoderConfig) -> Result<Encoding> {
    build::encode(inst, cfg)
}

/// Learned rules with one trace per pair; `None` marks an unexplained pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub rules: RuleSet,
    pub traces: Vec<Option<ApplicationTrace>>,
}

#[derive(Clone, Debug, Default)]
pub struct SolverConfig {
    /// Conflict budget for the embedded solver.
    pub budget: Option<u64>,
    /// Shell command of an external DIMACS solver.
    pub external: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct LearnConfig {
    pub encoder: EncoderConfig,
    pub solver: SolverConfig,
    /// Try `r = 1, 2, ...` up to the instance bound and stop at the first
    /// solution.
    pub incremental: bool,
}

/// Solves an encoding: `Some(model)` if satisfiable, `None` if not.
pub fn solve_encoding(enc: &Encoding, cfg: &SolverConfig) -> Result<Option<Model>> {
    let res = match &cfg.external {
        Some(cmd) => solve_external(cmd, &enc.formula)?,
        None => Solver::new(&enc.formula).solve(cfg.budget),
    };
    match res {
        SolveResult::Sat(m) => Ok(Some(m)),
        SolveResult::Unsat => Ok(None),
        SolveResult::BudgetExceeded { conflicts } => Err(Error::SolverBudget { conflicts }),
    }
}

pub fn learn(inst: &LearningInstance, cfg: &LearnConfig) -> Result<Option<Solution>> {
    inst.validate()?;
    let bounds: Vec<usize> = if cfg.incremental {
        (1..=inst.rules).collect()
    } else {
        vec![inst.rules]
    };
    for r in bounds {
        let sub = inst.with_rules(r);
        let enc = encode_with(&sub, &cfg.encoder)?;
        if let Some(model) = solve_encoding(&enc, &cfg.solver)? {
            return decode(&model, &enc, &sub).map(Some);
        }
    }
    Ok(None)
}
