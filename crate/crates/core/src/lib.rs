//! Learning tree pattern transformations from pairs of labelled ordered trees.
//!
//! The crate provides trees and patterns, rule application and bounded
//! multi-step explanation, a CNF encoder with an embedded CDCL solver, an
//! exact learner for root-anchored single rules, a brute-force oracle,
//! instance generators, and a propositional formula front end.

pub mod error;
mod text;
pub mod tree;
pub mod pattern;
pub mod transform;
pub mod interval;
pub mod sat;
pub mod instance;
pub mod encoder;
pub mod gen;
pub mod exact;
pub mod brute;
pub mod formula;

pub use encoder::{learn, LearnConfig, Solution};
pub use error::{Error, ParseError, Result};
pub use instance::LearningInstance;
pub use pattern::{parse_pattern, PNode, PatternLabel, TreePattern};
pub use transform::{parse_rule, ApplicationTrace, RuleSet, Transformation};
pub use tree::{parse_tree, Context, Position, Tree};
