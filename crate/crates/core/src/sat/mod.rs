//! CNF formulas, a named-variable registry, cardinality constraints, an
//! embedded CDCL solver and DIMACS interchange.

mod card;
mod dimacs;
mod external;
mod solver;

use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use crate::error::{Error, Result};

pub use dimacs::{export_dimacs, import_model, parse_dimacs, parse_solver_status};
pub use external::solve_external;
pub use solver::{solve, Solver, SolverStats};

/// A propositional variable, numbered from 1 as in DIMACS.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Var {
        assert!(index > 0, "variables are numbered from 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    pub fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            self.pos()
        } else {
            self.neg()
        }
    }
}

/// A literal: a variable with a sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn from_dimacs(x: i32) -> Lit {
        assert!(x != 0);
        Var(x.unsigned_abs()).lit(x > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().0 as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A total assignment, indexed by variable.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn new(num_vars: u32) -> Model {
        Model {
            values: vec![false; num_vars as usize + 1],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Model {
        let mut v = vec![false];
        v.extend(values);
        Model { values: v }
    }

    pub fn num_vars(&self) -> u32 {
        (self.values.len() - 1) as u32
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.values[v.0 as usize] = value;
    }

    pub fn value(&self, v: Var) -> bool {
        self.values.get(v.0 as usize).copied().unwrap_or(false)
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_positive()
    }

    pub fn satisfies(&self, f: &CnfFormula) -> bool {
        f.clauses.iter().all(|c| c.iter().any(|&l| self.lit(l)))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
    BudgetExceeded { conflicts: u64 },
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

/// A clause set over variables `1..=num_vars`.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new() -> CnfFormula {
        CnfFormula::default()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    /// Makes sure variables up to `n` exist.
    pub fn reserve_vars(&mut self, n: u32) {
        self.num_vars = self.num_vars.max(n);
    }

    /// Adds a clause. Duplicate literals are merged and tautologies dropped.
    /// An empty clause is stored as `f` and `¬f` for a fresh `f`, so every
    /// stored clause is non-empty.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if let Some(&max) = c.iter().max_by_key(|l| l.var()) {
            assert!(
                max.var().0 <= self.num_vars,
                "clause uses variable {} beyond the declared {}",
                max.var().0,
                self.num_vars
            );
        }
        if c.is_empty() {
            let f = self.new_var();
            self.clauses.push(vec![f.pos()]);
            self.clauses.push(vec![f.neg()]);
            return;
        }
        self.clauses.push(c);
    }

    pub fn add_unit(&mut self, l: Lit) {
        self.add_clause(&[l]);
    }

    /// `a → b`.
    pub fn add_implication(&mut self, a: Lit, b: Lit) {
        self.add_clause(&[!a, b]);
    }

    /// One positive clause plus pairwise exclusions.
    pub fn add_exactly_one(&mut self, vars: &[Lit]) -> Result<()> {
        if vars.is_empty() {
            return Err(Error::InvalidInput("exactly-one over no variables".into()));
        }
        self.add_clause(vars);
        self.add_at_most_one(vars);
        Ok(())
    }

    /// Pairwise at-most-one.
    pub fn add_at_most_one(&mut self, vars: &[Lit]) {
        for i in 0..vars.len() {
            for j in i + 1..vars.len() {
                self.add_clause(&[!vars[i], !vars[j]]);
            }
        }
    }

    /// At-most-one with auxiliary ladder variables; linear size.
    pub fn add_at_most_one_ladder(&mut self, vars: &[Lit]) {
        if vars.len() <= 4 {
            self.add_at_most_one(vars);
            return;
        }
        card::at_most_k(self, vars, 1);
    }

    /// Sequential-counter encoding of "at least `k` of `vars`".
    pub fn add_at_least_k(&mut self, vars: &[Lit], k: usize) -> Result<()> {
        if k > vars.len() {
            return Err(Error::InvalidInput(format!(
                "at least {k} of {} variables",
                vars.len()
            )));
        }
        let negated: Vec<Lit> = vars.iter().map(|&l| !l).collect();
        card::at_most_k(self, &negated, vars.len() - k);
        Ok(())
    }

    /// Sequential-counter encoding of "at most `k` of `vars`".
    pub fn add_at_most_k(&mut self, vars: &[Lit], k: usize) {
        card::at_most_k(self, vars, k);
    }
}

/// Bijection between structured variable names and variables.
#[derive(Clone, Default, Debug)]
pub struct VarRegistry {
    by_name: HashMap<String, Var>,
    names: Vec<Option<String>>,
}

impl VarRegistry {
    pub fn new() -> VarRegistry {
        VarRegistry::default()
    }

    /// The variable named `name`, created in `f` on first use.
    pub fn var(&mut self, f: &mut CnfFormula, name: String) -> Var {
        if let Some(&v) = self.by_name.get(&name) {
            return v;
        }
        let v = f.new_var();
        self.record(v, name);
        v
    }

    pub fn record(&mut self, v: Var, name: String) {
        let idx = v.0 as usize;
        if self.names.len() <= idx {
            self.names.resize(idx + 1, None);
        }
        self.names[idx] = Some(name.clone());
        self.by_name.insert(name, v);
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, v: Var) -> Option<&str> {
        self.names.get(v.0 as usize).and_then(|n| n.as_deref())
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    /// Named variables in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Var, &str)> {
        self.names
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_deref().map(|n| (Var(i as u32), n)))
    }
}
