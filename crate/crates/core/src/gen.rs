//! Instance generators: the vertex cover and 3SAT reductions, and seeded
//! random instances with planted rules.
//!
//! Random generation uses SplitMix64, whose state advances by
//! `0x9E3779B97F4A7C15` per draw and whose output is
//! `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)`.

use std::collections::BTreeSet;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::instance::LearningInstance;
use crate::pattern::{instantiate, PNode, PatternLabel, TreePattern, VariableBinding};
use crate::sat::parse_dimacs;
use crate::transform::{apply_all, parse_rule, RuleSet, Transformation};
use crate::tree::{Context, Position, Tree};

fn leaf(l: &str) -> Tree {
    Tree::leaf(l)
}

fn node(l: &str, children: Vec<Tree>) -> Tree {
    Tree::new(l, children)
}

/// Smallest `l` with `n <= 2^l`.
fn depth_for(n: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < n {
        l += 1;
    }
    l
}

/// The full binary tree of depth `depth` whose `i`-th leaf (1-based, left to
/// right) is `leaf_at(i)` and whose inner nodes are `b`.
fn full_binary(depth: usize, leaf_at: &mut impl FnMut(usize) -> Tree) -> Tree {
    fn go(d: usize, next: &mut usize, leaf_at: &mut impl FnMut(usize) -> Tree) -> Tree {
        if d == 0 {
            *next += 1;
            return leaf_at(*next);
        }
        let l = go(d - 1, next, leaf_at);
        let r = go(d - 1, next, leaf_at);
        node("b", vec![l, r])
    }
    go(depth, &mut 0, leaf_at)
}

fn check_graph(n: usize, edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    if n == 0 {
        return Err(Error::InvalidInput("a graph needs at least one vertex".into()));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &(u, v) in edges {
        if u == v || u == 0 || v == 0 || u > n || v > n {
            return Err(Error::InvalidInput(format!("invalid edge ({u},{v}) for {n} vertices")));
        }
        let e = (u.min(v), u.max(v));
        if !seen.insert(e) {
            return Err(Error::InvalidInput(format!("duplicate edge ({u},{v})")));
        }
        out.push(e);
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("the graph has no edges, so the instance would have no pairs".into()));
    }
    Ok(out)
}

/// One pair per edge `(u, v)`: a full binary tree of `b`s whose leaves `u`
/// and `v` carry `l_u_v`, rewritten to the single node `l_u_v`. `s = 1`,
/// `r = k`. Vertices are numbered from 1.
pub fn gen_vertex_cover(n: usize, edges: &[(usize, usize)], k: usize) -> Result<LearningInstance> {
    let edges = check_graph(n, edges)?;
    let depth = depth_for(n);
    let pairs = edges
        .iter()
        .map(|&(u, v)| {
            let label = format!("l_{u}_{v}");
            let src = full_binary(depth, &mut |i| leaf(if i == u || i == v { &label } else { "b" }));
            (src, leaf(&label))
        })
        .collect();
    LearningInstance::new(pairs, 1, k.max(1))
}

/// As [`gen_vertex_cover`] over the alphabet `{a, b}`: each `l_u_v` becomes
/// a full binary tree with `a` at leaves `u` and `v`.
///
/// Unlike the labelled construction this one is not faithful on small
/// graphs. The `b` skeleton of a source can itself look like a code tree, so
/// a rule applied below the root may explain a pair. The triangle with
/// `k = 1` already has a one-rule solution.
pub fn gen_vertex_cover_binary(n: usize, edges: &[(usize, usize)], k: usize) -> Result<LearningInstance> {
    let edges = check_graph(n, edges)?;
    let depth = depth_for(n);
    let pairs = edges
        .iter()
        .map(|&(u, v)| {
            let code = full_binary(depth, &mut |i| leaf(if i == u || i == v { "a" } else { "b" }));
            let src = full_binary(depth, &mut |i| if i == u || i == v { code.clone() } else { leaf("b") });
            (src, code)
        })
        .collect();
    LearningInstance::new(pairs, 1, k.max(1))
}

/// The rules of the reduction for a vertex cover: each selects its vertex's
/// leaf from the full tree. `binary` uses tree variables.
pub fn vertex_cover_rules(n: usize, cover: &[usize], binary: bool) -> Result<RuleSet> {
    let depth = depth_for(n);
    let var = |i: usize| {
        if binary {
            PatternLabel::TreeVar(format!("Y{i}"))
        } else {
            PatternLabel::NodeVar(format!("x{i}"))
        }
    };
    fn pat(d: usize, next: &mut usize, var: &dyn Fn(usize) -> PatternLabel) -> PNode {
        if d == 0 {
            *next += 1;
            return PNode::leaf(var(*next));
        }
        let l = pat(d - 1, next, var);
        let r = pat(d - 1, next, var);
        PNode::new(PatternLabel::Const("b".into()), vec![l, r])
    }
    let body = pat(depth, &mut 0, &var);
    let rules = cover
        .iter()
        .map(|&c| {
            if c == 0 || c > n {
                return Err(Error::InvalidInput(format!("vertex {c} is not in 1..={n}")));
            }
            Transformation::new(
                format!("rho{c}"),
                TreePattern::new(body.clone())?,
                TreePattern::new(PNode::leaf(var(c)))?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    RuleSet::new(rules)
}

/// A CNF with exactly three literals per clause; literals are non-zero
/// integers as in DIMACS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf3 {
    pub num_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<[i32; 3]>) -> Result<Cnf3> {
        if num_vars < 4 {
            return Err(Error::InvalidInput(format!(
                "the reduction needs at least 4 variables, got {num_vars}"
            )));
        }
        for c in &clauses {
            let vars: BTreeSet<u32> = c.iter().map(|l| l.unsigned_abs()).collect();
            if vars.len() != 3 || c.iter().any(|&l| l == 0 || l.unsigned_abs() as usize > num_vars) {
                return Err(Error::InvalidInput(format!(
                    "clause {c:?} must have three distinct variables in 1..={num_vars}"
                )));
            }
        }
        Ok(Cnf3 { num_vars, clauses })
    }

    pub fn parse(text: &str) -> Result<Cnf3> {
        let f = parse_dimacs(text)?;
        let clauses = f
            .clauses()
            .iter()
            .map(|c| {
                let lits: Vec<i32> = c.iter().map(|l| l.to_dimacs()).collect();
                <[i32; 3]>::try_from(lits.as_slice())
                    .map_err(|_| Error::InvalidInput(format!("clause {lits:?} does not have three literals")))
            })
            .collect::<Result<Vec<_>>>()?;
        Cnf3::new(f.num_vars() as usize, clauses)
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }
}

/// `snake(t_1, ..., t_n)`: a `d`-path whose `i`-th node has `t_i` as right
/// child, ending in `d(a, t_n)`.
fn snake(label: &str, subs: Vec<Tree>) -> Tree {
    let mut it = subs.into_iter().rev();
    let last = it.next().expect("at least one subtree");
    let mut cur = node(label, vec![leaf("a"), last]);
    for s in it {
        cur = node(label, vec![cur, s]);
    }
    cur
}

/// `snake*(t_1, ..., t_n)`: an `e`-path of length `n - 1` whose last node
/// has children `t_n, t_{n-1}`.
fn snake_star(label: &str, subs: Vec<Tree>) -> Tree {
    let n = subs.len();
    let mut subs = subs;
    let last = subs.pop().expect("two subtrees");
    let before = subs.pop().expect("two subtrees");
    let mut cur = node(label, vec![last, before]);
    for s in subs.into_iter().rev() {
        cur = node(label, vec![cur, s]);
    }
    debug_assert!(n >= 2);
    cur
}

/// One snake pair per clause plus the two `h`-labelled swap pairs; `s = 3`,
/// `r = 2`. Clause `c` and variable `i` use the labels `a_c_i` and `b_c_i`.
pub fn gen_3sat(cnf: &Cnf3) -> Result<LearningInstance> {
    let cnf = Cnf3::new(cnf.num_vars, cnf.clauses.clone())?;
    let mut pairs = Vec::new();
    for (ci, clause) in cnf.clauses.iter().enumerate() {
        let c = ci + 1;
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        for i in 1..=cnf.num_vars {
            let a = format!("a_{c}_{i}");
            let b = format!("b_{c}_{i}");
            let occ = clause.iter().find(|l| l.unsigned_abs() as usize == i);
            let (s, t) = match occ {
                Some(&l) if l > 0 => ((a.clone(), b.clone()), (a, b)),
                Some(_) => ((b.clone(), a.clone()), (a, b)),
                None => ((a.clone(), a.clone()), (a.clone(), a)),
            };
            src.push(node("d", vec![leaf(&s.0), leaf(&s.1)]));
            tgt.push(node("e", vec![leaf(&t.0), leaf(&t.1)]));
        }
        pairs.push((snake("d", src), snake_star("e", tgt)));
    }
    for h in [["h1", "h2", "h3"], ["h4", "h5", "h6"]] {
        pairs.push((
            node(h[0], vec![leaf(h[1]), leaf(h[2])]),
            node(h[0], vec![leaf(h[2]), leaf(h[1])]),
        ));
    }
    LearningInstance::new(pairs, 3, 2)
}

fn pnode(label: PatternLabel, children: Vec<PNode>) -> PNode {
    PNode::new(label, children)
}

/// The rule encoding an assignment: it swaps `x_i, y_i` exactly when
/// `p_i` is false.
pub fn rho_alpha(assignment: &[bool]) -> Result<Transformation> {
    let n = assignment.len();
    if n < 2 {
        return Err(Error::InvalidInput("an assignment needs at least two variables".into()));
    }
    let c = |l: &str| PatternLabel::Const(l.into());
    let x = |i: usize| PNode::leaf(PatternLabel::NodeVar(format!("x{i}")));
    let y = |i: usize| PNode::leaf(PatternLabel::NodeVar(format!("y{i}")));
    let mut body = pnode(c("d"), vec![PNode::leaf(c("a")), pnode(c("d"), vec![x(n), y(n)])]);
    for i in (1..n).rev() {
        body = pnode(c("d"), vec![body, pnode(c("d"), vec![x(i), y(i)])]);
    }
    let star = |i: usize| {
        if assignment[i - 1] {
            pnode(c("e"), vec![x(i), y(i)])
        } else {
            pnode(c("e"), vec![y(i), x(i)])
        }
    };
    let mut head = pnode(c("e"), vec![star(n), star(n - 1)]);
    for i in (1..n - 1).rev() {
        head = pnode(c("e"), vec![head, star(i)]);
    }
    Transformation::new("rho_alpha", TreePattern::new(body)?, TreePattern::new(head)?)
}

pub fn rho_swap() -> Transformation {
    let mut r = parse_rule("?x(?y,?z) ~> ?x(?z,?y)").expect("valid rule");
    r.name = "rho_swap".into();
    r
}

/// `{rho_alpha, rho_swap}`.
pub fn gamma_alpha(assignment: &[bool]) -> Result<RuleSet> {
    RuleSet::new(vec![rho_alpha(assignment)?, rho_swap()])
}

/// Parameters of [`gen_random`].
#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub seed: u64,
    pub pairs: usize,
    pub rules: RuleSet,
    /// Fraction of pairs whose target is replaced by an unrelated tree.
    pub noise: f64,
    pub steps: usize,
    /// Node budget for the random parts of a source tree.
    pub max_nodes: usize,
    pub labels: Vec<String>,
}

impl RandomConfig {
    pub fn new(seed: u64, pairs: usize, rules: RuleSet) -> RandomConfig {
        RandomConfig {
            seed,
            pairs,
            rules,
            noise: 0.0,
            steps: 1,
            max_nodes: 7,
            labels: ["a", "b", "c", "f", "g"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A generated instance with the rules used to build it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: LearningInstance,
    pub planted: RuleSet,
    /// Indices of pairs with a scrambled target.
    pub noisy: Vec<usize>,
}

struct Sampler {
    rng: SplitMix64,
    labels: Vec<String>,
}

impl Sampler {
    fn below(&mut self, n: usize) -> usize {
        (self.rng.next_u64() % n as u64) as usize
    }

    fn label(&mut self) -> String {
        let i = self.below(self.labels.len());
        self.labels[i].clone()
    }

    /// A random tree with between 1 and `budget` nodes, at most 3 children.
    fn tree(&mut self, budget: usize) -> Tree {
        let label = self.label();
        if budget <= 1 {
            return Tree::leaf(label);
        }
        let mut left = budget - 1;
        let mut children = Vec::new();
        for _ in 0..self.below(4) {
            if left == 0 {
                break;
            }
            let take = 1 + self.below(left);
            children.push(self.tree(take));
            left -= take;
        }
        Tree::new(label, children)
    }

    /// Instantiates a rule body with random labels and small subtrees.
    fn body_instance(&mut self, body: &TreePattern) -> Tree {
        let mut b = VariableBinding::default();
        for v in body.variables() {
            match v {
                PatternLabel::NodeVar(n) => {
                    let l = self.label();
                    b.nodes.insert(n, l);
                }
                PatternLabel::TreeVar(n) => {
                    let size = 1 + self.below(2);
                    let t = self.tree(size);
                    b.trees.insert(n, t);
                }
                _ => {}
            }
        }
        instantiate(body, &b).expect("every body variable is bound")
    }
}

/// Samples sources that contain an instance of some planted rule body and
/// rewrites them with `1..=steps` planted rule applications.
pub fn gen_random(cfg: &RandomConfig) -> Result<Generated> {
    if cfg.pairs == 0 {
        return Err(Error::InvalidInput("zero pairs requested; the instance would be empty".into()));
    }
    if cfg.rules.is_empty() {
        return Err(Error::InvalidInput("the rule pool is empty".into()));
    }
    if cfg.labels.is_empty() {
        return Err(Error::InvalidInput("the label pool is empty".into()));
    }
    if !(0.0..=1.0).contains(&cfg.noise) {
        return Err(Error::InvalidInput(format!("noise {} is outside [0, 1]", cfg.noise)));
    }
    let mut s = Sampler {
        rng: SplitMix64::seed_from_u64(cfg.seed),
        labels: cfg.labels.clone(),
    };
    let steps = cfg.steps.max(1);
    let mut pairs = Vec::new();
    for _ in 0..cfg.pairs {
        let mut found = None;
        for _ in 0..1000 {
            let rule = &cfg.rules.rules()[s.below(cfg.rules.len())];
            let core = s.body_instance(rule.body());
            let ctx_size = 1 + s.below(cfg.max_nodes.saturating_sub(core.size()).max(1));
            let ctx = s.tree(ctx_size);
            let holes = ctx.positions();
            let hole = holes[s.below(holes.len())].clone();
            let src = Context::new(ctx, hole)?.plug(core);
            let n_steps = 1 + s.below(steps);
            let mut cur = src.clone();
            let mut ok = true;
            for _ in 0..n_steps {
                let mut options: Vec<(Position, Tree)> = Vec::new();
                for r in cfg.rules.rules() {
                    options.extend(apply_all(r, &cur));
                }
                if options.is_empty() {
                    ok = false;
                    break;
                }
                cur = options.swap_remove(s.below(options.len())).1;
            }
            if ok {
                found = Some((src, cur));
                break;
            }
        }
        let pair = found.ok_or_else(|| {
            Error::InvalidInput("no planted rule applies to the sampled trees".into())
        })?;
        pairs.push(pair);
    }
    let n_noisy = (cfg.noise * cfg.pairs as f64).round() as usize;
    let mut order: Vec<usize> = (0..cfg.pairs).collect();
    for i in (1..order.len()).rev() {
        let j = s.below(i + 1);
        order.swap(i, j);
    }
    let mut noisy: Vec<usize> = order[..n_noisy].to_vec();
    noisy.sort_unstable();
    for &i in &noisy {
        let size = 1 + s.below(3);
        let t = s.tree(size);
        pairs[i].1 = Tree::new(format!("noise{}", i + 1), vec![t]);
    }
    let instance = LearningInstance::new(pairs, steps, cfg.rules.len())?;
    Ok(Generated {
        instance,
        planted: cfg.rules.clone(),
        noisy,
    })
}
