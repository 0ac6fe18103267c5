use std::collections::{BTreeSet, HashMap};
use std::ops::Not;

use super::skeleton::Skeleton;
use super::{AlphabetMode, EncoderConfig, Encoding, SkeletonMode};
use crate::error::{Error, Result};
use crate::instance::LearningInstance;
use crate::sat::{CnfFormula, Lit, Var, VarRegistry};
use crate::text::write_label;
use crate::tree::{contexts_isomorphic, Position, Tree};

/// A literal or a constant folded at encode time.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum L {
    True,
    False,
    Lit(Lit),
}

impl Not for L {
    type Output = L;

    fn not(self) -> L {
        match self {
            L::True => L::False,
            L::False => L::True,
            L::Lit(l) => L::Lit(!l),
        }
    }
}

impl From<Lit> for L {
    fn from(l: Lit) -> L {
        L::Lit(l)
    }
}

impl From<bool> for L {
    fn from(b: bool) -> L {
        if b {
            L::True
        } else {
            L::False
        }
    }
}

fn opt(v: Option<Var>) -> L {
    v.map_or(L::False, |v| L::Lit(v.pos()))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Sym {
    Unused,
    Const(usize),
    Node(usize),
    Tree(usize),
}

/// Pattern label variables of one rule side: `[w][symbol]`.
pub(crate) type SideVars = Vec<Vec<Option<Var>>>;

pub(crate) struct RuleVars {
    pub body: SideVars,
    pub head: SideVars,
}

pub(crate) struct StepVars {
    /// `(rule, position, variable)`.
    pub maps: Vec<(usize, Position, Var)>,
    pub idle: Option<Var>,
}

pub(crate) struct PairVars {
    pub sel: Option<Var>,
    pub steps: Vec<StepVars>,
    /// Label variables `[p][code]` of intermediate trees `1..s`.
    pub layers: Vec<Vec<Vec<Option<Var>>>>,
}

pub(crate) struct Meta {
    pub sk: Skeleton,
    pub labels: Vec<String>,
    pub n_node: usize,
    pub n_tree: usize,
    pub rules: Vec<RuleVars>,
    pub pairs: Vec<PairVars>,
}

impl Meta {
    pub fn n_syms(&self) -> usize {
        1 + self.labels.len() + self.n_node + self.n_tree
    }

    pub fn sym_of(&self, ix: usize) -> Sym {
        let nl = self.labels.len();
        if ix == 0 {
            Sym::Unused
        } else if ix <= nl {
            Sym::Const(ix - 1)
        } else if ix <= nl + self.n_node {
            Sym::Node(ix - 1 - nl)
        } else {
            Sym::Tree(ix - 1 - nl - self.n_node)
        }
    }

    pub fn sym_index(&self, s: Sym) -> usize {
        let nl = self.labels.len();
        match s {
            Sym::Unused => 0,
            Sym::Const(c) => 1 + c,
            Sym::Node(u) => 1 + nl + u,
            Sym::Tree(u) => 1 + nl + self.n_node + u,
        }
    }

    fn sym_name(&self, s: Sym) -> String {
        match s {
            Sym::Unused => "unused".into(),
            Sym::Const(c) => {
                let mut out = String::new();
                write_label(&mut out, &self.labels[c]);
                out
            }
            Sym::Node(u) => format!("?x{}", u + 1),
            Sym::Tree(u) => format!("$Y{}", u + 1),
        }
    }

    /// The label at a layer code; code 0 is an absent node.
    pub fn code_label(&self, code: usize) -> Option<&str> {
        code.checked_sub(1).map(|c| self.labels[c].as_str())
    }
}

/// A tree at a fixed layer, or label variables of an intermediate tree.
enum Layer {
    Const(Vec<usize>),
    Var(Vec<Vec<Option<Var>>>),
}

impl Layer {
    fn lit(&self, p: usize, code: usize) -> L {
        match self {
            Layer::Const(codes) => (codes[p] == code).into(),
            Layer::Var(v) => opt(v[p][code]),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Helper {
    Label,
    Subtree,
}

struct Builder<'a> {
    inst: &'a LearningInstance,
    cfg: &'a EncoderConfig,
    f: CnfFormula,
    reg: VarRegistry,
    meta: Meta,
    label_ix: HashMap<String, usize>,
    is_tree: HashMap<(usize, bool, usize), L>,
    guard: Option<Lit>,
}

pub(crate) fn encode(inst: &LearningInstance, cfg: &EncoderConfig) -> Result<Encoding> {
    inst.validate()?;
    let sk = match cfg.skeleton {
        SkeletonMode::Full => Skeleton::full(inst.max_degree(), inst.max_height(), cfg.max_skeleton)?,
        SkeletonMode::Observed => Skeleton::observed(inst.trees(), cfg.max_skeleton)?,
    };
    let labels: Vec<String> = inst.alphabet().into_iter().collect();
    let label_ix = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    let n_node = cfg.node_vars.unwrap_or(sk.len()).min(sk.len());
    let n_tree = cfg.tree_vars.unwrap_or(sk.len()).min(sk.len());
    let mut b = Builder {
        inst,
        cfg,
        f: CnfFormula::new(),
        reg: VarRegistry::new(),
        meta: Meta {
            sk,
            labels,
            n_node,
            n_tree,
            rules: Vec::new(),
            pairs: Vec::new(),
        },
        label_ix,
        is_tree: HashMap::new(),
        guard: None,
    };
    b.rules();
    let n = inst.pairs.len();
    let required = inst.required_pairs();
    let sels: Vec<Option<Var>> = (0..n)
        .map(|i| (required < n).then(|| b.named(format!("sel({})", i + 1))))
        .collect();
    let layered = cfg.layered || inst.steps > 1;
    for (i, sel) in sels.iter().enumerate() {
        b.guard = sel.map(|v| v.neg());
        let pv = if layered {
            b.layered_pair(i, *sel)?
        } else {
            b.single_pair(i, *sel)?
        };
        b.meta.pairs.push(pv);
    }
    b.guard = None;
    if required < n {
        let lits: Vec<Lit> = sels.iter().map(|v| v.expect("selectors exist").pos()).collect();
        b.f.add_at_least_k(&lits, required)?;
    }
    Ok(Encoding {
        formula: b.f,
        registry: b.reg,
        meta: b.meta,
    })
}

impl Builder<'_> {
    fn named(&mut self, name: String) -> Var {
        self.reg.var(&mut self.f, name)
    }

    fn fresh(&mut self) -> Var {
        self.f.new_var()
    }

    fn clause(&mut self, lits: &[L]) {
        let mut out = Vec::with_capacity(lits.len() + 1);
        for &l in lits {
            match l {
                L::True => return,
                L::False => {}
                L::Lit(x) => out.push(x),
            }
        }
        if let Some(g) = self.guard {
            out.push(g);
        }
        self.f.add_clause(&out);
    }

    fn exactly_one(&mut self, lits: &[Lit]) {
        let ls: Vec<L> = lits.iter().map(|&l| L::Lit(l)).collect();
        self.clause(&ls);
        self.at_most_one(lits);
    }

    fn at_most_one(&mut self, lits: &[Lit]) {
        if lits.len() <= self.cfg.pairwise_limit {
            self.f.add_at_most_one(lits);
        } else {
            self.f.add_at_most_one_ladder(lits);
        }
    }

    fn side(&self, j: usize, head: bool) -> &SideVars {
        let r = &self.meta.rules[j];
        if head {
            &r.head
        } else {
            &r.body
        }
    }

    fn sym(&self, j: usize, head: bool, w: usize, s: Sym) -> L {
        opt(self.side(j, head)[w][self.meta.sym_index(s)])
    }

    fn unused(&self, j: usize, head: bool, w: usize) -> L {
        self.sym(j, head, w, Sym::Unused)
    }

    /// A literal implying that node `w` carries some tree variable.
    fn is_tree(&mut self, j: usize, head: bool, w: usize) -> L {
        if let Some(&l) = self.is_tree.get(&(j, head, w)) {
            return l;
        }
        let ys: Vec<L> = (0..self.meta.n_tree)
            .map(|u| self.sym(j, head, w, Sym::Tree(u)))
            .filter(|&l| l != L::False)
            .collect();
        let l = if ys.is_empty() {
            L::False
        } else {
            let t = self.fresh();
            let mut c = vec![L::Lit(t.neg())];
            c.extend(ys);
            let g = self.guard.take();
            self.clause(&c);
            self.guard = g;
            L::Lit(t.pos())
        };
        self.is_tree.insert((j, head, w), l);
        l
    }

    /// Pattern variables and syntactic validity of every rule.
    fn rules(&mut self) {
        let nv = self.meta.sk.len();
        let ns = self.meta.n_syms();
        for j in 0..self.inst.rules {
            let mut sides = Vec::new();
            for (head, tag) in [(false, "body"), (true, "head")] {
                let mut rows = Vec::with_capacity(nv);
                for w in 0..nv {
                    let mut row = vec![None; ns];
                    for (ix, slot) in row.iter_mut().enumerate() {
                        let s = self.meta.sym_of(ix);
                        let available = match s {
                            Sym::Node(u) | Sym::Tree(u) => head || u <= w,
                            _ => true,
                        };
                        if available {
                            let name = format!(
                                "{tag}({},{},{})",
                                j + 1,
                                self.meta.sk.position(w),
                                self.meta.sym_name(s)
                            );
                            *slot = Some(self.named(name));
                        }
                    }
                    rows.push(row);
                }
                sides.push(rows);
            }
            let head = sides.pop().expect("two sides");
            let body = sides.pop().expect("two sides");
            self.meta.rules.push(RuleVars { body, head });
            self.syntax(j);
        }
        if self.cfg.symmetry_breaking {
            for j in 1..self.inst.rules {
                let flat = |r: &RuleVars| -> Vec<Lit> {
                    r.body.iter().flatten().flatten().map(|v| v.pos()).collect()
                };
                let a = flat(&self.meta.rules[j - 1]);
                let b = flat(&self.meta.rules[j]);
                self.lex_leq(&a, &b);
            }
        }
    }

    fn syntax(&mut self, j: usize) {
        let nv = self.meta.sk.len();
        for head in [false, true] {
            for w in 0..nv {
                let lits: Vec<Lit> = self.side(j, head)[w].iter().flatten().map(|v| v.pos()).collect();
                self.exactly_one(&lits);
            }
            let root_unused = self.unused(j, head, 0);
            self.clause(&[!root_unused]);
            for w in 0..nv {
                let uw = self.unused(j, head, w);
                for c in 0..self.meta.sk.arity() {
                    let Some(wc) = self.meta.sk.child(w, c) else { continue };
                    let uc = self.unused(j, head, wc);
                    self.clause(&[!uw, uc]);
                    if let Some(next) = self.meta.sk.child(w, c + 1) {
                        let un = self.unused(j, head, next);
                        self.clause(&[!uc, un]);
                    }
                    for u in 0..self.meta.n_tree {
                        let y = self.sym(j, head, w, Sym::Tree(u));
                        self.clause(&[!y, uc]);
                    }
                }
                for u in 0..self.meta.n_node.min(nv) {
                    let x = self.sym(j, head, w, Sym::Node(u));
                    let first = self.sym(j, false, u, Sym::Node(u));
                    if head || u < w {
                        self.clause(&[!x, first]);
                    }
                }
                for u in 0..self.meta.n_tree.min(nv) {
                    let y = self.sym(j, head, w, Sym::Tree(u));
                    let first = self.sym(j, false, u, Sym::Tree(u));
                    if head || u < w {
                        self.clause(&[!y, first]);
                    }
                }
            }
        }
    }

    /// `a <= b` lexicographically, reading true as the larger value.
    fn lex_leq(&mut self, a: &[Lit], b: &[Lit]) {
        let mut eq = L::True;
        for (&x, &y) in a.iter().zip(b) {
            self.clause(&[!eq, L::Lit(!x), L::Lit(y)]);
            let next = self.fresh();
            let n = L::Lit(next.pos());
            self.clause(&[!eq, L::Lit(!x), L::Lit(!y), n]);
            self.clause(&[!eq, L::Lit(x), L::Lit(y), n]);
            eq = n;
        }
    }

    fn code_of(&self, label: &str) -> usize {
        1 + self.label_ix[label]
    }

    /// Formulas (9)-(12) for one pair, with bracketed conditions evaluated
    /// against the example trees.
    fn single_pair(&mut self, i: usize, sel: Option<Var>) -> Result<PairVars> {
        let pair = &self.inst.pairs[i];
        let (s, t) = (&pair.source, &pair.target);
        let sn: HashMap<Position, Tree> = s.nodes().into_iter().collect();
        let tn: HashMap<Position, Tree> = t.nodes().into_iter().collect();
        let mut maps = Vec::new();
        for j in 0..self.inst.rules {
            for v in s.positions() {
                if self.cfg.root_only && !v.is_root() {
                    continue;
                }
                if !tn.contains_key(&v) || !contexts_isomorphic(s, &v, t, &v)? {
                    continue;
                }
                let m = self.named(format!("map({},{},{})", j + 1, v, i + 1));
                self.single_map(j, m.pos(), &v, &sn, &tn);
                maps.push((j, v, m));
            }
        }
        let lits: Vec<L> = maps.iter().map(|&(_, _, m)| L::Lit(m.pos())).collect();
        self.clause(&lits);
        Ok(PairVars {
            sel,
            steps: vec![StepVars { maps, idle: None }],
            layers: Vec::new(),
        })
    }

    fn single_map(
        &mut self,
        j: usize,
        m: Lit,
        v: &Position,
        sn: &HashMap<Position, Tree>,
        tn: &HashMap<Position, Tree>,
    ) {
        let m = L::Lit(m);
        let nv = self.meta.sk.len();
        let at = |sk: &Skeleton, w: usize| v.concat(sk.position(w));
        for head in [false, true] {
            let here = if head { tn } else { sn };
            for w in 0..nv {
                if let Some(par) = self.meta.sk.parent(w) {
                    if !here.contains_key(&at(&self.meta.sk, par)) {
                        continue;
                    }
                }
                let Some(sub) = here.get(&at(&self.meta.sk, w)) else {
                    let u = self.unused(j, head, w);
                    self.clause(&[!m, u]);
                    continue;
                };
                let code = self.code_of(sub.label());
                for c in 0..self.meta.labels.len() {
                    if 1 + c != code {
                        let l = self.sym(j, head, w, Sym::Const(c));
                        self.clause(&[!m, !l]);
                    }
                }
                for u in 0..self.meta.n_node {
                    if !head && u >= w {
                        continue;
                    }
                    let ok = sn.get(&at(&self.meta.sk, u)).is_some_and(|x| x.label() == sub.label());
                    if !ok {
                        let x = self.sym(j, head, w, Sym::Node(u));
                        self.clause(&[!m, !x]);
                    }
                }
                for u in 0..self.meta.n_tree {
                    if !head && u >= w {
                        continue;
                    }
                    if sn.get(&at(&self.meta.sk, u)) != Some(sub) {
                        let y = self.sym(j, head, w, Sym::Tree(u));
                        self.clause(&[!m, !y]);
                    }
                }
                let uw = self.unused(j, head, w);
                let tw = self.is_tree(j, head, w);
                for c in 0..sub.degree() {
                    match self.meta.sk.child(w, c) {
                        Some(wc) => {
                            let uc = self.unused(j, head, wc);
                            self.clause(&[!m, uw, tw, !uc]);
                        }
                        None => self.clause(&[!m, uw, tw]),
                    }
                }
            }
        }
    }

    fn const_layer(&self, t: &Tree) -> Result<Layer> {
        let mut codes = vec![0; self.meta.sk.len()];
        for (p, sub) in t.nodes() {
            let ix = self.meta.sk.index_of(&p).ok_or_else(|| {
                Error::InvalidInstance(format!("tree {t} does not fit the skeleton"))
            })?;
            codes[ix] = self.code_of(sub.label());
        }
        Ok(Layer::Const(codes))
    }

    /// Label variables of an intermediate tree, constrained to form a tree.
    fn var_layer(&mut self, i: usize, k: usize, dom: &[usize]) -> Layer {
        let nv = self.meta.sk.len();
        let nc = 1 + self.meta.labels.len();
        let mut vars = vec![vec![None; nc]; nv];
        for (p, row) in vars.iter_mut().enumerate() {
            for &code in dom {
                let lab = match self.meta.code_label(code) {
                    Some(l) => {
                        let mut s = String::new();
                        write_label(&mut s, l);
                        s
                    }
                    None => "absent".into(),
                };
                let name = format!("int({},{},{},{})", i + 1, k, self.meta.sk.position(p), lab);
                row[code] = Some(self.named(name));
            }
        }
        let layer = Layer::Var(vars);
        for p in 0..nv {
            let lits: Vec<Lit> = dom.iter().filter_map(|&c| layer.lit(p, c).as_lit()).collect();
            self.exactly_one(&lits);
        }
        self.clause(&[!layer.lit(0, 0)]);
        for p in 0..nv {
            for c in 0..self.meta.sk.arity() {
                let Some(pc) = self.meta.sk.child(p, c) else { continue };
                self.clause(&[!layer.lit(p, 0), layer.lit(pc, 0)]);
                if let Some(next) = self.meta.sk.child(p, c + 1) {
                    self.clause(&[!layer.lit(pc, 0), layer.lit(next, 0)]);
                }
            }
        }
        layer
    }

    /// The generic encoding over layers `0..=s`, with the example trees as the
    /// outer layers.
    fn layered_pair(&mut self, i: usize, sel: Option<Var>) -> Result<PairVars> {
        let pair = &self.inst.pairs[i];
        let s = self.inst.steps;
        let nv = self.meta.sk.len();
        let dom: Vec<usize> = match self.cfg.alphabet {
            AlphabetMode::Global => (0..=self.meta.labels.len()).collect(),
            AlphabetMode::PerPair => {
                let mut set: BTreeSet<usize> = BTreeSet::from([0]);
                for l in pair.source.labels().iter().chain(pair.target.labels().iter()) {
                    set.insert(self.code_of(l));
                }
                set.into_iter().collect()
            }
        };
        let mut layers = vec![self.const_layer(&pair.source)?];
        for k in 1..s {
            let layer = self.var_layer(i, k, &dom);
            layers.push(layer);
        }
        layers.push(self.const_layer(&pair.target)?);

        let mut memo = HashMap::new();
        let mut steps = Vec::new();
        let mut prev_idle: Option<Var> = None;
        for k in 1..=s {
            let mut maps = Vec::new();
            let mut at: Vec<Vec<Lit>> = vec![Vec::new(); nv];
            for j in 0..self.inst.rules {
                for v in 0..nv {
                    if self.cfg.root_only && v != 0 {
                        continue;
                    }
                    let pos = self.meta.sk.position(v).clone();
                    let m = self.named(format!("map({},{},{},{})", j + 1, k, pos, i + 1));
                    maps.push((j, pos, m));
                    at[v].push(m.pos());
                }
            }
            let idle = (k >= 2).then(|| self.named(format!("idle({},{})", i + 1, k)));
            let mut choice: Vec<Lit> = maps.iter().map(|&(_, _, m)| m.pos()).collect();
            if let Some(id) = idle {
                choice.push(id.pos());
                if let Some(p) = prev_idle {
                    self.clause(&[L::Lit(p.neg()), L::Lit(id.pos())]);
                }
            }
            self.exactly_one(&choice);
            prev_idle = idle;

            let inside: Vec<Var> = (0..nv).map(|_| self.fresh()).collect();
            for p in 0..nv {
                let mut c = vec![L::Lit(inside[p].neg())];
                if let Some(par) = self.meta.sk.parent(p) {
                    c.push(L::Lit(inside[par].pos()));
                }
                c.extend(at[p].iter().map(|&l| L::Lit(l)));
                self.clause(&c);
                for &code in &dom {
                    let (a, b) = (layers[k - 1].lit(p, code), layers[k].lit(p, code));
                    self.clause(&[L::Lit(inside[p].pos()), !a, b]);
                }
            }
            for &(j, ref pos, m) in &maps {
                let v = self.meta.sk.index_of(pos).expect("skeleton position");
                self.layered_map(j, m.pos(), v, &layers, k, &dom, &mut memo);
            }
            steps.push(StepVars { maps, idle });
        }
        let var_layers = layers
            .into_iter()
            .filter_map(|l| match l {
                Layer::Var(v) => Some(v),
                Layer::Const(_) => None,
            })
            .collect();
        Ok(PairVars {
            sel,
            steps,
            layers: var_layers,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn layered_map(
        &mut self,
        j: usize,
        m: Lit,
        v: usize,
        layers: &[Layer],
        k: usize,
        dom: &[usize],
        memo: &mut HashMap<(Helper, usize, usize, usize, usize), L>,
    ) {
        let m = L::Lit(m);
        let nv = self.meta.sk.len();
        let nl = self.meta.labels.len();
        for head in [false, true] {
            let here = if head { k } else { k - 1 };
            for w in 0..nv {
                if let Some(par) = self.meta.sk.parent(w) {
                    if self.meta.sk.concat(v, par).is_none() {
                        continue;
                    }
                }
                let uw = self.unused(j, head, w);
                let Some(p) = self.meta.sk.concat(v, w) else {
                    self.clause(&[!m, uw]);
                    continue;
                };
                let absent = layers[here].lit(p, 0);
                self.clause(&[!m, uw, !absent]);
                for c in 0..nl {
                    let l = self.sym(j, head, w, Sym::Const(c));
                    let present = layers[here].lit(p, 1 + c);
                    self.clause(&[!m, !l, present]);
                }
                for u in 0..self.meta.n_node {
                    if !head && u >= w {
                        continue;
                    }
                    let x = self.sym(j, head, w, Sym::Node(u));
                    let e = match self.meta.sk.concat(v, u) {
                        None => L::False,
                        Some(q) => self.helper(Helper::Label, layers, dom, memo, (k - 1, q), (here, p)),
                    };
                    self.clause(&[!m, !x, e]);
                }
                for u in 0..self.meta.n_tree {
                    if !head && u >= w {
                        continue;
                    }
                    let y = self.sym(j, head, w, Sym::Tree(u));
                    let e = match self.meta.sk.concat(v, u) {
                        None => L::False,
                        Some(q) => self.helper(Helper::Subtree, layers, dom, memo, (k - 1, q), (here, p)),
                    };
                    self.clause(&[!m, !y, e]);
                }
                let tw = self.is_tree(j, head, w);
                for c in 0..self.meta.sk.arity() {
                    let Some(pc) = self.meta.sk.child(p, c) else { continue };
                    let child_absent = layers[here].lit(pc, 0);
                    match self.meta.sk.child(w, c) {
                        Some(wc) => {
                            let uc = self.unused(j, head, wc);
                            self.clause(&[!m, uw, tw, child_absent, !uc]);
                        }
                        None => self.clause(&[!m, uw, tw, child_absent]),
                    }
                }
            }
        }
    }

    /// A literal implying that layer `a.0` at `a.1` and layer `b.0` at `b.1`
    /// carry the same label, or the same subtree.
    fn helper(
        &mut self,
        kind: Helper,
        layers: &[Layer],
        dom: &[usize],
        memo: &mut HashMap<(Helper, usize, usize, usize, usize), L>,
        a: (usize, usize),
        b: (usize, usize),
    ) -> L {
        if a == b {
            return L::True;
        }
        let key = (kind, a.0, a.1, b.0, b.1);
        if let Some(&l) = memo.get(&key) {
            return l;
        }
        let (la, lb) = (&layers[a.0], &layers[b.0]);
        if let (Layer::Const(ca), Layer::Const(cb)) = (la, lb) {
            let eq = match kind {
                Helper::Label => ca[a.1] == cb[b.1],
                Helper::Subtree => self.const_subtree_eq(ca, a.1, cb, b.1),
            };
            memo.insert(key, eq.into());
            return eq.into();
        }
        let h = self.fresh();
        let hl = L::Lit(h.pos());
        for &code in dom {
            self.clause(&[!hl, !la.lit(a.1, code), lb.lit(b.1, code)]);
        }
        if kind == Helper::Subtree {
            for c in 0..self.meta.sk.arity() {
                match (self.meta.sk.child(a.1, c), self.meta.sk.child(b.1, c)) {
                    (Some(ac), Some(bc)) => {
                        let e = self.helper(Helper::Subtree, layers, dom, memo, (a.0, ac), (b.0, bc));
                        self.clause(&[!hl, e]);
                    }
                    (Some(ac), None) => self.clause(&[!hl, la.lit(ac, 0)]),
                    (None, Some(bc)) => self.clause(&[!hl, lb.lit(bc, 0)]),
                    (None, None) => {}
                }
            }
        }
        memo.insert(key, hl);
        hl
    }

    fn const_subtree_eq(&self, ca: &[usize], a: usize, cb: &[usize], b: usize) -> bool {
        if ca[a] != cb[b] {
            return false;
        }
        if ca[a] == 0 {
            return true;
        }
        (0..self.meta.sk.arity()).all(|c| {
            match (self.meta.sk.child(a, c), self.meta.sk.child(b, c)) {
                (Some(ac), Some(bc)) => self.const_subtree_eq(ca, ac, cb, bc),
                (Some(ac), None) => ca[ac] == 0,
                (None, Some(bc)) => cb[bc] == 0,
                (None, None) => true,
            }
        })
    }
}

impl L {
    fn as_lit(self) -> Option<Lit> {
        match self {
            L::Lit(l) => Some(l),
            _ => None,
        }
    }
}
