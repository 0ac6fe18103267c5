//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use treerules::brute::{learn_brute, learn_brute_with, BruteConfig};
use treerules::encoder::{AlphabetMode, EncoderConfig, LearnConfig, SkeletonMode, Solution};
use treerules::exact::{alg_body, learn_root};
use treerules::gen::{gamma_alpha, gen_3sat, gen_vertex_cover, Cnf3};
use treerules::interval::{interval_apply_at, interval_explains, parse_interval_rule, IntervalTransformation};
use treerules::sat::{solve, CnfFormula, Lit, SolveResult};
use treerules::transform::{apply_at, explains, explains_in_steps, parse_rule};
use treerules::{learn, LearningInstance, PatternLabel, Position, RuleSet, Tree};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

thread_local! {
    static VERIFIED: Cell<usize> = const { Cell::new(0) };
}

fn t(s: &str) -> Tree {
    s.parse().unwrap()
}

fn pos(s: &str) -> Position {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, || format!("took {took:.2?}, limit {limit:?}"))
}

/// Re-checks a learned solution by replaying every trace with plain rule
/// application, independently of the learner's own verification.
fn verify(inst: &LearningInstance, sol: &Solution) -> Result<(), String> {
    ensure(sol.rules.len() <= inst.rules, || format!("{} rules, at most {} allowed", sol.rules.len(), inst.rules))?;
    ensure(sol.traces.len() == inst.pairs.len(), || "one trace slot per pair".into())?;
    let mut explained = 0;
    for (i, (pair, trace)) in inst.pairs.iter().zip(&sol.traces).enumerate() {
        let Some(trace) = trace else { continue };
        ensure((1..=inst.steps).contains(&trace.steps.len()), || format!("pair {i}: {} steps", trace.steps.len()))?;
        let mut cur = pair.source.clone();
        for st in &trace.steps {
            let rule = sol.rules.get(&st.rule).ok_or_else(|| format!("pair {i}: unknown rule {}", st.rule))?;
            let next = apply_at(rule, &cur, &st.position);
            ensure(next.as_ref() == Some(&st.result), || format!("pair {i}: step {} at {} does not replay", st.rule, st.position))?;
            cur = st.result.clone();
        }
        ensure(cur == pair.target, || format!("pair {i}: trace ends in {cur}, not {}", pair.target))?;
        explained += 1;
    }
    ensure(explained >= inst.required_pairs(), || format!("{explained} explained, {} required", inst.required_pairs()))?;
    VERIFIED.with(|v| v.set(v.get() + 1));
    Ok(())
}

fn learn_verified(inst: &LearningInstance, cfg: &LearnConfig) -> Result<Option<Solution>, String> {
    let sol = learn(inst, cfg).map_err(|e| e.to_string())?;
    if let Some(s) = &sol {
        verify(inst, s)?;
    }
    Ok(sol)
}

fn sat_3cnf_config() -> LearnConfig {
    LearnConfig {
        encoder: EncoderConfig {
            skeleton: SkeletonMode::Observed,
            alphabet: AlphabetMode::PerPair,
            ..EncoderConfig::default()
        },
        ..LearnConfig::default()
    }
}

fn swap() -> treerules::Transformation {
    parse_rule("?x1($Y1,$Y2) ~> ?x1($Y2,$Y1)").unwrap()
}

fn swap_on_formulas() -> Outcome {
    let start = Instant::now();
    let rho = swap();
    let first = explains(&rho, &t("imp(E,and(not(A),not(C)))"), &t("imp(and(not(A),not(C)),E)"));
    let second = explains(&rho, &t("and(imp(B,D),A)"), &t("and(imp(D,B),A)"));
    ensure(first == Some(Position::root()), || format!("first pair: {first:?}"))?;
    ensure(second == Some(pos("0")), || format!("second pair: {second:?}"))?;
    within(start, Duration::from_secs(1))?;
    Ok("positions - and 0".into())
}

/// Smallest vertex cover by enumeration of vertex subsets.
fn min_cover(n: usize, edges: &[(usize, usize)]) -> usize {
    (0u32..1 << n)
        .filter(|s| edges.iter().all(|&(u, v)| s >> (u - 1) & 1 == 1 || s >> (v - 1) & 1 == 1))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap()
}

/// Full binary trees of height 2 with `b` inner nodes and leaves from `labels`.
fn depth_two_trees(labels: &[String]) -> Vec<Tree> {
    let mut out = Vec::new();
    let k = labels.len();
    for code in 0..k.pow(4) {
        let leaf = |i: usize| Tree::leaf(labels[code / k.pow(i as u32) % k].as_str());
        let left = Tree::new("b", vec![leaf(0), leaf(1)]);
        let right = Tree::new("b", vec![leaf(2), leaf(3)]);
        out.push(Tree::new("b", vec![left, right]));
    }
    out
}

/// Whether two rules give the same result at every position of every tree.
fn same_behaviour(r1: &treerules::Transformation, r2: &treerules::Transformation, trees: &[Tree]) -> bool {
    trees
        .iter()
        .all(|x| x.positions().iter().all(|v| apply_at(r1, x, v) == apply_at(r2, x, v)))
}

const EXAMPLE_GRAPH: [(usize, usize); 5] = [(1, 2), (1, 4), (2, 3), (2, 4), (3, 4)];

fn vertex_cover_example() -> Outcome {
    let start = Instant::now();
    let inst = gen_vertex_cover(4, &EXAMPLE_GRAPH, 2).map_err(|e| e.to_string())?;
    let sol = learn_verified(&inst, &LearnConfig::default())?.ok_or("k=2 reported unsatisfiable")?;
    let expected = [
        parse_rule("b(b(?x1,?x2),b(?x3,?x4)) ~> ?x2").unwrap(),
        parse_rule("b(b(?x1,?x2),b(?x3,?x4)) ~> ?x4").unwrap(),
    ];
    let got = sol.rules.rules();
    let domain = depth_two_trees(&inst.alphabet().into_iter().collect::<Vec<_>>());
    let matched = expected.iter().all(|e| got.iter().any(|r| same_behaviour(r, e, &domain)));
    let learned: Vec<String> = got.iter().map(|r| r.to_string()).collect();
    ensure(got.len() == 2 && matched, || format!("learned {learned:?}"))?;

    let one = inst.with_rules(1);
    let sat = learn_verified(&one, &LearnConfig::default())?;
    let brute = learn_brute(&one).map_err(|e| e.to_string())?;
    ensure(sat.is_none(), || "sat engine found a single rule".into())?;
    ensure(brute.is_none(), || "brute engine found a single rule".into())?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{}; r=1: sat none, brute none, exact n/a", learned.join(", ")))
}

fn three_sat_example() -> Outcome {
    let start = Instant::now();
    let phi = Cnf3::new(4, vec![[1, -2, 3], [2, 3, 4], [-1, -3, -4]]).map_err(|e| e.to_string())?;
    let alpha = (0u32..16)
        .map(|a| (0..4).map(|i| a >> i & 1 == 1).collect::<Vec<_>>())
        .find(|a| clauses_hold(&phi.clauses, a))
        .ok_or("formula has no model")?;
    let inst = gen_3sat(&phi).map_err(|e| e.to_string())?;
    ensure(inst.steps == 3 && inst.rules == 2, || format!("s={} r={}", inst.steps, inst.rules))?;
    let gamma = gamma_alpha(&alpha).map_err(|e| e.to_string())?;
    let checked = inst.is_solved_by(&gamma).map_err(|e| e.to_string())?;
    ensure(checked, || format!("rules for {alpha:?} do not solve the instance"))?;
    let sol = learn_verified(&inst, &sat_3cnf_config())?.ok_or("learner reported unsatisfiable")?;
    ensure(sol.rules.len() == 2, || format!("{} rules", sol.rules.len()))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("{} pairs, learned 2 rules", inst.pairs.len()))
}

fn clauses_hold(clauses: &[[i32; 3]], a: &[bool]) -> bool {
    clauses
        .iter()
        .all(|c| c.iter().any(|&l| a[l.unsigned_abs() as usize - 1] == (l > 0)))
}

fn random_3cnf(rng: &mut SplitMix64) -> Vec<[i32; 3]> {
    let m = 3 + (rng.next_u64() % 28) as usize;
    (0..m)
        .map(|_| {
            let skip = (rng.next_u64() % 4) as i32 + 1;
            let mut c = [0; 3];
            for (slot, v) in (1..=4).filter(|&v| v != skip).enumerate() {
                c[slot] = if rng.next_u64() & 1 == 1 { -v } else { v };
            }
            c
        })
        .collect()
}

fn reductions_are_faithful() -> Outcome {
    let mut graphs = 0;
    for n in 2..=5usize {
        let all: Vec<(usize, usize)> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
        for mask in 1u32..1 << all.len() {
            let edges: Vec<_> = all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
            let tau = min_cover(n, &edges);
            graphs += 1;
            for k in [tau - 1, tau] {
                if k == 0 {
                    continue;
                }
                let inst = gen_vertex_cover(n, &edges, k).map_err(|e| e.to_string())?;
                let found = learn_verified(&inst, &LearnConfig::default())?.is_some();
                ensure(found == (tau <= k), || {
                    format!("graph n={n} {edges:?} k={k}: learner {found}, cover number {tau}")
                })?;
            }
        }
    }
    let mut rng = SplitMix64::seed_from_u64(4);
    let (mut sat, mut unsat) = (0, 0);
    for _ in 0..50 {
        let clauses = random_3cnf(&mut rng);
        let truth = (0u32..16).any(|a| clauses_hold(&clauses, &(0..4).map(|i| a >> i & 1 == 1).collect::<Vec<_>>()));
        let inst = gen_3sat(&Cnf3::new(4, clauses.clone()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let found = learn_verified(&inst, &sat_3cnf_config())?.is_some();
        ensure(found == truth, || format!("{clauses:?}: learner {found}, enumeration {truth}"))?;
        if truth {
            sat += 1;
        } else {
            unsat += 1;
        }
    }
    Ok(format!("{graphs} graphs; 50 formulas ({sat} satisfiable, {unsat} not)"))
}

fn random_tree(rng: &mut SplitMix64, budget: usize) -> Tree {
    let label = ["a", "b", "c"][(rng.next_u64() % 3) as usize];
    if budget <= 1 {
        return Tree::leaf(label);
    }
    let mut left = budget - 1;
    let mut children = Vec::new();
    for _ in 0..rng.next_u64() % 3 {
        if left == 0 {
            break;
        }
        let take = 1 + (rng.next_u64() as usize) % left;
        children.push(random_tree(rng, take));
        left -= take;
    }
    Tree::new(label, children)
}

fn cross_instance(rng: &mut SplitMix64) -> LearningInstance {
    let pool = ["?x($a,$b) ~> ?x($b,$a)", "a($a) ~> b($a,$a)", "?x(?y) ~> ?y", "b ~> c(a)", "?x($a,$b) ~> $a"];
    let n = 1 + (rng.next_u64() % 4) as usize;
    let r = 1 + (rng.next_u64() % 2) as usize;
    let mut pairs = Vec::new();
    for _ in 0..n {
        let size = 1 + (rng.next_u64() % 7) as usize;
        let source = random_tree(rng, size);
        let rule = parse_rule(pool[(rng.next_u64() % pool.len() as u64) as usize]).unwrap();
        let results: Vec<Tree> = treerules::transform::apply_all(&rule, &source)
            .into_iter()
            .map(|(_, x)| x)
            .filter(|x| x.size() <= 7)
            .collect();
        let target = if results.is_empty() || rng.next_u64().is_multiple_of(3) {
            let size = 1 + (rng.next_u64() % 7) as usize;
            random_tree(rng, size)
        } else {
            results[(rng.next_u64() as usize) % results.len()].clone()
        };
        pairs.push((source, target));
    }
    LearningInstance::new(pairs, 1, r).unwrap()
}

fn engines_agree() -> Outcome {
    let start = Instant::now();
    let mut rng = SplitMix64::seed_from_u64(1);
    let (mut found, mut anchored, mut anchored_found) = (0, 0, 0);
    let root_sat = LearnConfig {
        encoder: EncoderConfig {
            root_only: true,
            ..EncoderConfig::default()
        },
        ..LearnConfig::default()
    };
    let root_brute = BruteConfig {
        root_only: true,
        ..BruteConfig::default()
    };
    for round in 0..300 {
        let inst = cross_instance(&mut rng);
        let sat = learn_verified(&inst, &LearnConfig::default())?.is_some();
        let brute = learn_brute(&inst).map_err(|e| format!("round {round}: {e}"))?;
        if let Some(rules) = &brute {
            ensure(inst.is_solved_by(rules).unwrap_or(false), || format!("round {round}: brute rules fail check"))?;
        }
        ensure(sat == brute.is_some(), || format!("round {round}: sat {sat}, brute {}", brute.is_some()))?;
        found += sat as usize;
        if inst.rules == 1 {
            anchored += 1;
            let exact = learn_root(&inst).map_err(|e| e.to_string())?;
            let sat = learn_verified(&inst, &root_sat)?.is_some();
            let brute = learn_brute_with(&inst, &root_brute).map_err(|e| e.to_string())?.is_some();
            ensure(exact.is_some() == sat && sat == brute, || {
                format!("round {round} at the root: exact {}, sat {sat}, brute {brute}", exact.is_some())
            })?;
            if let Some(rule) = exact {
                let root = Position::root();
                let ok = inst.pairs.iter().all(|p| apply_at(&rule, &p.source, &root).as_ref() == Some(&p.target));
                ensure(ok, || format!("round {round}: exact rule {rule} does not map sources to targets"))?;
            }
            anchored_found += sat as usize;
        }
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("300 instances ({found} solvable); {anchored} at the root ({anchored_found} solvable)"))
}

fn exact_goldens() -> Outcome {
    let body = alg_body(&[t("a(b(c,d),e)"), t("a(b(c,d))")]).map_err(|e| e.to_string())?;
    let root = body.root();
    ensure(matches!(root.label, PatternLabel::TreeVar(_)) && root.children.is_empty(), || {
        format!("body {}", treerules::pattern::serialize_pattern(&body))
    })?;
    let inst = LearningInstance::new(vec![(t("a(b,c)"), t("a(b)")), (t("a(b,c)"), t("a(c)"))], 1, 1).unwrap();
    let exact = learn_root(&inst).map_err(|e| e.to_string())?;
    let brute = learn_brute(&inst).map_err(|e| e.to_string())?;
    ensure(exact.is_none(), || format!("exact learned {}", exact.unwrap()))?;
    ensure(brute.is_none(), || "brute learned a rule".into())?;
    Ok("single tree variable body; diverging heads give none".into())
}

fn two_step_swap() -> Outcome {
    let source = t("a(b,a(c,b))");
    let target = t("a(a(b,c),b)");
    let rho = swap();
    let gamma = RuleSet::new(vec![rho.clone()]).unwrap();
    for order in [["-", "0"], ["1", "-"]] {
        let mid = apply_at(&rho, &source, &pos(order[0])).ok_or("first step does not apply")?;
        let end = apply_at(&rho, &mid, &pos(order[1]));
        ensure(end.as_ref() == Some(&target), || format!("order {order:?} ends in {end:?}"))?;
    }
    let one = explains_in_steps(&gamma, &source, &target, 1).map_err(|e| e.to_string())?;
    ensure(one.is_none(), || "explained in one step".into())?;
    let trace = explains_in_steps(&gamma, &source, &target, 2)
        .map_err(|e| e.to_string())?
        .ok_or("not explained in two steps")?;
    let steps: Vec<String> = trace.steps.iter().map(|s| s.position.to_string()).collect();
    ensure(steps == ["-", "0"] || steps == ["1", "-"], || format!("trace {steps:?}"))?;
    ensure(trace.replay(&gamma, &source).map_err(|e| e.to_string())? == target, || "replay".into())?;

    let inst = LearningInstance::new(vec![(source, target)], 2, 1).unwrap();
    let cfg = LearnConfig {
        encoder: EncoderConfig {
            node_vars: Some(1),
            tree_vars: Some(7),
            ..EncoderConfig::default()
        },
        ..LearnConfig::default()
    };
    let sol = learn_verified(&inst, &cfg)?.ok_or("learner found no rule at s=2")?;
    Ok(format!("trace {}; learned {}", steps.join(" then "), sol.rules.rules()[0]))
}

fn noise_ratio() -> Outcome {
    let mut pairs: Vec<(Tree, Tree)> = ["a", "b", "c", "f(a)", "g(b,c)", "a(b)", "c(c)", "b(a,a)", "f(g(a),b)"]
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let y = ["q", "r", "s"][i % 3];
            (t(&format!("f({x},{y})")), t(&format!("f({y},{x})")))
        })
        .collect();
    pairs.push((t("f(a,b)"), t("g(c)")));
    let strict = LearningInstance::new(pairs, 1, 1).unwrap();
    ensure(learn_verified(&strict, &LearnConfig::default())?.is_none(), || "q=1.0 satisfiable".into())?;
    ensure(learn_brute(&strict).map_err(|e| e.to_string())?.is_none(), || "brute found a rule at q=1.0".into())?;
    let loose = strict.clone().with_ratio(0.9).unwrap();
    let sol = learn_verified(&loose, &LearnConfig::default())?.ok_or("q=0.9 unsatisfiable")?;
    let rule = &sol.rules.rules()[0];
    let odd = &loose.pairs[9];
    ensure(explains(rule, &odd.source, &odd.target).is_none(), || "learned rule explains the odd pair".into())?;
    Ok(format!("q=0.9 learned {rule}; q=1.0 none"))
}

/// Membership of `s` in the language of `0 x 1 x 0` with `x` non-empty.
fn string_pattern_member(s: &[u8]) -> bool {
    (1..s.len()).any(|k| {
        s.len() == 3 + 2 * k
            && s[0] == b'0'
            && s[1 + k] == b'1'
            && s[s.len() - 1] == b'0'
            && s[1..1 + k] == s[2 + k..2 + 2 * k]
    })
}

fn gadget(s: &str) -> (Tree, Tree) {
    let kids: Vec<Tree> = s.chars().map(|c| Tree::leaf(c.to_string())).collect();
    (Tree::new("a", kids), t("a(0,1,0)"))
}

/// Results of the three edit rules at `v`, computed by direct tree surgery.
fn edit_oracle(kind: usize, tree: &Tree, v: &Position) -> BTreeSet<Tree> {
    let node = tree.get(v).unwrap();
    let kids = node.children().to_vec();
    let mut out = BTreeSet::new();
    match kind {
        0 if node.label() == "a" => {
            out.insert(Tree::new("b", kids));
        }
        1 => {
            for (i, c) in kids.iter().enumerate() {
                if c.label() == "a" {
                    let mut k = kids[..i].to_vec();
                    k.extend(c.children().iter().cloned());
                    k.extend(kids[i + 1..].iter().cloned());
                    out.insert(Tree::new(node.label(), k));
                }
            }
        }
        2 => {
            for i in 0..=kids.len() {
                for j in i..=kids.len() {
                    let mut k = kids[..i].to_vec();
                    k.push(Tree::new("a", kids[i..j].to_vec()));
                    k.extend(kids[j..].iter().cloned());
                    out.insert(Tree::new(node.label(), k));
                }
            }
        }
        _ => {}
    }
    let ctx = treerules::Context::new(tree.clone(), v.clone()).unwrap();
    out.into_iter().map(|sub| ctx.plug(sub)).collect()
}

fn interval_rules() -> Outcome {
    let rho: IntervalTransformation = parse_interval_rule("a(0,?y1,@Z1,1,?y1,@Z1,0) ~> a(0,1,0)").unwrap();
    let (src, dst) = gadget("001110110");
    ensure(string_pattern_member(b"001110110"), || "oracle rejects the positive string".into())?;
    let hit = interval_explains(&rho, &src, &dst).map_err(|e| e.to_string())?;
    ensure(hit.is_some(), || "positive case rejected".into())?;
    let (bad, bad_dst) = gadget("00110");
    ensure(!string_pattern_member(b"00110"), || "oracle accepts the negative string".into())?;
    let miss = interval_explains(&rho, &bad, &bad_dst).map_err(|e| e.to_string())?;
    ensure(miss.is_none(), || "negative case accepted".into())?;
    let mut rng = SplitMix64::seed_from_u64(9);
    for _ in 0..40 {
        let len = 3 + (rng.next_u64() % 8) as usize;
        let s: String = (0..len).map(|_| if rng.next_u64() & 1 == 1 { '1' } else { '0' }).collect();
        let (a, b) = gadget(&s);
        let got = interval_explains(&rho, &a, &b).map_err(|e| e.to_string())?.is_some();
        ensure(got == string_pattern_member(s.as_bytes()), || format!("string {s}: matcher {got}"))?;
    }

    let edits = [
        parse_interval_rule("a(@Z1) ~> b(@Z1)").unwrap(),
        parse_interval_rule("?x(@Z1,a(@Z3),@Z2) ~> ?x(@Z1,@Z3,@Z2)").unwrap(),
        parse_interval_rule("?x1(@Z1,@Z2,@Z3) ~> ?x1(@Z1,a(@Z2),@Z3)").unwrap(),
    ];
    let mut rng = SplitMix64::seed_from_u64(42);
    for _ in 0..200 {
        let size = 1 + (rng.next_u64() % 8) as usize;
        let tree = random_tree(&mut rng, size);
        for v in tree.positions() {
            for (kind, rule) in edits.iter().enumerate() {
                let got: BTreeSet<Tree> = interval_apply_at(rule, &tree, &v).map_err(|e| e.to_string())?.into_iter().collect();
                let want = edit_oracle(kind, &tree, &v);
                ensure(got == want, || format!("edit {kind} on {tree} at {v}: {got:?} vs {want:?}"))?;
            }
        }
    }

    let either = parse_interval_rule("a(@Z1,@Z2) ~> b(@Z2,@Z1)").unwrap();
    let results = interval_apply_at(&either, &t("a(c,d)"), &Position::root()).map_err(|e| e.to_string())?;
    let distinct: BTreeSet<Tree> = results.into_iter().collect();
    let want: BTreeSet<Tree> = [t("b(d,c)"), t("b(c,d)")].into();
    ensure(distinct == want, || format!("results {distinct:?}"))?;
    Ok("gadget, 200 random trees, two results".into())
}

fn enumerate_sat(f: &CnfFormula) -> bool {
    let n = f.num_vars();
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0, 0), |(p, q), l| {
                let bit = 1u32 << (l.to_dimacs().unsigned_abs() - 1);
                if l.to_dimacs() > 0 {
                    (p | bit, q)
                } else {
                    (p, q | bit)
                }
            })
        })
        .collect();
    (0u32..1 << n).any(|a| masks.iter().all(|&(p, q)| a & p != 0 || !a & q != 0))
}

fn solver_is_correct() -> Outcome {
    let mut rng = SplitMix64::seed_from_u64(10);
    let (mut sat, mut unsat) = (0, 0);
    for i in 0..500 {
        let n = 1 + (rng.next_u64() % 20) as i32;
        let m = (rng.next_u64() % (5 * n as u64 + 2)) as usize;
        let mut f = CnfFormula::new();
        f.reserve_vars(n as u32);
        for _ in 0..m {
            let len = 1 + (rng.next_u64() % 3) as usize;
            let lits: Vec<Lit> = (0..len)
                .map(|_| {
                    let v = 1 + (rng.next_u64() % n as u64) as i32;
                    Lit::from_dimacs(if rng.next_u64() & 1 == 1 { -v } else { v })
                })
                .collect();
            f.add_clause(&lits);
        }
        let truth = enumerate_sat(&f);
        match solve(&f, None) {
            SolveResult::Sat(model) => {
                ensure(truth, || format!("formula {i}: solver says sat, enumeration says unsat"))?;
                ensure(model.satisfies(&f), || format!("formula {i}: model does not satisfy"))?;
                sat += 1;
            }
            SolveResult::Unsat => {
                ensure(!truth, || format!("formula {i}: solver says unsat, enumeration says sat"))?;
                unsat += 1;
            }
            SolveResult::BudgetExceeded { .. } => return Err(format!("formula {i}: budget exceeded without a budget")),
        }
    }
    let verified = VERIFIED.with(Cell::get);
    ensure(verified > 0, || "no learned solutions were re-verified".into())?;
    Ok(format!("500 formulas ({sat} sat, {unsat} unsat); {verified} learned solutions re-verified"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("swap rule on two formula pairs", swap_on_formulas),
        ("vertex cover example", vertex_cover_example),
        ("3SAT example", three_sat_example),
        ("reduction faithfulness", reductions_are_faithful),
        ("cross-engine agreement", engines_agree),
        ("exact learner goldens", exact_goldens),
        ("two-step swap", two_step_swap),
        ("noise ratio", noise_ratio),
        ("interval variables", interval_rules),
        ("SAT solver and re-verification", solver_is_correct),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let took = start.elapsed();
        let line = match &outcome {
            Ok(detail) => format!("criterion {n:>2} PASS  {name} [{took:.2?}]: {detail}"),
            Err(why) => {
                failed += 1;
                format!("criterion {n:>2} FAIL  {name} [{took:.2?}]: {why}")
            }
        };
        println!("{line}");
        let _ = std::io::stdout().flush();
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
