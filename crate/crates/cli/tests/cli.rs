use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn treerules(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treerules")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SWAPPED: &str = r#"{
  "pairs": [
    {"source": "and(imp(A,B),C)", "target": "and(imp(B,A),C)"},
    {"source": "imp(and(A,B),or(C,D))", "target": "imp(or(C,D),and(A,B))"}
  ],
  "steps": 1,
  "rules": 1
}"#;

const FORMULAS: &str = r#"{
  "pairs": [
    {"source": "imp(E,and(not(A),not(C)))", "target": "imp(and(not(A),not(C)),E)"},
    {"source": "and(imp(B,D),A)", "target": "and(imp(D,B),A)"}
  ],
  "steps": 1,
  "rules": 1
}"#;

#[test]
fn learn_finds_the_swap_rule() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "swapped.json", SWAPPED);
    let out = treerules(&["learn", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rules = treerules::transform::parse_rule_file(&text).unwrap();
    let swap = treerules::transform::parse_rule("?x($A,$B) ~> ?x($B,$A)").unwrap();
    assert_eq!(rules.len(), 1);
    assert!(rules.rules()[0].equivalent(&swap));
    assert!(text.contains("# pair 1: rho1 at 0\n"));
    assert!(text.contains("# pair 2: rho1 at -\n"));
}

#[test]
fn learn_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "swapped.json", SWAPPED);
    for engine in ["sat", "exact", "brute"] {
        let a = treerules(&["learn", "--instance", &inst, "--engine", engine]);
        let b = treerules(&["learn", "--instance", &inst, "--engine", engine]);
        assert_eq!(a.stdout, b.stdout, "{engine}");
    }
}

#[test]
fn check_explains_both_pairs() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "formulas.json", FORMULAS);
    let rules = write(dir.path(), "rho.rules", "rho: ?x1($Y1,$Y2) ~> ?x1($Y2,$Y1)\n");
    let out = treerules(&["check", "--rules", &rules, "--instance", &inst]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("pair 1\texplained\trho at -"));
    assert!(text.contains("pair 2\texplained\trho at 0"));
}

#[test]
fn one_rule_cannot_cover_the_example_graph() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("vc.json");
    let inst = inst.to_str().unwrap();
    let gen = treerules(&["gen", "vertex-cover", "--edges", "1-2,1-4,2-3,2-4,3-4", "--k", "1", "--out", inst]);
    assert_eq!(gen.status.code(), Some(0));
    for engine in ["sat", "brute"] {
        let out = treerules(&["learn", "--instance", inst, "--engine", engine]);
        assert_eq!(out.status.code(), Some(1), "{engine}");
    }
    let two = treerules(&["learn", "--instance", inst, "--num-rules", "2"]);
    assert_eq!(two.status.code(), Some(0));
}

#[test]
fn apply_at_a_position() {
    let dir = TempDir::new().unwrap();
    let rule = write(dir.path(), "r.rules", "?x($Y1,$Y2) ~> ?x($Y2,$Y1)\n");
    let out = treerules(&["apply", "--rule", &rule, "--tree", "b(e(d,g),c)", "--at", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "b(e(g,d),c)\n");
    let all = treerules(&["apply", "--rule", &rule, "--tree", "b(e(d,g),c)", "--all"]);
    assert_eq!(stdout(&all), "-: b(c,e(d,g))\n0: b(e(g,d),c)\n");
    let miss = treerules(&["apply", "--rule", &rule, "--tree", "b(e(d,g),c)", "--at", "1"]);
    assert_eq!(miss.status.code(), Some(1));
}

#[test]
fn encode_then_decode_a_model() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "swapped.json", SWAPPED);
    let cnf = dir.path().join("swapped.cnf");
    let out = treerules(&["encode", "--instance", &inst, "--out", cnf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let formula = treerules::sat::parse_dimacs(&fs::read_to_string(&cnf).unwrap()).unwrap();
    let model = match treerules::sat::solve(&formula, None) {
        treerules::sat::SolveResult::Sat(m) => m,
        other => panic!("{other:?}"),
    };
    let values: Vec<String> = (1..=formula.num_vars())
        .map(|v| {
            let l = treerules::sat::Var::new(v).pos();
            if model.lit(l) { l.to_dimacs() } else { -l.to_dimacs() }.to_string()
        })
        .collect();
    let model_file = write(dir.path(), "swapped.model", &format!("s SATISFIABLE\nv {} 0\n", values.join(" ")));
    let dec = treerules(&["decode", "--instance", &inst, "--model", &model_file]);
    assert_eq!(dec.status.code(), Some(0));
    assert!(stdout(&dec).contains("# pair 2: rho1 at -"));
    let unsat = write(dir.path(), "none.model", "s UNSATISFIABLE\n");
    assert_eq!(treerules(&["decode", "--instance", &inst, "--model", &unsat]).status.code(), Some(1));
}

#[test]
fn ingest_writes_an_instance() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "f.txt", "# swapped implication\nQ -> P ::: P -> Q\nA & (B | C) ::: (B | C) & A\n");
    let out = treerules(&["ingest", "--formulas", &data, "--unify"]);
    assert_eq!(out.status.code(), Some(0));
    let inst = treerules::LearningInstance::from_json(&stdout(&out)).unwrap();
    assert_eq!(inst.pairs.len(), 2);
    assert_eq!(inst.pairs[0].target.to_string(), "imp(P1,P2)");
    assert_eq!(inst.pairs[0].source.to_string(), "imp(P2,P1)");
}

#[test]
fn exit_codes() {
    assert_eq!(treerules(&["--version"]).status.code(), Some(0));
    assert_eq!(treerules(&["--help"]).status.code(), Some(0));
    assert_eq!(treerules(&["learn"]).status.code(), Some(3));
    assert_eq!(treerules(&["learn", "--instance", "/nonexistent/x.json"]).status.code(), Some(3));
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"pairs\": [{\"source\": \"a(\", \"target\": \"a\"}], \"steps\": 1, \"rules\": 1}");
    assert_eq!(treerules(&["learn", "--instance", &bad]).status.code(), Some(3));
    let inst = write(dir.path(), "swapped.json", SWAPPED);
    let out = treerules(&["learn", "--instance", &inst, "--budget", "0", "--num-rules", "2"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
