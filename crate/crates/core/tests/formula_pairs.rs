use treerules::brute::learn_brute;
use treerules::formula::{parse_dataset, print_formula, unify_variables, FormulaOptions};
use treerules::transform::explains;
use treerules::{learn, LearnConfig, LearningInstance};

/// Attempts that use an inclusive "or" where "either ... or" was asked for.
const EITHER_OR: &str = "\
# attempt ::: solution
A | B ::: (A | B) & !(A & B)
Italy | Spain ::: (Italy | Spain) & !(Italy & Spain)
C -> (A | B) ::: C -> ((A | B) & !(A & B))
(X | Y) & Z ::: ((X | Y) & !(X & Y)) & Z
!D | E ::: (!D | E) & !(!D & E)
";

fn either_or() -> LearningInstance {
    let pairs = parse_dataset(EITHER_OR, FormulaOptions::default()).unwrap();
    LearningInstance::new(unify_variables(&pairs), 1, 1).unwrap()
}

#[test]
fn unified_variables_follow_the_solution() {
    let inst = either_or();
    assert_eq!(print_formula(&inst.pairs[0].target).unwrap(), "(P1 | P2) & !(P1 & P2)");
    assert_eq!(print_formula(&inst.pairs[1].source).unwrap(), "P1 | P2");
    assert_eq!(print_formula(&inst.pairs[2].source).unwrap(), "P1 -> P2 | P3");
}

#[test]
fn one_rule_explains_every_either_or_mistake() {
    let inst = either_or();
    let sol = learn(&inst, &LearnConfig::default()).unwrap().expect("a single rule exists");
    let rule = &sol.rules.rules()[0];
    for p in &inst.pairs {
        assert!(explains(rule, &p.source, &p.target).is_some(), "{rule} on {}", p.source);
    }
    assert!(learn_brute(&inst).unwrap().is_some());
}

#[test]
fn unrelated_mistake_needs_a_second_rule() {
    let mut pairs = parse_dataset(EITHER_OR, FormulaOptions::default()).unwrap();
    pairs.extend(parse_dataset("A -> B ::: B -> A\n", FormulaOptions::default()).unwrap());
    let inst = LearningInstance::new(unify_variables(&pairs), 1, 1).unwrap();
    assert!(learn(&inst, &LearnConfig::default()).unwrap().is_none());
    let two = inst.with_rules(2);
    let sol = learn(&two, &LearnConfig::default()).unwrap().unwrap();
    assert!(sol.traces.iter().all(Option::is_some));
}
