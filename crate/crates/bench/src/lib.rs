//! Fixed inputs shared by the benchmarks.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use treerules::gen::{gen_3sat, gen_vertex_cover, Cnf3};
use treerules::sat::{CnfFormula, Lit};
use treerules::{LearningInstance, Tree};

fn t(s: &str) -> Tree {
    s.parse().expect("fixture trees parse")
}

/// Two formula pairs that differ by swapping the operands of one connective.
pub fn swap_pairs() -> LearningInstance {
    LearningInstance::new(
        vec![
            (t("and(imp(A,B),C)"), t("and(imp(B,A),C)")),
            (t("imp(and(A,B),or(C,D))"), t("imp(or(C,D),and(A,B))")),
        ],
        1,
        1,
    )
    .expect("valid instance")
}

/// The vertex cover instance of the 4-cycle with a chord.
pub fn vertex_cover(k: usize) -> LearningInstance {
    gen_vertex_cover(4, &[(1, 2), (1, 4), (2, 3), (2, 4), (3, 4)], k).expect("valid graph")
}

pub fn three_sat() -> LearningInstance {
    let phi = Cnf3::new(4, vec![[1, -2, 3], [2, 3, 4], [-1, -3, -4]]).expect("valid formula");
    gen_3sat(&phi).expect("valid reduction")
}

pub fn random_cnf(vars: u32, clauses: usize, seed: u64) -> CnfFormula {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut next = move || rng.next_u64();
    let mut f = CnfFormula::new();
    f.reserve_vars(vars);
    for _ in 0..clauses {
        let lits: Vec<Lit> = (0..3)
            .map(|_| {
                let v = 1 + (next() % vars as u64) as i32;
                Lit::from_dimacs(if next() & 1 == 1 { v } else { -v })
            })
            .collect();
        f.add_clause(&lits);
    }
    f
}

/// A complete binary tree of the given height over `a`/`b` labels.
pub fn complete_tree(height: usize) -> Tree {
    if height == 0 {
        return Tree::leaf("a");
    }
    let kid = complete_tree(height - 1);
    Tree::new(if height.is_multiple_of(2) { "a" } else { "b" }, vec![kid.clone(), kid])
}
