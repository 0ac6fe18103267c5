use super::{CnfFormula, Lit};

/// Sinz's sequential counter for "at most `k` of `xs`".
///
/// `s[i][j]` holds when at least `j + 1` of the first `i + 1` inputs are true.
pub(super) fn at_most_k(f: &mut CnfFormula, xs: &[Lit], k: usize) {
    let n = xs.len();
    if k >= n {
        return;
    }
    if k == 0 {
        for &x in xs {
            f.add_unit(!x);
        }
        return;
    }
    let s: Vec<Vec<Lit>> = (0..n - 1)
        .map(|_| (0..k).map(|_| f.new_var().pos()).collect())
        .collect();
    f.add_clause(&[!xs[0], s[0][0]]);
    for j in 1..k {
        f.add_unit(!s[0][j]);
    }
    for i in 1..n - 1 {
        f.add_clause(&[!xs[i], s[i][0]]);
        f.add_clause(&[!s[i - 1][0], s[i][0]]);
        for j in 1..k {
            f.add_clause(&[!xs[i], !s[i - 1][j - 1], s[i][j]]);
            f.add_clause(&[!s[i - 1][j], s[i][j]]);
        }
        f.add_clause(&[!xs[i], !s[i - 1][k - 1]]);
    }
    f.add_clause(&[!xs[n - 1], !s[n - 2][k - 1]]);
}
