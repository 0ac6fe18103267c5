use std::fmt::Write;

use super::{CnfFormula, Lit, Model, Var};
use crate::error::{Error, ParseError, Result};

/// `p cnf V C` followed by one zero-terminated clause per line.
pub fn export_dimacs(f: &CnfFormula) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses()).unwrap();
    for c in f.clauses() {
        for l in c {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut f = CnfFormula::new();
    let mut declared: Option<(u32, usize)> = None;
    let mut cur: Vec<Lit> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let bad = || ParseError::new(i + 1, 1, "malformed problem line");
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(bad().into());
            }
            let v: u32 = parts[1].parse().map_err(|_| bad())?;
            let c: usize = parts[2].parse().map_err(|_| bad())?;
            f.reserve_vars(v);
            declared = Some((v, c));
            continue;
        }
        let Some((nv, _)) = declared else {
            return Err(ParseError::new(i + 1, 1, "clause before the problem line").into());
        };
        for tok in line.split_whitespace() {
            let x: i32 = tok
                .parse()
                .map_err(|_| ParseError::new(i + 1, 1, format!("invalid literal '{tok}'")))?;
            if x == 0 {
                f.add_clause(&cur);
                cur.clear();
            } else {
                if x.unsigned_abs() > nv {
                    return Err(ParseError::new(i + 1, 1, format!("literal {x} exceeds {nv} variables")).into());
                }
                cur.push(Lit::from_dimacs(x));
            }
        }
    }
    if !cur.is_empty() {
        f.add_clause(&cur);
    }
    Ok(f)
}

/// Reads the `s` status line of a solver's output: `Some(true)` for
/// satisfiable, `Some(false)` for unsatisfiable.
pub fn parse_solver_status(text: &str) -> Option<bool> {
    for line in text.lines() {
        let l = line.trim();
        let status = l.strip_prefix("s ").unwrap_or(l).trim();
        match status {
            "SATISFIABLE" | "SAT" => return Some(true),
            "UNSATISFIABLE" | "UNSAT" => return Some(false),
            _ => {}
        }
    }
    None
}

/// Reads `v`-lines of a solver's output into a model over `num_vars`
/// variables. Unmentioned variables are false.
pub fn import_model(text: &str, num_vars: u32) -> Result<Model> {
    let mut m = Model::new(num_vars);
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        let Some(rest) = l.strip_prefix('v') else {
            if l.is_empty() || l.starts_with('c') || l.starts_with('s') {
                continue;
            }
            return Err(Error::Parse(ParseError::new(
                i + 1,
                1,
                format!("malformed model line '{l}'"),
            )));
        };
        for tok in rest.split_whitespace() {
            let x: i32 = tok.parse().map_err(|_| {
                Error::Parse(ParseError::new(i + 1, 1, format!("invalid literal '{tok}'")))
            })?;
            if x == 0 {
                continue;
            }
            if x.unsigned_abs() > num_vars {
                return Err(Error::InvalidInput(format!(
                    "model references unknown variable {}",
                    x.unsigned_abs()
                )));
            }
            m.set(Var::new(x.unsigned_abs()), x > 0);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{solve, SolveResult};

    #[test]
    fn export_format() {
        let mut f = CnfFormula::new();
        let (a, b) = (f.new_var(), f.new_var());
        f.add_clause(&[a.pos(), b.neg()]);
        assert_eq!(export_dimacs(&f), "p cnf 2 1\n1 -2 0\n");
        assert_eq!(parse_dimacs(&export_dimacs(&f)).unwrap(), f);
    }

    #[test]
    fn model_round_trip() {
        let f = parse_dimacs("c demo\np cnf 3 3\n1 2 0\n-1 3 0\n-3 -2 0\n").unwrap();
        let SolveResult::Sat(m) = solve(&f, None) else { panic!() };
        let text: String = (1..=3)
            .map(|v| {
                let x = v as i32;
                format!("{} ", if m.value(Var::new(v)) { x } else { -x })
            })
            .collect();
        let out = format!("s SATISFIABLE\nv {text}0\n");
        assert_eq!(parse_solver_status(&out), Some(true));
        let back = import_model(&out, 3).unwrap();
        assert!(back.satisfies(&f));
        assert_eq!(back, m);
    }

    #[test]
    fn model_errors() {
        assert!(import_model("v 1 x 0", 2).is_err());
        assert!(import_model("v 1 5 0", 2).is_err());
        assert!(import_model("garbage", 2).is_err());
        assert_eq!(parse_solver_status("s UNSATISFIABLE"), Some(false));
        assert!(parse_dimacs("1 2 0").is_err());
    }
}
