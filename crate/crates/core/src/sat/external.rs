use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use super::{export_dimacs, import_model, parse_solver_status, CnfFormula, SolveResult};
use crate::error::{Error, Result};

static COUNTER: AtomicU64 = AtomicU64::new(0);

/// Runs an external solver. `{input}` in the template is replaced by the path
/// of a temporary DIMACS file; the command runs under `sh -c` and its
/// standard output is read in the usual `s`/`v` line format.
pub fn solve_external(command_template: &str, f: &CnfFormula) -> Result<SolveResult> {
    let path = std::env::temp_dir().join(format!(
        "treerules-{}-{}.cnf",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&path, export_dimacs(f))?;
    let cmd = if command_template.contains("{input}") {
        command_template.replace("{input}", &path.display().to_string())
    } else {
        format!("{command_template} {}", path.display())
    };
    let out = Command::new("sh").arg("-c").arg(&cmd).output();
    let _ = std::fs::remove_file(&path);
    let out = out?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    match parse_solver_status(&stdout) {
        Some(false) => Ok(SolveResult::Unsat),
        Some(true) => {
            let model_lines: String = stdout
                .lines()
                .filter(|l| l.trim_start().starts_with('v'))
                .map(|l| format!("{l}\n"))
                .collect();
            let m = import_model(&model_lines, f.num_vars())?;
            if !m.satisfies(f) {
                return Err(Error::Verification(
                    "external solver returned a model that violates the formula".into(),
                ));
            }
            Ok(SolveResult::Sat(m))
        }
        None => Err(Error::InvalidInput(format!(
            "external solver `{cmd}` printed no status line (exit status {})",
            out.status
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_solver() {
        let mut f = CnfFormula::new();
        let a = f.new_var();
        let b = f.new_var();
        f.add_clause(&[a.pos()]);
        f.add_clause(&[a.neg(), b.neg()]);
        let res = solve_external("printf 's SATISFIABLE\\nv 1 -2 0\\n' #", &f).unwrap();
        assert!(res.is_sat());
        let res = solve_external("echo 's UNSATISFIABLE' #", &f).unwrap();
        assert_eq!(res, SolveResult::Unsat);
        assert!(solve_external("printf 's SATISFIABLE\\nv -1 0\\n' #", &f).is_err());
        assert!(solve_external("true", &f).is_err());
    }
}
