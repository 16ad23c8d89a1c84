//! The `oag` command line. [`run`] returns the exit code and both output
//! streams so tests can drive it without a process.
//!
//! Exit codes: 0 on success, 1 on domain errors, 2 on usage errors
//! (including unreadable input files).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::crosscheck::{crt_suite, pattern_suite, qe_suite, staircase_suite};
use crate::error::{OagError, Result};
use crate::fuzz;
use crate::group::{GroupElement, GroupSpec};
use crate::invariants::{classify, dim_p_group, infinite_jumps, regular_jumps, relevant_primes};
use crate::oracle::Box;
use crate::patterns::{check, construct_dp_witness, parse_pattern};
use crate::qe::{eliminate_all_traced, QeOptions};
use crate::solver::{solve, CongruenceSystem, SolveOutcome};
use crate::syntax::{eval_term, parse_formula, parse_spec, Assignment, Atom, Formula};
use crate::vcd::estimate_dual_vc;

#[derive(Parser, Debug)]
#[command(name = "oag", version, about = "Exact computation on lexicographic products of archimedean ordered abelian groups")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Coordinate radius of the oracle box.
    #[arg(long = "box", global = true)]
    radius: Option<i64>,
    /// Stable key=value output.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Per-prime dimensions, regular jumps and infinite jumps.
    Invariants { spec: PathBuf },
    /// Strongness class and dp-rank.
    Classify { spec: PathBuf },
    /// Eliminate the quantifiers of a formula.
    Qe {
        spec: PathBuf,
        formula: String,
        /// Write the elimination steps to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve a congruence system, one `x == a mod H` per line.
    Solve { spec: PathBuf, system: PathBuf },
    /// Check a pattern file.
    CheckPattern { spec: PathBuf, pattern: PathBuf },
    /// Build an inp pattern of the given depth.
    MakePattern {
        spec: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        cols: usize,
    },
    /// Atom counts over random parameter sets and their growth exponent.
    VcEstimate {
        spec: PathBuf,
        formula: String,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// The object variable; the other free variables are parameters.
        #[arg(long, default_value = "x")]
        var: String,
    },
    /// Compare a module against the brute-force oracle.
    OracleCheck {
        spec: PathBuf,
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Suite {
    Crt,
    Staircase,
    Qe,
    Patterns,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Domain(OagError),
}

impl From<OagError> for Failure {
    fn from(e: OagError) -> Self {
        Failure::Domain(e)
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}\n\nUsage: oag <VERB> <SPEC> ... (see `oag --help`)", path.display())))
}

fn load_spec(path: &Path) -> std::result::Result<GroupSpec, Failure> {
    Ok(parse_spec(&read(path)?)?)
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut out = String::new();
    match execute(&cli, &mut out) {
        Ok(code) => Outcome { code, stdout: out, stderr: String::new() },
        Err(Failure::Usage(msg)) => Outcome { code: 2, stdout: out, stderr: format!("error: {msg}\n") },
        Err(Failure::Domain(e)) => Outcome { code: 1, stdout: out, stderr: format!("error: {e}\n") },
    }
}

fn list(jumps: &[crate::group::ConvexSubgroup]) -> String {
    let items: Vec<String> = jumps.iter().map(|c| c.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn execute(cli: &Cli, out: &mut String) -> std::result::Result<i32, Failure> {
    match &cli.verb {
        Verb::Invariants { spec } => {
            let g = load_spec(spec)?;
            for p in relevant_primes(&g) {
                let rj = regular_jumps(&g, p)?;
                let mut rj_text = list(&rj.jumps);
                if rj.unbounded {
                    rj_text.push_str("+tower");
                }
                let inf = list(&infinite_jumps(&g, p));
                let dim = dim_p_group(&g, p);
                if cli.machine {
                    writeln!(out, "prime={p} dim={dim} rj={rj_text} rj_inf={inf}").unwrap();
                } else {
                    writeln!(out, "p = {p}: dim_p = {dim}, RJ_p = {rj_text}, RJ_p^inf = {inf}").unwrap();
                }
            }
            if relevant_primes(&g).is_empty() {
                writeln!(out, "no prime has nonzero dimension").unwrap();
            }
        }
        Verb::Classify { spec } => {
            let g = load_spec(spec)?;
            let c = classify(&g);
            writeln!(out, "kind={} dp_rank={}", c.kind, c.dp_rank).unwrap();
            if cli.machine {
                for s in &c.primes {
                    writeln!(out, "prime={} dim={} rj_rank={} rj_inf={}", s.p, s.dim, s.jumps.rank(), s.infinite_jumps.len())
                        .unwrap();
                }
            } else {
                writeln!(out, "reason: {}", c.reason).unwrap();
            }
        }
        Verb::Qe { spec, formula, trace } => {
            let g = load_spec(spec)?;
            let f = parse_formula(formula, &g)?;
            let t = eliminate_all_traced(&f, &g, QeOptions::default())?;
            if let Some(path) = trace {
                std::fs::write(path, t.to_string())
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            if cli.machine {
                writeln!(out, "output={}", t.output).unwrap();
            } else {
                writeln!(out, "{}", t.output).unwrap();
            }
        }
        Verb::Solve { spec, system } => {
            let g = load_spec(spec)?;
            let sys = parse_system(&read(system)?, &g)?;
            match solve(&g, &sys)? {
                SolveOutcome::Solvable(c) => writeln!(out, "SOLVABLE {c}").unwrap(),
                SolveOutcome::Unsolvable { pair: (i, j) } => writeln!(out, "UNSOLVABLE pair=({i},{j})").unwrap(),
            }
        }
        Verb::CheckPattern { spec, pattern } => {
            let g = load_spec(spec)?;
            let p = parse_pattern(&read(pattern)?, &g)?;
            let r = check(&p, &g)?;
            if cli.machine {
                writeln!(
                    out,
                    "valid={} kind={} depth={} columns={} paths={} failing_paths={} failing_subsets={}",
                    r.valid(),
                    r.kind,
                    r.depth,
                    r.columns,
                    r.paths_checked,
                    r.failing_paths.len(),
                    r.failing_subsets.len()
                )
                .unwrap();
            } else {
                writeln!(out, "{r}").unwrap();
            }
        }
        Verb::MakePattern { spec, depth, cols } => {
            let g = load_spec(spec)?;
            let p = construct_dp_witness(&g, *depth, *cols)?;
            write!(out, "{p}").unwrap();
        }
        Verb::VcEstimate { spec, formula, sizes, trials, var } => {
            let g = load_spec(spec)?;
            let f = parse_formula(formula, &g)?;
            let params: Vec<String> = f.free_vars().into_iter().filter(|v| v != var).collect();
            let mut rng = fuzz::rng(cli.seed);
            let est = estimate_dual_vc(&f, var, &params, &g, sizes, *trials, &mut rng)?;
            if !cli.machine {
                writeln!(out, "{:>6} {:>10} {:>14}", "|A|", "max atoms", "product bound").unwrap();
            }
            for (n, c, b) in &est.rows {
                if cli.machine {
                    writeln!(out, "size={n} atoms={c} bound={b}").unwrap();
                } else {
                    writeln!(out, "{n:>6} {c:>10} {b:>14}").unwrap();
                }
            }
            writeln!(out, "slope={:.3}", est.slope).unwrap();
        }
        Verb::OracleCheck { spec, suite, cases } => {
            let g = load_spec(spec)?;
            g.require_computable()?;
            let mut rng = fuzz::rng(cli.seed);
            let report = match suite {
                Suite::Crt => crt_suite(&mut rng, *cases, Some(&g)),
                Suite::Staircase => staircase_suite(&mut rng, *cases, Some(&g)),
                Suite::Qe => {
                    let bx = cli.radius.map(|r| Box::symmetric(&g, r, 1));
                    qe_suite(&mut rng, *cases, Some(&g), bx.as_ref())
                }
                Suite::Patterns => pattern_suite(&mut rng, &g, *cases),
            };
            writeln!(out, "{report}").unwrap();
            return Ok(if report.passed() { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// One constraint `x == a mod H` (or `x - a == 0 mod H`) per line; `#`
/// starts a comment. The variable's coefficient must be 1 or -1.
pub fn parse_system(text: &str, spec: &GroupSpec) -> Result<CongruenceSystem> {
    let mut sys = CongruenceSystem::new(Vec::new());
    let mut var: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| OagError::Parse { offset: n, message: format!("line {}: {msg}", n + 1) };
        let Formula::Atom(Atom::Cong(t, h)) = parse_formula(line, spec)? else {
            return Err(bad("expected a single congruence `x == a mod H`".into()));
        };
        let vars = t.vars();
        if vars.len() != 1 {
            return Err(bad("the constraint must mention exactly one variable".into()));
        }
        let (v, &c) = vars.iter().next().unwrap();
        if var.get_or_insert_with(|| v.clone()) != v {
            return Err(bad(format!("every line must constrain the same variable, found `{v}`")));
        }
        if c.abs() != 1 {
            return Err(bad(format!("coefficient of `{v}` must be 1 or -1")));
        }
        // c·v + r ∈ H  ⟺  v ≡ −c·r mod H
        let rest: GroupElement = eval_term(&t.without(v), spec, &Assignment::new())?;
        sys.push(rest.scale(-c), h);
    }
    if sys.constraints.is_empty() {
        return Err(OagError::Parse { offset: 0, message: "empty system".into() });
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_lines() {
        let g = parse_spec("component z: realize Z\ncomponent w: realize Z").unwrap();
        let sys = parse_system("x == (3,0) mod 6G\n# comment\n-x + (1,1) == 0 mod D1 + 2G\n", &g).unwrap();
        assert_eq!(sys.constraints.len(), 2);
        assert_eq!(sys.constraints[1].0, GroupElement::from_ints(&[1, 1]));
        assert!(parse_system("2x == 0 mod 2G", &g).is_err());
        assert!(parse_system("x < 3", &g).is_err());
        assert!(parse_system("", &g).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        let r = run(["oag", "classify", "/nonexistent/spec.oag"]);
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("Usage"));
        assert_eq!(run(["oag", "frobnicate"]).code, 2);
        assert_eq!(run(["oag", "--help"]).code, 0);
    }
}
