//! Seeded comparisons of the algebraic modules against the oracle. Shared by
//! `oag oracle-check` and the acceptance suite.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{OagError, Result};
use crate::fuzz::{self, FuzzRng};
use crate::group::{GroupElement, GroupSpec};
use crate::oracle::{elimination_mismatch, oracle_solve, quotient, Box, Generators};
use crate::patterns::{check, construct_dp_witness, construct_inp_from_chain, realizable_family, Pattern, PatternKind, PatternRow};
use crate::qe::eliminate_exists;
use crate::solver::{solve, CongruenceSystem, SolveOutcome};
use crate::staircase::StaircaseSubgroup;
use crate::syntax::{Formula, Term};
use crate::ext::ExtNat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    /// Cases whose constructor refused the spec on a stated hypothesis.
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.to_string(), cases: 0, skipped: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, outcome: Result<Option<String>>) {
        self.cases += 1;
        match outcome {
            Ok(None) => {}
            Ok(Some(msg)) => self.failures.push(msg),
            Err(OagError::Hypothesis { .. }) => self.skipped += 1,
            Err(e) => self.failures.push(format!("error: {e}")),
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "suite={} cases={} ", self.suite, self.cases)?;
        if self.skipped > 0 {
            write!(f, "skipped={} ", self.skipped)?;
        }
        write!(f, "failures={} {verdict}", self.failures.len())?;
        for msg in self.failures.iter().take(10) {
            write!(f, "\n  counterexample: {msg}")?;
        }
        Ok(())
    }
}

/// Solver against exhaustive search: same solvability, and the returned
/// coset holds exactly the oracle's solutions among a complete residue set
/// and random perturbations of it.
pub fn crt_case(spec: &GroupSpec, sys: &CongruenceSystem, rng: &mut FuzzRng) -> Result<Option<String>> {
    let oracle = oracle_solve(spec, sys)?;
    let ours = solve(spec, sys)?;
    let show = || {
        let cs: Vec<String> = sys.constraints.iter().map(|(a, h)| format!("x == {a} mod {h}")).collect();
        cs.join("; ")
    };
    match (&ours, oracle.solvable()) {
        (SolveOutcome::Unsolvable { .. }, false) => return Ok(None),
        (SolveOutcome::Unsolvable { pair }, true) => {
            return Ok(Some(format!("{}: solver says unsolvable at {pair:?}, oracle found {}", show(), oracle.solutions[0])))
        }
        (SolveOutcome::Solvable(c), false) => return Ok(Some(format!("{}: solver returned {c}, oracle found none", show()))),
        (SolveOutcome::Solvable(_), true) => {}
    }
    let coset = ours.coset().expect("solvable");
    let gens: Vec<Generators> = sys.constraints.iter().map(|(_, h)| Generators::of(h)).collect();
    let satisfies = |x: &GroupElement| sys.constraints.iter().zip(&gens).all(|((a, _), g)| g.contains(spec, &x.sub(a)));
    for x in &oracle.candidates {
        if coset.contains(spec, x) != oracle.solutions.contains(x) {
            return Ok(Some(format!("{}: coset {coset} disagrees with the oracle at {x}", show())));
        }
    }
    for _ in 0..40 {
        let base = oracle.candidates.choose(rng).expect("nonempty");
        let x = base.add(&fuzz::element(rng, spec, 40));
        if coset.contains(spec, &x) != satisfies(&x) {
            return Ok(Some(format!("{}: coset {coset} disagrees with the oracle at {x}", show())));
        }
    }
    Ok(None)
}

pub fn crt_suite(rng: &mut FuzzRng, cases: usize, spec: Option<&GroupSpec>) -> SuiteReport {
    let mut report = SuiteReport::new("crt");
    for _ in 0..cases {
        let g = spec.cloned().unwrap_or_else(|| fuzz::computable_spec(rng, 3));
        let sys = fuzz::congruence_system(rng, &g);
        let outcome = crt_case(&g, &sys, rng);
        report.record(outcome);
    }
    report
}

/// Sum, intersection and membership of a random pair against the oracle's
/// generator sets, plus the index against the quotient size.
pub fn staircase_case(spec: &GroupSpec, rng: &mut FuzzRng) -> Result<Option<String>> {
    let h1 = fuzz::staircase(rng, spec);
    let h2 = fuzz::staircase(rng, spec);
    let (g1, g2) = (Generators::of(&h1), Generators::of(&h2));
    let sum = h1.sum(spec, &h2)?;
    let meet = h1.intersect(spec, &h2)?;
    let joined = g1.plus(&g2);
    for _ in 0..20 {
        let x = fuzz::element(rng, spec, 30);
        let checks = [
            ("membership", h1.contains(spec, &x), g1.contains(spec, &x)),
            ("sum", sum.contains(spec, &x), joined.contains(spec, &x)),
            ("intersection", meet.contains(spec, &x), g1.contains(spec, &x) && g2.contains(spec, &x)),
        ];
        for (what, ours, oracle) in checks {
            if ours != oracle {
                return Ok(Some(format!("{what} of {h1} and {h2} at {x}: staircase {ours}, oracle {oracle}")));
            }
        }
    }
    if let ExtNat::Fin(n) = h1.index_in_group(spec) {
        let q = quotient(spec, &h1)?;
        if q.size() != n as u128 {
            return Ok(Some(format!("index of {h1}: {n}, quotient size {}", q.size())));
        }
    }
    Ok(None)
}

pub fn staircase_suite(rng: &mut FuzzRng, cases: usize, spec: Option<&GroupSpec>) -> SuiteReport {
    let mut report = SuiteReport::new("staircase");
    for _ in 0..cases {
        let g = spec.cloned().unwrap_or_else(|| fuzz::computable_spec(rng, 3));
        let outcome = staircase_case(&g, rng);
        report.record(outcome);
    }
    report
}

/// The box an elimination is checked on: integers in `[-50, 50]` for one
/// level, halves in `[-3, 3]` beyond that.
pub fn qe_box(spec: &GroupSpec) -> Box {
    if spec.k() == 1 {
        Box::default_for(spec)
    } else {
        Box::symmetric(spec, 3, 2)
    }
}

pub fn qe_case(spec: &GroupSpec, f: &Formula, free: &[String], bx: &Box) -> Result<Option<String>> {
    let Formula::Exists(x, body) = f else {
        return Ok(Some(format!("{f} is not existential")));
    };
    let out = eliminate_exists(f, spec)?;
    Ok(elimination_mismatch(spec, x, body, &out, free, bx)?.map(|asg| {
        let at: Vec<String> = asg.iter().map(|(v, g)| format!("{v}={g}")).collect();
        format!("{f} => {out} differs at {}", at.join(" "))
    }))
}

/// Random existential formulas; with no spec each case draws a small one.
pub fn qe_suite(rng: &mut FuzzRng, cases: usize, spec: Option<&GroupSpec>, bx: Option<&Box>) -> SuiteReport {
    let mut report = SuiteReport::new("qe");
    for _ in 0..cases {
        let g = spec.cloned().unwrap_or_else(|| fuzz::qe_spec(rng));
        let (f, free) = fuzz::qe_formula(rng, &g);
        let b = bx.cloned().unwrap_or_else(|| qe_box(&g));
        report.record(qe_case(&g, &f, &free, &b));
    }
    report
}

/// A 2-row wict candidate whose rows both come from one directed family:
/// initial segments `x < a`, `x <= a`, or cosets of `p^r·G` for one prime.
pub fn adversarial_wict(rng: &mut FuzzRng, spec: &GroupSpec, m: usize) -> Pattern {
    let x = Term::var("x");
    let a = Term::var("a");
    let p = *[2u64, 3].choose(rng).unwrap();
    let order = rng.gen_bool(0.5);
    let rows = (0..2)
        .map(|_| {
            let formula = if order {
                if rng.gen_bool(0.5) {
                    Formula::lt(x.clone(), a.clone())
                } else {
                    Formula::le(x.clone(), a.clone())
                }
            } else {
                let h = StaircaseSubgroup::multiple(spec, p.pow(rng.gen_range(1..=3)));
                Formula::cong(x.clone(), a.clone(), h)
            };
            PatternRow {
                formula,
                params: vec!["a".into()],
                columns: (0..m).map(|_| vec![fuzz::element(rng, spec, 9)]).collect(),
                bound: None,
            }
        })
        .collect();
    Pattern { kind: PatternKind::Wict, object: "x".into(), rows, capacity: None }
}

fn expect_valid(p: Result<Pattern>, spec: &GroupSpec, what: &str) -> Result<Option<String>> {
    let p = p?;
    let r = check(&p, spec)?;
    if !r.valid() {
        return Ok(Some(format!("{what}: {r}")));
    }
    if p.rows.iter().any(|row| row.bound != Some(2)) {
        return Ok(Some(format!("{what}: rows are not 2-inconsistent")));
    }
    Ok(None)
}

/// Constructed inp patterns at depth 2 and 3 with 3 and 4 columns must check
/// out; `adversarial` directed-family wict candidates must all be rejected.
pub fn pattern_suite(rng: &mut FuzzRng, spec: &GroupSpec, adversarial: usize) -> SuiteReport {
    let mut report = SuiteReport::new("patterns");
    for depth in [2usize, 3] {
        for m in [3usize, 4] {
            let dp = expect_valid(construct_dp_witness(spec, depth, m), spec, &format!("dp witness depth {depth}, {m} columns"));
            report.record(dp);
            let chain = realizable_family(spec, depth, m)
                .and_then(|fam| construct_inp_from_chain(spec, &fam.subgroups(), m));
            let inp = expect_valid(chain, spec, &format!("chain pattern depth {depth}, {m} columns"));
            report.record(inp);
        }
    }
    for _ in 0..adversarial {
        let m = rng.gen_range(3..=4);
        let p = adversarial_wict(rng, spec, m);
        let outcome = check(&p, spec).map(|r| {
            r.valid().then(|| format!("accepted a single-family wict pattern:\n{p}"))
        });
        report.record(outcome);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::RankOneRealization as R;

    #[test]
    fn suites_pass_on_small_runs() {
        let mut rng = fuzz::rng(3);
        let zz = GroupSpec::from_realizations(vec![R::integers(), R::integers()]);
        for r in [
            crt_suite(&mut rng, 30, None),
            staircase_suite(&mut rng, 30, None),
            qe_suite(&mut rng, 10, None, None),
            pattern_suite(&mut rng, &zz, 10),
        ] {
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn broken_solution_is_reported() {
        let g = GroupSpec::from_realizations(vec![R::integers()]);
        let mut r = SuiteReport::new("x");
        r.record(Ok(Some("bad".into())));
        assert!(!r.passed());
        assert!(r.to_string().contains("counterexample: bad"));
        let sys = CongruenceSystem::new(vec![(g.unit(1), StaircaseSubgroup::multiple(&g, 2))]);
        assert_eq!(crt_case(&g, &sys, &mut fuzz::rng(0)).unwrap(), None);
    }
}
