//! Acceptance suite: one line per criterion, then a nonzero exit if any
//! criterion failed. Runs without the libtest harness.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;

use oag_core::crosscheck::{crt_suite, pattern_suite, qe_suite, staircase_suite};
use oag_core::ext::ExtNat;
use oag_core::fuzz;
use oag_core::group::{GroupSpec, RankOneRealization as R};
use oag_core::invariants::{classify, dp_rank};
use oag_core::patterns::{construct_dp_witness, infinite_jump_family, realizable_family};
use oag_core::syntax::eval::eval_atom;
use oag_core::syntax::{eval, parse_formula, parse_spec, Assignment, Formula, Term};
use oag_core::vcd::{count_atoms, estimate_dual_vc, family_sizes, log_log_slope, product_bound, psi_disjunction};
use oag_core::GroupElement;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples")
}

fn corpus() -> Vec<(String, GroupSpec)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(examples_dir()).expect("examples directory") {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "oag") {
            let name = path.file_stem().unwrap().to_string_lossy().to_string();
            let spec = parse_spec(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            out.push((name, spec));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// dp-rank from the component dimensions alone: 0 for the trivial group,
/// infinite when a component or the tower has infinitely many infinite
/// dimensions, else 1 plus the number of (prime, component) pairs with
/// infinite dimension.
fn dp_rank_by_counting(spec: &GroupSpec) -> ExtNat {
    if spec.k() == 0 && spec.omega_tower().is_none() {
        return ExtNat::ZERO;
    }
    let tower_blocks = spec
        .omega_tower()
        .is_some_and(|t| t.dims().default_dim() != ExtNat::ZERO || t.dims().exceptions().values().any(|&d| d != ExtNat::ZERO));
    if tower_blocks || spec.components().iter().any(|c| c.dims().default_dim() == ExtNat::Inf) {
        return ExtNat::Inf;
    }
    let infinite = spec
        .components()
        .iter()
        .flat_map(|c| c.dims().exceptions().values())
        .filter(|&&d| d == ExtNat::Inf)
        .count();
    ExtNat::Fin(1 + infinite as u64)
}

fn dp_rank_table() -> Verdict {
    let text = std::fs::read_to_string(examples_dir().join("dp_rank_table.txt")).expect("table");
    let table: BTreeMap<String, (String, String)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let w: Vec<&str> = l.split_whitespace().collect();
            (w[0].to_string(), (w[1].to_string(), w[2].to_string()))
        })
        .collect();
    let specs = corpus();
    let mut bad = Vec::new();
    for (name, spec) in &specs {
        let Some((kind, rank)) = table.get(name) else {
            bad.push(format!("{name} missing from the table"));
            continue;
        };
        let c = classify(spec);
        let counted = dp_rank_by_counting(spec);
        if &c.kind.to_string() != kind || &c.dp_rank.to_string() != rank || &counted.to_string() != rank {
            bad.push(format!("{name}: table {kind}/{rank}, classify {}/{}, counted {counted}", c.kind, c.dp_rank));
        }
    }
    let ok = bad.is_empty() && specs.len() >= 12 && specs.len() == table.len();
    verdict(ok, format!("{} specs, {} table rows {}", specs.len(), table.len(), bad.join("; ")))
}

fn crt_oracle() -> Verdict {
    let r = crt_suite(&mut fuzz::rng(1), 1000, None);
    verdict(r.passed(), r.to_string())
}

fn staircase_identities() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (name, spec) in corpus() {
        if !dp_rank(&spec).is_finite() || spec.k() == 0 {
            continue;
        }
        let family = match infinite_jump_family(&spec) {
            Ok(f) if !f.members.is_empty() => Ok(f),
            _ if spec.is_computable() => (1..=3).rev().map(|rows| realizable_family(&spec, rows, 3)).find(Result::is_ok).unwrap_or_else(|| realizable_family(&spec, 1, 3)),
            other => other,
        };
        match family {
            Ok(f) if f.members.is_empty() => {}
            Ok(f) => {
                checked += 1;
                match f.verify_identities(&spec) {
                    Ok(fails) if fails.is_empty() => {}
                    Ok(fails) => bad.push(format!("{name}: {}", fails.join(", "))),
                    Err(e) => bad.push(format!("{name}: {e}")),
                }
            }
            // a spec without finite-index congruences (such as Q) has no family
            Err(_) => {}
        }
    }
    let r = staircase_suite(&mut fuzz::rng(3), 500, None);
    let ok = bad.is_empty() && checked > 0 && r.passed();
    verdict(ok, format!("families on {checked} specs {}; {r}", bad.join("; ")))
}

fn qe_soundness() -> Verdict {
    let r = qe_suite(&mut fuzz::rng(4), 300, None, None);
    verdict(r.passed(), r.to_string())
}

fn pattern_constructions() -> Verdict {
    let mut rng = fuzz::rng(5);
    let zz = GroupSpec::from_realizations(vec![R::integers(), R::integers()]);
    let zqz = GroupSpec::from_realizations(vec![R::integers(), R::All, R::integers()]);
    let a = pattern_suite(&mut rng, &zz, 50);
    let b = pattern_suite(&mut rng, &zqz, 50);
    let ok = a.passed() && b.passed() && a.skipped == 0 && b.skipped == 0;
    verdict(ok, format!("[Z,Z] {a}; [Z,Q,Z] {b}"))
}

fn random_parameters(rng: &mut fuzz::FuzzRng, spec: &GroupSpec, arity: usize, n: usize) -> Vec<Vec<GroupElement>> {
    (0..n)
        .map(|_| (0..arity).map(|_| fuzz::element(rng, spec, 10)).collect())
        .collect()
}

fn atom_count_bounds() -> Verdict {
    let mut rng = fuzz::rng(6);
    let mut bad = Vec::new();
    for case in 0..200 {
        let spec = fuzz::qe_spec(&mut rng);
        let (f, params) = fuzz::qe_formula(&mut rng, &spec);
        let Formula::Exists(x, body) = f else { unreachable!() };
        let n = rng.gen_range(1..=12);
        let set = random_parameters(&mut rng, &spec, params.len(), n);
        let outcome = count_atoms(&body, &x, &params, &set, &spec)
            .and_then(|c| Ok((c.atom_count, product_bound(&family_sizes(&body, &spec)?, n))));
        match outcome {
            Ok((c, b)) if c as u128 <= b => {}
            Ok((c, b)) => bad.push(format!("case {case}: {body} over {n} tuples: {c} atoms > bound {b}")),
            Err(e) => bad.push(format!("case {case}: {e}")),
        }
    }
    let zz = GroupSpec::from_realizations(vec![R::integers(), R::integers()]);
    let lt = parse_formula("x < y", &zz).unwrap();
    for _ in 0..20 {
        let n = rng.gen_range(1..=15);
        let mut values: Vec<GroupElement> = Vec::new();
        while values.len() < n {
            let g = fuzz::element(&mut rng, &zz, 20);
            if !values.contains(&g) {
                values.push(g);
            }
        }
        let set: Vec<Vec<GroupElement>> = values.into_iter().map(|g| vec![g]).collect();
        let c = count_atoms(&lt, "x", &["y".to_string()], &set, &zz).unwrap().atom_count;
        if c != n + 1 {
            bad.push(format!("nested family of {n}: {c} atoms"));
        }
    }
    verdict(bad.is_empty(), format!("200 random pairs, 20 nested families {}", bad.join("; ")))
}

const SIZES: [usize; 5] = [4, 8, 16, 32, 64];

fn vc_slopes() -> Verdict {
    let mut rng = fuzz::rng(7);
    let mut lines = Vec::new();
    let mut ok = true;
    for spec in [
        GroupSpec::from_realizations(vec![R::integers()]),
        GroupSpec::from_realizations(vec![R::integers(), R::integers()]),
    ] {
        let rank = dp_rank(&spec).finite().unwrap() as f64;
        // lower side: the disjunction built from a depth-rank pattern
        let mut pts = Vec::new();
        for &m in &SIZES {
            let p = construct_dp_witness(&spec, rank as usize, m + 1).unwrap();
            let (psi, params, set) = psi_disjunction(&p, m).unwrap();
            let c = count_atoms(&psi, "x", &params, &set, &spec).unwrap().atom_count;
            pts.push((set.len() as f64, c as f64));
        }
        let low = log_log_slope(&pts);
        ok &= low >= rank - 0.3 && low <= rank + 0.3;
        lines.push(format!("k={} witness slope {low:.3}", spec.k()));
        // upper side: random formulas
        for _ in 0..3 {
            let (f, params) = fuzz::qe_formula(&mut rng, &spec);
            let Formula::Exists(x, body) = f else { unreachable!() };
            match estimate_dual_vc(&body, &x, &params, &spec, &SIZES, 20, &mut rng) {
                Ok(est) => {
                    ok &= est.slope <= rank + 0.3 && est.within_bound;
                    lines.push(format!("{body}: {:.3}", est.slope));
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{body}: {e}"));
                }
            }
        }
    }
    verdict(ok, lines.join("; "))
}

fn derived_rewrites() -> Verdict {
    let mut rng = fuzz::rng(8);
    let mut bad = Vec::new();
    let mut samples = 0;
    for kind in ['a', 'f', 'm', 'e', 'd'] {
        for _ in 0..100 {
            let spec = fuzz::computable_spec(&mut rng, 3);
            let atom = fuzz::derived_atom(&mut rng, &spec, kind, Term::var("x"));
            let expanded = match oag_core::syntax::rewrite::expand_atom(&atom, &spec) {
                Ok(f) => f,
                Err(e) => {
                    bad.push(format!("{atom}: {e}"));
                    continue;
                }
            };
            for _ in 0..20 {
                let mut asg = Assignment::new();
                asg.insert("x".into(), fuzz::element(&mut rng, &spec, 12));
                samples += 1;
                let direct = eval_atom(&atom, &spec, &asg).unwrap();
                if eval(&expanded, &spec, &asg).unwrap() != direct {
                    bad.push(format!("{atom} at {}", asg["x"]));
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("500 atoms, {samples} samples {}", bad.iter().take(5).cloned().collect::<Vec<_>>().join("; ")))
}

fn direct_sum_additivity() -> Verdict {
    let mut rng = fuzz::rng(9);
    let mut pairs = 0;
    let mut bad = Vec::new();
    while pairs < 50 {
        let g = fuzz::finite_rank_spec(&mut rng, true);
        let h = fuzz::finite_rank_spec(&mut rng, true);
        let (Some(a), Some(b)) = (dp_rank(&g).finite(), dp_rank(&h).finite()) else { continue };
        pairs += 1;
        let sum = dp_rank(&g.concat(&h).unwrap());
        if sum != ExtNat::Fin(a + b - 1) {
            bad.push(format!("{a} + {b} - 1 != {sum}"));
        }
    }
    verdict(bad.is_empty(), format!("{pairs} pairs {}", bad.join("; ")))
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict, Option<Duration>);
    let criteria: [Criterion; 9] = [
        ("dp-rank table", dp_rank_table, Some(Duration::from_secs(1))),
        ("congruence systems vs oracle", crt_oracle, Some(Duration::from_secs(60))),
        ("staircase identities and membership", staircase_identities, None),
        ("quantifier elimination vs oracle", qe_soundness, Some(Duration::from_secs(300))),
        ("pattern constructions", pattern_constructions, Some(Duration::from_secs(120))),
        ("atom counts within the product bound", atom_count_bounds, None),
        ("vc-density slopes", vc_slopes, Some(Duration::from_secs(120))),
        ("derived predicate rewrites", derived_rewrites, None),
        ("dp-rank of lexicographic sums", direct_sum_additivity, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let ok = v.ok && in_time;
        if !ok {
            failed += 1;
        }
        let timing = match limit {
            Some(l) => format!("{:.2}s of {}s", took.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", took.as_secs_f64()),
        };
        println!("{} {}. {name} ({timing}): {}", if ok { "PASS" } else { "FAIL" }, i + 1, v.detail.trim());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
