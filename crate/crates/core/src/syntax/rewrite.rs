//! Rewrites into the base language: splitting composite moduli into
//! prime-power parts over regular jumps, and expanding the derived predicates.

use crate::arith::factorize;
use crate::error::{OagError, Result};
use crate::group::{ConvexSubgroup, GroupSpec};
use crate::invariants::regular_jumps;
use crate::staircase::StaircaseSubgroup;

use super::ast::{Atom, Formula, Term};

/// `t ≡ 0 mod h`, folded to `true` when `h = G`.
fn cong(t: Term, h: StaircaseSubgroup) -> Formula {
    if h.is_whole() {
        Formula::True
    } else {
        Formula::Atom(Atom::Cong(t, h))
    }
}

/// The next jump strictly above `level` in `RJ_n`, or `G` (level 0).
fn successor(spec: &GroupSpec, n: u64, level: usize) -> Result<usize> {
    Ok(regular_jumps(spec, n)?.successor(level).map_or(0, |c| c.0))
}

fn require_jump(spec: &GroupSpec, n: u64, target: ConvexSubgroup, what: &str) -> Result<()> {
    if regular_jumps(spec, n)?.contains(target) {
        Ok(())
    } else {
        Err(OagError::Rewrite(format!(
            "{what} needs D{} to be an {n}-regular jump of the spec",
            target.0
        )))
    }
}

/// Writes `h` as `⋂ (CS(ℓ) + w·G)` over its steps; `w = 0` stands for the
/// plain convex subgroup.
pub fn step_decomposition(spec: &GroupSpec, h: &StaircaseSubgroup) -> Vec<(usize, u64)> {
    let k = spec.k();
    let mut runs = h.terms();
    if runs.first().is_none_or(|r| r.1 != 1) {
        runs.insert(0, (k, 1));
    }
    let mut out = Vec::new();
    for s in 0..runs.len() {
        let (level, _) = runs[s];
        if level == 0 {
            continue;
        }
        let w = runs.get(s + 1).map_or(0, |r| r.1);
        out.push((level, w));
    }
    out
}

/// Splits one congruence into prime-power parts, each over the least
/// `p`-regular jump containing its convex part.
pub fn split_modulus(spec: &GroupSpec, t: &Term, h: &StaircaseSubgroup) -> Result<Formula> {
    let mut parts = Vec::new();
    for (level, w) in step_decomposition(spec, h) {
        if w == 0 {
            parts.push(cong(t.clone(), StaircaseSubgroup::convex(spec, level)?));
            continue;
        }
        for (p, e) in factorize(w) {
            let jumps = regular_jumps(spec, p)?;
            let promoted = jumps.jumps.iter().map(|c| c.0).filter(|&j| j <= level).max().unwrap_or(0);
            if promoted > 0 {
                parts.push(cong(t.clone(), StaircaseSubgroup::convex_plus(spec, promoted, p.pow(e))?));
            }
        }
    }
    let out = Formula::and(parts);
    if let Formula::Atom(Atom::Cong(_, h2)) = &out {
        if h2 == h {
            return Ok(Formula::Atom(Atom::Cong(t.clone(), h.clone())));
        }
    }
    Ok(out)
}

pub fn expand_composite_modulus(f: &Formula, spec: &GroupSpec) -> Result<Formula> {
    f.try_map_atoms(&mut |a| match a {
        Atom::Cong(t, h) => split_modulus(spec, t, h),
        a => Ok(Formula::Atom(a.clone())),
    })
}

/// Expansion of a single derived atom; base atoms are returned unchanged.
pub fn expand_atom(a: &Atom, spec: &GroupSpec) -> Result<Formula> {
    let discrete_levels: Vec<usize> = (1..=spec.k()).filter(|&l| spec.quotient_is_discrete(l)).collect();
    Ok(match a {
        Atom::Cmp(..) | Atom::Cong(..) => Formula::Atom(a.clone()),
        Atom::AJump { n, term, target } => {
            require_jump(spec, *n, *target, "A_n(x) = D")?;
            let up = successor(spec, *n, target.0)?;
            Formula::and(vec![
                Formula::not(cong(term.clone(), StaircaseSubgroup::convex(spec, target.0)?)),
                cong(term.clone(), StaircaseSubgroup::convex(spec, up)?),
            ])
        }
        Atom::FJump { n, term, target } => {
            require_jump(spec, *n, *target, "F_n(x) = D")?;
            let up = successor(spec, *n, target.0)?;
            Formula::and(vec![
                Formula::not(cong(term.clone(), StaircaseSubgroup::convex_plus(spec, target.0, *n)?)),
                cong(term.clone(), StaircaseSubgroup::convex_plus(spec, up, *n)?),
            ])
        }
        Atom::M { k, term } => Formula::or(
            discrete_levels
                .iter()
                .map(|&l| {
                    let shifted = term.sub(&Term::one_at(l).scale(*k as i64));
                    Ok(cong(shifted, StaircaseSubgroup::convex(spec, l)?))
                })
                .collect::<Result<_>>()?,
        ),
        Atom::E { n, k, term } => {
            if k % n == 0 {
                return Err(OagError::Rewrite(format!(
                    "E_({n},{k}) has no quantifier-free form of this shape when n divides k"
                )));
            }
            let mut disjuncts = Vec::new();
            for &l in &discrete_levels {
                let up = successor(spec, *n, l)?;
                let shifted = term.sub(&Term::one_at(l).scale(*k as i64));
                disjuncts.push(Formula::and(vec![
                    cong(term.clone(), StaircaseSubgroup::convex_plus(spec, up, *n)?),
                    cong(shifted, StaircaseSubgroup::convex_plus(spec, l, *n)?),
                ]));
            }
            Formula::or(disjuncts)
        }
        Atom::D { p, r, i, term } => {
            let pr = p.pow(*r);
            let mut disjuncts = vec![cong(term.clone(), StaircaseSubgroup::multiple(spec, pr))];
            for c in regular_jumps(spec, *p)?.jumps {
                let up = successor(spec, *p, c.0)?;
                disjuncts.push(Formula::and(vec![
                    cong(term.clone(), StaircaseSubgroup::convex_plus(spec, c.0, p.pow(*i))?),
                    cong(term.clone(), StaircaseSubgroup::convex_plus(spec, up, pr)?),
                    Formula::not(cong(term.clone(), StaircaseSubgroup::convex_plus(spec, c.0, pr)?)),
                ]));
            }
            Formula::or(disjuncts)
        }
    })
}

pub fn expand_derived(f: &Formula, spec: &GroupSpec) -> Result<Formula> {
    f.try_map_atoms(&mut |a| expand_atom(a, spec))
}
