//! Direct evaluation of formulas on computable specs. Derived predicates are
//! evaluated from their definitions through the jump operators, not through
//! their rewrites.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::arith::Rational;
use crate::error::{OagError, Result};
use crate::group::{ConvexSubgroup, GroupElement, GroupSpec, Jump};

use super::ast::{Atom, Formula, Rel, Term};

pub type Assignment = BTreeMap<String, GroupElement>;

pub fn eval_term(t: &Term, spec: &GroupSpec, asg: &Assignment) -> Result<GroupElement> {
    let mut acc = t.constant_part().cloned().unwrap_or_else(|| spec.zero());
    if acc.len() != spec.k() {
        return Err(OagError::SpecMismatch(format!("constant {acc} has the wrong length")));
    }
    for (v, c) in t.vars() {
        let g = asg.get(v).ok_or_else(|| OagError::Scope(format!("variable `{v}` is unassigned")))?;
        acc = acc.add(&g.scale(*c));
    }
    for (l, c) in t.ones() {
        if !spec.quotient_is_discrete(*l) {
            return Err(OagError::Precondition(format!("one@{l} needs G/D{l} discrete")));
        }
        acc = acc.add(&spec.unit(*l).scale(*c));
    }
    Ok(acc)
}

fn strictly_below(a: Jump, b: Jump) -> bool {
    a != b && a.is_subset_of(b)
}

/// `M_k(g)`: the leading component is discrete and the leading coordinate is `k`.
pub fn holds_m(spec: &GroupSpec, g: &GroupElement, k: u64) -> bool {
    match g.leading_index() {
        Some(i) => spec.component(i).is_discrete() && g.coords[i - 1] == Rational::from_integer(k as i64),
        None => false,
    }
}

/// `E_(n,k)(g)`: some `h` with `M_1(h)`, `A_n(h) = F_n(g)` and
/// `F_n(g − k·h) ⊊ F_n(g)`. Only the unit vector at the level of `F_n(g)` can
/// satisfy the first two conditions up to lower coordinates, which do not
/// affect the third, so that `h` is the one tried.
pub fn holds_e(spec: &GroupSpec, g: &GroupElement, n: u64, k: u64) -> bool {
    let f = spec.f_n_of(g, n);
    let Jump::At(ConvexSubgroup(l)) = f else {
        return false;
    };
    if l == 0 {
        return false;
    }
    let h = spec.unit(l);
    holds_m(spec, &h, 1)
        && spec.a_n_of(&h, n) == f
        && strictly_below(spec.f_n_of(&g.sub(&h.scale(k as i64)), n), f)
}

/// `D_(p,r,i)(g)`: `g ∈ p^r G` or `F_{p^r}(p^{r−i} g) ⊊ F_{p^r}(g)`.
pub fn holds_d(spec: &GroupSpec, g: &GroupElement, p: u64, r: u32, i: u32) -> bool {
    let n = p.pow(r);
    let f = spec.f_n_of(g, n);
    f == Jump::Empty || strictly_below(spec.f_n_of(&g.scale(p.pow(r - i) as i64), n), f)
}

pub fn eval_atom(a: &Atom, spec: &GroupSpec, asg: &Assignment) -> Result<bool> {
    let g = eval_term(a.term(), spec, asg)?;
    Ok(match a {
        Atom::Cmp(_, rel) => {
            let sign = g.coords.iter().find(|c| !c.is_zero()).map(|c| *c > Rational::zero());
            match rel {
                Rel::Le => sign != Some(true),
                Rel::Lt => sign == Some(false),
                Rel::Eq => sign.is_none(),
            }
        }
        Atom::Cong(_, h) => h.contains(spec, &g),
        Atom::AJump { n, target, .. } => spec.a_n_of(&g, *n) == Jump::At(*target),
        Atom::FJump { n, target, .. } => spec.f_n_of(&g, *n) == Jump::At(*target),
        Atom::M { k, .. } => holds_m(spec, &g, *k),
        Atom::E { n, k, .. } => holds_e(spec, &g, *n, *k),
        Atom::D { p, r, i, .. } => holds_d(spec, &g, *p, *r, *i),
    })
}

/// Evaluates a quantifier-free formula.
pub fn eval(f: &Formula, spec: &GroupSpec, asg: &Assignment) -> Result<bool> {
    eval_in(f, spec, asg, None)
}

/// Evaluates with quantifiers ranging over `domain` (a bounded model check).
pub fn eval_bounded(f: &Formula, spec: &GroupSpec, asg: &Assignment, domain: &[GroupElement]) -> Result<bool> {
    eval_in(f, spec, asg, Some(domain))
}

fn eval_in(f: &Formula, spec: &GroupSpec, asg: &Assignment, domain: Option<&[GroupElement]>) -> Result<bool> {
    spec.require_computable()?;
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom(a) => eval_atom(a, spec, asg),
        Formula::Not(g) => Ok(!eval_in(g, spec, asg, domain)?),
        Formula::And(gs) => {
            for g in gs {
                if !eval_in(g, spec, asg, domain)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_in(g, spec, asg, domain)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let dom = domain.ok_or_else(|| {
                OagError::Precondition("quantified formulas need a bounded domain to evaluate".into())
            })?;
            let want = matches!(f, Formula::Exists(..));
            let mut local = asg.clone();
            for x in dom {
                local.insert(v.clone(), x.clone());
                if eval_in(g, spec, &local, domain)? == want {
                    return Ok(want);
                }
            }
            Ok(!want)
        }
    }
}
