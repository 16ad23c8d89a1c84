//! Brute-force ground truth. Nothing here calls into the staircase, solver or
//! qe modules: membership, term evaluation and satisfiability are recomputed
//! from scratch by enumeration, so agreement with those modules is evidence.
//!
//! Every enumeration is checked against a cap (`OAG_MAX_ENUM`, default
//! 20 000 000 points); exceeding it is an error, never a truncation.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::Rational;
use crate::error::{OagError, Result};
use crate::group::{GroupElement, GroupSpec, RankOneRealization};
use crate::solver::CongruenceSystem;
use crate::staircase::StaircaseSubgroup;
use crate::syntax::{Atom, Formula, Rel, Term};

pub const DEFAULT_CAP: u128 = 20_000_000;

/// The enumeration cap, from `OAG_MAX_ENUM` when set.
pub fn enumeration_cap() -> u128 {
    std::env::var("OAG_MAX_ENUM").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_CAP)
}

fn check_cap(needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(OagError::EnumerationCap { needed, cap })
    } else {
        Ok(())
    }
}

/// A subgroup given by generators `m·CS(ℓ)`, read straight from a term list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generators(pub Vec<(usize, u64)>);

impl Generators {
    pub fn of(h: &StaircaseSubgroup) -> Self {
        Generators(h.terms())
    }

    /// Sum of two subgroups: the union of their generators.
    pub fn plus(&self, other: &Generators) -> Generators {
        Generators(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Coordinate `c` (1-based) of the subgroup is `m_c·A_c`, with `m_c` the
    /// gcd of the multipliers of generators reaching `c` (`0` if none does).
    fn multiplier(&self, c: usize) -> u64 {
        self.0.iter().filter(|(l, _)| *l < c).fold(0, |g, &(_, m)| g.gcd(&m))
    }

    pub fn contains(&self, spec: &GroupSpec, x: &GroupElement) -> bool {
        (1..=spec.k()).all(|c| in_multiple(spec, c, &x.coords[c - 1], self.multiplier(c)))
    }
}

fn invertible(spec: &GroupSpec, c: usize, p: u64) -> bool {
    match spec.component(c).realization() {
        Some(RankOneRealization::All) => true,
        Some(RankOneRealization::Invertible(s)) => s.contains(&p),
        None => false,
    }
}

/// `q ∈ m·A_c`: `q/m` may only have invertible primes in its denominator.
fn in_multiple(spec: &GroupSpec, c: usize, q: &Rational, m: u64) -> bool {
    if m == 0 {
        return q.is_zero();
    }
    let mut d = (*q / Rational::from_integer(m as i64)).denom().unsigned_abs();
    let mut p = 2;
    while d > 1 {
        if d.is_multiple_of(p) {
            if !invertible(spec, c, p) {
                return false;
            }
            while d.is_multiple_of(p) {
                d /= p;
            }
        }
        p += 1;
    }
    true
}

/// `m` with the primes invertible on coordinate `c` removed.
fn strip(spec: &GroupSpec, c: usize, mut m: u64) -> u64 {
    let mut out = 1;
    let mut p = 2;
    while m > 1 {
        while m.is_multiple_of(p) {
            m /= p;
            if !invertible(spec, c, p) {
                out *= p;
            }
        }
        p += 1;
    }
    out
}

/// `G/H` for `H` of finite index, as residues per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuotient {
    pub moduli: Vec<u64>,
}

impl FiniteQuotient {
    pub fn size(&self) -> u128 {
        self.moduli.iter().map(|&m| m as u128).product()
    }

    /// Residue of each coordinate.
    pub fn project(&self, x: &GroupElement) -> Vec<u64> {
        x.coords
            .iter()
            .zip(&self.moduli)
            .map(|(q, &m)| {
                if m == 1 {
                    return 0;
                }
                let m = m as i128;
                let n = (*q.numer() as i128).rem_euclid(m);
                let d = (*q.denom() as i128).rem_euclid(m);
                let inv = d.extended_gcd(&m).x.rem_euclid(m);
                (n * inv).rem_euclid(m) as u64
            })
            .collect()
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.moduli).map(|((x, y), m)| (x + y) % m).collect()
    }

    /// All elements, as integer representatives.
    pub fn elements(&self, cap: u128) -> Result<Vec<GroupElement>> {
        check_cap(self.size(), cap)?;
        let mut out = vec![Vec::new()];
        for &m in &self.moduli {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<i64>| {
                    (0..m as i64).map(move |r| {
                        let mut v = prefix.clone();
                        v.push(r);
                        v
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(|v| GroupElement::from_ints(&v)).collect())
    }
}

pub fn quotient(spec: &GroupSpec, h: &StaircaseSubgroup) -> Result<FiniteQuotient> {
    spec.require_computable()?;
    let gens = Generators::of(h);
    let mut moduli = Vec::with_capacity(spec.k());
    for c in 1..=spec.k() {
        match gens.multiplier(c) {
            0 => return Err(OagError::InfiniteIndex(format!("coordinate {c} is not covered by {h}"))),
            m => moduli.push(strip(spec, c, m)),
        }
    }
    Ok(FiniteQuotient { moduli })
}

/// Result of exhaustive CRT solving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    /// A complete set of candidates: every solution agrees with one of them
    /// modulo the coordinatewise lcm of the moduli.
    pub candidates: Vec<GroupElement>,
    pub solutions: Vec<GroupElement>,
}

impl OracleSolution {
    pub fn solvable(&self) -> bool {
        !self.solutions.is_empty()
    }
}

/// Enumerates candidate values coordinate by coordinate and keeps those
/// satisfying every constraint.
pub fn oracle_solve(spec: &GroupSpec, sys: &CongruenceSystem) -> Result<OracleSolution> {
    spec.require_computable()?;
    let cap = enumeration_cap();
    let gens: Vec<Generators> = sys.constraints.iter().map(|(_, h)| Generators::of(h)).collect();
    let mut per_coord: Vec<Vec<Rational>> = Vec::with_capacity(spec.k());
    for c in 1..=spec.k() {
        let pinned: Vec<Rational> = sys
            .constraints
            .iter()
            .zip(&gens)
            .filter(|(_, g)| g.multiplier(c) == 0)
            .map(|((a, _), _)| a.coords[c - 1])
            .collect();
        if !pinned.is_empty() {
            per_coord.push(pinned);
            continue;
        }
        let period = gens.iter().fold(1u64, |l, g| l.lcm(&strip(spec, c, g.multiplier(c))));
        per_coord.push((0..period as i64).map(Rational::from_integer).collect());
    }
    let total: u128 = per_coord.iter().map(|v| v.len() as u128).product();
    check_cap(total, cap)?;
    let mut candidates = vec![Vec::new()];
    for values in &per_coord {
        candidates = candidates
            .into_iter()
            .flat_map(|prefix: Vec<Rational>| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    let candidates: Vec<GroupElement> = candidates.into_iter().map(GroupElement::new).collect();
    let solutions = candidates
        .iter()
        .filter(|x| {
            sys.constraints
                .iter()
                .zip(&gens)
                .all(|((a, _), g)| g.contains(spec, &x.sub(a)))
        })
        .cloned()
        .collect();
    Ok(OracleSolution { candidates, solutions })
}

/// A finite grid of elements: per coordinate, the multiples of `1/denom` in
/// `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Box {
    pub ranges: Vec<(i64, i64)>,
    pub denoms: Vec<u64>,
}

impl Box {
    /// `[−r, r]` in every coordinate. `Q` coordinates get denominator `d`,
    /// `Z[1/P]` coordinates the smallest prime of `P`.
    pub fn symmetric(spec: &GroupSpec, r: i64, d: u64) -> Self {
        Box {
            ranges: vec![(-r, r); spec.k()],
            denoms: (1..=spec.k())
                .map(|c| match spec.component(c).realization() {
                    Some(RankOneRealization::Invertible(ps)) => ps.iter().next().copied().unwrap_or(1),
                    _ if spec.component(c).is_discrete() => 1,
                    _ => d,
                })
                .collect(),
        }
    }

    /// The default box: `[−50, 50]`, integer points.
    pub fn default_for(spec: &GroupSpec) -> Self {
        Box::symmetric(spec, 50, 1)
    }

    pub fn size(&self) -> u128 {
        self.ranges
            .iter()
            .zip(&self.denoms)
            .map(|(&(lo, hi), &d)| ((hi - lo) as u128) * d as u128 + 1)
            .product()
    }

    pub fn coordinate_values(&self, c: usize) -> Vec<Rational> {
        let (lo, hi) = self.ranges[c];
        let d = self.denoms[c] as i64;
        (lo * d..=hi * d).map(|n| Rational::new(n, d)).collect()
    }

    pub fn elements(&self, cap: u128) -> Result<Vec<GroupElement>> {
        check_cap(self.size(), cap)?;
        let mut out = vec![Vec::new()];
        for c in 0..self.ranges.len() {
            let vals = self.coordinate_values(c);
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<Rational>| {
                    vals.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(GroupElement::new).collect())
    }
}

pub type Assignment = BTreeMap<String, GroupElement>;

fn term_value(spec: &GroupSpec, t: &Term, asg: &Assignment) -> Result<Vec<Rational>> {
    let mut acc: Vec<Rational> = match t.constant_part() {
        Some(g) => g.coords.clone(),
        None => vec![Rational::zero(); spec.k()],
    };
    for (v, c) in t.vars() {
        let g = asg.get(v).ok_or_else(|| OagError::Scope(format!("`{v}` unassigned")))?;
        for (a, b) in acc.iter_mut().zip(&g.coords) {
            *a += *b * Rational::from_integer(*c);
        }
    }
    for (l, c) in t.ones() {
        acc[l - 1] += Rational::from_integer(*c);
    }
    Ok(acc)
}

/// The oracle's own evaluator for quantifier-free base formulas.
pub fn eval_qf(f: &Formula, spec: &GroupSpec, asg: &Assignment) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(g) => !eval_qf(g, spec, asg)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_qf(g, spec, asg)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_qf(g, spec, asg)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Atom(Atom::Cmp(t, rel)) => {
            let v = term_value(spec, t, asg)?;
            let lead = v.iter().find(|q| !q.is_zero());
            match rel {
                Rel::Eq => lead.is_none(),
                Rel::Lt => lead.is_some_and(|q| q.is_negative()),
                Rel::Le => lead.is_none_or(|q| q.is_negative()),
            }
        }
        Formula::Atom(Atom::Cong(t, h)) => {
            let v = GroupElement::new(term_value(spec, t, asg)?);
            Generators::of(h).contains(spec, &v)
        }
        Formula::Atom(a) => {
            return Err(OagError::Precondition(format!("the oracle evaluates base atoms only, found {a}")))
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            return Err(OagError::Precondition("eval_qf needs a quantifier-free formula".into()))
        }
    })
}

/// All assignments of `vars` to box elements satisfying `f`, in lexicographic
/// order of the variable list.
pub fn enumerate_sat(f: &Formula, spec: &GroupSpec, vars: &[String], bx: &Box) -> Result<Vec<Assignment>> {
    spec.require_computable()?;
    let cap = enumeration_cap();
    let pts = bx.elements(cap)?;
    check_cap((pts.len() as u128).saturating_pow(vars.len() as u32), cap)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let asg: Assignment = vars.iter().cloned().zip(idx.iter().map(|&i| pts[i].clone())).collect();
        if eval_qf(f, spec, &asg)? {
            out.push(asg);
        }
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < pts.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Search ranges for `x` in `∃x. body`: per coordinate, every threshold where
/// an atom's sign can change, widened by the period of the congruences, on a
/// grid fine enough to fall strictly between distinct thresholds.
fn witness_grid(spec: &GroupSpec, x: &str, body: &Formula, asg: &Assignment) -> Result<Vec<Vec<Rational>>> {
    let atoms = body.atoms();
    let mut period: u64 = 1;
    let mut coeff_lcm: i64 = 1;
    for a in &atoms {
        let c = a.term().coeff(x);
        if c != 0 {
            coeff_lcm = coeff_lcm.lcm(&c.abs());
        }
        if let Atom::Cong(_, h) = a {
            for (_, m) in Generators::of(h).0 {
                if m > 0 {
                    period = period.lcm(&m);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(spec.k());
    for c in 1..=spec.k() {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        let mut denom: i64 = 1;
        for a in &atoms {
            let coef = a.term().coeff(x);
            let rest = term_value(spec, &a.term().without(x), asg)?;
            let r = rest[c - 1];
            denom = denom.lcm(r.denom());
            if coef != 0 {
                let thr = -r / Rational::from_integer(coef);
                lo = lo.min(thr);
                hi = hi.max(thr);
            }
        }
        let real = spec.component(c).realization().ok_or(OagError::NotComputable)?;
        // Discrete coordinates need every residue on each side of the
        // thresholds; dense ones a point strictly inside every gap, and for
        // Z[1/P] enough points there to meet every residue prime to P.
        let (margin, step) = match real {
            RankOneRealization::Invertible(ps) if ps.is_empty() => (period as i64 + 1, Rational::from_integer(1)),
            RankOneRealization::All => (1, Rational::new(1, 2 * coeff_lcm * denom)),
            RankOneRealization::Invertible(ps) => {
                let p = *ps.iter().next().expect("nonempty") as i64;
                let mut free = period as i64;
                for &q in ps {
                    while free % q as i64 == 0 {
                        free /= q as i64;
                    }
                }
                let need = 2 * coeff_lcm * denom * free;
                let mut pj = 1i64;
                while pj < need {
                    pj = pj.checked_mul(p).ok_or(OagError::Overflow("oracle grid"))?;
                }
                (1, Rational::new(1, pj))
            }
        };
        let margin = Rational::from_integer(margin);
        let lo = (lo - margin).floor();
        let hi = (hi + margin).ceil();
        let count = ((hi - lo) / step).to_integer() + 1;
        let mut vals = Vec::with_capacity(count as usize);
        let mut v = lo;
        while v <= hi {
            vals.push(v);
            v += step;
        }
        out.push(vals);
    }
    Ok(out)
}

/// Truth of `∃x. body` for quantifier-free `body` under `asg`, by exhaustive
/// search over the witness grid.
pub fn exists_truth(spec: &GroupSpec, x: &str, body: &Formula, asg: &Assignment) -> Result<bool> {
    let grid = witness_grid(spec, x, body, asg)?;
    let total: u128 = grid.iter().map(|g| g.len() as u128).product();
    check_cap(total, enumeration_cap())?;
    let mut idx = vec![0usize; grid.len()];
    let mut local = asg.clone();
    loop {
        let pt = GroupElement::new(idx.iter().zip(&grid).map(|(&i, g)| g[i]).collect());
        local.insert(x.to_string(), pt);
        if eval_qf(body, spec, &local)? {
            return Ok(true);
        }
        let mut pos = grid.len();
        loop {
            if pos == 0 {
                return Ok(false);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < grid[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Outcome of a bounded model check of a formula with nested quantifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxTruth {
    Determined(bool),
    /// The answer changed when the box was doubled.
    Indeterminate,
}

/// Quantifiers over a quantifier-free body are decided by the witness grid;
/// outer quantifiers range over the box.
fn eval_boxed(f: &Formula, spec: &GroupSpec, asg: &Assignment, pts: &[GroupElement]) -> Result<bool> {
    Ok(match f {
        Formula::Exists(v, g) if g.is_quantifier_free() => exists_truth(spec, v, g, asg)?,
        Formula::Forall(v, g) if g.is_quantifier_free() => {
            !exists_truth(spec, v, &Formula::not((**g).clone()), asg)?
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let want = matches!(f, Formula::Exists(..));
            let mut local = asg.clone();
            for p in pts {
                local.insert(v.clone(), p.clone());
                if eval_boxed(g, spec, &local, pts)? == want {
                    return Ok(want);
                }
            }
            !want
        }
        Formula::Not(g) => !eval_boxed(g, spec, asg, pts)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_boxed(g, spec, asg, pts)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_boxed(g, spec, asg, pts)? {
                    return Ok(true);
                }
            }
            false
        }
        _ => eval_qf(f, spec, asg)?,
    })
}

/// Evaluates with quantifiers over `bx` and over the box doubled in size; the
/// answer is reported only when both agree.
pub fn bounded_truth(f: &Formula, spec: &GroupSpec, asg: &Assignment, bx: &Box) -> Result<BoxTruth> {
    spec.require_computable()?;
    let cap = enumeration_cap();
    let small = eval_boxed(f, spec, asg, &bx.elements(cap)?)?;
    let big_box = Box {
        ranges: bx.ranges.iter().map(|&(lo, hi)| (2 * lo, 2 * hi)).collect(),
        denoms: bx.denoms.clone(),
    };
    let big = eval_boxed(f, spec, asg, &big_box.elements(cap)?)?;
    Ok(if small == big { BoxTruth::Determined(small) } else { BoxTruth::Indeterminate })
}

/// First assignment of `free` in the box where the quantifier-free `output`
/// disagrees with `∃x. body` decided by exhaustive witness search.
pub fn elimination_mismatch(
    spec: &GroupSpec,
    x: &str,
    body: &Formula,
    output: &Formula,
    free: &[String],
    bx: &Box,
) -> Result<Option<Assignment>> {
    spec.require_computable()?;
    let cap = enumeration_cap();
    let pts = bx.elements(cap)?;
    check_cap((pts.len() as u128).saturating_pow(free.len() as u32), cap)?;
    let mut idx = vec![0usize; free.len()];
    loop {
        let asg: Assignment = free.iter().cloned().zip(idx.iter().map(|&i| pts[i].clone())).collect();
        if eval_qf(output, spec, &asg)? != exists_truth(spec, x, body, &asg)? {
            return Ok(Some(asg));
        }
        let mut pos = free.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < pts.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}
