//! Systems of congruences `x ≡ a_i mod H_i` over staircase moduli, solved by
//! the pairwise-merge construction of the generalized Chinese remainder
//! theorem, plus the test deciding whether a coset meets an order window.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::Rational;
use crate::error::{OagError, Result};
use crate::group::{GroupElement, GroupSpec, RankOneRealization};
use crate::staircase::StaircaseSubgroup;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CongruenceSystem {
    pub constraints: Vec<(GroupElement, StaircaseSubgroup)>,
}

impl CongruenceSystem {
    pub fn new(constraints: Vec<(GroupElement, StaircaseSubgroup)>) -> Self {
        CongruenceSystem { constraints }
    }

    pub fn push(&mut self, target: GroupElement, modulus: StaircaseSubgroup) {
        self.constraints.push((target, modulus));
    }

    pub fn is_satisfied_by(&self, spec: &GroupSpec, x: &GroupElement) -> bool {
        self.constraints.iter().all(|(a, h)| h.contains(spec, &x.sub(a)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionCoset {
    pub base: GroupElement,
    pub modulus: StaircaseSubgroup,
}

impl SolutionCoset {
    pub fn contains(&self, spec: &GroupSpec, x: &GroupElement) -> bool {
        self.modulus.contains(spec, &x.sub(&self.base))
    }
}

impl fmt::Display for SolutionCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "base={} modulus={}", self.base, self.modulus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solvable(SolutionCoset),
    Unsolvable { pair: (usize, usize) },
}

impl SolveOutcome {
    pub fn coset(&self) -> Option<&SolutionCoset> {
        match self {
            SolveOutcome::Solvable(c) => Some(c),
            SolveOutcome::Unsolvable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrderWindow {
    pub lower: Option<(GroupElement, bool)>,
    pub upper: Option<(GroupElement, bool)>,
}

impl OrderWindow {
    pub fn unbounded() -> Self {
        OrderWindow::default()
    }

    pub fn above(bound: GroupElement, strict: bool) -> Self {
        OrderWindow { lower: Some((bound, strict)), upper: None }
    }

    pub fn below(bound: GroupElement, strict: bool) -> Self {
        OrderWindow { lower: None, upper: Some((bound, strict)) }
    }

    pub fn between(lo: GroupElement, lo_strict: bool, hi: GroupElement, hi_strict: bool) -> Self {
        OrderWindow { lower: Some((lo, lo_strict)), upper: Some((hi, hi_strict)) }
    }

    /// Empty windows are detected from the bounds alone.
    pub fn is_empty(&self) -> bool {
        match (&self.lower, &self.upper) {
            (Some((l, ls)), Some((u, us))) => match l.cmp(u) {
                Ordering::Greater => true,
                Ordering::Equal => *ls || *us,
                Ordering::Less => false,
            },
            _ => false,
        }
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        let lo_ok = self.lower.as_ref().is_none_or(|(l, s)| if *s { x > l } else { x >= l });
        let hi_ok = self.upper.as_ref().is_none_or(|(u, s)| if *s { x < u } else { x <= u });
        lo_ok && hi_ok
    }
}

/// The multiplier of `H` at coordinate `j`, with primes invertible there removed.
fn effective(spec: &GroupSpec, h: &StaircaseSubgroup, j: usize) -> u64 {
    spec.component(j).reduce_multiplier(h.multipliers()[j - 1])
}

/// `q mod m·A` as the least non-negative integer representative, for a
/// component `A = Z[1/P]` and `m` coprime to `P`.
fn residue(q: &Rational, m: u64) -> i64 {
    let m = m as i128;
    let n = *q.numer() as i128;
    let d = (*q.denom() as i128).rem_euclid(m);
    let inv = d.extended_gcd(&m).x.rem_euclid(m);
    (n.rem_euclid(m) * inv).rem_euclid(m) as i64
}

/// Canonical representative of `g + H`: every coordinate with a nonzero
/// effective multiplier is replaced by its least non-negative residue.
pub fn canonical_representative(spec: &GroupSpec, h: &StaircaseSubgroup, g: &GroupElement) -> GroupElement {
    let coords = g
        .coords
        .iter()
        .enumerate()
        .map(|(i, q)| match effective(spec, h, i + 1) {
            0 => *q,
            m => Rational::from_integer(residue(q, m)),
        })
        .collect();
    GroupElement::new(coords)
}

/// Splits `d ∈ H + K` as `h + k` with `h ∈ H`, `k ∈ K`, coordinate by
/// coordinate via Bézout. Returns `None` when `d ∉ H + K`.
pub fn split_sum(
    spec: &GroupSpec,
    h: &StaircaseSubgroup,
    k: &StaircaseSubgroup,
    d: &GroupElement,
) -> Option<(GroupElement, GroupElement)> {
    let mut hs = Vec::with_capacity(d.len());
    let mut ks = Vec::with_capacity(d.len());
    for (i, q) in d.coords.iter().enumerate() {
        let j = i + 1;
        let (u, v) = (effective(spec, h, j), effective(spec, k, j));
        let comp = spec.component(j);
        if !comp.in_multiple(q, u.gcd(&v)) {
            return None;
        }
        let (hq, kq) = match (u, v) {
            (0, _) => (Rational::zero(), *q),
            (_, 0) => (*q, Rational::zero()),
            _ => {
                let e = (u as i64).extended_gcd(&(v as i64));
                let a = *q / Rational::from_integer(e.gcd);
                (a * Rational::from_integer(e.x * u as i64), a * Rational::from_integer(e.y * v as i64))
            }
        };
        hs.push(hq);
        ks.push(kq);
    }
    Some((GroupElement::new(hs), GroupElement::new(ks)))
}

fn check_sizes(spec: &GroupSpec, sys: &CongruenceSystem) -> Result<()> {
    spec.require_computable()?;
    for (a, h) in &sys.constraints {
        if a.len() != spec.k() || h.k() != spec.k() {
            return Err(OagError::SpecMismatch("constraint over a different spec".into()));
        }
    }
    Ok(())
}

/// Checks `⋂_{i<r}(H_i + H_r) = (⋂_{i<r} H_i) + H_r` for every `r`.
pub fn distributive(spec: &GroupSpec, moduli: &[StaircaseSubgroup]) -> Result<bool> {
    for r in 1..moduli.len() {
        let mut lhs = StaircaseSubgroup::whole(spec);
        let mut meet = StaircaseSubgroup::whole(spec);
        for h in &moduli[..r] {
            lhs = lhs.intersect(spec, &h.sum(spec, &moduli[r])?)?;
            meet = meet.intersect(spec, h)?;
        }
        if lhs != meet.sum(spec, &moduli[r])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First pair `(i, j)` with `a_j − a_i ∉ H_i + H_j`, or `None` when every pair
/// is compatible.
pub fn check_compatibility(spec: &GroupSpec, sys: &CongruenceSystem) -> Result<Option<(usize, usize)>> {
    check_sizes(spec, sys)?;
    let cs = &sys.constraints;
    for j in 0..cs.len() {
        for i in 0..j {
            let sum = cs[i].1.sum(spec, &cs[j].1)?;
            if !sum.contains(spec, &cs[j].0.sub(&cs[i].0)) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Pairwise merge: keep `(b, H)`, and for each new `(a, K)` split
/// `a − b = h + k` and move to `(b + h, H ∩ K)`.
pub fn solve(spec: &GroupSpec, sys: &CongruenceSystem) -> Result<SolveOutcome> {
    check_sizes(spec, sys)?;
    let moduli: Vec<_> = sys.constraints.iter().map(|(_, h)| h.clone()).collect();
    if !distributive(spec, &moduli)? {
        return solve_direct(spec, sys);
    }
    let mut base = spec.zero();
    let mut modulus = StaircaseSubgroup::whole(spec);
    for (a, k) in &sys.constraints {
        match split_sum(spec, &modulus, k, &a.sub(&base)) {
            Some((h, _)) => {
                base = base.add(&h);
                modulus = modulus.intersect(spec, k)?;
            }
            None => {
                let pair = check_compatibility(spec, sys)?.ok_or_else(|| {
                    OagError::Internal("merge failed but every pair is compatible".into())
                })?;
                return Ok(SolveOutcome::Unsolvable { pair });
            }
        }
    }
    let base = canonical_representative(spec, &modulus, &base);
    Ok(SolveOutcome::Solvable(SolutionCoset { base, modulus }))
}

/// Coordinate-by-coordinate integer CRT. Used only when the distributivity
/// check fails.
fn solve_direct(spec: &GroupSpec, sys: &CongruenceSystem) -> Result<SolveOutcome> {
    let mut coords = Vec::with_capacity(spec.k());
    let mut modulus = StaircaseSubgroup::whole(spec);
    for (_, h) in &sys.constraints {
        modulus = modulus.intersect(spec, h)?;
    }
    for j in 1..=spec.k() {
        let mut cur: Option<(Rational, u64)> = None;
        for (a, h) in &sys.constraints {
            let m = effective(spec, h, j);
            let q = a.coords[j - 1];
            cur = Some(match cur {
                None => (q, m),
                Some((b, n)) => {
                    let comp = spec.component(j);
                    if !comp.in_multiple(&(q - b), n.gcd(&m)) {
                        let pair = check_compatibility(spec, sys)?
                            .ok_or_else(|| OagError::Internal("coordinate CRT disagrees".into()))?;
                        return Ok(SolveOutcome::Unsolvable { pair });
                    }
                    let one = |x: u64| StaircaseSubgroup::from_multipliers(
                        &GroupSpec::new(vec![comp.clone()], None),
                        vec![x],
                    );
                    let single = GroupSpec::new(vec![comp.clone()], None);
                    let (hh, _) = split_sum(
                        &single,
                        &one(n)?,
                        &one(m)?,
                        &GroupElement::new(vec![q - b]),
                    )
                    .ok_or_else(|| OagError::Internal("coordinate split failed".into()))?;
                    (b + hh.coords[0], n.lcm(&m))
                }
            });
        }
        coords.push(cur.map_or(Rational::zero(), |(b, _)| b));
    }
    let base = canonical_representative(spec, &modulus, &GroupElement::new(coords));
    Ok(SolveOutcome::Solvable(SolutionCoset { base, modulus }))
}

/// Whether `b + u·A` (a single coordinate) meets the open interval `(lo, hi)`,
/// either end possibly unbounded.
fn progression_meets(
    real: &RankOneRealization,
    b: &Rational,
    u: u64,
    lo: Option<&Rational>,
    hi: Option<&Rational>,
) -> bool {
    if let (Some(l), Some(h)) = (lo, hi) {
        if l >= h {
            return false;
        }
    }
    if u == 0 {
        return lo.is_none_or(|l| b > l) && hi.is_none_or(|h| b < h);
    }
    if !real.is_discrete() {
        return true;
    }
    match (lo, hi) {
        (Some(l), Some(h)) => {
            // least element of b + uZ strictly above l
            let step = Rational::from_integer(u as i64);
            let t = ((*l - b) / step).floor() + Rational::from_integer(1);
            let first = *b + t * step;
            first < *h
        }
        _ => true,
    }
}

/// Decides `(b + M) ∩ window ≠ ∅` coordinate by coordinate, tracking whether
/// the prefix chosen so far still equals the lower or upper bound's prefix.
pub fn coset_meets_window(spec: &GroupSpec, c: &SolutionCoset, w: &OrderWindow) -> Result<bool> {
    spec.require_computable()?;
    if w.is_empty() {
        return Ok(false);
    }
    Ok(meets_from(spec, c, w, 1, w.lower.is_some(), w.upper.is_some()))
}

fn meets_from(
    spec: &GroupSpec,
    c: &SolutionCoset,
    w: &OrderWindow,
    j: usize,
    tight_lo: bool,
    tight_hi: bool,
) -> bool {
    if !tight_lo && !tight_hi {
        return true;
    }
    if j > spec.k() {
        let lo_ok = !tight_lo || !w.lower.as_ref().unwrap().1;
        let hi_ok = !tight_hi || !w.upper.as_ref().unwrap().1;
        return lo_ok && hi_ok;
    }
    let comp = spec.component(j);
    let real = comp.realization().expect("computable");
    let u = effective(spec, &c.modulus, j);
    let b = &c.base.coords[j - 1];
    let lo = if tight_lo { Some(&w.lower.as_ref().unwrap().0.coords[j - 1]) } else { None };
    let hi = if tight_hi { Some(&w.upper.as_ref().unwrap().0.coords[j - 1]) } else { None };
    if progression_meets(real, b, u, lo, hi) {
        return true;
    }
    let in_coset = |v: &Rational| comp.in_multiple(&(*v - b), u);
    if let (Some(l), Some(h)) = (lo, hi) {
        if l == h {
            return in_coset(l) && meets_from(spec, c, w, j + 1, true, true);
        }
    }
    if let Some(l) = lo {
        if hi.is_none_or(|h| l < h) && in_coset(l) && meets_from(spec, c, w, j + 1, true, false) {
            return true;
        }
    }
    if let Some(h) = hi {
        if lo.is_none_or(|l| l < h) && in_coset(h) && meets_from(spec, c, w, j + 1, false, true) {
            return true;
        }
    }
    false
}

/// Sign of a coordinate, exposed for callers building windows by hand.
pub fn sign(q: &Rational) -> Ordering {
    if q.is_positive() {
        Ordering::Greater
    } else if q.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}
