//! Quantifier elimination over computable specs.
//!
//! One existential at a time. The body goes to disjunctive normal form and
//! the bound variable is scaled to a common coefficient `L`, so `y = L·x`
//! ranges over `LG`. Every literal in `y` then has one of four shapes:
//!
//! * `y` above the coset `u + CS(λ)` (strict order is `λ = k`),
//! * `y` below such a coset,
//! * `y ∈ u + CS(λ)` (equality is `λ = k`),
//! * `y − u ∈ N` or its negation, with `N` of finite index.
//!
//! The deepest coset literal pins `y` to `t + CS(z)`; the effective lower and
//! upper cuts are picked by disjunction, and the window between them is split
//! on the leading level `e` of its width. Inside a level the congruences are
//! decided by pairwise compatibility, or by enumerating residues when negated
//! congruences are present, one coprime group of primes at a time.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_integer::Integer;

use crate::arith::{factorize, prime_divisors};
use crate::error::{OagError, Result};
use crate::ext::ExtNat;
use crate::group::{GroupElement, GroupSpec};
use crate::invariants::dim_p;
use crate::staircase::StaircaseSubgroup;
use crate::syntax::eval::eval_atom;
use crate::syntax::rewrite::{expand_atom, step_decomposition};
use crate::syntax::{Assignment, Atom, Formula, Rel, Term};

pub const DEFAULT_ATOM_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QeOptions {
    /// Largest number of atoms any intermediate or final formula may hold.
    pub atom_budget: usize,
}

impl Default for QeOptions {
    /// Reads `OAG_QE_BUDGET` when set.
    fn default() -> Self {
        let atom_budget = std::env::var("OAG_QE_BUDGET")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_ATOM_BUDGET);
        QeOptions { atom_budget }
    }
}

/// One eliminated quantifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub variable: String,
    /// The quantifier-free body the variable was eliminated from.
    pub body: Formula,
    pub coefficient_lcm: i64,
    pub conjuncts: usize,
    pub notes: Vec<String>,
    /// `∃variable. body`, eliminated.
    pub output: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationTrace {
    pub input: Formula,
    pub steps: Vec<TraceStep>,
    pub output: Formula,
}

impl EliminationTrace {
    /// Re-runs every step and the whole elimination; true when all outputs
    /// come out identical.
    pub fn replay(&self, spec: &GroupSpec, opts: QeOptions) -> Result<bool> {
        for s in &self.steps {
            let (out, _) = eliminate_var(&s.variable, &s.body, spec, opts)?;
            if out != s.output {
                return Ok(false);
            }
        }
        Ok(eliminate_all_traced(&self.input, spec, opts)?.output == self.output)
    }
}

impl fmt::Display for EliminationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input: {}", self.input)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {i}: eliminate {}", s.variable)?;
            writeln!(f, "  body: {}", s.body)?;
            writeln!(f, "  coefficient lcm: {}", s.coefficient_lcm)?;
            writeln!(f, "  conjuncts: {}", s.conjuncts)?;
            for n in &s.notes {
                writeln!(f, "  {n}")?;
            }
            writeln!(f, "  result: {}", s.output)?;
        }
        writeln!(f, "output: {}", self.output)
    }
}

/// A literal in the scaled variable `y`.
#[derive(Debug, Clone)]
enum Lit {
    /// `y` lies above every element of `u + CS(λ)`.
    Above(Term, usize),
    Below(Term, usize),
    /// `y ∈ u + CS(λ)`.
    Pin(Term, usize),
    /// `y − u ∈ N` when the flag is set, `y − u ∉ N` otherwise.
    Cong(Term, StaircaseSubgroup, bool),
}

/// A condition, and the bound it leaves behind: lower flag, term, level.
type BoundOption = (Formula, Option<(bool, Term, usize)>);

#[derive(Debug, Clone, Default)]
struct Conj {
    free: Vec<Formula>,
    lits: Vec<Lit>,
}

impl Conj {
    fn merge(&self, other: &Conj) -> Conj {
        Conj {
            free: self.free.iter().chain(&other.free).cloned().collect(),
            lits: self.lits.iter().chain(&other.lits).cloned().collect(),
        }
    }
}

fn dedup(parts: Vec<Formula>) -> Vec<Formula> {
    let mut seen = HashSet::new();
    parts.into_iter().filter(|p| seen.insert(p.clone())).collect()
}

fn and(parts: Vec<Formula>) -> Formula {
    match Formula::and(parts) {
        Formula::And(v) => Formula::and(dedup(v)),
        f => f,
    }
}

fn or(parts: Vec<Formula>) -> Formula {
    match Formula::or(parts) {
        Formula::Or(v) => Formula::or(dedup(v)),
        f => f,
    }
}

/// One elimination in progress.
struct Elim<'a> {
    spec: &'a GroupSpec,
    x: &'a str,
    l: i64,
    budget: usize,
}

impl<'a> Elim<'a> {
    fn k(&self) -> usize {
        self.spec.k()
    }

    fn check(&self, size: usize) -> Result<()> {
        if size > self.budget {
            Err(OagError::Budget { size, budget: self.budget })
        } else {
            Ok(())
        }
    }

    /// An atom, evaluated on the spot when it has no variables.
    fn atom(&self, a: Atom) -> Formula {
        if let Atom::Cong(_, h) = &a {
            if h.is_whole() {
                return Formula::True;
            }
        }
        if a.term().is_ground() {
            if let Ok(b) = eval_atom(&a, self.spec, &Assignment::new()) {
                return if b { Formula::True } else { Formula::False };
            }
        }
        Formula::Atom(a)
    }

    fn gt0(&self, t: Term) -> Formula {
        self.atom(Atom::Cmp(t.neg(), Rel::Lt))
    }

    fn lt0(&self, t: Term) -> Formula {
        self.atom(Atom::Cmp(t, Rel::Lt))
    }

    /// `t ∈ CS(level)`.
    fn in_cs(&self, t: Term, level: usize) -> Formula {
        if level == 0 {
            Formula::True
        } else if level >= self.k() {
            self.atom(Atom::Cmp(t, Rel::Eq))
        } else {
            let h = StaircaseSubgroup::convex(self.spec, level).expect("level in range");
            self.atom(Atom::Cong(t, h))
        }
    }

    /// `t` lies above all of `CS(level)`: positive with leading index `≤ level`.
    fn above_cs(&self, t: Term, level: usize) -> Formula {
        if level == 0 {
            Formula::False
        } else if level >= self.k() {
            self.gt0(t)
        } else {
            and(vec![self.gt0(t.clone()), Formula::not(self.in_cs(t, level))])
        }
    }

    fn member(&self, t: Term, n: &StaircaseSubgroup, positive: bool) -> Formula {
        let f = self.atom(Atom::Cong(t, n.clone()));
        if positive {
            f
        } else {
            Formula::not(f)
        }
    }

    // ---- normal form ----

    fn dnf(&self, f: &Formula, positive: bool) -> Result<Vec<Conj>> {
        Ok(match f {
            Formula::True | Formula::False => {
                if matches!(f, Formula::True) == positive {
                    vec![Conj::default()]
                } else {
                    Vec::new()
                }
            }
            Formula::Not(g) => self.dnf(g, !positive)?,
            Formula::And(gs) | Formula::Or(gs) => {
                if matches!(f, Formula::And(_)) == positive {
                    let mut acc = vec![Conj::default()];
                    for g in gs {
                        let part = self.dnf(g, positive)?;
                        self.check(acc.len().saturating_mul(part.len()))?;
                        acc = acc.iter().flat_map(|a| part.iter().map(move |b| a.merge(b))).collect();
                    }
                    acc
                } else {
                    let mut acc = Vec::new();
                    for g in gs {
                        acc.extend(self.dnf(g, positive)?);
                        self.check(acc.len())?;
                    }
                    acc
                }
            }
            Formula::Atom(a) if a.term().coeff(self.x) == 0 => {
                let lit = Formula::Atom(a.clone());
                vec![Conj { free: vec![if positive { lit } else { Formula::not(lit) }], lits: Vec::new() }]
            }
            Formula::Atom(a) => self.translate(a, positive)?,
            Formula::Exists(..) | Formula::Forall(..) => {
                return Err(OagError::Precondition("nested quantifiers must be eliminated first".into()))
            }
        })
    }

    fn one(lits: Vec<Lit>) -> Conj {
        Conj { free: Vec::new(), lits }
    }

    /// `σ·(y − u) < 0`.
    fn strict(u: &Term, sigma: i64, k: usize) -> Conj {
        Self::one(vec![if sigma > 0 { Lit::Below(u.clone(), k) } else { Lit::Above(u.clone(), k) }])
    }

    fn translate(&self, a: &Atom, positive: bool) -> Result<Vec<Conj>> {
        let k = self.k();
        let c = a.term().coeff(self.x);
        let m = self.l / c.abs();
        let s = c.signum();
        // the atom's term times m is s·(y − u)
        let u = a.term().without(self.x).scale(-s * m);
        Ok(match a {
            Atom::Cmp(_, rel) => match (rel, positive) {
                (Rel::Lt, true) => vec![Self::strict(&u, s, k)],
                (Rel::Lt, false) => vec![Self::strict(&u, -s, k), Self::one(vec![Lit::Pin(u, k)])],
                (Rel::Le, true) => vec![Self::strict(&u, s, k), Self::one(vec![Lit::Pin(u, k)])],
                (Rel::Le, false) => vec![Self::strict(&u, -s, k)],
                (Rel::Eq, true) => vec![Self::one(vec![Lit::Pin(u, k)])],
                (Rel::Eq, false) => vec![Self::strict(&u, s, k), Self::strict(&u, -s, k)],
            },
            Atom::Cong(_, h) => {
                let n = h.scaled(self.spec, m as u64)?;
                let steps: Vec<(usize, Option<StaircaseSubgroup>)> = step_decomposition(self.spec, &n)
                    .into_iter()
                    .filter(|&(level, _)| level > 0)
                    .map(|(level, w)| {
                        Ok((level, if w == 0 { None } else { Some(StaircaseSubgroup::convex_plus(self.spec, level, w)?) }))
                    })
                    .collect::<Result<_>>()?;
                if positive {
                    let lits = steps
                        .into_iter()
                        .map(|(level, part)| match part {
                            None => Lit::Pin(u.clone(), level),
                            Some(p) => Lit::Cong(u.clone(), p, true),
                        })
                        .collect();
                    vec![Self::one(lits)]
                } else {
                    let mut out = Vec::new();
                    for (level, part) in steps {
                        match part {
                            None => {
                                out.push(Self::one(vec![Lit::Above(u.clone(), level)]));
                                out.push(Self::one(vec![Lit::Below(u.clone(), level)]));
                            }
                            Some(p) => out.push(Self::one(vec![Lit::Cong(u.clone(), p, false)])),
                        }
                    }
                    out
                }
            }
            _ => return Err(OagError::Precondition(format!("derived atom `{a}` must be expanded first"))),
        })
    }

    // ---- one conjunct ----

    fn solve(&self, conj: &Conj, notes: &mut Vec<String>) -> Result<Formula> {
        let mut conds = conj.free.clone();
        let mut pins = Vec::new();
        let mut lows = Vec::new();
        let mut ups = Vec::new();
        let mut phi = Vec::new();
        for lit in &conj.lits {
            match lit {
                Lit::Pin(u, l) => pins.push((u.clone(), *l)),
                Lit::Above(u, l) => lows.push((u.clone(), *l)),
                Lit::Below(u, l) => ups.push((u.clone(), *l)),
                Lit::Cong(u, n, pos) => phi.push((u.clone(), n.clone(), *pos)),
            }
        }
        let (t, z) = pins.iter().max_by_key(|p| p.1).cloned().unwrap_or((Term::zero(), 0));
        for (u, l) in &pins {
            conds.push(self.in_cs(u.sub(&t), *l));
        }
        // Each bound is either settled by the pin or kept under a condition.
        let mut options: Vec<Vec<BoundOption>> = Vec::new();
        for (is_lower, list) in [(true, &lows), (false, &ups)] {
            for (u, l) in list {
                let d = u.sub(&t);
                if *l <= z {
                    conds.push(if is_lower { self.above_cs(d.neg(), *l) } else { self.above_cs(d, *l) });
                } else if z == 0 {
                    options.push(vec![(Formula::True, Some((is_lower, u.clone(), *l)))]);
                } else {
                    let outside = Formula::not(self.in_cs(d.clone(), z));
                    let settled = if is_lower { self.lt0(d.clone()) } else { self.gt0(d.clone()) };
                    options.push(vec![
                        (and(vec![outside, settled]), None),
                        (self.in_cs(d, z), Some((is_lower, u.clone(), *l))),
                    ]);
                }
            }
        }
        let head = and(conds);
        if head == Formula::False {
            return Ok(Formula::False);
        }
        let mut branches = Vec::new();
        let mut idx = vec![0usize; options.len()];
        loop {
            let mut parts = vec![];
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for (o, &i) in options.iter().zip(&idx) {
                parts.push(o[i].0.clone());
                if let Some((is_lower, u, l)) = &o[i].1 {
                    if *is_lower {
                        lo.push((u.clone(), *l));
                    } else {
                        hi.push((u.clone(), *l));
                    }
                }
            }
            let cond = and(parts);
            if cond != Formula::False {
                branches.push(and(vec![cond, self.core(z, &t, &lo, &hi, &phi)?]));
                self.check(branches.iter().map(Formula::size).sum())?;
            }
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < options[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
        let out = and(vec![head, or(branches)]);
        notes.push(format!(
            "pin level {z}, {} lower, {} upper, {} congruences -> {} atoms",
            lows.len(),
            ups.len(),
            phi.len(),
            out.size()
        ));
        Ok(out)
    }

    /// `{y above u_i + CS(λ_i)} ⊆ {y above u_j + CS(λ_j)}`.
    fn lower_within(&self, a: &(Term, usize), b: &(Term, usize)) -> Formula {
        let mu = a.1.min(b.1);
        let d = a.0.sub(&b.0);
        let tie = if a.1 <= b.1 { self.in_cs(d.clone(), mu) } else { Formula::False };
        or(vec![self.above_cs(d, mu), tie])
    }

    fn upper_within(&self, a: &(Term, usize), b: &(Term, usize)) -> Formula {
        let mu = a.1.min(b.1);
        let d = b.0.sub(&a.0);
        let tie = if a.1 <= b.1 { self.in_cs(d.clone(), mu) } else { Formula::False };
        or(vec![self.above_cs(d, mu), tie])
    }

    fn core(
        &self,
        z: usize,
        t: &Term,
        lows: &[(Term, usize)],
        ups: &[(Term, usize)],
        phi: &[(Term, StaircaseSubgroup, bool)],
    ) -> Result<Formula> {
        if lows.is_empty() || ups.is_empty() {
            // a one-sided window inside t + CS(z) meets every residue class
            return self.prim(z, t, phi);
        }
        let mut out = Vec::new();
        for (i, lo) in lows.iter().enumerate() {
            let eff_lo = and(lows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| self.lower_within(lo, o)).collect());
            if eff_lo == Formula::False {
                continue;
            }
            for (j, hi) in ups.iter().enumerate() {
                let eff_hi =
                    and(ups.iter().enumerate().filter(|(m, _)| *m != j).map(|(_, o)| self.upper_within(hi, o)).collect());
                if eff_hi == Formula::False {
                    continue;
                }
                out.push(and(vec![eff_lo.clone(), eff_hi, self.two_sided(z, lo, hi, phi)?]));
                self.check(out.iter().map(Formula::size).sum())?;
            }
        }
        Ok(or(out))
    }

    /// Period of the congruences at coordinate `e`.
    fn period(&self, phi: &[(Term, StaircaseSubgroup, bool)], e: usize) -> u64 {
        let comp = self.spec.component(e);
        phi.iter().fold(1u64, |acc, (_, n, _)| acc.lcm(&comp.reduce_multiplier(n.multipliers()[e - 1])))
    }

    /// `y` strictly between the cuts above `a + CS(λ)` and below `b + CS(λ')`.
    fn two_sided(
        &self,
        z: usize,
        lo: &(Term, usize),
        hi: &(Term, usize),
        phi: &[(Term, StaircaseSubgroup, bool)],
    ) -> Result<Formula> {
        let (a, lam) = (&lo.0, lo.1);
        let (b, lam2) = (&hi.0, hi.1);
        let g = b.sub(a);
        let mut out = Vec::new();
        for e in z + 1..=lam.min(lam2) {
            let lead = and(vec![
                if e - 1 > z { self.in_cs(g.clone(), e - 1) } else { Formula::True },
                Formula::not(self.in_cs(g.clone(), e)),
                self.gt0(g.clone()),
            ]);
            if lead == Formula::False {
                continue;
            }
            // some y whose offset from a has coordinate e strictly inside (0, g_e)
            let inner = if self.spec.component(e).is_discrete() {
                let mut opts = Vec::new();
                for j in 1..=self.period(phi, e) as i64 {
                    let wide = g.sub(&Term::one_at(e).scale(j + 1));
                    let fits = or(vec![self.gt0(wide.clone()), self.in_cs(wide, e)]);
                    opts.push(and(vec![fits, self.prim(e, &a.add(&Term::one_at(e).scale(j)), phi)?]));
                }
                or(opts)
            } else {
                self.prim(e - 1, a, phi)?
            };
            let at_lo = if e < lam { self.prim(e, a, phi)? } else { Formula::False };
            let at_hi = if e < lam2 { self.prim(e, b, phi)? } else { Formula::False };
            out.push(and(vec![lead, or(vec![inner, at_lo, at_hi])]));
            self.check(out.iter().map(Formula::size).sum())?;
        }
        Ok(or(out))
    }

    /// `∃w ∈ CS(z). ⋀ (c + w − u_i ∈ N_i)^±`.
    fn prim(&self, z: usize, c: &Term, phi: &[(Term, StaircaseSubgroup, bool)]) -> Result<Formula> {
        let k = self.k();
        if phi.is_empty() {
            return Ok(Formula::True);
        }
        if z >= k {
            return Ok(and(phi.iter().map(|(u, n, pos)| self.member(c.sub(u), n, *pos)).collect()));
        }
        // primes tied together by a negated congruence are enumerated jointly
        let mut groups: Vec<BTreeSet<u64>> = Vec::new();
        for (_, n, pos) in phi {
            let primes: BTreeSet<u64> = prime_divisors(n.multipliers()[0]).into_iter().collect();
            let tied: Vec<BTreeSet<u64>> = if *pos {
                primes.iter().map(|&p| BTreeSet::from([p])).collect()
            } else {
                vec![primes]
            };
            for t in tied {
                let (hit, mut rest): (Vec<_>, Vec<_>) = groups.into_iter().partition(|g| !g.is_disjoint(&t));
                rest.push(hit.into_iter().flatten().chain(t).collect());
                groups = rest;
            }
        }
        let cs = StaircaseSubgroup::convex(self.spec, z)?;
        let mut out = Vec::new();
        for group in groups {
            let primes: Vec<u64> = group.into_iter().collect();
            let mut parts = Vec::new();
            for (u, n, pos) in phi {
                let part = n.prime_part(self.spec, &primes)?;
                if !part.is_whole() {
                    parts.push((u.clone(), part, *pos));
                }
            }
            if parts.is_empty() {
                continue;
            }
            if parts.iter().all(|p| p.2) {
                for (i, (u, n, _)) in parts.iter().enumerate() {
                    out.push(self.member(c.sub(u), &n.sum(self.spec, &cs)?, true));
                    for (v, m, _) in &parts[i + 1..] {
                        out.push(self.member(u.sub(v), &n.sum(self.spec, m)?, true));
                    }
                }
                continue;
            }
            let mut period = StaircaseSubgroup::whole(self.spec);
            for (_, n, _) in &parts {
                period = period.intersect(self.spec, n)?;
            }
            let counts: Vec<u64> = (z + 1..=k)
                .map(|i| self.spec.component(i).reduce_multiplier(period.multipliers()[i - 1]))
                .collect();
            let total = counts.iter().fold(1usize, |a, &m| a.saturating_mul(m as usize));
            self.check(total.saturating_mul(parts.len()))?;
            let mut reps = Vec::with_capacity(total);
            let mut digits = vec![0u64; counts.len()];
            loop {
                let mut coords = vec![0i64; k];
                for (i, &d) in digits.iter().enumerate() {
                    coords[z + i] = d as i64;
                }
                reps.push(GroupElement::from_ints(&coords));
                let mut pos = digits.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < counts[pos] {
                        break;
                    }
                    digits[pos] = 0;
                }
                if digits.iter().all(|&d| d == 0) {
                    break;
                }
            }
            let mut alts = Vec::new();
            for r in reps {
                let base = c.add(&Term::constant(r));
                alts.push(and(parts.iter().map(|(u, n, pos)| self.member(base.sub(u), n, *pos)).collect()));
            }
            out.push(or(alts));
        }
        Ok(and(out))
    }
}

fn coefficient_lcm(x: &str, body: &Formula) -> i64 {
    body.atoms().iter().map(|a| a.term().coeff(x).abs()).filter(|&c| c != 0).fold(1, |a, c| a.lcm(&c))
}

fn require_input(f: &Formula, spec: &GroupSpec) -> Result<()> {
    spec.require_computable()?;
    if !f.has_only_base_atoms() {
        return Err(OagError::Precondition(
            "derived predicates must be expanded to base atoms before elimination".into(),
        ));
    }
    Ok(())
}

/// Eliminates `x` from `∃x. body` for a quantifier-free `body`.
fn eliminate_var(x: &str, body: &Formula, spec: &GroupSpec, opts: QeOptions) -> Result<(Formula, TraceStep)> {
    require_input(body, spec)?;
    if !body.is_quantifier_free() {
        return Err(OagError::Precondition("the body must be quantifier-free".into()));
    }
    let l = coefficient_lcm(x, body);
    let e = Elim { spec, x, l, budget: opts.atom_budget };
    let mut conjuncts = e.dnf(body, true)?;
    let scale = StaircaseSubgroup::multiple(spec, l as u64);
    if !scale.is_whole() {
        for c in &mut conjuncts {
            if !c.lits.is_empty() {
                c.lits.push(Lit::Cong(Term::zero(), scale.clone(), true));
            }
        }
    }
    let mut notes = Vec::new();
    let mut parts = Vec::new();
    for c in &conjuncts {
        if c.lits.is_empty() {
            parts.push(and(c.free.clone()));
        } else {
            parts.push(e.solve(c, &mut notes)?);
        }
        e.check(parts.iter().map(Formula::size).sum())?;
    }
    let output = or(parts);
    let step = TraceStep {
        variable: x.to_string(),
        body: body.clone(),
        coefficient_lcm: l,
        conjuncts: conjuncts.len(),
        notes,
        output: output.clone(),
    };
    Ok((output, step))
}

/// Eliminates the top-level existential of `f`, whose body must be
/// quantifier-free over base atoms.
pub fn eliminate_exists(f: &Formula, spec: &GroupSpec) -> Result<Formula> {
    eliminate_exists_with(f, spec, QeOptions::default())
}

pub fn eliminate_exists_with(f: &Formula, spec: &GroupSpec, opts: QeOptions) -> Result<Formula> {
    match f {
        Formula::Exists(x, body) => Ok(eliminate_var(x, body, spec, opts)?.0),
        _ => Err(OagError::Precondition("expected a formula of the form `exists x. ...`".into())),
    }
}

/// Full elimination, innermost quantifier first; `∀` goes through `¬∃¬`.
pub fn eliminate_all(f: &Formula, spec: &GroupSpec) -> Result<Formula> {
    Ok(eliminate_all_traced(f, spec, QeOptions::default())?.output)
}

pub fn eliminate_all_traced(f: &Formula, spec: &GroupSpec, opts: QeOptions) -> Result<EliminationTrace> {
    require_input(f, spec)?;
    let mut steps = Vec::new();
    let output = eliminate_rec(f, spec, opts, &mut steps)?;
    Ok(EliminationTrace { input: f.clone(), steps, output })
}

fn eliminate_rec(f: &Formula, spec: &GroupSpec, opts: QeOptions, steps: &mut Vec<TraceStep>) -> Result<Formula> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(eliminate_rec(g, spec, opts, steps)?),
        Formula::And(gs) => and(gs.iter().map(|g| eliminate_rec(g, spec, opts, steps)).collect::<Result<_>>()?),
        Formula::Or(gs) => or(gs.iter().map(|g| eliminate_rec(g, spec, opts, steps)).collect::<Result<_>>()?),
        Formula::Exists(x, g) => {
            let body = eliminate_rec(g, spec, opts, steps)?;
            let (out, step) = eliminate_var(x, &body, spec, opts)?;
            steps.push(step);
            out
        }
        Formula::Forall(x, g) => {
            let body = Formula::not(eliminate_rec(g, spec, opts, steps)?);
            let (out, step) = eliminate_var(x, &body, spec, opts)?;
            steps.push(step);
            Formula::not(out)
        }
    })
}

// ---- atom classes and directed families ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomClass {
    /// Defines a boolean combination of initial segments.
    OrderConvex,
    /// Congruence whose cosets are infinitely many at prime `p` over `CS(level)`.
    Congruence { p: u64, level: usize },
    /// Finitely many instance sets.
    Na,
}

impl fmt::Display for AtomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomClass::OrderConvex => write!(f, "order_convex"),
            AtomClass::Congruence { p, level } => write!(f, "congruence({p}, D{level})"),
            AtomClass::Na => write!(f, "NA"),
        }
    }
}

/// The largest convex subgroup over `CS(level)` of finite `p`-codimension,
/// as a level.
fn promote(spec: &GroupSpec, p: u64, level: usize) -> usize {
    (0..=level)
        .find(|&up| dim_p(spec, p, up, level).is_ok_and(|d| d != ExtNat::Inf))
        .unwrap_or(level)
}

pub fn classify_atom(a: &Atom, spec: &GroupSpec) -> AtomClass {
    match a {
        Atom::Cmp(..) => AtomClass::OrderConvex,
        Atom::Cong(_, h) => {
            if h.index_in_group(spec) != ExtNat::Inf {
                return AtomClass::Na;
            }
            for (level, w) in step_decomposition(spec, h) {
                if level == 0 || w == 0 {
                    continue;
                }
                for (p, e) in factorize(w) {
                    let part = StaircaseSubgroup::convex_plus(spec, level, p.pow(e)).expect("level in range");
                    if part.index_in_group(spec) == ExtNat::Inf {
                        return AtomClass::Congruence { p, level: promote(spec, p, level) };
                    }
                }
            }
            AtomClass::OrderConvex
        }
        derived => match expand_atom(derived, spec) {
            Ok(f) => {
                let classes: Vec<AtomClass> = f.atoms().iter().map(|b| classify_atom(b, spec)).collect();
                classes
                    .iter()
                    .copied()
                    .find(|c| matches!(c, AtomClass::Congruence { .. }))
                    .or_else(|| classes.iter().copied().find(|c| *c == AtomClass::OrderConvex))
                    .unwrap_or(AtomClass::Na)
            }
            Err(_) => AtomClass::OrderConvex,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyKey {
    Order,
    Congruence { p: u64, level: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub key: FamilyKey,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyPartition {
    pub families: Vec<Family>,
    pub na: Vec<Atom>,
}

impl FamilyPartition {
    pub fn count(&self) -> usize {
        self.families.len()
    }
}

/// Groups the distinct atoms of `f` into the order family, one congruence
/// family per prime and promoted level, and the NA atoms.
pub fn directed_family_partition(f: &Formula, spec: &GroupSpec) -> FamilyPartition {
    let mut families: Vec<Family> = Vec::new();
    let mut na = Vec::new();
    let mut seen = HashSet::new();
    for a in f.atoms() {
        if !seen.insert(a.clone()) {
            continue;
        }
        let key = match classify_atom(a, spec) {
            AtomClass::Na => {
                na.push(a.clone());
                continue;
            }
            AtomClass::OrderConvex => FamilyKey::Order,
            AtomClass::Congruence { p, level } => FamilyKey::Congruence { p, level },
        };
        match families.iter_mut().find(|fam| fam.key == key) {
            Some(fam) => fam.atoms.push(a.clone()),
            None => families.push(Family { key, atoms: vec![a.clone()] }),
        }
    }
    families.sort_by_key(|fam| fam.key);
    FamilyPartition { families, na }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ArchComponent, PrimeDimProfile, RankOneRealization as R};
    use crate::oracle::{eval_qf, exists_truth};
    use crate::syntax::parse_formula;

    fn spec(reals: Vec<R>) -> GroupSpec {
        GroupSpec::from_realizations(reals)
    }

    /// Checks `∃x. body` against the oracle on every assignment of the free
    /// variables with coordinates in `[-r, r]`.
    fn agrees(g: &GroupSpec, text: &str, r: i64) {
        let f = parse_formula(text, g).unwrap();
        let Formula::Exists(x, body) = &f else { panic!() };
        let out = eliminate_exists(&f, g).unwrap();
        assert!(out.is_quantifier_free() && out.has_only_base_atoms());
        let vars: Vec<String> = f.free_vars().into_iter().collect();
        let pts = crate::oracle::Box::symmetric(g, r, 2).elements(u128::MAX).unwrap();
        let mut idx = vec![0usize; vars.len()];
        loop {
            let asg: Assignment = vars.iter().cloned().zip(idx.iter().map(|&i| pts[i].clone())).collect();
            let want = exists_truth(g, x, body, &asg).unwrap();
            assert_eq!(eval_qf(&out, g, &asg).unwrap(), want, "{text} at {asg:?}\nqe: {out}");
            let mut pos = vars.len();
            loop {
                if pos == 0 {
                    return;
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

    #[test]
    fn integer_examples() {
        let z = spec(vec![R::integers()]);
        agrees(&z, "exists x. y < x and x < w and x == 0 mod 2G", 12);
        agrees(&z, "exists x. 2*x = y", 12);
        agrees(&z, "exists x. 3*x <= y and y < 2*x + w and not (x == y mod 3G)", 6);
        let out = eliminate_exists(&parse_formula("exists x. x == y mod 2G and x <= w", &z).unwrap(), &z).unwrap();
        assert_eq!(out, Formula::True);
    }

    #[test]
    fn lexicographic_examples() {
        let zz = spec(vec![R::integers(), R::integers()]);
        agrees(&zz, "exists x. y < x and x < w and x == 0 mod D1+2G", 2);
        agrees(&zz, "exists x. y < x and x < w and not (x == y mod D1) and x == 0 mod 2G", 2);
        agrees(&zz, "exists x. x == y mod D1 and 2*x > w", 2);
        let zq = spec(vec![R::integers(), R::All]);
        agrees(&zq, "exists x. y < 2*x and 2*x < w and not (x = y)", 2);
        let qz = spec(vec![R::All, R::integers()]);
        agrees(&qz, "exists x. y <= x and x < w and x == y mod 3G", 2);
    }

    #[test]
    fn full_elimination() {
        let z = spec(vec![R::integers()]);
        let f = parse_formula("forall x. exists w. w <= x", &z).unwrap();
        assert_eq!(eliminate_all(&f, &z).unwrap(), Formula::True);
        let qf = parse_formula("x < y", &z).unwrap();
        assert_eq!(eliminate_all(&qf, &z).unwrap(), qf);
        let f = parse_formula("exists x. forall w. w <= x", &z).unwrap();
        assert_eq!(eliminate_all(&f, &z).unwrap(), Formula::False);
        let trace = eliminate_all_traced(&parse_formula("forall y. exists x. x < y and x == (1) mod 3G", &z).unwrap(), &z, QeOptions::default()).unwrap();
        assert_eq!(trace.output, Formula::True);
        assert!(trace.replay(&z, QeOptions::default()).unwrap());
    }

    #[test]
    fn budget_and_preconditions() {
        let z = spec(vec![R::integers()]);
        let f = parse_formula("exists x. y < x and x < w and x == 0 mod 8G", &z).unwrap();
        assert!(matches!(
            eliminate_exists_with(&f, &z, QeOptions { atom_budget: 3 }),
            Err(OagError::Budget { .. })
        ));
        let d = parse_formula("exists x. M_1(x)", &z).unwrap();
        assert!(eliminate_exists(&d, &z).is_err());
    }

    #[test]
    fn atom_classes() {
        let z = spec(vec![R::integers()]);
        let a = parse_formula("x == y mod 4G", &z).unwrap();
        assert_eq!(classify_atom(a.atoms()[0], &z), AtomClass::Na);
        let inf = GroupSpec::new(
            vec![ArchComponent::abstract_component("a", PrimeDimProfile::new([(2, ExtNat::Inf)].into(), ExtNat::ONE).unwrap(), false)
                .unwrap()],
            None,
        );
        let f = parse_formula("x <= y and x == y mod 2G and x == w mod 2G and x == y mod 3G", &inf).unwrap();
        assert_eq!(classify_atom(f.atoms()[1], &inf), AtomClass::Congruence { p: 2, level: 1 });
        assert_eq!(classify_atom(f.atoms()[0], &inf), AtomClass::OrderConvex);
        let part = directed_family_partition(&f, &inf);
        assert_eq!(part.count(), 2);
        assert_eq!(part.na.len(), 1);
    }
}
