//! Finite ict, wict, special and inp patterns: representation, checking by
//! quantifier elimination, the two lower-bound constructors and the
//! row-simplifying transforms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{OagError, Result};
use crate::ext::ExtNat;
use crate::group::{GroupElement, GroupSpec};
use crate::invariants::{dim_p, infinite_jumps, relevant_primes};
use crate::qe::eliminate_exists;
use crate::staircase::StaircaseSubgroup;
use crate::syntax::{eval, parse_element, parse_formula, Assignment, Atom, Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternKind {
    Ict,
    Wict,
    Special,
    Inp,
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternKind::Ict => "ict",
            PatternKind::Wict => "wict",
            PatternKind::Special => "special",
            PatternKind::Inp => "inp",
        })
    }
}

impl FromStr for PatternKind {
    type Err = OagError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ict" => PatternKind::Ict,
            "wict" => PatternKind::Wict,
            "special" => PatternKind::Special,
            "inp" => PatternKind::Inp,
            _ => return Err(OagError::Precondition(format!("unknown pattern kind `{s}`"))),
        })
    }
}

/// One row: a formula in the object variable and `params`, instantiated once
/// per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRow {
    pub formula: Formula,
    pub params: Vec<String>,
    pub columns: Vec<Vec<GroupElement>>,
    /// `k` of a `k`-inconsistent inp row.
    pub bound: Option<usize>,
}

impl PatternRow {
    pub fn instance(&self, col: usize) -> Formula {
        let subst: Vec<(&String, Term)> = self
            .params
            .iter()
            .zip(&self.columns[col])
            .map(|(v, g)| (v, Term::constant(g.clone())))
            .collect();
        self.formula.map_atoms(&mut |a: &Atom| {
            Formula::atom(a.map_term(|t| {
                subst.iter().fold(t.clone(), |acc, (v, c)| acc.substitute(v, c))
            }))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub kind: PatternKind,
    pub object: String,
    pub rows: Vec<PatternRow>,
    /// Per-row coset capacities recorded by the constructors.
    pub capacity: Option<Vec<ExtNat>>,
}

impl Pattern {
    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, |r| r.columns.len())
    }

    fn validate(&self) -> Result<()> {
        let m = self.columns();
        for (i, row) in self.rows.iter().enumerate() {
            if row.columns.len() != m {
                return Err(OagError::Precondition(format!("row {i} has {} columns, expected {m}", row.columns.len())));
            }
            if row.columns.iter().any(|c| c.len() != row.params.len()) {
                return Err(OagError::Precondition(format!("row {i}: parameter tuple of the wrong length")));
            }
            if !row.formula.is_quantifier_free() || !row.formula.has_only_base_atoms() {
                return Err(OagError::Precondition(format!("row {i}: formula must be quantifier-free over base atoms")));
            }
            let extra: Vec<String> = row
                .formula
                .free_vars()
                .into_iter()
                .filter(|v| *v != self.object && !row.params.contains(v))
                .collect();
            if !extra.is_empty() {
                return Err(OagError::Scope(format!("row {i}: unbound variables {extra:?}")));
            }
        }
        if self.kind == PatternKind::Special && m < 2 {
            return Err(OagError::Precondition("special patterns need two columns".into()));
        }
        if self.kind == PatternKind::Inp && self.rows.iter().any(|r| r.bound.is_none()) {
            return Err(OagError::Precondition("inp rows need an inconsistency bound".into()));
        }
        Ok(())
    }
}

/// Decides `∃x. ⋀ parts` for ground parameters.
pub fn satisfiable(spec: &GroupSpec, object: &str, parts: Vec<Formula>) -> Result<bool> {
    let out = eliminate_exists(&Formula::exists(object, Formula::and(parts)), spec)?;
    eval(&out, spec, &Assignment::new())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub kind: PatternKind,
    pub depth: usize,
    pub columns: usize,
    pub paths_checked: usize,
    pub failing_paths: Vec<Vec<usize>>,
    /// `(row, columns)` subsets of an inp row that are jointly satisfiable.
    pub failing_subsets: Vec<(usize, Vec<usize>)>,
    pub capacity: Option<Vec<ExtNat>>,
}

impl CheckReport {
    pub fn valid(&self) -> bool {
        self.failing_paths.is_empty() && self.failing_subsets.is_empty()
    }

    /// Every row has infinite coset capacity, so the pattern extends to any
    /// number of columns.
    pub fn unbounded(&self) -> bool {
        self.capacity.as_ref().is_some_and(|c| c.iter().all(|&x| x == ExtNat::Inf))
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid() {
            write!(f, "VALID at {} columns", self.columns)?;
        } else {
            write!(f, "INVALID")?;
        }
        write!(f, " kind={} depth={} paths={}", self.kind, self.depth, self.paths_checked)?;
        if let Some(c) = &self.capacity {
            let caps: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, " capacity={}", caps.join(","))?;
            if self.unbounded() {
                write!(f, " (extends to any column count)")?;
            }
        }
        for p in &self.failing_paths {
            write!(f, "\n  failing path {p:?}")?;
        }
        for (row, s) in &self.failing_subsets {
            write!(f, "\n  row {row}: columns {s:?} are consistent")?;
        }
        Ok(())
    }
}

fn paths(depth: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = m.checked_pow(depth as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut n| {
        let mut p = vec![0; depth];
        for slot in p.iter_mut().rev() {
            *slot = n % m;
            n /= m;
        }
        p
    })
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..m {
            cur.push(j);
            go(j + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

pub fn check(p: &Pattern, spec: &GroupSpec) -> Result<CheckReport> {
    spec.require_computable()?;
    p.validate()?;
    let m = p.columns();
    let inst: Vec<Vec<Formula>> = p.rows.iter().map(|r| (0..m).map(|j| r.instance(j)).collect()).collect();
    let mut report = CheckReport {
        kind: p.kind,
        depth: p.depth(),
        columns: m,
        paths_checked: 0,
        failing_paths: Vec::new(),
        failing_subsets: Vec::new(),
        capacity: p.capacity.clone(),
    };
    if p.kind == PatternKind::Special {
        let parts = inst
            .iter()
            .flat_map(|row| [row[0].clone(), Formula::not(row[1].clone())])
            .collect();
        report.paths_checked = 1;
        if !satisfiable(spec, &p.object, parts)? {
            report.failing_paths.push(vec![0; p.depth()]);
        }
        return Ok(report);
    }
    if m == 0 {
        return Ok(report);
    }
    for path in paths(p.depth(), m) {
        let mut parts = Vec::new();
        for (i, &fi) in path.iter().enumerate() {
            parts.push(inst[i][fi].clone());
            let negated = match p.kind {
                PatternKind::Ict => (0..m).filter(|&j| j != fi).collect(),
                PatternKind::Wict => (fi + 1..m).collect(),
                _ => Vec::new(),
            };
            parts.extend(negated.into_iter().map(|j: usize| Formula::not(inst[i][j].clone())));
        }
        report.paths_checked += 1;
        if !satisfiable(spec, &p.object, parts)? {
            report.failing_paths.push(path);
        }
    }
    if p.kind == PatternKind::Inp {
        for (i, row) in p.rows.iter().enumerate() {
            let k = row.bound.expect("validated");
            for s in subsets(m, k) {
                let parts = s.iter().map(|&j| inst[i][j].clone()).collect();
                if satisfiable(spec, &p.object, parts)? {
                    report.failing_subsets.push((i, s));
                }
            }
        }
    }
    Ok(report)
}

// ---- constructors ----

/// The first `m` elements of `big` that are pairwise incongruent modulo
/// `small`, enumerated with the most significant coordinate varying fastest.
pub fn coset_representatives(
    spec: &GroupSpec,
    big: &StaircaseSubgroup,
    small: &StaircaseSubgroup,
    m: usize,
) -> Result<Vec<GroupElement>> {
    if !small.is_subgroup_of(spec, big)? {
        return Err(OagError::NonContainment);
    }
    let ranges: Vec<(i64, u64)> = big
        .multipliers()
        .iter()
        .zip(small.multipliers())
        .map(|(&b, &s)| match (b, s) {
            (0, _) => (0, 1),
            (_, 0) => (b as i64, m as u64),
            _ => (b as i64, (s / b).min(m as u64)),
        })
        .collect();
    let mut out: Vec<GroupElement> = Vec::new();
    let mut idx = vec![0u64; ranges.len()];
    loop {
        let g = GroupElement::from_ints(&idx.iter().zip(&ranges).map(|(&c, &(b, _))| c as i64 * b).collect::<Vec<_>>());
        if out.iter().all(|h| !small.contains(spec, &g.sub(h))) {
            out.push(g);
            if out.len() == m {
                return Ok(out);
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < ranges[pos].1 {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn intersect_all(spec: &GroupSpec, hs: &[StaircaseSubgroup]) -> Result<StaircaseSubgroup> {
    hs.iter().try_fold(StaircaseSubgroup::whole(spec), |acc, h| acc.intersect(spec, h))
}

/// `K_i = ⋂_{j≠i} (H_j + H_i)`.
pub fn chain_k(spec: &GroupSpec, hs: &[StaircaseSubgroup], i: usize) -> Result<StaircaseSubgroup> {
    let sums = hs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, h)| h.sum(spec, &hs[i]))
        .collect::<Result<Vec<_>>>()?;
    intersect_all(spec, &sums)
}

/// Index of the first `r` at which `⋂_{i<r}(H_i + H_r) ≠ (⋂_{i<r} H_i) + H_r`.
pub fn distributivity_failure(spec: &GroupSpec, hs: &[StaircaseSubgroup]) -> Result<Option<usize>> {
    for r in 1..hs.len() {
        let lhs = intersect_all(
            spec,
            &hs[..r].iter().map(|h| h.sum(spec, &hs[r])).collect::<Result<Vec<_>>>()?,
        )?;
        let rhs = intersect_all(spec, &hs[..r])?.sum(spec, &hs[r])?;
        if lhs != rhs {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

fn cong_row(object: &str, h: &StaircaseSubgroup, params: Vec<GroupElement>, bound: usize) -> PatternRow {
    PatternRow {
        formula: Formula::cong(Term::var(object), Term::var("a"), h.clone()),
        params: vec!["a".into()],
        columns: params.into_iter().map(|a| vec![a]).collect(),
        bound: Some(bound),
    }
}

/// The inp pattern `x ≡ a^i_j mod H_i` with 2-inconsistent rows, from a
/// family satisfying commutativity, distributivity and `[K_i : H_i] ≥ m`.
pub fn construct_inp_from_chain(spec: &GroupSpec, hs: &[StaircaseSubgroup], m: usize) -> Result<Pattern> {
    spec.require_computable()?;
    if let Some(r) = distributivity_failure(spec, hs)? {
        return Err(OagError::Hypothesis {
            condition: "distributivity".into(),
            detail: format!("fails at H_{}", r + 1),
        });
    }
    let mut rows = Vec::new();
    let mut capacity = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let k = chain_k(spec, hs, i)?;
        let index = StaircaseSubgroup::index(spec, &k, h)?;
        if index < ExtNat::Fin(m as u64) {
            return Err(OagError::Hypothesis {
                condition: "infinity".into(),
                detail: format!("[K_{0} : H_{0}] = {index} < {m} columns", i + 1),
            });
        }
        rows.push(cong_row("x", h, coset_representatives(spec, &k, h, m)?, 2));
        capacity.push(index);
    }
    Ok(Pattern { kind: PatternKind::Inp, object: "x".into(), rows, capacity: Some(capacity) })
}

/// One member `H = CS(level) + p^e·G` of the lower-bound family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessMember {
    pub level: usize,
    pub prime: u64,
    pub exponent: u32,
    /// Level of the next larger convex subgroup of the prime's chain, if any.
    pub successor: Option<usize>,
    pub subgroup: StaircaseSubgroup,
    /// `[K : H]` predicted from the prime dimension of the successor quotient.
    pub capacity: ExtNat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessFamily {
    pub members: Vec<WitnessMember>,
}

/// Candidate primes when looking for finite chains with enough cosets.
const CHAIN_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

/// Per prime, a chain of convex levels (largest subgroup first) whose
/// successive quotients have at least `m` cosets modulo `p`.
fn realizable_chain(spec: &GroupSpec, p: u64, m: usize) -> Result<Vec<(usize, ExtNat)>> {
    let mut out = Vec::new();
    let mut upper = 0;
    let mut lower = upper + 1;
    while lower <= spec.k() {
        let d = dim_p(spec, p, upper, lower)?;
        let cap = ExtNat::pow(p, d);
        if cap >= ExtNat::Fin(m as u64) {
            out.push((lower, cap));
            upper = lower;
        }
        lower += 1;
    }
    Ok(out)
}

fn member(spec: &GroupSpec, level: usize, prime: u64, exponent: u32, successor: Option<usize>, capacity: ExtNat) -> Result<WitnessMember> {
    Ok(WitnessMember {
        level,
        prime,
        exponent,
        successor,
        subgroup: StaircaseSubgroup::convex_plus(spec, level, prime.pow(exponent))?,
        capacity,
    })
}

/// Builds the members from per-prime chains of levels (largest subgroup
/// first) and orders them by convex subgroup, smallest first, then prime.
fn family_from_chains(spec: &GroupSpec, chains: BTreeMap<u64, Vec<(usize, ExtNat)>>) -> Result<WitnessFamily> {
    let mut members = Vec::new();
    for (p, mut chain) in chains {
        chain.sort_by_key(|c| c.0);
        let n = chain.len();
        for (pos, &(level, cap)) in chain.iter().enumerate() {
            // exponent = number of chain members at or below this one
            let exponent = (n - pos) as u32;
            let successor = if pos == 0 { None } else { Some(chain[pos - 1].0) };
            members.push(member(spec, level, p, exponent, successor, cap)?);
        }
    }
    members.sort_by(|a, b| b.level.cmp(&a.level).then(a.prime.cmp(&b.prime)));
    Ok(WitnessFamily { members })
}

/// The family `H_(i,j) = Δ_i + p^e·G` over the infinite regular jumps. Jumps
/// below the listed components (an ω-tower bottom) have no staircase and are
/// skipped.
pub fn infinite_jump_family(spec: &GroupSpec) -> Result<WitnessFamily> {
    let mut chains = BTreeMap::new();
    for p in relevant_primes(spec) {
        let chain: Vec<(usize, ExtNat)> = infinite_jumps(spec, p)
            .into_iter()
            .filter(|c| c.0 <= spec.k())
            .map(|c| (c.0, ExtNat::Inf))
            .collect();
        if !chain.is_empty() {
            chains.insert(p, chain);
        }
    }
    family_from_chains(spec, chains)
}

/// A family with `rows` members whose cosets number at least `m`: primes in
/// increasing order, each contributing its chain from the largest subgroup
/// down.
pub fn realizable_family(spec: &GroupSpec, rows: usize, m: usize) -> Result<WitnessFamily> {
    let mut chains = BTreeMap::new();
    let mut caps = Vec::new();
    let mut left = rows;
    for p in CHAIN_PRIMES {
        let full = realizable_chain(spec, p, m)?;
        for &(level, cap) in &full {
            caps.push(format!("(p={p}, D{level}): {cap}"));
        }
        if left == 0 {
            continue;
        }
        let take: Vec<_> = full.into_iter().take(left).collect();
        left -= take.len();
        if !take.is_empty() {
            chains.insert(p, take);
        }
    }
    if left > 0 {
        return Err(OagError::Hypothesis {
            condition: "capacity".into(),
            detail: format!(
                "{rows} congruence rows requested with {m} columns; capacities {}",
                if caps.is_empty() { "none".to_string() } else { caps.join(", ") }
            ),
        });
    }
    family_from_chains(spec, chains)
}

fn lcm(a: u64, b: u64) -> u64 {
    num_integer::Integer::lcm(&a, &b)
}

impl WitnessFamily {
    pub fn subgroups(&self) -> Vec<StaircaseSubgroup> {
        self.members.iter().map(|m| m.subgroup.clone()).collect()
    }

    /// Checks the intersection, sum and quotient identities of the family
    /// with staircase arithmetic; returns one line per identity that fails.
    pub fn verify_identities(&self, spec: &GroupSpec) -> Result<Vec<String>> {
        let hs = self.subgroups();
        let mut failures = Vec::new();
        // distinct convex subgroups, smallest first, with n_i = ∏ p^e over the group
        let mut blocks: Vec<(usize, u64)> = Vec::new();
        for m in &self.members {
            let q = m.prime.pow(m.exponent);
            match blocks.last_mut() {
                Some((level, n)) if *level == m.level => *n *= q,
                _ => blocks.push((m.level, q)),
            }
        }
        for (idx, m) in self.members.iter().enumerate() {
            let r = blocks.iter().position(|b| b.0 == m.level).expect("level listed");
            let n_rs: u64 = self.members[..idx]
                .iter()
                .filter(|o| o.level == m.level)
                .map(|o| o.prime.pow(o.exponent))
                .product();
            // ⋂_{<(r,s)} H = Δ_1 + n_1Δ_2 + [n_1,n_2]Δ_3 + … + [n_1..n_{r-1}, n_(r,s)]G
            let mut terms = Vec::new();
            let mut acc = 1u64;
            for &(level, n) in &blocks[..r] {
                terms.push((level, acc));
                acc = lcm(acc, n);
            }
            terms.push((m.level, acc));
            let expect = StaircaseSubgroup::from_terms(spec, &terms, lcm(acc, n_rs))?;
            let before = intersect_all(spec, &hs[..idx])?;
            if before != expect {
                failures.push(format!("H_{}: intersection of earlier members is {before}, expected {expect}", idx + 1));
            }
            let p = m.prime;
            let pe1 = p.pow(m.exponent - 1);
            let reduced = StaircaseSubgroup::convex_plus(spec, m.level, pe1)?;
            let sums = intersect_all(
                spec,
                &hs[..idx].iter().map(|h| h.sum(spec, &m.subgroup)).collect::<Result<Vec<_>>>()?,
            )?;
            if sums != reduced {
                failures.push(format!("H_{}: intersection of sums is {sums}, expected {reduced}", idx + 1));
            }
            let dist = before.sum(spec, &m.subgroup)?;
            if dist != reduced {
                failures.push(format!("H_{}: sum with the intersection is {dist}, expected {reduced}", idx + 1));
            }
            let k = chain_k(spec, &hs, idx)?;
            let expect_k = match m.successor {
                Some(up) => StaircaseSubgroup::from_terms(spec, &[(m.level, 1), (up, pe1)], p.pow(m.exponent))?,
                None => reduced.clone(),
            };
            if k != expect_k {
                failures.push(format!("H_{}: K is {k}, expected {expect_k}", idx + 1));
            }
            let index = StaircaseSubgroup::index(spec, &k, &m.subgroup)?;
            let upper = m.successor.unwrap_or(0);
            let predicted = ExtNat::pow(p, dim_p(spec, p, upper, m.level)?);
            if index != predicted {
                failures.push(format!("H_{}: [K : H] is {index}, expected {predicted}", idx + 1));
            }
        }
        Ok(failures)
    }
}

/// An order row `a < x <= b` over consecutive windows `(j·step, (j+1)·step]`
/// at the top level.
fn order_row(spec: &GroupSpec, object: &str, step: u64, m: usize) -> PatternRow {
    let top = |j: usize| spec.unit(1).scale((j as u64 * step) as i64);
    PatternRow {
        formula: Formula::and(vec![
            Formula::lt(Term::var("a"), Term::var(object)),
            Formula::le(Term::var(object), Term::var("b")),
        ]),
        params: vec!["a".into(), "b".into()],
        columns: (0..m).map(|j| vec![top(j), top(j + 1)]).collect(),
        bound: Some(2),
    }
}

/// An inp pattern of the requested depth: congruence rows from the family
/// of [`realizable_family`] plus one order row.
pub fn construct_dp_witness(spec: &GroupSpec, depth: usize, m: usize) -> Result<Pattern> {
    spec.require_computable()?;
    if depth == 0 {
        return Err(OagError::Precondition("depth must be at least 1".into()));
    }
    let family = realizable_family(spec, depth - 1, m)?;
    let failures = family.verify_identities(spec)?;
    if !failures.is_empty() {
        return Err(OagError::Internal(failures.join("; ")));
    }
    let mut pattern = construct_inp_from_chain(spec, &family.subgroups(), m)?;
    // every path's solutions form a coset of a group containing step·G
    let step = family.members.iter().fold(1, |acc, mm| lcm(acc, mm.prime.pow(mm.exponent)));
    pattern.rows.push(order_row(spec, "x", step, m));
    if let Some(c) = pattern.capacity.as_mut() {
        c.push(ExtNat::Inf);
    }
    Ok(pattern)
}

// ---- transforms ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformRule {
    SpecialToIct,
    SplitDisjunction,
    SplitConjunction,
}

impl FromStr for TransformRule {
    type Err = OagError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "special_to_ict" => TransformRule::SpecialToIct,
            "split_disjunction" => TransformRule::SplitDisjunction,
            "split_conjunction" => TransformRule::SplitConjunction,
            _ => return Err(OagError::Precondition(format!("unknown transform `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformStatus {
    Preserved,
    /// The finite array lacks the indiscernibility the infinite argument
    /// relies on, and the result fails the check.
    ExpectedLimitation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformOutcome {
    pub pattern: Pattern,
    /// For the split rules, the chosen disjunct or conjunct per row.
    pub choice: Vec<usize>,
    pub report: CheckReport,
    pub status: TransformStatus,
}

fn outcome(pattern: Pattern, choice: Vec<usize>, spec: &GroupSpec) -> Result<TransformOutcome> {
    let report = check(&pattern, spec)?;
    let status = if report.valid() { TransformStatus::Preserved } else { TransformStatus::ExpectedLimitation };
    Ok(TransformOutcome { pattern, choice, report, status })
}

fn renamed(f: &Formula, from: &[String], to: &[String]) -> Formula {
    f.map_atoms(&mut |a: &Atom| {
        Formula::atom(a.map_term(|t| {
            from.iter().zip(to).fold(t.clone(), |acc, (u, v)| acc.substitute(u, &Term::var(v)))
        }))
    })
}

/// Special row `φ(x, y)` over columns `a_0, a_1, …` becomes the ict row
/// `φ(x, y) ↔ ¬φ(x, z)` over the windows `(a_j, a_{j+1})`.
fn special_to_ict(p: &Pattern) -> Result<Pattern> {
    if p.kind != PatternKind::Special {
        return Err(OagError::Precondition("special_to_ict needs a special pattern".into()));
    }
    let rows = p
        .rows
        .iter()
        .map(|row| {
            let y: Vec<String> = row.params.iter().map(|v| format!("{v}l")).collect();
            let z: Vec<String> = row.params.iter().map(|v| format!("{v}r")).collect();
            let left = renamed(&row.formula, &row.params, &y);
            let right = renamed(&row.formula, &row.params, &z);
            let formula = Formula::or(vec![
                Formula::and(vec![left.clone(), Formula::not(right.clone())]),
                Formula::and(vec![Formula::not(left), right]),
            ]);
            let columns = row.columns.windows(2).map(|w| [w[0].clone(), w[1].clone()].concat()).collect();
            PatternRow { formula, params: [y, z].concat(), columns, bound: None }
        })
        .collect();
    Ok(Pattern { kind: PatternKind::Ict, object: p.object.clone(), rows, capacity: None })
}

/// Tries every choice of one disjunct (or conjunct) per row in order and
/// keeps the first that passes the check; without one, returns the first
/// choice flagged as a limitation.
fn split(p: &Pattern, spec: &GroupSpec, conjunction: bool) -> Result<TransformOutcome> {
    if conjunction && p.kind != PatternKind::Wict {
        return Err(OagError::Precondition("split_conjunction applies to wict patterns only".into()));
    }
    if !conjunction && !matches!(p.kind, PatternKind::Wict | PatternKind::Ict) {
        return Err(OagError::Precondition("split_disjunction applies to ict and wict patterns".into()));
    }
    let pieces: Vec<Vec<Formula>> = p
        .rows
        .iter()
        .map(|r| match (&r.formula, conjunction) {
            (Formula::Or(parts), false) | (Formula::And(parts), true) => parts.clone(),
            (f, _) => vec![f.clone()],
        })
        .collect();
    if pieces.iter().all(|v| v.len() == 1) {
        return Err(OagError::Precondition(format!(
            "no row is a {}",
            if conjunction { "conjunction" } else { "disjunction" }
        )));
    }
    let build = |choice: &[usize]| Pattern {
        rows: p
            .rows
            .iter()
            .zip(choice)
            .enumerate()
            .map(|(i, (r, &c))| PatternRow { formula: pieces[i][c].clone(), ..r.clone() })
            .collect(),
        ..p.clone()
    };
    let mut choice = vec![0usize; pieces.len()];
    let mut first = None;
    loop {
        let o = outcome(build(&choice), choice.clone(), spec)?;
        if o.status == TransformStatus::Preserved {
            return Ok(o);
        }
        first.get_or_insert(o);
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(first.expect("at least one choice"));
            }
            choice[pos] += 1;
            if choice[pos] < pieces[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

pub fn transform(p: &Pattern, rule: TransformRule, spec: &GroupSpec) -> Result<TransformOutcome> {
    match rule {
        TransformRule::SpecialToIct => outcome(special_to_ict(p)?, Vec::new(), spec),
        TransformRule::SplitDisjunction => split(p, spec, false),
        TransformRule::SplitConjunction => split(p, spec, true),
    }
}

// ---- pattern files ----
//
//   kind inp
//   object x
//   row x == a mod 2G
//   params a
//   bound 2
//   col (0,0)
//   col (1,0)
//
// `row` opens a row; `params`, `bound` and `col` lines attach to the latest
// row. `#` starts a comment.

pub fn parse_pattern(text: &str, spec: &GroupSpec) -> Result<Pattern> {
    let mut kind = None;
    let mut object = "x".to_string();
    let mut rows: Vec<PatternRow> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let err = |m: &str| OagError::Parse { offset: n + 1, message: format!("line {}: {m}", n + 1) };
        let last = |rows: &mut Vec<PatternRow>| -> Result<usize> {
            if rows.is_empty() {
                Err(err("no row opened yet"))
            } else {
                Ok(rows.len() - 1)
            }
        };
        match key {
            "kind" => kind = Some(rest.parse::<PatternKind>()?),
            "object" => object = rest.to_string(),
            "row" => rows.push(PatternRow {
                formula: parse_formula(rest, spec)?,
                params: Vec::new(),
                columns: Vec::new(),
                bound: None,
            }),
            "params" => {
                let i = last(&mut rows)?;
                rows[i].params = rest.split_whitespace().map(str::to_string).collect();
            }
            "bound" => {
                let i = last(&mut rows)?;
                rows[i].bound = Some(rest.parse().map_err(|_| err("bound must be a number"))?);
            }
            "col" => {
                let i = last(&mut rows)?;
                let tuple = rest
                    .split_whitespace()
                    .map(|e| parse_element(e, spec))
                    .collect::<Result<Vec<_>>>()?;
                rows[i].columns.push(tuple);
            }
            _ => return Err(err(&format!("unknown key `{key}`"))),
        }
    }
    let kind = kind.ok_or_else(|| OagError::Parse { offset: 0, message: "missing `kind` line".into() })?;
    let p = Pattern { kind, object, rows, capacity: None };
    p.validate()?;
    Ok(p)
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind {}", self.kind)?;
        writeln!(f, "object {}", self.object)?;
        for row in &self.rows {
            writeln!(f, "row {}", row.formula)?;
            writeln!(f, "params {}", row.params.join(" "))?;
            if let Some(k) = row.bound {
                writeln!(f, "bound {k}")?;
            }
            for c in &row.columns {
                let items: Vec<String> = c.iter().map(|g| g.to_string()).collect();
                writeln!(f, "col {}", items.join(" "))?;
            }
        }
        Ok(())
    }
}
