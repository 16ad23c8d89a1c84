//! Terms, atoms and formulas, with the printer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::arith::Rational;
use crate::group::{ConvexSubgroup, GroupElement};
use crate::staircase::StaircaseSubgroup;

/// `Σ c_v·v + Σ c_ℓ·1_ℓ + constant`, kept canonical: no zero coefficients and
/// no all-zero constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Term {
    vars: BTreeMap<String, i64>,
    ones: BTreeMap<usize, i64>,
    constant: Option<GroupElement>,
}

impl Term {
    pub fn zero() -> Self {
        Term::default()
    }

    pub fn var(name: &str) -> Self {
        Term::var_times(name, 1)
    }

    pub fn var_times(name: &str, c: i64) -> Self {
        let mut t = Term::zero();
        if c != 0 {
            t.vars.insert(name.to_string(), c);
        }
        t
    }

    /// The symbolic constant `1_Δ` for `Δ = CS(level)`.
    pub fn one_at(level: usize) -> Self {
        let mut t = Term::zero();
        t.ones.insert(level, 1);
        t
    }

    pub fn constant(g: GroupElement) -> Self {
        Term { constant: if g.is_zero() { None } else { Some(g) }, ..Term::zero() }
    }

    pub fn vars(&self) -> &BTreeMap<String, i64> {
        &self.vars
    }

    pub fn ones(&self) -> &BTreeMap<usize, i64> {
        &self.ones
    }

    pub fn constant_part(&self) -> Option<&GroupElement> {
        self.constant.as_ref()
    }

    pub fn coeff(&self, v: &str) -> i64 {
        self.vars.get(v).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.vars.is_empty() && self.ones.is_empty() && self.constant.is_none()
    }

    /// No variables at all.
    pub fn is_ground(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn add(&self, other: &Term) -> Term {
        let mut out = self.clone();
        for (v, c) in &other.vars {
            let e = out.vars.entry(v.clone()).or_insert(0);
            *e += c;
            if *e == 0 {
                out.vars.remove(v);
            }
        }
        for (l, c) in &other.ones {
            let e = out.ones.entry(*l).or_insert(0);
            *e += c;
            if *e == 0 {
                out.ones.remove(l);
            }
        }
        out.constant = match (&self.constant, &other.constant) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => {
                let s = a.add(b);
                if s.is_zero() {
                    None
                } else {
                    Some(s)
                }
            }
        };
        out
    }

    pub fn scale(&self, n: i64) -> Term {
        if n == 0 {
            return Term::zero();
        }
        Term {
            vars: self.vars.iter().map(|(v, c)| (v.clone(), c * n)).collect(),
            ones: self.ones.iter().map(|(l, c)| (*l, c * n)).collect(),
            constant: self.constant.as_ref().map(|g| g.scale(n)),
        }
    }

    pub fn neg(&self) -> Term {
        self.scale(-1)
    }

    pub fn sub(&self, other: &Term) -> Term {
        self.add(&other.neg())
    }

    /// The term with `v` removed.
    pub fn without(&self, v: &str) -> Term {
        let mut t = self.clone();
        t.vars.remove(v);
        t
    }

    /// Replaces `v` by `replacement`.
    pub fn substitute(&self, v: &str, replacement: &Term) -> Term {
        let c = self.coeff(v);
        if c == 0 {
            return self.clone();
        }
        self.without(v).add(&replacement.scale(c))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.vars.keys().cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

/// Atoms. Comparisons and congruences are against `0`; the remaining variants
/// are the derived predicates that `expand_derived` removes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Cmp(Term, Rel),
    Cong(Term, StaircaseSubgroup),
    /// `A_n(t) = Δ`
    AJump { n: u64, term: Term, target: ConvexSubgroup },
    /// `F_n(t) = Δ`
    FJump { n: u64, term: Term, target: ConvexSubgroup },
    /// `M_k(t)`
    M { k: u64, term: Term },
    /// `E_(n,k)(t)`
    E { n: u64, k: u64, term: Term },
    /// `D_(p,r,i)(t)`
    D { p: u64, r: u32, i: u32, term: Term },
}

impl Atom {
    pub fn is_base(&self) -> bool {
        matches!(self, Atom::Cmp(..) | Atom::Cong(..))
    }

    pub fn term(&self) -> &Term {
        match self {
            Atom::Cmp(t, _) | Atom::Cong(t, _) => t,
            Atom::AJump { term, .. }
            | Atom::FJump { term, .. }
            | Atom::M { term, .. }
            | Atom::E { term, .. }
            | Atom::D { term, .. } => term,
        }
    }

    pub fn map_term(&self, f: impl Fn(&Term) -> Term) -> Atom {
        match self {
            Atom::Cmp(t, r) => Atom::Cmp(f(t), *r),
            Atom::Cong(t, h) => Atom::Cong(f(t), h.clone()),
            Atom::AJump { n, term, target } => Atom::AJump { n: *n, term: f(term), target: *target },
            Atom::FJump { n, term, target } => Atom::FJump { n: *n, term: f(term), target: *target },
            Atom::M { k, term } => Atom::M { k: *k, term: f(term) },
            Atom::E { n, k, term } => Atom::E { n: *n, k: *k, term: f(term) },
            Atom::D { p, r, i, term } => Atom::D { p: *p, r: *r, i: *i, term: f(term) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    pub fn le(lhs: Term, rhs: Term) -> Self {
        Formula::Atom(Atom::Cmp(lhs.sub(&rhs), Rel::Le))
    }

    pub fn lt(lhs: Term, rhs: Term) -> Self {
        Formula::Atom(Atom::Cmp(lhs.sub(&rhs), Rel::Lt))
    }

    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Formula::Atom(Atom::Cmp(lhs.sub(&rhs), Rel::Eq))
    }

    pub fn cong(lhs: Term, rhs: Term, h: StaircaseSubgroup) -> Self {
        Formula::Atom(Atom::Cong(lhs.sub(&rhs), h))
    }

    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            f => Formula::Not(Box::new(f)),
        }
    }

    /// Conjunction with constant folding and flattening.
    pub fn and(parts: Vec<Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with constant folding and flattening.
    pub fn or(parts: Vec<Formula>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn exists(v: &str, body: Formula) -> Self {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Self {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Atom(a) => a.term().free_vars(),
            Formula::Not(f) => f.free_vars(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().flat_map(|f| f.free_vars()).collect(),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut s = f.free_vars();
                s.remove(v);
                s
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// True when every atom is a comparison or a staircase congruence.
    pub fn has_only_base_atoms(&self) -> bool {
        self.atoms().iter().all(|a| a.is_base())
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    /// Number of atom occurrences.
    pub fn size(&self) -> usize {
        self.atoms().len()
    }

    /// Applies `f` to every atom, rebuilding the formula with folding.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a),
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Exists(v, g) => Formula::exists(v, g.map_atoms(f)),
            Formula::Forall(v, g) => Formula::forall(v, g.map_atoms(f)),
        }
    }

    /// Fallible variant of [`Formula::map_atoms`].
    pub fn try_map_atoms<E>(&self, f: &mut impl FnMut(&Atom) -> Result<Formula, E>) -> Result<Formula, E> {
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a)?,
            Formula::Not(g) => Formula::not(g.try_map_atoms(f)?),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| g.try_map_atoms(f)).collect::<Result<_, E>>()?),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| g.try_map_atoms(f)).collect::<Result<_, E>>()?),
            Formula::Exists(v, g) => Formula::exists(v, g.try_map_atoms(f)?),
            Formula::Forall(v, g) => Formula::forall(v, g.try_map_atoms(f)?),
        })
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn write_element(f: &mut fmt::Formatter<'_>, g: &GroupElement) -> fmt::Result {
    write!(f, "(")?;
    for (i, q) in g.coords.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write_rational(f, q)?;
    }
    write!(f, ")")
}

/// Summands as (sign, magnitude, printable unit); the constant element is
/// always printed with a `+` sign and its own coordinates.
fn write_summands(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    let mut first = true;
    let mut piece = |f: &mut fmt::Formatter<'_>, c: i64, unit: &dyn fmt::Display| -> fmt::Result {
        let mag = c.unsigned_abs();
        match (first, c < 0) {
            (true, true) => write!(f, "-")?,
            (true, false) => {}
            (false, true) => write!(f, " - ")?,
            (false, false) => write!(f, " + ")?,
        }
        first = false;
        if mag != 1 {
            write!(f, "{mag}*")?;
        }
        write!(f, "{unit}")
    };
    for (v, c) in &t.vars {
        piece(f, *c, v)?;
    }
    for (l, c) in &t.ones {
        piece(f, *c, &format!("one@{l}"))?;
    }
    if let Some(g) = &t.constant {
        if !first {
            write!(f, " + ")?;
        }
        write_element(f, g)?;
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_summands(f, self)
    }
}

/// Splits `t` as `lhs − rhs` with positive coefficients on both sides; the
/// constant moves to the right with its sign flipped.
fn sides(t: &Term) -> (Term, Term) {
    let mut lhs = Term::zero();
    let mut rhs = Term::zero();
    for (v, c) in &t.vars {
        if *c > 0 {
            lhs.vars.insert(v.clone(), *c);
        } else {
            rhs.vars.insert(v.clone(), -c);
        }
    }
    for (l, c) in &t.ones {
        if *c > 0 {
            lhs.ones.insert(*l, *c);
        } else {
            rhs.ones.insert(*l, -c);
        }
    }
    if let Some(g) = &t.constant {
        rhs = rhs.add(&Term::constant(g.neg()));
    }
    (lhs, rhs)
}

fn convex_name(c: &ConvexSubgroup) -> String {
    if c.0 == 0 {
        "G".to_string()
    } else {
        format!("D{}", c.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Cmp(t, rel) => {
                let (l, r) = sides(t);
                let op = match rel {
                    Rel::Le => "<=",
                    Rel::Lt => "<",
                    Rel::Eq => "=",
                };
                write!(f, "{l} {op} {r}")
            }
            Atom::Cong(t, h) => {
                let (l, r) = sides(t);
                write!(f, "{l} == {r} mod {h}")
            }
            Atom::AJump { n, term, target } => write!(f, "A_{n}({term}) = {}", convex_name(target)),
            Atom::FJump { n, term, target } => write!(f, "F_{n}({term}) = {}", convex_name(target)),
            Atom::M { k, term } => write!(f, "M_{k}({term})"),
            Atom::E { n, k, term } => write!(f, "E_({n},{k})({term})"),
            Atom::D { p, r, i, term } => write!(f, "D_({p},{r},{i})({term})"),
        }
    }
}

impl Formula {
    fn is_compound(&self) -> bool {
        !matches!(self, Formula::True | Formula::False | Formula::Atom(_) | Formula::Not(_))
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula) -> fmt::Result {
    if child.is_compound() {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                write!(f, "not ")?;
                if matches!(**g, Formula::Atom(_)) || g.is_compound() {
                    write!(f, "({g})")
                } else {
                    write!(f, "{g}")
                }
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let sep = if matches!(self, Formula::And(_)) { " and " } else { " or " };
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write_child(f, g)?;
                }
                Ok(())
            }
            Formula::Exists(v, g) => write!(f, "exists {v}. {g}"),
            Formula::Forall(v, g) => write!(f, "forall {v}. {g}"),
        }
    }
}
