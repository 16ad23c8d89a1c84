//! Recursive-descent parsers for formulas, subgroups, elements and group specs.
//!
//! ```text
//! formula  := ("exists" | "forall") var "." formula | implies
//! implies  := disj ("->" formula)?
//! disj     := conj ("or" conj)*
//! conj     := unary ("and" unary)*
//! unary    := "not" unary | ("exists" | "forall") ... | primary
//! primary  := "true" | "false" | atom | "(" formula ")"
//! atom     := term rel term | term "==" term "mod" subgroup
//!           | "A_"n "(" term ")" "=" convex | "F_"n "(" term ")" "=" convex
//!           | "M_"k "(" term ")" | "E_(" n "," k ")(" term ")"
//!           | "D_(" p "," r "," i ")(" term ")"
//! rel      := "<=" | "<" | ">=" | ">" | "=" | "!="
//! term     := ["-"] product (("+" | "-") product)*
//! product  := int "*" factor | factor
//! factor   := var | "one@" int | "0" | element | "(" term ")"
//! element  := "(" rational ("," rational)* ")"
//! subgroup := "stair[" sterm ("," sterm)* "]" | sterm ("+" sterm)*
//! sterm    := [int ["*"]] ("D"level | "G")
//! convex   := "D"level | "G"
//! ```
//!
//! Spec files hold one component per line, most significant first:
//!
//! ```text
//! component <name>: dims{<p>:<n|inf>,...} default <n|inf> [discrete] [realize Z | Q | Z_inv{p,...}]
//! omega_tower: <component line, with or without the "component <name>:" prefix>
//! ```
//!
//! `#` starts a comment. With `realize`, `dims` and `default` may be omitted;
//! if present they must agree with the realization.

use std::collections::{BTreeMap, BTreeSet};

use crate::arith::{is_prime, Rational};
use crate::error::{OagError, Result};
use crate::ext::ExtNat;
use crate::group::{ArchComponent, ConvexSubgroup, GroupElement, GroupSpec, PrimeDimProfile, RankOneRealization};
use crate::staircase::StaircaseSubgroup;

use super::ast::{Atom, Formula, Rel, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Lower(String),
    Upper(String),
    Sym(&'static str),
}

const SYMBOLS: &[&str] = &[
    "->", "<=", ">=", "==", "!=", "<", ">", "=", "+", "-", "*", "/", "(", ")", "[", "]", "{", "}", ",", ".", ":",
    "@",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse().map_err(|_| OagError::Parse {
                offset: start,
                message: "integer too large".into(),
            })?;
            out.push((Tok::Int(n), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = text[start..i].to_string();
            if c.is_ascii_uppercase() {
                out.push((Tok::Upper(word), start));
            } else {
                out.push((Tok::Lower(word), start));
            }
            continue;
        }
        for s in SYMBOLS {
            if text[i..].starts_with(s) {
                out.push((Tok::Sym(s), i));
                i += s.len();
                continue 'outer;
            }
        }
        if text[i..].starts_with('∞') {
            out.push((Tok::Lower("inf".into()), i));
            i += '∞'.len_utf8();
            continue;
        }
        return Err(OagError::Parse { offset: i, message: format!("unexpected character `{}`", text[i..].chars().next().unwrap()) });
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &["exists", "forall", "not", "and", "or", "mod", "true", "false", "one", "stair"];

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    spec: &'a GroupSpec,
    /// Furthest failure, reported when every alternative fails.
    best: Option<(usize, String)>,
}

type PResult<T> = std::result::Result<T, ()>;

impl<'a> Parser<'a> {
    fn new(text: &str, spec: &'a GroupSpec) -> Result<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0, end: text.len(), spec, best: None })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn fail<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        let off = self.offset();
        if self.best.as_ref().is_none_or(|(o, _)| off >= *o) {
            self.best = Some((off, message.into()));
        }
        Err(())
    }

    fn error(&self) -> OagError {
        let (offset, message) = self.best.clone().unwrap_or((self.offset(), "syntax error".into()));
        OagError::Parse { offset, message }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(format!("expected `{s}`"))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Lower(t)) if t == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.fail("expected an integer"),
        }
    }

    fn var(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Lower(w)) if !KEYWORDS.contains(&w.as_str()) && !w.contains('_') => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.fail("expected a variable"),
        }
    }

    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let save = self.pos;
        let r = f(self);
        if r.is_err() {
            self.pos = save;
        }
        r
    }

    // formulas

    fn formula(&mut self) -> PResult<Formula> {
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        let lhs = self.disj()?;
        if self.eat_sym("->") {
            let rhs = self.formula()?;
            return Ok(Formula::Or(vec![Formula::Not(Box::new(lhs)), rhs]));
        }
        Ok(lhs)
    }

    fn quantifier(&mut self) -> PResult<Option<Formula>> {
        let universal = if self.eat_word("exists") {
            false
        } else if self.eat_word("forall") {
            true
        } else {
            return Ok(None);
        };
        let v = self.var()?;
        self.expect_sym(".")?;
        let body = Box::new(self.formula()?);
        Ok(Some(if universal { Formula::Forall(v, body) } else { Formula::Exists(v, body) }))
    }

    fn disj(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conj()?];
        while self.eat_word("or") {
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat_word("and") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_word("not") {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if let Some(q) = self.quantifier()? {
            return Ok(q);
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat_word("true") {
            return Ok(Formula::True);
        }
        if self.eat_word("false") {
            return Ok(Formula::False);
        }
        if let Ok(a) = self.attempt(|p| p.atom()) {
            return Ok(a);
        }
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.fail("expected an atom, `not`, a quantifier or `(`")
    }

    fn atom(&mut self) -> PResult<Formula> {
        if let Some(Tok::Upper(w)) = self.peek().cloned() {
            if let Some(f) = self.derived_atom(&w)? {
                return Ok(f);
            }
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Some(Tok::Sym(s)) if ["<=", "<", ">=", ">", "=", "!=", "=="].contains(s) => *s,
            _ => return self.fail("expected a relation"),
        };
        self.pos += 1;
        let rhs = self.term()?;
        let d = lhs.sub(&rhs);
        Ok(match op {
            "<=" => Formula::Atom(Atom::Cmp(d, Rel::Le)),
            "<" => Formula::Atom(Atom::Cmp(d, Rel::Lt)),
            ">=" => Formula::Atom(Atom::Cmp(d.neg(), Rel::Le)),
            ">" => Formula::Atom(Atom::Cmp(d.neg(), Rel::Lt)),
            "=" => Formula::Atom(Atom::Cmp(d, Rel::Eq)),
            "!=" => Formula::Not(Box::new(Formula::Atom(Atom::Cmp(d, Rel::Eq)))),
            _ => {
                if !self.eat_word("mod") {
                    return self.fail("expected `mod` after `==`");
                }
                let h = self.subgroup()?;
                Formula::Atom(Atom::Cong(d, h))
            }
        })
    }

    fn paren_term(&mut self) -> PResult<Term> {
        self.expect_sym("(")?;
        let t = self.term()?;
        self.expect_sym(")")?;
        Ok(t)
    }

    fn derived_atom(&mut self, word: &str) -> PResult<Option<Formula>> {
        let index = |prefix: &str| word.strip_prefix(prefix).and_then(|s| s.parse::<u64>().ok());
        if let Some(n) = index("A_").or_else(|| index("F_")) {
            self.pos += 1;
            if n < 2 {
                return self.fail("jump index must be at least 2");
            }
            let term = self.paren_term()?;
            self.expect_sym("=")?;
            let target = self.convex()?;
            let atom = if word.starts_with('A') {
                Atom::AJump { n, term, target }
            } else {
                Atom::FJump { n, term, target }
            };
            return Ok(Some(Formula::Atom(atom)));
        }
        if let Some(k) = index("M_") {
            self.pos += 1;
            if k == 0 {
                return self.fail("M_k needs k > 0");
            }
            let term = self.paren_term()?;
            return Ok(Some(Formula::Atom(Atom::M { k, term })));
        }
        if word == "E_" || word == "D_" {
            self.pos += 1;
            self.expect_sym("(")?;
            let mut args = vec![self.int()?];
            while self.eat_sym(",") {
                args.push(self.int()?);
            }
            self.expect_sym(")")?;
            let term = self.paren_term()?;
            return Ok(Some(Formula::Atom(match (word, args.as_slice()) {
                ("E_", [n, k]) if *n >= 2 && *k > 0 => Atom::E { n: *n, k: *k, term },
                ("D_", [p, r, i]) if is_prime(*p) && 0 < *i && i < r => {
                    Atom::D { p: *p, r: *r as u32, i: *i as u32, term }
                }
                ("E_", _) => return self.fail("E_(n,k) needs n >= 2 and k > 0"),
                _ => return self.fail("D_(p,r,i) needs p prime and 0 < i < r"),
            })));
        }
        Ok(None)
    }

    // terms

    fn term(&mut self) -> PResult<Term> {
        let neg = self.eat_sym("-");
        let mut t = self.product()?;
        if neg {
            t = t.neg();
        }
        loop {
            if self.eat_sym("+") {
                t = t.add(&self.product()?);
            } else if self.eat_sym("-") {
                t = t.sub(&self.product()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn product(&mut self) -> PResult<Term> {
        if let (Some(Tok::Int(n)), Some(Tok::Sym("*"))) = (self.peek().cloned(), self.peek_at(1)) {
            self.pos += 2;
            let c = i64::try_from(n).or_else(|_| self.fail("coefficient too large"))?;
            return Ok(self.factor()?.scale(c));
        }
        self.factor()
    }

    fn factor(&mut self) -> PResult<Term> {
        match self.peek().cloned() {
            Some(Tok::Int(0)) => {
                self.pos += 1;
                Ok(Term::zero())
            }
            Some(Tok::Int(_)) => self.fail("integer constants must be written as element literals, e.g. (3)"),
            Some(Tok::Lower(w)) if w == "one" => {
                self.pos += 1;
                self.expect_sym("@")?;
                let l = self.int()? as usize;
                if l == 0 || l > self.spec.k() {
                    return self.fail(format!("one@{l} needs a level in 1..={}", self.spec.k()));
                }
                if !self.spec.quotient_is_discrete(l) {
                    return self.fail(format!("one@{l} needs G/D{l} discrete"));
                }
                Ok(Term::one_at(l))
            }
            Some(Tok::Lower(_)) => Ok(Term::var(&self.var()?)),
            Some(Tok::Sym("(")) => {
                if let Ok(g) = self.attempt(|p| p.element()) {
                    return Ok(Term::constant(g));
                }
                self.paren_term()
            }
            _ => self.fail("expected a term"),
        }
    }

    fn rational(&mut self) -> PResult<Rational> {
        let neg = self.eat_sym("-");
        let n = self.int()?;
        let d = if self.eat_sym("/") { self.int()? } else { 1 };
        if d == 0 {
            return self.fail("zero denominator");
        }
        let (n, d) = match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => (n, d),
            _ => return self.fail("rational out of range"),
        };
        Ok(Rational::new(if neg { -n } else { n }, d))
    }

    fn element(&mut self) -> PResult<GroupElement> {
        self.expect_sym("(")?;
        let mut coords = vec![self.rational()?];
        while self.eat_sym(",") {
            coords.push(self.rational()?);
        }
        self.expect_sym(")")?;
        if coords.len() != self.spec.k() {
            return self.fail(format!("element literal has {} coordinates, spec has {}", coords.len(), self.spec.k()));
        }
        match self.spec.element(coords.clone()) {
            Ok(g) => Ok(g),
            Err(OagError::NotComputable) => Ok(GroupElement::new(coords)),
            Err(e) => self.fail(e.to_string()),
        }
    }

    // subgroups

    fn level_word(&mut self) -> PResult<usize> {
        match self.peek().cloned() {
            Some(Tok::Upper(w)) if w == "G" => {
                self.pos += 1;
                Ok(0)
            }
            Some(Tok::Upper(w)) if w.starts_with('D') && w[1..].parse::<usize>().is_ok() => {
                let l: usize = w[1..].parse().unwrap();
                if l > self.spec.k() {
                    return self.fail(format!("level {l} exceeds {}", self.spec.k()));
                }
                self.pos += 1;
                Ok(l)
            }
            _ => self.fail("expected `D<level>` or `G`"),
        }
    }

    fn convex(&mut self) -> PResult<ConvexSubgroup> {
        Ok(ConvexSubgroup(self.level_word()?))
    }

    fn sterm(&mut self) -> PResult<(usize, u64)> {
        let m = match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                self.eat_sym("*");
                n
            }
            _ => 1,
        };
        Ok((self.level_word()?, m))
    }

    fn subgroup(&mut self) -> PResult<StaircaseSubgroup> {
        let mut terms = Vec::new();
        if self.eat_word("stair") {
            self.expect_sym("[")?;
            terms.push(self.sterm()?);
            while self.eat_sym(",") {
                terms.push(self.sterm()?);
            }
            self.expect_sym("]")?;
        } else {
            terms.push(self.sterm()?);
            while matches!(self.peek(), Some(Tok::Sym("+")))
                && matches!(self.peek_at(1), Some(Tok::Int(_)) | Some(Tok::Upper(_)))
            {
                self.pos += 1;
                terms.push(self.sterm()?);
            }
        }
        match StaircaseSubgroup::from_terms(self.spec, &terms, 0) {
            Ok(h) => Ok(h),
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if self.pos < self.toks.len() {
            return self.fail("unexpected trailing input");
        }
        Ok(())
    }
}

fn run<T>(text: &str, spec: &GroupSpec, f: impl FnOnce(&mut Parser) -> PResult<T>) -> Result<T> {
    let mut p = Parser::new(text, spec)?;
    match f(&mut p).and_then(|v| p.finish().map(|_| v)) {
        Ok(v) => Ok(v),
        Err(()) => Err(p.error()),
    }
}

/// Parses a formula and checks variable scoping: a quantifier may not rebind
/// a variable already bound by an enclosing quantifier.
pub fn parse_formula(text: &str, spec: &GroupSpec) -> Result<Formula> {
    let f = run(text, spec, |p| p.formula())?;
    check_scope(&f, &mut Vec::new())?;
    Ok(f)
}

fn check_scope(f: &Formula, bound: &mut Vec<String>) -> Result<()> {
    match f {
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            if bound.contains(v) {
                return Err(OagError::Scope(format!("variable `{v}` is bound twice")));
            }
            bound.push(v.clone());
            check_scope(g, bound)?;
            bound.pop();
            Ok(())
        }
        Formula::Not(g) => check_scope(g, bound),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| check_scope(g, bound)),
        _ => Ok(()),
    }
}

pub fn parse_term(text: &str, spec: &GroupSpec) -> Result<Term> {
    run(text, spec, |p| p.term())
}

pub fn parse_subgroup(text: &str, spec: &GroupSpec) -> Result<StaircaseSubgroup> {
    run(text, spec, |p| p.subgroup())
}

pub fn parse_element(text: &str, spec: &GroupSpec) -> Result<GroupElement> {
    run(text, spec, |p| p.element())
}

// spec files

fn spec_err(line: usize, message: impl Into<String>) -> OagError {
    OagError::Parse { offset: line, message: format!("line {}: {}", line + 1, message.into()) }
}

fn parse_ext(word: &str, line: usize) -> Result<ExtNat> {
    word.parse::<ExtNat>().map_err(|_| spec_err(line, format!("bad dimension `{word}`")))
}

fn parse_prime_list(body: &str, line: usize) -> Result<BTreeSet<u64>> {
    body.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let p: u64 = s.parse().map_err(|_| spec_err(line, format!("bad prime `{s}`")))?;
            if !is_prime(p) {
                return Err(spec_err(line, format!("{p} is not prime")));
            }
            Ok(p)
        })
        .collect()
}

fn parse_component(text: &str, default_name: &str, line: usize) -> Result<ArchComponent> {
    let mut rest = text.trim();
    let mut name = default_name.to_string();
    if let Some(r) = rest.strip_prefix("component") {
        let (n, r) = r
            .split_once(':')
            .ok_or_else(|| spec_err(line, "expected `component <name>:`"))?;
        name = n.trim().to_string();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(spec_err(line, format!("bad component name `{name}`")));
        }
        rest = r.trim();
    }
    let mut exceptions: Option<BTreeMap<u64, ExtNat>> = None;
    let mut default: Option<ExtNat> = None;
    let mut discrete = false;
    let mut realization: Option<RankOneRealization> = None;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("dims{") {
            let (body, r) = r.split_once('}').ok_or_else(|| spec_err(line, "unclosed `dims{`"))?;
            let mut map = BTreeMap::new();
            for entry in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (p, d) = entry
                    .split_once(':')
                    .ok_or_else(|| spec_err(line, format!("expected `p:dim`, found `{entry}`")))?;
                let p: u64 = p.trim().parse().map_err(|_| spec_err(line, format!("bad prime `{p}`")))?;
                if !is_prime(p) {
                    return Err(spec_err(line, format!("{p} is not prime")));
                }
                map.insert(p, parse_ext(d.trim(), line)?);
            }
            exceptions = Some(map);
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix("default") {
            let r = r.trim_start();
            let end = r.find(char::is_whitespace).unwrap_or(r.len());
            default = Some(parse_ext(&r[..end], line)?);
            rest = r[end..].trim_start();
        } else if let Some(r) = rest.strip_prefix("discrete") {
            discrete = true;
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix("realize") {
            let r = r.trim_start();
            if let Some(r2) = r.strip_prefix("Z_inv{") {
                let (body, r3) = r2.split_once('}').ok_or_else(|| spec_err(line, "unclosed `Z_inv{`"))?;
                realization = Some(RankOneRealization::Invertible(parse_prime_list(body, line)?));
                rest = r3.trim_start();
            } else if let Some(r2) = r.strip_prefix('Z') {
                realization = Some(RankOneRealization::integers());
                rest = r2.trim_start();
            } else if let Some(r2) = r.strip_prefix('Q') {
                realization = Some(RankOneRealization::All);
                rest = r2.trim_start();
            } else {
                return Err(spec_err(line, "expected `Z`, `Q` or `Z_inv{...}` after `realize`"));
            }
        } else {
            return Err(spec_err(line, format!("unexpected `{rest}`")));
        }
    }
    match realization {
        Some(real) => {
            let comp = ArchComponent::realized(&name, real);
            if exceptions.is_some() || default.is_some() {
                let stated = PrimeDimProfile::new(
                    exceptions.unwrap_or_default(),
                    default.unwrap_or(comp.dims().default_dim()),
                )
                .map_err(|e| spec_err(line, e.to_string()))?;
                if &stated != comp.dims() {
                    return Err(spec_err(line, format!("dims of `{name}` disagree with its realization")));
                }
            }
            if discrete && !comp.is_discrete() {
                return Err(spec_err(line, format!("`{name}` is marked discrete but realized as a dense group")));
            }
            Ok(comp)
        }
        None => {
            let default = default.ok_or_else(|| spec_err(line, "missing `default <n|inf>`"))?;
            let dims = PrimeDimProfile::new(exceptions.unwrap_or_default(), default)
                .map_err(|e| spec_err(line, e.to_string()))?;
            ArchComponent::abstract_component(&name, dims, discrete).map_err(|e| spec_err(line, e.to_string()))
        }
    }
}

/// Parses the group-spec text format.
pub fn parse_spec(text: &str) -> Result<GroupSpec> {
    let mut components = Vec::new();
    let mut tower = None;
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if tower.is_some() {
            return Err(spec_err(line_no, "omega_tower must be the last line"));
        }
        if let Some(r) = line.strip_prefix("omega_tower:") {
            tower = Some(parse_component(r, "tower", line_no)?);
        } else if line.starts_with("component") {
            components.push(parse_component(line, "", line_no)?);
        } else {
            return Err(spec_err(line_no, "expected `component` or `omega_tower:`"));
        }
    }
    Ok(GroupSpec::new(components, tower))
}

/// Prints a spec in the same text format.
pub fn print_spec(spec: &GroupSpec) -> String {
    fn line(c: &ArchComponent) -> String {
        let dims: Vec<String> = c.dims().exceptions().iter().map(|(p, d)| format!("{p}:{d}")).collect();
        let mut s = format!("dims{{{}}} default {}", dims.join(","), c.dims().default_dim());
        if c.is_discrete() {
            s.push_str(" discrete");
        }
        match c.realization() {
            Some(RankOneRealization::All) => s.push_str(" realize Q"),
            Some(RankOneRealization::Invertible(ps)) if ps.is_empty() => s.push_str(" realize Z"),
            Some(RankOneRealization::Invertible(ps)) => {
                let ps: Vec<String> = ps.iter().map(u64::to_string).collect();
                s.push_str(&format!(" realize Z_inv{{{}}}", ps.join(",")));
            }
            None => {}
        }
        s
    }
    let mut out = String::new();
    for c in spec.components() {
        out.push_str(&format!("component {}: {}\n", c.name, line(c)));
    }
    if let Some(t) = spec.omega_tower() {
        out.push_str(&format!("omega_tower: component {}: {}\n", t.name, line(t)));
    }
    out
}
