//! Group specifications: finite lexicographic products of archimedean components,
//! their convex subgroups, elements, and the jump operators `A`, `B`, `A_n`,
//! `B_n`, `F_n`.
//!
//! Coordinates are numbered `1..=k`, coordinate 1 being the most significant.
//! The convex subgroups are the tails `CS(ℓ)`: elements vanishing at coordinates
//! `1..=ℓ`, so `CS(0) = G` and `CS(k) = {0}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::arith::{denominator_primes, prime_divisors, Rational};
use crate::error::{OagError, Result};
use crate::ext::ExtNat;

/// `dim_p` for every prime: finitely many exceptions plus a default value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeDimProfile {
    exceptions: BTreeMap<u64, ExtNat>,
    default: ExtNat,
}

impl PrimeDimProfile {
    pub fn new(exceptions: BTreeMap<u64, ExtNat>, default: ExtNat) -> Result<Self> {
        if let Some(p) = exceptions.keys().find(|&&p| !crate::arith::is_prime(p)) {
            return Err(OagError::Precondition(format!("dims key {p} is not prime")));
        }
        let exceptions = exceptions.into_iter().filter(|(_, v)| *v != default).collect();
        Ok(PrimeDimProfile { exceptions, default })
    }

    pub fn uniform(value: ExtNat) -> Self {
        PrimeDimProfile { exceptions: BTreeMap::new(), default: value }
    }

    pub fn get(&self, p: u64) -> ExtNat {
        self.exceptions.get(&p).copied().unwrap_or(self.default)
    }

    pub fn default_dim(&self) -> ExtNat {
        self.default
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, ExtNat> {
        &self.exceptions
    }
}

/// A concrete subgroup of the rationals: `Z[1/p : p ∈ invertible]`, or all of `Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RankOneRealization {
    Invertible(BTreeSet<u64>),
    All,
}

impl RankOneRealization {
    pub fn integers() -> Self {
        RankOneRealization::Invertible(BTreeSet::new())
    }

    pub fn is_invertible(&self, p: u64) -> bool {
        match self {
            RankOneRealization::All => true,
            RankOneRealization::Invertible(set) => set.contains(&p),
        }
    }

    pub fn profile(&self) -> PrimeDimProfile {
        match self {
            RankOneRealization::All => PrimeDimProfile::uniform(ExtNat::ZERO),
            RankOneRealization::Invertible(set) => PrimeDimProfile::new(
                set.iter().map(|&p| (p, ExtNat::ZERO)).collect(),
                ExtNat::ONE,
            )
            .expect("invertible primes are prime"),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, RankOneRealization::Invertible(s) if s.is_empty())
    }

    pub fn contains(&self, q: &Rational) -> bool {
        denominator_primes(q).into_iter().all(|p| self.is_invertible(p))
    }
}

/// One archimedean factor of the lexicographic product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArchComponent {
    pub name: String,
    dims: PrimeDimProfile,
    discrete: bool,
    realization: Option<RankOneRealization>,
}

impl ArchComponent {
    /// A classification-only component with the given profile.
    pub fn abstract_component(name: &str, dims: PrimeDimProfile, discrete: bool) -> Result<Self> {
        if discrete && (dims.default_dim() != ExtNat::ONE || !dims.exceptions().is_empty()) {
            return Err(OagError::Precondition(format!(
                "component `{name}` is discrete, so its dims must be default 1 with no exceptions"
            )));
        }
        Ok(ArchComponent { name: name.to_string(), dims, discrete, realization: None })
    }

    pub fn realized(name: &str, realization: RankOneRealization) -> Self {
        ArchComponent {
            name: name.to_string(),
            dims: realization.profile(),
            discrete: realization.is_discrete(),
            realization: Some(realization),
        }
    }

    pub fn integers(name: &str) -> Self {
        Self::realized(name, RankOneRealization::integers())
    }

    pub fn rationals(name: &str) -> Self {
        Self::realized(name, RankOneRealization::All)
    }

    pub fn dims(&self) -> &PrimeDimProfile {
        &self.dims
    }

    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn realization(&self) -> Option<&RankOneRealization> {
        self.realization.as_ref()
    }

    pub fn dim(&self, p: u64) -> ExtNat {
        self.dims.get(p)
    }

    pub fn is_p_divisible(&self, p: u64) -> bool {
        self.dims.get(p) == ExtNat::ZERO
    }

    /// `nA = A` iff `dim_p(A) = 0` for every prime `p | n`.
    pub fn is_n_divisible(&self, n: u64) -> bool {
        prime_divisors(n).into_iter().all(|p| self.is_p_divisible(p))
    }

    /// Removes from `m` the prime powers that act invertibly on this component,
    /// so that `reduce(m)·A = m·A`.
    pub fn reduce_multiplier(&self, m: u64) -> u64 {
        if m == 0 {
            return 0;
        }
        crate::arith::factorize(m)
            .into_iter()
            .filter(|&(p, _)| !self.is_p_divisible(p))
            .map(|(p, e)| p.pow(e))
            .product()
    }

    /// Membership `q ∈ m·A` for a realized component (`m = 0` means `{0}`).
    pub fn in_multiple(&self, q: &Rational, m: u64) -> bool {
        let Some(real) = &self.realization else {
            return false;
        };
        if m == 0 {
            return q.is_zero();
        }
        real.contains(&(*q / Rational::from_integer(m as i64)))
    }
}

/// A finite lexicographic product, most significant component first, with an
/// optional classification-only ω-tower of copies of a template component
/// placed below all listed components.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupSpec {
    components: Vec<ArchComponent>,
    omega_tower: Option<ArchComponent>,
}

impl GroupSpec {
    pub fn new(components: Vec<ArchComponent>, omega_tower: Option<ArchComponent>) -> Self {
        GroupSpec { components, omega_tower }
    }

    pub fn trivial() -> Self {
        GroupSpec::default()
    }

    /// Convenience constructor from realizations, e.g. `[Z, Q, Z]`.
    pub fn from_realizations(reals: Vec<RankOneRealization>) -> Self {
        let components = reals
            .into_iter()
            .enumerate()
            .map(|(i, r)| ArchComponent::realized(&format!("c{}", i + 1), r))
            .collect();
        GroupSpec { components, omega_tower: None }
    }

    pub fn components(&self) -> &[ArchComponent] {
        &self.components
    }

    /// Component at coordinate `i` (1-based).
    pub fn component(&self, i: usize) -> &ArchComponent {
        &self.components[i - 1]
    }

    pub fn omega_tower(&self) -> Option<&ArchComponent> {
        self.omega_tower.as_ref()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.components.is_empty() && self.omega_tower.is_none()
    }

    pub fn is_computable(&self) -> bool {
        self.omega_tower.is_none() && self.components.iter().all(|c| c.realization.is_some())
    }

    pub fn require_computable(&self) -> Result<()> {
        if self.is_computable() {
            Ok(())
        } else {
            Err(OagError::NotComputable)
        }
    }

    /// Lexicographic sum with `self` more significant than `lower`.
    pub fn concat(&self, lower: &GroupSpec) -> Result<GroupSpec> {
        if self.omega_tower.is_some() {
            return Err(OagError::Precondition(
                "the ω-tower must stay the least significant part".into(),
            ));
        }
        let mut components = self.components.clone();
        components.extend(lower.components.iter().cloned());
        Ok(GroupSpec { components, omega_tower: lower.omega_tower.clone() })
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.k() {
            Err(OagError::BadLevel { level, k: self.k() })
        } else {
            Ok(())
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement { coords: vec![Rational::zero(); self.k()] }
    }

    /// Validates coordinates against the component realizations.
    pub fn element(&self, coords: Vec<Rational>) -> Result<GroupElement> {
        self.require_computable()?;
        if coords.len() != self.k() {
            return Err(OagError::InvalidElement(format!(
                "expected {} coordinates, found {}",
                self.k(),
                coords.len()
            )));
        }
        for (i, q) in coords.iter().enumerate() {
            let real = self.components[i].realization.as_ref().expect("computable");
            if !real.contains(q) {
                return Err(OagError::InvalidElement(format!(
                    "coordinate {} = {} is not in component `{}`",
                    i + 1,
                    q,
                    self.components[i].name
                )));
            }
        }
        Ok(GroupElement { coords })
    }

    pub fn element_from_ints(&self, coords: &[i64]) -> Result<GroupElement> {
        self.element(coords.iter().map(|&c| Rational::from_integer(c)).collect())
    }

    /// The unit vector at coordinate `i`; the lift of `1_Δ` for `Δ = CS(i)`.
    pub fn unit(&self, i: usize) -> GroupElement {
        let mut coords = vec![Rational::zero(); self.k()];
        coords[i - 1] = Rational::from_integer(1);
        GroupElement { coords }
    }

    fn same_length(&self, a: &GroupElement) -> Result<()> {
        if a.coords.len() != self.k() {
            return Err(OagError::SpecMismatch(format!(
                "element has {} coordinates, spec has {}",
                a.coords.len(),
                self.k()
            )));
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.same_length(a)?;
        self.same_length(b)?;
        Ok(a.add(b))
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.same_length(a)?;
        Ok(a.neg())
    }

    pub fn scalar_mul(&self, n: i64, a: &GroupElement) -> Result<GroupElement> {
        self.same_length(a)?;
        Ok(a.scale(n))
    }

    pub fn compare(&self, a: &GroupElement, b: &GroupElement) -> Result<std::cmp::Ordering> {
        self.same_length(a)?;
        self.same_length(b)?;
        Ok(a.cmp(b))
    }

    /// `G/CS(ℓ)` is discrete iff its least significant factor (coordinate `ℓ`) is.
    pub fn quotient_is_discrete(&self, level: usize) -> bool {
        level >= 1 && level <= self.k() && self.component(level).is_discrete()
    }

    /// `A(g)`: the largest convex subgroup not containing `g`.
    pub fn a_of(&self, g: &GroupElement) -> Jump {
        match g.leading_index() {
            None => Jump::Empty,
            Some(i) => Jump::At(ConvexSubgroup(i)),
        }
    }

    /// `B(g)`: the smallest convex subgroup containing `g` (`B(0) = {0}`).
    pub fn b_of(&self, g: &GroupElement) -> ConvexSubgroup {
        match g.leading_index() {
            None => ConvexSubgroup(self.k()),
            Some(i) => ConvexSubgroup(i - 1),
        }
    }

    /// Level of the `n`-regular jump generated by elements with leading index `i`.
    pub fn a_n_level(&self, i: usize, n: u64) -> usize {
        (i..=self.k())
            .find(|&m| !self.component(m).is_n_divisible(n))
            .unwrap_or(self.k())
    }

    /// `A_n(g)`: the smallest convex `C` with `B(g)/C` `n`-regular.
    pub fn a_n_of(&self, g: &GroupElement, n: u64) -> Jump {
        assert!(n >= 2, "A_n needs n >= 2");
        match g.leading_index() {
            None => Jump::Empty,
            Some(i) => Jump::At(ConvexSubgroup(self.a_n_level(i, n))),
        }
    }

    /// `B_n(g)`: the largest convex `C` with `C/A(g)` `n`-regular (`B_n(0) = {0}`).
    pub fn b_n_of(&self, g: &GroupElement, n: u64) -> ConvexSubgroup {
        assert!(n >= 2, "B_n needs n >= 2");
        match g.leading_index() {
            None => ConvexSubgroup(self.k()),
            Some(i) => ConvexSubgroup(
                (1..i).rev().find(|&m| !self.component(m).is_n_divisible(n)).unwrap_or(0),
            ),
        }
    }

    /// `F_n(g)`: the largest convex `C` with `C ∩ (g + nG) = ∅`, or `Empty` when `g ∈ nG`.
    pub fn f_n_of(&self, g: &GroupElement, n: u64) -> Jump {
        assert!(n >= 2, "F_n needs n >= 2");
        match (1..=self.k()).find(|&i| !self.component(i).in_multiple(&g.coords[i - 1], n)) {
            None => Jump::Empty,
            Some(i) => Jump::At(ConvexSubgroup(i)),
        }
    }

    /// Whether `g ∈ CS(ℓ)`.
    pub fn in_convex(&self, g: &GroupElement, c: ConvexSubgroup) -> bool {
        g.coords[..c.0].iter().all(Zero::is_zero)
    }
}

/// A convex subgroup `CS(level)`. Larger levels are smaller subgroups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConvexSubgroup(pub usize);

impl ConvexSubgroup {
    pub fn level(self) -> usize {
        self.0
    }

    /// Inclusion `self ⊆ other`.
    pub fn is_subset_of(self, other: ConvexSubgroup) -> bool {
        self.0 >= other.0
    }
}

impl fmt::Display for ConvexSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.0)
    }
}

/// Value of a jump operator: a convex subgroup or the `∅` marker used for
/// `A_n(0)` and for `F_n(g)` with `g ∈ nG`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Jump {
    Empty,
    At(ConvexSubgroup),
}

impl Jump {
    pub fn subgroup(self) -> Option<ConvexSubgroup> {
        match self {
            Jump::Empty => None,
            Jump::At(c) => Some(c),
        }
    }

    /// Inclusion with `∅` below everything.
    pub fn is_subset_of(self, other: Jump) -> bool {
        match (self, other) {
            (Jump::Empty, _) => true,
            (Jump::At(_), Jump::Empty) => false,
            (Jump::At(a), Jump::At(b)) => a.is_subset_of(b),
        }
    }
}

impl fmt::Display for Jump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Jump::Empty => write!(f, "empty"),
            Jump::At(c) => write!(f, "{c}"),
        }
    }
}

/// An element of a computable spec: one exact rational per coordinate.
/// The derived order is lexicographic, most significant coordinate first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub coords: Vec<Rational>,
}

impl GroupElement {
    pub fn new(coords: Vec<Rational>) -> Self {
        GroupElement { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        GroupElement { coords: coords.iter().map(|&c| Rational::from_integer(c)).collect() }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_positive(&self) -> bool {
        self.coords.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_positive())
    }

    /// 1-based index of the most significant nonzero coordinate.
    pub fn leading_index(&self) -> Option<usize> {
        self.coords.iter().position(|c| !c.is_zero()).map(|i| i + 1)
    }

    pub fn add(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement { coords: self.coords.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, n: i64) -> GroupElement {
        let n = Rational::from_integer(n);
        GroupElement { coords: self.coords.iter().map(|a| a * n).collect() }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Shared handle used by long-lived structures.
pub type SpecRef = Arc<GroupSpec>;
