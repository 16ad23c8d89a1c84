//! Theory-level invariants of a spec: `p`-dimensions, regular jumps, infinite
//! jumps, dp-rank and the strong / dp-minimal classification.
//!
//! A divisible ω-tower behaves like one extra divisible component below the
//! listed ones; its bottom `{0}` is reported at level `k + 1`.

use std::collections::BTreeSet;
use std::fmt;

use crate::arith::{first_primes, prime_divisors};
use crate::error::{OagError, Result};
use crate::ext::ExtNat;
use crate::group::{ConvexSubgroup, GroupSpec, PrimeDimProfile};

/// `RJ_n(G)` listed in increasing subgroup order (descending level).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularJumpSet {
    pub n: u64,
    pub jumps: Vec<ConvexSubgroup>,
    /// Set when an ω-tower that is not `n`-divisible contributes infinitely
    /// many jumps below the listed ones.
    pub unbounded: bool,
}

impl RegularJumpSet {
    pub fn rank(&self) -> ExtNat {
        if self.unbounded {
            ExtNat::Inf
        } else {
            ExtNat::Fin(self.jumps.len() as u64)
        }
    }

    /// The next jump strictly above `level`, if any.
    pub fn successor(&self, level: usize) -> Option<ConvexSubgroup> {
        self.jumps.iter().copied().find(|c| c.0 < level)
    }

    pub fn contains(&self, c: ConvexSubgroup) -> bool {
        self.jumps.contains(&c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Trivial,
    DpMinimal,
    StrongFiniteRank,
    NotStrong,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Trivial => "trivial",
            Kind::DpMinimal => "dp_minimal",
            Kind::StrongFiniteRank => "strong_finite_rank",
            Kind::NotStrong => "not_strong",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSummary {
    pub p: u64,
    pub dim: ExtNat,
    pub jumps: RegularJumpSet,
    pub infinite_jumps: Vec<ConvexSubgroup>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub kind: Kind,
    pub dp_rank: ExtNat,
    pub reason: String,
    pub primes: Vec<PrimeSummary>,
}

/// Per-level profiles, with a divisible ω-tower appended as a virtual level.
fn levels(spec: &GroupSpec) -> Vec<PrimeDimProfile> {
    let mut out: Vec<PrimeDimProfile> = spec.components().iter().map(|c| c.dims().clone()).collect();
    if let Some(t) = spec.omega_tower() {
        if is_fully_divisible(t.dims()) {
            out.push(t.dims().clone());
        }
    }
    out
}

fn is_fully_divisible(d: &PrimeDimProfile) -> bool {
    d.default_dim() == ExtNat::ZERO && d.exceptions().values().all(|&v| v == ExtNat::ZERO)
}

fn tower_blocks(spec: &GroupSpec, p: u64) -> bool {
    spec.omega_tower().is_some_and(|t| t.dims().get(p) != ExtNat::ZERO)
}

/// `dim_p(CS(upper)/CS(lower))`: the sum of component dimensions at levels
/// `upper+1 ..= lower`.
pub fn dim_p(spec: &GroupSpec, p: u64, upper: usize, lower: usize) -> Result<ExtNat> {
    let lv = levels(spec);
    if upper > lower || lower > lv.len() {
        return Err(OagError::BadLevel { level: lower.max(upper), k: lv.len() });
    }
    Ok(lv[upper..lower].iter().map(|d| d.get(p)).sum())
}

/// `dim_p(G)`, including an ω-tower.
pub fn dim_p_group(spec: &GroupSpec, p: u64) -> ExtNat {
    let listed: ExtNat = spec.components().iter().map(|c| c.dim(p)).sum();
    if tower_blocks(spec, p) {
        ExtNat::Inf
    } else {
        listed
    }
}

/// `RJ_p(G)` for a prime `p`.
fn prime_jumps(spec: &GroupSpec, p: u64) -> RegularJumpSet {
    let lv = levels(spec);
    let bottom = lv.len();
    let mut set: BTreeSet<usize> =
        (1..=bottom).filter(|&j| lv[j - 1].get(p) != ExtNat::ZERO).collect();
    if bottom > 0 {
        set.insert(bottom);
    }
    RegularJumpSet {
        n: p,
        jumps: set.into_iter().rev().map(ConvexSubgroup).collect(),
        unbounded: tower_blocks(spec, p),
    }
}

/// `RJ_n(G) = ⋃_{p | n} RJ_p(G)`.
pub fn regular_jumps(spec: &GroupSpec, n: u64) -> Result<RegularJumpSet> {
    if n < 2 {
        return Err(OagError::Precondition("regular jumps need n >= 2".into()));
    }
    let mut set = BTreeSet::new();
    let mut unbounded = false;
    for p in prime_divisors(n) {
        let r = prime_jumps(spec, p);
        set.extend(r.jumps.iter().map(|c| c.0));
        unbounded |= r.unbounded;
    }
    Ok(RegularJumpSet { n, jumps: set.into_iter().rev().map(ConvexSubgroup).collect(), unbounded })
}

/// `RJ_p^∞(G)`: jumps whose quotient by the next jump up (or `G`) has
/// infinite `p`-dimension.
pub fn infinite_jumps(spec: &GroupSpec, p: u64) -> Vec<ConvexSubgroup> {
    let rj = prime_jumps(spec, p);
    rj.jumps
        .iter()
        .filter(|c| {
            let upper = rj.successor(c.0).map_or(0, |s| s.0);
            dim_p(spec, p, upper, c.0).expect("levels in range") == ExtNat::Inf
        })
        .copied()
        .collect()
}

/// Primes at which some component deviates from its default, together with the
/// first few primes, so every distinct behaviour appears in reports.
pub fn relevant_primes(spec: &GroupSpec) -> Vec<u64> {
    let mut set: BTreeSet<u64> = first_primes(3).into_iter().collect();
    for c in spec.components().iter().chain(spec.omega_tower()) {
        set.extend(c.dims().exceptions().keys());
    }
    set.into_iter().collect()
}

fn obstruction(spec: &GroupSpec) -> Option<String> {
    if let Some(t) = spec.omega_tower() {
        if !is_fully_divisible(t.dims()) {
            return Some(format!(
                "omega_tower template `{}` is not divisible, so some RJ_p is infinite",
                t.name
            ));
        }
    }
    spec.components()
        .iter()
        .find(|c| c.dims().default_dim() == ExtNat::Inf)
        .map(|c| format!("component `{}` has dim_p = inf for infinitely many primes", c.name))
}

pub fn dp_rank(spec: &GroupSpec) -> ExtNat {
    if spec.is_trivial() {
        return ExtNat::ZERO;
    }
    if obstruction(spec).is_some() {
        return ExtNat::Inf;
    }
    let infinite: u64 = relevant_primes(spec)
        .into_iter()
        .map(|p| infinite_jumps(spec, p).len() as u64)
        .sum();
    ExtNat::Fin(1 + infinite)
}

pub fn classify(spec: &GroupSpec) -> Classification {
    let primes = relevant_primes(spec)
        .into_iter()
        .map(|p| PrimeSummary {
            p,
            dim: dim_p_group(spec, p),
            jumps: prime_jumps(spec, p),
            infinite_jumps: infinite_jumps(spec, p),
        })
        .collect();
    let dp_rank = dp_rank(spec);
    let (kind, reason) = if spec.is_trivial() {
        (Kind::Trivial, "trivial group; the rank formula needs G nontrivial".to_string())
    } else if let Some(r) = obstruction(spec) {
        (Kind::NotStrong, r)
    } else if dp_rank == ExtNat::ONE {
        (Kind::DpMinimal, "every dim_p is finite".to_string())
    } else {
        (Kind::StrongFiniteRank, "finitely many infinite jumps".to_string())
    };
    Classification { kind, dp_rank, reason, primes }
}

/// Counts the directed families needed to express every one-variable formula:
/// one order family, plus one congruence family per class of `p`-jumps of
/// infinite codimension, where jumps separated by a finite `p`-dimension are
/// merged.
pub fn vca_number(spec: &GroupSpec) -> ExtNat {
    if spec.is_trivial() {
        return ExtNat::ZERO;
    }
    if obstruction(spec).is_some() {
        return ExtNat::Inf;
    }
    let mut families = 1u64;
    for p in relevant_primes(spec) {
        // Jumps of infinite codimension define non-NA congruences; two of them
        // give one family when the p-dimension between them is finite.
        let jumps = prime_jumps(spec, p);
        let mut open: Vec<usize> = jumps
            .jumps
            .iter()
            .map(|c| c.0)
            .filter(|&l| dim_p(spec, p, 0, l).expect("level in range") == ExtNat::Inf)
            .collect();
        open.sort_unstable();
        let mut representative: Option<usize> = None;
        for l in open {
            let merged = representative
                .is_some_and(|r| dim_p(spec, p, r, l).expect("ordered levels").is_finite());
            if !merged {
                families += 1;
                representative = Some(l);
            }
        }
    }
    ExtNat::Fin(families)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ArchComponent, RankOneRealization as R};

    fn inf_at(name: &str, p: u64) -> ArchComponent {
        ArchComponent::abstract_component(
            name,
            PrimeDimProfile::new([(p, ExtNat::Inf)].into_iter().collect(), ExtNat::ONE).unwrap(),
            false,
        )
        .unwrap()
    }

    fn zqz() -> GroupSpec {
        GroupSpec::from_realizations(vec![R::integers(), R::All, R::integers()])
    }

    #[test]
    fn dims_between_levels() {
        let g = zqz();
        assert_eq!(dim_p(&g, 2, 0, 3).unwrap(), ExtNat::Fin(2));
        assert_eq!(dim_p(&g, 2, 2, 2).unwrap(), ExtNat::ZERO);
        assert!(dim_p(&g, 2, 2, 1).is_err());
        let one = GroupSpec::new(vec![inf_at("a", 2)], None);
        assert_eq!(dim_p(&one, 2, 0, 1).unwrap(), ExtNat::Inf);
    }

    #[test]
    fn jumps_of_small_specs() {
        let g = zqz();
        assert_eq!(regular_jumps(&g, 2).unwrap().jumps, vec![ConvexSubgroup(3), ConvexSubgroup(1)]);
        let q = GroupSpec::from_realizations(vec![R::All]);
        assert_eq!(regular_jumps(&q, 6).unwrap().jumps, vec![ConvexSubgroup(1)]);
        assert!(regular_jumps(&GroupSpec::trivial(), 2).unwrap().jumps.is_empty());
    }

    #[test]
    fn infinite_jump_examples() {
        let one = GroupSpec::new(vec![inf_at("a", 2)], None);
        assert_eq!(infinite_jumps(&one, 2), vec![ConvexSubgroup(1)]);
        assert!(infinite_jumps(&zqz(), 2).is_empty());
        let q = GroupSpec::from_realizations(vec![R::All]);
        assert!(infinite_jumps(&q, 2).is_empty());
    }

    #[test]
    fn ranks_and_kinds() {
        let z = GroupSpec::from_realizations(vec![R::integers()]);
        let c = classify(&z);
        assert_eq!((c.kind, c.dp_rank), (Kind::DpMinimal, ExtNat::ONE));

        let two = GroupSpec::new(vec![inf_at("a", 2), inf_at("b", 3)], None);
        assert_eq!(classify(&two).kind, Kind::StrongFiniteRank);
        assert_eq!(dp_rank(&two), ExtNat::Fin(3));
        assert_eq!(vca_number(&two), ExtNat::Fin(3));

        let wild = GroupSpec::new(
            vec![ArchComponent::abstract_component("w", PrimeDimProfile::uniform(ExtNat::Inf), false).unwrap()],
            None,
        );
        assert_eq!(classify(&wild).kind, Kind::NotStrong);
        assert_eq!(dp_rank(&wild), ExtNat::Inf);

        let triv = classify(&GroupSpec::trivial());
        assert_eq!((triv.kind, triv.dp_rank), (Kind::Trivial, ExtNat::ZERO));
        assert_eq!(vca_number(&GroupSpec::trivial()), ExtNat::ZERO);
    }

    #[test]
    fn omega_tower_cases() {
        let tower = GroupSpec::new(vec![ArchComponent::integers("z")], Some(ArchComponent::integers("t")));
        assert_eq!(classify(&tower).kind, Kind::NotStrong);
        assert!(regular_jumps(&tower, 2).unwrap().unbounded);
        let soft = GroupSpec::new(vec![ArchComponent::integers("z")], Some(ArchComponent::rationals("t")));
        assert_eq!(classify(&soft).kind, Kind::DpMinimal);
        assert_eq!(regular_jumps(&soft, 2).unwrap().jumps, vec![ConvexSubgroup(2), ConvexSubgroup(1)]);
    }

    #[test]
    fn same_prime_twice_counts_twice() {
        let g = GroupSpec::new(vec![inf_at("a", 2), ArchComponent::integers("z"), inf_at("b", 2)], None);
        assert_eq!(infinite_jumps(&g, 2).len(), 2);
        assert_eq!(dp_rank(&g), ExtNat::Fin(3));
        assert_eq!(vca_number(&g), ExtNat::Fin(3));
    }
}
