//! Staircase subgroups `Δ₁ + m₁Δ₂ + … + m_tG`.
//!
//! Since every convex subgroup is a coordinate tail, a staircase is the product
//! of per-coordinate subgroups `t_i·A_i` where the multipliers form a
//! divisibility chain read from the bottom (`t_{i+1} | t_i`); `t_i = 0` stands
//! for `{0}`, so zeros form a prefix. Sums and intersections are then
//! coordinatewise gcd and lcm.
//!
//! Canonical form: primes acting invertibly on a coordinate are stripped, then
//! the chain is rebuilt bottom-up with `t_i = lcm(r_i, t_{i+1})`. Two
//! staircases over one spec are equal iff their canonical vectors are.

use std::fmt;

use crate::arith::{factorize, gcd, lcm, valuation};
use crate::error::{OagError, Result};
use crate::ext::ExtNat;
use crate::group::{GroupElement, GroupSpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StaircaseSubgroup {
    mult: Vec<u64>,
}

impl StaircaseSubgroup {
    /// Builds from arbitrary per-coordinate multipliers. Fails when the reduced
    /// multipliers do not admit a divisibility chain.
    pub fn from_multipliers(spec: &GroupSpec, raw: Vec<u64>) -> Result<Self> {
        if raw.len() != spec.k() {
            return Err(OagError::SpecMismatch(format!(
                "{} multipliers for {} components",
                raw.len(),
                spec.k()
            )));
        }
        let reduced: Vec<u64> = raw
            .iter()
            .enumerate()
            .map(|(i, &m)| spec.component(i + 1).reduce_multiplier(m))
            .collect();
        let mut mult = vec![0; raw.len()];
        let mut below = 1;
        for i in (0..raw.len()).rev() {
            let t = lcm(reduced[i], below);
            if spec.component(i + 1).reduce_multiplier(t) != reduced[i] {
                return Err(OagError::Precondition(format!(
                    "multipliers {raw:?} do not form a staircase"
                )));
            }
            mult[i] = t;
            below = t;
        }
        Ok(StaircaseSubgroup { mult })
    }

    /// `Σ m·CS(ℓ)` over `terms`, plus `tail·G` (`tail = 0` drops the `G` term).
    pub fn from_terms(spec: &GroupSpec, terms: &[(usize, u64)], tail: u64) -> Result<Self> {
        let k = spec.k();
        let mut raw = vec![0u64; k];
        for &(level, m) in terms.iter().chain(std::iter::once(&(0, tail))) {
            spec.check_level(level)?;
            for r in raw.iter_mut().skip(level) {
                *r = gcd(*r, m);
            }
        }
        Self::from_multipliers(spec, raw)
    }

    /// The convex subgroup `CS(level)`.
    pub fn convex(spec: &GroupSpec, level: usize) -> Result<Self> {
        Self::from_terms(spec, &[(level, 1)], 0)
    }

    /// `CS(level) + n·G`.
    pub fn convex_plus(spec: &GroupSpec, level: usize, n: u64) -> Result<Self> {
        Self::from_terms(spec, &[(level, 1)], n)
    }

    /// `n·G`.
    pub fn multiple(spec: &GroupSpec, n: u64) -> Self {
        Self::from_terms(spec, &[], n).expect("nG is a staircase")
    }

    pub fn whole(spec: &GroupSpec) -> Self {
        StaircaseSubgroup { mult: vec![1; spec.k()] }
    }

    pub fn trivial(spec: &GroupSpec) -> Self {
        StaircaseSubgroup { mult: vec![0; spec.k()] }
    }

    /// Canonical per-coordinate multipliers, most significant first.
    pub fn multipliers(&self) -> &[u64] {
        &self.mult
    }

    pub fn k(&self) -> usize {
        self.mult.len()
    }

    /// Number of leading coordinates forced to zero: the subgroup lies in `CS(z)`.
    pub fn zero_prefix(&self) -> usize {
        self.mult.iter().take_while(|&&m| m == 0).count()
    }

    pub fn is_whole(&self) -> bool {
        self.mult.iter().all(|&m| m == 1)
    }

    pub fn is_trivial(&self) -> bool {
        self.mult.iter().all(|&m| m == 0)
    }

    /// Convex iff every multiplier is `0` or `1`.
    pub fn as_convex(&self) -> Option<usize> {
        if self.mult.iter().all(|&m| m <= 1) {
            Some(self.zero_prefix())
        } else {
            None
        }
    }

    /// The runs of equal multipliers, bottom first: `(ℓ, m)` means `m·CS(ℓ)`.
    /// Zero runs are dropped.
    pub fn terms(&self) -> Vec<(usize, u64)> {
        let mut out: Vec<(usize, u64)> = Vec::new();
        for i in (0..self.k()).rev() {
            let m = self.mult[i];
            if m == 0 {
                break;
            }
            match out.last_mut() {
                Some(last) if last.1 == m => last.0 = i,
                _ => out.push((i, m)),
            }
        }
        out
    }

    /// Largest multiplier of the `G` summand, i.e. the top multiplier when the
    /// prefix is nonzero, else `0`.
    pub fn tail_modulus(&self) -> u64 {
        self.mult.first().copied().unwrap_or(0)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.k() != other.k() {
            return Err(OagError::SpecMismatch(format!(
                "staircases over {} and {} components",
                self.k(),
                other.k()
            )));
        }
        Ok(())
    }

    pub fn sum(&self, spec: &GroupSpec, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let raw = self.mult.iter().zip(&other.mult).map(|(&a, &b)| gcd(a, b)).collect();
        Self::from_multipliers(spec, raw)
    }

    pub fn intersect(&self, spec: &GroupSpec, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let raw = self.mult.iter().zip(&other.mult).map(|(&a, &b)| lcm(a, b)).collect();
        Self::from_multipliers(spec, raw)
    }

    /// `m·H`.
    pub fn scaled(&self, spec: &GroupSpec, m: u64) -> Result<Self> {
        Self::from_multipliers(spec, self.mult.iter().map(|&t| t * m).collect())
    }

    /// The part of `H` seen by `primes`: each multiplier keeps only those
    /// prime factors. `H` is the intersection of its parts over coprime sets.
    pub fn prime_part(&self, spec: &GroupSpec, primes: &[u64]) -> Result<Self> {
        let raw = self
            .mult
            .iter()
            .map(|&t| {
                if t == 0 {
                    0
                } else {
                    primes.iter().map(|&p| p.pow(valuation(t, p))).product()
                }
            })
            .collect();
        Self::from_multipliers(spec, raw)
    }

    /// `self ⊆ other`.
    pub fn is_subgroup_of(&self, spec: &GroupSpec, other: &Self) -> Result<bool> {
        Ok(self.intersect(spec, other)? == *self)
    }

    pub fn contains(&self, spec: &GroupSpec, g: &GroupElement) -> bool {
        g.len() == self.k()
            && g.coords
                .iter()
                .zip(&self.mult)
                .enumerate()
                .all(|(i, (q, &m))| spec.component(i + 1).in_multiple(q, m))
    }

    /// `[big : small]`, computed from the components' prime dimensions.
    pub fn index(spec: &GroupSpec, big: &Self, small: &Self) -> Result<ExtNat> {
        if !small.is_subgroup_of(spec, big)? {
            return Err(OagError::NonContainment);
        }
        let mut total = ExtNat::ONE;
        for (i, (&b, &s)) in big.mult.iter().zip(&small.mult).enumerate() {
            if b == s {
                continue;
            }
            if s == 0 {
                return Ok(ExtNat::Inf);
            }
            let comp = spec.component(i + 1);
            for (p, e) in factorize(s) {
                let exp = e - if b == 0 { 0 } else { valuation(b, p) };
                total = total * ExtNat::pow(p, ExtNat::Fin(exp as u64) * comp.dim(p));
            }
        }
        Ok(total)
    }

    /// Index in the whole group.
    pub fn index_in_group(&self, spec: &GroupSpec) -> ExtNat {
        Self::index(spec, &Self::whole(spec), self).expect("every subgroup lies in G")
    }
}

impl fmt::Display for StaircaseSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.k();
        let mut terms = self.terms();
        if terms.is_empty() {
            return write!(f, "D{k}");
        }
        if terms[0].1 != 1 {
            terms.insert(0, (k, 1));
        }
        let top = *terms.last().unwrap();
        match terms.as_slice() {
            [(0, 1)] => write!(f, "G"),
            [(l, 1)] => write!(f, "D{l}"),
            [(l, 1), (0, m)] if *l == k => write!(f, "{m}G"),
            [(l, 1), (0, m)] => write!(f, "D{l}+{m}G"),
            _ => {
                write!(f, "stair[")?;
                for (idx, &(l, m)) in terms.iter().enumerate() {
                    if idx > 0 {
                        write!(f, ", ")?;
                    }
                    if m != 1 {
                        write!(f, "{m}*")?;
                    }
                    if l == 0 && (l, m) == top {
                        write!(f, "G")?;
                    } else {
                        write!(f, "D{l}")?;
                    }
                }
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::RankOneRealization as R;
    use proptest::prelude::*;

    fn zz() -> GroupSpec {
        GroupSpec::from_realizations(vec![R::integers(), R::integers()])
    }

    #[test]
    fn sums_of_multiples() {
        let z = GroupSpec::from_realizations(vec![R::integers()]);
        let s = StaircaseSubgroup::multiple(&z, 4).sum(&z, &StaircaseSubgroup::multiple(&z, 6)).unwrap();
        assert_eq!(s, StaircaseSubgroup::multiple(&z, 2));

        let g = zz();
        let a = StaircaseSubgroup::convex_plus(&g, 1, 2).unwrap();
        let b = StaircaseSubgroup::multiple(&g, 4);
        assert_eq!(a.sum(&g, &b).unwrap(), a);
        assert_eq!(a.sum(&g, &StaircaseSubgroup::trivial(&g)).unwrap(), a);
    }

    #[test]
    fn intersections() {
        let g = zz();
        let a = StaircaseSubgroup::multiple(&g, 2);
        let b = StaircaseSubgroup::convex_plus(&g, 1, 4).unwrap();
        let c = a.intersect(&g, &b).unwrap();
        assert_eq!(c.multipliers(), &[4, 2]);
        assert_eq!(c.to_string(), "stair[D2, 2*D1, 4*G]");

        let d3 = StaircaseSubgroup::convex_plus(&g, 1, 3).unwrap();
        let d5 = StaircaseSubgroup::convex_plus(&g, 1, 5).unwrap();
        assert_eq!(d3.intersect(&g, &d5).unwrap(), StaircaseSubgroup::convex_plus(&g, 1, 15).unwrap());
        let w = StaircaseSubgroup::whole(&g);
        assert_eq!(w.intersect(&g, &c).unwrap(), c);
    }

    #[test]
    fn membership() {
        let g = zz();
        let c = StaircaseSubgroup::from_terms(&g, &[(2, 1), (1, 2)], 4).unwrap();
        assert!(c.contains(&g, &GroupElement::from_ints(&[4, 2])));
        assert!(!StaircaseSubgroup::multiple(&g, 2).contains(&g, &GroupElement::from_ints(&[2, 1])));
        assert!(c.contains(&g, &g.zero()));
    }

    #[test]
    fn indices() {
        let g = zz();
        let h = StaircaseSubgroup::convex_plus(&g, 1, 4).unwrap();
        assert_eq!(h.index_in_group(&g), ExtNat::Fin(4));
        let w = StaircaseSubgroup::whole(&g);
        assert_eq!(w.index_in_group(&g), ExtNat::ONE);
        assert_eq!(StaircaseSubgroup::index(&g, &h, &w), Err(OagError::NonContainment));

        let inf = GroupSpec::new(
            vec![crate::group::ArchComponent::abstract_component(
                "a",
                crate::group::PrimeDimProfile::new([(2, ExtNat::Inf)].into_iter().collect(), ExtNat::ONE)
                    .unwrap(),
                false,
            )
            .unwrap()],
            None,
        );
        let d = StaircaseSubgroup::convex_plus(&inf, 1, 2).unwrap();
        assert_eq!(d.index_in_group(&inf), ExtNat::Inf);
    }

    #[test]
    fn divisible_components_absorb_primes() {
        let qz = GroupSpec::from_realizations(vec![R::All, R::integers()]);
        let two = StaircaseSubgroup::multiple(&qz, 2);
        assert_eq!(two.multipliers(), &[2, 2]);
        assert_eq!(two.index_in_group(&qz), ExtNat::Fin(2));
        assert!(StaircaseSubgroup::from_multipliers(&zz(), vec![1, 2]).is_err());
        let zq = GroupSpec::from_realizations(vec![R::integers(), R::All]);
        assert_eq!(StaircaseSubgroup::multiple(&zq, 6).to_string(), "D1+6G");
    }

    #[test]
    fn printing() {
        let g = zz();
        assert_eq!(StaircaseSubgroup::whole(&g).to_string(), "G");
        assert_eq!(StaircaseSubgroup::trivial(&g).to_string(), "D2");
        assert_eq!(StaircaseSubgroup::convex(&g, 1).unwrap().to_string(), "D1");
        assert_eq!(StaircaseSubgroup::multiple(&g, 3).to_string(), "3G");
        assert_eq!(StaircaseSubgroup::convex_plus(&g, 1, 3).unwrap().to_string(), "D1+3G");
        assert_eq!(StaircaseSubgroup::from_terms(&g, &[(1, 2)], 0).unwrap().to_string(), "stair[D2, 2*D1]");
    }

    fn arb_stair(k: usize) -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::vec(prop_oneof![Just(0u64), 1u64..=12], k)
    }

    fn chain(raw: Vec<u64>) -> Vec<u64> {
        let mut out = raw.clone();
        let mut below = 1;
        for i in (0..out.len()).rev() {
            out[i] = lcm(raw[i], below);
            below = out[i];
        }
        out
    }

    fn zqz() -> GroupSpec {
        GroupSpec::from_realizations(vec![R::integers(), R::All, R::integers()])
    }

    proptest! {
        #[test]
        fn lattice_laws(a in arb_stair(3), b in arb_stair(3), c in arb_stair(3)) {
            let g = zqz();
            let a = StaircaseSubgroup::from_multipliers(&g, chain(a)).unwrap();
            let b = StaircaseSubgroup::from_multipliers(&g, chain(b)).unwrap();
            let c = StaircaseSubgroup::from_multipliers(&g, chain(c)).unwrap();
            prop_assert_eq!(a.sum(&g, &b).unwrap(), b.sum(&g, &a).unwrap());
            prop_assert_eq!(a.intersect(&g, &b).unwrap(), b.intersect(&g, &a).unwrap());
            prop_assert_eq!(a.sum(&g, &a).unwrap(), a.clone());
            prop_assert_eq!(a.intersect(&g, &a).unwrap(), a.clone());
            prop_assert_eq!(
                a.sum(&g, &b).unwrap().sum(&g, &c).unwrap(),
                a.sum(&g, &b.sum(&g, &c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.intersect(&g, &b).unwrap().intersect(&g, &c).unwrap(),
                a.intersect(&g, &b.intersect(&g, &c).unwrap()).unwrap()
            );
            let sub = a.is_subgroup_of(&g, &b).unwrap();
            prop_assert_eq!(sub, a.sum(&g, &b).unwrap() == b);
            prop_assert_eq!(sub, a.intersect(&g, &b).unwrap() == a);
        }

        #[test]
        fn index_is_multiplicative(a in arb_stair(3), b in arb_stair(3), c in arb_stair(3)) {
            let g = zqz();
            let a = StaircaseSubgroup::from_multipliers(&g, chain(a)).unwrap();
            let b = StaircaseSubgroup::from_multipliers(&g, chain(b)).unwrap();
            let c = StaircaseSubgroup::from_multipliers(&g, chain(c)).unwrap();
            let big = a.sum(&g, &b).unwrap().sum(&g, &c).unwrap();
            let mid = a.sum(&g, &b).unwrap();
            let small = a.clone();
            let lhs = StaircaseSubgroup::index(&g, &big, &small).unwrap();
            let rhs = StaircaseSubgroup::index(&g, &big, &mid).unwrap()
                * StaircaseSubgroup::index(&g, &mid, &small).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn print_roundtrips_through_terms(a in arb_stair(3)) {
            let g = zqz();
            let h = StaircaseSubgroup::from_multipliers(&g, chain(a)).unwrap();
            let terms = h.terms();
            let rebuilt = StaircaseSubgroup::from_terms(&g, &terms, 0).unwrap();
            prop_assert_eq!(rebuilt, h);
        }
    }
}
