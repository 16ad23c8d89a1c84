//! Seeded random instances shared by the fuzz suites, the acceptance tests and
//! `oag oracle-check`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::Rational;
use crate::group::{ArchComponent, GroupElement, GroupSpec, PrimeDimProfile, RankOneRealization};
use crate::ext::ExtNat;
use crate::solver::CongruenceSystem;
use crate::staircase::StaircaseSubgroup;
use crate::syntax::{Atom, Formula, Rel, Term};

pub type FuzzRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FuzzRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Divisors of 72; any chain drawn from them keeps the lcm of moduli ≤ 72.
const DIVISORS_72: [u64; 12] = [1, 2, 3, 4, 6, 8, 9, 12, 18, 24, 36, 72];

/// Z (most often), Q, Z[1/2] or Z[1/3].
pub fn realization(rng: &mut FuzzRng) -> RankOneRealization {
    match rng.gen_range(0..6) {
        0 => RankOneRealization::All,
        1 => RankOneRealization::Invertible([2].into_iter().collect()),
        2 => RankOneRealization::Invertible([3].into_iter().collect()),
        _ => RankOneRealization::integers(),
    }
}

pub fn computable_spec(rng: &mut FuzzRng, max_k: usize) -> GroupSpec {
    let k = rng.gen_range(1..=max_k);
    GroupSpec::from_realizations((0..k).map(|_| realization(rng)).collect())
}

/// An element with small numerators; coordinates in `Z[1/p]` or `Q` get
/// denominators 1, 2 or 3 where the component allows them.
pub fn element(rng: &mut FuzzRng, spec: &GroupSpec, radius: i64) -> GroupElement {
    let coords = spec
        .components()
        .iter()
        .map(|c| {
            let n = rng.gen_range(-radius..=radius);
            let real = c.realization().expect("computable spec");
            let d = *[1i64, 2, 3].choose(rng).unwrap();
            let q = Rational::new(n, d);
            if real.contains(&q) {
                q
            } else {
                Rational::from_integer(n)
            }
        })
        .collect();
    GroupElement::new(coords)
}

/// A random staircase with multipliers dividing 72. Most have zero prefix 0;
/// some vanish on a leading block of coordinates.
pub fn staircase(rng: &mut FuzzRng, spec: &GroupSpec) -> StaircaseSubgroup {
    let k = spec.k();
    let prefix = if k == 0 || rng.gen_bool(0.7) { 0 } else { rng.gen_range(1..=k) };
    let mut raw = vec![0u64; k];
    let mut below = 1u64;
    for i in (prefix..k).rev() {
        let options: Vec<u64> = DIVISORS_72.iter().copied().filter(|d| d % below == 0).collect();
        below = *options.choose(rng).unwrap();
        raw[i] = below;
    }
    StaircaseSubgroup::from_multipliers(spec, raw).expect("divisibility chain")
}

/// `1..=4` constraints `x ≡ a_i mod H_i`.
pub fn congruence_system(rng: &mut FuzzRng, spec: &GroupSpec) -> CongruenceSystem {
    let n = rng.gen_range(1..=4);
    CongruenceSystem::new(
        (0..n)
            .map(|_| (element(rng, spec, 6), staircase(rng, spec)))
            .collect(),
    )
}

/// Specs for the QE fuzz suite: built from `Z` and `Q`, at most two levels.
pub fn qe_spec(rng: &mut FuzzRng) -> GroupSpec {
    let pick = |rng: &mut FuzzRng| {
        if rng.gen_bool(0.7) {
            RankOneRealization::integers()
        } else {
            RankOneRealization::All
        }
    };
    let k = if rng.gen_bool(0.6) { 1 } else { 2 };
    GroupSpec::from_realizations((0..k).map(|_| pick(rng)).collect())
}

const QE_MODULI: [u64; 6] = [2, 3, 4, 6, 8, 9];

fn qe_modulus(rng: &mut FuzzRng, spec: &GroupSpec) -> StaircaseSubgroup {
    let k = spec.k();
    let n = *QE_MODULI.choose(rng).unwrap();
    match rng.gen_range(0..5) {
        0 if k > 1 => StaircaseSubgroup::convex_plus(spec, rng.gen_range(1..k), n).expect("level in range"),
        1 if k > 1 => StaircaseSubgroup::convex(spec, rng.gen_range(1..k)).expect("level in range"),
        _ => StaircaseSubgroup::multiple(spec, n),
    }
}

fn qe_term(rng: &mut FuzzRng, spec: &GroupSpec, x: &str, free: &[String]) -> Term {
    let mut c = rng.gen_range(1..=4);
    if rng.gen_bool(0.5) {
        c = -c;
    }
    let mut t = Term::var_times(x, c);
    for v in free {
        if rng.gen_bool(0.6) {
            let a = *[-2i64, -1, 1, 2].choose(rng).unwrap();
            t = t.add(&Term::var_times(v, a));
        }
    }
    if rng.gen_bool(0.5) {
        let g = GroupElement::from_ints(
            &(0..spec.k()).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>(),
        );
        t = t.add(&Term::constant(g));
    }
    t
}

fn qe_atom(rng: &mut FuzzRng, spec: &GroupSpec, x: &str, free: &[String]) -> Formula {
    let t = qe_term(rng, spec, x, free);
    if rng.gen_bool(0.55) {
        let rel = *[Rel::Lt, Rel::Le, Rel::Eq].choose(rng).unwrap();
        let rel = if rel == Rel::Eq && rng.gen_bool(0.5) { Rel::Lt } else { rel };
        Formula::atom(Atom::Cmp(t, rel))
    } else {
        Formula::atom(Atom::Cong(t, qe_modulus(rng, spec)))
    }
}

fn qe_body(rng: &mut FuzzRng, spec: &GroupSpec, x: &str, free: &[String], atoms: usize) -> Formula {
    if atoms == 1 {
        let a = qe_atom(rng, spec, x, free);
        return if rng.gen_bool(0.25) { Formula::not(a) } else { a };
    }
    let left = rng.gen_range(1..atoms);
    let l = qe_body(rng, spec, x, free, left);
    let r = qe_body(rng, spec, x, free, atoms - left);
    let f = if rng.gen_bool(0.6) { Formula::and(vec![l, r]) } else { Formula::or(vec![l, r]) };
    if rng.gen_bool(0.15) {
        Formula::not(f)
    } else {
        f
    }
}

/// `∃x. body` with at most 4 atoms, coefficients of `x` up to 4 in absolute
/// value and moduli from {2,3,4,6,8,9}. Free variables are `y` and maybe `z`.
pub fn qe_formula(rng: &mut FuzzRng, spec: &GroupSpec) -> (Formula, Vec<String>) {
    let nfree = if spec.k() == 1 { rng.gen_range(1..=2) } else { 1 };
    let free: Vec<String> = ["y", "z"][..nfree].iter().map(|s| s.to_string()).collect();
    let atoms = rng.gen_range(1..=4);
    let body = qe_body(rng, spec, "x", &free, atoms);
    (Formula::exists("x", body), free)
}

/// A derived atom of the given kind (`a`, `f`, `m`, `e` or `d`) over `t`.
pub fn derived_atom(rng: &mut FuzzRng, spec: &GroupSpec, kind: char, t: Term) -> Atom {
    use crate::group::ConvexSubgroup;
    let n = *[2u64, 3, 4, 6].choose(rng).unwrap();
    // jump atoms only expand at jumps of the spec
    let jumps = crate::invariants::regular_jumps(spec, n).map(|r| r.jumps).unwrap_or_default();
    let target = jumps.choose(rng).copied().unwrap_or(ConvexSubgroup(spec.k()));
    match kind {
        'a' => Atom::AJump { n, term: t, target },
        'f' => Atom::FJump { n, term: t, target },
        'm' => Atom::M { k: rng.gen_range(1..=6), term: t },
        'e' => {
            // `n | k` is rejected by the rewrite
            let n = *[2u64, 3, 4].choose(rng).unwrap();
            let mut k = rng.gen_range(1..=8);
            while k % n == 0 {
                k = rng.gen_range(1..=8);
            }
            Atom::E { n, k, term: t }
        }
        _ => {
            let p = *[2u64, 3].choose(rng).unwrap();
            let r = rng.gen_range(1..=2);
            let i = rng.gen_range(0..=r);
            Atom::D { p, r, i, term: t }
        }
    }
}

/// An archimedean component with finite p-dimensions, described abstractly.
pub fn finite_component(rng: &mut FuzzRng, name: &str) -> ArchComponent {
    if rng.gen_bool(0.5) {
        let real = realization(rng);
        return ArchComponent::realized(name, real);
    }
    let discrete = rng.gen_bool(0.4);
    if discrete {
        return ArchComponent::abstract_component(name, PrimeDimProfile::uniform(ExtNat::ONE), true)
            .expect("valid profile");
    }
    let mut exceptions = std::collections::BTreeMap::new();
    for p in [2u64, 3, 5] {
        if rng.gen_bool(0.4) {
            exceptions.insert(p, ExtNat::Fin(rng.gen_range(0..=2)));
        }
    }
    let default = ExtNat::Fin(rng.gen_range(0..=1));
    let dims = PrimeDimProfile::new(exceptions, default).expect("primes");
    ArchComponent::abstract_component(name, dims, false).expect("valid profile")
}

/// A spec of 1..=3 components; with `infinite`, some p-dimension may be ∞.
pub fn finite_rank_spec(rng: &mut FuzzRng, infinite: bool) -> GroupSpec {
    let k = rng.gen_range(1..=3);
    let comps = (0..k)
        .map(|i| {
            let name = format!("c{i}");
            if infinite && rng.gen_bool(0.3) {
                let p = *[2u64, 3].choose(rng).unwrap();
                let dims = PrimeDimProfile::new([(p, ExtNat::Inf)].into_iter().collect(), ExtNat::ZERO)
                    .expect("primes");
                ArchComponent::abstract_component(&name, dims, false).expect("valid profile")
            } else {
                finite_component(rng, &name)
            }
        })
        .collect();
    GroupSpec::new(comps, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::dp_rank;

    #[test]
    fn generators_are_deterministic() {
        let a: Vec<_> = (0..20).map(|s| congruence_system(&mut rng(s), &computable_spec(&mut rng(s), 3))).collect();
        let b: Vec<_> = (0..20).map(|s| congruence_system(&mut rng(s), &computable_spec(&mut rng(s), 3))).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_instances_are_well_formed() {
        let mut r = rng(7);
        for _ in 0..200 {
            let spec = computable_spec(&mut r, 3);
            let sys = congruence_system(&mut r, &spec);
            for (a, h) in &sys.constraints {
                spec.element(a.coords.clone()).unwrap();
                assert!(h.multipliers().iter().all(|m| 72 % m.max(&1) == 0));
            }
            let qs = qe_spec(&mut r);
            let (f, free) = qe_formula(&mut r, &qs);
            assert!(f.atoms().len() <= 4);
            assert!(f.free_vars().iter().all(|v| free.contains(v)));
        }
        for _ in 0..50 {
            assert!(dp_rank(&finite_rank_spec(&mut r, false)).is_finite());
        }
    }
}
