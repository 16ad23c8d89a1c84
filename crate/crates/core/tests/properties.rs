use proptest::prelude::*;
use rand::Rng;

use oag_core::fuzz::{self, FuzzRng};
use oag_core::invariants::{classify, dim_p_group, dp_rank, infinite_jumps, regular_jumps, relevant_primes, vca_number, Kind};
use oag_core::oracle::{eval_qf, Generators};
use oag_core::solver::{check_compatibility, distributive as check_distributive, solve, CongruenceSystem, SolveOutcome};
use oag_core::syntax::{eval, Assignment, Formula};
use oag_core::vcd::count_atoms;
use oag_core::{
    ArchComponent, ConvexSubgroup, ExtNat, GroupElement, GroupSpec, Jump, PrimeDimProfile, Rational, StaircaseSubgroup,
};

const MODULI: [u64; 5] = [2, 3, 4, 6, 12];

fn modulus(rng: &mut FuzzRng) -> u64 {
    MODULI[rng.gen_range(0..MODULI.len())]
}

/// `A_n(g)` by search: the largest level `ℓ ≥ i` such that every component
/// strictly between the leading one and `ℓ` is `n`-divisible.
fn a_n_by_search(spec: &GroupSpec, g: &GroupElement, n: u64) -> Jump {
    let Some(i) = g.leading_index() else { return Jump::Empty };
    let level = (i..=spec.k())
        .rev()
        .find(|&l| (i..l).all(|m| spec.component(m).is_n_divisible(n)))
        .expect("level i always qualifies");
    Jump::At(ConvexSubgroup(level))
}

fn larger(a: Jump, b: Jump) -> Jump {
    if a.is_subset_of(b) {
        b
    } else {
        a
    }
}

/// A random member of `h`: each coordinate of a random element scaled by the
/// multiplier, so zero multipliers give zero coordinates.
fn member(rng: &mut FuzzRng, spec: &GroupSpec, h: &StaircaseSubgroup) -> GroupElement {
    let g = fuzz::element(rng, spec, 5);
    GroupElement::new(
        g.coords
            .iter()
            .zip(h.multipliers())
            .map(|(c, &m)| c * Rational::from_integer(m as i64))
            .collect(),
    )
}

fn spec_with_default_inf(rng: &mut FuzzRng) -> GroupSpec {
    let mut comps: Vec<ArchComponent> = fuzz::finite_rank_spec(rng, true).components().to_vec();
    let dims = PrimeDimProfile::new(Default::default(), ExtNat::Inf).unwrap();
    let at = rng.gen_range(0..=comps.len());
    comps.insert(at, ArchComponent::abstract_component("wide", dims, false).unwrap());
    GroupSpec::new(comps, None)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn a_n_matches_search(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 4);
        let g = fuzz::element(&mut rng, &spec, 4);
        let n = modulus(&mut rng);
        prop_assert_eq!(spec.a_n_of(&g, n), a_n_by_search(&spec, &g, n));
    }

    #[test]
    fn b_n_is_the_membership_threshold_of_a_n(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 4);
        let g = fuzz::element(&mut rng, &spec, 3);
        let h = fuzz::element(&mut rng, &spec, 3);
        let n = modulus(&mut rng);
        let bn = spec.b_n_of(&g, n);
        prop_assert_eq!(
            spec.in_convex(&h, bn),
            spec.a_n_of(&h, n).is_subset_of(spec.a_n_of(&g, n)),
            "g={} h={} n={}", g, h, n
        );
    }

    #[test]
    fn a_n_is_subadditive(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 4);
        let g = fuzz::element(&mut rng, &spec, 3);
        let h = fuzz::element(&mut rng, &spec, 3);
        let n = modulus(&mut rng);
        let (ag, ah, sum) = (spec.a_n_of(&g, n), spec.a_n_of(&h, n), spec.a_n_of(&g.add(&h), n));
        prop_assert!(sum.is_subset_of(larger(ag, ah)));
        if ag != ah {
            prop_assert_eq!(sum, larger(ag, ah));
        }
    }

    #[test]
    fn f_n_depends_on_the_class_mod_n(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 4);
        let g = fuzz::element(&mut rng, &spec, 6);
        let h = fuzz::element(&mut rng, &spec, 6);
        let n = modulus(&mut rng);
        prop_assert_eq!(spec.f_n_of(&g.add(&h.scale(n as i64)), n), spec.f_n_of(&g, n));
        let in_ng = StaircaseSubgroup::multiple(&spec, n).contains(&spec, &g);
        prop_assert_eq!(spec.f_n_of(&g, n) == Jump::Empty, in_ng);
        prop_assert_eq!(spec.f_n_of(&h.scale(n as i64), n), Jump::Empty);
    }

    #[test]
    fn order_is_total_and_translation_invariant(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 3);
        let [a, b, c] = [0, 1, 2].map(|_| fuzz::element(&mut rng, &spec, 3));
        let ab = spec.compare(&a, &b).unwrap();
        prop_assert_eq!(ab.reverse(), spec.compare(&b, &a).unwrap());
        prop_assert_eq!(ab, spec.compare(&a.add(&c), &b.add(&c)).unwrap());
        prop_assert_eq!(ab.is_eq(), a == b);
        prop_assert_eq!(a.sub(&b).is_positive(), ab.is_gt());
    }

    #[test]
    fn regular_jump_counts_and_infinite_dims(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::finite_rank_spec(&mut rng, true);
        for p in relevant_primes(&spec) {
            let rj = regular_jumps(&spec, p).unwrap();
            let dim = dim_p_group(&spec, p);
            if let ExtNat::Fin(d) = dim {
                prop_assert!(rj.jumps.len() as u64 <= d + 1, "p={} dim={} jumps={:?}", p, d, rj.jumps);
            }
            prop_assert_eq!(dim == ExtNat::Inf, !infinite_jumps(&spec, p).is_empty());
        }
    }

    #[test]
    fn strong_exactly_when_dp_rank_finite(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = if rng.gen_bool(0.3) { spec_with_default_inf(&mut rng) } else { fuzz::finite_rank_spec(&mut rng, true) };
        let c = classify(&spec);
        prop_assert_eq!(c.kind == Kind::NotStrong, dp_rank(&spec) == ExtNat::Inf);
        prop_assert_eq!(vca_number(&spec), dp_rank(&spec));
    }

    #[test]
    fn solvable_exactly_when_pairwise_compatible(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 3);
        let sys = fuzz::congruence_system(&mut rng, &spec);
        let solvable = matches!(solve(&spec, &sys).unwrap(), SolveOutcome::Solvable(_));
        prop_assert_eq!(solvable, check_compatibility(&spec, &sys).unwrap().is_none());
    }

    #[test]
    fn coset_members_satisfy_and_implied_constraints_change_nothing(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 3);
        let sys = fuzz::congruence_system(&mut rng, &spec);
        let SolveOutcome::Solvable(coset) = solve(&spec, &sys).unwrap() else { return Ok(()) };
        let gens: Vec<Generators> = sys.constraints.iter().map(|(_, h)| Generators::of(h)).collect();
        for _ in 0..20 {
            let x = coset.base.add(&member(&mut rng, &spec, &coset.modulus));
            for ((a, h), g) in sys.constraints.iter().zip(&gens) {
                prop_assert!(g.contains(&spec, &x.sub(a)), "{} is not {} mod {}", x, a, h);
            }
        }
        let wider = coset.modulus.sum(&spec, &fuzz::staircase(&mut rng, &spec)).unwrap();
        let target = coset.base.add(&member(&mut rng, &spec, &coset.modulus));
        let mut more = CongruenceSystem::new(sys.constraints.clone());
        more.push(target, wider);
        let SolveOutcome::Solvable(again) = solve(&spec, &more).unwrap() else {
            return Err(TestCaseError::fail("an implied constraint made the system unsolvable"));
        };
        prop_assert_eq!(&again.modulus, &coset.modulus);
        prop_assert!(coset.contains(&spec, &again.base));
    }

    #[test]
    fn staircase_lattice_is_distributive(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::computable_spec(&mut rng, 3);
        let hs: Vec<StaircaseSubgroup> = (0..rng.gen_range(2..=4)).map(|_| fuzz::staircase(&mut rng, &spec)).collect();
        prop_assert!(check_distributive(&spec, &hs).unwrap());
        let (a, b, c) = (&hs[0], &hs[1], &fuzz::staircase(&mut rng, &spec));
        let left = a.intersect(&spec, &b.sum(&spec, c).unwrap()).unwrap();
        let right = a.intersect(&spec, b).unwrap().sum(&spec, &a.intersect(&spec, c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn evaluators_agree(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::qe_spec(&mut rng);
        let (f, free) = fuzz::qe_formula(&mut rng, &spec);
        let Formula::Exists(x, body) = f else { unreachable!() };
        let mut asg = Assignment::new();
        for v in free.iter().chain(std::iter::once(&x)) {
            asg.insert(v.clone(), fuzz::element(&mut rng, &spec, 12));
        }
        prop_assert_eq!(eval_qf(&body, &spec, &asg).unwrap(), eval(&body, &spec, &asg).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn atom_count_is_monotone_in_the_parameter_set(seed in any::<u64>()) {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::qe_spec(&mut rng);
        let (f, free) = fuzz::qe_formula(&mut rng, &spec);
        let Formula::Exists(x, body) = f else { unreachable!() };
        let tuple = |rng: &mut FuzzRng| free.iter().map(|_| fuzz::element(rng, &spec, 8)).collect::<Vec<_>>();
        let small: Vec<Vec<GroupElement>> = (0..rng.gen_range(1..=3)).map(|_| tuple(&mut rng)).collect();
        let mut big = small.clone();
        big.extend((0..rng.gen_range(1..=3)).map(|_| tuple(&mut rng)));
        let a = count_atoms(&body, &x, &free, &small, &spec).unwrap().atom_count;
        let b = count_atoms(&body, &x, &free, &big, &spec).unwrap().atom_count;
        prop_assert!(a <= b, "{} atoms on the subset, {} on the superset", a, b);
    }
}
