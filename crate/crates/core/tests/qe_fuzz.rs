use oag_core::fuzz;
use oag_core::oracle::{elimination_mismatch, Box};
use oag_core::qe::{classify_atom, eliminate_exists, AtomClass};
use oag_core::syntax::{Atom, Formula};

fn output_box(spec: &oag_core::GroupSpec) -> Box {
    if spec.k() == 1 {
        Box::default_for(spec)
    } else {
        Box::symmetric(spec, 3, 2)
    }
}

#[test]
fn random_eliminations_match_the_oracle() {
    for seed in 5000..5080u64 {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::qe_spec(&mut rng);
        let (f, free) = fuzz::qe_formula(&mut rng, &spec);
        let Formula::Exists(x, body) = &f else { unreachable!() };
        let out = eliminate_exists(&f, &spec).unwrap();
        let bad = elimination_mismatch(&spec, x, body, &out, &free, &output_box(&spec)).unwrap();
        assert!(bad.is_none(), "seed {seed}: {f}\n => {out}\n at {bad:?}");
    }
}

#[test]
fn outputs_use_base_atoms_only() {
    for seed in 0..60u64 {
        let mut rng = fuzz::rng(seed);
        let spec = fuzz::qe_spec(&mut rng);
        let (f, _) = fuzz::qe_formula(&mut rng, &spec);
        let out = eliminate_exists(&f, &spec).unwrap();
        assert!(out.is_quantifier_free());
        assert!(out.atoms().iter().all(|a| matches!(a, Atom::Cmp(..) | Atom::Cong(..))));
        for a in out.atoms() {
            assert!(!a.term().free_vars().contains("x"));
            // every atom is classifiable
            let _: AtomClass = classify_atom(a, &spec);
        }
    }
}

/// Membership pattern of `x - a ∈ h` over the box points.
fn coset_pattern(spec: &oag_core::GroupSpec, h: &oag_core::StaircaseSubgroup, a: &oag_core::GroupElement, pts: &[oag_core::GroupElement]) -> Vec<bool> {
    let gens = oag_core::oracle::Generators::of(h);
    pts.iter().map(|x| gens.contains(spec, &x.sub(a))).collect()
}

#[test]
fn congruence_families_are_directed() {
    use oag_core::StaircaseSubgroup;
    let mut rng = fuzz::rng(11);
    let spec = oag_core::GroupSpec::from_realizations(vec![
        oag_core::RankOneRealization::integers(),
        oag_core::RankOneRealization::integers(),
    ]);
    let pts = Box::symmetric(&spec, 8, 1).elements(u128::MAX).unwrap();
    for _ in 0..100 {
        use rand::Rng;
        let p = [2u64, 3][rng.gen_range(0..2)];
        let level = rng.gen_range(0..2);
        let mk = |r: u32| StaircaseSubgroup::convex_plus(&spec, level, p.pow(r)).unwrap();
        let (h1, h2) = (mk(rng.gen_range(1..=3)), mk(rng.gen_range(1..=3)));
        let a1 = fuzz::element(&mut rng, &spec, 5);
        let a2 = fuzz::element(&mut rng, &spec, 5);
        let s1 = coset_pattern(&spec, &h1, &a1, &pts);
        let s2 = coset_pattern(&spec, &h2, &a2, &pts);
        let nested = s1.iter().zip(&s2).all(|(a, b)| !a || *b) || s1.iter().zip(&s2).all(|(a, b)| !b || *a);
        let disjoint = s1.iter().zip(&s2).all(|(a, b)| !(a & b));
        assert!(nested || disjoint, "{h1} + {a1:?} vs {h2} + {a2:?}");
    }
}

#[test]
fn na_atoms_define_few_sets() {
    use oag_core::syntax::Term;
    use std::collections::HashSet;
    let mut rng = fuzz::rng(12);
    let mut checked = 0;
    while checked < 20 {
        let spec = fuzz::computable_spec(&mut rng, 2);
        let h = fuzz::staircase(&mut rng, &spec);
        let atom = Atom::Cong(Term::var("x").sub(&Term::var("y")), h.clone());
        if classify_atom(&atom, &spec) != AtomClass::Na {
            continue;
        }
        checked += 1;
        let index = match h.index_in_group(&spec) {
            oag_core::ExtNat::Fin(n) => n as usize,
            oag_core::ExtNat::Inf => unreachable!(),
        };
        let pts = Box::symmetric(&spec, 6, 2).elements(u128::MAX).unwrap();
        let sets: HashSet<Vec<bool>> = (0..200)
            .map(|_| coset_pattern(&spec, &h, &fuzz::element(&mut rng, &spec, 20), &pts))
            .collect();
        assert!(sets.len() <= index, "{h}: {} sets, index {index}", sets.len());
    }
}

#[test]
fn eliminations_over_localizations_match_the_oracle() {
    use oag_core::RankOneRealization;
    for (p, seeds) in [(2u64, 6000..6020u64), (3, 6100..6120)] {
        let spec = oag_core::GroupSpec::from_realizations(vec![RankOneRealization::Invertible([p].into_iter().collect())]);
        let bx = Box::symmetric(&spec, 8, 1);
        for seed in seeds {
            let mut rng = fuzz::rng(seed);
            let (f, free) = fuzz::qe_formula(&mut rng, &spec);
            let Formula::Exists(x, body) = &f else { unreachable!() };
            let out = eliminate_exists(&f, &spec).unwrap();
            let bad = elimination_mismatch(&spec, x, body, &out, &free, &bx).unwrap();
            assert!(bad.is_none(), "Z[1/{p}] seed {seed}: {f}\n => {out}\n at {bad:?}");
        }
    }
}
