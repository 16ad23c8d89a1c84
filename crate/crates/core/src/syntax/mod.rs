//! Formula language: AST, parser, printer, evaluator and rewrites.

pub mod ast;
pub mod eval;
pub mod parser;
pub mod rewrite;

pub use ast::{Atom, Formula, Rel, Term};
pub use eval::{eval, eval_bounded, eval_term, Assignment};
pub use parser::{parse_element, parse_formula, parse_spec, parse_subgroup, parse_term, print_spec};
pub use rewrite::{expand_composite_modulus, expand_derived};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupElement, GroupSpec, RankOneRealization as R};
    use crate::staircase::StaircaseSubgroup;

    fn zz() -> GroupSpec {
        GroupSpec::from_realizations(vec![R::integers(), R::integers()])
    }

    fn z() -> GroupSpec {
        GroupSpec::from_realizations(vec![R::integers()])
    }

    #[test]
    fn parses_quantified_formula() {
        let g = zz();
        let f = parse_formula("exists x. 2*x <= y and x == 0 mod D1+4G", &g).unwrap();
        let Formula::Exists(v, body) = &f else { panic!("{f:?}") };
        assert_eq!(v, "x");
        assert_eq!(body.atoms().len(), 2);
        let printed = f.to_string();
        assert_eq!(parse_formula(&printed, &g).unwrap(), f);
        assert_eq!(f.to_string(), printed);
    }

    #[test]
    fn syntax_error_has_offset() {
        let err = parse_formula("x == mod", &z()).unwrap_err();
        assert!(matches!(err, crate::OagError::Parse { offset, .. } if offset > 0), "{err:?}");
    }

    #[test]
    fn scope_errors() {
        assert!(matches!(
            parse_formula("exists x. exists x. x <= x", &z()),
            Err(crate::OagError::Scope(_))
        ));
    }

    #[test]
    fn roundtrip_examples() {
        let g = GroupSpec::from_realizations(vec![R::integers(), R::All, R::integers()]);
        for text in [
            "x < y or not (x = (1,1/2,0))",
            "forall x. exists w. w <= x",
            "A_2(x + y) = D1 and F_2(x) = D3",
            "M_1(x - one@1) or E_(2,1)(x) or D_(2,3,1)(y)",
            "x == y mod stair[D3, 2*D1, 4*G] -> -x > 3*(y - z)",
            "(x + (1,0,0) <= 0) and true",
        ] {
            let f = parse_formula(text, &g).unwrap();
            let again = parse_formula(&f.to_string(), &g).unwrap();
            assert_eq!(again, f, "{text} printed as {f}");
        }
    }

    #[test]
    fn subgroup_syntax() {
        let g = zz();
        assert_eq!(parse_subgroup("D1+4G", &g).unwrap(), StaircaseSubgroup::convex_plus(&g, 1, 4).unwrap());
        assert_eq!(parse_subgroup("stair[D2, 2*D1, 4*G]", &g).unwrap().multipliers(), &[4, 2]);
        assert!(parse_subgroup("D3", &g).is_err());
    }

    #[test]
    fn spec_text() {
        let text = "component a: dims{} default 1 discrete realize Z\n\
                    component b: realize Q   # dense\n\
                    component c: dims{2:inf,3:0} default 1\n\
                    omega_tower: dims{} default 0\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.k(), 3);
        assert!(spec.omega_tower().is_some());
        assert_eq!(parse_spec(&print_spec(&spec)).unwrap(), spec);
        assert!(parse_spec("component a: dims{4:1} default 1").is_err());
        assert!(parse_spec("component a: dims{} default 0 realize Z").is_err());
        assert!(parse_spec("component a: dims{} default 2 discrete").is_err());
    }

    #[test]
    fn composite_modulus_split() {
        let g = zz();
        let f = parse_formula("x == y mod D1+12G", &g).unwrap();
        let e = expand_composite_modulus(&f, &g).unwrap();
        let want = parse_formula("x == y mod D1+4G and x == y mod D1+3G", &g).unwrap();
        assert_eq!(e, want);
        let same = parse_formula("x == y mod D1+4G", &g).unwrap();
        assert_eq!(expand_composite_modulus(&same, &g).unwrap(), same);

        let zqz = GroupSpec::from_realizations(vec![R::integers(), R::All, R::integers()]);
        let f = parse_formula("x == 0 mod D2+2G", &zqz).unwrap();
        let e = expand_composite_modulus(&f, &zqz).unwrap();
        assert_eq!(e, parse_formula("x == 0 mod D1+2G", &zqz).unwrap());
    }

    #[test]
    fn derived_examples() {
        let g = zz();
        let f = parse_formula("A_2(x) = D1", &g).unwrap();
        let e = expand_derived(&f, &g).unwrap();
        assert_eq!(e, parse_formula("not (x == 0 mod D1)", &g).unwrap());
        assert!(e.has_only_base_atoms());

        let m = expand_derived(&parse_formula("M_1(x)", &z()).unwrap(), &z()).unwrap();
        assert_eq!(m, parse_formula("x == one@1 mod D1", &z()).unwrap());

        let err = expand_derived(&parse_formula("E_(2,4)(x)", &z()).unwrap(), &z());
        assert!(matches!(err, Err(crate::OagError::Rewrite(_))));
        let qz = GroupSpec::from_realizations(vec![R::All, R::integers()]);
        let err = expand_derived(&parse_formula("A_2(x) = D1", &qz).unwrap(), &qz);
        assert!(err.is_err());
    }

    #[test]
    fn evaluation() {
        let g = zz();
        let f = parse_formula("x < y and x == y mod 2G", &g).unwrap();
        let mut asg = Assignment::new();
        asg.insert("x".into(), GroupElement::from_ints(&[0, 1]));
        asg.insert("y".into(), GroupElement::from_ints(&[2, 3]));
        assert!(eval(&f, &g, &asg).unwrap());
        asg.insert("y".into(), GroupElement::from_ints(&[2, 2]));
        assert!(!eval(&f, &g, &asg).unwrap());
    }
}
