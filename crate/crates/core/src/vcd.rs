//! Counting the atoms of the Boolean algebra generated by the instances of a
//! formula over a finite parameter set, the matching upper bound, and the
//! empirical growth exponent of those counts.

use std::collections::{BTreeSet, HashSet};

use num_traits::One;
use rand::Rng;

use crate::arith::{lcm, Rational};
use crate::error::{OagError, Result};
use crate::ext::ExtNat;
use crate::fuzz::FuzzRng;
use crate::group::{GroupElement, GroupSpec, RankOneRealization};
use crate::patterns::Pattern;
use crate::staircase::StaircaseSubgroup;
use crate::syntax::{eval, eval_term, Assignment, Atom, Formula, Rel, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomCount {
    pub formula: String,
    pub parameter_set_size: usize,
    pub atom_count: usize,
}

/// A linear constraint on the object variable: `coef·x + rest` against an
/// order relation or a subgroup.
struct Linear {
    coef: i64,
    rest: GroupElement,
    /// Multipliers of the subgroup for congruences.
    modulus: Option<Vec<u64>>,
}

impl Linear {
    /// `-rest/coef`, coordinatewise.
    fn threshold(&self) -> Vec<Rational> {
        let c = Rational::from_integer(self.coef);
        self.rest.coords.iter().map(|r| -r / c).collect()
    }

    /// Leading coordinates pinned by the congruence: those where the
    /// modulus vanishes. Comparisons can depend on every coordinate.
    fn depth(&self, k: usize) -> usize {
        match &self.modulus {
            None => k,
            Some(m) => m.iter().take_while(|&&t| t == 0).count(),
        }
    }
}

fn linear_atoms(instances: &[Formula], x: &str, spec: &GroupSpec) -> Result<Vec<Linear>> {
    let empty = Assignment::new();
    let mut out = Vec::new();
    for f in instances {
        for a in f.atoms() {
            let t = a.term();
            let coef = t.coeff(x);
            if coef == 0 {
                continue;
            }
            let rest = eval_term(&t.without(x), spec, &empty)?;
            let modulus = match a {
                Atom::Cong(_, h) => Some(h.multipliers().to_vec()),
                Atom::Cmp(..) => None,
                _ => return Err(OagError::Precondition("derived atoms must be expanded first".into())),
            };
            out.push(Linear { coef, rest, modulus });
        }
    }
    Ok(out)
}

/// Grid step and residue period of coordinate `c` (0-based).
fn coordinate_grid(spec: &GroupSpec, c: usize, values: &[Rational], period: u64) -> Rational {
    let real = spec.component(c + 1).realization().expect("computable spec");
    match real {
        RankOneRealization::Invertible(ps) if ps.is_empty() => Rational::one(),
        RankOneRealization::All => {
            let d = values.iter().fold(1i64, |acc, v| num_integer::Integer::lcm(&acc, v.denom()));
            Rational::new(1, 2 * d)
        }
        RankOneRealization::Invertible(ps) => {
            // a power of an invertible prime fine enough to place `period`
            // grid points in every gap
            let d = values.iter().fold(1i64, |acc, v| num_integer::Integer::lcm(&acc, v.denom()));
            let p = *ps.iter().next().unwrap() as i64;
            let need = 2 * d * period as i64;
            let mut q = 1i64;
            while q < need {
                q *= p;
            }
            Rational::new(1, q)
        }
    }
}

/// Representatives of one coordinate: every value that lies in the group,
/// plus `period` consecutive grid points in each gap and beyond both ends.
fn coordinate_candidates(spec: &GroupSpec, c: usize, values: &BTreeSet<Rational>, period: u64) -> Vec<Rational> {
    let real = spec.component(c + 1).realization().expect("computable spec");
    let vals: Vec<Rational> = values.iter().cloned().collect();
    let step = coordinate_grid(spec, c, &vals, period);
    let per = period.max(1) as i64;
    let mut out = Vec::new();
    let run_from = |start: Rational, upper: Option<&Rational>, out: &mut Vec<Rational>| {
        // first grid point strictly above `start`
        let mut v = (start / step).floor() * step + step;
        for _ in 0..per {
            if upper.is_some_and(|u| v >= *u) {
                break;
            }
            out.push(v);
            v += step;
        }
    };
    if vals.is_empty() {
        run_from(-step, None, &mut out);
        return out;
    }
    let below = vals[0] - step * Rational::from_integer(per + 1);
    run_from(below, Some(&vals[0]), &mut out);
    for (i, v) in vals.iter().enumerate() {
        if real.contains(v) {
            out.push(*v);
        }
        run_from(*v, vals.get(i + 1), &mut out);
    }
    out
}

/// One point in every cell of the decomposition induced by the thresholds
/// and congruence classes of `instances`, as formulas in `x`.
pub fn cell_representatives(spec: &GroupSpec, instances: &[Formula], x: &str) -> Result<Vec<GroupElement>> {
    spec.require_computable()?;
    let k = spec.k();
    let atoms = linear_atoms(instances, x, spec)?;
    let thresholds: Vec<Vec<Rational>> = atoms.iter().map(|a| a.threshold()).collect();
    let periods: Vec<u64> = (0..k)
        .map(|c| {
            atoms
                .iter()
                .filter_map(|a| a.modulus.as_ref().map(|m| m[c]))
                .filter(|&m| m > 0)
                .fold(1, lcm)
        })
        .collect();
    let mut out = Vec::new();
    let mut prefix: Vec<Rational> = Vec::with_capacity(k);
    descend(spec, &atoms, &thresholds, &periods, &mut prefix, true, &mut out);
    Ok(out)
}

/// `tight` means the prefix equals the leading coordinates of some
/// threshold, so the next coordinate still matters for the order.
fn descend(
    spec: &GroupSpec,
    atoms: &[Linear],
    thresholds: &[Vec<Rational>],
    periods: &[u64],
    prefix: &mut Vec<Rational>,
    tight: bool,
    out: &mut Vec<GroupElement>,
) {
    let k = spec.k();
    let c = prefix.len();
    if c == k {
        out.push(GroupElement::new(prefix.clone()));
        return;
    }
    let mut values = BTreeSet::new();
    if tight {
        for (a, th) in atoms.iter().zip(thresholds) {
            if a.depth(k) > c && th[..c] == prefix[..] {
                values.insert(th[c]);
            }
        }
    }
    for v in coordinate_candidates(spec, c, &values, periods[c]) {
        let still = values.contains(&v);
        prefix.push(v);
        descend(spec, atoms, thresholds, periods, prefix, still, out);
        prefix.pop();
    }
}

fn instances(phi: &Formula, params: &[String], set: &[Vec<GroupElement>]) -> Vec<Formula> {
    set.iter()
        .map(|tuple| {
            phi.map_atoms(&mut |a: &Atom| {
                Formula::atom(a.map_term(|t| {
                    params
                        .iter()
                        .zip(tuple)
                        .fold(t.clone(), |acc, (v, g)| acc.substitute(v, &Term::constant(g.clone())))
                }))
            })
        })
        .collect()
}

/// `|S^φ(A)|`: the number of distinct truth vectors of the instances
/// `φ(x, a)`, `a ∈ A`, realized by some `x`.
pub fn count_atoms(
    phi: &Formula,
    x: &str,
    params: &[String],
    set: &[Vec<GroupElement>],
    spec: &GroupSpec,
) -> Result<AtomCount> {
    if !phi.is_quantifier_free() || !phi.has_only_base_atoms() {
        return Err(OagError::Precondition("count_atoms needs a quantifier-free formula over base atoms".into()));
    }
    let inst = instances(phi, params, set);
    let cells = cell_representatives(spec, &inst, x)?;
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut asg = Assignment::new();
    for p in cells {
        asg.insert(x.to_string(), p);
        let v = inst.iter().map(|f| eval(f, spec, &asg)).collect::<Result<Vec<_>>>()?;
        seen.insert(v);
    }
    Ok(AtomCount { formula: phi.to_string(), parameter_set_size: set.len(), atom_count: seen.len() })
}

/// Sizes of the directed families of a formula and of its NA part, counted
/// in instance-defining formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySizes {
    /// Formulas per directed family.
    pub families: Vec<usize>,
    /// Number of NA formulas.
    pub na_formulas: usize,
    /// Bound on the number of distinct sets one NA formula defines.
    pub na_sets: u64,
}

/// Splits `φ` over a computable spec: order atoms go to the single family
/// of initial segments (equalities and convex cosets count twice, as a
/// difference of two segments); the finite-index part of each congruence is
/// an NA formula.
pub fn family_sizes(phi: &Formula, spec: &GroupSpec) -> Result<FamilySizes> {
    spec.require_computable()?;
    let mut order = 0usize;
    let mut na = 0usize;
    let mut na_sets = 1u64;
    let mut seen = HashSet::new();
    for a in phi.atoms() {
        if !seen.insert(a.clone()) {
            continue;
        }
        match a {
            Atom::Cmp(_, Rel::Eq) => order += 2,
            Atom::Cmp(..) => order += 1,
            Atom::Cong(_, h) => {
                let z = h.zero_prefix();
                if z > 0 {
                    order += 2;
                }
                if z < spec.k() {
                    let m = h.multipliers();
                    let mut raw = m.to_vec();
                    for r in raw.iter_mut().take(z) {
                        *r = m[z];
                    }
                    let finite = StaircaseSubgroup::from_multipliers(spec, raw)?;
                    match finite.index_in_group(spec) {
                        ExtNat::Fin(1) => {}
                        ExtNat::Fin(n) => {
                            na += 1;
                            na_sets = na_sets.max(n + 1);
                        }
                        ExtNat::Inf => return Err(OagError::Internal("infinite index on a computable spec".into())),
                    }
                }
            }
            _ => return Err(OagError::Precondition("derived atoms must be expanded first".into())),
        }
    }
    let families = if order > 0 { vec![order] } else { Vec::new() };
    Ok(FamilySizes { families, na_formulas: na, na_sets })
}

/// `2^e · ∏ (|Ψ_i|·|A| + 1)`, where `e` bounds the number of distinct NA
/// instance sets. With no NA formulas the first factor is 1.
pub fn product_bound(sizes: &FamilySizes, set_size: usize) -> u128 {
    let na_factor: u128 = if sizes.na_formulas == 0 {
        1
    } else {
        let n = sizes.na_sets as u128;
        let u = sizes.na_formulas as u32;
        let e = n.saturating_pow(u).max(n * u as u128);
        if e >= 127 {
            u128::MAX
        } else {
            1u128 << e
        }
    };
    sizes
        .families
        .iter()
        .fold(na_factor, |acc, &f| acc.saturating_mul(f as u128 * set_size as u128 + 1))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcEstimate {
    /// `(|A|, max count, product bound)` per size.
    pub rows: Vec<(usize, usize, u128)>,
    pub slope: f64,
    pub within_bound: bool,
}

/// A random parameter tuple with coordinates in `[-r, r]`.
fn random_tuple(rng: &mut FuzzRng, spec: &GroupSpec, arity: usize, r: i64) -> Vec<GroupElement> {
    (0..arity)
        .map(|_| GroupElement::from_ints(&(0..spec.k()).map(|_| rng.gen_range(-r..=r)).collect::<Vec<_>>()))
        .collect()
}

/// For each size, the largest atom count over `trials` random parameter
/// sets, and the slope of those maxima on a log-log scale.
pub fn estimate_dual_vc(
    phi: &Formula,
    x: &str,
    params: &[String],
    spec: &GroupSpec,
    sizes: &[usize],
    trials: usize,
    rng: &mut FuzzRng,
) -> Result<VcEstimate> {
    let fam = family_sizes(phi, spec)?;
    let mut rows = Vec::new();
    let mut within = true;
    for &n in sizes {
        let mut best = 0;
        for _ in 0..trials {
            let set: Vec<Vec<GroupElement>> =
                (0..n).map(|_| random_tuple(rng, spec, params.len(), 8 * n as i64)).collect();
            best = best.max(count_atoms(phi, x, params, &set, spec)?.atom_count);
        }
        let bound = product_bound(&fam, n);
        within &= best as u128 <= bound;
        rows.push((n, best, bound));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(n, c, _)| (n as f64, c as f64)).collect();
    Ok(VcEstimate { rows, slope: log_log_slope(&pts), within_bound: within })
}

/// From an ict pattern with `n` rows and more than `m` columns: the
/// disjunction `ψ = ⋁ ψ_i` with each row's parameters renamed apart, and the
/// parameter set `b_(i,j)` that agrees with the last column except at row
/// `i`, where it takes column `j < m`. Its instances realize at least `m^n`
/// truth vectors.
pub fn psi_disjunction(p: &Pattern, m: usize) -> Result<(Formula, Vec<String>, Vec<Vec<GroupElement>>)> {
    if p.columns() <= m {
        return Err(OagError::Precondition(format!("need more than {m} columns, pattern has {}", p.columns())));
    }
    let mut params = Vec::new();
    let mut parts = Vec::new();
    for (i, row) in p.rows.iter().enumerate() {
        let names: Vec<String> = row.params.iter().map(|v| format!("{v}{i}")).collect();
        let f = row.formula.map_atoms(&mut |a: &Atom| {
            Formula::atom(a.map_term(|t| {
                row.params.iter().zip(&names).fold(t.clone(), |acc, (u, v)| acc.substitute(u, &Term::var(v)))
            }))
        });
        parts.push(f);
        params.extend(names);
    }
    let last: Vec<Vec<GroupElement>> = p.rows.iter().map(|r| r.columns[m].clone()).collect();
    let mut set = Vec::new();
    for i in 0..p.rows.len() {
        for j in 0..m {
            let mut tuple = Vec::new();
            for (r, row) in p.rows.iter().enumerate() {
                tuple.extend(if r == i { row.columns[j].clone() } else { last[r].clone() });
            }
            set.push(tuple);
        }
    }
    Ok((Formula::or(parts), params, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::RankOneRealization as R;
    use crate::patterns::construct_dp_witness;
    use crate::syntax::parse_formula;

    fn z() -> GroupSpec {
        GroupSpec::from_realizations(vec![R::integers()])
    }

    fn ints(v: &[i64]) -> Vec<Vec<GroupElement>> {
        v.iter().map(|&c| vec![GroupElement::from_ints(&[c])]).collect()
    }

    #[test]
    fn small_counts() {
        let g = z();
        let le = parse_formula("x <= y", &g).unwrap();
        let y = vec!["y".to_string()];
        assert_eq!(count_atoms(&le, "x", &y, &ints(&[1, 5, -3, 8, 0]), &g).unwrap().atom_count, 6);
        let par = parse_formula("x == y mod 2G", &g).unwrap();
        assert_eq!(count_atoms(&par, "x", &y, &ints(&[0, 1, 2]), &g).unwrap().atom_count, 2);
        let t = parse_formula("x = x", &g).unwrap();
        assert_eq!(count_atoms(&t, "x", &y, &ints(&[0, 1, 2]), &g).unwrap().atom_count, 1);
    }

    #[test]
    fn bounds() {
        let one = FamilySizes { families: vec![1], na_formulas: 0, na_sets: 1 };
        assert_eq!(product_bound(&one, 5), 6);
        let two = FamilySizes { families: vec![1, 1], na_formulas: 0, na_sets: 1 };
        assert_eq!(product_bound(&two, 5), 36);
        let na = FamilySizes { families: vec![], na_formulas: 1, na_sets: 2 };
        assert_eq!(product_bound(&na, 5), 4);
    }

    #[test]
    fn slopes() {
        let g = z();
        let y = vec!["y".to_string()];
        let mut rng = crate::fuzz::rng(1);
        let le = parse_formula("x <= y", &g).unwrap();
        let est = estimate_dual_vc(&le, "x", &y, &g, &[4, 8, 16, 32], 5, &mut rng).unwrap();
        assert!(est.within_bound);
        assert!(est.slope <= 1.3 && est.slope >= 0.7, "{est:?}");
        let mixed = parse_formula("x <= y or x == y mod 2G", &g).unwrap();
        let est = estimate_dual_vc(&mixed, "x", &y, &g, &[4, 8, 16, 32], 5, &mut rng).unwrap();
        assert!(est.within_bound && est.slope <= 1.3, "{est:?}");
        let t = parse_formula("x = x", &g).unwrap();
        let est = estimate_dual_vc(&t, "x", &y, &g, &[4, 8, 16], 3, &mut rng).unwrap();
        assert!(est.slope.abs() < 0.01);
    }

    #[test]
    fn disjunction_lower_bound() {
        let g = GroupSpec::from_realizations(vec![R::integers(), R::integers()]);
        let p = construct_dp_witness(&g, 3, 5).unwrap();
        let (psi, params, set) = psi_disjunction(&p, 4).unwrap();
        let c = count_atoms(&psi, "x", &params, &set, &g).unwrap();
        assert!(c.atom_count >= 4usize.pow(3), "{c:?}");
    }
}
