use flowcalc::dihomotopy::{branching_space, Direction};
use flowcalc::flow::{is_isomorphic, CombFlow};
use flowcalc::homology::{homology_profile, smith_normal_form, HomologyGroup, IntMatrix};
use flowcalc::presentation::DEFAULT_BUDGET;
use flowcalc::random::{random_bounded_poset, random_presentation, rng};
use flowcalc::simpset::{CellComplex, FinSimplicialSet};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

const CAP: usize = 3;

/// A semi-simplicial set of dimension at most 2 built from a seed; face
/// choices that break the simplicial identities are dropped.
fn space(seed: u64) -> FinSimplicialSet {
    let mut r = rng(seed);
    let mut c = CellComplex::new();
    let v = r.gen_range(1..=4);
    for i in 0..v {
        c.add(0, format!("v{i}"), vec![]).unwrap();
    }
    let e = r.gen_range(0..=4);
    for i in 0..e {
        c.add(1, format!("e{i}"), vec![r.gen_range(0..v), r.gen_range(0..v)]).unwrap();
    }
    if e > 0 {
        for i in 0..r.gen_range(0..=2) {
            let faces = (0..3).map(|_| r.gen_range(0..e)).collect();
            let _ = c.add(2, format!("t{i}"), faces);
        }
    }
    FinSimplicialSet::from_cells(&c, CAP)
}

fn sizes(s: &FinSimplicialSet) -> Vec<usize> {
    (0..=s.cap()).map(|n| s.len(n)).collect()
}

fn betti_sum(a: &[HomologyGroup], b: &[HomologyGroup]) -> Vec<HomologyGroup> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut torsion = [x.torsion.clone(), y.torsion.clone()].concat();
            torsion.sort_by_key(|t| t.parse::<BigInt>().unwrap());
            HomologyGroup { betti: x.betti + y.betti, torsion }
        })
        .collect()
}

fn sorted_torsion(p: Vec<HomologyGroup>) -> Vec<HomologyGroup> {
    p.into_iter()
        .map(|mut g| {
            g.torsion.sort_by_key(|t| t.parse::<BigInt>().unwrap());
            g
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snf_certificates_and_divisibility(rows in 1usize..6, cols in 1usize..6, entries in prop::collection::vec(-6i64..=6, 36)) {
        let m = IntMatrix::from_rows(&(0..rows).map(|i| entries[i * cols..i * cols + cols].to_vec()).collect::<Vec<_>>());
        let snf = smith_normal_form(&m, true);
        prop_assert!(snf.verify(&m));
        prop_assert!(snf.diagonal.iter().all(|d| d.is_positive()));
        for w in snf.diagonal.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        prop_assert_eq!(snf.rank(), smith_normal_form(&m, false).rank());
    }

    #[test]
    fn identities_hold_for_built_spaces(seed in any::<u64>()) {
        let s = space(seed);
        prop_assert_eq!(s.check_identities(), Ok(()));
    }

    #[test]
    fn product_levels_multiply(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (space(a), space(b));
        let p = x.product(&y).unwrap();
        prop_assert_eq!(p.check_identities(), Ok(()));
        for n in 0..=CAP {
            prop_assert_eq!(p.len(n), x.len(n) * y.len(n));
        }
    }

    #[test]
    fn quotient_is_idempotent(seed in any::<u64>(), picks in prop::collection::vec((0usize..4, 0usize..4), 0..3)) {
        let s = space(seed);
        let v = s.len(0);
        let seeds: Vec<(usize, usize, usize)> = picks.iter().map(|&(a, b)| (0, a % v, b % v)).collect();
        let (q, map) = s.quotient(&seeds);
        prop_assert_eq!(q.check_identities(), Ok(()));
        prop_assert_eq!(map.check(&s, &q), Ok(()));
        let again: Vec<(usize, usize, usize)> = seeds.iter().map(|&(n, a, b)| (n, map.apply(n, a), map.apply(n, b))).collect();
        let (q2, map2) = q.quotient(&again);
        prop_assert_eq!(sizes(&q2), sizes(&q));
        prop_assert!(map2.is_injective());
        for &(n, a, b) in &seeds {
            prop_assert_eq!(map.apply(n, a), map.apply(n, b));
        }
    }

    #[test]
    fn homology_ignores_relabeling(seed in any::<u64>(), shuffle in any::<u64>()) {
        let s = space(seed);
        let mut r = rng(shuffle);
        let perm: Vec<Vec<usize>> = (0..=CAP)
            .map(|n| {
                let mut p: Vec<usize> = (0..s.len(n)).collect();
                p.shuffle(&mut r);
                p
            })
            .collect();
        let t = s.relabeled(&perm);
        prop_assert_eq!(t.check_identities(), Ok(()));
        prop_assert_eq!(sorted_torsion(homology_profile(&t)), sorted_torsion(homology_profile(&s)));
    }

    #[test]
    fn homology_adds_over_disjoint_union(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (space(a), space(b));
        let u = FinSimplicialSet::disjoint_union(&[&x, &y]).unwrap();
        let want = betti_sum(&homology_profile(&x), &homology_profile(&y));
        prop_assert_eq!(sorted_torsion(homology_profile(&u)), want);
        prop_assert_eq!(u.components().len(), x.components().len() + y.components().len());
    }

    #[test]
    fn chain_lengths_are_bounded_and_superadditive(seed in any::<u64>(), density in 0.1f64..0.8) {
        let p = random_bounded_poset(&mut rng(seed), 8, density);
        let t = p.length_table();
        let n = p.len();
        for a in 0..n {
            for b in (0..n).filter(|&b| p.lt(a, b)) {
                let l = t.get(a, b).unwrap();
                prop_assert!(l >= 1 && l < p.interval(a, b).len());
                for c in (0..n).filter(|&c| p.lt(b, c)) {
                    prop_assert!(l + t.get(b, c).unwrap() <= t.get(a, c).unwrap());
                }
            }
        }
    }

    #[test]
    fn saturation_ignores_relation_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let pres = random_presentation(&mut rng(seed), 4, 6, CAP);
        let mut other = pres.clone();
        let mut r = rng(shuffle);
        other.relations.shuffle(&mut r);
        for rel in other.relations.iter_mut() {
            if r.gen_bool(0.5) {
                std::mem::swap(&mut rel.0, &mut rel.1);
            }
        }
        let x = pres.saturate(DEFAULT_BUDGET).unwrap();
        let y = other.saturate(DEFAULT_BUDGET).unwrap();
        prop_assert!(is_isomorphic(&x.flow, &y.flow));
    }

    #[test]
    fn branching_of_a_coproduct_is_computed_per_part(a in any::<u64>(), b in any::<u64>()) {
        let x = random_presentation(&mut rng(a), 3, 4, CAP).saturate(DEFAULT_BUDGET).unwrap().flow;
        let y = random_presentation(&mut rng(b), 3, 4, CAP).saturate(DEFAULT_BUDGET).unwrap().flow;
        let u = CombFlow::coproduct(&[&x, &y]).unwrap();
        for dir in Direction::BOTH {
            let whole = branching_space(&u, dir);
            let parts: Vec<_> = branching_space(&x, dir).states.into_iter().chain(branching_space(&y, dir).states).collect();
            prop_assert_eq!(whole.states.len(), parts.len());
            for (w, p) in whole.states.iter().zip(&parts) {
                prop_assert_eq!(w.space.as_ref().map(sizes), p.space.as_ref().map(sizes));
            }
        }
    }

    #[test]
    fn branching_classes_form_a_jointly_surjective_cocone(seed in any::<u64>()) {
        let x = random_presentation(&mut rng(seed), 4, 6, CAP).saturate(DEFAULT_BUDGET).unwrap().flow;
        for dir in Direction::BOTH {
            for st in branching_space(&x, dir).states {
                let Some(q) = &st.space else {
                    prop_assert!(st.parts.is_empty());
                    continue;
                };
                let s = st.state;
                let part = |o: usize| &st.parts.iter().find(|(p, _)| *p == o).unwrap().1;
                let mut hit: Vec<Vec<bool>> = (0..=CAP).map(|n| vec![false; q.len(n)]).collect();
                for (o, m) in &st.parts {
                    let src = match dir {
                        Direction::Minus => x.path(s, *o),
                        Direction::Plus => x.path(*o, s),
                    }
                    .unwrap();
                    prop_assert_eq!(m.check(src, q), Ok(()));
                    for n in 0..=CAP {
                        for k in 0..src.len(n) {
                            hit[n][m.apply(n, k)] = true;
                        }
                    }
                    for n in 0..=CAP {
                        match dir {
                            Direction::Minus => {
                                for t in x.successors(*o) {
                                    for k in 0..src.len(n) {
                                        for l in 0..x.path(*o, t).unwrap().len(n) {
                                            prop_assert_eq!(m.apply(n, k), part(t).apply(n, x.compose(s, *o, t, n, k, l)));
                                        }
                                    }
                                }
                            }
                            Direction::Plus => {
                                for t in x.predecessors(*o) {
                                    for k in 0..x.path(t, *o).unwrap().len(n) {
                                        for l in 0..src.len(n) {
                                            prop_assert_eq!(m.apply(n, l), part(t).apply(n, x.compose(t, *o, s, n, k, l)));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                prop_assert!(hit.iter().flatten().all(|&h| h));
            }
        }
    }

    #[test]
    fn glob_branching_space_is_the_space(seed in any::<u64>()) {
        let z = space(seed);
        let g = CombFlow::glob(z.clone());
        let minus = branching_space(&g, Direction::Minus);
        let plus = branching_space(&g, Direction::Plus);
        prop_assert_eq!(minus.states[0].space.as_ref().map(sizes), Some(sizes(&z)));
        prop_assert!(minus.states[1].space.is_none());
        prop_assert_eq!(plus.states[1].space.as_ref().map(sizes), Some(sizes(&z)));
        prop_assert!(plus.states[0].space.is_none());
    }
}
