//! Property tests for the exact-arithmetic, monoid, element and derivation layers.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use logres::chartring::ChartRing;
use logres::derivations::standard_derivations;
use logres::element::{RingElement, TermKey};
use logres::exactmath::{
    hnf, hnf_basis, lattice_coords_hnf, lp_feasible, ratio, IntMatrix, Rational,
};
use logres::monoid::{
    monomial_saturation, saturation_member_lp, LatticePoint, MonomialIdeal, ToricMonoid,
};
use logres::problem::ProblemFile;

const NVARS: usize = 2;
const RANK: usize = 2;

fn element() -> impl Strategy<Value = RingElement> {
    let term = (
        prop::collection::vec(0u32..3, NVARS),
        prop::collection::vec(0i64..3, RANK),
        -5i64..6,
        1i64..4,
    );
    prop::collection::vec(term, 0..5).prop_map(|terms| {
        RingElement::from_terms(
            NVARS,
            RANK,
            terms.into_iter().map(|(exps, q, n, d)| {
                (
                    TermKey {
                        exps,
                        q: LatticePoint::from_i64(&q),
                    },
                    ratio(n, d),
                )
            }),
        )
    })
}

fn free_ring() -> ChartRing {
    ChartRing::new(Arc::new(ToricMonoid::free(RANK, vec![]).unwrap()), NVARS)
}

/// A pointed two-dimensional cone spanned by `(1,0)` and `(p,q)` with `q >= 1`.
fn wedge(p: i64, q: i64) -> ToricMonoid {
    let id = vec![
        vec![BigInt::one(), BigInt::zero()],
        vec![BigInt::zero(), BigInt::one()],
    ];
    ToricMonoid::new(
        2,
        BigInt::one(),
        id,
        vec![
            LatticePoint::from_i64(&[1, 0]),
            LatticePoint::from_i64(&[p, q]),
        ],
        vec![],
        vec![],
    )
    .unwrap()
}

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..4, 1usize..4)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-6i64..7, c), r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leibniz_rule(f in element(), g in element()) {
        let ring = free_ring();
        for d in standard_derivations(&ring).unwrap().gens() {
            let lhs = d.apply(&f.mul(&g));
            let rhs = d.apply(&f).mul(&g).add(&f.mul(&d.apply(&g)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn derivations_are_additive(f in element(), g in element()) {
        let ring = free_ring();
        for d in standard_derivations(&ring).unwrap().gens() {
            prop_assert_eq!(d.apply(&f.add(&g)), d.apply(&f).add(&d.apply(&g)));
        }
    }

    #[test]
    fn element_text_round_trips(f in element()) {
        let back = RingElement::parse(&f.to_string(), NVARS, RANK).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn hnf_is_unimodular_and_echelon(rows in matrix()) {
        let m = IntMatrix::from_i64(&rows).unwrap();
        let (h, u) = hnf(&m).unwrap();
        prop_assert_eq!(&u.mul(&m).unwrap(), &h);
        prop_assert!(u.det().unwrap().abs().is_one());
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for (i, row) in h.rows().iter().enumerate() {
            match row.iter().position(|x| !x.is_zero()) {
                None => seen_zero = true,
                Some(p) => {
                    prop_assert!(!seen_zero, "zero rows come last");
                    prop_assert!(last_pivot.is_none_or(|l| p > l), "pivots strictly increase");
                    prop_assert!(row[p].is_positive());
                    for above in &h.rows()[..i] {
                        prop_assert!(!above[p].is_negative() && above[p] < row[p]);
                    }
                    last_pivot = Some(p);
                }
            }
        }
    }

    #[test]
    fn hnf_basis_spans_the_row_lattice(rows in matrix()) {
        let m = IntMatrix::from_i64(&rows).unwrap();
        let basis = hnf_basis(&m).unwrap();
        for row in m.rows() {
            prop_assert!(lattice_coords_hnf(row, &basis).unwrap().is_some());
        }
        // every basis row is an integer combination of the input rows
        let (h, u) = hnf(&m).unwrap();
        for (hr, ur) in h.rows().iter().zip(u.rows()) {
            let combo: Vec<BigInt> = (0..m.ncols())
                .map(|j| ur.iter().zip(m.rows()).map(|(c, r)| c * &r[j]).sum())
                .collect();
            prop_assert_eq!(&combo, hr);
        }
    }

    #[test]
    fn lp_agrees_with_explicit_combination(
        a in prop::collection::vec(prop::collection::vec(-3i64..4, 3), 2),
        x in prop::collection::vec(0i64..4, 3),
    ) {
        // b = a * x with x >= 0 is feasible by construction
        let ar: Vec<Vec<Rational>> = a.iter().map(|r| r.iter().map(|&v| ratio(v, 1)).collect()).collect();
        let b: Vec<Rational> = ar
            .iter()
            .map(|r| r.iter().zip(&x).map(|(c, &v)| c * ratio(v, 1)).sum())
            .collect();
        prop_assert!(lp_feasible(&ar, &b));
    }

    #[test]
    fn lp_rejects_sign_obstructed_targets(
        a in prop::collection::vec(prop::collection::vec(0i64..4, 3), 2),
        b in 1i64..5,
    ) {
        // a nonnegative row cannot reach a negative right-hand side
        let ar: Vec<Vec<Rational>> = a.iter().map(|r| r.iter().map(|&v| ratio(v, 1)).collect()).collect();
        prop_assert!(!lp_feasible(&ar, &[ratio(-b, 1), ratio(0, 1)]));
    }

    #[test]
    fn cone_membership_lp_matches_facets(p in -3i64..4, q in 1i64..4, x in -6i64..7, y in -6i64..7) {
        let m = wedge(p, q);
        let pt = LatticePoint::from_i64(&[x, y]);
        prop_assert_eq!(m.in_cone(&pt), m.in_cone_lp(&pt));
        // direct test: y >= 0 and q*x - p*y >= 0
        prop_assert_eq!(m.in_cone(&pt), y >= 0 && q * x - p * y >= 0);
    }

    #[test]
    fn hilbert_basis_decomposes_and_is_irreducible(p in -3i64..4, q in 1i64..5) {
        let m = wedge(p, q);
        let hb = m.hilbert_basis().unwrap();
        for h in hb.iter() {
            prop_assert!(!h.is_zero());
            for g in hb.iter() {
                if g != h {
                    prop_assert!(!m.divides(g, h), "{} divides {}", g, h);
                }
            }
        }
        let lo = vec![ratio(-8, 1), ratio(0, 1)];
        let hi = vec![ratio(8, 1), ratio(5, 1)];
        for pt in m.box_points(&lo, &hi).unwrap() {
            if !m.contains(&pt).unwrap() {
                continue;
            }
            let w = m.decompose(&pt).unwrap();
            let mut sum = LatticePoint::zero(2);
            for (c, h) in w.iter().zip(hb.iter()) {
                sum = sum.add(&h.scale(&ratio(*c as i64, 1)));
            }
            prop_assert_eq!(sum, pt);
        }
    }

    #[test]
    fn saturation_generators_match_lp_membership(
        gens in prop::collection::vec((0i64..5, 0i64..5), 1..4),
        p in -2i64..3,
        q in 1i64..3,
    ) {
        let m = Arc::new(wedge(p, q));
        let pts: Vec<LatticePoint> = gens
            .iter()
            .map(|&(a, b)| LatticePoint::from_i64(&[a + 3 * b, b]))
            .filter(|pt| m.contains(pt).unwrap())
            .collect();
        prop_assume!(!pts.is_empty());
        let n = MonomialIdeal::new(m.clone(), pts).unwrap();
        let sat = monomial_saturation(&n).unwrap();
        let lo = vec![ratio(-4, 1), ratio(0, 1)];
        let hi = vec![ratio(12, 1), ratio(8, 1)];
        for pt in m.box_points(&lo, &hi).unwrap() {
            if !m.contains(&pt).unwrap() {
                continue;
            }
            prop_assert_eq!(sat.contains(&pt), saturation_member_lp(&n, &pt), "at {}", pt);
        }
        for g in n.gens() {
            prop_assert!(sat.contains(g));
        }
    }
}

#[test]
fn problem_files_round_trip_through_display() {
    for f in logres::corpus::corpus() {
        let p = f.problem().unwrap();
        let back = ProblemFile::parse(&p.to_string()).unwrap();
        assert_eq!(back.to_string(), p.to_string(), "{}", f.name);
        assert_eq!(back.ideal, p.ideal, "{}", f.name);
        assert_eq!(back.relations, p.relations, "{}", f.name);
        assert_eq!(back.cone, p.cone, "{}", f.name);
    }
}
