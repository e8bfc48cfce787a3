mod common;

use k3twist::criteria;
use k3twist::elliptic::{self, normalize_twist, CurvePoint, Family, TwistedCurve};
use k3twist::numtheory::{self, squarefree_class};
use k3twist::quartic::{self, hyperelliptic_involution, invariants, QuarticCoeffs, QuarticTorsor, TorsorPoint};
use k3twist::rational::{frac, int, ExactRational};
use k3twist::surface::{self, phi_map, SurfaceFamily};
use num_traits::Zero;
use proptest::prelude::*;
use rayon::prelude::*;

use common::{bases, combo, twisted_add};

fn small_rational() -> impl Strategy<Value = ExactRational> {
    (-50i64..=50, 1i64..=50).prop_map(|(n, d)| frac(n, d))
}

fn nonzero_rational() -> impl Strategy<Value = ExactRational> {
    small_rational().prop_filter("nonzero", |q| !q.is_zero())
}

/// A basis index, coefficients and a torsion index.
fn group_element() -> impl Strategy<Value = (usize, Vec<i64>, usize)> {
    (0usize..3, prop::collection::vec(-4i64..=4, 2), 0usize..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn group_law_axioms(
        (bi, c1, k1) in group_element(),
        (c2, k2) in (prop::collection::vec(-4i64..=4, 2), 0usize..4),
        (c3, k3) in (prop::collection::vec(-4i64..=4, 2), 0usize..4),
    ) {
        let b = &bases()[bi];
        let e = &b.curve;
        let (p, q, r) = (combo(b, &c1, k1), combo(b, &c2, k2), combo(b, &c3, k3));
        let lhs = e.add(&e.add(&p, &q).unwrap(), &r).unwrap();
        let rhs = e.add(&p, &e.add(&q, &r).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert!(e.contains(&lhs));
        prop_assert_eq!(e.add(&p, &q).unwrap(), e.add(&q, &p).unwrap());
        prop_assert_eq!(e.add(&p, &CurvePoint::Infinity).unwrap(), p.clone());
        prop_assert_eq!(e.add(&p, &e.neg(&p)).unwrap(), CurvePoint::Infinity);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn squarefree_class_ignores_squares(q in nonzero_rational(), r in nonzero_rational()) {
        prop_assert_eq!(squarefree_class(&(&q * &r * &r)).unwrap(), squarefree_class(&q).unwrap());
    }

    #[test]
    fn scalar_mul_matches_repeated_addition((bi, c, k) in group_element(), n in -6i64..=6) {
        let b = &bases()[bi];
        let p = combo(b, &c, k);
        let mut acc = CurvePoint::Infinity;
        for _ in 0..n.unsigned_abs() {
            acc = b.curve.add(&acc, &p).unwrap();
        }
        if n < 0 {
            acc = b.curve.neg(&acc);
        }
        prop_assert_eq!(b.curve.scalar_mul(n, &p).unwrap(), acc);
    }

    #[test]
    fn normalize_twist_is_a_homomorphism((bi, c1, k1) in group_element(), (c2, k2) in (prop::collection::vec(-3i64..=3, 2), 0usize..4)) {
        let b = &bases()[bi];
        let tw = TwistedCurve::congruent(b.d).unwrap();
        let p = elliptic::denormalize_twist(&tw, &combo(b, &c1, k1)).unwrap();
        let q = elliptic::denormalize_twist(&tw, &combo(b, &c2, k2)).unwrap();
        prop_assert!(tw.contains_twisted(&p) && tw.contains_twisted(&q));
        let sum = twisted_add(b.d, -1, &p, &q);
        prop_assert!(tw.contains_twisted(&sum));
        let lhs = normalize_twist(&tw, &sum).unwrap();
        let rhs = b.curve.add(&normalize_twist(&tw, &p).unwrap(), &normalize_twist(&tw, &q).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn two_isogeny_is_a_homomorphism((bi, c1, k1) in group_element(), (c2, k2) in (prop::collection::vec(-3i64..=3, 2), 0usize..4)) {
        let b = &bases()[bi];
        let target = criteria::two_isogeny_target(b.d).unwrap();
        let (p, q) = (combo(b, &c1, k1), combo(b, &c2, k2));
        let psi = |x: &CurvePoint| criteria::two_isogeny_image(b.d, x).unwrap();
        let lhs = psi(&b.curve.add(&p, &q).unwrap());
        prop_assert!(target.contains(&lhs));
        prop_assert_eq!(lhs, target.add(&psi(&p), &psi(&q)).unwrap());
    }

    #[test]
    fn invariants_have_weights_four_and_six(
        coeffs in (1i64..=9, -9i64..=9, -9i64..=9, -9i64..=9),
        lambda in nonzero_rational(),
    ) {
        let g = QuarticCoeffs::from_ints(coeffs.0, coeffs.1, coeffs.2, coeffs.3);
        let base = invariants(&g).unwrap();
        let scaled = invariants(&g.scale_variable(&lambda)).unwrap();
        let l2 = &lambda * &lambda;
        prop_assert_eq!(scaled.i, &base.i * &l2 * &l2);
        prop_assert_eq!(scaled.j, &base.j * &l2 * &l2 * &l2);
    }
}

#[test]
fn second_basis_has_rank_two_evidence() {
    let b = &bases()[1];
    assert_eq!(criteria::rank_lower_bound(b.d, &b.gens).unwrap(), 2);
}

#[test]
fn heights_grow_along_doublings() {
    for b in bases() {
        for g in &b.gens {
            let bits: Vec<u64> = [1, 2, 4, 8].iter().map(|&n| b.curve.scalar_mul(n, g).unwrap().height_bits()).collect();
            assert!(bits.windows(2).all(|w| w[0] < w[1]), "{bits:?} for {g} on E^{}", b.d);
        }
    }
}

#[test]
fn twists_have_full_two_torsion() {
    for d in [1i64, 2, 3, 5, 6, 7, 13, 15, 34, 119, -5] {
        let tw = TwistedCurve::congruent(d).unwrap();
        let t = tw.two_torsion_twisted();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|p| tw.contains_twisted(p)));
        for p in &t {
            assert_eq!(twisted_add(d, -1, p, p), CurvePoint::Infinity);
        }
    }
}

#[test]
fn twisted_oracle_agrees_on_the_plus_family() {
    let tw = TwistedCurve::new(10, Family::Plus).unwrap();
    let e = tw.normalized();
    let p = e.first_non_torsion(1000).expect("isogenous to E^5");
    let q = e.scalar_mul(3, &p).unwrap();
    let (pt, qt) = (elliptic::denormalize_twist(&tw, &p).unwrap(), elliptic::denormalize_twist(&tw, &q).unwrap());
    let sum = twisted_add(10, 1, &pt, &qt);
    assert_eq!(normalize_twist(&tw, &sum).unwrap(), e.add(&p, &q).unwrap());
}

#[test]
fn factorization_reconstructs() {
    let bad: Vec<i64> = (-1_000_000i64..=1_000_000)
        .into_par_iter()
        .filter(|&n| n != 0)
        .filter(|&n| {
            let f = numtheory::factorize_i64(n).unwrap();
            let primes_ok = f.prime_powers.iter().all(|&(p, _)| numtheory::is_prime(p));
            let increasing = f.prime_powers.windows(2).all(|w| w[0].0 < w[1].0);
            let prod: i64 = f.prime_powers.iter().map(|&(p, e)| (p as i64).pow(e)).product::<i64>() * f.sign as i64;
            !(primes_ok && increasing && prod == n)
        })
        .collect();
    assert!(bad.is_empty(), "{:?}", &bad[..bad.len().min(10)]);
}

fn pow_mod(b: u64, e: u64, m: u64) -> u64 {
    (0..e).fold(1, |acc, _| acc * b % m)
}

fn small_primes(limit: u64) -> Vec<u64> {
    (2..limit).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

#[test]
fn jacobi_matches_euler_criterion() {
    for p in small_primes(1000).into_iter().filter(|&p| p > 2) {
        for a in 0..p {
            let e = pow_mod(a, (p - 1) / 2, p);
            let expected = match e {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            assert_eq!(numtheory::jacobi_i64(a as i64, p as i64).unwrap(), expected, "({a}/{p})");
        }
    }
}

#[test]
fn fourth_powers_match_enumeration() {
    for p in small_primes(1000).into_iter().filter(|&p| p > 2) {
        let fourth: std::collections::HashSet<u64> = (0..p).map(|x| x.pow(2) % p * (x.pow(2) % p) % p).collect();
        for a in 0..p as i64 {
            assert_eq!(numtheory::is_fourth_power_mod_p(a, p).unwrap(), fourth.contains(&(a as u64)), "{a} mod {p}");
        }
    }
}

fn torsor_points(torsor: &QuarticTorsor, count: usize) -> Vec<TorsorPoint> {
    let seed = quartic::search_until_found(torsor, 10_000);
    let p0 = quartic::preferred_point(&seed).expect("torsor has a point");
    let map = quartic::to_weierstrass_with_point(torsor, &p0).unwrap();
    let r = map.involution_image();
    let mut out = vec![p0.clone(), hyperelliptic_involution(&p0)];
    let mut acc = CurvePoint::Infinity;
    while out.len() < count {
        acc = map.curve().add(&acc, &r).unwrap();
        if let Ok(q) = map.backward(&acc) {
            out.push(q);
        }
    }
    out
}

#[test]
fn torsor_group_law_transported() {
    for (a, c) in [(2i64, 5i64), (1, 17), (2, 13)] {
        let torsor = QuarticTorsor::cassels_schinzel(a, c).unwrap();
        let pts = torsor_points(&torsor, 8);
        assert!(pts.iter().all(|p| torsor.contains(p)));
        let map = quartic::to_weierstrass_with_point(&torsor, &pts[0]).unwrap();
        for p in &pts[..4] {
            for q in &pts[..4] {
                let pq = map.transported_add(p, q);
                let qp = map.transported_add(q, p);
                if let (Ok(pq), Ok(qp)) = (&pq, &qp) {
                    assert_eq!(pq, qp);
                    assert!(torsor.contains(pq));
                }
                for r in &pts[1..3] {
                    let left = map.transported_add(p, q).and_then(|x| map.transported_add(&x, r));
                    let right = map.transported_add(q, r).and_then(|x| map.transported_add(p, &x));
                    if let (Ok(l), Ok(rr)) = (left, right) {
                        assert_eq!(l, rr);
                    }
                }
            }
        }
    }
}

#[test]
fn minimal_model_class_matches_jacobian_twist() {
    for a in [1i64, 2, 3] {
        let torsor = QuarticTorsor::cassels_schinzel(a, 1).unwrap();
        let model = quartic::weierstrass_model(&torsor).unwrap();
        let class = elliptic::congruent_twist_class(&model).unwrap().expect("a twist of x^3 - x");
        assert_eq!(class, numtheory::squarefree_class_int(2 * a).unwrap(), "a = {a}");
    }
}

#[test]
fn torsor_search_points_satisfy_equation() {
    for (a, c) in [(1i64, 17i64), (2, 5), (2, 29), (3, 10)] {
        let torsor = QuarticTorsor::cassels_schinzel(a, c).unwrap();
        assert!(torsor.search_points(300).iter().all(|p| torsor.contains(p)), "a={a} C={c}");
    }
}

#[test]
fn phi_is_symmetric_under_the_involution() {
    let family = SurfaceFamily::new(3, 2).unwrap();
    let torsor = family.torsor(5).unwrap();
    let pts = torsor_points(&torsor, 6);
    let fiber = TwistedCurve::congruent(15).unwrap();
    let e = fiber.normalized();
    let w = e.first_non_torsion(100).unwrap();
    for n in 1..=4 {
        let cp = elliptic::denormalize_twist(&fiber, &e.scalar_mul(n, &w).unwrap()).unwrap();
        for q in &pts {
            let s = phi_map(&family, &torsor, &cp, q).unwrap();
            let r = phi_map(&family, &torsor, &cp, &hyperelliptic_involution(q)).unwrap();
            assert_eq!((&r.x, &r.t), (&s.x, &s.t));
            assert_eq!(r.y, -&s.y);
            assert!(family.contains(&s) && family.contains(&r));
        }
    }
}

#[test]
fn atlas_points_carry_non_torsion_fiber_witnesses() {
    let family = SurfaceFamily::new(3, 2).unwrap();
    let cert = surface::spr_check(&family, 5, 10_000, None).unwrap().certificate.unwrap();
    let atlas = surface::atlas_generate(&cert, (3, 2)).unwrap();
    assert!(!atlas.points.is_empty());
    for p in atlas.points.iter().filter(|p| !p.exceptional) {
        let (curve, q) = surface::fiber_point(&family, p).unwrap();
        assert!(curve.normalized().is_non_torsion(&q).unwrap(), "{p}");
        assert_eq!(surface::evaluation_class(2, &p.t).unwrap(), numtheory::squarefree_class_int(5).unwrap());
    }
}

#[test]
fn fiber_primes_are_one_mod_eight() {
    for (l, m) in k3twist::diagnostics::random_coprime_pairs(500, 40, 11) {
        assert!(criteria::fiber_prime_check(l, m).unwrap(), "({l}, {m})");
    }
}

#[test]
fn a2_guarantee_is_one_sided() {
    for c in (1..=200i64).filter(|&c| numtheory::is_squarefree(c).unwrap()) {
        if criteria::solubility_a2(c).unwrap().kind == criteria::VerdictKind::GuaranteedSoluble {
            let torsor = QuarticTorsor::cassels_schinzel(2, c).unwrap();
            let places = criteria::brute_all_bad_places(&torsor, 12).unwrap();
            assert!(places.iter().all(|(_, ok)| *ok), "C = {c}: {places:?}");
        }
    }
}

#[test]
fn isogeny_target_is_in_the_plus_family() {
    for d in [5i64, 6, 15, 34] {
        let target = criteria::two_isogeny_target(d).unwrap();
        let twist = criteria::two_isogeny_target_twist(d).unwrap();
        // 2D = D'·m², so y² = x³ + 4D²x is the D' model scaled by m.
        let m2 = int(2 * d) / int(twist.d);
        let m = k3twist::rational::sqrt_rational(&m2).expect("square ratio");
        assert_eq!(twist.normalized().scaled(&m), target, "D = {d}");
    }
}
