use std::time::Instant;

use hawkit::dynamics::*;
use hawkit::numerics::{ceil, floor, int, pow_i, rat, PowerProduct, Rational, Weights};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn w(l: i64, m: i64) -> Weights {
    Weights::from_lambda(rat(l, m)).unwrap()
}

/// Minimum sup norm over nonzero `n` for an upper-triangular basis, by back
/// substitution: `|y₃| ≤ u` bounds `n₃`, then `n₂`, then `n₁`.
fn triangular_systole(b: &LatticeBasis) -> Rational {
    let m = b.rows();
    assert!(m[1][0].is_zero() && m[2][0].is_zero() && m[2][1].is_zero());
    // A nonzero point with norm at most 1 exists in any unimodular lattice.
    let u = (0..3).map(|j| sup_norm(&b.column(j))).min().unwrap().min(int(1));
    let range = |shift: &Rational, diag: &Rational| {
        // |diag·n + shift| ≤ u
        let d = diag.abs();
        let c = -shift / diag;
        (ceil(&(&c - &u / &d)), floor(&(&c + &u / &d)))
    };
    let mut best = u.clone();
    let (lo3, hi3) = range(&Rational::zero(), &m[2][2]);
    let mut n3 = lo3;
    while n3 <= hi3 {
        let t3 = Rational::from_integer(n3.clone());
        let (lo2, hi2) = range(&(&m[1][2] * &t3), &m[1][1]);
        let mut n2 = lo2;
        while n2 <= hi2 {
            let t2 = Rational::from_integer(n2.clone());
            let (lo1, hi1) = range(&(&m[0][1] * &t2 + &m[0][2] * &t3), &m[0][0]);
            let mut n1 = lo1;
            while n1 <= hi1 {
                if !(n1.is_zero() && n2.is_zero() && n3.is_zero()) {
                    let v = sup_norm(&b.apply(&[n1.clone(), n2.clone(), n3.clone()]));
                    if v < best {
                        best = v;
                    }
                }
                n1 += 1;
            }
            n2 += 1;
        }
        n3 += 1;
    }
    best
}

/// Integer unimodular matrix from elementary column operations.
fn shuffle(ops: &[(usize, usize, i64)]) -> LatticeBasis {
    let mut t = LatticeBasis::identity();
    for &(i, j, k) in ops {
        if i == j {
            continue;
        }
        let mut e = LatticeBasis::identity().rows().clone();
        e[i][j] = int(k);
        t = t.mul(&LatticeBasis::new(e));
    }
    t
}

fn small_rat(bound: i64, den: i64) -> impl Strategy<Value = Rational> {
    (-bound * den..=bound * den).prop_map(move |n| rat(n, den))
}

fn weight_strategy() -> impl Strategy<Value = Weights> {
    prop_oneof![Just(w(1, 2)), Just(w(2, 3)), Just(w(3, 4)), Just(w(3, 5))]
}

fn triangular_strategy() -> impl Strategy<Value = LatticeBasis> {
    (
        small_rat(1, 6),
        small_rat(1, 6),
        small_rat(2, 4),
        weight_strategy(),
        prop_oneof![Just(int(1)), Just(rat(1, 2)), Just(rat(2, 3)), Just(rat(3, 4)), Just(rat(4, 5))],
        1u32..3,
        small_rat(1, 3),
    )
        .prop_map(|(x, y, z, w, s, k, x2)| {
            let ft = FlowTime::new(s, w.denominator() * k).unwrap();
            let b = orbit_basis(&x, &y, &z, &w, &ft).unwrap();
            unipotent(&x2, &int(0), &rat(-1, 2)).mul(&b)
        })
}

fn ops_strategy() -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::vec((0usize..3, 0usize..3, -3i64..=3), 0..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn systole_matches_triangular_enumeration(b in triangular_strategy(), ops in ops_strategy()) {
        prop_assert!(b.is_unimodular());
        let expected = triangular_systole(&b);
        // Same lattice, different generators.
        let t = shuffle(&ops);
        prop_assert!(t.is_unimodular());
        let mixed = b.mul(&t);
        let s = systole(&mixed).unwrap();
        prop_assert_eq!(&s.value, &expected);
        prop_assert!(s.value <= int(1));
        prop_assert_eq!(sup_norm(&mixed.apply(&s.argmin)), s.value.clone());
        prop_assert_eq!(sign_normalize(s.argmin.clone()), s.argmin.clone());
    }

    #[test]
    fn unreduced_search_agrees_on_mild_bases(
        x in small_rat(1, 4), y in small_rat(1, 4), z in small_rat(1, 2), s in prop_oneof![Just(int(1)), Just(rat(3, 4)), Just(rat(1, 2))],
        ops in prop::collection::vec((0usize..3, 0usize..3, -1i64..=1), 0..2),
    ) {
        let w = w(1, 2);
        let b = orbit_basis(&x, &y, &z, &w, &FlowTime::new(s, 2).unwrap()).unwrap().mul(&shuffle(&ops));
        prop_assert_eq!(systole(&b).unwrap(), systole_unreduced(&b).unwrap());
    }

    #[test]
    fn flows_and_unipotents_preserve_determinant(
        x in small_rat(2, 9), y in small_rat(2, 9), z in small_rat(2, 9), w in weight_strategy(), s in 1i64..9,
    ) {
        let u = unipotent(&x, &y, &z);
        prop_assert_eq!(u.determinant(), int(1));
        prop_assert_eq!(u.mul(&unipotent_inverse(&x, &y, &z)), LatticeBasis::identity());
        let ft = FlowTime::new(rat(1, s), w.denominator()).unwrap();
        let g = flow_apply(&w, &ft, &u).unwrap();
        prop_assert_eq!(g.determinant(), u.determinant());
        prop_assert!(g.check_unimodular().is_ok());
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dani_implications_on_random_points(
        x in small_rat(1, 37), y in small_rat(1, 41), z in small_rat(1, 3), w in weight_strategy(),
    ) {
        let grid = geometric_sigma_grid(&rat(4, 5), w.denominator(), &pow_i(&int(2), -12)).unwrap();
        let r = dani_check(&x, &y, &z, &w, 40, &grid).unwrap();
        prop_assert!(r.corrected_holds(), "{}", r.to_kv());
    }
}

#[test]
fn trajectory_through_rational_point_collapses() {
    let wt = w(2, 3);
    let grid = geometric_sigma_grid(&rat(1, 2), 3, &rat(1, 10_000)).unwrap();
    let rows = trajectory_profile(&rat(1, 3), &rat(1, 2), &int(0), &wt, &grid).unwrap();
    assert_eq!(rows[0].systole.value, int(1));
    let last = rows.last().unwrap();
    assert!(last.systole.value < rat(1, 1000));
    // The image of (2, 3, 6) is (0, 0, 6σ³).
    let six = int(6) * pow_i(&last.sigma, 3);
    assert!(last.systole.value <= six);
    let csv = profile_csv(&rows, true);
    assert!(csv.starts_with("t_index,sigma,m,systole,argmin_p,argmin_r,argmin_q,systole_approx\n"));
    assert_eq!(csv.lines().count(), rows.len() + 1);
}

#[test]
fn trajectory_at_origin_follows_decay() {
    let wt = w(3, 5);
    let grid = geometric_sigma_grid(&rat(2, 3), 5, &rat(1, 1000)).unwrap();
    for row in trajectory_profile(&int(0), &int(0), &int(0), &wt, &grid).unwrap() {
        assert_eq!(row.systole.value, pow_i(&row.sigma, 5));
        if row.t_index > 0 {
            assert_eq!(row.systole.argmin, [BigInt::zero(), BigInt::zero(), BigInt::one()]);
        }
    }
}

#[test]
fn integer_shear_leaves_badness_unchanged() {
    let wt = w(2, 3);
    for (x, y) in [(rat(3, 101), rat(-7, 97)), (rat(22, 71), rat(5, 13)), (rat(1, 3), rat(1, 2))] {
        for z in -2..=2 {
            let z = int(z);
            let a = badness_constant(&x, &y, &z, &wt, 150).unwrap();
            let b = badness_constant(&(&x - &z * &y), &y, &int(0), &wt, 150).unwrap();
            assert_eq!(a.value, b.value);
        }
    }
}

#[test]
fn badness_matches_direct_search() {
    let wt = w(3, 4);
    let (x, y, z) = (rat(5, 17), rat(-4, 19), rat(7, 5));
    for q in 1..=12i64 {
        let got = badness_at(&x, &y, &z, &wt, q as u64).unwrap();
        let mut best: Option<PowerProduct> = None;
        for r in -3 * q..=3 * q {
            for p in -6 * q..=6 * q {
                let v = badness_of(&x, &y, &z, &wt, &[BigInt::from(p), BigInt::from(r), BigInt::from(q)]).unwrap();
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
        }
        assert_eq!(got.value, best.unwrap(), "q = {q}");
    }
}

#[test]
fn dani_on_rational_points_and_origin() {
    let wt = w(2, 3);
    let grid = geometric_sigma_grid(&rat(4, 5), 3, &pow_i(&int(2), -20)).unwrap();
    let start = Instant::now();
    let r = dani_check(&rat(1, 3), &rat(1, 2), &int(0), &wt, 200, &grid).unwrap();
    assert!(r.eps_hat.value.is_zero());
    assert!(r.backward_delta_lambda.is_zero() && r.backward_delta_mu.is_zero());
    assert!(r.stated_holds() && r.corrected_holds(), "{}", r.to_kv());
    let origin = dani_check(&int(0), &int(0), &int(0), &wt, 200, &grid).unwrap();
    assert!(origin.eps_hat.value.is_zero());
    assert_eq!(origin.delta_hat, grid.iter().map(|s| pow_i(s, 3)).min().unwrap());
    assert_eq!(origin.forward_claims, 0);
    assert!(origin.corrected_holds());
    eprintln!("two dani checks: {:?}", start.elapsed());
}
