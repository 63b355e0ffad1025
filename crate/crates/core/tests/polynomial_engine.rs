use hsmoments::cholesky::{self, CholeskyPoint, Ensemble};
use hsmoments::expansion;
use hsmoments::matrix;
use hsmoments::moments;
use hsmoments::poly::{parse_rational, rational_text, Budget, Monomial, SparsePoly};
use hsmoments::polyk::{interpolate, pochhammer_poly, PolyK, RationalFunctionK};
use hsmoments::{Error, Integer, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn x(n: usize, i: usize) -> SparsePoly<Integer> {
    SparsePoly::var(n, i)
}

#[test]
fn binomial_square() {
    let b = Budget::unlimited();
    let s = x(2, 0).add(&x(2, 1));
    let (sq, t) = s.pow(2, &b).unwrap();
    assert_eq!(sq.len(), 3);
    let m = |a: u8, c: u8| Monomial::from_exponents(&[a, c]).unwrap();
    assert_eq!(*sq.coefficient(&m(1, 1)).unwrap(), 2);
    assert_eq!(*sq.coefficient(&m(2, 0)).unwrap(), 1);
    assert_eq!(t.term_counts.first(), Some(&2));
    assert_eq!(t.term_counts.last(), Some(&3));
}

#[test]
fn cancellation_leaves_no_zero_terms() {
    let b = Budget::unlimited();
    let p = x(3, 0).add(&x(3, 1));
    let m = x(3, 0).sub(&x(3, 1));
    let prod = p.mul(&m, &b).unwrap();
    assert_eq!(prod.len(), 2);
    assert!(x(3, 2).sub(&x(3, 2)).is_zero());
}

#[test]
fn budget_overflow_reports_the_cap() {
    let s = (0..6).fold(SparsePoly::<Integer>::zero(6), |acc, i| acc.add(&x(6, i)));
    let err = s.pow(6, &Budget::with_max_terms(100)).unwrap_err();
    match err {
        Error::BudgetExceeded(msg) => assert!(msg.contains("100"), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn text_round_trip_in_grlex_order() {
    let b = Budget::unlimited();
    let p =
        x(3, 0).add(&x(3, 1).scale(&Integer::from(-3))).add(&SparsePoly::one(3)).pow(3, &b).unwrap().0.to_rational();
    let text = p.to_text();
    assert_eq!(SparsePoly::from_text(3, &text).unwrap(), p);
    let degrees: Vec<u32> = p.sorted_terms().iter().map(|(m, _)| m.degree()).collect();
    assert!(degrees.windows(2).all(|w| w[0] >= w[1]));
    assert!(text.lines().all(|l| l.contains('/')));
    assert!(SparsePoly::from_text(2, &text).is_err());
}

#[test]
fn rational_text_keeps_unit_denominator() {
    assert_eq!(rational_text(&q(-42, 1)), "-42/1");
    assert_eq!(parse_rational("-42/1").unwrap(), -42);
    assert_eq!(parse_rational("6/4").unwrap(), q(3, 2));
    assert!(parse_rational("1/0").is_err());
}

fn small_poly() -> impl Strategy<Value = SparsePoly<Rational>> {
    prop::collection::vec((0u8..3, 0u8..3, 0u8..3, -5i64..=5, 1i64..4), 0..6).prop_map(|terms| {
        SparsePoly::from_terms(
            3,
            terms.into_iter().map(|(a, b, c, n, d)| (Monomial::from_exponents(&[a, b, c]).unwrap(), q(n, d))),
        )
    })
}

proptest! {
    #[test]
    fn ring_laws(p in small_poly(), r in small_poly(), s in small_poly()) {
        let b = Budget::unlimited();
        prop_assert_eq!(p.mul(&r, &b).unwrap(), r.mul(&p, &b).unwrap());
        let lhs = p.mul(&r.add(&s), &b).unwrap();
        let rhs = p.mul(&r, &b).unwrap().add(&p.mul(&s, &b).unwrap());
        prop_assert_eq!(lhs, rhs);
        let pt = [q(1, 2), q(-2, 3), q(3, 1)];
        prop_assert_eq!(p.mul(&r, &b).unwrap().eval(&pt).unwrap(), p.eval(&pt).unwrap() * r.eval(&pt).unwrap());
        prop_assert_eq!(SparsePoly::from_text(3, &p.to_text()).unwrap(), p);
    }
}

#[test]
fn pochhammer_polynomials() {
    assert_eq!(pochhammer_poly(&q(5, 1), 0, &q(1, 1)), PolyK::one());
    assert_eq!(pochhammer_poly(&q(3, 1), 2, &q(1, 1)), PolyK::from_integers([12, 7, 1]));
    let p = pochhammer_poly(&q(11, 2), 2, &q(2, 1));
    assert_eq!(p, PolyK::from_coeffs(vec![q(143, 4), q(24, 1), q(4, 1)]));
}

#[test]
fn interpolation_recovers_polynomials() {
    let p = PolyK::from_integers([-16, 5, 9, 2]);
    let pts: Vec<(Rational, Rational)> = (0..4).map(|k| (Rational::from(k), p.eval_int(k))).collect();
    assert_eq!(interpolate(&pts).unwrap(), p);
    let dup = vec![(q(1, 1), q(1, 1)), (q(1, 1), q(2, 1))];
    assert!(interpolate(&dup).is_err());
}

#[test]
fn rational_function_text_round_trip() {
    let f = RationalFunctionK::new(PolyK::from_integers([-16, 5, 9, 2]), PolyK::from_integers([4719, 2736, 510, 32]))
        .unwrap();
    let back = RationalFunctionK::from_text(&f.to_text()).unwrap();
    assert_eq!(back, f);
    assert!(f.to_text().starts_with("numerator\n3 : 2/1\n"));
    assert!(RationalFunctionK::new(PolyK::one(), PolyK::zero()).is_err());
}

#[test]
fn partial_transpose_determinant_at_maximally_mixed_point() {
    let s = Ensemble::TwoRebit.spec();
    let b = Budget::default();
    let p = expansion::det_pt_poly(&s, &b).unwrap();
    assert!(p.is_homogeneous());
    assert_eq!(p.total_degree(), Some(8));
    assert!(expansion::has_row_parity(&s, &p));
    let mut c = vec![Rational::new(); 10];
    for &d in &s.diag_index {
        c[d] = q(1, 2);
    }
    assert_eq!(p.eval(&c).unwrap(), q(1, 256));
}

#[test]
fn expansion_agrees_with_exact_determinants() {
    let b = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit, Ensemble::RebitRetrit] {
        let s = e.spec();
        let p = moments::det_pt_expansion(&s, &b).unwrap();
        let d = expansion::det_rho_poly(&s, &b).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.iter().next().unwrap().0, &expansion::diagonal_square(&s));
        for _ in 0..3 {
            let t: Vec<Rational> =
                (0..s.var_count() - 1).map(|_| q(rng.gen_range(-5..=5), rng.gen_range(1..=4))).collect();
            let pt = CholeskyPoint::from_stereographic(&s, &t).unwrap();
            let r = cholesky::reconstruct(&s, &pt).unwrap();
            assert_eq!(p.eval(&pt.coords).unwrap(), r.partial_transpose_det(), "{e}");
            assert_eq!(d.eval(&pt.coords).unwrap(), r.det(), "{e}");
        }
    }
}

#[test]
fn squared_power_equals_square_of_evaluation() {
    let s = Ensemble::TwoRebit.spec();
    let b = Budget::default();
    let p1 = moments::det_pt_power_expansion(&s, 1, &b).unwrap();
    let p2 = moments::det_pt_power_expansion(&s, 2, &b).unwrap();
    assert_eq!(p2.total_degree(), Some(16));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let c: Vec<Rational> = (0..10).map(|_| q(rng.gen_range(-7..=7), rng.gen_range(1..=5))).collect();
        let v = p1.eval(&c).unwrap();
        assert_eq!(p2.eval(&c).unwrap(), Rational::from(&v * &v));
    }
}

#[test]
fn bell_mixture_point_gives_negative_partial_transpose_determinant() {
    let s = Ensemble::TwoRebit.spec();
    let rho = matrix::bell_mixture(&q(1, 2)).unwrap();
    let re: Vec<f64> = (0..16).map(|i| rho.get(i / 4, i % 4).to_f64()).collect();
    let c = cholesky::cholesky_coordinates_f64(&s, &re, &[0.0; 16]).unwrap();
    let p = moments::det_pt_expansion(&s, &Budget::default()).unwrap();
    let v: f64 = p
        .iter()
        .map(|(m, k)| k.to_f64() * c.iter().enumerate().map(|(i, x)| x.powi(m.exponent(i) as i32)).product::<f64>())
        .sum();
    assert!((v + 27.0 / 4096.0).abs() < 1e-12, "{v}");
    assert_eq!(rho.partial_transpose().det(), q(-27, 4096));
}

#[test]
fn expansion_respects_budget() {
    let s = Ensemble::TwoQubit.spec();
    let r = expansion::det_pt_power(&s, 2, &Budget::with_max_terms(1000));
    assert!(matches!(r, Err(Error::BudgetExceeded(_))));
}

#[test]
fn power_telemetry_tracks_growth() {
    let s = Ensemble::TwoRebit.spec();
    let (p, t) = expansion::det_pt_power(&s, 2, &Budget::default()).unwrap();
    assert_eq!(t.term_counts.len(), 2);
    assert_eq!(*t.term_counts.last().unwrap(), p.len());
}
