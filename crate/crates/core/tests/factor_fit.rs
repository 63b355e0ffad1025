use hsmoments::cholesky::Ensemble;
use hsmoments::fit::{self, DenominatorTemplate, FitProblem};
use hsmoments::moments;
use hsmoments::poly::Budget;
use hsmoments::polyk::PolyK;
use hsmoments::tables;
use hsmoments::{Error, Rational};
use proptest::prelude::*;

fn budget() -> Budget {
    Budget::default()
}

fn ks(r: std::ops::Range<i64>) -> Vec<i64> {
    r.collect()
}

#[test]
fn two_rebit_first_numerator_from_four_samples() {
    let s = Ensemble::TwoRebit.spec();
    let r = fit::fit_from_engine(&s, 1, DenominatorTemplate::Structural, &ks(0..4), &ks(7..11), &budget()).unwrap();
    assert_eq!(r.numerator_coeffs_ascending, vec!["-16/1", "5/1", "9/1", "2/1"]);
    assert!(r.validation.pass);
    assert_eq!(r.reduced_denominator_form, "32(k+3)(4k+11)(4k+13)");
}

#[test]
fn two_qubit_first_numerator_from_four_samples() {
    let s = Ensemble::TwoQubit.spec();
    let r = fit::fit_from_engine(&s, 1, DenominatorTemplate::Structural, &ks(0..4), &ks(4..9), &budget()).unwrap();
    assert_eq!(r.numerator_coeffs_ascending, vec!["-42/1", "-1/1", "6/1", "1/1"]);
    assert!(r.validation.pass);
}

#[test]
fn two_rebit_second_numerator_validates_on_held_out_points() {
    let s = Ensemble::TwoRebit.spec();
    let r = fit::fit_from_engine(&s, 2, DenominatorTemplate::Structural, &ks(0..7), &[7, 8], &budget()).unwrap();
    let want = tables::published_numerator(Ensemble::TwoRebit, 2).unwrap().coeff_strings();
    assert_eq!(r.numerator_coeffs_ascending, want);
    assert!(r.validation.pass);
}

#[test]
fn qubit_qutrit_first_numerator_from_six_samples() {
    let s = Ensemble::QubitQutrit.spec();
    let r = fit::fit_from_engine(&s, 1, DenominatorTemplate::Published, &ks(0..6), &[6, 7], &budget()).unwrap();
    assert_eq!(r.numerator_coeffs_ascending, vec!["-3840/1", "-2558/1", "-423/1", "37/1", "15/1", "1/1"]);
    assert!(r.validation.pass);
}

#[test]
fn dirichlet_template_reduces_to_canonical_form() {
    let s = Ensemble::TwoRebit.spec();
    let r = fit::fit_from_engine(&s, 1, DenominatorTemplate::Dirichlet, &ks(0..5), &[5, 6], &budget()).unwrap();
    assert!(r.validation.pass);
    assert_eq!(r.reduced_numerator_coeffs_ascending, vec!["-16/1", "5/1", "9/1", "2/1"]);
    assert_eq!(r.reduced_denominator_form, "32(k+3)(4k+11)(4k+13)");
}

#[test]
fn corrupted_sample_fails_validation() {
    let s = Ensemble::TwoRebit.spec();
    let den = DenominatorTemplate::Structural.denominator(&s, 1).unwrap();
    let samples = fit::engine_samples(&s, 1, &ks(0..4), &budget()).unwrap();
    let mut held = fit::engine_samples(&s, 1, &ks(4..9), &budget()).unwrap();
    let p = FitProblem::new(1, den.clone(), samples.clone()).unwrap();
    let a = fit::fit_numerator(&p).unwrap();
    held[2].1 += Rational::from((1, 1_000_000));
    let rep = fit::cross_validate(&a, &p, &held).unwrap();
    assert!(!rep.pass);
    assert_eq!(rep.failing_ks(), vec![6]);

    // a corrupted fitting sample yields a numerator that fails held-out checks
    let mut bad = samples;
    bad[1].1 += Rational::from((1, 1000));
    let p = FitProblem::new(1, den, bad).unwrap();
    let a = fit::fit_numerator(&p).unwrap();
    let held = fit::engine_samples(&s, 1, &ks(4..9), &budget()).unwrap();
    assert!(!fit::cross_validate(&a, &p, &held).unwrap().pass);
}

#[test]
fn degenerate_problems_are_rejected() {
    let s = Ensemble::TwoRebit.spec();
    let den = DenominatorTemplate::Structural.denominator(&s, 1).unwrap();
    let one = Rational::from(1);
    let few = vec![(0, one.clone()), (1, one.clone())];
    assert!(matches!(FitProblem::new(1, den.clone(), few), Err(Error::InvalidArgument(_))));
    let dup = vec![(0, one.clone()), (1, one.clone()), (1, one.clone()), (2, one.clone())];
    assert!(matches!(FitProblem::new(1, den.clone(), dup), Err(Error::Singular(_))));
    // an overdetermined inconsistent sequence
    let mut samples = fit::engine_samples(&s, 1, &ks(0..5), &budget()).unwrap();
    samples[4].1 += 1;
    let p = FitProblem::new(1, den, samples).unwrap();
    assert!(matches!(fit::fit_numerator(&p), Err(Error::StructureViolation(_))));
    assert!(DenominatorTemplate::Published.denominator(&s, 1).is_err());
    assert!(DenominatorTemplate::Structural.denominator(&Ensemble::RebitRetrit.spec(), 1).is_err());
}

#[test]
fn held_out_points_must_be_fresh() {
    let s = Ensemble::TwoQubit.spec();
    let den = DenominatorTemplate::Structural.denominator(&s, 1).unwrap();
    let samples = fit::engine_samples(&s, 1, &ks(0..4), &budget()).unwrap();
    let p = FitProblem::new(1, den, samples.clone()).unwrap();
    let a = fit::fit_numerator(&p).unwrap();
    assert!(fit::cross_validate(&a, &p, &samples[..1]).is_err());
}

fn numerator_strategy() -> impl Strategy<Value = (u32, Vec<i64>)> {
    (1u32..=3).prop_flat_map(|kappa| (Just(kappa), prop::collection::vec(-1000i64..=1000, 3 * kappa as usize + 1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn fit_round_trips_synthetic_factors((kappa, coeffs) in numerator_strategy()) {
        let den = moments::structural_denominator(Ensemble::TwoRebit, kappa).unwrap().poly();
        let num = PolyK::from_integers(coeffs);
        let ks: Vec<i64> = (0..=3 * kappa as i64 + 2).collect();
        let samples: Vec<(i64, Rational)> = ks.iter().map(|&k| (k, num.eval_int(k) / den.eval_int(k))).collect();
        let p = FitProblem::new(kappa, den, samples).unwrap();
        prop_assert_eq!(fit::fit_numerator(&p).unwrap(), num);
    }
}
