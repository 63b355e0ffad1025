use hsmoments::density::{self, DENSITY_PRECISION};
use hsmoments::Rational;
use rug::Float;

fn mp(x: f64) -> Float {
    Float::with_val(DENSITY_PRECISION, x)
}

#[test]
fn endpoint_values() {
    let f0 = density::density_eval(&mp(0.0)).unwrap();
    assert!(Float::with_val(DENSITY_PRECISION, &f0 - &Rational::from((63, 4))).abs() < 1e-70);
    assert_eq!(density::density_eval(&mp(1.0)).unwrap(), 0);
    assert!(density::density_eval(&mp(1.0 + 1e-9)).is_err());
    assert!(density::density_eval(&mp(-1e-9)).is_err());
}

#[test]
fn density_is_nonnegative_and_normalized() {
    for t in density::interior_grid(500) {
        assert!(density::density_eval_f64(t).unwrap() >= 0.0, "t = {t}");
    }
    let total = density::integrate_against_density(|_| 1.0, 0.0, 1.0, 1e-14).unwrap();
    assert!((total - 1.0).abs() < 1e-12, "{total}");
    let bins = density::bin_probabilities(40).unwrap();
    assert!((bins.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn moments_match_exact_values() {
    let r = density::density_moment_check(8).unwrap();
    assert_eq!(r.rows.len(), 9);
    assert!(r.max_deviation < 1e-12, "{}", r.max_deviation);
    assert_eq!(density::exact_moment(1), Rational::from((16, 143)));
    // t = 2^8 |ρ| for two rebits
    assert_eq!(density::exact_moment(1), Rational::from(256) / 2288);
}

#[test]
fn components_are_probability_densities() {
    let a = density::integrate(density::component_x1, 0.0, 1.0, 1e-14).unwrap();
    // t = u² removes the √t kink at the origin
    let b = density::integrate(|u| 2.0 * u * density::component_x2(u * u), 0.0, 1.0, 1e-14).unwrap();
    assert!((a - 1.0).abs() < 1e-13);
    assert!((b - 1.0).abs() < 1e-12);
    for n in 1..=4 {
        let q = density::x2_moment_quadrature(n).unwrap();
        assert!((q - density::exact_x2_moment(n).to_f64()).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn closed_form_agrees_with_convolution_quadrature() {
    let rows = density::convolution_check(&density::interior_grid(50)).unwrap();
    let worst = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    for t in [1e-4, 0.5, 0.999] {
        let o = density::convolution_oracle(t).unwrap();
        let c = density::density_eval_f64(t).unwrap();
        assert!((o - c).abs() < 1e-10 * c.max(1.0), "t = {t}");
    }
}

#[test]
fn endpoint_ratio_is_bounded_and_converging() {
    let r = density::endpoint_ratios(&[1e-2, 1e-3, 1e-4, 1e-5, 1e-6]).unwrap();
    let v: Vec<f64> = r.iter().map(|(_, x)| x.to_f64()).collect();
    assert!(v.iter().all(|&x| x > 0.5 && x < 1.0), "{v:?}");
    let steps: Vec<f64> = v.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    assert!(steps.windows(2).all(|s| s[1] < s[0]), "{steps:?}");
    assert!(density::endpoint_ratios(&[0.0]).is_err());
}

#[test]
fn significant_figure_comparison() {
    let v = |xs: &[f64]| xs.iter().map(|&x| mp(x)).collect::<Vec<_>>();
    assert!(density::stable_to_significant_figures(&v(&[0.7951, 0.7949]), 3));
    assert!(!density::stable_to_significant_figures(&v(&[0.804, 0.796]), 3));
}

#[test]
fn csv_output_shape() {
    let csv = density::density_csv(200).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,f");
    assert_eq!(lines.len(), 201);
}
