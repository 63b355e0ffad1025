use hsmoments::cholesky::Ensemble;
use hsmoments::matrix::{self, CRational, DensityMatrix, Scalar};
use hsmoments::mc::{self, McConfig, McRequest};
use hsmoments::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

/// `G Gᵀ / tr` for a random small-integer `G`.
fn random_real_state(dims: (usize, usize), rng: &mut ChaCha8Rng) -> DensityMatrix<Rational> {
    let n = dims.0 * dims.1;
    let g: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-4..=4)).collect();
    let mut w = vec![Rational::new(); n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = Rational::from((0..n).map(|l| g[i * n + l] * g[j * n + l]).sum::<i64>());
        }
    }
    let tr: Rational = (0..n).map(|i| w[i * n + i].clone()).sum();
    DensityMatrix::new(dims, w.into_iter().map(|x| x / &tr).collect()).unwrap()
}

fn random_complex_state(dims: (usize, usize), rng: &mut ChaCha8Rng) -> DensityMatrix<CRational> {
    let n = dims.0 * dims.1;
    let g: Vec<(i64, i64)> = (0..n * n).map(|_| (rng.gen_range(-3..=3), rng.gen_range(-3..=3))).collect();
    let mut w = vec![CRational::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            let (mut re, mut im) = (0i64, 0i64);
            for l in 0..n {
                let (a, b) = g[i * n + l];
                let (c, d) = g[j * n + l];
                // (a + ib)(c − id)
                re += a * c + b * d;
                im += b * c - a * d;
            }
            w[i * n + j] = CRational::new(Rational::from(re), Rational::from(im));
        }
    }
    let tr: Rational = (0..n).map(|i| w[i * n + i].re.clone()).sum();
    let e = w.into_iter().map(|x| CRational::new(x.re / &tr, x.im / &tr)).collect();
    DensityMatrix::new(dims, e).unwrap()
}

#[test]
fn maximally_mixed_is_fixed_by_partial_transpose() {
    let m = DensityMatrix::maximally_mixed((2, 2));
    assert_eq!(m.partial_transpose(), m);
    assert_eq!(m.det(), q(1, 256));
    assert_eq!(m.partial_transpose().det(), q(1, 256));
}

#[test]
fn bell_projector_partial_transpose_has_one_negative_eigenvalue() {
    let b = DensityMatrix::bell_projector();
    assert_eq!(b.det(), 0);
    assert!(b.is_psd());
    let pt = b.partial_transpose();
    assert_eq!(pt.det(), q(-1, 16));
    assert!(!pt.is_psd());
    // (ρ^PT)² = I/4, so every eigenvalue is ±1/2; unit trace fixes three +1/2 and one −1/2
    let n = 4;
    for i in 0..n {
        for j in 0..n {
            let s: Rational = (0..n).map(|l| Rational::from(pt.get(i, l) * pt.get(l, j))).sum();
            assert_eq!(s, if i == j { q(1, 4) } else { q(0, 1) });
        }
    }
    assert_eq!(pt.trace(), 1);
}

#[test]
fn identity_determinant() {
    let mut e = vec![Rational::new(); 16];
    for i in 0..4 {
        e[i * 4 + i] = Rational::from(1);
    }
    assert_eq!(DensityMatrix::new((2, 2), e).unwrap().det(), 1);
}

#[test]
fn partial_transpose_is_an_involution_and_side_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dims in [(2, 2), (2, 3)] {
        for _ in 0..10 {
            let r = random_real_state(dims, &mut rng);
            assert_eq!(r.partial_transpose().partial_transpose(), r);
            assert_eq!(r.partial_transpose().det(), r.partial_transpose_first().det());
            assert_eq!(r.trace(), 1);
            assert!(r.is_hermitian() && r.partial_transpose().is_hermitian());
            let c = random_complex_state(dims, &mut rng);
            assert_eq!(c.partial_transpose().partial_transpose(), c);
            assert_eq!(c.partial_transpose().det(), c.partial_transpose_first().det());
            assert!(c.is_hermitian() && c.partial_transpose().is_hermitian());
            assert_eq!(c.partial_transpose().trace().re, 1);
        }
    }
}

#[test]
fn gram_states_are_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let r = random_real_state((2, 3), &mut rng);
        assert!(r.is_psd());
        assert!(r.leading_principal_minors().iter().all(|m| m.real_sign() != std::cmp::Ordering::Less));
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    assert!(DensityMatrix::new((2, 2), vec![Rational::new(); 15]).is_err());
    assert!(DensityMatrix::new((2, 3), vec![Rational::new(); 16]).is_err());
}

#[test]
fn bell_mixture_determinants_follow_closed_forms() {
    for (n, d) in [(0, 1), (1, 5), (1, 3), (1, 2), (2, 3), (1, 1)] {
        let l = q(n, d);
        let rho = matrix::bell_mixture(&l).unwrap();
        let one = Rational::from(1);
        let det = (&one + Rational::from(&l * 3u32)) * Rational::from(&one - &l).pow_ref(3).clone() / 256u32;
        let pt = Rational::from(&one + &l).pow_ref(3).clone() * (&one - Rational::from(&l * 3u32)) / 256u32;
        assert_eq!(rho.det(), det, "λ = {l}");
        assert_eq!(rho.partial_transpose().det(), pt, "λ = {l}");
    }
    let p = |l: Rational| {
        let r = matrix::bell_mixture(&l).unwrap();
        r.det() * r.partial_transpose().det()
    };
    assert_eq!(p(q(0, 1)), q(1, 65536));
    assert_eq!(p(q(1, 1)), 0);
    assert!(matrix::bell_mixture(&q(-1, 10)).is_err());
    assert!(matrix::bell_mixture(&q(11, 10)).is_err());
}

trait PowRef {
    fn pow_ref(&self, e: u32) -> Rational;
}

impl PowRef for Rational {
    fn pow_ref(&self, e: u32) -> Rational {
        (0..e).fold(Rational::from(1), |acc, _| acc * self)
    }
}

#[test]
fn bell_mixture_minimum_exact_and_numeric() {
    let x = matrix::bell_mixture_extremum().unwrap();
    assert_eq!(x.minimum, q(-1, 110592));
    assert_eq!(x.u_min, q(1, 3));
    let (lambda, v) = matrix::bell_mixture_minimize_numeric(256).unwrap();
    assert!((lambda - 1.0 / 3f64.sqrt()).abs() < 1e-7);
    assert!(Float::with_val(256, &v - &q(-1, 110592)).abs() < 1e-12);
    // the product at λ = 1/√3 computed in multiprecision
    let l = Float::with_val(256, 3).sqrt().recip();
    let r = matrix::bell_mixture_mp(&l).unwrap();
    let p = Float::with_val(256, r.det() * r.partial_transpose().det());
    assert!(Float::with_val(256, &p - &q(-1, 110592)).abs() < 1e-60);
}

#[test]
fn sampled_determinants_stay_in_documented_ranges() {
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
        let mut c = McConfig::new(e, 10_000, 3);
        c.chunk_size = 1_000;
        let out = mc::run(&c, &McRequest { histogram: true, ..Default::default() }).unwrap();
        assert_eq!(out.histogram.unwrap().total, 10_000);
    }
}
