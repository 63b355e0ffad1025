//! The two-rebit density of `t = 2^8 |ρ|` on `[0, 1]`.
//!
//! `t` is distributed as a product `X₁ X₂` of independent variables with
//! densities `f₁(t) = 2t` and `f₂(t) = (63/8)(1 − √t)^{5/2}`, which gives the
//! closed form
//!
//! `f(t) = (63/8)[s(−8t − 9√t + 2) + 15 t log(1 + s) − (15/4) t log t]`,
//! `s = √(1 − √t)`.
//!
//! The bracket cancels to `O(s^7)` as `t → 1`, so the closed form is
//! evaluated in multiprecision. Integrals over `[0, 1]` are taken in the
//! variable `s`, where `t = (1 − s²)²` and `dt = 4s(1 − s²) ds`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyk::pochhammer;

/// Working precision of closed-form evaluations.
pub const DENSITY_PRECISION: u32 = 256;

/// Exponent of the vanishing of `f` at `t = 1`.
pub const ENDPOINT_EXPONENT: f64 = 3.5;

/// `f` in terms of `s = √(1 − √t)`, `s ∈ [0, 1]`.
pub fn density_from_s(s: &Float) -> Float {
    let prec = s.prec().max(DENSITY_PRECISION);
    let s = Float::with_val(prec, s);
    let u = Float::with_val(prec, 1u32 - Float::with_val(prec, s.square_ref())); // √t
    let t = Float::with_val(prec, u.square_ref());
    if t.is_zero() {
        // f(0⁺) = (63/8)·2
        return Float::with_val(prec, 63) / 4u32;
    }
    let mut poly = Float::with_val(prec, &t * -8i32);
    poly -= Float::with_val(prec, &u * 9u32);
    poly += 2u32;
    let mut b = Float::with_val(prec, &s * &poly);
    let log1s = Float::with_val(prec, s.ln_1p_ref());
    b += Float::with_val(prec, &t * &log1s) * 15u32;
    let logt = Float::with_val(prec, t.ln_ref());
    b -= Float::with_val(prec, &t * &logt) * 15u32 / 4u32;
    b * 63u32 / 8u32
}

/// `f(t)` for `t ∈ [0, 1]`, continuous at both endpoints.
pub fn density_eval(t: &Float) -> Result<Float> {
    if t.is_nan() || *t < 0 || *t > 1 {
        return Err(Error::RangeViolation(format!("t = {} outside [0, 1]", t.to_f64())));
    }
    let prec = t.prec().max(DENSITY_PRECISION);
    let u = Float::with_val(prec, t.sqrt_ref());
    let s = Float::with_val(prec, 1u32 - u).sqrt();
    Ok(density_from_s(&s))
}

pub fn density_eval_f64(t: f64) -> Result<f64> {
    Ok(density_eval(&Float::with_val(DENSITY_PRECISION, t))?.to_f64())
}

/// `f₁(t) = 2t`.
pub fn component_x1(t: f64) -> f64 {
    2.0 * t
}

/// `f₂(t) = (1 − √t)^{5/2} / (2 B(2, 7/2)) = (63/8)(1 − √t)^{5/2}`.
pub fn component_x2(t: f64) -> f64 {
    63.0 / 8.0 * (1.0 - t.sqrt()).powf(2.5)
}

/// `E[tⁿ] = (4)_{2n} (2)_{2n} / ((5)_{2n} (11/2)_{2n})`.
pub fn exact_moment(n: u32) -> Rational {
    let p = |x: Rational| pochhammer(&x, 2 * n);
    p(Rational::from(4)) * p(Rational::from(2)) / (p(Rational::from(5)) * p(Rational::from((11, 2))))
}

/// `E[X₂ⁿ] = (2)_{2n} / (11/2)_{2n}`.
pub fn exact_x2_moment(n: u32) -> Rational {
    pochhammer(&Rational::from(2), 2 * n) / pochhammer(&Rational::from((11, 2)), 2 * n)
}

const GL_ORDER: usize = 20;
const MAX_DEPTH: u32 = 48;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        (0..n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for j in 2..=n {
                        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn gl_panel<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> f64 {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    h * gauss_legendre().iter().map(|&(x, w)| w * g(c + h * x)).sum::<f64>()
}

fn adaptive<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = (a + b) / 2.0;
    let (l, r) = (gl_panel(g, a, m), gl_panel(g, m, b));
    if (l + r - whole).abs() <= tol {
        return Ok(l + r);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!("no convergence on [{a}, {b}]")));
    }
    Ok(adaptive(g, a, m, l, tol / 2.0, depth + 1)? + adaptive(g, m, b, r, tol / 2.0, depth + 1)?)
}

/// Adaptive Gauss–Legendre quadrature of `g` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let whole = gl_panel(&g, a, b);
    let v = adaptive(&g, a, b, whole, tol, 0)?;
    if !v.is_finite() {
        return Err(Error::Quadrature("non-finite integral".into()));
    }
    Ok(v)
}

fn s_of_t(t: f64) -> f64 {
    (1.0 - t.sqrt()).max(0.0).sqrt()
}

/// `∫_a^b h(t) f(t) dt`, integrated in `s`.
pub fn integrate_against_density<H: Fn(f64) -> f64>(h: H, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::RangeViolation(format!("[{a}, {b}] not inside [0, 1]")));
    }
    let g = |s: f64| {
        let q = 1.0 - s * s;
        let t = q * q;
        h(t) * density_from_s(&Float::with_val(53, s)).to_f64() * 4.0 * s * q
    };
    integrate(g, s_of_t(b), s_of_t(a), tol)
}

/// One row of a moment check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: u32,
    pub quadrature: f64,
    pub exact: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub max_deviation: f64,
}

/// Quadrature moments `∫ tⁿ f` against the Pochhammer formula, `n = 0..n_max`.
pub fn density_moment_check(n_max: u32) -> Result<MomentReport> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let rows = (0..=n_max)
        .map(|n| {
            let q = integrate_against_density(|t| t.powi(n as i32), 0.0, 1.0, 1e-14)?;
            let exact = exact_moment(n);
            Ok(MomentRow { n, quadrature: q, deviation: (q - exact.to_f64()).abs(), exact: exact.to_string() })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(MomentReport { rows, max_deviation })
}

/// `∫_t^1 f₁(t/x) f₂(x) dx/x` by quadrature. With `x = (1 − w²)²` this is
/// `(63/2) t ∫_0^{s} 2w⁶ / (1 − w²)³ dw`, smooth for `t > 0`.
pub fn convolution_oracle(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::RangeViolation(format!("t = {t} outside (0, 1)")));
    }
    let g = |w: f64| {
        let q = 1.0 - w * w;
        2.0 * w.powi(6) / (q * q * q)
    };
    let upper = s_of_t(t);
    let scale = 63.0 / 2.0 * t;
    Ok(scale * integrate(g, 0.0, upper, 1e-11 / scale)?)
}

/// `x₂` moment `∫ xⁿ f₂` by quadrature, as a check of the component density.
pub fn x2_moment_quadrature(n: u32) -> Result<f64> {
    // x = u², dx = 2u du
    integrate(|u: f64| u.powi(2 * n as i32) * component_x2(u * u) * 2.0 * u, 0.0, 1.0, 1e-14)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvolutionRow {
    pub t: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub deviation: f64,
}

/// `t_i = i / (points + 1)`, `i = 1..points`.
pub fn interior_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points + 1) as f64).collect()
}

pub fn convolution_check(ts: &[f64]) -> Result<Vec<ConvolutionRow>> {
    ts.iter()
        .map(|&t| {
            let closed_form = density_eval_f64(t)?;
            let oracle = convolution_oracle(t)?;
            Ok(ConvolutionRow { t, closed_form, oracle, deviation: (closed_form - oracle).abs() })
        })
        .collect()
}

/// `f(1 − ε) / ε^{7/2}` at each `ε`.
pub fn endpoint_ratios(eps: &[f64]) -> Result<Vec<(f64, Float)>> {
    eps.iter()
        .map(|&e| {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidArgument(format!("ε = {e} outside (0, 1)")));
            }
            let ef = Float::with_val(DENSITY_PRECISION, e);
            let t = Float::with_val(DENSITY_PRECISION, 1u32 - &ef);
            let f = density_eval(&t)?;
            let scale = ef.pow_f64_ref(ENDPOINT_EXPONENT);
            Ok((e, f / scale))
        })
        .collect()
}

trait PowF64 {
    fn pow_f64_ref(&self, e: f64) -> Float;
}

impl PowF64 for Float {
    fn pow_f64_ref(&self, e: f64) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(Float::with_val(self.prec(), e)))
    }
}

/// Whether all values agree when rounded to `digits` significant figures.
pub fn stable_to_significant_figures(values: &[Float], digits: usize) -> bool {
    let shown: Vec<String> = values.iter().map(|v| format!("{:.*e}", digits - 1, v.to_f64())).collect();
    shown.windows(2).all(|w| w[0] == w[1])
}

/// `P(a ≤ t < b)` for each of `bins` equal bins of `[0, 1]`.
pub fn bin_probabilities(bins: usize) -> Result<Vec<f64>> {
    (0..bins)
        .map(|i| integrate_against_density(|_| 1.0, i as f64 / bins as f64, (i + 1) as f64 / bins as f64, 1e-14))
        .collect()
}

/// CSV `t,f` on `points` interior grid points.
pub fn density_csv(points: usize) -> Result<String> {
    let mut s = String::from("t,f\n");
    for t in interior_grid(points) {
        let _ = writeln!(s, "{t:.17e},{:.17e}", density_eval_f64(t)?);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_endpoints() {
        assert!((density_eval_f64(0.0).unwrap() - 15.75).abs() < 1e-15);
        assert_eq!(density_eval_f64(1.0).unwrap(), 0.0);
        assert!(density_eval_f64(1.5).is_err());
        assert!(density_eval_f64(-0.1).is_err());
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let v = gl_panel(&|x: f64| x.powi(30), 0.0, 1.0);
        assert!((v - 1.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn exact_moments() {
        assert_eq!(exact_moment(0), 1);
        assert_eq!(exact_moment(1), Rational::from((16, 143)));
        assert_eq!(exact_x2_moment(1), Rational::from((24, 143)));
    }
}
