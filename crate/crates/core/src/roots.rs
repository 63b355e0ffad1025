//! Multiprecision complex roots of polynomials in `k` (Aberth–Ehrlich).
//!
//! Every returned root carries an inclusion radius `n |p(z)| / |p'(z)|`: the
//! disk of that radius around `z` contains a true root of `p`.

use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::matrix::{CFloat, Scalar};
use crate::polyk::PolyK;

/// An approximate root and a radius certifying a true root nearby.
#[derive(Clone, Debug)]
pub struct IsolatedRoot {
    pub value: CFloat,
    pub radius: Float,
}

fn cf(prec: u32, re: f64, im: f64) -> CFloat {
    CFloat::new(Float::with_val(prec, re), Float::with_val(prec, im))
}

fn div(a: &CFloat, b: &CFloat) -> CFloat {
    let n = b.norm_sqr();
    let t = a.mul(&b.conj());
    let p = a.re.prec();
    CFloat::new(Float::with_val(p, &t.re / &n), Float::with_val(p, &t.im / &n))
}

fn abs(z: &CFloat) -> Float {
    z.norm_sqr().sqrt()
}

/// `(p(z), p'(z))` by Horner's rule.
fn eval_with_derivative(coeffs: &[CFloat], z: &CFloat) -> (CFloat, CFloat) {
    let prec = z.re.prec();
    let mut p = cf(prec, 0.0, 0.0);
    let mut d = cf(prec, 0.0, 0.0);
    for c in coeffs.iter().rev() {
        d = d.mul(z).add(&p);
        p = p.mul(z).add(c);
    }
    (p, d)
}

/// All complex roots of `p` at `prec` bits.
pub fn polynomial_roots(p: &PolyK, prec: u32) -> Result<Vec<IsolatedRoot>> {
    let n = match p.degree() {
        Some(0) | None => return Ok(Vec::new()),
        Some(n) => n,
    };
    if prec < 64 {
        return Err(Error::InvalidArgument("precision below 64 bits".into()));
    }
    let coeffs: Vec<CFloat> =
        p.coeffs().iter().map(|c| CFloat::new(Float::with_val(prec, c), Float::new(prec))).collect();
    // Cauchy bound 1 + max |a_i / a_n|.
    let lead = p.leading();
    let bound = p.coeffs()[..n].iter().map(|c| Rational::from(c / &lead).abs().to_f64()).fold(0.0f64, f64::max) + 1.0;
    let mut z: Vec<CFloat> = (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / n as f64 + 0.4;
            cf(prec, 0.5 * bound * theta.cos(), 0.5 * bound * theta.sin())
        })
        .collect();

    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32 - 16)));
    let max_iter = 50 * n + 20 * prec as usize;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut max_step = Float::new(prec);
        for i in 0..n {
            let (pv, dv) = eval_with_derivative(&coeffs, &z[i]);
            if pv.is_zero() {
                continue;
            }
            let w = div(&pv, &dv);
            let mut s = cf(prec, 0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s = s.add(&div(&cf(prec, 1.0, 0.0), &z[i].sub(&z[j])));
                }
            }
            let denom = cf(prec, 1.0, 0.0).sub(&w.mul(&s));
            let step = div(&w, &denom);
            let rel = Float::with_val(prec, abs(&step) / Float::with_val(prec, abs(&z[i]) + 1u32));
            if rel > max_step {
                max_step = rel;
            }
            z[i] = z[i].sub(&step);
        }
        if max_step < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::InvalidArgument(format!("root iteration did not converge for {p}")));
    }
    let nf = Float::with_val(prec, n as u32);
    let mut roots: Vec<IsolatedRoot> = z
        .into_iter()
        .map(|value| {
            let (pv, dv) = eval_with_derivative(&coeffs, &value);
            let radius = if pv.is_zero() {
                Float::new(prec)
            } else {
                let mut r = Float::with_val(prec, abs(&pv) / abs(&dv));
                r *= &nf;
                r.next_up();
                r
            };
            IsolatedRoot { value, radius }
        })
        .collect();
    roots.sort_by(|a, b| a.value.re.partial_cmp(&b.value.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(roots)
}

/// The root whose real part is closest to `target`.
pub fn root_nearest_real_part(p: &PolyK, target: f64, prec: u32) -> Result<IsolatedRoot> {
    polynomial_roots(p, prec)?
        .into_iter()
        .min_by(|a, b| {
            let da = (a.value.re.to_f64() - target).abs();
            let db = (b.value.re.to_f64() - target).abs();
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::InvalidArgument("constant polynomial has no roots".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_roots() {
        // (k-1)(k+2)(k-3)
        let p = PolyK::from_integers([6, -5, -2, 1]);
        let r = polynomial_roots(&p, 128).unwrap();
        let re: Vec<f64> = r.iter().map(|x| x.value.re.to_f64()).collect();
        for (got, want) in re.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-30);
        }
        assert!(r.iter().all(|x| x.radius.to_f64() < 1e-30 && x.value.im.to_f64().abs() < 1e-30));
    }

    #[test]
    fn complex_pair() {
        // k^2 + 1
        let p = PolyK::from_integers([1, 0, 1]);
        let r = polynomial_roots(&p, 128).unwrap();
        let mut im: Vec<f64> = r.iter().map(|x| x.value.im.to_f64()).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 1.0).abs() < 1e-30 && (im[1] - 1.0).abs() < 1e-30);
    }

    #[test]
    fn nearest_real_part() {
        let p = PolyK::from_integers([6, -5, -2, 1]);
        let r = root_nearest_real_part(&p, 2.9, 128).unwrap();
        assert!((r.value.re.to_f64() - 3.0).abs() < 1e-20);
    }
}
