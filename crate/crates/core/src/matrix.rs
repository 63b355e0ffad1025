//! Exact and multiprecision density matrices, determinants and partial
//! transposition.
//!
//! Exact determinants clear denominators row by row and run fraction-free
//! (Bareiss) elimination over the integers or the Gaussian integers, so
//! intermediate entries stay polynomially sized. Multiprecision determinants
//! use partial-pivoting Gaussian elimination at the precision carried by the
//! entries.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::polyk::PolyK;

/// Real or complex field kind of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

/// Exact complex rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CRational {
    pub re: Rational,
    pub im: Rational,
}

impl CRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        CRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        CRational { re, im: Rational::new() }
    }
}

impl fmt::Debug for CRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

/// Multiprecision complex number.
#[derive(Clone, PartialEq)]
pub struct CFloat {
    pub re: Float,
    pub im: Float,
}

impl CFloat {
    pub fn new(re: Float, im: Float) -> Self {
        CFloat { re, im }
    }

    pub fn norm_sqr(&self) -> Float {
        let mut n = Float::with_val(self.re.prec(), &self.re * &self.re);
        n += &self.im * &self.im;
        n
    }
}

impl fmt::Debug for CFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

/// Matrix entry type.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    const FIELD: FieldKind;
    /// Zero carrying the same precision as `self`, where that applies.
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn conj(&self) -> Self;
    /// Builds a scalar with the precision of `self` from real and imaginary
    /// parts; the imaginary part must be zero for real scalars.
    fn with_parts(&self, re: &Rational, im: &Rational) -> Self;
    /// Sign of the real part.
    fn real_sign(&self) -> Ordering;
    fn real_f64(&self) -> f64;
    fn determinant(entries: &[Self], n: usize) -> Self;
}

impl Scalar for Rational {
    const FIELD: FieldKind = FieldKind::Real;
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn one_like(&self) -> Self {
        Rational::from(1)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn with_parts(&self, re: &Rational, im: &Rational) -> Self {
        assert!(*im == 0, "imaginary part for a real scalar");
        re.clone()
    }
    fn real_sign(&self) -> Ordering {
        self.cmp0()
    }
    fn real_f64(&self) -> f64 {
        self.to_f64()
    }
    fn determinant(entries: &[Self], n: usize) -> Self {
        det_rational(entries, n)
    }
}

impl Scalar for CRational {
    const FIELD: FieldKind = FieldKind::Complex;
    fn zero_like(&self) -> Self {
        CRational::default()
    }
    fn one_like(&self) -> Self {
        CRational::real(Rational::from(1))
    }
    fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
    fn add(&self, o: &Self) -> Self {
        CRational::new(Rational::from(&self.re + &o.re), Rational::from(&self.im + &o.im))
    }
    fn sub(&self, o: &Self) -> Self {
        CRational::new(Rational::from(&self.re - &o.re), Rational::from(&self.im - &o.im))
    }
    fn mul(&self, o: &Self) -> Self {
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        CRational::new(re, im)
    }
    fn conj(&self) -> Self {
        CRational::new(self.re.clone(), Rational::from(-&self.im))
    }
    fn with_parts(&self, re: &Rational, im: &Rational) -> Self {
        CRational::new(re.clone(), im.clone())
    }
    fn real_sign(&self) -> Ordering {
        self.re.cmp0()
    }
    fn real_f64(&self) -> f64 {
        self.re.to_f64()
    }
    fn determinant(entries: &[Self], n: usize) -> Self {
        det_crational(entries, n)
    }
}

impl Scalar for Float {
    const FIELD: FieldKind = FieldKind::Real;
    fn zero_like(&self) -> Self {
        Float::new(self.prec())
    }
    fn one_like(&self) -> Self {
        Float::with_val(self.prec(), 1)
    }
    fn is_zero(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self * o)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn with_parts(&self, re: &Rational, im: &Rational) -> Self {
        assert!(*im == 0, "imaginary part for a real scalar");
        Float::with_val(self.prec(), re)
    }
    fn real_sign(&self) -> Ordering {
        self.cmp0().unwrap_or(Ordering::Equal)
    }
    fn real_f64(&self) -> f64 {
        self.to_f64()
    }
    fn determinant(entries: &[Self], n: usize) -> Self {
        det_float(entries, n)
    }
}

impl Scalar for CFloat {
    const FIELD: FieldKind = FieldKind::Complex;
    fn zero_like(&self) -> Self {
        CFloat::new(Float::new(self.re.prec()), Float::new(self.re.prec()))
    }
    fn one_like(&self) -> Self {
        CFloat::new(Float::with_val(self.re.prec(), 1), Float::new(self.re.prec()))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        let p = self.re.prec();
        CFloat::new(Float::with_val(p, &self.re + &o.re), Float::with_val(p, &self.im + &o.im))
    }
    fn sub(&self, o: &Self) -> Self {
        let p = self.re.prec();
        CFloat::new(Float::with_val(p, &self.re - &o.re), Float::with_val(p, &self.im - &o.im))
    }
    fn mul(&self, o: &Self) -> Self {
        let p = self.re.prec();
        let mut re = Float::with_val(p, &self.re * &o.re);
        re -= &self.im * &o.im;
        let mut im = Float::with_val(p, &self.re * &o.im);
        im += &self.im * &o.re;
        CFloat::new(re, im)
    }
    fn conj(&self) -> Self {
        CFloat::new(self.re.clone(), Float::with_val(self.im.prec(), -&self.im))
    }
    fn with_parts(&self, re: &Rational, im: &Rational) -> Self {
        let p = self.re.prec();
        CFloat::new(Float::with_val(p, re), Float::with_val(p, im))
    }
    fn real_sign(&self) -> Ordering {
        self.re.cmp0().unwrap_or(Ordering::Equal)
    }
    fn real_f64(&self) -> f64 {
        self.re.to_f64()
    }
    fn determinant(entries: &[Self], n: usize) -> Self {
        det_cfloat(entries, n)
    }
}

/// Ring with exact division, as required by Bareiss elimination.
trait ExactRing: Clone {
    fn is_zero(&self) -> bool;
    fn zero() -> Self;
    fn one() -> Self;
    /// `(a·b − c·d) / e`, exact.
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Self;
    fn negate(&self) -> Self;
}

impl ExactRing for Integer {
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
    fn zero() -> Self {
        Integer::new()
    }
    fn one() -> Self {
        Integer::from(1)
    }
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Self {
        let mut t = Integer::from(a * b);
        t -= c * d;
        t.div_exact_mut(e);
        t
    }
    fn negate(&self) -> Self {
        Integer::from(-self)
    }
}

/// Gaussian integer.
#[derive(Clone, Debug, PartialEq, Eq)]
struct GaussInt {
    re: Integer,
    im: Integer,
}

impl GaussInt {
    fn mul(&self, o: &GaussInt) -> GaussInt {
        let re = Integer::from(&self.re * &o.re) - Integer::from(&self.im * &o.im);
        let im = Integer::from(&self.re * &o.im) + Integer::from(&self.im * &o.re);
        GaussInt { re, im }
    }
}

impl ExactRing for GaussInt {
    fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
    fn zero() -> Self {
        GaussInt { re: Integer::new(), im: Integer::new() }
    }
    fn one() -> Self {
        GaussInt { re: Integer::from(1), im: Integer::new() }
    }
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Self {
        let ab = a.mul(b);
        let cd = c.mul(d);
        let t = GaussInt { re: ab.re - cd.re, im: ab.im - cd.im };
        // t / e = t·conj(e) / |e|²
        let ec = GaussInt { re: e.re.clone(), im: Integer::from(-&e.im) };
        let mut num = t.mul(&ec);
        let norm = Integer::from(&e.re * &e.re) + Integer::from(&e.im * &e.im);
        num.re.div_exact_mut(&norm);
        num.im.div_exact_mut(&norm);
        num
    }
    fn negate(&self) -> Self {
        GaussInt { re: Integer::from(-&self.re), im: Integer::from(-&self.im) }
    }
}

/// Fraction-free determinant of a row-major `n×n` matrix.
fn bareiss<R: ExactRing>(mut m: Vec<R>, n: usize) -> R {
    if n == 0 {
        return R::one();
    }
    let mut negate = false;
    let mut prev = R::one();
    for k in 0..n - 1 {
        if m[k * n + k].is_zero() {
            match (k + 1..n).find(|&r| !m[r * n + k].is_zero()) {
                Some(r) => {
                    for c in 0..n {
                        m.swap(k * n + c, r * n + c);
                    }
                    negate = !negate;
                }
                None => return R::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = R::cross_div(&m[i * n + j], &m[k * n + k], &m[i * n + k], &m[k * n + j], &prev);
                m[i * n + j] = v;
            }
        }
        prev = m[k * n + k].clone();
    }
    let d = m[n * n - 1].clone();
    if negate {
        d.negate()
    } else {
        d
    }
}

fn det_rational(entries: &[Rational], n: usize) -> Rational {
    let mut scale = Integer::from(1);
    let mut ints = Vec::with_capacity(n * n);
    for r in 0..n {
        let row = &entries[r * n..(r + 1) * n];
        let mut lcm = Integer::from(1);
        for x in row {
            lcm.lcm_mut(x.denom());
        }
        for x in row {
            ints.push(Integer::from(x.numer() * &lcm) / x.denom());
        }
        scale *= lcm;
    }
    Rational::from((bareiss(ints, n), scale))
}

fn det_crational(entries: &[CRational], n: usize) -> CRational {
    let mut scale = Integer::from(1);
    let mut ints = Vec::with_capacity(n * n);
    for r in 0..n {
        let row = &entries[r * n..(r + 1) * n];
        let mut lcm = Integer::from(1);
        for x in row {
            lcm.lcm_mut(x.re.denom());
            lcm.lcm_mut(x.im.denom());
        }
        for x in row {
            ints.push(GaussInt {
                re: Integer::from(x.re.numer() * &lcm) / x.re.denom(),
                im: Integer::from(x.im.numer() * &lcm) / x.im.denom(),
            });
        }
        scale *= lcm;
    }
    let d = bareiss(ints, n);
    CRational::new(Rational::from((d.re, scale.clone())), Rational::from((d.im, scale)))
}

fn det_float(entries: &[Float], n: usize) -> Float {
    let prec = entries.first().map_or(64, Float::prec);
    let mut m: Vec<Float> = entries.to_vec();
    let mut det = Float::with_val(prec, 1);
    for k in 0..n {
        let p = (k..n).max_by(|&a, &b| m[a * n + k].cmp_abs(&m[b * n + k]).unwrap_or(Ordering::Equal)).unwrap_or(k);
        if m[p * n + k].is_zero() {
            return Float::new(prec);
        }
        if p != k {
            for c in 0..n {
                m.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let pivot = m[k * n + k].clone();
        det *= &pivot;
        for i in k + 1..n {
            let factor = Float::with_val(prec, &m[i * n + k] / &pivot);
            if factor.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let t = Float::with_val(prec, &factor * &m[k * n + j]);
                m[i * n + j] -= t;
            }
        }
    }
    det
}

fn det_cfloat(entries: &[CFloat], n: usize) -> CFloat {
    let prec = entries.first().map_or(64, |x| x.re.prec());
    let mut m: Vec<CFloat> = entries.to_vec();
    let mut det = CFloat::new(Float::with_val(prec, 1), Float::new(prec));
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| m[a * n + k].norm_sqr().partial_cmp(&m[b * n + k].norm_sqr()).unwrap_or(Ordering::Equal))
            .unwrap_or(k);
        if m[p * n + k].is_zero() {
            return CFloat::new(Float::new(prec), Float::new(prec));
        }
        if p != k {
            for c in 0..n {
                m.swap(k * n + c, p * n + c);
            }
            det = CFloat::new(-det.re, -det.im);
        }
        let pivot = m[k * n + k].clone();
        det = det.mul(&pivot);
        let norm = pivot.norm_sqr();
        let inv = CFloat::new(
            Float::with_val(prec, &pivot.re / &norm),
            Float::with_val(prec, -Float::with_val(prec, &pivot.im / &norm)),
        );
        for i in k + 1..n {
            let factor = m[i * n + k].mul(&inv);
            if factor.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let t = factor.mul(&m[k * n + j]);
                m[i * n + j] = m[i * n + j].sub(&t);
            }
        }
    }
    det
}

/// Bipartite density matrix over a scalar type `S`.
///
/// Hermiticity, unit trace and positivity are properties checked on demand,
/// not enforced at construction.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix<S> {
    dims: (usize, usize),
    entries: Vec<S>,
}

impl<S: Scalar> DensityMatrix<S> {
    /// Builds from row-major entries; the basis index of `|a⟩⊗|b⟩` is
    /// `a·d_B + b`.
    pub fn new(dims: (usize, usize), entries: Vec<S>) -> Result<Self> {
        let n = dims.0 * dims.1;
        if n == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for subsystem dimensions {:?} (need {})",
                entries.len(),
                dims,
                n * n
            )));
        }
        Ok(DensityMatrix { dims, entries })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn size(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn field_kind(&self) -> FieldKind {
        S::FIELD
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i * self.size() + j]
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    /// Transposition of the second tensor factor:
    /// `(a,b;a′,b′) ↦ (a,b′;a′,b)`.
    pub fn partial_transpose(&self) -> Self {
        let (da, db) = self.dims;
        let n = da * db;
        let mut out = self.entries.clone();
        for a in 0..da {
            for b in 0..db {
                for a2 in 0..da {
                    for b2 in 0..db {
                        out[(a * db + b) * n + a2 * db + b2] = self.entries[(a * db + b2) * n + a2 * db + b].clone();
                    }
                }
            }
        }
        DensityMatrix { dims: self.dims, entries: out }
    }

    /// Transposition of the first tensor factor.
    pub fn partial_transpose_first(&self) -> Self {
        let (da, db) = self.dims;
        let n = da * db;
        let mut out = self.entries.clone();
        for a in 0..da {
            for b in 0..db {
                for a2 in 0..da {
                    for b2 in 0..db {
                        out[(a * db + b) * n + a2 * db + b2] = self.entries[(a2 * db + b) * n + a * db + b2].clone();
                    }
                }
            }
        }
        DensityMatrix { dims: self.dims, entries: out }
    }

    pub fn det(&self) -> S {
        S::determinant(&self.entries, self.size())
    }

    pub fn trace(&self) -> S {
        let n = self.size();
        let mut t = self.entries[0].zero_like();
        for i in 0..n {
            t = t.add(&self.entries[i * n + i]);
        }
        t
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (i..n).all(|j| *self.get(i, j) == self.get(j, i).conj()))
    }

    /// Determinant of the principal submatrix on `indices`.
    pub fn principal_minor(&self, indices: &[usize]) -> S {
        let n = self.size();
        let sub: Vec<S> = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.entries[i * n + j].clone())
            .collect();
        S::determinant(&sub, indices.len())
    }

    pub fn leading_principal_minors(&self) -> Vec<S> {
        (1..=self.size()).map(|m| self.principal_minor(&(0..m).collect::<Vec<_>>())).collect()
    }

    /// Positive semidefiniteness via nonnegativity of every principal minor.
    pub fn is_psd(&self) -> bool {
        let n = self.size();
        (1u32..(1 << n)).all(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            self.principal_minor(&idx).real_sign() != Ordering::Less
        })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DensityMatrix<T> {
        DensityMatrix { dims: self.dims, entries: self.entries.iter().map(f).collect() }
    }
}

impl DensityMatrix<Rational> {
    /// `I/N`.
    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        let mut e = vec![Rational::new(); n * n];
        for i in 0..n {
            e[i * n + i] = Rational::from((1, n as u32));
        }
        DensityMatrix { dims, entries: e }
    }

    /// Projector on `(|00⟩ + |11⟩)/√2`.
    pub fn bell_projector() -> Self {
        let mut e = vec![Rational::new(); 16];
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            e[i * 4 + j] = Rational::from((1, 2));
        }
        DensityMatrix { dims: (2, 2), entries: e }
    }

    pub fn to_float(&self, prec: u32) -> DensityMatrix<Float> {
        self.map(|x| Float::with_val(prec, x))
    }
}

impl<S: Scalar> fmt::Debug for DensityMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.size();
        writeln!(f, "DensityMatrix{:?} [", self.dims)?;
        for i in 0..n {
            writeln!(f, "  {:?}", &self.entries[i * n..(i + 1) * n])?;
        }
        write!(f, "]")
    }
}

/// `λ·|Φ⁺⟩⟨Φ⁺| + (1−λ)·I/4`.
pub fn bell_mixture(lambda: &Rational) -> Result<DensityMatrix<Rational>> {
    if *lambda < 0 || *lambda > 1 {
        return Err(Error::InvalidArgument(format!("mixing weight {lambda} outside [0, 1]")));
    }
    let bell = DensityMatrix::bell_projector();
    let mixed = DensityMatrix::maximally_mixed((2, 2));
    let rest = Rational::from(1 - lambda);
    let entries = bell
        .entries
        .iter()
        .zip(mixed.entries.iter())
        .map(|(b, m)| Rational::from(lambda * b) + Rational::from(&rest * m))
        .collect();
    DensityMatrix::new((2, 2), entries)
}

/// Multiprecision Bell mixture for irrational weights.
pub fn bell_mixture_mp(lambda: &Float) -> Result<DensityMatrix<Float>> {
    if *lambda < 0 || *lambda > 1 {
        return Err(Error::InvalidArgument(format!("mixing weight {} outside [0, 1]", lambda.to_f64())));
    }
    let prec = lambda.prec();
    let rest = Float::with_val(prec, 1 - lambda);
    let quarter_rest = Float::with_val(prec, &rest / 4u32);
    let half_lambda = Float::with_val(prec, lambda / 2u32);
    let mut e = vec![Float::new(prec); 16];
    for i in 0..4 {
        e[i * 4 + i] = quarter_rest.clone();
    }
    for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
        e[i * 4 + j] += &half_lambda;
    }
    DensityMatrix::new((2, 2), e)
}

/// Exact minimum of `|ρ|·|ρ^PT|` over the Bell mixture family.
#[derive(Clone, Debug, PartialEq)]
pub struct BellExtremum {
    /// `|ρ(λ)|·|ρ(λ)^PT|` as a polynomial in `u = λ²`.
    pub product_in_u: PolyK,
    /// Minimizing `u = λ²`.
    pub u_min: Rational,
    pub minimum: Rational,
}

/// Locates the minimum of the determinant product exactly: the product is
/// interpolated in `λ` from exact determinants, rewritten in `u = λ²`, and its
/// critical points are found among the rational roots of the derivative.
pub fn bell_mixture_extremum() -> Result<BellExtremum> {
    let samples: Vec<(Rational, Rational)> = (0..=8)
        .map(|j| {
            let lambda = Rational::from((j, 8));
            let rho = bell_mixture(&lambda)?;
            let v = rho.det() * rho.partial_transpose().det();
            Ok((lambda, v))
        })
        .collect::<Result<_>>()?;
    let in_lambda = crate::polyk::interpolate(&samples)?;
    if in_lambda.coeffs().iter().skip(1).step_by(2).any(|c| *c != 0) {
        return Err(Error::StructureViolation("determinant product is not even in λ".into()));
    }
    let product_in_u = PolyK::from_coeffs(in_lambda.coeffs().iter().step_by(2).cloned().collect());
    let mut candidates = vec![Rational::new(), Rational::from(1)];
    candidates
        .extend(crate::polyk::rational_roots(&product_in_u.derivative()).into_iter().filter(|u| *u >= 0 && *u <= 1));
    let (u_min, minimum) = candidates
        .into_iter()
        .map(|u| {
            let v = product_in_u.eval(&u);
            (u, v)
        })
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("candidate list is nonempty");
    Ok(BellExtremum { product_in_u, u_min, minimum })
}

/// Golden-section minimization of the multiprecision determinant product
/// over `λ ∈ [0, 1]`; returns `(λ, value)`.
pub fn bell_mixture_minimize_numeric(prec: u32) -> Result<(f64, Float)> {
    let eval = |lambda: f64| -> Result<Float> {
        let rho = bell_mixture_mp(&Float::with_val(prec, lambda))?;
        Ok(rho.det() * rho.partial_transpose().det())
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > 1e-14 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let mut v = eval(x)?;
    v.set_prec_round(prec, Round::Nearest);
    Ok((x, v))
}
