//! Cholesky coordinates of trace-one positive semidefinite matrices and
//! exact Hilbert–Schmidt expectations of monomials in them.
//!
//! A density matrix is written `ρ = C*C` with `C` upper triangular and a
//! nonnegative real diagonal. The real coordinates of `C` lie on the unit
//! sphere (`tr ρ = 1`), their squares on a simplex, and under the flat
//! measure on `ρ` the squares are Dirichlet distributed. The Jacobian of
//! `C ↦ C*C` is the monomial `2^N ∏ c_ii^{e_i}` with `e_i = N + 1 − i`
//! (real) or `2(N − i) + 1` (complex), which fixes the Dirichlet parameter of
//! each diagonal square; every off-diagonal real coordinate gets `1/2`.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CRational, DensityMatrix, FieldKind};
use crate::poly::{Monomial, SparsePoly};
use crate::polyk::pochhammer;

/// The four generic ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    TwoRebit,
    TwoQubit,
    RebitRetrit,
    QubitQutrit,
}

impl Ensemble {
    pub const ALL: [Ensemble; 4] =
        [Ensemble::TwoRebit, Ensemble::TwoQubit, Ensemble::RebitRetrit, Ensemble::QubitQutrit];

    pub fn name(self) -> &'static str {
        match self {
            Ensemble::TwoRebit => "two-rebit",
            Ensemble::TwoQubit => "two-qubit",
            Ensemble::RebitRetrit => "rebit-retrit",
            Ensemble::QubitQutrit => "qubit-qutrit",
        }
    }

    pub fn dims(self) -> (usize, usize) {
        match self {
            Ensemble::TwoRebit | Ensemble::TwoQubit => (2, 2),
            Ensemble::RebitRetrit | Ensemble::QubitQutrit => (2, 3),
        }
    }

    pub fn size(self) -> usize {
        let (a, b) = self.dims();
        a * b
    }

    pub fn field(self) -> FieldKind {
        match self {
            Ensemble::TwoRebit | Ensemble::RebitRetrit => FieldKind::Real,
            Ensemble::TwoQubit | Ensemble::QubitQutrit => FieldKind::Complex,
        }
    }

    pub fn spec(self) -> EnsembleSpec {
        EnsembleSpec::new(self)
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ensemble::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown ensemble '{s}'")))
    }
}

/// What a real Cholesky coordinate stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    Diagonal,
    /// Real part of an off-diagonal entry (the whole entry when real).
    OffRe,
    OffIm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CholeskyVar {
    /// Zero-based row and column of `C`.
    pub row: usize,
    pub col: usize,
    pub role: VarRole,
    pub alpha: Rational,
}

/// Variable layout and Dirichlet parameters of an ensemble.
///
/// Variables are ordered `c11, c12, …, c1N, c22, …, cNN`; a complex
/// off-diagonal entry contributes its real then imaginary part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub ensemble: Ensemble,
    pub n: usize,
    pub field: FieldKind,
    pub vars: Vec<CholeskyVar>,
    pub alpha_total: Rational,
    /// Variable index of `c_ii`, by `i`.
    pub diag_index: Vec<usize>,
}

impl EnsembleSpec {
    pub fn new(ensemble: Ensemble) -> Self {
        let n = ensemble.size();
        let field = ensemble.field();
        let half = Rational::from((1, 2));
        let mut vars = Vec::new();
        let mut diag_index = Vec::with_capacity(n);
        for row in 0..n {
            for col in row..n {
                if row == col {
                    // one-based i = row + 1
                    let alpha = match field {
                        FieldKind::Real => Rational::from(((n - row + 1) as u32, 2u32)),
                        FieldKind::Complex => Rational::from((n - row) as u32),
                    };
                    diag_index.push(vars.len());
                    vars.push(CholeskyVar { row, col, role: VarRole::Diagonal, alpha });
                } else {
                    vars.push(CholeskyVar { row, col, role: VarRole::OffRe, alpha: half.clone() });
                    if field == FieldKind::Complex {
                        vars.push(CholeskyVar { row, col, role: VarRole::OffIm, alpha: half.clone() });
                    }
                }
            }
        }
        let alpha_total = vars.iter().map(|v| &v.alpha).sum::<Rational>();
        EnsembleSpec { ensemble, n, field, vars, alpha_total, diag_index }
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.ensemble.dims()
    }

    pub fn is_diagonal(&self, var: usize) -> bool {
        self.vars[var].role == VarRole::Diagonal
    }

    /// Indices of the real and (complex case) imaginary coordinates of
    /// `C[row][col]` for `row < col`.
    pub fn off_diagonal_indices(&self, row: usize, col: usize) -> (usize, Option<usize>) {
        let re = self
            .vars
            .iter()
            .position(|v| v.row == row && v.col == col && v.role == VarRole::OffRe)
            .expect("off-diagonal coordinate exists");
        let im = (self.field == FieldKind::Complex).then_some(re + 1);
        (re, im)
    }

    /// Jacobian magnitude of `C ↦ C*C` as a monomial in the diagonal
    /// coordinates.
    pub fn jacobian_monomial(&self) -> SparsePoly<Rational> {
        let mut m = Monomial::ONE;
        for (&v, e) in self.diag_index.iter().zip(jacobian_exponents(self.n, self.field)) {
            m.set(v, e as u8);
        }
        SparsePoly::monomial(self.var_count(), m, Rational::from(Integer::from(1) << self.n as u32))
    }

    /// `E[∏ c_i^{e_i}]` under the Hilbert–Schmidt measure.
    ///
    /// An odd exponent on an off-diagonal coordinate gives zero by sign
    /// symmetry. An odd exponent on a diagonal coordinate is rejected: that
    /// moment is not rational, and it never arises from polynomials in the
    /// entries of `ρ`, which are even in each row of `C`.
    pub fn expectation_monomial(&self, exponents: &[u32]) -> Result<Rational> {
        if exponents.len() != self.var_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} exponents for {} coordinates",
                exponents.len(),
                self.var_count()
            )));
        }
        let odd = |v: &(&CholeskyVar, &u32)| v.1 % 2 == 1;
        if self.vars.iter().zip(exponents).filter(odd).any(|(v, _)| v.role != VarRole::Diagonal) {
            return Ok(Rational::new());
        }
        if let Some((v, e)) = self.vars.iter().zip(exponents).find(odd) {
            return Err(Error::InvalidArgument(format!(
                "odd exponent {e} on diagonal coordinate c{}{} has an irrational moment",
                v.row + 1,
                v.col + 1
            )));
        }
        let mut num = Rational::from(1);
        let mut total = 0u32;
        for (var, &e) in self.vars.iter().zip(exponents) {
            num *= pochhammer(&var.alpha, e / 2);
            total += e / 2;
        }
        Ok(num / pochhammer(&self.alpha_total, total))
    }

    /// `E[|ρ|^k]` through the monomial `(∏ c_ii²)^k`.
    pub fn det_power_expectation(&self, k: u32) -> Rational {
        let mut e = vec![0u32; self.var_count()];
        for &d in &self.diag_index {
            e[d] = 2 * k;
        }
        self.expectation_monomial(&e).expect("even exponents")
    }
}

/// Cholesky coordinates of one density matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CholeskyPoint {
    pub coords: Vec<Rational>,
}

impl CholeskyPoint {
    pub fn new(spec: &EnsembleSpec, coords: Vec<Rational>) -> Result<Self> {
        let p = CholeskyPoint { coords };
        p.validate(spec)?;
        Ok(p)
    }

    pub fn validate(&self, spec: &EnsembleSpec) -> Result<()> {
        if self.coords.len() != spec.var_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for {} variables",
                self.coords.len(),
                spec.var_count()
            )));
        }
        for &d in &spec.diag_index {
            if self.coords[d] < 0 {
                return Err(Error::InvalidArgument(format!("negative diagonal coordinate {}", self.coords[d])));
            }
        }
        let norm: Rational = self.coords.iter().map(|c| Rational::from(c * c)).sum();
        if norm != 1 {
            return Err(Error::InvalidArgument(format!("coordinates have squared norm {norm}, not 1")));
        }
        Ok(())
    }

    /// Rational point on the unit sphere by inverse stereographic projection
    /// of `t` (length `var_count − 1`), with diagonal signs made nonnegative.
    pub fn from_stereographic(spec: &EnsembleSpec, t: &[Rational]) -> Result<Self> {
        if t.len() + 1 != spec.var_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameters for {} coordinates",
                t.len(),
                spec.var_count()
            )));
        }
        let s: Rational = t.iter().map(|x| Rational::from(x * x)).sum();
        let denom = Rational::from(&s + 1);
        let mut coords: Vec<Rational> = t.iter().map(|x| Rational::from(2 * x) / &denom).collect();
        coords.push(Rational::from(&s - 1) / &denom);
        for &d in &spec.diag_index {
            coords[d] = Rational::from(coords[d].abs_ref());
        }
        CholeskyPoint::new(spec, coords)
    }

    /// Upper-triangular `C` as complex rationals, row-major.
    fn factor(&self, spec: &EnsembleSpec) -> Vec<CRational> {
        let n = spec.n;
        let mut c = vec![CRational::default(); n * n];
        for (v, x) in spec.vars.iter().zip(&self.coords) {
            let slot = &mut c[v.row * n + v.col];
            match v.role {
                VarRole::Diagonal | VarRole::OffRe => slot.re = x.clone(),
                VarRole::OffIm => slot.im = x.clone(),
            }
        }
        c
    }
}

/// Exponents of `c_11, …, c_NN` in the Jacobian `2^N ∏ c_ii^{e_i}` of
/// `C ↦ C*C` for `N×N` upper-triangular `C` with nonnegative diagonal:
/// `N + 1 − i` over the reals and `2(N − i) + 1` over the complex numbers
/// (`i` counted from 1).
pub fn jacobian_exponents(n: usize, field: FieldKind) -> Vec<u32> {
    (1..=n as u32)
        .map(|i| match field {
            FieldKind::Real => n as u32 + 1 - i,
            FieldKind::Complex => 2 * (n as u32 - i) + 1,
        })
        .collect()
}

/// Exact density matrix of either field kind.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactState {
    Real(DensityMatrix<Rational>),
    Complex(DensityMatrix<CRational>),
}

impl ExactState {
    pub fn det(&self) -> Rational {
        match self {
            ExactState::Real(m) => m.det(),
            ExactState::Complex(m) => m.det().re,
        }
    }

    pub fn partial_transpose_det(&self) -> Rational {
        match self {
            ExactState::Real(m) => m.partial_transpose().det(),
            ExactState::Complex(m) => m.partial_transpose().det().re,
        }
    }

    pub fn trace(&self) -> Rational {
        match self {
            ExactState::Real(m) => m.trace(),
            ExactState::Complex(m) => m.trace().re,
        }
    }

    pub fn is_psd(&self) -> bool {
        match self {
            ExactState::Real(m) => m.is_psd(),
            ExactState::Complex(m) => m.is_psd(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        match self {
            ExactState::Real(m) => m.is_hermitian(),
            ExactState::Complex(m) => m.is_hermitian(),
        }
    }
}

/// `ρ = C*C` from Cholesky coordinates.
pub fn reconstruct(spec: &EnsembleSpec, point: &CholeskyPoint) -> Result<ExactState> {
    point.validate(spec)?;
    let n = spec.n;
    let c = point.factor(spec);
    let mut rho = vec![CRational::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = CRational::default();
            for k in 0..=i.min(j) {
                let a = &c[k * n + i];
                let b = &c[k * n + j];
                // conj(a)·b
                acc.re += Rational::from(&a.re * &b.re) + Rational::from(&a.im * &b.im);
                acc.im += Rational::from(&a.re * &b.im) - Rational::from(&a.im * &b.re);
            }
            rho[i * n + j] = acc;
        }
    }
    Ok(match spec.field {
        FieldKind::Real => ExactState::Real(DensityMatrix::new(spec.dims(), rho.into_iter().map(|x| x.re).collect())?),
        FieldKind::Complex => ExactState::Complex(DensityMatrix::new(spec.dims(), rho)?),
    })
}

/// Cholesky coordinates of a sampled state given as real and imaginary parts
/// (row-major, `N×N`), in hardware floats.
pub fn cholesky_coordinates_f64(spec: &EnsembleSpec, re: &[f64], im: &[f64]) -> Result<Vec<f64>> {
    let n = spec.n;
    if re.len() != n * n || im.len() != n * n {
        return Err(Error::DimensionMismatch(format!("expected {} entries", n * n)));
    }
    let mut cr = vec![0.0; n * n];
    let mut ci = vec![0.0; n * n];
    for i in 0..n {
        let mut d = re[i * n + i];
        for k in 0..i {
            d -= cr[k * n + i] * cr[k * n + i] + ci[k * n + i] * ci[k * n + i];
        }
        let cii = d.max(0.0).sqrt();
        cr[i * n + i] = cii;
        for j in i + 1..n {
            // ρ_ij − Σ conj(c_ki) c_kj
            let mut sr = re[i * n + j];
            let mut si = im[i * n + j];
            for k in 0..i {
                let (ar, ai) = (cr[k * n + i], ci[k * n + i]);
                let (br, bi) = (cr[k * n + j], ci[k * n + j]);
                sr -= ar * br + ai * bi;
                si -= ar * bi - ai * br;
            }
            if cii > 0.0 {
                cr[i * n + j] = sr / cii;
                ci[i * n + j] = si / cii;
            }
        }
    }
    Ok(spec
        .vars
        .iter()
        .map(|v| match v.role {
            VarRole::Diagonal | VarRole::OffRe => cr[v.row * n + v.col],
            VarRole::OffIm => ci[v.row * n + v.col],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn dirichlet_parameters() {
        let cases = [
            (Ensemble::TwoRebit, 10, vec![q(5, 2), q(2, 1), q(3, 2), q(1, 1)], 10),
            (Ensemble::TwoQubit, 16, vec![q(4, 1), q(3, 1), q(2, 1), q(1, 1)], 16),
            (Ensemble::RebitRetrit, 21, vec![q(7, 2), q(3, 1), q(5, 2), q(2, 1), q(3, 2), q(1, 1)], 21),
            (Ensemble::QubitQutrit, 36, vec![q(6, 1), q(5, 1), q(4, 1), q(3, 1), q(2, 1), q(1, 1)], 36),
        ];
        for (e, count, diag, total) in cases {
            let s = e.spec();
            assert_eq!(s.var_count(), count, "{e}");
            let got: Vec<Rational> = s.diag_index.iter().map(|&d| s.vars[d].alpha.clone()).collect();
            assert_eq!(got, diag, "{e}");
            assert_eq!(s.alpha_total, total, "{e}");
            assert!(s.vars.iter().filter(|v| v.role != VarRole::Diagonal).all(|v| v.alpha == q(1, 2)));
        }
    }

    #[test]
    fn jacobian_examples() {
        let s = Ensemble::TwoRebit.spec();
        let j = s.jacobian_monomial();
        assert_eq!(j.len(), 1);
        let (m, c) = j.iter().next().unwrap();
        assert_eq!(*c, q(16, 1));
        let diag: Vec<u8> = s.diag_index.iter().map(|&d| m.exponent(d)).collect();
        assert_eq!(diag, vec![4, 3, 2, 1]);
        let s = Ensemble::TwoQubit.spec();
        let (m, _) = s.jacobian_monomial().iter().next().map(|(m, c)| (*m, c.clone())).unwrap();
        let diag: Vec<u8> = s.diag_index.iter().map(|&d| m.exponent(d)).collect();
        assert_eq!(diag, vec![7, 5, 3, 1]);
    }

    #[test]
    fn expectation_examples() {
        let s = Ensemble::TwoRebit.spec();
        let mut e = vec![0u32; 10];
        assert_eq!(s.expectation_monomial(&e).unwrap(), q(1, 1));
        e[0] = 2;
        assert_eq!(s.expectation_monomial(&e).unwrap(), q(1, 4));
        e[1] = 1;
        assert_eq!(s.expectation_monomial(&e).unwrap(), q(0, 1));
        let mut d = vec![0u32; 10];
        for &i in &s.diag_index {
            d[i] = 2;
        }
        assert_eq!(s.expectation_monomial(&d).unwrap(), q(1, 2288));
        d[0] = 3;
        assert!(s.expectation_monomial(&d).is_err());
        assert!(s.expectation_monomial(&[0; 9]).is_err());
    }

    #[test]
    fn det_power_matches_pochhammer_formula() {
        let s = Ensemble::TwoRebit.spec();
        for n in 0..=10u32 {
            let expected =
                pochhammer(&q(5, 2), n) * pochhammer(&q(2, 1), n) * pochhammer(&q(3, 2), n) * pochhammer(&q(1, 1), n)
                    / pochhammer(&q(10, 1), 4 * n);
            assert_eq!(s.det_power_expectation(n), expected);
        }
    }

    #[test]
    fn reconstruct_maximally_mixed() {
        let s = Ensemble::TwoRebit.spec();
        let mut c = vec![q(0, 1); 10];
        for &d in &s.diag_index {
            c[d] = q(1, 2);
        }
        let p = CholeskyPoint::new(&s, c).unwrap();
        let rho = reconstruct(&s, &p).unwrap();
        assert_eq!(rho, ExactState::Real(DensityMatrix::maximally_mixed((2, 2))));
    }

    #[test]
    fn reconstruct_rejects_bad_points() {
        let s = Ensemble::TwoRebit.spec();
        let mut c = vec![q(0, 1); 10];
        c[0] = q(-1, 1);
        assert!(CholeskyPoint::new(&s, c.clone()).is_err());
        c[0] = q(1, 2);
        assert!(CholeskyPoint::new(&s, c).is_err());
    }

    #[test]
    fn random_points_have_monomial_determinant() {
        for e in Ensemble::ALL {
            let s = e.spec();
            let t: Vec<Rational> = (0..s.var_count() - 1).map(|i| q((i as i64 * 7) % 5 - 2, 3 + i as i64)).collect();
            let p = CholeskyPoint::from_stereographic(&s, &t).unwrap();
            let rho = reconstruct(&s, &p).unwrap();
            assert_eq!(rho.trace(), q(1, 1), "{e}");
            assert!(rho.is_hermitian(), "{e}");
            let diag_prod: Rational =
                s.diag_index.iter().map(|&d| Rational::from(&p.coords[d] * &p.coords[d])).product();
            assert_eq!(rho.det(), diag_prod, "{e}");
        }
    }

    #[test]
    fn float_cholesky_inverts_reconstruct() {
        for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
            let s = e.spec();
            let t: Vec<Rational> = (0..s.var_count() - 1).map(|i| q((i as i64 * 3) % 7 - 3, 5)).collect();
            let p = CholeskyPoint::from_stereographic(&s, &t).unwrap();
            let n = s.n;
            let (re, im): (Vec<f64>, Vec<f64>) = match reconstruct(&s, &p).unwrap() {
                ExactState::Real(m) => (m.entries().iter().map(|x| x.to_f64()).collect(), vec![0.0; n * n]),
                ExactState::Complex(m) => m.entries().iter().map(|x| (x.re.to_f64(), x.im.to_f64())).unzip(),
            };
            let c = cholesky_coordinates_f64(&s, &re, &im).unwrap();
            for (a, b) in c.iter().zip(&p.coords) {
                assert!((a - b.to_f64()).abs() < 1e-12, "{e}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ensemble_names_round_trip() {
        for e in Ensemble::ALL {
            assert_eq!(e.name().parse::<Ensemble>().unwrap(), e);
        }
        assert!("two-quokka".parse::<Ensemble>().is_err());
    }
}
