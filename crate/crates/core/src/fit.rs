//! Recovering an adjustment-factor numerator from fixed-`k` samples once the
//! denominator is known.
//!
//! With `F(k) = A(k) / B(k)` and `B` given, `A(k_i) = F(k_i) B(k_i)` is a
//! Vandermonde system for the coefficients of `A`, solved exactly.

use rug::Rational;
use serde::Serialize;

use crate::cholesky::EnsembleSpec;
use crate::error::{Error, Result};
use crate::moments::{self, FixedKMethod};
use crate::poly::{rational_text, Budget};
use crate::polyk::{pochhammer_poly, PolyK};
use crate::tables;

/// Where the denominator of a fit comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorTemplate {
    /// The structural product form (four-by-four ensembles).
    Structural,
    /// The unreduced Dirichlet denominator `(α + N k)_{Nκ}`.
    Dirichlet,
    /// The published six-by-six denominator.
    Published,
}

impl DenominatorTemplate {
    /// Structural for four-by-four ensembles, Dirichlet otherwise.
    pub fn default_for(spec: &EnsembleSpec) -> Self {
        if moments::structural_denominator(spec.ensemble, 1).is_some() {
            DenominatorTemplate::Structural
        } else {
            DenominatorTemplate::Dirichlet
        }
    }

    pub fn denominator(self, spec: &EnsembleSpec, kappa: u32) -> Result<PolyK> {
        let unavailable =
            || Error::InvalidArgument(format!("no {self:?} denominator for {} at κ = {kappa}", spec.ensemble));
        match self {
            DenominatorTemplate::Structural => {
                Ok(moments::structural_denominator(spec.ensemble, kappa).ok_or_else(unavailable)?.poly())
            }
            DenominatorTemplate::Dirichlet => {
                let n = spec.n as u32;
                Ok(pochhammer_poly(&spec.alpha_total, n * kappa, &Rational::from(n)))
            }
            DenominatorTemplate::Published => {
                let (c, factors) =
                    tables::published_six_by_six_denominator(spec.ensemble, kappa).ok_or_else(unavailable)?;
                Ok(factors.iter().fold(PolyK::constant(Rational::from(c)), |acc, &(a, b)| {
                    acc.mul(&PolyK::linear(Rational::from(a), Rational::from(b)))
                }))
            }
        }
    }
}

/// Samples of `F(k)` and the denominator they are fitted against.
#[derive(Clone, Debug, PartialEq)]
pub struct FitProblem {
    pub kappa: u32,
    pub denominator: PolyK,
    pub samples: Vec<(i64, Rational)>,
}

impl FitProblem {
    /// Requires at least `deg B + 1` samples at distinct `k`.
    pub fn new(kappa: u32, denominator: PolyK, samples: Vec<(i64, Rational)>) -> Result<Self> {
        let p = FitProblem { kappa, denominator, samples };
        let need = p.unknowns();
        if p.samples.len() < need {
            return Err(Error::InvalidArgument(format!("{} samples for {need} unknown coefficients", p.samples.len())));
        }
        let mut ks: Vec<i64> = p.samples.iter().map(|s| s.0).collect();
        ks.sort_unstable();
        if let Some(w) = ks.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Singular(format!("repeated sample at k = {}", w[0])));
        }
        Ok(p)
    }

    /// Number of numerator coefficients, `deg B + 1`.
    pub fn unknowns(&self) -> usize {
        self.denominator.degree().unwrap_or(0) + 1
    }
}

/// Solves `M x = rhs` exactly by Gaussian elimination with row pivoting.
pub fn solve_exact(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Result<Vec<Rational>> {
    let n = rhs.len();
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("system is not {n}×{n}")));
    }
    for col in 0..n {
        let p =
            (col..n).find(|&r| m[r][col] != 0).ok_or_else(|| Error::Singular(format!("no pivot in column {col}")))?;
        m.swap(col, p);
        rhs.swap(col, p);
        let inv = Rational::from(m[col][col].recip_ref());
        let pivot = m[col].clone();
        for r in col + 1..n {
            if m[r][col] == 0 {
                continue;
            }
            let f = Rational::from(&m[r][col] * &inv);
            for (x, p) in m[r][col..].iter_mut().zip(&pivot[col..]) {
                *x -= Rational::from(&f * p);
            }
            let t = Rational::from(&f * &rhs[col]);
            rhs[r] -= t;
        }
    }
    let mut x = vec![Rational::new(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r].clone();
        for c in r + 1..n {
            s -= Rational::from(&m[r][c] * &x[c]);
        }
        x[r] = s / &m[r][r];
    }
    Ok(x)
}

/// Numerator `A` with `A(k_i) / B(k_i) = F(k_i)` for every sample. The first
/// `deg B + 1` samples determine `A`; any further samples must agree.
pub fn fit_numerator(problem: &FitProblem) -> Result<PolyK> {
    let n = problem.unknowns();
    let (solve, check) = problem.samples.split_at(n);
    let rows: Vec<Vec<Rational>> = solve
        .iter()
        .map(|(k, _)| {
            let k = Rational::from(*k);
            let mut row = Vec::with_capacity(n);
            let mut pw = Rational::from(1);
            for _ in 0..n {
                row.push(pw.clone());
                pw *= &k;
            }
            row
        })
        .collect();
    let rhs = solve.iter().map(|(k, f)| Rational::from(f * &problem.denominator.eval_int(*k))).collect();
    let a = PolyK::from_coeffs(solve_exact(rows, rhs)?);
    for (k, f) in check {
        if a.eval_int(*k) != Rational::from(f * &problem.denominator.eval_int(*k)) {
            return Err(Error::StructureViolation(format!(
                "sequence does not fit structural form: sample at k = {k} disagrees"
            )));
        }
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationRow {
    pub k: i64,
    pub expected: String,
    pub predicted: String,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn failing_ks(&self) -> Vec<i64> {
        self.rows.iter().filter(|r| !r.equal).map(|r| r.k).collect()
    }
}

/// Exact comparison of `fit / B` with held-out samples.
pub fn cross_validate(fit: &PolyK, problem: &FitProblem, extra: &[(i64, Rational)]) -> Result<ValidationReport> {
    if let Some((k, _)) = extra.iter().find(|(k, _)| problem.samples.iter().any(|s| s.0 == *k)) {
        return Err(Error::InvalidArgument(format!("held-out k = {k} was used for fitting")));
    }
    let mut rows = Vec::with_capacity(extra.len());
    for (k, f) in extra {
        let b = problem.denominator.eval_int(*k);
        let predicted = if b == 0 {
            return Err(Error::InvalidArgument(format!("held-out k = {k} is a pole")));
        } else {
            fit.eval_int(*k) / b
        };
        rows.push(ValidationRow {
            k: *k,
            expected: rational_text(f),
            predicted: rational_text(&predicted),
            equal: predicted == *f,
        });
    }
    let pass = rows.iter().all(|r| r.equal);
    Ok(ValidationReport { rows, pass })
}

/// Fit plus validation against engine-computed samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub ensemble: String,
    pub kappa: u32,
    pub template: DenominatorTemplate,
    pub sample_ks: Vec<i64>,
    pub numerator_coeffs_ascending: Vec<String>,
    pub denominator_coeffs_ascending: Vec<String>,
    /// Reduced numerator and denominator when the template is not already in
    /// lowest terms.
    pub reduced_numerator_coeffs_ascending: Vec<String>,
    pub reduced_denominator_form: String,
    pub validation: ValidationReport,
}

/// `F_κ(k)` at each `k` from the fixed-`k` engine.
pub fn engine_samples(spec: &EnsembleSpec, kappa: u32, ks: &[i64], budget: &Budget) -> Result<Vec<(i64, Rational)>> {
    ks.iter()
        .map(|&k| {
            let k32 = u32::try_from(k).map_err(|_| Error::InvalidArgument(format!("negative k = {k}")))?;
            Ok((k, moments::joint_moment_exact(spec, k32, kappa, FixedKMethod::Paired, budget)?.factor))
        })
        .collect()
}

/// Fits on `sample_ks` and validates on `holdout_ks`, both sampled from the
/// fixed-`k` engine.
pub fn fit_from_engine(
    spec: &EnsembleSpec,
    kappa: u32,
    template: DenominatorTemplate,
    sample_ks: &[i64],
    holdout_ks: &[i64],
    budget: &Budget,
) -> Result<FitReport> {
    let denominator = template.denominator(spec, kappa)?;
    let problem = FitProblem::new(kappa, denominator, engine_samples(spec, kappa, sample_ks, budget)?)?;
    let numerator = fit_numerator(&problem)?;
    let extra = engine_samples(spec, kappa, holdout_ks, budget)?;
    let validation = cross_validate(&numerator, &problem, &extra)?;
    let f = crate::polyk::RationalFunctionK::new(numerator.clone(), problem.denominator.clone())?;
    let reduced = if template == DenominatorTemplate::Dirichlet {
        let c = moments::canonical_reduce(&f, spec, kappa)?;
        (c.function.numerator, c.denominator_form.to_string())
    } else {
        let form = moments::factor_denominator(&problem.denominator, spec, kappa)?;
        (numerator.clone(), form.to_string())
    };
    Ok(FitReport {
        ensemble: spec.ensemble.name().to_string(),
        kappa,
        template,
        sample_ks: sample_ks.to_vec(),
        numerator_coeffs_ascending: numerator.coeff_strings(),
        denominator_coeffs_ascending: problem.denominator.coeff_strings(),
        reduced_numerator_coeffs_ascending: reduced.0.coeff_strings(),
        reduced_denominator_form: reduced.1,
        validation,
    })
}
