//! Symbolic expansion of `|ρ^PT|` in Cholesky coordinates.
//!
//! Entries of `ρ = C*C` are quadratic forms in the real coordinates of `C`
//! with integer coefficients; determinants are expanded by Laplace expansion
//! along rows with a memo over column subsets, which for `N ≤ 6` needs at
//! most 64 minors.

use rug::Integer;

use crate::cholesky::{EnsembleSpec, VarRole};
use crate::error::{Error, Result};
use crate::poly::{Budget, Monomial, PowerTelemetry, SparsePoly};

type IPoly = SparsePoly<Integer>;

/// Polynomial with Gaussian-integer coefficients, as real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct CPoly {
    pub re: IPoly,
    pub im: IPoly,
}

impl CPoly {
    fn zero(nvars: usize) -> Self {
        CPoly { re: IPoly::zero(nvars), im: IPoly::zero(nvars) }
    }

    fn one(nvars: usize) -> Self {
        CPoly { re: IPoly::one(nvars), im: IPoly::zero(nvars) }
    }

    fn add(&self, o: &CPoly) -> CPoly {
        CPoly { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    fn sub(&self, o: &CPoly) -> CPoly {
        CPoly { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    fn mul(&self, o: &CPoly, budget: &Budget) -> Result<CPoly> {
        let nv = self.re.nvars();
        let prod = |a: &IPoly, b: &IPoly| -> Result<IPoly> {
            if a.is_zero() || b.is_zero() {
                Ok(IPoly::zero(nv))
            } else {
                a.mul(b, budget)
            }
        };
        let re = prod(&self.re, &o.re)?.sub(&prod(&self.im, &o.im)?);
        let im = prod(&self.re, &o.im)?.add(&prod(&self.im, &o.re)?);
        Ok(CPoly { re, im })
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

/// One entry of `C` as a complex linear form.
fn factor_entry(spec: &EnsembleSpec, row: usize, col: usize) -> CPoly {
    let nv = spec.var_count();
    let mut out = CPoly::zero(nv);
    if row > col {
        return out;
    }
    for (i, v) in spec.vars.iter().enumerate() {
        if v.row == row && v.col == col {
            match v.role {
                VarRole::Diagonal | VarRole::OffRe => out.re = IPoly::var(nv, i),
                VarRole::OffIm => out.im = IPoly::var(nv, i),
            }
        }
    }
    out
}

/// Entries of `ρ = C*C`, row-major.
pub fn rho_entries(spec: &EnsembleSpec) -> Vec<CPoly> {
    let n = spec.n;
    let nv = spec.var_count();
    let c: Vec<CPoly> = (0..n * n).map(|ix| factor_entry(spec, ix / n, ix % n)).collect();
    let budget = Budget::unlimited();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = CPoly::zero(nv);
            for k in 0..=i.min(j) {
                let a = &c[k * n + i];
                let conj = CPoly { re: a.re.clone(), im: a.im.neg() };
                acc = acc.add(&conj.mul(&c[k * n + j], &budget).expect("unlimited budget"));
            }
            out.push(acc);
        }
    }
    out
}

/// Partial transpose on the second factor of row-major entries.
pub fn partial_transpose_entries<T: Clone>(entries: &[T], dims: (usize, usize)) -> Vec<T> {
    let (da, db) = dims;
    let n = da * db;
    let mut out = entries.to_vec();
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    out[(a * db + b) * n + a2 * db + b2] = entries[(a * db + b2) * n + a2 * db + b].clone();
                }
            }
        }
    }
    out
}

/// Determinant of an `n×n` matrix of polynomials.
pub fn det_poly(entries: &[CPoly], n: usize, budget: &Budget) -> Result<CPoly> {
    if entries.len() != n * n || n > 16 {
        return Err(Error::DimensionMismatch(format!("{} entries for a {n}×{n} matrix", entries.len())));
    }
    let nv = entries.first().map_or(0, |e| e.re.nvars());
    // minors[mask]: determinant of the last popcount(mask) rows restricted to
    // the columns in mask.
    let mut minors: Vec<Option<CPoly>> = vec![None; 1 << n];
    minors[0] = Some(CPoly::one(nv));
    let mut masks: Vec<usize> = (1..1usize << n).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let row = n - mask.count_ones() as usize;
        let mut acc = CPoly::zero(nv);
        for (pos, col) in (0..n).filter(|c| mask >> c & 1 == 1).enumerate() {
            let a = &entries[row * n + col];
            if a.is_zero() {
                continue;
            }
            let sub = minors[mask & !(1 << col)].as_ref().expect("smaller minors first");
            if sub.is_zero() {
                continue;
            }
            let t = a.mul(sub, budget)?;
            acc = if pos % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
        }
        budget.check(acc.re.len() + acc.im.len(), "determinant minor")?;
        minors[mask] = Some(acc);
    }
    // Free everything but the full determinant.
    Ok(minors.pop().flatten().expect("full minor"))
}

/// `|ρ^PT|` as an integer polynomial in the Cholesky coordinates.
pub fn det_pt_poly(spec: &EnsembleSpec, budget: &Budget) -> Result<SparsePoly<Integer>> {
    let rho = rho_entries(spec);
    let pt = partial_transpose_entries(&rho, spec.dims());
    let d = det_poly(&pt, spec.n, budget)?;
    real_part(d, "partial transpose determinant")
}

/// `|ρ|` expanded the same way; equals `∏ c_ii²`.
pub fn det_rho_poly(spec: &EnsembleSpec, budget: &Budget) -> Result<SparsePoly<Integer>> {
    let d = det_poly(&rho_entries(spec), spec.n, budget)?;
    real_part(d, "determinant")
}

fn real_part(d: CPoly, what: &str) -> Result<SparsePoly<Integer>> {
    if !d.im.is_zero() {
        return Err(Error::StructureViolation(format!("{what} of a Hermitian matrix has an imaginary part")));
    }
    Ok(d.re)
}

/// `|ρ^PT|^κ` fully expanded, with per-power term counts.
pub fn det_pt_power(spec: &EnsembleSpec, kappa: u32, budget: &Budget) -> Result<(SparsePoly<Integer>, PowerTelemetry)> {
    det_pt_poly(spec, budget)?.pow(kappa, budget)
}

/// Checks the row-sign symmetry: in every term the total degree in the
/// coordinates of each row of `C` is even.
pub fn has_row_parity(spec: &EnsembleSpec, p: &SparsePoly<Integer>) -> bool {
    let rows: Vec<Vec<usize>> = (0..spec.n)
        .map(|r| spec.vars.iter().enumerate().filter(|(_, v)| v.row == r).map(|(i, _)| i).collect())
        .collect();
    p.iter().all(|(m, _)| rows.iter().all(|ix| ix.iter().map(|&i| m.exponent(i) as u32).sum::<u32>() % 2 == 0))
}

/// Monomial `∏ c_ii^2`.
pub fn diagonal_square(spec: &EnsembleSpec) -> Monomial {
    let mut m = Monomial::ONE;
    for &d in &spec.diag_index {
        m.set(d, 2);
    }
    m
}
