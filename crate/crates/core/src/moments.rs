//! Exact joint moments `⟨|ρ|^k |ρ^PT|^κ⟩`.
//!
//! Everything here reduces to one object, the diagonal marginal of
//! `|ρ^PT|^κ`: integrating out the off-diagonal Cholesky coordinates leaves a
//! finite sum `Σ_d M(d) ∏ c_ii^{2 d_i}`. Multiplying by `|ρ|^k = ∏ c_ii^{2k}`
//! and applying the Dirichlet moments gives
//!
//! ```text
//! ⟨|ρ|^k |ρ^PT|^κ⟩ / ⟨|ρ|^k⟩ = Σ_d M(d) ∏_i (α_i + k)_{d_i} / (α + N k)_{N κ}
//! ```
//!
//! which is evaluated either at a fixed integer `k` or as a rational function
//! of the symbol `k`.
//!
//! The marginal is built without expanding `|ρ^PT|^κ` in full: with
//! `P^κ = P^a · P^b`, only pairs of terms whose exponent parities agree can
//! produce an all-even monomial, so terms of `P^b` are bucketed by parity and
//! each term of `P^a` meets only its own bucket.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rug::{Integer, Rational};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::cholesky::{Ensemble, EnsembleSpec};
use crate::error::{Error, Result};
use crate::expansion::det_pt_poly;
use crate::matrix::FieldKind;
use crate::poly::{rational_text, Budget, Monomial, SparsePoly};
use crate::polyk::{pochhammer, pochhammer_poly, PolyK, RationalFunctionK};
use crate::tables;

type IPoly = SparsePoly<Integer>;

/// Largest `κ` computed symbolically without an explicit budget override.
pub fn default_max_kappa(ensemble: Ensemble) -> u32 {
    match ensemble {
        Ensemble::TwoRebit => 4,
        Ensemble::TwoQubit => 2,
        Ensemble::RebitRetrit => 2,
        Ensemble::QubitQutrit => 1,
    }
}

/// `|ρ^PT|` in Cholesky coordinates, computed once per ensemble and process.
pub fn det_pt_expansion(spec: &EnsembleSpec, budget: &Budget) -> Result<Arc<IPoly>> {
    static CACHE: OnceLock<Mutex<FxHashMap<Ensemble, Arc<IPoly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("cache lock").get(&spec.ensemble) {
        return Ok(Arc::clone(p));
    }
    let p = Arc::new(det_pt_poly(spec, budget)?);
    cache.lock().expect("cache lock").insert(spec.ensemble, Arc::clone(&p));
    Ok(p)
}

/// `|ρ^PT|^κ` as a full expansion.
pub fn det_pt_power_expansion(spec: &EnsembleSpec, kappa: u32, budget: &Budget) -> Result<IPoly> {
    if kappa == 0 {
        return Ok(IPoly::one(spec.var_count()));
    }
    let p = det_pt_expansion(spec, budget)?;
    Ok(p.pow(kappa, budget)?.0)
}

/// `Σ_d M(d) ∏ c_ii^{2 d_i}`: the expectation of `|ρ^PT|^κ` over the
/// off-diagonal coordinates, keyed by the halved diagonal exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalMarginal {
    pub ensemble: Ensemble,
    pub kappa: u32,
    pub entries: Vec<(Vec<u32>, Rational)>,
    /// Term counts of the two factors `P^a`, `P^b` and the number of term
    /// pairs visited.
    pub left_terms: usize,
    pub right_terms: usize,
    pub pairs: u64,
}

/// `(2a − 1)!!` for `a ≥ 0`, with `(−1)!! = 1`.
fn double_factorial_odd(a: u32) -> Integer {
    (1..=a).fold(Integer::from(1), |acc, j| acc * (2 * j - 1))
}

#[derive(Default)]
struct Acc {
    small: i128,
    big: Integer,
}

impl Acc {
    fn add_small(&mut self, x: i128) {
        match self.small.checked_add(x) {
            Some(s) => self.small = s,
            None => {
                self.big += self.small;
                self.small = x;
            }
        }
    }

    fn total(self) -> Integer {
        self.big + self.small
    }
}

type AccMap = FxHashMap<u64, Acc>;

fn merge(mut a: AccMap, b: AccMap) -> AccMap {
    for (k, v) in b {
        let e = a.entry(k).or_default();
        e.add_small(v.small);
        e.big += v.big;
    }
    a
}

struct PairLayout {
    diag: Vec<usize>,
    off: Vec<usize>,
    df_small: Vec<Option<i128>>,
    df_big: Vec<Integer>,
}

impl PairLayout {
    fn new(spec: &EnsembleSpec, max_half: u32) -> Self {
        let df_big: Vec<Integer> = (0..=max_half).map(double_factorial_odd).collect();
        let df_small = df_big.iter().map(|x| x.to_i128()).collect();
        PairLayout {
            diag: spec.diag_index.clone(),
            off: (0..spec.var_count()).filter(|&i| !spec.is_diagonal(i)).collect(),
            df_small,
            df_big,
        }
    }

    fn key(&self, m: &Monomial) -> u64 {
        self.diag.iter().enumerate().fold(0u64, |key, (j, &d)| key | (u64::from(m.exponent(d) / 2) << (8 * j)))
    }

    /// Adds `cl · cr · ∏_off (2a_j − 1)!!` for the product monomial `m`.
    fn accumulate(
        &self,
        acc: &mut AccMap,
        m: &Monomial,
        cl: &Integer,
        cl_small: Option<i128>,
        cr: &Integer,
        cr_small: Option<i128>,
    ) {
        let slot = acc.entry(self.key(m)).or_default();
        let mut w_small: Option<i128> = Some(1);
        for &o in &self.off {
            let a = usize::from(m.exponent(o) / 2);
            if a > 1 {
                w_small = w_small.zip(self.df_small[a]).and_then(|(w, d)| w.checked_mul(d));
            }
        }
        let fast = cl_small
            .zip(cr_small)
            .and_then(|(a, b)| a.checked_mul(b))
            .zip(w_small)
            .and_then(|(ab, w)| ab.checked_mul(w));
        match fast {
            Some(x) => slot.add_small(x),
            None => {
                let mut w = Integer::from(1);
                for &o in &self.off {
                    w *= &self.df_big[usize::from(m.exponent(o) / 2)];
                }
                slot.big += Integer::from(cl * cr) * w;
            }
        }
    }
}

type MarginalCache = FxHashMap<(Ensemble, u32), Arc<DiagonalMarginal>>;

/// Diagonal marginal of `|ρ^PT|^κ`.
pub fn diagonal_marginal(spec: &EnsembleSpec, kappa: u32, budget: &Budget) -> Result<Arc<DiagonalMarginal>> {
    static CACHE: OnceLock<Mutex<MarginalCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("cache lock").get(&(spec.ensemble, kappa)) {
        return Ok(Arc::clone(m));
    }
    let m = Arc::new(compute_marginal(spec, kappa, budget)?);
    cache.lock().expect("cache lock").insert((spec.ensemble, kappa), Arc::clone(&m));
    Ok(m)
}

fn compute_marginal(spec: &EnsembleSpec, kappa: u32, budget: &Budget) -> Result<DiagonalMarginal> {
    let n = spec.n as u32;
    if 2 * n * kappa > u32::from(crate::poly::MAX_EXPONENT) {
        return Err(Error::BudgetExceeded(format!("κ = {kappa} exceeds the exponent range")));
    }
    let a = kappa.div_ceil(2);
    let b = kappa - a;
    let nv = spec.var_count();
    let (left, right) = if kappa == 0 {
        (IPoly::one(nv), IPoly::one(nv))
    } else {
        let p = det_pt_expansion(spec, budget)?;
        let (pa, _) = p.pow(a, budget)?;
        let pb = if b == a { pa.clone() } else { p.pow(b, budget)?.0 };
        (pa, pb)
    };
    let layout = PairLayout::new(spec, n * kappa);

    let mut buckets: FxHashMap<Monomial, Vec<(Monomial, Integer, Option<i128>)>> = FxHashMap::default();
    for (m, c) in right.iter() {
        buckets.entry(m.parity()).or_default().push((*m, c.clone(), c.to_i128()));
    }
    let left_terms: Vec<(Monomial, Integer, Option<i128>)> =
        left.iter().map(|(m, c)| (*m, c.clone(), c.to_i128())).collect();
    let pairs: u64 = left_terms.iter().map(|(m, _, _)| buckets.get(&m.parity()).map_or(0, |v| v.len() as u64)).sum();

    let acc = left_terms
        .par_chunks(64)
        .fold(AccMap::default, |mut acc, chunk| {
            for (ml, cl, cls) in chunk {
                let Some(bucket) = buckets.get(&ml.parity()) else { continue };
                for (mr, cr, crs) in bucket {
                    let m = ml.checked_mul(mr).expect("exponents within range");
                    layout.accumulate(&mut acc, &m, cl, *cls, cr, *crs);
                }
            }
            acc
        })
        .reduce(AccMap::default, merge);

    let mut entries: Vec<(Vec<u32>, Rational)> = Vec::with_capacity(acc.len());
    for (key, v) in acc {
        let total = v.total();
        if total == 0 {
            continue;
        }
        let halves: Vec<u32> = (0..spec.n).map(|j| ((key >> (8 * j)) & 0xff) as u32).collect();
        let off_half = n * kappa - halves.iter().sum::<u32>();
        entries.push((halves, Rational::from((total, Integer::from(1) << off_half))));
    }
    entries.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(DiagonalMarginal {
        ensemble: spec.ensemble,
        kappa,
        entries,
        left_terms: left.len(),
        right_terms: right.len(),
        pairs,
    })
}

impl DiagonalMarginal {
    /// `⟨|ρ|^k |ρ^PT|^κ⟩ / ⟨|ρ|^k⟩` at an integer `k`.
    pub fn factor_at(&self, spec: &EnsembleSpec, k: u32) -> Rational {
        let alphas: Vec<Rational> = spec.diag_index.iter().map(|&d| Rational::from(&spec.vars[d].alpha + k)).collect();
        let mut sum = Rational::new();
        for (halves, w) in &self.entries {
            let mut t = w.clone();
            for (alpha, &h) in alphas.iter().zip(halves) {
                t *= pochhammer(alpha, h);
            }
            sum += t;
        }
        let n = spec.n as u32;
        sum / pochhammer(&Rational::from(&spec.alpha_total + n * k), n * self.kappa)
    }

    /// The same quotient as a rational function of `k`, unreduced: the
    /// denominator is `(α + N k)_{Nκ}`.
    pub fn factor_symbolic(&self, spec: &EnsembleSpec) -> RationalFunctionK {
        let one = Rational::from(1);
        let mut cache: BTreeMap<(usize, u32), PolyK> = BTreeMap::new();
        let mut numerator = PolyK::zero();
        for (halves, w) in &self.entries {
            let mut t = PolyK::constant(w.clone());
            for (i, &h) in halves.iter().enumerate() {
                if h == 0 {
                    continue;
                }
                let alpha = &spec.vars[spec.diag_index[i]].alpha;
                let p = cache.entry((i, h)).or_insert_with(|| pochhammer_poly(alpha, h, &one));
                t = t.mul(p);
            }
            numerator = numerator.add(&t);
        }
        let n = spec.n as u32;
        let denominator = pochhammer_poly(&spec.alpha_total, n * self.kappa, &Rational::from(n));
        RationalFunctionK::new(numerator, denominator).expect("nonzero Pochhammer denominator")
    }
}

/// How fixed-`k` moments are summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedKMethod {
    /// Through the diagonal marginal.
    Paired,
    /// Expanding `|ρ^PT|^κ` fully and integrating every monomial.
    Direct,
}

/// An exact joint moment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentResult {
    pub ensemble: Ensemble,
    pub k: u32,
    pub kappa: u32,
    /// `⟨|ρ|^k |ρ^PT|^κ⟩`.
    pub value: Rational,
    /// `value / ⟨|ρ|^k⟩`.
    pub factor: Rational,
}

/// `⟨|ρ|^k⟩`, by the Dirichlet monomial moment and, for four-by-four
/// ensembles, also by the closed Gamma form; the two must agree.
pub fn baseline_moment(spec: &EnsembleSpec, k: u32) -> Result<Rational> {
    let a = spec.det_power_expectation(k);
    if let Some(b) = baseline_closed_form(spec.ensemble, k) {
        if a != b {
            return Err(Error::Disagreement(format!(
                "{} baseline at k = {k}: Dirichlet {a} vs closed form {b}",
                spec.ensemble
            )));
        }
    }
    Ok(a)
}

fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Closed Gamma forms of `⟨|ρ|^k⟩` for two rebits and two qubits.
pub fn baseline_closed_form(ensemble: Ensemble, k: u32) -> Option<Rational> {
    match ensemble {
        // 945 · 4^{3−2k} Γ(2k+2) Γ(2k+4) / Γ(4k+10)
        Ensemble::TwoRebit => {
            let num = Integer::from(945) * factorial(2 * k + 1) * factorial(2 * k + 3) * Integer::from(64);
            let den = factorial(4 * k + 9) * (Integer::from(1) << (4 * k));
            Some(Rational::from((num, den)))
        }
        // 108972864000 Γ(k+1) Γ(k+2) Γ(k+3) Γ(k+4) / Γ(4k+16)
        Ensemble::TwoQubit => {
            let num = Integer::from(108_972_864_000u64)
                * factorial(k)
                * factorial(k + 1)
                * factorial(k + 2)
                * factorial(k + 3);
            Some(Rational::from((num, factorial(4 * k + 15))))
        }
        _ => None,
    }
}

/// Exact `⟨|ρ|^k |ρ^PT|^κ⟩`.
pub fn joint_moment_exact(
    spec: &EnsembleSpec,
    k: u32,
    kappa: u32,
    method: FixedKMethod,
    budget: &Budget,
) -> Result<MomentResult> {
    let baseline = baseline_moment(spec, k)?;
    let (value, factor) = match method {
        FixedKMethod::Paired => {
            let factor = diagonal_marginal(spec, kappa, budget)?.factor_at(spec, k);
            (Rational::from(&factor * &baseline), factor)
        }
        FixedKMethod::Direct => {
            let value = direct_moments(spec, kappa, &[k], budget)?.remove(0);
            (value.clone(), value / &baseline)
        }
    };
    Ok(MomentResult { ensemble: spec.ensemble, k, kappa, value, factor })
}

/// `⟨|ρ|^k |ρ^PT|^κ⟩` for several `k` by integrating every monomial of the
/// full expansion of `|ρ^PT|^κ`.
pub fn direct_moments(spec: &EnsembleSpec, kappa: u32, ks: &[u32], budget: &Budget) -> Result<Vec<Rational>> {
    let p = det_pt_power_expansion(spec, kappa, budget)?;
    let nv = spec.var_count();
    let terms: Vec<(Monomial, Integer)> = p.iter().map(|(m, c)| (*m, c.clone())).collect();
    ks.iter()
        .map(|&k| {
            let partial: Result<Vec<Rational>> = terms
                .par_chunks(256)
                .map(|chunk| {
                    let mut sum = Rational::new();
                    let mut e = vec![0u32; nv];
                    for (m, c) in chunk {
                        for (i, slot) in e.iter_mut().enumerate() {
                            *slot = u32::from(m.exponent(i));
                        }
                        for &d in &spec.diag_index {
                            e[d] += 2 * k;
                        }
                        let x = spec.expectation_monomial(&e)?;
                        if x != 0 {
                            sum += x * c;
                        }
                    }
                    Ok(sum)
                })
                .collect();
            Ok(partial?.into_iter().sum())
        })
        .collect()
}

/// Constant times a product of primitive integer linear factors `a·k + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredForm {
    pub constant: Rational,
    pub factors: Vec<(Integer, Integer)>,
}

impl FactoredForm {
    pub fn poly(&self) -> PolyK {
        self.factors.iter().fold(PolyK::constant(self.constant.clone()), |acc, (a, b)| {
            acc.mul(&PolyK::linear(Rational::from(a), Rational::from(b)))
        })
    }
}

impl fmt::Display for FactoredForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.constant.denom() == 1 {
            write!(f, "{}", self.constant.numer())?;
        } else {
            write!(f, "({})", rational_text(&self.constant))?;
        }
        for (a, b) in &self.factors {
            let sign = if *b < 0 { "-" } else { "+" };
            let b = Integer::from(b.abs_ref());
            if *a == 1 {
                write!(f, "(k{sign}{b})")?;
            } else {
                write!(f, "({a}k{sign}{b})")?;
            }
        }
        Ok(())
    }
}

fn int(x: i64) -> Integer {
    Integer::from(x)
}

/// `128^κ (k+3)_κ (2k+11/2)_{2κ}` (two rebits) or
/// `2^{6κ} (k+9/2)_κ (2k+17/2)_{2κ}` (two qubits), as integer linear factors.
pub fn structural_denominator(ensemble: Ensemble, kappa: u32) -> Option<FactoredForm> {
    let kappa_i = i64::from(kappa);
    let (constant, factors) = match ensemble {
        Ensemble::TwoRebit => (
            Integer::from(Integer::u_pow_u(32, kappa)),
            (0..kappa_i)
                .map(|m| (int(1), int(3 + m)))
                .chain((0..2 * kappa_i).map(|j| (int(4), int(11 + 2 * j))))
                .collect(),
        ),
        Ensemble::TwoQubit => (
            Integer::from(Integer::u_pow_u(8, kappa)),
            (0..kappa_i)
                .map(|m| (int(2), int(9 + 2 * m)))
                .chain((0..2 * kappa_i).map(|j| (int(4), int(17 + 2 * j))))
                .collect(),
        ),
        _ => return None,
    };
    Some(FactoredForm { constant: Rational::from(constant), factors })
}

/// Splits `den` into primitive factors of the Dirichlet denominator
/// `(α + N k)_{Nκ}` and a constant.
pub fn factor_denominator(den: &PolyK, spec: &EnsembleSpec, kappa: u32) -> Result<FactoredForm> {
    let n = spec.n as u32;
    let mut rest = den.clone();
    let mut factors = Vec::new();
    for j in 0..n * kappa {
        let c = Rational::from(&spec.alpha_total + j);
        let c = c.numer().clone();
        let g = Integer::from(c.gcd_ref(&Integer::from(n)));
        let (a, b) = (Integer::from(n) / &g, c / g);
        let f = PolyK::linear(Rational::from(&a), Rational::from(&b));
        let (q, r) = rest.div_rem(&f)?;
        if r.is_zero() {
            rest = q;
            factors.push((a, b));
        }
    }
    if rest.degree() != Some(0) {
        return Err(Error::StructureViolation(format!("denominator {den} is not a product of Dirichlet factors")));
    }
    factors.sort();
    Ok(FactoredForm { constant: rest.leading(), factors })
}

/// Adjustment factor in normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalFactor {
    pub ensemble: Ensemble,
    pub kappa: u32,
    /// Reduced, integer-coefficient numerator over the structural denominator.
    pub function: RationalFunctionK,
    pub denominator_form: FactoredForm,
    /// Numerator over `(α + N k)_{Nκ}` before cancellation.
    pub raw: RationalFunctionK,
}

/// Reduces a raw adjustment factor and scales it to the published
/// conventions: for four-by-four ensembles the denominator is exactly the
/// structural product (numerator leading coefficient `2^κ` for rebits, `1`
/// for qubits); for six-by-six ensembles the numerator is a primitive integer
/// polynomial with positive leading coefficient.
pub fn canonical_reduce(raw: &RationalFunctionK, spec: &EnsembleSpec, kappa: u32) -> Result<CanonicalFactor> {
    let n = spec.n as u32;
    let expected_raw = pochhammer_poly(&spec.alpha_total, n * kappa, &Rational::from(n));
    if raw.denominator != expected_raw {
        return Err(Error::StructureViolation("raw denominator is not (α + N k)_{Nκ}".into()));
    }
    let red = raw.reduced();
    let (numerator, denominator) = match structural_denominator(spec.ensemble, kappa) {
        Some(form) => {
            let b = form.poly();
            let s = b.leading() / red.denominator.leading();
            let den = red.denominator.scale(&s);
            if den != b {
                return Err(Error::StructureViolation(format!(
                    "{} κ = {kappa}: reduced denominator {den} differs from the structural form {form}",
                    spec.ensemble
                )));
            }
            let num = red.numerator.scale(&s);
            let expected_lead = match spec.field {
                FieldKind::Real => Rational::from(Integer::from(1) << kappa),
                FieldKind::Complex => Rational::from(1),
            };
            if num.integer_coeffs().is_none() || num.leading() != expected_lead {
                return Err(Error::StructureViolation(format!(
                    "{} κ = {kappa}: numerator {num} is not integral with leading coefficient {expected_lead}",
                    spec.ensemble
                )));
            }
            if num.degree() != Some(3 * kappa as usize) || den.degree() != Some(3 * kappa as usize) {
                return Err(Error::StructureViolation(format!(
                    "{} κ = {kappa}: factor is not biproper of degree 3κ",
                    spec.ensemble
                )));
            }
            (num, den)
        }
        None => {
            let (num, s) = red.numerator.primitive();
            let den = red.denominator.scale(&s);
            if den.integer_coeffs().is_none() {
                return Err(Error::StructureViolation(format!(
                    "{} κ = {kappa}: denominator {den} is not integral",
                    spec.ensemble
                )));
            }
            (num, den)
        }
    };
    let denominator_form = factor_denominator(&denominator, spec, kappa)?;
    let mut function = RationalFunctionK::new(numerator, denominator)?;
    function.canonical = true;
    Ok(CanonicalFactor { ensemble: spec.ensemble, kappa, function, denominator_form, raw: raw.clone() })
}

/// `F_κ(k)` with `⟨|ρ|^k |ρ^PT|^κ⟩ = F_κ(k) ⟨|ρ|^k⟩`, in normal form.
pub fn adjustment_factor_symbolic(spec: &EnsembleSpec, kappa: u32, budget: &Budget) -> Result<CanonicalFactor> {
    if kappa == 0 {
        return Err(Error::InvalidArgument("κ must be positive".into()));
    }
    let raw = diagonal_marginal(spec, kappa, budget)?.factor_symbolic(spec);
    canonical_reduce(&raw, spec, kappa)
}

/// Polynomial that must divide the raw numerator:
/// `2^κ ∏_{m<κ} (2k+5+2m)` for rebits and `4^κ (k+4)_κ` for qubits.
pub fn divisibility_witness(ensemble: Ensemble, kappa: u32) -> Option<PolyK> {
    match ensemble {
        Ensemble::TwoRebit => {
            Some((0..kappa).fold(PolyK::constant(Rational::from(Integer::from(1) << kappa)), |acc, m| {
                acc.mul(&PolyK::linear(Rational::from(2), Rational::from(5 + 2 * m)))
            }))
        }
        Ensemble::TwoQubit => Some(
            pochhammer_poly(&Rational::from(4), kappa, &Rational::from(1))
                .scale(&Rational::from(Integer::from(1) << (2 * kappa))),
        ),
        _ => None,
    }
}

/// Whether the witness divides the raw numerator exactly.
pub fn witness_divides(ensemble: Ensemble, kappa: u32, raw_numerator: &PolyK) -> Result<Option<bool>> {
    match divisibility_witness(ensemble, kappa) {
        Some(w) => Ok(Some(raw_numerator.div_rem(&w)?.1.is_zero())),
        None => Ok(None),
    }
}

/// Published-convention index `j` (coefficient of `k^{j−1}`) and value of the
/// leading-coefficient closed forms for two-rebit numerators, from
/// `C_{3κ+1}` down to `C_{3κ−4}`, skipping indices below 1.
pub fn rebit_leading_coefficients(kappa: u32) -> Vec<(u32, Rational)> {
    let k = Rational::from(kappa);
    let p2 = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from(Integer::from(1) << e as u32)
        } else {
            Rational::from((1, Integer::from(1) << (-e) as u32))
        }
    };
    let kk = i64::from(kappa);
    let horner = |coeffs: &[i64]| -> Rational { coeffs.iter().fold(Rational::new(), |acc, &c| acc * &k + c) };
    let mut out = vec![
        (3 * kappa + 1, p2(kk)),
        (3 * kappa, Rational::from(3) * p2(kk - 1) * &k * Rational::from(&k + 2)),
        // κ(κ(κ(9κ+32)+24)−45)
        (3 * kappa - 1, p2(kk - 3) * &k * horner(&[9, 32, 24, -45])),
        // κ(κ(κ(κ(9κ²+42κ+52)−119)−52)−60)
        (3 * kappa - 2, p2(kk - 4) * &k * horner(&[9, 42, 52, -119, -52, -60])),
    ];
    if kappa >= 2 {
        // (κ−1)(135κ⁷+855κ⁶+1895κ⁵−1771κ⁴−3091κ³−7731κ²+32394κ)/5
        let c = Rational::from(&k - 1) * horner(&[135, 855, 1895, -1771, -3091, -7731, 32394, 0]);
        out.push((3 * kappa - 3, p2(kk - 7) * c / 5));
    }
    if kappa >= 2 {
        // (κ−1)κ·P(κ)/5 with P(κ) = κ(κ(κ(κ(κ(3κ(3κ(9κ+59)+377)−2887)−2295)−10535)+112240)−181492)+436720
        let inner = horner(&[9, 59]) * 3 * &k + 377;
        let inner = inner * 3 * &k - 2887;
        let inner = inner * &k - 2295;
        let inner = inner * &k - 10535;
        let inner = inner * &k + 112240;
        let inner = inner * &k - 181492;
        let p = inner * &k + 436720;
        out.push((3 * kappa - 4, p2(kk - 8) * Rational::from(&k - 1) * &k * p / 5));
    }
    out
}

/// `C_{3κ+1} = 1` and `C_{3κ} = 3κ(κ+3)/2` for two-qubit numerators.
pub fn qubit_leading_coefficients(kappa: u32) -> Vec<(u32, Rational)> {
    vec![(3 * kappa + 1, Rational::from(1)), (3 * kappa, Rational::from((3 * kappa * (kappa + 3), 2)))]
}

/// Indices where a numerator differs from the closed-form leading
/// coefficients (empty when all hold).
pub fn leading_coefficient_mismatches(ensemble: Ensemble, kappa: u32, numerator: &PolyK) -> Vec<u32> {
    let expected = match ensemble {
        Ensemble::TwoRebit => rebit_leading_coefficients(kappa),
        Ensemble::TwoQubit => qubit_leading_coefficients(kappa),
        _ => return Vec::new(),
    };
    expected.into_iter().filter(|(j, c)| numerator.coeff(*j as usize - 1) != *c).map(|(j, _)| j).collect()
}

/// `c(κ) = √π Γ(2κ+4) Γ(8κ+10) / (8 Γ(2κ+5/2) Γ(4κ+2) Γ(4κ+10))`, exactly.
pub fn conversion_factor(kappa: u32) -> Rational {
    // Γ(n + 1/2) = (2n)! √π / (4^n n!) with n = 2κ + 2
    let n = 2 * kappa + 2;
    let num = factorial(2 * kappa + 3) * factorial(8 * kappa + 9) * (Integer::from(1) << (2 * n)) * factorial(n);
    let den = Integer::from(8) * factorial(2 * n) * factorial(4 * kappa + 1) * factorial(4 * kappa + 9);
    Rational::from((num, den))
}

/// Where ratio-sequence entries come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioSource {
    Computed,
    #[serde(alias = "paper-tables")]
    PublishedTables,
}

/// `⟨(|ρ||ρ^PT|)^k⟩ / ⟨|ρ|^{2k}⟩` for `k = 1..max_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioSequence {
    pub ensemble: Ensemble,
    pub source: RatioSource,
    pub entries: Vec<Rational>,
}

/// Ratio sequence, either from computed marginals or from the embedded
/// numerator tables; entry `k` is `F_k(k) ⟨|ρ|^k⟩ / ⟨|ρ|^{2k}⟩`.
pub fn ratio_sequence(spec: &EnsembleSpec, max_k: u32, source: RatioSource, budget: &Budget) -> Result<RatioSequence> {
    if max_k == 0 {
        return Err(Error::InvalidArgument("max_k must be at least 1".into()));
    }
    let mut entries = Vec::with_capacity(max_k as usize);
    for k in 1..=max_k {
        let factor = match source {
            RatioSource::Computed => diagonal_marginal(spec, k, budget)?.factor_at(spec, k),
            RatioSource::PublishedTables => tables::published_factor(spec.ensemble, k)
                .ok_or_else(|| Error::InvalidArgument(format!("no embedded table for {} at κ = {k}", spec.ensemble)))?
                .eval_int(i64::from(k))?,
        };
        entries.push(factor * baseline_moment(spec, k)? / baseline_moment(spec, 2 * k)?);
    }
    Ok(RatioSequence { ensemble: spec.ensemble, source, entries })
}

/// Exact rational as `{num, den}` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalJson {
    fn from(r: &Rational) -> Self {
        RationalJson { num: r.numer().to_string(), den: r.denom().to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicJson {
    pub numerator_coeffs_ascending: Vec<String>,
    pub denominator_structural_form: String,
    pub denominator_coeffs_ascending: Vec<String>,
}

impl From<&CanonicalFactor> for SymbolicJson {
    fn from(c: &CanonicalFactor) -> Self {
        SymbolicJson {
            numerator_coeffs_ascending: c.function.numerator.coeff_strings(),
            denominator_structural_form: c.denominator_form.to_string(),
            denominator_coeffs_ascending: c.function.denominator.coeff_strings(),
        }
    }
}

/// Result record for JSON output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentJson {
    pub ensemble: Ensemble,
    pub k: u32,
    pub kappa: u32,
    pub moment: RationalJson,
    pub factor: RationalJson,
    pub factor_symbolic: Option<SymbolicJson>,
}

impl MomentJson {
    pub fn new(r: &MomentResult, symbolic: Option<&CanonicalFactor>) -> Self {
        MomentJson {
            ensemble: r.ensemble,
            k: r.k,
            kappa: r.kappa,
            moment: (&r.value).into(),
            factor: (&r.factor).into(),
            factor_symbolic: symbolic.map(Into::into),
        }
    }
}
