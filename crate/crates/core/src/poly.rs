//! Sparse multivariate polynomials with exact coefficients.
//!
//! Exponent vectors are packed eight bits per variable into five machine
//! words, so monomial multiplication is a handful of word additions and a
//! parity class is a single mask.

use std::fmt;
use std::hash::{Hash, Hasher};

use rug::ops::Pow;
use rug::{Integer, Rational};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Maximum number of variables a [`Monomial`] can carry.
pub const MAX_VARS: usize = 40;
/// Largest exponent a single variable may reach.
pub const MAX_EXPONENT: u8 = 127;

const WORDS: usize = MAX_VARS / 8;
const LOW_BITS: u64 = 0x0101_0101_0101_0101;
const HIGH_BITS: u64 = 0x8080_8080_8080_8080;

/// Packed exponent vector.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct Monomial([u64; WORDS]);

impl Hash for Monomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let folded = self.0[0]
            ^ self.0[1].rotate_left(13)
            ^ self.0[2].rotate_left(29)
            ^ self.0[3].rotate_left(41)
            ^ self.0[4].rotate_left(53);
        state.write_u64(folded);
    }
}

impl Monomial {
    pub const ONE: Monomial = Monomial([0; WORDS]);

    pub fn from_exponents(exponents: &[u8]) -> Result<Self> {
        if exponents.len() > MAX_VARS {
            return Err(Error::DimensionMismatch(format!(
                "{} variables exceed the packed limit of {MAX_VARS}",
                exponents.len()
            )));
        }
        let mut m = Monomial::ONE;
        for (i, &e) in exponents.iter().enumerate() {
            if e > MAX_EXPONENT {
                return Err(Error::InvalidArgument(format!("exponent {e} exceeds {MAX_EXPONENT}")));
            }
            m.set(i, e);
        }
        Ok(m)
    }

    /// `x_i`.
    pub fn var(i: usize) -> Self {
        let mut m = Monomial::ONE;
        m.set(i, 1);
        m
    }

    #[inline]
    pub fn exponent(&self, i: usize) -> u8 {
        (self.0[i / 8] >> ((i % 8) * 8)) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, e: u8) {
        let shift = (i % 8) * 8;
        let w = &mut self.0[i / 8];
        *w = (*w & !(0xffu64 << shift)) | ((e as u64) << shift);
    }

    /// Product of two monomials; `None` when some exponent would exceed
    /// [`MAX_EXPONENT`].
    #[inline]
    pub fn checked_mul(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = [0u64; WORDS];
        let mut high = 0u64;
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a + b;
            high |= *o;
        }
        if high & HIGH_BITS != 0 {
            None
        } else {
            Some(Monomial(out))
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|w| w.to_le_bytes().iter().map(|&b| b as u32).sum::<u32>()).sum()
    }

    /// Exponent parities as a monomial with 0/1 entries.
    #[inline]
    pub fn parity(&self) -> Monomial {
        let mut out = self.0;
        for w in &mut out {
            *w &= LOW_BITS;
        }
        Monomial(out)
    }

    #[inline]
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|w| w & LOW_BITS == 0)
    }

    pub fn exponents(&self, nvars: usize) -> Vec<u8> {
        (0..nvars).map(|i| self.exponent(i)).collect()
    }

    /// Graded lexicographic comparison: total degree first, then the
    /// exponent of the first variable, the second, and so on.
    pub fn grlex_cmp(&self, other: &Monomial, nvars: usize) -> std::cmp::Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for i in 0..nvars {
                match self.exponent(i).cmp(&other.exponent(i)) {
                    std::cmp::Ordering::Equal => continue,
                    o => return o,
                }
            }
            std::cmp::Ordering::Equal
        })
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nvars = (0..MAX_VARS).rev().find(|&i| self.exponent(i) != 0).map_or(0, |i| i + 1);
        write!(f, "Monomial{:?}", self.exponents(nvars))
    }
}

/// Coefficient ring for [`SparsePoly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, other: &Self);
    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn to_rational(&self) -> Rational;
}

impl Coeff for Integer {
    fn zero() -> Self {
        Integer::new()
    }
    fn one() -> Self {
        Integer::from(1)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        Integer::from(self * other)
    }
    fn negated(&self) -> Self {
        Integer::from(-self)
    }
    fn to_rational(&self) -> Rational {
        Rational::from(self)
    }
}

impl Coeff for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn one() -> Self {
        Rational::from(1)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }
    fn mul_ref(&self, other: &Self) -> Self {
        Rational::from(self * other)
    }
    fn negated(&self) -> Self {
        Rational::from(-self)
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

/// Limits on intermediate expansion size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_terms: usize,
    pub max_bytes: u64,
}

/// Rough resident size of one stored term (key, coefficient limbs, table slot).
pub const BYTES_PER_TERM: u64 = 96;

impl Budget {
    pub const DEFAULT_MAX_TERMS: usize = 200_000_000;

    pub fn unlimited() -> Self {
        Budget { max_terms: usize::MAX, max_bytes: u64::MAX }
    }

    /// 2·10⁸ terms or 75% of available memory, whichever fires first.
    pub fn from_environment() -> Self {
        let max_bytes = available_memory_bytes().map_or(u64::MAX, |b| b / 4 * 3);
        Budget { max_terms: Self::DEFAULT_MAX_TERMS, max_bytes }
    }

    pub fn with_max_terms(max_terms: usize) -> Self {
        Budget { max_terms, ..Self::from_environment() }
    }

    pub fn check(&self, terms: usize, what: &str) -> Result<()> {
        if terms > self.max_terms {
            return Err(Error::BudgetExceeded(format!(
                "{what}: {terms} terms exceed the term cap of {}",
                self.max_terms
            )));
        }
        if (terms as u64).saturating_mul(BYTES_PER_TERM) > self.max_bytes {
            return Err(Error::BudgetExceeded(format!(
                "{what}: {terms} terms exceed the memory cap of {} bytes",
                self.max_bytes
            )));
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::from_environment()
    }
}

fn available_memory_bytes() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/meminfo").ok()?;
    text.lines().find_map(|line| {
        let rest = line.strip_prefix("MemAvailable:")?;
        let kb: u64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
        Some(kb * 1024)
    })
}

/// Term-count telemetry collected while raising a polynomial to a power.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PowerTelemetry {
    /// Term count after each multiplication, starting with the base.
    pub term_counts: Vec<usize>,
}

/// Sparse polynomial in `nvars` variables.
#[derive(Clone, PartialEq)]
pub struct SparsePoly<C: Coeff = Rational> {
    nvars: usize,
    terms: FxHashMap<Monomial, C>,
}

impl<C: Coeff> SparsePoly<C> {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "{nvars} variables exceed {MAX_VARS}");
        SparsePoly { nvars, terms: FxHashMap::default() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::ONE, c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    /// The variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        Self::monomial(nvars, Monomial::var(i), C::one())
    }

    pub fn monomial(nvars: usize, m: Monomial, c: C) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(nvars: usize, terms: I) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    /// Terms in graded lexicographic order (highest first).
    pub fn sorted_terms(&self) -> Vec<(Monomial, C)> {
        let mut v: Vec<(Monomial, C)> = self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        v.sort_by(|a, b| b.0.grlex_cmp(&a.0, self.nvars));
        v
    }

    pub fn add_term(&mut self, m: Monomial, c: &C) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&m) {
            Some(existing) => {
                existing.add_assign_ref(c);
                existing.is_zero()
            }
            None => {
                self.terms.insert(m, c.clone());
                false
            }
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, &c.negated());
        }
        out
    }

    pub fn neg(&self) -> Self {
        SparsePoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (*m, c.negated())).collect() }
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        SparsePoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (*m, c.mul_ref(s))).collect() }
    }

    /// Exact product; fails if an exponent overflows or the result exceeds
    /// the budget.
    pub fn mul(&self, other: &Self, budget: &Budget) -> Result<Self> {
        self.check_same(other);
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut terms: FxHashMap<Monomial, C> = FxHashMap::default();
        terms.reserve(large.len().saturating_mul(2));
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let m = ma
                    .checked_mul(mb)
                    .ok_or_else(|| Error::BudgetExceeded(format!("exponent exceeds {MAX_EXPONENT} in product")))?;
                terms.entry(m).or_insert_with(C::zero).add_mul(ca, cb);
            }
            budget.check(terms.len(), "polynomial product")?;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(SparsePoly { nvars: self.nvars, terms })
    }

    /// `self^n` by repeated multiplication, recording term counts.
    pub fn pow(&self, n: u32, budget: &Budget) -> Result<(Self, PowerTelemetry)> {
        let mut telemetry = PowerTelemetry::default();
        if n == 0 {
            return Ok((Self::one(self.nvars), telemetry));
        }
        let mut acc = self.clone();
        telemetry.term_counts.push(acc.len());
        for _ in 1..n {
            acc = acc.mul(self, budget)?;
            telemetry.term_counts.push(acc.len());
        }
        Ok((acc, telemetry))
    }

    /// Terms whose exponents are all even.
    pub fn even_part(&self) -> Self {
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.is_even()).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    pub fn to_rational(&self) -> SparsePoly<Rational> {
        SparsePoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (*m, c.to_rational())).collect() }
    }

    /// Evaluates at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut sum = Rational::new();
        for (m, c) in &self.terms {
            let mut t = c.to_rational();
            for (i, x) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    t *= Rational::from(x.pow(e as u32));
                }
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Canonical text form: one term per line, `e1 e2 … eV : num/den`, graded
    /// lexicographic order, highest term first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (m, c) in self.sorted_terms() {
            let exps: Vec<String> = m.exponents(self.nvars).iter().map(|e| e.to_string()).collect();
            let r = c.to_rational();
            out.push_str(&format!("{} : {}/{}\n", exps.join(" "), r.numer(), r.denom()));
        }
        out
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "polynomials live in different rings");
    }
}

impl SparsePoly<Rational> {
    /// Parses the canonical text form.
    pub fn from_text(nvars: usize, text: &str) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) =
                line.split_once(':').ok_or_else(|| Error::Parse(format!("line {}: missing ':'", lineno + 1)))?;
            let exps: Vec<u8> = lhs
                .split_whitespace()
                .map(|s| s.parse::<u8>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if exps.len() != nvars {
                return Err(Error::Parse(format!("line {}: {} exponents, expected {nvars}", lineno + 1, exps.len())));
            }
            let c = parse_rational(rhs.trim())?;
            p.add_term(Monomial::from_exponents(&exps)?, &c);
        }
        Ok(p)
    }
}

impl<C: Coeff> fmt::Debug for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly[{} vars, {} terms]", self.nvars, self.terms.len())
    }
}

/// Parses `num/den` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: Integer = n.trim().parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            let d: Integer = d.trim().parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            if d == 0 {
                return Err(Error::Parse(format!("{s}: zero denominator")));
            }
            Rational::from((n, d))
        }
        None => Rational::from(s.trim().parse::<Integer>().map_err(|e| Error::Parse(format!("{s}: {e}")))?),
    };
    Ok(parsed)
}

/// `num/den` text for a rational (integers keep the `/1`).
pub fn rational_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> SparsePoly<Integer> {
        SparsePoly::var(n, i)
    }

    #[test]
    fn monomial_packing() {
        let m = Monomial::from_exponents(&[1, 0, 3, 127, 5, 0, 0, 0, 9, 2]).unwrap();
        assert_eq!(m.exponent(3), 127);
        assert_eq!(m.exponent(8), 9);
        assert_eq!(m.degree(), 147);
        assert!(m.checked_mul(&Monomial::var(3)).is_none());
        let p = Monomial::from_exponents(&[2, 1, 0, 4]).unwrap().parity();
        assert_eq!(p.exponents(4), vec![0, 1, 0, 0]);
        assert!(Monomial::from_exponents(&[128]).is_err());
        assert!(Monomial::from_exponents(&[0; 41]).is_err());
    }

    #[test]
    fn binomial_square() {
        let b = Budget::unlimited();
        let s = x(2, 0).add(&x(2, 1));
        let (sq, tel) = s.pow(2, &b).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(tel.term_counts, vec![2, 3]);
        let two = Integer::from(2);
        assert_eq!(sq.coefficient(&Monomial::from_exponents(&[1, 1]).unwrap()), Some(&two));
        let diff = x(2, 0).sub(&x(2, 1));
        let prod = s.mul(&diff, &b).unwrap();
        assert_eq!(prod.len(), 2);
        assert!(prod.is_homogeneous());
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = x(3, 0).add(&x(3, 1));
        let z = p.sub(&p);
        assert!(z.is_zero());
    }

    #[test]
    fn budget_fires() {
        let s = x(3, 0).add(&x(3, 1)).add(&x(3, 2));
        let tight = Budget { max_terms: 5, max_bytes: u64::MAX };
        let err = s.pow(3, &tight).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(msg) if msg.contains("term cap of 5")));
    }

    #[test]
    fn text_round_trip_and_order() {
        let b = Budget::unlimited();
        let p = x(2, 0).add(&SparsePoly::constant(2, Integer::from(-3))).mul(&x(2, 1), &b).unwrap();
        let text = p.to_rational().scale(&Rational::from((1, 2))).to_text();
        assert_eq!(text, "1 1 : 1/2\n0 1 : -3/2\n");
        let back = SparsePoly::from_text(2, &text).unwrap();
        assert_eq!(back, p.to_rational().scale(&Rational::from((1, 2))));
    }

    #[test]
    fn eval_matches_hand_value() {
        let b = Budget::unlimited();
        let p = x(2, 0).mul(&x(2, 0), &b).unwrap().sub(&x(2, 1)).to_rational();
        let v = p.eval(&[Rational::from((3, 2)), Rational::from(1)]).unwrap();
        assert_eq!(v, Rational::from((5, 4)));
        assert!(p.eval(&[Rational::new()]).is_err());
    }
}
