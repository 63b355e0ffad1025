//! Univariate polynomials and rational functions in the moment order `k`.

use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Dense univariate polynomial over the rationals, coefficients ascending.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct PolyK {
    coeffs: Vec<Rational>,
}

impl PolyK {
    pub fn zero() -> Self {
        PolyK { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    /// `a·k + b`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::from_coeffs(vec![b, a])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        PolyK { coeffs }
    }

    pub fn from_integers<I: Into<Integer>, T: IntoIterator<Item = I>>(coeffs: T) -> Self {
        Self::from_coeffs(coeffs.into_iter().map(|c| Rational::from(c.into())).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &PolyK) -> PolyK {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &PolyK) -> PolyK {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, s: &Rational) -> PolyK {
        Self::from_coeffs(self.coeffs.iter().map(|c| Rational::from(c * s)).collect())
    }

    pub fn mul(&self, other: &PolyK) -> PolyK {
        if self.is_zero() || other.is_zero() {
            return PolyK::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Self::from_coeffs(out)
    }

    pub fn eval(&self, k: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= k;
            acc += c;
        }
        acc
    }

    pub fn eval_int(&self, k: i64) -> Rational {
        self.eval(&Rational::from(k))
    }

    pub fn derivative(&self) -> PolyK {
        Self::from_coeffs(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| Rational::from(c * i as u64)).collect())
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, divisor: &PolyK) -> Result<(PolyK, PolyK)> {
        let dd = divisor.degree().ok_or_else(|| Error::InvalidArgument("polynomial division by zero".into()))?;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((PolyK::zero(), self.clone()));
        }
        let mut quot = vec![Rational::new(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let q = Rational::from(&rem[i + dd] / &lead);
            if q != 0 {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= Rational::from(&q * d);
                }
            }
            quot[i] = q;
        }
        rem.truncate(dd);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    /// Exact quotient; fails when the remainder is nonzero.
    pub fn div_exact(&self, divisor: &PolyK) -> Result<PolyK> {
        let (q, r) = self.div_rem(divisor)?;
        if !r.is_zero() {
            return Err(Error::StructureViolation(format!("nonzero remainder {r} in exact division")));
        }
        Ok(q)
    }

    pub fn monic(&self) -> PolyK {
        if self.is_zero() {
            return PolyK::zero();
        }
        let inv = Rational::from(self.leading().recip_ref());
        self.scale(&inv)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &PolyK) -> PolyK {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Scale making every coefficient an integer with unit content and a
    /// positive leading coefficient; returns `(primitive, scale)` with
    /// `primitive = scale · self`.
    pub fn primitive(&self) -> (PolyK, Rational) {
        if self.is_zero() {
            return (PolyK::zero(), Rational::from(1));
        }
        let s = primitive_scale(std::slice::from_ref(&self.coeffs));
        let s = if self.leading() < 0 { -s } else { s };
        (self.scale(&s), s)
    }

    /// Integer coefficients, if all coefficients are integral.
    pub fn integer_coeffs(&self) -> Option<Vec<Integer>> {
        self.coeffs.iter().map(|c| (*c.denom() == 1).then(|| c.numer().clone())).collect()
    }

    /// Coefficients as `num/den` strings, ascending.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(crate::poly::rational_text).collect()
    }
}

/// Rational `s > 0` such that every coefficient of every listed vector, times
/// `s`, is an integer and the integers have gcd 1.
pub(crate) fn primitive_scale(vectors: &[Vec<Rational>]) -> Rational {
    let mut lcm = Integer::from(1);
    let mut gcd = Integer::new();
    for v in vectors {
        for c in v {
            lcm.lcm_mut(c.denom());
        }
    }
    for v in vectors {
        for c in v {
            let scaled = Integer::from(c.numer() * &lcm) / c.denom();
            gcd.gcd_mut(&scaled);
        }
    }
    if gcd == 0 {
        return Rational::from(1);
    }
    Rational::from((lcm, gcd))
}

impl fmt::Display for PolyK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else { "+" };
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = Rational::from(c.abs_ref());
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if a != 1 {
                        write!(f, "{a}*")?;
                    }
                    if i == 1 {
                        write!(f, "k")?;
                    } else {
                        write!(f, "k^{i}")?;
                    }
                }
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyK({self})")
    }
}

/// `∏_{j=0}^{n-1} (stride·k + base + j)`.
pub fn pochhammer_poly(base: &Rational, n: u32, stride: &Rational) -> PolyK {
    let mut acc = PolyK::one();
    for j in 0..n {
        acc = acc.mul(&PolyK::linear(stride.clone(), Rational::from(base + j)));
    }
    acc
}

/// Rising factorial `(x)_n` over the rationals.
pub fn pochhammer(x: &Rational, n: u32) -> Rational {
    let mut acc = Rational::from(1);
    for j in 0..n {
        acc *= Rational::from(x + j);
    }
    acc
}

/// Lagrange interpolation through distinct abscissae.
pub fn interpolate(points: &[(Rational, Rational)]) -> Result<PolyK> {
    let mut acc = PolyK::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut basis = PolyK::one();
        let mut denom = Rational::from(1);
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let gap = Rational::from(xi - xj);
            if gap == 0 {
                return Err(Error::Singular(format!("repeated abscissa {xi}")));
            }
            basis = basis.mul(&PolyK::linear(Rational::from(1), Rational::from(-xj)));
            denom *= gap;
        }
        acc = acc.add(&basis.scale(&(yi / denom)));
    }
    Ok(acc)
}

fn divisors(n: &Integer) -> Vec<Integer> {
    let n = Integer::from(n.abs_ref());
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = Integer::from(1);
    while Integer::from(&d * &d) <= n {
        if n.is_divisible(&d) {
            let other = Integer::from(&n / &d);
            if other != d {
                large.push(other);
            }
            small.push(d.clone());
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// All rational roots, found by the rational root test on the primitive
/// integer form. Intended for polynomials with modest constant and leading
/// coefficients.
pub fn rational_roots(p: &PolyK) -> Vec<Rational> {
    let mut roots = Vec::new();
    if p.is_zero() {
        return roots;
    }
    let (prim, _) = p.primitive();
    let mut coeffs = prim.integer_coeffs().expect("primitive form is integral");
    if coeffs[0] == 0 {
        roots.push(Rational::new());
        while coeffs.first().is_some_and(|c| *c == 0) {
            coeffs.remove(0);
        }
    }
    let reduced = PolyK::from_integers(coeffs.clone());
    if reduced.degree().unwrap_or(0) == 0 {
        return roots;
    }
    let lead = coeffs.last().expect("nonzero polynomial").clone();
    for num in divisors(&coeffs[0]) {
        for den in divisors(&lead) {
            for sign in [1, -1] {
                let r = Rational::from((Integer::from(&num * sign), den.clone()));
                if reduced.eval(&r) == 0 && !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Ratio of two polynomials in `k`.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunctionK {
    pub numerator: PolyK,
    pub denominator: PolyK,
    /// Set once the pair has been brought to the structural normal form.
    pub canonical: bool,
}

impl RationalFunctionK {
    pub fn new(numerator: PolyK, denominator: PolyK) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(RationalFunctionK { numerator, denominator, canonical: false })
    }

    pub fn eval(&self, k: &Rational) -> Result<Rational> {
        let d = self.denominator.eval(k);
        if d == 0 {
            return Err(Error::InvalidArgument(format!("pole at k = {k}")));
        }
        Ok(self.numerator.eval(k) / d)
    }

    pub fn eval_int(&self, k: i64) -> Result<Rational> {
        self.eval(&Rational::from(k))
    }

    /// Cancels the common factor; the result has a monic denominator.
    pub fn reduced(&self) -> RationalFunctionK {
        let g = self.numerator.gcd(&self.denominator);
        let num = self.numerator.div_exact(&g).expect("gcd divides numerator");
        let den = self.denominator.div_exact(&g).expect("gcd divides denominator");
        let inv = Rational::from(den.leading().recip_ref());
        RationalFunctionK { numerator: num.scale(&inv), denominator: den.scale(&inv), canonical: false }
    }

    /// Scales numerator and denominator jointly to integers with unit content
    /// and a positive leading denominator coefficient.
    pub fn integer_normalized(&self) -> RationalFunctionK {
        let mut s = primitive_scale(&[self.numerator.coeffs.clone(), self.denominator.coeffs.clone()]);
        if self.denominator.leading() < 0 {
            s = -s;
        }
        RationalFunctionK {
            numerator: self.numerator.scale(&s),
            denominator: self.denominator.scale(&s),
            canonical: self.canonical,
        }
    }

    /// Same function (cross-multiplication equality).
    pub fn same_function(&self, other: &RationalFunctionK) -> bool {
        self.numerator.mul(&other.denominator) == other.numerator.mul(&self.denominator)
    }

    /// Canonical text form: a `numerator` and a `denominator` section, each
    /// with one term per line as `e : num/den`, highest degree first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, p) in [("numerator", &self.numerator), ("denominator", &self.denominator)] {
            out.push_str(name);
            out.push('\n');
            for (e, c) in p.coeffs.iter().enumerate().rev() {
                if *c != 0 {
                    out.push_str(&format!("{e} : {}\n", crate::poly::rational_text(c)));
                }
            }
        }
        out
    }

    /// Parses the canonical text form.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut parts: [Vec<Rational>; 2] = [Vec::new(), Vec::new()];
        let mut section: Option<usize> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            match line {
                "" => continue,
                _ if line.starts_with('#') => continue,
                "numerator" => section = Some(0),
                "denominator" => section = Some(1),
                _ => {
                    let s = section.ok_or_else(|| Error::Parse(format!("line {}: term before section", lineno + 1)))?;
                    let (e, c) = line
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("line {}: missing ':'", lineno + 1)))?;
                    let e: usize =
                        e.trim().parse().map_err(|err| Error::Parse(format!("line {}: {err}", lineno + 1)))?;
                    let v = &mut parts[s];
                    if v.len() <= e {
                        v.resize(e + 1, Rational::new());
                    }
                    v[e] += crate::poly::parse_rational(c.trim())?;
                }
            }
        }
        let [num, den] = parts;
        RationalFunctionK::new(PolyK::from_coeffs(num), PolyK::from_coeffs(den))
    }
}

impl fmt::Display for RationalFunctionK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

impl fmt::Debug for RationalFunctionK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalFunctionK[{self}]")
    }
}
