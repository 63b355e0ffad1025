//! Published reference values: numerator coefficient tables, six-by-six
//! adjustment factors, moment-ratio sequences and special moments.
//!
//! The four-by-four numerator tables live in `data/` as plain integer columns
//! in ascending powers of `k`.

use std::sync::OnceLock;

use rug::{Integer, Rational};

use crate::cholesky::Ensemble;
use crate::error::{Error, Result};
use crate::polyk::{PolyK, RationalFunctionK};

const TWO_REBIT_NUMERATORS: &str = include_str!("../data/two_rebit_numerators.txt");
const TWO_QUBIT_NUMERATORS: &str = include_str!("../data/two_qubit_numerators.txt");

/// Two-rebit moment ratios `⟨(|ρ||ρ^PT|)^k⟩ / ⟨|ρ|^{2k}⟩`, `k = 1..12`.
pub const TWO_REBIT_RATIOS: [(i64, i64); 12] = [
    (0, 1),
    (77, 54),
    (24, 55),
    (209, 175),
    (598, 833),
    (3929, 3724),
    (8432, 9867),
    (9513091, 9555975),
    (193880, 211497),
    (23471937, 24088922),
    (1880, 1989),
    (2205654099, 2276223313),
];

/// Two-qubit moment ratios, `k = 1..4`.
pub const TWO_QUBIT_RATIOS: [(i64, i64); 4] = [(-3, 2), (31, 10), (-839, 490), (3559, 1260)];

/// Constant terms `A_κ(0)` of the two-rebit numerators, `κ = 1..4`.
pub const TWO_REBIT_CONSTANT_TERMS: [i64; 4] = [-16, 4860, -3612816, 6610161600];

/// Monte Carlo estimates of the first six two-rebit ratios published
/// alongside the exact values, kept for comparison output.
pub const TWO_REBIT_RATIO_ESTIMATES: [f64; 6] = [-0.0002052822, 1.426286, 0.4359643, 1.194784, 0.7175908, 1.055326];

/// Published Monte Carlo estimate of the 100th two-rebit ratio.
pub const TWO_REBIT_RATIO_100: f64 = 1.001542;

/// Real part of a root of the two-rebit `κ = 4` numerator.
pub const TWO_REBIT_A4_ROOT_REAL_PART: f64 = 2.999905;

/// Lower end of the range of `|ρ||ρ^PT|` for two rebits.
pub const BELL_PRODUCT_MINIMUM: (i64, i64) = (-1, 110592);

/// A six-by-six adjustment factor as published: ascending numerator
/// coefficients, and a denominator given as a constant times linear factors
/// `a·k + b`.
struct SixBySix {
    ensemble: Ensemble,
    kappa: u32,
    numerator: &'static [i64],
    constant: i64,
    factors: &'static [(i64, i64)],
}

const SIX_BY_SIX: [SixBySix; 3] = [
    SixBySix {
        ensemble: Ensemble::RebitRetrit,
        kappa: 1,
        numerator: &[-1170, -1149, -220, 95, 40, 4],
        constant: 576,
        factors: &[(1, 4), (3, 11), (3, 13), (6, 23), (6, 25)],
    },
    SixBySix {
        ensemble: Ensemble::RebitRetrit,
        kappa: 2,
        numerator: &[3715740, 5620320, 3316809, 903539, 101979, 12069, 8496, 2616, 336, 16],
        constant: 331776,
        factors: &[(1, 5), (3, 11), (3, 13), (3, 14), (3, 16), (6, 23), (6, 25), (6, 29), (6, 31)],
    },
    SixBySix {
        ensemble: Ensemble::QubitQutrit,
        kappa: 1,
        numerator: &[-3840, -2558, -423, 37, 15, 1],
        constant: 72,
        factors: &[(2, 13), (3, 19), (3, 20), (6, 37), (6, 41)],
    },
];

/// Parses blocks of the form `[kappa n]` followed by one integer per line.
pub fn parse_numerator_table(text: &str) -> Result<Vec<(u32, PolyK)>> {
    let mut out: Vec<(u32, Vec<Integer>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("[kappa").and_then(|r| r.strip_suffix(']')) {
            let kappa: u32 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad block header '{line}'", lineno + 1)))?;
            out.push((kappa, Vec::new()));
            continue;
        }
        let value = Integer::from_str_radix(line, 10)
            .map_err(|_| Error::Parse(format!("line {}: bad integer '{line}'", lineno + 1)))?;
        match out.last_mut() {
            Some((_, coeffs)) => coeffs.push(value),
            None => return Err(Error::Parse(format!("line {}: coefficient before any block", lineno + 1))),
        }
    }
    Ok(out.into_iter().map(|(k, c)| (k, PolyK::from_integers(c))).collect())
}

fn table(ensemble: Ensemble) -> &'static [(u32, PolyK)] {
    static REBIT: OnceLock<Vec<(u32, PolyK)>> = OnceLock::new();
    static QUBIT: OnceLock<Vec<(u32, PolyK)>> = OnceLock::new();
    match ensemble {
        Ensemble::TwoRebit => {
            REBIT.get_or_init(|| parse_numerator_table(TWO_REBIT_NUMERATORS).expect("embedded table"))
        }
        Ensemble::TwoQubit => {
            QUBIT.get_or_init(|| parse_numerator_table(TWO_QUBIT_NUMERATORS).expect("embedded table"))
        }
        _ => &[],
    }
}

/// Published numerator for `(ensemble, κ)`, ascending in `k`.
pub fn published_numerator(ensemble: Ensemble, kappa: u32) -> Option<PolyK> {
    if let Some((_, p)) = table(ensemble).iter().find(|(k, _)| *k == kappa) {
        return Some(p.clone());
    }
    SIX_BY_SIX
        .iter()
        .find(|s| s.ensemble == ensemble && s.kappa == kappa)
        .map(|s| PolyK::from_integers(s.numerator.iter().copied()))
}

/// `κ` values with a published numerator table column.
pub fn tabulated_kappas(ensemble: Ensemble) -> Vec<u32> {
    match ensemble {
        Ensemble::TwoRebit | Ensemble::TwoQubit => table(ensemble).iter().map(|(k, _)| *k).collect(),
        _ => SIX_BY_SIX.iter().filter(|s| s.ensemble == ensemble).map(|s| s.kappa).collect(),
    }
}

/// Published six-by-six denominator as `(constant, [(a, b)])`.
pub fn published_six_by_six_denominator(ensemble: Ensemble, kappa: u32) -> Option<(i64, Vec<(i64, i64)>)> {
    SIX_BY_SIX.iter().find(|s| s.ensemble == ensemble && s.kappa == kappa).map(|s| (s.constant, s.factors.to_vec()))
}

/// Published adjustment factor as a rational function, where one exists.
/// Four-by-four denominators come from the structural product forms.
pub fn published_factor(ensemble: Ensemble, kappa: u32) -> Option<RationalFunctionK> {
    let numerator = published_numerator(ensemble, kappa)?;
    let denominator = match ensemble {
        Ensemble::TwoRebit | Ensemble::TwoQubit => crate::moments::structural_denominator(ensemble, kappa)?.poly(),
        _ => {
            let (c, factors) = published_six_by_six_denominator(ensemble, kappa)?;
            factors.iter().fold(PolyK::constant(Rational::from(c)), |acc, &(a, b)| {
                acc.mul(&PolyK::linear(Rational::from(a), Rational::from(b)))
            })
        }
    };
    let mut f = RationalFunctionK::new(numerator, denominator).ok()?;
    f.canonical = true;
    Some(f)
}

/// Published moment-ratio sequence, where one exists.
pub fn published_ratio_sequence(ensemble: Ensemble) -> Option<Vec<Rational>> {
    let seq: &[(i64, i64)] = match ensemble {
        Ensemble::TwoRebit => &TWO_REBIT_RATIOS,
        Ensemble::TwoQubit => &TWO_QUBIT_RATIOS,
        _ => return None,
    };
    Some(seq.iter().map(|&(n, d)| Rational::from((n, d))).collect())
}

/// Published exact special values `⟨|ρ|^k |ρ^PT|^κ⟩` as `(ensemble, k, κ, value)`.
pub fn published_special_moments() -> Vec<(Ensemble, u32, u32, Rational)> {
    vec![
        (Ensemble::TwoRebit, 1, 1, Rational::new()),
        (Ensemble::TwoRebit, 0, 1, Rational::from((-1, 858))),
        (Ensemble::TwoRebit, 0, 2, Rational::from((27, 2489344))),
    ]
}
