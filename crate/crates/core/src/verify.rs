//! Pass/fail checks of computed quantities against the embedded reference
//! values and the closed-form identities they satisfy.

use rug::{Float, Rational};
use serde::Serialize;

use crate::cholesky::Ensemble;
use crate::error::Result;
use crate::matrix;
use crate::moments::{self, FixedKMethod, RatioSource};
use crate::poly::{rational_text, Budget};
use crate::roots;
use crate::tables;

/// One verified statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }

    fn from_result(name: impl Into<String>, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => Check::new(name, pass, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PublishedTables,
    Identities,
    All,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "published-tables" | "paper-tables" => Ok(Suite::PublishedTables),
            "identities" => Ok(Suite::Identities),
            "all" => Ok(Suite::All),
            _ => Err(crate::Error::InvalidArgument(format!("unknown suite '{s}'"))),
        }
    }
}

pub fn run_suite(suite: Suite, budget: &Budget) -> Vec<Check> {
    match suite {
        Suite::PublishedTables => reference_checks(budget),
        Suite::Identities => identity_checks(budget),
        Suite::All => {
            let mut v = reference_checks(budget);
            v.extend(identity_checks(budget));
            v
        }
    }
}

/// `(ensemble, κ)` pairs re-derived symbolically by default.
pub fn symbolic_targets() -> Vec<(Ensemble, u32)> {
    Ensemble::ALL.into_iter().flat_map(|e| (1..=moments::default_max_kappa(e)).map(move |q| (e, q))).collect()
}

fn reference_checks(budget: &Budget) -> Vec<Check> {
    let mut out = Vec::new();
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
        let spec = e.spec();
        out.push(Check::from_result(
            format!("baseline {e} k=0..10"),
            (|| {
                for k in 0..=10 {
                    let closed = moments::baseline_closed_form(e, k).expect("four-by-four closed form");
                    if moments::baseline_moment(&spec, k)? != closed {
                        return Ok((false, format!("k = {k}")));
                    }
                }
                Ok((true, "Dirichlet integral equals closed form".into()))
            })(),
        ));
    }
    for (e, q) in symbolic_targets() {
        let spec = e.spec();
        out.push(Check::from_result(
            format!("symbolic factor {e} kappa={q}"),
            (|| {
                let c = moments::adjustment_factor_symbolic(&spec, q, budget)?;
                let published = tables::published_factor(e, q).expect("published factor");
                let same = c.function.same_function(&published);
                let numerator = tables::published_numerator(e, q).expect("published numerator");
                let coeffs = c.function.numerator == numerator;
                Ok((same && coeffs, format!("denominator {}", c.denominator_form)))
            })(),
        ));
    }
    for (e, k, q, want) in tables::published_special_moments() {
        let spec = e.spec();
        out.push(Check::from_result(
            format!("moment {e} k={k} kappa={q}"),
            (|| {
                let got = moments::joint_moment_exact(&spec, k, q, FixedKMethod::Paired, budget)?.value;
                Ok((got == want, rational_text(&got)))
            })(),
        ));
    }
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
        let spec = e.spec();
        let published = tables::published_ratio_sequence(e).expect("published ratios");
        out.push(Check::from_result(
            format!("ratio sequence {e} from tables"),
            (|| {
                let seq = moments::ratio_sequence(&spec, published.len() as u32, RatioSource::PublishedTables, budget)?;
                Ok((seq.entries == published, format!("{} entries", published.len())))
            })(),
        ));
        let max_k = moments::default_max_kappa(e);
        out.push(Check::from_result(
            format!("ratio sequence {e} computed k=1..{max_k}"),
            (|| {
                let seq = moments::ratio_sequence(&spec, max_k, RatioSource::Computed, budget)?;
                Ok((
                    seq.entries[..] == published[..max_k as usize],
                    seq.entries.iter().map(rational_text).collect::<Vec<_>>().join(", "),
                ))
            })(),
        ));
    }
    out.push(Check::from_result("two-rebit constant terms kappa=1..4", {
        let got: Vec<Rational> =
            (1..=4).map(|q| tables::published_numerator(Ensemble::TwoRebit, q).expect("table").coeff(0)).collect();
        let want: Vec<Rational> = tables::TWO_REBIT_CONSTANT_TERMS.iter().map(|&c| Rational::from(c)).collect();
        Ok((got == want, got.iter().map(rational_text).collect::<Vec<_>>().join(", ")))
    }));
    out
}

fn identity_checks(budget: &Budget) -> Vec<Check> {
    let mut out = Vec::new();
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
        let kappas = tables::tabulated_kappas(e);
        out.push(Check::from_result(format!("leading coefficients {e} kappa=1..{}", kappas.len()), {
            let bad: Vec<String> = kappas
                .iter()
                .filter_map(|&q| {
                    let num = tables::published_numerator(e, q)?;
                    let m = moments::leading_coefficient_mismatches(e, q, &num);
                    (!m.is_empty()).then(|| format!("κ={q}: C{m:?}"))
                })
                .collect();
            Ok((bad.is_empty(), if bad.is_empty() { "all hold".into() } else { bad.join("; ") }))
        }));
        out.push(Check::from_result(
            format!("conversion identity {e}"),
            (|| {
                let published = tables::published_ratio_sequence(e).expect("published ratios");
                let spec = e.spec();
                for (i, want) in published.iter().enumerate() {
                    let q = i as u32 + 1;
                    let f = tables::published_factor(e, q).expect("table").eval_int(i64::from(q))?;
                    let c = match e {
                        Ensemble::TwoRebit => moments::conversion_factor(q),
                        _ => moments::baseline_moment(&spec, q)? / moments::baseline_moment(&spec, 2 * q)?,
                    };
                    if Rational::from(&c * &f) != *want {
                        return Ok((false, format!("k = {q}")));
                    }
                }
                Ok((true, format!("{} entries", published.len())))
            })(),
        ));
        out.push(Check::from_result(
            format!("divisibility witness {e}"),
            (|| {
                let spec = e.spec();
                for q in 1..=moments::default_max_kappa(e) {
                    let raw = moments::adjustment_factor_symbolic(&spec, q, budget)?.raw;
                    if moments::witness_divides(e, q, &raw.numerator)? != Some(true) {
                        return Ok((false, format!("κ = {q}")));
                    }
                }
                Ok((true, format!("κ = 1..{}", moments::default_max_kappa(e))))
            })(),
        ));
    }
    out.push(Check::from_result(
        "bell mixture extremum",
        (|| {
            let x = matrix::bell_mixture_extremum()?;
            let want = Rational::from(tables::BELL_PRODUCT_MINIMUM);
            let (lambda, v) = matrix::bell_mixture_minimize_numeric(256)?;
            let numeric_ok =
                Float::with_val(256, &v - &want).abs() < 1e-12 && (lambda * lambda - 1.0 / 3.0).abs() < 1e-6;
            Ok((
                x.minimum == want && x.u_min == (1, 3) && numeric_ok,
                format!("min {} at λ² = {}", rational_text(&x.minimum), rational_text(&x.u_min)),
            ))
        })(),
    ));
    out.push(Check::from_result(
        "two-rebit kappa=4 numerator root",
        (|| {
            let num = tables::published_numerator(Ensemble::TwoRebit, 4).expect("table");
            let r = roots::root_nearest_real_part(&num, tables::TWO_REBIT_A4_ROOT_REAL_PART, 256)?;
            let re = r.value.re.to_f64();
            let ok = (re - tables::TWO_REBIT_A4_ROOT_REAL_PART).abs() < 1e-5 && r.radius.to_f64() < 1e-20;
            Ok((ok, format!("root {} {:+}i", re, r.value.im.to_f64())))
        })(),
    ));
    out
}
