//! Acceptance run: one PASS/FAIL line per criterion with pinned tolerances.
//! Built with `harness = false` so every line is printed on each run.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use hsmoments::cholesky::Ensemble;
use hsmoments::cli;
use hsmoments::density;
use hsmoments::fit::{self, DenominatorTemplate};
use hsmoments::matrix;
use hsmoments::mc::{self, McConfig, McRequest};
use hsmoments::moments::{self, CanonicalFactor, FixedKMethod, RatioSource};
use hsmoments::poly::{rational_text, Budget};
use hsmoments::roots;
use hsmoments::tables;
use hsmoments::verify;
use hsmoments::Rational;
use rug::Float;

const BASELINE_SECONDS: f64 = 10.0;
const SYMBOLIC_SECONDS: f64 = 1800.0;
const IDENTITY_SECONDS: f64 = 60.0;
const MC_SECONDS: f64 = 1800.0;
const MC_SAMPLES: u64 = 10_000_000;
const MC_SEED: u64 = 42;
const MC_SIGMAS: f64 = 5.0;
const BELL_NUMERIC_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-5;
const DENSITY_MASS_TOL: f64 = 1e-10;
const DENSITY_MOMENT_TOL: f64 = 1e-9;
const DENSITY_ORACLE_TOL: f64 = 1e-8;
const ENDPOINT_FIGURES: usize = 3;

/// Separability fractions at seed 42 and 10⁷ samples, pinned as regression
/// constants, with the exact probabilities they must stay within 5σ of.
const SEPARABILITY: [(Ensemble, &str, (i64, i64)); 2] =
    [(Ensemble::TwoRebit, "4.533526e-1", (29, 64)), (Ensemble::TwoQubit, "2.422806e-1", (8, 33))];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Symbolic = BTreeMap<(Ensemble, u32), CanonicalFactor>;

fn budget() -> Budget {
    Budget::default()
}

fn baseline_exactness() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
        let spec = e.spec();
        for k in 0..=10 {
            let ok = matches!(moments::baseline_moment(&spec, k), Ok(v) if Some(&v) == moments::baseline_closed_form(e, k).as_ref());
            if !ok {
                bad.push(format!("{e} k={k}"));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < BASELINE_SECONDS,
        format!("22 exact equalities, {} mismatches, {secs:.2} s (limit {BASELINE_SECONDS} s)", bad.len()),
    )
}

fn symbolic_factors(sym: &mut Symbolic) -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (e, q) in verify::symbolic_targets() {
        match moments::adjustment_factor_symbolic(&e.spec(), q, &budget()) {
            Ok(c) => {
                let published = tables::published_factor(e, q).expect("published factor");
                let numerator = tables::published_numerator(e, q).expect("published numerator");
                if !(c.function.same_function(&published) && c.function.numerator == numerator) {
                    bad.push(format!("{e} κ={q}"));
                }
                sym.insert((e, q), c);
            }
            Err(err) => bad.push(format!("{e} κ={q}: {err}")),
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs <= SYMBOLIC_SECONDS,
        format!("{} targets, mismatches {bad:?}, {secs:.1} s (limit {SYMBOLIC_SECONDS} s)", sym.len() + bad.len()),
    )
}

/// Direct summation expands `|ρ^PT|^κ` fully; at rebit-retrit κ = 2 that
/// expansion exceeds desk memory, so the paired marginal is used there.
fn fixed_k_method(e: Ensemble, kappa: u32) -> FixedKMethod {
    if e == Ensemble::RebitRetrit && kappa >= 2 {
        FixedKMethod::Paired
    } else {
        FixedKMethod::Direct
    }
}

fn cross_pipeline(sym: &Symbolic) -> Outcome {
    let mut bad = Vec::new();
    let mut methods = Vec::new();
    for ((e, q), c) in sym {
        let spec = e.spec();
        let method = fixed_k_method(*e, *q);
        methods.push(format!("{e} κ={q} {method:?}"));
        let fixed: Vec<Rational> = match method {
            FixedKMethod::Direct => {
                let ks: Vec<u32> = (0..=6).collect();
                let values = moments::direct_moments(&spec, *q, &ks, &budget()).expect("direct moments");
                ks.iter().zip(values).map(|(&k, v)| v / moments::baseline_moment(&spec, k).expect("baseline")).collect()
            }
            FixedKMethod::Paired => (0..=6)
                .map(|k| moments::joint_moment_exact(&spec, k, *q, method, &budget()).expect("paired").factor)
                .collect(),
        };
        for (k, f) in fixed.iter().enumerate() {
            if c.function.eval_int(k as i64).expect("no pole") != *f {
                bad.push(format!("{e} κ={q} k={k}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("k=0..6 over {} pairs ({}), mismatches {bad:?}", sym.len(), methods.join(", ")))
}

fn fit_round_trip(sym: &Symbolic) -> Outcome {
    let mut bad = Vec::new();
    let mut shown = Vec::new();
    for ((e, q), c) in sym {
        let spec = e.spec();
        let template = if e.size() == 4 { DenominatorTemplate::Structural } else { DenominatorTemplate::Published };
        let den = template.denominator(&spec, *q).expect("template");
        let n = den.degree().expect("nonconstant") as i64 + 1;
        let samples: Vec<i64> = (0..n).collect();
        let holdout: Vec<i64> = (n..n + 5).collect();
        shown.push(format!("{e} κ={q}: {n} samples"));
        match fit::fit_from_engine(&spec, *q, template, &samples, &holdout, &budget()) {
            Ok(r) => {
                let want = tables::published_numerator(*e, *q).expect("table").coeff_strings();
                let symbolic_same = hsmoments::polyk::RationalFunctionK::new(
                    hsmoments::polyk::PolyK::from_coeffs(
                        r.numerator_coeffs_ascending
                            .iter()
                            .map(|s| hsmoments::poly::parse_rational(s).expect("rational"))
                            .collect(),
                    ),
                    den.clone(),
                )
                .map(|f| f.same_function(&c.function))
                .unwrap_or(false);
                if r.numerator_coeffs_ascending != want
                    || !r.validation.pass
                    || r.validation.rows.len() != 5
                    || !symbolic_same
                {
                    bad.push(format!("{e} κ={q}"));
                }
            }
            Err(err) => bad.push(format!("{e} κ={q}: {err}")),
        }
    }
    outcome(bad.is_empty(), format!("{}; 5 held-out points each; failures {bad:?}", shown.join(", ")))
}

fn table_identities(sym: &Symbolic) -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    // (a) leading coefficients
    let rebit: Vec<u32> = (1..=12).collect();
    let qubit: Vec<u32> = (1..=4).collect();
    let mut lead_bad = Vec::new();
    for (e, ks) in [(Ensemble::TwoRebit, &rebit), (Ensemble::TwoQubit, &qubit)] {
        for &q in ks {
            match tables::published_numerator(e, q) {
                Some(n) if moments::leading_coefficient_mismatches(e, q, &n).is_empty() => {}
                _ => lead_bad.push(format!("{e} κ={q}")),
            }
        }
    }
    pass &= lead_bad.is_empty();
    notes.push(format!("(a) 16 tables, failures {lead_bad:?}"));
    // (b) ratio identity
    let mut ratio_bad = Vec::new();
    let mut count = 0;
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
        let spec = e.spec();
        let published = tables::published_ratio_sequence(e).expect("ratios");
        let derived = moments::ratio_sequence(&spec, published.len() as u32, RatioSource::PublishedTables, &budget())
            .expect("ratios");
        for (i, (a, b)) in derived.entries.iter().zip(&published).enumerate() {
            count += 1;
            let q = i as u32 + 1;
            let f = tables::published_factor(e, q).expect("table").eval_int(i64::from(q)).expect("no pole");
            let c = match e {
                Ensemble::TwoRebit => moments::conversion_factor(q),
                _ => {
                    moments::baseline_moment(&spec, q).expect("b") / moments::baseline_moment(&spec, 2 * q).expect("b")
                }
            };
            if a != b || Rational::from(&c * &f) != *b {
                ratio_bad.push(format!("{e} k={q}"));
            }
        }
    }
    pass &= ratio_bad.is_empty() && count == 16;
    notes.push(format!("(b) {count} entries, failures {ratio_bad:?}"));
    // (c) constant terms
    let consts: Vec<Rational> =
        (1..=4).map(|q| tables::published_numerator(Ensemble::TwoRebit, q).expect("table").coeff(0)).collect();
    let want: Vec<Rational> = tables::TWO_REBIT_CONSTANT_TERMS.iter().map(|&c| Rational::from(c)).collect();
    let consts_from_symbolic: Vec<Rational> =
        (1..=4).map(|q| sym[&(Ensemble::TwoRebit, q)].function.numerator.coeff(0)).collect();
    pass &= consts == want && consts_from_symbolic == want;
    notes.push(format!("(c) {}", consts.iter().map(rational_text).collect::<Vec<_>>().join(", ")));
    // (d) witnesses on unreduced numerators
    let mut wit = Vec::new();
    for ((e, q), c) in sym {
        if let Ok(Some(ok)) = moments::witness_divides(*e, *q, &c.raw.numerator) {
            wit.push(format!("{e} κ={q} {}", if ok { "divides" } else { "FAILS" }));
            pass &= ok;
        }
    }
    notes.push(format!("(d) {}", wit.join(", ")));
    let secs = t.elapsed().as_secs_f64();
    pass &= secs < IDENTITY_SECONDS;
    notes.push(format!("{secs:.2} s (limit {IDENTITY_SECONDS} s)"));
    outcome(pass, notes.join("; "))
}

fn special_values() -> Outcome {
    let spec = Ensemble::TwoRebit.spec();
    let b = budget();
    let m = |k, q| moments::joint_moment_exact(&spec, k, q, FixedKMethod::Direct, &b).expect("moment").value;
    let got = [m(1, 1), m(0, 1), m(0, 2)];
    let want = [Rational::new(), Rational::from((-1, 858)), Rational::from((27, 2489344))];
    let ratio =
        moments::ratio_sequence(&Ensemble::TwoQubit.spec(), 1, RatioSource::Computed, &b).expect("ratio").entries[0]
            .clone();
    let pass = got == want && ratio == (-3, 2);
    outcome(
        pass,
        format!(
            "{}; first two-qubit ratio {}",
            got.iter().map(rational_text).collect::<Vec<_>>().join(", "),
            rational_text(&ratio)
        ),
    )
}

fn bell_extremum() -> Outcome {
    let x = matrix::bell_mixture_extremum().expect("extremum");
    let want = Rational::from(tables::BELL_PRODUCT_MINIMUM);
    let (lambda, v) = matrix::bell_mixture_minimize_numeric(256).expect("numeric");
    let err = Float::with_val(256, &v - &want).abs().to_f64();
    let pass = x.minimum == want && x.u_min == (1, 3) && err < BELL_NUMERIC_TOL;
    outcome(
        pass,
        format!(
            "exact min {} at λ²={}; numeric λ={lambda:.12} error {err:.1e} (tol {BELL_NUMERIC_TOL:e})",
            rational_text(&x.minimum),
            rational_text(&x.u_min)
        ),
    )
}

fn a4_root(sym: &Symbolic) -> Outcome {
    let num = &sym[&(Ensemble::TwoRebit, 4)].function.numerator;
    match roots::root_nearest_real_part(num, tables::TWO_REBIT_A4_ROOT_REAL_PART, 256) {
        Ok(r) => {
            let re = r.value.re.to_f64();
            let d = (re - tables::TWO_REBIT_A4_ROOT_REAL_PART).abs();
            outcome(
                d < ROOT_TOL && r.radius.to_f64() < 1e-20,
                format!(
                    "root {re:.10} {:+.6}i, |Δ| = {d:.1e} (tol {ROOT_TOL:e}), radius {:.1e}",
                    r.value.im.to_f64(),
                    r.radius.to_f64()
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn monte_carlo() -> Outcome {
    let t = Instant::now();
    let pairs: Vec<(u32, u32)> = (0..=2).flat_map(|k| (0..=2).map(move |q| (k, q))).collect();
    let mut worst = 0f64;
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for e in [Ensemble::TwoRebit, Ensemble::TwoQubit] {
        let spec = e.spec();
        let c = McConfig::new(e, MC_SAMPLES, MC_SEED);
        let req = McRequest {
            pairs: pairs.clone(),
            ratio_max_k: if e == Ensemble::TwoRebit { 6 } else { 0 },
            separability: true,
            ..Default::default()
        };
        let out = mc::run(&c, &req).expect("mc run");
        for (est, &(k, q)) in out.moments.iter().zip(&pairs) {
            let exact = moments::joint_moment_exact(&spec, k, q, FixedKMethod::Paired, &budget()).expect("exact").value;
            let z = est.z_score(&exact);
            worst = worst.max(z.abs());
            if z.abs() > MC_SIGMAS {
                bad.push(format!("{e} ({k},{q}) z={z:.2}"));
            }
        }
        for (i, est) in out.ratios.iter().enumerate() {
            let published = tables::TWO_REBIT_RATIO_ESTIMATES[i];
            let z = (est.estimate.to_f64() - published) / est.stderr.to_f64();
            worst = worst.max(z.abs());
            if z.abs() > MC_SIGMAS {
                bad.push(format!("ratio k={} z={z:.2}", i + 1));
            }
        }
        let sep = out.separability.expect("separability");
        let text = mc::float_text(&sep.estimate, 7);
        let (_, pinned, exact) = SEPARABILITY.iter().find(|s| s.0 == e).expect("pinned");
        let z = sep.z_score(&Rational::from(*exact));
        notes.push(format!(
            "{e} separability {text} ± {} (z = {z:.2} vs {}/{})",
            mc::float_text(&sep.stderr, 2),
            exact.0,
            exact.1
        ));
        if text != *pinned {
            bad.push(format!("{e} separability regression {text} != {pinned}"));
        }
        if z.abs() > MC_SIGMAS {
            bad.push(format!("{e} separability z={z:.2}"));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs <= MC_SECONDS,
        format!(
            "2×10⁷ samples seed {MC_SEED}, 18 moments + 6 ratios, max |z| {worst:.2} (limit {MC_SIGMAS}), failures {bad:?}; {}; {secs:.0} s (limit {MC_SECONDS} s)",
            notes.join(", ")
        ),
    )
}

fn density_checks() -> Outcome {
    let mass = density::integrate_against_density(|_| 1.0, 0.0, 1.0, 1e-14).expect("mass");
    let moments = density::density_moment_check(8).expect("moments");
    let oracle = density::convolution_check(&density::interior_grid(50)).expect("oracle");
    let oracle_max = oracle.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let ratios = density::endpoint_ratios(&[1e-2, 1e-3, 1e-4]).expect("endpoint");
    let values: Vec<Float> = ratios.iter().map(|(_, r)| r.clone()).collect();
    let stable = density::stable_to_significant_figures(&values, ENDPOINT_FIGURES);
    let mass_ok = (mass - 1.0).abs() <= DENSITY_MASS_TOL;
    let moments_ok = moments.max_deviation <= DENSITY_MOMENT_TOL;
    let oracle_ok = oracle_max <= DENSITY_ORACLE_TOL;
    let shown: Vec<String> = ratios.iter().map(|(e, r)| format!("{e:.0e}: {}", mc::float_text(r, 6))).collect();
    outcome(
        mass_ok && moments_ok && oracle_ok && stable,
        format!(
            "mass error {:.1e} [{}]; moment deviation {:.1e} [{}]; oracle deviation {oracle_max:.1e} [{}]; endpoint ratio {} to {ENDPOINT_FIGURES} figures [{}]",
            (mass - 1.0).abs(),
            verdict(mass_ok),
            moments.max_deviation,
            verdict(moments_ok),
            verdict(oracle_ok),
            shown.join(", "),
            verdict(stable)
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut all_same = true;
    let mut notes = Vec::new();
    for (e, samples) in [("two-rebit", "20000"), ("two-qubit", "20000")] {
        let mut runs = Vec::new();
        for threads in ["1", "4", "8"] {
            let p = |name: &str| dir.path().join(format!("{e}-{threads}-{name}"));
            let (out, hist, ratios) = (p("mc.json"), p("hist.csv"), p("ratios.csv"));
            let argv = [
                "hsmoments",
                "--threads",
                threads,
                "mc",
                "--ensemble",
                e,
                "--samples",
                samples,
                "--seed",
                "7",
                "--chunk-size",
                "1000",
                "--ratios",
                "6",
                "--sep-prob",
                "--hist",
                hist.to_str().unwrap(),
                "--ratio-csv",
                ratios.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ];
            let code = cli::dispatch(argv, &mut Vec::new(), &mut Vec::new());
            let bytes: Vec<Vec<u8>> =
                [&out, &hist, &ratios].iter().map(|f| std::fs::read(f).unwrap_or_default()).collect();
            runs.push((code, bytes));
        }
        let same = runs.iter().all(|r| r.0 == 0 && r.1 == runs[0].1 && r.1.iter().all(|b| !b.is_empty()));
        all_same &= same;
        notes.push(format!("{e} {}", &cli::sha256_hex(&runs[0].1.concat())[..16]));
    }
    outcome(
        all_same,
        format!("mc JSON, histogram and ratio CSV byte-identical at 1, 4, 8 workers: {}", notes.join(", ")),
    )
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
    })
}

fn main() {
    let mut sym = Symbolic::new();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, o: Outcome| {
        println!("criterion {id:>2} {} {name}: {}", verdict(o.pass), o.detail);
        results.push((id, name, o));
    };
    record(1, "baseline exactness", guarded(baseline_exactness));
    record(2, "symbolic adjustment factors", guarded(|| symbolic_factors(&mut sym)));
    let have_all = sym.len() == verify::symbolic_targets().len();
    let need = |o: Outcome| if have_all { o } else { outcome(false, "symbolic factors unavailable") };
    record(3, "cross-pipeline agreement", need(guarded(|| cross_pipeline(&sym))));
    record(4, "fit round-trip", need(guarded(|| fit_round_trip(&sym))));
    record(5, "table identities", need(guarded(|| table_identities(&sym))));
    record(6, "special values", guarded(special_values));
    record(7, "bell-mixture extremum", guarded(bell_extremum));
    record(8, "two-rebit kappa=4 numerator root", need(guarded(|| a4_root(&sym))));
    record(9, "monte carlo agreement", guarded(monte_carlo));
    record(10, "density reconstruction", guarded(density_checks));
    record(11, "determinism", guarded(determinism));
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
