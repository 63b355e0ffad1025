//! Hilbert–Schmidt Monte Carlo over Ginibre-sampled density matrices.
//!
//! A state is `ρ = G G* / tr(G G*)` with `G` an `N×M` matrix of independent
//! standard normal entries, `M = N` over the complex numbers and `M = N + 1`
//! over the reals. Normals come from ChaCha20
//! seeded with the run seed, one stream per chunk of samples, through the
//! ziggurat sampler of `rand_distr`; chunks run in parallel and their
//! accumulators are merged in chunk order, so results do not depend on the
//! number of workers.
//!
//! `G G*` is formed exactly in multiprecision from the double-precision
//! normals and both determinants are taken at `precision_bits`, so that high
//! powers such as `(|ρ||ρ^PT|)^100` keep full relative accuracy.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rug::float::Round;
use rug::ops::{NegAssign, Pow};
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::cholesky::Ensemble;
use crate::error::{Error, Result};
use crate::matrix::{CFloat, DensityMatrix, FieldKind, Scalar};

/// Chunks handed to the thread pool at a time; bounds memory held by
/// unmerged chunk accumulators.
const CHUNKS_PER_BATCH: u64 = 64;

/// Monte Carlo run configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub ensemble: Ensemble,
    pub samples: u64,
    pub seed: u64,
    pub precision_bits: u32,
    pub bins: usize,
    pub chunk_size: u64,
}

impl McConfig {
    pub const DEFAULT_PRECISION: u32 = 256;
    pub const DEFAULT_BINS: usize = 100;
    pub const DEFAULT_CHUNK: u64 = 10_000;

    pub fn new(ensemble: Ensemble, samples: u64, seed: u64) -> Self {
        McConfig {
            ensemble,
            samples,
            seed,
            precision_bits: Self::DEFAULT_PRECISION,
            bins: Self::DEFAULT_BINS,
            chunk_size: Self::DEFAULT_CHUNK,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 128 {
            return Err(Error::InvalidArgument(format!("precision {} below 128 bits", self.precision_bits)));
        }
        if self.bins < 2 {
            return Err(Error::InvalidArgument("at least 2 bins per axis".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidArgument("chunk size must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        Ok(())
    }

    fn chunks(&self) -> u64 {
        self.samples.div_ceil(self.chunk_size)
    }

    fn chunk_len(&self, chunk: u64) -> u64 {
        (self.samples - chunk * self.chunk_size).min(self.chunk_size)
    }
}

/// Generator for one chunk of samples.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Columns of the Ginibre matrix giving the flat measure: the Wishart
/// density is `∝ |W|^{(M−N−1)/2}` over the reals and `∝ |W|^{M−N}` over the
/// complex numbers.
pub fn ginibre_columns(ensemble: Ensemble) -> usize {
    match ensemble.field() {
        FieldKind::Real => ensemble.size() + 1,
        FieldKind::Complex => ensemble.size(),
    }
}

/// Ginibre matrix entries in double precision, row-major `N×M`: reals, or
/// interleaved (re, im) pairs for complex ensembles.
pub fn ginibre(ensemble: Ensemble, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let n = ensemble.size();
    let m = ginibre_columns(ensemble);
    let count = match ensemble.field() {
        FieldKind::Real => n * m,
        FieldKind::Complex => 2 * n * m,
    };
    (0..count).map(|_| StandardNormal.sample(rng)).collect()
}

/// A sampled density matrix at multiprecision.
#[derive(Clone, Debug)]
pub enum SampledState {
    Real(DensityMatrix<Float>),
    Complex(DensityMatrix<CFloat>),
}

impl SampledState {
    pub fn det(&self) -> Float {
        match self {
            SampledState::Real(m) => m.det(),
            SampledState::Complex(m) => m.det().re,
        }
    }

    pub fn partial_transpose_det(&self) -> Float {
        match self {
            SampledState::Real(m) => m.partial_transpose().det(),
            SampledState::Complex(m) => m.partial_transpose().det().re,
        }
    }

    pub fn trace(&self) -> Float {
        match self {
            SampledState::Real(m) => m.trace(),
            SampledState::Complex(m) => m.trace().re,
        }
    }

    pub fn leading_principal_minors(&self) -> Vec<Float> {
        match self {
            SampledState::Real(m) => m.leading_principal_minors(),
            SampledState::Complex(m) => m.leading_principal_minors().into_iter().map(|c| c.re).collect(),
        }
    }
}

/// `G G* / tr(G G*)` from Ginibre entries, through the generic matrix types.
pub fn density_from_ginibre(ensemble: Ensemble, g: &[f64], prec: u32) -> Result<SampledState> {
    let n = ensemble.size();
    let m = ginibre_columns(ensemble);
    let dims = ensemble.dims();
    let entry = |i: usize, j: usize| -> (f64, f64) {
        match ensemble.field() {
            FieldKind::Real => (g[i * m + j], 0.0),
            FieldKind::Complex => (g[2 * (i * m + j)], g[2 * (i * m + j) + 1]),
        }
    };
    let mut w = vec![CFloat::new(Float::new(prec), Float::new(prec)); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = CFloat::new(Float::new(prec), Float::new(prec));
            for l in 0..m {
                let (ar, ai) = entry(i, l);
                let (br, bi) = entry(j, l);
                let a = CFloat::new(Float::with_val(prec, ar), Float::with_val(prec, ai));
                let b = CFloat::new(Float::with_val(prec, br), Float::with_val(prec, -bi));
                acc = acc.add(&a.mul(&b));
            }
            w[i * n + j] = acc;
        }
    }
    let tr = (0..n).fold(Float::new(prec), |t, i| t + &w[i * n + i].re);
    if tr.is_zero() {
        return Err(Error::InvalidArgument("Ginibre matrix with zero trace".into()));
    }
    let scaled: Vec<CFloat> = w
        .into_iter()
        .map(|x| CFloat::new(Float::with_val(prec, &x.re / &tr), Float::with_val(prec, &x.im / &tr)))
        .collect();
    Ok(match ensemble.field() {
        FieldKind::Real => SampledState::Real(DensityMatrix::new(dims, scaled.into_iter().map(|x| x.re).collect())?),
        FieldKind::Complex => SampledState::Complex(DensityMatrix::new(dims, scaled)?),
    })
}

/// `ρ` for the `index`-th draw of the stream of chunk `chunk`.
pub fn sample_density_matrix(ensemble: Ensemble, rng: &mut ChaCha20Rng, prec: u32) -> Result<SampledState> {
    loop {
        let g = ginibre(ensemble, rng);
        match density_from_ginibre(ensemble, &g, prec) {
            Ok(s) => return Ok(s),
            Err(Error::InvalidArgument(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// In-place multiprecision kernel computing `(|ρ|, |ρ^PT|)` from Ginibre
/// entries without per-sample allocation.
pub struct DetKernel {
    ensemble: Ensemble,
    n: usize,
    prec: u32,
    w_re: Vec<Float>,
    w_im: Vec<Float>,
    a_re: Vec<Float>,
    a_im: Vec<Float>,
    t: [Float; 6],
}

impl DetKernel {
    pub fn new(ensemble: Ensemble, prec: u32) -> Self {
        let n = ensemble.size();
        let z = || vec![Float::new(prec); n * n];
        DetKernel {
            ensemble,
            n,
            prec,
            w_re: z(),
            w_im: z(),
            a_re: z(),
            a_im: z(),
            t: std::array::from_fn(|_| Float::new(prec)),
        }
    }

    /// Returns `(|ρ|, |ρ^PT|)`, or `None` if the trace vanishes.
    pub fn dets(&mut self, g: &[f64]) -> Option<(Float, Float)> {
        let n = self.n;
        let m = ginibre_columns(self.ensemble);
        let complex = self.ensemble.field() == FieldKind::Complex;
        // W = G G*, exact at the working precision.
        for i in 0..n {
            for j in i..n {
                let [tr, ti, ..] = &mut self.t;
                let (wr, wi) = (&mut self.w_re[i * n + j], &mut self.w_im[i * n + j]);
                *wr = Float::with_val(self.prec, 0);
                *wi = Float::with_val(self.prec, 0);
                for l in 0..m {
                    if complex {
                        let (ar, ai) = (g[2 * (i * m + l)], g[2 * (i * m + l) + 1]);
                        let (br, bi) = (g[2 * (j * m + l)], g[2 * (j * m + l) + 1]);
                        // (ar + i ai)(br − i bi)
                        tr.assign_f64_product(ar, br);
                        *wr += &*tr;
                        tr.assign_f64_product(ai, bi);
                        *wr += &*tr;
                        ti.assign_f64_product(ai, br);
                        *wi += &*ti;
                        ti.assign_f64_product(ar, bi);
                        *wi -= &*ti;
                    } else {
                        tr.assign_f64_product(g[i * m + l], g[j * m + l]);
                        *wr += &*tr;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                let (re, im) = (self.w_re[j * n + i].clone(), self.w_im[j * n + i].clone());
                self.w_re[i * n + j] = re;
                self.w_im[i * n + j] = -im;
            }
        }
        let mut trace = Float::with_val(self.prec, 0);
        for i in 0..n {
            trace += &self.w_re[i * n + i];
        }
        if trace.is_zero() {
            return None;
        }
        let scale = Float::with_val(self.prec, trace.pow(n as u32));

        for ix in 0..n * n {
            self.a_re[ix].assign_from(&self.w_re[ix]);
            self.a_im[ix].assign_from(&self.w_im[ix]);
        }
        let mut d = self.eliminate(complex);
        d /= &scale;

        let (da, db) = self.ensemble.dims();
        for a in 0..da {
            for b in 0..db {
                for a2 in 0..da {
                    for b2 in 0..db {
                        let dst = (a * db + b) * n + a2 * db + b2;
                        let src = (a * db + b2) * n + a2 * db + b;
                        self.a_re[dst].assign_from(&self.w_re[src]);
                        self.a_im[dst].assign_from(&self.w_im[src]);
                    }
                }
            }
        }
        let mut dpt = self.eliminate(complex);
        dpt /= &scale;
        Some((d, dpt))
    }

    /// Determinant of the work matrix by partial-pivoting elimination; the
    /// real part is returned (the matrices here are Hermitian).
    fn eliminate(&mut self, complex: bool) -> Float {
        let n = self.n;
        let prec = self.prec;
        let mut det_re = Float::with_val(prec, 1);
        let mut det_im = Float::with_val(prec, 0);
        let [inv_re, inv_im, f_re, f_im, norm, tmp] = &mut self.t;
        for k in 0..n {
            // pivot by largest |a_ik|²
            let mut p = k;
            let mut best = Float::with_val(prec, 0);
            for i in k..n {
                norm.assign_norm(&self.a_re[i * n + k], &self.a_im[i * n + k]);
                if *norm > best {
                    best.assign_from(norm);
                    p = i;
                }
            }
            if best.is_zero() {
                return Float::with_val(prec, 0);
            }
            if p != k {
                for c in 0..n {
                    self.a_re.swap(k * n + c, p * n + c);
                    self.a_im.swap(k * n + c, p * n + c);
                }
                det_re = -det_re;
                det_im = -det_im;
            }
            // det *= pivot
            let (pr, pi) = (&self.a_re[k * n + k], &self.a_im[k * n + k]);
            if complex {
                tmp.assign_from(&det_re);
                det_re *= pr;
                det_re -= &det_im * pi;
                det_im *= pr;
                det_im += &*tmp * pi;
            } else {
                det_re *= pr;
            }
            // inv = 1 / pivot
            inv_re.assign_from(pr);
            *inv_re /= &best;
            inv_im.assign_from(pi);
            *inv_im /= &best;
            inv_im.neg_assign();
            for i in k + 1..n {
                let (top_re, bot_re) = self.a_re.split_at_mut(i * n);
                let (top_im, bot_im) = self.a_im.split_at_mut(i * n);
                let (air, aii) = (&bot_re[k], &bot_im[k]);
                if air.is_zero() && aii.is_zero() {
                    continue;
                }
                // f = a_ik · inv
                f_re.assign_from(air);
                *f_re *= &*inv_re;
                f_re.sub_mul(aii, inv_im);
                f_im.assign_from(air);
                *f_im *= &*inv_im;
                f_im.add_mul(aii, inv_re);
                for j in k + 1..n {
                    let (kr, ki) = (&top_re[k * n + j], &top_im[k * n + j]);
                    // a_ij −= f · a_kj
                    bot_re[j].sub_mul(f_re, kr);
                    bot_re[j].add_mul(f_im, ki);
                    if complex {
                        bot_im[j].sub_mul(f_re, ki);
                        bot_im[j].sub_mul(f_im, kr);
                    }
                }
            }
        }
        det_re
    }
}

/// Small in-place helpers on top of rug's `Float`.
trait FloatExt {
    fn assign_f64_product(&mut self, a: f64, b: f64);
    fn assign_from(&mut self, x: &Float);
    fn assign_norm(&mut self, re: &Float, im: &Float);
    fn add_mul(&mut self, a: &Float, b: &Float);
    fn sub_mul(&mut self, a: &Float, b: &Float);
}

impl FloatExt for Float {
    fn assign_f64_product(&mut self, a: f64, b: f64) {
        use rug::Assign;
        self.assign(a);
        *self *= b;
    }
    fn assign_from(&mut self, x: &Float) {
        use rug::Assign;
        self.assign(x);
    }
    fn assign_norm(&mut self, re: &Float, im: &Float) {
        use rug::Assign;
        self.assign(re * re);
        *self += im * im;
    }
    fn add_mul(&mut self, a: &Float, b: &Float) {
        *self += a * b;
    }
    fn sub_mul(&mut self, a: &Float, b: &Float) {
        *self -= a * b;
    }
}

/// Streaming sums for a mean and its standard error.
#[derive(Clone, Debug)]
struct MeanAcc {
    sum: Float,
    sumsq: Float,
}

impl MeanAcc {
    fn new(prec: u32) -> Self {
        MeanAcc { sum: Float::new(prec), sumsq: Float::new(prec) }
    }

    fn push(&mut self, x: &Float) {
        self.sum += x;
        self.sumsq += x * x;
    }

    fn merge(&mut self, o: &MeanAcc) {
        self.sum += &o.sum;
        self.sumsq += &o.sumsq;
    }

    fn estimate(&self, n: u64, quantity: String) -> McEstimate {
        let prec = self.sum.prec();
        let nf = Float::with_val(prec, n);
        let mean = Float::with_val(prec, &self.sum / &nf);
        let var = if n > 1 {
            let m2 = Float::with_val(prec, &self.sumsq - Float::with_val(prec, &mean * &self.sum));
            Float::with_val(prec, m2 / Float::with_val(prec, n - 1))
        } else {
            Float::new(prec)
        };
        let se = Float::with_val(prec, var.max(&Float::new(prec)) / &nf).sqrt();
        McEstimate { quantity, estimate: mean, stderr: se, samples: n }
    }
}

/// Sums for a ratio of means `E[a] / E[b]` with a delta-method error.
#[derive(Clone, Debug)]
struct RatioAcc {
    a: MeanAcc,
    b: MeanAcc,
    ab: Float,
}

impl RatioAcc {
    fn new(prec: u32) -> Self {
        RatioAcc { a: MeanAcc::new(prec), b: MeanAcc::new(prec), ab: Float::new(prec) }
    }

    fn push(&mut self, a: &Float, b: &Float) {
        self.a.push(a);
        self.b.push(b);
        self.ab += a * b;
    }

    fn merge(&mut self, o: &RatioAcc) {
        self.a.merge(&o.a);
        self.b.merge(&o.b);
        self.ab += &o.ab;
    }

    fn estimate(&self, n: u64, quantity: String) -> McEstimate {
        let prec = self.ab.prec();
        let nf = Float::with_val(prec, n);
        let ma = Float::with_val(prec, &self.a.sum / &nf);
        let mb = Float::with_val(prec, &self.b.sum / &nf);
        let r = Float::with_val(prec, &ma / &mb);
        let cov = |sxy: &Float, mx: &Float, sy: &Float| -> Float {
            if n > 1 {
                Float::with_val(prec, sxy - Float::with_val(prec, mx * sy)) / Float::with_val(prec, n - 1)
            } else {
                Float::new(prec)
            }
        };
        let vaa = cov(&self.a.sumsq, &ma, &self.a.sum);
        let vbb = cov(&self.b.sumsq, &mb, &self.b.sum);
        let vab = cov(&self.ab, &ma, &self.b.sum);
        // Var(r) ≈ (Vaa − 2 r Vab + r² Vbb) / (n mb²)
        let mut v = vaa;
        v -= Float::with_val(prec, &r * &vab) * 2u32;
        v += Float::with_val(prec, &r * &r) * &vbb;
        v /= Float::with_val(prec, &mb * &mb) * &nf;
        let se = v.max(&Float::new(prec)).sqrt();
        McEstimate { quantity, estimate: r, stderr: se, samples: n }
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub quantity: String,
    pub estimate: Float,
    pub stderr: Float,
    pub samples: u64,
}

impl McEstimate {
    /// `(estimate − exact) / stderr`.
    pub fn z_score(&self, exact: &Rational) -> f64 {
        let prec = self.estimate.prec();
        let diff = Float::with_val(prec, &self.estimate - exact);
        if self.stderr.is_zero() {
            return if diff.is_zero() { 0.0 } else { f64::INFINITY };
        }
        Float::with_val(prec, diff / &self.stderr).to_f64()
    }

    pub fn within(&self, exact: &Rational, sigmas: f64) -> bool {
        self.z_score(exact).abs() <= sigmas
    }
}

/// Renders a float with `digits` significant decimal digits.
pub fn float_text(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    x.to_string_radix_round(10, Some(digits), Round::Nearest)
}

/// Bivariate tallies over `(|ρ|, |ρ^PT|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistogramGrid {
    pub x_range: (Rational, Rational),
    pub y_range: (Rational, Rational),
    pub bins: usize,
    /// Row-major by `x` bin, then `y` bin.
    pub tallies: Vec<u64>,
    pub total: u64,
}

impl HistogramGrid {
    /// Ranges of the documented two-qubit-sized support:
    /// `|ρ| ∈ [0, 1/256]`, `|ρ^PT| ∈ [−1/16, 1/256]`.
    pub fn four_by_four(bins: usize) -> Self {
        HistogramGrid {
            x_range: (Rational::new(), Rational::from((1, 256))),
            y_range: (Rational::from((-1, 16)), Rational::from((1, 256))),
            bins,
            tallies: vec![0; bins * bins],
            total: 0,
        }
    }

    fn bin_of(&self, v: &Float, range: &(Rational, Rational), axis: &str) -> Result<usize> {
        if *v < range.0 || *v > range.1 {
            return Err(Error::RangeViolation(format!(
                "{axis} = {} outside [{}, {}]",
                float_text(v, 12),
                range.0,
                range.1
            )));
        }
        let prec = v.prec();
        let width = Rational::from(&range.1 - &range.0);
        let pos = Float::with_val(prec, v - &range.0) / width * self.bins as u32;
        let ix = pos.to_f64().floor() as usize;
        Ok(ix.min(self.bins - 1))
    }

    fn add(&mut self, x: &Float, y: &Float) -> Result<()> {
        let i = self.bin_of(x, &self.x_range.clone(), "|ρ|")?;
        let j = self.bin_of(y, &self.y_range.clone(), "|ρ^PT|")?;
        self.tallies[i * self.bins + j] += 1;
        self.total += 1;
        Ok(())
    }

    fn merge(&mut self, o: &HistogramGrid) {
        for (a, b) in self.tallies.iter_mut().zip(&o.tallies) {
            *a += b;
        }
        self.total += o.total;
    }

    pub fn bin_area(&self) -> f64 {
        let w = Rational::from(&self.x_range.1 - &self.x_range.0) * Rational::from(&self.y_range.1 - &self.y_range.0);
        (w / (self.bins * self.bins) as u32).to_f64()
    }

    /// `count / (total · bin area)`.
    pub fn density(&self) -> Vec<f64> {
        let scale = self.total as f64 * self.bin_area();
        self.tallies.iter().map(|&c| if scale > 0.0 { c as f64 / scale } else { 0.0 }).collect()
    }

    fn centers(&self) -> (Vec<f64>, Vec<f64>) {
        let c = |r: &(Rational, Rational)| -> Vec<f64> {
            let lo = r.0.to_f64();
            let w = Rational::from(&r.1 - &r.0).to_f64() / self.bins as f64;
            (0..self.bins).map(|i| lo + (i as f64 + 0.5) * w).collect()
        };
        (c(&self.x_range), c(&self.y_range))
    }

    /// CSV `bin_x,bin_y,x_center,y_center,count,density`.
    pub fn to_csv(&self) -> String {
        let (xc, yc) = self.centers();
        let d = self.density();
        let mut s = String::from("bin_x,bin_y,x_center,y_center,count,density\n");
        for (i, x) in xc.iter().enumerate() {
            for (j, y) in yc.iter().enumerate() {
                let ix = i * self.bins + j;
                let _ = writeln!(s, "{i},{j},{x:e},{y:e},{},{:e}", self.tallies[ix], d[ix]);
            }
        }
        s
    }
}

/// Signed difference of two normalized histograms on the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffGrid {
    pub bins: usize,
    pub bin_area: f64,
    pub values: Vec<f64>,
}

impl DiffGrid {
    /// `Σ value · bin area`, zero up to rounding.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_area
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_x,bin_y,diff\n");
        for i in 0..self.bins {
            for j in 0..self.bins {
                let _ = writeln!(s, "{i},{j},{:e}", self.values[i * self.bins + j]);
            }
        }
        s
    }
}

/// `density(a) − density(b)`.
pub fn histogram_diff(a: &HistogramGrid, b: &HistogramGrid) -> Result<DiffGrid> {
    if a.bins != b.bins || a.x_range != b.x_range || a.y_range != b.y_range {
        return Err(Error::DimensionMismatch("histograms have different grids".into()));
    }
    let (da, db) = (a.density(), b.density());
    Ok(DiffGrid { bins: a.bins, bin_area: a.bin_area(), values: da.iter().zip(&db).map(|(x, y)| x - y).collect() })
}

/// What a single pass should estimate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McRequest {
    /// `(k, κ)` pairs for `⟨|ρ|^k |ρ^PT|^κ⟩`.
    pub pairs: Vec<(u32, u32)>,
    /// Ratio entries `k = 1..ratio_max_k`.
    pub ratio_max_k: u32,
    pub histogram: bool,
    pub separability: bool,
    /// Bins of a histogram of `t = 2^8 |ρ|` on `[0, 1]` (two rebits).
    pub t_bins: Option<usize>,
}

/// Output of one pass.
#[derive(Clone, Debug, PartialEq)]
pub struct McOutput {
    pub config: McConfig,
    pub moments: Vec<McEstimate>,
    pub ratios: Vec<McEstimate>,
    pub histogram: Option<HistogramGrid>,
    pub separability: Option<McEstimate>,
    pub t_histogram: Option<Vec<u64>>,
}

struct ChunkAcc {
    pairs: Vec<MeanAcc>,
    ratios: Vec<RatioAcc>,
    histogram: Option<HistogramGrid>,
    separable: u64,
    t_hist: Option<Vec<u64>>,
    n: u64,
}

impl ChunkAcc {
    fn new(config: &McConfig, req: &McRequest) -> Self {
        let p = config.precision_bits;
        ChunkAcc {
            pairs: req.pairs.iter().map(|_| MeanAcc::new(p)).collect(),
            ratios: (0..req.ratio_max_k).map(|_| RatioAcc::new(p)).collect(),
            histogram: req.histogram.then(|| HistogramGrid::four_by_four(config.bins)),
            separable: 0,
            t_hist: req.t_bins.map(|b| vec![0; b]),
            n: 0,
        }
    }

    fn merge(&mut self, o: &ChunkAcc) {
        for (a, b) in self.pairs.iter_mut().zip(&o.pairs) {
            a.merge(b);
        }
        for (a, b) in self.ratios.iter_mut().zip(&o.ratios) {
            a.merge(b);
        }
        if let (Some(a), Some(b)) = (self.histogram.as_mut(), o.histogram.as_ref()) {
            a.merge(b);
        }
        if let (Some(a), Some(b)) = (self.t_hist.as_mut(), o.t_hist.as_ref()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.separable += o.separable;
        self.n += o.n;
    }
}

fn run_chunk(config: &McConfig, req: &McRequest, chunk: u64) -> Result<ChunkAcc> {
    let prec = config.precision_bits;
    let mut rng = chunk_rng(config.seed, chunk);
    let mut kernel = DetKernel::new(config.ensemble, prec);
    let mut acc = ChunkAcc::new(config, req);
    let max_pow = req.pairs.iter().map(|&(k, q)| k.max(q)).max().unwrap_or(0) as usize;
    let mut xp: Vec<Float> = vec![Float::with_val(prec, 1); max_pow + 1];
    let mut yp: Vec<Float> = vec![Float::with_val(prec, 1); max_pow + 1];
    let mut z = Float::new(prec);
    let mut prod_pow = Float::new(prec);
    let mut x2_pow = Float::new(prec);
    let mut x2 = Float::new(prec);
    let mut xy = Float::new(prec);
    for _ in 0..config.chunk_len(chunk) {
        let (x, y) = loop {
            let g = ginibre(config.ensemble, &mut rng);
            if let Some(d) = kernel.dets(&g) {
                break d;
            }
        };
        for p in 1..=max_pow {
            xp[p] = Float::with_val(prec, &xp[p - 1] * &x);
            yp[p] = Float::with_val(prec, &yp[p - 1] * &y);
        }
        for (a, &(k, q)) in acc.pairs.iter_mut().zip(&req.pairs) {
            use rug::Assign;
            z.assign(&xp[k as usize] * &yp[q as usize]);
            a.push(&z);
        }
        if req.ratio_max_k > 0 {
            use rug::Assign;
            xy.assign(&x * &y);
            x2.assign(&x * &x);
            prod_pow.assign(1);
            x2_pow.assign(1);
            for r in acc.ratios.iter_mut() {
                prod_pow *= &xy;
                x2_pow *= &x2;
                r.push(&prod_pow, &x2_pow);
            }
        }
        if let Some(h) = acc.histogram.as_mut() {
            h.add(&x, &y)?;
        }
        if y.cmp0() == Some(std::cmp::Ordering::Greater) {
            acc.separable += 1;
        }
        if let Some(t) = acc.t_hist.as_mut() {
            let bins = t.len();
            let tv = Float::with_val(prec, &x * 256u32).to_f64();
            if !(0.0..=1.0).contains(&tv) {
                return Err(Error::RangeViolation(format!("2^8|ρ| = {tv} outside [0, 1]")));
            }
            t[((tv * bins as f64) as usize).min(bins - 1)] += 1;
        }
        acc.n += 1;
    }
    Ok(acc)
}

/// One streaming pass over `config.samples` states.
pub fn run(config: &McConfig, req: &McRequest) -> Result<McOutput> {
    config.validate()?;
    if req.histogram && config.ensemble.size() != 4 {
        return Err(Error::InvalidArgument(format!(
            "histogram ranges are defined for 4×4 ensembles only, not {}",
            config.ensemble
        )));
    }
    if req.t_bins.is_some() && config.ensemble != Ensemble::TwoRebit {
        return Err(Error::InvalidArgument("the t = 2^8|ρ| histogram is defined for two rebits".into()));
    }
    let chunks = config.chunks();
    let mut total = ChunkAcc::new(config, req);
    let mut start = 0;
    while start < chunks {
        let end = (start + CHUNKS_PER_BATCH).min(chunks);
        let batch: Vec<Result<ChunkAcc>> = (start..end).into_par_iter().map(|c| run_chunk(config, req, c)).collect();
        for r in batch {
            total.merge(&r?);
        }
        start = end;
    }
    let n = total.n;
    let moments = req
        .pairs
        .iter()
        .zip(&total.pairs)
        .map(|(&(k, q), a)| a.estimate(n, format!("moment k={k} kappa={q}")))
        .collect();
    let ratios = total.ratios.iter().enumerate().map(|(i, r)| r.estimate(n, format!("ratio k={}", i + 1))).collect();
    let separability = req.separability.then(|| separability_estimate(total.separable, n, config.precision_bits));
    Ok(McOutput {
        config: config.clone(),
        moments,
        ratios,
        histogram: total.histogram,
        separability,
        t_histogram: total.t_hist,
    })
}

fn separability_estimate(count: u64, n: u64, prec: u32) -> McEstimate {
    let p = Float::with_val(prec, count) / Float::with_val(prec, n);
    let q = Float::with_val(prec, 1u32 - p.clone());
    let se = (Float::with_val(prec, &p * &q) / Float::with_val(prec, n)).sqrt();
    McEstimate { quantity: "separability probability".into(), estimate: p, stderr: se, samples: n }
}

/// `⟨|ρ|^k |ρ^PT|^κ⟩` estimates from one pass.
pub fn estimate_joint_moments(config: &McConfig, pairs: &[(u32, u32)]) -> Result<Vec<McEstimate>> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no (k, κ) pairs requested".into()));
    }
    Ok(run(config, &McRequest { pairs: pairs.to_vec(), ..Default::default() })?.moments)
}

/// `⟨(|ρ||ρ^PT|)^k⟩ / ⟨|ρ|^{2k}⟩` for `k = 1..max_k`.
pub fn ratio_sequence_mc(config: &McConfig, max_k: u32) -> Result<Vec<McEstimate>> {
    if max_k == 0 {
        return Err(Error::InvalidArgument("max_k must be at least 1".into()));
    }
    Ok(run(config, &McRequest { ratio_max_k: max_k, ..Default::default() })?.ratios)
}

pub fn histogram2d(config: &McConfig) -> Result<HistogramGrid> {
    Ok(run(config, &McRequest { histogram: true, ..Default::default() })?.histogram.expect("requested"))
}

pub fn separability_probability(config: &McConfig) -> Result<McEstimate> {
    Ok(run(config, &McRequest { separability: true, ..Default::default() })?.separability.expect("requested"))
}

/// Separability fraction over a given stream of states.
pub fn separability_of_states<S: Scalar>(states: &[DensityMatrix<S>], prec: u32) -> McEstimate {
    let count =
        states.iter().filter(|s| s.partial_transpose().det().real_sign() == std::cmp::Ordering::Greater).count();
    separability_estimate(count as u64, states.len() as u64, prec)
}

/// CSV `k,estimate,stderr`.
pub fn estimates_csv(header: &str, rows: &[McEstimate]) -> String {
    let mut s = format!("{header},estimate,stderr\n");
    for (i, e) in rows.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", i + 1, float_text(&e.estimate, 20), float_text(&e.stderr, 6));
    }
    s
}

/// JSON view of an estimate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateJson {
    pub quantity: String,
    pub estimate: String,
    pub stderr: String,
    pub samples: u64,
}

impl From<&McEstimate> for EstimateJson {
    fn from(e: &McEstimate) -> Self {
        EstimateJson {
            quantity: e.quantity.clone(),
            estimate: float_text(&e.estimate, 20),
            stderr: float_text(&e.stderr, 6),
            samples: e.samples,
        }
    }
}

/// JSON summary of a pass with the configuration echoed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSummary {
    pub config: McConfig,
    pub request: McRequest,
    pub moments: Vec<EstimateJson>,
    pub ratios: Vec<EstimateJson>,
    pub separability: Option<EstimateJson>,
    pub histogram_total: Option<u64>,
}

impl McSummary {
    pub fn new(out: &McOutput, req: &McRequest) -> Self {
        McSummary {
            config: out.config.clone(),
            request: req.clone(),
            moments: out.moments.iter().map(Into::into).collect(),
            ratios: out.ratios.iter().map(Into::into).collect(),
            separability: out.separability.as_ref().map(Into::into),
            histogram_total: out.histogram.as_ref().map(|h| h.total),
        }
    }
}
