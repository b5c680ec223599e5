//! Stationary Gaussian fields on `ℤ²` given by a spectral density.
//!
//! The covariance of the field at lag `(u, v)` is
//! `∫∫_{[−π,π]²} e^{i(ux+vy)} f(x, y) dx dy`. Band-limited densities are
//! sampled exactly by circulant embedding on a torus; other densities are
//! first replaced by a nonnegative trigonometric polynomial.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fmt;
use crate::measure::QuantileFunctionR;
use crate::par;
use crate::rng::{self, Purpose};

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Grid used to check nonnegativity of a trigonometric polynomial.
pub const NONNEG_GRID: usize = 512;
/// Grid used by [`SpectralDensity2D::ess_inf_check`].
pub const ESS_INF_GRID: usize = 1024;
/// Default degree of the polynomial replacing a non-band-limited density.
pub const DEFAULT_APPROX_DEGREE: usize = 64;
/// Default number of table points of a separable factor on `[0, π]`.
pub const DEFAULT_R_POINTS: usize = 2049;
/// Circulant spectrum values above `−SPECTRUM_CLAMP` are clamped to zero.
pub const SPECTRUM_CLAMP: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-12;
const NONNEG_TOL: f64 = 1e-12;

/// `f(x, y) = Σ_{|j|,|k| ≤ n} a_{j,k} e^{i(jx+ky)}`.
///
/// An even, real density has real coefficients with `a_{−j,−k} = a_{j,k}`,
/// so `f(x, y) = Σ a_{j,k} cos(jx + ky)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrigPolyRaw")]
pub struct TrigPoly {
    degree: usize,
    /// `(2n+1)²` entries, row `j + n`, column `k + n`.
    #[serde(serialize_with = "fmt::reals")]
    coefficients: Vec<f64>,
}

#[derive(Deserialize)]
struct TrigPolyRaw {
    degree: usize,
    coefficients: Vec<f64>,
}

impl TryFrom<TrigPolyRaw> for TrigPoly {
    type Error = Error;
    fn try_from(raw: TrigPolyRaw) -> Result<Self> {
        TrigPoly::new(raw.degree, raw.coefficients)
    }
}

impl TrigPoly {
    /// Validates symmetry and nonnegativity on a [`NONNEG_GRID`] grid.
    pub fn new(degree: usize, coefficients: Vec<f64>) -> Result<Self> {
        let p = TrigPoly::unchecked(degree, coefficients)?;
        let min = p.grid_values(NONNEG_GRID.max(2 * degree + 1)).iter().copied().fold(f64::INFINITY, f64::min);
        if min < -NONNEG_TOL * p.scale().max(1.0) {
            return Err(Error::InvalidDensity(format!("trigonometric polynomial takes the negative value {min}")));
        }
        Ok(p)
    }

    fn unchecked(degree: usize, coefficients: Vec<f64>) -> Result<Self> {
        let w = 2 * degree + 1;
        if coefficients.len() != w * w {
            return Err(Error::InvalidDensity(format!(
                "degree {degree} needs {} coefficients, got {}",
                w * w,
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDensity("coefficients must be finite".into()));
        }
        let p = TrigPoly { degree, coefficients };
        let scale = p.scale();
        let n = degree as i64;
        for j in -n..=n {
            for k in -n..=n {
                if (p.coef(j, k) - p.coef(-j, -k)).abs() > SYMMETRY_TOL * scale.max(1.0) {
                    return Err(Error::InvalidDensity(format!("a({j},{k}) differs from a({},{})", -j, -k)));
                }
            }
        }
        Ok(p)
    }

    /// The constant density `c`.
    pub fn constant(c: f64) -> Result<Self> {
        TrigPoly::new(0, vec![c])
    }

    /// Builds the polynomial from the nonzero coefficients `(j, k, a_{j,k})`;
    /// each entry also sets `a_{−j,−k}`.
    pub fn from_terms(degree: usize, terms: &[(i64, i64, f64)]) -> Result<Self> {
        let w = 2 * degree + 1;
        let mut coefficients = vec![0.0; w * w];
        let n = degree as i64;
        for &(j, k, a) in terms {
            if j.abs() > n || k.abs() > n {
                return Err(Error::InvalidDensity(format!("term ({j},{k}) exceeds degree {degree}")));
            }
            coefficients[((j + n) as usize) * w + (k + n) as usize] = a;
            coefficients[((n - j) as usize) * w + (n - k) as usize] = a;
        }
        TrigPoly::new(degree, coefficients)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `a_{j,k}`, zero outside the degree.
    pub fn coef(&self, j: i64, k: i64) -> f64 {
        let n = self.degree as i64;
        if j.abs() > n || k.abs() > n {
            return 0.0;
        }
        self.coefficients[((j + n) as usize) * (2 * self.degree + 1) + (k + n) as usize]
    }

    fn scale(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.degree as i64;
        let mut s = 0.0;
        for j in -n..=n {
            for k in -n..=n {
                s += self.coef(j, k) * (j as f64 * x + k as f64 * y).cos();
            }
        }
        s
    }

    /// `f(2πp/g, 2πq/g)` for `0 ≤ p, q < g`, row-major; needs `g ≥ 2n + 1`.
    pub fn grid_values(&self, g: usize) -> Vec<f64> {
        assert!(g > 2 * self.degree, "grid too coarse for the degree");
        let mut buf = self.wrapped(g, 1.0);
        fft2(&mut buf, g, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Coefficients scaled by `scale` and placed at `(j mod g, k mod g)`.
    fn wrapped(&self, g: usize, scale: f64) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); g * g];
        let n = self.degree as i64;
        for j in -n..=n {
            for k in -n..=n {
                let r = j.rem_euclid(g as i64) as usize;
                let c = k.rem_euclid(g as i64) as usize;
                buf[r * g + c] += scale * self.coef(j, k);
            }
        }
        buf
    }

    /// `f + c`, which must stay nonnegative.
    pub fn add_constant(&self, c: f64) -> Result<Self> {
        let mut coefficients = self.coefficients.clone();
        let w = 2 * self.degree + 1;
        coefficients[self.degree * w + self.degree] += c;
        TrigPoly::new(self.degree, coefficients)
    }

    fn transposed(&self) -> TrigPoly {
        let n = self.degree as i64;
        let w = 2 * self.degree + 1;
        let mut coefficients = vec![0.0; w * w];
        for j in -n..=n {
            for k in -n..=n {
                coefficients[((j + n) as usize) * w + (k + n) as usize] = self.coef(k, j);
            }
        }
        TrigPoly { degree: self.degree, coefficients }
    }
}

/// `f(x, y) = r(x) r(y)` with `r` even, tabulated on `[0, π]` and
/// interpolated linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeparableRaw")]
pub struct Separable {
    #[serde(serialize_with = "fmt::reals")]
    r: Vec<f64>,
}

#[derive(Deserialize)]
struct SeparableRaw {
    r: Vec<f64>,
}

impl TryFrom<SeparableRaw> for Separable {
    type Error = Error;
    fn try_from(raw: SeparableRaw) -> Result<Self> {
        Separable::new(raw.r)
    }
}

impl Separable {
    /// `r` sampled at `iπ/(m−1)`, `i = 0..m`.
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.len() < 2 {
            return Err(Error::InvalidDensity("separable factor needs at least two table points".into()));
        }
        if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDensity("separable factor must be finite and nonnegative".into()));
        }
        Ok(Separable { r })
    }

    /// Tabulates `r` on `points` nodes of `[0, π]`, using one-sided limits
    /// at the endpoints.
    pub fn from_quantile(q: &QuantileFunctionR, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter("need at least two table points".into()));
        }
        let h = PI / (points - 1) as f64;
        let r = (0..points).map(|i| q.eval_continuous((i as f64 * h).min(PI))).collect::<Result<_>>()?;
        Separable::new(r)
    }

    pub fn table(&self) -> &[f64] {
        &self.r
    }

    fn step(&self) -> f64 {
        PI / (self.r.len() - 1) as f64
    }

    /// `r(x)` for `|x| ≤ π`.
    pub fn r(&self, x: f64) -> f64 {
        let t = (x.abs().min(PI)) / self.step();
        let i = (t as usize).min(self.r.len() - 2);
        let s = t - i as f64;
        self.r[i] + s * (self.r[i + 1] - self.r[i])
    }

    /// Minimum of the table, the essential infimum of `r` for the
    /// interpolant.
    pub fn floor(&self) -> f64 {
        self.r.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `∫_{−π}^{π} e^{iux} r(x) dx`, exact for the interpolant.
    pub fn fourier(&self, u: i64) -> f64 {
        2.0 * cosine_integral(&self.r, self.step(), u as f64)
    }

    /// Nonnegative trigonometric polynomial of degree `n` (rounded up to
    /// even) approximating `r ⊗ r`.
    ///
    /// With `r₀` the floor, the factor is replaced by `r₀ + (S_d √(r − r₀))²`
    /// where `S_d` truncates the Fourier series at degree `d = n/2`. The
    /// result is at least `r₀²` everywhere.
    pub fn to_trig_poly(&self, degree: usize) -> Result<TrigPoly> {
        let d = degree.div_ceil(2);
        let floor = self.floor();
        let root: Vec<f64> = self.r.iter().map(|v| (v - floor).max(0.0).sqrt()).collect();
        // b_j = (1/2π) ∫ e^{−ijx} √(r − r₀) dx, real and even
        let b: Vec<f64> = (0..=d).map(|j| cosine_integral(&root, self.step(), j as f64) / PI).collect();
        let coef = |j: i64| b[j.unsigned_abs() as usize];
        let d = d as i64;
        let n = 2 * d;
        let mut rho = vec![0.0; (2 * n + 1) as usize];
        for j in -d..=d {
            for k in -d..=d {
                rho[(j + k + n) as usize] += coef(j) * coef(k);
            }
        }
        rho[n as usize] += floor;
        let w = rho.len();
        let mut coefficients = vec![0.0; w * w];
        for (i, a) in rho.iter().enumerate() {
            for (j, b) in rho.iter().enumerate() {
                coefficients[i * w + j] = a * b;
            }
        }
        TrigPoly::new(n as usize, coefficients)
    }
}

/// `∫_0^π cos(ux) L(x) dx` for the piecewise-linear interpolant `L` of
/// `values` on a uniform grid of step `h`.
fn cosine_integral(values: &[f64], h: f64, u: f64) -> f64 {
    if u == 0.0 {
        return values.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
    }
    // ∫ L cos(ux) = [L sin(ux)/u] + slope [cos(ux)/u²] per cell
    let mut total = 0.0;
    for (i, w) in values.windows(2).enumerate() {
        let x0 = i as f64 * h;
        let x1 = x0 + h;
        let slope = (w[1] - w[0]) / h;
        total += (w[1] * (u * x1).sin() - w[0] * (u * x0).sin()) / u;
        total += slope * ((u * x1).cos() - (u * x0).cos()) / (u * u);
    }
    total
}

/// Spectral density of a stationary field on `ℤ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpectralDensity2D {
    #[serde(rename = "trigpoly")]
    TrigPoly(TrigPoly),
    Separable(Separable),
    /// `base + alpha` with `alpha ≥ 0`.
    Shifted {
        base: Box<SpectralDensity2D>,
        #[serde(serialize_with = "fmt::real")]
        alpha: f64,
    },
}

impl SpectralDensity2D {
    /// The constant density `c ≥ 0`.
    pub fn constant(c: f64) -> Result<Self> {
        Ok(SpectralDensity2D::TrigPoly(TrigPoly::constant(c)?))
    }

    /// `r ⊗ r` for the function `r` attached to a measure on `[0, ∞)`.
    pub fn separable(q: &QuantileFunctionR) -> Result<Self> {
        Ok(SpectralDensity2D::Separable(Separable::from_quantile(q, DEFAULT_R_POINTS)?))
    }

    pub fn shifted(base: SpectralDensity2D, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("shift must be finite and nonnegative, got {alpha}")));
        }
        Ok(SpectralDensity2D::Shifted { base: Box::new(base), alpha })
    }

    /// Rechecks the invariants, for values built by hand or deserialized.
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralDensity2D::TrigPoly(p) => TrigPoly::new(p.degree, p.coefficients.clone()).map(|_| ()),
            SpectralDensity2D::Separable(s) => Separable::new(s.r.clone()).map(|_| ()),
            SpectralDensity2D::Shifted { base, alpha } => {
                if !(*alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidDensity(format!("negative shift {alpha}")));
                }
                base.validate()
            }
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            SpectralDensity2D::TrigPoly(p) => p.eval(x, y),
            SpectralDensity2D::Separable(s) => s.r(x) * s.r(y),
            SpectralDensity2D::Shifted { base, alpha } => base.eval(x, y) + alpha,
        }
    }

    /// Covariance of the field at lag `(u, v)`.
    pub fn covariance(&self, u: i64, v: i64) -> f64 {
        match self {
            SpectralDensity2D::TrigPoly(p) => FOUR_PI2 * p.coef(-u, -v),
            SpectralDensity2D::Separable(s) => s.fourier(u) * s.fourier(v),
            SpectralDensity2D::Shifted { base, alpha } => {
                base.covariance(u, v) + if (u, v) == (0, 0) { FOUR_PI2 * alpha } else { 0.0 }
            }
        }
    }

    /// `∫∫ f`, the variance of a single field value.
    pub fn l1_norm(&self) -> f64 {
        self.covariance(0, 0)
    }

    /// `½ [f(x, y) + f(y, x)]`.
    pub fn symmetrize(&self) -> SpectralDensity2D {
        match self {
            SpectralDensity2D::TrigPoly(p) => {
                let t = p.transposed();
                let coefficients = p.coefficients.iter().zip(&t.coefficients).map(|(a, b)| 0.5 * (a + b)).collect();
                SpectralDensity2D::TrigPoly(TrigPoly { degree: p.degree, coefficients })
            }
            SpectralDensity2D::Separable(_) => self.clone(),
            SpectralDensity2D::Shifted { base, alpha } => {
                SpectralDensity2D::Shifted { base: Box::new(base.symmetrize()), alpha: *alpha }
            }
        }
    }

    /// Lower estimate of `ess inf [f(x, y) + f(y, x)]`.
    ///
    /// Polynomials are minimized over an [`ESS_INF_GRID`] grid; a separable
    /// density reports `2 r₀²` for the floor `r₀` of its factor.
    pub fn ess_inf_check(&self) -> f64 {
        let v = match self {
            SpectralDensity2D::TrigPoly(p) => {
                let g = ESS_INF_GRID.max(2 * p.degree + 1);
                let vals = p.grid_values(g);
                let mut min = f64::INFINITY;
                for i in 0..g {
                    for j in 0..g {
                        min = min.min(vals[i * g + j] + vals[j * g + i]);
                    }
                }
                min
            }
            SpectralDensity2D::Separable(s) => 2.0 * s.floor() * s.floor(),
            SpectralDensity2D::Shifted { base, alpha } => base.ess_inf_check() + 2.0 * alpha,
        };
        v.max(0.0)
    }

    /// The total constant shift and the unshifted base.
    fn split_shift(&self) -> (&SpectralDensity2D, f64) {
        match self {
            SpectralDensity2D::Shifted { base, alpha } => {
                let (b, a) = base.split_shift();
                (b, a + alpha)
            }
            other => (other, 0.0),
        }
    }

    /// Band-limited version of the density: unchanged for polynomials,
    /// otherwise of degree `degree`.
    pub fn to_trig_poly(&self, degree: usize) -> Result<TrigPoly> {
        match self {
            SpectralDensity2D::TrigPoly(p) => Ok(p.clone()),
            SpectralDensity2D::Separable(s) => s.to_trig_poly(degree),
            SpectralDensity2D::Shifted { base, alpha } => base.to_trig_poly(degree)?.add_constant(*alpha),
        }
    }

    pub fn is_band_limited(&self) -> bool {
        match self {
            SpectralDensity2D::TrigPoly(_) => true,
            SpectralDensity2D::Separable(_) => false,
            SpectralDensity2D::Shifted { base, .. } => base.is_band_limited(),
        }
    }
}

/// Smallest `m ≥ target` whose prime factors are at most 7.
pub fn fft_friendly(target: usize) -> usize {
    let mut m = target.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// In-place 2D DFT of a `g × g` row-major array. The output is transposed:
/// entry `(p, q)` of the transform sits at `q * g + p`.
fn fft2_transposed(buf: &mut [Complex64], g: usize, fft: &Arc<dyn Fft<f64>>) {
    par::for_each_chunk_mut(buf, g, |_, row| fft.process(row));
    transpose(buf, g);
    par::for_each_chunk_mut(buf, g, |_, row| fft.process(row));
}

fn fft2(buf: &mut [Complex64], g: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(g) } else { planner.plan_fft_forward(g) };
    fft2_transposed(buf, g, &fft);
    transpose(buf, g);
}

fn transpose(buf: &mut [Complex64], g: usize) {
    const B: usize = 32;
    for bi in (0..g).step_by(B) {
        for bj in (bi..g).step_by(B) {
            for i in bi..(bi + B).min(g) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(g) {
                    buf.swap(i * g + j, j * g + i);
                }
            }
        }
    }
}

/// An `N × N` window of a sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    n: usize,
    period: usize,
    seed: u64,
    replicate: u64,
    values: Vec<f64>,
}

impl FieldSample {
    /// Wraps raw values, e.g. a hand-built field for testing.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n || n == 0 {
            return Err(Error::InvalidParameter(format!("{} values do not form a {n}x{n} window", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field values must be finite".into()));
        }
        Ok(FieldSample { n, period: n, seed: 0, replicate: 0, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Torus period used by the embedding.
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    /// `G_{i,j}` for `0 ≤ i, j < N`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Writes `N` as a little-endian `u64`, then the values row by row as
    /// little-endian `f64`.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.n as u64).to_le_bytes())?;
        let mut bytes = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&bytes)?;
        Ok(())
    }

    /// Reads the format of [`write_binary`](Self::write_binary).
    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut head = [0u8; 8];
        input.read_exact(&mut head)?;
        let n = usize::try_from(u64::from_le_bytes(head))
            .map_err(|_| Error::InvalidParameter("window size does not fit in memory".into()))?;
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if Some(bytes.len()) != n.checked_mul(n).and_then(|m| m.checked_mul(8)) {
            return Err(Error::InvalidParameter(format!("expected {n}x{n} values, found {} bytes", bytes.len())));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        FieldSample::from_values(n, values)
    }
}

/// Options for [`FieldSampler`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerOptions {
    /// Degree used when the density is not a trigonometric polynomial.
    pub approx_degree: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { approx_degree: DEFAULT_APPROX_DEGREE }
    }
}

/// Circulant-embedding sampler for one density and window size.
///
/// The spectrum is computed once; [`sample`](Self::sample) then costs two
/// 2D FFTs of size `M × M`. A shift `α` is realized as independent white
/// noise of variance `4π²α` from its own stream, so a shifted density and
/// its base share the same underlying field for equal seeds.
#[derive(Clone)]
pub struct FieldSampler {
    n: usize,
    period: usize,
    degree: usize,
    approximated: bool,
    white_sd: f64,
    amplitude: Vec<f64>,
    clamped: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FieldSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSampler")
            .field("n", &self.n)
            .field("period", &self.period)
            .field("degree", &self.degree)
            .field("approximated", &self.approximated)
            .field("white_sd", &self.white_sd)
            .finish_non_exhaustive()
    }
}

impl FieldSampler {
    pub fn new(f: &SpectralDensity2D, n: usize, opts: SamplerOptions) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("window size must be positive".into()));
        }
        let (base, alpha) = f.split_shift();
        let poly = base.to_trig_poly(opts.approx_degree)?;
        let degree = poly.degree();
        let period = fft_friendly(n + 2 * degree);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(period);
        // λ(k, l) = Σ c(u, v) e^{−2πi(uk+vl)/M} = 4π² f(2πk/M, 2πl/M)
        let mut spec = poly.wrapped(period, FOUR_PI2);
        fft2_transposed(&mut spec, period, &fft);
        let mut clamped = 0;
        let scale = 1.0 / period as f64;
        let mut amplitude = Vec::with_capacity(spec.len());
        for c in spec {
            let mut lambda = c.re;
            if lambda < 0.0 {
                if lambda < -SPECTRUM_CLAMP {
                    return Err(Error::Embedding { value: lambda });
                }
                lambda = 0.0;
                clamped += 1;
            }
            amplitude.push(lambda.sqrt() * scale);
        }
        Ok(FieldSampler {
            n,
            period,
            degree,
            approximated: !base.is_band_limited(),
            white_sd: (FOUR_PI2 * alpha).sqrt(),
            amplitude,
            clamped,
            fft,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Degree of the polynomial actually sampled.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Whether the density was replaced by a polynomial approximation.
    pub fn approximated(&self) -> bool {
        self.approximated
    }

    /// Number of slightly negative spectrum values set to zero.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// One field window for `(seed, replicate)`.
    pub fn sample(&self, seed: u64, replicate: u64) -> FieldSample {
        let m = self.period;
        let mut rng = rng::stream(seed, replicate, Purpose::Field);
        // the spectrum is stored transposed, so the transform below yields the
        // transposed field, again in transposed layout
        let mut buf: Vec<Complex64> = self
            .amplitude
            .iter()
            .map(|&a| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(a * re, a * im)
            })
            .collect();
        fft2_transposed(&mut buf, m, &self.fft);
        let n = self.n;
        let mut values = Vec::with_capacity(n * n);
        for row in buf.chunks_exact(m).take(n) {
            values.extend(row[..n].iter().map(|c| c.re));
        }
        if self.white_sd > 0.0 {
            let mut white = rng::stream(seed, replicate, Purpose::WhiteNoise);
            for v in &mut values {
                let z: f64 = white.sample(StandardNormal);
                *v += self.white_sd * z;
            }
        }
        FieldSample { n, period: m, seed, replicate, values }
    }
}

/// Samples one `N × N` window of the field with density `f`.
pub fn sample_field(f: &SpectralDensity2D, n: usize, seed: u64) -> Result<FieldSample> {
    Ok(FieldSampler::new(f, n, SamplerOptions::default())?.sample(seed, 0))
}
