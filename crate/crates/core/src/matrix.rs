//! Symmetric random matrix ensembles and their empirical spectra.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::eigen;
use crate::error::{Error, Result};
use crate::field::FieldSample;
use crate::measure::MeasureRep;
use crate::par;
use crate::rng::{self, Purpose};

/// Largest order accepted by [`eigenvalues`].
pub const MAX_EIGEN_N: usize = 4096;
/// Highest moment order reported by [`esd_moments`].
pub const MAX_ESD_MOMENT: usize = 8;
/// Default histogram resolution.
pub const DEFAULT_BINS: usize = 100;

/// Real symmetric matrix stored as its packed upper triangle, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    packed: Vec<f64>,
}

impl SymmetricMatrix {
    /// Fills entry `(i, j)`, `i ≤ j`, with `f(i, j)`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Send + Sync) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix order must be positive".into()));
        }
        let rows = par::map_indexed(n, |i| (i..n).map(|j| f(i, j)).collect::<Vec<_>>());
        let packed: Vec<f64> = rows.concat();
        if packed.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix entries must be finite".into()));
        }
        Ok(SymmetricMatrix { n, packed })
    }

    /// `diag(d)`.
    pub fn diagonal(d: &[f64]) -> Result<Self> {
        SymmetricMatrix::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn offset(&self, i: usize) -> usize {
        // rows 0..i hold n + (n−1) + … + (n−i+1) entries
        i * self.n - i * (i.saturating_sub(1)) / 2
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.packed[self.offset(i) + j - i]
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if self.n != other.n {
            return Err(Error::InvalidParameter(format!("cannot add orders {} and {}", self.n, other.n)));
        }
        let packed = self.packed.iter().zip(&other.packed).map(|(a, b)| a + b).collect();
        Ok(SymmetricMatrix { n: self.n, packed })
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let row = &self.packed[self.offset(i)..self.offset(i) + self.n - i];
            s += row[0] * row[0] + 2.0 * row[1..].iter().map(|x| x * x).sum::<f64>();
        }
        s
    }

    /// Full row-major storage.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let row = &self.packed[self.offset(i)..self.offset(i) + n - i];
            for (k, &v) in row.iter().enumerate() {
                a[i * n + i + k] = v;
                a[(i + k) * n + i] = v;
            }
        }
        a
    }
}

/// `Ḡ(i, j) = (G_{i,j} + G_{j,i}) / √N`.
pub fn build_gbar(sample: &FieldSample) -> SymmetricMatrix {
    let n = sample.n();
    let s = 1.0 / (n as f64).sqrt();
    SymmetricMatrix::from_fn(n, |i, j| (sample.get(i, j) + sample.get(j, i)) * s).expect("field values are finite")
}

/// Wigner matrix with upper-triangular entries, diagonal included, i.i.d.
/// `N(0, 1/N)`.
pub fn build_wigner(n: usize, seed: u64, replicate: u64) -> Result<SymmetricMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix order must be positive".into()));
    }
    let mut rng = rng::stream(seed, replicate, Purpose::Wigner);
    let sd = 1.0 / (n as f64).sqrt();
    let packed = (0..n * (n + 1) / 2)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            sd * z
        })
        .collect();
    Ok(SymmetricMatrix { n, packed })
}

/// `W(i, j) = (H_{i,j} + H_{j,i}) / √N` with `H` i.i.d. `N(0, 4π²α)`.
pub fn build_wn(alpha: f64, n: usize, seed: u64, replicate: u64) -> Result<SymmetricMatrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("matrix order must be positive".into()));
    }
    let mut rng = rng::stream(seed, replicate, Purpose::Perturbation);
    let sd = (4.0 * PI * PI * alpha).sqrt();
    let h: Vec<f64> = (0..n * n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            sd * z
        })
        .collect();
    let s = 1.0 / (n as f64).sqrt();
    SymmetricMatrix::from_fn(n, |i, j| (h[i * n + j] + h[j * n + i]) * s)
}

/// `diag(d_1, …, d_N)` with `d_i` i.i.d. from `mu`.
pub fn build_diagonal(mu: &MeasureRep, n: usize, seed: u64, replicate: u64) -> Result<SymmetricMatrix> {
    let mut rng = rng::stream(seed, replicate, Purpose::Diagonal);
    let d = (0..n)
        .map(|_| {
            // open interval keeps quantiles of unbounded laws finite
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            mu.quantile(u)
        })
        .collect::<Result<Vec<_>>>()?;
    SymmetricMatrix::diagonal(&d)
}

/// Where a spectrum came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSource {
    pub ensemble: String,
    pub seed: u64,
    pub replicate: u64,
    pub n: usize,
}

/// Sorted eigenvalues of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    values: Vec<f64>,
    source: SpectrumSource,
}

impl EmpiricalSpectrum {
    pub fn new(mut values: Vec<f64>, source: SpectrumSource) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("spectrum must be nonempty and finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSpectrum { values, source })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &SpectrumSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The spectral measure, each eigenvalue weighted `1/N`.
    pub fn to_measure(&self) -> MeasureRep {
        MeasureRep::empirical(self.values.clone()).expect("spectrum is finite")
    }

    /// Averaged ESD of several spectra.
    pub fn pool(spectra: &[EmpiricalSpectrum]) -> Result<MeasureRep> {
        let all: Vec<f64> = spectra.iter().flat_map(|s| s.values.iter().copied()).collect();
        MeasureRep::empirical(all)
    }

    /// CSV with columns `index,eigenvalue`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,eigenvalue")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Sorted eigenvalues of `m`.
pub fn eigenvalues(m: &SymmetricMatrix, source: SpectrumSource) -> Result<EmpiricalSpectrum> {
    if m.n > MAX_EIGEN_N {
        return Err(Error::Limit { what: "eigenvalue problem order", value: m.n, limit: MAX_EIGEN_N });
    }
    let mut dense = m.to_dense();
    let values = eigen::symmetric_eigenvalues(&mut dense, m.n)?;
    EmpiricalSpectrum::new(values, source)
}

/// `m_k = (1/N) Σ λ^k` for `k = 1..=kmax`.
pub fn esd_moments(s: &EmpiricalSpectrum, kmax: usize) -> Result<Vec<f64>> {
    if kmax > MAX_ESD_MOMENT {
        return Err(Error::Limit { what: "spectral moment order", value: kmax, limit: MAX_ESD_MOMENT });
    }
    let mut sums = vec![0.0; kmax];
    for &x in &s.values {
        let mut p = 1.0;
        for m in &mut sums {
            p *= x;
            *m += p;
        }
    }
    let n = s.values.len() as f64;
    Ok(sums.into_iter().map(|m| m / n).collect())
}

/// Normalized histogram: bin densities integrate to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    #[serde(serialize_with = "crate::fmt::reals")]
    pub edges: Vec<f64>,
    #[serde(serialize_with = "crate::fmt::reals")]
    pub density: Vec<f64>,
}

impl Histogram {
    /// `bins` equal bins spanning the data.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() || bins == 0 {
            return Err(Error::InvalidParameter("histogram needs data and at least one bin".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
        }
        let total = values.len() as f64;
        Ok(Histogram {
            edges: (0..=bins).map(|i| lo + i as f64 * w).collect(),
            density: counts.into_iter().map(|c| c as f64 / (total * w)).collect(),
        })
    }

    /// Bin count from the Freedman–Diaconis rule, at least one.
    pub fn freedman_diaconis_bins(values: &[f64]) -> usize {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        if v.len() < 2 {
            return 1;
        }
        let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        let iqr = q(0.75) - q(0.25);
        let width = 2.0 * iqr / (v.len() as f64).cbrt();
        if width <= 0.0 {
            return 1;
        }
        (((v[v.len() - 1] - v[0]) / width).ceil() as usize).clamp(1, 10_000)
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// CSV with columns `left,right,density`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "left,right,density")?;
        for (e, d) in self.edges.windows(2).zip(&self.density) {
            writeln!(out, "{},{},{}", e[0], e[1], d)?;
        }
        Ok(())
    }
}
