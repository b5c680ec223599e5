//! One-dimensional probability measures.
//!
//! [`MeasureRep`] covers the four concrete forms used throughout the crate:
//! finitely many atoms, a density tabulated on a uniform grid, the
//! semicircle law of a given variance, and the empirical law of a sample
//! (typically a matrix spectrum).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fmt;
use crate::nc::catalan;

/// Default number of grid points for tabulated densities.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Number of uniform points added by [`ks_distance`] on top of the atoms.
pub const KS_GRID_POINTS: usize = 2048;

const WEIGHT_TOL: f64 = 1e-12;
const QUANTILE_TOL: f64 = 1e-12;

/// `2^{3/2} π`, the scale between `r` and the quantile function of its measure.
pub const R_SCALE: f64 = 2.0 * std::f64::consts::SQRT_2 * PI;

/// Finitely many atoms with strictly increasing locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomicRaw")]
pub struct Atomic {
    #[serde(serialize_with = "fmt::pairs")]
    atoms: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct AtomicRaw {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<AtomicRaw> for Atomic {
    type Error = Error;
    fn try_from(raw: AtomicRaw) -> Result<Self> {
        Atomic::new(raw.atoms)
    }
}

impl Atomic {
    /// Builds an atomic measure from `(location, weight)` pairs. Pairs are
    /// sorted and coincident locations merged.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("atomic measure needs at least one atom".into()));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() || w <= 0.0 || w > 1.0 {
                return Err(Error::InvalidMeasure(format!("bad atom ({x}, {w})")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!("atom weights sum to {total}, not 1")));
        }
        Ok(Atomic { atoms: merged })
    }

    pub fn point_mass(c: f64) -> Result<Self> {
        Atomic::new(vec![(c, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// A probability density tabulated at `m` equispaced points of `[lo, hi]`,
/// interpolated linearly and normalized by the trapezoid rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRaw")]
pub struct GridDensity {
    #[serde(serialize_with = "fmt::real")]
    lo: f64,
    #[serde(serialize_with = "fmt::real")]
    hi: f64,
    m: usize,
    #[serde(serialize_with = "fmt::reals")]
    values: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

#[derive(Deserialize)]
struct GridRaw {
    lo: f64,
    hi: f64,
    m: usize,
    values: Vec<f64>,
}

impl TryFrom<GridRaw> for GridDensity {
    type Error = Error;
    fn try_from(raw: GridRaw) -> Result<Self> {
        if raw.m != raw.values.len() {
            return Err(Error::InvalidMeasure(format!(
                "grid declares m = {} but has {} values",
                raw.m,
                raw.values.len()
            )));
        }
        GridDensity::new(raw.lo, raw.hi, raw.values)
    }
}

impl GridDensity {
    pub fn new(lo: f64, hi: f64, mut values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 2 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidMeasure(format!(
                "grid needs lo < hi and at least two points (lo={lo}, hi={hi}, m={m})"
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidMeasure("grid density values must be finite and nonnegative".into()));
        }
        let h = (hi - lo) / (m - 1) as f64;
        let mut cumulative = Vec::with_capacity(m);
        cumulative.push(0.0);
        for w in values.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + 0.5 * h * (w[0] + w[1]));
        }
        let total = cumulative[m - 1];
        if total <= 0.0 {
            return Err(Error::InvalidMeasure("grid density has zero mass".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        cumulative.iter_mut().for_each(|c| *c /= total);
        Ok(GridDensity { lo, hi, m, values, cumulative })
    }

    /// Tabulates `density` on `m` points of `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, m: usize, density: impl Fn(f64) -> f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidMeasure("grid needs at least two points".into()));
        }
        let h = (hi - lo) / (m - 1) as f64;
        let values = (0..m).map(|i| density(lo + i as f64 * h)).collect();
        GridDensity::new(lo, hi, values)
    }

    /// The uniform law on `[a, b]` at the default resolution.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        GridDensity::new(a, b, vec![1.0; DEFAULT_GRID_POINTS])
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let h = self.step();
        let i = (((x - self.lo) / h) as usize).min(self.m - 2);
        let s = x - self.node(i);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        (self.cumulative[i] + v0 * s + (v1 - v0) * s * s / (2.0 * h)).clamp(0.0, 1.0)
    }
}

/// The semicircle law of variance `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SemicircleRaw")]
pub struct Semicircle {
    #[serde(serialize_with = "fmt::real")]
    t: f64,
}

#[derive(Deserialize)]
struct SemicircleRaw {
    t: f64,
}

impl TryFrom<SemicircleRaw> for Semicircle {
    type Error = Error;
    fn try_from(raw: SemicircleRaw) -> Result<Self> {
        Semicircle::new(raw.t)
    }
}

impl Semicircle {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("semicircle variance must be positive, got {t}")));
        }
        Ok(Semicircle { t })
    }

    pub fn variance(&self) -> f64 {
        self.t
    }

    pub fn radius(&self) -> f64 {
        2.0 * self.t.sqrt()
    }

    pub fn density(&self, x: f64) -> f64 {
        let r2 = 4.0 * self.t - x * x;
        if r2 <= 0.0 {
            0.0
        } else {
            r2.sqrt() / (2.0 * PI * self.t)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let r = self.radius();
        if x <= -r {
            return 0.0;
        }
        if x >= r {
            return 1.0;
        }
        let u = x / r;
        (0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI).clamp(0.0, 1.0)
    }
}

/// The empirical law of a finite sample, equal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmpiricalRaw")]
pub struct Empirical {
    #[serde(serialize_with = "fmt::reals")]
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct EmpiricalRaw {
    values: Vec<f64>,
}

impl TryFrom<EmpiricalRaw> for Empirical {
    type Error = Error;
    fn try_from(raw: EmpiricalRaw) -> Result<Self> {
        Empirical::new(raw.values)
    }
}

impl Empirical {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMeasure("empirical measure needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("empirical values must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Empirical { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v < x) as f64 / self.values.len() as f64
    }
}

/// A one-dimensional probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureRep {
    Atomic(Atomic),
    #[serde(rename = "grid")]
    GridDensity(GridDensity),
    Semicircle(Semicircle),
    Empirical(Empirical),
}

impl MeasureRep {
    pub fn point_mass(c: f64) -> Result<Self> {
        Ok(MeasureRep::Atomic(Atomic::point_mass(c)?))
    }

    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Ok(MeasureRep::Atomic(Atomic::new(atoms)?))
    }

    pub fn semicircle(t: f64) -> Result<Self> {
        Ok(MeasureRep::Semicircle(Semicircle::new(t)?))
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Ok(MeasureRep::GridDensity(GridDensity::uniform(a, b)?))
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        Ok(MeasureRep::Empirical(Empirical::new(values)?))
    }

    /// Smallest closed interval carrying all the mass.
    pub fn support(&self) -> (f64, f64) {
        match self {
            MeasureRep::Atomic(a) => (a.atoms[0].0, a.atoms[a.atoms.len() - 1].0),
            MeasureRep::GridDensity(g) => {
                let first = g.values.iter().position(|&v| v > 0.0).unwrap_or(0);
                let last = g.values.iter().rposition(|&v| v > 0.0).unwrap_or(g.m - 1);
                (g.node(first.saturating_sub(1)), g.node((last + 1).min(g.m - 1)))
            }
            MeasureRep::Semicircle(s) => (-s.radius(), s.radius()),
            MeasureRep::Empirical(e) => (e.values[0], e.values[e.values.len() - 1]),
        }
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            MeasureRep::Atomic(a) => a.atoms.iter().take_while(|p| p.0 <= x).map(|p| p.1).sum::<f64>().min(1.0),
            MeasureRep::GridDensity(g) => g.cdf(x),
            MeasureRep::Semicircle(s) => s.cdf(x),
            MeasureRep::Empirical(e) => e.cdf(x),
        }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            MeasureRep::Atomic(a) => a.atoms.iter().take_while(|p| p.0 < x).map(|p| p.1).sum::<f64>().min(1.0),
            MeasureRep::Empirical(e) => e.cdf_left(x),
            _ => self.cdf(x),
        }
    }

    /// Locations carrying positive mass (empty for absolutely continuous forms).
    pub fn atom_locations(&self) -> Vec<f64> {
        match self {
            MeasureRep::Atomic(a) => a.atoms.iter().map(|p| p.0).collect(),
            MeasureRep::Empirical(e) => e.values.clone(),
            _ => Vec::new(),
        }
    }

    /// `inf { y : p ≤ F(y) }` for `p ∈ (0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain { value: p, domain: "(0, 1)" });
        }
        let q = match self {
            MeasureRep::Atomic(a) => {
                let mut acc = 0.0;
                let mut q = a.atoms[a.atoms.len() - 1].0;
                for &(x, w) in &a.atoms {
                    acc += w;
                    if p <= acc {
                        q = x;
                        break;
                    }
                }
                q
            }
            MeasureRep::Empirical(e) => {
                let n = e.values.len();
                let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
                e.values[rank - 1]
            }
            MeasureRep::GridDensity(_) | MeasureRep::Semicircle(_) => {
                let (mut lo, mut hi) = self.support();
                // Invariant: F(lo) < p ≤ F(hi), except possibly at the start.
                for _ in 0..200 {
                    if hi - lo <= QUANTILE_TOL {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if p <= self.cdf(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        };
        if !q.is_finite() {
            return Err(Error::UnboundedQuantile { level: p });
        }
        Ok(q)
    }

    /// Raw moments `m_1..m_kmax`.
    pub fn moments(&self, kmax: usize) -> Result<Vec<f64>> {
        if kmax == 0 {
            return Err(Error::InvalidParameter("kmax must be at least 1".into()));
        }
        let power_sums = |pts: &mut dyn Iterator<Item = (f64, f64)>| {
            let mut out = vec![0.0; kmax];
            for (x, w) in pts {
                let mut p = 1.0;
                for m in out.iter_mut() {
                    p *= x;
                    *m += w * p;
                }
            }
            out
        };
        Ok(match self {
            MeasureRep::Atomic(a) => power_sums(&mut a.atoms.iter().copied()),
            MeasureRep::Empirical(e) => {
                let w = 1.0 / e.values.len() as f64;
                power_sums(&mut e.values.iter().map(|&x| (x, w)))
            }
            MeasureRep::Semicircle(s) => (1..=kmax)
                .map(|k| if k % 2 == 1 { 0.0 } else { catalan(k / 2) as f64 * s.t.powi((k / 2) as i32) })
                .collect(),
            MeasureRep::GridDensity(g) => {
                let h = g.step();
                let m = g.m;
                power_sums(&mut (0..m).map(|i| {
                    let end = i == 0 || i == m - 1;
                    (g.node(i), g.values[i] * h * if end { 0.5 } else { 1.0 })
                }))
            }
        })
    }

    pub fn mean(&self) -> f64 {
        self.moments(1).map(|m| m[0]).unwrap_or(f64::NAN)
    }
}

/// Density of the semicircle law of variance `t` at `x`.
pub fn semicircle_density(t: f64, x: f64) -> Result<f64> {
    Ok(Semicircle::new(t)?.density(x))
}

/// Kolmogorov–Smirnov distance `sup |F_a − F_b|`.
///
/// Both CDFs (and their left limits) are compared at every atom of either
/// measure and on [`KS_GRID_POINTS`] uniform points spanning both supports.
pub fn ks_distance(a: &MeasureRep, b: &MeasureRep) -> f64 {
    let (alo, ahi) = a.support();
    let (blo, bhi) = b.support();
    let (lo, hi) = (alo.min(blo), ahi.max(bhi));
    let mut points: Vec<f64> = a.atom_locations();
    points.extend(b.atom_locations());
    if hi > lo {
        let h = (hi - lo) / (KS_GRID_POINTS - 1) as f64;
        points.extend((0..KS_GRID_POINTS).map(|i| lo + i as f64 * h));
    } else {
        points.push(lo);
    }
    points
        .iter()
        .map(|&x| {
            let right = (a.cdf(x) - b.cdf(x)).abs();
            let left = (a.cdf_left(x) - b.cdf_left(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max)
}

/// The function `r` on `[−π, π]` whose pushforward `2^{3/2} π r(U)` under a
/// uniform `U` on `(−π, π)` has law `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunctionR {
    mu: MeasureRep,
}

impl QuantileFunctionR {
    pub fn new(mu: MeasureRep) -> Self {
        QuantileFunctionR { mu }
    }

    pub fn measure(&self) -> &MeasureRep {
        &self.mu
    }

    /// Evaluates `r(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        quantile_r(&self.mu, x)
    }

    /// `r` with its removable values at `0` and `±π` replaced by one-sided
    /// limits. Equal to [`eval`](Self::eval) almost everywhere.
    pub fn eval_continuous(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x.abs() > PI {
            return Err(Error::Domain { value: x, domain: "[-pi, pi]" });
        }
        let p = x.abs() / PI;
        let q = if p <= 0.0 {
            self.mu.support().0
        } else if p >= 1.0 {
            self.mu.support().1
        } else {
            self.mu.quantile(p)?
        };
        Ok(q / R_SCALE)
    }

    /// Essential infimum of `r` on `(−π, π)`: `inf supp μ / 2^{3/2}π`.
    pub fn floor(&self) -> f64 {
        self.mu.support().0 / R_SCALE
    }

    /// Whether `μ([δ, ∞)) = 1`, checked through the quantile at level `0+`.
    pub fn satisfies_lower_bound(&self, delta: f64) -> bool {
        self.mu.cdf_left(delta) == 0.0
    }

    /// `∫_{−π}^{π} r(x) dx = 2^{−1/2} ∫ x μ(dx)`.
    pub fn integral(&self) -> f64 {
        self.mu.mean() / std::f64::consts::SQRT_2
    }
}

/// `r(x) = (2^{3/2} π)^{-1} inf { y : |x|/π ≤ μ(−∞, y] }` for `0 < |x| < π`, `0` otherwise.
pub fn quantile_r(mu: &MeasureRep, x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > PI {
        return Err(Error::Domain { value: x, domain: "[-pi, pi]" });
    }
    let p = x.abs() / PI;
    if p <= 0.0 || p >= 1.0 {
        return Ok(0.0);
    }
    let q = mu.quantile(p)?;
    if q < 0.0 {
        return Err(Error::InvalidMeasure(format!(
            "quantile {q} at level {p} is negative; r needs a measure on [0, inf)"
        )));
    }
    Ok(q / R_SCALE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Composite Simpson rule, used as an independent quadrature oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn semicircle_density_values() {
        assert!(close(semicircle_density(1.0, 0.0).unwrap(), 1.0 / PI, 1e-15));
        assert_eq!(semicircle_density(1.0, 2.0).unwrap(), 0.0);
        assert!(close(semicircle_density(2.0, 0.0).unwrap(), 1.0 / (PI * 2f64.sqrt()), 1e-15));
        assert!(close(semicircle_density(2.0, 0.0).unwrap(), 0.22508, 1e-5));
        assert!(semicircle_density(0.0, 0.0).is_err());
        assert!(semicircle_density(-1.0, 0.0).is_err());
    }

    #[test]
    fn semicircle_density_integrates_to_one() {
        // t = δ² with δ = 1 coincides with t = 1
        for t in [0.25, 1.0, 2.0] {
            let r = 2.0 * f64::sqrt(t);
            // substitute x = r sin θ to remove the endpoint singularity
            let total =
                simpson(|th| semicircle_density(t, r * th.sin()).unwrap() * r * th.cos(), -PI / 2.0, PI / 2.0, 2000);
            assert!(close(total, 1.0, 1e-10), "t={t}: {total}");
        }
    }

    #[test]
    fn semicircle_moments_match_quadrature_and_catalan() {
        let mu = MeasureRep::semicircle(1.0).unwrap();
        let m = mu.moments(4).unwrap();
        for (k, &expected) in [0.0, 1.0, 0.0, 2.0].iter().enumerate() {
            let quad = simpson(
                |th| {
                    let x = 2.0 * th.sin();
                    x.powi(k as i32 + 1) * semicircle_density(1.0, x).unwrap() * 2.0 * th.cos()
                },
                -PI / 2.0,
                PI / 2.0,
                4000,
            );
            assert!(close(quad, expected, 1e-10));
            assert!(close(m[k], expected, 1e-15));
        }
        for t in [0.5, 3.0] {
            let m = MeasureRep::semicircle(t).unwrap().moments(12).unwrap();
            for k in 1..=6 {
                assert_eq!(m[2 * k - 1] / t.powi(k as i32), catalan(k) as f64);
            }
        }
    }

    #[test]
    fn semicircle_moments_scale_with_variance() {
        let base = MeasureRep::semicircle(1.0).unwrap().moments(8).unwrap();
        let t = 2.7;
        let scaled = MeasureRep::semicircle(t).unwrap().moments(8).unwrap();
        for k in (2..=8).step_by(2) {
            assert!(close(scaled[k - 1], t.powf(k as f64 / 2.0) * base[k - 1], 1e-12 * scaled[k - 1]));
        }
    }

    #[test]
    fn atomic_and_uniform_moments() {
        let c = 1.7;
        let m = MeasureRep::point_mass(c).unwrap().moments(3).unwrap();
        assert!(close(m[0], c, 1e-15) && close(m[1], c * c, 1e-15) && close(m[2], c * c * c, 1e-14));
        let u = MeasureRep::uniform(1.0, 2.0).unwrap().moments(2).unwrap();
        assert!(close(u[0], 1.5, 1e-12));
        assert!(close(u[1], 7.0 / 3.0, 1e-6));
        assert!(MeasureRep::uniform(1.0, 2.0).unwrap().moments(0).is_err());
    }

    #[test]
    fn atomic_validation() {
        assert!(Atomic::new(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(Atomic::new(vec![]).is_err());
        assert!(Atomic::new(vec![(0.0, 0.0), (1.0, 1.0)]).is_err());
        let a = Atomic::new(vec![(1.0, 0.25), (-1.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(a.atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
    }

    #[test]
    fn grid_normalizes() {
        let g = GridDensity::new(0.0, 1.0, vec![2.0; 11]).unwrap();
        assert!(g.values().iter().all(|&v| close(v, 1.0, 1e-15)));
        assert!(GridDensity::new(0.0, 1.0, vec![0.0; 11]).is_err());
        assert!(GridDensity::new(0.0, 1.0, vec![1.0, -1.0, 1.0]).is_err());
        assert!(GridDensity::new(1.0, 0.0, vec![1.0; 3]).is_err());
    }

    #[test]
    fn quantile_r_examples() {
        let delta = MeasureRep::point_mass(1.0).unwrap();
        assert!(close(quantile_r(&delta, PI / 2.0).unwrap(), 1.0 / R_SCALE, 1e-16));
        assert!(close(1.0 / R_SCALE, 0.11254, 1e-5));
        let u = MeasureRep::uniform(1.0, 2.0).unwrap();
        for x in [-3.0, -1.0, 0.3, 2.0, 3.1] {
            let expected = (1.0 + f64::abs(x) / PI) / R_SCALE;
            assert!(close(quantile_r(&u, x).unwrap(), expected, 1e-12), "x={x}");
        }
        for mu in [&delta, &u] {
            assert_eq!(quantile_r(mu, 0.0).unwrap(), 0.0);
            assert_eq!(quantile_r(mu, PI).unwrap(), 0.0);
            assert_eq!(quantile_r(mu, -PI).unwrap(), 0.0);
            assert!(matches!(quantile_r(mu, 3.2), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn quantile_r_is_even_and_monotone() {
        let mu = MeasureRep::atomic(vec![(1.0, 0.3), (2.5, 0.7)]).unwrap();
        let r = QuantileFunctionR::new(mu);
        let mut prev = 0.0;
        for i in 1..100 {
            let x = PI * i as f64 / 100.0;
            let v = r.eval(x).unwrap();
            assert_eq!(v, r.eval(-x).unwrap());
            assert!(v >= prev);
            assert!(v >= 1.0 / R_SCALE);
            prev = v;
        }
        assert!(r.satisfies_lower_bound(1.0));
        assert!(!r.satisfies_lower_bound(1.5));
        assert!(close(r.floor(), 1.0 / R_SCALE, 1e-16));
    }

    #[test]
    fn quantile_plateau_takes_left_endpoint() {
        // zero density on (1, 2): the median is the left end of the gap
        let g = GridDensity::from_fn(0.0, 3.0, 3001, |x| if (1.0..=2.0).contains(&x) { 0.0 } else { 1.0 }).unwrap();
        let mu = MeasureRep::GridDensity(g);
        let q = mu.quantile(0.5).unwrap();
        assert!((q - 1.0).abs() < 2e-3, "{q}");
    }

    #[test]
    fn pushforward_reproduces_measure() {
        use crate::rng::{stream, Purpose};
        use rand::Rng;
        let measures = [
            MeasureRep::atomic(vec![(1.0, 0.2), (1.5, 0.5), (3.0, 0.3)]).unwrap(),
            MeasureRep::uniform(1.0, 2.0).unwrap(),
        ];
        for mu in measures {
            let mut rng = stream(11, 0, Purpose::Uniform);
            let draws: Vec<f64> = (0..100_000)
                .map(|_| {
                    let u: f64 = rng.random_range(-PI..PI);
                    R_SCALE * quantile_r(&mu, u).unwrap()
                })
                .collect();
            let emp = MeasureRep::empirical(draws).unwrap();
            let d = ks_distance(&emp, &mu);
            assert!(d <= 0.02, "ks {d}");
        }
    }

    #[test]
    fn ks_examples() {
        let sc = MeasureRep::semicircle(1.0).unwrap();
        assert_eq!(ks_distance(&sc, &sc), 0.0);
        let d0 = MeasureRep::point_mass(0.0).unwrap();
        assert!(close(ks_distance(&d0, &sc), 0.5, 1e-12));
        let qs: Vec<f64> = (0..1024).map(|i| sc.quantile((i as f64 + 0.5) / 1024.0).unwrap()).collect();
        let emp = MeasureRep::empirical(qs).unwrap();
        let d = ks_distance(&emp, &sc);
        assert!(d <= 1.0 / 1024.0 + 1e-9, "{d}");
        let e2 = MeasureRep::empirical(vec![0.0, 1.0]).unwrap();
        assert!((0.0..=1.0).contains(&ks_distance(&e2, &d0)));
    }

    #[test]
    fn json_round_trip_and_format() {
        let ms = vec![
            MeasureRep::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
            MeasureRep::GridDensity(GridDensity::new(0.0, 1.0, vec![1.0, 2.0, 1.0]).unwrap()),
            MeasureRep::semicircle(0.1).unwrap(),
            MeasureRep::empirical(vec![0.3, -0.2]).unwrap(),
        ];
        for m in ms {
            let s = serde_json::to_string(&m).unwrap();
            let back: MeasureRep = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m, "{s}");
        }
        let s = serde_json::to_string(&MeasureRep::semicircle(0.1).unwrap()).unwrap();
        assert_eq!(s, r#"{"kind":"semicircle","t":1.0000000000000001e-1}"#);
        let g: std::result::Result<MeasureRep, _> =
            serde_json::from_str(r#"{"kind":"grid","lo":0,"hi":1,"m":3,"values":[1,1]}"#);
        assert!(g.is_err());
        let bad: std::result::Result<MeasureRep, _> = serde_json::from_str(r#"{"kind":"semicircle","t":-1}"#);
        assert!(bad.is_err());
    }
}
