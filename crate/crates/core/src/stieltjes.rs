//! Cauchy transforms and the semicircular subordination fixed point.
//!
//! For `t > 0` the Cauchy transform `G` of `μ ⊞ μ_s(t)` is the unique
//! solution in the lower half-plane of `G = G_μ(z − t G)`. Densities are
//! recovered by Stieltjes inversion, `−Im G(x + iε) / π`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::measure::{GridDensity, MeasureRep};
use crate::par;

/// Default fixed-point tolerance on `|G − G_μ(z − tG)|`.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap for the fixed point.
pub const DEFAULT_MAXIT: usize = 10_000;
/// Default distance from the real axis for density recovery.
pub const DEFAULT_EPS: f64 = 1e-4;
/// Distances from the real axis used by [`atom_scan`].
pub const ATOM_SCAN_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Negative densities down to this magnitude are treated as roundoff.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

/// How [`CauchyEvaluator`] computes `G_μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauchyMethod {
    /// Atoms and the semicircle law.
    ClosedForm,
    /// Exact integration of the piecewise-linear grid density.
    Quadrature,
    /// Average over the sample.
    PowerSum,
}

/// Evaluates `G_μ(z) = ∫ (z − x)^{-1} μ(dx)` and its derivative.
#[derive(Debug, Clone, Copy)]
pub struct CauchyEvaluator<'a> {
    mu: &'a MeasureRep,
    method: CauchyMethod,
}

impl<'a> CauchyEvaluator<'a> {
    pub fn new(mu: &'a MeasureRep) -> Self {
        let method = match mu {
            MeasureRep::Atomic(_) | MeasureRep::Semicircle(_) => CauchyMethod::ClosedForm,
            MeasureRep::GridDensity(_) => CauchyMethod::Quadrature,
            MeasureRep::Empirical(_) => CauchyMethod::PowerSum,
        };
        CauchyEvaluator { mu, method }
    }

    pub fn method(&self) -> CauchyMethod {
        self.method
    }

    /// `G_μ(z)` for `Im z > 0`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_upper(z)?;
        Ok(self.eval_with_derivative(z).0)
    }

    /// `(G_μ(z), G_μ'(z))`; the caller guarantees `Im z > 0`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        match self.mu {
            MeasureRep::Atomic(a) => {
                a.atoms().iter().fold((Complex64::default(), Complex64::default()), |(g, d), &(x, w)| {
                    let inv = 1.0 / (z - x);
                    (g + w * inv, d - w * inv * inv)
                })
            }
            MeasureRep::Empirical(e) => {
                let (mut g, mut d) = (Complex64::default(), Complex64::default());
                for &x in e.values() {
                    let inv = 1.0 / (z - x);
                    g += inv;
                    d -= inv * inv;
                }
                let n = e.values().len() as f64;
                (g / n, d / n)
            }
            MeasureRep::Semicircle(s) => {
                let t = s.variance();
                let r = s.radius();
                // principal roots of each factor keep the product analytic off [−r, r]
                let root = (z - r).sqrt() * (z + r).sqrt();
                // equals (z − root) / 2t without the cancellation for large |z|
                let g = 2.0 / (z + root);
                // differentiate t G² − z G + 1 = 0
                let d = g / (2.0 * t * g - z);
                (g, d)
            }
            MeasureRep::GridDensity(grid) => grid_cauchy(grid, z),
        }
    }
}

/// Cauchy transform of the piecewise-linear interpolant of a grid density,
/// integrated exactly cell by cell.
fn grid_cauchy(grid: &GridDensity, z: Complex64) -> (Complex64, Complex64) {
    let h = grid.step();
    let vals = grid.values();
    let mut g = Complex64::default();
    let mut d = Complex64::default();
    let mut u0 = z - grid.lo();
    let mut log0 = u0.ln();
    for i in 0..vals.len() - 1 {
        let u1 = z - grid.node(i + 1);
        let log1 = u1.ln();
        let slope = (vals[i + 1] - vals[i]) / h;
        let lg = log0 - log1;
        // p(x) = a − slope·u with u = z − x
        let a = vals[i] + slope * u0;
        g += a * lg - slope * h;
        d -= a * (1.0 / u1 - 1.0 / u0) - slope * lg;
        u0 = u1;
        log0 = log1;
    }
    (g, d)
}

fn check_upper(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || z.im <= 0.0 {
        return Err(Error::Domain { value: z.im, domain: "Im z > 0" });
    }
    Ok(())
}

/// `G_μ(z)` for `Im z > 0`.
pub fn cauchy_transform(mu: &MeasureRep, z: Complex64) -> Result<Complex64> {
    CauchyEvaluator::new(mu).eval(z)
}

/// Fixed-point solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub maxit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, maxit: DEFAULT_MAXIT }
    }
}

/// A converged subordination solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subordination {
    /// Cauchy transform of `μ ⊞ μ_s(t)` at `z`.
    pub g: Complex64,
    pub iterations: usize,
    /// `|G − G_μ(z − tG)|` at the returned point.
    pub residual: f64,
}

/// Solves `G = G_μ(z − tG)`, giving the Cauchy transform of `μ ⊞ μ_s(t)`.
///
/// The solution is continued in `Im z`: starting at a height where the
/// fixed-point map is a strict contraction, the point is lowered towards
/// `z` in geometric steps, each solved by Newton's method on
/// `F(w) = w − G_μ(z − tw)` with a backtracking line search on `|F|`.
/// A step that stalls is split in two. `maxit` bounds the total number of
/// Newton iterations.
pub fn subordinate_semicircle(mu: &MeasureRep, t: f64, z: Complex64, tol: f64, maxit: usize) -> Result<Subordination> {
    check_upper(z)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("semicircle variance must be positive, got {t}")));
    }
    let solver = Newton { ev: CauchyEvaluator::new(mu), t };
    let mut budget = maxit;
    let mut y = z.im.max(2.0 * t.sqrt() + 1.0);
    let start = Complex64::new(z.re, y);
    let mut w = solver.solve(start, 1.0 / start, tol, &mut budget)?.0;
    while y > z.im {
        let mut next = (0.25 * y).max(z.im);
        loop {
            let level = Complex64::new(z.re, next);
            let local = if next == z.im { tol } else { tol.max(1e-10) };
            let mut trial = budget.min(STAGE_ITERATIONS);
            let spent_before = trial;
            match solver.solve(level, w, local, &mut trial) {
                Ok((found, res)) => {
                    budget -= spent_before - trial;
                    w = found;
                    if next == z.im {
                        return Ok(Subordination { g: w, iterations: maxit - budget, residual: res });
                    }
                    break;
                }
                Err(e) => {
                    budget -= spent_before - trial;
                    let split = (y * next).sqrt();
                    if budget == 0 || split / y > 0.999 || split <= next {
                        return Err(match e {
                            Error::Convergence { residual, last_re, last_im, .. } => {
                                Error::Convergence { iterations: maxit - budget, residual, last_re, last_im }
                            }
                            other => other,
                        });
                    }
                    next = split;
                }
            }
        }
        y = next;
    }
    // z.im was above the starting height
    let res = solver.residual(z, w).unwrap_or(f64::INFINITY);
    Ok(Subordination { g: w, iterations: maxit - budget, residual: res })
}

/// Newton iterations allowed for one continuation step before it is split.
const STAGE_ITERATIONS: usize = 60;

struct Newton<'a> {
    ev: CauchyEvaluator<'a>,
    t: f64,
}

impl Newton<'_> {
    /// `(G_μ(ω), G_μ'(ω), |F(w)|)` at `ω = z − tw`, inside the domain only.
    fn state(&self, z: Complex64, w: Complex64) -> Option<(Complex64, Complex64, f64)> {
        let omega = z - self.t * w;
        if !(omega.im > 0.0 && w.im < 0.0) {
            return None;
        }
        let (g, d) = self.ev.eval_with_derivative(omega);
        let res = (w - g).norm();
        res.is_finite().then_some((g, d, res))
    }

    fn residual(&self, z: Complex64, w: Complex64) -> Option<f64> {
        self.state(z, w).map(|s| s.2)
    }

    fn solve(&self, z: Complex64, w0: Complex64, tol: f64, budget: &mut usize) -> Result<(Complex64, f64)> {
        let mut w = w0;
        let mut state = self.state(z, w);
        if state.is_none() {
            // the previous level's solution left the domain; restart from G_μ(z)
            w = self.ev.eval_with_derivative(z).0;
            state = self.state(z, w);
        }
        let Some((mut g, mut d, mut res)) = state else {
            return Err(Error::Convergence { iterations: 0, residual: f64::INFINITY, last_re: w.re, last_im: w.im });
        };
        loop {
            if res <= tol {
                return Ok((w, res));
            }
            if *budget == 0 {
                return Err(Error::Convergence { iterations: 0, residual: res, last_re: w.re, last_im: w.im });
            }
            *budget -= 1;
            let slope = 1.0 + self.t * d;
            let step = (w - g) / slope;
            let mut lambda = 1.0;
            let mut next = None;
            while lambda > 1e-10 && step.norm().is_finite() {
                let cand = w - lambda * step;
                if let Some(c) = self.state(z, cand) {
                    if c.2 < (1.0 - 1e-4 * lambda) * res {
                        next = Some((cand, c));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            // the fixed-point step g never leaves the domain
            let (cand, c) = match next.or_else(|| self.state(z, g).map(|c| (g, c))) {
                Some(n) => n,
                None => return Err(Error::Convergence { iterations: 0, residual: res, last_re: w.re, last_im: w.im }),
            };
            w = cand;
            (g, d, res) = c;
        }
    }
}

/// Density of `μ ⊞ μ_s(t)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub eps: f64,
    pub iterations: Vec<usize>,
    pub residual: Vec<f64>,
}

impl DensityProfile {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Trapezoid integral of `x^k · density` over the grid.
    pub fn moment(&self, k: u32) -> f64 {
        self.x
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, p)| 0.5 * (x[1] - x[0]) * (x[0].powi(k as i32) * p[0] + x[1].powi(k as i32) * p[1]))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.moment(0)
    }

    /// CSV with columns `x,density,eps,iterations,residual`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,density,eps,iterations,residual")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.x[i], self.density[i], self.eps, self.iterations[i], self.residual[i]
            )?;
        }
        Ok(())
    }
}

/// `n` equispaced points covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Grid covering the support of `μ ⊞ μ_s(t)` with a margin of `pad`.
pub fn plus_semicircle_grid(mu: &MeasureRep, t: f64, n: usize, pad: f64) -> Vec<f64> {
    let (lo, hi) = mu.support();
    let r = 2.0 * t.sqrt();
    linspace(lo - r - pad, hi + r + pad, n)
}

/// Tabulates the density of `μ ⊞ μ_s(t)` at `x + iε` for each grid point.
pub fn density_of_plus_semicircle(mu: &MeasureRep, t: f64, grid: &[f64], eps: f64) -> Result<DensityProfile> {
    density_of_plus_semicircle_with(mu, t, grid, eps, SolverOptions::default())
}

pub fn density_of_plus_semicircle_with(
    mu: &MeasureRep,
    t: f64,
    grid: &[f64],
    eps: f64,
    opts: SolverOptions,
) -> Result<DensityProfile> {
    if !(1e-6..=1e-1).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [1e-6, 1e-1], got {eps}")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("grid must be finite".into()));
    }
    let solved = par::map_slice(grid, |&x| subordinate_semicircle(mu, t, Complex64::new(x, eps), opts.tol, opts.maxit));
    let mut profile = DensityProfile {
        x: grid.to_vec(),
        density: Vec::with_capacity(grid.len()),
        eps,
        iterations: Vec::with_capacity(grid.len()),
        residual: Vec::with_capacity(grid.len()),
    };
    for (index, (s, &x)) in solved.into_iter().zip(grid).enumerate() {
        let s = s.map_err(|e| Error::GridPoint { index, x, source: Box::new(e) })?;
        let mut p = -s.g.im / PI;
        if p < 0.0 {
            if p >= -NEGATIVE_CLAMP {
                p = 0.0;
            } else {
                return Err(Error::GridPoint { index, x, source: Box::new(Error::NegativeDensity { x, value: p }) });
            }
        }
        profile.density.push(p);
        profile.iterations.push(s.iterations);
        profile.residual.push(s.residual);
    }
    Ok(profile)
}

/// Thresholds for [`atom_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomScanOptions {
    /// Smallest accepted decay of `ε |Im G(x + iε)|` per decade of `ε`.
    pub min_decay: f64,
    /// Estimates below this mass are not examined.
    pub mass_floor: f64,
}

impl Default for AtomScanOptions {
    fn default() -> Self {
        AtomScanOptions { min_decay: 10f64.sqrt(), mass_floor: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomScanEntry {
    pub x: f64,
    /// `ε |Im G(x + iε)|` for each ε in [`ATOM_SCAN_EPS`].
    pub estimates: [f64; 3],
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomScanReport {
    pub entries: Vec<AtomScanEntry>,
    /// Indices of flagged grid points.
    pub flags: Vec<usize>,
}

impl AtomScanReport {
    /// Largest candidate atom mass at the smallest ε.
    pub fn max_candidate_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.estimates[2]).fold(0.0, f64::max)
    }
}

/// Looks for atoms of `μ ⊞ μ_s(t)` on the profile's grid.
///
/// At an atom of mass `m`, `ε |Im G(x + iε)| → m`; where the law has a
/// bounded density the product falls tenfold per decade of ε. A grid point
/// is flagged when the decay between consecutive ε is below
/// [`AtomScanOptions::min_decay`].
pub fn atom_scan(profile: &DensityProfile, mu: &MeasureRep, t: f64) -> Result<AtomScanReport> {
    let opts = SolverOptions::default();
    atom_scan_transform(
        &profile.x,
        |z| subordinate_semicircle(mu, t, z, opts.tol, opts.maxit).map(|s| s.g),
        AtomScanOptions::default(),
    )
}

/// [`atom_scan`] for an arbitrary Cauchy transform.
pub fn atom_scan_transform<F>(grid: &[f64], cauchy: F, opts: AtomScanOptions) -> Result<AtomScanReport>
where
    F: Fn(Complex64) -> Result<Complex64> + Send + Sync,
{
    let entries = par::map_slice(grid, |&x| -> Result<AtomScanEntry> {
        let mut estimates = [0.0; 3];
        for (e, &eps) in estimates.iter_mut().zip(&ATOM_SCAN_EPS) {
            *e = eps * cauchy(Complex64::new(x, eps))?.im.abs();
        }
        let flagged = estimates.windows(2).any(|p| p[0] > opts.mass_floor && p[0] < opts.min_decay * p[1]);
        Ok(AtomScanEntry { x, estimates, flagged })
    });
    let mut out = Vec::with_capacity(grid.len());
    for (index, (e, &x)) in entries.into_iter().zip(grid).enumerate() {
        out.push(e.map_err(|err| Error::GridPoint { index, x, source: Box::new(err) })?);
    }
    let flags = out.iter().enumerate().filter(|(_, e)| e.flagged).map(|(i, _)| i).collect();
    Ok(AtomScanReport { entries: out, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::semicircle_density;
    use crate::nc::{add_conv_moments, MomentSequence};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Midpoint-rule oracle for `∫ p(x) / (z − x) dx` after `x = r sin θ`.
    fn semicircle_cauchy_quadrature(t: f64, z: Complex64) -> Complex64 {
        let r = 2.0 * t.sqrt();
        let n = 200_000;
        let h = PI / n as f64;
        (0..n)
            .map(|i| {
                let th = -PI / 2.0 + (i as f64 + 0.5) * h;
                let x = r * th.sin();
                semicircle_density(t, x).unwrap() * r * th.cos() * h / (z - x)
            })
            .sum()
    }

    #[test]
    fn closed_forms() {
        let d0 = MeasureRep::point_mass(0.0).unwrap();
        let z = c(0.3, 0.7);
        assert!((cauchy_transform(&d0, z).unwrap() - 1.0 / z).norm() < 1e-15);
        let sc = MeasureRep::semicircle(1.0).unwrap();
        let g = cauchy_transform(&sc, c(0.0, 2.0)).unwrap();
        assert!((g - c(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-14);
        assert!((g - semicircle_cauchy_quadrature(1.0, c(0.0, 2.0))).norm() < 1e-8);
        for z in [c(1.9, 0.01), c(-3.0, 0.5), c(0.2, 5.0)] {
            let a = cauchy_transform(&MeasureRep::semicircle(0.7).unwrap(), z).unwrap();
            assert!((a - semicircle_cauchy_quadrature(0.7, z)).norm() < 1e-6, "{z}");
        }
        let two = MeasureRep::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!((cauchy_transform(&two, c(0.0, 1.0)).unwrap() - c(0.0, -0.5)).norm() < 1e-15);
        assert!(matches!(cauchy_transform(&sc, c(0.0, 0.0)), Err(Error::Domain { .. })));
        assert!(cauchy_transform(&sc, c(0.0, -1.0)).is_err());
    }

    #[test]
    fn evaluator_invariants() {
        let measures = [
            MeasureRep::semicircle(2.0).unwrap(),
            MeasureRep::uniform(1.0, 2.0).unwrap(),
            MeasureRep::empirical(vec![-1.0, 0.2, 0.5, 3.0]).unwrap(),
            MeasureRep::atomic(vec![(0.0, 0.25), (2.0, 0.75)]).unwrap(),
        ];
        for mu in &measures {
            let ev = CauchyEvaluator::new(mu);
            for z in [c(0.1, 1e-3), c(-4.0, 0.3), c(1.5, 2.0)] {
                assert!(ev.eval(z).unwrap().im < 0.0);
            }
            let big = c(1e6, 1e6);
            let g = ev.eval(big).unwrap();
            assert!((g * big - 1.0).norm() < 1e-5);
        }
    }

    #[test]
    fn grid_quadrature_matches_uniform_closed_form() {
        let mu = MeasureRep::uniform(1.0, 2.0).unwrap();
        let ev = CauchyEvaluator::new(&mu);
        assert_eq!(ev.method(), CauchyMethod::Quadrature);
        for z in [c(1.5, 0.01), c(0.0, 1.0), c(2.5, 1e-6)] {
            let exact = (z - 1.0).ln() - (z - 2.0).ln();
            let (g, d) = ev.eval_with_derivative(z);
            assert!((g - exact).norm() < 1e-12, "{z} {g} {exact}");
            let exact_d = 1.0 / (z - 1.0) - 1.0 / (z - 2.0);
            assert!((d - exact_d).norm() < 1e-9 * exact_d.norm().max(1.0), "{z} {d} {exact_d}");
        }
        // a sloped density against brute-force midpoint quadrature
        let tri = MeasureRep::GridDensity(GridDensity::from_fn(0.0, 1.0, 64, |x| x).unwrap());
        let z = c(0.4, 0.3);
        let n = 400_000;
        let brute: Complex64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                2.0 * x / (z - x) / n as f64
            })
            .sum();
        assert!((cauchy_transform(&tri, z).unwrap() - brute).norm() < 1e-8);
    }

    #[test]
    fn subordination_examples() {
        let tol = DEFAULT_TOL;
        let d0 = MeasureRep::point_mass(0.0).unwrap();
        let sc1 = MeasureRep::semicircle(1.0).unwrap();
        for z in [c(0.5, 0.1), c(-1.9, 1e-4), c(3.0, 1e-3), c(0.0, 1.0)] {
            let s = subordinate_semicircle(&d0, 1.0, z, tol, DEFAULT_MAXIT).unwrap();
            assert!((s.g - cauchy_transform(&sc1, z).unwrap()).norm() < 1e-10, "{z}");
            assert!(s.residual <= tol);
            assert!(s.g.im < 0.0);
            let shifted =
                subordinate_semicircle(&MeasureRep::point_mass(0.7).unwrap(), 2.0, z, tol, DEFAULT_MAXIT).unwrap();
            let expected = cauchy_transform(&MeasureRep::semicircle(2.0).unwrap(), z - 0.7).unwrap();
            assert!((shifted.g - expected).norm() < 1e-10);
            let semi =
                subordinate_semicircle(&MeasureRep::semicircle(0.5).unwrap(), 1.5, z, tol, DEFAULT_MAXIT).unwrap();
            let expected = cauchy_transform(&MeasureRep::semicircle(2.0).unwrap(), z).unwrap();
            assert!((semi.g - expected).norm() < 1e-10);
        }
        let err = subordinate_semicircle(&d0, 1.0, c(0.5, 0.1), 0.0, 3).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
        assert!(subordinate_semicircle(&d0, 0.0, c(0.5, 0.1), tol, 10).is_err());
        assert!(subordinate_semicircle(&d0, 1.0, c(0.5, 0.0), tol, 10).is_err());
    }

    #[test]
    fn density_examples() {
        let d0 = MeasureRep::point_mass(0.0).unwrap();
        let p = density_of_plus_semicircle(&d0, 1.0, &[0.0, 3.0], 1e-6).unwrap();
        assert!((p.density[0] - 1.0 / PI).abs() < 1e-4);
        assert!(p.density[1] < 1e-6);
        assert!(density_of_plus_semicircle(&d0, 1.0, &[0.0], 0.5).is_err());

        let uni = MeasureRep::uniform(1.0, 2.0).unwrap();
        let grid = plus_semicircle_grid(&uni, 1.0, 801, 0.5);
        let p = density_of_plus_semicircle(&uni, 1.0, &grid, 1e-3).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 0.01, "{}", p.total_mass());
        let mut csv = Vec::new();
        p.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("x,density,eps,iterations,residual\n"));
        assert_eq!(text.lines().count(), 802);
    }

    #[test]
    fn density_moments_match_free_convolution() {
        let mu = MeasureRep::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let grid = plus_semicircle_grid(&mu, 1.0, 4001, 0.3);
        let p = density_of_plus_semicircle(&mu, 1.0, &grid, 1e-4).unwrap();
        let exact = add_conv_moments(
            &MomentSequence::from_measure(&mu, 4).unwrap(),
            &MomentSequence::from_measure(&MeasureRep::semicircle(1.0).unwrap(), 4).unwrap(),
            4,
        )
        .unwrap()
        .to_f64();
        for k in 1..=4u32 {
            let got = p.moment(k);
            let want = exact[k as usize - 1];
            let scale = want.abs().max(1.0);
            assert!((got - want).abs() <= 0.02 * scale, "k={k}: {got} vs {want}");
        }
        assert!(p.residual.iter().all(|&r| r <= DEFAULT_TOL));
    }

    #[test]
    fn atom_scan_examples() {
        let grid = linspace(-3.0, 3.0, 61);
        let d0 = MeasureRep::point_mass(0.0).unwrap();
        let profile = density_of_plus_semicircle(&d0, 1.0, &grid, DEFAULT_EPS).unwrap();
        assert!(atom_scan(&profile, &d0, 1.0).unwrap().flags.is_empty());

        let two = MeasureRep::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let profile = density_of_plus_semicircle(&two, 1.0, &grid, DEFAULT_EPS).unwrap();
        let report = atom_scan(&profile, &two, 1.0).unwrap();
        assert!(report.flags.is_empty(), "{:?}", report.flags);

        // scanning the atom itself, without the semicircle, must raise a flag
        let report =
            atom_scan_transform(&[0.0, 0.5], |z| cauchy_transform(&d0, z), AtomScanOptions::default()).unwrap();
        assert_eq!(report.flags, vec![0]);
        assert!((report.entries[0].estimates[2] - 1.0).abs() < 1e-12);
    }
}
