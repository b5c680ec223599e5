//! Scenario pipelines.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use freelab_core::field::{FieldSampler, SamplerOptions, SpectralDensity2D};
use freelab_core::matrix::{
    build_diagonal, build_gbar, build_wigner, eigenvalues, esd_moments, EmpiricalSpectrum, Histogram, SpectrumSource,
    DEFAULT_BINS,
};
use freelab_core::measure::{ks_distance, semicircle_density, GridDensity, MeasureRep};
use freelab_core::nc::{add_conv_moments, mult_conv_moments, nice_rational, MomentSequence};
use freelab_core::par;
use freelab_core::stieltjes::{atom_scan, density_of_plus_semicircle, plus_semicircle_grid, DensityProfile};

use crate::config::{unit_density, ScenarioConfig, ScenarioId, Tolerances};
use crate::manifest::{
    emit_plot_data, AtomScanSummary, CriterionResult, HistogramRecord, KsRecord, ManifestError, MomentRow, MomentTable,
    OverlayRecord, PlotKind, ReplicateSeed, RunManifest, RunStatus, Timing,
};
use crate::RunError;

/// Margin added on each side of the support when tabulating densities.
const GRID_PAD: f64 = 0.5;
/// Fraction of `ess inf (f + fᵀ) / 2` used as the shift when none is given.
const SHIFT_MARGIN: f64 = 0.95;
/// Highest moment order that counts towards pass or fail.
const MAX_REQUIRED_MOMENT: usize = 6;

/// Runs one scenario, writing `manifest.json` (first with status
/// `running`) and its CSV artifacts under the output directory.
///
/// Failures are recorded in the returned manifest rather than returned;
/// see [`RunManifest::exit_code`].
pub fn run_scenario(config: &ScenarioConfig) -> RunManifest {
    let dir = config.output_dir();
    let mut manifest = RunManifest::new(config.clone());
    manifest.seeds =
        (0..config.replicates as u64).map(|replicate| ReplicateSeed { replicate, seed: config.seed }).collect();
    if let Err(e) = manifest.write(&dir) {
        return fail(manifest, e);
    }
    let outcome = config.validate().and_then(|()| {
        let mut run = Run { cfg: config, tol: config.effective_tolerances(), m: &mut manifest, dir: &dir };
        run.execute()
    });
    manifest = match outcome {
        Ok(()) => {
            manifest.status =
                if manifest.criteria.iter().all(|c| c.passed) { RunStatus::Passed } else { RunStatus::Failed };
            manifest
        }
        Err(e) => fail(manifest, e),
    };
    for kind in [PlotKind::Histogram, PlotKind::DensityOverlay, PlotKind::MomentTable] {
        match emit_plot_data(&manifest, kind, &dir) {
            Ok(_) | Err(RunError::NotFound(_)) => {}
            Err(e) => return finish(fail(manifest, e), &dir),
        }
    }
    finish(manifest, &dir)
}

fn fail(mut m: RunManifest, e: RunError) -> RunManifest {
    m.status = RunStatus::Error;
    m.error = Some(ManifestError { code: e.code(), kind: e.kind().into(), message: e.to_string() });
    m
}

fn finish(m: RunManifest, dir: &Path) -> RunManifest {
    match m.write(dir) {
        Ok(_) => m,
        Err(e) if m.error.is_none() => fail(m, e),
        Err(_) => m,
    }
}

struct Run<'a> {
    cfg: &'a ScenarioConfig,
    tol: Tolerances,
    m: &'a mut RunManifest,
    dir: &'a Path,
}

/// Where the matrices of an ensemble come from.
enum Ensemble<'a> {
    Wigner,
    Field(&'a FieldSampler),
    /// Wigner matrix plus a diagonal with entries drawn from the measure.
    WignerPlusDiagonal(&'a MeasureRep),
}

impl Run<'_> {
    fn execute(&mut self) -> Result<(), RunError> {
        match self.cfg.scenario {
            ScenarioId::WignerSanity => self.wigner_sanity(),
            ScenarioId::Lemma1 => self.lemma1(),
            ScenarioId::PropositionSumMult => self.proposition(),
            ScenarioId::Fact3Separable => self.fact3(),
            ScenarioId::Fact5Symmetrize => self.fact5(),
            ScenarioId::Fact1Freeness => self.fact1(),
            ScenarioId::Theorem2Smoothness => self.theorem2(),
        }
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T, RunError>) -> Result<T, RunError> {
        let start = Instant::now();
        let out = f();
        self.m.timings.push(Timing { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn check(&mut self, name: &str, value: f64, threshold: f64, detail: impl Into<String>) {
        self.m.criteria.push(CriterionResult {
            name: name.into(),
            passed: value.is_finite() && value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        });
    }

    fn ks(&mut self, name: &str, value: f64, threshold: f64) {
        self.m.ks.push(KsRecord { name: name.into(), value, threshold });
        self.check(name, value, threshold, "Kolmogorov-Smirnov distance");
    }

    fn fact(&mut self, name: &str, value: f64) {
        self.m.facts.push((name.into(), value));
    }

    fn sampler(&mut self, f: &SpectralDensity2D, label: &str) -> Result<FieldSampler, RunError> {
        let opts = SamplerOptions { approx_degree: self.cfg.approx_degree };
        let s = FieldSampler::new(f, self.cfg.n, opts)?;
        self.fact(&format!("{label}.period"), s.period() as f64);
        self.fact(&format!("{label}.degree"), s.degree() as f64);
        self.fact(&format!("{label}.clamped"), s.clamped() as f64);
        Ok(s)
    }

    fn spectra(&mut self, ensemble: Ensemble<'_>, label: &str) -> Result<Vec<EmpiricalSpectrum>, RunError> {
        let (n, seed) = (self.cfg.n, self.cfg.seed);
        let ensemble = &ensemble;
        let start = Instant::now();
        let out = par::map_indexed(self.cfg.replicates, |r| -> Result<EmpiricalSpectrum, RunError> {
            let r = r as u64;
            let matrix = match ensemble {
                Ensemble::Wigner => build_wigner(n, seed, r)?,
                Ensemble::Field(s) => build_gbar(&s.sample(seed, r)),
                Ensemble::WignerPlusDiagonal(mu) => build_wigner(n, seed, r)?.add(&build_diagonal(mu, n, seed, r)?)?,
            };
            let source = SpectrumSource { ensemble: label.into(), seed, replicate: r, n };
            Ok(eigenvalues(&matrix, source)?)
        })
        .into_iter()
        .collect();
        self.m.timings.push(Timing { stage: format!("{label}.spectra"), seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn histogram(&mut self, name: &str, pooled: &MeasureRep) -> Result<Histogram, RunError> {
        let MeasureRep::Empirical(e) = pooled else {
            unreachable!("pooled spectra are empirical");
        };
        let h = Histogram::new(e.values(), DEFAULT_BINS)?;
        self.m.histograms.push(HistogramRecord {
            name: name.into(),
            edges: h.edges.clone(),
            density: h.density.clone(),
        });
        Ok(h)
    }

    fn overlay(&mut self, name: &str, h: &Histogram, density: impl Fn(f64) -> f64) {
        let x = h.centers();
        let density = x.iter().map(|&v| density(v)).collect();
        self.m.overlays.push(OverlayRecord { name: name.into(), x, empirical: h.density.clone(), density });
    }

    /// Adds a moment table; orders up to [`MAX_REQUIRED_MOMENT`] become
    /// criteria when `required` is set.
    fn moments(
        &mut self,
        name: &str,
        per_replicate: &[Vec<f64>],
        exact: &MomentSequence,
        required: bool,
    ) -> Result<(), RunError> {
        let rows = moment_rows(per_replicate, exact, &self.tol)?;
        if required {
            for r in rows.iter().filter(|r| r.k <= MAX_REQUIRED_MOMENT) {
                let detail = format!("Monte Carlo {} vs exact {}", r.monte_carlo, r.exact);
                self.check(&format!("{name}.m{}", r.k), r.rel_err, r.tolerance, detail);
            }
        }
        self.m.moment_tables.push(MomentTable { name: name.into(), rows });
        Ok(())
    }

    fn esd_table(&self, spectra: &[EmpiricalSpectrum]) -> Result<Vec<Vec<f64>>, RunError> {
        spectra.iter().map(|s| esd_moments(s, self.cfg.kmax).map_err(RunError::from)).collect()
    }

    /// Exact moments of `μ` up to the order needed by the tables.
    fn measure_moments(&self) -> Result<MomentSequence, RunError> {
        self.cfg
            .measure
            .as_ref()
            .ok_or_else(|| RunError::Validation(format!("{} needs a measure", self.cfg.scenario)))?
            .moments(self.order())
    }

    fn order(&self) -> usize {
        self.cfg.kmax.max(2)
    }

    fn semicircle(&self, t: f64) -> MomentSequence {
        MomentSequence::semicircle(&nice_rational(t), self.order())
    }

    fn wigner_sanity(&mut self) -> Result<(), RunError> {
        let spectra = self.spectra(Ensemble::Wigner, "wigner")?;
        let sc = MeasureRep::semicircle(1.0)?;
        let ks = spectra.iter().map(|s| ks_distance(&s.to_measure(), &sc)).sum::<f64>() / spectra.len() as f64;
        self.ks("wigner.ks_mean", ks, self.tol.ks);
        let table = self.esd_table(&spectra)?;
        self.moments("wigner", &table, &self.semicircle(1.0), false)?;
        let rows = self.m.moment_tables[0].rows.clone();
        if let Some(r) = rows.get(1) {
            self.check("wigner.m2", r.rel_err, self.tol.moment_low, format!("{} vs {}", r.monte_carlo, r.exact));
        }
        if let Some(r) = rows.get(3) {
            self.check("wigner.m4", r.rel_err, self.tol.moment_high, format!("{} vs {}", r.monte_carlo, r.exact));
        }
        let pooled = EmpiricalSpectrum::pool(&spectra)?;
        let h = self.histogram("wigner", &pooled)?;
        self.overlay("wigner_vs_semicircle", &h, |x| semicircle_density(1.0, x).unwrap_or(0.0));

        let white = SpectralDensity2D::constant(unit_density())?;
        let sampler = self.sampler(&white, "white")?;
        let spectra = self.spectra(Ensemble::Field(&sampler), "white")?;
        let ks = spectra.iter().map(|s| ks_distance(&s.to_measure(), &sc)).sum::<f64>() / spectra.len() as f64;
        self.ks("white_field.ks_mean", ks, self.tol.ks_field);
        let table = self.esd_table(&spectra)?;
        self.moments("white_field", &table, &self.semicircle(1.0), false)
    }

    fn lemma1(&mut self) -> Result<(), RunError> {
        let alpha = self.cfg.alpha.expect("validated");
        let f = self.cfg.density()?;
        let shifted = SpectralDensity2D::shifted(f.clone(), alpha)?;
        let t = 8.0 * PI * PI * alpha;
        self.fact("semicircle_variance", t);
        let base_sampler = self.sampler(&f, "base")?;
        let shift_sampler = self.sampler(&shifted, "shifted")?;
        let base = self.spectra(Ensemble::Field(&base_sampler), "base")?;
        let shift = self.spectra(Ensemble::Field(&shift_sampler), "shifted")?;

        let exact_base = mult_conv_moments(&self.measure_moments()?, &self.semicircle(1.0), self.order())?;
        let exact_shift = add_conv_moments(&exact_base, &self.semicircle(t), self.order())?;
        let shift_table = self.esd_table(&shift)?;
        let base_table = self.esd_table(&base)?;
        self.moments("shifted", &shift_table, &exact_shift, true)?;
        self.moments("base", &base_table, &exact_base, false)?;

        let kappa2 = |m: &Vec<f64>| m[1] - m[0] * m[0];
        let gaps: Vec<f64> = shift_table.iter().zip(&base_table).map(|(s, b)| kappa2(s) - kappa2(b)).collect();
        let gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
        self.fact("kappa2_gap", gap);
        self.check("kappa2_gap", (gap - t).abs() / t, self.tol.cumulant_gap, format!("gap {gap} vs {t}"));
        let pooled = EmpiricalSpectrum::pool(&shift)?;
        self.histogram("shifted", &pooled)?;
        Ok(())
    }

    fn fact3(&mut self) -> Result<(), RunError> {
        let f = self.cfg.density()?;
        let sampler = self.sampler(&f, "separable")?;
        let spectra = self.spectra(Ensemble::Field(&sampler), "separable")?;
        let exact = mult_conv_moments(&self.measure_moments()?, &self.semicircle(1.0), self.order())?;
        let table = self.esd_table(&spectra)?;
        self.moments("separable", &table, &exact, true)?;
        let pooled = EmpiricalSpectrum::pool(&spectra)?;
        self.histogram("separable", &pooled)?;
        Ok(())
    }

    fn proposition(&mut self) -> Result<(), RunError> {
        let delta = self.cfg.delta.expect("validated");
        let alpha = delta * delta / (8.0 * PI * PI);
        let t = delta * delta;
        self.fact("alpha", alpha);
        let f = self.cfg.density()?;
        // f ≥ δ²/(8π²) everywhere, so f − α is a density
        let h = SpectralDensity2D::TrigPoly(f.to_trig_poly(self.cfg.approx_degree)?.add_constant(-alpha)?);
        let full = SpectralDensity2D::shifted(h.clone(), alpha)?;
        let h_sampler = self.sampler(&h, "eta")?;
        let full_sampler = self.sampler(&full, "full")?;
        let eta = self.spectra(Ensemble::Field(&h_sampler), "eta")?;
        let nu = self.spectra(Ensemble::Field(&full_sampler), "full")?;

        let exact = mult_conv_moments(&self.measure_moments()?, &self.semicircle(1.0), self.order())?;
        let nu_table = self.esd_table(&nu)?;
        self.moments("full", &nu_table, &exact, true)?;
        let eta_table = self.esd_table(&eta)?;
        let eta_mean = MomentSequence::approx(column_means(&eta_table))?;
        let via_eta = add_conv_moments(&eta_mean, &self.semicircle(t).truncate(self.cfg.kmax), self.cfg.kmax)?;
        self.moments("eta_plus_semicircle", &[via_eta.to_f64()], &exact, true)?;

        self.smooth_part(&eta[0], &nu, t, "proposition")
    }

    fn fact5(&mut self) -> Result<(), RunError> {
        let f = self.cfg.density()?;
        let g = f.symmetrize();
        let f_sampler = self.sampler(&f, "original")?;
        let g_sampler = self.sampler(&g, "symmetrized")?;
        let a = EmpiricalSpectrum::pool(&self.spectra(Ensemble::Field(&f_sampler), "original")?)?;
        let b = EmpiricalSpectrum::pool(&self.spectra(Ensemble::Field(&g_sampler), "symmetrized")?)?;
        self.ks("symmetrize.ks", ks_distance(&a, &b), self.tol.ks);
        self.histogram("original", &a)?;
        self.histogram("symmetrized", &b)?;
        Ok(())
    }

    fn fact1(&mut self) -> Result<(), RunError> {
        let mu = self.cfg.measure()?;
        let spectra = self.spectra(Ensemble::WignerPlusDiagonal(&mu), "wigner_plus_diagonal")?;
        let exact = add_conv_moments(&self.measure_moments()?, &self.semicircle(1.0), self.order())?;
        let table = self.esd_table(&spectra)?;
        self.moments("wigner_plus_diagonal", &table, &exact, true)?;
        let pooled = EmpiricalSpectrum::pool(&spectra)?;
        self.histogram("wigner_plus_diagonal", &pooled)?;
        Ok(())
    }

    fn theorem2(&mut self) -> Result<(), RunError> {
        let f = self.cfg.density()?;
        let floor = f.ess_inf_check();
        self.fact("ess_inf", floor);
        if floor <= 0.0 {
            return Err(RunError::Validation("ess inf of f + f^T must be positive".into()));
        }
        let alpha = match self.cfg.alpha {
            None => SHIFT_MARGIN * floor / 2.0,
            Some(a) if a > 0.0 && a < floor / 2.0 => a,
            Some(a) => return Err(RunError::Validation(format!("alpha must lie in (0, {}), got {a}", floor / 2.0))),
        };
        self.fact("alpha", alpha);
        let t = 8.0 * PI * PI * alpha;
        let g = f.symmetrize();
        let h = SpectralDensity2D::TrigPoly(g.to_trig_poly(self.cfg.approx_degree)?.add_constant(-alpha)?);
        let f_sampler = self.sampler(&f, "original")?;
        let h_sampler = self.sampler(&h, "eta")?;
        let nu = self.spectra(Ensemble::Field(&f_sampler), "original")?;
        let eta = self.spectra(Ensemble::Field(&h_sampler), "eta")?;

        let eta_mean = MomentSequence::approx(column_means(&self.esd_table(&eta)?))?;
        let via_eta = add_conv_moments(&eta_mean, &self.semicircle(t).truncate(self.cfg.kmax), self.cfg.kmax)?;
        let nu_table = self.esd_table(&nu)?;
        self.moments("original_vs_eta_plus_semicircle", &nu_table, &via_eta, true)?;

        self.smooth_part(&eta[0], &nu, t, "theorem2")
    }

    /// Density of `η̂ ⊞ μ_s(t)`: mass, finiteness, atom scan and the KS
    /// distance to the spectra it should describe.
    fn smooth_part(
        &mut self,
        eta: &EmpiricalSpectrum,
        target: &[EmpiricalSpectrum],
        t: f64,
        name: &str,
    ) -> Result<(), RunError> {
        let eta = eta.to_measure();
        let grid = plus_semicircle_grid(&eta, t, self.cfg.grid_points, GRID_PAD);
        let eps = self.cfg.eps;
        let profile = self.timed("density", || Ok(density_of_plus_semicircle(&eta, t, &grid, eps)?))?;
        self.write_profile(&profile)?;
        let mass = profile.total_mass();
        self.fact("density.mass", mass);
        self.fact("density.max_residual", profile.residual.iter().copied().fold(0.0, f64::max));
        self.check(&format!("{name}.mass"), (mass - 1.0).abs(), self.tol.mass, format!("mass {mass}"));
        let bad = profile.density.iter().filter(|p| !p.is_finite()).count();
        self.check(&format!("{name}.finite"), bad as f64, 0.0, "grid points with a non-finite density");

        let scan = self.timed("atom_scan", || Ok(atom_scan(&profile, &eta, t)?))?;
        let flagged: Vec<f64> = scan.flags.iter().map(|&i| profile.x[i]).collect();
        self.check(&format!("{name}.atom_flags"), flagged.len() as f64, 0.0, "grid points flagged as atoms");
        self.m.atom_scan = Some(AtomScanSummary {
            points: scan.entries.len(),
            flagged,
            max_candidate_mass: scan.max_candidate_mass(),
        });

        let pooled = EmpiricalSpectrum::pool(target)?;
        let tabulated =
            MeasureRep::GridDensity(GridDensity::new(grid[0], grid[grid.len() - 1], profile.density.clone())?);
        self.ks(&format!("{name}.ks"), ks_distance(&pooled, &tabulated), self.tol.ks_field);
        let h = self.histogram(name, &pooled)?;
        self.overlay(name, &h, |x| interpolate(&profile.x, &profile.density, x));
        Ok(())
    }

    fn write_profile(&self, profile: &DensityProfile) -> Result<(), RunError> {
        let path = self.dir.join("density_profile.csv");
        let file = fs::File::create(&path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        profile.write_csv(std::io::BufWriter::new(file)).map_err(|e| RunError::Io(e.to_string()))
    }
}

fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    let k = rows[0].len();
    (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect()
}

/// Rows `k = 1..` of a moment table. The error of `m_k` is relative to
/// `max(|m_k|, m_2^{k/2})` of the exact sequence.
pub fn moment_rows(
    per_replicate: &[Vec<f64>],
    exact: &MomentSequence,
    tol: &Tolerances,
) -> Result<Vec<MomentRow>, RunError> {
    let kmax = per_replicate.first().map_or(0, Vec::len);
    if per_replicate.is_empty() || per_replicate.iter().any(|r| r.len() != kmax) || exact.len() < kmax {
        return Err(RunError::Validation("moment table dimensions disagree".into()));
    }
    let values = exact.to_f64();
    let m2 = values.get(1).copied().unwrap_or(0.0).max(0.0);
    let mean = column_means(per_replicate);
    let r = per_replicate.len() as f64;
    Ok((1..=kmax)
        .map(|k| {
            let e = values[k - 1];
            let scale = e.abs().max(m2.powf(k as f64 / 2.0));
            let err = (mean[k - 1] - e).abs();
            let std_err = if r > 1.0 {
                let var = per_replicate.iter().map(|row| (row[k - 1] - mean[k - 1]).powi(2)).sum::<f64>() / (r - 1.0);
                (var / r).sqrt()
            } else {
                0.0
            };
            MomentRow {
                k,
                monte_carlo: mean[k - 1],
                exact: exact.entry_string(k),
                exact_value: e,
                rel_err: if scale > 0.0 { err / scale } else { err },
                std_err,
                tolerance: tol.moment(k),
            }
        })
        .collect())
}

/// Linear interpolation on an increasing grid, zero outside it.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let s = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[i - 1] + s * (ys[i] - ys[i - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_rows_scale_vanishing_targets() {
        let exact = MomentSequence::semicircle(&nice_rational(1.0), 4);
        let rows = moment_rows(&[vec![0.1, 1.0, 0.0, 2.2], vec![-0.1, 1.0, 0.0, 1.8]], &exact, &Tolerances::default())
            .unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].rel_err, 0.0);
        assert!((rows[0].std_err - 0.1).abs() < 1e-15);
        assert_eq!(rows[3].exact, "2");
        assert_eq!(rows[3].tolerance, 0.05);
        assert!(moment_rows(&[vec![1.0; 5]], &exact, &Tolerances::default()).is_err());
    }

    #[test]
    fn interpolation() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 2.0, 0.0];
        assert_eq!(interpolate(&xs, &ys, 0.5), 1.0);
        assert_eq!(interpolate(&xs, &ys, 2.0), 0.0);
        assert_eq!(interpolate(&xs, &ys, 1.0), 2.0);
        assert_eq!(interpolate(&xs, &ys, -1.0), 0.0);
    }
}
