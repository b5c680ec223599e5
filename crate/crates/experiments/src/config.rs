//! Scenario configuration: JSON documents layered over per-scenario defaults.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use freelab_core::field::{SpectralDensity2D, TrigPoly, DEFAULT_APPROX_DEGREE};
use freelab_core::matrix::{MAX_EIGEN_N, MAX_ESD_MOMENT};
use freelab_core::measure::{GridDensity, MeasureRep, QuantileFunctionR};
use freelab_core::nc::{nice_rational, MomentSequence};

use crate::RunError;

/// Environment variable naming the default root for run outputs.
pub const OUT_ROOT_ENV: &str = "FREELAB_OUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    WignerSanity,
    Lemma1,
    PropositionSumMult,
    Fact3Separable,
    Fact5Symmetrize,
    Fact1Freeness,
    Theorem2Smoothness,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::WignerSanity,
        ScenarioId::Lemma1,
        ScenarioId::PropositionSumMult,
        ScenarioId::Fact3Separable,
        ScenarioId::Fact5Symmetrize,
        ScenarioId::Fact1Freeness,
        ScenarioId::Theorem2Smoothness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::WignerSanity => "wigner_sanity",
            ScenarioId::Lemma1 => "lemma1",
            ScenarioId::PropositionSumMult => "proposition_sum_mult",
            ScenarioId::Fact3Separable => "fact3_separable",
            ScenarioId::Fact5Symmetrize => "fact5_symmetrize",
            ScenarioId::Fact1Freeness => "fact1_freeness",
            ScenarioId::Theorem2Smoothness => "theorem2_smoothness",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = RunError;
    fn from_str(s: &str) -> Result<Self, RunError> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| RunError::NotFound(format!("unknown scenario {s:?}")))
    }
}

/// A probability measure `μ` given in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    PointMass {
        at: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    /// `(location, weight)` pairs.
    Atomic {
        atoms: Vec<(f64, f64)>,
    },
    Semicircle {
        t: f64,
    },
    /// Density tabulated on a uniform grid of `[lo, hi]`.
    Grid {
        lo: f64,
        hi: f64,
        values: Vec<f64>,
    },
}

impl MeasureSpec {
    pub fn measure(&self) -> Result<MeasureRep, RunError> {
        let m = match self {
            MeasureSpec::PointMass { at } => MeasureRep::point_mass(*at),
            MeasureSpec::Uniform { a, b } => MeasureRep::uniform(*a, *b),
            MeasureSpec::Atomic { atoms } => MeasureRep::atomic(atoms.clone()),
            MeasureSpec::Semicircle { t } => MeasureRep::semicircle(*t),
            MeasureSpec::Grid { lo, hi, values } => {
                GridDensity::new(*lo, *hi, values.clone()).map(MeasureRep::GridDensity)
            }
        };
        m.map_err(|e| RunError::Validation(format!("measure: {e}")))
    }

    /// Moments `m_1..m_k`, exact whenever the parameters are read as
    /// short rationals.
    pub fn moments(&self, k: usize) -> Result<MomentSequence, RunError> {
        Ok(match self {
            MeasureSpec::PointMass { at } => MomentSequence::point_mass(&nice_rational(*at), k),
            MeasureSpec::Uniform { a, b } => MomentSequence::uniform(&nice_rational(*a), &nice_rational(*b), k),
            MeasureSpec::Atomic { atoms } => {
                let exact: Vec<(BigRational, BigRational)> =
                    atoms.iter().map(|&(x, w)| (nice_rational(x), nice_rational(w))).collect();
                let total: BigRational = exact.iter().map(|(_, w)| w.clone()).sum();
                if total != BigRational::from_integer(BigInt::from(1)) {
                    MomentSequence::from_measure(&self.measure()?, k).map_err(RunError::Numeric)?
                } else {
                    MomentSequence::atomic(&exact, k)
                }
            }
            MeasureSpec::Semicircle { t } => MomentSequence::semicircle(&nice_rational(*t), k),
            MeasureSpec::Grid { .. } => MomentSequence::from_measure(&self.measure()?, k).map_err(RunError::Numeric)?,
        })
    }
}

/// A spectral density `f` on `[−π, π]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    /// `f ≡ value`.
    Constant { value: f64 },
    /// Cosine terms `(j, k, a)` meaning `a_{j,k} = a_{−j,−k} = a`.
    Terms { degree: usize, terms: Vec<(i64, i64, f64)> },
    /// `r ⊗ r` for the scenario measure `μ`.
    SeparableFromMeasure,
    /// Any density in its full serialized form.
    Explicit { density: SpectralDensity2D },
}

impl DensitySpec {
    pub fn density(&self, mu: Option<&MeasureRep>) -> Result<SpectralDensity2D, RunError> {
        let v = |e: freelab_core::Error| RunError::Validation(format!("density: {e}"));
        match self {
            DensitySpec::Constant { value } => SpectralDensity2D::constant(*value).map_err(v),
            DensitySpec::Terms { degree, terms } => {
                TrigPoly::from_terms(*degree, terms).map(SpectralDensity2D::TrigPoly).map_err(v)
            }
            DensitySpec::SeparableFromMeasure => {
                let mu = mu.ok_or_else(|| RunError::Validation("separable density needs a measure".into()))?;
                SpectralDensity2D::separable(&QuantileFunctionR::new(mu.clone())).map_err(v)
            }
            DensitySpec::Explicit { density } => {
                density.validate().map_err(v)?;
                Ok(density.clone())
            }
        }
    }
}

/// Acceptance thresholds. Moment errors are relative to
/// `max(|m_k|, m_2^{k/2})` so that vanishing targets stay meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Moments of order at most 4.
    pub moment_low: f64,
    /// Moments of order 5 and 6.
    pub moment_high: f64,
    /// Higher moments, reported but not required by default.
    pub moment_rest: f64,
    /// KS distance for Wigner spectra and between spectra of one limit.
    pub ks: f64,
    /// KS distance between a field-driven spectrum and its limit.
    pub ks_field: f64,
    /// Relative error of the second-cumulant gap between ensembles.
    pub cumulant_gap: f64,
    /// Absolute deviation of a computed density's mass from one.
    pub mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            moment_low: 0.05,
            moment_high: 0.10,
            moment_rest: 0.25,
            ks: 0.05,
            ks_field: 0.06,
            cumulant_gap: 0.07,
            mass: 0.02,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, s: f64) -> Self {
        Tolerances {
            moment_low: self.moment_low * s,
            moment_high: self.moment_high * s,
            moment_rest: self.moment_rest * s,
            ks: self.ks * s,
            ks_field: self.ks_field * s,
            cumulant_gap: self.cumulant_gap * s,
            mass: self.mass * s,
        }
    }

    pub fn moment(&self, k: usize) -> f64 {
        match k {
            0..=4 => self.moment_low,
            5 | 6 => self.moment_high,
            _ => self.moment_rest,
        }
    }
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    /// Matrix order `N`.
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub kmax: usize,
    pub tolerances: Tolerances,
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
    /// Degree used to replace non-band-limited densities.
    pub approx_degree: usize,
    /// Points of the grid on which computed densities are tabulated.
    pub grid_points: usize,
    /// Distance from the real axis for density recovery.
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// `1 / (8π²)`, the density giving unit-variance off-diagonal entries.
pub fn unit_density() -> f64 {
    1.0 / (8.0 * PI * PI)
}

/// Asymmetric even polynomial with `∫∫ f = 1` and `f + fᵀ ≥ c > 0`.
pub fn tilted_density() -> DensitySpec {
    let c = unit_density();
    DensitySpec::Terms { degree: 2, terms: vec![(0, 0, 2.0 * c), (1, 2, c / 2.0), (1, 0, c / 4.0)] }
}

impl ScenarioConfig {
    pub fn default_for(scenario: ScenarioId) -> Self {
        let base = ScenarioConfig {
            scenario,
            n: 1024,
            replicates: 5,
            seed: 20_240_601,
            measure: None,
            density: None,
            alpha: None,
            delta: None,
            kmax: 4,
            tolerances: Tolerances::default(),
            tolerance_scale: 1.0,
            approx_degree: DEFAULT_APPROX_DEGREE,
            grid_points: 801,
            eps: 1e-4,
            out: None,
        };
        let uniform = Some(MeasureSpec::Uniform { a: 1.0, b: 2.0 });
        match scenario {
            ScenarioId::WignerSanity => base,
            ScenarioId::Lemma1 => ScenarioConfig {
                n: 2000,
                replicates: 10,
                kmax: 6,
                measure: uniform,
                density: Some(DensitySpec::SeparableFromMeasure),
                alpha: Some(unit_density()),
                ..base
            },
            ScenarioId::PropositionSumMult => ScenarioConfig {
                n: 2000,
                replicates: 4,
                kmax: 4,
                measure: uniform,
                density: Some(DensitySpec::SeparableFromMeasure),
                delta: Some(1.0),
                ..base
            },
            ScenarioId::Fact3Separable => ScenarioConfig {
                n: 2000,
                replicates: 10,
                kmax: 6,
                measure: uniform,
                density: Some(DensitySpec::SeparableFromMeasure),
                ..base
            },
            ScenarioId::Fact5Symmetrize => ScenarioConfig { replicates: 2, density: Some(tilted_density()), ..base },
            ScenarioId::Fact1Freeness => ScenarioConfig {
                replicates: 10,
                measure: Some(MeasureSpec::Atomic { atoms: vec![(-1.0, 0.5), (1.0, 0.5)] }),
                ..base
            },
            ScenarioId::Theorem2Smoothness => ScenarioConfig { replicates: 2, density: Some(tilted_density()), ..base },
        }
    }

    /// Parses a JSON document, filling absent fields from the defaults of
    /// its scenario (or of `fallback` when the document names none).
    pub fn from_json(text: &str, fallback: Option<ScenarioId>) -> Result<Self, RunError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| RunError::Validation(format!("config: {e}")))?;
        let Value::Object(fields) = doc else {
            return Err(RunError::Validation("config must be a JSON object".into()));
        };
        let scenario = match fields.get("scenario") {
            Some(v) => serde_json::from_value::<ScenarioId>(v.clone())
                .map_err(|e| RunError::Validation(format!("config: scenario: {e}")))?,
            None => fallback.ok_or_else(|| RunError::Validation("config does not name a scenario".into()))?,
        };
        let mut merged = serde_json::to_value(ScenarioConfig::default_for(scenario)).expect("defaults serialize");
        let target = merged.as_object_mut().expect("config is an object");
        for (k, v) in fields {
            match (k.as_str(), target.get_mut("tolerances"), v) {
                ("tolerances", Some(Value::Object(t)), Value::Object(over)) => t.extend(over),
                (_, _, v) => {
                    target.insert(k, v);
                }
            }
        }
        target.insert("scenario".into(), serde_json::to_value(scenario).expect("id serializes"));
        serde_json::from_value(merged).map_err(|e| RunError::Validation(format!("config: {e}")))
    }

    pub fn from_file(path: &Path, fallback: Option<ScenarioId>) -> Result<Self, RunError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
        ScenarioConfig::from_json(&text, fallback)
    }

    /// Tolerances after applying [`tolerance_scale`](Self::tolerance_scale).
    pub fn effective_tolerances(&self) -> Tolerances {
        self.tolerances.scaled(self.tolerance_scale)
    }

    /// Output directory: the configured one, else `<root>/<scenario>` with
    /// the root taken from [`OUT_ROOT_ENV`] or `freelab-runs`.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(out) = &self.out {
            return out.clone();
        }
        let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("freelab-runs"));
        root.join(self.scenario.as_str())
    }

    pub fn measure(&self) -> Result<MeasureRep, RunError> {
        self.measure
            .as_ref()
            .ok_or_else(|| RunError::Validation(format!("{} needs a measure", self.scenario)))?
            .measure()
    }

    pub fn density(&self) -> Result<SpectralDensity2D, RunError> {
        let mu = self.measure.as_ref().map(|m| m.measure()).transpose()?;
        self.density
            .as_ref()
            .ok_or_else(|| RunError::Validation(format!("{} needs a density", self.scenario)))?
            .density(mu.as_ref())
    }

    /// Checks ranges and scenario hypotheses.
    pub fn validate(&self) -> Result<(), RunError> {
        let fail = |m: String| Err(RunError::Validation(m));
        if self.n < 16 || self.n > MAX_EIGEN_N {
            return fail(format!("n must lie in [16, {MAX_EIGEN_N}], got {}", self.n));
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.kmax == 0 || self.kmax > MAX_ESD_MOMENT {
            return fail(format!("kmax must lie in [1, {MAX_ESD_MOMENT}], got {}", self.kmax));
        }
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return fail(format!("tolerance scale must be positive, got {}", self.tolerance_scale));
        }
        if !(1e-6..=1e-1).contains(&self.eps) {
            return fail(format!("eps must lie in [1e-6, 1e-1], got {}", self.eps));
        }
        if self.grid_points < 16 {
            return fail("grid_points must be at least 16".into());
        }
        if self.approx_degree == 0 || self.approx_degree > 512 {
            return fail(format!("approx_degree must lie in [1, 512], got {}", self.approx_degree));
        }
        match self.scenario {
            ScenarioId::WignerSanity => {}
            ScenarioId::Fact1Freeness => {
                self.measure()?;
            }
            ScenarioId::Fact5Symmetrize | ScenarioId::Theorem2Smoothness => {
                self.density()?;
            }
            ScenarioId::Lemma1 | ScenarioId::Fact3Separable | ScenarioId::PropositionSumMult => {
                let mu = self.measure()?;
                if mu.support().0 < 0.0 {
                    return fail("the measure must live on [0, inf)".into());
                }
                self.density()?;
                if self.scenario == ScenarioId::Lemma1 {
                    match self.alpha {
                        Some(a) if a > 0.0 && a.is_finite() => {}
                        other => return fail(format!("lemma1 needs a positive alpha, got {other:?}")),
                    }
                }
                if self.scenario == ScenarioId::PropositionSumMult {
                    let delta = match self.delta {
                        Some(d) if d > 0.0 && d.is_finite() => d,
                        other => return fail(format!("proposition needs a positive delta, got {other:?}")),
                    };
                    if !QuantileFunctionR::new(mu.clone()).satisfies_lower_bound(delta) {
                        return fail(format!("the measure gives mass below delta = {delta}"));
                    }
                    if !mu.mean().is_finite() {
                        return fail("the measure must have a finite mean".into());
                    }
                    if self.density != Some(DensitySpec::SeparableFromMeasure) {
                        return fail("proposition uses the separable density of its measure".into());
                    }
                }
            }
        }
        Ok(())
    }
}

/// One entry of [`list_scenarios`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub id: ScenarioId,
    pub description: &'static str,
    /// The statement the scenario checks.
    pub anchor: &'static str,
    pub required: &'static [&'static str],
}

/// Registry of the available scenarios.
pub fn list_scenarios() -> Vec<ScenarioInfo> {
    ScenarioId::ALL.into_iter().map(scenario_info).collect()
}

pub fn scenario_info(id: ScenarioId) -> ScenarioInfo {
    let (description, anchor, required): (&str, &str, &[&str]) = match id {
        ScenarioId::WignerSanity => (
            "Wigner and white-field spectra against the semicircle law",
            "Wigner semicircle law; constant spectral density gives the semicircle",
            &["n", "replicates", "seed"],
        ),
        ScenarioId::Lemma1 => (
            "Adding a constant to the spectral density adds a semicircle of variance 8 pi^2 alpha",
            "nu_{f+alpha} = nu_f boxplus semicircle(8 pi^2 alpha)",
            &["n", "replicates", "seed", "measure", "alpha"],
        ),
        ScenarioId::PropositionSumMult => (
            "mu boxtimes semicircle as eta boxplus semicircle(delta^2); density and atom scan",
            "mu([delta, inf)) = 1 implies mu boxtimes mu_s = eta boxplus mu_s(delta^2), hence absolutely continuous",
            &["n", "replicates", "seed", "measure", "delta"],
        ),
        ScenarioId::Fact3Separable => (
            "Separable density r x r gives mu boxtimes semicircle",
            "nu_{r x r} is the free multiplicative convolution of the law of 2^{3/2} pi r(U) with the semicircle",
            &["n", "replicates", "seed", "measure"],
        ),
        ScenarioId::Fact5Symmetrize => (
            "A density and its symmetrization give the same spectrum",
            "nu_f = nu_g for g(x, y) = (f(x, y) + f(y, x)) / 2",
            &["n", "replicates", "seed", "density"],
        ),
        ScenarioId::Fact1Freeness => (
            "Wigner matrix plus independent diagonal matrix against free additive convolution",
            "asymptotic freeness of Wigner and independent deterministic matrices",
            &["n", "replicates", "seed", "measure"],
        ),
        ScenarioId::Theorem2Smoothness => (
            "Positive essential infimum of f + f^T: spectrum as eta boxplus semicircle with a density",
            "ess inf [f(x, y) + f(y, x)] > 0 implies nu_f absolutely continuous",
            &["n", "replicates", "seed", "density"],
        ),
    };
    ScenarioInfo { id, description, anchor, required }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.as_str().parse::<ScenarioId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
        }
        assert!(matches!("nope".parse::<ScenarioId>(), Err(RunError::NotFound(_))));
    }

    #[test]
    fn defaults_validate() {
        for id in ScenarioId::ALL {
            ScenarioConfig::default_for(id).validate().unwrap();
        }
    }

    #[test]
    fn json_overrides_defaults() {
        let c = ScenarioConfig::from_json(r#"{"scenario":"lemma1","n":64,"tolerances":{"ks":0.1}}"#, None).unwrap();
        assert_eq!(c.n, 64);
        assert_eq!(c.replicates, 10);
        assert_eq!(c.tolerances.ks, 0.1);
        assert_eq!(c.tolerances.moment_low, 0.05);
        assert_eq!(c.alpha, Some(unit_density()));
        let d = ScenarioConfig::from_json(r#"{"replicates":2}"#, Some(ScenarioId::WignerSanity)).unwrap();
        assert_eq!(d.replicates, 2);
        assert!(ScenarioConfig::from_json(r#"{"n":64}"#, None).is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario":"lemma1","bogus":1}"#, None).is_ok());
        let back = ScenarioConfig::from_json(&serde_json::to_string(&c).unwrap(), None).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation_catches_hypotheses() {
        let mut c = ScenarioConfig::default_for(ScenarioId::PropositionSumMult);
        c.delta = Some(1.5);
        assert!(matches!(c.validate(), Err(RunError::Validation(_))));
        let mut c = ScenarioConfig::default_for(ScenarioId::WignerSanity);
        c.n = 8;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::default_for(ScenarioId::Lemma1);
        c.alpha = Some(-1.0);
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::default_for(ScenarioId::Fact3Separable);
        c.measure = Some(MeasureSpec::Uniform { a: -1.0, b: 1.0 });
        assert!(c.validate().is_err());
    }

    #[test]
    fn exact_measure_moments() {
        let m = MeasureSpec::Uniform { a: 1.0, b: 2.0 }.moments(2).unwrap();
        assert!(m.is_exact());
        assert_eq!(m.entry_string(1), "3/2");
        assert_eq!(m.entry_string(2), "7/3");
        let p = MeasureSpec::Atomic { atoms: vec![(-1.0, 0.5), (1.0, 0.5)] }.moments(2).unwrap();
        assert_eq!(p.entry_string(1), "0");
        assert_eq!(p.entry_string(2), "1");
    }

    #[test]
    fn explicit_density_parses() {
        let text = r#"{"scenario":"fact5_symmetrize","density":{"kind":"explicit","density":
            {"kind":"shifted","alpha":0.01,"base":{"kind":"separable","r":[0.1,0.2,0.3]}}}}"#;
        let c = ScenarioConfig::from_json(text, None).unwrap();
        let SpectralDensity2D::Shifted { alpha, .. } = c.density().unwrap() else { panic!("not shifted") };
        assert_eq!(alpha, 0.01);
        let bad =
            r#"{"scenario":"fact5_symmetrize","density":{"kind":"terms","degree":1,"terms":[[0,0,0.1],[1,0,1.0]]}}"#;
        assert!(matches!(ScenarioConfig::from_json(bad, None).unwrap().validate(), Err(RunError::Validation(_))));
    }

    #[test]
    fn registry() {
        let all = list_scenarios();
        assert_eq!(all.len(), 7);
        assert!(all.iter().all(|s| !s.anchor.is_empty()));
    }
}
