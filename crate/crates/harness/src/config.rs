//! Experiment configuration, read from JSON.
//!
//! Every field has a default, so `{}` is a valid configuration. Unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tentspace::calderon::{complementary, ChiParams, TestFunction};
use tentspace::{BanachSpaceDesc, Exponent, GaussConfig, McMethod, RandomSource, ScaleGrid, SpatialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 512,
            period: 1.0,
        }
    }
}

/// Log-uniform scale nodes. `t_min` defaults to `1.5 Δy` and `t_max` to `L/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScaleSpec {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub count: usize,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        Self {
            t_min: None,
            t_max: None,
            count: 32,
        }
    }
}

/// An exponent written as a number or as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QValue {
    Number(f64),
    Text(InfTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl QValue {
    pub fn value(self) -> f64 {
        match self {
            QValue::Number(q) => q,
            QValue::Text(InfTag::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceSpec {
    pub dim: usize,
    pub q: QValue,
}

impl Default for SpaceSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            q: QValue::Number(2.0),
        }
    }
}

impl SpaceSpec {
    pub fn new(dim: usize, q: f64) -> Self {
        let q = if q.is_infinite() { QValue::Text(InfTag::Inf) } else { QValue::Number(q) };
        Self { dim, q }
    }

    pub fn desc(&self) -> Result<BanachSpaceDesc> {
        Ok(BanachSpaceDesc::new(self.dim, Exponent::from_f64(self.q.value())?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    BmoLog,
    BmoStep,
    Lacunary,
    BandlimitedRandom,
    LpRandom,
}

/// How the `d` components of an `X`-valued corpus member are built from scalar draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mixing {
    /// An independent draw per component.
    #[default]
    Independent,
    /// One scalar draw times a random vector.
    RankOne,
    /// A random complex matrix applied to `d` independent draws.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSpec {
    pub family: Family,
    pub count: usize,
    pub amplitude: f64,
    /// Member amplitudes are drawn log-uniformly from `[a/spread, a·spread]`.
    pub spread: f64,
    pub mixing: Mixing,
    /// Highest frequency (in units of `2π/L`) of the band-limited and lacunary families.
    pub band: usize,
    /// Cells per axis of the piecewise constant `lp_random` family.
    pub cells: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            family: Family::BandlimitedRandom,
            count: 10,
            amplitude: 1.0,
            spread: 1.0,
            mixing: Mixing::Independent,
            band: 16,
            cells: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiChoice {
    /// The complementary function of `ψ` built from the annulus cutoff.
    Complementary,
    /// The unit Gaussian, `∫φ = 1`.
    GaussBump,
}

/// Every tolerance used by an assertion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Monte Carlo agreement in standard errors.
    pub sigma: f64,
    pub zero: f64,
    pub monotone: f64,
    pub equivariance: f64,
    pub dilation_drift: f64,
    /// Upper bound on `max/min` of reported bands.
    pub band_ratio: f64,
    pub rank_correlation: f64,
    /// Refinement may move each band end by at most this factor.
    pub stability: f64,
    pub maximal_stability: f64,
    pub duality_slack: f64,
    pub carleson_slack: f64,
    pub fubini: f64,
    pub gamma_consistency: f64,
    /// Stored upper end of the paraproduct band; `None` records without asserting.
    pub paraproduct_baseline: Option<f64>,
    pub baseline_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            zero: 1e-10,
            monotone: 1e-12,
            equivariance: 1e-10,
            dilation_drift: 0.10,
            band_ratio: 20.0,
            rank_correlation: 0.9,
            stability: 2.0,
            maximal_stability: 1.5,
            duality_slack: 0.10,
            carleson_slack: 0.10,
            fubini: 0.01,
            gamma_consistency: 4.0,
            paraproduct_baseline: None,
            baseline_factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub suite: Option<String>,
    pub grid: GridSpec,
    pub scales: ScaleSpec,
    pub space: SpaceSpec,
    pub psi: String,
    pub phi: PhiChoice,
    /// Annulus `a < |ξ| < b` of the complementary function.
    pub chi: [f64; 2],
    pub q_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub alpha: f64,
    /// Wide aperture; `None` means `α + 10`.
    pub beta: Option<f64>,
    pub rho: f64,
    pub gamma_list: Vec<f64>,
    pub lambda_points: usize,
    pub corpus: CorpusSpec,
    /// Second corpus: `u` for paraproducts, `G` for duality and embeddings.
    pub partner: Option<CorpusSpec>,
    pub seed: u64,
    pub trials: usize,
    pub mc_method: McMethod,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub refine: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: None,
            grid: GridSpec::default(),
            scales: ScaleSpec::default(),
            space: SpaceSpec::default(),
            psi: "mexican_hat".into(),
            phi: PhiChoice::Complementary,
            chi: [0.25, 8.0],
            q_list: vec![1.0],
            p_list: vec![2.0],
            alpha_list: vec![1.0],
            alpha: 1.0,
            beta: None,
            rho: 2.0,
            gamma_list: vec![1.0, 0.5, 0.25],
            lambda_points: 6,
            corpus: CorpusSpec::default(),
            partner: None,
            seed: 0,
            trials: 2000,
            mc_method: McMethod::Covariance,
            tolerances: Tolerances::default(),
            out: None,
            refine: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.spatial_grid()?;
        self.scale_grid()?;
        self.space.desc()?;
        self.psi_function()?;
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0) {
                bail!("{name} = {v} must be positive");
            }
            Ok(())
        };
        positive("alpha", self.alpha)?;
        positive("beta", self.beta())?;
        for &q in &self.q_list {
            positive("q", q)?;
        }
        for &a in &self.alpha_list {
            positive("alpha", a)?;
        }
        for &p in &self.p_list {
            if !(p >= 1.0) {
                bail!("p = {p} must be at least 1");
            }
        }
        if !(self.rho > 1.0) {
            bail!("rho = {} must exceed 1", self.rho);
        }
        if self.gamma_list.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
            bail!("gamma values must lie in (0, 1]");
        }
        if self.trials < 2 {
            bail!("at least 2 Monte Carlo trials are needed");
        }
        for c in std::iter::once(&self.corpus).chain(self.partner.as_ref()) {
            positive("amplitude", c.amplitude)?;
            if !(c.spread >= 1.0) {
                bail!("corpus spread {} must be at least 1", c.spread);
            }
            if c.band == 0 || 4 * c.band > self.grid.n {
                bail!("corpus band {} must lie in [1, N/4]", c.band);
            }
            if c.cells == 0 {
                bail!("corpus cells must be positive");
            }
        }
        Ok(())
    }

    pub fn spatial_grid(&self) -> Result<SpatialGrid> {
        Ok(SpatialGrid::new(self.grid.dim, self.grid.n, self.grid.period)?)
    }

    pub fn scale_grid(&self) -> Result<ScaleGrid> {
        let g = self.spatial_grid()?;
        let t_min = self.scales.t_min.unwrap_or(1.5 * g.spacing());
        let t_max = self.scales.t_max.unwrap_or(g.period / 4.0);
        Ok(ScaleGrid::new(t_min, t_max, self.scales.count)?)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(self.alpha + 10.0)
    }

    pub fn psi_function(&self) -> Result<TestFunction> {
        Ok(TestFunction::by_name(&self.psi, self.grid.dim)?)
    }

    pub fn phi_function(&self, psi: &TestFunction) -> Result<TestFunction> {
        Ok(match self.phi {
            PhiChoice::Complementary => complementary(psi, &ChiParams::new(self.chi[0], self.chi[1])?)?,
            PhiChoice::GaussBump => TestFunction::gauss_bump(self.grid.dim)?,
        })
    }

    pub fn gauss(&self) -> GaussConfig {
        GaussConfig {
            trials: self.trials,
            rng: RandomSource::with_stream(self.seed, 1),
            force_mc: false,
            method: self.mc_method,
        }
    }

    /// Same continuum problem on a grid with twice the points per axis.
    /// The scale band is pinned so only the spatial resolution changes.
    pub fn refined_spatially(&self) -> Result<Self> {
        let s = self.scale_grid()?;
        let mut out = self.clone();
        out.grid.n *= 2;
        out.scales.t_min = Some(s.t_min);
        out.scales.t_max = Some(s.t_max);
        Ok(out)
    }

    /// Same problem with the scale step halved.
    pub fn refined_in_scale(&self) -> Result<Self> {
        let s = self.scale_grid()?;
        let mut out = self.clone();
        out.scales.t_min = Some(s.t_min);
        out.scales.t_max = Some(s.t_max);
        out.scales.count = s.refined().count;
        Ok(out)
    }
}

/// Default configuration of each suite. Files passed with `--config` are
/// merged over these key by key.
pub fn preset(suite: &str) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig {
        suite: Some(suite.to_string()),
        ..ExperimentConfig::default()
    };
    match suite {
        "charBMO" => {
            c.corpus = CorpusSpec {
                family: Family::BmoLog,
                count: 10,
                spread: 4.0,
                ..CorpusSpec::default()
            };
            c.q_list = vec![0.5, 1.0, 2.0];
        }
        "AC" => {
            c.corpus.count = 20;
            c.alpha_list = vec![0.5, 1.0, 2.0];
        }
        "duality" => {
            c.space = SpaceSpec::new(2, 2.0);
            c.corpus.count = 20;
        }
        "carleson_embedding" => {
            c.space = SpaceSpec::new(3, 1.0);
            c.corpus.count = 20;
            c.partner = Some(CorpusSpec {
                family: Family::LpRandom,
                count: 20,
                ..CorpusSpec::default()
            });
            c.beta = Some(2.0);
        }
        "paraproduct" => {
            c.space = SpaceSpec::new(3, 1.0);
            c.corpus = CorpusSpec {
                family: Family::BmoStep,
                count: 20,
                ..CorpusSpec::default()
            };
            c.partner = Some(CorpusSpec {
                family: Family::LpRandom,
                count: 20,
                ..CorpusSpec::default()
            });
            c.p_list = vec![1.5, 2.0, 3.0];
            c.tolerances.paraproduct_baseline = Some(PARAPRODUCT_BASELINE);
        }
        "good_lambda" => {
            c.grid.n = 256;
            c.corpus.count = 10;
            c.beta = Some(2.0);
        }
        other => bail!("unknown suite {other:?}"),
    }
    Ok(c)
}

/// Largest `R(f, u, p)` measured on the paraproduct preset, kept as a regression baseline.
pub const PARAPRODUCT_BASELINE: f64 = 0.1082;

/// `patch` merged into `base`: objects key by key, everything else replaced.
pub fn merge(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

impl ExperimentConfig {
    /// The suite preset with the JSON text merged over it.
    pub fn for_suite(suite: &str, overrides: Option<&str>) -> Result<Self> {
        let mut base = serde_json::to_value(preset(suite)?)?;
        if let Some(text) = overrides {
            merge(&mut base, serde_json::from_str(text)?);
        }
        let cfg: Self = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn infinite_exponent_round_trips() {
        let cfg = ExperimentConfig::from_json(r#"{"space": {"dim": 2, "q": "inf"}}"#).unwrap();
        assert!(cfg.space.desc().unwrap().dual().exponent == Exponent::Finite(1.0));
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_json(r#"{"rho": 1.0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"grid": {"n": 100}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"psi": "gauss_bump"}"#).is_ok());
        assert!(ExperimentConfig::from_json(r#"{"psi": "nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"typo": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"corpus": {"band": 400}}"#).is_err());
    }

    #[test]
    fn refinement_pins_the_scale_band() {
        let cfg = ExperimentConfig::default();
        let fine = cfg.refined_spatially().unwrap();
        assert_eq!(fine.grid.n, 1024);
        assert_eq!(fine.scale_grid().unwrap(), cfg.scale_grid().unwrap());
        assert_eq!(cfg.refined_in_scale().unwrap().scale_grid().unwrap().count, 63);
    }

    #[test]
    fn presets_merge_overrides() {
        let cfg = ExperimentConfig::for_suite("duality", Some(r#"{"corpus": {"count": 3}, "seed": 9}"#)).unwrap();
        assert_eq!(cfg.corpus.count, 3);
        assert_eq!(cfg.corpus.family, Family::BandlimitedRandom);
        assert_eq!(cfg.space, SpaceSpec::new(2, 2.0));
        assert_eq!(cfg.seed, 9);
        assert!(ExperimentConfig::for_suite("duality", Some(r#"{"corpus": {"bogus": 1}}"#)).is_err());
        assert!(preset("nope").is_err());
    }
}
