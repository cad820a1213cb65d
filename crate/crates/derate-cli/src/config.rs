//! One TOML file drives every subcommand. Paths are resolved relative to
//! the config file's directory but echoed verbatim into the emitted
//! `effective-config.toml`, so re-running the same config tree elsewhere
//! produces byte-identical reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use derate_core::campaign::{CheckerConfig, FdrRecord};
use derate_core::eval::{CvPlan, ModelId, SearchPlan, SearchSpace};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub netlist: String,
    pub stimulus: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    /// Fallback for every section seed that is not set explicitly.
    #[serde(default)]
    pub seed: u64,
    pub checker: CheckerConfig,
    #[serde(default)]
    pub campaign: CampaignSection,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub tune: TuneSection,
    #[serde(default)]
    pub curve: CurveSection,
}

fn default_out_dir() -> String {
    "out".to_string()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub injections_per_ff: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Restricts injection to these flip-flops; default is all of them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            injections_per_ff: 20,
            seed: None,
            targets: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvSection {
    pub folds: u32,
    pub train_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            folds: 10,
            train_fraction: 0.5,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// Fraction of flip-flops used for training; the rest are the held-out
    /// prediction set.
    pub train_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub targets: Vec<Target>,
    pub models: Vec<String>,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            train_fraction: 0.5,
            seed: None,
            targets: vec![Target::Output, Target::Application],
            models: ModelId::all().iter().map(|m| m.slug()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneSection {
    pub random_budget: u32,
    pub grid_points: u32,
    pub span_factor: f64,
    pub budget_s: f64,
    /// Per-model search-space overrides, keyed by model slug. Entries
    /// replace the default domain of the named hyperparameter.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spaces: BTreeMap<String, SearchSpace>,
}

impl Default for TuneSection {
    fn default() -> Self {
        let plan = SearchPlan::default();
        TuneSection {
            random_budget: plan.random_budget,
            grid_points: plan.grid_points,
            span_factor: plan.span_factor,
            budget_s: plan.budget_s,
            spaces: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub sizes: Vec<f64>,
    /// Defaults to the train section's model list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<String>>,
}

impl Default for CurveSection {
    fn default() -> Self {
        CurveSection {
            sizes: (1..=9).map(|i| i as f64 / 10.0).collect(),
            models: None,
        }
    }
}

/// Which de-rating column a model is trained against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Output,
    Application,
}

impl Target {
    pub fn slug(self) -> &'static str {
        match self {
            Target::Output => "output",
            Target::Application => "application",
        }
    }

    pub fn pick(self, record: &FdrRecord) -> f64 {
        match self {
            Target::Output => record.fdr_output,
            Target::Application => record.fdr_application,
        }
    }
}

/// A validated config plus the directory its relative paths anchor to.
pub struct Resolved {
    pub cfg: RunConfig,
    base: PathBuf,
    out_dir: PathBuf,
}

impl Resolved {
    pub fn netlist_path(&self) -> PathBuf {
        self.base.join(&self.cfg.netlist)
    }

    pub fn stimulus_path(&self) -> PathBuf {
        self.base.join(&self.cfg.stimulus)
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn campaign_seed(&self) -> u64 {
        self.cfg.campaign.seed.unwrap_or(self.cfg.seed)
    }

    pub fn train_seed(&self) -> u64 {
        self.cfg.train.seed.unwrap_or(self.cfg.seed)
    }

    pub fn cv_plan(&self) -> CvPlan {
        CvPlan {
            folds: self.cfg.cv.folds,
            train_fraction: self.cfg.cv.train_fraction,
            seed: self.cfg.cv.seed.unwrap_or(self.cfg.seed),
        }
    }

    pub fn search_plan(&self) -> SearchPlan {
        SearchPlan {
            random_budget: self.cfg.tune.random_budget,
            grid_points: self.cfg.tune.grid_points,
            span_factor: self.cfg.tune.span_factor,
            budget_s: self.cfg.tune.budget_s,
        }
    }

    pub fn train_models(&self) -> Vec<ModelId> {
        parse_models(&self.cfg.train.models).unwrap()
    }

    pub fn curve_models(&self) -> Vec<ModelId> {
        let slugs = self
            .cfg
            .curve
            .models
            .as_ref()
            .unwrap_or(&self.cfg.train.models);
        parse_models(slugs).unwrap()
    }

    /// Merged search space for one model: defaults overlaid with any
    /// `[tune.spaces.<slug>]` entries.
    pub fn search_space(&self, model: ModelId) -> SearchSpace {
        let mut space = derate_core::eval::default_space(model);
        if let Some(over) = self.cfg.tune.spaces.get(&model.slug()) {
            for (key, domain) in over {
                space.insert(key.clone(), domain.clone());
            }
        }
        space
    }

    /// Writes the fully defaulted config next to the other reports so every
    /// run is self-describing.
    pub fn write_effective(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir).map_err(|e| {
            CliError::Config(format!("cannot create {}: {e}", self.out_dir.display()))
        })?;
        let text = toml::to_string(&self.cfg)
            .map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))?;
        let path = self.out_file("effective-config.toml");
        fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

fn parse_models(slugs: &[String]) -> Result<Vec<ModelId>, CliError> {
    let mut out = Vec::with_capacity(slugs.len());
    for s in slugs {
        let id = ModelId::parse(s)
            .ok_or_else(|| CliError::Config(format!("unknown model \"{s}\"")))?;
        if out.contains(&id) {
            return Err(CliError::Config(format!("model \"{s}\" listed twice")));
        }
        out.push(id);
    }
    if out.is_empty() {
        return Err(CliError::Config("the model list is empty".to_string()));
    }
    Ok(out)
}

fn check_fraction(name: &str, value: f64) -> Result<(), CliError> {
    if !(value > 0.0 && value < 1.0) {
        return Err(CliError::Config(format!(
            "{name} must lie strictly between 0 and 1, got {value}"
        )));
    }
    Ok(())
}

pub fn load(
    path: &Path,
    out_override: Option<&str>,
    seed_override: Option<u64>,
) -> Result<Resolved, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: RunConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out_dir = match out_override {
        Some(dir) => {
            cfg.out_dir = dir.to_string();
            PathBuf::from(dir)
        }
        None => base.join(&cfg.out_dir),
    };

    let resolved = Resolved { cfg, base, out_dir };
    validate(&resolved, path)?;
    Ok(resolved)
}

fn validate(r: &Resolved, path: &Path) -> Result<(), CliError> {
    let cfg = &r.cfg;
    for (label, p) in [
        ("netlist", r.netlist_path()),
        ("stimulus", r.stimulus_path()),
    ] {
        if !p.is_file() {
            return Err(CliError::Config(format!(
                "{}: {label} file {} does not exist",
                path.display(),
                p.display()
            )));
        }
    }
    if cfg.checker.payload.is_empty() {
        return Err(CliError::Config("checker.payload is empty".to_string()));
    }
    if cfg.campaign.injections_per_ff == 0 {
        return Err(CliError::Config(
            "campaign.injections_per_ff must be at least 1".to_string(),
        ));
    }
    if cfg.cv.folds == 0 {
        return Err(CliError::Config("cv.folds must be at least 1".to_string()));
    }
    check_fraction("cv.train_fraction", cfg.cv.train_fraction)?;
    check_fraction("train.train_fraction", cfg.train.train_fraction)?;
    if cfg.train.targets.is_empty() {
        return Err(CliError::Config("train.targets is empty".to_string()));
    }
    if cfg.train.targets.iter().any(|t| {
        cfg.train.targets.iter().filter(|u| *u == t).count() > 1
    }) {
        return Err(CliError::Config("train.targets repeats an entry".to_string()));
    }
    parse_models(&cfg.train.models)?;
    if let Some(models) = &cfg.curve.models {
        parse_models(models)?;
    }
    if cfg.curve.sizes.is_empty() {
        return Err(CliError::Config("curve.sizes is empty".to_string()));
    }
    for &s in &cfg.curve.sizes {
        check_fraction("curve.sizes entry", s)?;
    }
    if cfg.tune.random_budget == 0 || cfg.tune.grid_points == 0 {
        return Err(CliError::Config(
            "tune budgets must be at least 1".to_string(),
        ));
    }
    if !(cfg.tune.span_factor >= 1.0) {
        return Err(CliError::Config(format!(
            "tune.span_factor must be at least 1, got {}",
            cfg.tune.span_factor
        )));
    }
    if !(cfg.tune.budget_s > 0.0) {
        return Err(CliError::Config(format!(
            "tune.budget_s must be positive, got {}",
            cfg.tune.budget_s
        )));
    }
    for slug in cfg.tune.spaces.keys() {
        if ModelId::parse(slug).is_none() {
            return Err(CliError::Config(format!(
                "tune.spaces names an unknown model \"{slug}\""
            )));
        }
    }
    Ok(())
}
