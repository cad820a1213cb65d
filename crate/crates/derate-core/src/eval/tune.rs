//! Two-stage hyperparameter search: a random sweep over the whole space,
//! then a local grid around the best random draw. Every trial is scored by
//! Monte-Carlo cross validation and logged, including failures.

use std::collections::BTreeMap;
use std::time::Instant;

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::ml::{Dataset, Metric, ModelSpec, TreeLimits};
use crate::ml::kernel::KernelKind;
use crate::rng::{next_below, next_f64};

use super::cv::{cv_evaluate, CvPlan};
use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Linear,
    Polynomial,
    Rbf,
    Sigmoid,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::Linear,
        KernelFamily::Polynomial,
        KernelFamily::Rbf,
        KernelFamily::Sigmoid,
    ];

    fn title(self) -> &'static str {
        match self {
            KernelFamily::Linear => "Linear",
            KernelFamily::Polynomial => "Polynomial",
            KernelFamily::Rbf => "RBF",
            KernelFamily::Sigmoid => "Sigmoid",
        }
    }

    fn slug(self) -> &'static str {
        match self {
            KernelFamily::Linear => "linear",
            KernelFamily::Polynomial => "poly",
            KernelFamily::Rbf => "rbf",
            KernelFamily::Sigmoid => "sigmoid",
        }
    }
}

/// One row of the model comparison. `all()` fixes the report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    LeastSquares,
    Knn,
    Tree,
    Ridge(KernelFamily),
    Svr(KernelFamily),
}

impl ModelId {
    pub fn all() -> [ModelId; 11] {
        [
            ModelId::LeastSquares,
            ModelId::Knn,
            ModelId::Tree,
            ModelId::Ridge(KernelFamily::Linear),
            ModelId::Ridge(KernelFamily::Polynomial),
            ModelId::Ridge(KernelFamily::Rbf),
            ModelId::Ridge(KernelFamily::Sigmoid),
            ModelId::Svr(KernelFamily::Linear),
            ModelId::Svr(KernelFamily::Polynomial),
            ModelId::Svr(KernelFamily::Rbf),
            ModelId::Svr(KernelFamily::Sigmoid),
        ]
    }

    pub fn display_name(&self) -> String {
        match self {
            ModelId::LeastSquares => "Linear Least Squares".into(),
            ModelId::Knn => "k-Nearest Neighbors".into(),
            ModelId::Tree => "Decision Tree".into(),
            ModelId::Ridge(f) => format!("Ridge w/ {} Kernel", f.title()),
            ModelId::Svr(f) => format!("SVR w/ {} Kernel", f.title()),
        }
    }

    /// Short name used in file names and on the command line.
    pub fn slug(&self) -> String {
        match self {
            ModelId::LeastSquares => "ols".into(),
            ModelId::Knn => "knn".into(),
            ModelId::Tree => "tree".into(),
            ModelId::Ridge(f) => format!("ridge-{}", f.slug()),
            ModelId::Svr(f) => format!("svr-{}", f.slug()),
        }
    }

    pub fn parse(s: &str) -> Option<ModelId> {
        ModelId::all().into_iter().find(|m| m.slug() == s)
    }
}

/// A hyperparameter value as it appears in trial logs and config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Str(String),
}

impl ParamValue {
    fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Float(v) => Some(*v),
            ParamValue::Str(_) => None,
        }
    }

    fn as_i64(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Log-uniform over [lo, hi]; lo must be positive.
    LogUniform { lo: f64, hi: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Inclusive integer range.
    IntRange { lo: i64, hi: i64 },
    Choice { options: Vec<ParamValue> },
}

pub type SearchSpace = BTreeMap<String, Domain>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchPlan {
    /// Random trials in stage one.
    pub random_budget: u32,
    /// Grid points per numeric parameter in stage two (shrunk under time
    /// pressure, never below 3).
    pub grid_points: u32,
    /// Stage two brackets the best value by this factor on each side.
    pub span_factor: f64,
    /// Wall-clock cap for the whole search; stage one stops at half of it.
    pub budget_s: f64,
}

impl Default for SearchPlan {
    fn default() -> Self {
        SearchPlan {
            random_budget: 40,
            grid_points: 5,
            span_factor: 10.0,
            budget_s: 1800.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Random,
    Grid,
}

/// One scored (or failed) hyperparameter setting. Serialized one per line
/// into the tuning log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub stage: Stage,
    pub params: BTreeMap<String, ParamValue>,
    pub mean_test_r2: Option<f64>,
    pub mean_train_r2: Option<f64>,
    pub fold_test_r2: Vec<f64>,
    pub mean_fit_time_s: f64,
    pub mean_predict_time_s: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct TuneOutcome {
    pub model: ModelId,
    pub best_spec: ModelSpec,
    pub best_params: BTreeMap<String, ParamValue>,
    pub best_mean_test_r2: f64,
    pub trials: Vec<TrialRecord>,
    pub wall_clock_s: f64,
}

fn expected_params(model: ModelId) -> Vec<&'static str> {
    match model {
        ModelId::LeastSquares => vec![],
        ModelId::Knn => vec!["k", "metric"],
        ModelId::Tree => vec!["max_depth", "max_leaf_nodes", "min_samples_leaf"],
        ModelId::Ridge(f) => {
            let mut p = vec!["alpha"];
            p.extend(kernel_params(f));
            p
        }
        ModelId::Svr(f) => {
            let mut p = vec!["c", "epsilon"];
            p.extend(kernel_params(f));
            p
        }
    }
}

fn kernel_params(family: KernelFamily) -> Vec<&'static str> {
    match family {
        KernelFamily::Linear => vec![],
        KernelFamily::Polynomial => vec!["gamma", "coef0", "degree"],
        KernelFamily::Rbf => vec!["gamma"],
        KernelFamily::Sigmoid => vec!["gamma", "coef0"],
    }
}

/// The search space used when the config does not override it.
pub fn default_space(model: ModelId) -> SearchSpace {
    let mut space = SearchSpace::new();
    let log_wide = Domain::LogUniform { lo: 1e-6, hi: 1e3 };
    let size_choice = || {
        let mut options = vec![ParamValue::Int(0)];
        options.extend((2..=64).map(ParamValue::Int));
        Domain::Choice { options }
    };
    match model {
        ModelId::LeastSquares => {}
        ModelId::Knn => {
            space.insert("k".into(), Domain::IntRange { lo: 1, hi: 25 });
            space.insert(
                "metric".into(),
                Domain::Choice {
                    options: vec![
                        ParamValue::Str("manhattan".into()),
                        ParamValue::Str("euclidean".into()),
                    ],
                },
            );
        }
        ModelId::Tree => {
            space.insert("max_depth".into(), size_choice());
            space.insert("max_leaf_nodes".into(), size_choice());
            space.insert("min_samples_leaf".into(), Domain::IntRange { lo: 1, hi: 32 });
        }
        ModelId::Ridge(f) => {
            space.insert("alpha".into(), log_wide.clone());
            add_kernel_space(&mut space, f);
        }
        ModelId::Svr(f) => {
            space.insert("c".into(), log_wide.clone());
            space.insert("epsilon".into(), Domain::Uniform { lo: 0.0, hi: 0.2 });
            add_kernel_space(&mut space, f);
        }
    }
    space
}

fn add_kernel_space(space: &mut SearchSpace, family: KernelFamily) {
    let gamma = Domain::LogUniform { lo: 1e-6, hi: 1e3 };
    match family {
        KernelFamily::Linear => {}
        KernelFamily::Polynomial => {
            space.insert("gamma".into(), gamma);
            space.insert("coef0".into(), Domain::Uniform { lo: -1.0, hi: 1.0 });
            space.insert("degree".into(), Domain::IntRange { lo: 1, hi: 6 });
        }
        KernelFamily::Rbf => {
            space.insert("gamma".into(), gamma);
        }
        KernelFamily::Sigmoid => {
            space.insert("gamma".into(), gamma);
            space.insert("coef0".into(), Domain::Uniform { lo: -1.0, hi: 1.0 });
        }
    }
}

/// A reasonable fixed setting per model, used where a search would be
/// overkill (learning curves, smoke runs).
pub fn default_spec(model: ModelId) -> ModelSpec {
    let kernel = |f: KernelFamily| match f {
        KernelFamily::Linear => KernelKind::Linear,
        KernelFamily::Polynomial => KernelKind::Polynomial { gamma: 0.1, coef0: 1.0, degree: 3 },
        KernelFamily::Rbf => KernelKind::Rbf { gamma: 0.1 },
        KernelFamily::Sigmoid => KernelKind::Sigmoid { gamma: 0.1, coef0: 0.0 },
    };
    match model {
        ModelId::LeastSquares => ModelSpec::LeastSquares,
        ModelId::Knn => ModelSpec::Knn { k: 3, metric: Metric::Manhattan },
        ModelId::Tree => ModelSpec::Tree { limits: TreeLimits::default() },
        ModelId::Ridge(f) => ModelSpec::KernelRidge { alpha: 1.0, kernel: kernel(f) },
        ModelId::Svr(f) => ModelSpec::Svr { c: 1.0, epsilon: 0.05, kernel: kernel(f) },
    }
}

fn get_f64(params: &BTreeMap<String, ParamValue>, key: &str) -> Result<f64, EvalError> {
    params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| EvalError::BadSearchSpace(format!("missing numeric parameter `{key}`")))
}

fn get_i64(params: &BTreeMap<String, ParamValue>, key: &str) -> Result<i64, EvalError> {
    params
        .get(key)
        .and_then(|v| v.as_i64())
        .ok_or_else(|| EvalError::BadSearchSpace(format!("missing integer parameter `{key}`")))
}

fn get_u32(params: &BTreeMap<String, ParamValue>, key: &str) -> Result<u32, EvalError> {
    let v = get_i64(params, key)?;
    u32::try_from(v)
        .map_err(|_| EvalError::BadSearchSpace(format!("parameter `{key}` must be non-negative")))
}

/// Turns a sampled parameter assignment into a concrete model spec.
pub fn build_spec(model: ModelId, params: &BTreeMap<String, ParamValue>) -> Result<ModelSpec, EvalError> {
    let kernel = |f: KernelFamily| -> Result<KernelKind, EvalError> {
        Ok(match f {
            KernelFamily::Linear => KernelKind::Linear,
            KernelFamily::Polynomial => KernelKind::Polynomial {
                gamma: get_f64(params, "gamma")?,
                coef0: get_f64(params, "coef0")?,
                degree: u32::try_from(get_i64(params, "degree")?).map_err(|_| {
                    EvalError::BadSearchSpace("`degree` must be non-negative".into())
                })?,
            },
            KernelFamily::Rbf => KernelKind::Rbf { gamma: get_f64(params, "gamma")? },
            KernelFamily::Sigmoid => KernelKind::Sigmoid {
                gamma: get_f64(params, "gamma")?,
                coef0: get_f64(params, "coef0")?,
            },
        })
    };
    Ok(match model {
        ModelId::LeastSquares => ModelSpec::LeastSquares,
        ModelId::Knn => {
            let metric = match params.get("metric") {
                Some(ParamValue::Str(s)) if s == "manhattan" => Metric::Manhattan,
                Some(ParamValue::Str(s)) if s == "euclidean" => Metric::Euclidean,
                other => {
                    return Err(EvalError::BadSearchSpace(format!(
                        "`metric` must be \"manhattan\" or \"euclidean\", got {other:?}"
                    )))
                }
            };
            ModelSpec::Knn { k: get_u32(params, "k")? as usize, metric }
        }
        ModelId::Tree => ModelSpec::Tree {
            limits: TreeLimits {
                max_depth: get_u32(params, "max_depth")?,
                max_leaf_nodes: get_u32(params, "max_leaf_nodes")?,
                min_samples_leaf: get_u32(params, "min_samples_leaf")?.max(1),
            },
        },
        ModelId::Ridge(f) => ModelSpec::KernelRidge { alpha: get_f64(params, "alpha")?, kernel: kernel(f)? },
        ModelId::Svr(f) => ModelSpec::Svr {
            c: get_f64(params, "c")?,
            epsilon: get_f64(params, "epsilon")?,
            kernel: kernel(f)?,
        },
    })
}

fn validate_space(model: ModelId, space: &SearchSpace) -> Result<(), EvalError> {
    let expected = expected_params(model);
    let got: Vec<&str> = space.keys().map(|k| k.as_str()).collect();
    let mut want: Vec<&str> = expected.clone();
    want.sort_unstable();
    if got != want {
        return Err(EvalError::BadSearchSpace(format!(
            "{} expects parameters {:?}, search space has {:?}",
            model.slug(),
            expected,
            got
        )));
    }
    for (name, domain) in space {
        match domain {
            Domain::LogUniform { lo, hi } => {
                if !(*lo > 0.0 && lo <= hi && hi.is_finite()) {
                    return Err(EvalError::BadSearchSpace(format!(
                        "`{name}`: log_uniform needs 0 < lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Domain::Uniform { lo, hi } => {
                if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                    return Err(EvalError::BadSearchSpace(format!(
                        "`{name}`: uniform needs lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Domain::IntRange { lo, hi } => {
                if lo > hi {
                    return Err(EvalError::BadSearchSpace(format!(
                        "`{name}`: int_range needs lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Domain::Choice { options } => {
                if options.is_empty() {
                    return Err(EvalError::BadSearchSpace(format!("`{name}`: empty choice list")));
                }
            }
        }
    }
    Ok(())
}

fn sample(space: &SearchSpace, rng: &mut ChaCha12Rng) -> BTreeMap<String, ParamValue> {
    let mut params = BTreeMap::new();
    for (name, domain) in space {
        let value = match domain {
            Domain::LogUniform { lo, hi } => {
                let u = next_f64(rng);
                ParamValue::Float((lo.ln() + u * (hi.ln() - lo.ln())).exp())
            }
            Domain::Uniform { lo, hi } => ParamValue::Float(lo + next_f64(rng) * (hi - lo)),
            Domain::IntRange { lo, hi } => {
                ParamValue::Int(lo + next_below(rng, (hi - lo + 1) as u64) as i64)
            }
            Domain::Choice { options } => options[next_below(rng, options.len() as u64) as usize].clone(),
        };
        params.insert(name.clone(), value);
    }
    params
}

/// Stage-two candidate values for one parameter, centered on the stage-one
/// winner. Choices stay fixed. Multiplicative domains get `points` values
/// log-spaced over `[best / span, best * span]`; uniform domains get a linear
/// sweep of `best` plus or minus `1/span` of the domain width. Everything is
/// clamped to the domain.
fn refine_values(domain: &Domain, best: &ParamValue, points: u32, span: f64) -> Vec<ParamValue> {
    let points = points.max(3) as usize;
    match domain {
        Domain::Choice { .. } => vec![best.clone()],
        Domain::LogUniform { lo, hi } => {
            let v = best.as_f64().unwrap_or(*lo);
            let a = (v / span).max(*lo);
            let b = (v * span).min(*hi);
            log_spaced(a, b, points).into_iter().map(ParamValue::Float).collect()
        }
        Domain::Uniform { lo, hi } => {
            let v = best.as_f64().unwrap_or(0.0);
            let half = (hi - lo) / span;
            let a = (v - half).max(*lo);
            let b = (v + half).min(*hi);
            lin_spaced(a, b, points).into_iter().map(ParamValue::Float).collect()
        }
        Domain::IntRange { lo, hi } => {
            let v = best.as_i64().unwrap_or(*lo);
            if v == 0 {
                return vec![ParamValue::Int(0)];
            }
            let a = ((v as f64 / span).floor() as i64).max(*lo);
            let b = ((v as f64 * span).ceil() as i64).min(*hi);
            let raw = if a >= 1 {
                log_spaced(a as f64, b as f64, points)
            } else {
                lin_spaced(a as f64, b as f64, points)
            };
            let mut ints: Vec<i64> = raw.into_iter().map(|x| x.round() as i64).collect();
            ints.sort_unstable();
            ints.dedup();
            ints.into_iter().map(ParamValue::Int).collect()
        }
    }
}

fn lin_spaced(a: f64, b: f64, points: usize) -> Vec<f64> {
    if a >= b || points < 2 {
        return vec![a];
    }
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

fn log_spaced(a: f64, b: f64, points: usize) -> Vec<f64> {
    if a >= b || points < 2 {
        return vec![a];
    }
    (0..points)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn cartesian(values: &[(String, Vec<ParamValue>)]) -> Vec<BTreeMap<String, ParamValue>> {
    let mut combos = vec![BTreeMap::new()];
    for (name, options) in values {
        let mut next = Vec::with_capacity(combos.len() * options.len());
        for combo in &combos {
            for option in options {
                let mut c = combo.clone();
                c.insert(name.clone(), option.clone());
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}

fn better(a: &TrialRecord, b: &TrialRecord) -> bool {
    // Ties on the score fall back to fit time rounded to 10ms buckets, so a
    // scheduler hiccup cannot flip the winner; final tie goes to the earlier
    // trial.
    let (ra, rb) = match (a.mean_test_r2, b.mean_test_r2) {
        (Some(ra), Some(rb)) => (ra, rb),
        (Some(_), None) => return true,
        _ => return false,
    };
    if ra != rb {
        return ra > rb;
    }
    let bucket = |t: f64| (t / 0.01).floor() as i64;
    let (ta, tb) = (bucket(a.mean_fit_time_s), bucket(b.mean_fit_time_s));
    if ta != tb {
        return ta < tb;
    }
    a.trial < b.trial
}

fn run_trial(
    model: ModelId,
    params: BTreeMap<String, ParamValue>,
    trial: u32,
    stage: Stage,
    data: &Dataset,
    cv_plan: &CvPlan,
) -> TrialRecord {
    let mut record = TrialRecord {
        trial,
        stage,
        params,
        mean_test_r2: None,
        mean_train_r2: None,
        fold_test_r2: Vec::new(),
        mean_fit_time_s: 0.0,
        mean_predict_time_s: 0.0,
        error: None,
    };
    let spec = match build_spec(model, &record.params) {
        Ok(s) => s,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    match cv_evaluate(&spec, data, cv_plan) {
        Ok(out) => {
            record.mean_fit_time_s = out.mean_fit_time_s;
            record.mean_predict_time_s = out.mean_predict_time_s;
            let folds: Vec<f64> = out.folds.iter().map(|f| f.test.r2).collect();
            // kernels can overflow to non-finite scores; log those as
            // failures instead of emitting unrepresentable JSON numbers
            if out.mean_test_r2.is_finite() && folds.iter().all(|r| r.is_finite()) {
                record.mean_test_r2 = Some(out.mean_test_r2);
                record.mean_train_r2 = Some(out.mean_train_r2).filter(|r| r.is_finite());
                record.fold_test_r2 = folds;
            } else {
                record.error = Some("non-finite score".into());
            }
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

pub fn tune(
    model: ModelId,
    data: &Dataset,
    space: &SearchSpace,
    plan: &SearchPlan,
    cv_plan: &CvPlan,
    rng: &mut ChaCha12Rng,
) -> Result<TuneOutcome, EvalError> {
    validate_space(model, space)?;
    let start = Instant::now();
    let mut trials: Vec<TrialRecord> = Vec::new();
    let mut seen: Vec<BTreeMap<String, ParamValue>> = Vec::new();

    let stage_one_deadline = plan.budget_s / 2.0;
    let random_budget = if space.is_empty() { 1 } else { plan.random_budget.max(1) };
    for _ in 0..random_budget {
        if start.elapsed().as_secs_f64() > stage_one_deadline {
            break;
        }
        let params = sample(space, rng);
        if seen.contains(&params) {
            continue;
        }
        seen.push(params.clone());
        let record = run_trial(model, params, trials.len() as u32, Stage::Random, data, cv_plan);
        trials.push(record);
    }

    let best_random = trials
        .iter()
        .filter(|t| t.mean_test_r2.is_some())
        .cloned()
        .reduce(|a, b| if better(&b, &a) { b } else { a });

    if let Some(anchor) = &best_random {
        let numeric: usize = space
            .values()
            .filter(|d| !matches!(d, Domain::Choice { .. }))
            .count();
        if numeric > 0 {
            let scored = trials.iter().filter(|t| t.mean_test_r2.is_some()).count().max(1);
            let avg_trial_s = start.elapsed().as_secs_f64() / scored as f64;
            let remaining = (plan.budget_s - start.elapsed().as_secs_f64()).max(0.0);
            let mut points = plan.grid_points.max(3);
            while points > 3 {
                let combos = (points as f64).powi(numeric as i32);
                if combos * avg_trial_s <= remaining {
                    break;
                }
                points -= 1;
            }
            let values: Vec<(String, Vec<ParamValue>)> = space
                .iter()
                .map(|(name, domain)| {
                    let best = anchor.params.get(name).expect("validated space");
                    (name.clone(), refine_values(domain, best, points, plan.span_factor))
                })
                .collect();
            for params in cartesian(&values) {
                if start.elapsed().as_secs_f64() > plan.budget_s {
                    break;
                }
                if seen.contains(&params) {
                    continue;
                }
                seen.push(params.clone());
                let record = run_trial(model, params, trials.len() as u32, Stage::Grid, data, cv_plan);
                trials.push(record);
            }
        }
    }

    let best = trials
        .iter()
        .filter(|t| t.mean_test_r2.is_some())
        .cloned()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .ok_or(EvalError::NoScoredTrials)?;

    Ok(TuneOutcome {
        model,
        best_spec: build_spec(model, &best.params)?,
        best_params: best.params,
        best_mean_test_r2: best.mean_test_r2.expect("filtered on Some"),
        trials,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}
