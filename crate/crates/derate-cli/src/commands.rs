use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use derate_core::campaign::{run_campaign, CampaignPlan, FdrRecord, FdrTable};
use derate_core::demo;
use derate_core::eval::{
    curve_csv, default_spec, learning_curve, metrics, tune, EvalError, ModelId,
};
use derate_core::features::extract_features;
use derate_core::ml::{fit, Dataset, Matrix};
use derate_core::netlist::{FfId, Netlist};
use derate_core::rng::{shuffle, stream_rng, STREAM_SPLIT, STREAM_TUNE};
use derate_core::sim::{activity_fractions, activity_csv, simulate, SimRun, Stimulus};

use crate::config::{
    CampaignSection, CurveSection, CvSection, Resolved, RunConfig, TrainSection, TuneSection,
};
use crate::CliError;

const REPORT_HEADER: &str =
    "model,mae,max,rmse,ev,r2,trials,training_time_s,fit_time_s,prediction_time_s\n";

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))
}

fn load_netlist(r: &Resolved) -> Result<Netlist, CliError> {
    let path = r.netlist_path();
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))?;
    Netlist::parse(&text)
        .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn load_stimulus(r: &Resolved) -> Result<Stimulus, CliError> {
    let path = r.stimulus_path();
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))?;
    Stimulus::parse(&text)
        .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn golden_run(net: &Netlist, stim: &Stimulus) -> Result<SimRun, CliError> {
    simulate(net, stim, None).map_err(domain)
}

pub fn golden(r: &Resolved) -> Result<(), CliError> {
    r.write_effective()?;
    let net = load_netlist(r)?;
    let stim = load_stimulus(r)?;
    let run = golden_run(&net, &stim)?;

    let out_names: Vec<&str> = net.outputs().iter().map(|&o| net.net_name(o)).collect();
    write_file(&r.out_file("golden.csv"), &run.trace.to_csv(&out_names))?;

    let activity = activity_fractions(&run.stats, stim.total_cycles()).map_err(domain)?;
    let ff_names: Vec<&str> = net.ff_ids().map(|f| net.ff_name(f)).collect();
    write_file(&r.out_file("activity.csv"), &activity_csv(&ff_names, &activity))?;

    println!(
        "golden: {} cycles, {} outputs, {} flip-flops -> {}",
        stim.total_cycles(),
        net.outputs().len(),
        net.ff_count(),
        r.out_dir().display()
    );
    Ok(())
}

pub fn campaign(r: &Resolved) -> Result<(), CliError> {
    r.write_effective()?;
    let net = load_netlist(r)?;
    let stim = load_stimulus(r)?;

    let targets: Option<Vec<FfId>> = match &r.cfg.campaign.targets {
        Some(names) => Some(resolve_ffs(&net, names)?),
        None => None,
    };
    let plan = CampaignPlan::random(
        &net,
        &stim,
        r.cfg.campaign.injections_per_ff,
        r.campaign_seed(),
        targets.as_deref(),
    )
    .map_err(domain)?;
    let table = run_campaign(&net, &stim, &plan, &r.cfg.checker).map_err(domain)?;
    write_file(&r.out_file("fdr.csv"), &table.to_csv())?;

    println!(
        "campaign: {} runs over {} flip-flops in {:.2} s -> {}",
        table.total_runs,
        table.records.len(),
        table.wall_clock_s,
        r.out_file("fdr.csv").display()
    );
    Ok(())
}

pub fn features(r: &Resolved) -> Result<(), CliError> {
    r.write_effective()?;
    let net = load_netlist(r)?;
    let stim = load_stimulus(r)?;
    let run = golden_run(&net, &stim)?;
    let activity = activity_fractions(&run.stats, stim.total_cycles()).map_err(domain)?;
    let set = extract_features(&net, &activity).map_err(domain)?;
    write_file(&r.out_file("features.csv"), &set.to_csv())?;

    println!(
        "features: {} flip-flops x {} columns in {:.2} s -> {}",
        set.ff_names.len(),
        derate_core::FEATURE_NAMES.len(),
        set.elapsed_s,
        r.out_file("features.csv").display()
    );
    Ok(())
}

fn resolve_ffs(net: &Netlist, names: &[String]) -> Result<Vec<FfId>, CliError> {
    let by_name: HashMap<&str, FfId> =
        net.ff_ids().map(|f| (net.ff_name(f), f)).collect();
    names
        .iter()
        .map(|n| {
            by_name.get(n.as_str()).copied().ok_or_else(|| {
                CliError::Domain(format!("no flip-flop named \"{n}\" in the netlist"))
            })
        })
        .collect()
}

/// Seeded shuffle split over flip-flop indices; train gets the first
/// ceil(n * fraction) of the permutation.
fn split_rows(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), CliError> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, STREAM_SPLIT, 0);
    shuffle(&mut rng, &mut order);
    let n_train = ((n as f64) * fraction).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(CliError::Domain(format!(
            "train fraction {fraction} leaves no held-out flip-flops (n = {n})"
        )));
    }
    let test = order.split_off(n_train);
    Ok((order, test))
}

/// Feature rows plus the measured de-rating table, joined by flip-flop name.
struct TrainingInputs {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
    records: Vec<FdrRecord>,
}

fn load_training_inputs(r: &Resolved) -> Result<TrainingInputs, CliError> {
    let net = load_netlist(r)?;
    let stim = load_stimulus(r)?;

    let fdr_path = r.out_file("fdr.csv");
    let text = fs::read_to_string(&fdr_path).map_err(|e| {
        CliError::Domain(format!(
            "cannot read {}: {e}; run the campaign first",
            fdr_path.display()
        ))
    })?;
    let records = FdrTable::parse_csv(&text).map_err(domain)?;
    let by_name: HashMap<&str, &FdrRecord> =
        records.iter().map(|rec| (rec.ff_name.as_str(), rec)).collect();

    let run = golden_run(&net, &stim)?;
    let activity = activity_fractions(&run.stats, stim.total_cycles()).map_err(domain)?;
    let set = extract_features(&net, &activity).map_err(domain)?;

    let mut ordered = Vec::with_capacity(set.ff_names.len());
    for name in &set.ff_names {
        let rec = by_name.get(name.as_str()).ok_or_else(|| {
            CliError::Domain(format!(
                "{} has no row for flip-flop \"{name}\"",
                fdr_path.display()
            ))
        })?;
        ordered.push((*rec).clone());
    }
    Ok(TrainingInputs {
        names: set.ff_names.clone(),
        rows: set.to_rows(),
        records: ordered,
    })
}

fn model_stream(model: ModelId) -> u64 {
    ModelId::all().iter().position(|m| *m == model).unwrap() as u64
}

pub fn train_predict(r: &Resolved) -> Result<(), CliError> {
    r.write_effective()?;
    let inputs = load_training_inputs(r)?;
    let n = inputs.names.len();
    let (train_idx, test_idx) =
        split_rows(n, r.cfg.train.train_fraction, r.train_seed())?;
    let models = r.train_models();
    let search_plan = r.search_plan();
    let cv_plan = r.cv_plan();

    for &target in &r.cfg.train.targets {
        let y: Vec<f64> = inputs.records.iter().map(|rec| target.pick(rec)).collect();
        let train_rows: Vec<Vec<f64>> =
            train_idx.iter().map(|&i| inputs.rows[i].clone()).collect();
        let train_y: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
        let train_names: Vec<String> =
            train_idx.iter().map(|&i| inputs.names[i].clone()).collect();
        let train_data = Dataset::new(Matrix::from_rows(&train_rows), train_y, train_names)
            .map_err(domain)?;

        let test_rows: Vec<Vec<f64>> =
            test_idx.iter().map(|&i| inputs.rows[i].clone()).collect();
        let test_matrix = Matrix::from_rows(&test_rows);
        let test_y: Vec<f64> = test_idx.iter().map(|&i| y[i]).collect();

        let mut report = String::from(REPORT_HEADER);
        for &model in &models {
            let space = r.search_space(model);
            let mut rng = stream_rng(r.train_seed(), STREAM_TUNE, model_stream(model));
            let outcome = tune(model, &train_data, &space, &search_plan, &cv_plan, &mut rng)
                .map_err(|e| match e {
                    EvalError::BadSearchSpace(_) => CliError::Config(e.to_string()),
                    other => CliError::Domain(other.to_string()),
                })?;

            let fit_started = Instant::now();
            let fitted = fit(&outcome.best_spec, &train_data).map_err(domain)?;
            let fit_time = fit_started.elapsed().as_secs_f64();

            let predict_started = Instant::now();
            let predicted = fitted.predict(&test_matrix).map_err(domain)?;
            let predict_time = predict_started.elapsed().as_secs_f64();
            let scores = metrics(&test_y, &predicted).map_err(domain)?;

            let slug = model.slug();
            let stem = format!("{slug}_{}", target.slug());
            let mut log = String::new();
            for trial in &outcome.trials {
                let line = serde_json::to_string(trial)
                    .map_err(|e| CliError::Domain(e.to_string()))?;
                log.push_str(&line);
                log.push('\n');
            }
            write_file(&r.out_file(&format!("tune_{stem}.jsonl")), &log)?;
            write_file(&r.out_file(&format!("model_{stem}.json")), &fitted.to_json())?;

            let mut predictions = String::from("ff,true,predicted\n");
            for (i, &row) in test_idx.iter().enumerate() {
                let _ = writeln!(
                    predictions,
                    "{},{},{}",
                    inputs.names[row], test_y[i], predicted[i]
                );
            }
            write_file(&r.out_file(&format!("predictions_{stem}.csv")), &predictions)?;

            let _ = writeln!(
                report,
                "{},{},{},{},{},{},{},{},{},{}",
                model.display_name(),
                scores.mae,
                scores.max,
                scores.rmse,
                scores.ev,
                scores.r2,
                outcome.trials.len(),
                outcome.wall_clock_s,
                fit_time,
                predict_time
            );
            println!(
                "train-predict [{}] {}: r2 {:.4}, mae {:.4} ({} trials, {:.2} s)",
                target.slug(),
                model.display_name(),
                scores.r2,
                scores.mae,
                outcome.trials.len(),
                outcome.wall_clock_s
            );
        }
        let path = r.out_file(&format!("report_{}.csv", target.slug()));
        write_file(&path, &report)?;
        println!(
            "train-predict [{}]: {} train / {} test flip-flops -> {}",
            target.slug(),
            train_idx.len(),
            test_idx.len(),
            path.display()
        );
    }
    Ok(())
}

pub fn learning_curve_cmd(r: &Resolved) -> Result<(), CliError> {
    r.write_effective()?;
    let inputs = load_training_inputs(r)?;
    let data_matrix = Matrix::from_rows(&inputs.rows);
    let models = r.curve_models();
    let cv_plan = r.cv_plan();

    for &target in &r.cfg.train.targets {
        let y: Vec<f64> = inputs.records.iter().map(|rec| target.pick(rec)).collect();
        let data = Dataset::new(data_matrix.clone(), y, inputs.names.clone())
            .map_err(domain)?;
        for &model in &models {
            let spec = default_spec(model);
            let points = learning_curve(&spec, &data, &r.cfg.curve.sizes, &cv_plan)
                .map_err(domain)?;
            let path = r.out_file(&format!(
                "learning_curve_{}_{}.csv",
                model.slug(),
                target.slug()
            ));
            write_file(&path, &curve_csv(&points))?;
            println!(
                "learning-curve [{}] {}: {} sizes -> {}",
                target.slug(),
                model.display_name(),
                points.len(),
                path.display()
            );
        }
    }
    Ok(())
}

pub fn gen_demo(dir: &Path, seed: u64, cycles: u32) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;

    let design = demo::design_text();
    let stim = demo::stimulus(seed, cycles);
    write_file(&dir.join("design.nl"), &design)?;
    write_file(&dir.join("stimulus.txt"), &stim.to_text())?;

    let cfg = RunConfig {
        netlist: "design.nl".to_string(),
        stimulus: "stimulus.txt".to_string(),
        out_dir: "out".to_string(),
        seed,
        checker: demo::checker(),
        campaign: CampaignSection::default(),
        cv: CvSection::default(),
        train: TrainSection::default(),
        // leaner search budget than the library default: the demo design is
        // small enough that wide random stages add time, not insight
        tune: TuneSection {
            random_budget: 12,
            grid_points: 3,
            ..TuneSection::default()
        },
        curve: CurveSection::default(),
    };
    let text = toml::to_string(&cfg)
        .map_err(|e| CliError::Config(format!("cannot serialize run.toml: {e}")))?;
    write_file(&dir.join("run.toml"), &text)?;

    let net = demo::netlist();
    println!(
        "gen-demo: {} ({} flip-flops), {} stimulus cycles, seed {} -> {}",
        demo::DESIGN_NAME,
        net.ff_count(),
        cycles,
        seed,
        dir.display()
    );
    Ok(())
}
