use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use vdyn::config::Config;
use vdyn::eval::io::{
    check_pair, read_json, write_atomic, write_json, write_trajectory_csv, DatasetMeta, ScalerFile,
    WeightFile,
};
use vdyn::eval::plot::{scatter_chart, state_chart, ScatterPoint};
use vdyn::eval::{evaluate, score_ode, EvalReport};
use vdyn::solver::SampleId;
use vdyn::training::{
    default_learning_rate, sweep, sweep_learning_rates, train, DataSet, LossRecord, ModelKind,
    SweepCell, SweepSpec, SweepTable, TrainConfig, TrainingData, HIDDEN_SIZES, LEARNING_RATES,
    SEEDS,
};
use vdyn::{Error, Result};

use crate::{Cli, Command};

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let out = cli.out.as_path();
    match cli.command {
        Command::Generate { sample } => generate(&cfg, out, sample),
        Command::SimulateOde => simulate_ode(&cfg, out),
        Command::Train {
            model,
            hidden,
            seed,
            lr,
            iterations,
        } => {
            let mut tc = train_config(&cfg, model, lr, iterations);
            tc.hidden = hidden.unwrap_or(tc.hidden);
            tc.seed = seed.unwrap_or(tc.seed);
            train_one(&cfg, out, tc)
        }
        Command::Sweep {
            model,
            hidden,
            seeds,
            lr,
            iterations,
            jobs,
        } => {
            let spec = SweepSpec {
                hiddens: hidden.unwrap_or_else(|| HIDDEN_SIZES.to_vec()),
                seeds: seeds.unwrap_or_else(|| SEEDS.to_vec()),
                base: train_config(&cfg, model, lr, iterations),
            };
            run_sweep(&cfg, out, &spec, jobs)
        }
        Command::SweepLr {
            model,
            rates,
            hidden,
            seeds,
            iterations,
            jobs,
        } => {
            let spec = SweepSpec {
                hiddens: hidden.unwrap_or_else(|| HIDDEN_SIZES.to_vec()),
                seeds: seeds.unwrap_or_else(|| SEEDS.to_vec()),
                base: train_config(&cfg, model, None, iterations),
            };
            let rates = rates.unwrap_or_else(|| LEARNING_RATES.to_vec());
            run_sweep_lr(&cfg, out, &spec, &rates, jobs)
        }
        Command::Evaluate { weights, scaler } => {
            evaluate_weights(&cfg, out, &weights, scaler.as_deref())
        }
        Command::Plot { report, sweep } => plot(out, report.as_deref(), &sweep),
    }
}

/// Training settings from the config file, with the step size falling back
/// to the model's default when the file describes another model.
fn train_config(
    cfg: &Config,
    model: ModelKind,
    lr: Option<f64>,
    iterations: Option<usize>,
) -> TrainConfig {
    let mut tc = cfg.train.clone();
    let file_lr = (tc.model == model).then_some(tc.learning_rate);
    tc.model = model;
    tc.learning_rate = lr
        .or(file_lr)
        .unwrap_or_else(|| default_learning_rate(model));
    tc.iterations = iterations.unwrap_or(tc.iterations);
    tc
}

fn stem(tc: &TrainConfig) -> String {
    format!("{}_h{}_s{}", tc.model, tc.hidden, tc.seed)
}

fn generate(cfg: &Config, out: &Path, sample: u8) -> Result<()> {
    let id = SampleId::try_from(sample)?;
    let data = DataSet::generate(cfg)?;
    let s = data.sample(id);
    let n = id.number();
    write_trajectory_csv(&out.join(format!("sample{n}_clean.csv")), &s.clean)?;
    write_trajectory_csv(&out.join(format!("sample{n}_noisy.csv")), &s.noisy)?;
    write_json(
        &out.join(format!("sample{n}_meta.json")),
        &DatasetMeta {
            sample: n,
            config_hash: data.config_hash.clone(),
            vehicle: cfg.vehicle,
            tires: cfg.tires,
            substeps: cfg.solver.substeps,
            noise_sigma: s.noise_sigma,
            rng_seed: s.rng_seed,
            split_index: s.split_index,
            rolling_wheels: cfg.data.rolling_wheels,
        },
    )?;
    write_json(
        &out.join("scaler.json"),
        &ScalerFile {
            config_hash: data.config_hash.clone(),
            scaler: data.scaler.clone(),
        },
    )?;
    eprintln!(
        "wrote sample {n} ({} rows) to {}",
        s.clean.len(),
        out.display()
    );
    Ok(())
}

fn print_report(r: &EvalReport) {
    println!("{}", r.label);
    println!("  train SSE      {:.3}", r.train_sse);
    println!("  validation SSE {:.3}", r.val_sse);
    println!("  ODE train SSE  {:.3}", r.ode_train_sse);
    println!("  ODE val SSE    {:.3}", r.ode_val_sse);
    println!("  improvement    {:.2} %", r.improvement_vs_ode);
}

fn simulate_ode(cfg: &Config, out: &Path) -> Result<()> {
    let data = DataSet::generate(cfg)?;
    let ode = score_ode(&data)?;
    let report = EvalReport::from_scores("ode", &ode, &ode, &data);
    write_trajectory_csv(&out.join("ode_sample3.csv"), &ode.estimate)?;
    write_json(&out.join("ode_report.json"), &report)?;
    print_report(&report);
    Ok(())
}

fn loss_csv(history: &[LossRecord]) -> String {
    let mut s = String::from("sample,iteration,loss\n");
    for r in history {
        let _ = writeln!(s, "{},{},{}", r.sample, r.iteration, r.loss);
    }
    s
}

fn weight_file(tc: &TrainConfig, theta: Vec<f64>, hash: &str) -> WeightFile {
    WeightFile {
        model: tc.model,
        dims: tc.model.dims(tc.hidden),
        seed: tc.seed,
        learning_rate: tc.learning_rate,
        iterations: tc.iterations,
        config_hash: hash.to_owned(),
        theta,
    }
}

fn train_one(cfg: &Config, out: &Path, tc: TrainConfig) -> Result<()> {
    let data = DataSet::generate(cfg)?;
    eprintln!(
        "training {} h={} seed={} lr={} for {} iterations per sample",
        tc.model, tc.hidden, tc.seed, tc.learning_rate, tc.iterations
    );
    let outcome = train(&tc, &TrainingData::<f64>::from_dataset(&data))?;
    let report = evaluate(tc.model, &outcome.net, &data)?;
    let name = stem(&tc);
    write_json(
        &out.join(format!("{name}_weights.json")),
        &weight_file(&tc, outcome.net.theta().to_vec(), &data.config_hash),
    )?;
    write_atomic(
        &out.join(format!("{name}_loss.csv")),
        loss_csv(&outcome.loss_history).as_bytes(),
    )?;
    write_json(&out.join(format!("{name}_report.json")), &report)?;
    print_report(&report);
    Ok(())
}

/// Writes each finished cell's weights, remembering the first failure.
struct CellWriter<'a> {
    dir: PathBuf,
    hash: &'a str,
    error: Mutex<Option<Error>>,
}

impl CellWriter<'_> {
    fn write(&self, cell: &SweepCell) {
        eprintln!(
            "  {} h={} seed={} lr={}: train {:.3} val {:.3} {:?}",
            cell.model,
            cell.hidden,
            cell.seed,
            cell.learning_rate,
            cell.train_sse,
            cell.val_sse,
            cell.status
        );
        if !cell.status.is_ok() {
            return;
        }
        let tc = TrainConfig {
            model: cell.model,
            hidden: cell.hidden,
            seed: cell.seed,
            learning_rate: cell.learning_rate,
            iterations: cell.loss_history.len() / SampleId::ALL.len(),
            ..Default::default()
        };
        let path = self
            .dir
            .join(format!("{}_lr{}_weights.json", stem(&tc), tc.learning_rate));
        if let Err(e) = write_json(&path, &weight_file(&tc, cell.theta.clone(), self.hash)) {
            self.error.lock().expect("writer lock").get_or_insert(e);
        }
    }

    fn finish(self) -> Result<()> {
        match self.error.into_inner().expect("writer lock") {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn save_table(out: &Path, name: &str, table: &SweepTable) -> Result<()> {
    write_atomic(&out.join(format!("{name}.csv")), table.to_csv().as_bytes())?;
    let mut slim = table.clone();
    for c in &mut slim.cells {
        c.loss_history.clear();
    }
    write_json(&out.join(format!("{name}.json")), &slim)
}

fn summarize(table: &SweepTable) {
    let ok = table.ok_cells().count();
    println!(
        "{ok}/{} cells trained; ODE train SSE {:.3}",
        table.cells.len(),
        table.ode_train_sse
    );
    if let Some(b) = table.best_by_training() {
        println!(
            "best training SSE   {:.3} (h={}, seed={})",
            b.train_sse, b.hidden, b.seed
        );
    }
    if let Some(b) = table.best_by_validation() {
        println!(
            "best validation SSE {:.3} (h={}, seed={})",
            b.val_sse, b.hidden, b.seed
        );
    }
    if let Some(m) = table.median_val_sse() {
        println!("median validation SSE {m:.3}");
    }
}

fn run_sweep(cfg: &Config, out: &Path, spec: &SweepSpec, jobs: usize) -> Result<()> {
    let data = DataSet::generate(cfg)?;
    let model = spec.base.model;
    let writer = CellWriter {
        dir: out.join(format!("sweep_{model}")),
        hash: &data.config_hash,
        error: Mutex::new(None),
    };
    let table = sweep(spec, &data, jobs, |c| writer.write(c))?;
    writer.finish()?;
    save_table(out, &format!("sweep_{model}"), &table)?;
    summarize(&table);
    Ok(())
}

fn run_sweep_lr(
    cfg: &Config,
    out: &Path,
    spec: &SweepSpec,
    rates: &[f64],
    jobs: usize,
) -> Result<()> {
    let data = DataSet::generate(cfg)?;
    let model = spec.base.model;
    let writer = CellWriter {
        dir: out.join(format!("sweep_lr_{model}")),
        hash: &data.config_hash,
        error: Mutex::new(None),
    };
    let (rows, tables) = sweep_learning_rates(spec, rates, &data, jobs, |c| writer.write(c))?;
    writer.finish()?;
    for (row, table) in rows.iter().zip(&tables) {
        save_table(
            out,
            &format!("sweep_{model}_lr{}", row.learning_rate),
            table,
        )?;
    }
    let mut csv =
        String::from("model,lr,best_train_sse,best_val_sse,median_val_sse,n_ok,n_cells\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.model,
            r.learning_rate,
            r.best_train_sse,
            r.best_val_sse,
            r.median_val_sse,
            r.n_ok,
            r.n_cells
        );
    }
    write_atomic(&out.join(format!("sweep_lr_{model}.csv")), csv.as_bytes())?;
    print!("{csv}");
    Ok(())
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
}

fn evaluate_weights(cfg: &Config, out: &Path, weights: &Path, scaler: Option<&Path>) -> Result<()> {
    let w: WeightFile = read_json(weights)?;
    if let Some(path) = scaler {
        check_pair(&w, &read_json::<ScalerFile>(path)?)?;
    }
    let data = DataSet::generate(cfg)?;
    if w.config_hash != data.config_hash {
        return Err(Error::Config(format!(
            "{} was trained under config {} but the current config is {}",
            weights.display(),
            w.config_hash,
            data.config_hash
        )));
    }
    let report = evaluate(w.model, &w.net()?, &data)?;
    let name = file_stem(weights);
    let name = name.strip_suffix("_weights").unwrap_or(&name);
    write_json(&out.join(format!("{name}_report.json")), &report)?;
    print_report(&report);
    Ok(())
}

fn plot(out: &Path, report: Option<&Path>, sweeps: &[PathBuf]) -> Result<()> {
    if report.is_none() && sweeps.is_empty() {
        return Err(Error::Config("plot needs --report and/or --sweep".into()));
    }
    if let Some(path) = report {
        let r: EvalReport = read_json(path)?;
        let target = out.join(format!("{}.svg", file_stem(path)));
        write_atomic(&target, state_chart(&r).as_bytes())?;
        eprintln!("wrote {}", target.display());
    }
    if !sweeps.is_empty() {
        let mut points = Vec::new();
        for path in sweeps {
            let t: SweepTable = read_json(path)?;
            points.extend(t.ok_cells().map(|c| ScatterPoint {
                series: c.model.to_string(),
                param_count: c.param_count,
                val_sse: c.val_sse,
            }));
        }
        let target = out.join("validation_scatter.svg");
        write_atomic(&target, scatter_chart(&points).as_bytes())?;
        eprintln!("wrote {}", target.display());
    }
    Ok(())
}
