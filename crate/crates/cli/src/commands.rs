//! Subcommand implementations. Each returns its results in addition to
//! writing them, so the batch runner and tests can use them directly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use masdag::datagen::{generate_benchmark, GraphSpec};
use masdag::io::{
    fmt_real, open, read_mask_triplets, read_matrix, read_triplets, write_file, write_matrix,
    write_trace, write_triplets,
};
use masdag::mas::{exact_mas, greedy_mas};
use masdag::metrics::{default_thresholds, evaluate, EvalSummary};
use masdag::solver::{fit, FitConfig, FitResult, Init};
use masdag::Dataset;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{BenchArgs, EvalArgs, FitArgs, GenArgs, MasArgs, ReplayArgs};
use crate::error::{CliError, Result};
use crate::grid::{value_name, Cell, Grid};
use crate::manifest::{
    read_json, unix_now, write_json, DataMeta, RunManifest, BENCH_MANIFEST, DATA_META,
    EVAL_MANIFEST, FIT_MANIFEST, MAS_MANIFEST, TOOL, VERSION,
};

pub const X_TRAIN: &str = "X_train.csv";
pub const X_VAL: &str = "X_val.csv";
pub const W_TRUE: &str = "W_true.csv";
pub const W_BEST: &str = "W_best.csv";
pub const TRACE: &str = "trace.csv";
pub const METRICS: &str = "metrics.csv";
pub const SUMMARY: &str = "summary.csv";
pub const BENCH: &str = "bench.csv";

pub const METRICS_HEADER: &str =
    "threshold,fnr_dir,fpr_dir,shd_norm_dir,fnr_undir,fpr_undir,shd_norm_undir";
pub const SUMMARY_HEADER: &str =
    "average_precision,gaussian_nll,best_objective,iterations,wall_time_s";
pub const BENCH_HEADER: &str = "d,k,model,noise,scale,n,method,repetition,seed,status,average_precision,gaussian_nll,best_objective,iterations,wall_time_s";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn load_matrix(path: &Path) -> Result<ndarray::Array2<f64>> {
    read_matrix(open(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn cmd_gen(args: &GenArgs) -> Result<DataMeta> {
    let mut graph = GraphSpec::new(args.d, args.k, args.model.into());
    graph.sf_direction = args.sf_direction.into();
    graph
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if args.n == 0 {
        return Err(CliError::Usage("--n must be >= 1".into()));
    }
    let n_val = args.n_val.unwrap_or(args.n);
    let bench = generate_benchmark(
        &graph,
        args.noise.into(),
        args.scale.into(),
        args.n,
        n_val,
        args.seed,
    )?;

    create_dir(&args.out)?;
    write_file(&args.out.join(X_TRAIN), |w| {
        write_matrix(w, bench.train.x())
    })?;
    write_file(&args.out.join(X_VAL), |w| {
        write_matrix(w, bench.validation.x())
    })?;
    write_file(&args.out.join(W_TRUE), |w| {
        write_triplets(w, &bench.truth.weights)
    })?;
    let meta = DataMeta {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "gen".into(),
        args: args.clone(),
        d: args.d,
        k: args.k,
        model: args.model,
        noise: args.noise,
        scale: args.scale,
        sf_direction: args.sf_direction,
        n_train: args.n,
        n_val,
        seed: args.seed,
        validation_seed: args.seed.wrapping_add(1),
        noise_scales: bench.noise.scales.clone(),
        true_arcs: bench.truth.mask.num_arcs(),
        outputs: [X_TRAIN, X_VAL, W_TRUE, DATA_META]
            .map(String::from)
            .to_vec(),
    };
    write_json(&args.out.join(DATA_META), &meta)?;
    Ok(meta)
}

/// Fit results as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub best_objective: f64,
    pub best_iteration: usize,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub setup_time_s: f64,
    pub snapshots: usize,
}

pub fn fit_config(args: &FitArgs) -> FitConfig {
    FitConfig {
        method: args.method.into(),
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        max_iterations: args.iters,
        time_budget: args.time_budget,
        warmstart_fraction: args.warmstart_frac,
        learning_rate: args.lr,
        snapshot_every: args.snapshot_every,
        keep_snapshot_weights: args.snapshot_every > 0,
        seed: args.seed,
        init: Init::Zeros,
        ..FitConfig::default()
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<(FitResult, FitSummary)> {
    let started = unix_now();
    let config = fit_config(args);
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let x = load_matrix(&args.data.join(X_TRAIN))?;
    let data = Dataset::new(x)?;
    let meta_path = args.data.join(DATA_META);
    let data_meta: Option<DataMeta> = if meta_path.exists() {
        Some(read_json(&meta_path)?)
    } else {
        None
    };

    let result = fit(&data, config)?;

    create_dir(&args.out)?;
    let mut outputs = vec![W_BEST.to_string(), TRACE.to_string()];
    write_file(&args.out.join(W_BEST), |w| write_triplets(w, &result.best))?;
    write_file(&args.out.join(TRACE), |w| write_trace(w, &result.history))?;
    if args.snapshot_every > 0 {
        for snap in &result.history {
            if let Some(weights) = &snap.weights {
                let name = format!("snapshot_{}.csv", snap.iteration);
                write_file(&args.out.join(&name), |w| write_triplets(w, weights))?;
                outputs.push(name);
            }
        }
    }
    outputs.push(FIT_MANIFEST.to_string());
    let summary = FitSummary {
        best_objective: result.best_objective,
        best_iteration: result.best_iteration,
        iterations: result.total_iterations,
        wall_time_s: result.total_time,
        setup_time_s: result.setup_time,
        snapshots: result.history.len(),
    };
    let mut manifest = RunManifest::new("fit", args, started)?;
    manifest.data = data_meta;
    manifest.outputs = outputs;
    manifest.results = serde_json::to_value(&summary)?;
    manifest.finished_unix_s = unix_now();
    write_json(&args.out.join(FIT_MANIFEST), &manifest)?;
    Ok((result, summary))
}

fn summary_line(summary: &EvalSummary, fit: Option<&FitSummary>) -> String {
    let (obj, iters, time) = match fit {
        Some(f) => (
            fmt_real(f.best_objective),
            f.iterations.to_string(),
            fmt_real(f.wall_time_s),
        ),
        None => Default::default(),
    };
    format!(
        "{},{},{obj},{iters},{time}",
        fmt_real(summary.average_precision),
        fmt_real(summary.gaussian_nll)
    )
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalSummary> {
    let started = unix_now();
    // load everything before writing anything
    let val = Dataset::new(load_matrix(&args.val)?)?;
    let d = val.d();
    let weights = read_triplets(open(&args.weights)?, Some(d))
        .map_err(|e| CliError::Data(format!("{}: {e}", args.weights.display())))?;
    let truth = read_mask_triplets(open(&args.truth)?, Some(d))
        .map_err(|e| CliError::Data(format!("{}: {e}", args.truth.display())))?;
    let fit_manifest_path = args.fit_manifest.clone().or_else(|| {
        let sibling = args.weights.parent()?.join(FIT_MANIFEST);
        sibling.exists().then_some(sibling)
    });
    let fit_summary: Option<FitSummary> = match &fit_manifest_path {
        Some(path) => {
            let manifest: RunManifest = read_json(path)?;
            serde_json::from_value(manifest.results).ok()
        }
        None => None,
    };
    let thresholds = args.thresholds.clone().unwrap_or_else(default_thresholds);
    let summary = evaluate(&weights, &truth, &val, &thresholds).map_err(|e| match e {
        masdag::Error::InvalidParameter(m) => CliError::Usage(m),
        other => other.into(),
    })?;

    create_dir(&args.out)?;
    write_file(&args.out.join(METRICS), |w| {
        writeln!(w, "{METRICS_HEADER}")?;
        for r in &summary.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_real(r.threshold),
                fmt_real(r.fnr_dir),
                fmt_real(r.fpr_dir),
                fmt_real(r.shd_norm_dir),
                fmt_real(r.fnr_undir),
                fmt_real(r.fpr_undir),
                fmt_real(r.shd_norm_undir)
            )?;
        }
        Ok(())
    })?;
    write_file(&args.out.join(SUMMARY), |w| {
        writeln!(w, "{SUMMARY_HEADER}")?;
        writeln!(w, "{}", summary_line(&summary, fit_summary.as_ref()))?;
        Ok(())
    })?;
    let mut manifest = RunManifest::new("eval", args, started)?;
    manifest.outputs = [METRICS, SUMMARY, EVAL_MANIFEST].map(String::from).to_vec();
    manifest.results = serde_json::json!({
        "average_precision": summary.average_precision,
        "gaussian_nll": summary.gaussian_nll,
        "fit_manifest": fit_manifest_path,
    });
    manifest.finished_unix_s = unix_now();
    write_json(&args.out.join(EVAL_MANIFEST), &manifest)?;
    Ok(summary)
}

pub fn cmd_mas(args: &MasArgs) -> Result<masdag::mas::MasResult> {
    let started = unix_now();
    let weights = read_triplets(open(&args.input)?, args.d)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.input.display())))?;
    let result = if args.exact {
        exact_mas(&weights)?
    } else {
        greedy_mas(&weights)
    };
    write_file(&args.out, |w| write_triplets(w, &result.projected))?;
    let dir = args
        .out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut manifest = RunManifest::new("mas", args, started)?;
    manifest.outputs = vec![args.out.display().to_string()];
    manifest.results = serde_json::json!({
        "retained_weight": result.retained_weight,
        "removed_weight": result.removed_weight,
        "order": result.order.as_slice(),
    });
    manifest.finished_unix_s = unix_now();
    write_json(&dir.join(MAS_MANIFEST), &manifest)?;
    Ok(result)
}

/// One line of `bench.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub cell: Cell,
    pub status: String,
    pub average_precision: Option<f64>,
    pub gaussian_nll: Option<f64>,
    pub best_objective: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_s: Option<f64>,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let c = &self.cell;
        let real = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.d,
            c.k,
            value_name(c.model),
            value_name(c.noise),
            value_name(c.scale),
            c.n,
            value_name(c.method),
            c.repetition,
            c.seed,
            self.status,
            real(self.average_precision),
            real(self.gaussian_nll),
            real(self.best_objective),
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            real(self.wall_time_s),
        )
    }
}

fn run_cell(grid: &Grid, cell: &Cell, root: &Path) -> BenchRow {
    let dir = root.join(cell.dir_name());
    let outcome = (|| -> Result<(EvalSummary, FitSummary)> {
        let data_dir = dir.join("data");
        let fit_dir = dir.join("fit");
        let eval_dir = dir.join("eval");
        cmd_gen(&GenArgs {
            d: cell.d,
            k: cell.k,
            model: cell.model,
            noise: cell.noise,
            scale: cell.scale,
            n: cell.n,
            n_val: grid.n_val,
            seed: cell.seed,
            sf_direction: Default::default(),
            out: data_dir.clone(),
        })?;
        let (_, fit_summary) = cmd_fit(&FitArgs {
            method: cell.method,
            lambda1: grid.lambda1,
            lambda2: grid.lambda2,
            iters: grid.budget,
            time_budget: grid.time_budget,
            warmstart_frac: grid.warmstart_frac,
            lr: grid.lr,
            seed: cell.seed,
            snapshot_every: 0,
            data: data_dir.clone(),
            out: fit_dir.clone(),
        })?;
        let eval = cmd_eval(&EvalArgs {
            weights: fit_dir.join(W_BEST),
            truth: data_dir.join(W_TRUE),
            val: data_dir.join(X_VAL),
            out: eval_dir,
            thresholds: None,
            fit_manifest: Some(fit_dir.join(FIT_MANIFEST)),
        })?;
        Ok((eval, fit_summary))
    })();
    match outcome {
        Ok((eval, fit)) => BenchRow {
            cell: *cell,
            status: "ok".into(),
            average_precision: Some(eval.average_precision),
            gaussian_nll: Some(eval.gaussian_nll),
            best_objective: Some(fit.best_objective),
            iterations: Some(fit.iterations),
            wall_time_s: Some(fit.wall_time_s),
        },
        Err(err) => {
            eprintln!("cell {} failed: {err}", cell.dir_name());
            BenchRow {
                cell: *cell,
                status: err.status().into(),
                average_precision: None,
                gaussian_nll: None,
                best_objective: None,
                iterations: None,
                wall_time_s: None,
            }
        }
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    let started = unix_now();
    let text = fs::read_to_string(&args.grid)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.grid.display())))?;
    let grid = Grid::parse(&text)?;
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be >= 1".into()));
    }
    create_dir(&args.out)?;
    let cells = grid.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<BenchRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_cell(&grid, c, &args.out))
            .collect()
    });

    write_file(&args.out.join(BENCH), |w| {
        writeln!(w, "{BENCH_HEADER}")?;
        for row in &rows {
            writeln!(w, "{}", row.to_csv())?;
        }
        Ok(())
    })?;
    let mut manifest = RunManifest::new("bench", args, started)?;
    manifest.outputs = std::iter::once(BENCH.to_string())
        .chain(cells.iter().map(Cell::dir_name))
        .chain(std::iter::once(BENCH_MANIFEST.to_string()))
        .collect();
    manifest.results = serde_json::json!({
        "grid": grid,
        "cells": rows.len(),
        "failed": rows.iter().filter(|r| r.status != "ok").count(),
    });
    manifest.finished_unix_s = unix_now();
    write_json(&args.out.join(BENCH_MANIFEST), &manifest)?;
    Ok(rows)
}

/// Re-runs the command recorded in a `meta.json` or manifest file.
pub fn cmd_replay(args: &ReplayArgs) -> Result<()> {
    let value: serde_json::Value = read_json(&args.manifest)?;
    let command = value
        .get("command")
        .and_then(|c| c.as_str())
        .ok_or_else(|| CliError::Data("manifest has no command".into()))?
        .to_string();
    let recorded = value
        .get("args")
        .cloned()
        .ok_or_else(|| CliError::Data("manifest has no args".into()))?;
    let bad = |e: serde_json::Error| CliError::Data(format!("manifest args: {e}"));
    match command.as_str() {
        "gen" => cmd_gen(&serde_json::from_value(recorded).map_err(bad)?).map(drop),
        "fit" => cmd_fit(&serde_json::from_value(recorded).map_err(bad)?).map(drop),
        "eval" => cmd_eval(&serde_json::from_value(recorded).map_err(bad)?).map(drop),
        "mas" => cmd_mas(&serde_json::from_value(recorded).map_err(bad)?).map(drop),
        "bench" => cmd_bench(&serde_json::from_value(recorded).map_err(bad)?).map(drop),
        other => Err(CliError::Data(format!("cannot replay command {other:?}"))),
    }
}

/// Paths of the files a `gen` run writes into `dir`.
pub fn dataset_files(dir: &Path) -> [PathBuf; 4] {
    [X_TRAIN, X_VAL, W_TRUE, DATA_META].map(|f| dir.join(f))
}
