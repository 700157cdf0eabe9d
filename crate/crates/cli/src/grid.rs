//! Benchmark grid files: one `key=value[,value...]` per line, `#` comments.
//!
//! ```text
//! d=50,100
//! k=1
//! model=er
//! noise=gaussian
//! scale=ev
//! n=1000
//! method=proximas,optimas
//! repetitions=3
//! budget=2000
//! ```
//!
//! `budget` is the iteration count per fit. Optional scalar keys: `seed`
//! (base seed, default 0), `time_budget` (seconds), `lambda1`, `lambda2`,
//! `warmstart_frac`, `lr`, `n_val`.

use std::collections::HashSet;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::args::{MethodArg, ModelArg, NoiseArg, ScaleArg};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: Vec<usize>,
    pub k: Vec<usize>,
    pub model: Vec<ModelArg>,
    pub noise: Vec<NoiseArg>,
    pub scale: Vec<ScaleArg>,
    pub n: Vec<usize>,
    pub method: Vec<MethodArg>,
    pub repetitions: usize,
    pub budget: usize,
    pub seed: u64,
    pub time_budget: Option<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub warmstart_frac: f64,
    pub lr: f64,
    pub n_val: Option<usize>,
}

/// One grid point and repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub d: usize,
    pub k: usize,
    pub model: ModelArg,
    pub noise: NoiseArg,
    pub scale: ScaleArg,
    pub n: usize,
    pub method: MethodArg,
    pub repetition: usize,
    pub seed: u64,
}

impl Cell {
    pub fn dir_name(&self) -> String {
        format!(
            "d{}_k{}_{}_{}_{}_n{}_{}_r{}",
            self.d,
            self.k,
            value_name(self.model),
            value_name(self.noise),
            value_name(self.scale),
            self.n,
            value_name(self.method),
            self.repetition
        )
    }
}

pub fn value_name<T: ValueEnum>(value: T) -> String {
    value
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn usage(line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("grid line {line}: {message}"))
}

fn parse_list<T>(
    line: usize,
    key: &str,
    value: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| usage(line, format!("bad {key} value {s:?}"))))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(usage(line, format!("{key} has no values")));
    }
    Ok(items)
}

fn parse_enum<T: ValueEnum>(s: &str) -> Option<T> {
    T::from_str(s, true).ok()
}

fn parse_scalar<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| usage(line, format!("bad {key} value {value:?}")))
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self> {
        let mut d = None;
        let mut k = None;
        let mut model = None;
        let mut noise = None;
        let mut scale = None;
        let mut n = None;
        let mut method = None;
        let mut repetitions = None;
        let mut budget = None;
        let mut grid_seed = 0;
        let mut time_budget = None;
        let mut lambda1 = 0.1;
        let mut lambda2 = 20.0;
        let mut warmstart_frac = 0.8;
        let mut lr = 0.001;
        let mut n_val = None;
        let mut seen = HashSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| usage(line, "expected key=value"))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(usage(line, format!("duplicate key {key}")));
            }
            let num = |s: &str| s.parse::<usize>().ok();
            match key {
                "d" => d = Some(parse_list(line, key, value, num)?),
                "k" => k = Some(parse_list(line, key, value, num)?),
                "n" => n = Some(parse_list(line, key, value, num)?),
                "model" => model = Some(parse_list(line, key, value, parse_enum)?),
                "noise" => noise = Some(parse_list(line, key, value, parse_enum)?),
                "scale" => scale = Some(parse_list(line, key, value, parse_enum)?),
                "method" => method = Some(parse_list(line, key, value, parse_enum)?),
                "repetitions" => repetitions = Some(parse_scalar(line, key, value)?),
                "budget" => budget = Some(parse_scalar(line, key, value)?),
                "seed" => grid_seed = parse_scalar(line, key, value)?,
                "time_budget" => time_budget = Some(parse_scalar(line, key, value)?),
                "lambda1" => lambda1 = parse_scalar(line, key, value)?,
                "lambda2" => lambda2 = parse_scalar(line, key, value)?,
                "warmstart_frac" => warmstart_frac = parse_scalar(line, key, value)?,
                "lr" => lr = parse_scalar(line, key, value)?,
                "n_val" => n_val = Some(parse_scalar(line, key, value)?),
                other => return Err(usage(line, format!("unknown key {other}"))),
            }
        }
        let missing = |key: &str| CliError::Usage(format!("grid is missing required key {key}"));
        let repetitions: usize = repetitions.ok_or_else(|| missing("repetitions"))?;
        let budget: usize = budget.ok_or_else(|| missing("budget"))?;
        if repetitions == 0 || budget == 0 {
            return Err(CliError::Usage(
                "repetitions and budget must be >= 1".into(),
            ));
        }
        Ok(Self {
            d: d.ok_or_else(|| missing("d"))?,
            k: k.ok_or_else(|| missing("k"))?,
            model: model.ok_or_else(|| missing("model"))?,
            noise: noise.ok_or_else(|| missing("noise"))?,
            scale: scale.ok_or_else(|| missing("scale"))?,
            n: n.ok_or_else(|| missing("n"))?,
            method: method.ok_or_else(|| missing("method"))?,
            repetitions,
            budget,
            seed: grid_seed,
            time_budget,
            lambda1,
            lambda2,
            warmstart_frac,
            lr,
            n_val,
        })
    }

    /// Cartesian product in key order, repetitions innermost.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &d in &self.d {
            for &k in &self.k {
                for &model in &self.model {
                    for &noise in &self.noise {
                        for &scale in &self.scale {
                            for &n in &self.n {
                                for &method in &self.method {
                                    for repetition in 0..self.repetitions {
                                        cells.push(Cell {
                                            d,
                                            k,
                                            model,
                                            noise,
                                            scale,
                                            n,
                                            method,
                                            repetition,
                                            seed: self.seed + repetition as u64,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}
