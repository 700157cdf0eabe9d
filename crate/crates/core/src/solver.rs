//! Alternating optimize-then-project solvers.
//!
//! Each outer iteration makes one optimization step on
//! `phi_k(W) = loss(W) + lambda2/2 |W - W_{k-1}|² + lambda1 |W|_1`, where
//! `W_{k-1}` is the previous acyclic projection, then projects the new
//! iterate with [`greedy_mas`]. Two step rules are provided:
//!
//! * [`Method::ProxiMas`]: accelerated proximal gradient (FISTA) with step
//!   `1/L` and soft-thresholding. Works purely from the Gram matrix.
//! * [`Method::OptiMas`]: Adam on the subgradient of `phi_k`.
//!
//! During the warm-start phase (the first `warmstart_fraction` of the
//! iteration or time budget) the proximity term is dropped and iterates are
//! not projected; projections are still evaluated so that the best acyclic
//! candidate is tracked over the whole run.

use std::time::{Duration, Instant};

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::graph::{is_acyclic_weights, WeightMatrix};
use crate::mas::greedy_mas;
use crate::objective::{
    check_nonnegative, lipschitz_bound, penalized_gradient, sem_loss_dense, soft_threshold_array,
    Dataset, PenaltyContext,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ProxiMas,
    OptiMas,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ProxiMas => "proximas",
            Method::OptiMas => "optimas",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proximas" => Ok(Method::ProxiMas),
            "optimas" => Ok(Method::OptiMas),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Init {
    #[default]
    Zeros,
    Given(WeightMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub method: Method,
    /// Sparsity weight.
    pub lambda1: f64,
    /// Proximity weight towards the previous acyclic projection.
    pub lambda2: f64,
    pub max_iterations: usize,
    /// Wall-clock budget in seconds, checked once per iteration.
    pub time_budget: Option<f64>,
    /// Fraction of the budget spent before acyclicity is enforced.
    pub warmstart_fraction: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Record a snapshot every this many iterations; 0 records only the last.
    pub snapshot_every: usize,
    /// Keep the weight matrix in each snapshot.
    pub keep_snapshot_weights: bool,
    pub seed: u64,
    pub init: Init,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            method: Method::ProxiMas,
            lambda1: 0.1,
            lambda2: 20.0,
            max_iterations: 5000,
            time_budget: None,
            warmstart_fraction: 0.8,
            learning_rate: 0.001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            snapshot_every: 0,
            keep_snapshot_weights: false,
            seed: 0,
            init: Init::Zeros,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        check_nonnegative("lambda1", self.lambda1)?;
        check_nonnegative("lambda2", self.lambda2)?;
        check_nonnegative("learning_rate", self.learning_rate)?;
        if !(0.0..=1.0).contains(&self.warmstart_fraction) {
            return Err(Error::InvalidParameter(format!(
                "warmstart_fraction must lie in [0, 1], got {}",
                self.warmstart_fraction
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        if let Some(budget) = self.time_budget {
            if !(budget.is_finite() && budget > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "time_budget must be positive, got {budget}"
                )));
            }
        }
        for (name, beta) in [
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
        ] {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1), got {beta}"
                )));
            }
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return Err(Error::InvalidParameter("adam_epsilon must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    /// Seconds since the first iteration started.
    pub wall_time: f64,
    /// Objective (loss plus L1) of `weights` at this iteration.
    pub objective: f64,
    /// Whether the recorded matrix is acyclic; always true once acyclicity
    /// is enforced, usually false during warm-start.
    pub acyclic: bool,
    /// The anchor `W_k`: the acyclic projection once enforced, the raw
    /// iterate during warm-start.
    pub weights: Option<WeightMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Best acyclic candidate.
    pub best: WeightMatrix,
    pub best_objective: f64,
    pub best_iteration: usize,
    pub history: Vec<Snapshot>,
    /// Last unprojected iterate.
    pub final_iterate: WeightMatrix,
    pub total_iterations: usize,
    /// Seconds spent iterating.
    pub total_time: f64,
    /// Seconds spent before the first iteration (Lipschitz estimate).
    pub setup_time: f64,
}

/// Mutable solver state between iterations.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Current iterate `W~_k`.
    pub weights: Array2<f64>,
    /// `W_{k-1}`: last acyclic projection (raw iterate during warm-start).
    pub anchor: WeightMatrix,
    /// FISTA extrapolation point.
    pub momentum_point: Array2<f64>,
    /// FISTA momentum scalar.
    pub t: f64,
    pub adam_m: Array2<f64>,
    pub adam_v: Array2<f64>,
    pub iteration: usize,
    pub acyclicity_active: bool,
}

/// What one call to [`Fitter::step`] produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub iteration: usize,
    pub acyclicity_active: bool,
    /// Objective of this iteration's acyclic candidate.
    pub candidate_objective: f64,
    pub improved: bool,
}

/// Drives one fit iteration by iteration.
pub struct Fitter<'a> {
    data: &'a Dataset,
    config: FitConfig,
    state: SolverState,
    step_size_inv: f64,
    best: Option<(WeightMatrix, f64, usize)>,
    history: Vec<Snapshot>,
    started: Instant,
    setup_time: Duration,
}

impl<'a> Fitter<'a> {
    pub fn new(data: &'a Dataset, config: FitConfig) -> Result<Self> {
        let setup_start = Instant::now();
        config.validate()?;
        let d = data.d();
        let init = match &config.init {
            Init::Zeros => WeightMatrix::zeros(d),
            Init::Given(w) if w.dim() == d => w.clone(),
            Init::Given(w) => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: w.dim(),
                })
            }
        };
        // warm-start runs without the proximity term
        let step_size_inv = match config.method {
            Method::ProxiMas => lipschitz_bound(data, 0.0)?,
            Method::OptiMas => 0.0,
        };
        let state = SolverState {
            weights: init.as_array().clone(),
            momentum_point: init.as_array().clone(),
            anchor: init,
            t: 1.0,
            adam_m: Array2::zeros((d, d)),
            adam_v: Array2::zeros((d, d)),
            iteration: 0,
            acyclicity_active: false,
        };
        Ok(Self {
            data,
            config,
            state,
            step_size_inv,
            best: None,
            history: Vec::new(),
            started: Instant::now(),
            setup_time: setup_start.elapsed(),
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    pub fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    /// Step size `1/L` currently used by the proximal step.
    pub fn lipschitz(&self) -> f64 {
        self.step_size_inv
    }

    /// Best acyclic candidate so far with its objective.
    pub fn best(&self) -> Option<(&WeightMatrix, f64)> {
        self.best.as_ref().map(|(w, obj, _)| (w, *obj))
    }

    /// True once the iteration or time budget is exhausted.
    pub fn budget_exhausted(&self) -> bool {
        if self.state.iteration >= self.config.max_iterations {
            return true;
        }
        matches!(self.config.time_budget, Some(b) if self.elapsed() >= b)
    }

    fn should_activate(&self, iteration: usize) -> bool {
        let rho = self.config.warmstart_fraction;
        if iteration as f64 > rho * self.config.max_iterations as f64 {
            return true;
        }
        matches!(self.config.time_budget, Some(b) if self.elapsed() > rho * b)
    }

    /// Runs one outer iteration.
    pub fn step(&mut self) -> Result<StepReport> {
        let iteration = self.state.iteration + 1;
        if !self.state.acyclicity_active && self.should_activate(iteration) {
            self.activate()?;
        }
        let lambda2 = if self.state.acyclicity_active {
            self.config.lambda2
        } else {
            0.0
        };
        let ctx = PenaltyContext {
            lambda1: self.config.lambda1,
            lambda2,
            anchor: self.state.anchor.clone(),
        };
        match self.config.method {
            Method::ProxiMas => self.proximal_step(&ctx)?,
            Method::OptiMas => self.adam_step(&ctx, iteration)?,
        }
        self.state.iteration = iteration;

        let iterate =
            WeightMatrix::new(self.state.weights.clone()).map_err(|_| Error::Diverged {
                iteration,
                value: f64::NAN,
            })?;
        let candidate = greedy_mas(&iterate).projected;
        let candidate_objective = dense_objective(self.data, &candidate, self.config.lambda1)?;
        if !candidate_objective.is_finite() {
            return Err(Error::Diverged {
                iteration,
                value: candidate_objective,
            });
        }
        let improved = self
            .best
            .as_ref()
            .is_none_or(|(_, obj, _)| candidate_objective < *obj);
        if improved {
            self.best = Some((candidate.clone(), candidate_objective, iteration));
        }
        self.state.anchor = if self.state.acyclicity_active {
            candidate
        } else {
            iterate
        };

        let every = self.config.snapshot_every;
        if every > 0 && iteration.is_multiple_of(every) {
            self.record_snapshot()?;
        }
        Ok(StepReport {
            iteration,
            acyclicity_active: self.state.acyclicity_active,
            candidate_objective,
            improved,
        })
    }

    fn activate(&mut self) -> Result<()> {
        self.state.acyclicity_active = true;
        self.state.anchor = greedy_mas(&self.state.anchor).projected;
        if self.config.method == Method::ProxiMas {
            self.step_size_inv = lipschitz_bound(self.data, self.config.lambda2)?;
        }
        Ok(())
    }

    fn proximal_step(&mut self, ctx: &PenaltyContext) -> Result<()> {
        let lipschitz = self.step_size_inv;
        let state = &mut self.state;
        let mut grad = penalized_gradient(self.data, state.momentum_point.view(), ctx)?;
        Zip::from(&mut grad)
            .and(&state.momentum_point)
            .for_each(|g, &y| *g = y - *g / lipschitz);
        let next = soft_threshold_array(grad.view(), ctx.lambda1 / lipschitz);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * state.t * state.t).sqrt());
        let beta = (state.t - 1.0) / t_next;
        Zip::from(&mut state.momentum_point)
            .and(&next)
            .and(&state.weights)
            .for_each(|y, &x, &x_prev| *y = x + beta * (x - x_prev));
        state.weights = next;
        state.t = t_next;
        Ok(())
    }

    fn adam_step(&mut self, ctx: &PenaltyContext, iteration: usize) -> Result<()> {
        let cfg = &self.config;
        let state = &mut self.state;
        let mut grad = penalized_gradient(self.data, state.weights.view(), ctx)?;
        Zip::from(&mut grad)
            .and(&state.weights)
            .for_each(|g, &w| *g += ctx.lambda1 * sign(w));
        for i in 0..grad.nrows() {
            grad[[i, i]] = 0.0;
        }
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        let correction1 = 1.0 - b1.powi(iteration as i32);
        let correction2 = 1.0 - b2.powi(iteration as i32);
        let (lr, eps) = (cfg.learning_rate, cfg.adam_epsilon);
        Zip::from(&mut state.weights)
            .and(&mut state.adam_m)
            .and(&mut state.adam_v)
            .and(&grad)
            .for_each(|w, m, v, &g| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / correction1;
                let v_hat = *v / correction2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            });
        state.momentum_point.assign(&state.weights);
        Ok(())
    }

    fn record_snapshot(&mut self) -> Result<()> {
        let anchor = &self.state.anchor;
        let objective = dense_objective(self.data, anchor, self.config.lambda1)?;
        self.history.push(Snapshot {
            iteration: self.state.iteration,
            wall_time: self.elapsed(),
            objective,
            acyclic: self.state.acyclicity_active || is_acyclic_weights(anchor),
            weights: self.config.keep_snapshot_weights.then(|| anchor.clone()),
        });
        Ok(())
    }

    /// Closes the run, recording a final snapshot if the schedule missed it.
    pub fn finish(mut self) -> Result<FitResult> {
        let total_time = self.elapsed();
        let iteration = self.state.iteration;
        if iteration > 0 && self.history.last().map(|s| s.iteration) != Some(iteration) {
            self.record_snapshot()?;
        }
        let final_iterate = WeightMatrix::new(self.state.weights)?;
        // before any step, the projected starting point is the only candidate
        let (best, best_objective, best_iteration) = match self.best {
            Some(best) => best,
            None => {
                let start = greedy_mas(&final_iterate).projected;
                let obj = dense_objective(self.data, &start, self.config.lambda1)?;
                (start, obj, 0)
            }
        };
        Ok(FitResult {
            best,
            best_objective,
            best_iteration,
            history: self.history,
            final_iterate,
            total_iterations: iteration,
            total_time,
            setup_time: self.setup_time.as_secs_f64(),
        })
    }
}

/// Objective evaluated at a fixed cost per call, whatever the sparsity.
fn dense_objective(data: &Dataset, w: &WeightMatrix, lambda1: f64) -> Result<f64> {
    Ok(sem_loss_dense(data, w.view())? + lambda1 * w.l1_norm())
}

fn sign(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Runs a fit to completion with the configured method.
pub fn fit(data: &Dataset, config: FitConfig) -> Result<FitResult> {
    let mut fitter = Fitter::new(data, config)?;
    while !fitter.budget_exhausted() {
        fitter.step()?;
    }
    fitter.finish()
}

pub fn proximas_fit(data: &Dataset, config: FitConfig) -> Result<FitResult> {
    if config.method != Method::ProxiMas {
        return Err(Error::InvalidParameter(
            "proximas_fit requires method = proximas".into(),
        ));
    }
    fit(data, config)
}

pub fn optimas_fit(data: &Dataset, config: FitConfig) -> Result<FitResult> {
    if config.method != Method::OptiMas {
        return Err(Error::InvalidParameter(
            "optimas_fit requires method = optimas".into(),
        ));
    }
    fit(data, config)
}

/// Index of the smallest objective; ties keep the earliest entry.
pub fn select_best(candidates: &[(WeightMatrix, f64)]) -> Result<&WeightMatrix> {
    let mut best: Option<&(WeightMatrix, f64)> = None;
    for candidate in candidates {
        if best.is_none_or(|b| candidate.1 < b.1) {
            best = Some(candidate);
        }
    }
    best.map(|(w, _)| w)
        .ok_or_else(|| Error::Empty("no candidates to select from".into()))
}
