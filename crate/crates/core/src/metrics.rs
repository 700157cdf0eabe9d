//! Structure-recovery metrics: confusion rates, normalized SHD, average
//! precision and held-out Gaussian negative log-likelihood.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::{threshold, AdjacencyMask, WeightMatrix};
use crate::objective::Dataset;

/// Residual variance floor in [`gaussian_nll`].
pub const NLL_VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionRates {
    pub fnr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confusion {
    pub directed: ConfusionRates,
    pub undirected: ConfusionRates,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub threshold: f64,
    pub fnr_dir: f64,
    pub fpr_dir: f64,
    pub shd_norm_dir: f64,
    pub fnr_undir: f64,
    pub fpr_undir: f64,
    pub shd_norm_undir: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub average_precision: f64,
    pub gaussian_nll: f64,
    pub rows: Vec<MetricsRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shd {
    pub directed: usize,
    pub undirected: usize,
}

fn check_same_size(pred: &AdjacencyMask, truth: &AdjacencyMask) -> Result<()> {
    if pred.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            found: pred.dim(),
        });
    }
    Ok(())
}

#[derive(Default)]
struct Counts {
    tp: usize,
    fp: usize,
    tn: usize,
    fn_: usize,
}

impl Counts {
    fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    fn rates(&self) -> ConfusionRates {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        ConfusionRates {
            fnr: ratio(self.fn_, self.tp + self.fn_),
            fpr: ratio(self.fp, self.fp + self.tn),
        }
    }
}

/// FNR and FPR over ordered off-diagonal cells and over unordered pairs
/// (a pair is positive when either direction is present).
pub fn confusion_rates(pred: &AdjacencyMask, truth: &AdjacencyMask) -> Result<Confusion> {
    check_same_size(pred, truth)?;
    let d = truth.dim();
    let mut directed = Counts::default();
    let mut undirected = Counts::default();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                directed.add(pred.contains(i, j), truth.contains(i, j));
            }
            if i < j {
                undirected.add(
                    pred.contains(i, j) || pred.contains(j, i),
                    truth.contains(i, j) || truth.contains(j, i),
                );
            }
        }
    }
    Ok(Confusion {
        directed: directed.rates(),
        undirected: undirected.rates(),
    })
}

/// Raw structural Hamming distances.
///
/// Directed: per unordered pair, a single arc predicted in the opposite
/// direction costs one (a reversal); otherwise every mismatched cell costs
/// one. Undirected: mismatched pairs.
pub fn shd(pred: &AdjacencyMask, truth: &AdjacencyMask) -> Result<Shd> {
    check_same_size(pred, truth)?;
    let d = truth.dim();
    let (mut directed, mut undirected) = (0, 0);
    for i in 0..d {
        for j in i + 1..d {
            let t = (truth.contains(i, j), truth.contains(j, i));
            let p = (pred.contains(i, j), pred.contains(j, i));
            if t != p {
                let reversed = t.0 != t.1 && p == (t.1, t.0);
                directed += if reversed {
                    1
                } else {
                    usize::from(t.0 != p.0) + usize::from(t.1 != p.1)
                };
            }
            if (t.0 || t.1) != (p.0 || p.1) {
                undirected += 1;
            }
        }
    }
    Ok(Shd {
        directed,
        undirected,
    })
}

/// `(directed, undirected)` SHD divided by the number of true arcs
/// (true pairs for the undirected view), or by one for an empty truth.
pub fn shd_normalized(pred: &AdjacencyMask, truth: &AdjacencyMask) -> Result<(f64, f64)> {
    let raw = shd(pred, truth)?;
    let true_arcs = truth.num_arcs().max(1) as f64;
    let d = truth.dim();
    let true_pairs = (0..d)
        .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
        .filter(|&(i, j)| truth.contains(i, j) || truth.contains(j, i))
        .count()
        .max(1) as f64;
    Ok((
        raw.directed as f64 / true_arcs,
        raw.undirected as f64 / true_pairs,
    ))
}

/// Average precision `sum_n (R_n - R_{n-1}) P_n` over descending scores.
///
/// Equal scores form one block evaluated at the precision reached at the
/// end of the block.
pub fn average_precision_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("scores contain NaN".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let mut ranked: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    let total = positives as f64;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut previous_recall = 0.0;
    let mut ap = 0.0;
    let mut start = 0;
    while start < ranked.len() {
        let mut end = start;
        while end < ranked.len() && ranked[end].0 == ranked[start].0 {
            tp += usize::from(ranked[end].1);
            end += 1;
        }
        seen += end - start;
        let recall = tp as f64 / total;
        let precision = tp as f64 / seen as f64;
        ap += (recall - previous_recall) * precision;
        previous_recall = recall;
        start = end;
    }
    Ok(ap)
}

/// Average precision of `|W(i, j)|` as a score for the arcs of `truth`.
pub fn average_precision(weights: &WeightMatrix, truth: &AdjacencyMask) -> Result<f64> {
    let d = truth.dim();
    if weights.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: weights.dim(),
        });
    }
    let mut scores = Vec::with_capacity(d * d);
    let mut labels = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                scores.push(weights.get(i, j).abs());
                labels.push(truth.contains(i, j));
            }
        }
    }
    average_precision_scores(&scores, &labels)
}

/// Per-sample Gaussian negative log-likelihood of the residuals `XW - X`,
/// each variable with its own maximum-likelihood variance.
pub fn gaussian_nll(val: &Dataset, weights: &WeightMatrix) -> Result<f64> {
    let d = val.d();
    if weights.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: weights.dim(),
        });
    }
    let n = val.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "validation data needs n >= 2, got {n}"
        )));
    }
    let x = val.x();
    let residual = x.dot(weights.as_array()) - x;
    let nll = residual
        .columns()
        .into_iter()
        .map(|col| {
            let variance =
                (col.iter().map(|r| r * r).sum::<f64>() / n as f64).max(NLL_VARIANCE_FLOOR);
            (2.0 * PI * variance).ln() + 1.0
        })
        .sum::<f64>();
    Ok(0.5 * nll)
}

/// Default evaluation grid: 0, twenty geometric steps from 0.01 to 1, and 0.3.
pub fn default_thresholds() -> Vec<f64> {
    let mut grid = vec![0.0, 0.3];
    grid.extend((0..20).map(|i| 0.01 * 100f64.powf(i as f64 / 19.0)));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// One [`MetricsRow`] per threshold.
pub fn threshold_sweep(
    weights: &WeightMatrix,
    truth: &AdjacencyMask,
    thresholds: &[f64],
) -> Result<Vec<MetricsRow>> {
    if thresholds.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameter(
            "thresholds must be finite and nonnegative".into(),
        ));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "thresholds must be sorted ascending".into(),
        ));
    }
    thresholds
        .iter()
        .map(|&tau| {
            let pred = threshold(weights, tau);
            let rates = confusion_rates(&pred, truth)?;
            let (shd_dir, shd_undir) = shd_normalized(&pred, truth)?;
            Ok(MetricsRow {
                threshold: tau,
                fnr_dir: rates.directed.fnr,
                fpr_dir: rates.directed.fpr,
                shd_norm_dir: shd_dir,
                fnr_undir: rates.undirected.fnr,
                fpr_undir: rates.undirected.fpr,
                shd_norm_undir: shd_undir,
            })
        })
        .collect()
}

/// Average precision, validation NLL and the threshold sweep.
pub fn evaluate(
    weights: &WeightMatrix,
    truth: &AdjacencyMask,
    val: &Dataset,
    thresholds: &[f64],
) -> Result<EvalSummary> {
    Ok(EvalSummary {
        average_precision: average_precision(weights, truth)?,
        gaussian_nll: gaussian_nll(val, weights)?,
        rows: threshold_sweep(weights, truth, thresholds)?,
    })
}
