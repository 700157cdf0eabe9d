//! Least-squares linear SEM objective, its proximity-penalized variants and
//! the pieces a proximal gradient method needs.
//!
//! All quantities use the Frobenius norm. Everything except
//! [`sem_loss_direct`] works from the precomputed Gram matrix `XᵗX`, so the
//! per-call cost does not depend on the sample count.

use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{Error, Result};
use crate::graph::WeightMatrix;
use crate::linalg::checked_spectral_norm;

/// Relative tolerance of the power iteration behind [`lipschitz_bound`].
pub const POWER_ITERATION_TOL: f64 = 1e-6;
/// Iteration cap of the power iteration behind [`lipschitz_bound`].
pub const POWER_ITERATION_MAX: usize = 1000;
/// Multiplier applied to the power-iteration estimate.
pub const LIPSCHITZ_SAFETY: f64 = 1.01;

/// Sample matrix `X` (`n x d`) with its Gram matrix `XᵗX`.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    gram: Array2<f64>,
}

impl Dataset {
    pub fn new(x: Array2<f64>) -> Result<Self> {
        let (n, d) = x.dim();
        if n == 0 || d == 0 {
            return Err(Error::Empty(format!("data matrix is {n}x{d}")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "data matrix has non-finite entries".into(),
            ));
        }
        let raw = x.t().dot(&x);
        // (a + b) / 2 is commutative, so the result is exactly symmetric
        let gram = (&raw + &raw.t()) * 0.5;
        Ok(Self { x, gram })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    fn check(&self, w: &ArrayView2<'_, f64>) -> Result<()> {
        let d = self.d();
        let (r, c) = w.dim();
        if r != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r,
            });
        }
        if c != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c,
            });
        }
        Ok(())
    }
}

/// Weights and anchor of the penalized objective
/// `phi(W) = loss(W) + lambda2/2 |W - anchor|² + lambda1 |W|_1`.
#[derive(Debug, Clone)]
pub struct PenaltyContext {
    pub lambda1: f64,
    pub lambda2: f64,
    pub anchor: WeightMatrix,
}

impl PenaltyContext {
    pub fn new(lambda1: f64, lambda2: f64, anchor: WeightMatrix) -> Result<Self> {
        check_nonnegative("lambda1", lambda1)?;
        check_nonnegative("lambda2", lambda2)?;
        Ok(Self {
            lambda1,
            lambda2,
            anchor,
        })
    }
}

pub(crate) fn check_nonnegative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and >= 0, got {value}"
        )))
    }
}

/// `(1/2n) |XW - X|²` evaluated through the Gram matrix.
///
/// Sparse weight matrices go through per-column quadratic forms on their
/// support; dense ones through one matrix product.
pub fn sem_loss(data: &Dataset, w: ArrayView2<'_, f64>) -> Result<f64> {
    data.check(&w)?;
    let d = data.d();
    let gram = data.gram();
    let nnz = w.iter().filter(|&&v| v != 0.0).count();
    let total = if nnz * 8 < d * d {
        let mut total = 0.0;
        let mut support: Vec<(usize, f64)> = Vec::with_capacity(d);
        for j in 0..d {
            support.clear();
            support.extend(
                w.column(j)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, &v)| (i, v)),
            );
            // (w_j - e_j)ᵀ G (w_j - e_j)
            let mut q = gram[[j, j]];
            for &(a, wa) in &support {
                q -= 2.0 * wa * gram[[a, j]];
                for &(b, wb) in &support {
                    q += wa * wb * gram[[a, b]];
                }
            }
            total += q;
        }
        total
    } else {
        return sem_loss_dense(data, w);
    };
    Ok(total / (2.0 * data.n() as f64))
}

/// `(1/2n) tr((W - I)ᵀ XᵗX (W - I))` with one dense product; the cost does
/// not depend on the sparsity of `w`.
pub fn sem_loss_dense(data: &Dataset, w: ArrayView2<'_, f64>) -> Result<f64> {
    data.check(&w)?;
    let mut shifted = w.to_owned();
    for i in 0..data.d() {
        shifted[[i, i]] -= 1.0;
    }
    let product = data.gram().dot(&shifted);
    let total = Zip::from(&shifted)
        .and(&product)
        .fold(0.0, |acc, &s, &p| acc + s * p);
    Ok(total / (2.0 * data.n() as f64))
}

/// `(1/2n) |XW - X|²` computed from the samples directly.
pub fn sem_loss_direct(data: &Dataset, w: ArrayView2<'_, f64>) -> Result<f64> {
    data.check(&w)?;
    let x = data.x();
    let residual = x.dot(&w) - x;
    Ok(residual.iter().map(|r| r * r).sum::<f64>() / (2.0 * data.n() as f64))
}

/// Least-squares loss plus `lambda1 |W|_1`.
pub fn full_objective(data: &Dataset, w: ArrayView2<'_, f64>, lambda1: f64) -> Result<f64> {
    check_nonnegative("lambda1", lambda1)?;
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    Ok(sem_loss(data, w)? + lambda1 * l1)
}

/// Smooth part `loss(W) + lambda2/2 |W - anchor|²`.
pub fn smooth_objective(
    data: &Dataset,
    w: ArrayView2<'_, f64>,
    ctx: &PenaltyContext,
) -> Result<f64> {
    let proximity = if ctx.lambda2 == 0.0 {
        0.0
    } else {
        data.check(&ctx.anchor.view())?;
        Zip::from(&w)
            .and(ctx.anchor.as_array())
            .fold(0.0, |acc, &a, &b| acc + (a - b) * (a - b))
    };
    Ok(sem_loss(data, w)? + 0.5 * ctx.lambda2 * proximity)
}

/// Smooth part plus `lambda1 |W|_1`.
pub fn penalized_objective(
    data: &Dataset,
    w: ArrayView2<'_, f64>,
    ctx: &PenaltyContext,
) -> Result<f64> {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    Ok(smooth_objective(data, w, ctx)? + ctx.lambda1 * l1)
}

/// Gradient of the smooth part: `(1/n) XᵗX (W - I) + lambda2 (W - anchor)`.
pub fn penalized_gradient(
    data: &Dataset,
    w: ArrayView2<'_, f64>,
    ctx: &PenaltyContext,
) -> Result<Array2<f64>> {
    data.check(&w)?;
    data.check(&ctx.anchor.view())?;
    let inv_n = 1.0 / data.n() as f64;
    let gram = data.gram();
    let mut grad = gram.dot(&w);
    Zip::from(&mut grad)
        .and(gram)
        .and(&w)
        .and(ctx.anchor.as_array())
        .for_each(|g, &c, &wv, &a| {
            *g = inv_n * (*g - c) + ctx.lambda2 * (wv - a);
        });
    Ok(grad)
}

/// Upper bound on the Lipschitz constant of the penalized gradient:
/// `1.01 * |XᵗX + n lambda2 I|_2 / n`.
pub fn lipschitz_bound(data: &Dataset, lambda2: f64) -> Result<f64> {
    check_nonnegative("lambda2", lambda2)?;
    let n = data.n() as f64;
    let mut shifted = data.gram().clone();
    for i in 0..data.d() {
        shifted[[i, i]] += n * lambda2;
    }
    let norm = checked_spectral_norm(shifted.view(), POWER_ITERATION_TOL, POWER_ITERATION_MAX)?;
    Ok(LIPSCHITZ_SAFETY * norm / n)
}

/// Entrywise `sign(w) max(|w| - tau, 0)` with the diagonal forced to zero.
pub fn soft_threshold_array(w: ArrayView2<'_, f64>, tau: f64) -> Array2<f64> {
    let mut out = w.mapv(|v| v.signum() * (v.abs() - tau).max(0.0));
    for i in 0..out.nrows().min(out.ncols()) {
        out[[i, i]] = 0.0;
    }
    out
}

/// Proximal operator of `tau |W|_1` on a weight matrix.
pub fn soft_threshold(w: &WeightMatrix, tau: f64) -> Result<WeightMatrix> {
    check_nonnegative("tau", tau)?;
    WeightMatrix::new(soft_threshold_array(w.view(), tau))
}
