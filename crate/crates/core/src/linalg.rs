//! Power iteration for the spectral norm of symmetric matrices.

use ndarray::{Array1, ArrayView2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest absolute eigenvalue of a symmetric matrix.
///
/// Starts from the all-ones vector; a second run from a fixed irregular
/// vector guards against starts orthogonal to the leading eigenvector, and
/// the larger estimate is kept.
pub fn spectral_norm_symmetric(
    matrix: ArrayView2<'_, f64>,
    rel_tol: f64,
    max_iter: usize,
) -> SpectralEstimate {
    let d = matrix.nrows();
    let ones = Array1::ones(d);
    let irregular = Array1::from_iter((0..d).map(|i| 1.0 + ((i * 7919 + 13) % 101) as f64 / 101.0));
    let a = power_iteration(matrix, ones, rel_tol, max_iter);
    let b = power_iteration(matrix, irregular, rel_tol, max_iter);
    let best = if b.value > a.value { b } else { a };
    SpectralEstimate {
        converged: a.converged && b.converged,
        iterations: a.iterations.max(b.iterations),
        ..best
    }
}

fn power_iteration(
    matrix: ArrayView2<'_, f64>,
    start: Array1<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> SpectralEstimate {
    let mut v = start;
    let norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        return SpectralEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    v /= norm;
    let mut estimate = 0.0;
    for iteration in 1..=max_iter {
        let next = matrix.dot(&v);
        let next_norm = next.dot(&next).sqrt();
        if next_norm == 0.0 {
            // v lies in the null space; zero is all this start can see
            return SpectralEstimate {
                value: 0.0,
                iterations: iteration,
                converged: true,
            };
        }
        let previous = estimate;
        estimate = next_norm;
        v = next / next_norm;
        if iteration > 1 && (estimate - previous).abs() <= rel_tol * estimate {
            return SpectralEstimate {
                value: estimate,
                iterations: iteration,
                converged: true,
            };
        }
    }
    SpectralEstimate {
        value: estimate,
        iterations: max_iter,
        converged: false,
    }
}

/// As [`spectral_norm_symmetric`] but failing when the iteration stalls.
pub fn checked_spectral_norm(
    matrix: ArrayView2<'_, f64>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let est = spectral_norm_symmetric(matrix, rel_tol, max_iter);
    if est.converged {
        Ok(est.value)
    } else {
        Err(Error::NoConvergence {
            iterations: est.iterations,
            estimate: est.value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonal_matrix() {
        let m = array![[4.0, 0.0], [0.0, 1.0]];
        let est = spectral_norm_symmetric(m.view(), 1e-10, 1000);
        assert!(est.converged);
        assert!((est.value - 4.0).abs() < 1e-8);
    }

    #[test]
    fn start_orthogonal_to_leading_eigenvector() {
        // ones is in the null space of this matrix
        let m = array![[1.0, -1.0], [-1.0, 1.0]];
        let est = spectral_norm_symmetric(m.view(), 1e-10, 1000);
        assert!((est.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn zero_matrix() {
        let m = ndarray::Array2::<f64>::zeros((3, 3));
        assert_eq!(spectral_norm_symmetric(m.view(), 1e-6, 10).value, 0.0);
    }
}
