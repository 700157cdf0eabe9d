use masdag::graph::WeightMatrix;
use masdag::objective::{
    full_objective, lipschitz_bound, penalized_gradient, penalized_objective, sem_loss,
    sem_loss_direct, smooth_objective, soft_threshold_array, Dataset, PenaltyContext,
};
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample::<f64, _>(StandardNormal))
}

fn sparse_weights(d: usize, density: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((d, d), |(i, j)| {
        if i != j && rng.gen_bool(density) {
            rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        }
    })
}

fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
fn jacobi_max_eigenvalue(mut a: Array2<f64>) -> f64 {
    let d = a.nrows();
    for _ in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..d).map(|i| a[[i, i]]).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn loss_examples() {
    let data = Dataset::new(array![[1.0, 1.0]]).unwrap();
    assert_eq!(sem_loss(&data, Array2::zeros((2, 2)).view()).unwrap(), 1.0);
    let w = array![[0.0, 1.0], [0.0, 0.0]];
    assert_eq!(sem_loss(&data, w.view()).unwrap(), 0.5);
    assert!((full_objective(&data, w.view(), 0.1).unwrap() - 0.6).abs() < 1e-15);
    assert!(sem_loss(&data, Array2::zeros((3, 3)).view()).is_err());
}

#[test]
fn gradient_examples() {
    let data = Dataset::new(Array2::eye(2)).unwrap();
    let ctx = PenaltyContext::new(0.0, 0.0, WeightMatrix::zeros(2)).unwrap();
    let g = penalized_gradient(&data, Array2::zeros((2, 2)).view(), &ctx).unwrap();
    assert_eq!(g, array![[-0.5, 0.0], [0.0, -0.5]]);
    let g = penalized_gradient(&data, Array2::eye(2).view(), &ctx).unwrap();
    assert_eq!(g, Array2::zeros((2, 2)));
}

#[test]
fn gram_and_direct_losses_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..100 {
        let d = 2 + trial % 15;
        let n = 1 + trial % 40;
        let data = Dataset::new(gaussian(n, d, &mut rng)).unwrap();
        let density = [0.05, 0.5, 1.0][trial % 3];
        let w = sparse_weights(d, density, &mut rng);
        let a = sem_loss(&data, w.view()).unwrap();
        let b = sem_loss_direct(&data, w.view()).unwrap();
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let h = 1e-5;
    for trial in 0..50 {
        let d = 2 + trial % 9;
        let n = 2 + trial % 19;
        let lambda2 = if trial % 2 == 0 { 0.0 } else { 20.0 };
        let data = Dataset::new(gaussian(n, d, &mut rng)).unwrap();
        let anchor = WeightMatrix::new(sparse_weights(d, 0.3, &mut rng)).unwrap();
        let ctx = PenaltyContext::new(0.0, lambda2, anchor).unwrap();
        let w = sparse_weights(d, 0.6, &mut rng);
        let g = penalized_gradient(&data, w.view(), &ctx).unwrap();
        let mut fd = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                let mut up = w.clone();
                up[[i, j]] += h;
                let mut down = w.clone();
                down[[i, j]] -= h;
                fd[[i, j]] = (smooth_objective(&data, up.view(), &ctx).unwrap()
                    - smooth_objective(&data, down.view(), &ctx).unwrap())
                    / (2.0 * h);
            }
        }
        let err = frobenius(&(&g - &fd)) / frobenius(&fd).max(1e-12);
        assert!(err <= 1e-5, "trial {trial}: relative error {err}");
    }
}

#[test]
fn penalized_objective_is_strongly_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..100 {
        let d = 2 + trial % 8;
        let data = Dataset::new(gaussian(10, d, &mut rng)).unwrap();
        let lambda2 = [0.0, 1.0, 20.0][trial % 3];
        let anchor = WeightMatrix::new(sparse_weights(d, 0.3, &mut rng)).unwrap();
        let ctx = PenaltyContext::new(0.1, lambda2, anchor).unwrap();
        let a = sparse_weights(d, 0.7, &mut rng);
        let b = sparse_weights(d, 0.7, &mut rng);
        let theta: f64 = rng.gen_range(0.01..0.99);
        let mix = &a * theta + &b * (1.0 - theta);
        let lhs = penalized_objective(&data, mix.view(), &ctx).unwrap();
        let rhs = theta * penalized_objective(&data, a.view(), &ctx).unwrap()
            + (1.0 - theta) * penalized_objective(&data, b.view(), &ctx).unwrap()
            - 0.5 * lambda2 * theta * (1.0 - theta) * frobenius(&(&a - &b)).powi(2);
        assert!(lhs <= rhs + 1e-9, "trial {trial}: {lhs} > {rhs}");
    }
}

#[test]
fn proximal_step_does_not_increase_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for trial in 0..100 {
        let d = 2 + trial % 12;
        let data = Dataset::new(gaussian(5 + trial % 50, d, &mut rng)).unwrap();
        let lambda2 = [0.0, 20.0][trial % 2];
        let anchor = WeightMatrix::new(sparse_weights(d, 0.3, &mut rng)).unwrap();
        let ctx = PenaltyContext::new(0.1, lambda2, anchor).unwrap();
        let w = sparse_weights(d, 0.5, &mut rng);
        let l = lipschitz_bound(&data, lambda2).unwrap();
        let g = penalized_gradient(&data, w.view(), &ctx).unwrap();
        let next = soft_threshold_array((&w - &(g / l)).view(), ctx.lambda1 / l);
        let before = penalized_objective(&data, w.view(), &ctx).unwrap();
        let after = penalized_objective(&data, next.view(), &ctx).unwrap();
        assert!(after <= before + 1e-12 * before.abs(), "{after} > {before}");
    }
}

#[test]
fn lipschitz_examples() {
    let data = Dataset::new(array![[2.0, 0.0], [0.0, 1.0]]).unwrap();
    // n = 2, gram = diag(4, 1)
    let l0 = lipschitz_bound(&data, 0.0).unwrap();
    assert!((l0 / (1.01 * 2.0) - 1.0).abs() < 1e-6);
    let l20 = lipschitz_bound(&data, 20.0).unwrap();
    assert!((l20 / (1.01 * 22.0) - 1.0).abs() < 1e-5);
}

#[test]
fn lipschitz_matches_dense_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for trial in 0..50 {
        let d = 2 + trial % 9;
        let n = 1 + trial % 30;
        let data = Dataset::new(gaussian(n, d, &mut rng)).unwrap();
        let l = lipschitz_bound(&data, 0.0).unwrap();
        let lambda = jacobi_max_eigenvalue(data.gram().clone()) / n as f64;
        let ratio = l / lambda;
        assert!((ratio - 1.01).abs() <= 1e-4, "trial {trial}: ratio {ratio}");
    }
}

#[test]
fn soft_threshold_examples() {
    let w = array![[0.0, 0.5], [-0.05, 0.0]];
    let s = soft_threshold_array(w.view(), 0.1);
    assert!((s[[0, 1]] - 0.4).abs() < 1e-15);
    assert_eq!(s[[1, 0]], 0.0);
    assert_eq!(soft_threshold_array(w.view(), 0.0), w);
}
