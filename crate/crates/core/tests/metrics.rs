use std::f64::consts::PI;

use masdag::graph::{AdjacencyMask, WeightMatrix};
use masdag::metrics::{
    average_precision, average_precision_scores, confusion_rates, default_thresholds, gaussian_nll,
    shd_normalized, threshold_sweep,
};
use masdag::objective::Dataset;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// AP from the definition: one cut per distinct score, predicting every
/// item scored at or above it.
fn brute_force_ap(scores: &[f64], labels: &[bool]) -> f64 {
    let positives = labels.iter().filter(|&&l| l).count() as f64;
    let mut cuts: Vec<f64> = scores.to_vec();
    cuts.sort_by(|a, b| b.total_cmp(a));
    cuts.dedup();
    let mut ap = 0.0;
    let mut previous_recall = 0.0;
    for cut in cuts {
        let predicted = scores.iter().filter(|&&s| s >= cut).count() as f64;
        let hits = scores
            .iter()
            .zip(labels)
            .filter(|(&s, &l)| s >= cut && l)
            .count() as f64;
        let recall = hits / positives;
        ap += (recall - previous_recall) * hits / predicted;
        previous_recall = recall;
    }
    ap
}

fn random_mask(d: usize, p: f64, rng: &mut ChaCha8Rng) -> AdjacencyMask {
    let mut mask = AdjacencyMask::empty(d);
    for i in 0..d {
        for j in 0..d {
            if i != j && rng.gen_bool(p) {
                mask.insert(i, j).unwrap();
            }
        }
    }
    mask
}

#[test]
fn ap_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for trial in 0..500 {
        let len = 1 + trial % 60;
        // coarse scores force ties
        let levels = [3, 10, 1000][trial % 3];
        let scores: Vec<f64> = (0..len)
            .map(|_| rng.gen_range(0..levels) as f64 / levels as f64)
            .collect();
        let mut labels: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.3)).collect();
        labels[rng.gen_range(0..len)] = true;
        let ap = average_precision_scores(&scores, &labels).unwrap();
        assert!((ap - brute_force_ap(&scores, &labels)).abs() <= 1e-12);
        assert!((0.0..=1.0).contains(&ap));
    }
}

#[test]
fn ap_examples() {
    let ap = average_precision_scores(&[0.9, 0.8, 0.1], &[true, false, true]).unwrap();
    assert!((ap - 5.0 / 6.0).abs() < 1e-15);
    let ap = average_precision_scores(&[3.0, 2.0, 1.0, 0.0], &[true, true, false, false]).unwrap();
    assert_eq!(ap, 1.0);
    let truth = AdjacencyMask::from_arcs(4, &[(0, 1), (2, 3), (1, 3)]).unwrap();
    let ap = average_precision(&WeightMatrix::zeros(4), &truth).unwrap();
    assert!((ap - 3.0 / 12.0).abs() < 1e-15);
    assert!(average_precision(&WeightMatrix::zeros(4), &AdjacencyMask::empty(4)).is_err());
}

#[test]
fn ap_is_rescaling_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let d = 8;
        let truth = random_mask(d, 0.2, &mut rng);
        if truth.num_arcs() == 0 {
            continue;
        }
        let w = WeightMatrix::from_array_zero_diagonal(Array2::from_shape_fn((d, d), |_| {
            (rng.gen_range(0..5) as f64) * 0.25
        }))
        .unwrap();
        let base = average_precision(&w, &truth).unwrap();
        for c in [0.5, 4.0] {
            let scaled = WeightMatrix::new(w.as_array() * c).unwrap();
            assert_eq!(average_precision(&scaled, &truth).unwrap(), base);
        }
    }
}

#[test]
fn random_rankings_score_near_prevalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let total = 2000;
    let positives = 100;
    let mut labels: Vec<bool> = (0..total).map(|i| i < positives).collect();
    let scores: Vec<f64> = (0..total).map(|i| i as f64).collect();
    let mut sum = 0.0;
    for _ in 0..1000 {
        labels.shuffle(&mut rng);
        sum += average_precision_scores(&scores, &labels).unwrap();
    }
    let mean = sum / 1000.0;
    assert!((mean - 0.05).abs() <= 0.02, "mean AP {mean}");
}

#[test]
fn confusion_and_shd_examples() {
    let m = |d, arcs: &[(usize, usize)]| AdjacencyMask::from_arcs(d, arcs).unwrap();
    let truth = m(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
    let c = confusion_rates(&m(4, &[(0, 1), (1, 2), (2, 3)]), &truth).unwrap();
    assert_eq!((c.directed.fnr, c.directed.fpr), (0.25, 0.0));

    let c = confusion_rates(&m(2, &[(1, 0)]), &m(2, &[(0, 1)])).unwrap();
    assert_eq!((c.directed.fnr, c.directed.fpr), (1.0, 1.0));
    assert_eq!((c.undirected.fnr, c.undirected.fpr), (0.0, 0.0));

    let truth = m(3, &[(0, 1), (1, 2)]);
    assert_eq!(
        shd_normalized(&m(3, &[(1, 0), (1, 2)]), &truth).unwrap().0,
        0.5
    );
    assert_eq!(shd_normalized(&truth, &truth).unwrap(), (0.0, 0.0));
    assert_eq!(
        shd_normalized(&AdjacencyMask::empty(3), &truth).unwrap(),
        (1.0, 1.0)
    );
}

#[test]
fn undirected_view_ignores_orientation() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..100 {
        let truth = random_mask(7, 0.2, &mut rng);
        let pred = random_mask(7, 0.2, &mut rng);
        let a = confusion_rates(&pred, &truth).unwrap();
        let b = confusion_rates(&pred.transpose(), &truth).unwrap();
        assert_eq!(a.undirected, b.undirected);
    }
}

#[test]
fn shd_is_relabel_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..100 {
        let truth = random_mask(8, 0.2, &mut rng);
        let pred = random_mask(8, 0.2, &mut rng);
        let mut perm: Vec<usize> = (0..8).collect();
        perm.shuffle(&mut rng);
        assert_eq!(
            shd_normalized(&pred, &truth).unwrap(),
            shd_normalized(&pred.relabel(&perm), &truth.relabel(&perm)).unwrap()
        );
    }
}

#[test]
fn threshold_sweep_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let d = 10;
    let truth = random_mask(d, 0.2, &mut rng);
    let truth_weights =
        WeightMatrix::new(truth.as_array().mapv(|b| f64::from(u8::from(b)))).unwrap();
    let rows = threshold_sweep(&truth_weights, &truth, &[0.0]).unwrap();
    assert_eq!(
        rows[0].fnr_dir + rows[0].fpr_dir + rows[0].shd_norm_dir,
        0.0
    );

    let w = WeightMatrix::from_array_zero_diagonal(Array2::from_shape_fn((d, d), |_| {
        rng.sample::<f64, _>(StandardNormal)
    }))
    .unwrap();
    let grid = default_thresholds();
    assert_eq!(grid.len(), 22);
    let rows = threshold_sweep(&w, &truth, &grid).unwrap();
    assert!(rows.windows(2).all(|r| r[1].fpr_dir <= r[0].fpr_dir));
    let rows = threshold_sweep(&w, &truth, &[1e6]).unwrap();
    assert_eq!((rows[0].fnr_dir, rows[0].fpr_dir), (1.0, 0.0));
    assert!(threshold_sweep(&w, &truth, &[0.5, 0.1]).is_err());
    assert!(threshold_sweep(&w, &truth, &[-0.1]).is_err());
}

#[test]
fn nll_examples() {
    let n = 4;
    let x = Array2::from_shape_fn((n, 2), |(i, _)| if i % 2 == 0 { 1.0 } else { -1.0 });
    let val = Dataset::new(x.clone()).unwrap();
    let zero = WeightMatrix::zeros(2);
    let unit = gaussian_nll(&val, &zero).unwrap();
    assert!((unit - ((2.0 * PI).ln() + 1.0)).abs() < 1e-12);

    let halved = gaussian_nll(&Dataset::new(x * 0.5).unwrap(), &zero).unwrap();
    assert!((unit - halved - 4f64.ln()).abs() < 1e-12);

    let y = Array2::from_shape_fn((n, 2), |(i, _)| i as f64 + 1.0);
    let exact = WeightMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let floor = gaussian_nll(&Dataset::new(y).unwrap(), &exact).unwrap();
    assert!((floor - ((2.0 * PI * 1e-12).ln() + 1.0)).abs() < 1e-9);

    assert!(gaussian_nll(&Dataset::new(Array2::ones((1, 2))).unwrap(), &zero).is_err());
}
