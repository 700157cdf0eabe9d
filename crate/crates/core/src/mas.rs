//! Maximum acyclic subgraph extraction on squared edge weights.
//!
//! [`greedy_mas`] is the vectorized Eades-style heuristic used inside the
//! solvers; [`exact_mas`] is a factorial-time oracle for small graphs.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::graph::{triangular_project, NodeOrder, WeightMatrix};

/// Largest node count accepted by [`exact_mas`].
pub const EXACT_MAS_LIMIT: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct MasResult {
    /// Acyclic restriction of the input to arcs consistent with `order`.
    pub projected: WeightMatrix,
    /// Arc `i -> j` survives iff `i` sits strictly after `j` in this order.
    pub order: NodeOrder,
    /// Sum of squared weights kept.
    pub retained_weight: f64,
    /// Sum of squared weights dropped.
    pub removed_weight: f64,
}

impl MasResult {
    fn from_order(weights: &WeightMatrix, order: NodeOrder) -> Self {
        let projected =
            triangular_project(weights, &order).expect("order length matches matrix dimension");
        let inverse = order.inverse();
        let (mut retained_weight, mut removed_weight) = (0.0, 0.0);
        for ((i, j), w) in weights.as_array().indexed_iter() {
            if inverse[i] > inverse[j] {
                retained_weight += w * w;
            } else {
                removed_weight += w * w;
            }
        }
        Self {
            projected,
            order,
            retained_weight,
            removed_weight,
        }
    }
}

/// Greedy maximum acyclic subgraph on squared weights.
///
/// Repeatedly places the unplaced node with the smallest incoming squared
/// weight at the back of the order (ties go to the smallest index), then
/// discounts its outgoing arcs from the scores of the remaining nodes.
/// `O(d^2)` overall.
pub fn greedy_mas(weights: &WeightMatrix) -> MasResult {
    let d = weights.dim();
    let squared: Array2<f64> = weights.as_array().mapv(|w| w * w);
    let mut scores: Array1<f64> = squared.sum_axis(Axis(0));
    let max_score = scores.iter().copied().fold(0.0_f64, f64::max);
    let sentinel = (d as f64 + 1.0) * max_score + 1.0;

    // Number of positive incoming arcs from unplaced nodes. Once it reaches
    // zero the score is exactly zero, not a subtraction residue.
    let mut live_in: Vec<usize> = (0..d)
        .map(|j| squared.column(j).iter().filter(|&&w| w > 0.0).count())
        .collect();
    let mut placed = vec![false; d];
    let mut order = vec![0usize; d];

    for step in 0..d {
        let node = argmin(&scores, &placed);
        order[d - 1 - step] = node;
        placed[node] = true;
        scores[node] = sentinel;
        for (j, &w) in squared.row(node).iter().enumerate() {
            if w > 0.0 {
                scores[j] -= w;
                live_in[j] -= 1;
                if live_in[j] == 0 && !placed[j] {
                    scores[j] = 0.0;
                }
            }
        }
    }

    let order = NodeOrder::new(order).expect("every node is placed exactly once");
    MasResult::from_order(weights, order)
}

/// First unplaced index of the minimum. Skipping placed nodes keeps the
/// order a permutation even when overflowed scores swamp the sentinel.
fn argmin(scores: &Array1<f64>, placed: &[bool]) -> usize {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if placed[i] {
            continue;
        }
        match best {
            Some(b) if s.partial_cmp(&scores[b]) != Some(std::cmp::Ordering::Less) => {}
            _ => best = Some(i),
        }
    }
    best.expect("an unplaced node remains")
}

/// Exhaustive search over all `d!` node orders.
///
/// Ties keep the lexicographically smallest order.
pub fn exact_mas(weights: &WeightMatrix) -> Result<MasResult> {
    let d = weights.dim();
    if d > EXACT_MAS_LIMIT {
        return Err(Error::TooLarge {
            d,
            limit: EXACT_MAS_LIMIT,
        });
    }
    let squared: Array2<f64> = weights.as_array().mapv(|w| w * w);
    let mut perm: Vec<usize> = (0..d).collect();
    let mut position = vec![0usize; d];
    let mut best_order = perm.clone();
    let mut best_value = f64::NEG_INFINITY;
    loop {
        for (p, &node) in perm.iter().enumerate() {
            position[node] = p;
        }
        let mut value = 0.0;
        for ((i, j), &w) in squared.indexed_iter() {
            if position[i] > position[j] {
                value += w;
            }
        }
        if value > best_value {
            best_value = value;
            best_order.copy_from_slice(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let order = NodeOrder::new(best_order).expect("permutation");
    Ok(MasResult::from_order(weights, order))
}

/// Advances to the next lexicographic permutation; false once wrapped.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let Some(pivot) = (0..n - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let successor = (pivot + 1..n)
        .rev()
        .find(|&j| perm[j] > perm[pivot])
        .unwrap();
    perm.swap(pivot, successor);
    perm[pivot + 1..].reverse();
    true
}
