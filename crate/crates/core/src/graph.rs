//! Dense directed-graph primitives.
//!
//! Arcs follow the row-source convention of the linear SEM `x = xW`: entry
//! `(i, j)` of a weight matrix is the weight of the arc `i -> j`.

use std::collections::VecDeque;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Dense `d x d` edge-weight matrix with a zero diagonal and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(Array2<f64>);

impl WeightMatrix {
    /// Validates and wraps a square array.
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be square, got {rows}x{cols}"
            )));
        }
        if let Some(((i, j), w)) = weights.indexed_iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::InvalidMatrix(format!("entry ({i},{j}) is {w}")));
        }
        if let Some(i) = (0..rows).find(|&i| weights[[i, i]] != 0.0) {
            return Err(Error::InvalidMatrix(format!(
                "diagonal entry ({i},{i}) is {}",
                weights[[i, i]]
            )));
        }
        Ok(Self(weights))
    }

    /// Wraps an array after zeroing its diagonal; fails only on non-finite entries.
    pub fn from_array_zero_diagonal(mut weights: Array2<f64>) -> Result<Self> {
        let d = weights.nrows().min(weights.ncols());
        for i in 0..d {
            weights[[i, i]] = 0.0;
        }
        Self::new(weights)
    }

    pub fn zeros(d: usize) -> Self {
        Self(Array2::zeros((d, d)))
    }

    /// Builds a matrix from `(source, target, weight)` triplets.
    pub fn from_triplets(d: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = Array2::zeros((d, d));
        for &(i, j, w) in triplets {
            if i >= d || j >= d {
                return Err(Error::InvalidMatrix(format!(
                    "arc ({i},{j}) out of range for d = {d}"
                )));
            }
            weights[[i, j]] = w;
        }
        Self::new(weights)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.0[[source, target]]
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// Non-zero entries as `(source, target, weight)` in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.0
            .indexed_iter()
            .filter(|(_, &w)| w != 0.0)
            .map(|((i, j), &w)| (i, j, w))
            .collect()
    }

    pub fn squared_norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|w| w.abs()).sum()
    }

    /// Relabels nodes so that node `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let d = self.dim();
        let mut out = Array2::zeros((d, d));
        for ((i, j), &w) in self.0.indexed_iter() {
            out[[perm[i], perm[j]]] = w;
        }
        Self(out)
    }
}

/// Boolean adjacency matrix; `mask[(i, j)]` marks the arc `i -> j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMask(Array2<bool>);

impl AdjacencyMask {
    pub fn empty(d: usize) -> Self {
        Self(Array2::from_elem((d, d), false))
    }

    pub fn new(mask: Array2<bool>) -> Result<Self> {
        let (rows, cols) = mask.dim();
        if rows != cols {
            return Err(Error::InvalidMatrix(format!(
                "mask must be square, got {rows}x{cols}"
            )));
        }
        if (0..rows).any(|i| mask[[i, i]]) {
            return Err(Error::InvalidMatrix("mask has a self-loop".into()));
        }
        Ok(Self(mask))
    }

    pub fn from_arcs(d: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut mask = Self::empty(d);
        for &(i, j) in arcs {
            mask.insert(i, j)?;
        }
        Ok(mask)
    }

    pub fn insert(&mut self, source: usize, target: usize) -> Result<()> {
        let d = self.dim();
        if source >= d || target >= d {
            return Err(Error::InvalidMatrix(format!(
                "arc ({source},{target}) out of range for d = {d}"
            )));
        }
        if source == target {
            return Err(Error::InvalidMatrix("mask has a self-loop".into()));
        }
        self.0[[source, target]] = true;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn contains(&self, source: usize, target: usize) -> bool {
        self.0[[source, target]]
    }

    pub fn num_arcs(&self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .indexed_iter()
            .filter(|(_, &a)| a)
            .map(|((i, j), _)| (i, j))
    }

    pub fn as_array(&self) -> &Array2<bool> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.t().to_owned())
    }

    /// Relabels nodes so that node `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.dim());
        for (i, j) in self.arcs() {
            out.0[[perm[i], perm[j]]] = true;
        }
        out
    }

    /// Returns true if every arc of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(&a, &b)| !a || b)
    }
}

/// A permutation of node indices together with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOrder {
    order: Vec<usize>,
    inverse: Vec<usize>,
}

impl NodeOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let d = order.len();
        let mut inverse = vec![usize::MAX; d];
        for (position, &node) in order.iter().enumerate() {
            if node >= d {
                return Err(Error::InvalidOrder(format!("node {node} out of range")));
            }
            if inverse[node] != usize::MAX {
                return Err(Error::InvalidOrder(format!("node {node} repeated")));
            }
            inverse[node] = position;
        }
        Ok(Self { order, inverse })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            order: (0..d).collect(),
            inverse: (0..d).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Nodes listed by position.
    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Position of each node (the argsort of the order).
    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn position(&self, node: usize) -> usize {
        self.inverse[node]
    }
}

/// Kahn's source elimination. Runs in `O(d + |E|)` after building adjacency lists.
pub fn topological_order(mask: &AdjacencyMask) -> Option<NodeOrder> {
    let d = mask.dim();
    let mut in_degree = vec![0usize; d];
    let mut children = vec![Vec::new(); d];
    for (i, j) in mask.arcs() {
        in_degree[j] += 1;
        children[i].push(j);
    }
    let mut ready: VecDeque<usize> = (0..d).filter(|&v| in_degree[v] == 0).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(v) = ready.pop_front() {
        order.push(v);
        for &c in &children[v] {
            in_degree[c] -= 1;
            if in_degree[c] == 0 {
                ready.push_back(c);
            }
        }
    }
    (order.len() == d).then(|| NodeOrder::new(order).expect("Kahn output is a permutation"))
}

pub fn is_acyclic(mask: &AdjacencyMask) -> bool {
    topological_order(mask).is_some()
}

/// Acyclicity of the support of a weight matrix.
pub fn is_acyclic_weights(weights: &WeightMatrix) -> bool {
    is_acyclic(&threshold(weights, 0.0))
}

/// Keeps `W(i, j)` only when `i` comes strictly after `j` in `order`.
///
/// Equivalent to permuting rows and columns by `order`, keeping the strictly
/// lower triangle and permuting back.
pub fn triangular_project(weights: &WeightMatrix, order: &NodeOrder) -> Result<WeightMatrix> {
    let d = weights.dim();
    if order.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: order.len(),
        });
    }
    let inverse = order.inverse();
    let mut out = weights.as_array().clone();
    for ((i, j), w) in out.indexed_iter_mut() {
        if inverse[i] <= inverse[j] {
            *w = 0.0;
        }
    }
    Ok(WeightMatrix(out))
}

/// `mask(i, j) = |W(i, j)| > tau` off the diagonal.
pub fn threshold(weights: &WeightMatrix, tau: f64) -> AdjacencyMask {
    let mut mask = weights.as_array().mapv(|w| w.abs() > tau);
    for i in 0..mask.nrows() {
        mask[[i, i]] = false;
    }
    AdjacencyMask(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn triangular_masks_are_acyclic() {
        for d in 1..8 {
            let arcs: Vec<_> = (0..d)
                .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                .collect();
            assert!(is_acyclic(&AdjacencyMask::from_arcs(d, &arcs).unwrap()));
        }
    }

    #[test]
    fn two_cycle_is_cyclic() {
        let mask = AdjacencyMask::from_arcs(2, &[(0, 1), (1, 0)]).unwrap();
        assert!(!is_acyclic(&mask));
    }

    #[test]
    fn empty_mask_is_acyclic() {
        assert!(is_acyclic(&AdjacencyMask::empty(5)));
    }

    #[test]
    fn topological_order_respects_arcs() {
        let mask = AdjacencyMask::from_arcs(4, &[(3, 1), (1, 0), (3, 2), (2, 0)]).unwrap();
        let order = topological_order(&mask).unwrap();
        for (i, j) in mask.arcs() {
            assert!(order.position(i) < order.position(j));
        }
    }

    #[test]
    fn project_two_cycle() {
        let w = WeightMatrix::new(array![[0.0, 2.0], [1.0, 0.0]]).unwrap();
        let order = NodeOrder::new(vec![1, 0]).unwrap();
        let p = triangular_project(&w, &order).unwrap();
        assert_eq!(p.as_array(), &array![[0.0, 2.0], [0.0, 0.0]]);
    }

    #[test]
    fn project_identity_keeps_strict_lower_triangle() {
        let w =
            WeightMatrix::new(array![[0.0, 1.0, 2.0], [3.0, 0.0, 4.0], [5.0, 6.0, 0.0]]).unwrap();
        let p = triangular_project(&w, &NodeOrder::identity(3)).unwrap();
        assert_eq!(
            p.as_array(),
            &array![[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [5.0, 6.0, 0.0]]
        );
    }

    #[test]
    fn project_zero_matrix() {
        let order = NodeOrder::new(vec![2, 0, 3, 1]).unwrap();
        let p = triangular_project(&WeightMatrix::zeros(4), &order).unwrap();
        assert_eq!(p, WeightMatrix::zeros(4));
    }

    #[test]
    fn project_rejects_wrong_order_length() {
        let err = triangular_project(&WeightMatrix::zeros(3), &NodeOrder::identity(2));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn threshold_examples() {
        let w = WeightMatrix::new(array![[0.0, 0.5], [-0.05, 0.0]]).unwrap();
        let mask = threshold(&w, 0.1);
        assert_eq!(mask.arcs().collect::<Vec<_>>(), vec![(0, 1)]);

        let dense =
            WeightMatrix::new(array![[0.0, 0.3, -0.2], [1.0, 0.0, 0.1], [-4.0, 2.0, 0.0]]).unwrap();
        assert_eq!(threshold(&dense, 0.0).num_arcs(), 6);
        assert_eq!(threshold(&dense, 4.5).num_arcs(), 0);
    }

    #[test]
    fn weight_matrix_validation() {
        assert!(WeightMatrix::new(array![[1.0, 0.0], [0.0, 0.0]]).is_err());
        assert!(WeightMatrix::new(array![[0.0, f64::NAN], [0.0, 0.0]]).is_err());
        assert!(WeightMatrix::new(Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn node_order_validation() {
        assert!(NodeOrder::new(vec![0, 0]).is_err());
        assert!(NodeOrder::new(vec![0, 2]).is_err());
        let o = NodeOrder::new(vec![2, 0, 1]).unwrap();
        assert_eq!(o.inverse(), &[1, 2, 0]);
    }
}
