//! Synthetic linear-SEM benchmarks: random DAGs, random edge weights and
//! samples `X = E (I - W)^{-1}` under Gaussian, exponential or Gumbel noise.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gumbel, Normal};

use crate::error::{Error, Result};
use crate::graph::{threshold, AdjacencyMask, NodeOrder, WeightMatrix};
use crate::objective::Dataset;

/// Smallest absolute edge weight.
pub const WEIGHT_LOW: f64 = 0.5;
/// Largest absolute edge weight.
pub const WEIGHT_HIGH: f64 = 2.0;
/// Range of per-node noise scales in the non-equal-variance setting.
pub const NV_SCALE_RANGE: (f64, f64) = (0.5, 1.5);

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// The generator every seeded entry point uses.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphModel {
    ErdosRenyi,
    ScaleFree,
}

/// Arc direction of preferential attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SfDirection {
    /// Existing node -> new node; hubs end up upstream.
    #[default]
    Downstream,
    /// New node -> existing node.
    Upstream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphSpec {
    pub d: usize,
    /// Expected number of arcs is `k * d`.
    pub k: usize,
    pub model: GraphModel,
    pub sf_direction: SfDirection,
}

impl GraphSpec {
    pub fn new(d: usize, k: usize, model: GraphModel) -> Self {
        Self {
            d,
            k,
            model,
            sf_direction: SfDirection::Downstream,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!(
                "graphs need d >= 2, got {}",
                self.d
            )));
        }
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if self.k >= self.d {
            return Err(Error::InvalidParameter(format!(
                "density k = {} impossible with d = {} nodes",
                self.k, self.d
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    Gaussian,
    Exponential,
    Gumbel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// Every node has scale 1.
    Equal,
    /// Scales drawn uniformly from [`NV_SCALE_RANGE`].
    NonEqual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub scale_mode: ScaleMode,
    pub scales: Vec<f64>,
}

impl NoiseSpec {
    /// Draws per-node scales for `d` nodes.
    pub fn sample<R: Rng + ?Sized>(
        family: NoiseFamily,
        scale_mode: ScaleMode,
        d: usize,
        rng: &mut R,
    ) -> Self {
        let scales = match scale_mode {
            ScaleMode::Equal => vec![1.0; d],
            ScaleMode::NonEqual => (0..d)
                .map(|_| rng.gen_range(NV_SCALE_RANGE.0..=NV_SCALE_RANGE.1))
                .collect(),
        };
        Self {
            family,
            scale_mode,
            scales,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = NV_SCALE_RANGE;
        if let Some(s) = self.scales.iter().find(|s| !(lo..=hi).contains(*s)) {
            return Err(Error::InvalidParameter(format!(
                "noise scale {s} outside [{lo}, {hi}]"
            )));
        }
        if self.scale_mode == ScaleMode::Equal && self.scales.iter().any(|&s| s != 1.0) {
            return Err(Error::InvalidParameter(
                "equal-variance noise requires unit scales".into(),
            ));
        }
        Ok(())
    }

    /// One zero-mean noise draw for a node with the given scale.
    fn draw<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> f64 {
        match self.family {
            NoiseFamily::Gaussian => Normal::new(0.0, scale).expect("positive scale").sample(rng),
            NoiseFamily::Exponential => {
                Exp::new(1.0 / scale).expect("positive rate").sample(rng) - scale
            }
            NoiseFamily::Gumbel => {
                Gumbel::new(0.0, scale).expect("positive scale").sample(rng) - scale * EULER_GAMMA
            }
        }
    }
}

/// A weighted DAG together with one of its topological orders.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub weights: WeightMatrix,
    pub mask: AdjacencyMask,
    /// Sources before targets.
    pub order: NodeOrder,
}

impl GroundTruth {
    /// Checks that every arc runs forward in `order`.
    pub fn validate(&self) -> Result<()> {
        let d = self.weights.dim();
        if self.mask.dim() != d || self.order.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.mask.dim().max(self.order.len()),
            });
        }
        let support = threshold(&self.weights, 0.0);
        if !support.is_subset_of(&self.mask) {
            return Err(Error::InvalidParameter(
                "weights have arcs outside the mask".into(),
            ));
        }
        if self
            .mask
            .arcs()
            .any(|(i, j)| self.order.position(i) >= self.order.position(j))
        {
            return Err(Error::Cyclic);
        }
        Ok(())
    }
}

/// Random DAG structure; weights are left at zero.
pub fn sample_dag<R: Rng + ?Sized>(spec: &GraphSpec, rng: &mut R) -> Result<GroundTruth> {
    spec.validate()?;
    match spec.model {
        GraphModel::ErdosRenyi => Ok(sample_erdos_renyi(spec, rng)),
        GraphModel::ScaleFree => Ok(sample_scale_free(spec, rng)),
    }
}

fn sample_erdos_renyi<R: Rng + ?Sized>(spec: &GraphSpec, rng: &mut R) -> GroundTruth {
    let d = spec.d;
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    // expected arc count k d over the d (d - 1) / 2 order-respecting pairs
    let p = (2.0 * spec.k as f64 / (d as f64 - 1.0)).min(1.0);
    let mut mask = AdjacencyMask::empty(d);
    for a in 0..d {
        for b in a + 1..d {
            if rng.gen::<f64>() < p {
                mask.insert(perm[a], perm[b])
                    .expect("distinct in-range nodes");
            }
        }
    }
    GroundTruth {
        weights: WeightMatrix::zeros(d),
        mask,
        order: NodeOrder::new(perm).expect("shuffled permutation"),
    }
}

fn sample_scale_free<R: Rng + ?Sized>(spec: &GraphSpec, rng: &mut R) -> GroundTruth {
    let (d, k) = (spec.d, spec.k);
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);

    // arcs (earlier, later) in insertion index space
    let mut arcs: Vec<(usize, usize)> = Vec::with_capacity(k * d);
    let mut degree = vec![0usize; d];
    for t in 1..=k {
        arcs.push((t - 1, t));
        degree[t - 1] += 1;
        degree[t] += 1;
    }
    let mut weights: Vec<f64> = Vec::with_capacity(d);
    for new in k + 1..d {
        weights.clear();
        weights.extend(degree[..new].iter().map(|&deg| deg as f64 + 1.0));
        for _ in 0..k {
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut target = new - 1;
            for (idx, &w) in weights.iter().enumerate() {
                if w > 0.0 && u < w {
                    target = idx;
                    break;
                }
                u -= w;
            }
            // guard against the roundoff case where u overshoots
            if weights[target] == 0.0 {
                target = weights.iter().rposition(|&w| w > 0.0).expect("k < new");
            }
            weights[target] = 0.0;
            arcs.push((target, new));
        }
        for &(target, _) in &arcs[arcs.len() - k..] {
            degree[target] += 1;
        }
        degree[new] += k;
    }

    let mut mask = AdjacencyMask::empty(d);
    for (a, b) in arcs {
        let (src, dst) = match spec.sf_direction {
            SfDirection::Downstream => (a, b),
            SfDirection::Upstream => (b, a),
        };
        mask.insert(perm[src], perm[dst])
            .expect("distinct in-range nodes");
    }
    let mut order = perm;
    if spec.sf_direction == SfDirection::Upstream {
        order.reverse();
    }
    GroundTruth {
        weights: WeightMatrix::zeros(d),
        mask,
        order: NodeOrder::new(order).expect("permutation"),
    }
}

/// Gives every arc a weight `s * u` with `u ~ U[0.5, 2]` and a fair sign `s`.
pub fn assign_weights<R: Rng + ?Sized>(truth: &GroundTruth, rng: &mut R) -> GroundTruth {
    let d = truth.mask.dim();
    let mut weights = Array2::zeros((d, d));
    for (i, j) in truth.mask.arcs() {
        let magnitude = rng.gen_range(WEIGHT_LOW..=WEIGHT_HIGH);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        weights[[i, j]] = sign * magnitude;
    }
    GroundTruth {
        weights: WeightMatrix::new(weights).expect("mask has no self-loops"),
        mask: truth.mask.clone(),
        order: truth.order.clone(),
    }
}

/// Draws `n` samples of `x = x W + e` by propagating along the topological order.
pub fn sample_data<R: Rng + ?Sized>(
    truth: &GroundTruth,
    noise: &NoiseSpec,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    truth.validate()?;
    noise.validate()?;
    let d = truth.weights.dim();
    if noise.scales.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: noise.scales.len(),
        });
    }
    let mut x = Array2::zeros((n, d));
    for mut row in x.rows_mut() {
        for (value, &scale) in row.iter_mut().zip(&noise.scales) {
            *value = noise.draw(scale, rng);
        }
    }
    propagate(&truth.weights, &truth.order, &mut x);
    Dataset::new(x)
}

/// Turns rows of noise `e` into `x` solving `x (I - W) = e`, in place.
pub fn propagate(weights: &WeightMatrix, order: &NodeOrder, samples: &mut Array2<f64>) {
    let parents: Vec<Vec<(usize, f64)>> = (0..weights.dim())
        .map(|j| {
            weights
                .as_array()
                .column(j)
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(i, &w)| (i, w))
                .collect()
        })
        .collect();
    for mut row in samples.rows_mut() {
        for &j in order.as_slice() {
            let inflow: f64 = parents[j].iter().map(|&(i, w)| row[i] * w).sum();
            row[j] += inflow;
        }
    }
}

/// A complete synthetic instance.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub truth: GroundTruth,
    pub noise: NoiseSpec,
    pub train: Dataset,
    pub validation: Dataset,
}

/// Structure, weights, scales and training data come from `seed`; the
/// validation set is an independent draw from `seed + 1`.
pub fn generate_benchmark(
    graph: &GraphSpec,
    family: NoiseFamily,
    scale_mode: ScaleMode,
    n_train: usize,
    n_val: usize,
    seed: u64,
) -> Result<Benchmark> {
    let mut rng = rng_from_seed(seed);
    let skeleton = sample_dag(graph, &mut rng)?;
    let truth = assign_weights(&skeleton, &mut rng);
    let noise = NoiseSpec::sample(family, scale_mode, graph.d, &mut rng);
    let train = sample_data(&truth, &noise, n_train, &mut rng)?;
    let mut val_rng = rng_from_seed(seed.wrapping_add(1));
    let validation = sample_data(&truth, &noise, n_val, &mut val_rng)?;
    Ok(Benchmark {
        truth,
        noise,
        train,
        validation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_acyclic;

    #[test]
    fn rejects_impossible_density() {
        let mut rng = rng_from_seed(0);
        let spec = GraphSpec::new(3, 4, GraphModel::ErdosRenyi);
        assert!(sample_dag(&spec, &mut rng).is_err());
        let spec = GraphSpec::new(3, 3, GraphModel::ScaleFree);
        assert!(sample_dag(&spec, &mut rng).is_err());
    }

    #[test]
    fn scale_free_arc_count() {
        let mut rng = rng_from_seed(3);
        for k in 1..4 {
            let spec = GraphSpec::new(10, k, GraphModel::ScaleFree);
            let g = sample_dag(&spec, &mut rng).unwrap();
            assert_eq!(g.mask.num_arcs(), k + (10 - k - 1) * k);
            assert!(is_acyclic(&g.mask));
            g.validate().unwrap();
        }
        let g = sample_dag(&GraphSpec::new(10, 1, GraphModel::ScaleFree), &mut rng).unwrap();
        assert_eq!(g.mask.num_arcs(), 9);
    }

    #[test]
    fn upstream_scale_free_is_consistent() {
        let mut rng = rng_from_seed(5);
        let mut spec = GraphSpec::new(30, 2, GraphModel::ScaleFree);
        spec.sf_direction = SfDirection::Upstream;
        let g = sample_dag(&spec, &mut rng).unwrap();
        g.validate().unwrap();
        assert!(is_acyclic(&g.mask));
    }

    #[test]
    fn empty_mask_gets_zero_weights() {
        let truth = GroundTruth {
            weights: WeightMatrix::zeros(4),
            mask: AdjacencyMask::empty(4),
            order: NodeOrder::identity(4),
        };
        let w = assign_weights(&truth, &mut rng_from_seed(1));
        assert_eq!(w.weights, WeightMatrix::zeros(4));
    }

    #[test]
    fn zero_weights_reproduce_noise() {
        let truth = GroundTruth {
            weights: WeightMatrix::zeros(3),
            mask: AdjacencyMask::empty(3),
            order: NodeOrder::identity(3),
        };
        let noise = NoiseSpec::sample(
            NoiseFamily::Gaussian,
            ScaleMode::Equal,
            3,
            &mut rng_from_seed(0),
        );
        let data = sample_data(&truth, &noise, 5, &mut rng_from_seed(9)).unwrap();
        let mut rng = rng_from_seed(9);
        let normal = Normal::new(0.0, 1.0).unwrap();
        for v in data.x().iter() {
            assert_eq!(*v, normal.sample(&mut rng));
        }
    }

    #[test]
    fn cyclic_truth_is_rejected() {
        let mask = AdjacencyMask::from_arcs(2, &[(0, 1)]).unwrap();
        let truth = GroundTruth {
            weights: WeightMatrix::from_triplets(2, &[(0, 1, 1.0)]).unwrap(),
            mask,
            order: NodeOrder::new(vec![1, 0]).unwrap(),
        };
        let noise = NoiseSpec::sample(
            NoiseFamily::Gaussian,
            ScaleMode::Equal,
            2,
            &mut rng_from_seed(0),
        );
        assert_eq!(
            sample_data(&truth, &noise, 3, &mut rng_from_seed(0)).unwrap_err(),
            Error::Cyclic
        );
    }

    #[test]
    fn non_equal_scales_in_range() {
        let noise = NoiseSpec::sample(
            NoiseFamily::Gumbel,
            ScaleMode::NonEqual,
            200,
            &mut rng_from_seed(2),
        );
        noise.validate().unwrap();
        assert!(noise.scales.iter().any(|&s| s != 1.0));
    }
}
