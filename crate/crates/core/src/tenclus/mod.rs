//! Tensor co-clustering: the block objective, dimension-wise combination
//! clustering (CoTeC), and simultaneous alternating refinement (SiTeC).

mod objective;
mod sitec;
mod variant;

pub use objective::{
    block_representatives, evaluate_objective, reconstruct, BlockRepresentatives,
};
pub use sitec::{sitec, SitecOutcome};
pub use variant::{variant_pipeline, Variant, VariantConfig, VariantOutcome};

pub(crate) use objective::{
    block_index_map, check_conformity, representatives_from_map,
};

use crate::cluster1d::{cluster_1d, Assignment, ClusterConfig, ClusterOutcome, PointSet};
use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::tensor::{fibers_along, DenseTensor};

/// Per-dimension assignments, the block representative tensor, and the
/// objective they achieve on the tensor they were built from.
#[derive(Debug, Clone)]
pub struct CoClustering {
    pub assignments: Vec<Assignment>,
    pub means: DenseTensor,
    pub objective: f64,
    pub divergence: Divergence,
    /// Blocks with no entries (informational).
    pub empty_blocks: Vec<Vec<usize>>,
}

impl CoClustering {
    /// Builds the optimal representatives for `assignments` and evaluates J.
    pub fn from_assignments(
        a: &DenseTensor,
        assignments: Vec<Assignment>,
        spec: &Divergence,
    ) -> Result<Self> {
        spec.check_tensor(a)?;
        let reps = block_representatives(a, &assignments, spec)?;
        let objective = evaluate_objective(a, &assignments, &reps.means, spec)?;
        Ok(Self {
            assignments,
            means: reps.means,
            objective,
            divergence: spec.clone(),
            empty_blocks: reps.empty_blocks,
        })
    }

    pub fn k(&self) -> Vec<usize> {
        self.assignments.iter().map(Assignment::k).collect()
    }

    pub fn labels(&self) -> Vec<Vec<usize>> {
        self.assignments.iter().map(|a| a.labels().to_vec()).collect()
    }
}

/// Result of [`cotec`], with the 1D runs that produced it.
#[derive(Debug, Clone)]
pub struct CotecOutcome {
    pub clustering: CoClustering,
    pub dims: Vec<ClusterOutcome>,
}

/// Fibers of `a` along `dim` as a point set.
pub fn point_set_along(a: &DenseTensor, dim: usize) -> Result<PointSet> {
    PointSet::new(fibers_along(a, dim)?)
}

/// Clusters every dimension independently and combines the results.
///
/// Dimension `j` runs with seed `derive_seed(cfgs[j].rng_seed, j)`, so each
/// dimension's outcome depends only on its own configuration and index.
pub fn cotec(a: &DenseTensor, cfgs: &[ClusterConfig], spec: &Divergence) -> Result<CotecOutcome> {
    if cfgs.len() != a.order() {
        return Err(Error::Shape(format!(
            "{} configurations for an order-{} tensor",
            cfgs.len(),
            a.order()
        )));
    }
    for (j, (cfg, &n)) in cfgs.iter().zip(a.dims()).enumerate() {
        cfg.validate(n)
            .map_err(|e| Error::InvalidArgument(format!("dimension {j}: {e}")))?;
    }
    spec.check_tensor(a)?;
    let dims = par::map_range(a.order(), |j| cluster_dimension(a, j, &cfgs[j], spec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let assignments = dims.iter().map(|d| d.assignment.clone()).collect();
    let clustering = CoClustering::from_assignments(a, assignments, spec)?;
    Ok(CotecOutcome { clustering, dims })
}

/// Runs the configured 1D clustering on the fibers of dimension `j`.
pub fn cluster_dimension(
    a: &DenseTensor,
    j: usize,
    cfg: &ClusterConfig,
    spec: &Divergence,
) -> Result<ClusterOutcome> {
    let ps = point_set_along(a, j)?;
    let mut cfg = cfg.clone();
    cfg.rng_seed = rng::derive_seed(cfg.rng_seed, j as u64);
    cluster_1d(&ps, &cfg, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster1d::{Refine, Seeding};

    fn planted_4x4() -> DenseTensor {
        let rows = [0, 1, 0, 1];
        let cols = [1, 1, 0, 0];
        let m = [[1.0, 5.0], [9.0, 2.0]];
        DenseTensor::from_fn(crate::tensor::Shape::new(vec![4, 4]).unwrap(), |ix| {
            m[rows[ix[0]]][cols[ix[1]]]
        })
        .unwrap()
    }

    #[test]
    fn noiseless_planted_recovered() {
        let a = planted_4x4();
        for seeding in [Seeding::Uniform, Seeding::Dsq] {
            let cfg = ClusterConfig::new(2)
                .with_seeding(seeding)
                .with_refine(Refine::Lloyd)
                .with_restarts(5)
                .with_seed(3);
            let out = cotec(&a, &[cfg.clone(), cfg], &Divergence::SquaredEuclidean).unwrap();
            assert_eq!(out.clustering.objective, 0.0);
            assert_eq!(out.clustering.assignments[0].canonical(), vec![0, 1, 0, 1]);
            assert_eq!(out.clustering.assignments[1].canonical(), vec![0, 0, 1, 1]);
        }
    }

    #[test]
    fn order_one_matches_cluster_1d() {
        let xs = [0.3, 7.0, 1.1, 9.5, 4.2, 4.4, 8.8];
        let a = DenseTensor::from_dims(&[xs.len()], xs.to_vec()).unwrap();
        for refine in [Refine::None, Refine::Lloyd] {
            let cfg = ClusterConfig::new(3).with_refine(refine).with_seed(21);
            let out = cotec(&a, std::slice::from_ref(&cfg), &Divergence::SquaredEuclidean).unwrap();
            let mut direct_cfg = cfg.clone();
            direct_cfg.rng_seed = rng::derive_seed(21, 0);
            let direct = cluster_1d(&PointSet::from_scalars(&xs).unwrap(), &direct_cfg, &Divergence::SquaredEuclidean)
                .unwrap();
            assert_eq!(out.clustering.assignments[0], direct.assignment);
        }
    }

    #[test]
    fn dimension_outcomes_independent_of_other_dims() {
        let mut rng = rng::stream(4);
        use rand::Rng;
        let shape = crate::tensor::Shape::new(vec![6, 5, 4]).unwrap();
        let data = (0..shape.len()).map(|_| rng.random_range(0.0..3.0)).collect();
        let a = DenseTensor::new(shape, data).unwrap();
        let cfgs: Vec<ClusterConfig> = [3, 2, 2]
            .iter()
            .map(|&k| ClusterConfig::new(k).with_seed(17))
            .collect();
        let full = cotec(&a, &cfgs, &Divergence::SquaredEuclidean).unwrap();
        // Dimension j alone, in reverse order, reproduces the same labels.
        for j in (0..3).rev() {
            let solo = cluster_dimension(&a, j, &cfgs[j], &Divergence::SquaredEuclidean).unwrap();
            assert_eq!(solo.assignment, full.clustering.assignments[j]);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let a = planted_4x4();
        let cfg = ClusterConfig::new(5);
        assert!(cotec(&a, &[cfg.clone(), cfg], &Divergence::SquaredEuclidean).is_err());
        assert!(cotec(&a, &[ClusterConfig::new(2)], &Divergence::SquaredEuclidean).is_err());
    }
}
