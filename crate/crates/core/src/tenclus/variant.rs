use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{cotec, sitec, CoClustering};
use crate::cluster1d::{ClusterConfig, ClusterOutcome, Refine, Seeding, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// The eight experiment variants: seeding `r` (uniform) or `s`
/// (divergence-weighted), an optional `k` for 1D Lloyd refinement, and an
/// optional `c` for SiTeC on top of the combined result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    R,
    S,
    Rk,
    Sk,
    Rc,
    Sc,
    Rkc,
    Skc,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::R,
        Variant::S,
        Variant::Rk,
        Variant::Sk,
        Variant::Rc,
        Variant::Sc,
        Variant::Rkc,
        Variant::Skc,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Variant::R => "r",
            Variant::S => "s",
            Variant::Rk => "rk",
            Variant::Sk => "sk",
            Variant::Rc => "rc",
            Variant::Sc => "sc",
            Variant::Rkc => "rkc",
            Variant::Skc => "skc",
        }
    }

    pub fn seeding(self) -> Seeding {
        match self {
            Variant::R | Variant::Rk | Variant::Rc | Variant::Rkc => Seeding::Uniform,
            _ => Seeding::Dsq,
        }
    }

    pub fn refine(self) -> Refine {
        match self {
            Variant::Rk | Variant::Sk | Variant::Rkc | Variant::Skc => Refine::Lloyd,
            _ => Refine::None,
        }
    }

    pub fn uses_sitec(self) -> bool {
        matches!(self, Variant::Rc | Variant::Sc | Variant::Rkc | Variant::Skc)
    }

    /// The CoTeC variant a SiTeC variant starts from (itself otherwise).
    pub fn base(self) -> Variant {
        match self {
            Variant::Rc => Variant::R,
            Variant::Sc => Variant::S,
            Variant::Rkc => Variant::Rk,
            Variant::Skc => Variant::Sk,
            v => v,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.token() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    /// Cluster count per dimension.
    pub k: Vec<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub sitec_max_iters: usize,
    pub sitec_tol: f64,
}

impl VariantConfig {
    pub fn new(k: Vec<usize>, seed: u64) -> Self {
        Self {
            k,
            seed,
            restarts: 1,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            sitec_max_iters: DEFAULT_MAX_ITERS,
            sitec_tol: DEFAULT_TOL,
        }
    }

    /// Per-dimension 1D configurations for `variant`.
    pub fn cluster_configs(&self, variant: Variant) -> Vec<ClusterConfig> {
        self.k
            .iter()
            .map(|&k| ClusterConfig {
                k,
                seeding: variant.seeding(),
                refine: variant.refine(),
                restarts: self.restarts,
                max_iters: self.max_iters,
                tol: self.tol,
                rng_seed: self.seed,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub variant: Variant,
    pub clustering: CoClustering,
    /// J of the CoTeC stage (equal to the final J without SiTeC).
    pub cotec_objective: f64,
    pub dims: Vec<ClusterOutcome>,
    pub sitec_sweeps: Option<usize>,
    pub sitec_trace: Option<Vec<f64>>,
}

/// Runs one variant. Variants sharing a seeding letter consume identical
/// random draws, so `rk` refines exactly the seeding `r` used and the `c`
/// variants start from their base variant's result.
pub fn variant_pipeline(
    a: &DenseTensor,
    variant: Variant,
    cfg: &VariantConfig,
    spec: &Divergence,
) -> Result<VariantOutcome> {
    let base = cotec(a, &cfg.cluster_configs(variant), spec)?;
    let cotec_objective = base.clustering.objective;
    if !variant.uses_sitec() {
        return Ok(VariantOutcome {
            variant,
            clustering: base.clustering,
            cotec_objective,
            dims: base.dims,
            sitec_sweeps: None,
            sitec_trace: None,
        });
    }
    let refined = sitec(a, &base.clustering, spec, cfg.sitec_max_iters, cfg.sitec_tol)?;
    Ok(VariantOutcome {
        variant,
        clustering: refined.clustering,
        cotec_objective,
        dims: base.dims,
        sitec_sweeps: Some(refined.sweeps),
        sitec_trace: Some(refined.trace),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;
    use rand::Rng;

    #[test]
    fn token_roundtrip_and_flags() {
        for v in Variant::ALL {
            assert_eq!(v.token().parse::<Variant>().unwrap(), v);
        }
        assert!("x".parse::<Variant>().is_err());
        assert_eq!(Variant::R.seeding(), Seeding::Uniform);
        assert_eq!(Variant::R.refine(), Refine::None);
        assert!(!Variant::R.uses_sitec());
        assert_eq!(Variant::Skc.base(), Variant::Sk);
        assert_eq!(Variant::Skc.refine(), Refine::Lloyd);
        assert_eq!(Variant::Sc.seeding(), Seeding::Dsq);
    }

    fn noisy_tensor(seed: u64) -> DenseTensor {
        let mut rng = crate::rng::stream(seed);
        let dims = [12, 10, 6];
        let labels: Vec<Vec<usize>> = dims.iter().map(|&n| (0..n).map(|i| i % 3).collect()).collect();
        let means: Vec<f64> = (0..27).map(|_| rng.random_range(1.0..10.0)).collect();
        let shape = Shape::new(dims.to_vec()).unwrap();
        let data = (0..shape.len())
            .map(|f| {
                let ix = shape.multi_index(f);
                let b = labels[0][ix[0]] * 9 + labels[1][ix[1]] * 3 + labels[2][ix[2]];
                means[b] + rng.random_range(-1.5..1.5)
            })
            .collect();
        DenseTensor::new(shape, data).unwrap()
    }

    #[test]
    fn r_variant_is_uniform_cotec() {
        let a = noisy_tensor(1);
        let cfg = VariantConfig::new(vec![3, 3, 3], 9);
        let out = variant_pipeline(&a, Variant::R, &cfg, &Divergence::SquaredEuclidean).unwrap();
        let direct = cotec(&a, &cfg.cluster_configs(Variant::R), &Divergence::SquaredEuclidean).unwrap();
        assert_eq!(out.clustering.labels(), direct.clustering.labels());
        assert!(out.sitec_sweeps.is_none());
        assert!(out.dims.iter().all(|d| d.iters == 0));
    }

    #[test]
    fn sitec_variants_never_worse_than_base() {
        for seed in 0..8 {
            let a = noisy_tensor(seed);
            let cfg = VariantConfig::new(vec![3, 3, 3], seed);
            for v in [Variant::Rc, Variant::Sc, Variant::Rkc, Variant::Skc] {
                let base = variant_pipeline(&a, v.base(), &cfg, &Divergence::SquaredEuclidean).unwrap();
                let top = variant_pipeline(&a, v, &cfg, &Divergence::SquaredEuclidean).unwrap();
                assert_eq!(top.cotec_objective, base.clustering.objective);
                assert!(top.clustering.objective <= base.clustering.objective * (1.0 + 1e-9));
                assert!(top.sitec_sweeps.unwrap() >= 1);
            }
        }
    }

    #[test]
    fn lloyd_variants_refine_their_seeding() {
        for seed in 0..8 {
            let a = noisy_tensor(100 + seed);
            let cfg = VariantConfig::new(vec![3, 3, 3], seed);
            for (plain, refined) in [(Variant::R, Variant::Rk), (Variant::S, Variant::Sk)] {
                let p = variant_pipeline(&a, plain, &cfg, &Divergence::SquaredEuclidean).unwrap();
                let q = variant_pipeline(&a, refined, &cfg, &Divergence::SquaredEuclidean).unwrap();
                for (dp, dq) in p.dims.iter().zip(&q.dims) {
                    assert!(dq.objective <= dp.objective * (1.0 + 1e-12));
                }
                assert!(q.clustering.objective <= p.clustering.objective * (1.0 + 1e-9));
            }
        }
    }
}
