//! Planted block-structure tensors with Gaussian or scaled-Poisson noise.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::cluster1d::Assignment;
use crate::divergence::{Divergence, KL_FLOOR};
use crate::error::{Error, Result};
use crate::rng;
use crate::tenclus::CoClustering;
use crate::tensor::{DenseTensor, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Block mean plus `N(0, σ²)`; pairs with squared Euclidean.
    Gaussian,
    /// `σ' · Poisson(μ / σ')` with `σ' = σ · scale`; pairs with
    /// generalized KL.
    Poisson,
}

impl NoiseModel {
    /// The divergence the planted objective is reported under by default.
    pub fn divergence(self) -> Divergence {
        match self {
            NoiseModel::Gaussian => Divergence::SquaredEuclidean,
            NoiseModel::Poisson => Divergence::kl(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub shape: Shape,
    pub k: Vec<usize>,
    pub noise: f64,
    pub model: NoiseModel,
    /// Block means are drawn uniformly from this interval.
    pub means_range: (f64, f64),
    /// Multiplier turning `noise` into the Poisson scale `σ'`.
    pub poisson_scale: f64,
    pub rng_seed: u64,
}

impl PlantedSpec {
    pub fn new(shape: Shape, k: Vec<usize>, noise: f64, model: NoiseModel, rng_seed: u64) -> Self {
        Self {
            shape,
            k,
            noise,
            model,
            means_range: (1.0, 10.0),
            poisson_scale: 1.0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.len() != self.shape.order() {
            return Err(Error::Shape(format!(
                "{} cluster counts for an order-{} shape",
                self.k.len(),
                self.shape.order()
            )));
        }
        for (j, (&k, &n)) in self.k.iter().zip(self.shape.dims()).enumerate() {
            if k == 0 || k > n {
                return Err(Error::InvalidArgument(format!(
                    "dimension {j}: cannot plant {k} nonempty clusters in {n} indices"
                )));
            }
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::InvalidArgument(format!("noise must be >= 0, got {}", self.noise)));
        }
        let (lo, hi) = self.means_range;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid means range [{lo}, {hi}]")));
        }
        if self.model == NoiseModel::Poisson {
            if lo < 10.0 * KL_FLOOR {
                return Err(Error::InvalidArgument(format!(
                    "Poisson means must be at least {}, got {lo}",
                    10.0 * KL_FLOOR
                )));
            }
            if !(self.poisson_scale > 0.0) || !self.poisson_scale.is_finite() {
                return Err(Error::InvalidArgument("Poisson scale must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub tensor: DenseTensor,
    /// The planted labels with their empirical block representatives and
    /// objective.
    pub truth: CoClustering,
    /// The block means the data was drawn around.
    pub means: DenseTensor,
}

/// Labels with every cluster nonempty: a random permutation gives the
/// first `k` indices one cluster each, the rest are uniform.
fn planted_labels<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut labels = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        labels[i] = if pos < k { pos } else { rng.random_range(0..k) };
    }
    labels
}

/// Draws a planted tensor, reporting the truth under the noise model's
/// own divergence.
pub fn generate(spec: &PlantedSpec) -> Result<Planted> {
    generate_for(spec, &spec.model.divergence())
}

/// As [`generate`], with the planted objective evaluated under `target`.
pub fn generate_for(spec: &PlantedSpec, target: &Divergence) -> Result<Planted> {
    spec.validate()?;
    let mut rng = rng::stream(spec.rng_seed);
    let bshape = Shape::new(spec.k.clone())?;
    let (lo, hi) = spec.means_range;
    let mean_data = (0..bshape.len())
        .map(|_| if lo == hi { lo } else { rng.random_range(lo..=hi) })
        .collect();
    let means = DenseTensor::new(bshape.clone(), mean_data)?;
    let assignments = spec
        .shape
        .dims()
        .iter()
        .zip(&spec.k)
        .map(|(&n, &k)| Assignment::new(planted_labels(n, k, &mut rng), k))
        .collect::<Result<Vec<_>>>()?;
    let block_means = crate::tenclus::reconstruct(&assignments, &means)?;

    let data: Vec<f64> = match spec.model {
        NoiseModel::Gaussian => {
            if spec.noise == 0.0 {
                block_means.data().to_vec()
            } else {
                let normal = Normal::new(0.0, spec.noise)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                block_means.data().iter().map(|&mu| mu + normal.sample(&mut rng)).collect()
            }
        }
        NoiseModel::Poisson => {
            let scale = spec.noise * spec.poisson_scale;
            block_means
                .data()
                .iter()
                .map(|&mu| {
                    let x = if scale == 0.0 {
                        mu
                    } else {
                        let pois = Poisson::new(mu / scale)
                            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                        pois.sample(&mut rng) * scale
                    };
                    Ok(x.max(KL_FLOOR))
                })
                .collect::<Result<_>>()?
        }
    };
    let tensor = DenseTensor::new(spec.shape.clone(), data)?;
    let truth = CoClustering::from_assignments(&tensor, assignments, target)?;
    Ok(Planted { tensor, truth, means })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dims: &[usize], k: &[usize], noise: f64, model: NoiseModel, seed: u64) -> PlantedSpec {
        PlantedSpec::new(Shape::new(dims.to_vec()).unwrap(), k.to_vec(), noise, model, seed)
    }

    #[test]
    fn noiseless_gaussian_is_exact() {
        let p = generate(&spec(&[6, 5, 4], &[3, 2, 2], 0.0, NoiseModel::Gaussian, 1)).unwrap();
        assert_eq!(p.truth.objective, 0.0);
        let recon = crate::tenclus::reconstruct(&p.truth.assignments, &p.means).unwrap();
        assert_eq!(recon, p.tensor);
    }

    #[test]
    fn clusters_are_nonempty() {
        for seed in 0..50 {
            let p = generate(&spec(&[5, 3, 7], &[5, 2, 4], 1.0, NoiseModel::Gaussian, seed)).unwrap();
            for asg in &p.truth.assignments {
                assert!(asg.sizes().iter().all(|&s| s > 0));
            }
        }
    }

    #[test]
    fn gaussian_objective_concentrates() {
        let dims = [30, 30, 20];
        let n = 30.0 * 30.0 * 20.0;
        for seed in 0..20 {
            let p = generate(&spec(&dims, &[5, 5, 5], 1.0, NoiseModel::Gaussian, seed)).unwrap();
            let ratio = p.truth.objective / n;
            assert!((ratio - 1.0).abs() < 0.05, "seed {seed}: {ratio}");
        }
    }

    #[test]
    fn gaussian_objective_is_residual_energy() {
        let p = generate(&spec(&[8, 6], &[3, 2], 0.7, NoiseModel::Gaussian, 3)).unwrap();
        // Recompute block averages independently with a hash of label pairs.
        let mut sums = std::collections::HashMap::<(usize, usize), (f64, usize)>::new();
        let [r, c] = [&p.truth.assignments[0], &p.truth.assignments[1]];
        for i in 0..8 {
            for j in 0..6 {
                let e = sums.entry((r.labels()[i], c.labels()[j])).or_default();
                e.0 += p.tensor.get(&[i, j]);
                e.1 += 1;
            }
        }
        let mut j_direct = 0.0;
        for i in 0..8 {
            for j in 0..6 {
                let (s, cnt) = sums[&(r.labels()[i], c.labels()[j])];
                j_direct += (p.tensor.get(&[i, j]) - s / cnt as f64).powi(2);
            }
        }
        approx::assert_relative_eq!(p.truth.objective, j_direct, max_relative = 1e-9);
    }

    #[test]
    fn poisson_entries_in_domain() {
        for noise in [0.0, 0.5, 3.0, 20.0] {
            let p = generate(&spec(&[10, 8, 6], &[3, 3, 2], noise, NoiseModel::Poisson, 9)).unwrap();
            assert!(p.tensor.data().iter().all(|&x| x >= KL_FLOOR));
            assert!(p.truth.objective >= 0.0);
            assert_eq!(p.truth.divergence.token(), "kl");
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let s = spec(&[7, 6, 5], &[2, 3, 2], 1.3, NoiseModel::Gaussian, 77);
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        let bits = |t: &DenseTensor| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.tensor), bits(&b.tensor));
        assert_eq!(a.truth.labels(), b.truth.labels());
        let c = generate(&PlantedSpec { rng_seed: 78, ..s }).unwrap();
        assert_ne!(bits(&a.tensor), bits(&c.tensor));
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&spec(&[3, 3], &[4, 1], 1.0, NoiseModel::Gaussian, 0)).is_err());
        assert!(generate(&spec(&[3, 3], &[2], 1.0, NoiseModel::Gaussian, 0)).is_err());
        assert!(generate(&spec(&[3, 3], &[2, 2], -1.0, NoiseModel::Gaussian, 0)).is_err());
        let mut s = spec(&[3, 3], &[2, 2], 1.0, NoiseModel::Poisson, 0);
        s.means_range = (0.0, 1.0);
        assert!(generate(&s).is_err());
    }
}
