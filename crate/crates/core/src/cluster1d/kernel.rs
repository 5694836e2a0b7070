//! Kernel k-means for Hilbertian distances induced by CPD kernels.
//!
//! Centers are never formed explicitly: a center is the feature-space mean
//! of a set of member points, and distances use the Gram-matrix expansion
//! `K(x,x) - 2/|S| sum_y K(x,y) + 1/|S|^2 sum_{y,z} K(y,z)`.

use rand::Rng;

use super::{seed_dsq_indices, Assignment, PointSet};
use crate::divergence::{CpdKernel, Divergence};
use crate::error::{Error, Result};
use crate::par;

/// Anchor point `a` of the centered kernel.
const ANCHOR: f64 = 0.0;

/// Gram matrix of the centered kernel, summed over coordinates.
#[derive(Debug, Clone)]
pub struct KernelGram {
    n: usize,
    values: Vec<f64>,
}

impl KernelGram {
    pub fn new(ps: &PointSet, kernel: &CpdKernel) -> Self {
        let n = ps.len();
        let rows = par::map_range(n, |i| {
            let x = ps.point(i);
            (0..n)
                .map(|j| {
                    x.iter()
                        .zip(ps.point(j))
                        .map(|(&a, &b)| kernel.centered(a, b, ANCHOR))
                        .sum::<f64>()
                })
                .collect::<Vec<f64>>()
        });
        Self {
            n,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Squared feature-space distance from point `i` to the mean of `members`,
    /// given the precomputed `self_term` of that member set.
    fn distance(&self, i: usize, members: &[usize], self_term: f64) -> f64 {
        let m = members.len() as f64;
        let cross: f64 = members.iter().map(|&y| self.get(i, y)).sum();
        (self.get(i, i) - 2.0 * cross / m + self_term).max(0.0)
    }

    fn self_term(&self, members: &[usize]) -> f64 {
        let m = members.len() as f64;
        let mut s = 0.0;
        for &y in members {
            for &z in members {
                s += self.get(y, z);
            }
        }
        s / (m * m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelOutcome {
    pub assignment: Assignment,
    pub objective: f64,
    pub iters: usize,
    pub trace: Vec<f64>,
    /// Seed indices the refinement started from.
    pub seeds: Vec<usize>,
}

fn assign(gram: &KernelGram, centers: &[Vec<usize>]) -> (Vec<usize>, Vec<f64>) {
    let self_terms: Vec<f64> = centers.iter().map(|c| gram.self_term(c)).collect();
    let pairs = par::map_range(gram.len(), |i| {
        let mut best = (0, f64::INFINITY);
        for (c, members) in centers.iter().enumerate() {
            let d = gram.distance(i, members, self_terms[c]);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    });
    pairs.into_iter().unzip()
}

/// Kernel k-means iterations starting from singleton centers at `seeds`.
/// Stopping rule and empty-cluster repair mirror [`super::lloyd_refine`].
pub fn kernel_refine(
    gram: &KernelGram,
    seeds: &[usize],
    k: usize,
    max_iters: usize,
    tol: f64,
) -> Result<KernelOutcome> {
    if seeds.len() != k || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "{} seeds for k = {k}",
            seeds.len()
        )));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s >= gram.len()) {
        return Err(Error::InvalidArgument(format!("seed index {bad} out of range")));
    }
    let singletons: Vec<Vec<usize>> = seeds.iter().map(|&s| vec![s]).collect();
    let (mut labels, costs) = assign(gram, &singletons);
    let mut objective: f64 = costs.iter().sum();
    let mut trace = vec![objective];
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &c) in labels.iter().enumerate() {
            next[c].push(i);
        }
        if next.iter().any(Vec::is_empty) {
            let self_terms: Vec<f64> = next
                .iter()
                .map(|m| if m.is_empty() { 0.0 } else { gram.self_term(m) })
                .collect();
            let mut far_costs: Vec<f64> = labels
                .iter()
                .enumerate()
                .map(|(i, &c)| gram.distance(i, &next[c], self_terms[c]))
                .collect();
            for c in 0..k {
                if !next[c].is_empty() {
                    continue;
                }
                let mut far = 0;
                for i in 1..far_costs.len() {
                    if far_costs[i] > far_costs[far] {
                        far = i;
                    }
                }
                next[c] = vec![far];
                far_costs[far] = f64::NEG_INFINITY;
            }
        }
        let (next_labels, next_costs) = assign(gram, &next);
        let next_objective: f64 = next_costs.iter().sum();
        trace.push(next_objective);
        let converged = objective - next_objective <= tol * objective;
        labels = next_labels;
        objective = next_objective;
        if converged {
            break;
        }
    }
    Ok(KernelOutcome {
        assignment: Assignment::new(labels, k)?,
        objective,
        iters,
        trace,
        seeds: seeds.to_vec(),
    })
}

/// Seeds with divergence-weighted sampling under the induced distance
/// `d_C`, then refines with kernel k-means.
pub fn kernel_kmeans<R: Rng + ?Sized>(
    ps: &PointSet,
    k: usize,
    kernel: &CpdKernel,
    max_iters: usize,
    tol: f64,
    rng: &mut R,
) -> Result<KernelOutcome> {
    let spec = Divergence::HilbertianCpd(kernel.clone());
    let seeds = seed_dsq_indices(ps, k, &spec, rng)?;
    let gram = KernelGram::new(ps, kernel);
    kernel_refine(&gram, &seeds, k, max_iters, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster1d::{lloyd_refine, seed_dsq};
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn sqdiff_kernel_tracks_euclidean_lloyd() {
        for seed in 0..25u64 {
            let mut rng = stream(1000 + seed);
            let n = 30;
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
                .collect();
            let ps = PointSet::new(pts).unwrap();
            let k = 4;
            let kernel = CpdKernel::sqdiff();
            let out = kernel_kmeans(&ps, k, &kernel, 100, 1e-9, &mut stream(seed)).unwrap();
            let init = seed_dsq(&ps, k, &Divergence::SquaredEuclidean, &mut stream(seed)).unwrap();
            let lloyd = lloyd_refine(&ps, &init, &Divergence::SquaredEuclidean, 100, 1e-9).unwrap();
            assert_eq!(out.assignment, lloyd.assignment, "seed {seed}");
            assert_eq!(out.iters, lloyd.iters);
            approx::assert_relative_eq!(out.objective, lloyd.objective, max_relative = 1e-9);
        }
    }

    #[test]
    fn k_equals_n_gives_zero() {
        let ps = PointSet::from_scalars(&[1.0, 4.0, 9.0]).unwrap();
        let out = kernel_kmeans(&ps, 3, &CpdKernel::absdiff(), 100, 1e-9, &mut stream(3)).unwrap();
        assert_eq!(out.objective, 0.0);
        let mut labels = out.assignment.labels().to_vec();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2]);
    }

    #[test]
    fn absdiff_recovers_blobs() {
        let xs = [0.0, 0.5, 1.0, 1.2, 20.0, 20.5, 21.0];
        let ps = PointSet::from_scalars(&xs).unwrap();
        // Brute-force optimum of the feature-space objective over all
        // 2-partitions, using the same Gram matrix.
        let gram = KernelGram::new(&ps, &CpdKernel::absdiff());
        let n = xs.len();
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1..(1u32 << n) - 1 {
            let mut cost = 0.0;
            for side in [true, false] {
                let m: Vec<usize> = (0..n).filter(|&i| ((mask >> i) & 1 == 1) == side).collect();
                let st = gram.self_term(&m);
                cost += m.iter().map(|&i| gram.distance(i, &m, st)).sum::<f64>();
            }
            if cost < best.0 {
                best = (cost, mask);
            }
        }
        for seed in 0..10 {
            let out = kernel_kmeans(&ps, 2, &CpdKernel::absdiff(), 100, 1e-9, &mut stream(seed)).unwrap();
            assert_eq!(out.assignment.canonical(), vec![0, 0, 0, 0, 1, 1, 1]);
            approx::assert_relative_eq!(out.objective, best.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn objective_is_monotone() {
        let mut rng = stream(77);
        let xs: Vec<f64> = (0..60).map(|_| rng.random_range(0.0..30.0)).collect();
        let ps = PointSet::from_scalars(&xs).unwrap();
        for seed in 0..10 {
            let out = kernel_kmeans(&ps, 5, &CpdKernel::absdiff(), 100, 0.0, &mut stream(seed)).unwrap();
            for w in out.trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9 * w[0].abs(), "{:?}", out.trace);
            }
        }
    }
}
