//! Clustering a set of equal-length vectors along a single tensor dimension.
//!
//! Seeding (uniform or divergence-weighted), Lloyd refinement, and kernel
//! k-means for CPD kernels, with best-of-restarts selection.

mod kernel;
mod lloyd;
mod seeding;

pub use kernel::{kernel_kmeans, kernel_refine, KernelGram, KernelOutcome};
pub use lloyd::{assign, lloyd_refine, update_centers, LloydOutcome};
pub use seeding::{seed_dsq, seed_dsq_indices, seed_uniform, seed_uniform_indices};

use serde::{Deserialize, Serialize};

use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::tensor::Matrix;

/// `n` vectors of common length `d`, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    dim: usize,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty point set".into()));
        }
        let dim = points[0].len();
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::Shape(format!(
                "point {i} has length {}, expected {dim}",
                points[i].len()
            )));
        }
        let data: Vec<f64> = points.into_iter().flatten().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("point coordinates must be finite".into()));
        }
        Ok(Self { data, n, dim })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Length of each point.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn check_domain(&self, spec: &Divergence) -> Result<()> {
        for (pos, &x) in self.data.iter().enumerate() {
            if let Err(reason) = spec.check_value(x) {
                return Err(Error::EntryDomain {
                    index: vec![pos / self.dim.max(1), pos % self.dim.max(1)],
                    value: x,
                    reason,
                });
            }
        }
        Ok(())
    }
}

/// Cluster labels in `0..k` for every point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    k: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("cluster count must be at least 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for k = {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == c).collect()
    }

    pub(crate) fn set(&mut self, i: usize, c: usize) {
        debug_assert!(c < self.k);
        self.labels[i] = c;
    }

    /// The n x k 0/1 indicator matrix.
    pub fn indicator(&self) -> Matrix {
        let mut m = Matrix::zeros(self.labels.len(), self.k);
        for (i, &l) in self.labels.iter().enumerate() {
            m.set(i, l, 1.0);
        }
        m
    }

    /// Renumbers clusters by first appearance; two assignments describe the
    /// same partition iff their canonical forms are equal.
    pub fn canonical(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seeding {
    Uniform,
    Dsq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Refine {
    None,
    Lloyd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub seeding: Seeding,
    pub refine: Refine,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the relative objective decrease falls to this value or below.
    pub tol: f64,
    pub rng_seed: u64,
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 100;

impl ClusterConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            seeding: Seeding::Dsq,
            refine: Refine::Lloyd,
            restarts: 1,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            rng_seed: 0,
        }
    }

    pub fn with_seeding(mut self, seeding: Seeding) -> Self {
        self.seeding = seeding;
        self
    }

    pub fn with_refine(mut self, refine: Refine) -> Self {
        self.refine = refine;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidArgument(format!(
                "k = {} must lie in 1..={n}",
                self.k
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Result of [`cluster_1d`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutcome {
    pub assignment: Assignment,
    /// Explicit centers; `None` on the kernel path, where centers live in
    /// feature space.
    pub centers: Option<Vec<Vec<f64>>>,
    pub objective: f64,
    /// Refinement iterations of the winning run (0 without refinement).
    pub iters: usize,
    /// Index of the winning restart.
    pub restart: usize,
}

fn single_run(ps: &PointSet, cfg: &ClusterConfig, spec: &Divergence, seed: u64) -> Result<ClusterOutcome> {
    let mut rng = rng::stream(seed);
    let seeds = match cfg.seeding {
        Seeding::Uniform => seed_uniform_indices(ps.len(), cfg.k, &mut rng)?,
        Seeding::Dsq => seed_dsq_indices(ps, cfg.k, spec, &mut rng)?,
    };
    match (cfg.refine, spec) {
        (Refine::Lloyd, Divergence::HilbertianCpd(kernel)) => {
            let gram = KernelGram::new(ps, kernel);
            let out = kernel_refine(&gram, &seeds, cfg.k, cfg.max_iters, cfg.tol)?;
            Ok(ClusterOutcome {
                assignment: out.assignment,
                centers: None,
                objective: out.objective,
                iters: out.iters,
                restart: 0,
            })
        }
        (Refine::Lloyd, _) => {
            let centers: Vec<Vec<f64>> = seeds.iter().map(|&i| ps.point(i).to_vec()).collect();
            let out = lloyd_refine(ps, &centers, spec, cfg.max_iters, cfg.tol)?;
            Ok(ClusterOutcome {
                assignment: out.assignment,
                centers: Some(out.centers),
                objective: out.objective,
                iters: out.iters,
                restart: 0,
            })
        }
        (Refine::None, _) => {
            let centers: Vec<Vec<f64>> = seeds.iter().map(|&i| ps.point(i).to_vec()).collect();
            let (labels, costs) = assign(ps, &centers, spec);
            Ok(ClusterOutcome {
                assignment: Assignment::new(labels, cfg.k)?,
                centers: Some(centers),
                objective: costs.iter().sum(),
                iters: 0,
                restart: 0,
            })
        }
    }
}

/// Runs seeding (and optional refinement) `cfg.restarts` times and keeps the
/// run with the lowest objective, preferring the earliest restart on ties.
pub fn cluster_1d(ps: &PointSet, cfg: &ClusterConfig, spec: &Divergence) -> Result<ClusterOutcome> {
    cfg.validate(ps.len())?;
    ps.check_domain(spec)?;
    let runs = par::map_range(cfg.restarts, |r| {
        single_run(ps, cfg, spec, rng::derive_seed(cfg.rng_seed, r as u64))
    });
    let mut best: Option<ClusterOutcome> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let mut run = run?;
        run.restart = r;
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Total divergence of each point to the given centers under `labels`.
pub fn objective_with_centers(
    ps: &PointSet,
    labels: &[usize],
    centers: &[Vec<f64>],
    spec: &Divergence,
) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| spec.eval_slices(ps.point(i), &centers[c]))
        .sum()
}
