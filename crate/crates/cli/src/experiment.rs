//! Noise sweeps over planted tensors with paired seeding across variants.

use std::collections::BTreeMap;

use tensorclus::datagen::{generate_for, NoiseModel, PlantedSpec};
use tensorclus::rng::derive_path;
use tensorclus::tenclus::{sitec, variant_pipeline, CoClustering, Variant, VariantConfig};
use tensorclus::verify::{combination_bound, seeding_factor};
use tensorclus::{par, Divergence, Shape};

use crate::report::{ExperimentMeta, ExperimentReport, ExperimentRow, RunRecord};

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub shape: Shape,
    pub k: Vec<usize>,
    pub noise: Vec<f64>,
    pub tensors: usize,
    pub trials: usize,
    pub variants: Vec<Variant>,
    pub divergence: Divergence,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub means_range: (f64, f64),
    pub poisson_scale: f64,
}

impl ExperimentSpec {
    /// The default sweep: 30x30x20, k = (5,5,5), four noise levels, three
    /// tensors with twenty seedings each, all eight variants.
    pub fn default_sweep(divergence: Divergence, seed: u64) -> Self {
        Self {
            shape: Shape::new(vec![30, 30, 20]).expect("valid shape"),
            k: vec![5, 5, 5],
            noise: vec![0.5, 1.0, 2.0, 3.0],
            tensors: 3,
            trials: 20,
            variants: Variant::ALL.to_vec(),
            divergence,
            seed,
            restarts: 1,
            max_iters: tensorclus::cluster1d::DEFAULT_MAX_ITERS,
            tol: tensorclus::cluster1d::DEFAULT_TOL,
            means_range: (1.0, 10.0),
            poisson_scale: 1.0,
        }
    }

    pub fn noise_model(&self) -> NoiseModel {
        match self.divergence {
            Divergence::GeneralizedKl { .. } => NoiseModel::Poisson,
            _ => NoiseModel::Gaussian,
        }
    }

    /// Seed of tensor `t` at noise level `ni`.
    pub fn tensor_seed(&self, ni: usize, t: usize) -> u64 {
        derive_path(self.seed, &[0, ni as u64, t as u64])
    }

    /// Seed shared by every variant in one trial.
    pub fn trial_seed(&self, ni: usize, t: usize, s: usize) -> u64 {
        derive_path(self.seed, &[1, ni as u64, t as u64, s as u64])
    }

    fn validate(&self) -> tensorclus::Result<()> {
        use tensorclus::Error;
        if self.tensors == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("tensors and trials must be positive".into()));
        }
        if self.noise.is_empty() || self.variants.is_empty() {
            return Err(Error::InvalidArgument("need at least one noise level and one variant".into()));
        }
        if self.noise.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument("noise levels must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Largest relative rise between consecutive values of a trace; zero when
/// the trace never rises.
pub fn max_relative_rise(trace: &[f64]) -> f64 {
    trace
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn mean_std_opt(xs: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let vals: Vec<f64> = xs.iter().flatten().copied().collect();
    if vals.is_empty() {
        return (None, None);
    }
    let (m, s) = mean_std(&vals);
    (Some(m), Some(s))
}

/// Runs every requested variant on one seeding. CoTeC bases are computed
/// once and the SiTeC variants refine them, which is exactly what
/// `variant_pipeline` does for a SiTeC variant.
/// One variant's result, with SiTeC sweeps and trace when it ran.
type TrialResult = (Variant, CoClustering, Option<(usize, Vec<f64>)>);

fn run_trial(
    a: &tensorclus::DenseTensor,
    spec: &ExperimentSpec,
    cfg: &VariantConfig,
) -> tensorclus::Result<Vec<TrialResult>> {
    let mut bases: BTreeMap<Variant, CoClustering> = BTreeMap::new();
    for v in &spec.variants {
        let base = v.base();
        if let std::collections::btree_map::Entry::Vacant(slot) = bases.entry(base) {
            slot.insert(variant_pipeline(a, base, cfg, &spec.divergence)?.clustering);
        }
    }
    spec.variants
        .iter()
        .map(|&v| {
            let base = &bases[&v.base()];
            if v.uses_sitec() {
                let out = sitec(a, base, &spec.divergence, cfg.sitec_max_iters, cfg.sitec_tol)?;
                Ok((v, out.clustering, Some((out.sweeps, out.trace))))
            } else {
                Ok((v, base.clone(), None))
            }
        })
        .collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> tensorclus::Result<ExperimentReport> {
    spec.validate()?;
    let alpha_t = seeding_factor(spec.k.iter().copied().max().unwrap_or(1));
    let model = spec.noise_model();

    // Tensors are generated up front so trials can share them.
    let cells: Vec<(usize, usize)> = (0..spec.noise.len())
        .flat_map(|ni| (0..spec.tensors).map(move |t| (ni, t)))
        .collect();
    let tensors = par::map_slice(&cells, |&(ni, t)| {
        let mut ps = PlantedSpec::new(spec.shape.clone(), spec.k.clone(), spec.noise[ni], model, spec.tensor_seed(ni, t));
        ps.means_range = spec.means_range;
        ps.poisson_scale = spec.poisson_scale;
        let planted = generate_for(&ps, &spec.divergence)?;
        let bound = combination_bound(&planted.tensor, &spec.divergence, alpha_t)?;
        Ok((planted, bound))
    })
    .into_iter()
    .collect::<tensorclus::Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials).map(move |s| (c, s)))
        .collect();
    let results = par::map_slice(&jobs, |&(c, s)| {
        let (ni, t) = cells[c];
        let (planted, bound) = &tensors[c];
        let mut cfg = VariantConfig::new(spec.k.clone(), spec.trial_seed(ni, t, s));
        cfg.restarts = spec.restarts;
        cfg.max_iters = spec.max_iters;
        cfg.tol = spec.tol;
        cfg.sitec_max_iters = spec.max_iters;
        cfg.sitec_tol = spec.tol;
        let reference = planted.truth.objective;
        let outs = run_trial(&planted.tensor, spec, &cfg)?;
        Ok(outs
            .into_iter()
            .map(|(v, cc, trace)| RunRecord {
                noise: spec.noise[ni],
                tensor: t,
                trial: s,
                variant: v.token().to_string(),
                objective: cc.objective,
                reference,
                alpha_hat: (reference > 0.0).then(|| cc.objective / reference),
                theoretical_bound: *bound,
                sitec_sweeps: trace.as_ref().map(|(sweeps, _)| *sweeps),
                max_trace_rise: trace.as_ref().map(|(_, tr)| max_relative_rise(tr)),
            })
            .collect::<Vec<_>>())
    })
    .into_iter()
    .collect::<tensorclus::Result<Vec<_>>>()?;
    let runs: Vec<RunRecord> = results.into_iter().flatten().collect();

    let mut rows = Vec::new();
    for &noise in &spec.noise {
        let mut level_rows: Vec<ExperimentRow> = spec
            .variants
            .iter()
            .map(|v| {
                let sel: Vec<&RunRecord> = runs.iter().filter(|r| r.noise == noise && r.variant == v.token()).collect();
                let js: Vec<f64> = sel.iter().map(|r| r.objective).collect();
                let (mean_j, std_j) = mean_std(&js);
                let sweeps: Vec<Option<f64>> = sel.iter().map(|r| r.sitec_sweeps.map(|s| s as f64)).collect();
                let (sweeps_mean, sweeps_std) = mean_std_opt(&sweeps);
                let alphas: Vec<Option<f64>> = sel.iter().map(|r| r.alpha_hat).collect();
                let (alpha_hat_mean, alpha_hat_std) = mean_std_opt(&alphas);
                let theoretical_bound = sel
                    .iter()
                    .filter_map(|r| r.theoretical_bound)
                    .reduce(f64::min);
                ExperimentRow {
                    noise,
                    variant: v.token().to_string(),
                    runs: sel.len(),
                    mean_j,
                    std_j,
                    improvement_pct: None,
                    sweeps_mean,
                    sweeps_std,
                    alpha_hat_mean,
                    alpha_hat_std,
                    theoretical_bound,
                }
            })
            .collect();
        if let Some(base) = level_rows.iter().find(|r| r.variant == "r").map(|r| r.mean_j) {
            for r in &mut level_rows {
                r.improvement_pct = (base > 0.0).then(|| 100.0 * (base - r.mean_j) / base);
            }
        }
        rows.extend(level_rows);
    }

    Ok(ExperimentReport {
        meta: ExperimentMeta {
            shape: spec.shape.dims().to_vec(),
            k: spec.k.clone(),
            divergence: spec.divergence.token(),
            noise_model: format!("{model:?}").to_lowercase(),
            noise: spec.noise.clone(),
            tensors: spec.tensors,
            trials: spec.trials,
            seed: spec.seed,
            restarts: spec.restarts,
            max_iters: spec.max_iters,
            tol: spec.tol,
            alpha_t,
            sitec_sweeps_counted: "all sweeps, including the final non-improving one".into(),
            wall_time_secs: None,
        },
        rows,
        runs,
    })
}
