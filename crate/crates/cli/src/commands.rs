use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use tensorclus::cluster1d::Assignment;
use tensorclus::datagen::{generate_for, NoiseModel, PlantedSpec};
use tensorclus::io::{read_tensor, read_truth, write_tensor, write_truth, Truth};
use tensorclus::tenclus::{variant_pipeline, CoClustering, Variant, VariantConfig};
use tensorclus::verify::{
    combination_bound, cotec_exact, empirical_factor, oracle_optimal_with_budget, seeding_factor,
};
use tensorclus::{DenseTensor, Divergence};

use crate::args::{ClusterArgs, Cli, Command, ExperimentArgs, Format, GenArgs, GlobalOpts, OracleArgs};
use crate::experiment::{run_experiment, ExperimentSpec};
use crate::report::{
    labels_csv, to_csv, BoundCheck, ClusterReport, ExperimentReport, GenReport, HeuristicCheck, MeansTensor,
    OracleReport,
};
use crate::UsageError;

/// Runs a parsed command line and returns what goes to stdout.
pub fn run(cli: &Cli) -> anyhow::Result<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(args) => cmd_gen(g, args),
        Command::Cluster(args) => cmd_cluster(g, args, false),
        Command::Sitec(args) => cmd_cluster(g, args, true),
        Command::Experiment(args) => cmd_experiment(g, args),
        Command::Oracle(args) => cmd_oracle(g, args),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Cluster counts for an order-`m` tensor; one value applies to every
/// dimension.
fn expand_k(k: &[usize], m: usize) -> anyhow::Result<Vec<usize>> {
    match k {
        [single] => Ok(vec![*single; m]),
        _ if k.len() == m => Ok(k.to_vec()),
        _ => Err(UsageError(format!("{} cluster counts given for an order-{m} tensor", k.len())).into()),
    }
}

fn variant_config(g: &GlobalOpts, k: Vec<usize>) -> VariantConfig {
    let mut cfg = VariantConfig::new(k, g.seed);
    cfg.restarts = g.restarts as usize;
    cfg.max_iters = g.max_iters;
    cfg.tol = g.tol;
    cfg.sitec_max_iters = g.max_iters;
    cfg.sitec_tol = g.tol;
    cfg
}

fn check_tol(g: &GlobalOpts) -> anyhow::Result<()> {
    if !(g.tol >= 0.0) || !g.tol.is_finite() {
        bail!(UsageError(format!("--tol must be finite and >= 0, got {}", g.tol)));
    }
    Ok(())
}

pub fn cmd_gen(g: &GlobalOpts, args: &GenArgs) -> anyhow::Result<String> {
    let model = match g.div {
        Divergence::GeneralizedKl { .. } => NoiseModel::Poisson,
        _ => NoiseModel::Gaussian,
    };
    let mut spec = PlantedSpec::new(args.shape.clone(), args.k.0.clone(), args.noise, model, g.seed);
    spec.means_range = args.means_range;
    spec.poisson_scale = args.poisson_scale;
    spec.validate().map_err(|e| UsageError(e.to_string()))?;
    let planted = generate_for(&spec, &g.div)?;
    let dir = g.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let tensor_path = dir.join(format!("{}.tns", args.name));
    let truth_path = dir.join(format!("{}.truth", args.name));
    write_tensor(&tensor_path, &planted.tensor)?;
    write_truth(
        &truth_path,
        &Truth {
            k: planted.truth.k(),
            labels: planted.truth.labels(),
            objective: planted.truth.objective,
        },
    )?;
    let report = GenReport {
        tensor: tensor_path.display().to_string(),
        truth: truth_path.display().to_string(),
        shape: args.shape.dims().to_vec(),
        k: args.k.0.clone(),
        noise: args.noise,
        noise_model: format!("{model:?}").to_lowercase(),
        divergence: g.div.token(),
        seed: g.seed,
        objective: planted.truth.objective,
    };
    match g.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            #[derive(serde::Serialize)]
            struct Flat<'a> {
                tensor: &'a str,
                truth: &'a str,
                shape: String,
                k: String,
                noise: f64,
                noise_model: &'a str,
                divergence: &'a str,
                seed: u64,
                objective: f64,
            }
            let join = |v: &[usize], sep: &str| v.iter().map(usize::to_string).collect::<Vec<_>>().join(sep);
            to_csv(&[Flat {
                tensor: &report.tensor,
                truth: &report.truth,
                shape: join(&report.shape, "x"),
                k: join(&report.k, ","),
                noise: report.noise,
                noise_model: &report.noise_model,
                divergence: &report.divergence,
                seed: report.seed,
                objective: report.objective,
            }])
        }
    }
}

fn reference_from_truth(a: &DenseTensor, path: &Path, spec: &Divergence) -> anyhow::Result<CoClustering> {
    let truth = read_truth(path)?;
    let assignments = truth
        .labels
        .into_iter()
        .zip(truth.k)
        .map(|(l, k)| Assignment::new(l, k))
        .collect::<tensorclus::Result<Vec<_>>>()?;
    Ok(CoClustering::from_assignments(a, assignments, spec)?)
}

pub fn cmd_cluster(g: &GlobalOpts, args: &ClusterArgs, sitec_only: bool) -> anyhow::Result<String> {
    check_tol(g)?;
    let variant = args.variant.unwrap_or(if sitec_only { Variant::Skc } else { Variant::Sk });
    if sitec_only && !variant.uses_sitec() {
        bail!(UsageError(format!("sitec needs one of rc, sc, rkc, skc; got {variant}")));
    }
    let a = read_tensor(&args.input)?;
    let k = expand_k(&args.k.0, a.order())?;
    let cfg = variant_config(g, k.clone());
    let out = variant_pipeline(&a, variant, &cfg, &g.div)?;
    let factor = match &args.truth {
        Some(path) => {
            let reference = reference_from_truth(&a, path, &g.div)?;
            let alpha_t = seeding_factor(k.iter().copied().max().unwrap_or(1));
            Some(empirical_factor(&a, &out.clustering, reference.objective, alpha_t)?)
        }
        None => None,
    };
    let cc = &out.clustering;
    let report = ClusterReport {
        variant: variant.token().into(),
        divergence: g.div.token(),
        shape: a.dims().to_vec(),
        k,
        seed: g.seed,
        objective: cc.objective,
        cotec_objective: out.cotec_objective,
        labels: cc.labels(),
        means: MeansTensor {
            dims: cc.means.dims().to_vec(),
            data: cc.means.data().to_vec(),
        },
        empty_blocks: cc.empty_blocks.clone(),
        sitec_sweeps: out.sitec_sweeps,
        sitec_trace: out.sitec_trace.clone(),
        factor,
    };
    let json = to_json(&report)?;
    let labels = labels_csv(&report.labels)?;
    if let Some(dir) = &g.output_dir {
        write_file(dir, "cluster.json", &json)?;
        write_file(dir, "labels.csv", &labels)?;
    }
    Ok(match g.format {
        Format::Json => json,
        Format::Csv => labels,
    })
}

pub fn cmd_experiment(g: &GlobalOpts, args: &ExperimentArgs) -> anyhow::Result<String> {
    check_tol(g)?;
    if args.k.0.len() != args.shape.order() {
        bail!(UsageError(format!(
            "{} cluster counts for shape {}",
            args.k.0.len(),
            args.shape
        )));
    }
    let mut spec = ExperimentSpec::default_sweep(g.div.clone(), g.seed);
    spec.shape = args.shape.clone();
    spec.k = args.k.0.clone();
    spec.noise = args.noise.0.clone();
    spec.tensors = args.tensors;
    spec.trials = args.trials;
    if let Some(v) = &args.variants {
        spec.variants = v.0.clone();
    }
    spec.restarts = g.restarts as usize;
    spec.max_iters = g.max_iters;
    spec.tol = g.tol;
    spec.means_range = args.means_range;
    spec.poisson_scale = args.poisson_scale;
    let start = Instant::now();
    let mut report: ExperimentReport = run_experiment(&spec)?;
    if args.timing {
        report.meta.wall_time_secs = Some(start.elapsed().as_secs_f64());
    }
    let json = to_json(&report)?;
    let table = to_csv(&report.rows)?;
    if let Some(dir) = &g.output_dir {
        write_file(dir, "experiment.json", &json)?;
        write_file(dir, "table.csv", &table)?;
        write_file(dir, "factors.csv", &to_csv(&report.factor_rows())?)?;
        write_file(dir, "runs.csv", &to_csv(&report.runs)?)?;
    }
    Ok(match g.format {
        Format::Json => json,
        Format::Csv => table,
    })
}

pub fn cmd_oracle(g: &GlobalOpts, args: &OracleArgs) -> anyhow::Result<String> {
    check_tol(g)?;
    let a = read_tensor(&args.input)?;
    let k = expand_k(&args.k.0, a.order())?;
    let opt = oracle_optimal_with_budget(&a, &k, &g.div, args.budget)?;
    let exact = cotec_exact(&a, &k, &g.div)?;
    let bound = combination_bound(&a, &g.div, 1.0)?;
    let slack = |j: f64| 1e-9 * j.abs() + 1e-12;
    let holds = bound.map(|b| exact.objective <= b * opt.j_opt + slack(b * opt.j_opt));
    let heuristic = variant_pipeline(&a, args.variant, &variant_config(g, k.clone()), &g.div)?;
    let hj = heuristic.clustering.objective;
    let consistent = hj >= opt.j_opt - slack(opt.j_opt);
    if !consistent {
        eprintln!("warning: heuristic objective {hj} is below the exact optimum {}", opt.j_opt);
    }
    let report = OracleReport {
        divergence: g.div.token(),
        shape: a.dims().to_vec(),
        k,
        j_opt: opt.j_opt,
        labels: opt.clustering.labels(),
        evaluated: opt.evaluated,
        budget: args.budget,
        exact_combination: BoundCheck {
            objective: exact.objective,
            bound,
            holds,
        },
        heuristic: HeuristicCheck {
            variant: args.variant.token().into(),
            objective: hj,
            alpha_hat: (opt.j_opt > 0.0).then(|| hj / opt.j_opt),
            consistent,
        },
    };
    let json = to_json(&report)?;
    if let Some(dir) = &g.output_dir {
        write_file(dir, "oracle.json", &json)?;
    }
    Ok(match g.format {
        Format::Json => json,
        Format::Csv => labels_csv(&report.labels)?,
    })
}
