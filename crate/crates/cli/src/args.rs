use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensorclus::cluster1d::{DEFAULT_MAX_ITERS, DEFAULT_TOL};
use tensorclus::{Divergence, Shape, Variant};

#[derive(Debug, Clone, Parser)]
#[command(name = "tensorclus", version, about = "Dense tensor co-clustering")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// sqeuclidean, kl, l1, kernel:absdiff or kernel:sqdiff
    #[arg(long, global = true, default_value = "sqeuclidean", value_parser = parse_divergence)]
    pub div: Divergence,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative-decrease stopping tolerance for Lloyd and SiTeC.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Independent 1D restarts per dimension; the best is kept.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a planted tensor and its truth sidecar.
    Gen(GenArgs),
    /// Run one variant on a tensor file.
    Cluster(ClusterArgs),
    /// Like `cluster`, restricted to the SiTeC variants.
    Sitec(ClusterArgs),
    /// Sweep noise levels over planted tensors and aggregate every variant.
    Experiment(ExperimentArgs),
    /// Solve a small instance exactly and check the bounds against it.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Dimensions separated by 'x', e.g. 30x30x20.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Shape,
    /// Cluster counts per dimension, comma separated.
    #[arg(long, value_parser = parse_usize_list)]
    pub k: UsizeList,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Interval for the block means, "lo,hi".
    #[arg(long, default_value = "1,10", value_parser = parse_range)]
    pub means_range: (f64, f64),
    /// Multiplier on the noise level for Poisson (KL) data.
    #[arg(long, default_value_t = 1.0)]
    pub poisson_scale: f64,
    /// Base name of the written files.
    #[arg(long, default_value = "planted")]
    pub name: String,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    /// Tensor file (.tns, or .csv for a matrix).
    #[arg(long)]
    pub input: PathBuf,
    /// Cluster counts per dimension; a single value applies to all.
    #[arg(long, value_parser = parse_usize_list)]
    pub k: UsizeList,
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    /// Truth sidecar; enables the empirical approximation factor.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long, default_value = "30x30x20", value_parser = parse_shape)]
    pub shape: Shape,
    #[arg(long, default_value = "5,5,5", value_parser = parse_usize_list)]
    pub k: UsizeList,
    /// Noise levels, comma separated.
    #[arg(long, default_value = "0.5,1,2,3", value_parser = parse_f64_list)]
    pub noise: F64List,
    /// Generated tensors per noise level.
    #[arg(long, default_value_t = 3)]
    pub tensors: usize,
    /// Seedings per tensor.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Variants to run, comma separated (default: all eight).
    #[arg(long, value_parser = parse_variant_list)]
    pub variants: Option<VariantList>,
    #[arg(long, default_value = "1,10", value_parser = parse_range)]
    pub means_range: (f64, f64),
    #[arg(long, default_value_t = 1.0)]
    pub poisson_scale: f64,
    /// Record wall time in the report (makes output nondeterministic).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_usize_list)]
    pub k: UsizeList,
    /// Heuristic variant compared against the optimum.
    #[arg(long, default_value = "sk", value_parser = parse_variant)]
    pub variant: Variant,
    /// Maximum number of joint clusterings to enumerate.
    #[arg(long, default_value_t = tensorclus::verify::DEFAULT_BUDGET)]
    pub budget: u128,
}

// Newtypes so clap treats comma lists as single values.
#[derive(Debug, Clone, PartialEq)]
pub struct UsizeList(pub Vec<usize>);
#[derive(Debug, Clone, PartialEq)]
pub struct F64List(pub Vec<f64>);
#[derive(Debug, Clone, PartialEq)]
pub struct VariantList(pub Vec<Variant>);

pub fn parse_divergence(s: &str) -> Result<Divergence, String> {
    s.parse().map_err(|e: tensorclus::Error| e.to_string())
}

pub fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: tensorclus::Error| e.to_string())
}

pub fn parse_shape(s: &str) -> Result<Shape, String> {
    let dims = s
        .split('x')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad dimension {t:?} in shape {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    Shape::new(dims).map_err(|e| e.to_string())
}

fn split_list<T>(s: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items = s.split(',').map(|t| f(t.trim())).collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

pub fn parse_usize_list(s: &str) -> Result<UsizeList, String> {
    split_list(s, |t| t.parse::<usize>().map_err(|_| format!("bad integer {t:?}"))).map(UsizeList)
}

pub fn parse_f64_list(s: &str) -> Result<F64List, String> {
    split_list(s, |t| t.parse::<f64>().map_err(|_| format!("bad number {t:?}"))).map(F64List)
}

pub fn parse_variant_list(s: &str) -> Result<VariantList, String> {
    split_list(s, parse_variant).map(VariantList)
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    match parse_f64_list(s)?.0[..] {
        [lo, hi] if lo <= hi => Ok((lo, hi)),
        _ => Err(format!("expected \"lo,hi\" with lo <= hi, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_and_shape_parsing() {
        assert_eq!(parse_shape("30x30x20").unwrap().dims(), &[30, 30, 20]);
        assert!(parse_shape("3x0").is_err());
        assert!(parse_shape("3,3").is_err());
        assert_eq!(parse_usize_list("5, 5,2").unwrap().0, vec![5, 5, 2]);
        assert!(parse_usize_list("5,,2").is_err());
        assert_eq!(parse_f64_list("0.5,1").unwrap().0, vec![0.5, 1.0]);
        assert_eq!(parse_range("1,10").unwrap(), (1.0, 10.0));
        assert!(parse_range("3,1").is_err());
        assert_eq!(parse_variant_list("r,skc").unwrap().0, vec![Variant::R, Variant::Skc]);
        assert!(parse_divergence("cosine").is_err());
    }

    #[test]
    fn cli_parses_global_flags_anywhere() {
        let cli = Cli::try_parse_from([
            "tensorclus", "--seed", "7", "gen", "--shape", "4x4", "--k", "2,2", "--div", "kl", "--format", "csv",
        ])
        .unwrap();
        assert_eq!(cli.global.seed, 7);
        assert_eq!(cli.global.div.token(), "kl");
        assert_eq!(cli.global.format, Format::Csv);
        assert!(matches!(cli.command, Command::Gen(_)));
        assert!(Cli::try_parse_from(["tensorclus", "gen", "--shape", "4x4"]).is_err());
        assert!(Cli::try_parse_from(["tensorclus", "--restarts", "0", "gen", "--shape", "4", "--k", "1"]).is_err());
    }
}
