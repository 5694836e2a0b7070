//! Serializable reports and their CSV forms.

use serde::{Deserialize, Serialize};
use tensorclus::verify::FactorReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub tensor: String,
    pub truth: String,
    pub shape: Vec<usize>,
    pub k: Vec<usize>,
    pub noise: f64,
    pub noise_model: String,
    pub divergence: String,
    pub seed: u64,
    /// Objective of the planted clustering under `divergence`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeansTensor {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub variant: String,
    pub divergence: String,
    pub shape: Vec<usize>,
    pub k: Vec<usize>,
    pub seed: u64,
    pub objective: f64,
    /// Objective before SiTeC (equal to `objective` for CoTeC variants).
    pub cotec_objective: f64,
    pub labels: Vec<Vec<usize>>,
    pub means: MeansTensor,
    pub empty_blocks: Vec<Vec<usize>>,
    pub sitec_sweeps: Option<usize>,
    pub sitec_trace: Option<Vec<f64>>,
    /// Present when a truth sidecar was supplied.
    pub factor: Option<FactorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub objective: f64,
    pub bound: Option<f64>,
    /// `objective <= bound * J_OPT`, when a bound exists.
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicCheck {
    pub variant: String,
    pub objective: f64,
    pub alpha_hat: Option<f64>,
    /// False if the heuristic reports an objective below the optimum, which
    /// would indicate a bug.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub divergence: String,
    pub shape: Vec<usize>,
    pub k: Vec<usize>,
    pub j_opt: f64,
    pub labels: Vec<Vec<usize>>,
    pub evaluated: u128,
    pub budget: u128,
    /// The combination of exact per-dimension optima against its bound.
    pub exact_combination: BoundCheck,
    pub heuristic: HeuristicCheck,
}

/// One aggregated (noise level, variant) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub noise: f64,
    pub variant: String,
    pub runs: usize,
    pub mean_j: f64,
    pub std_j: f64,
    /// `100 (J_r - J_v) / J_r` on the means; empty without an `r` row.
    pub improvement_pct: Option<f64>,
    pub sweeps_mean: Option<f64>,
    pub sweeps_std: Option<f64>,
    pub alpha_hat_mean: Option<f64>,
    pub alpha_hat_std: Option<f64>,
    /// Smallest bound over the tensors at this noise level.
    pub theoretical_bound: Option<f64>,
}

/// The (noise, α̂) series of one variant, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRow {
    pub noise: f64,
    pub variant: String,
    pub alpha_hat_mean: Option<f64>,
    pub alpha_hat_std: Option<f64>,
    pub theoretical_bound: Option<f64>,
}

impl From<&ExperimentRow> for FactorRow {
    fn from(r: &ExperimentRow) -> Self {
        Self {
            noise: r.noise,
            variant: r.variant.clone(),
            alpha_hat_mean: r.alpha_hat_mean,
            alpha_hat_std: r.alpha_hat_std,
            theoretical_bound: r.theoretical_bound,
        }
    }
}

/// One variant on one seeding of one tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub noise: f64,
    pub tensor: usize,
    pub trial: usize,
    pub variant: String,
    pub objective: f64,
    pub reference: f64,
    pub alpha_hat: Option<f64>,
    pub theoretical_bound: Option<f64>,
    pub sitec_sweeps: Option<usize>,
    /// Largest relative increase between consecutive SiTeC trace values
    /// (zero when the trace never rises).
    pub max_trace_rise: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub shape: Vec<usize>,
    pub k: Vec<usize>,
    pub divergence: String,
    pub noise_model: String,
    pub noise: Vec<f64>,
    pub tensors: usize,
    pub trials: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    /// Bound multiplier per dimension: the seeding factor `8(ln K* + 2)`.
    pub alpha_t: f64,
    pub sitec_sweeps_counted: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub meta: ExperimentMeta,
    pub rows: Vec<ExperimentRow>,
    pub runs: Vec<RunRecord>,
}

impl ExperimentReport {
    pub fn factor_rows(&self) -> Vec<FactorRow> {
        self.rows.iter().map(FactorRow::from).collect()
    }

    pub fn row(&self, noise: f64, variant: &str) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.noise == noise && r.variant == variant)
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> anyhow::Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

/// `dimension,index,label` lines for a set of per-dimension labels.
pub fn labels_csv(labels: &[Vec<usize>]) -> anyhow::Result<String> {
    #[derive(Serialize)]
    struct Row {
        dimension: usize,
        index: usize,
        label: usize,
    }
    let rows: Vec<Row> = labels
        .iter()
        .enumerate()
        .flat_map(|(dimension, ls)| {
            ls.iter()
                .enumerate()
                .map(move |(index, &label)| Row { dimension, index, label })
        })
        .collect();
    to_csv(&rows)
}
