//! Approximation-factor bounds for the combined clustering and empirical
//! factors measured against a reference objective.

use serde::Serialize;

use super::projection::padded_power;
use crate::divergence::{kl_curvature_bounds, CurvatureBounds, Divergence};
use crate::error::{Error, Result};
use crate::tenclus::CoClustering;
use crate::tensor::DenseTensor;

/// Which guarantee applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    /// `2^ceil(log2(m/t)) · α`.
    SquaredEuclidean,
    /// `2(m/t) · α` for separable metrics such as L1.
    Metric,
    /// `(σ_U/σ_L) · 2^ceil(log2(m/t)) · α`.
    Bregman,
    /// `(m/t) · α`; with the seeding factor `α = 8(ln K* + 2)` this is
    /// `8m(ln K* + 2)`.
    HilbertianSeeding,
}

impl BoundCase {
    pub fn for_divergence(spec: &Divergence) -> Self {
        match spec {
            Divergence::SquaredEuclidean => BoundCase::SquaredEuclidean,
            Divergence::L1 => BoundCase::Metric,
            Divergence::GeneralizedKl { .. } | Divergence::CustomBregman(_) => BoundCase::Bregman,
            Divergence::HilbertianCpd(_) => BoundCase::HilbertianSeeding,
        }
    }
}

/// Expected-cost factor of divergence-weighted seeding with `k` centers:
/// `8(ln k + 2)`.
pub fn seeding_factor(k: usize) -> f64 {
    8.0 * ((k.max(1) as f64).ln() + 2.0)
}

/// Guarantee on `J(combined) / J_OPT` when every dimension's clusterer is
/// an `alpha_t`-approximation on groups of `t` dimensions. A dimension
/// count that is not a power of two is padded up.
pub fn theoretical_bound(
    m: usize,
    t: usize,
    case: BoundCase,
    alpha_t: f64,
    sigma: Option<CurvatureBounds>,
) -> Result<f64> {
    if m == 0 || t == 0 || t > m {
        return Err(Error::InvalidArgument(format!("need 1 <= t <= m, got m = {m}, t = {t}")));
    }
    if !(alpha_t >= 1.0) || !alpha_t.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha_t must be >= 1, got {alpha_t}")));
    }
    let groups = m.div_ceil(t);
    let power = padded_power(groups) as f64;
    Ok(match case {
        BoundCase::SquaredEuclidean => power * alpha_t,
        BoundCase::Metric => 2.0 * groups as f64 * alpha_t,
        BoundCase::Bregman => {
            let s = sigma.ok_or_else(|| {
                Error::InvalidArgument("the Bregman bound needs curvature bounds".into())
            })?;
            s.ratio() * power * alpha_t
        }
        BoundCase::HilbertianSeeding => groups as f64 * alpha_t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReport {
    pub j_achieved: f64,
    pub j_reference: f64,
    /// `J_achieved / J_reference`; `None` when the reference is not positive.
    pub alpha_hat: Option<f64>,
    /// `None` when no bound applies (a custom Bregman divergence without
    /// known curvature bounds).
    pub theoretical_bound: Option<f64>,
    pub case: BoundCase,
}

impl FactorReport {
    pub fn reference_valid(&self) -> bool {
        self.alpha_hat.is_some()
    }

    pub fn within_bound(&self) -> Option<bool> {
        Some(self.alpha_hat? <= self.theoretical_bound?)
    }
}

/// The bound for combining `alpha_t`-approximate per-dimension
/// clusterings of `a` under `spec`, or `None` when no bound is known (a
/// custom Bregman divergence, or KL data touching zero).
pub fn combination_bound(a: &DenseTensor, spec: &Divergence, alpha_t: f64) -> Result<Option<f64>> {
    let case = BoundCase::for_divergence(spec);
    let sigma = match spec {
        Divergence::GeneralizedKl { .. } => {
            let (lo, hi) = a.min_max();
            kl_curvature_bounds(lo, hi).ok()
        }
        _ => None,
    };
    if case == BoundCase::Bregman && sigma.is_none() {
        return Ok(None);
    }
    theoretical_bound(a.order(), 1, case, alpha_t, sigma).map(Some)
}

/// Empirical factor of `achieved` against `reference_j`, with the bound
/// that matches its divergence on `a` (curvature from the value range for
/// generalized KL).
pub fn empirical_factor(
    a: &DenseTensor,
    achieved: &CoClustering,
    reference_j: f64,
    alpha_t: f64,
) -> Result<FactorReport> {
    let case = BoundCase::for_divergence(&achieved.divergence);
    let theoretical = combination_bound(a, &achieved.divergence, alpha_t)?;
    let alpha_hat = (reference_j > 0.0).then(|| achieved.objective / reference_j);
    Ok(FactorReport {
        j_achieved: achieved.objective,
        j_reference: reference_j,
        alpha_hat,
        theoretical_bound: theoretical,
        case,
    })
}
