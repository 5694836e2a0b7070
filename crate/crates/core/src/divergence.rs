//! Separable divergences, their optimal representatives, and curvature bounds.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Default positivity floor for generalized KL inputs.
pub const KL_FLOOR: f64 = 1e-6;

/// Divergences in `[-NEG_CLAMP, 0)` are round-off and reported as zero.
const NEG_CLAMP: f64 = 1e-12;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A Bregman divergence generated by a user-supplied strictly convex `f`.
#[derive(Clone)]
pub struct CustomBregman {
    name: String,
    f: ScalarFn,
    df: ScalarFn,
    domain: (f64, f64),
}

impl CustomBregman {
    /// Builds the divergence, spot-checking that `df` is strictly increasing
    /// on sampled points of the domain.
    pub fn new(
        name: impl Into<String>,
        f: ScalarFn,
        df: ScalarFn,
        domain: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = domain;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "invalid domain [{lo}, {hi}]"
            )));
        }
        // Unbounded ends are probed over a window of width 20, wide enough
        // to catch non-convexity without underflowing functions like exp.
        let (a, b) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi),
            (true, false) => (lo, lo + 20.0),
            (false, true) => (hi - 20.0, hi),
            (false, false) => (-10.0, 10.0),
        };
        const SAMPLES: usize = 64;
        let width = b - a;
        let pts: Vec<f64> = (0..=SAMPLES)
            .map(|i| a + width * (0.01 + 0.98 * i as f64 / SAMPLES as f64))
            .collect();
        for w in pts.windows(2) {
            let (d0, d1) = (df(w[0]), df(w[1]));
            if !(d1 > d0) {
                return Err(Error::InvalidArgument(format!(
                    "f' is not strictly increasing between {} and {}; f is not strictly convex",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            f,
            df,
            domain,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

/// A conditionally positive definite kernel on scalars.
#[derive(Clone)]
pub struct CpdKernel {
    name: String,
    c: KernelFn,
}

impl CpdKernel {
    pub fn new(name: impl Into<String>, c: KernelFn) -> Self {
        Self {
            name: name.into(),
            c,
        }
    }

    /// `C(x, y) = -|x - y|`, inducing `d_C(x, y) = |x - y|`.
    pub fn absdiff() -> Self {
        Self::new("absdiff", Arc::new(|x: f64, y: f64| -(x - y).abs()))
    }

    /// `C(x, y) = -(x - y)^2`, inducing the squared Euclidean distance.
    pub fn sqdiff() -> Self {
        Self::new("sqdiff", Arc::new(|x: f64, y: f64| -(x - y) * (x - y)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.c)(x, y)
    }

    /// Induced Hilbertian distance `-C(x,y) + (C(x,x) + C(y,y)) / 2`.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        -self.eval(x, y) + 0.5 * (self.eval(x, x) + self.eval(y, y))
    }

    /// Positive definite kernel `K(x,y) = (C(x,y) - C(x,a) - C(y,a) + C(a,a)) / 2`
    /// anchored at `a`.
    pub fn centered(&self, x: f64, y: f64, anchor: f64) -> f64 {
        0.5 * (self.eval(x, y) - self.eval(x, anchor) - self.eval(y, anchor)
            + self.eval(anchor, anchor))
    }
}

/// How the best single representative of a set of values is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentativeRule {
    Mean,
    Median,
}

/// A scalar divergence family `d(x, y)`, extended to tensors by summation.
#[derive(Clone)]
pub enum Divergence {
    SquaredEuclidean,
    GeneralizedKl { floor: f64 },
    L1,
    CustomBregman(CustomBregman),
    HilbertianCpd(CpdKernel),
}

impl fmt::Debug for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::SquaredEuclidean => f.write_str("SquaredEuclidean"),
            Divergence::GeneralizedKl { floor } => write!(f, "GeneralizedKl {{ floor: {floor} }}"),
            Divergence::L1 => f.write_str("L1"),
            Divergence::CustomBregman(b) => write!(f, "CustomBregman({})", b.name),
            Divergence::HilbertianCpd(k) => write!(f, "HilbertianCpd({})", k.name),
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl FromStr for Divergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqeuclidean" => Ok(Divergence::SquaredEuclidean),
            "kl" => Ok(Divergence::kl()),
            "l1" => Ok(Divergence::L1),
            "kernel:absdiff" => Ok(Divergence::HilbertianCpd(CpdKernel::absdiff())),
            "kernel:sqdiff" => Ok(Divergence::HilbertianCpd(CpdKernel::sqdiff())),
            other => Err(Error::InvalidArgument(format!(
                "unknown divergence {other:?} (expected sqeuclidean, kl, l1, kernel:absdiff, kernel:sqdiff)"
            ))),
        }
    }
}

impl Divergence {
    pub fn kl() -> Self {
        Divergence::GeneralizedKl { floor: KL_FLOOR }
    }

    pub fn token(&self) -> String {
        match self {
            Divergence::SquaredEuclidean => "sqeuclidean".into(),
            Divergence::GeneralizedKl { .. } => "kl".into(),
            Divergence::L1 => "l1".into(),
            Divergence::CustomBregman(b) => format!("bregman:{}", b.name),
            Divergence::HilbertianCpd(k) => format!("kernel:{}", k.name),
        }
    }

    pub fn is_bregman(&self) -> bool {
        matches!(
            self,
            Divergence::SquaredEuclidean
                | Divergence::GeneralizedKl { .. }
                | Divergence::CustomBregman(_)
        )
    }

    pub fn representative_rule(&self) -> RepresentativeRule {
        match self {
            Divergence::L1 => RepresentativeRule::Median,
            _ => RepresentativeRule::Mean,
        }
    }

    /// Checks a single value against the divergence domain.
    pub fn check_value(&self, x: f64) -> std::result::Result<(), String> {
        if !x.is_finite() {
            return Err("value is not finite".into());
        }
        match self {
            Divergence::GeneralizedKl { floor } if x < *floor => {
                Err(format!("generalized KL requires values >= {floor}"))
            }
            Divergence::CustomBregman(b) if x < b.domain.0 || x > b.domain.1 => Err(format!(
                "value outside the domain [{}, {}] of {}",
                b.domain.0, b.domain.1, b.name
            )),
            _ => Ok(()),
        }
    }

    /// Checks every entry of `a`, reporting the first offending coordinate.
    pub fn check_tensor(&self, a: &DenseTensor) -> Result<()> {
        for (pos, &x) in a.data().iter().enumerate() {
            if let Err(reason) = self.check_value(x) {
                return Err(Error::EntryDomain {
                    index: a.shape().multi_index(pos),
                    value: x,
                    reason,
                });
            }
        }
        Ok(())
    }

    /// `d(x, y)` with domain checks.
    pub fn scalar_div(&self, x: f64, y: f64) -> Result<f64> {
        for v in [x, y] {
            self.check_value(v)
                .map_err(|reason| Error::Domain(format!("{v}: {reason}")))?;
        }
        Ok(self.eval(x, y))
    }

    /// `d(x, y)` for inputs already known to be in the domain.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = match self {
            Divergence::SquaredEuclidean => (x - y) * (x - y),
            Divergence::GeneralizedKl { .. } => x * (x / y).ln() - x + y,
            Divergence::L1 => (x - y).abs(),
            Divergence::CustomBregman(b) => (b.f)(x) - (b.f)(y) - (b.df)(y) * (x - y),
            Divergence::HilbertianCpd(k) => k.distance(x, y),
        };
        if (-NEG_CLAMP..0.0).contains(&d) {
            0.0
        } else {
            d
        }
    }

    /// Separable divergence between two equally long slices.
    #[inline]
    pub fn eval_slices(&self, xs: &[f64], ys: &[f64]) -> f64 {
        debug_assert_eq!(xs.len(), ys.len());
        match self {
            Divergence::SquaredEuclidean => xs
                .iter()
                .zip(ys)
                .map(|(x, y)| (x - y) * (x - y))
                .sum(),
            _ => xs.iter().zip(ys).map(|(&x, &y)| self.eval(x, y)).sum(),
        }
    }

    /// `d(A, B)` summed over all entries.
    pub fn tensor_div(&self, a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
        if a.shape() != b.shape() {
            return Err(Error::Shape(format!(
                "expected shape {}, got {}",
                a.shape(),
                b.shape()
            )));
        }
        self.check_tensor(a)?;
        self.check_tensor(b)?;
        Ok(self.eval_slices(a.data(), b.data()))
    }

    /// The best single representative of `values` under this divergence
    /// (weighted mean for Bregman and kernel kinds, weighted lower median
    /// for L1).
    pub fn representative(&self, values: &[f64], weights: Option<&[f64]>) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "representative of an empty set".into(),
            ));
        }
        if let Some(w) = weights {
            if w.len() != values.len() {
                return Err(Error::Shape(format!(
                    "{} weights for {} values",
                    w.len(),
                    values.len()
                )));
            }
            if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument("weights must be positive".into()));
            }
        }
        Ok(match self.representative_rule() {
            RepresentativeRule::Mean => weighted_mean(values, weights),
            RepresentativeRule::Median => weighted_lower_median(values, weights),
        })
    }
}

pub fn weighted_mean(values: &[f64], weights: Option<&[f64]>) -> f64 {
    match weights {
        None => values.iter().sum::<f64>() / values.len() as f64,
        Some(w) => {
            let total: f64 = w.iter().sum();
            values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / total
        }
    }
}

/// Smallest value whose cumulative weight reaches half the total.
pub fn weighted_lower_median(values: &[f64], weights: Option<&[f64]>) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..values.len()).map(weight).sum();
    let mut cum = 0.0;
    for &i in &idx {
        cum += weight(i);
        if cum >= 0.5 * total {
            return values[i];
        }
    }
    values[*idx.last().expect("nonempty")]
}

/// Constants with `sigma_l * B(x,y) <= (x-y)^2 <= sigma_u * B(x,y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    pub sigma_l: f64,
    pub sigma_u: f64,
}

impl CurvatureBounds {
    pub fn new(sigma_l: f64, sigma_u: f64) -> Result<Self> {
        if !(sigma_l > 0.0) || !(sigma_u >= sigma_l) || !sigma_u.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "curvature bounds need 0 < sigma_l <= sigma_u, got ({sigma_l}, {sigma_u})"
            )));
        }
        Ok(Self { sigma_l, sigma_u })
    }

    pub fn ratio(&self) -> f64 {
        self.sigma_u / self.sigma_l
    }
}

/// Curvature bounds of generalized KL on `[data_min, data_max]`.
///
/// With `f(x) = x ln x`, `B_f(x,y) = f''(xi)(x-y)^2 / 2` for some `xi`
/// between x and y, and `f''(xi) = 1/xi`.
pub fn kl_curvature_bounds(data_min: f64, data_max: f64) -> Result<CurvatureBounds> {
    if !(data_min > 0.0) {
        return Err(Error::Domain(format!(
            "KL curvature bounds need a positive lower end, got {data_min}"
        )));
    }
    if !(data_max >= data_min) || !data_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "invalid interval [{data_min}, {data_max}]"
        )));
    }
    CurvatureBounds::new(2.0 * data_min, 2.0 * data_max)
}
