//! Exhaustive and dynamic-programming exact optima.

use super::partitions::{partition_count, RestrictedGrowth};
use crate::cluster1d::{Assignment, PointSet};
use crate::divergence::{Divergence, RepresentativeRule};
use crate::error::{Error, Result};
use crate::par;
use crate::tenclus::{block_index_map, representatives_from_map, CoClustering};
use crate::tensor::DenseTensor;

/// Default cap on the number of joint clusterings an oracle may evaluate.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub clustering: CoClustering,
    pub j_opt: f64,
    /// Number of joint clusterings evaluated.
    pub evaluated: u128,
}

fn check_budget(count: u128, budget: u128) -> Result<()> {
    if count > budget {
        Err(Error::BudgetExceeded { count, budget })
    } else {
        Ok(())
    }
}

/// Global optimum of the co-clustering objective over all partitions of
/// every dimension into at most `k[j]` blocks, with the default budget.
pub fn oracle_optimal(a: &DenseTensor, k: &[usize], spec: &Divergence) -> Result<OracleOutcome> {
    oracle_optimal_with_budget(a, k, spec, DEFAULT_BUDGET)
}

/// As [`oracle_optimal`] with an explicit evaluation budget. Ties go to the
/// lexicographically smallest concatenation of label strings.
pub fn oracle_optimal_with_budget(
    a: &DenseTensor,
    k: &[usize],
    spec: &Divergence,
    budget: u128,
) -> Result<OracleOutcome> {
    if k.len() != a.order() {
        return Err(Error::Shape(format!(
            "{} cluster counts for an order-{} tensor",
            k.len(),
            a.order()
        )));
    }
    if k.contains(&0) {
        return Err(Error::InvalidArgument("cluster counts must be positive".into()));
    }
    spec.check_tensor(a)?;
    let count = a
        .dims()
        .iter()
        .zip(k)
        .fold(1u128, |acc, (&n, &kj)| acc.saturating_mul(partition_count(n, kj)));
    check_budget(count, budget)?;

    let lists: Vec<Vec<Assignment>> = a
        .dims()
        .iter()
        .zip(k)
        .map(|(&n, &kj)| {
            RestrictedGrowth::new(n, kj)
                .map(|labels| Assignment::new(labels, kj))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let nblocks: usize = k.iter().product();
    let m = a.order();

    // Split on the first dimension's partitions; each worker walks the rest
    // in lexicographic order and keeps its first strict minimum.
    let best_per_first = par::map_range(lists[0].len(), |p0| {
        let mut idx = vec![0usize; m];
        idx[0] = p0;
        let mut best: Option<(f64, Vec<usize>)> = None;
        loop {
            let asg: Vec<Assignment> = idx.iter().enumerate().map(|(j, &i)| lists[j][i].clone()).collect();
            let map = block_index_map(a.shape(), &asg);
            let (reps, _) = representatives_from_map(a.data(), &map, nblocks, spec);
            let j: f64 = map.iter().zip(a.data()).map(|(&b, &x)| spec.eval(x, reps[b])).sum();
            if best.as_ref().is_none_or(|(bj, _)| j < *bj) {
                best = Some((j, idx.clone()));
            }
            // Mixed-radix increment over dimensions 1..m.
            let mut d = m;
            loop {
                if d == 1 {
                    return best.expect("at least one combination");
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < lists[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    });
    let (_, idx) = best_per_first
        .into_iter()
        .reduce(|acc, cand| if cand.0 < acc.0 { cand } else { acc })
        .expect("nonempty enumeration");
    let assignments = idx.iter().enumerate().map(|(j, &i)| lists[j][i].clone()).collect();
    let clustering = CoClustering::from_assignments(a, assignments, spec)?;
    Ok(OracleOutcome {
        j_opt: clustering.objective,
        clustering,
        evaluated: count,
    })
}

/// The combined clustering with every dimension solved exactly: each
/// dimension's fibers get their 1D optimum, and the labels are combined
/// with optimal block representatives.
pub fn cotec_exact(a: &DenseTensor, k: &[usize], spec: &Divergence) -> Result<CoClustering> {
    if k.len() != a.order() {
        return Err(Error::Shape(format!(
            "{} cluster counts for an order-{} tensor",
            k.len(),
            a.order()
        )));
    }
    spec.check_tensor(a)?;
    let assignments = par::map_range(a.order(), |j| {
        let ps = crate::tenclus::point_set_along(a, j)?;
        oracle_1d_exact(&ps, k[j], spec).map(|(asg, _)| asg)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    CoClustering::from_assignments(a, assignments, spec)
}

/// Objective of a 1D clustering with the optimal representative per
/// cluster and coordinate.
fn partition_cost(ps: &PointSet, labels: &[usize], k: usize, spec: &Divergence) -> f64 {
    let d = ps.dim();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    let mut total = 0.0;
    let mut column = Vec::new();
    for m in members.iter().filter(|m| !m.is_empty()) {
        for t in 0..d {
            column.clear();
            column.extend(m.iter().map(|&i| ps.point(i)[t]));
            let rep = match spec.representative_rule() {
                RepresentativeRule::Mean => crate::divergence::weighted_mean(&column, None),
                RepresentativeRule::Median => crate::divergence::weighted_lower_median(&column, None),
            };
            total += column.iter().map(|&x| spec.eval(x, rep)).sum::<f64>();
        }
    }
    total
}

/// Exact 1D optimum over partitions into at most `k` clusters. Scalar data
/// under squared Euclidean or L1 uses dynamic programming over sorted
/// values; everything else is enumerated under [`DEFAULT_BUDGET`].
pub fn oracle_1d_exact(ps: &PointSet, k: usize, spec: &Divergence) -> Result<(Assignment, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    ps.check_domain(spec)?;
    if ps.dim() == 1 && matches!(spec, Divergence::SquaredEuclidean | Divergence::L1) {
        let xs: Vec<f64> = ps.iter().map(|p| p[0]).collect();
        let labels = dp_scalar(&xs, k, spec);
        let j = partition_cost(ps, &labels, k, spec);
        return Ok((Assignment::new(labels, k)?, j));
    }
    oracle_1d_enumerate(ps, k, spec, DEFAULT_BUDGET)
}

/// Exhaustive 1D optimum; ties go to the lexicographically smallest labels.
pub fn oracle_1d_enumerate(
    ps: &PointSet,
    k: usize,
    spec: &Divergence,
    budget: u128,
) -> Result<(Assignment, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    ps.check_domain(spec)?;
    check_budget(partition_count(ps.len(), k), budget)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for labels in RestrictedGrowth::new(ps.len(), k) {
        let j = partition_cost(ps, &labels, k, spec);
        if best.as_ref().is_none_or(|(bj, _)| j < *bj) {
            best = Some((j, labels));
        }
    }
    let (j, labels) = best.ok_or_else(|| Error::InvalidArgument("empty point set".into()))?;
    Ok((Assignment::new(labels, k)?, j))
}

/// Optimal clusters of scalars under squared Euclidean or L1 are
/// contiguous in sorted order, so the optimum is a segmentation.
fn dp_scalar(xs: &[f64], k: usize, spec: &Divergence) -> Vec<usize> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]).then(i.cmp(&j)));
    let s: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let w = n + 1;
    // cost[i * w + j] = cost of the segment s[i..j].
    let mut cost = vec![0.0; w * w];
    match spec {
        Divergence::SquaredEuclidean => {
            for i in 0..n {
                let (mut mean, mut m2) = (0.0, 0.0);
                for (c, &x) in s[i..].iter().enumerate() {
                    let cnt = (c + 1) as f64;
                    let delta = x - mean;
                    mean += delta / cnt;
                    m2 += delta * (x - mean);
                    cost[i * w + i + c + 1] = m2;
                }
            }
        }
        _ => {
            let mut prefix = vec![0.0; w];
            for (t, &x) in s.iter().enumerate() {
                prefix[t + 1] = prefix[t] + x;
            }
            for i in 0..n {
                for j in i + 1..=n {
                    let med_at = i + (j - i - 1) / 2;
                    let med = s[med_at];
                    let below = med * (med_at - i + 1) as f64 - (prefix[med_at + 1] - prefix[i]);
                    let above = (prefix[j] - prefix[med_at + 1]) - med * (j - med_at - 1) as f64;
                    cost[i * w + j] = (below + above).max(0.0);
                }
            }
        }
    }
    let segments = k.min(n);
    let mut best = vec![f64::INFINITY; (segments + 1) * w];
    let mut back = vec![0usize; (segments + 1) * w];
    best[0] = 0.0;
    for c in 1..=segments {
        for j in c..=n {
            for i in c - 1..j {
                let prev = best[(c - 1) * w + i];
                if !prev.is_finite() {
                    continue;
                }
                let v = prev + cost[i * w + j];
                if v < best[c * w + j] {
                    best[c * w + j] = v;
                    back[c * w + j] = i;
                }
            }
        }
    }
    let mut labels = vec![0usize; n];
    let mut j = n;
    for c in (1..=segments).rev() {
        let i = back[c * w + j];
        for &p in &order[i..j] {
            labels[p] = c - 1;
        }
        j = i;
    }
    labels
}
