use super::{Assignment, PointSet};
use crate::divergence::{weighted_lower_median, Divergence, RepresentativeRule};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutcome {
    pub assignment: Assignment,
    pub centers: Vec<Vec<f64>>,
    /// Objective of `assignment` against `centers`.
    pub objective: f64,
    pub iters: usize,
    /// Objective after the initial assignment and after every iteration.
    pub trace: Vec<f64>,
}

/// Assigns every point to the center with the smallest `d(point, center)`;
/// the lowest center index wins ties. Returns labels and per-point costs.
pub fn assign(ps: &PointSet, centers: &[Vec<f64>], spec: &Divergence) -> (Vec<usize>, Vec<f64>) {
    let pairs = par::map_range(ps.len(), |i| {
        let x = ps.point(i);
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let d = spec.eval_slices(x, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    });
    pairs.into_iter().unzip()
}

/// Coordinatewise representatives of each cluster; `None` for empty ones.
pub fn update_centers(
    ps: &PointSet,
    labels: &[usize],
    k: usize,
    spec: &Divergence,
) -> Vec<Option<Vec<f64>>> {
    let d = ps.dim();
    match spec.representative_rule() {
        RepresentativeRule::Mean => {
            let mut sums = vec![vec![0.0; d]; k];
            let mut counts = vec![0usize; k];
            for (i, &c) in labels.iter().enumerate() {
                counts[c] += 1;
                for (s, &x) in sums[c].iter_mut().zip(ps.point(i)) {
                    *s += x;
                }
            }
            sums.into_iter()
                .zip(counts)
                .map(|(mut s, n)| {
                    (n > 0).then(|| {
                        s.iter_mut().for_each(|v| *v /= n as f64);
                        s
                    })
                })
                .collect()
        }
        RepresentativeRule::Median => {
            let mut members = vec![Vec::new(); k];
            for (i, &c) in labels.iter().enumerate() {
                members[c].push(i);
            }
            members
                .into_iter()
                .map(|m| {
                    (!m.is_empty()).then(|| {
                        let mut column = Vec::with_capacity(m.len());
                        (0..d)
                            .map(|j| {
                                column.clear();
                                column.extend(m.iter().map(|&i| ps.point(i)[j]));
                                weighted_lower_median(&column, None)
                            })
                            .collect()
                    })
                })
                .collect()
        }
    }
}

/// Replaces each empty center by the point farthest from its own center,
/// never reusing a point. Returns how many centers were repaired.
fn repair_empty(
    ps: &PointSet,
    labels: &[usize],
    updated: Vec<Option<Vec<f64>>>,
    spec: &Divergence,
) -> (Vec<Vec<f64>>, usize) {
    let empties: Vec<usize> = (0..updated.len()).filter(|&c| updated[c].is_none()).collect();
    if empties.is_empty() {
        return (updated.into_iter().map(Option::unwrap).collect(), 0);
    }
    let mut costs: Vec<f64> = labels
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            updated[c]
                .as_ref()
                .map_or(0.0, |center| spec.eval_slices(ps.point(i), center))
        })
        .collect();
    let mut centers = updated;
    for &c in &empties {
        let mut far = 0;
        for i in 1..costs.len() {
            if costs[i] > costs[far] {
                far = i;
            }
        }
        centers[c] = Some(ps.point(far).to_vec());
        costs[far] = f64::NEG_INFINITY;
    }
    let n = empties.len();
    (centers.into_iter().map(Option::unwrap).collect(), n)
}

/// Lloyd iterations under `spec`: assign with the point as first argument,
/// then move every center to its cluster's coordinatewise representative.
///
/// Stops once the relative decrease `(prev - cur) / prev` is at most `tol`
/// or after `max_iters` iterations. Empty clusters are reseeded at the
/// point farthest from its current center.
pub fn lloyd_refine(
    ps: &PointSet,
    init_centers: &[Vec<f64>],
    spec: &Divergence,
    max_iters: usize,
    tol: f64,
) -> Result<LloydOutcome> {
    let k = init_centers.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no initial centers".into()));
    }
    if let Some(c) = init_centers.iter().position(|c| c.len() != ps.dim()) {
        return Err(Error::Shape(format!(
            "center {c} has length {}, expected {}",
            init_centers[c].len(),
            ps.dim()
        )));
    }
    for center in init_centers {
        for &x in center {
            spec.check_value(x)
                .map_err(|reason| Error::Domain(format!("center value {x}: {reason}")))?;
        }
    }

    let mut centers = init_centers.to_vec();
    let (mut labels, costs) = assign(ps, &centers, spec);
    let mut objective: f64 = costs.iter().sum();
    let mut trace = vec![objective];
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        let updated = update_centers(ps, &labels, k, spec);
        let (next_centers, _) = repair_empty(ps, &labels, updated, spec);
        let (next_labels, next_costs) = assign(ps, &next_centers, spec);
        let next_objective: f64 = next_costs.iter().sum();
        trace.push(next_objective);
        let converged = objective - next_objective <= tol * objective;
        centers = next_centers;
        labels = next_labels;
        objective = next_objective;
        if converged {
            break;
        }
    }
    Ok(LloydOutcome {
        assignment: Assignment::new(labels, k)?,
        centers,
        objective,
        iters,
        trace,
    })
}
