//! Simultaneous alternating refinement of a co-clustering.
//!
//! One sweep visits the dimensions in order 0..m. For each dimension it
//! first recomputes the block representatives, then moves every index of
//! that dimension to the cluster that minimizes its summed divergence with
//! all other labels held fixed. Every half-step leaves J unchanged or lower.

use super::objective::{block_index_map, block_representatives, check_conformity, objective_unchecked};
use super::CoClustering;
use crate::cluster1d::Assignment;
use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::par;
use crate::tensor::{fibers_along, DenseTensor};

#[derive(Debug, Clone)]
pub struct SitecOutcome {
    pub clustering: CoClustering,
    /// Full sweeps performed, including the final non-improving one.
    pub sweeps: usize,
    /// J at the start and after every half-step.
    pub trace: Vec<f64>,
}

/// Recomputes the representatives, keeping the previous value of any block
/// whose new representative would not lower that block's cost.
fn update_means(
    a: &DenseTensor,
    assignments: &[Assignment],
    prev: &DenseTensor,
    spec: &Divergence,
) -> Result<DenseTensor> {
    let fresh = block_representatives(a, assignments, spec)?.means;
    let map = block_index_map(a.shape(), assignments);
    let nblocks = prev.data().len();
    let mut cost_new = vec![0.0; nblocks];
    let mut cost_old = vec![0.0; nblocks];
    let mut used = vec![false; nblocks];
    for (&b, &x) in map.iter().zip(a.data()) {
        cost_new[b] += spec.eval(x, fresh.data()[b]);
        cost_old[b] += spec.eval(x, prev.data()[b]);
        used[b] = true;
    }
    let data = (0..nblocks)
        .map(|b| {
            if !used[b] || cost_old[b] <= cost_new[b] {
                prev.data()[b]
            } else {
                fresh.data()[b]
            }
        })
        .collect();
    DenseTensor::new(prev.shape().clone(), data)
}

/// For every position within a fiber along `dim`, the block offset
/// contributed by all other dimensions.
fn rest_offsets(a: &DenseTensor, assignments: &[Assignment], dim: usize) -> Vec<usize> {
    let shape = a.shape();
    let (outer, n, inner) = shape.split_at_mode(dim);
    let bstrides = crate::tensor::Shape::new(assignments.iter().map(Assignment::k).collect())
        .expect("positive cluster counts")
        .strides();
    (0..outer * inner)
        .map(|p| {
            let flat = ((p / inner) * n) * inner + p % inner;
            let ix = shape.multi_index(flat);
            ix.iter()
                .enumerate()
                .filter(|&(l, _)| l != dim)
                .map(|(l, &i)| assignments[l].labels()[i] * bstrides[l])
                .sum()
        })
        .collect()
}

fn copy_slice(means: &mut [f64], shape: &crate::tensor::Shape, dim: usize, from: usize, to: usize) {
    let (outer, k, inner) = shape.split_at_mode(dim);
    for o in 0..outer {
        let src = (o * k + from) * inner;
        let dst = (o * k + to) * inner;
        means.copy_within(src..src + inner, dst);
    }
}

/// Reassigns every index of `dim`; returns the new labels.
fn reassign_dimension(
    fibers: &[Vec<f64>],
    offsets: &[usize],
    current: &Assignment,
    means: &DenseTensor,
    bstride: usize,
    spec: &Divergence,
) -> (Vec<usize>, Vec<f64>) {
    let k = current.k();
    let m = means.data();
    let results = par::map_range(fibers.len(), |i| {
        let fiber = &fibers[i];
        let cost = |c: usize| -> f64 {
            let shift = c * bstride;
            fiber
                .iter()
                .zip(offsets)
                .map(|(&x, &off)| spec.eval(x, m[off + shift]))
                .sum()
        };
        let own = current.labels()[i];
        let mut best = (own, cost(own));
        for c in (0..k).filter(|&c| c != own) {
            let v = cost(c);
            if v < best.1 {
                best = (c, v);
            }
        }
        best
    });
    results.into_iter().unzip()
}

/// Refines `init` by alternating block-representative updates and
/// per-dimension reassignment until the relative decrease of J over a
/// sweep is at most `tol`, or `max_iters` sweeps have run.
pub fn sitec(
    a: &DenseTensor,
    init: &CoClustering,
    spec: &Divergence,
    max_iters: usize,
    tol: f64,
) -> Result<SitecOutcome> {
    check_conformity(a, &init.assignments)?;
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be positive".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be >= 0, got {tol}")));
    }
    spec.check_tensor(a)?;
    let kshape = super::objective::block_shape(&init.assignments)?;
    if init.means.shape() != &kshape {
        return Err(Error::Shape(format!(
            "initial means have shape {}, clustering needs {kshape}",
            init.means.shape()
        )));
    }
    spec.check_tensor(&init.means)?;

    let m = a.order();
    let fibers: Vec<Vec<Vec<f64>>> = (0..m)
        .map(|j| fibers_along(a, j))
        .collect::<Result<_>>()?;
    let bstrides = kshape.strides();

    let mut assignments = init.assignments.clone();
    let mut means = init.means.clone();
    let evaluate = |asg: &[Assignment], means: &DenseTensor| {
        objective_unchecked(a, &block_index_map(a.shape(), asg), means, spec)
    };
    let mut objective = evaluate(&assignments, &means);
    let mut trace = vec![objective];
    let mut sweeps = 0;

    while sweeps < max_iters {
        sweeps += 1;
        let start = objective;
        for j in 0..m {
            means = update_means(a, &assignments, &means, spec)?;
            objective = evaluate(&assignments, &means);
            trace.push(objective);

            let offsets = rest_offsets(a, &assignments, j);
            let (labels, mut costs) =
                reassign_dimension(&fibers[j], &offsets, &assignments[j], &means, bstrides[j], spec);
            let k = assignments[j].k();
            let mut next = Assignment::new(labels, k)?;
            let mut sizes = next.sizes();
            // Split the costliest index off into each empty cluster, giving
            // it a copy of its old cluster's representatives so J is unchanged.
            for empty in 0..k {
                if sizes[empty] > 0 {
                    continue;
                }
                let mut far: Option<usize> = None;
                for i in 0..costs.len() {
                    if sizes[next.labels()[i]] < 2 {
                        continue;
                    }
                    if far.is_none_or(|f| costs[i] > costs[f]) {
                        far = Some(i);
                    }
                }
                let Some(far) = far else { break };
                let from = next.labels()[far];
                let mut data = means.clone().into_data();
                copy_slice(&mut data, &kshape, j, from, empty);
                means = DenseTensor::new(kshape.clone(), data)?;
                next.set(far, empty);
                sizes[from] -= 1;
                sizes[empty] += 1;
                costs[far] = f64::NEG_INFINITY;
            }
            assignments[j] = next;
            objective = evaluate(&assignments, &means);
            trace.push(objective);
        }
        if start - objective <= tol * start {
            break;
        }
    }

    means = update_means(a, &assignments, &means, spec)?;
    objective = evaluate(&assignments, &means);
    trace.push(objective);
    let reps = block_representatives(a, &assignments, spec)?;
    Ok(SitecOutcome {
        clustering: CoClustering {
            assignments,
            means,
            objective,
            divergence: spec.clone(),
            empty_blocks: reps.empty_blocks,
        },
        sweeps,
        trace,
    })
}
