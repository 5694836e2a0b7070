use rand::Rng;

use super::PointSet;
use crate::divergence::Divergence;
use crate::error::{Error, Result};

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot pick {k} centers from {n} points"
        )));
    }
    Ok(())
}

/// `k` distinct indices drawn uniformly without replacement.
pub fn seed_uniform_indices<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_k(n, k)?;
    Ok(rand::seq::index::sample(rng, n, k).into_vec())
}

pub fn seed_uniform<R: Rng + ?Sized>(ps: &PointSet, k: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let idx = seed_uniform_indices(ps.len(), k, rng)?;
    Ok(idx.into_iter().map(|i| ps.point(i).to_vec()).collect())
}

/// Divergence-weighted seeding: the first index is uniform, every further
/// index is drawn with probability proportional to the divergence from the
/// point to its nearest chosen center. When every remaining point sits on a
/// chosen center, the draw falls back to uniform over unchosen points.
pub fn seed_dsq_indices<R: Rng + ?Sized>(
    ps: &PointSet,
    k: usize,
    spec: &Divergence,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = ps.len();
    check_k(n, k)?;
    let mut chosen = Vec::with_capacity(k);
    let mut is_chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    is_chosen[first] = true;

    let mut nearest: Vec<f64> = (0..n)
        .map(|i| spec.eval_slices(ps.point(i), ps.point(first)))
        .collect();
    for (i, d) in nearest.iter_mut().enumerate() {
        if is_chosen[i] {
            *d = 0.0;
        }
    }

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 && total.is_finite() {
            let target = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                cum += w;
                pick = Some(i);
                if cum > target {
                    break;
                }
            }
            pick.expect("positive total has a positive weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !is_chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        is_chosen[next] = true;
        let center = ps.point(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            if is_chosen[i] {
                *d = 0.0;
            } else {
                let cand = spec.eval_slices(ps.point(i), center);
                if cand < *d {
                    *d = cand;
                }
            }
        }
    }
    Ok(chosen)
}

pub fn seed_dsq<R: Rng + ?Sized>(
    ps: &PointSet,
    k: usize,
    spec: &Divergence,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let idx = seed_dsq_indices(ps, k, spec, rng)?;
    Ok(idx.into_iter().map(|i| ps.point(i).to_vec()).collect())
}
