use crate::cluster1d::Assignment;
use crate::divergence::{weighted_lower_median, Divergence, RepresentativeRule};
use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};

pub(crate) fn check_conformity(a: &DenseTensor, assignments: &[Assignment]) -> Result<()> {
    if assignments.len() != a.order() {
        return Err(Error::Shape(format!(
            "{} assignments for an order-{} tensor",
            assignments.len(),
            a.order()
        )));
    }
    for (j, (asg, &n)) in assignments.iter().zip(a.dims()).enumerate() {
        if asg.len() != n {
            return Err(Error::Dimension {
                mode: j,
                expected: n,
                got: asg.len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn block_shape(assignments: &[Assignment]) -> Result<Shape> {
    Shape::new(assignments.iter().map(Assignment::k).collect())
}

/// Flat block index of every tensor entry.
pub(crate) fn block_index_map(shape: &Shape, assignments: &[Assignment]) -> Vec<usize> {
    let bshape = Shape::new(assignments.iter().map(Assignment::k).collect())
        .expect("cluster counts are positive");
    let bstrides = bshape.strides();
    let dims = shape.dims();
    let m = dims.len();
    let mut map = Vec::with_capacity(shape.len());
    let mut index = vec![0usize; m];
    let mut block: usize = assignments
        .iter()
        .zip(&bstrides)
        .map(|(a, s)| a.labels()[0] * s)
        .sum();
    for _ in 0..shape.len() {
        map.push(block);
        // Advance the row-major counter, keeping the block index in sync.
        for j in (0..m).rev() {
            let labels = assignments[j].labels();
            block -= labels[index[j]] * bstrides[j];
            index[j] += 1;
            if index[j] < dims[j] {
                block += labels[index[j]] * bstrides[j];
                break;
            }
            index[j] = 0;
            block += labels[0] * bstrides[j];
        }
    }
    map
}

/// Representative of each block given the block index of every entry;
/// the flag is false for blocks that received no entries (value 0).
pub(crate) fn representatives_from_map(
    data: &[f64],
    map: &[usize],
    nblocks: usize,
    spec: &Divergence,
) -> (Vec<f64>, Vec<bool>) {
    match spec.representative_rule() {
        RepresentativeRule::Mean => {
            // Accumulate offsets from each block's first entry, so constant
            // blocks reproduce their value exactly.
            let mut first = vec![f64::NAN; nblocks];
            let mut sums = vec![0.0; nblocks];
            let mut counts = vec![0usize; nblocks];
            for (&b, &x) in map.iter().zip(data) {
                if counts[b] == 0 {
                    first[b] = x;
                }
                sums[b] += x - first[b];
                counts[b] += 1;
            }
            let filled = counts.iter().map(|&c| c > 0).collect();
            let values = (0..nblocks)
                .map(|b| if counts[b] > 0 { first[b] + sums[b] / counts[b] as f64 } else { 0.0 })
                .collect();
            (values, filled)
        }
        RepresentativeRule::Median => {
            let mut members: Vec<Vec<f64>> = vec![Vec::new(); nblocks];
            for (&b, &x) in map.iter().zip(data) {
                members[b].push(x);
            }
            let filled = members.iter().map(|v| !v.is_empty()).collect();
            let values = members
                .iter()
                .map(|v| if v.is_empty() { 0.0 } else { weighted_lower_median(v, None) })
                .collect();
            (values, filled)
        }
    }
}

/// Block representatives and the blocks that received no entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRepresentatives {
    pub means: DenseTensor,
    /// Multi-indices of empty blocks, filled with the global representative.
    pub empty_blocks: Vec<Vec<usize>>,
}

/// Representative of every co-cluster block: the mean of its entries for
/// Bregman and kernel divergences, the lower median for L1.
pub fn block_representatives(
    a: &DenseTensor,
    assignments: &[Assignment],
    spec: &Divergence,
) -> Result<BlockRepresentatives> {
    check_conformity(a, assignments)?;
    let bshape = block_shape(assignments)?;
    let map = block_index_map(a.shape(), assignments);
    let (mut values, filled) = representatives_from_map(a.data(), &map, bshape.len(), spec);
    let mut empty_blocks = Vec::new();
    if filled.iter().any(|f| !f) {
        let global = spec.representative(a.data(), None)?;
        for (b, f) in filled.iter().enumerate() {
            if !f {
                values[b] = global;
                empty_blocks.push(bshape.multi_index(b));
            }
        }
    }
    Ok(BlockRepresentatives {
        means: DenseTensor::new(bshape, values)?,
        empty_blocks,
    })
}

/// `d(A, (C_1, ..., C_m) · M)`: every entry against the representative of
/// its block.
pub fn evaluate_objective(
    a: &DenseTensor,
    assignments: &[Assignment],
    means: &DenseTensor,
    spec: &Divergence,
) -> Result<f64> {
    check_conformity(a, assignments)?;
    let bshape = block_shape(assignments)?;
    if means.shape() != &bshape {
        return Err(Error::Shape(format!(
            "means tensor has shape {}, clustering needs {bshape}",
            means.shape()
        )));
    }
    spec.check_tensor(a)?;
    spec.check_tensor(means)?;
    Ok(objective_unchecked(a, &block_index_map(a.shape(), assignments), means, spec))
}

pub(crate) fn objective_unchecked(
    a: &DenseTensor,
    map: &[usize],
    means: &DenseTensor,
    spec: &Divergence,
) -> f64 {
    let m = means.data();
    map.iter()
        .zip(a.data())
        .map(|(&b, &x)| spec.eval(x, m[b]))
        .sum()
}

/// The reconstruction `(C_1, ..., C_m) · M` as a full tensor.
pub fn reconstruct(assignments: &[Assignment], means: &DenseTensor) -> Result<DenseTensor> {
    let shape = Shape::new(assignments.iter().map(Assignment::len).collect())?;
    if means.shape() != &block_shape(assignments)? {
        return Err(Error::Shape("means do not match the assignments".into()));
    }
    let map = block_index_map(&shape, assignments);
    let data = map.iter().map(|&b| means.data()[b]).collect();
    DenseTensor::new(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::multilinear_multiply;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn asg(labels: &[usize], k: usize) -> Assignment {
        Assignment::new(labels.to_vec(), k).unwrap()
    }

    fn a22() -> DenseTensor {
        DenseTensor::from_dims(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn single_cluster_gives_global_representative() {
        let a = DenseTensor::from_dims(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 100.0]).unwrap();
        let one = [asg(&[0, 0], 1), asg(&[0, 0, 0], 1)];
        let r = block_representatives(&a, &one, &Divergence::SquaredEuclidean).unwrap();
        assert_eq!(r.means.dims(), &[1, 1]);
        assert_relative_eq!(r.means.data()[0], 115.0 / 6.0);
        let r = block_representatives(&a, &one, &Divergence::L1).unwrap();
        assert_eq!(r.means.data()[0], 3.0);
    }

    #[test]
    fn row_clusters_average() {
        let r = block_representatives(&a22(), &[asg(&[0, 1], 2), asg(&[0, 0], 1)], &Divergence::SquaredEuclidean)
            .unwrap();
        assert_eq!(r.means.dims(), &[2, 1]);
        assert_eq!(r.means.data(), &[1.5, 3.5]);
        assert!(r.empty_blocks.is_empty());
    }

    #[test]
    fn singletons_reproduce_tensor() {
        let a = a22();
        let s = [asg(&[1, 0], 2), asg(&[0, 1], 2)];
        let r = block_representatives(&a, &s, &Divergence::SquaredEuclidean).unwrap();
        assert_eq!(r.means.data(), &[3.0, 4.0, 1.0, 2.0]);
        assert_eq!(evaluate_objective(&a, &s, &r.means, &Divergence::SquaredEuclidean).unwrap(), 0.0);
        assert_eq!(reconstruct(&s, &r.means).unwrap(), a);
    }

    #[test]
    fn empty_blocks_are_flagged() {
        let a = a22();
        let s = [asg(&[0, 0], 2), asg(&[0, 1], 2)];
        let r = block_representatives(&a, &s, &Divergence::SquaredEuclidean).unwrap();
        assert_eq!(r.empty_blocks, vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(r.means.get(&[1, 0]), 2.5);
    }

    #[test]
    fn variance_sum_example() {
        let one = [asg(&[0, 0], 1), asg(&[0, 0], 1)];
        let r = block_representatives(&a22(), &one, &Divergence::SquaredEuclidean).unwrap();
        let j = evaluate_objective(&a22(), &one, &r.means, &Divergence::SquaredEuclidean).unwrap();
        assert_eq!(j, 5.0);
    }

    #[test]
    fn conformity_errors() {
        let a = a22();
        assert!(block_representatives(&a, &[asg(&[0, 0], 1)], &Divergence::L1).is_err());
        assert!(block_representatives(&a, &[asg(&[0, 0, 0], 1), asg(&[0, 0], 1)], &Divergence::L1).is_err());
        let bad_means = DenseTensor::from_dims(&[2, 2], vec![0.0; 4]).unwrap();
        let one = [asg(&[0, 0], 1), asg(&[0, 0], 1)];
        assert!(evaluate_objective(&a, &one, &bad_means, &Divergence::L1).is_err());
    }

    #[test]
    fn block_map_matches_direct_lookup() {
        let shape = Shape::new(vec![3, 2, 4]).unwrap();
        let s = [asg(&[1, 0, 1], 2), asg(&[0, 0], 1), asg(&[2, 0, 1, 2], 3)];
        let map = block_index_map(&shape, &s);
        for (flat, &b) in map.iter().enumerate() {
            let ix = shape.multi_index(flat);
            assert_eq!(b, s[0].labels()[ix[0]] * 3 + s[2].labels()[ix[2]]);
        }
    }

    #[test]
    fn objective_matches_multilinear_reconstruction() {
        let mut rng = crate::rng::stream(8);
        for kind in [Divergence::SquaredEuclidean, Divergence::kl(), Divergence::L1] {
            for _ in 0..20 {
                let dims = [3, 4, 2];
                let shape = Shape::new(dims.to_vec()).unwrap();
                let data = (0..shape.len()).map(|_| rng.random_range(0.5..5.0)).collect();
                let a = DenseTensor::new(shape, data).unwrap();
                let ks = [2, 3, 1];
                let s: Vec<Assignment> = dims
                    .iter()
                    .zip(ks)
                    .map(|(&n, k)| asg(&(0..n).map(|_| rng.random_range(0..k)).collect::<Vec<_>>(), k))
                    .collect();
                let r = block_representatives(&a, &s, &kind).unwrap();
                let j = evaluate_objective(&a, &s, &r.means, &kind).unwrap();
                let indicators: Vec<_> = s.iter().map(Assignment::indicator).collect();
                let recon = multilinear_multiply(&indicators, &r.means).unwrap();
                let j2 = kind.tensor_div(&a, &recon).unwrap();
                assert_relative_eq!(j, j2, max_relative = 1e-12);
            }
        }
    }
}
