//! Projection-matrix view of block clusterings and the numerical checkers
//! built on it.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cluster1d::Assignment;
use crate::error::{Error, Result};
use crate::tenclus::check_conformity;
use crate::tensor::{multilinear_multiply, DenseTensor, Matrix, Shape};

/// Column-normalized indicator `C̄` (n x nonempty clusters): column `c` is
/// `1/sqrt(|c|)` on the members of cluster `c`. Empty clusters are skipped.
pub fn normalized_indicator(asg: &Assignment) -> Matrix {
    let sizes = asg.sizes();
    let cols: Vec<usize> = (0..asg.k()).filter(|&c| sizes[c] > 0).collect();
    let mut mat = Matrix::zeros(asg.len(), cols.len());
    for (col, &c) in cols.iter().enumerate() {
        let v = 1.0 / (sizes[c] as f64).sqrt();
        for i in asg.members(c) {
            mat.set(i, col, v);
        }
    }
    mat
}

/// `P = C̄ C̄ᵀ`: replaces a vector by its cluster averages.
pub fn projection_matrix(asg: &Assignment) -> Matrix {
    let sizes = asg.sizes();
    let labels = asg.labels();
    Matrix::from_fn(asg.len(), asg.len(), |i, j| {
        if labels[i] == labels[j] {
            1.0 / sizes[labels[i]] as f64
        } else {
            0.0
        }
    })
}

/// One projection per dimension; unclustered dimensions carry the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    mats: Vec<Matrix>,
    identity: Vec<bool>,
}

impl ProjectionSet {
    pub fn from_assignments(assignments: &[Assignment]) -> Self {
        Self {
            mats: assignments.iter().map(projection_matrix).collect(),
            identity: vec![false; assignments.len()],
        }
    }

    /// Identity projections (no dimension clustered).
    pub fn identity(dims: &[usize]) -> Self {
        Self {
            mats: dims.iter().map(|&n| Matrix::identity(n)).collect(),
            identity: vec![true; dims.len()],
        }
    }

    /// Replaces dimension `j` by the identity.
    pub fn unclustered(mut self, j: usize) -> Self {
        let n = self.mats[j].rows();
        self.mats[j] = Matrix::identity(n);
        self.identity[j] = true;
        self
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn order(&self) -> usize {
        self.mats.len()
    }

    pub fn is_identity(&self, j: usize) -> bool {
        self.identity[j]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.mats.iter().map(Matrix::rows).collect()
    }

    pub fn apply(&self, a: &DenseTensor) -> Result<DenseTensor> {
        multilinear_multiply(&self.mats, a)
    }

    /// Worst of `‖P - Pᵀ‖_F` and `‖P² - P‖_F` over all dimensions.
    pub fn max_invariant_residual(&self) -> f64 {
        self.mats
            .iter()
            .map(|p| {
                let sym = p.sub(&p.transpose()).frobenius_sq().sqrt();
                let idem = p.matmul(p).expect("square").sub(p).frobenius_sq().sqrt();
                sym.max(idem)
            })
            .fold(0.0, f64::max)
    }
}

/// `‖A - (P_1, ..., P_m)·A‖²`, the squared Euclidean co-clustering
/// objective written with projections.
pub fn projection_objective(a: &DenseTensor, assignments: &[Assignment]) -> Result<f64> {
    check_conformity(a, assignments)?;
    let pa = ProjectionSet::from_assignments(assignments).apply(a)?;
    Ok(a.sub(&pa)?.frobenius_sq())
}

fn relative_gap(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Relative residual of `‖X + Y‖² = ‖X‖² + ‖Y‖²` with
/// `X = (P, S)·A` and `Y = (P^⊥, R)·B`, where `P` acts on dimension `dim`
/// and `S`, `R` are the remaining factors of `first` and `second`.
pub fn pythagorean_residual(
    a: &DenseTensor,
    b: &DenseTensor,
    dim: usize,
    first: &[Matrix],
    second: &[Matrix],
) -> Result<f64> {
    if first.len() != a.order() || second.len() != a.order() || dim >= a.order() {
        return Err(Error::Shape("projection lists must match the tensor order".into()));
    }
    let mut second = second.to_vec();
    second[dim] = first[dim].complement();
    let x = multilinear_multiply(first, a)?;
    let y = multilinear_multiply(&second, b)?;
    let lhs = x.add(&y)?.frobenius_sq();
    Ok(relative_gap(lhs, x.frobenius_sq() + y.frobenius_sq()))
}

fn random_projection<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let k = rng.random_range(1..=n);
    let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
    projection_matrix(&Assignment::new(labels, k).expect("labels below k"))
}

/// Orthogonality of a projection and its complement across random
/// instances: trial `i` splits on dimension `i mod m`, keeps `proj`'s
/// factors as `(P, S)`, draws random clusterings for `R`, and a Gaussian
/// `B`. Returns the worst relative residual.
pub fn check_pythagorean<R: Rng + ?Sized>(
    a: &DenseTensor,
    proj: &ProjectionSet,
    rng: &mut R,
    trials: usize,
) -> Result<f64> {
    if proj.dims() != a.dims() {
        return Err(Error::Shape("projections do not conform to the tensor".into()));
    }
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let dim = t % a.order();
        let r: Vec<Matrix> = a.dims().iter().map(|&n| random_projection(n, rng)).collect();
        let shape = Shape::new(a.dims().to_vec())?;
        let b_data = (0..shape.len()).map(|_| rng.sample(StandardNormal)).collect();
        let b = DenseTensor::new(shape, b_data)?;
        worst = worst.max(pythagorean_residual(a, &b, dim, proj.matrices(), &r)?);
    }
    Ok(worst)
}

/// Both sides of the sub-clustering bound
/// `‖A - Q·A‖² <= 2^ceil(log2 m) · max_j ‖A - Q_j·A‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubclusteringCheck {
    pub lhs: f64,
    /// `‖A - Q_j·A‖²` with only dimension `j` clustered.
    pub per_dim: Vec<f64>,
    pub factor: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `2^ceil(log2 m)`: the number of dimensions after padding to a power of two.
pub fn padded_power(m: usize) -> usize {
    m.max(1).next_power_of_two()
}

pub fn check_subclustering_bound(a: &DenseTensor, assignments: &[Assignment]) -> Result<SubclusteringCheck> {
    check_conformity(a, assignments)?;
    let full = ProjectionSet::from_assignments(assignments);
    let lhs = a.sub(&full.apply(a)?)?.frobenius_sq();
    let per_dim = (0..a.order())
        .map(|j| {
            let pa = a.mode_product(j, &full.matrices()[j])?;
            Ok(a.sub(&pa)?.frobenius_sq())
        })
        .collect::<Result<Vec<f64>>>()?;
    let factor = padded_power(a.order()) as f64;
    let rhs = factor * per_dim.iter().copied().fold(0.0, f64::max);
    // Rounding slack relative to both sides and the tensor's own energy.
    let slack = 1e-9 * rhs + 1e-12 * a.frobenius_sq();
    Ok(SubclusteringCheck {
        lhs,
        per_dim,
        factor,
        rhs,
        holds: lhs <= rhs + slack,
    })
}
