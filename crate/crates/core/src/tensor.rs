//! Dense order-m tensors in flat row-major storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions `(n_1, ..., n_m)` of a tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape {
    dims: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("order must be at least 1".into()));
        }
        if let Some(mode) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Shape(format!("dimension {mode} has size 0")));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Shape(format!("element count of {dims:?} overflows")))?;
        Ok(Self { dims, len })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major strides (last index fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for j in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.dims[j + 1];
        }
        strides
    }

    /// Splits the shape around `mode` into (outer, n_mode, inner) extents.
    pub fn split_at_mode(&self, mode: usize) -> (usize, usize, usize) {
        let outer = self.dims[..mode].iter().product();
        let inner = self.dims[mode + 1..].iter().product();
        (outer, self.dims[mode], inner)
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for j in (0..self.dims.len()).rev() {
            index[j] = flat % self.dims[j];
            flat /= self.dims[j];
        }
        index
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.dims
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

/// A dense row-major matrix, used as a mode multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..rows * cols).map(|x| f(x / cols, x % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `I - self`, for square matrices.
    pub fn complement(&self) -> Matrix {
        assert_eq!(self.rows, self.cols, "complement needs a square matrix");
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            f64::from(u8::from(r == c)) - self.get(r, c)
        })
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Order-m dense tensor. Entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Shape(format!(
                "shape {shape} needs {} entries, got {}",
                shape.len(),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::EntryDomain {
                index: shape.multi_index(pos),
                value: data[pos],
                reason: "tensor entries must be finite".into(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn from_dims(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        Self::new(Shape::new(dims.to_vec())?, data)
    }

    pub fn zeros(shape: Shape) -> Self {
        let data = vec![0.0; shape.len()];
        Self { shape, data }
    }

    pub fn filled(shape: Shape, value: f64) -> Self {
        assert!(value.is_finite());
        let data = vec![value; shape.len()];
        Self { shape, data }
    }

    pub fn from_fn(shape: Shape, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let data = (0..shape.len()).map(|x| f(&shape.multi_index(x))).collect();
        Self::new(shape, data)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.shape.flat_index(index)]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }

    fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "expected shape {}, got {}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        DenseTensor::new(self.shape.clone(), data)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseTensor::new(self.shape.clone(), data)
    }

    pub fn scale(&self, s: f64) -> DenseTensor {
        let data = self.data.iter().map(|a| a * s).collect();
        DenseTensor::new(self.shape.clone(), data).expect("scaling keeps shape")
    }

    /// Multiplies mode `mode` by `mat` (p x n_mode), giving n_mode -> p.
    pub fn mode_product(&self, mode: usize, mat: &Matrix) -> Result<DenseTensor> {
        if mode >= self.order() {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range for order {}",
                self.order()
            )));
        }
        let (outer, n, inner) = self.shape.split_at_mode(mode);
        if mat.cols() != n {
            return Err(Error::Dimension {
                mode,
                expected: n,
                got: mat.cols(),
            });
        }
        let p = mat.rows();
        let mut dims = self.dims().to_vec();
        dims[mode] = p;
        let mut out = vec![0.0; outer * p * inner];
        for o in 0..outer {
            let src = &self.data[o * n * inner..(o + 1) * n * inner];
            let dst = &mut out[o * p * inner..(o + 1) * p * inner];
            for r in 0..p {
                let drow = &mut dst[r * inner..(r + 1) * inner];
                for j in 0..n {
                    let w = mat.get(r, j);
                    if w == 0.0 {
                        continue;
                    }
                    for (d, &s) in drow.iter_mut().zip(&src[j * inner..(j + 1) * inner]) {
                        *d += w * s;
                    }
                }
            }
        }
        DenseTensor::new(Shape::new(dims)?, out)
    }

    /// Sums of squares of all entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }
}

/// `(P_1, ..., P_m) · A`, evaluated as m successive mode products.
pub fn multilinear_multiply(mats: &[Matrix], a: &DenseTensor) -> Result<DenseTensor> {
    if mats.len() != a.order() {
        return Err(Error::Shape(format!(
            "{} matrices supplied for an order-{} tensor",
            mats.len(),
            a.order()
        )));
    }
    for (mode, (mat, &n)) in mats.iter().zip(a.dims()).enumerate() {
        if mat.cols() != n {
            return Err(Error::Dimension {
                mode,
                expected: n,
                got: mat.cols(),
            });
        }
    }
    mats.iter()
        .enumerate()
        .try_fold(a.clone(), |acc, (mode, mat)| acc.mode_product(mode, mat))
}

pub fn inner_product(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum())
}

pub fn lp_norm(a: &DenseTensor, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("l_p norm needs p >= 1, got {p}")));
    }
    if p == 1.0 {
        return Ok(a.data.iter().map(|x| x.abs()).sum());
    }
    if p.is_infinite() {
        return Ok(a.data.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    // Scale by the largest magnitude to keep |x|^p representable.
    let scale = a.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = a.data.iter().map(|x| (x.abs() / scale).powf(p)).sum();
    Ok(scale * sum.powf(1.0 / p))
}

pub fn frobenius_norm(a: &DenseTensor) -> f64 {
    a.frobenius_sq().sqrt()
}

/// Slices of `a` with the index on `dim` fixed, each flattened in row-major
/// order of the remaining indices.
pub fn fibers_along(a: &DenseTensor, dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim >= a.order() {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} out of range for order {}",
            a.order()
        )));
    }
    let (outer, n, inner) = a.shape.split_at_mode(dim);
    let mut fibers = vec![Vec::with_capacity(outer * inner); n];
    for o in 0..outer {
        for (i, fiber) in fibers.iter_mut().enumerate() {
            let start = (o * n + i) * inner;
            fiber.extend_from_slice(&a.data[start..start + inner]);
        }
    }
    Ok(fibers)
}

/// Inverse of [`fibers_along`].
pub fn from_fibers(shape: &Shape, dim: usize, fibers: &[Vec<f64>]) -> Result<DenseTensor> {
    if dim >= shape.order() {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} out of range for order {}",
            shape.order()
        )));
    }
    let (outer, n, inner) = shape.split_at_mode(dim);
    if fibers.len() != n || fibers.iter().any(|f| f.len() != outer * inner) {
        return Err(Error::Shape(format!(
            "fibers do not reassemble into shape {shape} along dimension {dim}"
        )));
    }
    let mut data = vec![0.0; shape.len()];
    for o in 0..outer {
        for (i, fiber) in fibers.iter().enumerate() {
            let start = (o * n + i) * inner;
            data[start..start + inner].copy_from_slice(&fiber[o * inner..(o + 1) * inner]);
        }
    }
    DenseTensor::new(shape.clone(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t(dims: &[usize], data: &[f64]) -> DenseTensor {
        DenseTensor::from_dims(dims, data.to_vec()).unwrap()
    }

    fn random_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
        let shape = Shape::new(dims.to_vec()).unwrap();
        let data = (0..shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseTensor::new(shape, data).unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        let data = (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::new(r, c, data).unwrap()
    }

    #[test]
    fn shape_rejects_zero_and_empty() {
        assert!(Shape::new(vec![]).is_err());
        assert!(Shape::new(vec![3, 0]).is_err());
        assert!(Shape::new(vec![usize::MAX, 2]).is_err());
        let s = Shape::new(vec![2, 3, 4]).unwrap();
        assert_eq!(s.len(), 24);
        assert_eq!(s.strides(), vec![12, 4, 1]);
        assert_eq!(s.multi_index(s.flat_index(&[1, 2, 3])), vec![1, 2, 3]);
    }

    #[test]
    fn rejects_non_finite() {
        let err = DenseTensor::from_dims(&[2], vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::EntryDomain { ref index, .. } if index == &vec![1]));
        assert!(DenseTensor::from_dims(&[1], vec![f64::INFINITY]).is_err());
        assert!(DenseTensor::from_dims(&[3], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn identity_multiply_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_tensor(&mut rng, &[3, 2, 4]);
        let mats: Vec<Matrix> = a.dims().iter().map(|&n| Matrix::identity(n)).collect();
        assert_eq!(multilinear_multiply(&mats, &a).unwrap(), a);
    }

    #[test]
    fn matrix_case_matches_pa_qt() {
        let a = t(&[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let p = Matrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let q = Matrix::identity(2);
        let out = multilinear_multiply(&[p, q], &a).unwrap();
        assert_eq!(out.dims(), &[1, 2]);
        assert_eq!(out.data(), &[4.0, 6.0]);
    }

    #[test]
    fn order3_matches_triple_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_tensor(&mut rng, &[2, 2, 2]);
        let mats: Vec<Matrix> = (0..3).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let out = multilinear_multiply(&mats, &a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut s = 0.0;
                    for x in 0..2 {
                        for y in 0..2 {
                            for z in 0..2 {
                                s += mats[0].get(i, x)
                                    * mats[1].get(j, y)
                                    * mats[2].get(k, z)
                                    * a.get(&[x, y, z]);
                            }
                        }
                    }
                    assert_relative_eq!(out.get(&[i, j, k]), s, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn mismatch_names_mode() {
        let a = t(&[2, 3], &[0.0; 6]);
        let err = multilinear_multiply(&[Matrix::identity(2), Matrix::identity(2)], &a).unwrap_err();
        assert!(matches!(err, Error::Dimension { mode: 1, expected: 3, got: 2 }));
    }

    #[test]
    fn inner_product_examples() {
        let ones = t(&[2, 2], &[1.0; 4]);
        assert_eq!(inner_product(&ones, &ones).unwrap(), 4.0);
        let z = DenseTensor::zeros(ones.shape().clone());
        assert_eq!(inner_product(&ones, &z).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_tensor(&mut rng, &[3, 2, 2]);
        let b = random_tensor(&mut rng, &[3, 2, 2]);
        let mut flat = 0.0;
        for i in 0..12 {
            flat += a.data()[i] * b.data()[i];
        }
        assert_relative_eq!(inner_product(&a, &b).unwrap(), flat, max_relative = 1e-14);
        assert!(inner_product(&a, &ones).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        assert_eq!(lp_norm(&t(&[3], &[0.0; 3]), 3.0).unwrap(), 0.0);
        assert_relative_eq!(lp_norm(&t(&[2], &[3.0, 4.0]), 2.0).unwrap(), 5.0, max_relative = 1e-15);
        assert_eq!(lp_norm(&t(&[3], &[1.0, -2.0, 3.0]), 1.0).unwrap(), 6.0);
        assert!(matches!(lp_norm(&t(&[1], &[1.0]), 0.5), Err(Error::Domain(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_tensor(&mut rng, &[4, 3]);
        let via_inner = inner_product(&a, &a).unwrap().sqrt();
        assert_relative_eq!(lp_norm(&a, 2.0).unwrap(), via_inner, max_relative = 1e-12);
    }

    #[test]
    fn fibers_of_matrix() {
        let a = t(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(
            fibers_along(&a, 0).unwrap(),
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]
        );
        assert_eq!(
            fibers_along(&a, 1).unwrap(),
            vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]
        );
        assert!(fibers_along(&a, 2).is_err());
    }

    #[test]
    fn fibers_order3_index_arithmetic() {
        let a = DenseTensor::from_fn(Shape::new(vec![2, 2, 2]).unwrap(), |ix| {
            (ix[0] * 100 + ix[1] * 10 + ix[2]) as f64
        })
        .unwrap();
        let fibers = fibers_along(&a, 1).unwrap();
        assert_eq!(fibers.len(), 2);
        for (j, fiber) in fibers.iter().enumerate() {
            assert_eq!(fiber.len(), 4);
            let mut pos = 0;
            for i in 0..2 {
                for k in 0..2 {
                    assert_eq!(fiber[pos], a.get(&[i, j, k]));
                    pos += 1;
                }
            }
        }
        assert_eq!(from_fibers(a.shape(), 1, &fibers).unwrap(), a);
    }
}
