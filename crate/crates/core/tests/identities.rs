use rand::Rng;
use rand_distr::StandardNormal;
use tensorclus::tensor::{
    fibers_along, from_fibers, inner_product, lp_norm, multilinear_multiply, DenseTensor, Matrix, Shape,
};

fn gaussian_tensor(dims: &[usize], rng: &mut impl Rng) -> DenseTensor {
    let shape = Shape::new(dims.to_vec()).unwrap();
    let data = (0..shape.len()).map(|_| rng.sample(StandardNormal)).collect();
    DenseTensor::new(shape, data).unwrap()
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

fn random_dims(order: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..order).map(|_| rng.random_range(1..=4)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn max_rel_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    assert_eq!(a.dims(), b.dims());
    let scale = a.frobenius_sq().max(b.frobenius_sq()).sqrt().max(f64::MIN_POSITIVE);
    a.sub(b).unwrap().frobenius_sq().sqrt() / scale
}

#[test]
fn product_rule() {
    let mut rng = tensorclus::rng::stream(1);
    for _ in 0..200 {
        let order = rng.random_range(1..=4);
        let dims = random_dims(order, &mut rng);
        let a = gaussian_tensor(&dims, &mut rng);
        let mid: Vec<usize> = random_dims(order, &mut rng);
        let out: Vec<usize> = random_dims(order, &mut rng);
        let inner: Vec<Matrix> = dims.iter().zip(&mid).map(|(&n, &p)| gaussian_matrix(p, n, &mut rng)).collect();
        let outer: Vec<Matrix> = mid.iter().zip(&out).map(|(&p, &q)| gaussian_matrix(q, p, &mut rng)).collect();
        let nested = multilinear_multiply(&outer, &multilinear_multiply(&inner, &a).unwrap()).unwrap();
        let fused: Vec<Matrix> = outer.iter().zip(&inner).map(|(o, i)| o.matmul(i).unwrap()).collect();
        let direct = multilinear_multiply(&fused, &a).unwrap();
        assert!(max_rel_diff(&nested, &direct) <= 1e-12);
    }
}

#[test]
fn adjoint_identity() {
    let mut rng = tensorclus::rng::stream(2);
    for _ in 0..200 {
        let order = rng.random_range(1..=4);
        let dims = random_dims(order, &mut rng);
        let out = random_dims(order, &mut rng);
        let a = gaussian_tensor(&dims, &mut rng);
        let b = gaussian_tensor(&out, &mut rng);
        let mats: Vec<Matrix> = dims.iter().zip(&out).map(|(&n, &p)| gaussian_matrix(p, n, &mut rng)).collect();
        let lhs = inner_product(&multilinear_multiply(&mats, &a).unwrap(), &b).unwrap();
        let transposed: Vec<Matrix> = mats.iter().map(Matrix::transpose).collect();
        let rhs = inner_product(&a, &multilinear_multiply(&transposed, &b).unwrap()).unwrap();
        // Cancellation can make the inner product small; compare against
        // the product of norms instead.
        let scale = (a.frobenius_sq() * b.frobenius_sq()).sqrt()
            * mats.iter().map(|m| m.frobenius_sq().sqrt()).product::<f64>();
        assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
    }
}

#[test]
fn multilinear_multiply_is_linear() {
    let mut rng = tensorclus::rng::stream(3);
    for _ in 0..100 {
        let dims = random_dims(3, &mut rng);
        let a = gaussian_tensor(&dims, &mut rng);
        let b = gaussian_tensor(&dims, &mut rng);
        let mats: Vec<Matrix> = dims.iter().map(|&n| gaussian_matrix(2, n, &mut rng)).collect();
        let (s, t) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let combo = a.scale(s).add(&b.scale(t)).unwrap();
        let lhs = multilinear_multiply(&mats, &combo).unwrap();
        let rhs = multilinear_multiply(&mats, &a)
            .unwrap()
            .scale(s)
            .add(&multilinear_multiply(&mats, &b).unwrap().scale(t))
            .unwrap();
        assert!(max_rel_diff(&lhs, &rhs) <= 1e-12);
    }
}

#[test]
fn identity_matrices_leave_tensor_unchanged() {
    let mut rng = tensorclus::rng::stream(4);
    let a = gaussian_tensor(&[3, 4, 2, 2], &mut rng);
    let ids: Vec<Matrix> = a.dims().iter().map(|&n| Matrix::identity(n)).collect();
    assert_eq!(multilinear_multiply(&ids, &a).unwrap(), a);
}

#[test]
fn explicit_summation_order_three() {
    let mut rng = tensorclus::rng::stream(5);
    for _ in 0..50 {
        let a = gaussian_tensor(&[2, 3, 2], &mut rng);
        let p = gaussian_matrix(3, 2, &mut rng);
        let q = gaussian_matrix(2, 3, &mut rng);
        let r = gaussian_matrix(2, 2, &mut rng);
        let got = multilinear_multiply(&[p.clone(), q.clone(), r.clone()], &a).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut s = 0.0;
                    for x in 0..2 {
                        for y in 0..3 {
                            for z in 0..2 {
                                s += p.get(i, x) * q.get(j, y) * r.get(k, z) * a.get(&[x, y, z]);
                            }
                        }
                    }
                    assert!(rel(got.get(&[i, j, k]), s) <= 1e-12 || (got.get(&[i, j, k]) - s).abs() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn fibers_roundtrip_every_dimension() {
    let mut rng = tensorclus::rng::stream(6);
    for order in 1..=4 {
        for _ in 0..20 {
            let dims = random_dims(order, &mut rng);
            let a = gaussian_tensor(&dims, &mut rng);
            for dim in 0..order {
                let fibers = fibers_along(&a, dim).unwrap();
                assert_eq!(fibers.len(), dims[dim]);
                // Fiber i holds exactly the entries whose index on `dim` is i.
                let mut expected = vec![Vec::new(); dims[dim]];
                for flat in 0..a.shape().len() {
                    let ix = a.shape().multi_index(flat);
                    expected[ix[dim]].push(a.data()[flat]);
                }
                assert_eq!(fibers, expected);
                assert_eq!(from_fibers(a.shape(), dim, &fibers).unwrap(), a);
            }
        }
    }
}

#[test]
fn lp_norm_matches_direct_formula() {
    let mut rng = tensorclus::rng::stream(7);
    for _ in 0..50 {
        let a = gaussian_tensor(&random_dims(3, &mut rng), &mut rng);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let direct: f64 = a.data().iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            assert!(rel(lp_norm(&a, p).unwrap(), direct) <= 1e-12);
        }
        let max = a.data().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert_eq!(lp_norm(&a, f64::INFINITY).unwrap(), max);
    }
    assert!(lp_norm(&gaussian_tensor(&[2], &mut rng), 0.5).is_err());
}
