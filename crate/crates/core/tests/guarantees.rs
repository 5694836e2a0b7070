//! Approximation guarantees of the combined clustering on instances small
//! enough to solve exactly.

use rand::Rng;
use rand_distr::StandardNormal;
use tensorclus::cluster1d::Assignment;
use tensorclus::tenclus::{sitec, variant_pipeline, CoClustering, Variant, VariantConfig};
use tensorclus::tensor::{DenseTensor, Shape};
use tensorclus::verify::{
    combination_bound, cotec_exact, oracle_optimal, theoretical_bound, BoundCase, RestrictedGrowth,
};
use tensorclus::Divergence;

fn tensor_from(dims: &[usize], mut draw: impl FnMut() -> f64) -> DenseTensor {
    let shape = Shape::new(dims.to_vec()).unwrap();
    let data = (0..shape.len()).map(|_| draw()).collect();
    DenseTensor::new(shape, data).unwrap()
}

fn check_combination(dims: &[usize], k: &[usize], spec: &Divergence, factor: f64, instances: usize, seed: u64) {
    let mut rng = tensorclus::rng::stream(seed);
    for i in 0..instances {
        let a = match spec {
            Divergence::GeneralizedKl { .. } => tensor_from(dims, || rng.random_range(0.5..=2.0)),
            _ => tensor_from(dims, || rng.sample(StandardNormal)),
        };
        let opt = oracle_optimal(&a, k, spec).unwrap();
        let comb = cotec_exact(&a, k, spec).unwrap();
        assert!(opt.j_opt <= comb.objective * (1.0 + 1e-12), "instance {i}: oracle above a feasible point");
        assert!(
            comb.objective <= factor * opt.j_opt * (1.0 + 1e-9) + 1e-12,
            "instance {i}: {} > {factor} x {}",
            comb.objective,
            opt.j_opt
        );
    }
}

#[test]
fn euclidean_matrices() {
    check_combination(&[5, 4], &[2, 2], &Divergence::SquaredEuclidean, 2.0, 30, 10);
}

#[test]
fn l1_matrices() {
    check_combination(&[5, 4], &[2, 2], &Divergence::L1, 4.0, 30, 11);
}

#[test]
fn kl_matrices() {
    let bound = theoretical_bound(
        2,
        1,
        BoundCase::Bregman,
        1.0,
        Some(tensorclus::divergence::kl_curvature_bounds(0.5, 2.0).unwrap()),
    )
    .unwrap();
    assert_eq!(bound, 8.0);
    check_combination(&[5, 4], &[2, 2], &Divergence::kl(), bound, 20, 12);
}

#[test]
fn euclidean_order_three_is_padded() {
    check_combination(&[4, 4, 2], &[2, 2, 2], &Divergence::SquaredEuclidean, 4.0, 8, 13);
}

#[test]
fn bound_from_instance_range() {
    let a = DenseTensor::from_dims(&[2, 2], vec![0.5, 1.0, 2.0, 1.5]).unwrap();
    assert_eq!(combination_bound(&a, &Divergence::kl(), 1.0).unwrap(), Some(8.0));
    assert_eq!(combination_bound(&a, &Divergence::L1, 1.0).unwrap(), Some(4.0));
}

#[test]
fn variants_never_beat_the_oracle() {
    let mut rng = tensorclus::rng::stream(14);
    for i in 0..10 {
        let a = tensor_from(&[5, 4], || rng.sample(StandardNormal));
        let opt = oracle_optimal(&a, &[2, 2], &Divergence::SquaredEuclidean).unwrap();
        let cfg = VariantConfig::new(vec![2, 2], i);
        for v in Variant::ALL {
            let out = variant_pipeline(&a, v, &cfg, &Divergence::SquaredEuclidean).unwrap();
            assert!(opt.j_opt <= out.clustering.objective * (1.0 + 1e-12), "{v}");
        }
    }
}

#[test]
fn sitec_from_every_start_stays_above_optimum() {
    let mut rng = tensorclus::rng::stream(15);
    let a = tensor_from(&[4, 4], || rng.sample(StandardNormal));
    let spec = Divergence::SquaredEuclidean;
    let opt = oracle_optimal(&a, &[2, 2], &spec).unwrap();
    let starts: Vec<Vec<usize>> = RestrictedGrowth::new(4, 2).collect();
    let mut reached_opt = false;
    for r in &starts {
        for c in &starts {
            let init = CoClustering::from_assignments(
                &a,
                vec![Assignment::new(r.clone(), 2).unwrap(), Assignment::new(c.clone(), 2).unwrap()],
                &spec,
            )
            .unwrap();
            let out = sitec(&a, &init, &spec, 100, 1e-9).unwrap();
            assert!(out.clustering.objective >= opt.j_opt * (1.0 - 1e-12));
            reached_opt |= out.clustering.objective <= opt.j_opt * (1.0 + 1e-12);
        }
    }
    assert!(reached_opt, "starting at the optimum must stay there");
}
