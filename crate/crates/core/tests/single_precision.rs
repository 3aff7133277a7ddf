use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rjsa::{generate_robot_arm, run_annealing, split, AnnealConfig32, Dataset32, SplitSpec};

#[test]
fn f32_fit_runs_and_improves_on_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data: Dataset32 = generate_robot_arm(200, 0.05, &mut rng).unwrap();
    let (train, test) = split(&data, SplitSpec::first_n(100)).unwrap();
    let cfg = AnnealConfig32::new(200);
    let fit = run_annealing(&train, Some(&test), &cfg, 4).unwrap();
    assert!(fit.map_state.log_post.is_finite());
    let mse = fit.test_mse.unwrap();
    let mean = test.y().mean_axis(ndarray::Axis(0)).unwrap();
    let spread = test.y().rows().into_iter().map(|r| (&r - &mean).mapv(|v| v * v).sum()).sum::<f32>()
        / (test.len() * 2) as f32;
    assert!(mse < 0.1 * spread, "mse {mse} vs variance {spread}");
}

#[test]
fn f32_rejects_non_finite_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut x = Array2::from_shape_fn((5, 1), |_| rng.random::<f32>());
    x[[2, 0]] = f32::NAN;
    assert!(Dataset32::new(x, Array2::zeros((5, 1))).is_err());
}
