mod common;

use common::*;
use ndarray::{concatenate, Array1, Array2, Axis};
use proptest::prelude::*;
use rand::Rng;
use rjsa::moves::{birth_candidate, death_candidate, merge_candidate, split_candidate, MoveConfig};
use rjsa::{
    fit_least_squares, load_csv, penalized_score, residual_quadratic, rjmcmc_step, run_annealing, split, write_csv,
    AnnealConfig, BasisKind, BirthRegion, CoolingSchedule, Criterion, CriterionKind, Dataset, DesignMatrix, Metric,
    MoveContext, MoveKind, MoveProbabilities, Posterior, RatioMode, SamplerState, SplitPolicy, SplitSpec,
};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

fn kind_strategy() -> impl Strategy<Value = CriterionKind> {
    prop_oneof![Just(CriterionKind::Aic), Just(CriterionKind::Bic), Just(CriterionKind::Mdl)]
}

fn mode_strategy() -> impl Strategy<Value = RatioMode> {
    prop_oneof![Just(RatioMode::Derived), Just(RatioMode::AsPrinted)]
}

fn posterior(data: &Dataset<f64>, kind: CriterionKind) -> Posterior<'_, f64> {
    Posterior::new(
        data,
        BasisKind::Cubic,
        Metric::Euclidean,
        Criterion::for_dataset(kind, data),
        BirthRegion::around(data.x(), 0.1).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn residual_never_grows_when_a_column_is_added(seed in any::<u64>(), n in 6usize..40, m in 1usize..5) {
        let mut r = rng(seed);
        let d = random_design(n, m, &mut r);
        let extra = random_design(n, 2, &mut r).column(1).to_owned().insert_axis(Axis(1));
        let wider = concatenate![Axis(1), d, extra];
        let y = random_vector(n, &mut r);
        let before = residual_quadratic(&DesignMatrix::from_matrix(d).unwrap(), y.view()).unwrap();
        let after = residual_quadratic(&DesignMatrix::from_matrix(wider).unwrap(), y.view()).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn residual_equals_squared_fit_error(seed in any::<u64>(), n in 6usize..40, m in 1usize..5) {
        let mut r = rng(seed);
        let d = random_design(n, m, &mut r);
        let y = random_vector(n, &mut r);
        let design = DesignMatrix::from_matrix(d.clone()).unwrap();
        let alpha = fit_least_squares(&design, y.view().insert_axis(Axis(1))).unwrap();
        let err: Array1<f64> = &y - &d.dot(&alpha.column(0));
        let got = residual_quadratic(&design, y.view()).unwrap();
        let want = err.dot(&err);
        prop_assert!((got - want).abs() <= 1e-10 * want.max(1e-12), "{} vs {}", got, want);
    }

    #[test]
    fn birth_death_reciprocity(seed in any::<u64>(), k in 0usize..6, kind in kind_strategy(), mode in mode_strategy()) {
        let data = synthetic(30, 2, 2, seed % 7);
        let post = posterior(&data, kind);
        let mut cfg = MoveConfig::for_region(post.region());
        cfg.ratio_mode = mode;
        let ctx = MoveContext::new(&post, &cfg);
        let mut r = rng(seed);
        let from = centre_set(2, &random_centres(k, 2, -1.0, 1.0, &mut r));
        let to = birth_candidate(&from, &random_centres(1, 2, -1.0, 1.0, &mut r)[0]).unwrap();
        let (a, b) = (post.residuals(&from).unwrap(), post.residuals(&to).unwrap());
        let fwd = ctx.log_acceptance_ratio(MoveKind::Birth, k, &a, &b);
        let back = ctx.log_acceptance_ratio(MoveKind::Death, k + 1, &b, &a);
        prop_assert!((fwd + back).abs() < 1e-12, "{} + {}", fwd, back);
        prop_assert_eq!(death_candidate(&to, k), from);
    }

    #[test]
    fn split_merge_reciprocity(seed in any::<u64>(), k in 1usize..6, kind in kind_strategy(), mode in mode_strategy()) {
        let data = synthetic(30, 2, 2, seed % 7);
        let post = posterior(&data, kind);
        let mut cfg = MoveConfig::for_region(post.region());
        cfg.ratio_mode = mode;
        let ctx = MoveContext::new(&post, &cfg);
        let mut r = rng(seed);
        let from = centre_set(2, &random_centres(k, 2, -1.0, 1.0, &mut r));
        let j = r.random_range(0..k);
        let u = [r.random::<f64>(), r.random::<f64>()];
        let Some(to) = split_candidate(&from, j, &u, cfg.zeta) else { return Ok(()) };
        prop_assert_eq!(to.k(), k + 1);
        let (a, b) = (post.residuals(&from).unwrap(), post.residuals(&to).unwrap());
        let fwd = ctx.log_acceptance_ratio(MoveKind::Split, k, &a, &b);
        let back = ctx.log_acceptance_ratio(MoveKind::Merge, k + 1, &b, &a);
        prop_assert!((fwd + back).abs() < 1e-12, "{} + {}", fwd, back);
        let merged = merge_candidate(&to, j, cfg.zeta).expect("split pair passes the merge gate");
        for (p, q) in merged.iter().zip(from.iter()) {
            for (x, y) in p.iter().zip(q) {
                prop_assert!((x - y).abs() <= 1e-15 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn calibration_identity(seed in any::<u64>(), k1 in 0usize..6, k2 in 0usize..6, kind in kind_strategy()) {
        let data = synthetic(50, 2, 2, 1);
        let post = posterior(&data, kind);
        let crit = post.criterion();
        let mut r = rng(seed);
        let z1 = centre_set(2, &random_centres(k1, 2, -1.0, 1.0, &mut r));
        let z2 = centre_set(2, &random_centres(k2, 2, -1.0, 1.0, &mut r));
        let lmp = post.log_marginal_posterior(&z1) - post.log_marginal_posterior(&z2);
        let ps = penalized_score(&data, &z1, &BasisKind::Cubic, &Metric::Euclidean, crit).unwrap()
            - penalized_score(&data, &z2, &BasisKind::Cubic, &Metric::Euclidean, crit).unwrap();
        prop_assert!((lmp - ps).abs() < 1e-12, "{} vs {}", lmp, ps);
    }

    #[test]
    fn calibration_constant_is_penalty_increment(n in 2usize..10_000, c in 1usize..5, d in 1usize..5, k in 0usize..100) {
        for kind in [CriterionKind::Aic, CriterionKind::Bic, CriterionKind::Mdl] {
            let crit = Criterion::new(kind, n, c, d);
            let inc = crit.penalty::<f64>(k + 1) - crit.penalty::<f64>(k);
            let cc = crit.calibration_constant::<f64>();
            prop_assert!((inc - cc).abs() <= 1e-12 * cc.max(1.0));
        }
        let bic = Criterion::new(CriterionKind::Bic, n, c, d);
        let mdl = Criterion::new(CriterionKind::Mdl, n, c, d);
        prop_assert_eq!(bic.penalty::<f64>(k).to_bits(), mdl.penalty::<f64>(k).to_bits());
        prop_assert_eq!(bic.calibration_constant::<f64>().to_bits(), mdl.calibration_constant::<f64>().to_bits());
    }

    #[test]
    fn boundary_probabilities_are_normalized(
        raw in proptest::array::uniform5(0.01f64..1.0),
        k in 0usize..12,
        kmax in 1usize..12,
    ) {
        let total: f64 = raw.iter().sum();
        let probs = MoveProbabilities::new(raw.map(|v| v / total)).unwrap();
        let k = k.min(kmax);
        let p = probs.at(k, kmax);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        if k == 0 { prop_assert_eq!((p[1], p[2], p[3]), (0.0, 0.0, 0.0)); }
        if k == 1 { prop_assert_eq!(p[3], 0.0); }
        if k == kmax { prop_assert_eq!((p[0], p[2]), (0.0, 0.0)); }
    }

    #[test]
    fn kernel_step_bookkeeping(seed in any::<u64>(), k in 0usize..5, mode in mode_strategy()) {
        let data = synthetic(25, 1, 2, seed % 5);
        let post = posterior(&data, CriterionKind::Aic);
        let mut cfg = MoveConfig::for_region(post.region());
        cfg.kmax = 5;
        cfg.zeta = 0.2;
        cfg.ratio_mode = mode;
        let ctx = MoveContext::new(&post, &cfg);
        let mut r = rng(seed);
        let Ok(state) = SamplerState::new(&post, centre_set(1, &random_centres(k, 1, -1.0, 1.0, &mut r))) else {
            return Ok(());
        };
        for _ in 0..5 {
            let out = rjmcmc_step(&state, &ctx, &mut r);
            let k2 = out.proposed.k();
            prop_assert!(k2 <= cfg.kmax);
            if !out.inner_accepted {
                prop_assert_eq!(&out.proposed, &state);
                continue;
            }
            let expected = match out.kind {
                MoveKind::Birth | MoveKind::Split => k + 1,
                MoveKind::Death | MoveKind::Merge => k - 1,
                MoveKind::Update => k,
            };
            prop_assert_eq!(k2, expected);
            let fresh = post.log_marginal_posterior(&out.proposed.centres);
            prop_assert!((out.proposed.log_post - fresh).abs() <= 1e-8 * fresh.abs().max(1.0));
        }
    }

    #[test]
    fn csv_round_trip_is_exact(seed in any::<u64>(), n in 1usize..30, d in 1usize..4, c in 1usize..3) {
        let mut r = rng(seed);
        let scale = 10f64.powi(r.random_range(-8..8));
        let x = Array2::from_shape_fn((n, d), |_| (r.random::<f64>() - 0.5) * scale);
        let y = Array2::from_shape_fn((n, c), |_| (r.random::<f64>() - 0.5) / scale);
        let data = Dataset::new(x, y).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&path, &data).unwrap();
        let back: Dataset<f64> = load_csv(&path, d, c).unwrap();
        prop_assert_eq!(back.x(), data.x());
        prop_assert_eq!(back.y(), data.y());
    }

    #[test]
    fn split_partitions_rows(n in 2usize..60, frac in 0.05f64..0.95, seed in proptest::option::of(any::<u64>())) {
        let x = Array2::from_shape_fn((n, 1), |(t, _)| t as f64);
        let data = Dataset::new(x.clone(), x).unwrap();
        let n_train = ((n as f64 * frac) as usize).clamp(1, n - 1);
        let policy = seed.map_or(SplitPolicy::FirstN, SplitPolicy::Shuffled);
        let (train, test) = split(&data, SplitSpec { n_train, policy }).unwrap();
        prop_assert_eq!(train.len(), n_train);
        prop_assert_eq!(test.len(), n - n_train);
        let mut ids: Vec<usize> = train.x().iter().chain(test.x().iter()).map(|&v| v as usize).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn schedule_is_nonincreasing_and_floored(t0 in 0.1f64..10.0, floor_frac in 0.001f64..1.0, iters in 1usize..2000) {
        let floor = t0 * floor_frac;
        for s in [
            CoolingSchedule::reaching_floor(t0, floor, iters).unwrap(),
            CoolingSchedule::logarithmic(t0, floor).unwrap(),
        ] {
            let mut prev = f64::INFINITY;
            for i in 1..=iters {
                let t = s.temperature(i);
                prop_assert!(t <= prev && t >= floor);
                prev = t;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn best_so_far_is_monotone(seed in any::<u64>(), kind in kind_strategy()) {
        let data = synthetic(40, 2, 1, seed % 3);
        let mut cfg = AnnealConfig::new(150);
        cfg.criterion = kind;
        cfg.record_test_mse = false;
        let fit = run_annealing(&data, None, &cfg, seed).unwrap();
        for w in fit.trace.windows(2) {
            prop_assert!(w[1].best_log_post >= w[0].best_log_post);
        }
        let last = fit.trace.last().unwrap();
        prop_assert_eq!(last.best_log_post, fit.map_state.log_post);
        prop_assert!(fit.trace.iter().all(|t| t.log_post <= t.best_log_post));
    }
}
