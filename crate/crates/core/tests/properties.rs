//! Randomised invariants across the process, statistic, rate, predictor and
//! harness layers.

use ldp_dro::dro::{
    ellipsoid_linear_worst_case, ellipsoid_linear_worst_case_mapped, markov_ball_worst_case, predictor, prescriptor,
    wasserstein_set_worst_case, wasserstein_set_worst_case_lp, AffineMap, AmbiguitySpec, LossTable,
    MarkovSolverOptions,
};
use ldp_dro::harness::{run_curve, write_curve_records, ExperimentConfig};
use ldp_dro::processes::{
    simulate, Family, FiniteIidModel, MarkovDoubletModel, ParametricIidModel, ProcessModel, ScalarArModel,
    Trajectory, VarDriftModel,
};
use ldp_dro::rates::{
    ar_rate, conditional_relative_entropy, cramer_rate, gaussian_quadratic_rate, relative_entropy, ArRateKind,
};
use ldp_dro::statistics::{
    ar_coefficients, compute, doublet_distribution, empirical_distribution, StatisticKind, StatisticValue,
};
use ldp_dro::ExtendedReal;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn normalised(raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Interior pmf of dimension `d`.
fn pmf_of(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, d).prop_map(normalised)
}

/// Stationary doublet pmf `pi_i P_ij` of a random chain on `m` states.
fn balanced_doublet(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.len();
    let p: Vec<Vec<f64>> = rows.iter().map(|r| normalised(r.clone())).collect();
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..5000 {
        pi = (0..m).map(|j| (0..m).map(|i| pi[i] * p[i][j]).sum()).collect();
    }
    normalised((0..m * m).map(|k| pi[k / m] * p[k / m][k % m]).collect())
}

fn doublet(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop::collection::vec(0.05f64..1.0, m), m).prop_map(|rows| balanced_doublet(&rows))
}

fn sample_models() -> Vec<ProcessModel> {
    let var = VarDriftModel::new(
        DVector::from_vec(vec![1.0, -0.5]),
        DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
    )
    .unwrap();
    let families = [
        (Family::Normal { cov: vec![1.0] }, vec![0.5]),
        (Family::Exponential, vec![2.0]),
        (Family::Gamma { shape: 2.5 }, vec![0.7]),
        (Family::Poisson, vec![3.0]),
        (Family::Bernoulli, vec![0.3]),
        (Family::Geometric, vec![0.4]),
        (Family::Binomial { trials: 7 }, vec![0.6]),
    ];
    let mut models = vec![
        ProcessModel::FiniteIid(FiniteIidModel::new(vec![0.2, 0.5, 0.3]).unwrap()),
        ProcessModel::Markov(
            MarkovDoubletModel::new(3, balanced_doublet(&[vec![1.0, 2.0, 1.0], vec![0.5, 0.5, 2.0], vec![3.0, 1.0, 1.0]]))
                .unwrap()
                .with_initial_state(2)
                .unwrap(),
        ),
        ProcessModel::Var(var),
        ProcessModel::ScalarAr(ScalarArModel::new(0.6, 0.4, 1.5).unwrap()),
    ];
    models.extend(families.into_iter().map(|(f, t)| ProcessModel::Parametric(ParametricIidModel::new(f, t).unwrap())));
    models
}

fn prefix_of(short: &Trajectory, long: &Trajectory) -> bool {
    match (short, long) {
        (Trajectory::Discrete { states: a, initial: ia }, Trajectory::Discrete { states: b, initial: ib }) => {
            ia == ib && b.starts_with(a)
        }
        (Trajectory::Continuous { dim: da, values: a }, Trajectory::Continuous { dim: db, values: b }) => {
            da == db && b.starts_with(a)
        }
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simulation_is_deterministic_and_prefix_closed(seed in any::<u64>(), t in 1usize..200, extra in 1usize..100) {
        for model in sample_models() {
            let a = simulate(&model, t, seed).unwrap();
            prop_assert_eq!(&a, &simulate(&model, t, seed).unwrap());
            let longer = simulate(&model, t + extra, seed).unwrap();
            prop_assert!(prefix_of(&a, &longer), "{:?}", model);
        }
    }

    #[test]
    fn markov_entries_and_exits_balance(seed in any::<u64>(), t in 1usize..500, rows in prop::collection::vec(prop::collection::vec(0.05f64..1.0, 3), 3)) {
        let model = ProcessModel::Markov(MarkovDoubletModel::new(3, balanced_doublet(&rows)).unwrap());
        let traj = simulate(&model, t, seed).unwrap();
        let mut path = vec![traj.initial_state().unwrap()];
        path.extend_from_slice(traj.states().unwrap());
        for state in 1..=3 {
            let exits = path.windows(2).filter(|w| w[0] == state).count() as i64;
            let entries = path.windows(2).filter(|w| w[1] == state).count() as i64;
            prop_assert!((exits - entries).abs() <= 1);
        }
    }

    #[test]
    fn distributions_are_exact_multiples_of_one_over_t(states in prop::collection::vec(1usize..=4, 1..300), initial in 1usize..=4) {
        let t = states.len();
        let s = empirical_distribution(&Trajectory::discrete(states.clone()), 4).unwrap();
        for (i, v) in s.value.iter().enumerate() {
            let count = states.iter().filter(|&&x| x == i + 1).count();
            prop_assert_eq!(*v, count as f64 / t as f64);
        }
        let d = doublet_distribution(&Trajectory::markov(initial, states.clone()), 4).unwrap();
        let mut path = vec![initial];
        path.extend_from_slice(&states);
        for (k, v) in d.value.iter().enumerate() {
            let count = path.windows(2).filter(|w| w[0] == k / 4 + 1 && w[1] == k % 4 + 1).count();
            prop_assert_eq!(*v, count as f64 / t as f64);
        }
    }

    #[test]
    fn yule_walker_lies_strictly_inside_unit_interval(values in prop::collection::vec(-100.0f64..100.0, 2..200)) {
        prop_assume!(values.iter().any(|v| v.abs() > 1e-6));
        let (ls, yw) = ar_coefficients(&Trajectory::scalar(values.clone())).unwrap();
        prop_assert!(yw.scalar().abs() < 1.0, "yw = {}", yw.scalar());
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            prop_assert!(yw.scalar().abs() <= ls.scalar().abs());
        }
    }
}

// Long-run variance of the sample mean: (I - A)^{-1} Sigma (I - A)^{-T} / T.
#[test]
fn stationary_means_within_three_standard_errors() {
    let t = 100_000;
    let ar = ScalarArModel::new(0.7, 0.6, 2.0).unwrap();
    let traj = simulate(&ProcessModel::ScalarAr(ar), t, 31).unwrap();
    let (_, values) = traj.values().unwrap();
    let mean = values.iter().sum::<f64>() / t as f64;
    let se = (2.0 / (0.3f64 * 0.3) / t as f64).sqrt();
    assert!((mean - 2.0).abs() <= 3.0 * se, "{mean} vs 2.0, se {se}");

    let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.4]);
    let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.8]);
    let drift = DVector::from_vec(vec![1.0, 2.0]);
    let var = VarDriftModel::new(drift.clone(), a.clone(), sigma.clone()).unwrap();
    let traj = simulate(&ProcessModel::Var(var), t, 32).unwrap();
    let (dim, values) = traj.values().unwrap();
    let inv = (DMatrix::identity(2, 2) - a).try_inverse().unwrap();
    let target = &inv * drift;
    let long_run = &inv * sigma * inv.transpose();
    for c in 0..dim {
        let mean = values.iter().skip(c).step_by(dim).sum::<f64>() / t as f64;
        let se = (long_run[(c, c)] / t as f64).sqrt();
        assert!((mean - target[c]).abs() <= 3.0 * se, "component {c}: {mean} vs {}", target[c]);
    }
}

#[test]
fn statistics_converge_for_dependent_processes() {
    let t = 100_000;
    let rows = [vec![1.0, 3.0], vec![2.0, 1.0]];
    let s_inf = balanced_doublet(&rows);
    let markov = ProcessModel::Markov(MarkovDoubletModel::new(2, s_inf.clone()).unwrap());
    let traj = simulate(&markov, t, 41).unwrap();
    let stat = compute(&markov, StatisticKind::DoubletDist, &traj).unwrap();
    for (k, (&v, &target)) in stat.value.iter().zip(&s_inf).enumerate() {
        // Generous binomial-style bound; the doublet indicators are weakly dependent.
        let se = (target * (1.0 - target) / t as f64).sqrt();
        assert!((v - target).abs() <= 6.0 * se, "entry {k}: {v} vs {target}");
    }

    let ar = ProcessModel::ScalarAr(ScalarArModel::new(-0.4, 0.0, 1.0).unwrap());
    let traj = simulate(&ar, t, 42).unwrap();
    for kind in [StatisticKind::LeastSquaresCoeff, StatisticKind::YuleWalkerCoeff] {
        let v = compute(&ar, kind, &traj).unwrap().scalar();
        assert!((v + 0.4).abs() <= 0.02, "{kind:?}: {v}");
    }

    let a = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.1, 0.2]);
    let var = ProcessModel::Var(
        VarDriftModel::new(DVector::from_vec(vec![0.5, -1.0]), a.clone(), DMatrix::identity(2, 2)).unwrap(),
    );
    let traj = simulate(&var, t, 43).unwrap();
    let stat = compute(&var, StatisticKind::ScaledSampleMean, &traj).unwrap();
    // (I - A) times the mean has covariance Sigma / T to leading order.
    for (c, target) in [0.5, -1.0].iter().enumerate() {
        let se = (1.0 / t as f64).sqrt();
        assert!((stat.value[c] - target).abs() <= 3.0 * se, "component {c}: {}", stat.value[c]);
    }
}

fn finite(v: ExtendedReal) -> f64 {
    v.finite().expect("finite rate")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rates_are_nonnegative_and_vanish_at_the_limit(s in pmf_of(4), theta in pmf_of(4), ds in doublet(3), dt in doublet(3),
                                                       x in -0.99f64..0.99, y in -1.0f64..=1.0, g in prop::collection::vec(-3.0f64..3.0, 4)) {
        prop_assert!(finite(relative_entropy(&s, &theta).unwrap()) >= 0.0);
        prop_assert_eq!(relative_entropy(&s, &s).unwrap(), ExtendedReal::ZERO);
        prop_assert!(finite(conditional_relative_entropy(&ds, &dt, 3).unwrap()) >= 0.0);
        prop_assert!(finite(conditional_relative_entropy(&ds, &ds, 3).unwrap()).abs() <= 1e-15);
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        prop_assert!(gaussian_quadratic_rate(&g[..2], &g[2..], &sigma).unwrap() >= 0.0);
        prop_assert_eq!(gaussian_quadratic_rate(&g[..2], &g[..2], &sigma).unwrap(), 0.0);
        for kind in [ArRateKind::LeastSquares, ArRateKind::YuleWalker] {
            prop_assert!(ar_rate(x, y, kind) >= ExtendedReal::ZERO);
            prop_assert_eq!(ar_rate(x, x, kind), ExtendedReal::ZERO);
        }
        let p = 0.05 + 0.9 * s[0];
        let families = [
            (Family::Exponential, 1.0 / p),
            (Family::Gamma { shape: 1.5 }, p),
            (Family::Poisson, p),
            (Family::Bernoulli, p),
            (Family::Geometric, p),
            (Family::Binomial { trials: 5 }, p),
        ];
        for (f, t) in families {
            let mean = f.mean(&[t]);
            prop_assert!(cramer_rate(&f, &[2.0 * x.abs() + 0.5], &[t]).unwrap() >= ExtendedReal::ZERO);
            prop_assert!(finite(cramer_rate(&f, &mean, &[t]).unwrap()) <= 1e-12, "{}", f.name());
        }
    }

    #[test]
    fn bernoulli_cramer_is_two_point_relative_entropy(x in 0.0f64..=1.0, t in 0.001f64..0.999) {
        let c = finite(cramer_rate(&Family::Bernoulli, &[x], &[t]).unwrap());
        let d = finite(relative_entropy(&[x, 1.0 - x], &[t, 1.0 - t]).unwrap());
        prop_assert!((c - d).abs() <= 1e-12, "{c} vs {d}");
    }

    #[test]
    fn divergences_are_midpoint_convex_in_s(a in pmf_of(4), b in pmf_of(4), theta in pmf_of(4),
                                            da in pmf_of(9), db in pmf_of(9), dt in doublet(3)) {
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let f = |s: &[f64]| finite(relative_entropy(s, &theta).unwrap());
        prop_assert!(f(&mid) <= 0.5 * (f(&a) + f(&b)) + 1e-10);
        let mid: Vec<f64> = da.iter().zip(&db).map(|(x, y)| 0.5 * (x + y)).collect();
        let g = |s: &[f64]| finite(conditional_relative_entropy(s, &dt, 3).unwrap());
        prop_assert!(g(&mid) <= 0.5 * (g(&da) + g(&db)) + 1e-10);
    }
}

fn table(rows: &[Vec<f64>]) -> LossTable {
    LossTable::from_rows(rows.to_vec()).unwrap()
}

fn values(table: &LossTable, s: &StatisticValue, spec: &AmbiguitySpec) -> Vec<f64> {
    predictor(table, s, spec).unwrap().iter().map(|o| o.value).collect()
}

fn finite_specs(r: f64) -> Vec<AmbiguitySpec> {
    vec![
        AmbiguitySpec::Entropy { radius: r },
        AmbiguitySpec::Wasserstein { radius: r },
        AmbiguitySpec::Moment { radius: r, moments: 2 },
        AmbiguitySpec::Penalized { radius: r },
    ]
}

fn losses(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, cols), rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_state_predictors_grow_with_radius_and_dominate_empirical(rows in losses(3, 5), s in pmf_of(5), r1 in 0.0f64..1.0, dr in 0.0f64..1.0) {
        let t = table(&rows);
        let stat = StatisticValue::vector(StatisticKind::EmpiricalDist, s, 50);
        let nominal = values(&t, &stat, &AmbiguitySpec::Empirical);
        for (small, large) in finite_specs(r1).into_iter().zip(finite_specs(r1 + dr)) {
            let a = values(&t, &stat, &small);
            let b = values(&t, &stat, &large);
            for x in 0..3 {
                prop_assert!(b[x] >= a[x] - 1e-9, "{}: {} then {}", small.name(), a[x], b[x]);
                prop_assert!(a[x] >= nominal[x] - 1e-9, "{} below empirical", small.name());
            }
        }
    }

    #[test]
    fn zero_radius_matches_empirical(rows in losses(3, 3), s in pmf_of(3)) {
        let t = table(&rows);
        let stat = StatisticValue::vector(StatisticKind::EmpiricalDist, s, 50);
        let nominal = values(&t, &stat, &AmbiguitySpec::Empirical);
        // With d <= J + 1 the moment conditions pin the pmf down.
        for spec in finite_specs(0.0) {
            for (a, b) in values(&t, &stat, &spec).iter().zip(&nominal) {
                prop_assert!((a - b).abs() <= 1e-9, "{}: {a} vs {b}", spec.name());
            }
        }
    }

    #[test]
    fn greedy_wasserstein_matches_lp(loss in prop::collection::vec(-5.0f64..5.0, 2..12), raw in prop::collection::vec(0.0f64..1.0, 12), eps in 0.0f64..4.0) {
        let mut s = raw[..loss.len()].to_vec();
        s[0] += 0.01;
        let s = normalised(s);
        let greedy = wasserstein_set_worst_case(&loss, &s, eps).unwrap().value;
        let lp = wasserstein_set_worst_case_lp(&loss, &s, eps).unwrap().value;
        prop_assert!((greedy - lp).abs() <= 1e-9, "{greedy} vs {lp}");
    }

    #[test]
    fn shifting_losses_shifts_values_and_keeps_the_decision(rows in losses(4, 5), s in pmf_of(5), r in 0.0f64..0.5, shift in -10.0f64..10.0) {
        let t = table(&rows);
        let shifted = t.shifted(shift);
        let stat = StatisticValue::vector(StatisticKind::EmpiricalDist, s, 50);
        let mut specs = finite_specs(r);
        specs.push(AmbiguitySpec::Empirical);
        for spec in specs {
            let a = predictor(&t, &stat, &spec).unwrap();
            let b = predictor(&shifted, &stat, &spec).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((y.value - x.value - shift).abs() <= 1e-8, "{}", spec.name());
            }
            prop_assert_eq!(prescriptor(&a).unwrap(), prescriptor(&b).unwrap());
        }
    }

    #[test]
    fn ellipsoid_is_invariant_under_affine_maps(a in prop::collection::vec(-2.0f64..2.0, 2), b in -1.0f64..1.0, s in prop::collection::vec(-2.0f64..2.0, 2),
                                                m in prop::collection::vec(-1.0f64..1.0, 4), c in prop::collection::vec(-1.0f64..1.0, 2), r in 0.0f64..2.0) {
        let matrix = DMatrix::from_row_slice(2, 2, &m) + DMatrix::identity(2, 2) * 2.5;
        let map = AffineMap { matrix, offset: DVector::from_vec(c) };
        let sigma = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.4, 0.7]);
        let (a, s) = (DVector::from_vec(a), DVector::from_vec(s));
        let plain = ellipsoid_linear_worst_case(&a, b, &s, &sigma, r).unwrap().value;
        let mapped = ellipsoid_linear_worst_case_mapped(&a, b, &map.apply(&s), &sigma, r, &map).unwrap().value;
        prop_assert!((plain - mapped).abs() <= 1e-10, "{plain} vs {mapped}");
    }

    #[test]
    fn ar_ball_grows_with_radius(coef in prop::collection::vec(-2.0f64..2.0, 3), s in -0.95f64..0.95, r1 in 0.0f64..0.5, dr in 0.0f64..0.5) {
        let t = table(&[coef]);
        for (kind, stat_kind) in [(ArRateKind::LeastSquares, StatisticKind::LeastSquaresCoeff), (ArRateKind::YuleWalker, StatisticKind::YuleWalkerCoeff)] {
            let stat = StatisticValue::vector(stat_kind, vec![s], 100);
            let nominal = values(&t, &stat, &AmbiguitySpec::Empirical)[0];
            let at0 = values(&t, &stat, &AmbiguitySpec::ArBall { radius: 0.0, rate: kind })[0];
            let small = values(&t, &stat, &AmbiguitySpec::ArBall { radius: r1, rate: kind })[0];
            let large = values(&t, &stat, &AmbiguitySpec::ArBall { radius: r1 + dr, rate: kind })[0];
            prop_assert!((at0 - nominal).abs() <= 1e-9);
            prop_assert!(small >= nominal - 1e-9 && large >= small - 1e-9, "{nominal} {small} {large}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn markov_ball_grows_with_radius(loss in prop::collection::vec(-1.0f64..1.0, 4), s in doublet(2), r1 in 0.01f64..0.3, dr in 0.0f64..0.3) {
        let opts = MarkovSolverOptions::default();
        let nominal: f64 = loss.iter().zip(&s).map(|(l, p)| l * p).sum();
        let at0 = markov_ball_worst_case(&loss, &s, 2, 0.0, &opts).unwrap().value;
        let small = markov_ball_worst_case(&loss, &s, 2, r1, &opts).unwrap().value;
        let large = markov_ball_worst_case(&loss, &s, 2, r1 + dr, &opts).unwrap().value;
        prop_assert!((at0 - nominal).abs() <= 1e-9);
        prop_assert!(small >= nominal - 1e-9);
        prop_assert!(large >= small - 1e-6, "{small} then {large}");
    }
}

fn curve_bytes(config: &ExperimentConfig) -> Vec<u8> {
    let mut out = Vec::new();
    write_curve_records(&run_curve(config).unwrap().points, &mut out).unwrap();
    out
}

#[test]
fn curve_csv_is_identical_across_thread_counts() {
    let config = ExperimentConfig::newsvendor(AmbiguitySpec::Entropy { radius: 0.02 }, vec![10, 30], 300, 9);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| curve_bytes(&config));
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| curve_bytes(&config));
    assert_eq!(single, many);
    assert_eq!(single, curve_bytes(&config));
}

#[test]
fn zero_losses_never_disappoint() {
    let mut config = ExperimentConfig::newsvendor(AmbiguitySpec::Empirical, vec![5, 20], 200, 3);
    config.losses = LossTable::from_rows(vec![vec![0.0; 11]; 3]).unwrap();
    for spec in [AmbiguitySpec::Empirical, AmbiguitySpec::Entropy { radius: 0.1 }, AmbiguitySpec::Wasserstein { radius: 0.5 }] {
        config.spec = spec;
        assert!(run_curve(&config).unwrap().points.iter().all(|p| p.p_hat == 0.0));
    }
}

#[test]
fn empirical_costs_are_optimistic_in_sample() {
    let config = ExperimentConfig::newsvendor(AmbiguitySpec::Empirical, vec![5, 10, 20, 50, 100], 2000, 4);
    for p in run_curve(&config).unwrap().points {
        assert!(p.mean_out_of_sample >= p.mean_in_sample - 3.0 * p.se_in_sample, "T={}: {p:?}", p.horizon);
    }
}

#[test]
fn in_sample_cost_grows_with_radius() {
    let grid = vec![10, 40];
    let empirical = run_curve(&ExperimentConfig::newsvendor(AmbiguitySpec::Empirical, grid.clone(), 500, 6)).unwrap();
    let mut previous: Option<Vec<f64>> = None;
    for r in [0.0, 0.01, 0.05, 0.2] {
        let curve = run_curve(&ExperimentConfig::newsvendor(AmbiguitySpec::Entropy { radius: r }, grid.clone(), 500, 6)).unwrap();
        let means: Vec<f64> = curve.points.iter().map(|p| p.mean_in_sample).collect();
        if r == 0.0 {
            let base: Vec<f64> = empirical.points.iter().map(|p| p.mean_in_sample).collect();
            assert_eq!(means, base);
            let p0: Vec<f64> = curve.points.iter().map(|p| p.p_hat).collect();
            assert_eq!(p0, empirical.points.iter().map(|p| p.p_hat).collect::<Vec<_>>());
        }
        if let Some(prev) = &previous {
            assert!(means.iter().zip(prev).all(|(m, p)| m >= p), "{means:?} after {prev:?}");
        }
        previous = Some(means);
    }
}
