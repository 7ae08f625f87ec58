//! Gaussian learning and the greedy baseline selector.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vinedag::copula::{independence_test, Family, PairCopula};
use vinedag::learning::{
    empirical_kendall_matrix, fit_sem, hill_climb_dag, implied_correlation_dag, implied_correlation_rvine,
    kl_divergence, sample_correlation, to_z_scale, vine_from_correlation, HillClimbOptions, Sem,
};
use vinedag::representation::represent_markov_tree;
use vinedag::{dissmann_select, BaselineConfig, Dag, Dataset, IndependenceMatrix, RVineMatrix, RVineModel, Scale, VineTreeSequence};

/// DAG on `1..=d` where each node picks up to `k` parents among earlier labels.
fn random_dag(d: usize, k: usize, p: f64, rng: &mut impl Rng) -> Dag {
    let mut arrows = Vec::new();
    for v in 2..=d {
        let mut cands: Vec<usize> = (1..v).collect();
        for _ in 0..k.min(v - 1) {
            if rng.random::<f64>() < p {
                let i = rng.random_range(0..cands.len());
                arrows.push((cands.swap_remove(i), v));
            }
        }
    }
    Dag::from_arrows(1..=d, arrows).unwrap()
}

fn random_tree_dag(d: usize, rng: &mut impl Rng) -> Dag {
    let arrows: Vec<_> = (2..=d).map(|v| (rng.random_range(1..v), v)).collect();
    Dag::from_arrows(1..=d, arrows).unwrap()
}

fn random_gaussian_vine(m: RVineMatrix, k: usize, rng: &mut impl Rng) -> RVineModel {
    let d = m.d();
    let f = IndependenceMatrix::truncated(d, k);
    let mut cop = vec![vec![PairCopula::independence(); d]; d];
    for (r, c) in m.cells() {
        if f.get(r, c) {
            cop[r][c] = PairCopula::gaussian(rng.random_range(-0.7..0.7)).unwrap();
        }
    }
    RVineModel::new(m, f, cop).unwrap()
}

#[test]
fn vine_correlation_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..2 {
        let m = RVineMatrix::from_trees(&VineTreeSequence::random(5, &mut rng).unwrap()).unwrap();
        let model = random_gaussian_vine(m, 4, &mut rng);
        let exact = implied_correlation_rvine(&model).unwrap();
        let z = to_z_scale(&model.simulate(200_000, seed).unwrap()).unwrap();
        let mc = sample_correlation(&z).unwrap();
        assert!(exact.max_abs_diff(&mc) < 0.01, "diff {}", exact.max_abs_diff(&mc));
    }
}

#[test]
fn markov_tree_representation_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let dag = random_tree_dag(8, &mut rng);
        let sem = Sem::random(dag.clone(), 0.3, 0.9, &mut rng).unwrap();
        let sigma_g = implied_correlation_dag(&sem).unwrap();
        let (m, f) = represent_markov_tree(&dag).unwrap();
        let v = vine_from_correlation(&sigma_g, &m, &f).unwrap();
        let sigma_v = implied_correlation_rvine(&v).unwrap();
        assert!(kl_divergence(&sigma_g, &sigma_v).unwrap() < 1e-6);
        assert!(sigma_g.max_abs_diff(&sigma_v) < 1e-9);
    }
}

#[test]
fn sem_fit_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let dag = random_dag(6, 2, 0.8, &mut rng);
    let truth = Sem::random(dag.clone(), 0.3, 0.8, &mut rng).unwrap();
    let sigma = implied_correlation_dag(&truth).unwrap();
    let mut errors = Vec::new();
    for n in [500, 5000, 50_000] {
        let data = truth.simulate(n, &mut rng).unwrap();
        let fitted = implied_correlation_dag(&fit_sem(&dag, &data).unwrap()).unwrap();
        let err = fitted.max_abs_diff(&sigma);
        assert!(err < 5.0 / (n as f64).sqrt(), "n = {n}: error {err}");
        errors.push(err);
    }
    assert!(errors[2] < errors[0]);
}

#[test]
fn kendall_matrix_bands() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..2000).map(|_| rng.random_range(0.001..0.999)).collect()).collect();
    let k = empirical_kendall_matrix(&Dataset::from_columns(cols, Scale::U).unwrap()).unwrap();
    assert!(k.iter().enumerate().all(|(i, &x)| i % 4 == 0 || x.abs() < 0.05));

    let dag = Dag::from_arrows(1..=2, [(1, 2)]).unwrap();
    let sem = Sem::new(dag, [((2, 1), 0.7)].into()).unwrap();
    let z = sem.simulate(5000, &mut rng).unwrap();
    let k = empirical_kendall_matrix(&z).unwrap();
    let want = 2.0 / std::f64::consts::PI * 0.7f64.asin();
    assert!((k[(0, 1)] - want).abs() < 0.03);
}

#[test]
fn hill_climb_respects_cap_and_improves() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for rep in 0..4 {
        let dag = random_dag(7, 3, 0.7, &mut rng);
        let data = Sem::random(dag, 0.3, 0.8, &mut rng).unwrap().simulate(800, &mut rng).unwrap();
        for k in 1..=3 {
            let opts = HillClimbOptions { seed: rep, ..HillClimbOptions::new(k) };
            let res = hill_climb_dag(&data, &opts).unwrap();
            assert!(res.dag.max_parents() <= k);
            assert!(res.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
            let again = hill_climb_dag(&data, &opts).unwrap();
            assert_eq!(again.dag, res.dag);
            assert_eq!(again.bic, res.bic);
        }
    }
}

#[test]
fn hill_climb_cap_inert_above_d_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dag = random_dag(5, 3, 0.8, &mut rng);
    let data = Sem::random(dag, 0.3, 0.8, &mut rng).unwrap().simulate(500, &mut rng).unwrap();
    let a = hill_climb_dag(&data, &HillClimbOptions::new(4)).unwrap();
    let b = hill_climb_dag(&data, &HillClimbOptions::new(9)).unwrap();
    assert_eq!(a.dag, b.dag);
}

#[test]
fn dissmann_recovers_dvine_path() {
    let order = [1, 2, 3, 4, 5];
    let m = RVineMatrix::from_trees(&VineTreeSequence::dvine(&order).unwrap()).unwrap();
    let mut cop = vec![vec![PairCopula::independence(); 5]; 5];
    for (r, c) in m.cells() {
        let rho = if m.tree_of_row(r) == 1 { 0.75 } else { 0.1 };
        cop[r][c] = PairCopula::gaussian(rho).unwrap();
    }
    let model = RVineModel::new(m, IndependenceMatrix::ones(5), cop).unwrap();
    let cfg = BaselineConfig { families: vec![Family::Gaussian], ..Default::default() };
    let want: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    for seed in 0..20 {
        let data = model.simulate(500, seed).unwrap();
        let sel = dissmann_select(&data, &cfg).unwrap();
        let t1 = sel.matrix().to_trees().tree_graph(1).edges();
        assert_eq!(t1, want, "seed {seed}");
        assert!(vinedag::vine::validate_matrix(sel.matrix().rows()).is_valid());
    }
}

#[test]
fn dissmann_alpha_keeps_unrejected_edges_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = RVineMatrix::from_trees(&VineTreeSequence::random(6, &mut rng).unwrap()).unwrap();
    // strong and near-zero tree-1 edges so both outcomes occur
    let mut cop = vec![vec![PairCopula::independence(); 6]; 6];
    for (r, c) in m.cells() {
        if m.tree_of_row(r) == 1 {
            let rho = if c % 2 == 0 { 0.6 } else { 0.02 };
            cop[r][c] = PairCopula::gaussian(rho).unwrap();
        }
    }
    let model = RVineModel::new(m, IndependenceMatrix::truncated(6, 1), cop).unwrap();
    let data = model.simulate(300, 4).unwrap();
    let cfg = BaselineConfig { alpha: Some(0.05), ..Default::default() };
    let sel = dissmann_select(&data, &cfg).unwrap();
    let mut saw_indep = false;
    for (r, c) in sel.matrix().cells() {
        if sel.matrix().tree_of_row(r) != 1 {
            continue;
        }
        let (a, b) = (sel.matrix().get(c, c), sel.matrix().get(r, c));
        let reject = independence_test(data.var(a), data.var(b), 0.05).unwrap();
        if !reject {
            assert!(sel.copula(r, c).is_independence(), "edge {a},{b}");
            assert!(!sel.independence().get(r, c));
            saw_indep = true;
        }
    }
    assert!(saw_indep);
}

#[test]
fn dissmann_truncated_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = RVineMatrix::from_trees(&VineTreeSequence::random(7, &mut rng).unwrap()).unwrap();
    let model = random_gaussian_vine(m, 3, &mut rng);
    let data = model.simulate(400, 1).unwrap();
    for t in 1..=3 {
        let cfg = BaselineConfig { truncation: Some(t), ..Default::default() };
        let sel = dissmann_select(&data, &cfg).unwrap();
        assert!(sel.truncation_level() <= t);
        assert!(sel.n_params() <= 2 * (1..=t).map(|i| 7 - i).sum::<usize>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn implied_dag_correlation_is_valid(seed in any::<u64>(), d in 2usize..9, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dag = random_dag(d, k, 0.7, &mut rng);
        let sem = Sem::random(dag, 0.1, 0.95, &mut rng).unwrap();
        let s = implied_correlation_dag(&sem).unwrap();
        prop_assert!((1..=d).all(|v| (s.get(v, v) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn kl_nonnegative_and_zero_on_equal(seed in any::<u64>(), d in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = implied_correlation_dag(&Sem::random(random_dag(d, 2, 0.7, &mut rng), 0.1, 0.9, &mut rng).unwrap()).unwrap();
        let b = implied_correlation_dag(&Sem::random(random_dag(d, 2, 0.7, &mut rng), 0.1, 0.9, &mut rng).unwrap()).unwrap();
        let kl = kl_divergence(&a, &b).unwrap();
        prop_assert!(kl >= 0.0);
        prop_assert!(kl_divergence(&a, &a).unwrap() < 1e-10);
        if a.max_abs_diff(&b) > 1e-6 {
            prop_assert!(kl > 0.0);
        }
    }

    #[test]
    fn vine_partials_round_trip(seed in any::<u64>(), d in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = implied_correlation_dag(&Sem::random(random_dag(d, 3, 0.8, &mut rng), 0.1, 0.9, &mut rng).unwrap()).unwrap();
        let m = RVineMatrix::from_trees(&VineTreeSequence::random(d, &mut rng).unwrap()).unwrap();
        let v = vine_from_correlation(&sigma, &m, &IndependenceMatrix::ones(d)).unwrap();
        prop_assert!(implied_correlation_rvine(&v).unwrap().max_abs_diff(&sigma) < 1e-8);
    }
}
