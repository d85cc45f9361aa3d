use fbmlab::drift::{besov_norm, dyadic_eps, AuditGrid, DissipativeDrift, DriftRepr, MollifiedDrift};
use fbmlab::io::{fmt_f64, KvConfig};
use fbmlab::longtime::{hungarian, wasserstein_samples};
use fbmlab::noise::{history_operator, CirculantSampler, FbmPath, Grid, HistoryPath, Hurst};
use fbmlab::rng::StreamKey;
use fbmlab::solver::{integrate, SolverConfig};
use fbmlab::verify::fit_exponent;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn cloud(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = StreamKey::root(seed).rng();
    (0..n).map(|_| (0..d).map(|_| rng.normal()).collect()).collect()
}

fn permutations(v: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, visit);
        v.swap(k, i);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn alpha_matches_gamma_closed_form(h in 0.02f64..0.98) {
        let a = Hurst::new(h).unwrap().alpha();
        let inv2 = gamma(h + 0.5).powi(2) / (gamma(2.0 * h + 1.0) * (std::f64::consts::PI * h).sin());
        prop_assert!((a * a * inv2 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fmt_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn config_render_round_trips(vals in prop::collection::btree_map("[a-z][a-z0-9_]{0,8}", "[A-Za-z0-9.,+-]{1,12}", 0..8)) {
        let mut kv = KvConfig::default();
        for (k, v) in &vals {
            kv.set(k, v.clone());
        }
        let back = KvConfig::parse(&kv.render()).unwrap();
        prop_assert_eq!(back.entries(), kv.entries());
    }

    #[test]
    fn child_streams_are_reproducible(seed in any::<u64>(), i in 0u64..1000, j in 0u64..1000) {
        let a = StreamKey::root(seed).child(i);
        prop_assert_eq!(a.rng().next_u64(), a.rng().next_u64());
        if i != j {
            prop_assert_ne!(a, StreamKey::root(seed).child(j));
        }
    }

    #[test]
    fn fbm_paths_start_at_zero(h in 0.05f64..0.95, seed in any::<u64>()) {
        let grid = Grid::new(0.0, 0.01, 64).unwrap();
        let s = CirculantSampler::new(64, h).unwrap();
        let p = s.path(&grid, 2, StreamKey::root(seed));
        prop_assert!(p.values.iter().all(|c| c[0] == 0.0 && c.len() == 65));
        prop_assert_eq!(p, s.path(&grid, 2, StreamKey::root(seed)));
    }

    #[test]
    fn norm_is_homogeneous(lambda in -5.0f64..5.0, c in -1.0f64..1.0) {
        let b = DriftRepr::point_mass(vec![c], vec![1.0]);
        let grid = AuditGrid::new(-2.0, 2.0, 81, 1).unwrap();
        let eps = dyadic_eps(8);
        let n1 = besov_norm(&b, -1.0, &eps, &grid).unwrap().value;
        let n2 = besov_norm(&b.scaled(lambda), -1.0, &eps, &grid).unwrap().value;
        prop_assert!((n2 - lambda.abs() * n1).abs() <= 1e-12 * (1.0 + n1));
    }

    #[test]
    fn history_operator_is_linear(a in -3.0f64..3.0, s1 in any::<u64>(), s2 in any::<u64>(), h in 0.1f64..0.9) {
        let hurst = Hurst::new(h).unwrap();
        let u = HistoryPath::wiener(StreamKey::root(s1), 4.0, 0.05, 1);
        let v = HistoryPath::wiener(StreamKey::root(s2), 4.0, 0.05, 1);
        let combo: Vec<Vec<f64>> = vec![u.values()[0].iter().zip(&v.values()[0]).map(|(x, y)| a * x + y).collect()];
        let w = HistoryPath::new(0.05, combo).unwrap();
        let lhs = history_operator(&w, &hurst, 0.0, 0.7).unwrap()[0];
        let rhs = a * history_operator(&u, &hurst, 0.0, 0.7).unwrap()[0] + history_operator(&v, &hurst, 0.0, 0.7).unwrap()[0];
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn linear_drift_contracts_exactly(kappa in 0.1f64..3.0, x in -5.0f64..5.0, y in -5.0f64..5.0, seed in any::<u64>()) {
        let cfg = SolverConfig { h: 0.01, horizon: 1.0, ..Default::default() };
        let grid = cfg.grid().unwrap();
        let noise = CirculantSampler::new(grid.n, 0.3).unwrap().path(&grid, 1, StreamKey::root(seed));
        let f = DissipativeDrift::damping(1, kappa);
        let zero = MollifiedDrift::zero(1);
        let a = integrate(&[x], &f, &zero, &noise, &cfg).unwrap();
        let b = integrate(&[y], &f, &zero, &noise, &cfg).unwrap();
        let want = (1.0 - kappa * cfg.h).powi(grid.n as i32) * (x - y);
        let got = a.x_final()[0] - b.x_final()[0];
        prop_assert!((got - want).abs() <= 1e-11 * (1.0 + (x - y).abs()));
    }

    #[test]
    fn zero_noise_zero_drift_is_constant(x in -10.0f64..10.0) {
        let cfg = SolverConfig { h: 0.05, horizon: 1.0, ..Default::default() };
        let noise = FbmPath::zero(cfg.grid().unwrap(), 0.4, 1);
        let tr = integrate(&[x], &DissipativeDrift::zero(1), &MollifiedDrift::zero(1), &noise, &cfg).unwrap();
        prop_assert!(tr.x.iter().all(|&v| v == x));
    }

    #[test]
    fn wasserstein_is_a_symmetric_translation_metric(s1 in any::<u64>(), s2 in any::<u64>(), c in -3.0f64..3.0, d in 1usize..3) {
        let a = cloud(s1, 40, d);
        let b = cloud(s2, 40, d);
        let ab = wasserstein_samples(&a, &b, 2.0).unwrap();
        prop_assert!((ab - wasserstein_samples(&b, &a, 2.0).unwrap()).abs() < 1e-12);
        prop_assert!(wasserstein_samples(&a, &a, 2.0).unwrap() < 1e-12);
        let shifted: Vec<Vec<f64>> = a.iter().map(|x| x.iter().map(|v| v + c).collect()).collect();
        let want = c.abs() * (d as f64).sqrt();
        prop_assert!((wasserstein_samples(&a, &shifted, 2.0).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn assignment_is_a_permutation(n in 1usize..12, seed in any::<u64>()) {
        let mut rng = StreamKey::root(seed).rng();
        let c: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.uniform()).collect()).collect();
        let mut p = hungarian(&c);
        p.sort_unstable();
        prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn assignment_matches_brute_force(n in 1usize..7, seed in any::<u64>()) {
        let mut rng = StreamKey::root(seed).rng();
        let c: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.uniform()).collect()).collect();
        let cost = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>();
        let got = cost(&hungarian(&c));
        let mut best = f64::INFINITY;
        permutations(&mut (0..n).collect::<Vec<_>>(), 0, &mut |p| best = best.min(cost(p)));
        prop_assert!((got - best).abs() < 1e-12);
    }

    #[test]
    fn exact_power_laws_are_recovered(slope in -2.0f64..2.0, scale in 0.1f64..10.0) {
        let lags: Vec<f64> = (2..9).map(|j| 2f64.powi(-j)).collect();
        let norms: Vec<f64> = lags.iter().map(|l| scale * l.powf(slope)).collect();
        let fit = fit_exponent(&lags, &norms).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!((fit.intercept - scale.ln()).abs() < 1e-9);
    }
}
