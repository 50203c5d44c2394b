use swdiv::combiner::{
    output_dist, stationary_weights, BranchMode, BranchSpec, CombinerKind, CombinerSpec, SwitchPolicy,
};
use swdiv::fading::{clarke_rho, make_dist, make_dist_with, DistOptions, FadingSpec};
use swdiv::hos::lcr;
use swdiv::mcsim::{estimate_hos, gen_branch_path, run_combiner_path, simulate, SimConfig, BATCHES};
use swdiv::relay::{df_branch_dist, DfBranchSpec};

const N: usize = 10_000_000;

/// Batch-means estimate of `P(X[n] <= a, X[n+1] <= b)` and its standard error.
fn joint_below(path: &[f64], a: f64, b: f64) -> (f64, f64) {
    let pairs = path.len() - 1;
    let k = BATCHES;
    let mut means = Vec::with_capacity(k);
    for j in 0..k {
        let (lo, hi) = (j * pairs / k, (j + 1) * pairs / k);
        let c = (lo..hi).filter(|&n| path[n] <= a && path[n + 1] <= b).count();
        means.push(c as f64 / (hi - lo) as f64);
    }
    mean_and_se(&means)
}

fn below(path: &[f64], a: f64) -> (f64, f64) {
    let k = BATCHES;
    let means: Vec<f64> = (0..k)
        .map(|j| {
            let (lo, hi) = (j * path.len() / k, (j + 1) * path.len() / k);
            path[lo..hi].iter().filter(|&&x| x <= a).count() as f64 / (hi - lo) as f64
        })
        .collect();
    mean_and_se(&means)
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let m = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    (m, (var / k).sqrt())
}

fn lag1_corr(path: &[f64]) -> f64 {
    let n = path.len() as f64;
    let m = path.iter().sum::<f64>() / n;
    let var = path.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let cov = path.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / (n - 1.0);
    cov / var
}

fn within(est: (f64, f64), exact: f64, what: &str) {
    let (m, se) = est;
    assert!((m - exact).abs() <= 3.0 * se, "{what}: simulated {m} ± {se}, exact {exact}");
}

#[test]
fn rayleigh_path_mean_and_independence() {
    let cfg = SimConfig::new(1_000_000, 11, vec![]);
    let p = gen_branch_path(&FadingSpec::rayleigh(2.0, 0.0), &cfg).unwrap();
    let n = p.len() as f64;
    let mean = p.iter().sum::<f64>() / n;
    // exponential with mean 2 has standard deviation 2
    assert!((mean - 2.0).abs() <= 3.0 * 2.0 / n.sqrt(), "{mean}");
    assert!(lag1_corr(&p).abs() <= 3.0 / n.sqrt());
}

#[test]
fn clarke_correlation_is_reproduced() {
    let cfg = SimConfig::new(1_000_000, 12, vec![]);
    let rho = clarke_rho(0.05);
    let p = gen_branch_path(&FadingSpec::rayleigh(1.0, rho), &cfg).unwrap();
    assert!((lag1_corr(&p) - 0.95).abs() < 0.01);
}

#[test]
fn marginals_match_every_family() {
    let specs = [
        FadingSpec::rayleigh(1.0, 0.0),
        FadingSpec::nakagami(2.5, 1.0, 0.0),
        FadingSpec::hoyt(0.3, 1.0, 0.0),
    ];
    for spec in specs {
        let cfg = SimConfig::new(1_000_000, 13, vec![]);
        let p = gen_branch_path(&spec, &cfg).unwrap();
        let d = make_dist(spec).unwrap();
        for &u in &[0.05, 0.3, 1.0, 2.5] {
            within(below(&p, u), d.cdf(u).unwrap(), &format!("{spec:?} u={u}"));
        }
    }
}

#[test]
fn nakagami_bivariate_against_simulation() {
    let spec = FadingSpec::nakagami(2.0, 1.0, 0.95);
    let p = gen_branch_path(&spec, &SimConfig::new(N, 21, vec![])).unwrap();
    let d = make_dist(spec).unwrap();
    for &(a, b) in &[(1.0, 1.0), (0.3, 0.5)] {
        within(joint_below(&p, a, b), d.bicdf(a, b).unwrap(), &format!("({a},{b})"));
    }
}

#[test]
fn hoyt_numeric_bivariate_against_simulation() {
    let spec = FadingSpec::hoyt(0.3, 1.0, 0.41);
    let p = gen_branch_path(&spec, &SimConfig::new(N, 22, vec![])).unwrap();
    let d = make_dist_with(spec, &DistOptions::default().with_numeric_fallback()).unwrap();
    for &(a, b) in &[(0.2, 0.2), (1.0, 0.5)] {
        within(joint_below(&p, a, b), d.bicdf(a, b).unwrap(), &format!("({a},{b})"));
    }
}

#[test]
fn selection_bivariate_against_simulation() {
    let spec = CombinerSpec::iid(CombinerKind::Sc, BranchSpec::Direct(FadingSpec::rayleigh(1.0, 0.41)), 2);
    let path = run_combiner_path(&spec, &SimConfig::new(N, 23, vec![])).unwrap();
    let d = output_dist(&spec).unwrap();
    within(joint_below(&path.samples, 0.1, 0.1), d.bicdf(0.1, 0.1).unwrap(), "SC bicdf");
}

#[test]
fn df_branch_cdf_against_simulation() {
    let df = DfBranchSpec {
        hop1: FadingSpec::rayleigh(1.0, 0.0),
        hop2: FadingSpec::rayleigh(1.0, 0.0),
        t_df: 1.0,
    };
    // with identical branches and independent samples every emitted value is
    // a fresh draw from the branch law, whichever branch SSC is tracking
    let pass_through = CombinerKind::Ssc {
        policy: SwitchPolicy::Deferred,
        threshold: f64::MIN_POSITIVE,
    };
    let spec = CombinerSpec::iid(pass_through, BranchSpec::DualHop(df), 2);
    let path = run_combiner_path(&spec, &SimConfig::new(N, 24, vec![])).unwrap();
    let d = df_branch_dist(&df).unwrap();
    within(below(&path.samples, 1.0), d.cdf(1.0).unwrap(), "DF cdf(1)");
    within(below(&path.samples, 0.0), d.point_mass_at_zero(), "DF atom");
    assert!((d.cdf(1.0).unwrap() - 0.86466).abs() < 1e-5);
}

#[test]
fn inid_occupancy_matches_stationary_weights() {
    let spec = CombinerSpec::ssc(
        SwitchPolicy::Instant,
        1.0,
        vec![
            BranchSpec::Direct(FadingSpec::rayleigh(1.0, 0.0)),
            BranchSpec::Direct(FadingSpec::rayleigh(2.0, 0.0)),
        ],
        BranchMode::InidTi,
    );
    let w = stationary_weights(&spec).unwrap().p;
    let occ = run_combiner_path(&spec, &SimConfig::new(N, 25, vec![])).unwrap().occupancy.unwrap();
    for (a, b) in w.iter().zip(&occ) {
        assert!((a - b).abs() <= 0.002, "{w:?} vs {occ:?}");
    }
}

#[test]
fn iid_occupancy_is_uniform() {
    let spec = CombinerSpec::iid(
        CombinerKind::Ssc {
            policy: SwitchPolicy::Instant,
            threshold: 1.0,
        },
        BranchSpec::Direct(FadingSpec::rayleigh(1.0, 0.95)),
        2,
    );
    let occ = run_combiner_path(&spec, &SimConfig::new(N, 26, vec![])).unwrap().occupancy.unwrap();
    assert!((occ[0] - 0.5).abs() <= 0.01 && (occ[1] - 0.5).abs() <= 0.01, "{occ:?}");
}

#[test]
fn sc_crossing_rate_without_correlation() {
    let levels: Vec<f64> = (-20..=10).step_by(2).map(|db| 10f64.powf(db as f64 / 10.0)).collect();
    let spec = CombinerSpec::iid(CombinerKind::Sc, BranchSpec::Direct(FadingSpec::rayleigh(1.0, 0.0)), 2);
    let est = simulate(&spec, &SimConfig::new(2_000_000, 27, levels)).unwrap();
    for l in &est.levels {
        let f = (1.0 - (-l.level).exp()).powi(2);
        if !l.insufficient {
            within((l.lcr_hat, l.lcr_stderr), f - f * f, &format!("u={}", l.level));
        }
        // the empirical identity holds by construction
        if let Some(a) = l.afd_hat {
            assert!((a * l.lcr_hat - l.ecdf).abs() < 1e-12);
        }
    }
}

#[test]
fn ssc_without_correlation_matches_simulation() {
    let t = 10f64.powf(-0.5);
    let levels: Vec<f64> = (-20..=10).step_by(2).map(|db| 10f64.powf(db as f64 / 10.0)).collect();
    for policy in [SwitchPolicy::Instant, SwitchPolicy::Deferred] {
        for n in [2, 3] {
            let spec = CombinerSpec::iid(
                CombinerKind::Ssc { policy, threshold: t },
                BranchSpec::Direct(FadingSpec::rayleigh(1.0, 0.0)),
                n,
            );
            let d = output_dist(&spec).unwrap();
            let est = simulate(&spec, &SimConfig::new(2_000_000, 28, levels.clone())).unwrap();
            for l in est.levels.iter().filter(|l| !l.insufficient) {
                let exact = lcr(&d, l.level, 1.0).unwrap();
                within((l.lcr_hat, l.lcr_stderr), exact, &format!("{policy:?} n={n} u={}", l.level));
            }
        }
    }
}

/// Relative gap between the mixture-form SSC crossing rate and simulation
/// under strong correlation, for the record.
fn correlated_ssc_gap(policy: SwitchPolicy, t: f64, u: f64) -> (f64, f64, f64) {
    let spec = CombinerSpec::iid(
        CombinerKind::Ssc { policy, threshold: t },
        BranchSpec::Direct(FadingSpec::rayleigh(1.0, 0.95)),
        2,
    );
    let exact = lcr(&output_dist(&spec).unwrap(), u, 1.0).unwrap();
    let est = simulate(&spec, &SimConfig::new(N, 29, vec![u])).unwrap();
    (exact, est.levels[0].lcr_hat, est.levels[0].lcr_stderr)
}

#[test]
fn correlated_ssc_mixture_form_departs_from_simulation() {
    let (exact, sim, se) = correlated_ssc_gap(SwitchPolicy::Instant, 10f64.powf(-0.5), 1.0);
    eprintln!("instant: mixture {exact:.5} simulated {sim:.5} ± {se:.5}");
    assert!((exact - sim).abs() > 3.0 * se);
    let (exact, sim, se) = correlated_ssc_gap(SwitchPolicy::Deferred, 10f64.powf(-0.5), 1.0);
    eprintln!("deferred: mixture {exact:.5} simulated {sim:.5} ± {se:.5}");
    assert!((exact - sim).abs() > 3.0 * se);
}

#[test]
#[ignore = "mixture form is not exact for SSC with temporal correlation; see README limitations"]
fn instant_ssc_correlated_crossing_rate_against_simulation() {
    let (exact, sim, se) = correlated_ssc_gap(SwitchPolicy::Instant, 10f64.powf(-0.5), 1.0);
    assert!((exact - sim).abs() <= 3.0 * se, "{exact} vs {sim} ± {se}");
}

#[test]
#[ignore = "mixture form is not exact for SSC with temporal correlation; see README limitations"]
fn deferred_ssc_over_df_correlated_bivariate_against_simulation() {
    let hop = FadingSpec::rayleigh(1.0, 0.95);
    let df = DfBranchSpec {
        hop1: hop,
        hop2: hop,
        t_df: 10f64.powf(-0.3),
    };
    let spec = CombinerSpec::iid(
        CombinerKind::Ssc {
            policy: SwitchPolicy::Deferred,
            threshold: 1.0,
        },
        BranchSpec::DualHop(df),
        2,
    );
    let path = run_combiner_path(&spec, &SimConfig::new(N, 30, vec![])).unwrap();
    let d = output_dist(&spec).unwrap();
    within(joint_below(&path.samples, 0.1, 0.1), d.bicdf(0.1, 0.1).unwrap(), "DS over DF");
}

#[test]
fn estimator_counts_are_per_level() {
    let est = estimate_hos(&[0.0, 2.0, 0.0, 0.5, 3.0], &[0.25, 1.0], 0.5).unwrap();
    assert_eq!(est.levels[0].crossings, 2);
    assert_eq!(est.levels[1].crossings, 2);
    assert_eq!(est.levels[1].below, 3);
}
