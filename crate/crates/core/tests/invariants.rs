use proptest::prelude::*;
use swdiv::combiner::{output_dist, BranchSpec, CombinerKind, CombinerSpec, SwitchPolicy};
use swdiv::fading::{DistPair, FadingSpec};
use swdiv::hos::{afd, lcr, Afd};
use swdiv::relay::{df_branch_dist, DfBranchSpec};

fn fading(max_rho: f64) -> impl Strategy<Value = FadingSpec> {
    prop_oneof![
        (0.2..5.0f64, 0.0..max_rho).prop_map(|(o, r)| FadingSpec::rayleigh(o, r)),
        (0.5..4.0f64, 0.2..5.0f64, 0.0..max_rho).prop_map(|(m, o, r)| FadingSpec::nakagami(m, o, r)),
    ]
}

fn df(max_rho: f64) -> impl Strategy<Value = DfBranchSpec> {
    (fading(max_rho), fading(max_rho), 0.0..3.0f64).prop_map(|(hop1, hop2, t_df)| DfBranchSpec { hop1, hop2, t_df })
}

fn branch() -> impl Strategy<Value = BranchSpec> {
    prop_oneof![fading(0.99).prop_map(BranchSpec::Direct), df(0.99).prop_map(BranchSpec::DualHop)]
}

fn kind() -> impl Strategy<Value = CombinerKind> {
    prop_oneof![
        Just(CombinerKind::Sc),
        (0.05..3.0f64).prop_map(|t| CombinerKind::Ssc { policy: SwitchPolicy::Instant, threshold: t }),
        (0.05..3.0f64).prop_map(|t| CombinerKind::Ssc { policy: SwitchPolicy::Deferred, threshold: t }),
    ]
}

/// Monotone, bounded, first-marginal consistent, 2-increasing.
fn check_joint(d: &DistPair, a: f64, b: f64, da: f64, db: f64) -> Result<(), TestCaseError> {
    let f = |x, y| d.bicdf(x, y).unwrap();
    let slack = 1e-12;
    let (a2, b2) = (a + da, b + db);
    prop_assert!(f(a2, b2) - f(a, b2) - f(a2, b) + f(a, b) >= -slack, "rectangle");
    prop_assert!(f(a, b) <= f(a2, b) + slack && f(a, b) <= f(a, b2) + slack, "monotone");
    prop_assert!((0.0..=1.0).contains(&f(a, b)));
    prop_assert!((f(a, f64::INFINITY) - d.cdf(a).unwrap()).abs() <= slack);
    prop_assert!(d.cdf(a).unwrap() <= d.cdf(a2).unwrap() + slack);
    prop_assert!((d.cdf(0.0).unwrap() - d.point_mass_at_zero()).abs() <= slack);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn df_branch_is_a_valid_joint_law(spec in df(0.99), a in 0.0..4.0f64, b in 0.0..4.0f64, da in 0.0..2.0f64, db in 0.0..2.0f64) {
        let d = df_branch_dist(&spec).unwrap();
        check_joint(&d, a, b, da, db)?;
        prop_assert_eq!(d.cdf(-1.0).unwrap(), 0.0);
        let hop1_at_t = swdiv::fading::make_dist(spec.hop1).unwrap().cdf(spec.t_df).unwrap();
        prop_assert!((d.point_mass_at_zero() - hop1_at_t).abs() < 1e-15);
    }

    #[test]
    fn df_branch_factorises_without_correlation(spec in df(1e-300), a in 0.0..4.0f64, b in 0.0..4.0f64) {
        let spec = DfBranchSpec { hop1: spec.hop1.with_rho(0.0), hop2: spec.hop2.with_rho(0.0), ..spec };
        let d = df_branch_dist(&spec).unwrap();
        prop_assert!((d.bicdf(a, b).unwrap() - d.cdf(a).unwrap() * d.cdf(b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn combiner_outputs_are_valid_joint_laws(k in kind(), b in branch(), n in 2usize..5, a in 0.0..4.0f64, u in 0.0..4.0f64, da in 0.0..2.0f64, db in 0.0..2.0f64) {
        let d = output_dist(&CombinerSpec::iid(k, b, n)).unwrap();
        check_joint(&d, a, u, da, db)?;
    }

    #[test]
    fn instant_ssc_regions_meet_on_the_threshold(f in fading(0.99), t in 0.05..3.0f64, n in 2usize..5, u in 0.0..5.0f64) {
        let d = output_dist(&CombinerSpec::iid(
            CombinerKind::Ssc { policy: SwitchPolicy::Instant, threshold: t },
            BranchSpec::Direct(f),
            n,
        ))
        .unwrap();
        let below = t * (1.0 - 1e-13);
        prop_assert!((d.bicdf(below, u).unwrap() - d.bicdf(t, u).unwrap()).abs() < 1e-11);
        prop_assert!((d.bicdf(u, below).unwrap() - d.bicdf(u, t).unwrap()).abs() < 1e-11);
        prop_assert!((d.cdf(below).unwrap() - d.cdf(t).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn deferred_ssc_keeps_the_branch_law(f in fading(0.99), t in 0.05..3.0f64, n in 2usize..5, u in 0.0..5.0f64) {
        let d = output_dist(&CombinerSpec::iid(
            CombinerKind::Ssc { policy: SwitchPolicy::Deferred, threshold: t },
            BranchSpec::Direct(f),
            n,
        ))
        .unwrap();
        let branch = swdiv::fading::make_dist(f).unwrap();
        prop_assert!((d.cdf(u).unwrap() - branch.cdf(u).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn crossing_rate_identity(k in kind(), b in branch(), n in 2usize..4, u in 0.0..5.0f64, ts in 1e-4..1.0f64) {
        let d = output_dist(&CombinerSpec::iid(k, b, n)).unwrap();
        let n_z = lcr(&d, u, ts).unwrap();
        prop_assert!(n_z >= 0.0);
        if let Ok(Afd::Finite(a)) = afd(&d, u, ts) {
            prop_assert!((n_z * a - d.cdf(u).unwrap()).abs() < 1e-12);
            prop_assert!(a >= ts * (1.0 - 1e-12));
        }
    }

    #[test]
    fn crossing_rate_depends_on_normalised_level_only(f in fading(0.99), scale in 0.01..100.0f64, ubar in 0.001..5.0f64, tbar in 0.05..2.0f64) {
        let mk = |omega: f64| {
            output_dist(&CombinerSpec::iid(
                CombinerKind::Ssc { policy: SwitchPolicy::Instant, threshold: tbar * omega },
                BranchSpec::Direct(f.with_omega(omega)),
                3,
            ))
            .unwrap()
        };
        let (d1, d2) = (mk(f.omega), mk(f.omega * scale));
        let (x, y) = (lcr(&d1, ubar * f.omega, 1.0).unwrap(), lcr(&d2, ubar * f.omega * scale, 1.0).unwrap());
        prop_assert!((x - y).abs() <= 1e-12 + 1e-9 * x, "{} vs {}", x, y);
    }
}

#[test]
fn crossing_rate_vanishes_at_high_levels() {
    let d = output_dist(&CombinerSpec::iid(CombinerKind::Sc, BranchSpec::Direct(FadingSpec::rayleigh(1.0, 0.41)), 2)).unwrap();
    assert!(lcr(&d, 60.0, 1.0).unwrap() < 1e-20);
}
