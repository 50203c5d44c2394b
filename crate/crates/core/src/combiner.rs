//! Output-SNR distributions of selection combining (SC, or opportunistic
//! relaying over DF branches) and switch-and-stay combining (SSC) with
//! instant or deferred switching.
//!
//! SSC outputs are mixtures over the branch tracked at the start of an
//! observation pair; branches form a circular list in the given order.

use crate::error::{Error, Result};
use crate::fading::{make_dist_with, DistOptions, DistPair, FadingSpec, SnrDistribution};
use crate::relay::{df_branch_dist_with, DfBranchSpec};

/// One diversity branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchSpec {
    Direct(FadingSpec),
    DualHop(DfBranchSpec),
}

impl BranchSpec {
    pub fn dist(&self, opts: &DistOptions) -> Result<DistPair> {
        match self {
            BranchSpec::Direct(f) => make_dist_with(*f, opts),
            BranchSpec::DualHop(df) => df_branch_dist_with(df, opts),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BranchSpec::Direct(f) => f.validate(),
            BranchSpec::DualHop(df) => df.validate(),
        }
    }

    /// Every hop has uncorrelated consecutive samples.
    pub fn temporally_independent(&self) -> bool {
        match self {
            BranchSpec::Direct(f) => f.rho == 0.0,
            BranchSpec::DualHop(df) => df.hop1.rho == 0.0 && df.hop2.rho == 0.0,
        }
    }

    pub fn is_dual_hop(&self) -> bool {
        matches!(self, BranchSpec::DualHop(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchPolicy {
    /// Check the tracked branch and switch before emitting (colocated).
    Instant,
    /// Emit the tracked branch, switch for the next interval (distributed).
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CombinerKind {
    Sc,
    Ssc { policy: SwitchPolicy, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchMode {
    /// Identical branches, arbitrary temporal correlation.
    IidAc,
    /// Possibly different branches, temporally independent samples.
    InidTi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerSpec {
    pub kind: CombinerKind,
    pub branches: Vec<BranchSpec>,
    pub mode: BranchMode,
    pub options: DistOptions,
}

impl CombinerSpec {
    pub fn sc(branches: Vec<BranchSpec>) -> Self {
        let mode = if branches.windows(2).all(|w| w[0] == w[1]) {
            BranchMode::IidAc
        } else {
            BranchMode::InidTi
        };
        CombinerSpec {
            kind: CombinerKind::Sc,
            branches,
            mode,
            options: DistOptions::default(),
        }
    }

    pub fn ssc(policy: SwitchPolicy, threshold: f64, branches: Vec<BranchSpec>, mode: BranchMode) -> Self {
        CombinerSpec {
            kind: CombinerKind::Ssc { policy, threshold },
            branches,
            mode,
            options: DistOptions::default(),
        }
    }

    /// `n` copies of the same branch.
    pub fn iid(kind: CombinerKind, branch: BranchSpec, n: usize) -> Self {
        CombinerSpec {
            kind,
            branches: vec![branch; n],
            mode: BranchMode::IidAc,
            options: DistOptions::default(),
        }
    }

    pub fn with_options(self, options: DistOptions) -> Self {
        CombinerSpec { options, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.branches.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a combiner needs at least 2 branches, got {}",
                self.branches.len()
            )));
        }
        for b in &self.branches {
            b.validate()?;
        }
        let CombinerKind::Ssc { threshold, .. } = self.kind else {
            return Ok(());
        };
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "switching threshold must be finite and >= 0, got {threshold}"
            )));
        }
        if threshold == 0.0 && self.branches.iter().any(BranchSpec::is_dual_hop) {
            return Err(Error::DegenerateThreshold(
                "zero threshold over branches with an atom at zero".into(),
            ));
        }
        match self.mode {
            BranchMode::IidAc => {
                if self.branches.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::InvalidParameter(
                        "identical-branch mode with differing branches".into(),
                    ));
                }
            }
            BranchMode::InidTi => {
                if let Some(i) = self.branches.iter().position(|b| !b.temporally_independent()) {
                    return Err(Error::UnsupportedScenario(format!(
                        "SSC with non-identical branches requires rho = 0 on every branch (branch {i} is correlated)"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.branches.len()
    }

    fn branch_dists(&self) -> Result<Vec<DistPair>> {
        self.branches.iter().map(|b| b.dist(&self.options)).collect()
    }
}

/// Long-run probability of tracking each branch.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryWeights {
    pub p: Vec<f64>,
}

/// Output distribution of any supported combiner.
pub fn output_dist(spec: &CombinerSpec) -> Result<DistPair> {
    spec.validate()?;
    match spec.kind {
        CombinerKind::Sc => Ok(sc_output_dist(&spec.branch_dists()?)),
        CombinerKind::Ssc {
            policy: SwitchPolicy::Instant,
            ..
        } => ssc_is_output_dist(spec),
        CombinerKind::Ssc {
            policy: SwitchPolicy::Deferred,
            ..
        } => ssc_ds_output_dist(spec),
    }
}

/// Selection combining over independent branches: the output is below a
/// level exactly when every branch is.
pub fn sc_output_dist(branches: &[DistPair]) -> DistPair {
    if branches.len() == 1 {
        return branches[0].clone();
    }
    let atom = branches.iter().map(DistPair::point_mass_at_zero).product();
    DistPair::new(ScDist {
        branches: branches.to_vec(),
        atom,
    })
}

#[derive(Debug)]
struct ScDist {
    branches: Vec<DistPair>,
    atom: f64,
}

impl SnrDistribution for ScDist {
    fn cdf(&self, u: f64) -> Result<f64> {
        self.branches.iter().try_fold(1.0, |acc, b| Ok(acc * b.cdf(u)?))
    }

    fn bicdf(&self, u1: f64, u2: f64) -> Result<f64> {
        self.branches.iter().try_fold(1.0, |acc, b| Ok(acc * b.bicdf(u1, u2)?))
    }

    fn point_mass_at_zero(&self) -> f64 {
        self.atom
    }

    fn temporally_independent(&self) -> bool {
        self.branches.iter().all(DistPair::temporally_independent)
    }
}

pub fn stationary_weights(spec: &CombinerSpec) -> Result<StationaryWeights> {
    let CombinerKind::Ssc { threshold, .. } = spec.kind else {
        return Err(Error::InvalidParameter("stationary weights apply to SSC only".into()));
    };
    spec.validate()?;
    let n = spec.n();
    match spec.mode {
        BranchMode::IidAc => Ok(StationaryWeights {
            p: vec![1.0 / n as f64; n],
        }),
        BranchMode::InidTi => {
            let dists = spec.branch_dists()?;
            let f_t = dists
                .iter()
                .map(|d| d.cdf(threshold))
                .collect::<Result<Vec<_>>>()?;
            weights_from_switch_probs(&f_t).map(|p| StationaryWeights { p })
        }
    }
}

fn weights_from_switch_probs(f_t: &[f64]) -> Result<Vec<f64>> {
    if let Some(k) = f_t.iter().position(|&f| f <= 0.0) {
        return Err(Error::DegenerateThreshold(format!(
            "branch {k} never falls below the switching threshold"
        )));
    }
    let inv_sum: f64 = f_t.iter().map(|f| 1.0 / f).sum();
    Ok(f_t.iter().map(|f| 1.0 / (f * inv_sum)).collect())
}

pub fn ssc_is_output_dist(spec: &CombinerSpec) -> Result<DistPair> {
    ssc_output(spec, SwitchPolicy::Instant)
}

pub fn ssc_ds_output_dist(spec: &CombinerSpec) -> Result<DistPair> {
    ssc_output(spec, SwitchPolicy::Deferred)
}

fn ssc_output(spec: &CombinerSpec, policy: SwitchPolicy) -> Result<DistPair> {
    let CombinerKind::Ssc { threshold, policy: p } = spec.kind else {
        return Err(Error::InvalidParameter("not an SSC combiner".into()));
    };
    if p != policy {
        return Err(Error::InvalidParameter(format!("combiner policy is {p:?}, not {policy:?}")));
    }
    spec.validate()?;
    let branches = spec.branch_dists()?;
    let t = threshold;
    let f_t = branches.iter().map(|d| d.cdf(t)).collect::<Result<Vec<_>>>()?;
    let b_tt = branches.iter().map(|d| d.bicdf(t, t)).collect::<Result<Vec<_>>>()?;
    let (weights, symmetric) = match spec.mode {
        BranchMode::IidAc => (vec![1.0 / spec.n() as f64; spec.n()], true),
        BranchMode::InidTi => (weights_from_switch_probs(&f_t)?, false),
    };
    let mut d = SscDist {
        branches,
        weights,
        symmetric,
        policy,
        t,
        f_t,
        b_tt,
        atom: 0.0,
    };
    d.atom = d.cdf(0.0)?;
    Ok(DistPair::new(d))
}

#[derive(Debug)]
struct SscDist {
    branches: Vec<DistPair>,
    weights: Vec<f64>,
    /// identical branches: every conditional term is the same
    symmetric: bool,
    policy: SwitchPolicy,
    t: f64,
    f_t: Vec<f64>,
    b_tt: Vec<f64>,
    atom: f64,
}

impl SscDist {
    fn at(&self, i: usize) -> &DistPair {
        &self.branches[i % self.branches.len()]
    }

    fn mix(&self, term: impl Fn(usize) -> Result<f64>) -> Result<f64> {
        if self.symmetric {
            return term(0);
        }
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * term(i)?;
        }
        Ok(acc)
    }

    fn cdf_given(&self, i: usize, u: f64) -> Result<f64> {
        let (t, fi_t) = (self.t, self.f_t[i]);
        match self.policy {
            SwitchPolicy::Deferred => self.at(i).cdf(u),
            SwitchPolicy::Instant => {
                let switched = fi_t * self.at(i + 1).cdf(u)?;
                if u < t {
                    Ok(switched)
                } else {
                    Ok(switched + self.at(i).cdf(u)? - fi_t)
                }
            }
        }
    }

    fn bicdf_given(&self, i: usize, u1: f64, u2: f64) -> Result<f64> {
        let t = self.t;
        let fi_t = self.f_t[i];
        let (bi, bn) = (self.at(i), self.at(i + 1));
        match self.policy {
            SwitchPolicy::Deferred => {
                if u1 < t {
                    Ok(bi.cdf(u1)? * bn.cdf(u2)?)
                } else {
                    Ok(bi.bicdf(u1, u2)? - bi.bicdf(t, u2)? + fi_t * bn.cdf(u2)?)
                }
            }
            SwitchPolicy::Instant => {
                let psi = if self.branches.len() == 2 {
                    bi.bicdf(t, u2)? * bn.bicdf(u1, t)?
                } else {
                    fi_t * bn.bicdf(u1, t)? * self.at(i + 2).cdf(u2)?
                };
                let bi_tt = self.b_tt[i];
                let stay_then_switch = || -> Result<f64> { Ok(bn.cdf(u2)? * (bi.bicdf(u1, t)? - bi_tt)) };
                let switch_then_stay = || -> Result<f64> { Ok(fi_t * (bn.bicdf(u1, u2)? - bn.bicdf(u1, t)?)) };
                match (u1 < t, u2 < t) {
                    (true, true) => Ok(psi),
                    (false, true) => Ok(psi + stay_then_switch()?),
                    (true, false) => Ok(psi + switch_then_stay()?),
                    (false, false) => {
                        let stay_stay = bi.bicdf(u1, u2)? - bi.bicdf(u1, t)? - bi.bicdf(t, u2)? + bi_tt;
                        Ok(psi + stay_stay + stay_then_switch()? + switch_then_stay()?)
                    }
                }
            }
        }
    }
}

impl SnrDistribution for SscDist {
    fn cdf(&self, u: f64) -> Result<f64> {
        Ok(self.mix(|i| self.cdf_given(i, u))?.clamp(0.0, 1.0))
    }

    fn bicdf(&self, u1: f64, u2: f64) -> Result<f64> {
        Ok(self.mix(|i| self.bicdf_given(i, u1, u2))?.clamp(0.0, 1.0))
    }

    fn point_mass_at_zero(&self) -> f64 {
        self.atom
    }

    fn temporally_independent(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rayleigh(omega: f64, rho: f64) -> BranchSpec {
        BranchSpec::Direct(FadingSpec::rayleigh(omega, rho))
    }

    fn is(t: f64) -> CombinerKind {
        CombinerKind::Ssc {
            policy: SwitchPolicy::Instant,
            threshold: t,
        }
    }

    fn ds(t: f64) -> CombinerKind {
        CombinerKind::Ssc {
            policy: SwitchPolicy::Deferred,
            threshold: t,
        }
    }

    #[test]
    fn sc_is_a_product() {
        let b = make_dist_with(FadingSpec::rayleigh(1.0, 0.41), &DistOptions::default()).unwrap();
        let sc = sc_output_dist(&[b.clone(), b.clone()]);
        let u = std::f64::consts::LN_2;
        assert!((sc.cdf(u).unwrap() - 0.25).abs() < 1e-15);
        let bb = b.bicdf(0.1, 0.1).unwrap();
        assert_eq!(sc.bicdf(0.1, 0.1).unwrap(), bb * bb);
        let single = sc_output_dist(&[b.clone()]);
        assert_eq!(single.cdf(0.3).unwrap(), b.cdf(0.3).unwrap());
    }

    #[test]
    fn iid_weights_are_uniform() {
        let spec = CombinerSpec::iid(is(1.0), rayleigh(1.0, 0.5), 4);
        assert_eq!(stationary_weights(&spec).unwrap().p, vec![0.25; 4]);
    }

    #[test]
    fn inid_weights_follow_switch_probabilities() {
        let spec = CombinerSpec::ssc(
            SwitchPolicy::Instant,
            1.0,
            vec![rayleigh(1.0, 0.0), rayleigh(2.0, 0.0)],
            BranchMode::InidTi,
        );
        let w = stationary_weights(&spec).unwrap().p;
        let (f0, f1) = (1.0 - (-1.0f64).exp(), 1.0 - (-0.5f64).exp());
        assert!((w[0] - f1 / (f0 + f1)).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let eq = CombinerSpec::ssc(
            SwitchPolicy::Instant,
            1.0,
            vec![rayleigh(1.0, 0.0), rayleigh(1.0, 0.0)],
            BranchMode::InidTi,
        );
        assert_eq!(stationary_weights(&eq).unwrap().p, vec![0.5, 0.5]);
    }

    #[test]
    fn scenario_errors() {
        let correlated = CombinerSpec::ssc(
            SwitchPolicy::Instant,
            1.0,
            vec![rayleigh(1.0, 0.4), rayleigh(2.0, 0.0)],
            BranchMode::InidTi,
        );
        assert!(matches!(output_dist(&correlated), Err(Error::UnsupportedScenario(_))));
        let df = BranchSpec::DualHop(DfBranchSpec {
            hop1: FadingSpec::rayleigh(1.0, 0.0),
            hop2: FadingSpec::rayleigh(1.0, 0.0),
            t_df: 0.5,
        });
        let zero_t = CombinerSpec::iid(ds(0.0), df, 2);
        assert!(matches!(output_dist(&zero_t), Err(Error::DegenerateThreshold(_))));
        let mixed = CombinerSpec::ssc(
            SwitchPolicy::Deferred,
            1.0,
            vec![rayleigh(1.0, 0.4), rayleigh(2.0, 0.4)],
            BranchMode::IidAc,
        );
        assert!(output_dist(&mixed).is_err());
        assert!(output_dist(&CombinerSpec::iid(is(1.0), rayleigh(1.0, 0.0), 1)).is_err());
    }

    #[test]
    fn instant_cdf_is_continuous_at_threshold() {
        let t = 10f64.powf(-0.5);
        let d = output_dist(&CombinerSpec::iid(is(t), rayleigh(1.0, 0.95), 2)).unwrap();
        let below = d.cdf(t * (1.0 - 1e-12)).unwrap();
        let at = d.cdf(t).unwrap();
        assert!((below - at).abs() < 1e-11);
    }

    #[test]
    fn deferred_cdf_is_the_branch_cdf() {
        let d = output_dist(&CombinerSpec::iid(ds(0.5), rayleigh(1.0, 0.95), 3)).unwrap();
        for &u in &[0.1, 0.5, 2.0] {
            assert!((d.cdf(u).unwrap() - (1.0 - (-u as f64).exp())).abs() < 1e-15);
        }
        // below the threshold consecutive outputs come from different branches
        let f = |u: f64| 1.0 - (-u).exp();
        assert!((d.bicdf(0.3, 1.2).unwrap() - f(0.3) * f(1.2)).abs() < 1e-15);
    }

    #[test]
    fn first_marginal_is_consistent_in_every_region() {
        for kind in [is(0.7), ds(0.7)] {
            for n in [2, 3] {
                for rho in [0.0, 0.8] {
                    let d = output_dist(&CombinerSpec::iid(kind, rayleigh(1.0, rho), n)).unwrap();
                    for &u in &[0.2, 0.7, 1.5] {
                        let c = d.cdf(u).unwrap();
                        assert!((d.bicdf(u, 1e3).unwrap() - c).abs() < 1e-12, "{kind:?} n={n} u={u}");
                    }
                }
            }
        }
    }

    #[test]
    fn second_marginal_is_stationary_without_correlation() {
        for kind in [is(0.7), ds(0.7)] {
            for n in [2, 3] {
                let d = output_dist(&CombinerSpec::iid(kind, rayleigh(1.0, 0.0), n)).unwrap();
                for &u in &[0.2, 0.7, 1.5] {
                    let c = d.cdf(u).unwrap();
                    assert!((d.bicdf(1e3, u).unwrap() - c).abs() < 1e-12, "{kind:?} n={n} u={u}");
                }
            }
        }
    }

    #[test]
    fn second_marginal_drifts_under_correlation() {
        // The mixture conditions on the tracked branch at the start of the pair
        // but treats that branch's samples as unconditioned, so with rho > 0
        // the law of the second sample is not the stationary one.
        let d = output_dist(&CombinerSpec::iid(is(0.7), rayleigh(1.0, 0.8), 2)).unwrap();
        let gap = d.bicdf(1e3, 0.2).unwrap() - d.cdf(0.2).unwrap();
        assert!(gap.abs() > 1e-3, "{gap}");
    }
}
