//! Dual-hop threshold-based decode-and-forward branches.
//!
//! The relay forwards only when the first-hop SNR reaches `t_df`; otherwise
//! the end-to-end SNR is zero for that sample, which puts an atom at zero.

use crate::error::{Error, Result};
use crate::fading::{make_dist_with, DistOptions, DistPair, FadingSpec, SnrDistribution};

/// A dual-hop branch: source→relay hop, relay→destination hop and the
/// relay's decode threshold (linear SNR). Hops are independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfBranchSpec {
    pub hop1: FadingSpec,
    pub hop2: FadingSpec,
    pub t_df: f64,
}

impl DfBranchSpec {
    pub fn validate(&self) -> Result<()> {
        self.hop1.validate()?;
        self.hop2.validate()?;
        if !(self.t_df >= 0.0) || !self.t_df.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "decode threshold must be finite and >= 0, got {}",
                self.t_df
            )));
        }
        Ok(())
    }
}

/// End-to-end branch distribution using exact hop distributions only.
pub fn df_branch_dist(spec: &DfBranchSpec) -> Result<DistPair> {
    df_branch_dist_with(spec, &DistOptions::default())
}

pub fn df_branch_dist_with(spec: &DfBranchSpec, opts: &DistOptions) -> Result<DistPair> {
    spec.validate()?;
    let hop1 = make_dist_with(spec.hop1, opts)?;
    let hop2 = make_dist_with(spec.hop2, opts)?;
    df_from_hops(hop1, hop2, spec.t_df)
}

/// Combine two arbitrary hop distributions through the decode threshold.
pub fn df_from_hops(hop1: DistPair, hop2: DistPair, t_df: f64) -> Result<DistPair> {
    if !(t_df >= 0.0) {
        return Err(Error::InvalidParameter(format!("decode threshold must be >= 0, got {t_df}")));
    }
    let f1 = hop1.cdf(t_df)?;
    let b1 = hop1.bicdf(t_df, t_df)?;
    let mut d = DfDist {
        hop1,
        hop2,
        f1,
        b1,
        atom: 0.0,
    };
    d.atom = d.cdf(0.0)?;
    Ok(DistPair::new(d))
}

#[derive(Debug)]
struct DfDist {
    hop1: DistPair,
    hop2: DistPair,
    /// hop-1 outage probability `F1(T_DF)`
    f1: f64,
    /// hop-1 consecutive outage probability `B1(T_DF, T_DF)`
    b1: f64,
    atom: f64,
}

impl SnrDistribution for DfDist {
    fn cdf(&self, u: f64) -> Result<f64> {
        Ok(self.f1 + self.hop2.cdf(u)? * (1.0 - self.f1))
    }

    fn bicdf(&self, u1: f64, u2: f64) -> Result<f64> {
        let one_off = self.f1 - self.b1;
        let both_on = 1.0 + self.b1 - 2.0 * self.f1;
        let v = self.b1
            + (self.hop2.cdf(u1)? + self.hop2.cdf(u2)?) * one_off
            + self.hop2.bicdf(u1, u2)? * both_on;
        Ok(v.clamp(0.0, 1.0))
    }

    fn point_mass_at_zero(&self) -> f64 {
        self.atom
    }

    fn temporally_independent(&self) -> bool {
        self.hop1.temporally_independent() && self.hop2.temporally_independent()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rayleigh_branch(rho: f64, t_df: f64) -> DfBranchSpec {
        DfBranchSpec {
            hop1: FadingSpec::rayleigh(1.0, rho),
            hop2: FadingSpec::rayleigh(1.0, rho),
            t_df,
        }
    }

    #[test]
    fn zero_threshold_passes_hop_two_through() {
        let d = df_branch_dist(&rayleigh_branch(0.41, 0.0)).unwrap();
        let h2 = make_dist_with(FadingSpec::rayleigh(1.0, 0.41), &DistOptions::default()).unwrap();
        for &u in &[0.0, 0.1, 1.0, 5.0] {
            assert_eq!(d.cdf(u).unwrap(), h2.cdf(u).unwrap());
            assert!((d.bicdf(u, 2.0 * u).unwrap() - h2.bicdf(u, 2.0 * u).unwrap()).abs() < 1e-15);
        }
        assert_eq!(d.point_mass_at_zero(), 0.0);
    }

    #[test]
    fn unit_threshold_reference_value() {
        let d = df_branch_dist(&rayleigh_branch(0.0, 1.0)).unwrap();
        let e = (-1.0f64).exp();
        let want = (1.0 - e) + (1.0 - e) * e;
        assert!((d.cdf(1.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.86466).abs() < 1e-5);
        assert!((d.point_mass_at_zero() - (1.0 - e)).abs() < 1e-15);
        assert_eq!(d.cdf(0.0).unwrap(), d.point_mass_at_zero());
        assert_eq!(d.cdf(-1e-9).unwrap(), 0.0);
    }

    #[test]
    fn uncorrelated_hops_factorise() {
        let d = df_branch_dist(&rayleigh_branch(0.0, 0.3)).unwrap();
        for &(a, b) in &[(0.0, 0.0), (0.0, 1.0), (0.4, 2.0), (3.0, 3.0)] {
            let p = d.cdf(a).unwrap() * d.cdf(b).unwrap();
            assert!((d.bicdf(a, b).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_threshold_is_rejected() {
        assert!(df_branch_dist(&rayleigh_branch(0.0, -1.0)).is_err());
        assert!(df_branch_dist(&rayleigh_branch(0.0, f64::NAN)).is_err());
    }
}
