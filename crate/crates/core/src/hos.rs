//! Higher-order statistics of a sampled SNR process: level crossing rate
//! and average fade duration from the univariate and consecutive-sample
//! bivariate CDFs, and their closed-form low-level asymptotes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{make_dist, DistPair, FadingSpec};
use crate::specfun::{ln_gamma, reg_inc_gamma_lower};

/// Upward crossings of `u` per second: `(F(u) - F(u,u)) / ts`.
pub fn lcr(dist: &DistPair, u: f64, ts: f64) -> Result<f64> {
    check_ts(ts)?;
    Ok(crossing_prob(dist, u)? / ts)
}

fn crossing_prob(dist: &DistPair, u: f64) -> Result<f64> {
    Ok((dist.cdf(u)? - dist.bicdf(u, u)?).max(0.0))
}

fn check_ts(ts: f64) -> Result<()> {
    if ts > 0.0 && ts.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("sample interval must be positive, got {ts}")))
    }
}

/// Average fade duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Afd {
    Finite(f64),
    /// The process is below the level with positive probability but never
    /// leaves it.
    Infinite,
}

impl Afd {
    pub fn value(self) -> f64 {
        match self {
            Afd::Finite(v) => v,
            Afd::Infinite => f64::INFINITY,
        }
    }
}

/// `F(u) / lcr(u)`, in seconds.
pub fn afd(dist: &DistPair, u: f64, ts: f64) -> Result<Afd> {
    check_ts(ts)?;
    let f = dist.cdf(u)?;
    let n = crossing_prob(dist, u)? / ts;
    afd_from(f, n, u)
}

fn afd_from(f: f64, n: f64, u: f64) -> Result<Afd> {
    if n > 0.0 {
        Ok(Afd::Finite(f / n))
    } else if f > 0.0 {
        Ok(Afd::Infinite)
    } else {
        Err(Error::NotDefined(format!("fade duration at level {u}: no mass below and no crossings")))
    }
}

/// Exact statistics on a grid of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct HosCurve {
    pub levels: Vec<f64>,
    pub ts: f64,
    pub cdf: Vec<f64>,
    pub lcr: Vec<f64>,
    /// `None` where the fade duration is not defined.
    pub afd: Vec<Option<Afd>>,
    pub asymptote: Option<Vec<f64>>,
}

/// Evaluate LCR and AFD at every level, in parallel.
pub fn curve(dist: &DistPair, levels: &[f64], ts: f64) -> Result<HosCurve> {
    check_ts(ts)?;
    let rows = levels
        .par_iter()
        .map(|&u| {
            let f = dist.cdf(u)?;
            let n = crossing_prob(dist, u)? / ts;
            Ok((f, n, afd_from(f, n, u).ok()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = HosCurve {
        levels: levels.to_vec(),
        ts,
        cdf: Vec::with_capacity(rows.len()),
        lcr: Vec::with_capacity(rows.len()),
        afd: Vec::with_capacity(rows.len()),
        asymptote: None,
    };
    for (f, n, a) in rows {
        out.cdf.push(f);
        out.lcr.push(n);
        out.afd.push(a);
    }
    Ok(out)
}

/// Scenarios with a closed-form low-level asymptote of the normalised LCR
/// `N·ts` against the normalised level `ū = u/Ω`.
#[derive(Debug, Clone, PartialEq)]
pub enum AsymptoteScenario {
    /// Selection combining over `n` IID Hoyt branches.
    HoytSc { q: f64, n: usize },
    /// Selection combining over Rayleigh branches whose mean SNRs are
    /// `betas[k]` times the reference mean.
    InidRayleighSc { betas: Vec<f64> },
    /// Colocated SSC over IID Nakagami-m branches, normalised threshold `t_bar`.
    NakagamiSsc { m: f64, t_bar: f64 },
    /// Selection combining over `n` IID dual-hop DF branches; `hop1` is the
    /// first-hop model and `t_df` the decode threshold (same units as its Ω).
    DfOr { hop1: FadingSpec, t_df: f64, n: usize },
    /// Deferred-switching SSC over IID dual-hop DF branches.
    DistributedSsc { hop1: FadingSpec, t_df: f64 },
}

/// Straight line in log-log axes or a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoteForm {
    /// `log10(N·ts) ≈ slope·log10(ū) + intercept`.
    PowerLaw { slope: f64, intercept: f64 },
    /// `N·ts → level`.
    Horizontal { level: f64 },
}

impl AsymptoteForm {
    /// Normalised LCR predicted at normalised level `u_bar`.
    pub fn eval(&self, u_bar: f64) -> f64 {
        match *self {
            AsymptoteForm::PowerLaw { slope, intercept } => 10f64.powf(intercept) * u_bar.powf(slope),
            AsymptoteForm::Horizontal { level } => level,
        }
    }
}

pub fn asymptote(scenario: &AsymptoteScenario) -> Result<AsymptoteForm> {
    match scenario {
        AsymptoteScenario::HoytSc { q, n } => {
            if !(*q > 0.0 && *q <= 1.0) || *n == 0 {
                return Err(Error::InvalidParameter(format!("Hoyt SC needs 0 < q <= 1 and n >= 1 (q={q}, n={n})")));
            }
            let n = *n as f64;
            Ok(AsymptoteForm::PowerLaw {
                slope: n,
                intercept: n * ((1.0 + q * q) / (2.0 * q)).log10(),
            })
        }
        AsymptoteScenario::InidRayleighSc { betas } => {
            if betas.is_empty() || betas.iter().any(|b| !(*b > 0.0)) {
                return Err(Error::InvalidParameter("mean-SNR ratios must be positive".into()));
            }
            Ok(AsymptoteForm::PowerLaw {
                slope: betas.len() as f64,
                intercept: -betas.iter().map(|b| b.log10()).sum::<f64>(),
            })
        }
        AsymptoteScenario::NakagamiSsc { m, t_bar } => {
            if !(*m >= 0.5) || !(*t_bar > 0.0) {
                return Err(Error::InvalidParameter(format!("Nakagami SSC needs m >= 0.5 and t_bar > 0 (m={m}, t_bar={t_bar})")));
            }
            // f(ū) ~ m^m ū^{m-1} / Γ(m), integrated once, times F(T̄)
            let f_t = reg_inc_gamma_lower(*m, m * t_bar)?;
            let log_coef = m * m.ln() - ln_gamma(*m) - m.ln() + f_t.ln();
            Ok(AsymptoteForm::PowerLaw {
                slope: *m,
                intercept: log_coef / std::f64::consts::LN_10,
            })
        }
        AsymptoteScenario::DfOr { hop1, t_df, n } => {
            let d = make_dist(*hop1)?;
            let f = d.cdf(*t_df)?;
            let b = d.bicdf(*t_df, *t_df)?;
            horizontal(f.powi(*n as i32) - b.powi(*n as i32))
        }
        AsymptoteScenario::DistributedSsc { hop1, t_df } => {
            let f = make_dist(*hop1)?.cdf(*t_df)?;
            horizontal(f * (1.0 - f))
        }
    }
}

fn horizontal(level: f64) -> Result<AsymptoteForm> {
    if level > 0.0 && level < 1.0 {
        Ok(AsymptoteForm::Horizontal { level })
    } else {
        Err(Error::NotDefined(format!("horizontal asymptote level {level} outside (0, 1)")))
    }
}

/// Fade duration as the level goes to zero: one sample for atomless
/// processes, longer when the process sits at zero with positive probability.
pub fn afd_low_u_limit(dist: &DistPair, ts: f64) -> Result<f64> {
    check_ts(ts)?;
    let p = dist.point_mass_at_zero();
    if p == 0.0 {
        return Ok(ts);
    }
    let b = dist.bicdf(0.0, 0.0)?;
    if p - b <= 0.0 {
        return Err(Error::NotDefined("the process never leaves zero".into()));
    }
    Ok(ts * p / (p - b))
}

/// Least-squares slope of `log10(lcr)` against `log10(ū)` over
/// `n_points` levels evenly spaced in dB on `[lo_db, hi_db]`.
pub fn fit_loglog_slope(dist: &DistPair, omega: f64, lo_db: f64, hi_db: f64, n_points: usize) -> Result<f64> {
    if n_points < 2 || !(hi_db > lo_db) {
        return Err(Error::InvalidParameter("slope fit needs >= 2 points on an increasing range".into()));
    }
    let pts = (0..n_points)
        .map(|k| {
            let db = lo_db + (hi_db - lo_db) * k as f64 / (n_points - 1) as f64;
            let n = crossing_prob(dist, omega * 10f64.powf(db / 10.0))?;
            if n <= 0.0 {
                return Err(Error::NotDefined(format!("zero crossing rate at {db} dB")));
            }
            Ok((db / 10.0, n.log10()))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
