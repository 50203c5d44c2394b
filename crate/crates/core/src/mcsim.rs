//! Monte Carlo sample-path simulator: correlated fading branches built from
//! first-order autoregressive Gaussians, the combiner state machines, and
//! empirical crossing-rate / fade-duration estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::combiner::{BranchSpec, CombinerKind, CombinerSpec, SwitchPolicy};
use crate::error::{Error, Result};
use crate::fading::FadingSpec;

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 100;
/// Levels with fewer upward crossings than this are flagged.
pub const MIN_CROSSINGS: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Output samples kept after warmup.
    pub n_samples: usize,
    pub seed: u64,
    /// Output samples discarded before recording.
    pub warmup: usize,
    pub levels: Vec<f64>,
    /// Sample interval in seconds.
    pub ts: f64,
}

impl SimConfig {
    pub fn new(n_samples: usize, seed: u64, levels: Vec<f64>) -> Self {
        SimConfig {
            n_samples,
            seed,
            warmup: 1000,
            levels,
            ts: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidParameter("a path needs at least 2 samples".into()));
        }
        if !(self.ts > 0.0) {
            return Err(Error::InvalidParameter(format!("sample interval must be positive, got {}", self.ts)));
        }
        Ok(())
    }
}

/// Stationary SNR sampler for one fading link: each underlying Gaussian
/// follows `x[n+1] = a x[n] + sqrt(1 - a²) σ w[n]` with `a = sqrt(rho)`.
#[derive(Debug, Clone)]
pub struct BranchSampler {
    sigma: Vec<f64>,
    state: Vec<f64>,
    a: f64,
    innov: f64,
    rng: ChaCha8Rng,
}

impl BranchSampler {
    pub fn new(spec: &FadingSpec, seed: u64, stream: u64) -> Result<Self> {
        spec.validate()?;
        let sigma: Vec<f64> = spec.gaussian_variances()?.iter().map(|v| v.sqrt()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let state = sigma.iter().map(|s| s * rng.sample::<f64, _>(StandardNormal)).collect();
        let a = spec.rho.sqrt();
        Ok(BranchSampler {
            sigma,
            state,
            a,
            innov: (1.0 - spec.rho).sqrt(),
            rng,
        })
    }

    /// Current SNR, then advance one sample.
    pub fn next_snr(&mut self) -> f64 {
        let mut p = 0.0;
        for (x, s) in self.state.iter_mut().zip(&self.sigma) {
            p += *x * *x;
            let w: f64 = self.rng.sample(StandardNormal);
            *x = self.a * *x + self.innov * s * w;
        }
        p
    }
}

/// `n_samples` consecutive SNR samples of one link.
pub fn gen_branch_path(spec: &FadingSpec, cfg: &SimConfig) -> Result<Vec<f64>> {
    let mut s = BranchSampler::new(spec, cfg.seed, 0)?;
    Ok((0..cfg.n_samples).map(|_| s.next_snr()).collect())
}

#[derive(Debug, Clone)]
enum Source {
    Direct(BranchSampler),
    DualHop {
        hop1: BranchSampler,
        hop2: BranchSampler,
        t_df: f64,
    },
}

impl Source {
    fn new(branch: &BranchSpec, seed: u64, index: u64) -> Result<Self> {
        match branch {
            BranchSpec::Direct(f) => Ok(Source::Direct(BranchSampler::new(f, seed, 2 * index)?)),
            BranchSpec::DualHop(df) => Ok(Source::DualHop {
                hop1: BranchSampler::new(&df.hop1, seed, 2 * index)?,
                hop2: BranchSampler::new(&df.hop2, seed, 2 * index + 1)?,
                t_df: df.t_df,
            }),
        }
    }

    fn next_snr(&mut self) -> f64 {
        match self {
            Source::Direct(s) => s.next_snr(),
            Source::DualHop { hop1, hop2, t_df } => {
                let first = hop1.next_snr();
                let second = hop2.next_snr();
                if first < *t_df {
                    0.0
                } else {
                    second
                }
            }
        }
    }
}

/// Combiner state machine; the tracked branch starts at index 0.
#[derive(Debug, Clone)]
pub struct CombinerState {
    kind: CombinerKind,
    tracked: usize,
    n: usize,
}

impl CombinerState {
    pub fn new(kind: CombinerKind, n: usize) -> Self {
        CombinerState { kind, tracked: 0, n }
    }

    /// Consume one sample per branch; return the output SNR and the branch
    /// that produced it.
    pub fn step(&mut self, z: &[f64]) -> (f64, usize) {
        match self.kind {
            CombinerKind::Sc => {
                let (i, v) = z
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
                (v, i)
            }
            CombinerKind::Ssc {
                policy: SwitchPolicy::Instant,
                threshold,
            } => {
                if z[self.tracked] < threshold {
                    self.tracked = (self.tracked + 1) % self.n;
                }
                (z[self.tracked], self.tracked)
            }
            CombinerKind::Ssc {
                policy: SwitchPolicy::Deferred,
                threshold,
            } => {
                let out = (z[self.tracked], self.tracked);
                if z[self.tracked] < threshold {
                    self.tracked = (self.tracked + 1) % self.n;
                }
                out
            }
        }
    }
}

/// Output samples of a combiner, with the fraction of samples each branch
/// was tracked (SSC only).
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerPath {
    pub samples: Vec<f64>,
    pub occupancy: Option<Vec<f64>>,
}

/// Run the state machine over pre-computed branch paths of equal length.
pub fn combine_paths(kind: CombinerKind, paths: &[Vec<f64>]) -> Result<CombinerPath> {
    let n = paths.len();
    if n == 0 || paths.iter().any(|p| p.len() != paths[0].len()) {
        return Err(Error::InvalidParameter("branch paths must be non-empty and of equal length".into()));
    }
    let mut state = CombinerState::new(kind, n);
    let mut counts = vec![0u64; n];
    let mut z = vec![0.0; n];
    let samples = (0..paths[0].len())
        .map(|k| {
            for (zi, p) in z.iter_mut().zip(paths) {
                *zi = p[k];
            }
            let (v, i) = state.step(&z);
            counts[i] += 1;
            v
        })
        .collect::<Vec<_>>();
    Ok(CombinerPath {
        occupancy: occupancy(kind, &counts),
        samples,
    })
}

fn occupancy(kind: CombinerKind, counts: &[u64]) -> Option<Vec<f64>> {
    if matches!(kind, CombinerKind::Sc) {
        return None;
    }
    let total: u64 = counts.iter().sum();
    Some(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Simulate the combiner output: all branches advance in lockstep from
/// independent random streams; the first `warmup` outputs are dropped.
pub fn run_combiner_path(spec: &CombinerSpec, cfg: &SimConfig) -> Result<CombinerPath> {
    cfg.validate()?;
    spec.validate()?;
    let mut sources = spec
        .branches
        .iter()
        .enumerate()
        .map(|(i, b)| Source::new(b, cfg.seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let n = sources.len();
    let mut state = CombinerState::new(spec.kind, n);
    let mut z = vec![0.0; n];
    let mut counts = vec![0u64; n];
    let mut samples = Vec::with_capacity(cfg.n_samples);
    for k in 0..cfg.warmup + cfg.n_samples {
        for (zi, s) in z.iter_mut().zip(sources.iter_mut()) {
            *zi = s.next_snr();
        }
        let (v, i) = state.step(&z);
        if k >= cfg.warmup {
            samples.push(v);
            counts[i] += 1;
        }
    }
    Ok(CombinerPath {
        occupancy: occupancy(spec.kind, &counts),
        samples,
    })
}

/// Empirical statistics at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelEstimate {
    pub level: f64,
    /// Pairs `(Z[n] <= u, Z[n+1] > u)`.
    pub crossings: u64,
    /// Samples `Z[n] <= u` among the first `len - 1`.
    pub below: u64,
    /// Upward crossings per second.
    pub lcr_hat: f64,
    pub lcr_stderr: f64,
    /// Mean below-level run length in seconds; `None` without crossings.
    pub afd_hat: Option<f64>,
    pub afd_stderr: Option<f64>,
    /// Fraction of the first `len - 1` samples at or below the level.
    pub ecdf: f64,
    /// Fewer than [`MIN_CROSSINGS`] crossings.
    pub insufficient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalHos {
    pub ts: f64,
    pub pairs: usize,
    pub levels: Vec<LevelEstimate>,
    pub occupancy: Option<Vec<f64>>,
}

/// Count crossings at every level; standard errors from batch means.
pub fn estimate_hos(path: &[f64], levels: &[f64], ts: f64) -> Result<EmpiricalHos> {
    if path.len() < 2 {
        return Err(Error::InvalidParameter("a path needs at least 2 samples".into()));
    }
    if !(ts > 0.0) {
        return Err(Error::InvalidParameter(format!("sample interval must be positive, got {ts}")));
    }
    let pairs = path.len() - 1;
    let k = BATCHES.min(pairs);
    let bounds: Vec<usize> = (0..=k).map(|b| b * pairs / k).collect();
    let levels = levels
        .par_iter()
        .map(|&u| level_estimate(path, u, ts, &bounds))
        .collect();
    Ok(EmpiricalHos {
        ts,
        pairs,
        levels,
        occupancy: None,
    })
}

fn level_estimate(path: &[f64], u: f64, ts: f64, bounds: &[usize]) -> LevelEstimate {
    let k = bounds.len() - 1;
    let mut up = vec![0u64; k];
    let mut below = vec![0u64; k];
    for b in 0..k {
        let (mut c, mut d) = (0u64, 0u64);
        for n in bounds[b]..bounds[b + 1] {
            let lo = path[n] <= u;
            d += lo as u64;
            c += (lo && path[n + 1] > u) as u64;
        }
        up[b] = c;
        below[b] = d;
    }
    let pairs = bounds[k] as f64;
    let total_up: u64 = up.iter().sum();
    let total_below: u64 = below.iter().sum();
    let lcr_hat = total_up as f64 / (pairs * ts);

    let kf = k as f64;
    let rates: Vec<f64> = (0..k)
        .map(|b| up[b] as f64 / ((bounds[b + 1] - bounds[b]) as f64 * ts))
        .collect();
    let mean_rate = rates.iter().sum::<f64>() / kf;
    let lcr_stderr = if k > 1 {
        (rates.iter().map(|r| (r - mean_rate).powi(2)).sum::<f64>() / (kf - 1.0) / kf).sqrt()
    } else {
        f64::NAN
    };

    let (afd_hat, afd_stderr) = if total_up > 0 {
        let ratio = total_below as f64 / total_up as f64;
        let mean_up = total_up as f64 / kf;
        let se = if k > 1 {
            let ss: f64 = (0..k).map(|b| (below[b] as f64 - ratio * up[b] as f64).powi(2)).sum();
            ts * (ss / (kf * (kf - 1.0))).sqrt() / mean_up
        } else {
            f64::NAN
        };
        (Some(ts * ratio), Some(se))
    } else {
        (None, None)
    };

    LevelEstimate {
        level: u,
        crossings: total_up,
        below: total_below,
        lcr_hat,
        lcr_stderr,
        afd_hat,
        afd_stderr,
        ecdf: total_below as f64 / pairs,
        insufficient: total_up < MIN_CROSSINGS,
    }
}

/// Simulate a combiner and estimate its statistics at `cfg.levels`.
pub fn simulate(spec: &CombinerSpec, cfg: &SimConfig) -> Result<EmpiricalHos> {
    let path = run_combiner_path(spec, cfg)?;
    let mut est = estimate_hos(&path.samples, &cfg.levels, cfg.ts)?;
    est.occupancy = path.occupancy;
    Ok(est)
}
