//! Single-link SNR models: univariate and lag-1 bivariate CDFs of the
//! instantaneous SNR (power domain) for Rayleigh, Nakagami-m and Hoyt fading.
//!
//! The lag-1 power correlation `rho` is carried by the underlying Gaussians:
//! every in-phase/quadrature component has lag correlation `sqrt(rho)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{
    bessel_i_scaled, bessel_j0, gamma_p_ladder, ln_gamma, marcum_q1_pair, reg_inc_gamma_lower_with,
    Tolerance,
};

/// Fading family and its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Rayleigh,
    /// Nakagami-m, `m >= 0.5`.
    Nakagami { m: f64 },
    /// Hoyt (Nakagami-q), `0 < q <= 1`.
    Hoyt { q: f64 },
}

/// Per-branch random-process model: family, mean SNR `omega` (linear) and
/// lag-1 power correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    pub family: Family,
    pub omega: f64,
    pub rho: f64,
}

impl FadingSpec {
    pub fn rayleigh(omega: f64, rho: f64) -> Self {
        FadingSpec {
            family: Family::Rayleigh,
            omega,
            rho,
        }
    }

    pub fn nakagami(m: f64, omega: f64, rho: f64) -> Self {
        FadingSpec {
            family: Family::Nakagami { m },
            omega,
            rho,
        }
    }

    pub fn hoyt(q: f64, omega: f64, rho: f64) -> Self {
        FadingSpec {
            family: Family::Hoyt { q },
            omega,
            rho,
        }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        FadingSpec { omega, ..self }
    }

    pub fn with_rho(self, rho: f64) -> Self {
        FadingSpec { rho, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mean SNR must be positive and finite, got {}",
                self.omega
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "lag-1 correlation must lie in [0, 1), got {}",
                self.rho
            )));
        }
        match self.family {
            Family::Rayleigh => Ok(()),
            Family::Nakagami { m } if m >= 0.5 && m.is_finite() => Ok(()),
            Family::Nakagami { m } => Err(Error::InvalidParameter(format!(
                "Nakagami m must be >= 0.5, got {m}"
            ))),
            Family::Hoyt { q } if q > 0.0 && q <= 1.0 => Ok(()),
            Family::Hoyt { q } => Err(Error::InvalidParameter(format!(
                "Hoyt q must lie in (0, 1], got {q}"
            ))),
        }
    }

    /// Number of real Gaussians in the sum-of-squares construction, when the
    /// family has one.
    pub fn gaussian_count(&self) -> Option<usize> {
        match self.family {
            Family::Rayleigh | Family::Hoyt { .. } => Some(2),
            Family::Nakagami { m } => {
                let twice = 2.0 * m;
                (twice.fract() == 0.0).then_some(twice as usize)
            }
        }
    }

    /// Variances of the underlying real Gaussians.
    pub fn gaussian_variances(&self) -> Result<Vec<f64>> {
        match self.family {
            Family::Rayleigh => Ok(vec![0.5 * self.omega; 2]),
            Family::Hoyt { q } => {
                let sx = self.omega / (1.0 + q * q);
                Ok(vec![sx, q * q * sx])
            }
            Family::Nakagami { m } => match self.gaussian_count() {
                Some(k) => Ok(vec![self.omega / (2.0 * m); k]),
                None => Err(Error::UnsupportedShape(format!(
                    "Nakagami m = {m} is not a half-integer"
                ))),
            },
        }
    }
}

/// Lag-1 power correlation from the normalised Doppler spread under Clarke's
/// model: `|J0(2π f_D T_S)|²`.
pub fn clarke_rho(fd_ts: f64) -> f64 {
    let j = bessel_j0(2.0 * PI * fd_ts);
    j * j
}

// ---------------------------------------------------------------------------
// DistPair
// ---------------------------------------------------------------------------

/// Evaluatable univariate and consecutive-sample bivariate CDF of an SNR
/// process. Implementors only see finite, non-negative arguments; the
/// [`DistPair`] wrapper handles negative and infinite levels.
pub trait SnrDistribution: Send + Sync + fmt::Debug {
    fn cdf(&self, u: f64) -> Result<f64>;
    fn bicdf(&self, u1: f64, u2: f64) -> Result<f64>;
    fn point_mass_at_zero(&self) -> f64;
    fn pdf(&self, _u: f64) -> Option<f64> {
        None
    }
    /// True when consecutive samples are independent.
    fn temporally_independent(&self) -> bool;
}

/// Shared handle to an [`SnrDistribution`].
#[derive(Clone, Debug)]
pub struct DistPair {
    inner: Arc<dyn SnrDistribution>,
}

impl DistPair {
    pub fn new<D: SnrDistribution + 'static>(d: D) -> Self {
        DistPair { inner: Arc::new(d) }
    }

    /// `P(Z <= u)`; zero for negative levels, one at `+inf`.
    pub fn cdf(&self, u: f64) -> Result<f64> {
        if u.is_nan() {
            return Err(Error::InvalidParameter("NaN level".into()));
        }
        if u < 0.0 {
            Ok(0.0)
        } else if u == f64::INFINITY {
            Ok(1.0)
        } else {
            self.inner.cdf(u)
        }
    }

    /// `P(Z[n] <= u1, Z[n+1] <= u2)`.
    pub fn bicdf(&self, u1: f64, u2: f64) -> Result<f64> {
        if u1.is_nan() || u2.is_nan() {
            return Err(Error::InvalidParameter("NaN level".into()));
        }
        if u1 < 0.0 || u2 < 0.0 {
            return Ok(0.0);
        }
        match (u1 == f64::INFINITY, u2 == f64::INFINITY) {
            (true, true) => Ok(1.0),
            (true, false) => self.cdf(u2),
            (false, true) => self.cdf(u1),
            (false, false) => self.inner.bicdf(u1, u2),
        }
    }

    pub fn point_mass_at_zero(&self) -> f64 {
        self.inner.point_mass_at_zero()
    }

    pub fn pdf(&self, u: f64) -> Option<f64> {
        if u < 0.0 {
            return Some(0.0);
        }
        self.inner.pdf(u)
    }

    pub fn temporally_independent(&self) -> bool {
        self.inner.temporally_independent()
    }
}

// ---------------------------------------------------------------------------
// Base fading distributions
// ---------------------------------------------------------------------------

/// How `make_dist` is allowed to realise the bivariate CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistOptions {
    /// Fall back to 2-D quadrature when no exact form exists (Hoyt, rho > 0).
    pub numeric_fallback: bool,
    /// Series tolerance for exact forms.
    pub tol: Tolerance,
    /// Absolute quadrature tolerance for the numeric fallback.
    pub numeric_tol: Tolerance,
}

impl Default for DistOptions {
    fn default() -> Self {
        DistOptions {
            numeric_fallback: false,
            tol: Tolerance::default(),
            numeric_tol: Tolerance {
                abs_eps: 1e-9,
                max_terms: 2_000_000,
            },
        }
    }
}

impl DistOptions {
    pub fn with_numeric_fallback(self) -> Self {
        DistOptions {
            numeric_fallback: true,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Bivariate {
    Product,
    RayleighMarcum,
    Kibble,
    Numeric,
}

#[derive(Debug, Clone)]
struct FadingDist {
    spec: FadingSpec,
    bivariate: Bivariate,
    opts: DistOptions,
}

/// Build the [`DistPair`] of a single fading link with exact forms only.
pub fn make_dist(spec: FadingSpec) -> Result<DistPair> {
    make_dist_with(spec, &DistOptions::default())
}

pub fn make_dist_with(spec: FadingSpec, opts: &DistOptions) -> Result<DistPair> {
    spec.validate()?;
    let bivariate = if spec.rho == 0.0 {
        Bivariate::Product
    } else {
        match spec.family {
            Family::Rayleigh => Bivariate::RayleighMarcum,
            Family::Nakagami { .. } => Bivariate::Kibble,
            Family::Hoyt { q } => {
                if opts.numeric_fallback {
                    Bivariate::Numeric
                } else {
                    return Err(Error::UnsupportedBivariate(format!(
                        "Hoyt q={q} with rho={}",
                        spec.rho
                    )));
                }
            }
        }
    };
    Ok(DistPair::new(FadingDist {
        spec,
        bivariate,
        opts: *opts,
    }))
}

impl SnrDistribution for FadingDist {
    fn cdf(&self, u: f64) -> Result<f64> {
        univariate_cdf(&self.spec, u, &self.opts.tol)
    }

    fn bicdf(&self, u1: f64, u2: f64) -> Result<f64> {
        let s = &self.spec;
        let tol = &self.opts.tol;
        match self.bivariate {
            Bivariate::Product => Ok(univariate_cdf(s, u1, tol)? * univariate_cdf(s, u2, tol)?),
            Bivariate::RayleighMarcum => rayleigh_bicdf(s.omega, s.rho, u1, u2, tol),
            Bivariate::Kibble => {
                let Family::Nakagami { m } = s.family else {
                    unreachable!("Kibble form is only selected for Nakagami")
                };
                bigamma_cdf(m, s.omega / m, s.rho, u1, u2, tol)
            }
            Bivariate::Numeric => numeric_bicdf(s, u1, u2, &self.opts.numeric_tol),
        }
    }

    fn point_mass_at_zero(&self) -> f64 {
        0.0
    }

    fn pdf(&self, u: f64) -> Option<f64> {
        Some(univariate_pdf(&self.spec, u))
    }

    fn temporally_independent(&self) -> bool {
        self.spec.rho == 0.0
    }
}

fn univariate_cdf(spec: &FadingSpec, u: f64, tol: &Tolerance) -> Result<f64> {
    if u <= 0.0 {
        return Ok(0.0);
    }
    let x = u / spec.omega;
    match spec.family {
        Family::Rayleigh => Ok(-(-x).exp_m1()),
        Family::Nakagami { m } => reg_inc_gamma_lower_with(m, m * x, tol),
        Family::Hoyt { q } => hoyt_cdf(q, x, tol),
    }
}

fn univariate_pdf(spec: &FadingSpec, u: f64) -> f64 {
    if u < 0.0 {
        return 0.0;
    }
    let x = u / spec.omega;
    let density = match spec.family {
        Family::Rayleigh => (-x).exp(),
        Family::Nakagami { m } => {
            if x == 0.0 {
                return if m < 1.0 {
                    f64::INFINITY
                } else if m == 1.0 {
                    1.0 / spec.omega
                } else {
                    0.0
                };
            }
            (m * m.ln() + (m - 1.0) * x.ln() - m * x - ln_gamma(m)).exp()
        }
        Family::Hoyt { q } => {
            let q2 = q * q;
            let a = (1.0 + q2) * (1.0 + q2) / (4.0 * q2);
            let b = (1.0 - q2 * q2) / (4.0 * q2);
            // e^{-a x} I0(b x) = e^{-(a-b) x} Ĩ0(b x)
            (1.0 + q2) / (2.0 * q) * (-(a - b) * x).exp() * bessel_i_scaled(0.0, b * x)
        }
    };
    density / spec.omega
}

/// Hoyt power CDF at normalised level `x = u / Ω`.
///
/// The larger-variance Gaussian square is a negative-binomial mixture of
/// gammas at the smaller scale, so the power is `Gamma(1 + K, 2σ_y²)` with
/// `K ~ NB(1/2, 1 - q²)`.
fn hoyt_cdf(q: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    let q2 = q * q;
    let scaled = x * (1.0 + q2) / (2.0 * q2);
    let c = 1.0 - q2;
    if c == 0.0 {
        return reg_inc_gamma_lower_with(1.0, scaled, tol);
    }
    // truncate where the weight tail (ratio (k+1/2)/(k+1) * c < c) is negligible
    let mut k_max = 0usize;
    let mut w = q;
    let mut tail_bound = f64::INFINITY;
    while tail_bound > 1e-3 * tol.abs_eps {
        w *= c * (k_max as f64 + 0.5) / (k_max as f64 + 1.0);
        k_max += 1;
        tail_bound = w / (1.0 - c);
        if k_max > tol.max_terms {
            return Err(Error::NonConvergence {
                what: "Hoyt CDF mixture",
                terms: tol.max_terms,
            });
        }
    }
    let ladder = gamma_p_ladder(1.0, scaled, k_max, tol)?;
    let mut w = q;
    let mut sum = 0.0;
    for (k, p) in ladder.iter().enumerate() {
        sum += w * p;
        w *= c * (k as f64 + 0.5) / (k as f64 + 1.0);
    }
    Ok(sum.min(1.0))
}

/// Closed-form bivariate Rayleigh-power CDF via first-order Marcum Q.
///
/// `F(a,b) = 1 - e^{-a/Ω}(1 - Q1(√(2ρa/s), √(2b/s))) - e^{-b/Ω} Q1(√(2a/s), √(2ρb/s))`
/// with `s = Ω(1-ρ)`, rearranged so each piece keeps relative accuracy.
fn rayleigh_bicdf(omega: f64, rho: f64, u1: f64, u2: f64, tol: &Tolerance) -> Result<f64> {
    if u1 == 0.0 || u2 == 0.0 {
        return Ok(0.0);
    }
    let s = omega * (1.0 - rho);
    let m1 = marcum_q1_pair((2.0 * rho * u1 / s).sqrt(), (2.0 * u2 / s).sqrt(), tol)?;
    let m2 = marcum_q1_pair((2.0 * u1 / s).sqrt(), (2.0 * rho * u2 / s).sqrt(), tol)?;
    let e1 = (-u1 / omega).exp();
    let e2 = (-u2 / omega).exp();
    let f = -(-u2 / omega).exp_m1() + e2 * m2.p - e1 * m1.p;
    let cap = (-(-u1 / omega).exp_m1()).min(-(-u2 / omega).exp_m1());
    Ok(f.clamp(0.0, cap))
}

/// Bivariate gamma (Kibble) CDF: marginals `Gamma(shape, scale)`, power
/// correlation `rho`, as a negative-binomial mixture of independent pairs.
pub fn bigamma_cdf(shape: f64, scale: f64, rho: f64, x: f64, y: f64, tol: &Tolerance) -> Result<f64> {
    if x <= 0.0 || y <= 0.0 {
        return Ok(0.0);
    }
    if rho == 0.0 {
        return Ok(reg_inc_gamma_lower_with(shape, x / scale, tol)?
            * reg_inc_gamma_lower_with(shape, y / scale, tol)?);
    }
    let s = scale * (1.0 - rho);
    let (xs, ys) = (x / s, y / s);
    let mean = shape * rho / (1.0 - rho);
    let sd = (mean / (1.0 - rho)).sqrt();
    let mut n = (mean + 12.0 * sd) as usize + 20;
    loop {
        if n > tol.max_terms {
            return Err(Error::NonConvergence {
                what: "bivariate gamma series",
                terms: tol.max_terms,
            });
        }
        let px = gamma_p_ladder(shape, xs, n + 1, tol)?;
        let py = gamma_p_ladder(shape, ys, n + 1, tol)?;
        let mut w = (1.0 - rho).powf(shape);
        let mut sum = 0.0;
        for k in 0..=n {
            sum += w * px[k] * py[k];
            w *= rho * (shape + k as f64) / (k as f64 + 1.0);
        }
        // w is now the weight of term n+1; weights decay geometrically past the mode
        let ratio = rho * (shape + n as f64 + 1.0) / (n as f64 + 2.0);
        if ratio < 1.0 {
            let tail = w / (1.0 - ratio) * px[n + 1] * py[n + 1];
            if tail <= tol.abs_eps * sum || tail == 0.0 {
                return Ok(sum.min(1.0));
            }
        }
        n *= 2;
    }
}

/// Bivariate gamma (Kibble) density, the joint law of consecutive powers for
/// a sum of `2·shape` squared Gaussians with equal variance.
pub fn bigamma_pdf(shape: f64, scale: f64, rho: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    if rho == 0.0 {
        let g = |t: f64| ((shape - 1.0) * t.ln() - t / scale - ln_gamma(shape) - shape * scale.ln()).exp();
        return g(x) * g(y);
    }
    let s = scale * (1.0 - rho);
    let z = 2.0 * (rho * x * y).sqrt() / s;
    let nu = shape - 1.0;
    let log = 0.5 * nu * (x.ln() + y.ln()) - ln_gamma(shape) - (shape + 1.0) * scale.ln()
        - (1.0 - rho).ln()
        - 0.5 * nu * rho.ln()
        - (x + y) / s
        + z;
    log.exp() * bessel_i_scaled(nu, z)
}

/// Bivariate CDF by 2-D quadrature of the joint power law built from
/// correlated Gaussians. Oracle for the exact forms and the fallback for
/// families without one.
pub fn numeric_bicdf(spec: &FadingSpec, u1: f64, u2: f64, tol: &Tolerance) -> Result<f64> {
    spec.validate()?;
    if !(u1 >= 0.0 && u2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("levels must be >= 0, got ({u1}, {u2})")));
    }
    if u1 == 0.0 || u2 == 0.0 {
        return Ok(0.0);
    }
    let eps = tol.abs_eps;
    let budget = tol.max_terms.max(100_000);
    let (shape, scale) = match spec.family {
        Family::Rayleigh => (1.0, spec.omega),
        Family::Nakagami { m } => {
            if spec.gaussian_count().is_none() {
                return Err(Error::UnsupportedShape(format!(
                    "Gaussian construction needs half-integer m, got {m}"
                )));
            }
            (m, spec.omega / m)
        }
        Family::Hoyt { q } => return hoyt_numeric_bicdf(q, spec.omega, spec.rho, u1, u2, tol),
    };
    // x = t², which also tames the x^{shape-1} edge behaviour
    let r = quad::integrate_2d(
        |t1, t2| 4.0 * t1 * t2 * bigamma_pdf(shape, scale, spec.rho, t1 * t1, t2 * t2),
        (0.0, u1.sqrt()),
        (0.0, u2.sqrt()),
        eps,
        0.0,
        budget,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Hoyt: integrate the in-phase Gaussian pair against the bivariate CDF of
/// the squared quadrature pair, `x = √u sin θ` on both axes.
fn hoyt_numeric_bicdf(q: f64, omega: f64, rho: f64, u1: f64, u2: f64, tol: &Tolerance) -> Result<f64> {
    let var_x = omega / (1.0 + q * q);
    let var_y = q * q * var_x;
    let c = rho.sqrt();
    let det = 1.0 - c * c;
    let norm = 1.0 / (2.0 * PI * var_x * det.sqrt());
    let series_tol = Tolerance {
        abs_eps: 1e-13,
        max_terms: 20_000,
    };
    let (r1, r2) = (u1.sqrt(), u2.sqrt());
    let failed = std::cell::Cell::new(None);
    let r = quad::integrate_2d(
        |th1, th2| {
            let (s1, c1) = th1.sin_cos();
            let (s2, c2) = th2.sin_cos();
            let (x1, x2) = (r1 * s1, r2 * s2);
            let phi = norm * (-(x1 * x1 - 2.0 * c * x1 * x2 + x2 * x2) / (2.0 * var_x * det)).exp();
            if phi == 0.0 {
                return 0.0;
            }
            let rest1 = (u1 * c1 * c1).max(0.0);
            let rest2 = (u2 * c2 * c2).max(0.0);
            match bigamma_cdf(0.5, 2.0 * var_y, rho, rest1, rest2, &series_tol) {
                Ok(g) => phi * g * r1 * c1 * r2 * c2,
                Err(e) => {
                    failed.set(Some(e));
                    0.0
                }
            }
        },
        (-0.5 * PI, 0.5 * PI),
        (-0.5 * PI, 0.5 * PI),
        tol.abs_eps,
        0.0,
        tol.max_terms.max(100_000),
    )?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(r.value.clamp(0.0, 1.0))
}
