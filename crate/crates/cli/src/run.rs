//! Scenario evaluation: analytic curves, asymptotes and simulation, written
//! as one CSV per curve plus a plain-text report.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use swdiv::combiner::{output_dist, BranchSpec, CombinerKind, CombinerSpec, SwitchPolicy};
use swdiv::fading::Family;
use swdiv::hos::{self, asymptote, Afd, AsymptoteForm, AsymptoteScenario};
use swdiv::mcsim::{simulate, EmpiricalHos, SimConfig, MIN_CROSSINGS};
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};
use crate::scenario::{Axis, Curve, Scenario, SimSettings};

/// All quantities are reported normalised by the sample interval, so the
/// interval itself is arbitrary.
const TS: f64 = 1.0;

pub const LEVEL_COLUMNS: [&str; 8] = [
    "u_db",
    "lcr_ts",
    "afd_over_ts",
    "asymptote",
    "mc_lcr_ts",
    "mc_stderr",
    "mc_afd_over_ts",
    "cdf",
];

pub const THRESHOLD_COLUMNS: [&str; 8] = [
    "t_db",
    "outage_prob",
    "lcr_ts",
    "aod_over_ts",
    "mc_outage_prob",
    "mc_lcr_ts",
    "mc_stderr",
    "mc_aod_over_ts",
];

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Skip the simulator even if the scenario enables it.
    pub no_sim: bool,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct CurveResult {
    pub label: String,
    pub csv: PathBuf,
    pub asymptote: Option<AsymptoteForm>,
    /// Analyses that were skipped or replaced, with the reason.
    pub fallbacks: Vec<String>,
    pub notes: Vec<String>,
    /// Grid points (dB) whose simulated statistics rest on too few crossings.
    pub insufficient: Vec<(f64, u64)>,
    pub rows: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub scenario: String,
    pub curves: Vec<CurveResult>,
    pub report: PathBuf,
}

pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<RunSummary> {
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let sim = if opts.no_sim {
        None
    } else {
        s.sim.clone().map(|mut sim| {
            sim.seed = opts.seed.unwrap_or(sim.seed);
            sim.n_samples = opts.n_samples.unwrap_or(sim.n_samples);
            sim
        })
    };
    let curves = s
        .curves
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let sim = sim.as_ref().map(|x| SimSettings {
                seed: x.seed.wrapping_add(i as u64 * 1_000_000),
                ..x.clone()
            });
            let mut r = match s.grid.axis {
                Axis::Level => level_curve(s, c, sim.as_ref())?,
                Axis::Threshold { .. } => threshold_curve(s, c, sim.as_ref())?,
            };
            r.csv = opts.out_dir.join(csv_name(&s.output.stem, &c.label));
            let header: &[&str] = match s.grid.axis {
                Axis::Level => &LEVEL_COLUMNS,
                Axis::Threshold { .. } => &THRESHOLD_COLUMNS,
            };
            write_csv(&r.csv, header, &r.rows)?;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = opts.out_dir.join(format!("{}.report.txt", s.output.stem));
    write_atomic(&report, render_report(s, sim.as_ref(), &curves).as_bytes())?;
    Ok(RunSummary {
        scenario: s.name.clone(),
        curves,
        report,
    })
}

pub fn csv_name(stem: &str, label: &str) -> String {
    if label.is_empty() {
        return format!("{stem}.csv");
    }
    let tag: String = label
        .chars()
        .filter(|c| *c != '=')
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect();
    format!("{stem}__{tag}.csv")
}

fn empty_result(c: &Curve) -> CurveResult {
    CurveResult {
        label: c.label.clone(),
        csv: PathBuf::new(),
        asymptote: None,
        fallbacks: Vec::new(),
        notes: Vec::new(),
        insufficient: Vec::new(),
        rows: Vec::new(),
    }
}

fn level_curve(s: &Scenario, c: &Curve, sim: Option<&SimSettings>) -> Result<CurveResult> {
    let spec = c.combiner(None)?;
    let levels = s.grid.scaled(c);
    let mut r = empty_result(c);
    note_correlated_ssc(&spec, &mut r);

    let exact = match output_dist(&spec) {
        Ok(d) => Some(hos::curve(&d, &levels, TS)?),
        Err(swdiv::Error::UnsupportedBivariate(m)) => {
            r.fallbacks.push(format!("no exact curve: {m}"));
            None
        }
        Err(e) => return Err(e.into()),
    };

    if s.output.asymptote {
        match select_asymptote(c, &spec).and_then(|sc| asymptote(&sc).map_err(|e| e.to_string())) {
            Ok(form) => r.asymptote = Some(form),
            Err(m) => r.fallbacks.push(format!("no asymptote: {m}")),
        }
    }

    let mc = sim.map(|sim| run_sim(&spec, sim, levels.clone())).transpose()?;

    for (k, &u_db) in s.grid.points_db.iter().enumerate() {
        let mut row = vec![Some(u_db)];
        match &exact {
            Some(e) => {
                row.push(Some(e.lcr[k] * TS));
                row.push(e.afd[k].map(afd_value));
            }
            None => row.extend([None, None]),
        }
        row.push(r.asymptote.map(|f| f.eval(levels[k] / c.omega_ref)));
        push_mc(&mut row, mc.as_ref(), k, u_db, &mut r.insufficient);
        row.push(exact.as_ref().map(|e| e.cdf[k]));
        r.rows.push(row);
    }
    Ok(r)
}

fn threshold_curve(s: &Scenario, c: &Curve, sim: Option<&SimSettings>) -> Result<CurveResult> {
    let thresholds = s.grid.scaled(c);
    let u = s.grid.outage(c).expect("threshold grid has an outage level");
    let mut r = empty_result(c);
    note_correlated_ssc(&c.combiner(Some(thresholds[0]))?, &mut r);

    let rows = thresholds
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let spec = c.combiner(Some(t))?;
            let t_db = s.grid.points_db[k];
            let mut row = vec![Some(t_db)];
            let mut fallback = None;
            match output_dist(&spec) {
                Ok(d) => {
                    row.push(Some(d.cdf(u)?));
                    row.push(Some(hos::lcr(&d, u, TS)? * TS));
                    row.push(hos::afd(&d, u, TS).ok().map(afd_value));
                }
                Err(swdiv::Error::UnsupportedBivariate(m)) => {
                    fallback = Some(format!("no exact curve: {m}"));
                    row.extend([None, None, None]);
                }
                Err(e) => return Err(e.into()),
            }
            let mut low = Vec::new();
            match sim {
                Some(sim) => {
                    let sim = SimSettings {
                        seed: sim.seed.wrapping_add(k as u64),
                        ..sim.clone()
                    };
                    let mc = run_sim(&spec, &sim, vec![u])?;
                    row.push(Some(mc.levels[0].ecdf));
                    push_mc(&mut row, Some(&mc), 0, t_db, &mut low);
                }
                None => row.extend([None, None, None, None]),
            }
            Ok((row, fallback, low))
        })
        .collect::<Result<Vec<_>>>()?;

    for (row, fallback, low) in rows {
        if let Some(f) = fallback {
            if !r.fallbacks.contains(&f) {
                r.fallbacks.push(f);
            }
        }
        r.insufficient.extend(low);
        r.rows.push(row);
    }
    Ok(r)
}

fn run_sim(spec: &CombinerSpec, sim: &SimSettings, levels: Vec<f64>) -> Result<EmpiricalHos> {
    let mut cfg = SimConfig::new(sim.n_samples, sim.seed, levels);
    cfg.warmup = sim.warmup;
    cfg.ts = TS;
    Ok(simulate(spec, &cfg)?)
}

fn push_mc(row: &mut Vec<Option<f64>>, mc: Option<&EmpiricalHos>, k: usize, at_db: f64, low: &mut Vec<(f64, u64)>) {
    match mc {
        Some(mc) => {
            let l = &mc.levels[k];
            row.push(Some(l.lcr_hat * TS));
            row.push(Some(l.lcr_stderr * TS));
            row.push(l.afd_hat.map(|a| a / TS));
            if l.insufficient {
                low.push((at_db, l.crossings));
            }
        }
        None => row.extend([None, None, None]),
    }
}

fn afd_value(a: Afd) -> f64 {
    match a {
        Afd::Finite(x) => x / TS,
        Afd::Infinite => f64::INFINITY,
    }
}

fn note_correlated_ssc(spec: &CombinerSpec, r: &mut CurveResult) {
    if matches!(spec.kind, CombinerKind::Ssc { .. }) && !spec.branches.iter().all(BranchSpec::temporally_independent) {
        r.notes.push(
            "SSC over temporally correlated branches: the exact columns use the mixture form, \
             which departs from the simulated process (see README, Limitations)"
                .into(),
        );
    }
}

/// Pick the closed-form low-level asymptote that matches a curve, if any.
pub fn select_asymptote(c: &Curve, spec: &CombinerSpec) -> std::result::Result<AsymptoteScenario, String> {
    let b = &spec.branches;
    let iid = b.windows(2).all(|w| w[0] == w[1]);
    let n = b.len();
    match spec.kind {
        CombinerKind::Sc => {
            let rayleigh: Option<Vec<f64>> = b
                .iter()
                .map(|x| match x {
                    BranchSpec::Direct(f) if f.family == Family::Rayleigh => Some(f.omega / c.omega_ref),
                    _ => None,
                })
                .collect();
            if let Some(betas) = rayleigh {
                return Ok(AsymptoteScenario::InidRayleighSc { betas });
            }
            match (iid, b[0]) {
                (true, BranchSpec::Direct(f)) => match f.family {
                    Family::Hoyt { q } => Ok(AsymptoteScenario::HoytSc { q, n }),
                    _ => Err("selection combining has a closed form only for Rayleigh or IID Hoyt branches".into()),
                },
                (true, BranchSpec::DualHop(d)) => Ok(AsymptoteScenario::DfOr {
                    hop1: d.hop1,
                    t_df: d.t_df,
                    n,
                }),
                (false, _) => Err("selection combining over non-identical non-Rayleigh branches".into()),
            }
        }
        CombinerKind::Ssc { policy, threshold } => match (iid, policy, b[0]) {
            (true, SwitchPolicy::Instant, BranchSpec::Direct(f)) => {
                let m = match f.family {
                    Family::Rayleigh => 1.0,
                    Family::Nakagami { m } => m,
                    Family::Hoyt { .. } => return Err("instant SSC over Hoyt branches".into()),
                };
                Ok(AsymptoteScenario::NakagamiSsc {
                    m,
                    t_bar: threshold / c.omega_ref,
                })
            }
            (true, SwitchPolicy::Deferred, BranchSpec::DualHop(d)) => Ok(AsymptoteScenario::DistributedSsc {
                hop1: d.hop1,
                t_df: d.t_df,
            }),
            (false, ..) => Err("SSC over non-identical branches".into()),
            _ => Err("this SSC policy and branch type".into()),
        },
    }
}

fn fmt_num(x: Option<f64>) -> String {
    match x {
        None => String::new(),
        Some(v) if v.is_infinite() => if v > 0.0 { "inf" } else { "-inf" }.into(),
        Some(v) => format!("{v}"),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_num(*x)))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn render_report(s: &Scenario, sim: Option<&SimSettings>, curves: &[CurveResult]) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "scenario: {}", s.name);
    if !s.description.is_empty() {
        let _ = writeln!(o, "description: {}", s.description);
    }
    let rel = if s.grid.absolute { "absolute" } else { "relative to the first branch mean SNR" };
    let (first, last) = (s.grid.points_db[0], s.grid.points_db[s.grid.points_db.len() - 1]);
    match s.grid.axis {
        Axis::Level => {
            let _ = writeln!(o, "grid: {} levels, {first} dB to {last} dB ({rel})", s.grid.points_db.len());
        }
        Axis::Threshold { outage_db, .. } => {
            let _ = writeln!(
                o,
                "grid: {} thresholds, {first} dB to {last} dB, outage level {outage_db} dB ({rel})",
                s.grid.points_db.len()
            );
        }
    }
    match sim {
        Some(x) => {
            let _ = writeln!(
                o,
                "simulation: {} samples per path after {} warmup, base seed {}",
                x.n_samples, x.warmup, x.seed
            );
        }
        None => {
            let _ = writeln!(o, "simulation: off");
        }
    }
    for c in curves {
        let _ = writeln!(o);
        let name = c.csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let label = if c.label.is_empty() { "curve" } else { &c.label };
        let _ = writeln!(o, "[{label}] -> {name}");
        match c.asymptote {
            Some(AsymptoteForm::PowerLaw { slope, intercept }) => {
                let _ = writeln!(o, "  asymptote: log10(N ts) = {slope} log10(u/omega) + {intercept}");
            }
            Some(AsymptoteForm::Horizontal { level }) => {
                let _ = writeln!(o, "  asymptote: N ts -> {level}");
            }
            None => {}
        }
        for f in &c.fallbacks {
            let _ = writeln!(o, "  fallback: {f}");
        }
        for n in &c.notes {
            let _ = writeln!(o, "  note: {n}");
        }
        if !c.insufficient.is_empty() {
            let pts: Vec<String> = c.insufficient.iter().map(|(d, n)| format!("{d} dB ({n})")).collect();
            let _ = writeln!(o, "  insufficient crossings (< {MIN_CROSSINGS}): {}", pts.join(", "));
        }
    }
    o
}
