//! Scenario files: parsing, sweep expansion and conversion to linear units.
//!
//! The grammar is documented in `docs/scenario-format.md`. Every dB field is
//! turned into a linear quantity here and nowhere else.

use serde::Deserialize;
use swdiv::combiner::{BranchMode, BranchSpec, CombinerSpec, SwitchPolicy};
use swdiv::fading::{clarke_rho, DistOptions, FadingSpec};
use swdiv::relay::DfBranchSpec;
use toml::{Table, Value};

use crate::error::{CliError, Result};

pub const DEFAULT_SAMPLES: usize = 10_000_000;
pub const DEFAULT_WARMUP: usize = 1000;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub curves: Vec<Curve>,
    pub grid: Grid,
    pub sim: Option<SimSettings>,
    pub output: OutputSettings,
}

/// One analytic curve: a fully specified combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// Empty without a sweep, otherwise `key=value` pairs.
    pub label: String,
    pub kind: KindDef,
    pub branches: Vec<BranchSpec>,
    /// Mean SNR of the first branch (its first hop for dual-hop branches);
    /// levels and thresholds are normalised by it.
    pub omega_ref: f64,
    pub numeric_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KindDef {
    Sc,
    /// `threshold` is linear and absolute; `None` when the grid sweeps it.
    Ssc { policy: SwitchPolicy, threshold: Option<f64> },
}

impl Curve {
    /// The combiner, with the switching threshold overridden if given.
    pub fn combiner(&self, threshold: Option<f64>) -> Result<CombinerSpec> {
        let spec = match self.kind {
            KindDef::Sc => CombinerSpec::sc(self.branches.clone()),
            KindDef::Ssc { policy, threshold: t } => {
                let t = threshold.or(t).ok_or_else(|| {
                    CliError::Validation("SSC needs combiner.threshold_db on a level grid".into())
                })?;
                let mode = if self.branches.windows(2).all(|w| w[0] == w[1]) {
                    BranchMode::IidAc
                } else {
                    BranchMode::InidTi
                };
                CombinerSpec::ssc(policy, t, self.branches.clone(), mode)
            }
        };
        let spec = if self.numeric_fallback {
            spec.with_options(DistOptions::default().with_numeric_fallback())
        } else {
            spec
        };
        spec.validate()
            .map_err(|e| CliError::Validation(format!("{}: {e}", self.display_label())))?;
        Ok(spec)
    }

    pub fn display_label(&self) -> &str {
        if self.label.is_empty() {
            "scenario"
        } else {
            &self.label
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// Grid points are output levels.
    Level,
    /// Grid points are switching thresholds, statistics taken at `outage`.
    Threshold { outage_db: f64, outage: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axis: Axis,
    pub points_db: Vec<f64>,
    pub points: Vec<f64>,
    /// Points and outage level are absolute rather than relative to Ω.
    pub absolute: bool,
}

impl Grid {
    /// Absolute linear values of the grid points for a curve.
    pub fn scaled(&self, curve: &Curve) -> Vec<f64> {
        let s = self.scale(curve);
        self.points.iter().map(|p| p * s).collect()
    }

    pub fn outage(&self, curve: &Curve) -> Option<f64> {
        match self.axis {
            Axis::Level => None,
            Axis::Threshold { outage, .. } => Some(outage * self.scale(curve)),
        }
    }

    fn scale(&self, curve: &Curve) -> f64 {
        if self.absolute {
            1.0
        } else {
            curve.omega_ref
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub n_samples: usize,
    pub seed: u64,
    pub warmup: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub stem: String,
    pub asymptote: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: String,
    description: Option<String>,
    combiner: RawCombiner,
    branch: Vec<RawBranch>,
    grid: RawGrid,
    #[allow(dead_code)]
    sweep: Option<Table>,
    sim: Option<RawSim>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCombiner {
    kind: String,
    policy: Option<String>,
    threshold_db: Option<f64>,
    branches: Option<usize>,
    #[serde(default)]
    numeric_fallback: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    family: String,
    m: Option<f64>,
    q: Option<f64>,
    omega_db: Option<f64>,
    fd_ts: Option<f64>,
    rho: Option<f64>,
    relay_threshold_db: Option<f64>,
    hop2: Option<RawHop>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHop {
    family: String,
    m: Option<f64>,
    q: Option<f64>,
    omega_db: Option<f64>,
    fd_ts: Option<f64>,
    rho: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    axis: Option<String>,
    from_db: Option<f64>,
    to_db: Option<f64>,
    step_db: Option<f64>,
    points_db: Option<Vec<f64>>,
    outage_db: Option<f64>,
    #[serde(default)]
    absolute: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    enabled: Option<bool>,
    n_samples: Option<usize>,
    seed: Option<u64>,
    warmup: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<String>,
    asymptote: Option<bool>,
}

/// Parse, expand and resolve a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let base: RawFile = toml::from_str(text).map_err(|e| de_error(text, &e))?;
    let mut table: Table = toml::from_str(text).map_err(|e| de_error(text, &e))?;
    let sweep = table.remove("sweep");

    let variants = match sweep {
        None => vec![(String::new(), table)],
        Some(Value::Table(s)) => expand_sweep(text, &table, &s)?,
        Some(_) => return Err(CliError::parse(locate(text, "sweep", 0, None), "sweep", "must be a table")),
    };

    let grid = resolve_grid(text, &base.grid)?;
    let mut curves = Vec::with_capacity(variants.len());
    for (label, t) in variants {
        let raw = RawFile::deserialize(Value::Table(t)).map_err(|e| {
            CliError::parse(locate(text, "sweep", 0, None), format!("sweep ({label})"), e.message().to_string())
        })?;
        curves.push(resolve_curve(text, label, &raw, &grid)?);
    }

    let sim = match &base.sim {
        Some(RawSim { enabled: Some(false), .. }) => None,
        Some(s) => Some(SimSettings {
            n_samples: s.n_samples.unwrap_or(DEFAULT_SAMPLES),
            seed: s.seed.unwrap_or(1),
            warmup: s.warmup.unwrap_or(DEFAULT_WARMUP),
        }),
        None => Some(SimSettings {
            n_samples: DEFAULT_SAMPLES,
            seed: 1,
            warmup: DEFAULT_WARMUP,
        }),
    };
    let output = OutputSettings {
        stem: base.output.as_ref().and_then(|o| o.csv.clone()).unwrap_or_else(|| base.name.clone()),
        asymptote: base.output.as_ref().and_then(|o| o.asymptote).unwrap_or(true),
    };
    if output.stem.is_empty() || output.stem.contains(['/', '\\']) {
        return Err(CliError::parse(
            locate(text, "output", 0, Some("csv")),
            "output.csv",
            "must be a plain file stem",
        ));
    }
    Ok(Scenario {
        name: base.name,
        description: base.description.unwrap_or_default(),
        curves,
        grid,
        sim,
        output,
    })
}

fn de_error(text: &str, e: &toml::de::Error) -> CliError {
    let span = e.span();
    let line = span.as_ref().map(|s| line_at(text, s.start));
    let field = span
        .and_then(|s| text.get(s))
        .and_then(|s| s.lines().next())
        .map(|s| s.trim().chars().take(40).collect::<String>())
        .unwrap_or_default();
    CliError::parse(line, field, e.message().trim().to_string())
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside the `index`-th occurrence of `section`, or of the
/// section header when the key is absent. Sections are named without
/// brackets; `""` is the top level. `[branch.hop2]` belongs to the latest
/// `[[branch]]`.
pub fn locate(text: &str, section: &str, index: usize, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut seen: std::collections::HashMap<String, usize> = Default::default();
    let mut header = if section.is_empty() && index == 0 { Some(1) } else { None };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_start_matches('[').split(']').next().unwrap_or("").trim().to_string();
            let top = name.split('.').next().unwrap_or("").to_string();
            if top == name {
                *seen.entry(name.clone()).or_insert(0) += 1;
            }
            current = name;
            if current == section && seen.get(section).copied().unwrap_or(0) == index + 1 {
                header = Some(i + 1);
            }
            continue;
        }
        let occurrence = seen.get(current.split('.').next().unwrap_or("")).copied().unwrap_or(0);
        let in_section = current == section && (section.is_empty() || occurrence == index + 1);
        if let (true, Some(k)) = (in_section, key) {
            let rest = line
                .strip_prefix(k)
                .or_else(|| line.strip_prefix(&format!("\"{k}\"")));
            if rest.is_some_and(|r| r.trim_start().starts_with('=')) {
                return Some(i + 1);
            }
        }
    }
    header
}

fn expand_sweep(text: &str, base: &Table, sweep: &Table) -> Result<Vec<(String, Table)>> {
    let mut variants = vec![(Vec::<String>::new(), base.clone())];
    for (key, values) in sweep {
        let line = locate(text, "sweep", 0, Some(key));
        let bad = |msg: &str| CliError::parse(line, format!("sweep.{key}"), msg.to_string());
        let paths: Vec<Vec<&str>> = key.split(',').map(|p| p.trim().split('.').collect()).collect();
        if paths.iter().any(|p| !matches!(p[0], "combiner" | "branch") || p.len() < 2) {
            return Err(bad("only combiner.* and branch.* fields can be swept"));
        }
        let Value::Array(values) = values else {
            return Err(bad("must be an array of values"));
        };
        if values.is_empty() {
            return Err(bad("must list at least one value"));
        }
        let mut next = Vec::with_capacity(variants.len() * values.len());
        for (labels, table) in &variants {
            for v in values {
                let parts: Vec<Value> = if paths.len() == 1 {
                    vec![v.clone()]
                } else {
                    match v {
                        Value::Array(a) if a.len() == paths.len() => a.clone(),
                        _ => return Err(bad(&format!("each entry must be an array of {} values", paths.len()))),
                    }
                };
                let mut t = Value::Table(table.clone());
                let mut labels = labels.clone();
                for (path, part) in paths.iter().zip(parts) {
                    labels.push(format!("{}={}", path.last().unwrap(), part));
                    set_path(&mut t, path, part).map_err(|m| bad(&m))?;
                }
                let Value::Table(t) = t else { unreachable!() };
                next.push((labels, t));
            }
        }
        variants = next;
    }
    Ok(variants.into_iter().map(|(l, t)| (l.join(","), t)).collect())
}

/// Set a dotted path; a non-numeric segment applied to an array sets it on
/// every element. Setting `fd_ts` clears `rho` and vice versa.
fn set_path(v: &mut Value, path: &[&str], new: Value) -> std::result::Result<(), String> {
    let (head, rest) = path.split_first().expect("non-empty path");
    match v {
        Value::Array(items) => {
            if let Ok(i) = head.parse::<usize>() {
                let len = items.len();
                let item = items
                    .get_mut(i)
                    .ok_or_else(|| format!("index {i} out of range ({len} entries)"))?;
                return if rest.is_empty() {
                    Err("cannot replace a whole array entry".into())
                } else {
                    set_path(item, rest, new)
                };
            }
            items.iter_mut().try_for_each(|item| set_path(item, path, new.clone()))
        }
        Value::Table(t) => {
            if rest.is_empty() {
                match *head {
                    "fd_ts" => drop(t.remove("rho")),
                    "rho" => drop(t.remove("fd_ts")),
                    _ => {}
                }
                t.insert(head.to_string(), new);
                Ok(())
            } else {
                let child = t.get_mut(*head).ok_or_else(|| format!("no field '{head}' to sweep into"))?;
                set_path(child, rest, new)
            }
        }
        _ => Err(format!("'{head}' is not inside a table")),
    }
}

fn resolve_grid(text: &str, g: &RawGrid) -> Result<Grid> {
    let points_db = match (&g.points_db, g.from_db, g.to_db, g.step_db) {
        (Some(p), None, None, None) => p.clone(),
        (None, Some(from), Some(to), Some(step)) => {
            if !(step > 0.0) || !step.is_finite() {
                return Err(CliError::Validation(format!("grid step must be > 0, got {step}")));
            }
            if !from.is_finite() || !to.is_finite() {
                return Err(CliError::Validation("grid bounds must be finite".into()));
            }
            let n = ((to - from) / step + 1e-9).floor();
            if n < 0.0 {
                Vec::new()
            } else {
                (0..=n as usize).map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9).collect()
            }
        }
        _ => {
            return Err(CliError::parse(
                locate(text, "grid", 0, None),
                "grid",
                "give either points_db or all of from_db, to_db, step_db",
            ))
        }
    };
    if points_db.is_empty() {
        return Err(CliError::Validation("grid is empty".into()));
    }
    if points_db.iter().any(|p| !p.is_finite()) {
        return Err(CliError::Validation("grid points must be finite".into()));
    }
    if points_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Validation("grid points must be strictly increasing".into()));
    }
    let axis = match g.axis.as_deref().unwrap_or("level") {
        "level" => {
            if g.outage_db.is_some() {
                return Err(CliError::parse(
                    locate(text, "grid", 0, Some("outage_db")),
                    "grid.outage_db",
                    "only meaningful with axis = \"threshold\"",
                ));
            }
            Axis::Level
        }
        "threshold" => {
            let outage_db = g.outage_db.ok_or_else(|| {
                CliError::parse(locate(text, "grid", 0, Some("axis")), "grid.outage_db", "required with axis = \"threshold\"")
            })?;
            if !outage_db.is_finite() {
                return Err(CliError::Validation("outage level must be finite".into()));
            }
            Axis::Threshold {
                outage_db,
                outage: db_to_linear(outage_db),
            }
        }
        other => {
            return Err(CliError::parse(
                locate(text, "grid", 0, Some("axis")),
                "grid.axis",
                format!("expected \"level\" or \"threshold\", got \"{other}\""),
            ))
        }
    };
    Ok(Grid {
        axis,
        points: points_db.iter().map(|&d| db_to_linear(d)).collect(),
        points_db,
        absolute: g.absolute,
    })
}

fn resolve_curve(text: &str, label: String, raw: &RawFile, grid: &Grid) -> Result<Curve> {
    let c = &raw.combiner;
    let cline = |k: &str| locate(text, "combiner", 0, Some(k));
    let n = match (c.branches, raw.branch.len()) {
        (_, 0) => return Err(CliError::parse(None, "branch", "at least one [[branch]] is required")),
        (Some(n), 1) => n,
        (None, k) => k,
        (Some(_), _) => {
            return Err(CliError::parse(
                cline("branches"),
                "combiner.branches",
                "only allowed with a single [[branch]], which it replicates",
            ))
        }
    };
    if n < 2 {
        return Err(CliError::Validation(format!("a combiner needs at least 2 branches, got {n}")));
    }

    let mut branches = Vec::with_capacity(raw.branch.len());
    for (i, b) in raw.branch.iter().enumerate() {
        branches.push(resolve_branch(text, i, b)?);
    }
    if branches.len() == 1 {
        branches = vec![branches[0]; n];
    }
    let omega_ref = match branches[0] {
        BranchSpec::Direct(f) => f.omega,
        BranchSpec::DualHop(d) => d.hop1.omega,
    };

    let kind = match c.kind.as_str() {
        "sc" => {
            if c.policy.is_some() || c.threshold_db.is_some() {
                return Err(CliError::parse(
                    cline("policy").or(cline("threshold_db")),
                    "combiner",
                    "policy and threshold_db apply to kind = \"ssc\" only",
                ));
            }
            if matches!(grid.axis, Axis::Threshold { .. }) {
                return Err(CliError::Validation("a threshold grid needs kind = \"ssc\"".into()));
            }
            KindDef::Sc
        }
        "ssc" => {
            let policy = match c.policy.as_deref().unwrap_or("instant") {
                "instant" => SwitchPolicy::Instant,
                "deferred" => SwitchPolicy::Deferred,
                other => {
                    return Err(CliError::parse(
                        cline("policy"),
                        "combiner.policy",
                        format!("expected \"instant\" or \"deferred\", got \"{other}\""),
                    ))
                }
            };
            let threshold = match (c.threshold_db, &grid.axis) {
                (Some(t), Axis::Level) => Some(db_to_linear(t) * omega_ref),
                (None, Axis::Level) => {
                    return Err(CliError::parse(
                        locate(text, "combiner", 0, None),
                        "combiner.threshold_db",
                        "required for kind = \"ssc\"",
                    ))
                }
                (Some(_), Axis::Threshold { .. }) => {
                    return Err(CliError::parse(
                        cline("threshold_db"),
                        "combiner.threshold_db",
                        "the threshold grid supplies the threshold",
                    ))
                }
                (None, Axis::Threshold { .. }) => None,
            };
            KindDef::Ssc { policy, threshold }
        }
        other => {
            return Err(CliError::parse(
                cline("kind"),
                "combiner.kind",
                format!("expected \"sc\" or \"ssc\", got \"{other}\""),
            ))
        }
    };

    let curve = Curve {
        label,
        kind,
        branches,
        omega_ref,
        numeric_fallback: c.numeric_fallback,
    };
    let probe = match grid.axis {
        Axis::Level => None,
        Axis::Threshold { .. } => Some(grid.scaled(&curve)[0]),
    };
    curve.combiner(probe)?;
    Ok(curve)
}

fn resolve_branch(text: &str, i: usize, b: &RawBranch) -> Result<BranchSpec> {
    let hop1 = RawHop {
        family: b.family.clone(),
        m: b.m,
        q: b.q,
        omega_db: b.omega_db,
        fd_ts: b.fd_ts,
        rho: b.rho,
    };
    let hop1_spec = resolve_hop(text, "branch", i, &format!("branch[{i}]"), &hop1)?;
    match (b.relay_threshold_db, &b.hop2) {
        (None, Some(_)) => Err(CliError::parse(
            locate(text, "branch.hop2", i, None),
            format!("branch[{i}].hop2"),
            "a second hop needs relay_threshold_db",
        )),
        (None, None) => Ok(BranchSpec::Direct(hop1_spec)),
        (Some(t), hop2) => {
            let hop2_spec = match hop2 {
                Some(h) => resolve_hop(text, "branch.hop2", i, &format!("branch[{i}].hop2"), h)?,
                None => hop1_spec,
            };
            let spec = DfBranchSpec {
                hop1: hop1_spec,
                hop2: hop2_spec,
                t_df: db_to_linear(t) * hop1_spec.omega,
            };
            spec.validate().map_err(|e| {
                CliError::parse(locate(text, "branch", i, Some("relay_threshold_db")), format!("branch[{i}]"), e.to_string())
            })?;
            Ok(BranchSpec::DualHop(spec))
        }
    }
}

fn resolve_hop(text: &str, section: &str, i: usize, field: &str, h: &RawHop) -> Result<FadingSpec> {
    let err = |key: &str, msg: String| CliError::parse(locate(text, section, i, Some(key)), format!("{field}.{key}"), msg);
    let omega = db_to_linear(h.omega_db.unwrap_or(0.0));
    let rho = match (h.fd_ts, h.rho) {
        (Some(_), Some(_)) => return Err(err("rho", "give fd_ts or rho, not both".into())),
        (Some(x), None) => {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(err("fd_ts", format!("must be finite and >= 0, got {x}")));
            }
            clarke_rho(x)
        }
        (None, Some(r)) => r,
        (None, None) => 0.0,
    };
    let no = |key: &str, v: Option<f64>| match v {
        Some(_) => Err(err(key, format!("not a parameter of family \"{}\"", h.family))),
        None => Ok(()),
    };
    let spec = match h.family.as_str() {
        "rayleigh" => {
            no("m", h.m)?;
            no("q", h.q)?;
            FadingSpec::rayleigh(omega, rho)
        }
        "nakagami" => {
            no("q", h.q)?;
            let m = h.m.ok_or_else(|| err("family", "nakagami needs m".into()))?;
            FadingSpec::nakagami(m, omega, rho)
        }
        "hoyt" => {
            no("m", h.m)?;
            let q = h.q.ok_or_else(|| err("family", "hoyt needs q".into()))?;
            FadingSpec::hoyt(q, omega, rho)
        }
        other => {
            return Err(err(
                "family",
                format!("expected \"rayleigh\", \"nakagami\" or \"hoyt\", got \"{other}\""),
            ))
        }
    };
    spec.validate().map_err(|e| err("family", e.to_string()))?;
    Ok(spec)
}
