//! Batch front-end. A job is a [`JobConfig`], built from subcommand flags,
//! a JSON file, or both (flags override the file).
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 spectrum-bound or domain error.

use crate::bernstein::{BernsteinDescriptor, PhiSpec};
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_correlation, histogram, mean_se, simulate_inverse_subordinator, simulate_nonlocal, simulate_pearson,
    write_nlpt, Scheme, SimParams, Start, TrajectorySet,
};
use crate::pearson::{make_family, FamilySpec, PearsonFamily};
use crate::relaxation::RelaxationEvaluator;
use crate::solver::{CoefficientExpansion, DatumSpec, Mode, SolutionField};
use crate::spectral::{SpectralExpansion, SpectralOptions};
use crate::subordination::RenewalFunction;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    PhiEval,
    Relax,
    Density,
    Solve,
    Simulate,
    Correlation,
    Classify,
}

/// Grid text: `a:b:n` (n equally spaced points), a comma list, or one value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid(pub String);

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = || Error::Config(format!("bad grid '{}'", self.0));
        let s = self.0.trim();
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
            let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
            return match n {
                0 => Err(bad()),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            };
        }
        s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Grid>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numeric {
    /// Absolute truncation target for spectral densities.
    pub tail_tol: f64,
    /// Largest number of discrete spectral terms.
    pub max_terms: usize,
    /// Upper end of the continuous-spectrum integral in κ.
    pub kappa_max: f64,
    /// Expansion length for the solver.
    pub n_trunc: usize,
}

impl Default for Numeric {
    fn default() -> Self {
        let s = SpectralOptions::default();
        Numeric { tail_tol: s.tail_tol, max_terms: s.max_terms, kappa_max: s.kappa_max, n_trunc: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub mode: Mode,
    pub datum: DatumSpec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { mode: Mode::Backward, datum: DatumSpec::Basis { n: 1 } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub horizon: f64,
    pub n_obs: usize,
    pub dt: f64,
    pub dt_operational: f64,
    pub n_paths: usize,
    pub scheme: Scheme,
    /// Start from the stationary law instead of x0.
    pub stationary: bool,
    /// Histogram of the final marginal instead of the moment summary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    /// Binary trajectory file (with a JSON sidecar).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<PathBuf>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let p = SimParams::default();
        SimulationConfig {
            horizon: p.horizon,
            n_obs: p.n_obs,
            dt: p.dt,
            dt_operational: p.dt_operational,
            n_paths: p.n_paths,
            scheme: p.scheme,
            stationary: false,
            bins: None,
            range: None,
            trajectories: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    /// Earlier time of a correlation pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default)]
    pub numeric: Numeric,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl JobConfig {
    pub fn new(command: CommandKind) -> Self {
        JobConfig {
            command,
            family: None,
            phi: None,
            grids: Grids::default(),
            x0: None,
            s: None,
            numeric: Numeric::default(),
            solve: SolveConfig::default(),
            simulation: SimulationConfig::default(),
            seed: 0,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid job configuration: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("job configuration serializes")
    }
}

#[derive(Parser, Debug)]
#[command(name = "nlpearson", version, about = "Time-changed Pearson diffusions: densities, solutions, simulation")]
struct Cli {
    /// Job configuration file (JSON); flags given after the subcommand override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved job as JSON and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "NLP_THREADS")]
    threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Family descriptor, e.g. '{"kind":"ou","theta":1,"mu":0,"sigma":1}'.
    #[arg(long)]
    family: Option<String>,
    /// Bernstein function descriptor, e.g. '{"kind":"stable","alpha":0.5}'.
    #[arg(long)]
    phi: Option<String>,
    /// Times: a:b:n, a comma list or a single value.
    #[arg(long = "t-grid", visible_alias = "t", allow_hyphen_values = true)]
    t: Option<String>,
    /// State points, same syntax as the time grid.
    #[arg(long = "x-grid", allow_hyphen_values = true)]
    x: Option<String>,
    /// Spectral parameters λ, same syntax as the time grid.
    #[arg(long = "lambda-grid", visible_alias = "lambda", allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Starting point (default: stationary mean).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Master seed for simulation.
    #[arg(long)]
    seed: Option<u64>,
    /// Absolute truncation target for spectral densities.
    #[arg(long)]
    tail_tol: Option<f64>,
    /// Largest number of discrete spectral terms.
    #[arg(long)]
    max_terms: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SimFlags {
    /// Final observation time.
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of equal observation intervals on [0, horizon].
    #[arg(long)]
    n_obs: Option<usize>,
    /// SDE step.
    #[arg(long)]
    dt: Option<f64>,
    /// Step of the subordinator in operational time.
    #[arg(long)]
    dt_operational: Option<f64>,
    /// Number of paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Time stepping for X (exact is OU only).
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Start from the stationary law instead of x0.
    #[arg(long)]
    stationary: bool,
    /// Print a histogram of the final marginal with this many bins.
    #[arg(long)]
    bins: Option<usize>,
    /// Histogram range lo:hi.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// Also write all paths to this binary file (plus a JSON sidecar).
    #[arg(long)]
    trajectories: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Euler,
    Exact,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Backward,
    Forward,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Φ(λ) on a λ grid.
    PhiEval {
        #[command(flatten)]
        c: Common,
    },
    /// Relaxation eigenfunction ℰ_Φ(t;−λ) on t and λ grids.
    Relax {
        #[command(flatten)]
        c: Common,
    },
    /// Transition density p_Φ(t,x;x0); classical when no --phi is given.
    Density {
        #[command(flatten)]
        c: Common,
    },
    /// Backward or forward Kolmogorov solution for an L² datum.
    Solve {
        #[command(flatten)]
        c: Common,
        /// Backward (u(t,y) = E g) or forward (densities).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Datum: Qn or a JSON descriptor.
        #[arg(long)]
        datum: Option<String>,
        /// Expansion length.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Monte Carlo paths of X, L_Φ or X_Φ.
    Simulate {
        #[command(flatten)]
        c: Common,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Stationary correlation Corr(X_Φ(t), X_Φ(s)): estimate and formula.
    Correlation {
        #[command(flatten)]
        c: Common,
        #[command(flatten)]
        sim: SimFlags,
        /// Earlier time of the pair (default 0).
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
    },
    /// Long- or short-range dependence of the time-changed process.
    Classify {
        #[command(flatten)]
        c: Common,
    },
}

fn parse_json<T: for<'de> Deserialize<'de>>(what: &str, s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Config(format!("bad {what} descriptor: {e}")))
}

fn apply_common(job: &mut JobConfig, c: &Common) -> Result<()> {
    if let Some(f) = &c.family {
        job.family = Some(parse_json("family", f)?);
    }
    if let Some(p) = &c.phi {
        job.phi = Some(parse_json("phi", p)?);
    }
    if let Some(t) = &c.t {
        job.grids.t = Some(Grid(t.clone()));
    }
    if let Some(x) = &c.x {
        job.grids.x = Some(Grid(x.clone()));
    }
    if let Some(l) = &c.lambda {
        job.grids.lambda = Some(Grid(l.clone()));
    }
    if c.x0.is_some() {
        job.x0 = c.x0;
    }
    if let Some(s) = c.seed {
        job.seed = s;
    }
    if let Some(v) = c.tail_tol {
        job.numeric.tail_tol = v;
    }
    if let Some(v) = c.max_terms {
        job.numeric.max_terms = v;
    }
    Ok(())
}

fn apply_sim(job: &mut JobConfig, s: &SimFlags) -> Result<()> {
    let c = &mut job.simulation;
    if let Some(v) = s.horizon {
        c.horizon = v;
    }
    if let Some(v) = s.n_obs {
        c.n_obs = v;
    }
    if let Some(v) = s.dt {
        c.dt = v;
    }
    if let Some(v) = s.dt_operational {
        c.dt_operational = v;
    }
    if let Some(v) = s.paths {
        c.n_paths = v;
    }
    if let Some(v) = s.scheme {
        c.scheme = match v {
            SchemeArg::Euler => Scheme::Euler,
            SchemeArg::Exact => Scheme::Exact,
        };
    }
    if s.stationary {
        c.stationary = true;
    }
    if s.bins.is_some() {
        c.bins = s.bins;
    }
    if let Some(r) = &s.range {
        let v = Grid(r.replace(':', ",")).values()?;
        if v.len() != 2 || !(v[1] > v[0]) {
            return Err(Error::Config(format!("bad range '{r}', expected lo:hi")));
        }
        c.range = Some([v[0], v[1]]);
    }
    if s.trajectories.is_some() {
        c.trajectories = s.trajectories.clone();
    }
    Ok(())
}

fn resolve(cli: &Cli) -> Result<JobConfig> {
    let base = match &cli.config {
        Some(p) => Some(JobConfig::from_json(&std::fs::read_to_string(p)?)?),
        None => None,
    };
    let kind = match (&cli.command, &base) {
        (Some(sub), _) => sub_kind(sub),
        (None, Some(b)) => b.command,
        (None, None) => return Err(Error::Config("a subcommand or --config is required".into())),
    };
    let mut job = match base {
        Some(b) if b.command == kind => b,
        Some(b) => {
            return Err(Error::Config(format!(
                "configuration is for '{}' but the subcommand is '{}'",
                kind_name(b.command),
                kind_name(kind)
            )))
        }
        None => JobConfig::new(kind),
    };
    match &cli.command {
        Some(Sub::PhiEval { c } | Sub::Relax { c } | Sub::Density { c } | Sub::Classify { c }) => {
            apply_common(&mut job, c)?
        }
        Some(Sub::Solve { c, mode, datum, n }) => {
            apply_common(&mut job, c)?;
            if let Some(m) = mode {
                job.solve.mode = match m {
                    ModeArg::Backward => Mode::Backward,
                    ModeArg::Forward => Mode::Forward,
                };
            }
            if let Some(d) = datum {
                job.solve.datum = DatumSpec::parse(d)?;
            }
            if let Some(n) = n {
                job.numeric.n_trunc = *n;
            }
        }
        Some(Sub::Simulate { c, sim }) => {
            apply_common(&mut job, c)?;
            apply_sim(&mut job, sim)?;
        }
        Some(Sub::Correlation { c, sim, s }) => {
            apply_common(&mut job, c)?;
            apply_sim(&mut job, sim)?;
            if s.is_some() {
                job.s = *s;
            }
        }
        None => {}
    }
    if cli.output.is_some() {
        job.output = cli.output.clone();
    }
    Ok(job)
}

fn sub_kind(s: &Sub) -> CommandKind {
    match s {
        Sub::PhiEval { .. } => CommandKind::PhiEval,
        Sub::Relax { .. } => CommandKind::Relax,
        Sub::Density { .. } => CommandKind::Density,
        Sub::Solve { .. } => CommandKind::Solve,
        Sub::Simulate { .. } => CommandKind::Simulate,
        Sub::Correlation { .. } => CommandKind::Correlation,
        Sub::Classify { .. } => CommandKind::Classify,
    }
}

fn kind_name(k: CommandKind) -> String {
    k.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

/// Default family when none is configured: OU with θ = 1, μ = 0, σ = 1.
fn family_of(job: &JobConfig) -> Result<PearsonFamily> {
    make_family(job.family.unwrap_or(FamilySpec::Ou { theta: 1.0, mu: 0.0, sigma: 1.0 }))
}

fn phi_of(job: &JobConfig) -> Result<Option<BernsteinDescriptor>> {
    job.phi.as_ref().map(BernsteinDescriptor::from_spec).transpose()
}

fn require_phi(job: &JobConfig) -> Result<BernsteinDescriptor> {
    phi_of(job)?.ok_or_else(|| Error::Config(format!("'{}' needs --phi", kind_name(job.command))))
}

fn grid(g: &Option<Grid>, default: &str) -> Result<Vec<f64>> {
    match g {
        Some(g) => g.values(),
        None => Grid(default.into()).values(),
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs a resolved job and returns its output text.
pub fn execute(job: &JobConfig) -> Result<String> {
    let mut out = String::new();
    match job.command {
        CommandKind::PhiEval => {
            let d = require_phi(job)?;
            out.push_str("lambda,phi\n");
            for l in grid(&job.grids.lambda, "0:10:11")? {
                writeln!(out, "{},{}", num(l), num(d.eval_phi(l)?)).unwrap();
            }
        }
        CommandKind::Relax => {
            let ev = RelaxationEvaluator::new(require_phi(job)?);
            let ls = grid(&job.grids.lambda, "1")?;
            out.push_str("t,lambda,value\n");
            for t in grid(&job.grids.t, "0:3:31")? {
                for (l, v) in ls.iter().zip(ev.eigenfunctions(t, &ls)?) {
                    writeln!(out, "{},{},{}", num(t), num(*l), num(v)).unwrap();
                }
            }
        }
        CommandKind::Density => {
            let f = family_of(job)?;
            let opts = SpectralOptions {
                tail_tol: job.numeric.tail_tol,
                max_terms: job.numeric.max_terms,
                kappa_max: job.numeric.kappa_max,
            };
            let se = SpectralExpansion::new(&f, phi_of(job)?, opts)?;
            let x0 = job.x0.unwrap_or_else(|| f.mean());
            let xs = match &job.grids.x {
                Some(g) => g.values()?,
                None => {
                    let (a, b) = (f.quantile(1e-3), f.quantile(1.0 - 1e-3));
                    (0..101).map(|i| a + (b - a) * i as f64 / 100.0).collect()
                }
            };
            out.push_str("t,x,x0,value,abs_err_bound\n");
            let mut clamped = 0;
            let mut omitted = false;
            for t in grid(&job.grids.t, "1")? {
                for p in se.density_grid(t, &xs, x0)? {
                    clamped += p.clamped as usize;
                    omitted |= p.remainder_omitted;
                    let b = p.bound.map(num).unwrap_or_else(|| "nan".into());
                    writeln!(out, "{},{},{},{},{}", num(t), num(p.x), num(x0), num(p.value), b).unwrap();
                }
                if t < 0.01 {
                    eprintln!("note: t = {t} is small; the series converges slowly there");
                }
            }
            if clamped > 0 {
                eprintln!("note: {clamped} slightly negative truncated values were set to zero");
            }
            if omitted {
                eprintln!("note: continuous spectral remainder not evaluated for this family (bound column is nan); `simulate --bins` estimates the full density");
            }
        }
        CommandKind::Solve => {
            let f = family_of(job)?;
            let phi = match phi_of(job)? {
                Some(p) => p,
                None => BernsteinDescriptor::stable(0.5)?,
            };
            let e = CoefficientExpansion::from_spec(&f, &job.solve.datum, job.numeric.n_trunc, job.solve.mode)?;
            if e.l2_tail() > 1e-8 {
                eprintln!("note: L2 truncation tail of the datum is {:.3e}", e.l2_tail());
            }
            let sf = SolutionField::new(e, phi);
            let xs = match &job.grids.x {
                Some(g) => g.values()?,
                None => {
                    let (a, b) = (f.quantile(1e-3), f.quantile(1.0 - 1e-3));
                    (0..61).map(|i| a + (b - a) * i as f64 / 60.0).collect()
                }
            };
            out.push_str("t,x,value\n");
            for t in grid(&job.grids.t, "0:2:5")? {
                for (x, v) in xs.iter().zip(sf.values(t, &xs)?) {
                    writeln!(out, "{},{},{}", num(t), num(*x), num(v)).unwrap();
                }
            }
        }
        CommandKind::Simulate => {
            let ts = simulate(job)?;
            if let Some(p) = &job.simulation.trajectories {
                write_nlpt(&ts, p)?;
            }
            let last = ts.time_grid().len() - 1;
            match job.simulation.bins {
                Some(bins) => {
                    let m = ts.marginal(last);
                    let [lo, hi] = job.simulation.range.unwrap_or_else(|| {
                        let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
                        let hi = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        [lo, hi + 1e-12 * hi.abs().max(1.0)]
                    });
                    let h = histogram(m, lo, hi, bins.max(1));
                    out.push_str("x_lo,x_hi,density\n");
                    for (e, d) in h.edges.windows(2).zip(&h.density) {
                        writeln!(out, "{},{},{}", num(e[0]), num(e[1]), num(*d)).unwrap();
                    }
                }
                None => {
                    out.push_str("t,mean,std_err\n");
                    for (j, t) in ts.time_grid().iter().enumerate() {
                        let (m, se) = mean_se(ts.marginal(j));
                        writeln!(out, "{},{},{}", num(*t), num(m), num(se)).unwrap();
                    }
                }
            }
        }
        CommandKind::Correlation => {
            let f = family_of(job)?;
            let phi = require_phi(job)?;
            let t = grid(&job.grids.t, "1")?;
            let s = job.s.unwrap_or(0.0);
            let mut j = job.clone();
            j.simulation.stationary = true;
            let horizon = t.iter().cloned().fold(s, f64::max);
            j.simulation.horizon = horizon;
            let ts = simulate_with(&j, &f, Some(&phi))?;
            let lambda1 = f.eigenvalue(1)?;
            let ev = RelaxationEvaluator::new(phi.clone());
            let renewal = RenewalFunction::new(phi, horizon.max(1e-3))?;
            out.push_str("t,s,estimate,std_err,theory\n");
            for t in t {
                let (r, se) = estimate_correlation(&ts, t, s)?;
                let th = ev.stationary_correlation(&renewal, lambda1, t, s)?;
                writeln!(out, "{},{},{},{},{}", num(t), num(s), num(r), num(se), num(th)).unwrap();
            }
        }
        CommandKind::Classify => {
            writeln!(out, "{}", require_phi(job)?.classify_dependence()).unwrap();
        }
    }
    Ok(out)
}

fn sim_params(job: &JobConfig) -> SimParams {
    let c = &job.simulation;
    SimParams {
        horizon: c.horizon,
        n_obs: c.n_obs,
        dt: c.dt,
        dt_operational: c.dt_operational,
        n_paths: c.n_paths,
        seed: job.seed,
        scheme: c.scheme,
    }
}

fn simulate_with(job: &JobConfig, f: &PearsonFamily, phi: Option<&BernsteinDescriptor>) -> Result<TrajectorySet> {
    let p = sim_params(job);
    let start = if job.simulation.stationary {
        Start::Stationary
    } else {
        Start::Point { x: job.x0.unwrap_or_else(|| f.mean()) }
    };
    match phi {
        Some(d) => simulate_nonlocal(f, d, start, &p),
        None => simulate_pearson(f, start, &p),
    }
}

/// Simulation job: X_Φ when both a family and Φ are given, X for a family
/// alone, and L_Φ for Φ alone.
fn simulate(job: &JobConfig) -> Result<TrajectorySet> {
    let phi = phi_of(job)?;
    match (&job.family, phi) {
        (None, Some(d)) => simulate_inverse_subordinator(&d, &sim_params(job)),
        (_, phi) => simulate_with(job, &family_of(job)?, phi.as_ref()),
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Parses arguments, runs the job and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let job = match resolve(&cli) {
        Ok(j) => j,
        Err(e) => return report(&e),
    };
    if cli.dump_config {
        println!("{}", job.to_json());
        return 0;
    }
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| execute(&job)),
            Err(e) => Err(Error::Config(format!("cannot build thread pool: {e}"))),
        },
        None => execute(&job),
    };
    let text = match result {
        Ok(t) => t,
        Err(e) => return report(&e),
    };
    let written = match &job.output {
        Some(p) => std::fs::write(p, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => report(&Error::Io(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(args: &[&str]) -> JobConfig {
        let cli = Cli::try_parse_from(std::iter::once("nlpearson").chain(args.iter().copied())).unwrap();
        resolve(&cli).unwrap()
    }

    #[test]
    fn grids() {
        assert_eq!(Grid("-3:3:4".into()).values().unwrap(), vec![-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(Grid("0.5, 1".into()).values().unwrap(), vec![0.5, 1.0]);
        assert_eq!(Grid("2".into()).values().unwrap(), vec![2.0]);
        assert!(Grid("1:2".into()).values().is_err());
    }

    #[test]
    fn dump_config_round_trips() {
        let j = job(&[
            "density",
            "--family",
            r#"{"kind":"cir","theta":1,"a":1,"b":2}"#,
            "--phi",
            r#"{"kind":"gamma"}"#,
            "--t",
            "0.5,1",
            "--x-grid",
            "0.1:4:5",
            "--x0",
            "1.5",
        ]);
        assert_eq!(JobConfig::from_json(&j.to_json()).unwrap(), j);
        let s = job(&["simulate", "--stationary", "--bins", "20", "--range", "-3:3", "--seed", "4"]);
        assert_eq!(JobConfig::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(JobConfig::from_json(r#"{"command":"classify","phi":{"kind":"gamma"},"colour":1}"#).is_err());
        assert!(JobConfig::from_json(r#"{"command":"classify","phi":{"kind":"gamma","alpha":1}}"#).is_err());
    }

    #[test]
    fn classify_and_solve() {
        assert_eq!(execute(&job(&["classify", "--phi", r#"{"kind":"gamma"}"#])).unwrap(), "short-range\n");
        let out =
            execute(&job(&["solve", "--mode", "backward", "--datum", "Q2", "--t", "0", "--x-grid", "-1:1:3"])).unwrap();
        let rows: Vec<Vec<f64>> =
            out.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        for r in rows {
            let q2 = (r[1] * r[1] - 1.0) / 2f64.sqrt();
            assert!((r[2] - q2).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["nlpearson", "classify", "--phi", r#"{"kind":"gamma"}"#, "-o", "/dev/null"]), 0);
        assert_eq!(run(["nlpearson", "classify", "--phi", r#"{"kind":"nope"}"#]), 2);
        assert_eq!(run(["nlpearson", "frobnicate"]), 2);
        assert_eq!(run(["nlpearson", "phi-eval", "--phi", r#"{"kind":"stable","alpha":1.5}"#]), 4);
        let student = r#"{"kind":"student","theta":1,"delta":1,"nu":6,"mu":0,"mu_prime":0}"#;
        assert_eq!(run(["nlpearson", "solve", "--family", student, "--datum", "Q5", "-o", "/dev/null"]), 4);
        assert_eq!(run(["nlpearson", "density", "--t", "-1", "-o", "/dev/null"]), 4);
    }
}
