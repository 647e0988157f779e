//! Path simulation of X(t), L_Φ(t) and X_Φ(t) = X(L_Φ(t)).
//!
//! Random streams: path i draws its diffusion noise (and a stationary initial
//! value) from ChaCha8 seeded with the master seed on stream 2i, and its
//! subordinator increments from stream 2i + 1. Results are independent of the
//! number of worker threads.

mod io;
mod stats;

pub use io::{read_nlpt, write_nlpt};
pub use stats::{
    continuous_remainder, correlation, estimate_correlation, histogram, jackknife_correlation, l1_to_density,
    loglog_slope, mean_se, subordinated_histogram, Histogram, Remainder,
};

use crate::bernstein::{BernsteinDescriptor, BernsteinKind, PhiSpec};
use crate::error::{Error, Result};
use crate::pearson::{FamilySpec, PearsonFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Start {
    Point {
        x: f64,
    },
    /// Initial value drawn from the stationary law m.
    Stationary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Euler–Maruyama with the diffusion coefficient evaluated at the state
    /// clamped into E, and reflection at finite boundaries.
    Euler,
    /// Exact Gaussian transitions (OU only).
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Pearson,
    InverseSubordinator,
    Nonlocal,
}

/// Simulation controls. Observations are taken at `n_obs` equal intervals
/// of [0, horizon], plus time 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub horizon: f64,
    pub n_obs: usize,
    pub dt: f64,
    pub dt_operational: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            horizon: 1.0,
            n_obs: 10,
            dt: 1e-3,
            dt_operational: 1e-3,
            n_paths: 10_000,
            seed: 0,
            scheme: Scheme::Euler,
        }
    }
}

impl SimParams {
    pub fn time_grid(&self) -> Vec<f64> {
        (0..=self.n_obs).map(|j| self.horizon * j as f64 / self.n_obs as f64).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) || self.n_obs == 0 {
            return Err(Error::Config("horizon must be positive and n_obs at least 1".into()));
        }
        if !(self.dt > 0.0) || !(self.dt_operational > 0.0) {
            return Err(Error::Config("time steps must be positive".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub process: ProcessKind,
    pub family: Option<FamilySpec>,
    pub phi: Option<PhiSpec>,
    pub start: Start,
    pub scheme: Scheme,
    pub dt: f64,
    pub dt_operational: Option<f64>,
    /// Reflections at a finite boundary, summed over paths.
    pub boundary_events: u64,
}

/// Simulated paths on a common observation grid, stored time-major:
/// the marginal at time index j is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet {
    time_grid: Vec<f64>,
    n_paths: usize,
    values: Vec<f64>,
    clock: Option<Vec<f64>>,
    master_seed: u64,
    provenance: Provenance,
}

impl TrajectorySet {
    pub(crate) fn from_parts(
        time_grid: Vec<f64>,
        n_paths: usize,
        values: Vec<f64>,
        clock: Option<Vec<f64>>,
        master_seed: u64,
        provenance: Provenance,
    ) -> Self {
        TrajectorySet { time_grid, n_paths, values, clock, master_seed, provenance }
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Values of all paths at time index j.
    pub fn marginal(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_paths..(j + 1) * self.n_paths]
    }

    /// L_Φ at time index j, for time-changed sets.
    pub fn clock(&self, j: usize) -> Option<&[f64]> {
        self.clock.as_ref().map(|c| &c[j * self.n_paths..(j + 1) * self.n_paths])
    }

    pub fn path(&self, i: usize) -> Vec<f64> {
        (0..self.time_grid.len()).map(|j| self.values[j * self.n_paths + i]).collect()
    }

    /// Index of the grid point equal to t (within 1e-9 relative).
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.time_grid
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::Domain(format!("time {t} is not on the observation grid")))
    }

    pub(crate) fn raw(&self) -> (&[f64], Option<&[f64]>) {
        (&self.values, self.clock.as_deref())
    }
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Draws from the stationary law m.
pub fn sample_stationary<R: Rng + ?Sized>(f: &PearsonFamily, rng: &mut R) -> f64 {
    match f.spec() {
        FamilySpec::Ou { mu, sigma, .. } => mu + sigma * rng.sample::<f64, _>(StandardNormal),
        FamilySpec::Cir { a, b, .. } => Gamma::new(b, 1.0 / a).expect("validated shape").sample(rng),
        FamilySpec::Jacobi { a, b, .. } => 2.0 * Beta::new(b + 1.0, a + 1.0).expect("validated").sample(rng) - 1.0,
        _ => {
            let u: f64 = rng.random();
            f.quantile(u.clamp(1e-15, 1.0 - 1e-15))
        }
    }
}

/// Advances a Pearson path over operational durations.
struct Stepper<'a> {
    f: &'a PearsonFamily,
    dt: f64,
    exact: Option<(f64, f64, f64)>,
}

impl<'a> Stepper<'a> {
    fn new(f: &'a PearsonFamily, p: &SimParams) -> Result<Self> {
        let exact = match (p.scheme, f.spec()) {
            (Scheme::Exact, FamilySpec::Ou { theta, mu, sigma }) => Some((theta, mu, sigma)),
            (Scheme::Exact, _) => return Err(Error::Config("the exact scheme is available for OU only".into())),
            (Scheme::Euler, _) => None,
        };
        if exact.is_none() && p.dt * f.theta() >= 0.1 {
            return Err(Error::Config(format!("step dt = {} violates dt*theta < 0.1 (theta = {})", p.dt, f.theta())));
        }
        Ok(Stepper { f, dt: p.dt, exact })
    }

    fn advance<R: Rng + ?Sized>(&self, mut x: f64, h: f64, rng: &mut R, events: &mut u64) -> f64 {
        if h <= 0.0 {
            return x;
        }
        if let Some((theta, mu, sigma)) = self.exact {
            let e = (-theta * h).exp();
            let sd = sigma * (-(-2.0 * theta * h).exp_m1()).sqrt();
            return mu + (x - mu) * e + sd * rng.sample::<f64, _>(StandardNormal);
        }
        let (lo, hi) = self.f.interval();
        let n = (h / self.dt - 1e-9).ceil().max(1.0) as usize;
        let hs = h / n as f64;
        let sq = (2.0 * hs).sqrt();
        for _ in 0..n {
            let d = self.f.diffusion(x.clamp(lo, hi)).max(0.0);
            let z: f64 = rng.sample(StandardNormal);
            x += self.f.drift(x) * hs + sq * d.sqrt() * z;
            if x <= lo || x >= hi {
                *events += 1;
                if x <= lo {
                    x = 2.0 * lo - x;
                }
                if x >= hi {
                    x = 2.0 * hi - x;
                }
                if !(x > lo && x < hi) {
                    x = if hi.is_finite() && lo.is_finite() {
                        0.5 * (lo + hi)
                    } else {
                        lo.max(-hi).abs().min(1.0) + lo.max(0.0)
                    };
                }
            }
        }
        x
    }
}

/// Paths of the classical diffusion X on the observation grid.
pub fn simulate_pearson(f: &PearsonFamily, start: Start, p: &SimParams) -> Result<TrajectorySet> {
    p.validate()?;
    check_start(f, start)?;
    let stepper = Stepper::new(f, p)?;
    let grid = p.time_grid();
    let rows: Vec<(Vec<f64>, u64)> = (0..p.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(p.seed, 2 * i as u64);
            let mut x = initial(f, start, &mut rng);
            let mut ev = 0;
            let mut out = Vec::with_capacity(grid.len());
            out.push(x);
            for w in grid.windows(2) {
                x = stepper.advance(x, w[1] - w[0], &mut rng, &mut ev);
                out.push(x);
            }
            (out, ev)
        })
        .collect();
    let events = rows.iter().map(|r| r.1).sum();
    let prov = Provenance {
        process: ProcessKind::Pearson,
        family: Some(f.spec()),
        phi: None,
        start,
        scheme: p.scheme,
        dt: p.dt,
        dt_operational: None,
        boundary_events: events,
    };
    Ok(TrajectorySet::from_parts(grid.clone(), p.n_paths, transpose(&rows, grid.len(), |r| &r.0), None, p.seed, prov))
}

fn check_start(f: &PearsonFamily, start: Start) -> Result<()> {
    if let Start::Point { x } = start {
        if !f.contains(x) {
            return Err(Error::Domain(format!("initial point {x} lies outside the state space")));
        }
    }
    Ok(())
}

fn initial<R: Rng + ?Sized>(f: &PearsonFamily, start: Start, rng: &mut R) -> f64 {
    match start {
        Start::Point { x } => x,
        Start::Stationary => sample_stationary(f, rng),
    }
}

fn transpose<T>(rows: &[T], len: usize, get: impl Fn(&T) -> &Vec<f64>) -> Vec<f64> {
    let n = rows.len();
    let mut out = vec![0.0; n * len];
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in get(r).iter().enumerate() {
            out[j * n + i] = *v;
        }
    }
    out
}

/// Positive α-stable variable with E e^{−λS} = e^{−λ^α} (Kanter's form of
/// the Chambers–Mallows–Stuck method).
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = loop {
        let u: f64 = rng.random::<f64>() * PI;
        if u > 0.0 {
            break u;
        }
    };
    let e: f64 = rng.sample(Exp1);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = ((1.0 - alpha) * u).sin() / e;
    a * b.powf((1.0 - alpha) / alpha)
}

/// Increment of σ_Φ over an operational step dy.
struct Increment {
    kind: IncKind,
    dy: f64,
}

enum IncKind {
    Stable { alpha: f64, scale: f64 },
    Tempered { alpha: f64, theta: f64, scale: f64 },
    Gamma(Gamma<f64>),
    Geometric { alpha: f64, g: Gamma<f64> },
}

impl Increment {
    fn new(desc: &BernsteinDescriptor, dy: f64) -> Result<Self> {
        let kind = match *desc.kind() {
            BernsteinKind::Stable { alpha } => IncKind::Stable { alpha, scale: dy.powf(1.0 / alpha) },
            BernsteinKind::TemperedStable { alpha, theta } => {
                IncKind::Tempered { alpha, theta, scale: dy.powf(1.0 / alpha) }
            }
            BernsteinKind::Gamma => IncKind::Gamma(Gamma::new(dy, 1.0).map_err(|e| Error::Config(e.to_string()))?),
            BernsteinKind::GeometricStable { alpha } => {
                IncKind::Geometric { alpha, g: Gamma::new(dy, 1.0).map_err(|e| Error::Config(e.to_string()))? }
            }
            BernsteinKind::Custom(_) => {
                return Err(Error::Unsupported("no increment sampler for a custom Levy measure".into()))
            }
        };
        Ok(Increment { kind, dy })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            IncKind::Stable { alpha, scale } => scale * positive_stable(*alpha, rng),
            IncKind::Tempered { alpha, theta, scale } => loop {
                // exponential tilting by rejection
                let s = scale * positive_stable(*alpha, rng);
                if rng.random::<f64>() < (-theta * s).exp() {
                    break s;
                }
            },
            IncKind::Gamma(g) => g.sample(rng),
            IncKind::Geometric { alpha, g } => {
                let w = g.sample(rng);
                if w == 0.0 {
                    0.0
                } else {
                    w.powf(1.0 / alpha) * positive_stable(*alpha, rng)
                }
            }
        }
    }
}

/// L_Φ on the observation times: σ_Φ is simulated on the operational grid
/// and each first passage is placed at the midpoint of its step.
fn inverse_path<R: Rng + ?Sized>(inc: &Increment, obs: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(obs.len());
    let mut j = 0;
    while j < obs.len() && obs[j] <= 0.0 {
        out.push(0.0);
        j += 1;
    }
    let (mut y, mut sigma) = (0.0f64, 0.0f64);
    let mut steps = 0u64;
    while j < obs.len() {
        sigma += inc.draw(rng);
        y += inc.dy;
        steps += 1;
        while j < obs.len() && sigma > obs[j] {
            out.push(y - 0.5 * inc.dy);
            j += 1;
        }
        if steps > 500_000_000 {
            return Err(Error::Numeric("subordinator did not pass the horizon".into()));
        }
    }
    Ok(out)
}

/// Paths of L_Φ on the observation grid.
pub fn simulate_inverse_subordinator(desc: &BernsteinDescriptor, p: &SimParams) -> Result<TrajectorySet> {
    p.validate()?;
    let inc = Increment::new(desc, p.dt_operational)?;
    let grid = p.time_grid();
    let rows: Vec<Result<Vec<f64>>> = (0..p.n_paths)
        .into_par_iter()
        .map(|i| inverse_path(&inc, &grid, &mut path_rng(p.seed, 2 * i as u64 + 1)))
        .collect();
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let prov = Provenance {
        process: ProcessKind::InverseSubordinator,
        family: None,
        phi: desc.spec(),
        start: Start::Point { x: 0.0 },
        scheme: p.scheme,
        dt: p.dt_operational,
        dt_operational: Some(p.dt_operational),
        boundary_events: 0,
    };
    Ok(TrajectorySet::from_parts(grid.clone(), p.n_paths, transpose(&rows, grid.len(), |r| r), None, p.seed, prov))
}

/// Paths of X_Φ(t) = X(L_Φ(t)). The X path is advanced through the sorted
/// clock values of its own L path, so trapping periods keep X fixed.
pub fn simulate_nonlocal(
    f: &PearsonFamily,
    desc: &BernsteinDescriptor,
    start: Start,
    p: &SimParams,
) -> Result<TrajectorySet> {
    p.validate()?;
    check_start(f, start)?;
    let stepper = Stepper::new(f, p)?;
    let inc = Increment::new(desc, p.dt_operational)?;
    let grid = p.time_grid();
    // per path: X values, clock values, boundary events
    type Row = (Vec<f64>, Vec<f64>, u64);
    let rows: Vec<Result<Row>> = (0..p.n_paths)
        .into_par_iter()
        .map(|i| {
            let clock = inverse_path(&inc, &grid, &mut path_rng(p.seed, 2 * i as u64 + 1))?;
            let mut rng = path_rng(p.seed, 2 * i as u64);
            let mut x = initial(f, start, &mut rng);
            let mut s = 0.0;
            let mut ev = 0;
            let mut out = Vec::with_capacity(grid.len());
            for &l in &clock {
                x = stepper.advance(x, l - s, &mut rng, &mut ev);
                s = s.max(l);
                out.push(x);
            }
            Ok((out, clock, ev))
        })
        .collect();
    let rows: Vec<(Vec<f64>, Vec<f64>, u64)> = rows.into_iter().collect::<Result<_>>()?;
    let prov = Provenance {
        process: ProcessKind::Nonlocal,
        family: Some(f.spec()),
        phi: desc.spec(),
        start,
        scheme: p.scheme,
        dt: p.dt,
        dt_operational: Some(p.dt_operational),
        boundary_events: rows.iter().map(|r| r.2).sum(),
    };
    let values = transpose(&rows, grid.len(), |r| &r.0);
    let clock = transpose(&rows, grid.len(), |r| &r.1);
    Ok(TrajectorySet::from_parts(grid, p.n_paths, values, Some(clock), p.seed, prov))
}
