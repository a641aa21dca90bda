//! Monte Carlo oracle: exact-increment paths, boundary-crossing detection and
//! crossing-time histograms.
//!
//! Every path draws from its own ChaCha8 stream (`seed`, stream = path index),
//! so results do not depend on how paths are split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::{DiffusionKind, DiffusionSpec, FptDensity};
use crate::moebius::Curve;
use crate::{Error, Result};

/// Past this value of `2 g₀ g₁ / Δ` the bridge crossing probability is below `e^{−40}`.
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MCConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub bridge_correction: bool,
    /// Number of parallel chunks.
    pub streams: usize,
    /// Histogram bins on `(0, horizon]`.
    pub bins: usize,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            dt: 1e-3,
            horizon: 5.0,
            seed: 1,
            bridge_correction: true,
            streams: 64,
            bins: 50,
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.horizon.is_finite() && self.dt < self.horizon) {
            return Err(Error::Config(format!(
                "need 0 < dt < horizon < ∞, got dt = {}, horizon = {}",
                self.dt, self.horizon
            )));
        }
        if self.streams == 0 || self.bins == 0 {
            return Err(Error::Config("streams and bins must be positive".into()));
        }
        Ok(())
    }

    /// `0, dt, 2dt, …` up to and including the horizon.
    pub fn uniform_grid(&self) -> Vec<f64> {
        let n = (self.horizon / self.dt).ceil() as usize;
        (0..=n).map(|k| (k as f64 * self.dt).min(self.horizon)).collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let cfg: Self = serde_json::from_value(v.clone())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Histogram estimate of a (possibly defective) crossing-time law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub bin_edges: Vec<f64>,
    pub bin_densities: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Fraction of paths not crossing by the horizon.
    pub defective_mass_estimate: f64,
    pub n_paths: usize,
}

impl DensityEstimate {
    /// Histogram of crossing times (`∞` marks a censored path) on `bins`
    /// equal bins over `(0, horizon]`.
    pub fn from_samples(samples: &[f64], horizon: f64, bins: usize) -> Result<Self> {
        if samples.is_empty() || bins == 0 || !(horizon > 0.0) {
            return Err(Error::Config("histogram needs samples, bins and a positive horizon".into()));
        }
        let width = horizon / bins as f64;
        let mut counts = vec![0usize; bins];
        let mut censored = 0usize;
        for &t in samples {
            if t > horizon || !t.is_finite() {
                censored += 1;
            } else {
                let k = ((t / width).ceil() as usize).clamp(1, bins) - 1;
                counts[k] += 1;
            }
        }
        let n = samples.len() as f64;
        let bin_edges = (0..=bins).map(|k| k as f64 * width).collect();
        let bin_densities = counts.iter().map(|&c| c as f64 / (n * width)).collect();
        let standard_errors = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                (p * (1.0 - p) / n).sqrt() / width
            })
            .collect();
        Ok(Self {
            bin_edges,
            bin_densities,
            standard_errors,
            defective_mass_estimate: censored as f64 / n,
            n_paths: samples.len(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,density,se\n");
        for k in 0..self.bin_densities.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                self.bin_edges[k], self.bin_edges[k + 1], self.bin_densities[k], self.standard_errors[k]
            ));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("estimate serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let e: Self = serde_json::from_value(v.clone())?;
        if e.bin_edges.len() != e.bin_densities.len() + 1 || e.bin_densities.len() != e.standard_errors.len() {
            return Err(Error::Config("inconsistent histogram lengths".into()));
        }
        Ok(e)
    }

    /// `Σ density·width + defect`, which is 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        let s: f64 = self
            .bin_densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        s + self.defective_mass_estimate
    }
}

/// Per-path RNG: one ChaCha8 stream per path index.
pub fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Markov dynamics advanced exactly between grid times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dynamics {
    /// `x + drift·t + B_t`.
    Brownian { drift: f64 },
    /// Bessel process of dimension `delta`, stepped through its square.
    Bessel { delta: f64 },
    /// `dU = −(λ/2) U dt + dB`.
    OrnsteinUhlenbeck { lambda: f64 },
}

impl Dynamics {
    pub fn from_spec(spec: &DiffusionSpec) -> Result<Self> {
        match spec.kind {
            DiffusionKind::Brownian => Ok(Dynamics::Brownian { drift: spec.y }),
            DiffusionKind::Bessel { delta } => {
                if spec.y != 0.0 {
                    return Err(Error::Unavailable(
                        "simulation of Bessel processes in the wide sense (y ≠ 0)".into(),
                    ));
                }
                Ok(Dynamics::Bessel { delta })
            }
        }
    }

    /// Internal state for a start at position `x`.
    fn state(&self, x: f64) -> f64 {
        match self {
            Dynamics::Bessel { .. } => x * x,
            _ => x,
        }
    }

    fn position(&self, state: f64) -> f64 {
        match self {
            Dynamics::Bessel { .. } => state.max(0.0).sqrt(),
            _ => state,
        }
    }

    fn step<R: Rng>(&self, rng: &mut R, state: f64, dt: f64, sqrt_dt: f64) -> f64 {
        match *self {
            Dynamics::Brownian { drift } => {
                let z: f64 = StandardNormal.sample(rng);
                state + drift * dt + sqrt_dt * z
            }
            Dynamics::Bessel { delta } => squared_bessel_step(rng, state, delta, dt),
            Dynamics::OrnsteinUhlenbeck { lambda } => {
                let decay = (-0.5 * lambda * dt).exp();
                let sd = (-(-lambda * dt).exp_m1() / lambda).sqrt();
                let z: f64 = StandardNormal.sample(rng);
                decay * state + sd * z
            }
        }
    }
}

/// Exact draw of `V_{t+dt}` given `V_t = v` for the squared Bessel process of
/// dimension `delta`: sum of squared Gaussians for integer `delta`, a
/// Poisson mixture of Gamma laws otherwise.
pub fn squared_bessel_step<R: Rng>(rng: &mut R, v: f64, delta: f64, dt: f64) -> f64 {
    let v = v.max(0.0);
    if delta >= 1.0 && delta.fract() == 0.0 && delta <= 16.0 {
        let z: f64 = StandardNormal.sample(rng);
        let lead = v.sqrt() + dt.sqrt() * z;
        let mut out = lead * lead;
        for _ in 1..delta as usize {
            let z: f64 = StandardNormal.sample(rng);
            out += dt * z * z;
        }
        out
    } else {
        let rate = v / (2.0 * dt);
        let n = if rate > 0.0 {
            Poisson::new(rate).expect("positive Poisson rate").sample(rng)
        } else {
            0.0
        };
        let shape = 0.5 * delta + n;
        let g: f64 = Gamma::new(shape, 1.0).expect("positive Gamma shape").sample(rng);
        2.0 * dt * g
    }
}

/// Tracks the side of the curve and reports the first crossing.
#[derive(Debug, Clone, Copy)]
pub struct CrossingDetector {
    side: f64,
    gap: f64,
    bridge: bool,
}

impl CrossingDetector {
    /// `gap0 = f(t₀) − X_{t₀}`, nonzero.
    pub fn new(gap0: f64, bridge: bool) -> Self {
        Self {
            side: gap0.signum(),
            gap: gap0,
            bridge,
        }
    }

    /// Processes the step `[t0, t1]` with new gap `f(t1) − X_{t1}`; `uniform`
    /// is called only when a bridge-correction draw is needed.
    pub fn step(&mut self, t0: f64, t1: f64, gap: f64, uniform: impl FnOnce() -> f64) -> Option<f64> {
        let prev = self.gap;
        self.gap = gap;
        if gap * self.side <= 0.0 {
            let w = prev / (prev - gap);
            return Some(t0 + (t1 - t0) * w);
        }
        if self.bridge {
            let e = 2.0 * prev * gap / (t1 - t0);
            if e < BRIDGE_CUTOFF && uniform() < (-e).exp() {
                return Some(0.5 * (t0 + t1));
            }
        }
        None
    }
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathOutcome {
    Crossed(f64),
    /// Not crossed by the end of the grid; position there.
    Survived(f64),
}

impl PathOutcome {
    pub fn time(&self) -> f64 {
        match self {
            PathOutcome::Crossed(t) => *t,
            PathOutcome::Survived(_) => f64::INFINITY,
        }
    }
}

/// Precomputed grid data shared by all paths.
struct GridPlan {
    times: Vec<f64>,
    curve: Vec<f64>,
    /// Inner-process times when the observed path is a bridge image.
    inner: Option<(Vec<f64>, Vec<f64>)>,
    steps: Vec<(f64, f64)>,
}

impl GridPlan {
    fn new(times: &[f64], curve: &Curve, bridge_length: Option<f64>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("simulation grid must start at 0 and increase".into()));
        }
        let end = curve.lifetime().min(bridge_length.unwrap_or(f64::INFINITY));
        let times: Vec<f64> = times.iter().copied().take_while(|&t| t < end).collect();
        if times.len() < 2 {
            return Err(Error::Config("simulation grid ends before the first step".into()));
        }
        let curve_vals = times.iter().map(|&t| curve.eval(t)).collect::<Result<Vec<_>>>()?;
        let (clock, inner) = match bridge_length {
            Some(tb) => {
                let u: Vec<f64> = times.iter().map(|&s| s / (1.0 - s / tb)).collect();
                let scale: Vec<f64> = times.iter().map(|&s| 1.0 - s / tb).collect();
                (u.clone(), Some((u, scale)))
            }
            None => (times.clone(), None),
        };
        let steps = clock
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                (d, d.sqrt())
            })
            .collect();
        Ok(Self {
            times,
            curve: curve_vals,
            inner,
            steps,
        })
    }

    fn observed(&self, dynamics: &Dynamics, k: usize, state: f64) -> f64 {
        let x = dynamics.position(state);
        match &self.inner {
            Some((_, scale)) => scale[k] * x,
            None => x,
        }
    }
}

fn run_path(
    plan: &GridPlan,
    dynamics: &Dynamics,
    x0: f64,
    bridge: bool,
    rng: &mut ChaCha8Rng,
) -> PathOutcome {
    let mut state = dynamics.state(x0);
    let mut det = CrossingDetector::new(plan.curve[0] - x0, bridge);
    for k in 0..plan.steps.len() {
        let (dt, sdt) = plan.steps[k];
        state = dynamics.step(rng, state, dt, sdt);
        let x = plan.observed(dynamics, k + 1, state);
        let gap = plan.curve[k + 1] - x;
        if let Some(t) = det.step(plan.times[k], plan.times[k + 1], gap, || rng.random::<f64>()) {
            return PathOutcome::Crossed(t);
        }
    }
    PathOutcome::Survived(plan.observed(dynamics, plan.times.len() - 1, state))
}

fn simulate(
    plan: &GridPlan,
    dynamics: Dynamics,
    x0: f64,
    n_paths: usize,
    seed: u64,
    bridge: bool,
    streams: usize,
) -> Vec<PathOutcome> {
    let chunk = n_paths.div_ceil(streams.max(1));
    let starts: Vec<usize> = (0..n_paths).step_by(chunk.max(1)).collect();
    starts
        .into_par_iter()
        .map(|start| {
            (start..(start + chunk).min(n_paths))
                .map(|p| run_path(plan, &dynamics, x0, bridge, &mut path_rng(seed, p)))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn check_start(curve: &Curve, x: f64) -> Result<()> {
    let f0 = curve.eval(0.0)?;
    if f0 == x {
        return Err(Error::domain(format!("the path starts on the curve (f(0) = x = {x})")));
    }
    Ok(())
}

/// Per-path outcomes of `X` (from `spec`) against `f` on an explicit grid.
pub fn crossing_outcomes_on_grid(
    spec: &DiffusionSpec,
    f: &Curve,
    grid: &[f64],
    n_paths: usize,
    seed: u64,
    bridge_correction: bool,
    streams: usize,
) -> Result<Vec<PathOutcome>> {
    let dynamics = Dynamics::from_spec(spec)?;
    check_start(f, spec.x)?;
    let plan = GridPlan::new(grid, f, None)?;
    Ok(simulate(&plan, dynamics, spec.x, n_paths, seed, bridge_correction, streams))
}

/// Crossing times (`∞` when censored) on the uniform grid of `cfg`.
pub fn crossing_times(spec: &DiffusionSpec, f: &Curve, cfg: &MCConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let out = crossing_outcomes_on_grid(
        spec,
        f,
        &cfg.uniform_grid(),
        cfg.n_paths,
        cfg.seed,
        cfg.bridge_correction,
        cfg.streams,
    )?;
    Ok(out.iter().map(PathOutcome::time).collect())
}

/// Histogram of first crossing times of `f` by the diffusion of `spec`.
pub fn simulate_crossing_times(spec: &DiffusionSpec, f: &Curve, cfg: &MCConfig) -> Result<DensityEstimate> {
    let times = crossing_times(spec, f, cfg)?;
    DensityEstimate::from_samples(&times, cfg.horizon, cfg.bins)
}

/// Crossing times of level `a` by the OU process `dU = −(λ/2)U dt + dB`, `U₀ = 0`.
pub fn ou_crossing_times(a: f64, lambda: f64, cfg: &MCConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(lambda > 0.0) || a == 0.0 {
        return Err(Error::domain("OU crossing needs λ > 0 and a ≠ 0"));
    }
    let plan = GridPlan::new(&cfg.uniform_grid(), &Curve::constant(a), None)?;
    let dynamics = Dynamics::OrnsteinUhlenbeck { lambda };
    let out = simulate(&plan, dynamics, 0.0, cfg.n_paths, cfg.seed, cfg.bridge_correction, cfg.streams);
    Ok(out.iter().map(PathOutcome::time).collect())
}

pub fn simulate_ou_crossing(a: f64, lambda: f64, cfg: &MCConfig) -> Result<DensityEstimate> {
    let times = ou_crossing_times(a, lambda, cfg)?;
    DensityEstimate::from_samples(&times, cfg.horizon, cfg.bins)
}

/// Sampled bridge paths on the grid `0, dt, 2dt, … < T`.
#[derive(Debug, Clone)]
pub struct BridgeBatch {
    pub times: Vec<f64>,
    pub paths: Vec<Vec<f64>>,
    /// Values of the underlying process at `u = s/(1 − s/T)`.
    pub inner_times: Vec<f64>,
    pub inner_paths: Vec<Vec<f64>>,
}

/// Bridges from `spec.x` to `Tz` of length `T`, realized as
/// `s ↦ (1 − s/T) X_{s/(1−s/T)}` with `X` carrying drift `z` (Brownian) or
/// `z = 0` (Bessel).
pub fn sample_bridge(spec: &DiffusionSpec, t_len: f64, z: f64, cfg: &MCConfig) -> Result<BridgeBatch> {
    cfg.validate()?;
    if !(t_len > 0.0) {
        return Err(Error::domain("bridge length must be positive"));
    }
    let dynamics = match spec.kind {
        DiffusionKind::Brownian => Dynamics::Brownian { drift: z },
        DiffusionKind::Bessel { delta } => {
            if z != 0.0 || spec.y != 0.0 {
                return Err(Error::Unavailable("Bessel bridges are supported to z = 0 only".into()));
            }
            Dynamics::Bessel { delta }
        }
    };
    let n = ((t_len / cfg.dt).ceil() as usize).max(1);
    let times: Vec<f64> = (0..n).map(|k| k as f64 * cfg.dt).filter(|&s| s < t_len).collect();
    let inner_times: Vec<f64> = times.iter().map(|&s| s / (1.0 - s / t_len)).collect();
    let paths_inner: Vec<Vec<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, p);
            let mut state = dynamics.state(spec.x);
            let mut out = Vec::with_capacity(inner_times.len());
            out.push(spec.x);
            for w in inner_times.windows(2) {
                let d = w[1] - w[0];
                state = dynamics.step(&mut rng, state, d, d.sqrt());
                out.push(dynamics.position(state));
            }
            out
        })
        .collect();
    let paths = paths_inner
        .iter()
        .map(|xs| {
            xs.iter()
                .zip(&times)
                .map(|(x, s)| (1.0 - s / t_len) * x)
                .collect()
        })
        .collect();
    Ok(BridgeBatch {
        times,
        paths,
        inner_times,
        inner_paths: paths_inner,
    })
}

/// Crossing times of `f_bridge` by the bridge of length `T` to `Tz`, with the
/// bridge observed on the uniform grid `0, dt, … < T`.
pub fn bridge_crossing_times(
    spec: &DiffusionSpec,
    t_len: f64,
    z: f64,
    f_bridge: &Curve,
    grid: &[f64],
    cfg: &MCConfig,
) -> Result<Vec<PathOutcome>> {
    check_start(f_bridge, spec.x)?;
    let dynamics = match spec.kind {
        DiffusionKind::Brownian => Dynamics::Brownian { drift: z },
        DiffusionKind::Bessel { delta } if z == 0.0 => Dynamics::Bessel { delta },
        _ => return Err(Error::Unavailable("Bessel bridges are supported to z = 0 only".into())),
    };
    let plan = GridPlan::new(grid, f_bridge, Some(t_len))?;
    Ok(simulate(&plan, dynamics, spec.x, cfg.n_paths, cfg.seed, cfg.bridge_correction, cfg.streams))
}

/// Crossing of a stored path (values at `times`) with curve values `fvals`;
/// `uniforms` feeds the bridge-correction draws, one per step, if given.
pub fn first_crossing_of_path(times: &[f64], path: &[f64], fvals: &[f64], uniforms: Option<&[f64]>) -> Option<f64> {
    let mut det = CrossingDetector::new(fvals[0] - path[0], uniforms.is_some());
    for k in 0..times.len() - 1 {
        let u = uniforms.map_or(1.0, |u| u[k]);
        if let Some(t) = det.step(times[k], times[k + 1], fvals[k + 1] - path[k + 1], || u) {
            return Some(t);
        }
    }
    None
}

/// Estimate of `P(T = ∞)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub defect: f64,
    pub standard_error: f64,
    /// Fraction of paths crossing by the horizon.
    pub crossed_by_horizon: f64,
    pub horizon: f64,
    pub n_paths: usize,
}

/// Exact probability of meeting `f` after `h` from position `x`, when known.
fn residual_crossing(spec: &DiffusionSpec, f: &Curve, h: f64, x: f64) -> Option<f64> {
    use crate::moebius::CurveKind;
    match (spec.kind, f.kind()) {
        (DiffusionKind::Brownian, CurveKind::Line { a, b }) if spec.y == 0.0 => {
            let gap = a + b * h - x;
            if gap * b > 0.0 {
                Some((-2.0 * b * gap).exp())
            } else {
                None
            }
        }
        (DiffusionKind::Bessel { .. }, CurveKind::Constant { a }) if spec.y == 0.0 && x > *a => {
            let nu = spec.nu();
            if nu > 0.0 {
                Some((a / x).powf(2.0 * nu))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `P(T^f = ∞)`: simulated crossings up to the horizon, completed by the
/// exact conditional probability of a later crossing given `X_H`.
///
/// Only curves with a closed-form residual law qualify (Brownian lines moving
/// away from the path, Bessel levels below the start with `δ > 2`); anything
/// else has no certifiable horizon and is an error.
pub fn estimate_defective_mass(spec: &DiffusionSpec, f: &Curve, cfg: &MCConfig) -> Result<MassEstimate> {
    cfg.validate()?;
    let probe = spec.x + if f.eval(0.0)? > spec.x { -1.0 } else { 1.0 };
    if residual_crossing(spec, f, cfg.horizon, probe).is_none()
        && residual_crossing(spec, f, cfg.horizon, 2.0 * probe - spec.x).is_none()
    {
        return Err(Error::Unavailable(format!(
            "no certifiable horizon for a {} curve: the crossing law is not known to be defective",
            f.kind_name()
        )));
    }
    let grid = cfg.uniform_grid();
    let out = crossing_outcomes_on_grid(spec, f, &grid, cfg.n_paths, cfg.seed, cfg.bridge_correction, cfg.streams)?;
    let h = *grid.last().expect("grid is nonempty");
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut crossed = 0usize;
    for o in &out {
        let never = match *o {
            PathOutcome::Crossed(_) => {
                crossed += 1;
                0.0
            }
            PathOutcome::Survived(x) => 1.0 - residual_crossing(spec, f, h, x).unwrap_or(1.0),
        };
        sum += never;
        sum2 += never * never;
    }
    let n = out.len() as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(MassEstimate {
        defect: mean,
        standard_error: (var / n).sqrt(),
        crossed_by_horizon: crossed as f64 / n,
        horizon: h,
        n_paths: out.len(),
    })
}

/// Cumulative distribution `t ↦ ∫₀ᵗ p` tabulated on `grid`, assuming no
/// mass before `grid[0]` beyond `mass_before`.
#[derive(Debug, Clone)]
pub struct CdfTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl CdfTable {
    pub fn from_density(p: &FptDensity, grid: &[f64], mass_before: f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut acc = mass_before;
        values.push(acc);
        for w in grid.windows(2) {
            acc += p.integrate(w[0], w[1])?;
            values.push(acc);
        }
        Ok(Self {
            grid: grid.to_vec(),
            values,
        })
    }

    pub fn from_fn(grid: &[f64], cdf: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.to_vec(),
            values: grid.iter().map(|&t| cdf(t)).collect(),
        }
    }

    /// Linear interpolation; constant beyond the ends.
    pub fn eval(&self, t: f64) -> f64 {
        let g = &self.grid;
        if t <= g[0] {
            return self.values[0];
        }
        if t >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let k = g.partition_point(|&x| x <= t) - 1;
        let w = (t - g[k]) / (g[k + 1] - g[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }
}

/// Kolmogorov–Smirnov distance on `[0, horizon]` between the empirical law of
/// `samples` (censored values are `∞` or beyond the horizon) and `cdf`.
pub fn ks_censored(samples: &[f64], cdf: impl Fn(f64) -> f64, horizon: f64) -> f64 {
    let mut s: Vec<f64> = samples.iter().copied().filter(|&t| t <= horizon).collect();
    s.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &t) in s.iter().enumerate() {
        let f = cdf(t);
        d = d.max((i as f64 / n - f).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d.max((s.len() as f64 / n - cdf(horizon)).abs())
}

/// Two-sample Kolmogorov–Smirnov distance restricted to `[0, horizon]`.
pub fn ks_two_sample(a: &[f64], b: &[f64], horizon: f64) -> f64 {
    let prep = |v: &[f64]| {
        let mut s: Vec<f64> = v.iter().copied().filter(|&t| t <= horizon).collect();
        s.sort_by(f64::total_cmp);
        s
    };
    let (sa, sb) = (prep(a), prep(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < sa.len() || j < sb.len() {
        let t = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < sa.len() && sa[i] <= t {
            i += 1;
        }
        while j < sb.len() && sb[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Result of the pathwise bridge-realization check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathwiseReport {
    pub n_paths: usize,
    /// Paths where exactly one of the two constructions crossed.
    pub mismatched_events: usize,
    /// Largest `|τ(T^f(X)) − T^{f^β}(S^β X)|` over paths where both crossed,
    /// `τ(u) = u/(1 − βu)`.
    pub max_time_gap: f64,
}

/// Simulates Brownian paths `X` from `x` on the nodes `u_k = s_k/(1 + β s_k)`
/// (`s_k = k·dt`, `β < 0`), detects the crossing of `f` by `X` and of `S^(β) f`
/// by the image path `(1 + βs) X_{s/(1+βs)}` with shared bridge-correction
/// draws, and compares the time-mapped crossing times.
pub fn pathwise_bridge_check(x: f64, f: &Curve, beta: f64, cfg: &MCConfig) -> Result<PathwiseReport> {
    cfg.validate()?;
    if !(beta < 0.0) {
        return Err(Error::domain("the bridge realization needs β < 0"));
    }
    let t_len = -1.0 / beta;
    let fb = f.transform(beta);
    let n = ((t_len.min(cfg.horizon) / cfg.dt).ceil() as usize).max(2);
    let s_grid: Vec<f64> = (0..n).map(|k| k as f64 * cfg.dt).filter(|&s| s < t_len.min(cfg.horizon)).collect();
    let u_grid: Vec<f64> = s_grid.iter().map(|&s| s / (1.0 + beta * s)).collect();
    let f_u = u_grid.iter().map(|&u| f.eval(u)).collect::<Result<Vec<_>>>()?;
    let f_s = s_grid.iter().map(|&s| fb.eval(s)).collect::<Result<Vec<_>>>()?;
    check_start(f, x)?;
    let bridge = cfg.bridge_correction;
    let results: Vec<(Option<f64>, Option<f64>)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, p);
            let mut xs = Vec::with_capacity(u_grid.len());
            xs.push(x);
            let mut cur = x;
            for w in u_grid.windows(2) {
                let z: f64 = StandardNormal.sample(&mut rng);
                cur += (w[1] - w[0]).sqrt() * z;
                xs.push(cur);
            }
            let uniforms: Vec<f64> = (1..u_grid.len()).map(|_| rng.random::<f64>()).collect();
            let ys: Vec<f64> = xs.iter().zip(&s_grid).map(|(v, &s)| (1.0 + beta * s) * v).collect();
            let u = bridge.then_some(uniforms.as_slice());
            let tx = first_crossing_of_path(&u_grid, &xs, &f_u, u);
            let ty = first_crossing_of_path(&s_grid, &ys, &f_s, u);
            (tx, ty)
        })
        .collect();
    let mut mismatched = 0;
    let mut gap: f64 = 0.0;
    for (tx, ty) in results {
        match (tx, ty) {
            (Some(a), Some(b)) => gap = gap.max((a / (1.0 - beta * a) - b).abs()),
            (None, None) => {}
            _ => mismatched += 1,
        }
    }
    Ok(PathwiseReport {
        n_paths: cfg.n_paths,
        mismatched_events: mismatched,
        max_time_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn small(n: usize) -> MCConfig {
        MCConfig {
            n_paths: n,
            dt: 1e-2,
            horizon: 2.0,
            seed: 7,
            bridge_correction: true,
            streams: 8,
            bins: 20,
        }
    }

    #[test]
    fn rng_is_per_path() {
        let a: f64 = path_rng(3, 10).random();
        let b: f64 = path_rng(3, 10).random();
        let c: f64 = path_rng(3, 11).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn deterministic_and_chunk_invariant() {
        let spec = DiffusionSpec::brownian(0.0);
        let f = Curve::constant(1.0);
        let cfg = small(2000);
        let a = simulate_crossing_times(&spec, &f, &cfg).unwrap();
        let b = simulate_crossing_times(&spec, &f, &cfg).unwrap();
        let c = simulate_crossing_times(&spec, &f, &MCConfig { streams: 3, ..cfg.clone() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!((a.total_mass() - 1.0).abs() < 1e-12);
        assert!(a.bin_densities.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn brownian_increment_variance() {
        let dt = 0.01;
        let n = 200_000;
        let dynamics = Dynamics::Brownian { drift: 0.0 };
        let mut rng = path_rng(5, 0);
        let xs: Vec<f64> = (0..n).map(|_| dynamics.step(&mut rng, 0.0, dt, dt.sqrt())).collect();
        let m2: f64 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let m4: f64 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        let se = ((m4 - m2 * m2) / n as f64).sqrt();
        assert!((m2 - dt).abs() < 4.0 * se);
    }

    #[test]
    fn squared_bessel_step_mean() {
        let (v, dt) = (0.7, 0.05);
        for delta in [3.0, 1.4, 0.6] {
            let mut rng = path_rng(11, 0);
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| squared_bessel_step(&mut rng, v, delta, dt)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
            let se = (var / n as f64).sqrt();
            assert!((m - (v + delta * dt)).abs() < 4.0 * se, "δ={delta}");
            assert!(xs.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn ou_reaches_stationary_variance() {
        let lambda = 2.0;
        let dynamics = Dynamics::OrnsteinUhlenbeck { lambda };
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|p| {
                let mut rng = path_rng(9, p);
                let mut u = 0.0;
                for _ in 0..10 {
                    u = dynamics.step(&mut rng, u, 0.5, 0.5f64.sqrt());
                }
                u
            })
            .collect();
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        let se = ((m4 - m2 * m2) / n as f64).sqrt();
        assert!((m2 - 1.0 / lambda).abs() < 4.0 * se);
    }

    #[test]
    fn bridge_marginal_and_endpoint() {
        let cfg = MCConfig {
            n_paths: 20_000,
            dt: 1e-3,
            ..small(0)
        };
        let batch = sample_bridge(&DiffusionSpec::brownian(0.0), 1.0, 0.0, &cfg).unwrap();
        let k = batch.times.iter().position(|&s| (s - 0.5).abs() < 1e-9).unwrap();
        let v: Vec<f64> = batch.paths.iter().map(|p| p[k]).collect();
        let n = v.len() as f64;
        let m2 = v.iter().map(|x| x * x).sum::<f64>() / n;
        let m4 = v.iter().map(|x| x.powi(4)).sum::<f64>() / n;
        assert!((m2 - 0.25).abs() < 4.0 * ((m4 - m2 * m2) / n).sqrt());
        let last = batch.times.len() - 1;
        let rms = (batch.paths.iter().map(|p| p[last].powi(2)).sum::<f64>() / n).sqrt();
        assert!(rms < 3.0 * (1.0 - batch.times[last]).sqrt());
    }

    #[test]
    fn drifted_bridge_heads_to_endpoint() {
        let cfg = MCConfig {
            n_paths: 2000,
            dt: 1e-3,
            ..small(0)
        };
        let batch = sample_bridge(&DiffusionSpec::brownian(0.5), 2.0, 0.75, &cfg).unwrap();
        let last = batch.times.len() - 1;
        let mean = batch.paths.iter().map(|p| p[last]).sum::<f64>() / cfg.n_paths as f64;
        assert!((mean - 1.5).abs() < 0.02);
    }

    #[test]
    fn pathwise_bridge_realization() {
        let cfg = MCConfig {
            n_paths: 300,
            dt: 1e-3,
            horizon: 1.0,
            ..small(0)
        };
        let r = pathwise_bridge_check(0.0, &Curve::line(0.8, 0.3), -1.0, &cfg).unwrap();
        assert_eq!(r.mismatched_events, 0);
        assert!(r.max_time_gap < 2.0 * cfg.dt);
    }

    #[test]
    fn detector_linear_interpolation() {
        let mut d = CrossingDetector::new(1.0, false);
        assert_eq!(d.step(0.0, 1.0, 0.5, || 0.0), None);
        let t = d.step(1.0, 2.0, -0.5, || 0.0).unwrap();
        assert!((t - 1.5).abs() < 1e-15);
    }

    #[test]
    fn defective_mass_needs_known_tail() {
        let cfg = small(200);
        let spec = DiffusionSpec::brownian(0.0);
        assert!(estimate_defective_mass(&spec, &Curve::constant(1.0), &cfg).is_err());
        let m = estimate_defective_mass(&spec, &Curve::line(1.0, 1.0), &MCConfig { n_paths: 20_000, ..cfg }).unwrap();
        let exact = 1.0 - (-2.0f64).exp();
        assert!((m.defect - exact).abs() < 4.0 * m.standard_error + 0.01);
    }

    #[test]
    fn ks_helpers() {
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64 / 1000.0).collect();
        assert!(ks_censored(&xs, |t| t, 1.0) <= 1e-3 + 1e-12);
        let mut ys = xs.clone();
        ys.push(f64::INFINITY);
        assert!(ks_two_sample(&xs, &ys, 1.0) < 2e-3);
        let shifted: Vec<f64> = xs.iter().map(|t| t * 0.5).collect();
        assert!((ks_two_sample(&xs, &shifted, 1.0) - 0.5).abs() < 2e-3);
    }

    #[test]
    fn json_round_trips() {
        let cfg = small(10);
        assert_eq!(MCConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let est = simulate_crossing_times(&DiffusionSpec::brownian(0.0), &Curve::constant(1.0), &cfg).unwrap();
        assert_eq!(DensityEstimate::from_json(&est.to_json()).unwrap(), est);
        assert!(est.to_csv().starts_with("bin_left,bin_right,density,se\n"));
        assert!(MCConfig::from_json(&json!({"dt": 2.0, "horizon": 1.0})).is_err());
    }
}
