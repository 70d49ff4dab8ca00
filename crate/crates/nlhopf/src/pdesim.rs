//! Method-of-lines simulation on (0, ℓπ) with Neumann boundaries, classical
//! RK4 in time, and classification of the long-time behaviour.

use crate::error::{Error, Result};
use crate::model::{Kinetics, ModelSpec, ParamPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// States whose sup-norm exceeds this are treated as blown up.
pub const BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Number of panels; there are m + 1 nodes.
    pub m: usize,
    pub h: f64,
    pub ell: f64,
}

impl Grid {
    pub fn new(m: usize, ell: f64) -> Result<Grid> {
        if m < 16 {
            return Err(Error::Domain(format!("need at least 16 panels, got {m}")));
        }
        if !(ell > 0.0) {
            return Err(Error::Domain(format!("ell must be positive, got {ell}")));
        }
        Ok(Grid { m, h: ell * PI / m as f64, ell })
    }

    pub fn nodes(&self) -> usize {
        self.m + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.m {
            self.ell * PI
        } else {
            i as f64 * self.h
        }
    }

    pub fn nearest(&self, x: f64) -> usize {
        ((x / self.h).round().max(0.0) as usize).min(self.m)
    }

    /// Trapezoid weights of the spatial average, summing to one.
    pub fn mean_weights(&self) -> Vec<f64> {
        let mut w = vec![1.0 / self.m as f64; self.nodes()];
        w[0] *= 0.5;
        w[self.m] *= 0.5;
        w
    }

    /// Second-difference Laplacian with reflected ghost nodes.
    pub fn laplacian(&self, a: &[f64], out: &mut [f64]) {
        let m = self.m;
        let s = 1.0 / (self.h * self.h);
        out[0] = 2.0 * (a[1] - a[0]) * s;
        for i in 1..m {
            out[i] = (a[i + 1] - 2.0 * a[i] + a[i - 1]) * s;
        }
        out[m] = 2.0 * (a[m - 1] - a[m]) * s;
    }

    pub fn mean(&self, a: &[f64]) -> f64 {
        let m = self.m;
        let inner: f64 = a[1..m].iter().sum();
        (inner + 0.5 * (a[0] + a[m])) / m as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// offset + s·sin(kx) + c·cos(kx).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub offset: f64,
    pub sin: f64,
    pub cos: f64,
    pub k: f64,
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.sin * (self.k * x).sin() + self.cos * (self.k * x).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    /// The constant equilibrium at the simulated parameters.
    Equilibrium,
    Profiles { u: Profile, v: Profile },
    Values { u: Vec<f64>, v: Vec<f64> },
}

impl InitialCondition {
    /// (a + p sin x, a + q cos x) style data around `base`.
    pub fn trig(base: f64, u_sin: f64, u_cos: f64, v_sin: f64, v_cos: f64) -> Self {
        InitialCondition::Profiles {
            u: Profile { offset: base, sin: u_sin, cos: u_cos, k: 1.0 },
            v: Profile { offset: base, sin: v_sin, cos: v_cos, k: 1.0 },
        }
    }

    /// Parses `equilibrium` or `u0,us,uc;v0,vs,vc` (offset, sin and cos
    /// amplitudes of each field in x).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "equilibrium" {
            return Ok(InitialCondition::Equilibrium);
        }
        let parts: Vec<&str> = s.split(';').collect();
        let profile = |p: &str| -> Result<Profile> {
            let v: std::result::Result<Vec<f64>, _> = p.split(',').map(|x| x.trim().parse::<f64>()).collect();
            match v.as_deref() {
                Ok([o, a, b]) => Ok(Profile { offset: *o, sin: *a, cos: *b, k: 1.0 }),
                _ => Err(Error::Parse(format!("initial condition: cannot read '{p}'"))),
            }
        };
        match parts.as_slice() {
            [u, v] => Ok(InitialCondition::Profiles { u: profile(u)?, v: profile(v)? }),
            _ => Err(Error::Parse(format!(
                "initial condition: expected 'equilibrium' or 'u0,us,uc;v0,vs,vc', got '{s}'"
            ))),
        }
    }

    pub fn state(&self, grid: &Grid, equilibrium: [f64; 2]) -> Result<SimState> {
        let n = grid.nodes();
        let (u, v) = match self {
            InitialCondition::Equilibrium => (vec![equilibrium[0]; n], vec![equilibrium[1]; n]),
            InitialCondition::Profiles { u, v } => (
                (0..n).map(|i| u.eval(grid.x(i))).collect(),
                (0..n).map(|i| v.eval(grid.x(i))).collect(),
            ),
            InitialCondition::Values { u, v } => {
                if u.len() != n || v.len() != n {
                    return Err(Error::Domain(format!("initial data must have {n} nodes")));
                }
                (u.clone(), v.clone())
            }
        };
        Ok(SimState { t: 0.0, u, v })
    }
}

/// Level of the Poincaré section on v(π, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PoincareLevel {
    /// Post-transient mean of v(π, ·).
    Mean,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub constant: f64,
    pub spatial_ratio: f64,
    pub periodic_diameter: f64,
    pub quasi_points: usize,
    pub quasi_diameter: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            constant: 1e-4,
            spatial_ratio: 1e-3,
            periodic_diameter: 1e-4,
            quasi_points: 50,
            quasi_diameter: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Fixed step; `None` picks the largest step below 0.4h²/max d.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub transient_fraction: f64,
    pub ic: InitialCondition,
    /// Steps between field snapshots; `None` gives about one per time unit.
    pub record_stride: Option<usize>,
    pub probe_x: f64,
    pub level: PoincareLevel,
    /// Delay of the second Poincaré coordinate, normally 2π/ω₁. `None`
    /// uses the mean return time of the section.
    pub delay: Option<f64>,
    pub thresholds: Thresholds,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: None,
            t_end: 5000.0,
            transient_fraction: 0.5,
            ic: InitialCondition::Equilibrium,
            record_stride: None,
            probe_x: PI,
            level: PoincareLevel::Mean,
            delay: None,
            thresholds: Thresholds::default(),
        }
    }
}

/// Reaction terms at a fixed parameter point, evaluated node by node.
enum Reaction<'a> {
    HollingTanner { beta: f64, b: f64, c: f64 },
    Custom { spec: &'a ModelSpec, mu: ParamPoint },
}

impl Reaction<'_> {
    fn new(spec: &ModelSpec, mu: ParamPoint) -> Reaction<'_> {
        match &spec.kinetics {
            Kinetics::HollingTanner(h) => {
                let lambda = spec.base.0 + mu.mu1;
                Reaction::HollingTanner { beta: h.beta, b: h.b(lambda), c: spec.base.1 + mu.mu2 }
            }
            Kinetics::Custom => Reaction::Custom { spec, mu },
        }
    }

    fn requires_positive_u(&self) -> bool {
        matches!(self, Reaction::HollingTanner { .. })
    }
}

struct Rhs<'a> {
    grid: Grid,
    diffusion: [f64; 2],
    reaction: Reaction<'a>,
    lap_u: Vec<f64>,
    lap_v: Vec<f64>,
}

impl<'a> Rhs<'a> {
    fn new(spec: &'a ModelSpec, mu: ParamPoint, grid: Grid) -> Self {
        let n = grid.nodes();
        Rhs {
            grid,
            diffusion: spec.diffusion_at(mu),
            reaction: Reaction::new(spec, mu),
            lap_u: vec![0.0; n],
            lap_v: vec![0.0; n],
        }
    }

    fn eval(&mut self, t: f64, u: &[f64], v: &[f64], du: &mut [f64], dv: &mut [f64]) -> Result<()> {
        if self.reaction.requires_positive_u() {
            if let Some(node) = u.iter().position(|&x| !(x > 0.0)) {
                return Err(Error::StateDomain { t, node });
            }
        }
        self.grid.laplacian(u, &mut self.lap_u);
        self.grid.laplacian(v, &mut self.lap_v);
        let uh = self.grid.mean(u);
        let vh = self.grid.mean(v);
        let [d1, d2] = self.diffusion;
        match &self.reaction {
            Reaction::HollingTanner { beta, b, c } => {
                let g = 1.0 - beta * uh;
                for i in 0..u.len() {
                    let (ui, vi) = (u[i], v[i]);
                    du[i] = d1 * self.lap_u[i] + ui * g - b * ui * vi / (1.0 + ui);
                    dv[i] = d2 * self.lap_v[i] + c * vi * (1.0 - vi / ui);
                }
            }
            Reaction::Custom { spec, mu } => {
                for i in 0..u.len() {
                    let f = spec.reaction(*mu, [u[i], v[i], uh, vh]);
                    du[i] = d1 * self.lap_u[i] + f[0];
                    dv[i] = d2 * self.lap_v[i] + f[1];
                }
            }
        }
        Ok(())
    }
}

/// Time derivative of `state` for the model at parameter offset `mu`.
pub fn rhs(spec: &ModelSpec, mu: ParamPoint, grid: &Grid, state: &SimState) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.nodes();
    if state.u.len() != n || state.v.len() != n {
        return Err(Error::Domain(format!("state must have {n} nodes")));
    }
    let mut r = Rhs::new(spec, mu, *grid);
    let mut du = vec![0.0; n];
    let mut dv = vec![0.0; n];
    r.eval(state.t, &state.u, &state.v, &mut du, &mut dv)?;
    Ok((du, dv))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub grid: Grid,
    pub mu: ParamPoint,
    pub dt: f64,
    pub t_end: f64,
    pub transient_fraction: f64,
    pub equilibrium: [f64; 2],
    pub probe_node: usize,
    /// Probe series, one sample per step including t = 0.
    pub t: Vec<f64>,
    pub u_probe: Vec<f64>,
    pub v_probe: Vec<f64>,
    /// Spatial standard deviation of u and v (larger of the two) per step.
    pub spatial_std: Vec<f64>,
    /// Sup-norm distance to the equilibrium per step.
    pub deviation: Vec<f64>,
    pub snapshot_t: Vec<f64>,
    pub u_snapshots: Vec<Vec<f64>>,
    pub v_snapshots: Vec<Vec<f64>>,
    pub final_state: SimState,
}

impl SimulationTrace {
    /// First probe sample of the post-transient window.
    pub fn window_start(&self) -> usize {
        let t0 = self.transient_fraction * self.t_end;
        self.t.partition_point(|&t| t < t0)
    }
}

fn std_dev(grid: &Grid, a: &[f64]) -> f64 {
    let m = grid.mean(a);
    let w = grid.mean_weights();
    a.iter().zip(&w).map(|(x, wi)| wi * (x - m) * (x - m)).sum::<f64>().sqrt()
}

pub fn auto_dt(grid: &Grid, diffusion: [f64; 2], t_end: f64) -> f64 {
    let cap = 0.4 * grid.h * grid.h / diffusion[0].max(diffusion[1]);
    let steps = (t_end / cap).ceil().max(1.0);
    t_end / steps
}

pub fn simulate(spec: &ModelSpec, mu: ParamPoint, grid: Grid, cfg: &SimConfig) -> Result<SimulationTrace> {
    if !(cfg.t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {}", cfg.t_end)));
    }
    if !(0.0..1.0).contains(&cfg.transient_fraction) {
        return Err(Error::Domain("transient_fraction must lie in [0, 1)".into()));
    }
    let diffusion = spec.diffusion_at(mu);
    let dt = match cfg.dt {
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => return Err(Error::Domain(format!("dt must be positive, got {dt}"))),
        None => auto_dt(&grid, diffusion, cfg.t_end),
    };
    let steps = (cfg.t_end / dt).round() as usize;
    let stride = cfg.record_stride.unwrap_or(((1.0 / dt).round() as usize).max(1)).max(1);
    let equilibrium = spec.equilibrium_at(mu);
    let n = grid.nodes();
    let probe = grid.nearest(cfg.probe_x);
    let mut state = cfg.ic.state(&grid, equilibrium)?;

    let mut f = Rhs::new(spec, mu, grid);
    let mut k = vec![vec![0.0; n]; 8];
    let mut tmp_u = vec![0.0; n];
    let mut tmp_v = vec![0.0; n];

    let mut tr = SimulationTrace {
        grid,
        mu,
        dt,
        t_end: steps as f64 * dt,
        transient_fraction: cfg.transient_fraction,
        equilibrium,
        probe_node: probe,
        t: Vec::with_capacity(steps + 1),
        u_probe: Vec::with_capacity(steps + 1),
        v_probe: Vec::with_capacity(steps + 1),
        spatial_std: Vec::with_capacity(steps + 1),
        deviation: Vec::with_capacity(steps + 1),
        snapshot_t: Vec::new(),
        u_snapshots: Vec::new(),
        v_snapshots: Vec::new(),
        final_state: state.clone(),
    };
    let record = |tr: &mut SimulationTrace, s: &SimState, step: usize| {
        tr.t.push(s.t);
        tr.u_probe.push(s.u[probe]);
        tr.v_probe.push(s.v[probe]);
        tr.spatial_std.push(std_dev(&grid, &s.u).max(std_dev(&grid, &s.v)));
        let dev = s
            .u
            .iter()
            .map(|x| (x - equilibrium[0]).abs())
            .chain(s.v.iter().map(|x| (x - equilibrium[1]).abs()))
            .fold(0.0, f64::max);
        tr.deviation.push(dev);
        if step.is_multiple_of(stride) {
            tr.snapshot_t.push(s.t);
            tr.u_snapshots.push(s.u.clone());
            tr.v_snapshots.push(s.v.clone());
        }
    };
    record(&mut tr, &state, 0);

    for step in 1..=steps {
        let t = state.t;
        let (k1, rest) = k.split_at_mut(2);
        let (k2, rest) = rest.split_at_mut(2);
        let (k3, k4) = rest.split_at_mut(2);
        let (k1u, k1v) = k1.split_at_mut(1);
        let (k2u, k2v) = k2.split_at_mut(1);
        let (k3u, k3v) = k3.split_at_mut(1);
        let (k4u, k4v) = k4.split_at_mut(1);
        f.eval(t, &state.u, &state.v, &mut k1u[0], &mut k1v[0])?;
        for i in 0..n {
            tmp_u[i] = state.u[i] + 0.5 * dt * k1u[0][i];
            tmp_v[i] = state.v[i] + 0.5 * dt * k1v[0][i];
        }
        f.eval(t + 0.5 * dt, &tmp_u, &tmp_v, &mut k2u[0], &mut k2v[0])?;
        for i in 0..n {
            tmp_u[i] = state.u[i] + 0.5 * dt * k2u[0][i];
            tmp_v[i] = state.v[i] + 0.5 * dt * k2v[0][i];
        }
        f.eval(t + 0.5 * dt, &tmp_u, &tmp_v, &mut k3u[0], &mut k3v[0])?;
        for i in 0..n {
            tmp_u[i] = state.u[i] + dt * k3u[0][i];
            tmp_v[i] = state.v[i] + dt * k3v[0][i];
        }
        f.eval(t + dt, &tmp_u, &tmp_v, &mut k4u[0], &mut k4v[0])?;
        let mut sup = 0.0f64;
        for i in 0..n {
            state.u[i] += dt / 6.0 * (k1u[0][i] + 2.0 * k2u[0][i] + 2.0 * k3u[0][i] + k4u[0][i]);
            state.v[i] += dt / 6.0 * (k1v[0][i] + 2.0 * k2v[0][i] + 2.0 * k3v[0][i] + k4v[0][i]);
            sup = sup.max(state.u[i].abs()).max(state.v[i].abs());
        }
        if !(sup <= BLOWUP) {
            return Err(Error::Divergence { t });
        }
        state.t = step as f64 * dt;
        record(&mut tr, &state, step);
    }
    tr.final_state = state;
    Ok(tr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttractorKind {
    Constant,
    HomogeneousPeriodic,
    NonhomogeneousPeriodic,
    QuasiPeriodic,
    Unresolved,
}

impl AttractorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttractorKind::Constant => "constant",
            AttractorKind::HomogeneousPeriodic => "homogeneous-periodic",
            AttractorKind::NonhomogeneousPeriodic => "nonhomogeneous-periodic",
            AttractorKind::QuasiPeriodic => "quasi-periodic",
            AttractorKind::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorMetrics {
    pub sup_deviation: f64,
    pub spatial_inhomogeneity: f64,
    pub temporal_amplitude: f64,
    pub poincare_level: f64,
    pub poincare_delay: f64,
    pub poincare_point_count: usize,
    pub poincare_diameter: f64,
    pub last_quarter_diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorClass {
    pub kind: AttractorKind,
    pub metrics: AttractorMetrics,
}

fn interpolate(t: &[f64], y: &[f64], at: f64) -> Option<f64> {
    if t.is_empty() || at < t[0] || at > t[t.len() - 1] {
        return None;
    }
    let j = t.partition_point(|&s| s < at);
    if j == 0 {
        return Some(y[0]);
    }
    let (t0, t1) = (t[j - 1], t[j]);
    let a = (at - t0) / (t1 - t0);
    Some(y[j - 1] + a * (y[j] - y[j - 1]))
}

/// Upward crossing times of v(π, t) through `level` in the window.
fn crossings(trace: &SimulationTrace, level: f64) -> Vec<f64> {
    let s = trace.window_start().max(1);
    let (t, v) = (&trace.t, &trace.v_probe);
    let mut out = Vec::new();
    for i in s..t.len() {
        let (a, b) = (v[i - 1] - level, v[i] - level);
        if a < 0.0 && b >= 0.0 {
            out.push(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
    }
    out
}

fn mean_return_time(times: &[f64]) -> Option<f64> {
    (times.len() >= 2).then(|| (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64)
}

/// Points (u(π,t*), u(π,t*−delay)) at upward crossings v(π,t*) = level in
/// the post-transient window.
pub fn poincare_section(trace: &SimulationTrace, level: f64, delay: f64) -> Vec<[f64; 2]> {
    crossings(trace, level)
        .into_iter()
        .filter_map(|ts| {
            let now = interpolate(&trace.t, &trace.u_probe, ts)?;
            let past = interpolate(&trace.t, &trace.u_probe, ts - delay)?;
            Some([now, past])
        })
        .collect()
}

pub fn diameter(points: &[[f64; 2]]) -> f64 {
    let mut d = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    d
}

fn resolve_level(trace: &SimulationTrace, level: PoincareLevel) -> f64 {
    match level {
        PoincareLevel::Fixed(x) => x,
        PoincareLevel::Mean => {
            let s = trace.window_start();
            let w = &trace.v_probe[s..];
            w.iter().sum::<f64>() / w.len().max(1) as f64
        }
    }
}

pub fn classify_attractor(trace: &SimulationTrace, cfg: &SimConfig) -> Result<AttractorClass> {
    let s = trace.window_start();
    if trace.t.len() < s + 100 || s == 0 && trace.transient_fraction > 0.0 {
        return Err(Error::InsufficientData(format!(
            "{} samples after the transient window; need at least 100",
            trace.t.len().saturating_sub(s)
        )));
    }
    let th = &cfg.thresholds;
    let max_of = |a: &[f64]| a.iter().cloned().fold(0.0, f64::max);
    let sup_deviation = max_of(&trace.deviation[s..]);
    let spatial = max_of(&trace.spatial_std[s..]);
    let w = &trace.u_probe[s..];
    let p2p = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - w.iter().cloned().fold(f64::INFINITY, f64::min);
    let level = resolve_level(trace, cfg.level);
    let delay = cfg
        .delay
        .or_else(|| mean_return_time(&crossings(trace, level)))
        .unwrap_or(0.0);
    let pts = poincare_section(trace, level, delay);
    let diam = diameter(&pts);
    let last_quarter = diameter(&pts[pts.len() - pts.len() / 4..]);
    let metrics = AttractorMetrics {
        sup_deviation,
        spatial_inhomogeneity: spatial,
        temporal_amplitude: p2p,
        poincare_level: level,
        poincare_delay: delay,
        poincare_point_count: pts.len(),
        poincare_diameter: diam,
        last_quarter_diameter: last_quarter,
    };
    let periodic = !pts.is_empty() && diam < th.periodic_diameter;
    let kind = if sup_deviation < th.constant {
        AttractorKind::Constant
    } else if periodic && spatial < th.spatial_ratio * p2p {
        AttractorKind::HomogeneousPeriodic
    } else if periodic {
        AttractorKind::NonhomogeneousPeriodic
    } else if pts.len() >= th.quasi_points && diam > th.quasi_diameter && last_quarter > 0.5 * diam {
        AttractorKind::QuasiPeriodic
    } else {
        AttractorKind::Unresolved
    };
    Ok(AttractorClass { kind, metrics })
}

/// Named experiment: parameter offset and initial data around λ₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub mu: ParamPoint,
    pub ic: InitialCondition,
}

pub const PRESET_NAMES: [&str; 4] = ["d1", "d2", "d4", "d6"];

/// The four reference runs; `lambda0` is the base value of λ.
pub fn preset(name: &str, lambda0: f64) -> Option<Preset> {
    let sincos = InitialCondition::trig(lambda0, 0.5, 0.0, 0.0, 0.5);
    let coscos = InitialCondition::trig(lambda0, 0.0, 0.1, 0.0, 0.1);
    let (name, mu, ic) = match name {
        "d1" => ("d1", ParamPoint::new(-0.2, 0.00925), sincos),
        "d2" => ("d2", ParamPoint::new(-0.2, -0.02), sincos),
        "d4" => ("d4", ParamPoint::new(0.06, -0.03), coscos),
        "d6" => ("d6", ParamPoint::new(0.06, 0.00925), coscos),
        _ => return None,
    };
    Some(Preset { name: name.to_string(), mu, ic })
}

/// CSV of field snapshots: header t, x0..xM.
pub fn fields_csv(trace: &SimulationTrace, v_field: bool) -> String {
    let snaps = if v_field { &trace.v_snapshots } else { &trace.u_snapshots };
    let mut s = String::from("t");
    for i in 0..trace.grid.nodes() {
        let _ = write!(s, ",x{i}");
    }
    s.push('\n');
    for (t, row) in trace.snapshot_t.iter().zip(snaps) {
        let _ = write!(s, "{t:.8e}");
        for x in row {
            let _ = write!(s, ",{x:.8e}");
        }
        s.push('\n');
    }
    s
}

/// CSV of the probe series, every `every`-th sample.
pub fn probes_csv(trace: &SimulationTrace, every: usize) -> String {
    let mut s = String::from("t,u_pi,v_pi\n");
    for i in (0..trace.t.len()).step_by(every.max(1)) {
        let _ = writeln!(s, "{:.8e},{:.8e},{:.8e}", trace.t[i], trace.u_probe[i], trace.v_probe[i]);
    }
    s
}

pub fn poincare_csv(points: &[[f64; 2]]) -> String {
    let mut s = String::from("u_pi,u_pi_delayed\n");
    for p in points {
        let _ = writeln!(s, "{:.8e},{:.8e}", p[0], p[1]);
    }
    s
}
