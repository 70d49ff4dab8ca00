//! The planar amplitude system
//! ρ̇₁ = ρ₁(κ₁ + ρ₁² + b₀ρ₂²), ρ̇₂ = ρ₂(κ₂ + c₀ρ₁² + d₀ρ₂²)
//! in rescaled time t̃ = ε₁t: equilibria, unfolding type, bifurcation lines
//! and predicted attractors.

use crate::error::{Error, Result};
use crate::model::ParamPoint;
use crate::normalform::PolarCoeffs;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Quantities closer to zero than this are treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarSystem {
    pub coeffs: PolarCoeffs,
    pub mu: ParamPoint,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Spatial modes of the two Hopf pairs.
    pub n1: u32,
    pub n2: u32,
}

impl PlanarSystem {
    pub fn new(coeffs: PolarCoeffs, mu: ParamPoint, n1: u32, n2: u32) -> Self {
        let (kappa1, kappa2) = coeffs.kappa(mu.mu1, mu.mu2);
        PlanarSystem { coeffs, mu, kappa1, kappa2, n1, n2 }
    }

    /// Vector field in original time, ε₁ × the rescaled field.
    pub fn field(&self, rho: [f64; 2]) -> [f64; 2] {
        let p = &self.coeffs;
        let [r1, r2] = rho;
        [
            p.eps1 * r1 * (self.kappa1 + r1 * r1 + p.b0 * r2 * r2),
            p.eps1 * r2 * (self.kappa2 + p.c0_coupling * r1 * r1 + p.d0 * r2 * r2),
        ]
    }

    pub fn jacobian(&self, rho: [f64; 2]) -> [[f64; 2]; 2] {
        let p = &self.coeffs;
        let [r1, r2] = rho;
        let e = p.eps1;
        [
            [
                e * (self.kappa1 + 3.0 * r1 * r1 + p.b0 * r2 * r2),
                e * 2.0 * p.b0 * r1 * r2,
            ],
            [
                e * 2.0 * p.c0_coupling * r1 * r2,
                e * (self.kappa2 + p.c0_coupling * r1 * r1 + 3.0 * p.d0 * r2 * r2),
            ],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EqLabel {
    E1,
    E2,
    E3,
    E4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueStability {
    Stable,
    Saddle,
    Unstable,
    NonHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpretation {
    ConstantState,
    HomogeneousPeriodic,
    NonhomogeneousPeriodic,
    QuasiPeriodic,
}

impl Interpretation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Interpretation::ConstantState => "constant",
            Interpretation::HomogeneousPeriodic => "homogeneous-periodic",
            Interpretation::NonhomogeneousPeriodic => "nonhomogeneous-periodic",
            Interpretation::QuasiPeriodic => "quasi-periodic",
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumInfo {
    pub label: EqLabel,
    pub coords: [f64; 2],
    pub exists: bool,
    /// Stability for the original time direction; absent when the point does not exist.
    pub true_time_stability: Option<TrueStability>,
    pub interpretation: Interpretation,
}

fn periodic(n: u32) -> Interpretation {
    if n == 0 {
        Interpretation::HomogeneousPeriodic
    } else {
        Interpretation::NonhomogeneousPeriodic
    }
}

fn stability_of(j: [[f64; 2]; 2]) -> TrueStability {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    if det < -tol * scale {
        TrueStability::Saddle
    } else if det <= tol * scale || tr.abs() <= tol {
        TrueStability::NonHyperbolic
    } else if tr < 0.0 {
        TrueStability::Stable
    } else {
        TrueStability::Unstable
    }
}

pub fn equilibria(sys: &PlanarSystem) -> Vec<EquilibriumInfo> {
    let p = &sys.coeffs;
    let (k1, k2) = (sys.kappa1, sys.kappa2);
    let disc = p.d0 - p.b0 * p.c0_coupling;
    let r1sq = (p.b0 * k2 - p.d0 * k1) / disc;
    let r2sq = (p.c0_coupling * k1 - k2) / disc;
    let candidates = [
        (EqLabel::E1, true, [0.0, 0.0], Interpretation::ConstantState),
        (EqLabel::E2, k1 < 0.0, [(-k1).max(0.0).sqrt(), 0.0], periodic(sys.n1)),
        (EqLabel::E3, p.d0 * k2 < 0.0, [0.0, (-k2 / p.d0).max(0.0).sqrt()], periodic(sys.n2)),
        (
            EqLabel::E4,
            r1sq > 0.0 && r2sq > 0.0,
            [r1sq.max(0.0).sqrt(), r2sq.max(0.0).sqrt()],
            Interpretation::QuasiPeriodic,
        ),
    ];
    candidates
        .into_iter()
        .map(|(label, exists, coords, interpretation)| EquilibriumInfo {
            label,
            coords: if exists { coords } else { [0.0, 0.0] },
            exists,
            true_time_stability: exists.then(|| stability_of(sys.jacobian(coords))),
            interpretation,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    Ia,
    Ib,
    II,
    III,
    IVa,
    IVb,
    V,
    VIa,
    VIb,
    VIIa,
    VIIb,
    VIII,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingCase {
    pub case_id: CaseId,
    /// Signs of (d₀, b₀, c₀, d₀ − b₀c₀).
    pub signs: [i8; 4],
}

pub fn classify_unfolding(coeffs: &PolarCoeffs) -> Result<UnfoldingCase> {
    let disc = coeffs.discriminant();
    for (name, v) in [
        ("d0", coeffs.d0),
        ("b0", coeffs.b0),
        ("c0", coeffs.c0_coupling),
        ("d0 - b0*c0", disc),
    ] {
        if v.abs() <= DEGENERACY_TOL {
            return Err(Error::DegenerateClassification(format!("{name} = {v:e}")));
        }
    }
    let s = |x: f64| if x > 0.0 { 1i8 } else { -1 };
    let signs = [s(coeffs.d0), s(coeffs.b0), s(coeffs.c0_coupling), s(disc)];
    let case_id = match signs {
        [1, 1, 1, 1] => CaseId::Ia,
        [1, 1, 1, -1] => CaseId::Ib,
        [1, 1, -1, 1] => CaseId::II,
        [1, -1, 1, 1] => CaseId::III,
        [1, -1, -1, 1] => CaseId::IVa,
        [1, -1, -1, -1] => CaseId::IVb,
        [-1, 1, 1, -1] => CaseId::V,
        [-1, 1, -1, 1] => CaseId::VIa,
        [-1, 1, -1, -1] => CaseId::VIb,
        [-1, -1, 1, 1] => CaseId::VIIa,
        [-1, -1, 1, -1] => CaseId::VIIb,
        [-1, -1, -1, -1] => CaseId::VIII,
        other => {
            return Err(Error::Domain(format!("sign pattern {other:?} cannot occur")));
        }
    };
    Ok(UnfoldingCase { case_id, signs })
}

/// A line a·μ₁ + b·μ₂ = 0 through the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub name: String,
    pub a: f64,
    pub b: f64,
    /// μ₂/μ₁ along the line; absent for the vertical line μ₁ = 0.
    pub slope: Option<f64>,
}

impl Line {
    fn new(name: &str, a: f64, b: f64) -> Self {
        let slope = (b.abs() > DEGENERACY_TOL * a.abs().max(1.0)).then(|| -a / b);
        Line { name: name.to_string(), a, b, slope }
    }

    pub fn eval(&self, mu: ParamPoint) -> f64 {
        self.a * mu.mu1 + self.b * mu.mu2
    }

    /// The two ray angles in [0, 2π).
    fn angles(&self) -> [f64; 2] {
        let t = (-self.a).atan2(self.b).rem_euclid(PI);
        [t, t + PI]
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slope {
            Some(s) => write!(f, "{}: mu2 = {s:.6} mu1", self.name),
            None => write!(f, "{}: mu1 = 0", self.name),
        }
    }
}

/// L₁: κ₁ = 0, L₂: κ₂ = 0, T₁: d₀κ₁ = b₀κ₂, T₂: κ₂ = c₀κ₁.
pub fn bifurcation_lines(coeffs: &PolarCoeffs) -> Result<[Line; 4]> {
    let [a1, b1] = coeffs.kappa1;
    let [a2, b2] = coeffs.kappa2;
    let (b0, c0, d0) = (coeffs.b0, coeffs.c0_coupling, coeffs.d0);
    let lines = [
        Line::new("L1", a1, b1),
        Line::new("L2", a2, b2),
        Line::new("T1", d0 * a1 - b0 * a2, d0 * b1 - b0 * b2),
        Line::new("T2", a2 - c0 * a1, b2 - c0 * b1),
    ];
    for l in &lines {
        if l.a.abs().max(l.b.abs()) <= DEGENERACY_TOL {
            return Err(Error::DegenerateClassification(format!("line {} has no direction", l.name)));
        }
    }
    Ok(lines)
}

/// Which equilibria exist and how stable they are.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Signature(Vec<(EqLabel, TrueStability)>);

fn signature(sys: &PlanarSystem) -> Signature {
    Signature(
        equilibria(sys)
            .into_iter()
            .filter_map(|e| e.true_time_stability.map(|s| (e.label, s)))
            .collect(),
    )
}

/// A sector of the (μ₁, μ₂) plane between consecutive boundary rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub label: String,
    /// Counterclockwise start and end angles in radians, start in [0, 2π).
    pub start: f64,
    pub end: f64,
}

impl Sector {
    fn contains(&self, theta: f64) -> bool {
        let span = self.end - self.start;
        let off = (theta - self.start).rem_euclid(2.0 * PI);
        off < span
    }
}

fn system_at(coeffs: &PolarCoeffs, theta: f64, n1: u32, n2: u32) -> PlanarSystem {
    PlanarSystem::new(*coeffs, ParamPoint::new(theta.cos(), theta.sin()), n1, n2)
}

/// Regions of the unfolding: maximal sectors with the same equilibrium
/// structure. Case IVa uses D1..D6 with D1 the sector where only E₁ exists,
/// numbered counterclockwise; other cases use S1.. from angle 0.
pub fn regions(coeffs: &PolarCoeffs, n1: u32, n2: u32) -> Result<Vec<Sector>> {
    let case = classify_unfolding(coeffs)?;
    let lines = bifurcation_lines(coeffs)?;
    let mut rays: Vec<f64> = lines.iter().flat_map(|l| l.angles()).collect();
    rays.sort_by(f64::total_cmp);
    rays.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let n = rays.len();
    let mut raw: Vec<(f64, f64, Signature)> = (0..n)
        .map(|i| {
            let start = rays[i];
            let end = if i + 1 < n { rays[i + 1] } else { rays[0] + 2.0 * PI };
            (start, end, signature(&system_at(coeffs, 0.5 * (start + end), n1, n2)))
        })
        .collect();
    // merge neighbours that share a signature, cyclically
    let mut merged: Vec<(f64, f64, Signature)> = Vec::new();
    for s in raw.drain(..) {
        match merged.last_mut() {
            Some(last) if last.2 == s.2 => last.1 = s.1,
            _ => merged.push(s),
        }
    }
    if merged.len() > 1 && merged[0].2 == merged[merged.len() - 1].2 {
        let last = merged.pop().expect("non-empty");
        merged[0].0 = last.0 - 2.0 * PI;
    }
    // normalise every sector to start in [0, 2π) with positive span
    let mut sectors: Vec<(f64, f64, Signature)> = merged
        .into_iter()
        .map(|(s, e, sig)| {
            let start = s.rem_euclid(2.0 * PI);
            let span = (e - s).rem_euclid(2.0 * PI);
            let span = if span == 0.0 { 2.0 * PI } else { span };
            (start, start + span, sig)
        })
        .collect();
    sectors.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = if case.case_id == CaseId::IVa {
        sectors
            .iter()
            .position(|s| s.2 .0.len() == 1)
            .ok_or_else(|| Error::DegenerateClassification("no sector with E1 alone".into()))?
    } else {
        sectors
            .iter()
            .position(|s| Sector { label: String::new(), start: s.0, end: s.1 }.contains(1e-12))
            .unwrap_or(0)
    };
    let prefix = if case.case_id == CaseId::IVa { "D" } else { "S" };
    let count = sectors.len();
    Ok((0..count)
        .map(|i| {
            let s = &sectors[(first + i) % count];
            Sector { label: format!("{prefix}{}", i + 1), start: s.0, end: s.1 }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub region: String,
    pub on_boundary: bool,
    /// Interpretation of the unique stable equilibrium, when there is one.
    pub attractor: Option<Interpretation>,
    pub stable: Vec<EqLabel>,
    pub equilibria: Vec<EquilibriumInfo>,
}

impl Prediction {
    pub fn attractor_str(&self) -> &'static str {
        self.attractor.map_or("none", |a| a.as_str())
    }
}

pub fn predict(sys: &PlanarSystem) -> Result<Prediction> {
    let lines = bifurcation_lines(&sys.coeffs)?;
    let mu = sys.mu;
    let r = mu.mu1.hypot(mu.mu2);
    let on_boundary = r == 0.0
        || lines
            .iter()
            .any(|l| l.eval(mu).abs() <= DEGENERACY_TOL * l.a.hypot(l.b) * r);
    let eqs = equilibria(sys);
    let stable: Vec<EqLabel> = eqs
        .iter()
        .filter(|e| e.true_time_stability == Some(TrueStability::Stable))
        .map(|e| e.label)
        .collect();
    let attractor = match stable.as_slice() {
        [only] => eqs.iter().find(|e| e.label == *only).map(|e| e.interpretation),
        _ => None,
    };
    let region = if on_boundary {
        "boundary".to_string()
    } else {
        let theta = mu.mu2.atan2(mu.mu1).rem_euclid(2.0 * PI);
        regions(&sys.coeffs, sys.n1, sys.n2)?
            .into_iter()
            .find(|s| s.contains(theta))
            .map_or_else(|| "boundary".to_string(), |s| s.label)
    };
    Ok(Prediction { region, on_boundary, attractor, stable, equilibria: eqs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSample {
    pub mu1: f64,
    pub mu2: f64,
    pub region: String,
    pub attractor: String,
}

/// Rasterises the region map over a rectangle; rows run in parallel.
pub fn region_map(
    coeffs: &PolarCoeffs,
    n1: u32,
    n2: u32,
    mu1: (f64, f64),
    mu2: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<Vec<RegionSample>> {
    let nx = nx.max(2);
    let ny = ny.max(2);
    let sectors = regions(coeffs, n1, n2)?;
    let rows: Vec<Result<Vec<RegionSample>>> = (0..ny)
        .into_par_iter()
        .map(|iy| {
            let m2 = mu2.0 + (mu2.1 - mu2.0) * iy as f64 / (ny - 1) as f64;
            (0..nx)
                .map(|ix| {
                    let m1 = mu1.0 + (mu1.1 - mu1.0) * ix as f64 / (nx - 1) as f64;
                    let sys = PlanarSystem::new(*coeffs, ParamPoint::new(m1, m2), n1, n2);
                    let p = predict(&sys)?;
                    let attractor = p.attractor_str().to_string();
                    let region = if p.on_boundary {
                        p.region
                    } else {
                        let theta = m2.atan2(m1).rem_euclid(2.0 * PI);
                        sectors
                            .iter()
                            .find(|s| s.contains(theta))
                            .map_or_else(|| "boundary".to_string(), |s| s.label.clone())
                    };
                    Ok(RegionSample {
                        mu1: m1,
                        mu2: m2,
                        region,
                        attractor,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(nx * ny);
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

pub fn region_map_csv(samples: &[RegionSample]) -> String {
    let mut s = String::from("mu1,mu2,region,attractor\n");
    for r in samples {
        s.push_str(&format!("{:.8e},{:.8e},{},{}\n", r.mu1, r.mu2, r.region, r.attractor));
    }
    s
}
