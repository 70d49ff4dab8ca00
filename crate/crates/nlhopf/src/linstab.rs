//! Mode-wise characteristic equations η² − T_n η + D_n = 0, Hopf and Turing
//! curves of the Holling–Tanner model, and certification of double Hopf
//! points.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::model::{holling_tanner, HollingTanner, Kinetics, ModelSpec};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Tolerance on |ω₁/ω₂ − i/j| below which the pair is treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-6;
/// |T_m| below this counts as being on a Hopf boundary.
pub const MARGINAL_TOL: f64 = 1e-12;
/// Required accuracy of T = 0 at a certified double Hopf point.
pub const CRITICAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharQuad {
    pub trace: f64,
    pub det: f64,
    pub n: u32,
}

impl CharQuad {
    fn of(a: &Mat2, n: u32) -> Self {
        CharQuad { trace: linalg::trace(a), det: linalg::det(a), n }
    }
}

fn ht(spec: &ModelSpec) -> Result<&HollingTanner> {
    spec.holling()
        .ok_or_else(|| Error::Domain("operation defined for the Holling-Tanner model only".into()))
}

/// Mode-n matrix of the linearisation at absolute parameters (λ, c).
pub fn mode_matrix_at(spec: &ModelSpec, lambda: f64, c: f64, n: u32) -> Result<Mat2> {
    let lin = spec.linearization_at(lambda, c)?;
    Ok(if n == 0 {
        linalg::add(&lin.l, &lin.lhat)
    } else {
        let s = (n as f64 / spec.ell).powi(2);
        linalg::add(&lin.l, &linalg::scale(&linalg::diag(lin.diffusion), -s))
    })
}

pub fn char_quad(spec: &ModelSpec, lambda: f64, c: f64, n: u32) -> Result<CharQuad> {
    Ok(CharQuad::of(&mode_matrix_at(spec, lambda, c, n)?, n))
}

/// Curve values of the Holling–Tanner model at one λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curves {
    pub lambda: f64,
    pub p: f64,
    pub hopf_c0: f64,
    pub turing_cd: f64,
    d_sum: f64,
    ell: f64,
    p_max: f64,
}

impl Curves {
    /// c_n(λ) = p(λ) − (d₁+d₂)n²/ℓ².
    pub fn hopf_cn(&self, n: u32) -> f64 {
        self.p - self.d_sum * (n as f64 / self.ell).powi(2)
    }

    /// ℓ_n = n √((d₁+d₂)/(p(λ_p) − c)).
    pub fn ell_n(&self, n: u32, c: f64) -> Result<f64> {
        if c >= self.p_max {
            return Err(Error::UndefinedCurve(format!(
                "ell_n needs c < p(lambda_p) = {}, got c = {c}",
                self.p_max
            )));
        }
        Ok(n as f64 * (self.d_sum / (self.p_max - c)).sqrt())
    }
}

pub fn curves(spec: &ModelSpec, lambda: f64) -> Result<Curves> {
    let h = ht(spec)?;
    if !(lambda > 0.0 && h.beta * lambda < 1.0) {
        return Err(Error::Domain(format!("need 0 < lambda < 1/beta, got {lambda}")));
    }
    let p = h.p(lambda);
    let bl = h.beta * lambda;
    let s = 1.0 - 1.0 / (1.0 + lambda).sqrt();
    Ok(Curves {
        lambda,
        p,
        hopf_c0: p - bl,
        turing_cd: (h.d2 / h.d1) * (1.0 - bl) * s * s,
        d_sum: h.d1 + h.d2,
        ell: spec.ell,
        p_max: h.p(lambda_p(h.beta)),
    })
}

fn lambda_p(beta: f64) -> f64 {
    ((1.0 + beta) / beta).sqrt() - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalLambdas {
    /// Maximiser of p(λ).
    pub lambda_p: f64,
    /// Maximiser of c₀(λ); absent when β > 1.
    pub lambda_0: Option<f64>,
    /// Maximiser of the Turing curve c_d(λ).
    pub lambda_d: f64,
}

impl CriticalLambdas {
    pub fn lambda_0(&self) -> Result<f64> {
        self.lambda_0
            .ok_or_else(|| Error::UndefinedCurve("lambda_0 requires beta <= 1".into()))
    }
}

/// Golden-section search for the maximiser of a unimodal function on [a, b].
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

pub fn critical_lambdas(spec: &ModelSpec) -> Result<CriticalLambdas> {
    let h = ht(spec)?;
    let beta = h.beta;
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("need beta > 0, got {beta}")));
    }
    let lambda_0 = (beta <= 1.0).then(|| ((1.0 + beta) / (2.0 * beta)).sqrt() - 1.0);
    let cd = |l: f64| {
        let s = 1.0 - 1.0 / (1.0 + l).sqrt();
        (1.0 - beta * l) * s * s
    };
    let lambda_d = golden_max(cd, 0.0, 1.0 / beta, 1e-10);
    Ok(CriticalLambdas { lambda_p: lambda_p(beta), lambda_0, lambda_d })
}

/// ℓ* with ℓ*² = 2(d₁+d₂)/(1−β).
pub fn ell_star(spec: &ModelSpec) -> Result<f64> {
    let h = ht(spec)?;
    if !(h.beta > 0.0 && h.beta < 1.0) {
        return Err(Error::Domain(format!("need 0 < beta < 1, got {}", h.beta)));
    }
    Ok((2.0 * (h.d1 + h.d2) / (1.0 - h.beta)).sqrt())
}

/// Number of admissible double Hopf modes: ℓ/ℓ* − 1 when the ratio is an
/// integer, ⌊ℓ/ℓ*⌋ otherwise.
pub fn n_star(spec: &ModelSpec) -> Result<u32> {
    let r = spec.ell / ell_star(spec)?;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() <= 1e-12 * r {
        Ok(k as u32 - 1)
    } else {
        Ok(r.floor() as u32)
    }
}

/// λ^HH_{0,n} = (d₁+d₂)n²/(βℓ²), where c₀(λ) and c_n(λ) intersect.
pub fn lambda_hh(spec: &ModelSpec, n: u32) -> Result<f64> {
    let h = ht(spec)?;
    Ok((h.d1 + h.d2) * (n as f64).powi(2) / (h.beta * spec.ell * spec.ell))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleHopfPoint {
    pub lambda0: f64,
    pub c0: f64,
    pub n1: u32,
    pub n2: u32,
    pub omega1: f64,
    pub omega2: f64,
    pub resonance_ok: bool,
    pub transversal_modes_stable_up_to: u32,
}

/// Smallest m beyond which every mode m' ≥ m has T < 0 and D > 0 for the
/// linearisation at (λ, c).
fn mode_cutoff(spec: &ModelSpec, lambda: f64, c: f64) -> Result<u32> {
    let lin = spec.linearization_at(lambda, c)?;
    let [d1, d2] = lin.diffusion;
    let l = lin.l;
    // σ beyond which T(σ) = tr L − σ(d₁+d₂) < 0
    let mut sigma = match &spec.kinetics {
        Kinetics::HollingTanner(h) => h.p(lambda_p(h.beta)) + 1.0,
        Kinetics::Custom => linalg::trace(&l).max(0.0) + 1.0,
    } / (d1 + d2);
    // D(σ) = d₁d₂σ² − (d₁l₂₂ + d₂l₁₁)σ + det L is positive beyond its larger root
    let bq = -(d1 * l[1][1] + d2 * l[0][0]);
    let disc = bq * bq - 4.0 * d1 * d2 * linalg::det(&l);
    if disc >= 0.0 {
        sigma = sigma.max((-bq + disc.sqrt()) / (2.0 * d1 * d2));
    }
    let m = (sigma.max(0.0).sqrt() * spec.ell).floor() as u32 + 1;
    Ok(m)
}

fn check_resonance(omega1: f64, omega2: f64) -> Result<()> {
    let ratio = omega1.min(omega2) / omega1.max(omega2);
    for j in 1..=4u32 {
        for i in 1..=j {
            if (ratio - i as f64 / j as f64).abs() < RESONANCE_TOL {
                return Err(Error::Resonance { ratio: omega1 / omega2, i, j });
            }
        }
    }
    Ok(())
}

/// Certifies that the linearisation at absolute parameters (λ, c) has
/// purely imaginary pairs exactly on modes n₁ < n₂ and every other mode
/// up to the cutoff is strictly stable.
pub fn certify_double_hopf(
    spec: &ModelSpec,
    lambda: f64,
    c: f64,
    n1: u32,
    n2: u32,
) -> Result<DoubleHopfPoint> {
    if n1 >= n2 {
        return Err(Error::HypothesisViolation(format!(
            "need n1 < n2 for a two-component system, got ({n1}, {n2})"
        )));
    }
    let q1 = char_quad(spec, lambda, c, n1)?;
    let q2 = char_quad(spec, lambda, c, n2)?;
    for q in [q1, q2] {
        if q.trace.abs() > CRITICAL_TOL || q.det <= 0.0 {
            return Err(Error::HypothesisViolation(format!(
                "mode {} is not a Hopf mode: T = {:e}, D = {:e}",
                q.n, q.trace, q.det
            )));
        }
    }
    let omega1 = q1.det.sqrt();
    let omega2 = q2.det.sqrt();
    check_resonance(omega1, omega2)?;
    let m_max = mode_cutoff(spec, lambda, c)?.max(n2 + 1);
    for m in (0..=m_max).filter(|&m| m != n1 && m != n2) {
        let q = char_quad(spec, lambda, c, m)?;
        if !(q.trace < 0.0 && q.det > 0.0) {
            return Err(Error::HypothesisViolation(format!(
                "mode {m} is not strictly stable: T = {:e}, D = {:e}",
                q.trace, q.det
            )));
        }
    }
    Ok(DoubleHopfPoint {
        lambda0: lambda,
        c0: c,
        n1,
        n2,
        omega1,
        omega2,
        resonance_ok: true,
        transversal_modes_stable_up_to: m_max,
    })
}

/// The double Hopf point on modes 0 and n.
///
/// For Holling–Tanner the point is located in closed form. For custom
/// models the supplied base point is certified as it stands.
pub fn double_hopf(spec: &ModelSpec, n: u32) -> Result<DoubleHopfPoint> {
    match &spec.kinetics {
        Kinetics::HollingTanner(h) => {
            let ns = n_star(spec)?;
            if n < 1 || n > ns {
                return Err(Error::HypothesisViolation(format!(
                    "need 1 <= n <= N* = {ns}, got n = {n}"
                )));
            }
            let lambda0 = lambda_hh(spec, n)?;
            if h.beta * lambda0 >= 1.0 {
                return Err(Error::Domain(format!("beta*lambda0 = {} >= 1", h.beta * lambda0)));
            }
            let c0 = curves(spec, lambda0)?.hopf_c0;
            certify_double_hopf(spec, lambda0, c0, 0, n)
        }
        Kinetics::Custom => certify_double_hopf(spec, spec.base.0, spec.base.1, 0, n),
    }
}

/// The model re-expanded at the double Hopf point.
pub fn model_at(spec: &ModelSpec, dh: &DoubleHopfPoint) -> Result<ModelSpec> {
    match &spec.kinetics {
        Kinetics::HollingTanner(h) => {
            let mut out = holling_tanner(dh.lambda0, dh.c0, h.beta, h.d1, h.d2, spec.ell)?;
            out.labels = spec.labels.clone();
            Ok(out)
        }
        Kinetics::Custom => Ok(spec.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub status: Stability,
    /// First mode that violates (or sits on) a stability condition.
    pub binding_mode: Option<u32>,
    pub binding_quad: Option<CharQuad>,
    pub modes_checked: u32,
    /// Values of λ with c_j(λ) = c on the binding mode j (Holling–Tanner).
    pub hopf_lambdas: Vec<f64>,
}

pub fn stability_region(spec: &ModelSpec, lambda: f64, c: f64) -> Result<StabilityReport> {
    let m_max = mode_cutoff(spec, lambda, c)?;
    let mut marginal = None;
    let mut violating = None;
    for m in 0..=m_max {
        let q = char_quad(spec, lambda, c, m)?;
        if q.trace > MARGINAL_TOL || q.det < -MARGINAL_TOL {
            violating = Some(q);
            break;
        }
        if marginal.is_none() && (q.trace.abs() <= MARGINAL_TOL || q.det.abs() <= MARGINAL_TOL) {
            marginal = Some(q);
        }
    }
    let (status, binding) = match (violating, marginal) {
        (Some(q), _) => (Stability::Unstable, Some(q)),
        (None, Some(q)) => (Stability::Marginal, Some(q)),
        (None, None) => (Stability::Stable, None),
    };
    let hopf_lambdas = match (binding, spec.holling()) {
        (Some(q), Some(h)) => hopf_crossings(spec, h, q.n, c)?,
        _ => Vec::new(),
    };
    Ok(StabilityReport {
        status,
        binding_mode: binding.map(|q| q.n),
        binding_quad: binding,
        modes_checked: m_max + 1,
        hopf_lambdas,
    })
}

/// Roots in λ of c_j(λ) = c on (0, 1/β), by sampling and bisection.
fn hopf_crossings(spec: &ModelSpec, h: &HollingTanner, j: u32, c: f64) -> Result<Vec<f64>> {
    let hi = 1.0 / h.beta;
    let g = |l: f64| -> Result<f64> {
        let cv = curves(spec, l)?;
        Ok(if j == 0 { cv.hopf_c0 } else { cv.hopf_cn(j) } - c)
    };
    let samples = 400;
    let mut roots = Vec::new();
    let mut a = hi * 1e-9;
    let mut ga = g(a)?;
    for k in 1..=samples {
        let b = hi * (k as f64 / samples as f64) * (1.0 - 1e-9);
        let gb = g(b)?;
        if ga == 0.0 {
            roots.push(a);
        } else if ga * gb < 0.0 {
            let (mut lo, mut up, mut glo) = (a, b, ga);
            while up - lo > 1e-13 * hi {
                let mid = 0.5 * (lo + up);
                let gm = g(mid)?;
                if glo * gm <= 0.0 {
                    up = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push(0.5 * (lo + up));
        }
        a = b;
        ga = gb;
    }
    Ok(roots)
}

/// CSV samples of the curves over `lambdas`: lambda, p, c0, c1..cN, cd.
pub fn curves_csv(spec: &ModelSpec, lambdas: &[f64], n_max: u32) -> Result<String> {
    let mut out = String::from("lambda,p,c0");
    for n in 1..=n_max {
        let _ = write!(out, ",c{n}");
    }
    out.push_str(",cd\n");
    for &l in lambdas {
        let cv = curves(spec, l)?;
        let _ = write!(out, "{:.8e},{:.8e},{:.8e}", l, cv.p, cv.hopf_c0);
        for n in 1..=n_max {
            let _ = write!(out, ",{:.8e}", cv.hopf_cn(n));
        }
        let _ = writeln!(out, ",{:.8e}", cv.turing_cd);
    }
    Ok(out)
}
