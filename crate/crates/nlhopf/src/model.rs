//! Two-component nonlocal reaction-diffusion systems at a parameter point.
//!
//! A [`ModelSpec`] carries the linearisation at the equilibrium, its first
//! order parameter derivatives, and the second and third derivative tensors
//! of the nonlinearity in the variables (u, v, û, v̂), where û, v̂ are the
//! spatial averages.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, ZERO2};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamPoint {
    pub mu1: f64,
    pub mu2: f64,
}

impl ParamPoint {
    pub fn new(mu1: f64, mu2: f64) -> Self {
        ParamPoint { mu1, mu2 }
    }

    pub fn zero() -> Self {
        ParamPoint::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct LinearPart {
    pub D0: [f64; 2],
    pub L0: Mat2,
    pub Lhat0: Mat2,
    pub D1_10: Mat2,
    pub D1_01: Mat2,
    pub L1_10: Mat2,
    pub L1_01: Mat2,
    pub Lhat1_10: Mat2,
    pub Lhat1_01: Mat2,
}

/// Arguments of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    U = 0,
    V = 1,
    UHat = 2,
    VHat = 3,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::U, Var::V, Var::UHat, Var::VHat];

    pub fn from_index(i: usize) -> Var {
        Var::ALL[i]
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::V => "v",
            Var::UHat => "uh",
            Var::VHat => "vh",
        }
    }

    fn parse(s: &str) -> Option<(Var, &str)> {
        for (tok, var) in [("uh", Var::UHat), ("vh", Var::VHat), ("u", Var::U), ("v", Var::V)] {
            if let Some(rest) = s.strip_prefix(tok) {
                return Some((var, rest));
            }
        }
        None
    }
}

fn sorted<const N: usize>(mut idx: [usize; N]) -> [usize; N] {
    idx.sort_unstable();
    idx
}

fn label_of(idx: &[usize]) -> String {
    let mut s = String::from("F_");
    for &i in idx {
        s.push_str(Var::from_index(i).symbol());
    }
    s
}

fn parse_label(label: &str) -> Option<Vec<usize>> {
    let mut rest = label.strip_prefix("F_")?;
    let mut out = Vec::new();
    while !rest.is_empty() {
        let (var, r) = Var::parse(rest)?;
        out.push(var as usize);
        rest = r;
    }
    Some(out)
}

/// Second partial derivatives, one 2-vector per unordered pair of variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DerivTensor2 {
    entries: [[f64; 2]; 10],
}

fn pair_slot(a: usize, b: usize) -> usize {
    let [a, b] = sorted([a, b]);
    // rows of the upper triangle: a=0 → 0..4, a=1 → 4..7, a=2 → 7..9, a=3 → 9
    let start = [0, 4, 7, 9][a];
    start + (b - a)
}

impl DerivTensor2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, a: Var, b: Var) -> [f64; 2] {
        self.entries[pair_slot(a as usize, b as usize)]
    }

    pub fn set(&mut self, a: Var, b: Var, value: [f64; 2]) {
        self.entries[pair_slot(a as usize, b as usize)] = value;
    }

    pub fn at(&self, a: usize, b: usize) -> [f64; 2] {
        self.entries[pair_slot(a, b)]
    }

    /// All unordered pairs in storage order with their labels.
    pub fn iter(&self) -> impl Iterator<Item = ([usize; 2], String, [f64; 2])> + '_ {
        (0..4).flat_map(move |a| {
            (a..4).map(move |b| ([a, b], label_of(&[a, b]), self.at(a, b)))
        })
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|x| x.is_finite())
    }
}

/// Third partial derivatives, one 2-vector per unordered triple.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DerivTensor3 {
    entries: [[f64; 2]; 20],
}

fn triple_slot(a: usize, b: usize, c: usize) -> usize {
    let [a, b, c] = sorted([a, b, c]);
    let mut slot = 0;
    for i in 0..4 {
        for j in i..4 {
            for k in j..4 {
                if (i, j, k) == (a, b, c) {
                    return slot;
                }
                slot += 1;
            }
        }
    }
    unreachable!("variable index out of range")
}

impl DerivTensor3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, a: Var, b: Var, c: Var) -> [f64; 2] {
        self.entries[triple_slot(a as usize, b as usize, c as usize)]
    }

    pub fn set(&mut self, a: Var, b: Var, c: Var, value: [f64; 2]) {
        self.entries[triple_slot(a as usize, b as usize, c as usize)] = value;
    }

    pub fn at(&self, a: usize, b: usize, c: usize) -> [f64; 2] {
        self.entries[triple_slot(a, b, c)]
    }

    pub fn iter(&self) -> impl Iterator<Item = ([usize; 3], String, [f64; 2])> + '_ {
        (0..4).flat_map(move |a| {
            (a..4).flat_map(move |b| {
                (b..4).map(move |c| ([a, b, c], label_of(&[a, b, c]), self.at(a, b, c)))
            })
        })
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|x| x.is_finite())
    }
}

/// Holling–Tanner kinetics with nonlocal prey competition:
/// f₁ = u(1 − βû) − buv/(1+u), f₂ = cv(1 − v/u), with b = (1−βλ)(1+λ)/λ
/// so that (λ, λ) is the positive equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HollingTanner {
    pub beta: f64,
    pub d1: f64,
    pub d2: f64,
}

impl HollingTanner {
    pub fn b(&self, lambda: f64) -> f64 {
        (1.0 - self.beta * lambda) * (1.0 + lambda) / lambda
    }

    /// p(λ) = λ(1 − βλ)/(1 + λ).
    pub fn p(&self, lambda: f64) -> f64 {
        lambda * (1.0 - self.beta * lambda) / (1.0 + lambda)
    }

    pub fn reaction(&self, lambda: f64, c: f64, w: [f64; 4]) -> [f64; 2] {
        let [u, v, uh, _] = w;
        let b = self.b(lambda);
        [
            u * (1.0 - self.beta * uh) - b * u * v / (1.0 + u),
            c * v * (1.0 - v / u),
        ]
    }

    /// Local and nonlocal Jacobians at the equilibrium (λ, λ) for parameter c.
    pub fn jacobians(&self, lambda: f64, c: f64) -> (Mat2, Mat2) {
        let l = [[self.p(lambda), -(1.0 - self.beta * lambda)], [c, -c]];
        let lhat = [[-self.beta * lambda, 0.0], [0.0, 0.0]];
        (l, lhat)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kinetics {
    HollingTanner(HollingTanner),
    /// Nonlinearity known only through its Taylor coefficients.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub linear: LinearPart,
    pub d2: DerivTensor2,
    pub d3: DerivTensor3,
    pub ell: f64,
    pub equilibrium: [f64; 2],
    pub labels: String,
    pub kinetics: Kinetics,
    /// Parameter values (λ₀, c₀) at μ = 0.
    pub base: (f64, f64),
}

/// Linearisation of the full system at an arbitrary parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalLinear {
    pub l: Mat2,
    pub lhat: Mat2,
    pub diffusion: [f64; 2],
}

pub fn holling_tanner(
    lambda0: f64,
    c0: f64,
    beta: f64,
    d1: f64,
    d2: f64,
    ell: f64,
) -> Result<ModelSpec> {
    let bl = beta * lambda0;
    if !(lambda0 > 0.0 && bl > 0.0 && bl < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < beta*lambda0 < 1 with lambda0 > 0, got beta = {beta}, lambda0 = {lambda0}"
        )));
    }
    if !(c0 > 0.0) {
        return Err(Error::Domain(format!("need c0 > 0, got {c0}")));
    }
    if !(d1 > 0.0 && d2 > 0.0 && ell > 0.0) {
        return Err(Error::Domain(format!(
            "need d1, d2, ell > 0, got ({d1}, {d2}, {ell})"
        )));
    }
    let ht = HollingTanner { beta, d1, d2 };
    let lam = lambda0;
    let (l0, lhat0) = ht.jacobians(lam, c0);
    let l1_10 = [
        [(1.0 - 2.0 * bl - bl * lam) / (1.0 + lam).powi(2), beta],
        [0.0, 0.0],
    ];
    let linear = LinearPart {
        D0: [d1, d2],
        L0: l0,
        Lhat0: lhat0,
        D1_10: ZERO2,
        D1_01: ZERO2,
        L1_10: l1_10,
        L1_01: [[0.0, 0.0], [1.0, -1.0]],
        Lhat1_10: [[-beta, 0.0], [0.0, 0.0]],
        Lhat1_01: ZERO2,
    };

    let b = ht.b(lam);
    let (u, v, c) = (lam, lam, c0);
    let mut t2 = DerivTensor2::zero();
    t2.set(Var::U, Var::U, [2.0 * b * v / (1.0 + u).powi(3), -2.0 * c * v * v / u.powi(3)]);
    t2.set(Var::U, Var::V, [-b / (1.0 + u).powi(2), 2.0 * c * v / (u * u)]);
    t2.set(Var::V, Var::V, [0.0, -2.0 * c / u]);
    t2.set(Var::U, Var::UHat, [-beta, 0.0]);

    let mut t3 = DerivTensor3::zero();
    t3.set(Var::U, Var::U, Var::U, [-6.0 * b * v / (1.0 + u).powi(4), 6.0 * c * v * v / u.powi(4)]);
    t3.set(Var::U, Var::U, Var::V, [2.0 * b / (1.0 + u).powi(3), -4.0 * c * v / u.powi(3)]);
    t3.set(Var::U, Var::V, Var::V, [0.0, 2.0 * c / (u * u)]);

    Ok(ModelSpec {
        linear,
        d2: t2,
        d3: t3,
        ell,
        equilibrium: [lam, lam],
        labels: "holling_tanner".to_string(),
        kinetics: Kinetics::HollingTanner(ht),
        base: (lambda0, c0),
    })
}

impl ModelSpec {
    /// A model given only by its linear part and derivative tensors.
    pub fn custom(
        linear: LinearPart,
        d2: DerivTensor2,
        d3: DerivTensor3,
        ell: f64,
        equilibrium: [f64; 2],
        name: &str,
    ) -> Result<ModelSpec> {
        let spec = ModelSpec {
            linear,
            d2,
            d3,
            ell,
            equilibrium,
            labels: name.to_string(),
            kinetics: Kinetics::Custom,
            base: (0.0, 0.0),
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if !(self.ell > 0.0) {
            return Err(Error::Domain(format!("ell must be positive, got {}", self.ell)));
        }
        if !(self.linear.D0[0] > 0.0 && self.linear.D0[1] > 0.0) {
            return Err(Error::Domain(format!(
                "diffusion coefficients must be positive, got {:?}",
                self.linear.D0
            )));
        }
        let lin = &self.linear;
        let mats = [
            lin.L0, lin.Lhat0, lin.D1_10, lin.D1_01, lin.L1_10, lin.L1_01, lin.Lhat1_10, lin.Lhat1_01,
        ];
        let finite = mats.iter().flatten().flatten().all(|x| x.is_finite())
            && self.equilibrium.iter().all(|x| x.is_finite());
        if !finite || !self.d2.is_finite() || !self.d3.is_finite() {
            return Err(Error::Domain("non-finite model entry".to_string()));
        }
        Ok(())
    }

    pub fn holling(&self) -> Option<&HollingTanner> {
        match &self.kinetics {
            Kinetics::HollingTanner(ht) => Some(ht),
            Kinetics::Custom => None,
        }
    }

    /// A_n: the linear operator restricted to the n-th cosine mode.
    pub fn mode_matrix(&self, n: u32) -> Mat2 {
        let lin = &self.linear;
        if n == 0 {
            linalg::add(&lin.L0, &lin.Lhat0)
        } else {
            let s = (n as f64 / self.ell).powi(2);
            linalg::add(&lin.L0, &linalg::scale(&linalg::diag(lin.D0), -s))
        }
    }

    /// Parameter offset for absolute parameter values (λ, c).
    pub fn mu_of(&self, lambda: f64, c: f64) -> ParamPoint {
        ParamPoint::new(lambda - self.base.0, c - self.base.1)
    }

    pub fn diffusion_at(&self, mu: ParamPoint) -> [f64; 2] {
        let lin = &self.linear;
        [
            lin.D0[0] + mu.mu1 * lin.D1_10[0][0] + mu.mu2 * lin.D1_01[0][0],
            lin.D0[1] + mu.mu1 * lin.D1_10[1][1] + mu.mu2 * lin.D1_01[1][1],
        ]
    }

    /// Linearisation at absolute parameters (λ, c). Exact for Holling–Tanner,
    /// first-order Taylor otherwise.
    pub fn linearization_at(&self, lambda: f64, c: f64) -> Result<LocalLinear> {
        match &self.kinetics {
            Kinetics::HollingTanner(ht) => {
                let bl = ht.beta * lambda;
                if !(lambda > 0.0 && bl < 1.0) {
                    return Err(Error::Domain(format!(
                        "need 0 < beta*lambda < 1, got lambda = {lambda}"
                    )));
                }
                let (l, lhat) = ht.jacobians(lambda, c);
                Ok(LocalLinear { l, lhat, diffusion: [ht.d1, ht.d2] })
            }
            Kinetics::Custom => {
                let mu = self.mu_of(lambda, c);
                let lin = &self.linear;
                let l = linalg::add(
                    &lin.L0,
                    &linalg::add(&linalg::scale(&lin.L1_10, mu.mu1), &linalg::scale(&lin.L1_01, mu.mu2)),
                );
                let lhat = linalg::add(
                    &lin.Lhat0,
                    &linalg::add(
                        &linalg::scale(&lin.Lhat1_10, mu.mu1),
                        &linalg::scale(&lin.Lhat1_01, mu.mu2),
                    ),
                );
                Ok(LocalLinear { l, lhat, diffusion: self.diffusion_at(mu) })
            }
        }
    }

    pub fn equilibrium_at(&self, mu: ParamPoint) -> [f64; 2] {
        match &self.kinetics {
            Kinetics::HollingTanner(_) => {
                let lam = self.base.0 + mu.mu1;
                [lam, lam]
            }
            Kinetics::Custom => self.equilibrium,
        }
    }

    /// Full reaction term at parameter offset `mu`, in absolute variables
    /// (u, v, û, v̂). Custom models use their cubic Taylor polynomial.
    pub fn reaction(&self, mu: ParamPoint, w: [f64; 4]) -> [f64; 2] {
        match &self.kinetics {
            Kinetics::HollingTanner(ht) => {
                ht.reaction(self.base.0 + mu.mu1, self.base.1 + mu.mu2, w)
            }
            Kinetics::Custom => self.taylor_reaction(mu, w),
        }
    }

    fn taylor_reaction(&self, mu: ParamPoint, w: [f64; 4]) -> [f64; 2] {
        let e = self.equilibrium;
        let y = [w[0] - e[0], w[1] - e[1], w[2] - e[0], w[3] - e[1]];
        let lin = &self.linear;
        let l = linalg::add(
            &lin.L0,
            &linalg::add(&linalg::scale(&lin.L1_10, mu.mu1), &linalg::scale(&lin.L1_01, mu.mu2)),
        );
        let lh = linalg::add(
            &lin.Lhat0,
            &linalg::add(&linalg::scale(&lin.Lhat1_10, mu.mu1), &linalg::scale(&lin.Lhat1_01, mu.mu2)),
        );
        let mut out = [0.0; 2];
        for (r, o) in out.iter_mut().enumerate() {
            *o = l[r][0] * y[0] + l[r][1] * y[1] + lh[r][0] * y[2] + lh[r][1] * y[3];
        }
        for a in 0..4 {
            for b in 0..4 {
                let t = self.d2.at(a, b);
                for (r, o) in out.iter_mut().enumerate() {
                    *o += 0.5 * t[r] * y[a] * y[b];
                }
                for c in 0..4 {
                    let t = self.d3.at(a, b, c);
                    for (r, o) in out.iter_mut().enumerate() {
                        *o += t[r] * y[a] * y[b] * y[c] / 6.0;
                    }
                }
            }
        }
        out
    }

    /// Parses a JSON model description:
    /// `{"kind": "holling_tanner" | "custom", "params": {...}, "tensors": {...}}`.
    pub fn from_json_str(text: &str) -> Result<ModelSpec> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::Parse("top level must be an object".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("kind: missing or not a string".into()))?;
        let empty = Map::new();
        let params = match obj.get("params") {
            None => &empty,
            Some(v) => v
                .as_object()
                .ok_or_else(|| Error::Parse("params: expected an object".into()))?,
        };
        let mut spec = match kind {
            "holling_tanner" => {
                let d = HollingTannerDefaults::default();
                let ell = match (params.get("ell"), params.get("ell2")) {
                    (Some(_), _) => num(params, "ell")?,
                    (None, Some(_)) => num(params, "ell2")?.sqrt(),
                    (None, None) => d.ell,
                };
                holling_tanner(
                    num_or(params, "lambda0", d.lambda0)?,
                    num_or(params, "c0", d.c0)?,
                    num_or(params, "beta", d.beta)?,
                    num_or(params, "d1", d.d1)?,
                    num_or(params, "d2", d.d2)?,
                    ell,
                )
                .map_err(|e| Error::Parse(format!("params: {e}")))?
            }
            "custom" => {
                let linear = LinearPart {
                    D0: vec2(params, "D0")?,
                    L0: mat(params, "L0")?,
                    Lhat0: mat_or_zero(params, "Lhat0")?,
                    D1_10: mat_or_zero(params, "D1_10")?,
                    D1_01: mat_or_zero(params, "D1_01")?,
                    L1_10: mat_or_zero(params, "L1_10")?,
                    L1_01: mat_or_zero(params, "L1_01")?,
                    Lhat1_10: mat_or_zero(params, "Lhat1_10")?,
                    Lhat1_01: mat_or_zero(params, "Lhat1_01")?,
                };
                let equilibrium = if params.contains_key("equilibrium") {
                    vec2(params, "equilibrium")?
                } else {
                    [0.0, 0.0]
                };
                let mut spec = ModelSpec::custom(
                    linear,
                    DerivTensor2::zero(),
                    DerivTensor3::zero(),
                    num(params, "ell")?,
                    equilibrium,
                    "custom",
                )
                .map_err(|e| Error::Parse(format!("params: {e}")))?;
                spec.base = (num_or(params, "lambda0", 0.0)?, num_or(params, "c0", 0.0)?);
                spec
            }
            other => return Err(Error::Parse(format!("kind: unknown model kind '{other}'"))),
        };
        if let Some(name) = obj.get("name").and_then(Value::as_str) {
            spec.labels = name.to_string();
        }
        if let Some(t) = obj.get("tensors") {
            let t = t
                .as_object()
                .ok_or_else(|| Error::Parse("tensors: expected an object".into()))?;
            for (key, val) in t {
                let idx = parse_label(key)
                    .ok_or_else(|| Error::Parse(format!("tensors.{key}: unknown entry name")))?;
                let pair = pair_value(val).map_err(|m| Error::Parse(format!("tensors.{key}: {m}")))?;
                match *idx.as_slice() {
                    [a, b] => spec.d2.entries[pair_slot(a, b)] = pair,
                    [a, b, c] => spec.d3.entries[triple_slot(a, b, c)] = pair,
                    _ => {
                        return Err(Error::Parse(format!(
                            "tensors.{key}: only second and third derivatives are accepted"
                        )))
                    }
                }
            }
        }
        spec.check().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(spec)
    }

    /// JSON description that [`ModelSpec::from_json_str`] reads back.
    pub fn to_json_value(&self) -> Value {
        let mut tensors = Map::new();
        for (_, label, v) in self.d2.iter() {
            if v != [0.0, 0.0] {
                tensors.insert(label, serde_json::json!(v));
            }
        }
        for (_, label, v) in self.d3.iter() {
            if v != [0.0, 0.0] {
                tensors.insert(label, serde_json::json!(v));
            }
        }
        match &self.kinetics {
            Kinetics::HollingTanner(ht) => serde_json::json!({
                "kind": "holling_tanner",
                "name": self.labels,
                "params": {
                    "lambda0": self.base.0, "c0": self.base.1, "beta": ht.beta,
                    "d1": ht.d1, "d2": ht.d2, "ell": self.ell
                },
            }),
            Kinetics::Custom => {
                let lin = &self.linear;
                serde_json::json!({
                    "kind": "custom",
                    "name": self.labels,
                    "params": {
                        "ell": self.ell, "equilibrium": self.equilibrium,
                        "lambda0": self.base.0, "c0": self.base.1,
                        "D0": lin.D0, "L0": lin.L0, "Lhat0": lin.Lhat0,
                        "D1_10": lin.D1_10, "D1_01": lin.D1_01,
                        "L1_10": lin.L1_10, "L1_01": lin.L1_01,
                        "Lhat1_10": lin.Lhat1_10, "Lhat1_01": lin.Lhat1_01
                    },
                    "tensors": tensors,
                })
            }
        }
    }
}

/// Defaults of the built-in Holling–Tanner example.
#[derive(Debug, Clone, Copy)]
pub struct HollingTannerDefaults {
    pub lambda0: f64,
    pub c0: f64,
    pub beta: f64,
    pub d1: f64,
    pub d2: f64,
    pub ell: f64,
}

impl Default for HollingTannerDefaults {
    fn default() -> Self {
        HollingTannerDefaults {
            lambda0: 1.0,
            c0: 0.35,
            beta: 0.1,
            d1: 0.6,
            d2: 0.2,
            ell: 8f64.sqrt(),
        }
    }
}

fn num(params: &Map<String, Value>, key: &str) -> Result<f64> {
    match params.get(key) {
        None => Err(Error::Parse(format!("params.{key}: missing"))),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("params.{key}: expected a number"))),
    }
}

fn num_or(params: &Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    if params.contains_key(key) {
        num(params, key)
    } else {
        Ok(default)
    }
}

fn pair_value(v: &Value) -> std::result::Result<[f64; 2], String> {
    let arr = v.as_array().ok_or("expected [number, number]")?;
    if arr.len() != 2 {
        return Err("expected [number, number]".into());
    }
    let a = arr[0].as_f64().ok_or("expected [number, number]")?;
    let b = arr[1].as_f64().ok_or("expected [number, number]")?;
    Ok([a, b])
}

fn vec2(params: &Map<String, Value>, key: &str) -> Result<[f64; 2]> {
    let v = params
        .get(key)
        .ok_or_else(|| Error::Parse(format!("params.{key}: missing")))?;
    pair_value(v).map_err(|m| Error::Parse(format!("params.{key}: {m}")))
}

fn mat(params: &Map<String, Value>, key: &str) -> Result<Mat2> {
    let bad = || Error::Parse(format!("params.{key}: expected a 2x2 array of numbers"));
    let rows = params
        .get(key)
        .ok_or_else(|| Error::Parse(format!("params.{key}: missing")))?
        .as_array()
        .ok_or_else(bad)?;
    if rows.len() != 2 {
        return Err(bad());
    }
    let r0 = pair_value(&rows[0]).map_err(|_| bad())?;
    let r1 = pair_value(&rows[1]).map_err(|_| bad())?;
    Ok([r0, r1])
}

fn mat_or_zero(params: &Map<String, Value>, key: &str) -> Result<Mat2> {
    if params.contains_key(key) {
        mat(params, key)
    } else {
        Ok(ZERO2)
    }
}

/// One compared tensor entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivEntry {
    pub label: String,
    pub order: u8,
    pub stored: [f64; 2],
    pub finite_difference: [f64; 2],
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub step: f64,
    pub third_order_step: f64,
    pub entries: Vec<DerivEntry>,
}

impl DerivativeReport {
    pub fn max_error(&self, order: u8) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.order == order)
            .map(|e| e.error)
            .fold(0.0, f64::max)
    }

    pub fn flagged(&self, tol: f64) -> Vec<&DerivEntry> {
        self.entries.iter().filter(|e| e.error > tol).collect()
    }

    pub fn entry(&self, label: &str) -> Option<&DerivEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// Smallest step used for third-order stencils. Below it the 1/h³ roundoff
/// of double precision dominates the truncation error.
pub const THIRD_ORDER_MIN_STEP: f64 = 5e-4;

impl fmt::Display for DerivativeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{:<12} order {} error {:.3e}", e.label, e.order, e.error)?;
        }
        Ok(())
    }
}

/// Compares the stored tensors with central differences of `raw_f` at the
/// equilibrium. Second-order entries use step `h`; third-order entries use
/// `max(h, THIRD_ORDER_MIN_STEP)`.
pub fn validate_derivatives<F>(spec: &ModelSpec, raw_f: F, h: f64) -> Result<DerivativeReport>
where
    F: Fn([f64; 4]) -> [f64; 2],
{
    if !(h > 0.0 && h < 1e-2) {
        return Err(Error::Domain(format!("step must lie in (0, 1e-2), got {h}")));
    }
    let e = spec.equilibrium;
    let x0 = [e[0], e[1], e[0], e[1]];
    let eval = |x: [f64; 4]| -> Result<[f64; 2]> {
        let y = raw_f(x);
        if y.iter().all(|v| v.is_finite()) {
            Ok(y)
        } else {
            Err(Error::Evaluation(x))
        }
    };
    let shifted = |dirs: &[(usize, f64)]| {
        let mut x = x0;
        for &(i, s) in dirs {
            x[i] += s;
        }
        x
    };

    let mut entries = Vec::new();
    for (idx, label, stored) in spec.d2.iter() {
        let [a, b] = idx;
        let mut fd = [0.0; 2];
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                let y = eval(shifted(&[(a, sa * h), (b, sb * h)]))?;
                for r in 0..2 {
                    fd[r] += sa * sb * y[r];
                }
            }
        }
        for v in &mut fd {
            *v /= 4.0 * h * h;
        }
        entries.push(compare(label, 2, stored, fd));
    }

    let h3 = h.max(THIRD_ORDER_MIN_STEP);
    for (idx, label, stored) in spec.d3.iter() {
        let [a, b, c] = idx;
        let mut fd = [0.0; 2];
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                for sc in [1.0, -1.0] {
                    let y = eval(shifted(&[(a, sa * h3), (b, sb * h3), (c, sc * h3)]))?;
                    for r in 0..2 {
                        fd[r] += sa * sb * sc * y[r];
                    }
                }
            }
        }
        for v in &mut fd {
            *v /= 8.0 * h3 * h3 * h3;
        }
        entries.push(compare(label, 3, stored, fd));
    }
    Ok(DerivativeReport { step: h, third_order_step: h3, entries })
}

fn compare(label: String, order: u8, stored: [f64; 2], fd: [f64; 2]) -> DerivEntry {
    let error = (stored[0] - fd[0]).abs().max((stored[1] - fd[1]).abs());
    DerivEntry { label, order, stored, finite_difference: fd, error }
}
