//! Third-order normal form on the center manifold of a double Hopf point.
//!
//! Multi-indices ι = (ι₁, ι₂, ι₃, ι₄) refer to monomials z₁^ι₁ z₂^ι₂ z₃^ι₃ z₄^ι₄
//! in the center coordinates, where z₂ = z̄₁ and z₄ = z̄₃. The four cubic
//! coefficients are B_ι = C_ι + (3/2)(D_ι + E_ι + Ê_ι).

use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CVec2, Mat2};
use crate::linstab::DoubleHopfPoint;
use crate::model::ModelSpec;
use crate::spectral::{self, delta_f, gamma_pair, gamma_triple, Mode};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub type Index = [u8; 4];

/// Quadratic monomials.
pub const QUADRATIC: [Index; 10] = [
    [2, 0, 0, 0],
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 1],
    [0, 2, 0, 0],
    [0, 1, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 2, 0],
    [0, 0, 1, 1],
    [0, 0, 0, 2],
];

/// Cubic monomials kept by the normal form, with the row (1 or 3) each belongs to.
pub const TARGETS: [(Index, usize); 4] = [
    ([2, 1, 0, 0], 1),
    ([1, 0, 1, 1], 1),
    ([0, 0, 2, 1], 3),
    ([1, 1, 1, 0], 3),
];

/// Quadratic indices whose center-manifold coefficients h feed the cubic terms.
pub const H_INDICES: [Index; 7] = [
    [2, 0, 0, 0],
    [1, 1, 0, 0],
    [0, 0, 1, 1],
    [1, 0, 1, 0],
    [1, 0, 0, 1],
    [0, 0, 2, 0],
    [0, 1, 1, 0],
];

/// Below this, a real part or denominator is treated as zero.
pub const SINGULAR_TOL: f64 = 1e-9;

pub fn label(idx: &Index) -> String {
    idx.iter().map(|d| char::from(b'0' + d)).collect()
}

pub fn parse_index(s: &str) -> Option<Index> {
    let b = s.as_bytes();
    if b.len() != 4 || !b.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some([b[0] - b'0', b[1] - b'0', b[2] - b'0', b[3] - b'0'])
}

/// Exchanges z₁ ↔ z₂ and z₃ ↔ z₄, which maps a coefficient to its conjugate.
pub fn swap(idx: &Index) -> Index {
    [idx[1], idx[0], idx[3], idx[2]]
}

/// λ_ι = Σ ιₘ Wₘ with W = (iω₁, −iω₁, iω₂, −iω₂).
fn frequency(idx: &Index, omega1: f64, omega2: f64) -> Complex64 {
    c(0.0, (idx[0] as f64 - idx[1] as f64) * omega1 + (idx[2] as f64 - idx[3] as f64) * omega2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NfCase {
    /// n₁ = n₂ = 0.
    #[serde(rename = "I")]
    I,
    /// n₁ = 0 < n₂.
    #[serde(rename = "II")]
    II,
    /// 0 < n₁ = n₂.
    #[serde(rename = "III(n2=n1)")]
    IIIEqual,
    /// 0 < n₁, n₂ = 2n₁.
    #[serde(rename = "III(n2=2n1)")]
    IIIDouble,
    /// 0 < n₁ < n₂, n₂ ≠ 2n₁.
    #[serde(rename = "III")]
    IIIGeneric,
}

impl NfCase {
    pub fn of(n1: u32, n2: u32) -> Result<NfCase> {
        if n1 > n2 {
            return Err(Error::Domain(format!("need n1 <= n2, got ({n1}, {n2})")));
        }
        Ok(match (n1, n2) {
            (0, 0) => NfCase::I,
            (0, _) => NfCase::II,
            (a, b) if a == b => NfCase::IIIEqual,
            (a, b) if b == 2 * a => NfCase::IIIDouble,
            _ => NfCase::IIIGeneric,
        })
    }

    /// Spatial modes j carrying nonzero h_j: 0, 2n₁, 2n₂, n₁+n₂, n₂−n₁.
    pub fn modes(n1: u32, n2: u32) -> Vec<u32> {
        let mut m = vec![0, 2 * n1, 2 * n2, n1 + n2, n2 - n1];
        m.sort_unstable();
        m.dedup();
        m
    }
}

impl fmt::Display for NfCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NfCase::I => "I",
            NfCase::II => "II",
            NfCase::IIIEqual => "III(n2=n1)",
            NfCase::IIIDouble => "III(n2=2n1)",
            NfCase::IIIGeneric => "III",
        };
        f.write_str(s)
    }
}

/// Coefficient vectors of the quadratic and cubic parts of F(Φz), together
/// with the linear maps F_{w z_k} and F_{ŵ z_k}.
#[derive(Debug, Clone, PartialEq)]
pub struct FVectors {
    pub f2: BTreeMap<Index, CVec2>,
    pub f3: BTreeMap<Index, CVec2>,
    /// fwz[a][k]: a ∈ {w₁, w₂, ŵ₁, ŵ₂}, k = 0..4 for z₁..z₄.
    pub fwz: [[CVec2; 4]; 4],
}

impl FVectors {
    pub fn f2(&self, idx: &Index) -> CVec2 {
        self.f2[idx]
    }

    pub fn f3(&self, idx: &Index) -> CVec2 {
        self.f3[idx]
    }

    /// S_{wz_k}(y) = F_{w₁z_k} y₁ + F_{w₂z_k} y₂, or the hatted version.
    pub fn s(&self, k: usize, y: &CVec2, hat: bool) -> CVec2 {
        let off = if hat { 2 } else { 0 };
        let a = self.fwz[off][k];
        let b = self.fwz[off + 1][k];
        [a[0] * y[0] + b[0] * y[1], a[1] * y[0] + b[1] * y[1]]
    }
}

/// Linear forms of (u, v, û, v̂) in z: row a, column k.
fn linear_forms(basis: &EigenBasis) -> [[Complex64; 4]; 4] {
    let mut lf = [[c(0.0, 0.0); 4]; 4];
    for k in 0..4 {
        let phi = basis.phi(k + 1);
        let d = delta_f(basis.mode(k + 1));
        lf[0][k] = phi[0];
        lf[1][k] = phi[1];
        lf[2][k] = phi[0] * d;
        lf[3][k] = phi[1] * d;
    }
    lf
}

/// Ordered k-tuples whose counts equal `idx`.
fn arrangements(idx: &Index) -> Vec<Vec<usize>> {
    let order: usize = idx.iter().map(|&d| d as usize).sum();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(order);
    fn rec(rem: &mut [u8; 4], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem.iter().all(|&d| d == 0) {
            out.push(cur.clone());
            return;
        }
        for k in 0..4 {
            if rem[k] > 0 {
                rem[k] -= 1;
                cur.push(k);
                rec(rem, cur, out);
                cur.pop();
                rem[k] += 1;
            }
        }
    }
    let mut rem = *idx;
    rec(&mut rem, &mut cur, &mut out);
    out
}

/// Coefficient of z^idx in Σ T[a₁..a_r] Π lf[a_s]·z.
fn expand<T: Fn(&[usize]) -> [f64; 2]>(tensor: T, lf: &[[Complex64; 4]; 4], idx: &Index) -> CVec2 {
    let arr = arrangements(idx);
    let order = arr[0].len();
    let mut out = linalg::czero2();
    let mut vars = vec![0usize; order];
    for code in 0..4usize.pow(order as u32) {
        let mut x = code;
        for v in vars.iter_mut() {
            *v = x % 4;
            x /= 4;
        }
        let t = tensor(&vars);
        if t == [0.0, 0.0] {
            continue;
        }
        let mut sum = c(0.0, 0.0);
        for ks in &arr {
            let mut p = c(1.0, 0.0);
            for (a, k) in vars.iter().zip(ks) {
                p *= lf[*a][*k];
            }
            sum += p;
        }
        out[0] += sum * t[0];
        out[1] += sum * t[1];
    }
    out
}

pub fn assemble_f_vectors(spec: &ModelSpec, basis: &EigenBasis) -> FVectors {
    let lf = linear_forms(basis);
    let t2 = |v: &[usize]| spec.d2.at(v[0], v[1]);
    let t3 = |v: &[usize]| spec.d3.at(v[0], v[1], v[2]);
    let mut f2 = BTreeMap::new();
    for idx in QUADRATIC {
        let sw = swap(&idx);
        if sw < idx {
            continue;
        }
        let v = expand(t2, &lf, &idx);
        f2.insert(idx, v);
        if sw != idx {
            f2.insert(sw, linalg::conj(&v));
        }
    }
    let mut f3 = BTreeMap::new();
    for (idx, _) in TARGETS {
        let v = expand(t3, &lf, &idx);
        f3.insert(idx, v);
        f3.insert(swap(&idx), linalg::conj(&v));
    }
    let mut fwz = [[linalg::czero2(); 4]; 4];
    for (a, row) in fwz.iter_mut().enumerate() {
        for k in [0, 2] {
            let mut v = linalg::czero2();
            for (b, lfb) in lf.iter().enumerate() {
                let t = spec.d2.at(a, b);
                v[0] += lfb[k] * (2.0 * t[0]);
                v[1] += lfb[k] * (2.0 * t[1]);
            }
            row[k] = v;
            row[k + 1] = linalg::conj(&v);
        }
    }
    FVectors { f2, f3, fwz }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SecondOrder {
    pub B11: Complex64,
    pub B21: Complex64,
    pub B13: Complex64,
    pub B23: Complex64,
}

pub fn second_order(spec: &ModelSpec, basis: &EigenBasis) -> SecondOrder {
    let lin = &spec.linear;
    let coeff = |k: usize, d1: &Mat2, l1: &Mat2, lh1: &Mat2| {
        let n = basis.mode(k);
        let sigma = (n as f64 / spec.ell).powi(2);
        let m = linalg::add(
            &linalg::add(&linalg::scale(d1, -sigma), l1),
            &linalg::scale(lh1, delta_f(n)),
        );
        linalg::dot(&basis.psibar(k), &linalg::matvec(&m, &basis.phi(k)))
    };
    SecondOrder {
        B11: coeff(1, &lin.D1_10, &lin.L1_10, &lin.Lhat1_10),
        B21: coeff(1, &lin.D1_01, &lin.L1_01, &lin.Lhat1_01),
        B13: coeff(3, &lin.D1_10, &lin.L1_10, &lin.Lhat1_10),
        B23: coeff(3, &lin.D1_01, &lin.L1_01, &lin.Lhat1_01),
    }
}

/// The γ_ij integrals of powers of ξ_{n₁} and ξ_{n₂}.
#[derive(Debug, Clone, PartialEq)]
pub struct Gammas {
    values: BTreeMap<(u32, u32), f64>,
}

impl Gammas {
    pub fn new(n1: u32, n2: u32, ell: f64) -> Result<Self> {
        let (m1, m2) = (Mode::new(n1, ell), Mode::new(n2, ell));
        let mut values = BTreeMap::new();
        for p in [(4, 0), (0, 4), (2, 2), (3, 0), (0, 3), (2, 1), (1, 2)] {
            values.insert(p, gamma_pair(p.0, p.1, m1, m2)?);
        }
        Ok(Gammas { values })
    }

    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.values[&(i, j)]
    }
}

/// The scalars f^{1(k)}_ι = ψ̄ₖ F_ι γ for |ι| = 2 and k = 1..4.
#[derive(Debug, Clone, PartialEq)]
pub struct F21Table {
    values: BTreeMap<(Index, usize), Complex64>,
}

impl F21Table {
    pub fn get(&self, idx: &Index, k: usize) -> Complex64 {
        self.values[&(*idx, k)]
    }

    /// f^{1(k)} with the index written as a string, e.g. `f("2000", 1)`.
    pub fn f(&self, idx: &str, k: usize) -> Complex64 {
        self.get(&parse_index(idx).expect("four-digit index"), k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Index, usize), &Complex64)> {
        self.values.iter()
    }
}

pub fn f21_table(fv: &FVectors, basis: &EigenBasis, g: &Gammas) -> F21Table {
    let mut values = BTreeMap::new();
    for idx in QUADRATIC {
        let a = (idx[0] + idx[1]) as u32;
        let b = (idx[2] + idx[3]) as u32;
        for k in 1..=4 {
            let gamma = if k <= 2 { g.get(a + 1, b) } else { g.get(a, b + 1) };
            let v = linalg::dot(&basis.psibar(k), &fv.f2(&idx)) * gamma;
            values.insert((idx, k), v);
        }
    }
    F21Table { values }
}

/// The four retained cubic coefficients of one kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Cubic {
    #[serde(rename = "2100")]
    pub c2100: Complex64,
    #[serde(rename = "1011")]
    pub c1011: Complex64,
    #[serde(rename = "0021")]
    pub c0021: Complex64,
    #[serde(rename = "1110")]
    pub c1110: Complex64,
}

impl Cubic {
    pub fn from_fn<F: FnMut(Index, usize) -> Complex64>(mut f: F) -> Cubic {
        let v: Vec<Complex64> = TARGETS.iter().map(|&(t, k)| f(t, k)).collect();
        Cubic { c2100: v[0], c1011: v[1], c0021: v[2], c1110: v[3] }
    }

    pub fn try_from_fn<F: FnMut(Index, usize) -> Result<Complex64>>(mut f: F) -> Result<Cubic> {
        let mut v = Vec::with_capacity(4);
        for &(t, k) in &TARGETS {
            v.push(f(t, k)?);
        }
        Ok(Cubic { c2100: v[0], c1011: v[1], c0021: v[2], c1110: v[3] })
    }

    /// Coefficient for a retained index or its conjugate partner.
    pub fn get(&self, idx: &Index) -> Option<Complex64> {
        let vals = [self.c2100, self.c1011, self.c0021, self.c1110];
        for (v, (t, _)) in vals.iter().zip(TARGETS) {
            if *idx == t {
                return Some(*v);
            }
            if *idx == swap(&t) {
                return Some(v.conj());
            }
        }
        None
    }

    pub fn values(&self) -> [Complex64; 4] {
        [self.c2100, self.c1011, self.c0021, self.c1110]
    }

    fn zip(&self, other: &Cubic, f: impl Fn(Complex64, Complex64) -> Complex64) -> Cubic {
        Cubic {
            c2100: f(self.c2100, other.c2100),
            c1011: f(self.c1011, other.c1011),
            c0021: f(self.c0021, other.c0021),
            c1110: f(self.c1110, other.c1110),
        }
    }
}

#[allow(non_snake_case)]
pub fn third_order_C(fv: &FVectors, basis: &EigenBasis, g: &Gammas) -> Cubic {
    Cubic::from_fn(|t, k| {
        let a = (t[0] + t[1]) as u32;
        let b = (t[2] + t[3]) as u32;
        let gamma = g.get(a + u32::from(k <= 2), b + u32::from(k > 2));
        linalg::dot(&basis.psibar(k), &fv.f3(&t)) * gamma / 6.0
    })
}

#[allow(non_snake_case)]
pub fn third_order_D(f21: &F21Table, omega1: f64, omega2: f64) -> Result<Cubic> {
    let i1 = c(0.0, omega1);
    let i2 = c(0.0, omega2);
    let dens = [
        ("i*omega1", i1),
        ("i*omega2", i2),
        ("2i*omega1 - i*omega2", 2.0 * i1 - i2),
        ("2i*omega1 + i*omega2", 2.0 * i1 + i2),
        ("i*omega1 - 2i*omega2", i1 - 2.0 * i2),
        ("i*omega1 + 2i*omega2", i1 + 2.0 * i2),
    ];
    for (name, d) in dens {
        if d.norm() < SINGULAR_TOL {
            return Err(Error::NearResonance(format!("D terms: {name} = {d}")));
        }
    }
    let f = |s: &str, k: usize| f21.f(s, k);
    let d2100 = (-f("2000", 1) * f("1100", 1) / i1
        + f("1100", 1) * f("1100", 2) / i1
        + 2.0 * f("0200", 1) * f("2000", 2) / (3.0 * i1)
        - f("1010", 1) * f("1100", 3) / i2
        + f("0110", 1) * f("2000", 3) / (2.0 * i1 - i2)
        + f("1001", 1) * f("1100", 4) / i2
        + f("0101", 1) * f("2000", 4) / (2.0 * i1 + i2))
        / 6.0;
    let d1011 = (-2.0 * f("2000", 1) * f("0011", 1) / i1
        + f("1100", 1) * f("0011", 2) / i1
        + f("0110", 1) * f("1001", 2) / (2.0 * i1 - i2)
        + f("0101", 1) * f("1010", 2) / (2.0 * i1 + i2)
        - f("1010", 1) * f("0011", 3) / i2
        + 2.0 * f("0020", 1) * f("1001", 3) / (i1 - 2.0 * i2)
        + f("0011", 1) * f("1010", 3) / i1
        + f("1001", 1) * f("0011", 4) / i2
        + f("0011", 1) * f("1001", 4) / i1
        + 2.0 * f("0002", 1) * f("1010", 4) / (i1 + 2.0 * i2))
        / 6.0;
    let d0021 = (-f("1010", 3) * f("0011", 1) / i1
        - f("1001", 3) * f("0020", 1) / (i1 - 2.0 * i2)
        + f("0110", 3) * f("0011", 2) / i1
        + f("0101", 3) * f("0020", 2) / (i1 + 2.0 * i2)
        - f("0020", 3) * f("0011", 3) / i2
        + f("0011", 3) * f("0011", 4) / i2
        + 2.0 * f("0002", 3) * f("0020", 4) / (3.0 * i2))
        / 6.0;
    let d1110 = (-2.0 * f("2000", 3) * f("0110", 1) / (2.0 * i1 - i2)
        + f("1100", 3) * f("1010", 1) / i2
        - f("1010", 3) * f("1100", 1) / i1
        + f("1100", 3) * f("0110", 2) / i2
        + 2.0 * f("0200", 3) * f("1010", 2) / (2.0 * i1 + i2)
        + f("0110", 3) * f("1100", 2) / i1
        - 2.0 * f("0020", 3) * f("1100", 3) / i2
        - f("1001", 3) * f("0110", 4) / (i1 - 2.0 * i2)
        + f("0101", 3) * f("1010", 4) / (i1 + 2.0 * i2)
        + f("0011", 3) * f("1100", 4) / i2)
        / 6.0;
    Ok(Cubic { c2100: d2100, c1011: d1011, c0021: d0021, c1110: d1110 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HEntry {
    pub mode: u32,
    #[serde(with = "index_str")]
    pub index: Index,
    pub value: CVec2,
    pub sigma: Complex64,
    pub residual: f64,
}

mod index_str {
    use super::{label, parse_index, Index};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(idx: &Index, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&label(idx))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Index, D::Error> {
        let s = String::deserialize(d)?;
        parse_index(&s).ok_or_else(|| D::Error::custom(format!("bad index '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HVectors {
    pub entries: Vec<HEntry>,
}

impl HVectors {
    pub fn get(&self, mode: u32, idx: &Index) -> Option<&HEntry> {
        self.entries.iter().find(|e| e.mode == mode && e.index == *idx)
    }

    /// h_{j,ι}; zero for combinations the active case does not carry.
    pub fn value(&self, mode: u32, idx: &Index) -> CVec2 {
        self.get(mode, idx).map_or_else(linalg::czero2, |e| e.value)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }
}

/// Solves (λ_ι I − A_j) h_{j,ι} = F_ι ∫ξ_j ξ_{n₁}^a ξ_{n₂}^b − Σ_{k: mode k = j} φₖ f^{1(k)}_ι
/// for every mode j of the active case and every needed ι.
pub fn solve_h(
    spec: &ModelSpec,
    basis: &EigenBasis,
    fv: &FVectors,
    f21: &F21Table,
    case: NfCase,
) -> Result<HVectors> {
    let (n1, n2) = (basis.n1, basis.n2);
    if NfCase::of(n1, n2)? != case {
        return Err(Error::Domain(format!("case {case} does not match modes ({n1}, {n2})")));
    }
    let mut entries = Vec::new();
    for j in NfCase::modes(n1, n2) {
        let a_j = spec.mode_matrix(j);
        for idx in H_INDICES {
            let a = (idx[0] + idx[1]) as usize;
            let b = (idx[2] + idx[3]) as usize;
            let mut modes = vec![j];
            modes.extend(std::iter::repeat_n(n1, a));
            modes.extend(std::iter::repeat_n(n2, b));
            let integral = spectral::product_integral(&modes, spec.ell);
            let f = fv.f2(&idx);
            let mut rhs = [f[0] * integral, f[1] * integral];
            for k in 1..=4 {
                if basis.mode(k) == j {
                    let phi = basis.phi(k);
                    let s = f21.get(&idx, k);
                    rhs[0] -= phi[0] * s;
                    rhs[1] -= phi[1] * s;
                }
            }
            let sigma = frequency(&idx, basis.omega1, basis.omega2);
            let m = linalg::shifted(sigma, &a_j);
            let value = if rhs == linalg::czero2() {
                rhs
            } else {
                linalg::solve2(&m, &rhs).ok_or(Error::SingularSolve {
                    mode: j as usize,
                    sigma_re: sigma.re,
                    sigma_im: sigma.im,
                })?
            };
            let mv = linalg::cmatvec(&m, &value);
            let residual = linalg::norm(&[mv[0] - rhs[0], mv[1] - rhs[1]]);
            entries.push(HEntry { mode: j, index: idx, value, sigma, residual });
        }
    }
    Ok(HVectors { entries })
}

/// E and Ê parts: ψ̄ₖ Σ_m Σ_j γ_{j n_m n_k} S_{wz_m}(h_{j, target − e_m}) / 6,
/// with Ê restricted to j = 0 and the hatted operators.
#[allow(non_snake_case)]
pub fn third_order_E(spec: &ModelSpec, basis: &EigenBasis, fv: &FVectors, h: &HVectors) -> (Cubic, Cubic) {
    let ell = spec.ell;
    let part = |hat: bool| {
        Cubic::from_fn(|t, krow| {
            let nk = Mode::new(basis.mode(krow), ell);
            let mut tot = c(0.0, 0.0);
            for m in 0..4 {
                if t[m] == 0 {
                    continue;
                }
                let mut rest = t;
                rest[m] -= 1;
                let nm = Mode::new(basis.mode(m + 1), ell);
                let modes = if hat { vec![0] } else { NfCase::modes(basis.n1, basis.n2) };
                for j in modes {
                    let g = gamma_triple(Mode::new(j, ell), nm, nk);
                    if g == 0.0 {
                        continue;
                    }
                    let s = fv.s(m, &h.value(j, &rest), hat);
                    tot += linalg::dot(&basis.psibar(krow), &s) * g;
                }
            }
            tot / 6.0
        })
    };
    (part(false), part(true))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCoeffs {
    /// κ₁(μ) = kappa1[0] μ₁ + kappa1[1] μ₂.
    pub kappa1: [f64; 2],
    pub kappa2: [f64; 2],
    pub b0: f64,
    #[serde(rename = "c0")]
    pub c0_coupling: f64,
    pub d0: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl PolarCoeffs {
    pub fn kappa(&self, mu1: f64, mu2: f64) -> (f64, f64) {
        (
            self.kappa1[0] * mu1 + self.kappa1[1] * mu2,
            self.kappa2[0] * mu1 + self.kappa2[1] * mu2,
        )
    }

    pub fn discriminant(&self) -> f64 {
        self.d0 - self.b0 * self.c0_coupling
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F21Entry {
    #[serde(with = "index_str")]
    pub index: Index,
    pub k: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Intermediates {
    pub C: Cubic,
    pub D: Cubic,
    pub E: Cubic,
    pub Ehat: Cubic,
    pub h: Vec<HEntry>,
    pub f21: Vec<F21Entry>,
    pub F: BTreeMap<String, CVec2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub double_hopf: DoubleHopfPoint,
    pub case: NfCase,
    pub second_order: SecondOrder,
    pub third_order: Cubic,
    pub intermediates: Intermediates,
    pub polar: Option<PolarCoeffs>,
    pub polar_error: Option<String>,
}

impl NormalFormReport {
    /// Cubic coefficient B_ι for a retained index or its conjugate partner.
    pub fn b(&self, idx: &Index) -> Option<Complex64> {
        self.third_order.get(idx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[allow(non_snake_case, clippy::too_many_arguments)]
pub fn assemble(
    dh: &DoubleHopfPoint,
    case: NfCase,
    second: SecondOrder,
    C: Cubic,
    D: Cubic,
    E: Cubic,
    Ehat: Cubic,
    h: &HVectors,
    f21: &F21Table,
    fv: &FVectors,
) -> NormalFormReport {
    let sum = D.zip(&E, |a, b| a + b).zip(&Ehat, |a, b| a + b);
    let b = C.zip(&sum, |cc, s| cc + 1.5 * s);
    let mut fmap = BTreeMap::new();
    for (idx, v) in fv.f2.iter().chain(fv.f3.iter()) {
        fmap.insert(label(idx), *v);
    }
    NormalFormReport {
        double_hopf: *dh,
        case,
        second_order: second,
        third_order: b,
        intermediates: Intermediates {
            C,
            D,
            E,
            Ehat,
            h: h.entries.clone(),
            f21: f21
                .iter()
                .map(|(&(index, k), &value)| F21Entry { index, k, value })
                .collect(),
            F: fmap,
        },
        polar: None,
        polar_error: None,
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn polar_reduce(report: &NormalFormReport) -> Result<PolarCoeffs> {
    let b = &report.third_order;
    let (r2100, r0021) = (b.c2100.re, b.c0021.re);
    if r2100.abs() < SINGULAR_TOL {
        return Err(Error::DegenerateCubic(format!("Re B2100 = {r2100:e}")));
    }
    if r0021.abs() < SINGULAR_TOL {
        return Err(Error::DegenerateCubic(format!("Re B0021 = {r0021:e}")));
    }
    let eps1 = sign(r2100);
    let eps2 = sign(r0021);
    let s = &report.second_order;
    Ok(PolarCoeffs {
        kappa1: [eps1 * s.B11.re, eps1 * s.B21.re],
        kappa2: [eps1 * s.B13.re, eps1 * s.B23.re],
        b0: eps1 * eps2 * b.c1011.re / r0021,
        c0_coupling: b.c1110.re / r2100,
        d0: eps1 * eps2,
        eps1,
        eps2,
    })
}

/// Runs the whole pipeline for a model expanded at the double Hopf point.
pub fn normal_form(spec: &ModelSpec, basis: &EigenBasis, dh: &DoubleHopfPoint) -> Result<NormalFormReport> {
    let case = NfCase::of(dh.n1, dh.n2)?;
    let fv = assemble_f_vectors(spec, basis);
    let second = second_order(spec, basis);
    let g = Gammas::new(dh.n1, dh.n2, spec.ell)?;
    let f21 = f21_table(&fv, basis, &g);
    let cc = third_order_C(&fv, basis, &g);
    let d = third_order_D(&f21, dh.omega1, dh.omega2)?;
    let h = solve_h(spec, basis, &fv, &f21, case)?;
    let (e, ehat) = third_order_E(spec, basis, &fv, &h);
    let mut report = assemble(dh, case, second, cc, d, e, ehat, &h, &f21, &fv);
    match polar_reduce(&report) {
        Ok(p) => report.polar = Some(p),
        Err(e) => report.polar_error = Some(e.to_string()),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::build_basis;
    use crate::linstab::double_hopf;
    use crate::model::{holling_tanner, DerivTensor2, DerivTensor3, Var};

    struct Setup {
        spec: ModelSpec,
        dh: DoubleHopfPoint,
        basis: EigenBasis,
    }

    fn setup() -> Setup {
        let spec = holling_tanner(1.0, 0.35, 0.1, 0.6, 0.2, 8f64.sqrt()).unwrap();
        let dh = double_hopf(&spec, 1).unwrap();
        let basis = build_basis(&spec, &dh).unwrap();
        Setup { spec, dh, basis }
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn index_helpers() {
        assert_eq!(label(&[2, 1, 0, 0]), "2100");
        assert_eq!(parse_index("0021"), Some([0, 0, 2, 1]));
        assert_eq!(parse_index("21"), None);
        assert_eq!(swap(&[1, 0, 1, 1]), [0, 1, 1, 1]);
        assert_eq!(arrangements(&[2, 1, 0, 0]).len(), 3);
        assert_eq!(arrangements(&[1, 0, 1, 1]).len(), 6);
    }

    #[test]
    fn case_dispatch_is_total() {
        assert_eq!(NfCase::of(0, 0).unwrap(), NfCase::I);
        assert_eq!(NfCase::of(0, 3).unwrap(), NfCase::II);
        assert_eq!(NfCase::of(2, 2).unwrap(), NfCase::IIIEqual);
        assert_eq!(NfCase::of(2, 4).unwrap(), NfCase::IIIDouble);
        assert_eq!(NfCase::of(1, 3).unwrap(), NfCase::IIIGeneric);
        assert!(NfCase::of(3, 1).is_err());
        assert_eq!(NfCase::modes(0, 0), vec![0]);
        assert_eq!(NfCase::modes(0, 1), vec![0, 1, 2]);
        assert_eq!(NfCase::modes(1, 3), vec![0, 2, 4, 6]);
    }

    #[test]
    fn f_vectors_match_holling_tanner_closed_forms() {
        let s = setup();
        let fv = assemble_f_vectors(&s.spec, &s.basis);
        let q1 = s.basis.phi1[1];
        let q2 = s.basis.phi3[1];
        let t = &s.spec.d2;
        let uu = t.get(Var::U, Var::U);
        let uv = t.get(Var::U, Var::V);
        let vv = t.get(Var::V, Var::V);
        let uh = t.get(Var::U, Var::UHat);
        for r in 0..2 {
            let f0020 = uu[r] + q2 * q2 * vv[r] + 2.0 * q2 * uv[r];
            assert!(close(fv.f2(&[0, 0, 2, 0])[r], f0020, 1e-14));
            // n₁ = 0: the nonlocal term enters with δ(n₁) = 1
            let f2000 = uu[r] + q1 * q1 * vv[r] + 2.0 * q1 * uv[r] + 2.0 * uh[r];
            assert!(close(fv.f2(&[2, 0, 0, 0])[r], f2000, 1e-14));
        }
        // F_{ŵ₂z₁} = F_{ŵ₂z₃} = 0
        assert_eq!(fv.fwz[3][0], linalg::czero2());
        assert_eq!(fv.fwz[3][2], linalg::czero2());
        // conjugation symmetry is exact
        assert_eq!(fv.f2(&[0, 2, 0, 0]), linalg::conj(&fv.f2(&[2, 0, 0, 0])));
        assert_eq!(fv.f2(&[0, 1, 1, 0]), linalg::conj(&fv.f2(&[1, 0, 0, 1])));
    }

    #[test]
    fn zero_tensors_give_zero_vectors() {
        let s = setup();
        let mut spec = s.spec.clone();
        spec.d2 = DerivTensor2::zero();
        spec.d3 = DerivTensor3::zero();
        let fv = assemble_f_vectors(&spec, &s.basis);
        assert!(fv.f2.values().chain(fv.f3.values()).all(|v| *v == linalg::czero2()));
        let report = normal_form(&spec, &s.basis, &s.dh).unwrap();
        assert_eq!(report.third_order, Cubic::default());
        assert!(report.polar.is_none());
        assert!(report.polar_error.unwrap().contains("B2100"));
    }

    #[test]
    fn second_order_real_parts() {
        let s = setup();
        let so = second_order(&s.spec, &s.basis);
        assert!((so.B11.re - 0.0375).abs() < 1e-12);
        assert!((so.B21.re + 0.5).abs() < 1e-12);
        assert!((so.B13.re - 0.0875).abs() < 1e-12);
        assert!((so.B23.re + 0.5).abs() < 1e-12);
    }

    #[test]
    fn second_order_matches_closed_form() {
        let s = setup();
        let so = second_order(&s.spec, &s.basis);
        let iw = c(0.0, s.dh.omega1);
        let (c0, k) = (0.35, 0.9);
        let den = (iw + c0) * (iw + c0) - c0 * k;
        let b11 = (iw + c0) * (iw + c0) / den * ((1.0 - 0.2 - 0.1) / 4.0 - iw * 0.1 / (iw + c0));
        let b21 = -iw * k / den;
        assert!(close(so.B11, b11, 1e-12));
        assert!(close(so.B21, b21, 1e-12));
    }

    #[test]
    fn f21_gamma_bookkeeping() {
        let s = setup();
        let fv = assemble_f_vectors(&s.spec, &s.basis);
        let g = Gammas::new(0, 1, s.spec.ell).unwrap();
        let t = f21_table(&fv, &s.basis, &g);
        let len = s.spec.ell * std::f64::consts::PI;
        let expect = linalg::dot(&s.basis.psibar(1), &fv.f2(&[0, 0, 2, 0])) / len.sqrt();
        assert!(close(t.get(&[0, 0, 2, 0], 1), expect, 1e-14));
        for idx in QUADRATIC {
            for (k, kc) in [(1, 2), (3, 4)] {
                assert!(close(t.get(&swap(&idx), kc), t.get(&idx, k).conj(), 1e-14));
            }
        }
        let g13 = Gammas::new(1, 3, s.spec.ell).unwrap();
        assert_eq!(g13.get(2, 1), 0.0);
    }

    #[test]
    fn c_uses_fourth_order_gammas() {
        let s = setup();
        let g = Gammas::new(0, 1, s.spec.ell).unwrap();
        let len = s.spec.ell * std::f64::consts::PI;
        assert!((g.get(4, 0) - 1.0 / len).abs() < 1e-15);
        assert!((g.get(0, 4) - 1.5 / len).abs() < 1e-15);
        assert!((g.get(2, 2) - 1.0 / len).abs() < 1e-15);
    }

    #[test]
    fn d_vanishes_without_quadratic_terms() {
        let s = setup();
        let mut spec = s.spec.clone();
        spec.d2 = DerivTensor2::zero();
        let r = normal_form(&spec, &s.basis, &s.dh).unwrap();
        assert_eq!(r.intermediates.D, Cubic::default());
        assert_eq!(r.intermediates.E, Cubic::default());
        assert_eq!(r.intermediates.Ehat, Cubic::default());
        assert_ne!(r.intermediates.C, Cubic::default());
    }

    #[test]
    fn near_resonant_denominator_is_rejected() {
        let s = setup();
        let fv = assemble_f_vectors(&s.spec, &s.basis);
        let g = Gammas::new(0, 1, s.spec.ell).unwrap();
        let t = f21_table(&fv, &s.basis, &g);
        assert!(matches!(third_order_D(&t, 1.0, 0.5), Err(Error::NearResonance(_))));
    }

    #[test]
    fn h_vectors_case_two() {
        let s = setup();
        let fv = assemble_f_vectors(&s.spec, &s.basis);
        let g = Gammas::new(0, 1, s.spec.ell).unwrap();
        let t = f21_table(&fv, &s.basis, &g);
        let h = solve_h(&s.spec, &s.basis, &fv, &t, NfCase::II).unwrap();
        assert!(h.max_residual() < 1e-10);
        assert_eq!(h.value(2, &[1, 1, 0, 0]), linalg::czero2());
        assert!(linalg::norm(&h.value(0, &[1, 1, 0, 0])) > 0.0);
        assert!(solve_h(&s.spec, &s.basis, &fv, &t, NfCase::I).is_err());
    }

    #[test]
    fn report_values_at_test_point() {
        let s = setup();
        let r = normal_form(&s.spec, &s.basis, &s.dh).unwrap();
        let b = &r.third_order;
        assert!(close(b.c2100, c(-0.0039005, -0.0061575), 1e-6));
        assert!(close(b.c0021, c(0.000117004, -0.0277923), 1e-6));
        assert!(close(r.intermediates.C.c0021, c(-0.0471259, 0.0741553), 1e-6));
        let p = r.polar.unwrap();
        assert!((p.kappa1[0] + 0.0375).abs() < 1e-12);
        assert!((p.kappa1[1] - 0.5).abs() < 1e-12);
        assert!((p.kappa2[0] + 0.0875).abs() < 1e-12);
        assert!((p.kappa2[1] - 0.5).abs() < 1e-12);
        assert!((p.c0_coupling + 0.6229508).abs() < 1e-6);
        assert_eq!(p.eps1, -1.0);
    }

    #[test]
    fn conjugate_coefficients() {
        let s = setup();
        let r = normal_form(&s.spec, &s.basis, &s.dh).unwrap();
        for (t, _) in TARGETS {
            assert_eq!(r.b(&swap(&t)).unwrap(), r.b(&t).unwrap().conj());
        }
        assert!(r.b(&[3, 0, 0, 0]).is_none());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = setup();
        let r = normal_form(&s.spec, &s.basis, &s.dh).unwrap();
        let text = r.to_json();
        let back = NormalFormReport::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["second_order"]["B11"].is_array());
        assert!(v["intermediates"]["h"][0]["index"].is_string());
        assert!(v["polar"]["c0"].is_number());
    }

    #[test]
    fn deterministic() {
        let s = setup();
        let a = normal_form(&s.spec, &s.basis, &s.dh).unwrap().to_json();
        let b = normal_form(&s.spec, &s.basis, &s.dh).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_cubic_rejected() {
        let s = setup();
        let mut r = normal_form(&s.spec, &s.basis, &s.dh).unwrap();
        r.third_order.c2100 = c(0.0, 1.0);
        assert!(matches!(polar_reduce(&r), Err(Error::DegenerateCubic(_))));
        r.third_order.c2100 = c(-1.0, 0.0);
        r.third_order.c0021 = c(1e-12, 0.0);
        assert!(matches!(polar_reduce(&r), Err(Error::DegenerateCubic(_))));
    }
}
