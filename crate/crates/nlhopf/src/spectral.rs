//! Neumann cosine eigenbasis on (0, ℓπ) and integrals of basis products.

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub n: u32,
    pub ell: f64,
}

impl Mode {
    pub fn new(n: u32, ell: f64) -> Self {
        Mode { n, ell }
    }

    /// Laplacian eigenvalue n²/ℓ².
    pub fn sigma(&self) -> f64 {
        let n = self.n as f64;
        n * n / (self.ell * self.ell)
    }
}

fn length(ell: f64) -> f64 {
    ell * PI
}

fn norm_const(n: u32, ell: f64) -> f64 {
    if n == 0 {
        (1.0 / length(ell)).sqrt()
    } else {
        (2.0 / length(ell)).sqrt()
    }
}

/// L²-normalised eigenfunction ξ_n(x).
pub fn xi(mode: Mode, x: f64) -> Result<f64> {
    let len = length(mode.ell);
    let slack = 1e-12 * len;
    if !(x >= -slack && x <= len + slack) {
        return Err(Error::Domain(format!("x = {x} outside [0, {len}]")));
    }
    Ok(xi_unchecked(mode.n, mode.ell, x))
}

pub(crate) fn xi_unchecked(n: u32, ell: f64, x: f64) -> f64 {
    if n == 0 {
        norm_const(0, ell)
    } else {
        norm_const(n, ell) * (n as f64 * x / ell).cos()
    }
}

/// Spatial average of ξ_n over the domain.
pub fn hat_xi(mode: Mode) -> f64 {
    if mode.n == 0 {
        norm_const(0, mode.ell)
    } else {
        0.0
    }
}

pub fn delta(k: u32) -> u32 {
    u32::from(k == 0)
}

pub fn delta_f(k: u32) -> f64 {
    delta(k) as f64
}

/// Exact ∫₀^{ℓπ} ∏ ξ_{n_i}(x) dx for any list of modes.
///
/// Uses cos a·cos b = ½(cos(a−b) + cos(a+b)) repeatedly: the product of k
/// cosines averages to 2^{1−k} times the number of sign patterns whose
/// frequencies cancel.
pub fn product_integral(modes: &[u32], ell: f64) -> f64 {
    if modes.is_empty() {
        return length(ell);
    }
    let scale: f64 = modes.iter().map(|&n| norm_const(n, ell)).product();
    let first = modes[0] as i64;
    let rest = &modes[1..];
    let mut hits = 0u32;
    for signs in 0u32..(1 << rest.len()) {
        let mut s = first;
        for (b, &n) in rest.iter().enumerate() {
            if signs & (1 << b) != 0 {
                s -= n as i64;
            } else {
                s += n as i64;
            }
        }
        if s == 0 {
            hits += 1;
        }
    }
    let avg = hits as f64 / (1u64 << rest.len()) as f64;
    scale * avg * length(ell)
}

/// γ_ij = ∫ ξ_{n1}^i ξ_{n2}^j dx for the exponent pairs the cubic
/// coefficients use. Requires n1 ≤ n2.
pub fn gamma_pair(i: u32, j: u32, n1: Mode, n2: Mode) -> Result<f64> {
    if n1.n > n2.n {
        return Err(Error::Domain(format!(
            "gamma_pair expects n1 <= n2, got ({}, {})",
            n1.n, n2.n
        )));
    }
    let len = length(n1.ell);
    let (a, b) = (n1.n, n2.n);
    let v = match (i, j) {
        (4, 0) | (0, 4) => {
            let nk = if i == 4 { a } else { b };
            if nk == 0 {
                1.0 / len
            } else {
                3.0 / (2.0 * len)
            }
        }
        (2, 2) => {
            if a == b && a != 0 {
                3.0 / (2.0 * len)
            } else {
                1.0 / len
            }
        }
        (3, 0) | (0, 3) => {
            let nk = if i == 3 { a } else { b };
            if nk == 0 {
                1.0 / len.sqrt()
            } else {
                0.0
            }
        }
        (1, 2) => {
            if a == 0 {
                1.0 / len.sqrt()
            } else {
                0.0
            }
        }
        (2, 1) => {
            if a == 0 && b == 0 {
                1.0 / len.sqrt()
            } else if b == 2 * a && a != 0 {
                1.0 / (2.0 * len).sqrt()
            } else {
                0.0
            }
        }
        _ => return Err(Error::UnsupportedExponent(i, j)),
    };
    Ok(v)
}

/// γ_ijk = ∫ ξ_i ξ_j ξ_k dx.
pub fn gamma_triple(i: Mode, j: Mode, k: Mode) -> f64 {
    let (a, b, c) = (i.n, j.n, k.n);
    let len = length(i.ell);
    let zeros = [a, b, c].iter().filter(|&&n| n == 0).count();
    match zeros {
        3 => 1.0 / len.sqrt(),
        2 => 0.0,
        1 => {
            let (p, q) = match (a, b, c) {
                (0, p, q) | (p, 0, q) | (p, q, 0) => (p, q),
                _ => unreachable!(),
            };
            if p == q {
                1.0 / len.sqrt()
            } else {
                0.0
            }
        }
        _ => {
            if a == b + c || b == a + c || c == a + b {
                1.0 / (2.0 * len).sqrt()
            } else {
                0.0
            }
        }
    }
}
