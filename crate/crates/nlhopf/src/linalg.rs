//! Fixed-size 2×2 real and complex helpers.

use num_complex::Complex64;

pub type Mat2 = [[f64; 2]; 2];
pub type CVec2 = [Complex64; 2];
pub type CMat2 = [[Complex64; 2]; 2];

pub const ZERO2: Mat2 = [[0.0; 2]; 2];

/// Smallest |det| accepted by [`solve2`].
pub const DET_GUARD: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn czero2() -> CVec2 {
    [Complex64::new(0.0, 0.0); 2]
}

pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn scale(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn diag(d: [f64; 2]) -> Mat2 {
    [[d[0], 0.0], [0.0, d[1]]]
}

pub fn trace(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn to_complex(a: &Mat2) -> CMat2 {
    [
        [a[0][0].into(), a[0][1].into()],
        [a[1][0].into(), a[1][1].into()],
    ]
}

/// σI − A.
pub fn shifted(sigma: Complex64, a: &Mat2) -> CMat2 {
    [
        [sigma - a[0][0], (-a[0][1]).into()],
        [(-a[1][0]).into(), sigma - a[1][1]],
    ]
}

pub fn matvec(a: &Mat2, x: &CVec2) -> CVec2 {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

pub fn cmatvec(a: &CMat2, x: &CVec2) -> CVec2 {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

/// Row vector times column vector without conjugation.
pub fn dot(row: &CVec2, col: &CVec2) -> Complex64 {
    row[0] * col[0] + row[1] * col[1]
}

pub fn conj(x: &CVec2) -> CVec2 {
    [x[0].conj(), x[1].conj()]
}

pub fn norm(x: &CVec2) -> f64 {
    (x[0].norm_sqr() + x[1].norm_sqr()).sqrt()
}

/// Solves `a x = rhs` by Cramer's rule. Returns `None` when |det| < [`DET_GUARD`].
pub fn solve2(a: &CMat2, rhs: &CVec2) -> Option<CVec2> {
    let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if d.norm() < DET_GUARD {
        return None;
    }
    Some([
        (rhs[0] * a[1][1] - a[0][1] * rhs[1]) / d,
        (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / d,
    ])
}

/// Eigenvalues of a real 2×2 matrix.
pub fn eigenvalues(a: &Mat2) -> [Complex64; 2] {
    let t = trace(a);
    let disc = Complex64::from(t * t - 4.0 * det(a)).sqrt();
    [(t + disc) / 2.0, (t - disc) / 2.0]
}
