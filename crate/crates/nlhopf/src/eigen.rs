//! Center-subspace eigenvectors φ and adjoint vectors ψ at a double Hopf
//! point, normalised so that ψ̄ₖφₖ = 1 with the first entry of φₖ equal to 1.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CVec2, Mat2, DET_GUARD};
use crate::linstab::DoubleHopfPoint;
use crate::model::ModelSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenBasis {
    pub phi1: CVec2,
    pub phi3: CVec2,
    /// Adjoint vectors; the pairing uses their conjugates, (ψ, φ) = ψ̄φ.
    pub psi1: CVec2,
    pub psi3: CVec2,
    pub omega1: f64,
    pub omega2: f64,
    pub n1: u32,
    pub n2: u32,
}

impl EigenBasis {
    /// φₖ for k = 1..4, with φ₂ = conj φ₁ and φ₄ = conj φ₃.
    pub fn phi(&self, k: usize) -> CVec2 {
        match k {
            1 => self.phi1,
            2 => linalg::conj(&self.phi1),
            3 => self.phi3,
            4 => linalg::conj(&self.phi3),
            _ => panic!("eigenvector index {k} out of range 1..=4"),
        }
    }

    /// The row vector ψ̄ₖ that pairs with φₖ.
    pub fn psibar(&self, k: usize) -> CVec2 {
        match k {
            1 => linalg::conj(&self.psi1),
            2 => self.psi1,
            3 => linalg::conj(&self.psi3),
            4 => self.psi3,
            _ => panic!("adjoint index {k} out of range 1..=4"),
        }
    }

    /// Spatial mode carrying φₖ.
    pub fn mode(&self, k: usize) -> u32 {
        if k <= 2 {
            self.n1
        } else {
            self.n2
        }
    }

    /// Eigenvalue iω attached to φₖ.
    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        match k {
            1 => c(0.0, self.omega1),
            2 => c(0.0, -self.omega1),
            3 => c(0.0, self.omega2),
            4 => c(0.0, -self.omega2),
            _ => panic!("eigenvalue index {k} out of range 1..=4"),
        }
    }

    /// Builds the basis from two real matrices with eigenvalues ±iω₁ and
    /// ±iω₂ respectively.
    pub fn from_matrices(a1: &Mat2, a3: &Mat2, omega1: f64, omega2: f64, n1: u32, n2: u32) -> Result<Self> {
        let (phi1, psi1) = pair(a1, omega1)?;
        let (phi3, psi3) = pair(a3, omega2)?;
        Ok(EigenBasis { phi1, phi3, psi1, psi3, omega1, omega2, n1, n2 })
    }

    /// Largest of ‖A φ − iωφ‖ and ‖ψ̄(A − iω)‖ over k = 1, 3.
    pub fn residual(&self, a1: &Mat2, a3: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for (a, k) in [(a1, 1), (a3, 3)] {
            let phi = self.phi(k);
            let lam = self.eigenvalue(k);
            let av = linalg::matvec(a, &phi);
            worst = worst.max(linalg::norm(&[av[0] - lam * phi[0], av[1] - lam * phi[1]]));
            let pb = self.psibar(k);
            let row = [
                pb[0] * a[0][0] + pb[1] * a[1][0] - lam * pb[0],
                pb[0] * a[0][1] + pb[1] * a[1][1] - lam * pb[1],
            ];
            worst = worst.max(linalg::norm(&row));
        }
        worst
    }
}

/// Right eigenvector (1, q) and adjoint for eigenvalue iω of `a`.
fn pair(a: &Mat2, omega: f64) -> Result<(CVec2, CVec2)> {
    let iw = c(0.0, omega);
    let a11 = c(a[0][0], 0.0) - iw;
    let a22 = c(a[1][1], 0.0) - iw;
    let scale = a.iter().flatten().fold(omega * omega, |m, x| m.max(x * x)).max(1.0);
    if (a11 * a22 - a[0][1] * a[1][0]).norm() > 1e-8 * scale {
        return Err(Error::DegenerateEigenbasis(format!("i*{omega} is not an eigenvalue")));
    }
    // (A − iω)(1, q)ᵀ = 0 from whichever row is better conditioned
    let q = if a[0][1].abs() >= a22.norm() {
        if a[0][1].abs() < DET_GUARD {
            return Err(Error::DegenerateEigenbasis(format!("no eigenvector with unit first entry at omega = {omega}")));
        }
        -a11 / a[0][1]
    } else {
        -a[1][0] / a22
    };
    // ψ̄ = (1, r) with ψ̄(A − iω) = 0
    let r = if a[1][0].abs() >= a22.norm() {
        if a[1][0].abs() < DET_GUARD {
            return Err(Error::DegenerateEigenbasis(format!("no adjoint vector at omega = {omega}")));
        }
        -a11 / a[1][0]
    } else {
        -a[0][1] / a22
    };
    let norm = c(1.0, 0.0) + r * q;
    if norm.norm() < DET_GUARD {
        return Err(Error::DegenerateEigenbasis(format!("psi-phi pairing vanishes at omega = {omega}")));
    }
    let psibar = [c(1.0, 0.0) / norm, r / norm];
    Ok(([c(1.0, 0.0), q], linalg::conj(&psibar)))
}

pub fn build_basis(spec: &ModelSpec, dh: &DoubleHopfPoint) -> Result<EigenBasis> {
    let a1 = spec.mode_matrix(dh.n1);
    let a3 = spec.mode_matrix(dh.n2);
    let basis = EigenBasis::from_matrices(&a1, &a3, dh.omega1, dh.omega2, dh.n1, dh.n2)?;
    let res = basis.residual(&a1, &a3);
    if !(res < 1e-10) {
        return Err(Error::DegenerateEigenbasis(format!(
            "eigen residual {res:e}; the spec is not at the double Hopf point"
        )));
    }
    Ok(basis)
}

/// Closed-form Holling–Tanner basis: φⱼ = (1, qⱼ), ψⱼ = Mⱼ(1, pⱼ), on modes
/// 0 and `n2`.
pub fn holling_closed_form(
    lambda0: f64,
    c0: f64,
    beta: f64,
    d2: f64,
    ell: f64,
    omega1: f64,
    omega2: f64,
    n2: u32,
) -> Result<EigenBasis> {
    let k = 1.0 - beta * lambda0;
    let s = d2 * (n2 as f64 / ell).powi(2);
    let side = |omega: f64, s: f64| -> Result<(Complex64, Complex64, Complex64)> {
        let iw = c(0.0, omega);
        let dq = iw + s + c0;
        let dp = iw - s - c0;
        let dm = dp * dp - c0 * k;
        if dq.norm() < DET_GUARD || dp.norm() < DET_GUARD || dm.norm() < DET_GUARD {
            return Err(Error::DegenerateEigenbasis("zero denominator in closed form".into()));
        }
        Ok((c0 / dq, k / dp, dp * dp / dm))
    };
    let (q1, p1, m1) = side(omega1, 0.0)?;
    let (q2, p2, m2) = side(omega2, s)?;
    Ok(EigenBasis {
        phi1: [c(1.0, 0.0), q1],
        phi3: [c(1.0, 0.0), q2],
        psi1: [m1, m1 * p1],
        psi3: [m2, m2 * p2],
        omega1,
        omega2,
        n1: 0,
        n2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linstab::double_hopf;
    use crate::model::holling_tanner;

    fn setup() -> (ModelSpec, DoubleHopfPoint, EigenBasis) {
        let s = holling_tanner(1.0, 0.35, 0.1, 0.6, 0.2, 8f64.sqrt()).unwrap();
        let dh = double_hopf(&s, 1).unwrap();
        let b = build_basis(&s, &dh).unwrap();
        (s, dh, b)
    }

    #[test]
    fn first_eigenvector_matches_closed_form() {
        let (_, dh, b) = setup();
        let q1 = 0.35 / c(0.35, dh.omega1);
        assert!((b.phi1[1] - q1).norm() < 1e-12);
        assert!((b.phi1[1] - c(0.38888889, -0.48749802)).norm() < 1e-7);
        assert_eq!(b.phi1[0], c(1.0, 0.0));
    }

    #[test]
    fn biorthonormal() {
        let (_, _, b) = setup();
        for k in 1..=4 {
            let p = linalg::dot(&b.psibar(k), &b.phi(k));
            assert!((p - c(1.0, 0.0)).norm() < 1e-12, "k = {k}: {p}");
        }
        let cross = linalg::dot(&b.psibar(1), &b.phi(2));
        assert!((cross - c(1.0, 0.0)).norm() > 1e-3);
        assert!(linalg::dot(&b.psibar(1), &b.phi(2)).norm() < 1e-12);
    }

    #[test]
    fn residuals_are_small() {
        let (s, dh, b) = setup();
        let r = b.residual(&s.mode_matrix(dh.n1), &s.mode_matrix(dh.n2));
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn closed_form_agrees() {
        let (_, dh, b) = setup();
        let cf = holling_closed_form(1.0, 0.35, 0.1, 0.2, 8f64.sqrt(), dh.omega1, dh.omega2, 1).unwrap();
        let q2 = 0.35 / c(0.2 / 8.0 + 0.35, dh.omega2);
        assert!((cf.phi3[1] - q2).norm() < 1e-14);
        for k in 1..=4 {
            for i in 0..2 {
                assert!((cf.phi(k)[i] - b.phi(k)[i]).norm() < 1e-10);
                assert!((cf.psibar(k)[i] - b.psibar(k)[i]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_adjoint_vanishes_when_beta_lambda_is_one() {
        let cf = holling_closed_form(10.0, 0.3, 0.1, 0.2, 3.0, 0.5, 0.7, 1).unwrap();
        assert!(cf.psi1[1].norm() < 1e-15);
        assert!(cf.psi3[1].norm() < 1e-15);
    }

    #[test]
    fn conjugate_structure() {
        let (_, _, b) = setup();
        assert_eq!(b.phi(2), linalg::conj(&b.phi(1)));
        assert_eq!(b.psibar(4), linalg::conj(&b.psibar(3)));
        assert_eq!(b.eigenvalue(2), b.eigenvalue(1).conj());
    }

    #[test]
    fn degenerate_matrix_is_rejected() {
        let a = [[0.0, 0.0], [0.0, 0.0]];
        assert!(matches!(
            EigenBasis::from_matrices(&a, &a, 1.0, 2.0, 0, 1),
            Err(Error::DegenerateEigenbasis(_))
        ));
    }
}
