//! Cubic coefficients checked against an independent Galerkin computation:
//! the PDE is projected onto cosine modes by quadrature, and the cubic
//! coefficients come from the standard center-manifold formulas for a
//! finite-dimensional double Hopf point.

#![allow(clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use nlhopf::eigen::build_basis;
use nlhopf::linstab::double_hopf;
use nlhopf::model::holling_tanner;
use nlhopf::normalform::normal_form;
use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

struct Galerkin {
    xs: Vec<f64>,
    weights: Vec<f64>,
    xi: Vec<Vec<f64>>,
    len: f64,
    f2: [[[f64; 2]; 4]; 4],
    f3: [[[[f64; 2]; 4]; 4]; 4],
    a: DMatrix<C>,
}

struct Params {
    beta: f64,
    d1: f64,
    d2: f64,
    ell: f64,
    n: u32,
}

impl Params {
    fn lambda(&self) -> f64 {
        (self.d1 + self.d2) * (self.n * self.n) as f64 / (self.beta * self.ell * self.ell)
    }

    fn c(&self) -> f64 {
        let l = self.lambda();
        l * (1.0 - self.beta * l) / (1.0 + l) - self.beta * l
    }
}

impl Galerkin {
    fn new(p: &Params, modes: usize, points: usize) -> Self {
        let len = p.ell * PI;
        let h = len / (points - 1) as f64;
        let xs: Vec<f64> = (0..points).map(|i| i as f64 * h).collect();
        let mut weights = vec![h; points];
        weights[0] *= 0.5;
        weights[points - 1] *= 0.5;
        let xi = (0..modes)
            .map(|j| {
                xs.iter()
                    .map(|&x| {
                        if j == 0 {
                            (1.0 / len).sqrt()
                        } else {
                            (2.0 / len).sqrt() * (j as f64 * x / p.ell).cos()
                        }
                    })
                    .collect()
            })
            .collect();

        let (lam, c, beta) = (p.lambda(), p.c(), p.beta);
        let b = (1.0 - beta * lam) * (1.0 + lam) / lam;
        let (u, v) = (lam, lam);
        let mut f2 = [[[0.0; 2]; 4]; 4];
        let mut put2 = |i: usize, j: usize, val: [f64; 2]| {
            f2[i][j] = val;
            f2[j][i] = val;
        };
        put2(0, 0, [2.0 * b * v / (1.0 + u).powi(3), -2.0 * c * v * v / u.powi(3)]);
        put2(0, 1, [-b / (1.0 + u).powi(2), 2.0 * c * v / (u * u)]);
        put2(1, 1, [0.0, -2.0 * c / u]);
        put2(0, 2, [-beta, 0.0]);
        let mut f3 = [[[[0.0; 2]; 4]; 4]; 4];
        let mut put3 = |idx: [usize; 3], val: [f64; 2]| {
            for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                f3[idx[perm[0]]][idx[perm[1]]][idx[perm[2]]] = val;
            }
        };
        put3([0, 0, 0], [-6.0 * b * v / (1.0 + u).powi(4), 6.0 * c * v * v / u.powi(4)]);
        put3([0, 0, 1], [2.0 * b / (1.0 + u).powi(3), -4.0 * c * v / u.powi(3)]);
        put3([0, 1, 1], [0.0, 2.0 * c / (u * u)]);

        let n = 2 * modes;
        let mut a = DMatrix::<C>::zeros(n, n);
        for j in 0..modes {
            let s = (j * j) as f64 / (p.ell * p.ell);
            let m = [
                [lam * (1.0 - beta * lam) / (1.0 + lam) - if j == 0 { beta * lam } else { 0.0 } - s * p.d1, -(1.0 - beta * lam)],
                [c, -c - s * p.d2],
            ];
            for r in 0..2 {
                for q in 0..2 {
                    a[(2 * j + r, 2 * j + q)] = C::new(m[r][q], 0.0);
                }
            }
        }
        Galerkin { xs, weights, xi, len, f2, f3, a }
    }

    fn modes(&self) -> usize {
        self.xi.len()
    }

    /// Pointwise (u, v, û, v̂) of a coefficient vector.
    fn field(&self, x: &DVector<C>) -> [Vec<C>; 4] {
        let npts = self.xs.len();
        let mut u = vec![C::new(0.0, 0.0); npts];
        let mut v = vec![C::new(0.0, 0.0); npts];
        for j in 0..self.modes() {
            for (i, xi) in self.xi[j].iter().enumerate() {
                u[i] += x[2 * j] * xi;
                v[i] += x[2 * j + 1] * xi;
            }
        }
        let uh = x[0] / self.len.sqrt();
        let vh = x[1] / self.len.sqrt();
        [u, v, vec![uh; npts], vec![vh; npts]]
    }

    fn project(&self, vals: &[Vec<C>; 2]) -> DVector<C> {
        let mut out = DVector::<C>::zeros(2 * self.modes());
        for j in 0..self.modes() {
            for comp in 0..2 {
                out[2 * j + comp] = vals[comp]
                    .iter()
                    .zip(&self.xi[j])
                    .zip(&self.weights)
                    .map(|((f, xi), w)| f * xi * w)
                    .sum();
            }
        }
        out
    }

    fn bilinear(&self, x: &DVector<C>, y: &DVector<C>) -> DVector<C> {
        let (fx, fy) = (self.field(x), self.field(y));
        let npts = self.xs.len();
        let mut vals = [vec![C::new(0.0, 0.0); npts], vec![C::new(0.0, 0.0); npts]];
        for a in 0..4 {
            for b in 0..4 {
                let t = self.f2[a][b];
                if t == [0.0, 0.0] {
                    continue;
                }
                for i in 0..npts {
                    let prod = fx[a][i] * fy[b][i];
                    vals[0][i] += prod * t[0];
                    vals[1][i] += prod * t[1];
                }
            }
        }
        self.project(&vals)
    }

    fn trilinear(&self, x: &DVector<C>, y: &DVector<C>, z: &DVector<C>) -> DVector<C> {
        let (fx, fy, fz) = (self.field(x), self.field(y), self.field(z));
        let npts = self.xs.len();
        let mut vals = [vec![C::new(0.0, 0.0); npts], vec![C::new(0.0, 0.0); npts]];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let t = self.f3[a][b][c];
                    if t == [0.0, 0.0] {
                        continue;
                    }
                    for i in 0..npts {
                        let prod = fx[a][i] * fy[b][i] * fz[c][i];
                        vals[0][i] += prod * t[0];
                        vals[1][i] += prod * t[1];
                    }
                }
            }
        }
        self.project(&vals)
    }

    /// Solves (s I − A) x = rhs.
    fn resolve(&self, s: C, rhs: &DVector<C>) -> DVector<C> {
        let n = self.a.nrows();
        let m = DMatrix::<C>::identity(n, n) * s - &self.a;
        m.lu().solve(rhs).expect("nonsingular")
    }

    /// Eigenvector q with A q = iω q supported on mode j, and adjoint p
    /// with p̄ᵀ q = 1.
    fn eigenpair(&self, j: usize, omega: f64) -> (DVector<C>, DVector<C>) {
        let iw = C::new(0.0, omega);
        let m = |r: usize, q: usize| self.a[(2 * j + r, 2 * j + q)] - if r == q { iw } else { C::new(0.0, 0.0) };
        let q1 = -m(0, 0) / m(0, 1);
        let y1 = -m(0, 0) / m(1, 0);
        let norm = C::new(1.0, 0.0) + y1 * q1;
        let n = self.a.nrows();
        let mut q = DVector::<C>::zeros(n);
        q[2 * j] = C::new(1.0, 0.0);
        q[2 * j + 1] = q1;
        let mut p = DVector::<C>::zeros(n);
        p[2 * j] = (C::new(1.0, 0.0) / norm).conj();
        p[2 * j + 1] = (y1 / norm).conj();
        (q, p)
    }

    fn omega(&self, j: usize) -> f64 {
        let b = |r, q| self.a[(2 * j + r, 2 * j + q)].re;
        (b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0)).sqrt()
    }
}

fn inner(p: &DVector<C>, x: &DVector<C>) -> C {
    p.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// (B2100, B1011, B0021, B1110) in the normalisation of the library.
fn oracle(p: &Params) -> [C; 4] {
    let g = Galerkin::new(p, 2 * p.n as usize + 2, 20_001);
    let (w1, w2) = (g.omega(0), g.omega(p.n as usize));
    let (q1, p1) = g.eigenpair(0, w1);
    let (q2, p2) = g.eigenpair(p.n as usize, w2);
    let (q1c, q2c) = (q1.map(|z| z.conj()), q2.map(|z| z.conj()));
    let i = |x: f64| C::new(0.0, x);
    let zero = C::new(0.0, 0.0);
    let h1100 = g.resolve(zero, &g.bilinear(&q1, &q1c));
    let h2000 = g.resolve(i(2.0 * w1), &g.bilinear(&q1, &q1));
    let h0011 = g.resolve(zero, &g.bilinear(&q2, &q2c));
    let h0020 = g.resolve(i(2.0 * w2), &g.bilinear(&q2, &q2));
    let h1010 = g.resolve(i(w1 + w2), &g.bilinear(&q1, &q2));
    let h1001 = g.resolve(i(w1 - w2), &g.bilinear(&q1, &q2c));
    let h0110 = g.resolve(i(w2 - w1), &g.bilinear(&q1c, &q2));

    let g2100 = inner(&p1, &(g.trilinear(&q1, &q1, &q1c) + g.bilinear(&h2000, &q1c) + g.bilinear(&h1100, &q1) * C::new(2.0, 0.0)));
    let g0021 = inner(&p2, &(g.trilinear(&q2, &q2, &q2c) + g.bilinear(&h0020, &q2c) + g.bilinear(&h0011, &q2) * C::new(2.0, 0.0)));
    let g1011 = inner(
        &p1,
        &(g.trilinear(&q1, &q2, &q2c) + g.bilinear(&h1010, &q2c) + g.bilinear(&h1001, &q2) + g.bilinear(&h0011, &q1)),
    );
    let g1110 = inner(
        &p2,
        &(g.trilinear(&q1, &q1c, &q2) + g.bilinear(&h1010, &q1c) + g.bilinear(&h0110, &q1) + g.bilinear(&h1100, &q2)),
    );
    [g2100 / 2.0, g1011, g0021 / 2.0, g1110]
}

fn library(p: &Params) -> [C; 4] {
    let spec = holling_tanner(p.lambda(), p.c(), p.beta, p.d1, p.d2, p.ell).unwrap();
    let dh = double_hopf(&spec, p.n).unwrap();
    let basis = build_basis(&spec, &dh).unwrap();
    let rep = normal_form(&spec, &basis, &dh).unwrap();
    let b = rep.third_order;
    [b.c2100, b.c1011, b.c0021, b.c1110]
}

fn compare(p: &Params) {
    let (ours, theirs) = (library(p), oracle(p));
    for (k, (a, b)) in ours.iter().zip(&theirs).enumerate() {
        let scale = b.norm().max(1e-3);
        assert!((a - b).norm() < 1e-9 * scale.max(1.0), "coefficient {k}: library {a}, oracle {b}");
    }
}

#[test]
fn reference_point_matches_galerkin() {
    compare(&Params { beta: 0.1, d1: 0.6, d2: 0.2, ell: 8f64.sqrt(), n: 1 });
}

#[test]
fn unequal_diffusion_matches_galerkin() {
    compare(&Params { beta: 0.2, d1: 1.0, d2: 0.1, ell: 12f64.sqrt(), n: 1 });
}

#[test]
fn other_parameters_match_galerkin() {
    compare(&Params { beta: 0.15, d1: 0.5, d2: 0.3, ell: 9f64.sqrt(), n: 1 });
}

#[test]
fn oracle_reproduces_polar_ratios() {
    let [b2100, b1011, b0021, b1110] = oracle(&Params { beta: 0.1, d1: 0.6, d2: 0.2, ell: 8f64.sqrt(), n: 1 });
    let (e1, e2) = (b2100.re.signum(), b0021.re.signum());
    assert!((e1 * e2 * b1011.re / b0021.re + 21.1266).abs() < 1e-3);
    assert!((b1110.re / b2100.re + 0.62295).abs() < 1e-4);
}
