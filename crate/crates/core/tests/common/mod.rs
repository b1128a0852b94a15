//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use quadbt_core::{CMat, Complex64, Mat, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn scalar(a: f64, b: f64, cc: f64, d: f64) -> StateSpace {
    let m = |x: f64| Mat::from_element(1, 1, x);
    StateSpace::new(m(a), m(b), m(cc), m(d)).unwrap()
}

/// (s+2)/(s+1)
pub fn s1() -> StateSpace {
    scalar(-1.0, 1.0, 1.0, 1.0)
}

/// 0.5/(s+1)
pub fn s2() -> StateSpace {
    scalar(-1.0, 1.0, 0.5, 0.0)
}

/// Transfer value through an explicit inverse of `sI - A`.
pub fn tf_inv(sys: &StateSpace, s: Complex64) -> CMat {
    let n = sys.n();
    let cx = |m: &Mat| m.map(|x| c(x, 0.0));
    if n == 0 {
        return cx(&sys.d);
    }
    let r = (CMat::identity(n, n) * s - cx(&sys.a)).try_inverse().expect("pole");
    cx(&sys.c) * r * cx(&sys.b) + cx(&sys.d)
}

/// Solves `A^T X + X A + Q = 0` through the n^2 x n^2 Kronecker system.
pub fn kron_lyap(a: &Mat, q: &Mat) -> Mat {
    let n = a.nrows();
    let mut k = Mat::zeros(n * n, n * n);
    // vec(A^T X) = (I kron A^T) vec X, vec(X A) = (A^T kron I) vec X
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                k[(i * n + j, i * n + l)] += a[(l, j)];
                k[(i * n + j, l * n + j)] += a[(l, i)];
            }
        }
    }
    let rhs = DMatrix::from_iterator(n * n, 1, q.iter().map(|x| -x));
    let v = k.lu().solve(&rhs).unwrap();
    Mat::from_iterator(n, n, v.iter().cloned())
}

pub fn sigma_max(g: &CMat) -> f64 {
    g.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Max of `sigma_max(G(i w))` over a dense log grid and `w = 0`.
pub fn grid_hinf(sys: &StateSpace, lo: f64, hi: f64, pts: usize) -> f64 {
    let mut best = sigma_max(&tf_inv(sys, c(0.0, 0.0)));
    for k in 0..pts {
        let w = 10f64.powf(lo.log10() + (hi / lo).log10() * k as f64 / (pts - 1) as f64);
        best = best.max(sigma_max(&tf_inv(sys, c(0.0, w))));
    }
    best
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_mat(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| r.gen_range(-1.0..1.0))
}

/// Stable `A` with eigenvalues spread over roughly [-3, -0.5].
pub fn rand_stable(r: &mut ChaCha8Rng, n: usize) -> Mat {
    let k = rand_mat(r, n, n);
    let x = rand_mat(r, n, n);
    (&k - k.transpose()) - (&x * x.transpose() / n as f64 + Mat::identity(n, n) * 0.5)
}

pub fn rand_system(seed: u64, n: usize, m: usize, p: usize) -> StateSpace {
    let mut r = rng(seed);
    let a = rand_stable(&mut r, n);
    StateSpace::new(a, rand_mat(&mut r, n, m), rand_mat(&mut r, p, n), rand_mat(&mut r, p, m)).unwrap()
}

/// Well-conditioned random similarity transform.
pub fn rand_transform(seed: u64, n: usize) -> Mat {
    let mut r = rng(seed);
    Mat::identity(n, n) + rand_mat(&mut r, n, n) * (0.3 / (n as f64).sqrt())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn rel_diff(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// `(L^*, U)` quadrature factors built from resolvents:
/// block row k of `L^*` is `phi_k C_Y (i w_k - A)^{-1}`, block column j of
/// `U` is `rho_j (i z_j - A)^{-1} B_X`.
pub fn quadrature_factors(
    a: &Mat,
    c_y: &Mat,
    b_x: &Mat,
    left: (&[f64], &[f64]),
    right: (&[f64], &[f64]),
) -> (CMat, CMat) {
    let n = a.nrows();
    let (py, mx) = (c_y.nrows(), b_x.ncols());
    let cx = |m: &Mat| m.map(|x| c(x, 0.0));
    let res = |w: f64| (CMat::identity(n, n) * c(0.0, w) - cx(a)).try_inverse().unwrap();
    let mut lstar = CMat::zeros(py * right.0.len(), n);
    for (k, (&w, &phi)) in right.0.iter().zip(right.1).enumerate() {
        lstar.rows_mut(k * py, py).copy_from(&(cx(c_y) * res(w) * c(phi, 0.0)));
    }
    let mut u = CMat::zeros(n, mx * left.0.len());
    for (j, (&z, &rho)) in left.0.iter().zip(left.1).enumerate() {
        u.columns_mut(j * mx, mx).copy_from(&(res(z) * cx(b_x) * c(rho, 0.0)));
    }
    (lstar, u)
}
