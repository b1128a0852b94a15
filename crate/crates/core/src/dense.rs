//! Thin LAPACK wrappers over nalgebra column-major storage.

use std::os::raw::c_int;
use std::sync::Once;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

extern "C" {
    fn openblas_set_num_threads(n: c_int);
}

static INIT: Once = Once::new();

// OpenBLAS threads would oversubscribe the rayon pool and make reductions
// order dependent.
fn init() {
    INIT.call_once(|| unsafe { openblas_set_num_threads(1) });
}

fn check(routine: &'static str, info: i32) -> Result<()> {
    if info != 0 {
        return Err(Error::Lapack { routine, info });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    None,
    StableFirst,
}

#[derive(Clone, Debug)]
pub struct Schur {
    pub t: Mat,
    pub z: Mat,
    pub eigs: Vec<Complex64>,
    /// Number of selected (stable) eigenvalues when ordered.
    pub sdim: usize,
}

extern "C" fn select_stable(re: *const f64, _im: *const f64) -> i32 {
    unsafe { (*re < 0.0) as i32 }
}

/// Real Schur form `A = Z T Z^T`, optionally with the open left half-plane
/// eigenvalues moved to the leading block.
pub fn schur(a: &Mat, order: Order) -> Result<Schur> {
    init();
    let n = a.nrows();
    if n == 0 {
        return Ok(Schur { t: a.clone(), z: a.clone(), eigs: vec![], sdim: 0 });
    }
    let ni = n as i32;
    let mut t = a.clone();
    let mut z = Mat::zeros(n, n);
    let (mut wr, mut wi) = (vec![0.0; n], vec![0.0; n]);
    let mut bwork = vec![0i32; n];
    let mut sdim = 0;
    let mut info = 0;
    let (sort, sel): (u8, lapack::Select2F64) = match order {
        Order::None => (b'N', None),
        Order::StableFirst => (b'S', Some(select_stable)),
    };
    let mut q = [0.0];
    unsafe {
        lapack::dgees(
            b'V', sort, sel, ni, t.as_mut_slice(), ni, &mut sdim, &mut wr, &mut wi,
            z.as_mut_slice(), ni, &mut q, -1, &mut bwork, &mut info,
        );
    }
    check("dgees", info)?;
    let lwork = q[0] as usize;
    let mut work = vec![0.0; lwork.max(1)];
    unsafe {
        lapack::dgees(
            b'V', sort, sel, ni, t.as_mut_slice(), ni, &mut sdim, &mut wr, &mut wi,
            z.as_mut_slice(), ni, &mut work, lwork as i32, &mut bwork, &mut info,
        );
    }
    check("dgees", info)?;
    let eigs = wr.iter().zip(&wi).map(|(&r, &i)| Complex64::new(r, i)).collect();
    Ok(Schur { t, z, eigs, sdim: sdim as usize })
}

pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    init();
    let n = a.nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    let ni = n as i32;
    let mut t = a.clone();
    let (mut wr, mut wi) = (vec![0.0; n], vec![0.0; n]);
    let mut dummy = [0.0];
    let mut dummy2 = [0.0];
    let mut info = 0;
    let mut q = [0.0];
    unsafe {
        lapack::dgeev(
            b'N', b'N', ni, t.as_mut_slice(), ni, &mut wr, &mut wi, &mut dummy, 1, &mut dummy2,
            1, &mut q, -1, &mut info,
        );
    }
    check("dgeev", info)?;
    let lwork = (q[0] as usize).max(4 * n);
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dgeev(
            b'N', b'N', ni, t.as_mut_slice(), ni, &mut wr, &mut wi, &mut dummy, 1, &mut dummy2,
            1, &mut work, lwork as i32, &mut info,
        );
    }
    check("dgeev", info)?;
    Ok(wr.iter().zip(&wi).map(|(&r, &i)| Complex64::new(r, i)).collect())
}

/// Largest real part of the spectrum; `-inf` for an empty matrix.
pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eig(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    init();
    let n = a.nrows();
    if n == 0 {
        return Ok((vec![], a.clone()));
    }
    let ni = n as i32;
    let mut v = symmetrize(a);
    let mut w = vec![0.0; n];
    let mut info = 0;
    let mut q = [0.0];
    unsafe { lapack::dsyev(b'V', b'U', ni, v.as_mut_slice(), ni, &mut w, &mut q, -1, &mut info) };
    check("dsyev", info)?;
    let lwork = (q[0] as usize).max(3 * n);
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dsyev(b'V', b'U', ni, v.as_mut_slice(), ni, &mut w, &mut work, lwork as i32, &mut info)
    };
    check("dsyev", info)?;
    Ok((w, v))
}

/// Thin SVD `A = U diag(s) V^T`, singular values descending.
pub fn svd(a: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    init();
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok((Mat::zeros(m, 0), vec![], Mat::zeros(n, 0)));
    }
    let mut x = a.clone();
    let mut s = vec![0.0; k];
    let mut u = Mat::zeros(m, k);
    let mut vt = Mat::zeros(k, n);
    let mut info = 0;
    let mut q = [0.0];
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    unsafe {
        lapack::dgesvd(
            b'S', b'S', mi, ni, x.as_mut_slice(), mi, &mut s, u.as_mut_slice(), mi,
            vt.as_mut_slice(), ki, &mut q, -1, &mut info,
        );
    }
    check("dgesvd", info)?;
    let lwork = q[0] as usize;
    let mut work = vec![0.0; lwork.max(1)];
    unsafe {
        lapack::dgesvd(
            b'S', b'S', mi, ni, x.as_mut_slice(), mi, &mut s, u.as_mut_slice(), mi,
            vt.as_mut_slice(), ki, &mut work, lwork as i32, &mut info,
        );
    }
    check("dgesvd", info)?;
    Ok((u, s, vt.transpose()))
}

/// Complex thin SVD `A = U diag(s) V^*`.
pub fn svd_complex(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    init();
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok((CMat::zeros(m, 0), vec![], CMat::zeros(n, 0)));
    }
    let mut x = a.clone();
    let mut s = vec![0.0; k];
    let mut u = CMat::zeros(m, k);
    let mut vt = CMat::zeros(k, n);
    let mut rwork = vec![0.0; 5 * k];
    let mut info = 0;
    let mut q = [Complex64::new(0.0, 0.0)];
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    unsafe {
        lapack::zgesvd(
            b'S', b'S', mi, ni, x.as_mut_slice(), mi, &mut s, u.as_mut_slice(), mi,
            vt.as_mut_slice(), ki, &mut q, -1, &mut rwork, &mut info,
        );
    }
    check("zgesvd", info)?;
    let lwork = q[0].re as usize;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1)];
    unsafe {
        lapack::zgesvd(
            b'S', b'S', mi, ni, x.as_mut_slice(), mi, &mut s, u.as_mut_slice(), mi,
            vt.as_mut_slice(), ki, &mut work, lwork as i32, &mut rwork, &mut info,
        );
    }
    check("zgesvd", info)?;
    Ok((u, s, vt.adjoint()))
}

pub fn singular_values(a: &Mat) -> Result<Vec<f64>> {
    Ok(svd(a)?.1)
}

/// Solves `op(A) X + isgn X op(B) = C` for upper quasi-triangular `A`, `B`.
/// `trana`/`tranb` are `b'N'` or `b'T'`.
pub fn trsyl(trana: u8, tranb: u8, isgn: i32, a: &Mat, b: &Mat, c: &Mat) -> Result<Mat> {
    init();
    let (m, n) = c.shape();
    if m == 0 || n == 0 {
        return Ok(c.clone());
    }
    let mut x = c.clone();
    let mut scale = [1.0];
    let mut info = 0;
    unsafe {
        lapack::dtrsyl(
            trana, tranb, &[isgn], m as i32, n as i32, a.as_slice(), m as i32, b.as_slice(),
            n as i32, x.as_mut_slice(), m as i32, &mut scale, &mut info,
        );
    }
    if info == 1 {
        return Err(Error::IllConditionedSeparation);
    }
    check("dtrsyl", info)?;
    if scale[0] != 1.0 {
        x /= scale[0];
    }
    Ok(x)
}

/// Orthogonal Hessenberg reduction `A = Q H Q^T`.
pub fn hessenberg(a: &Mat) -> Result<(Mat, Mat)> {
    init();
    let n = a.nrows();
    if n <= 1 {
        return Ok((a.clone(), Mat::identity(n, n)));
    }
    let ni = n as i32;
    let mut h = a.clone();
    let mut tau = vec![0.0; n - 1];
    let mut info = 0;
    let mut q = [0.0];
    unsafe { lapack::dgehrd(ni, 1, ni, h.as_mut_slice(), ni, &mut tau, &mut q, -1, &mut info) };
    check("dgehrd", info)?;
    let lwork = (q[0] as usize).max(n);
    let mut work = vec![0.0; lwork];
    unsafe {
        lapack::dgehrd(ni, 1, ni, h.as_mut_slice(), ni, &mut tau, &mut work, lwork as i32, &mut info)
    };
    check("dgehrd", info)?;
    let mut qm = h.clone();
    unsafe {
        lapack::dorghr(ni, 1, ni, qm.as_mut_slice(), ni, &tau, &mut work, lwork as i32, &mut info)
    };
    check("dorghr", info)?;
    for j in 0..n {
        for i in (j + 2)..n {
            h[(i, j)] = 0.0;
        }
    }
    Ok((h, qm))
}

pub fn symmetrize(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Principal square root of an SPD matrix; `None` if not positive definite.
pub fn sqrtm_spd(a: &Mat) -> Result<Option<Mat>> {
    let (w, v) = sym_eig(a)?;
    if w.iter().any(|&x| x <= 0.0) {
        return Ok(None);
    }
    let d = Mat::from_diagonal(&nalgebra::DVector::from_iterator(w.len(), w.iter().map(|x| x.sqrt())));
    Ok(Some(&v * d * v.transpose()))
}

/// Square-root factor `F` with `X = F F^T` from the eigendecomposition,
/// clipping eigenvalues at zero. Fails when an eigenvalue is below
/// `-tol * ||X||_2`.
pub fn psd_factor(x: &Mat, tol: f64) -> Result<Mat> {
    let (w, v) = sym_eig(x)?;
    let top = w.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    if let Some(&lo) = w.first() {
        if lo < -tol * top {
            return Err(Error::PreconditionViolated(format!(
                "Gramian is indefinite (min eigenvalue {lo:.3e})"
            )));
        }
    }
    let mut f = v;
    for (j, &e) in w.iter().enumerate() {
        let s = e.max(0.0).sqrt();
        f.column_mut(j).scale_mut(s);
    }
    Ok(f)
}

/// Inverse of a small square matrix via LU with a reciprocal-condition guard.
pub fn inverse_checked(a: &Mat, rcond_min: f64) -> Option<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Some(a.clone());
    }
    let s = singular_values(a).ok()?;
    if s[n - 1] <= rcond_min * s[0] || s[0] == 0.0 {
        return None;
    }
    a.clone().try_inverse()
}

pub fn to_complex(a: &Mat) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn spectral_norm(a: &Mat) -> f64 {
    singular_values(a).ok().and_then(|s| s.first().copied()).unwrap_or(0.0)
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let (r1, c1) = a.shape();
    let (r2, c2) = b.shape();
    let mut m = Mat::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(a);
    m.view_mut((r1, c1), (r2, c2)).copy_from(b);
    m
}

pub fn vstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.ncols());
    let mut m = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    m.rows_mut(0, a.nrows()).copy_from(a);
    m.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    m
}

pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows());
    let mut m = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}
