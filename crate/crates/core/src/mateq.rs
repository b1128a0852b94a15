//! Lyapunov and Riccati solvers for the Gramians of the four balancing
//! variants.

use serde::{Deserialize, Serialize};

use crate::dense::{self, symmetrize, Mat, Order};
use crate::error::{Error, Result};
use crate::lti::StateSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramianKind {
    LyapunovP,
    LyapunovQ,
    BstQw,
    PrQm,
    PrPn,
    BrQj,
    BrPk,
}

#[derive(Clone, Debug)]
pub struct GramianSolution {
    pub x: Mat,
    /// Frobenius norm of the equation residual.
    pub residual_norm: f64,
    /// Spectral abscissa of the branch-selection (closed-loop) matrix.
    pub closed_loop_abscissa: f64,
    pub kind: GramianKind,
}

/// Solves `A^T X + X A + RHS = 0` by Bartels-Stewart.
///
/// The reachability Gramian is `solve_lyapunov(&a.transpose(), &(b * b^T))`.
pub fn solve_lyapunov(a: &Mat, rhs: &Mat) -> Result<GramianSolution> {
    let n = a.nrows();
    if a.ncols() != n || rhs.shape() != (n, n) {
        return Err(Error::DimensionMismatch("solve_lyapunov".into()));
    }
    if n == 0 {
        return Ok(GramianSolution {
            x: Mat::zeros(0, 0),
            residual_norm: 0.0,
            closed_loop_abscissa: f64::NEG_INFINITY,
            kind: GramianKind::LyapunovQ,
        });
    }
    let sch = dense::schur(a, Order::None)?;
    let alpha = sch.eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if alpha >= 0.0 {
        return Err(Error::UnstableA(alpha));
    }
    if 2.0 * alpha.abs() < 1e-14 * a.norm() {
        return Err(Error::IllConditionedSeparation);
    }
    let x = lyap_schur(&sch.t, &sch.z, rhs)?;
    let residual_norm = (a.transpose() * &x + &x * a + rhs).norm();
    Ok(GramianSolution { x, residual_norm, closed_loop_abscissa: alpha, kind: GramianKind::LyapunovQ })
}

// T^T Y + Y T = -Z^T RHS Z, X = Z Y Z^T
fn lyap_schur(t: &Mat, z: &Mat, rhs: &Mat) -> Result<Mat> {
    let c = -(z.transpose() * rhs * z);
    let y = dense::trsyl(b'T', b'N', 1, t, t, &c)?;
    Ok(symmetrize(&(z * y * z.transpose())))
}

pub fn reachability_gramian(sys: &StateSpace) -> Result<GramianSolution> {
    let mut s = solve_lyapunov(&sys.a.transpose(), &(&sys.b * sys.b.transpose()))?;
    s.kind = GramianKind::LyapunovP;
    Ok(s)
}

pub fn observability_gramian(sys: &StateSpace) -> Result<GramianSolution> {
    solve_lyapunov(&sys.a, &(sys.c.transpose() * &sys.c))
}

fn spd_inverse(r: &Mat) -> Result<Mat> {
    let (w, _) = dense::sym_eig(r)?;
    let top = w.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    if w.is_empty() || w[0] <= 1e-14 * top || top == 0.0 {
        return Err(Error::IndefiniteR);
    }
    let ch = symmetrize(r).cholesky().ok_or(Error::IndefiniteR)?;
    Ok(symmetrize(&ch.inverse()))
}

fn are_residual(a: &Mat, bq: &Mat, s: &Mat, ri: &Mat, q0: &Mat, x: &Mat) -> Mat {
    let k = x * bq + s;
    a.transpose() * x + x * a + q0 + &k * ri * k.transpose()
}

/// Stabilizing solution of
/// `A^T X + X A + Q0 + (X Bq + S) R^{-1} (X Bq + S)^T = 0`
/// from the stable invariant subspace of the Hamiltonian
/// `[[F, G], [-Q', -F^T]]` with `F = A + Bq R^{-1} S^T`,
/// `G = Bq R^{-1} Bq^T`, `Q' = Q0 + S R^{-1} S^T`.
/// The closed-loop matrix is `F + G X`.
pub fn solve_are_stabilizing(
    a: &Mat,
    bq: &Mat,
    s: &Mat,
    r: &Mat,
    q0: &Mat,
    kind: GramianKind,
) -> Result<GramianSolution> {
    let n = a.nrows();
    let k = bq.ncols();
    if a.ncols() != n || bq.nrows() != n || s.shape() != (n, k) || r.shape() != (k, k) || q0.shape() != (n, n)
    {
        return Err(Error::DimensionMismatch("solve_are_stabilizing".into()));
    }
    let ri = spd_inverse(r)?;
    if n == 0 {
        return Ok(GramianSolution {
            x: Mat::zeros(0, 0),
            residual_norm: 0.0,
            closed_loop_abscissa: f64::NEG_INFINITY,
            kind,
        });
    }
    let f = a + bq * &ri * s.transpose();
    let g = symmetrize(&(bq * &ri * bq.transpose()));
    let qp = symmetrize(&(q0 + s * &ri * s.transpose()));

    let mut h = Mat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&f);
    h.view_mut((0, n), (n, n)).copy_from(&g);
    h.view_mut((n, 0), (n, n)).copy_from(&(-&qp));
    h.view_mut((n, n), (n, n)).copy_from(&(-f.transpose()));

    let sch = dense::schur(&h, Order::StableFirst).map_err(|e| match e {
        Error::Lapack { info, .. } => {
            Error::NoStabilizingSolution(format!("ordered Schur failed (info {info})"))
        }
        e => e,
    })?;
    let gap = 1e-10 * h.norm();
    if sch.eigs.iter().any(|e| e.re.abs() <= gap) {
        return Err(Error::NoStabilizingSolution("Hamiltonian has imaginary-axis eigenvalues".into()));
    }
    if sch.sdim != n {
        return Err(Error::NoStabilizingSolution(format!(
            "stable subspace has dimension {} (expected {n})",
            sch.sdim
        )));
    }
    let z11 = sch.z.view((0, 0), (n, n)).into_owned();
    let z21 = sch.z.view((n, 0), (n, n)).into_owned();
    let sv = dense::singular_values(&z11)?;
    if sv[n - 1] <= 1e-13 * sv[0] {
        return Err(Error::NoStabilizingSolution("basis block Z11 is singular".into()));
    }
    // X Z11 = Z21
    let xt = z11
        .transpose()
        .lu()
        .solve(&z21.transpose())
        .ok_or_else(|| Error::NoStabilizingSolution("basis block Z11 is singular".into()))?;
    let mut x = symmetrize(&xt.transpose());
    let mut res = are_residual(a, bq, s, &ri, q0, &x).norm();

    // One Newton step on the closed loop polishes the subspace solution.
    let acl = &f + &g * &x;
    if let Ok(step) = solve_lyapunov(&acl, &symmetrize(&are_residual(a, bq, s, &ri, q0, &x))) {
        let x1 = symmetrize(&(&x + &step.x));
        let res1 = are_residual(a, bq, s, &ri, q0, &x1).norm();
        if res1 < res {
            x = x1;
            res = res1;
        }
    }
    let closed_loop_abscissa = dense::spectral_abscissa(&(&f + &g * &x))?;
    if closed_loop_abscissa >= 0.0 {
        return Err(Error::NoStabilizingSolution(format!(
            "closed loop abscissa {closed_loop_abscissa:.3e}"
        )));
    }
    Ok(GramianSolution { x, residual_norm: res, closed_loop_abscissa, kind })
}

fn require_square(sys: &StateSpace) -> Result<()> {
    if sys.p() != sys.m() {
        return Err(Error::NonSquareSystem);
    }
    Ok(())
}

/// `Q_W` for balanced stochastic truncation, given the reachability Gramian.
pub fn solve_bst_are(sys: &StateSpace, p: &Mat) -> Result<GramianSolution> {
    require_square(sys)?;
    if dense::inverse_checked(&sys.d, 1e3 * f64::EPSILON).is_none() {
        return Err(Error::SingularD);
    }
    let n = sys.n();
    let bw = p * sys.c.transpose() + &sys.b * sys.d.transpose();
    let r = &sys.d * sys.d.transpose();
    solve_are_stabilizing(&sys.a, &bw, &(-sys.c.transpose()), &r, &Mat::zeros(n, n), GramianKind::BstQw)
}

/// `(Q_M, P_N)` for positive-real balanced truncation.
pub fn solve_pr_ares(sys: &StateSpace) -> Result<(GramianSolution, GramianSolution)> {
    require_square(sys)?;
    let n = sys.n();
    let r = &sys.d + sys.d.transpose();
    let wrap = |e: Error| match e {
        Error::IndefiniteR => Error::NotPositiveReal("D + D^T is not positive definite".into()),
        Error::NoStabilizingSolution(s) => Error::NotPositiveReal(s),
        e => e,
    };
    let z = Mat::zeros(n, n);
    let qm = solve_are_stabilizing(&sys.a, &sys.b, &(-sys.c.transpose()), &r, &z, GramianKind::PrQm)
        .map_err(wrap)?;
    let pn = solve_are_stabilizing(
        &sys.a.transpose(),
        &sys.c.transpose(),
        &(-&sys.b),
        &r,
        &z,
        GramianKind::PrPn,
    )
    .map_err(wrap)?;
    Ok((qm, pn))
}

/// `(Q_J, P_K)` for bounded-real balanced truncation.
pub fn solve_br_ares(sys: &StateSpace) -> Result<(GramianSolution, GramianSolution)> {
    let (p, m) = (sys.p(), sys.m());
    let rj = Mat::identity(m, m) - sys.d.transpose() * &sys.d;
    let rk = Mat::identity(p, p) - &sys.d * sys.d.transpose();
    let wrap = |e: Error| match e {
        Error::IndefiniteR => Error::NotBoundedReal("I - D^T D is not positive definite".into()),
        Error::NoStabilizingSolution(s) => Error::NotBoundedReal(s),
        e => e,
    };
    let qj = solve_are_stabilizing(
        &sys.a,
        &sys.b,
        &(sys.c.transpose() * &sys.d),
        &rj,
        &(sys.c.transpose() * &sys.c),
        GramianKind::BrQj,
    )
    .map_err(wrap)?;
    let pk = solve_are_stabilizing(
        &sys.a.transpose(),
        &sys.c.transpose(),
        &(&sys.b * sys.d.transpose()),
        &rk,
        &(&sys.b * sys.b.transpose()),
        GramianKind::BrPk,
    )
    .map_err(wrap)?;
    Ok((qj, pk))
}
