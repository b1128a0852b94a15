//! Continuous-time LTI realizations and transfer-function tools.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dense::{self, block_diag, hstack, to_complex, vstack, CMat, Mat, Order};
use crate::error::{Error, Result};

/// Dense realization `G(s) = C (sI - A)^{-1} B + D`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl StateSpace {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
        }
        if b.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "B is {}x{}, C is {}x{} for n = {n}",
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// Static gain with an empty state.
    pub fn gain(d: Mat) -> Self {
        let (p, m) = d.shape();
        Self { a: Mat::zeros(0, 0), b: Mat::zeros(0, m), c: Mat::zeros(p, 0), d }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn eval(&self, s: Complex64) -> Result<CMat> {
        eval_tf(self, s)
    }

    pub fn abscissa(&self) -> Result<f64> {
        dense::spectral_abscissa(&self.a)
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.abscissa()? < 0.0)
    }

    /// State transformation `x -> T x`.
    pub fn similarity(&self, t: &Mat) -> Result<Self> {
        let ti = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("singular similarity transform".into()))?;
        Ok(Self { a: t * &self.a * &ti, b: t * &self.b, c: &self.c * ti, d: self.d.clone() })
    }
}

fn lu_singular(lu_u_diag: impl Iterator<Item = f64>, scale: f64, n: usize) -> bool {
    let tol = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * n as f64;
    lu_u_diag.into_iter().any(|u| u <= tol)
}

/// `C (sI - A)^{-1} B + D` by one LU solve with `m` right-hand sides.
pub fn eval_tf(sys: &StateSpace, s: Complex64) -> Result<CMat> {
    let n = sys.n();
    let mut g = to_complex(&sys.d);
    if n == 0 {
        return Ok(g);
    }
    let mut m = to_complex(&(-&sys.a));
    for i in 0..n {
        m[(i, i)] += s;
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = m.lu();
    if lu_singular(lu.u().diagonal().iter().map(|z| z.norm()), scale, n) {
        return Err(Error::SingularResolvent(s.re, s.im));
    }
    let x = lu.solve(&to_complex(&sys.b)).ok_or(Error::SingularResolvent(s.re, s.im))?;
    g += to_complex(&sys.c) * x;
    Ok(g)
}

pub fn strictly_proper(sys: &StateSpace) -> StateSpace {
    StateSpace { d: Mat::zeros(sys.p(), sys.m()), ..sys.clone() }
}

/// Realization of `G(-s)^T`.
pub fn dual(sys: &StateSpace) -> StateSpace {
    StateSpace {
        a: -sys.a.transpose(),
        b: -sys.c.transpose(),
        c: sys.b.transpose(),
        d: sys.d.transpose(),
    }
}

pub fn inverse(sys: &StateSpace) -> Result<StateSpace> {
    if sys.p() != sys.m() {
        return Err(Error::NonSquareSystem);
    }
    let di = dense::inverse_checked(&sys.d, 1e3 * f64::EPSILON).ok_or(Error::SingularFeedthrough)?;
    let bdi = &sys.b * &di;
    Ok(StateSpace {
        a: &sys.a - &bdi * &sys.c,
        b: bdi,
        c: -(&di * &sys.c),
        d: di,
    })
}

/// Realization of `G1(s) G2(s)` (the output of `sys2` drives `sys1`).
pub fn series(sys1: &StateSpace, sys2: &StateSpace) -> Result<StateSpace> {
    if sys2.p() != sys1.m() {
        return Err(Error::DimensionMismatch(format!(
            "series: sys2 has {} outputs, sys1 has {} inputs",
            sys2.p(),
            sys1.m()
        )));
    }
    let (n1, n2) = (sys1.n(), sys2.n());
    let mut a = block_diag(&sys1.a, &sys2.a);
    a.view_mut((0, n1), (n1, n2)).copy_from(&(&sys1.b * &sys2.c));
    Ok(StateSpace {
        a,
        b: vstack(&(&sys1.b * &sys2.d), &sys2.b),
        c: hstack(&sys1.c, &(&sys1.d * &sys2.c)),
        d: &sys1.d * &sys2.d,
    })
}

/// Realization of `G1(s) - G2(s)`.
pub fn difference(sys1: &StateSpace, sys2: &StateSpace) -> Result<StateSpace> {
    if sys1.p() != sys2.p() || sys1.m() != sys2.m() {
        return Err(Error::DimensionMismatch("difference: shapes differ".into()));
    }
    Ok(StateSpace {
        a: block_diag(&sys1.a, &sys2.a),
        b: vstack(&sys1.b, &sys2.b),
        c: hstack(&sys1.c, &(-&sys2.c)),
        d: &sys1.d - &sys2.d,
    })
}

/// Strictly proper stable part via an ordered real Schur form and one
/// Sylvester solve decoupling the stable and antistable blocks.
pub fn stable_part(sys: &StateSpace) -> Result<StateSpace> {
    let n = sys.n();
    let zero_d = Mat::zeros(sys.p(), sys.m());
    if n == 0 {
        return Ok(StateSpace { d: zero_d, ..sys.clone() });
    }
    let schur = dense::schur(&sys.a, Order::StableFirst)?;
    let gap = 1e-8 * sys.a.norm().max(f64::MIN_POSITIVE);
    if schur.eigs.iter().any(|e| e.re.abs() <= gap) {
        return Err(Error::ImaginaryAxisEigenvalue);
    }
    let k = schur.sdim;
    if k == n {
        return Ok(StateSpace { d: zero_d, ..sys.clone() });
    }
    let t = &schur.t;
    let bt = schur.z.transpose() * &sys.b;
    let ct = &sys.c * &schur.z;
    if k == 0 {
        return Ok(StateSpace {
            a: Mat::zeros(0, 0),
            b: Mat::zeros(0, sys.m()),
            c: Mat::zeros(sys.p(), 0),
            d: zero_d,
        });
    }
    let t11 = t.view((0, 0), (k, k)).into_owned();
    let t12 = t.view((0, k), (k, n - k)).into_owned();
    let t22 = t.view((k, k), (n - k, n - k)).into_owned();
    // T11 X - X T22 = -T12
    let x = dense::trsyl(b'N', b'N', -1, &t11, &t22, &(-t12))
        .map_err(|_| Error::ImaginaryAxisEigenvalue)?;
    let b1 = bt.rows(0, k) - &x * bt.rows(k, n - k);
    Ok(StateSpace { a: t11, b: b1, c: ct.columns(0, k).into_owned(), d: zero_d })
}

/// Repeated evaluation of `C (sI - A)^{-1} B + D` through a one-off
/// Hessenberg reduction; each point costs one O(n^2 m) pivoted solve.
#[derive(Clone, Debug)]
pub struct FrequencyEvaluator {
    h: Mat,
    qb: Mat,
    cq: Mat,
    d: Mat,
    scale: f64,
}

impl FrequencyEvaluator {
    pub fn new(sys: &StateSpace) -> Result<Self> {
        let (h, q) = dense::hessenberg(&sys.a)?;
        let scale = h.norm();
        Ok(Self { qb: q.transpose() * &sys.b, cq: &sys.c * &q, d: sys.d.clone(), h, scale })
    }

    pub fn rows(&self) -> usize {
        self.d.nrows()
    }

    pub fn cols(&self) -> usize {
        self.d.ncols()
    }

    pub fn eval(&self, s: Complex64) -> Result<CMat> {
        let n = self.h.nrows();
        let m = self.qb.ncols();
        let mut g = to_complex(&self.d);
        if n == 0 {
            return Ok(g);
        }
        let mut w = CMat::from_fn(n, n, |i, j| {
            let v = Complex64::new(-self.h[(i, j)], 0.0);
            if i == j {
                v + s
            } else {
                v
            }
        });
        let mut x = to_complex(&self.qb);
        let tol = f64::EPSILON * (self.scale + s.norm()).max(f64::MIN_POSITIVE) * n as f64;
        for k in 0..n - 1 {
            if w[(k + 1, k)].norm() > w[(k, k)].norm() {
                for j in k..n {
                    w.swap((k, j), (k + 1, j));
                }
                for j in 0..m {
                    x.swap((k, j), (k + 1, j));
                }
            }
            let piv = w[(k, k)];
            if piv.norm() <= tol {
                return Err(Error::SingularResolvent(s.re, s.im));
            }
            let l = w[(k + 1, k)] / piv;
            if l != Complex64::new(0.0, 0.0) {
                for j in (k + 1)..n {
                    let t = w[(k, j)];
                    w[(k + 1, j)] -= l * t;
                }
                for j in 0..m {
                    let t = x[(k, j)];
                    x[(k + 1, j)] -= l * t;
                }
            }
        }
        if w[(n - 1, n - 1)].norm() <= tol {
            return Err(Error::SingularResolvent(s.re, s.im));
        }
        for j in 0..m {
            for i in (0..n).rev() {
                let mut acc = x[(i, j)];
                for k in (i + 1)..n {
                    acc -= w[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc / w[(i, i)];
            }
        }
        g += to_complex(&self.cq) * x;
        Ok(g)
    }
}

fn sigma_max(g: &CMat) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    if g.len() == 1 {
        return g[(0, 0)].norm();
    }
    g.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

/// H-infinity norm estimate: log grid over [1e-6, 1e8] plus `omega = 0`,
/// the modal frequencies of `A`, and golden-section refinement of the
/// largest local maxima. Never returns less than the largest sampled value.
pub fn hinf_norm(sys: &StateSpace, rel_tol: f64) -> Result<f64> {
    let dinf = sigma_max(&to_complex(&sys.d));
    if sys.n() == 0 {
        return Ok(dinf);
    }
    let eigs = dense::eigenvalues(&sys.a)?;
    let alpha = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if alpha >= 0.0 {
        return Err(Error::UnstableSystem(alpha));
    }
    let ev = FrequencyEvaluator::new(sys)?;
    let f = |w: f64| -> Result<f64> { Ok(sigma_max(&ev.eval(Complex64::new(0.0, w))?)) };

    let mut grid = vec![0.0];
    grid.extend(logspace(1e-6, 1e8, 14 * 30 + 1));
    for e in &eigs {
        for w in [e.im.abs(), e.norm()] {
            if w > 0.0 && w.is_finite() {
                grid.push(w);
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let vals = grid.iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
    let mut best = vals.iter().cloned().fold(dinf, f64::max);

    let mut peaks: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let l = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
            let r = if i + 1 < vals.len() { vals[i + 1] } else { f64::NEG_INFINITY };
            vals[i] >= l && vals[i] >= r
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    peaks.truncate(5);

    let tol = rel_tol.clamp(1e-14, 1e-2);
    for &i in &peaks {
        let lo = if i > 0 { grid[i - 1] } else { grid[0] };
        let hi = if i + 1 < grid.len() { grid[i + 1] } else { grid[i] };
        if hi <= lo {
            continue;
        }
        // search in log(omega) unless the bracket touches omega = 0
        let linear = lo == 0.0;
        let (mut a, mut b) = if linear { (lo, hi) } else { (lo.ln(), hi.ln()) };
        let map = |x: f64| if linear { x } else { x.exp() };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = f(map(x1))?;
        let mut f2 = f(map(x2))?;
        best = best.max(f1).max(f2);
        for _ in 0..200 {
            let width = if linear { (b - a) / hi } else { b - a };
            if width < tol {
                break;
            }
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(map(x1))?;
                best = best.max(f1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(map(x2))?;
                best = best.max(f2);
            }
        }
    }
    Ok(best)
}

/// Largest singular value of `G(i omega)` for each `omega`.
pub fn sigma_max_response(sys: &StateSpace, omegas: &[f64]) -> Result<Vec<f64>> {
    let ev = FrequencyEvaluator::new(sys)?;
    omegas.iter().map(|&w| Ok(sigma_max(&ev.eval(Complex64::new(0.0, w))?))).collect()
}

/// Eigenvalues of `A - B D^{-1} C`, the transmission zeros of a square
/// system with invertible feedthrough.
pub fn zeros(sys: &StateSpace) -> Result<Vec<Complex64>> {
    let inv = inverse(sys)?;
    dense::eigenvalues(&inv.a)
}

pub fn identity_gain(k: usize) -> StateSpace {
    StateSpace::gain(Mat::identity(k, k))
}

pub(crate) fn diag(v: &[f64]) -> Mat {
    Mat::from_diagonal(&DVector::from_column_slice(v))
}
