//! Loewner quadruple assembly from frequency data and the data-driven
//! square-root reduction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{self, CMat, Mat};
use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::quadrature::{sample_dataset, FrequencyDataset, QuadratureRule};
use crate::spectral::{Oracles, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Intrusive,
    Quadrature { n_left: usize, n_right: usize },
}

#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub system: StateSpace,
    /// Every computed singular value, descending.
    pub singular_values: Vec<f64>,
    pub variant: Variant,
    pub provenance: Provenance,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.system.n()
    }
}

/// Data-driven surrogates of `L^* U`, `L^* A U`, `L^* B`, `C U`.
#[derive(Clone, Debug)]
pub struct LoewnerQuadruple {
    pub l: CMat,
    pub m: CMat,
    pub h: CMat,
    pub g: CMat,
    pub p_y: usize,
    pub m_x: usize,
    /// Right node count (block rows).
    pub k: usize,
    /// Left node count (block columns).
    pub j: usize,
    pub variant: Variant,
    pub real: bool,
}

pub fn assemble_loewner(data: &FrequencyDataset) -> Result<LoewnerQuadruple> {
    data.validate()?;
    let (py, mx) = (data.p_y, data.m_x);
    let (kk, jj) = (data.right.len(), data.left.len());
    let mut l = CMat::zeros(py * kk, mx * jj);
    let mut m = CMat::zeros(py * kk, mx * jj);
    let mut h = CMat::zeros(py * kk, data.m);
    let mut g = CMat::zeros(data.p, mx * jj);
    let i = Complex64::i();
    for k in 0..kk {
        let sk = i * data.right.nodes[k];
        let phi = data.right.weights[k];
        let gk = &data.gsa_right[k];
        h.view_mut((k * py, 0), (py, data.m)).copy_from(&(&data.gb_right[k] * Complex64::from(phi)));
        for j in 0..jj {
            let zj = i * data.left.nodes[j];
            let rho = data.left.weights[j];
            let gj = &data.gsa_left[j];
            let diff = sk - zj;
            if diff.norm() == 0.0 {
                return Err(Error::NodeCollision(data.right.nodes[k]));
            }
            let c = Complex64::from(-phi * rho) / diff;
            l.view_mut((k * py, j * mx), (py, mx)).copy_from(&((gk - gj) * c));
            m.view_mut((k * py, j * mx), (py, mx)).copy_from(&((gk * sk - gj * zj) * c));
        }
    }
    for j in 0..jj {
        let rho = data.left.weights[j];
        g.view_mut((0, j * mx), (data.p, mx)).copy_from(&(&data.gc_left[j] * Complex64::from(rho)));
    }
    Ok(LoewnerQuadruple { l, m, h, g, p_y: py, m_x: mx, k: kk, j: jj, variant: data.variant, real: false })
}

fn conj_pairs(rule: &QuadratureRule) -> Result<Vec<(usize, usize)>> {
    if !rule.conj_closed {
        return Err(Error::NotConjugateClosed);
    }
    rule.conj_pairs().ok_or(Error::NotConjugateClosed)
}

fn samples_conjugate(a: &[CMat], pairs: &[(usize, usize)]) -> bool {
    pairs.iter().all(|&(i, j)| {
        let scale = a[i].iter().chain(a[j].iter()).fold(0.0f64, |s, z| s.max(z.norm()));
        let diff = (&a[i] - a[j].map(|z| z.conj())).iter().fold(0.0f64, |s, z| s.max(z.norm()));
        diff <= 1e-10 * scale.max(f64::MIN_POSITIVE)
    })
}

// Block rows (r_a, r_b) -> ((r_a + r_b)/sqrt2, i (r_a - r_b)/sqrt2).
fn mix_rows(x: &CMat, pairs: &[(usize, usize)], bs: usize) -> CMat {
    let mut y = x.clone();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    for &(a, b) in pairs {
        let ra = x.rows(a * bs, bs).into_owned();
        let rb = x.rows(b * bs, bs).into_owned();
        y.rows_mut(a * bs, bs).copy_from(&((&ra + &rb) * Complex64::from(s)));
        y.rows_mut(b * bs, bs).copy_from(&((&ra - &rb) * (i * s)));
    }
    y
}

// Right multiplication by the adjoint of the same transform.
fn mix_cols(x: &CMat, pairs: &[(usize, usize)], bs: usize) -> CMat {
    let mut y = x.clone();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    for &(a, b) in pairs {
        let ca = x.columns(a * bs, bs).into_owned();
        let cb = x.columns(b * bs, bs).into_owned();
        y.columns_mut(a * bs, bs).copy_from(&((&ca + &cb) * Complex64::from(s)));
        y.columns_mut(b * bs, bs).copy_from(&((&cb - &ca) * (i * s)));
    }
    y
}

fn rel_imag(x: &CMat) -> f64 {
    let num = x.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    let den = x.norm();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Unitary pairing of `+-omega` blocks that turns the quadruple real.
pub fn realify(q: &LoewnerQuadruple, data: &FrequencyDataset) -> Result<LoewnerQuadruple> {
    let rp = conj_pairs(&data.right)?;
    let lp = conj_pairs(&data.left)?;
    if data.right.len() != q.k || data.left.len() != q.j {
        return Err(Error::DimensionMismatch("dataset does not match quadruple".into()));
    }
    if !samples_conjugate(&data.gsa_right, &rp)
        || !samples_conjugate(&data.gb_right, &rp)
        || !samples_conjugate(&data.gsa_left, &lp)
        || !samples_conjugate(&data.gc_left, &lp)
    {
        return Err(Error::NotConjugateClosed);
    }
    let l = mix_cols(&mix_rows(&q.l, &rp, q.p_y), &lp, q.m_x);
    let m = mix_cols(&mix_rows(&q.m, &rp, q.p_y), &lp, q.m_x);
    let h = mix_rows(&q.h, &rp, q.p_y);
    let g = mix_cols(&q.g, &lp, q.m_x);
    let worst = [&l, &m, &h, &g].iter().map(|x| rel_imag(x)).fold(0.0, f64::max);
    if worst > 1e-9 {
        return Err(Error::ResidualImaginary(worst));
    }
    let re = |x: &CMat| x.map(|z| Complex64::new(z.re, 0.0));
    Ok(LoewnerQuadruple { l: re(&l), m: re(&m), h: re(&h), g: re(&g), real: true, ..q.clone() })
}

/// Numerical rank with the usual `max(dim) * eps * sigma_1` cutoff.
pub fn numerical_rank(s: &[f64], rows: usize, cols: usize) -> usize {
    let Some(&s1) = s.first() else { return 0 };
    let tol = rows.max(cols) as f64 * f64::EPSILON * s1;
    s.iter().filter(|&&x| x > tol).count()
}

/// Admission rule shared with the intrusive reduction.
pub fn check_order(s: &[f64], r: usize, rows: usize, cols: usize) -> Result<()> {
    let rank = numerical_rank(s, rows, cols);
    if r == 0 || r > rank {
        return Err(Error::RankDeficient { r, rank });
    }
    if r < s.len() && s[r - 1] <= s[r] * (1.0 + 1e-10) {
        return Err(Error::DegenerateGap(r));
    }
    Ok(())
}

fn real_part_checked(x: &CMat) -> Result<Mat> {
    let ri = rel_imag(x);
    if ri > 1e-8 {
        return Err(Error::ResidualImaginary(ri));
    }
    Ok(x.map(|z| z.re))
}

pub fn reduce(q: &LoewnerQuadruple, r: usize, feedthrough: Option<&Mat>) -> Result<ReducedModel> {
    let (rows, cols) = q.l.shape();
    let (p, m) = (q.g.nrows(), q.h.ncols());
    let inv_sqrt = |s: &[f64]| s[..r].iter().map(|x| 1.0 / x.sqrt()).collect::<Vec<_>>();
    let (ar, br, cr, s) = if q.real {
        let lr = q.l.map(|z| z.re);
        let (u, s, v) = dense::svd(&lr)?;
        check_order(&s, r, rows, cols)?;
        let w = crate::lti::diag(&inv_sqrt(&s));
        let z1 = u.columns(0, r);
        let y1 = v.columns(0, r);
        let mr = q.m.map(|z| z.re);
        let hr = q.h.map(|z| z.re);
        let gr = q.g.map(|z| z.re);
        (&w * z1.transpose() * mr * y1 * &w, &w * z1.transpose() * hr, gr * y1 * &w, s)
    } else {
        let (u, s, v) = dense::svd_complex(&q.l)?;
        check_order(&s, r, rows, cols)?;
        let w = dense::to_complex(&crate::lti::diag(&inv_sqrt(&s)));
        let z1 = u.columns(0, r);
        let y1 = v.columns(0, r);
        let a = &w * z1.adjoint() * &q.m * y1 * &w;
        let b = &w * z1.adjoint() * &q.h;
        let c = &q.g * y1 * &w;
        (real_part_checked(&a)?, real_part_checked(&b)?, real_part_checked(&c)?, s)
    };
    let d = match feedthrough {
        Some(d) if d.shape() == (p, m) => d.clone(),
        Some(_) => return Err(Error::DimensionMismatch("feedthrough shape".into())),
        None => Mat::zeros(p, m),
    };
    Ok(ReducedModel {
        system: StateSpace::new(ar, br, cr, d)?,
        singular_values: s,
        variant: q.variant,
        provenance: Provenance::Quadrature { n_left: q.j, n_right: q.k },
    })
}

/// Singular values of the (realified when possible) Loewner matrix.
pub fn loewner_singular_values(q: &LoewnerQuadruple) -> Result<Vec<f64>> {
    if q.real {
        dense::singular_values(&q.l.map(|z| z.re))
    } else {
        Ok(dense::svd_complex(&q.l)?.1)
    }
}

/// Assembles and, when both rules are conjugate-closed, realifies.
pub fn quadruple_from_data(data: &FrequencyDataset) -> Result<LoewnerQuadruple> {
    let q = assemble_loewner(data)?;
    if data.left.conj_closed && data.right.conj_closed {
        realify(&q, data)
    } else {
        Ok(q)
    }
}

pub fn genquadbt_pipeline(
    oracles: &Oracles,
    left: &QuadratureRule,
    right: &QuadratureRule,
    r: usize,
    feedthrough: Option<&Mat>,
) -> Result<ReducedModel> {
    let data = sample_dataset(oracles, left, right)?;
    reduce(&quadruple_from_data(&data)?, r, feedthrough)
}
