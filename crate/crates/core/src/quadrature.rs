//! Imaginary-axis quadrature rules and frequency-domain datasets.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dense::{CMat, Mat};
use crate::error::{Error, Result};
use crate::spectral::{Oracles, Variant};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    /// Real frequencies; the sample point is `i * node`.
    pub nodes: Vec<f64>,
    /// Square roots of the quadrature weights (1/(2 pi) folded in).
    pub weights: Vec<f64>,
    pub conj_closed: bool,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Validates ordering, positivity and, when claimed, conjugate closure.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(Error::DimensionMismatch("rule nodes/weights".into()));
        }
        if self.nodes.iter().chain(&self.weights).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("quadrature rule"));
        }
        if self.weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidInput("quadrature weights must be positive".into()));
        }
        let order = self.sorted_order();
        if order.windows(2).any(|w| self.nodes[w[1]] <= self.nodes[w[0]]) {
            return Err(Error::InvalidInput("quadrature nodes must be distinct".into()));
        }
        if self.conj_closed && !self.is_conj_symmetric() {
            return Err(Error::NotConjugateClosed);
        }
        Ok(())
    }

    /// Node indices in ascending node order.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.nodes.len()).collect();
        idx.sort_by(|&a, &b| self.nodes[a].total_cmp(&self.nodes[b]));
        idx
    }

    /// Index pairs `(i, j)` with `nodes[j] = -nodes[i]`; a node at zero is
    /// its own partner and is left out.
    pub fn conj_pairs(&self) -> Option<Vec<(usize, usize)>> {
        let idx = self.sorted_order();
        let k = idx.len();
        let scale = self.nodes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut pairs = Vec::with_capacity(k / 2);
        for t in 0..k.div_ceil(2) {
            let (a, b) = (idx[t], idx[k - 1 - t]);
            if (self.nodes[a] + self.nodes[b]).abs() > 1e-12 * scale
                || (self.weights[a] - self.weights[b]).abs() > 1e-12 * self.weights[a]
            {
                return None;
            }
            if a != b {
                pairs.push((a, b));
            }
        }
        Some(pairs)
    }

    pub fn is_conj_symmetric(&self) -> bool {
        self.conj_pairs().is_some()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::OddN(n));
    }
    Ok(())
}

fn check_range(wmin: f64, wmax: f64) -> Result<()> {
    if !(wmin > 0.0 && wmax > wmin && wmax.is_finite()) {
        return Err(Error::InvalidRange(wmin, wmax));
    }
    Ok(())
}

/// Trapezoid rule on increasing positive nodes, mirrored to `+-theta`.
fn mirrored_trapezoid(theta: &[f64]) -> QuadratureRule {
    let h = theta.len();
    let mut w = vec![0.0; h];
    w[0] = (theta[1] - theta[0]) / 2.0;
    w[h - 1] = (theta[h - 1] - theta[h - 2]) / 2.0;
    for i in 1..h - 1 {
        w[i] = (theta[i + 1] - theta[i - 1]) / 2.0;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut nodes = Vec::with_capacity(2 * h);
    let mut weights = Vec::with_capacity(2 * h);
    for i in (0..h).rev() {
        nodes.push(-theta[i]);
        weights.push((w[i] / two_pi).sqrt());
    }
    for i in 0..h {
        nodes.push(theta[i]);
        weights.push((w[i] / two_pi).sqrt());
    }
    QuadratureRule { nodes, weights, conj_closed: true }
}

fn log_grid(wmin: f64, wmax: f64, count: usize) -> Vec<f64> {
    let (a, b) = (wmin.ln(), wmax.ln());
    let mut t: Vec<f64> =
        (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect();
    t[0] = wmin;
    t[count - 1] = wmax;
    t
}

/// `n/2` log-spaced positive nodes on `[wmin, wmax]`, mirrored, with
/// trapezoid weights `sqrt(w_i / (2 pi))`.
pub fn logtrap_rule(wmin: f64, wmax: f64, n: usize) -> Result<QuadratureRule> {
    check_range(wmin, wmax)?;
    check_n(n)?;
    Ok(mirrored_trapezoid(&log_grid(wmin, wmax, n / 2)))
}

/// Disjoint left/right rules of `n` nodes each: the positive nodes of the
/// right rule are the even points of one `n`-point log grid on
/// `[wmin, wmax]`, the left rule takes the odd points.
pub fn interleaved_rules(wmin: f64, wmax: f64, n: usize) -> Result<(QuadratureRule, QuadratureRule)> {
    check_range(wmin, wmax)?;
    check_n(n)?;
    let g = log_grid(wmin, wmax, n);
    let right: Vec<f64> = g.iter().step_by(2).cloned().collect();
    let left: Vec<f64> = g.iter().skip(1).step_by(2).cloned().collect();
    Ok((mirrored_trapezoid(&left), mirrored_trapezoid(&right)))
}

/// The non-intrusive input of the data-driven reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyDataset {
    pub variant: Variant,
    /// Rows of `G_sigmaA` and `G_B`.
    pub p_y: usize,
    /// Columns of `G_sigmaA` and `G_C`.
    pub m_x: usize,
    pub p: usize,
    pub m: usize,
    /// `(zeta_j, rho_j)`.
    pub left: QuadratureRule,
    /// `(omega_k, phi_k)`.
    pub right: QuadratureRule,
    pub gsa_left: Vec<CMat>,
    pub gc_left: Vec<CMat>,
    pub gsa_right: Vec<CMat>,
    pub gb_right: Vec<CMat>,
    /// Optional high-frequency limit used as the ROM feedthrough.
    pub feedthrough: Option<Mat>,
}

fn check_disjoint(left: &QuadratureRule, right: &QuadratureRule) -> Result<()> {
    let scale = left.nodes.iter().chain(&right.nodes).fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * scale;
    for &w in &right.nodes {
        for &z in &left.nodes {
            if (w - z).abs() <= tol {
                return Err(Error::NodeCollision(w));
            }
        }
    }
    Ok(())
}

impl FrequencyDataset {
    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        check_disjoint(&self.left, &self.right)?;
        let (j, k) = (self.left.len(), self.right.len());
        let lens = [self.gsa_left.len(), self.gc_left.len(), self.gsa_right.len(), self.gb_right.len()];
        if lens != [j, j, k, k] {
            return Err(Error::DimensionMismatch("sample counts do not match rules".into()));
        }
        let shaped = |v: &[CMat], r: usize, c: usize| v.iter().all(|g| g.shape() == (r, c));
        if !shaped(&self.gsa_left, self.p_y, self.m_x)
            || !shaped(&self.gsa_right, self.p_y, self.m_x)
            || !shaped(&self.gc_left, self.p, self.m_x)
            || !shaped(&self.gb_right, self.p_y, self.m)
        {
            return Err(Error::DimensionMismatch("sample shapes do not match metadata".into()));
        }
        let all = self.gsa_left.iter().chain(&self.gc_left).chain(&self.gsa_right).chain(&self.gb_right);
        for g in all {
            if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("samples"));
            }
        }
        if let Some(d) = &self.feedthrough {
            if d.shape() != (self.p, self.m) {
                return Err(Error::DimensionMismatch("feedthrough shape".into()));
            }
        }
        Ok(())
    }
}

fn sample(o: &crate::spectral::TransferOracle, nodes: &[f64]) -> Result<Vec<CMat>> {
    nodes.par_iter().map(|&w| o.eval(Complex64::new(0.0, w))).collect()
}

/// Samples `G_sigmaA` on both rules, `G_C` on the left and `G_B` on the right.
pub fn sample_dataset(
    oracles: &Oracles,
    left: &QuadratureRule,
    right: &QuadratureRule,
) -> Result<FrequencyDataset> {
    left.validate()?;
    right.validate()?;
    check_disjoint(left, right)?;
    let (sa, b, c) = (&oracles.sigma_a, &oracles.b, &oracles.c);
    if b.rows() != sa.rows() || c.cols() != sa.cols() {
        return Err(Error::DimensionMismatch("oracle shapes are inconsistent".into()));
    }
    Ok(FrequencyDataset {
        variant: oracles.variant(),
        p_y: sa.rows(),
        m_x: sa.cols(),
        p: c.rows(),
        m: b.cols(),
        left: left.clone(),
        right: right.clone(),
        gsa_left: sample(sa, &left.nodes)?,
        gc_left: sample(c, &left.nodes)?,
        gsa_right: sample(sa, &right.nodes)?,
        gb_right: sample(b, &right.nodes)?,
        feedthrough: None,
    })
}
