//! Intrusive square-root balanced truncation.

use crate::dense::{self, Mat};
use crate::error::{Error, Result};
use crate::loewner::{check_order, Provenance, ReducedModel};
use crate::lti::{diag, StateSpace};
use crate::spectral::{build_factors, SpectralFactorSet, Variant};

/// Square-root factors `P_X = U_X U_X^T`, `Q_Y = L_Y L_Y^T`.
#[derive(Clone, Debug)]
pub struct GramianPair {
    pub u_x: Mat,
    pub l_y: Mat,
    pub variant: Variant,
}

impl GramianPair {
    pub fn from_factors(set: &SpectralFactorSet) -> Result<Self> {
        Ok(Self {
            u_x: dense::psd_factor(&set.p_x.x, 1e-10)?,
            l_y: dense::psd_factor(&set.q_y.x, 1e-10)?,
            variant: set.variant,
        })
    }

    /// Singular values of `L_Y^T U_X`.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        dense::singular_values(&(self.l_y.transpose() * &self.u_x))
    }
}

pub fn gramian_pair(sys: &StateSpace, variant: Variant) -> Result<GramianPair> {
    GramianPair::from_factors(&build_factors(sys, variant)?)
}

/// Petrov-Galerkin bases `W_r = L_Y Z_1 S^{-1/2}`, `V_r = U_X Y_1 S^{-1/2}`.
pub fn projection_bases(pair: &GramianPair, r: usize) -> Result<(Mat, Mat, Vec<f64>)> {
    let n = pair.u_x.nrows();
    let (z, s, y) = dense::svd(&(pair.l_y.transpose() * &pair.u_x))?;
    check_order(&s, r, n, n)?;
    let w = diag(&s[..r].iter().map(|x| 1.0 / x.sqrt()).collect::<Vec<_>>());
    let wr = &pair.l_y * z.columns(0, r) * &w;
    let vr = &pair.u_x * y.columns(0, r) * &w;
    Ok((wr, vr, s))
}

pub fn truncate(sys: &StateSpace, pair: &GramianPair, r: usize) -> Result<ReducedModel> {
    if r > sys.n() {
        return Err(Error::RankDeficient { r, rank: sys.n() });
    }
    let (wr, vr, s) = projection_bases(pair, r)?;
    let wt = wr.transpose();
    Ok(ReducedModel {
        system: StateSpace::new(&wt * &sys.a * &vr, &wt * &sys.b, &sys.c * &vr, sys.d.clone())?,
        singular_values: s,
        variant: pair.variant,
        provenance: Provenance::Intrusive,
    })
}

pub fn sqrt_bt(sys: &StateSpace, variant: Variant, r: usize) -> Result<ReducedModel> {
    truncate(sys, &gramian_pair(sys, variant)?, r)
}
