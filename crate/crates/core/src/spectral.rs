//! Spectral factors of the balancing variants and the sampling oracles
//! `(G_sigmaA, G_B, G_C)` built from them.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{self, hstack, vstack, CMat, Mat};
use crate::error::{Error, Result};
use crate::lti::{self, FrequencyEvaluator, StateSpace};
use crate::mateq::{self, GramianSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Lyapunov,
    Bst,
    Prbt,
    Brbt,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Lyapunov, Variant::Bst, Variant::Prbt, Variant::Brbt];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Lyapunov => "lyapunov",
            Variant::Bst => "bst",
            Variant::Prbt => "prbt",
            Variant::Brbt => "brbt",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lyapunov" | "bt" => Ok(Variant::Lyapunov),
            "bst" => Ok(Variant::Bst),
            "prbt" => Ok(Variant::Prbt),
            "brbt" => Ok(Variant::Brbt),
            _ => Err(Error::InvalidInput(format!("unknown variant '{s}'"))),
        }
    }
}

/// `G(s) + G(-s)^T`.
pub fn popov(sys: &StateSpace, s: Complex64) -> Result<CMat> {
    Ok(lti::eval_tf(sys, s)? + lti::eval_tf(sys, -s)?.transpose())
}

#[derive(Clone, Debug)]
pub struct SpectralFactorSet {
    pub variant: Variant,
    /// Named factor realizations: `W`; `M`, `N`; `J`, `K`, `J_hat`, `K_hat`.
    pub factors: Vec<(&'static str, StateSpace)>,
    /// Reachability-type Gramian `P_X` (P, P, P_N, P_K).
    pub p_x: GramianSolution,
    /// Observability-type Gramian `Q_Y` (Q, Q_W, Q_M, Q_J).
    pub q_y: GramianSolution,
    /// Output map `C_Y` of `G_sigmaA` (C, C_W, C_M, C_J hat).
    pub c_y: Mat,
    /// Input map `B_X` of `G_sigmaA` (B, B, B_N, B_K hat).
    pub b_x: Mat,
    pub system: StateSpace,
}

impl SpectralFactorSet {
    pub fn get(&self, name: &str) -> Option<&StateSpace> {
        self.factors.iter().find(|(k, _)| *k == name).map(|(_, s)| s)
    }

    pub fn gramians(&self) -> [&GramianSolution; 2] {
        [&self.p_x, &self.q_y]
    }

    pub fn oracles(&self) -> Result<Oracles> {
        let sys = &self.system;
        let zero = |p: usize, m: usize| Mat::zeros(p, m);
        let mk = |q: Quantity, b: &Mat, c: &Mat| -> Result<TransferOracle> {
            let real = StateSpace { a: sys.a.clone(), b: b.clone(), c: c.clone(), d: zero(c.nrows(), b.ncols()) };
            Ok(TransferOracle { quantity: q, variant: self.variant, eval: FrequencyEvaluator::new(&real)? })
        };
        Ok(Oracles {
            sigma_a: mk(Quantity::SigmaA, &self.b_x, &self.c_y)?,
            b: mk(Quantity::B, &sys.b, &self.c_y)?,
            c: mk(Quantity::C, &self.b_x, &sys.c)?,
        })
    }
}

fn inv_sqrt_spd(r: &Mat, what: &str) -> Result<(Mat, Mat)> {
    let h = dense::sqrtm_spd(r)?
        .ok_or_else(|| Error::PreconditionViolated(format!("{what} is not positive definite")))?;
    let hi = dense::inverse_checked(&h, 1e-14)
        .ok_or_else(|| Error::PreconditionViolated(format!("{what} is singular")))?;
    Ok((h, hi))
}

pub fn build_factors(sys: &StateSpace, variant: Variant) -> Result<SpectralFactorSet> {
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let (p, m) = (sys.p(), sys.m());
    let abscissa = sys.abscissa()?;
    if abscissa >= 0.0 {
        return Err(Error::UnstableSystem(abscissa));
    }
    let fac = |b: Mat, c: Mat, d: Mat| StateSpace { a: a.clone(), b, c, d };
    match variant {
        Variant::Lyapunov => {
            let p_x = mateq::reachability_gramian(sys)?;
            let q_y = mateq::observability_gramian(sys)?;
            Ok(SpectralFactorSet {
                variant,
                factors: vec![],
                p_x,
                q_y,
                c_y: c.clone(),
                b_x: b.clone(),
                system: sys.clone(),
            })
        }
        Variant::Bst => {
            let p_x = mateq::reachability_gramian(sys)?;
            let q_y = mateq::solve_bst_are(sys, &p_x.x)?;
            let bw = &p_x.x * c.transpose() + b * d.transpose();
            let cw = d
                .clone()
                .lu()
                .solve(&(c - bw.transpose() * &q_y.x))
                .ok_or(Error::SingularD)?;
            let w = fac(bw, cw.clone(), d.transpose());
            Ok(SpectralFactorSet {
                variant,
                factors: vec![("W", w)],
                p_x,
                q_y,
                c_y: cw,
                b_x: b.clone(),
                system: sys.clone(),
            })
        }
        Variant::Prbt => {
            let (qm, pn) = mateq::solve_pr_ares(sys)?;
            let r = d + d.transpose();
            let (rh, rhi) = inv_sqrt_spd(&r, "D + D^T")
                .map_err(|_| Error::NotPositiveReal("D + D^T is not positive definite".into()))?;
            let cm = &rhi * (c - b.transpose() * &qm.x);
            let bn = (b - &pn.x * c.transpose()) * &rhi;
            let mf = fac(b.clone(), cm.clone(), rh.clone());
            let nf = fac(bn.clone(), c.clone(), rh);
            Ok(SpectralFactorSet {
                variant,
                factors: vec![("M", mf), ("N", nf)],
                p_x: pn,
                q_y: qm,
                c_y: cm,
                b_x: bn,
                system: sys.clone(),
            })
        }
        Variant::Brbt => {
            let (qj, pk) = mateq::solve_br_ares(sys)?;
            let rj = Mat::identity(m, m) - d.transpose() * d;
            let rk = Mat::identity(p, p) - d * d.transpose();
            let nbr = |_| Error::NotBoundedReal("I - D^T D or I - D D^T is not positive definite".into());
            let (rjh, rjhi) = inv_sqrt_spd(&rj, "R_J").map_err(nbr)?;
            let (rkh, rkhi) = inv_sqrt_spd(&rk, "R_K").map_err(nbr)?;
            let cj = -(&rjhi * (b.transpose() * &qj.x + d.transpose() * c));
            let bk = -((&pk.x * c.transpose() + b * d.transpose()) * &rkhi);
            let c_hat = vstack(c, &cj);
            let b_hat = hstack(b, &bk);
            let jf = fac(b.clone(), cj, rjh.clone());
            let kf = fac(bk, c.clone(), rkh.clone());
            let j_hat = fac(b.clone(), c_hat.clone(), vstack(d, &rjh));
            let k_hat = fac(b_hat.clone(), c.clone(), hstack(d, &rkh));
            Ok(SpectralFactorSet {
                variant,
                factors: vec![("J", jf), ("K", kf), ("J_hat", j_hat), ("K_hat", k_hat)],
                p_x: pk,
                q_y: qj,
                c_y: c_hat,
                b_x: b_hat,
                system: sys.clone(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationReport {
    pub max_residual: f64,
    /// Largest real part among the zeros of all factors.
    pub max_zero_real: f64,
    pub minimum_phase: bool,
}

/// Checks the variant's factorization identities on `s = i omega` and the
/// minimum-phase property of each factor.
pub fn verify_factorization(set: &SpectralFactorSet, grid: &[f64]) -> Result<FactorizationReport> {
    let sys = &set.system;
    let (p, m) = (sys.p(), sys.m());
    let ev = |s: &StateSpace, z: Complex64| lti::eval_tf(s, z);
    let mut worst: f64 = 0.0;
    for &w in grid {
        let s = Complex64::new(0.0, w);
        let g = ev(sys, s)?;
        let gm = ev(sys, -s)?;
        let res = match set.variant {
            Variant::Lyapunov => 0.0,
            Variant::Bst => {
                let wf = set.get("W").unwrap();
                (&g * gm.transpose() - ev(wf, -s)?.transpose() * ev(wf, s)?).norm()
            }
            Variant::Prbt => {
                let phi = &g + gm.transpose();
                let mf = set.get("M").unwrap();
                let nf = set.get("N").unwrap();
                let r1 = (&phi - ev(mf, -s)?.transpose() * ev(mf, s)?).norm();
                let r2 = (&phi - ev(nf, s)? * ev(nf, -s)?.transpose()).norm();
                r1.max(r2)
            }
            Variant::Brbt => {
                let jf = set.get("J").unwrap();
                let kf = set.get("K").unwrap();
                let im = CMat::identity(m, m);
                let ip = CMat::identity(p, p);
                let r1 = (im - gm.transpose() * &g - ev(jf, -s)?.transpose() * ev(jf, s)?).norm();
                let r2 = (ip - &g * gm.transpose() - ev(kf, s)? * ev(kf, -s)?.transpose()).norm();
                r1.max(r2)
            }
        };
        worst = worst.max(res);
    }
    let mut max_zero_real = f64::NEG_INFINITY;
    for (name, f) in &set.factors {
        if name.ends_with("_hat") {
            continue;
        }
        for z in lti::zeros(f)? {
            max_zero_real = max_zero_real.max(z.re);
        }
    }
    Ok(FactorizationReport { max_residual: worst, max_zero_real, minimum_phase: max_zero_real < 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    SigmaA,
    B,
    C,
}

/// Immutable evaluator of one sampled quantity.
#[derive(Clone, Debug)]
pub struct TransferOracle {
    pub quantity: Quantity,
    pub variant: Variant,
    eval: FrequencyEvaluator,
}

impl TransferOracle {
    pub fn eval(&self, s: Complex64) -> Result<CMat> {
        self.eval.eval(s)
    }

    pub fn rows(&self) -> usize {
        self.eval.rows()
    }

    pub fn cols(&self) -> usize {
        self.eval.cols()
    }
}

#[derive(Clone, Debug)]
pub struct Oracles {
    pub sigma_a: TransferOracle,
    pub b: TransferOracle,
    pub c: TransferOracle,
}

impl Oracles {
    pub fn variant(&self) -> Variant {
        self.sigma_a.variant
    }
}

pub fn make_oracles(sys: &StateSpace, variant: Variant) -> Result<Oracles> {
    build_factors(sys, variant)?.oracles()
}

/// Builds the cascade whose stable part equals `G_sigmaA` through
/// dual/inverse/series, extracts that stable part, and returns the largest
/// entrywise deviation from the oracle on `i omega`.
pub fn cascade_oracle_check(set: &SpectralFactorSet, grid: &[f64]) -> Result<f64> {
    let sys = &set.system;
    let (p, m) = (sys.p(), sys.m());
    let n = sys.n();
    let cascade = match set.variant {
        Variant::Lyapunov => lti::strictly_proper(sys),
        Variant::Bst => {
            let w = set.get("W").unwrap();
            lti::series(&lti::inverse(&lti::dual(w))?, &lti::strictly_proper(sys))?
        }
        Variant::Prbt => {
            let mf = set.get("M").unwrap();
            let nf = set.get("N").unwrap();
            let right = StateSpace { a: sys.a.clone(), b: nf.b.clone(), c: sys.c.clone(), d: Mat::zeros(p, m) };
            lti::series(&lti::inverse(&lti::dual(mf))?, &right)?
        }
        Variant::Brbt => {
            let jf = set.get("J").unwrap();
            let jp = StateSpace {
                a: sys.a.clone(),
                b: hstack(&Mat::zeros(n, p), &sys.b),
                c: set.c_y.clone(),
                d: dense::block_diag(&Mat::identity(p, p), &jf.d),
            };
            let right = StateSpace {
                a: sys.a.clone(),
                b: set.b_x.clone(),
                c: vstack(&sys.c, &(-(sys.d.transpose() * &sys.c))),
                d: Mat::zeros(p + m, m + p),
            };
            lti::series(&lti::inverse(&lti::dual(&jp))?, &right)?
        }
    };
    let sp = lti::stable_part(&cascade)?;
    let oracle = set.oracles()?.sigma_a;
    let mut dev: f64 = 0.0;
    for &w in grid {
        let s = Complex64::new(0.0, w);
        let diff = lti::eval_tf(&sp, s)? - oracle.eval(s)?;
        dev = dev.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(dev)
}
