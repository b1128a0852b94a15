//! Seeded benchmark models with certified structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::Mat;
use crate::error::{Error, Result};
use crate::lti::{hinf_norm, StateSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    PassiveLadder,
    RandomPassive,
    RandomStable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderParams {
    /// Port resistance; becomes the feedthrough.
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Capacitor leakage and inductor winding resistance.
    #[serde(rename = "R_bar")]
    pub r_bar: f64,
}

impl Default for LadderParams {
    fn default() -> Self {
        Self { r: 0.1, l: 0.1, c: 0.1, r_bar: 1.0 }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n: usize,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "one")]
    pub p: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: LadderParams,
}

impl ModelSpec {
    pub fn ladder(n: usize) -> Self {
        Self { kind: ModelKind::PassiveLadder, n, m: 1, p: 1, seed: 0, params: LadderParams::default() }
    }

    pub fn random_passive(n: usize, m: usize, seed: u64) -> Self {
        Self { kind: ModelKind::RandomPassive, n, m, p: m, seed, params: LadderParams::default() }
    }

    pub fn random_stable(n: usize, m: usize, p: usize, seed: u64) -> Self {
        Self { kind: ModelKind::RandomStable, n, m, p, seed, params: LadderParams::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.p == 0 {
            return Err(Error::InvalidSpec("n, m and p must be positive".into()));
        }
        let pr = &self.params;
        if self.kind == ModelKind::PassiveLadder
            && ![pr.r, pr.l, pr.c, pr.r_bar].iter().all(|x| x.is_finite() && *x > 0.0)
        {
            return Err(Error::InvalidSpec("ladder parameters must be positive".into()));
        }
        if self.kind == ModelKind::RandomPassive && self.m != self.p {
            return Err(Error::InvalidSpec("random_passive requires m = p".into()));
        }
        Ok(())
    }
}

pub fn generate(spec: &ModelSpec) -> Result<StateSpace> {
    spec.validate()?;
    match spec.kind {
        ModelKind::PassiveLadder => Ok(ladder(spec.n, &spec.params)),
        ModelKind::RandomPassive => Ok(random_passive(spec.n, spec.m, spec.seed)),
        ModelKind::RandomStable => Ok(random_stable(spec.n, spec.m, spec.p, spec.seed)),
    }
}

/// Port-Hamiltonian `A = (J - R_h) Q_h`, `B`, `C = B^T Q_h`.
fn port_hamiltonian(j: &Mat, rh: &Mat, qh: &Mat, b: Mat, d: Mat) -> StateSpace {
    let a = (j - rh) * qh;
    let c = b.transpose() * qh;
    StateSpace { a, b, c, d }
}

/// RLC chain driven by a current source through the port resistance `R`.
/// States alternate capacitor charge and inductor flux; every capacitor has
/// a leakage conductance `1/R_bar`, every inductor a series `R_bar`.
fn ladder(n: usize, p: &LadderParams) -> StateSpace {
    let mut j = Mat::zeros(n, n);
    let mut rh = Mat::zeros(n, n);
    let mut qh = Mat::zeros(n, n);
    for i in 0..n {
        if i % 2 == 0 {
            qh[(i, i)] = 1.0 / p.c;
            rh[(i, i)] = 1.0 / p.r_bar;
        } else {
            qh[(i, i)] = 1.0 / p.l;
            rh[(i, i)] = p.r_bar;
        }
    }
    for i in 0..n.saturating_sub(1) {
        j[(i, i + 1)] = -1.0;
        j[(i + 1, i)] = 1.0;
    }
    let mut b = Mat::zeros(n, 1);
    b[(0, 0)] = 1.0;
    port_hamiltonian(&j, &rh, &qh, b, Mat::from_element(1, 1, p.r))
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_passive(n: usize, m: usize, seed: u64) -> StateSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = uniform(&mut rng, n, n);
    let j = &k - k.transpose();
    let x = uniform(&mut rng, n, n);
    let rh = &x * x.transpose() / n as f64 + Mat::identity(n, n) * 0.1;
    let y = uniform(&mut rng, n, n);
    let qh = &y * y.transpose() / n as f64 + Mat::identity(n, n);
    let b = uniform(&mut rng, n, m);
    let e = uniform(&mut rng, m, m);
    let f = uniform(&mut rng, m, m);
    let d = &e * e.transpose() / m as f64 + Mat::identity(m, m) * 0.5 + (&f - f.transpose()) * 0.2;
    port_hamiltonian(&j, &rh, &qh, b, d)
}

fn random_stable(n: usize, m: usize, p: usize, seed: u64) -> StateSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = uniform(&mut rng, n, n);
    let x = uniform(&mut rng, n, n);
    let a = (&k - k.transpose()) - (&x * x.transpose() / n as f64 + Mat::identity(n, n) * 0.5);
    let b = uniform(&mut rng, n, m);
    let c = uniform(&mut rng, p, n);
    let d = uniform(&mut rng, p, m);
    StateSpace { a, b, c, d }
}

/// Scales `C` and `D` so that the H-infinity norm equals `gamma`.
/// Returns the scaled system and the factor applied.
pub fn normalize_hinf(sys: &StateSpace, gamma: f64, rel_tol: f64) -> Result<(StateSpace, f64)> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
    }
    let norm = hinf_norm(sys, rel_tol)?;
    if norm == 0.0 {
        return Err(Error::InvalidInput("cannot normalize a zero system".into()));
    }
    let alpha = gamma / norm;
    Ok((StateSpace { c: &sys.c * alpha, d: &sys.d * alpha, ..sys.clone() }, alpha))
}
