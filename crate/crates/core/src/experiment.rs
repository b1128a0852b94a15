//! Batch comparison of intrusive and quadrature-based reductions.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{truncate, GramianPair};
use crate::error::{Error, Result};
use crate::io::{self, fmt17};
use crate::loewner::{self, LoewnerQuadruple};
use crate::lti::{self, hinf_norm, StateSpace};
use crate::models::{self, ModelSpec};
use crate::quadrature::{interleaved_rules, sample_dataset};
use crate::spectral::{build_factors, Variant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Spec(ModelSpec),
    Path(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_list: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    pub variants: Vec<Variant>,
    pub quadrature: QuadratureConfig,
    pub orders: Vec<usize>,
    /// H-infinity target applied before bounded-real balancing.
    #[serde(default)]
    pub normalization: Option<f64>,
    pub output_dir: PathBuf,
    pub hinf_rel_tol: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let q = &self.quadrature;
        if !(q.omega_min > 0.0 && q.omega_max > q.omega_min && q.omega_max.is_finite()) {
            return Err(Error::InvalidRange(q.omega_min, q.omega_max));
        }
        if let Some(&n) = q.n_list.iter().find(|&&n| n < 4 || n % 2 != 0) {
            return Err(Error::OddN(n));
        }
        if q.n_list.is_empty() || self.variants.is_empty() || self.orders.is_empty() {
            return Err(Error::InvalidInput("n_list, variants and orders must be non-empty".into()));
        }
        if self.orders.windows(2).any(|w| w[1] <= w[0]) || self.orders[0] == 0 {
            return Err(Error::InvalidInput("orders must be positive and strictly ascending".into()));
        }
        if !(self.hinf_rel_tol > 0.0 && self.hinf_rel_tol < 1.0) {
            return Err(Error::InvalidInput("hinf_rel_tol must lie in (0, 1)".into()));
        }
        if let Some(g) = self.normalization {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::InvalidInput("normalization must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    /// Loads the model; relative paths resolve against `base`.
    pub fn load_model(&self, base: &Path) -> Result<StateSpace> {
        match &self.model {
            ModelSource::Spec(spec) => models::generate(spec),
            ModelSource::Path(p) => io::read_model(&base.join(p)),
        }
    }
}

/// `||G - G_r||_inf / ||G||_inf`.
pub fn compare_models(sys: &StateSpace, rom: &StateSpace, rel_tol: f64) -> Result<f64> {
    let err = lti::difference(sys, rom)?;
    let num = hinf_norm(&err, rel_tol)?;
    Ok(num / hinf_norm(sys, rel_tol)?)
}

/// Per-variant results; `None` cells carry a reason.
#[derive(Clone, Debug)]
pub struct VariantResult {
    pub variant: Variant,
    pub sigma_true: Vec<f64>,
    /// One list per entry of `n_list`.
    pub sigma_quad: Vec<Vec<f64>>,
    /// `errors[i][0]` intrusive, `errors[i][1 + k]` quadrature for `n_list[k]`.
    pub errors: Vec<Vec<Option<f64>>>,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub results: Vec<VariantResult>,
    pub files: Vec<PathBuf>,
}

enum Source {
    Intrusive(GramianPair),
    Quad(LoewnerQuadruple),
}

fn short(e: &Error) -> String {
    e.to_string().replace([',', '\n'], ";")
}

fn variant_system(sys: &StateSpace, v: Variant, cfg: &ExperimentConfig) -> Result<StateSpace> {
    match (v, cfg.normalization) {
        (Variant::Brbt, Some(g)) => Ok(models::normalize_hinf(sys, g, cfg.hinf_rel_tol)?.0),
        _ => Ok(sys.clone()),
    }
}

fn run_variant(sys: &StateSpace, v: Variant, cfg: &ExperimentConfig) -> VariantResult {
    let nn = cfg.quadrature.n_list.len();
    let cols = 1 + nn;
    let rows = cfg.orders.len();
    let fail = |reason: String| VariantResult {
        variant: v,
        sigma_true: vec![],
        sigma_quad: vec![vec![]; nn],
        errors: vec![vec![None; cols]; rows],
        reasons: vec![reason; rows],
    };
    let prepared = variant_system(sys, v, cfg).and_then(|s| {
        let set = build_factors(&s, v)?;
        Ok((s, set))
    });
    let (vsys, set) = match prepared {
        Ok(x) => x,
        Err(e) => return fail(format!("factors: {}", short(&e))),
    };
    let mut reasons = vec![String::new(); rows];
    let mut sources: Vec<std::result::Result<Source, String>> = Vec::with_capacity(cols);
    let mut sigma_true = vec![];
    match GramianPair::from_factors(&set) {
        Ok(pair) => {
            sigma_true = pair.singular_values().unwrap_or_default();
            sources.push(Ok(Source::Intrusive(pair)));
        }
        Err(e) => sources.push(Err(format!("intrusive: {}", short(&e)))),
    }
    let mut sigma_quad = vec![];
    let oracles = set.oracles();
    for &n in &cfg.quadrature.n_list {
        let q = oracles.clone().and_then(|o| {
            let (left, right) = interleaved_rules(cfg.quadrature.omega_min, cfg.quadrature.omega_max, n)?;
            loewner::quadruple_from_data(&sample_dataset(&o, &left, &right)?)
        });
        match q {
            Ok(q) => {
                sigma_quad.push(loewner::loewner_singular_values(&q).unwrap_or_default());
                sources.push(Ok(Source::Quad(q)));
            }
            Err(e) => {
                sigma_quad.push(vec![]);
                sources.push(Err(format!("quad_N{n}: {}", short(&e))));
            }
        }
    }
    let cells: Vec<(usize, usize)> = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).collect();
    let outcomes: Vec<std::result::Result<f64, String>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let r = cfg.orders[i];
            let label = if j == 0 { "intrusive".to_string() } else { format!("quad_N{}", cfg.quadrature.n_list[j - 1]) };
            let src = sources[j].as_ref().map_err(|e| e.clone())?;
            let rom = match src {
                Source::Intrusive(pair) => truncate(&vsys, pair, r),
                Source::Quad(q) => loewner::reduce(q, r, Some(&vsys.d)),
            }
            .map_err(|e| format!("{label}: {}", short(&e)))?;
            compare_models(&vsys, &rom.system, cfg.hinf_rel_tol).map_err(|e| format!("{label}: {}", short(&e)))
        })
        .collect();
    let mut errors = vec![vec![None; cols]; rows];
    for (&(i, j), out) in cells.iter().zip(outcomes) {
        match out {
            Ok(x) => errors[i][j] = Some(x),
            Err(msg) => {
                if !reasons[i].is_empty() {
                    reasons[i].push_str(" | ");
                }
                reasons[i].push_str(&msg);
            }
        }
    }
    VariantResult { variant: v, sigma_true, sigma_quad, errors, reasons }
}

fn cell(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_else(|| "NaN".into())
}

pub fn singular_value_csv(res: &VariantResult, n_list: &[usize], rows: usize) -> String {
    let mut s = String::from("index,sigma_true");
    for n in n_list {
        write!(s, ",sigma_quad_N{n}").unwrap();
    }
    s.push('\n');
    for i in 0..rows {
        write!(s, "{},{}", i + 1, cell(res.sigma_true.get(i).copied())).unwrap();
        for q in &res.sigma_quad {
            write!(s, ",{}", cell(q.get(i).copied())).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn error_csv(res: &VariantResult, n_list: &[usize], orders: &[usize]) -> String {
    let mut s = String::from("r,err_intrusive");
    for n in n_list {
        write!(s, ",err_quad_N{n}").unwrap();
    }
    s.push_str(",reason\n");
    for (i, r) in orders.iter().enumerate() {
        write!(s, "{r}").unwrap();
        for x in &res.errors[i] {
            write!(s, ",{}", cell(*x)).unwrap();
        }
        writeln!(s, ",{}", res.reasons[i]).unwrap();
    }
    s
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    model: ManifestModel,
    seeds: Vec<u64>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct ManifestModel {
    n: usize,
    m: usize,
    p: usize,
    hinf_norm: Option<io::F17>,
}

/// Runs every (variant, N, r) cell and writes the CSV tables and manifest.
/// `base` resolves a relative model path; the output directory is taken
/// as given.
pub fn run(cfg: &ExperimentConfig, base: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let sys = cfg.load_model(base)?;
    let results: Vec<VariantResult> = cfg.variants.par_iter().map(|&v| run_variant(&sys, v, cfg)).collect();
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out)?;
    let mut files = vec![];
    for res in &results {
        let sv = out.join(format!("singular_values_{}.csv", res.variant));
        std::fs::write(&sv, singular_value_csv(res, &cfg.quadrature.n_list, sys.n()))?;
        let er = out.join(format!("errors_{}.csv", res.variant));
        std::fs::write(&er, error_csv(res, &cfg.quadrature.n_list, &cfg.orders))?;
        files.push(sv);
        files.push(er);
    }
    let seeds = match &cfg.model {
        ModelSource::Spec(s) => vec![s.seed],
        ModelSource::Path(_) => vec![],
    };
    let manifest = Manifest {
        tool: "quadbt",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        model: ManifestModel {
            n: sys.n(),
            m: sys.m(),
            p: sys.p(),
            hinf_norm: hinf_norm(&sys, cfg.hinf_rel_tol).ok().map(io::F17),
        },
        seeds,
        files: files.iter().filter_map(|f| f.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
    };
    let mpath = out.join("manifest.json");
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)? + "\n")?;
    files.push(mpath);
    Ok(RunSummary { results, files })
}
