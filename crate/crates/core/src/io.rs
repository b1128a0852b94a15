//! JSON interchange for models, datasets and reduced models.
//!
//! Floats are written with 17 significant digits so files round-trip
//! bit-exactly.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::dense::{CMat, Mat};
use crate::error::{Error, Result};
use crate::loewner::{Provenance, ReducedModel};
use crate::lti::StateSpace;
use crate::quadrature::{FrequencyDataset, QuadratureRule};
use crate::spectral::Variant;

/// `f64` printed as `{:.16e}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite float"));
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(F17)
    }
}

pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

fn flat(m: &Mat) -> Vec<F17> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|ij| F17(m[ij])).collect()
}

fn unflat(v: &[F17], r: usize, c: usize, name: &str) -> Result<Mat> {
    if v.len() != r * c {
        return Err(Error::DimensionMismatch(format!("{name} has {} entries, expected {}", v.len(), r * c)));
    }
    Ok(Mat::from_row_iterator(r, c, v.iter().map(|x| x.0)))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    n: usize,
    m: usize,
    p: usize,
    #[serde(rename = "A")]
    a: Vec<F17>,
    #[serde(rename = "B")]
    b: Vec<F17>,
    #[serde(rename = "C")]
    c: Vec<F17>,
    #[serde(rename = "D")]
    d: Vec<F17>,
}

pub fn model_to_json(sys: &StateSpace) -> Result<String> {
    let f = ModelFile {
        n: sys.n(),
        m: sys.m(),
        p: sys.p(),
        a: flat(&sys.a),
        b: flat(&sys.b),
        c: flat(&sys.c),
        d: flat(&sys.d),
    };
    serde_json::to_string_pretty(&f).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn model_from_json(s: &str) -> Result<StateSpace> {
    let f: ModelFile = serde_json::from_str(s)?;
    StateSpace::new(
        unflat(&f.a, f.n, f.n, "A")?,
        unflat(&f.b, f.n, f.m, "B")?,
        unflat(&f.c, f.p, f.n, "C")?,
        unflat(&f.d, f.p, f.m, "D")?,
    )
}

pub fn read_model(path: &Path) -> Result<StateSpace> {
    model_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_model(path: &Path, sys: &StateSpace) -> Result<()> {
    std::fs::write(path, model_to_json(sys)? + "\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    nodes: Vec<F17>,
    weights: Vec<F17>,
    conj_closed: bool,
}

impl From<&QuadratureRule> for RuleFile {
    fn from(r: &QuadratureRule) -> Self {
        Self {
            nodes: r.nodes.iter().map(|&x| F17(x)).collect(),
            weights: r.weights.iter().map(|&x| F17(x)).collect(),
            conj_closed: r.conj_closed,
        }
    }
}

impl From<RuleFile> for QuadratureRule {
    fn from(r: RuleFile) -> Self {
        Self {
            nodes: r.nodes.into_iter().map(|x| x.0).collect(),
            weights: r.weights.into_iter().map(|x| x.0).collect(),
            conj_closed: r.conj_closed,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Shape {
    p_y: usize,
    m_x: usize,
    p: usize,
    m: usize,
}

/// One sample, row-major `[re, im]` pairs.
type SampleFile = Vec<[F17; 2]>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Samples {
    gsa_left: Vec<SampleFile>,
    gc_left: Vec<SampleFile>,
    gsa_right: Vec<SampleFile>,
    gb_right: Vec<SampleFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    variant: Variant,
    shape: Shape,
    left: RuleFile,
    right: RuleFile,
    samples: Samples,
    #[serde(default)]
    feedthrough: Option<Vec<F17>>,
}

fn csample(g: &CMat) -> SampleFile {
    let (r, c) = g.shape();
    (0..r)
        .flat_map(|i| (0..c).map(move |j| (i, j)))
        .map(|ij| [F17(g[ij].re), F17(g[ij].im)])
        .collect()
}

fn uncsample(v: &[SampleFile], r: usize, c: usize, name: &str) -> Result<Vec<CMat>> {
    v.iter()
        .map(|s| {
            if s.len() != r * c {
                return Err(Error::DimensionMismatch(format!("{name} sample has {} entries", s.len())));
            }
            Ok(CMat::from_row_iterator(r, c, s.iter().map(|[a, b]| Complex64::new(a.0, b.0))))
        })
        .collect()
}

pub fn dataset_to_json(d: &FrequencyDataset) -> Result<String> {
    let f = DatasetFile {
        variant: d.variant,
        shape: Shape { p_y: d.p_y, m_x: d.m_x, p: d.p, m: d.m },
        left: (&d.left).into(),
        right: (&d.right).into(),
        samples: Samples {
            gsa_left: d.gsa_left.iter().map(csample).collect(),
            gc_left: d.gc_left.iter().map(csample).collect(),
            gsa_right: d.gsa_right.iter().map(csample).collect(),
            gb_right: d.gb_right.iter().map(csample).collect(),
        },
        feedthrough: d.feedthrough.as_ref().map(flat),
    };
    serde_json::to_string(&f).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn dataset_from_json(s: &str) -> Result<FrequencyDataset> {
    let f: DatasetFile = serde_json::from_str(s)?;
    let sh = f.shape;
    let d = FrequencyDataset {
        variant: f.variant,
        p_y: sh.p_y,
        m_x: sh.m_x,
        p: sh.p,
        m: sh.m,
        left: f.left.into(),
        right: f.right.into(),
        gsa_left: uncsample(&f.samples.gsa_left, sh.p_y, sh.m_x, "gsa_left")?,
        gc_left: uncsample(&f.samples.gc_left, sh.p, sh.m_x, "gc_left")?,
        gsa_right: uncsample(&f.samples.gsa_right, sh.p_y, sh.m_x, "gsa_right")?,
        gb_right: uncsample(&f.samples.gb_right, sh.p_y, sh.m, "gb_right")?,
        feedthrough: f.feedthrough.as_deref().map(|v| unflat(v, sh.p, sh.m, "feedthrough")).transpose()?,
    };
    d.validate()?;
    Ok(d)
}

#[derive(Serialize)]
struct SidecarFile<'a> {
    variant: Variant,
    order: usize,
    provenance: &'a Provenance,
    singular_values: Vec<F17>,
}

/// Singular-value sidecar written next to a reduced model.
pub fn sidecar_to_json(rom: &ReducedModel) -> Result<String> {
    let f = SidecarFile {
        variant: rom.variant,
        order: rom.order(),
        provenance: &rom.provenance,
        singular_values: rom.singular_values.iter().map(|&x| F17(x)).collect(),
    };
    serde_json::to_string_pretty(&f).map_err(|e| Error::InvalidInput(e.to_string()))
}
