//! Square-root balanced truncation (Lyapunov, stochastic, positive-real and
//! bounded-real) and the quadrature-based variants that build the same
//! reduced models from frequency samples alone.

extern crate openblas_src;

pub mod balance;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod io;
pub mod loewner;
pub mod lti;
pub mod mateq;
pub mod models;
pub mod quadrature;
pub mod spectral;

pub use balance::{gramian_pair, sqrt_bt, GramianPair};
pub use dense::{CMat, Mat};
pub use error::{Error, Result};
pub use experiment::{compare_models, ExperimentConfig};
pub use loewner::{
    assemble_loewner, genquadbt_pipeline, realify, reduce, LoewnerQuadruple, Provenance, ReducedModel,
};
pub use lti::{eval_tf, hinf_norm, StateSpace};
pub use mateq::{GramianKind, GramianSolution};
pub use models::{generate, normalize_hinf, ModelKind, ModelSpec};
pub use quadrature::{interleaved_rules, logtrap_rule, sample_dataset, FrequencyDataset, QuadratureRule};
pub use spectral::{build_factors, make_oracles, Oracles, SpectralFactorSet, TransferOracle, Variant};

pub use num_complex::Complex64;
