//! `quadbt`: generate models, sample frequency data, reduce, and run sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadbt_core::experiment::{self, ExperimentConfig};
use quadbt_core::loewner::{quadruple_from_data, reduce};
use quadbt_core::models::{LadderParams, ModelKind, ModelSpec};
use quadbt_core::{io, Error, Result, StateSpace, Variant};

#[derive(Parser)]
#[command(name = "quadbt", version, about = "Balanced truncation from state-space models or frequency samples")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark model.
    Gen(GenArgs),
    /// Sample the variant's transfer quantities on interleaved log rules.
    Sample(SampleArgs),
    /// Reduce a model or a dataset.
    Reduce(ReduceArgs),
    /// H-infinity norm of a model.
    Hinf(HinfArgs),
    /// Run an experiment sweep from a config file.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    PassiveLadder,
    RandomPassive,
    RandomStable,
}

#[derive(Args)]
struct GenArgs {
    /// Model spec JSON; overrides the flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "passive-ladder")]
    kind: Kind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "R", default_value_t = 0.1)]
    r: f64,
    #[arg(long = "L", default_value_t = 0.1)]
    l: f64,
    #[arg(long = "C", default_value_t = 0.1)]
    c: f64,
    #[arg(long = "R-bar", default_value_t = 1.0)]
    r_bar: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RuleArgs {
    /// Nodes per rule (even, at least 4).
    #[arg(long = "N", default_value_t = 80)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    omega_min: f64,
    #[arg(long, default_value_t = 1e4)]
    omega_max: f64,
    /// Scale the model to this H-infinity norm first.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    hinf_rel_tol: f64,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    variant: Variant,
    #[command(flatten)]
    rules: RuleArgs,
    /// Store the model's D as the measured high-frequency limit.
    #[arg(long)]
    with_feedthrough: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Intrusive,
    Quadrature,
}

#[derive(Args)]
struct ReduceArgs {
    /// Dataset JSON; reduces from samples only.
    #[arg(long, conflicts_with_all = ["model", "method"])]
    dataset: Option<PathBuf>,
    #[arg(long, required_unless_present = "dataset")]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "quadrature")]
    method: Method,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(short, long)]
    r: usize,
    #[command(flatten)]
    rules: RuleArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Singular-value sidecar; defaults to `<output stem>.sidecar.json`.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct HinfArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let spec = match &a.spec {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => ModelSpec {
            kind: match a.kind {
                Kind::PassiveLadder => ModelKind::PassiveLadder,
                Kind::RandomPassive => ModelKind::RandomPassive,
                Kind::RandomStable => ModelKind::RandomStable,
            },
            n: a.n,
            m: a.m,
            p: a.p,
            seed: a.seed,
            params: LadderParams { r: a.r, l: a.l, c: a.c, r_bar: a.r_bar },
        },
    };
    let sys = quadbt_core::generate(&spec)?;
    emit(a.output.as_deref(), &io::model_to_json(&sys)?)
}

fn prepared(path: &Path, rules: &RuleArgs) -> Result<StateSpace> {
    let sys = io::read_model(path)?;
    match rules.gamma {
        Some(g) => Ok(quadbt_core::normalize_hinf(&sys, g, rules.hinf_rel_tol)?.0),
        None => Ok(sys),
    }
}

fn sample(a: SampleArgs) -> Result<()> {
    let sys = prepared(&a.model, &a.rules)?;
    let (left, right) = quadbt_core::interleaved_rules(a.rules.omega_min, a.rules.omega_max, a.rules.n)?;
    let mut data = quadbt_core::sample_dataset(&quadbt_core::make_oracles(&sys, a.variant)?, &left, &right)?;
    if a.with_feedthrough {
        data.feedthrough = Some(sys.d.clone());
    }
    emit(a.output.as_deref(), &io::dataset_to_json(&data)?)
}

fn reduce_cmd(a: ReduceArgs) -> Result<()> {
    let rom = if let Some(p) = &a.dataset {
        let data = io::dataset_from_json(&std::fs::read_to_string(p)?)?;
        if let Some(v) = a.variant {
            if v != data.variant {
                return Err(Error::InvalidInput(format!("dataset holds {} samples, not {v}", data.variant)));
            }
        }
        reduce(&quadruple_from_data(&data)?, a.r, data.feedthrough.as_ref())?
    } else {
        let model = a.model.as_deref().expect("clap enforces --model");
        let v = a.variant.ok_or_else(|| Error::InvalidInput("--variant is required with --model".into()))?;
        let sys = prepared(model, &a.rules)?;
        match a.method {
            Method::Intrusive => quadbt_core::sqrt_bt(&sys, v, a.r)?,
            Method::Quadrature => {
                let (left, right) = quadbt_core::interleaved_rules(a.rules.omega_min, a.rules.omega_max, a.rules.n)?;
                let o = quadbt_core::make_oracles(&sys, v)?;
                quadbt_core::genquadbt_pipeline(&o, &left, &right, a.r, Some(&sys.d))?
            }
        }
    };
    emit(a.output.as_deref(), &io::model_to_json(&rom.system)?)?;
    let sidecar = a.sidecar.or_else(|| a.output.as_ref().map(|o| o.with_extension("sidecar.json")));
    if let Some(p) = sidecar {
        emit(Some(&p), &io::sidecar_to_json(&rom)?)?;
    }
    Ok(())
}

fn hinf(a: HinfArgs) -> Result<()> {
    let sys = io::read_model(&a.model)?;
    println!("{}", io::fmt17(quadbt_core::hinf_norm(&sys, a.rel_tol)?));
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    let base = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.output_dir = match a.output_dir {
        Some(o) => o,
        None => base.join(&cfg.output_dir),
    };
    let summary = experiment::run(&cfg, &base)?;
    for f in &summary.files {
        println!("{}", f.display());
    }
    for res in &summary.results {
        let failed: usize = res.errors.iter().flatten().filter(|x| x.is_none()).count();
        if failed > 0 {
            eprintln!("{}: {failed} cell(s) failed, see reason column", res.variant);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let res = match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Sample(a) => sample(a),
        Cmd::Reduce(a) => reduce_cmd(a),
        Cmd::Hinf(a) => hinf(a),
        Cmd::Run(a) => run(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
