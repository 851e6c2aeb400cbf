//! Command-line experiment runner: reproduces the benchmark studies as
//! CSV/JSON artifacts with fully seeded, byte-reproducible outputs.

mod config;
mod experiments;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{ExperimentConfig, Manifest, OutputPaths};
use pce_core::{PceError, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pce-dep",
    version,
    about = "Polynomial chaos surrogates for dependent random variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results.csv + manifest.json.
    Run(RunArgs),
    /// Summarize a results CSV into per-strategy medians and error ratios.
    Report(ReportArgs),
    /// Build and dump one weighted Leja sequence as JSON.
    Leja(LejaArgs),
    /// Solve the Nataf correlation-correction equation for Beta marginals.
    NatafCorr(NatafCorrArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name (see --experiment help of `run` for the list).
    #[arg(long)]
    experiment: Option<String>,
    /// Degrees (or diffusion levels), e.g. "1..15" or "1,3,5".
    #[arg(long)]
    degrees: Option<String>,
    /// Comma-separated strategy names; default roster when omitted.
    #[arg(long)]
    strategies: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Leja candidate-set size.
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    test_samples: Option<usize>,
    /// Monte-Carlo sample count for orthogonalization rules.
    #[arg(long)]
    gs_samples: Option<usize>,
    /// Model dimension override (diffusion).
    #[arg(long)]
    dimension: Option<usize>,
    /// Record wall-clock times (breaks byte-reproducibility of re-runs).
    #[arg(long)]
    timing: bool,
    /// JSON config or a manifest.json from a previous run; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// results.csv produced by `run`.
    #[arg(long)]
    results: PathBuf,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LejaArgs {
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    #[arg(long, default_value_t = 5)]
    degree: usize,
    #[arg(long, default_value_t = 10_000)]
    candidates: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// christoffel | sqrt-density | constant
    #[arg(long, default_value = "christoffel")]
    weight: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NatafCorrArgs {
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    /// Beta marginal parameters.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 5.0)]
    beta: f64,
    /// Target correlation of Z on every off-diagonal.
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                PceError::InvalidArgument(_) | PceError::Unsupported(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Report(args) => run_report(args),
        Command::Leja(args) => run_leja(args),
        Command::NatafCorr(args) => run_nataf_corr(args),
    }
}

/// Split a strategy list on commas that are not inside parentheses, so
/// "gs(1,1),dom(2,5)" names two strategies.
fn split_strategies(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => {
                if !cur.trim().is_empty() {
                    out.push(cur.trim().to_string());
                }
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_degrees(text: &str) -> Result<Vec<usize>> {
    let bad = |t: &str| PceError::InvalidArgument(format!("cannot parse degrees {t:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad(text))?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad(text))?;
        if hi < lo {
            return Err(bad(text));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad(text)))
        .collect()
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match (&args.config, &args.experiment) {
        (Some(path), _) => {
            // accept either a bare config or a full manifest
            match Manifest::read(path) {
                Ok(manifest) => manifest.config,
                Err(_) => ExperimentConfig::from_json_file(path)?,
            }
        }
        (None, Some(name)) => {
            if !experiments::known_experiments().contains(&name.as_str()) {
                return Err(PceError::InvalidArgument(format!(
                    "unknown experiment {name:?}; known: {}",
                    experiments::known_experiments().join(", ")
                )));
            }
            ExperimentConfig::defaults(name)
        }
        (None, None) => {
            return Err(PceError::InvalidArgument(
                "run needs --experiment or --config".into(),
            ))
        }
    };
    if let Some(name) = args.experiment {
        cfg.experiment = name;
    }
    if !experiments::known_experiments().contains(&cfg.experiment.as_str()) {
        return Err(PceError::InvalidArgument(format!(
            "unknown experiment {:?}; known: {}",
            cfg.experiment,
            experiments::known_experiments().join(", ")
        )));
    }
    if let Some(d) = args.degrees {
        cfg.degrees = parse_degrees(&d)?;
    }
    if let Some(s) = args.strategies {
        cfg.strategies = split_strategies(&s);
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.candidates {
        cfg.candidates = v;
    }
    if let Some(v) = args.test_samples {
        cfg.test_samples = v;
    }
    if let Some(v) = args.gs_samples {
        cfg.gs_samples = v;
    }
    if args.dimension.is_some() {
        cfg.dimension = args.dimension;
    }
    if args.timing {
        cfg.timing = true;
    }
    if cfg.degrees.is_empty() || cfg.trials == 0 {
        return Err(PceError::InvalidArgument(
            "need at least one degree and one trial".into(),
        ));
    }

    std::fs::create_dir_all(&args.out)
        .map_err(|e| PceError::InvalidArgument(format!("cannot create {:?}: {e}", args.out)))?;
    let paths = OutputPaths::in_dir(&args.out);
    // wall-clock timing is a transient diagnostic; the manifest records the
    // reproducible configuration so re-runs stay byte-identical
    let mut recorded = cfg.clone();
    recorded.timing = false;
    Manifest::new(recorded).write(&paths.manifest_json)?;
    let rows = experiments::run_experiment(&cfg)?;
    let csv = experiments::rows_to_csv(&rows);
    std::fs::write(&paths.results_csv, csv).map_err(|e| {
        PceError::InvalidArgument(format!("cannot write {:?}: {e}", paths.results_csv))
    })?;
    println!(
        "{} rows -> {}",
        rows.len(),
        paths.results_csv.display()
    );
    Ok(())
}

fn run_report(args: ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.results).map_err(|e| {
        PceError::InvalidArgument(format!("cannot read {:?}: {e}", args.results))
    })?;
    let rows = report::parse_results_csv(&text)?;
    let doc = report::report_json(&rows);
    let pretty = serde_json::to_string_pretty(&doc)
        .map_err(|e| PceError::Numeric(format!("report serialization: {e}")))?;
    match args.out {
        Some(path) => std::fs::write(&path, pretty)
            .map_err(|e| PceError::InvalidArgument(format!("cannot write {path:?}: {e}")))?,
        None => println!("{pretty}"),
    }
    Ok(())
}

fn run_leja(args: LejaArgs) -> Result<()> {
    use pce_core::basis::{PolynomialBasis, TensorBasis};
    use pce_core::leja::{build_leja, LejaWeight};
    use pce_core::measure::{mixed_candidates, JointDensity, Marginal, TensorDensity};
    use pce_core::multi_index::MultiIndexSet;
    use pce_core::univariate::PolyFamily;
    use rand::SeedableRng;
    use std::sync::Arc;

    let density = TensorDensity::new(vec![Marginal::uniform(); args.dimension])?;
    let index_set = MultiIndexSet::total_degree(args.dimension, args.degree)?;
    let basis = Arc::new(PolynomialBasis::Tensor(TensorBasis::isotropic(
        index_set,
        PolyFamily::Legendre,
    )?));
    let weight = match args.weight.as_str() {
        "christoffel" => LejaWeight::Christoffel,
        "sqrt-density" => LejaWeight::SqrtDensity(Arc::new(density.clone())),
        "constant" => LejaWeight::Constant,
        other => {
            return Err(PceError::InvalidArgument(format!(
                "unknown weight {other:?}"
            )))
        }
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let candidates =
        mixed_candidates(&density, &density.support(), args.candidates, &mut rng)?;
    let n = basis.len();
    let seq = build_leja(basis, &candidates, n, &weight, "mixed-candidates")?;
    let mut doc = seq.to_json()?;
    doc["seed"] = serde_json::json!(args.seed);
    let pretty = serde_json::to_string_pretty(&doc)
        .map_err(|e| PceError::Numeric(format!("sequence serialization: {e}")))?;
    match args.out {
        Some(path) => std::fs::write(&path, pretty)
            .map_err(|e| PceError::InvalidArgument(format!("cannot write {path:?}: {e}")))?,
        None => println!("{pretty}"),
    }
    Ok(())
}

fn run_nataf_corr(args: NatafCorrArgs) -> Result<()> {
    use pce_core::measure::{CorrelationMatrix, Marginal};
    use pce_core::transform::nataf_correlation_solve;

    let marginals = vec![Marginal::beta(args.alpha, args.beta)?; args.dimension];
    let r_z = CorrelationMatrix::equicorrelated(args.dimension, args.rho)?;
    let r_v = nataf_correlation_solve(&r_z, &marginals)?;
    let doc = serde_json::json!({
        "marginals": format!("beta({},{})", args.alpha, args.beta),
        "r_z": r_z.to_json(),
        "r_v": r_v.to_json(),
    });
    let pretty = serde_json::to_string_pretty(&doc)
        .map_err(|e| PceError::Numeric(format!("serialization: {e}")))?;
    match args.out {
        Some(path) => std::fs::write(&path, pretty)
            .map_err(|e| PceError::InvalidArgument(format!("cannot write {path:?}: {e}")))?,
        None => println!("{pretty}"),
    }
    Ok(())
}
