//! Experiment pipelines producing metric rows, one per
//! (strategy, trial, degree) combination. Every pipeline is deterministic
//! given the configuration: RNG streams are derived from the base seed and
//! the loop coordinates, never shared across loop iterations.

use crate::config::ExperimentConfig;
use nalgebra::{DMatrix, DVector};
use pce_core::basis::monte_carlo_rule;
use pce_core::measure::{
    BananaDensity, BetaMixtureDensity, CorrelationMatrix, GaussianCopulaDensity, JointDensity,
    Marginal, TensorDensity, UniformBox,
};
use pce_core::models::{
    chemistry_qoi, diffusion_qoi, genz_oscillatory, make_genz_spec, ChemistrySpec, DiffusionSpec,
    RidgeSpec,
};
use pce_core::multi_index::{diffusion_alpha, MultiIndexSet};
use pce_core::surrogate::{
    domination_constant, domination_probes, fit_strategy, fit_tensor_gauss, l2_error_from_values,
    leja_fit, uniform_box_rule, FitResult, GsInput, GsQuadrature, MomentMeasure, PceSurrogate,
    Strategy, StrategyTag,
};
use pce_core::transform::{NatafTarget, NatafTransform};
use pce_core::univariate::PolyFamily;
use pce_core::{PceError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

/// One CSV record.
#[derive(Debug, Clone)]
pub struct Row {
    pub experiment: String,
    pub strategy: String,
    pub seed: u64,
    pub degree_or_level: usize,
    pub n_samples: usize,
    pub l2_error: Option<f64>,
    pub mean_rel_error: Option<f64>,
    pub kappa_phi: Option<f64>,
    pub kappa_gs: Option<f64>,
    pub kappa_q: Option<f64>,
    pub wall_ms: u128,
    pub c_r: Option<f64>,
}

pub const CSV_HEADER: &str =
    "experiment,strategy,seed,degree_or_level,n_samples,l2_error,mean_rel_error,kappa_phi,kappa_gs,kappa_q,wall_ms,c_r";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) => format!("{x}"),
    }
}

/// Quote a field when it contains the separator (strategy labels do).
pub fn csv_field(text: &str) -> String {
    if text.contains(',') {
        format!("\"{text}\"")
    } else {
        text.to_string()
    }
}

impl Row {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            csv_field(&self.strategy),
            self.seed,
            self.degree_or_level,
            self.n_samples,
            fmt_opt(self.l2_error),
            fmt_opt(self.mean_rel_error),
            fmt_opt(self.kappa_phi),
            fmt_opt(self.kappa_gs),
            fmt_opt(self.kappa_q),
            self.wall_ms,
            fmt_opt(self.c_r),
        )
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Derive an independent RNG stream from the base seed and loop coordinates.
fn stream_rng(base: u64, salts: &[u64]) -> ChaCha8Rng {
    let mut state = base;
    for &s in salts {
        state = state
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(s)
            .rotate_left(17);
    }
    ChaCha8Rng::seed_from_u64(state)
}

pub fn known_experiments() -> &'static [&'static str] {
    &[
        "genz1d-basis",
        "cr-study",
        "genz2d",
        "genz10d",
        "mean2d",
        "mean10d",
        "mc-moments",
        "banana",
        "zonotope",
        "diffusion",
    ]
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<Row>> {
    match config.experiment.as_str() {
        "genz1d-basis" => genz1d_basis(config),
        "cr-study" => cr_study(config),
        "genz2d" => genz_correlated(config, 2, false),
        "genz10d" => genz_correlated(config, 10, false),
        "mean2d" => genz_correlated(config, 2, true),
        "mean10d" => genz_correlated(config, 10, true),
        "mc-moments" => mc_moments(config),
        "banana" => banana(config),
        "zonotope" => zonotope(config),
        "diffusion" => diffusion(config),
        other => Err(PceError::InvalidArgument(format!(
            "unknown experiment {other:?}; known: {}",
            known_experiments().join(", ")
        ))),
    }
}

/// The correlated Beta(2,5) copula of the Genz studies: off-diagonal −0.9 in
/// 2-d; in 10-d all off-diagonals 0.9 with rows/columns of odd coordinates
/// sign-flipped (entries are +0.9 for equal-parity pairs, −0.9 otherwise).
pub fn genz_copula(d: usize) -> Result<GaussianCopulaDensity> {
    let r_v = if d == 2 {
        CorrelationMatrix::equicorrelated(2, -0.9)?
    } else {
        let m = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                1.0
            } else if i % 2 == j % 2 {
                0.9
            } else {
                -0.9
            }
        });
        CorrelationMatrix::new(m)?
    };
    GaussianCopulaDensity::new(vec![Marginal::beta(2.0, 5.0)?; d], r_v)
}

/// Named strategies understood by the Genz-style experiments.
enum Named {
    Gs {
        alpha: f64,
        beta: f64,
        mc: Option<usize>,
    },
    Dom {
        alpha: f64,
        beta: f64,
    },
    Nataf(NatafTarget),
}

fn parse_pair(body: &str) -> Option<(f64, f64)> {
    let (a, b) = body.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn parse_strategy(name: &str) -> Result<Named> {
    let bad = || PceError::InvalidArgument(format!("unknown strategy {name:?}"));
    if name == "nataf-gauss" {
        return Ok(Named::Nataf(NatafTarget::Gauss));
    }
    if name == "nataf-unif" {
        return Ok(Named::Nataf(NatafTarget::Uniform));
    }
    if let Some(rest) = name.strip_prefix("dom(") {
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        let (alpha, beta) = parse_pair(body).ok_or_else(bad)?;
        return Ok(Named::Dom { alpha, beta });
    }
    if let Some(rest) = name.strip_prefix("gs(") {
        let (body, tail) = rest.split_once(')').ok_or_else(bad)?;
        let (alpha, beta) = parse_pair(body).ok_or_else(bad)?;
        let mc = match tail {
            "" => None,
            t => Some(
                t.strip_prefix("-mc")
                    .and_then(|j| j.parse().ok())
                    .ok_or_else(bad)?,
            ),
        };
        return Ok(Named::Gs { alpha, beta, mc });
    }
    Err(bad())
}

struct Timer {
    start: Option<Instant>,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Timer {
            start: enabled.then(Instant::now),
        }
    }

    fn elapsed_ms(&self) -> u128 {
        self.start.map(|s| s.elapsed().as_millis()).unwrap_or(0)
    }
}

/// Cache of truth values on a fixed test set.
struct TestSet {
    points: DMatrix<f64>,
    truth: DVector<f64>,
}

impl TestSet {
    fn build(points: DMatrix<f64>, f: &dyn Fn(&[f64]) -> Result<f64>) -> Result<Self> {
        let mut truth = DVector::zeros(points.nrows());
        let mut buf = vec![0.0; points.ncols()];
        for r in 0..points.nrows() {
            for (c, b) in buf.iter_mut().enumerate() {
                *b = points[(r, c)];
            }
            truth[r] = f(&buf)?;
        }
        Ok(TestSet { points, truth })
    }

    fn error(&self, surrogate: &PceSurrogate) -> Result<f64> {
        let approx = surrogate.evaluate(&self.points)?;
        l2_error_from_values(&self.truth, &approx)
    }
}

fn push_fit_row(
    rows: &mut Vec<Row>,
    experiment: &str,
    strategy: &str,
    seed: u64,
    degree: usize,
    fit: &FitResult,
    test: &TestSet,
    mean_reference: Option<f64>,
    wall_ms: u128,
    c_r: Option<f64>,
) -> Result<()> {
    let l2 = test.error(&fit.surrogate)?;
    let moments = fit.surrogate.moments();
    let mean_rel_error = match (mean_reference, moments.measure) {
        (Some(reference), MomentMeasure::TargetDensity)
        | (Some(reference), MomentMeasure::TransformedSpace) => {
            Some((moments.mean - reference).abs() / reference.abs().max(f64::MIN_POSITIVE))
        }
        _ => None,
    };
    rows.push(Row {
        experiment: experiment.to_string(),
        strategy: strategy.to_string(),
        seed,
        degree_or_level: degree,
        n_samples: fit.diagnostics.n_samples,
        l2_error: Some(l2),
        mean_rel_error,
        kappa_phi: Some(fit.diagnostics.kappa_phi),
        kappa_gs: fit.diagnostics.kappa_gs,
        kappa_q: fit.diagnostics.kappa_q,
        wall_ms,
        c_r,
    });
    Ok(())
}

/// Shared driver for genz2d/genz10d/mean2d/mean10d.
fn genz_correlated(config: &ExperimentConfig, d: usize, mean_focus: bool) -> Result<Vec<Row>> {
    let omega = genz_copula(d)?;
    let defaults: Vec<String> = if mean_focus {
        vec!["gs(1,1)".into(), "gs(2,5)".into(), "nataf-gauss".into()]
    } else {
        vec![
            "gs(1,1)".into(),
            "gs(2,5)".into(),
            "dom(1,1)".into(),
            "dom(2,5)".into(),
            "nataf-gauss".into(),
        ]
    };
    let strategies = if config.strategies.is_empty() {
        defaults
    } else {
        config.strategies.clone()
    };
    let test_points = omega.sample(
        config.test_samples,
        &mut stream_rng(config.seed, &[0xE57]),
    )?;
    // reference sample set for 10-d means, shared across trials
    let mean_mc = if mean_focus && d > 3 {
        Some(omega.sample(1_000_000, &mut stream_rng(config.seed, &[0x3EA2]))?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let seed = config.seed + trial as u64;
        let genz = make_genz_spec(d, seed)?;
        let spec = genz.clone();
        let f = move |z: &[f64]| Ok(genz_oscillatory(&spec, z));
        let test = TestSet::build(test_points.clone(), &f)?;
        let mean_reference = if !mean_focus && d > 3 {
            None
        } else if d <= 3 {
            let rule = uniform_box_rule(&omega.support(), 120)?;
            let mut acc = 0.0;
            let mut buf = vec![0.0; d];
            for j in 0..rule.len() {
                for (c, b) in buf.iter_mut().enumerate() {
                    *b = rule.nodes[(j, c)];
                }
                acc += rule.weights[j] * f(&buf)? * omega.density(&buf);
            }
            Some(acc)
        } else {
            let samples = mean_mc.as_ref().unwrap();
            let mut acc = 0.0;
            let mut buf = vec![0.0; d];
            for r in 0..samples.nrows() {
                for (c, b) in buf.iter_mut().enumerate() {
                    *b = samples[(r, c)];
                }
                acc += f(&buf)?;
            }
            Some(acc / samples.nrows() as f64)
        };
        for &degree in &config.degrees {
            let index_set = MultiIndexSet::total_degree(d, degree)?;
            for (s_idx, name) in strategies.iter().enumerate() {
                let named = parse_strategy(name)?;
                let timer = Timer::new(config.timing);
                let mut rng = stream_rng(config.seed, &[trial as u64, degree as u64, s_idx as u64]);
                let fit = match named {
                    Named::Gs { alpha, beta, mc } => {
                        let quadrature = match mc {
                            Some(j) => GsQuadrature::MonteCarlo { j },
                            None if d <= 3 => GsQuadrature::TensorGaussRatio { order: 50 },
                            None => GsQuadrature::MonteCarlo {
                                j: config.gs_samples,
                            },
                        };
                        fit_strategy(
                            &Strategy::Gs {
                                input: GsInput::Jacobi { alpha, beta },
                                quadrature,
                            },
                            &omega,
                            None,
                            &index_set,
                            config.candidates,
                            &f,
                            &mut rng,
                        )
                    }
                    Named::Dom { alpha, beta } => fit_strategy(
                        &Strategy::Dom { alpha, beta },
                        &omega,
                        None,
                        &index_set,
                        config.candidates,
                        &f,
                        &mut rng,
                    ),
                    Named::Nataf(target) => {
                        let transform = NatafTransform::from_copula(&omega, target);
                        fit_strategy(
                            &Strategy::Nataf { target },
                            &omega,
                            Some(&transform),
                            &index_set,
                            config.candidates,
                            &f,
                            &mut rng,
                        )
                    }
                };
                match fit {
                    Ok(fit) => push_fit_row(
                        &mut rows,
                        &config.experiment,
                        name,
                        seed,
                        degree,
                        &fit,
                        &test,
                        mean_reference,
                        timer.elapsed_ms(),
                        None,
                    )?,
                    Err(e) => eprintln!(
                        "skip {} {} seed={seed} degree={degree}: {e}",
                        config.experiment, name
                    ),
                }
            }
        }
    }
    Ok(rows)
}

/// Monte-Carlo moment-matrix study: GS(2,5) with the exact reweighted rule
/// versus equal-weight rules of decreasing size.
fn mc_moments(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut cfg = config.clone();
    if cfg.strategies.is_empty() {
        cfg.strategies = vec![
            "gs(2,5)".into(),
            "gs(2,5)-mc100".into(),
            "gs(2,5)-mc1000".into(),
            "gs(2,5)-mc10000".into(),
        ];
    }
    genz_correlated(&cfg, 2, false)
}

/// One-dimensional basis comparison: Gauss interpolation in the native
/// measure, in a dominating uniform measure, and through the uniform Nataf
/// map.
fn genz1d_basis(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let omega = TensorDensity::iid_beta(1, 10.0, 10.0)?;
    let copula = GaussianCopulaDensity::new(
        vec![Marginal::beta(10.0, 10.0)?],
        CorrelationMatrix::identity(1),
    )?;
    let transform = NatafTransform::from_copula(&copula, NatafTarget::Uniform);
    let strategies: Vec<String> = if config.strategies.is_empty() {
        vec!["gauss(10,10)".into(), "gauss(1,1)".into(), "nataf-unif".into()]
    } else {
        config.strategies.clone()
    };
    let test_points = omega.sample(
        config.test_samples,
        &mut stream_rng(config.seed, &[0x1D]),
    )?;
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let seed = config.seed + trial as u64;
        let genz = make_genz_spec(1, seed)?;
        let f = move |z: &[f64]| Ok(genz_oscillatory(&genz, z));
        let test = TestSet::build(test_points.clone(), &f)?;
        for &degree in &config.degrees {
            for name in &strategies {
                let timer = Timer::new(config.timing);
                let fit = match name.as_str() {
                    "gauss(10,10)" => fit_tensor_gauss(10.0, 10.0, 1, degree, &f)?,
                    "gauss(1,1)" => fit_tensor_gauss(1.0, 1.0, 1, degree, &f)?,
                    "nataf-unif" => fit_nataf_tensor_gauss(&transform, degree, &f)?,
                    other => {
                        return Err(PceError::InvalidArgument(format!(
                            "unknown strategy {other:?} for genz1d-basis"
                        )))
                    }
                };
                push_fit_row(
                    &mut rows,
                    &config.experiment,
                    name,
                    seed,
                    degree,
                    &fit,
                    &test,
                    None,
                    timer.elapsed_ms(),
                    None,
                )?;
            }
        }
    }
    Ok(rows)
}

/// Gauss interpolation of f∘T⁻¹ on the Nataf target cube.
fn fit_nataf_tensor_gauss(
    transform: &NatafTransform,
    degree: usize,
    f: &dyn Fn(&[f64]) -> Result<f64>,
) -> Result<FitResult> {
    let d = transform.dimension();
    let index_set = MultiIndexSet::hyperbolic(d, degree, pce_core::multi_index::QNorm::Infinity)?;
    let tensor = pce_core::basis::TensorBasis::isotropic(index_set, PolyFamily::Legendre)?;
    let rule = pce_core::basis::tensor_gauss_rule(
        &vec![PolyFamily::Legendre; d],
        &vec![degree + 1; d],
    )?;
    let psi = tensor.vandermonde(&rule.nodes)?;
    let mut y = DVector::zeros(rule.len());
    let mut nodes_z = DMatrix::zeros(rule.len(), d);
    let mut buf = vec![0.0; d];
    for j in 0..rule.len() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = 2.0 * rule.nodes[(j, c)] - 1.0;
        }
        let z = transform.inverse(&buf);
        for (c, &v) in z.iter().enumerate() {
            nodes_z[(j, c)] = v;
        }
        y[j] = f(&z)?;
    }
    let n = tensor.len();
    let mut coefficients = DVector::zeros(n);
    for k in 0..n {
        coefficients[k] = (0..rule.len())
            .map(|j| rule.weights[j] * psi[(j, k)] * y[j])
            .sum();
    }
    let surrogate = PceSurrogate::new(
        Arc::new(pce_core::basis::PolynomialBasis::Tensor(tensor)),
        coefficients,
        StrategyTag::Nataf {
            target: NatafTarget::Uniform,
        },
        Some(transform.clone()),
    )?;
    Ok(FitResult {
        surrogate,
        diagnostics: pce_core::surrogate::FitDiagnostics {
            n_samples: rule.len(),
            kappa_phi: 1.0,
            kappa_gs: None,
            kappa_q: None,
        },
        nodes: nodes_z,
        node_values: y,
    })
}

/// Domination-penalty study: tensor-Gauss interpolants of a 3-d Genz
/// function under dominating measures B(β,β) of growing distance from the
/// target B(10,10); rows carry the estimated C_r.
fn cr_study(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let d = 3;
    let omega = TensorDensity::iid_beta(d, 10.0, 10.0)?;
    let betas: Vec<f64> = if config.strategies.is_empty() {
        (1..=10).map(|b| b as f64).collect()
    } else {
        config
            .strategies
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    PceError::InvalidArgument(format!("cr-study strategies are β values: {s:?}"))
                })
            })
            .collect::<Result<_>>()?
    };
    let probes = domination_probes(&omega, 100_000, &mut stream_rng(config.seed, &[0xC2]))?;
    let test_points = omega.sample(
        config.test_samples,
        &mut stream_rng(config.seed, &[0xC3]),
    )?;
    let mut rows = Vec::new();
    for &beta in &betas {
        let g = TensorDensity::iid_beta(d, beta, beta)?;
        let c_r = domination_constant(&omega, &g, &probes);
        for trial in 0..config.trials {
            let seed = config.seed + trial as u64;
            let genz = make_genz_spec(d, seed)?;
            let f = move |z: &[f64]| Ok(genz_oscillatory(&genz, z));
            let test = TestSet::build(test_points.clone(), &f)?;
            for &degree in &config.degrees {
                let timer = Timer::new(config.timing);
                let fit = fit_tensor_gauss(beta, beta, d, degree, &f)?;
                push_fit_row(
                    &mut rows,
                    &config.experiment,
                    &format!("gauss({beta},{beta})"),
                    seed,
                    degree,
                    &fit,
                    &test,
                    None,
                    timer.elapsed_ms(),
                    Some(c_r),
                )?;
            }
        }
    }
    Ok(rows)
}

/// Posterior-density study: GS with monomial input on the banana density,
/// orthogonalized with the exact reweighted rule or with rejection-sampled
/// Monte-Carlo rules.
fn banana(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let omega = BananaDensity::new();
    let chem = ChemistrySpec::default();
    let f = move |z: &[f64]| chemistry_qoi(&chem, z);
    let strategies: Vec<String> = if config.strategies.is_empty() {
        vec!["gs".into(), "gs-mc1000".into(), "gs-mc10000".into()]
    } else {
        config.strategies.clone()
    };
    let test_points = omega.sample(
        config.test_samples,
        &mut stream_rng(config.seed, &[0xBA]),
    )?;
    let test = TestSet::build(test_points, &f)?;
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let seed = config.seed + trial as u64;
        for &degree in &config.degrees {
            let index_set = MultiIndexSet::total_degree(2, degree)?;
            for (s_idx, name) in strategies.iter().enumerate() {
                let quadrature = match name.as_str() {
                    "gs" => GsQuadrature::TensorGaussRatio { order: 100 },
                    other => {
                        let j = other
                            .strip_prefix("gs-mc")
                            .and_then(|j| j.parse().ok())
                            .ok_or_else(|| {
                                PceError::InvalidArgument(format!(
                                    "unknown strategy {other:?} for banana"
                                ))
                            })?;
                        GsQuadrature::MonteCarlo { j }
                    }
                };
                let timer = Timer::new(config.timing);
                let mut rng =
                    stream_rng(config.seed, &[trial as u64, degree as u64, s_idx as u64]);
                let fit = fit_strategy(
                    &Strategy::Gs {
                        input: GsInput::Monomial,
                        quadrature,
                    },
                    &omega,
                    None,
                    &index_set,
                    config.candidates,
                    &f,
                    &mut rng,
                );
                match fit {
                    Ok(fit) => push_fit_row(
                        &mut rows,
                        &config.experiment,
                        name,
                        seed,
                        degree,
                        &fit,
                        &test,
                        None,
                        timer.elapsed_ms(),
                        None,
                    )?,
                    Err(e) => eprintln!("skip banana {name} seed={seed} degree={degree}: {e}"),
                }
            }
        }
    }
    Ok(rows)
}

/// Ridge-function study on the zonotope projection of a 20-cube. All
/// computations run in the KDE support box normalized to the unit square.
fn zonotope(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let ridge = Arc::new(RidgeSpec::random(20, 2, config.seed ^ 0x20_20)?);
    // the zonotope density: projected uniform cube samples smoothed by a KDE
    let kde_samples = {
        let mut rng = stream_rng(config.seed, &[0x2D0]);
        let mut out = DMatrix::zeros(10_000, 2);
        for r in 0..10_000 {
            let y: Vec<f64> = (0..20)
                .map(|_| rand::Rng::random::<f64>(&mut rng) * 2.0 - 1.0)
                .collect();
            let z = ridge.project(&y);
            out[(r, 0)] = z[0];
            out[(r, 1)] = z[1];
        }
        out
    };
    let kde = pce_core::measure::ZonotopeKde::new(
        kde_samples,
        pce_core::measure::BandwidthRule::Scott,
    )?;
    let kde_box = kde.support();
    let to_v = move |z: &[f64], kde_box: &[(f64, f64)]| -> Vec<f64> {
        z.iter()
            .zip(kde_box)
            .map(|(&zi, &(lo, hi))| (zi - lo) / (hi - lo))
            .collect()
    };
    let from_v = |v: &[f64], kde_box: &[(f64, f64)]| -> Vec<f64> {
        v.iter()
            .zip(kde_box)
            .map(|(&vi, &(lo, hi))| lo + (hi - lo) * vi)
            .collect()
    };
    let ridge_f = ridge.clone();
    let box_f = kde_box.clone();
    let f_v = move |v: &[f64]| ridge_f.inner_qoi(&from_v(v, &box_f));

    let project_v = |n: usize, rng: &mut ChaCha8Rng, kde_box: &[(f64, f64)]| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n, 2);
        for r in 0..n {
            let y: Vec<f64> = (0..20)
                .map(|_| rand::Rng::random::<f64>(rng) * 2.0 - 1.0)
                .collect();
            let z = ridge.project(&y);
            let v = to_v(&z, kde_box);
            out[(r, 0)] = v[0];
            out[(r, 1)] = v[1];
        }
        out
    };

    let strategies: Vec<String> = if config.strategies.is_empty() {
        vec!["gs".into(), "dom(1,1)".into()]
    } else {
        config.strategies.clone()
    };
    // fresh projected samples as the ω test set
    let test_points = project_v(
        config.test_samples,
        &mut stream_rng(config.seed, &[0x2E5]),
        &kde_box,
    );
    let test = TestSet::build(test_points, &f_v)?;
    // moment rule: projected samples with equal weights (low-discrepancy
    // stand-in), fixed across trials
    let moment_nodes = project_v(
        config.gs_samples,
        &mut stream_rng(config.seed, &[0x250B]),
        &kde_box,
    );
    let moment_rule = monte_carlo_rule(&moment_nodes, "sobol-like(projected)")?;
    let unit_box = UniformBox::new(vec![(0.0, 1.0), (0.0, 1.0)])?;
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let seed = config.seed + trial as u64;
        for &degree in &config.degrees {
            let index_set = MultiIndexSet::total_degree(2, degree)?;
            for (s_idx, name) in strategies.iter().enumerate() {
                let timer = Timer::new(config.timing);
                let mut rng =
                    stream_rng(config.seed, &[trial as u64, degree as u64, s_idx as u64]);
                let fit = match name.as_str() {
                    "gs" => {
                        // candidates: half Chebyshev over the KDE box (kept
                        // where the KDE has support), half projected samples
                        let n_cheb = config.candidates.div_ceil(2);
                        let mut cheb = pce_core::measure::chebyshev_candidates(
                            &[(0.0, 1.0), (0.0, 1.0)],
                            n_cheb,
                            &mut rng,
                        )?;
                        let mut kept = 0usize;
                        for r in 0..n_cheb {
                            let v = [cheb[(r, 0)], cheb[(r, 1)]];
                            let z = from_v(&v, &kde_box);
                            if kde.density(&z) > 1e-12 {
                                cheb[(kept, 0)] = v[0];
                                cheb[(kept, 1)] = v[1];
                                kept += 1;
                            }
                        }
                        let projected =
                            project_v(config.candidates - kept, &mut rng, &kde_box);
                        let mut candidates = DMatrix::zeros(config.candidates, 2);
                        candidates.rows_mut(0, kept).copy_from(&cheb.rows(0, kept));
                        candidates
                            .rows_mut(kept, config.candidates - kept)
                            .copy_from(&projected);
                        let families = vec![
                            PolyFamily::Monomial { lo: 0.0, hi: 1.0 },
                            PolyFamily::Monomial { lo: 0.0, hi: 1.0 },
                        ];
                        let tensor =
                            pce_core::basis::TensorBasis::new(index_set.clone(), families)?;
                        let gs =
                            pce_core::basis::gram_schmidt_orthogonalize(&tensor, &moment_rule)?;
                        let kappa_gs = gs.gs_condition();
                        leja_fit(
                            Arc::new(pce_core::basis::PolynomialBasis::Orthogonalized(gs)),
                            &candidates,
                            &f_v,
                            None,
                            StrategyTag::Gs {
                                input: "monomial".into(),
                            },
                            None,
                            Some(kappa_gs),
                        )
                    }
                    "dom(1,1)" => fit_strategy(
                        &Strategy::Dom {
                            alpha: 1.0,
                            beta: 1.0,
                        },
                        &unit_box,
                        None,
                        &index_set,
                        config.candidates,
                        &f_v,
                        &mut rng,
                    ),
                    other => Err(PceError::InvalidArgument(format!(
                        "unknown strategy {other:?} for zonotope"
                    ))),
                };
                match fit {
                    Ok(fit) => push_fit_row(
                        &mut rows,
                        &config.experiment,
                        name,
                        seed,
                        degree,
                        &fit,
                        &test,
                        None,
                        timer.elapsed_ms(),
                        None,
                    )?,
                    Err(e) => eprintln!("skip zonotope {name} seed={seed} degree={degree}: {e}"),
                }
            }
        }
    }
    Ok(rows)
}

/// Random-diffusivity PDE with anisotropic index sets over a bimodal Beta
/// mixture; compares GS (Monte-Carlo moments) against DOM(1,1) at matched
/// sample counts.
fn diffusion(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let d = config.dimension.unwrap_or(11);
    let correlation_length = 0.5f64;
    let l_p = (2.0 * correlation_length).max(1.0);
    let l = correlation_length / l_p;
    let spec = DiffusionSpec::new(d, correlation_length)?;
    let omega = BetaMixtureDensity::new(&[(0.5, 10.0, 4.0), (0.5, 4.0, 10.0)], d)?;
    let alpha = diffusion_alpha(d, l)?;
    let f = move |z: &[f64]| diffusion_qoi(&spec, z);
    let strategies: Vec<String> = if config.strategies.is_empty() {
        vec!["gs(1,1)".into(), "dom(1,1)".into()]
    } else {
        config.strategies.clone()
    };
    let n_test = config.test_samples.min(1000);
    let test_points = omega.sample(n_test, &mut stream_rng(config.seed, &[0xD1F]))?;
    let test = TestSet::build(test_points, &f)?;
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let seed = config.seed + trial as u64;
        for &level in &config.degrees {
            let index_set = MultiIndexSet::anisotropic_total_degree(&alpha, level)?;
            if index_set.len() > 3000 {
                eprintln!(
                    "skip diffusion level {level}: index set of size {} is too large",
                    index_set.len()
                );
                continue;
            }
            for (s_idx, name) in strategies.iter().enumerate() {
                let named = parse_strategy(name)?;
                let timer = Timer::new(config.timing);
                let mut rng =
                    stream_rng(config.seed, &[trial as u64, level as u64, s_idx as u64]);
                let fit = match named {
                    Named::Gs { alpha, beta, mc } => fit_strategy(
                        &Strategy::Gs {
                            input: GsInput::Jacobi { alpha, beta },
                            quadrature: GsQuadrature::MonteCarlo {
                                j: mc.unwrap_or(config.gs_samples),
                            },
                        },
                        &omega,
                        None,
                        &index_set,
                        config.candidates,
                        &f,
                        &mut rng,
                    ),
                    Named::Dom { alpha, beta } => fit_strategy(
                        &Strategy::Dom { alpha, beta },
                        &omega,
                        None,
                        &index_set,
                        config.candidates,
                        &f,
                        &mut rng,
                    ),
                    Named::Nataf(_) => Err(PceError::Unsupported(
                        "the mixture density has no Nataf transform".into(),
                    )),
                };
                match fit {
                    Ok(fit) => push_fit_row(
                        &mut rows,
                        &config.experiment,
                        name,
                        seed,
                        level,
                        &fit,
                        &test,
                        None,
                        timer.elapsed_ms(),
                        None,
                    )?,
                    Err(e) => eprintln!("skip diffusion {name} seed={seed} level={level}: {e}"),
                }
            }
        }
    }
    Ok(rows)
}
