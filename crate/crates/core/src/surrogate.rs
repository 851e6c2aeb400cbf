//! PCE surrogate container and the three end-to-end fitting strategies:
//! Gram-Schmidt orthogonalization against the dependent density (GS),
//! tensor bases of a dominating product measure (DOM), and PCE in
//! Nataf-transformed independent coordinates.
//!
//! All strategies interpolate on weighted Leja sequences; a separate
//! tensor-product Gauss interpolation path supports the domination studies
//! that deliberately exclude sampling effects.

use crate::basis::{
    gram_schmidt_orthogonalize, monte_carlo_rule, tensor_gauss_rule, PolynomialBasis, TensorBasis,
};
use crate::error::{PceError, Result};
use crate::leja::{build_leja, kappa_quadrature, LejaWeight};
use crate::measure::{mixed_candidates, JointDensity, Marginal, TensorDensity, UniformBox};
use crate::multi_index::MultiIndexSet;
use crate::transform::{NatafTarget, NatafTransform};
use crate::univariate::{PolyFamily, QuadratureRule};
use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use std::fmt;
use std::sync::Arc;

/// A black-box scalar model.
pub type Model<'a> = dyn Fn(&[f64]) -> Result<f64> + 'a;

/// Which pipeline produced a surrogate.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyTag {
    Gs { input: String },
    Dom { alpha: f64, beta: f64 },
    Nataf { target: NatafTarget },
}

impl fmt::Display for StrategyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyTag::Gs { input } => write!(f, "gs({input})"),
            StrategyTag::Dom { alpha, beta } => write!(f, "dom({alpha},{beta})"),
            StrategyTag::Nataf {
                target: NatafTarget::Gauss,
            } => write!(f, "nataf-gauss"),
            StrategyTag::Nataf {
                target: NatafTarget::Uniform,
            } => write!(f, "nataf-unif"),
        }
    }
}

/// Which measure analytic moments refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMeasure {
    /// The (discretely) orthogonal dependent density ω.
    TargetDensity,
    /// The dominating tensor measure of a DOM fit; not moments under ω.
    DominatingDensity,
    /// The independent transformed space of a Nataf fit (measure-preserving).
    TransformedSpace,
}

#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub measure: MomentMeasure,
}

/// Basis plus coefficient vector; evaluable, with analytic moments.
pub struct PceSurrogate {
    basis: Arc<PolynomialBasis>,
    coefficients: DVector<f64>,
    strategy: StrategyTag,
    transform: Option<NatafTransform>,
}

impl PceSurrogate {
    pub fn new(
        basis: Arc<PolynomialBasis>,
        coefficients: DVector<f64>,
        strategy: StrategyTag,
        transform: Option<NatafTransform>,
    ) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(PceError::InvalidArgument(format!(
                "{} coefficients for a basis of size {}",
                coefficients.len(),
                basis.len()
            )));
        }
        Ok(PceSurrogate {
            basis,
            coefficients,
            strategy,
            transform,
        })
    }

    pub fn basis(&self) -> &Arc<PolynomialBasis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn strategy(&self) -> &StrategyTag {
        &self.strategy
    }

    /// Map evaluation points from Z-space into the coordinates the basis
    /// lives in (identity for GS/DOM fits).
    fn basis_coordinates(&self, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match &self.transform {
            None => Ok(points.clone()),
            Some(t) => {
                let mut u = t.forward_matrix(points)?;
                if t.target() == NatafTarget::Uniform {
                    // Legendre basis lives on [0,1]; the transform emits [−1,1]
                    u.iter_mut().for_each(|v| *v = 0.5 * (*v + 1.0));
                }
                Ok(u)
            }
        }
    }

    /// Evaluate the surrogate at Z-space points (one per row).
    pub fn evaluate(&self, points: &DMatrix<f64>) -> Result<DVector<f64>> {
        let coords = self.basis_coordinates(points)?;
        Ok(self.basis.vandermonde(&coords)? * &self.coefficients)
    }

    /// Analytic mean/variance from orthonormality: mean is the coefficient
    /// of the constant function, variance the remaining coefficient energy.
    /// For discretely orthogonalized bases these are moments with respect to
    /// the discrete construction measure.
    pub fn moments(&self) -> Moments {
        let mean = self.coefficients[0];
        let sum_sq: f64 = self.coefficients.iter().map(|a| a * a).sum();
        let measure = match &self.strategy {
            StrategyTag::Gs { .. } => MomentMeasure::TargetDensity,
            StrategyTag::Dom { .. } => MomentMeasure::DominatingDensity,
            StrategyTag::Nataf { .. } => MomentMeasure::TransformedSpace,
        };
        Moments {
            mean,
            variance: sum_sq - mean * mean,
            measure,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<f64> = self.coefficients.iter().cloned().collect();
        let families: Vec<String> = match self.basis.as_ref() {
            PolynomialBasis::Tensor(t) => t.families().iter().map(|f| f.to_string()).collect(),
            PolynomialBasis::Orthogonalized(o) => o
                .source()
                .families()
                .iter()
                .map(|f| format!("gso({f})"))
                .collect(),
        };
        serde_json::json!({
            "strategy": self.strategy.to_string(),
            "coefficients": coeffs,
            "index_set": self.basis.index_set().to_json(),
            "families": families,
        })
    }
}

/// Unnormalized root-mean-square error of Σ_j |f(z_j) − f_N(z_j)|² over
/// test samples drawn from ω.
pub fn l2_error(f: &Model, surrogate: &PceSurrogate, test_samples: &DMatrix<f64>) -> Result<f64> {
    if test_samples.nrows() == 0 {
        return Err(PceError::InvalidArgument("empty test sample set".into()));
    }
    let mut truth = DVector::zeros(test_samples.nrows());
    let mut buf = vec![0.0; test_samples.ncols()];
    for r in 0..test_samples.nrows() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = test_samples[(r, c)];
        }
        truth[r] = f(&buf)?;
    }
    let approx = surrogate.evaluate(test_samples)?;
    l2_error_from_values(&truth, &approx)
}

/// RMS error from precomputed truth/surrogate values.
pub fn l2_error_from_values(truth: &DVector<f64>, approx: &DVector<f64>) -> Result<f64> {
    if truth.is_empty() || truth.len() != approx.len() {
        return Err(PceError::InvalidArgument(
            "error norm needs matching non-empty value vectors".into(),
        ));
    }
    let n = truth.len() as f64;
    Ok(((truth - approx).norm_squared() / n).sqrt())
}

/// Estimate C_r = sup ω/g over a probe set; a lower bound on the true
/// supremum, +∞ when g vanishes where ω does not.
pub fn domination_constant(
    omega: &dyn JointDensity,
    dominating: &dyn JointDensity,
    probes: &DMatrix<f64>,
) -> f64 {
    let mut worst: f64 = 0.0;
    let mut buf = vec![0.0; probes.ncols()];
    for r in 0..probes.nrows() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = probes[(r, c)];
        }
        let w = omega.density(&buf);
        let g = dominating.density(&buf);
        if g == 0.0 {
            if w > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        worst = worst.max(w / g);
    }
    worst
}

/// Default probe set: n ω-samples plus n uniform-box samples.
pub fn domination_probes(
    omega: &dyn JointDensity,
    n_each: usize,
    rng: &mut dyn RngCore,
) -> Result<DMatrix<f64>> {
    let bounds = omega.support();
    let uniform = UniformBox::new(bounds)?;
    let a = omega.sample(n_each, rng)?;
    let b = uniform.sample(n_each, rng)?;
    let d = a.ncols();
    let mut out = DMatrix::zeros(2 * n_each, d);
    out.rows_mut(0, n_each).copy_from(&a);
    out.rows_mut(n_each, n_each).copy_from(&b);
    Ok(out)
}

/// Input polynomials handed to the Gram-Schmidt procedure.
#[derive(Debug, Clone)]
pub enum GsInput {
    /// Tensor Jacobi family of a Beta(α,β) reference measure (support must
    /// be the unit cube).
    Jacobi { alpha: f64, beta: f64 },
    /// Monomials rescaled to the support box.
    Monomial,
}

impl GsInput {
    fn label(&self) -> String {
        match self {
            GsInput::Jacobi { alpha, beta } => format!("{alpha},{beta}"),
            GsInput::Monomial => "monomial".into(),
        }
    }

    fn family_for(&self, bounds: &[(f64, f64)]) -> Result<Vec<PolyFamily>> {
        match self {
            GsInput::Jacobi { alpha, beta } => {
                if bounds.iter().any(|&(lo, hi)| lo != 0.0 || hi != 1.0) {
                    return Err(PceError::InvalidArgument(
                        "Jacobi GS input needs a unit-cube support".into(),
                    ));
                }
                let fam = if *alpha == 1.0 && *beta == 1.0 {
                    PolyFamily::Legendre
                } else {
                    PolyFamily::Jacobi {
                        alpha: *alpha,
                        beta: *beta,
                    }
                };
                Ok(vec![fam; bounds.len()])
            }
            GsInput::Monomial => Ok(bounds
                .iter()
                .map(|&(lo, hi)| PolyFamily::Monomial { lo, hi })
                .collect()),
        }
    }
}

/// Discrete measure used to orthogonalize the GS input basis.
#[derive(Clone)]
pub enum GsQuadrature {
    /// Tensor Gauss rule of a dominating measure, reweighted by ω/ν: the
    /// Jacobi rule of the input family on the unit cube, or a mapped
    /// Gauss-Legendre rule on a general box.
    TensorGaussRatio { order: usize },
    /// Equal-weight Monte-Carlo rule over J draws from ω.
    MonteCarlo { j: usize },
    /// Caller-supplied rule (projected samples, external quadrature).
    Provided(QuadratureRule),
}

/// Per-fit conditioning diagnostics.
#[derive(Debug, Clone)]
pub struct FitDiagnostics {
    pub n_samples: usize,
    pub kappa_phi: f64,
    pub kappa_gs: Option<f64>,
    pub kappa_q: Option<f64>,
}

pub struct FitResult {
    pub surrogate: PceSurrogate,
    pub diagnostics: FitDiagnostics,
    /// Interpolation nodes in Z-space (model input coordinates).
    pub nodes: DMatrix<f64>,
    /// Model values at the nodes.
    pub node_values: DVector<f64>,
}

/// Strategy selector for `fit_strategy`.
#[derive(Clone)]
pub enum Strategy {
    Gs {
        input: GsInput,
        quadrature: GsQuadrature,
    },
    Dom {
        alpha: f64,
        beta: f64,
    },
    Nataf {
        target: NatafTarget,
    },
}

/// Shared tail of every pipeline: build the Leja sequence for `basis`, pull
/// model values at its points (optionally through a node map from basis
/// coordinates to model coordinates), interpolate. Public so experiment
/// drivers can compose pipelines with custom candidate sets and rules.
pub fn leja_fit(
    basis: Arc<PolynomialBasis>,
    candidates: &DMatrix<f64>,
    f: &Model,
    node_map: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
    strategy: StrategyTag,
    transform: Option<NatafTransform>,
    kappa_gs: Option<f64>,
) -> Result<FitResult> {
    let n = basis.len();
    let seq = build_leja(
        basis.clone(),
        candidates,
        n,
        &LejaWeight::Christoffel,
        "mixed-candidates",
    )?;
    let mut y = DVector::zeros(n);
    let mut z_nodes = DMatrix::zeros(n, candidates.ncols());
    let mut buf = vec![0.0; candidates.ncols()];
    for m in 0..n {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = seq.points()[(m, c)];
        }
        let z = match node_map {
            None => buf.clone(),
            Some(map) => map(&buf),
        };
        for (c, &v) in z.iter().enumerate() {
            z_nodes[(m, c)] = v;
        }
        y[m] = f(&z)?;
    }
    let coefficients = seq.interpolate(&y)?;
    let kappa_phi = seq.kappa_vandermonde()?;
    let kappa_q = kappa_quadrature(&seq.quadrature_weights()?).ok();
    let surrogate = PceSurrogate::new(basis, coefficients, strategy, transform)?;
    Ok(FitResult {
        surrogate,
        diagnostics: FitDiagnostics {
            n_samples: n,
            kappa_phi,
            kappa_gs,
            kappa_q,
        },
        nodes: z_nodes,
        node_values: y,
    })
}

/// Tensor Gauss rule for the uniform probability measure on a box.
pub fn uniform_box_rule(bounds: &[(f64, f64)], order: usize) -> Result<QuadratureRule> {
    let base = tensor_gauss_rule(&vec![PolyFamily::Legendre; bounds.len()], &vec![
            order;
            bounds.len()
        ])?;
    let mut nodes = base.nodes.clone();
    for r in 0..nodes.nrows() {
        for (c, &(lo, hi)) in bounds.iter().enumerate() {
            nodes[(r, c)] = lo + (hi - lo) * nodes[(r, c)];
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights: base.weights,
        description: format!("tensor-gauss(uniform-box,order={order})"),
    })
}

/// Build the discrete orthogonalization rule for ω per the quadrature choice.
pub fn gs_rule_for(
    omega: &dyn JointDensity,
    input: &GsInput,
    quadrature: &GsQuadrature,
    rng: &mut dyn RngCore,
) -> Result<QuadratureRule> {
    match quadrature {
        GsQuadrature::Provided(rule) => Ok(rule.clone()),
        GsQuadrature::MonteCarlo { j } => {
            let samples = omega.sample(*j, rng)?;
            monte_carlo_rule(&samples, "omega")
        }
        GsQuadrature::TensorGaussRatio { order } => {
            // densities with exploitable structure supply their own rule
            if let Some(rule) = omega.natural_tensor_rule(*order) {
                return Ok(rule);
            }
            let bounds = omega.support();
            let d = bounds.len();
            match input {
                GsInput::Jacobi { alpha, beta } => {
                    let families = input.family_for(&bounds)?;
                    let rule = tensor_gauss_rule(&families, &vec![*order; d])?;
                    let nu = TensorDensity::iid_beta(d, *alpha, *beta)?;
                    crate::basis::density_ratio_quadrature(&rule, omega, &nu)
                }
                GsInput::Monomial => {
                    let rule = uniform_box_rule(&bounds, *order)?;
                    let nu = UniformBox::new(bounds)?;
                    crate::basis::density_ratio_quadrature(&rule, omega, &nu)
                }
            }
        }
    }
}

/// End-to-end pipelines. GS: orthogonalize against ω then interpolate on a
/// Leja sequence of mixed Chebyshev/ω candidates. DOM: tensor basis and
/// candidates of the dominating Beta measure. Nataf: Leja interpolation of
/// f∘T⁻¹ in the independent target space (requires `nataf`).
pub fn fit_strategy(
    strategy: &Strategy,
    omega: &dyn JointDensity,
    nataf: Option<&NatafTransform>,
    index_set: &MultiIndexSet,
    candidate_count: usize,
    f: &Model,
    rng: &mut dyn RngCore,
) -> Result<FitResult> {
    let d = index_set.dimension();
    if omega.dimension() != d {
        return Err(PceError::InvalidArgument(format!(
            "density dimension {} does not match index set dimension {d}",
            omega.dimension()
        )));
    }
    match strategy {
        Strategy::Gs { input, quadrature } => {
            let bounds = omega.support();
            let families = input.family_for(&bounds)?;
            let tensor = TensorBasis::new(index_set.clone(), families)?;
            let rule = gs_rule_for(omega, input, quadrature, rng)?;
            let gs = gram_schmidt_orthogonalize(&tensor, &rule)?;
            let kappa_gs = gs.gs_condition();
            let candidates = mixed_candidates(omega, &bounds, candidate_count, rng)?;
            leja_fit(
                Arc::new(PolynomialBasis::Orthogonalized(gs)),
                &candidates,
                f,
                None,
                StrategyTag::Gs {
                    input: input.label(),
                },
                None,
                Some(kappa_gs),
            )
        }
        Strategy::Dom { alpha, beta } => {
            let g = TensorDensity::iid_beta(d, *alpha, *beta)?;
            let fam = if *alpha == 1.0 && *beta == 1.0 {
                PolyFamily::Legendre
            } else {
                PolyFamily::Jacobi {
                    alpha: *alpha,
                    beta: *beta,
                }
            };
            let tensor = TensorBasis::isotropic(index_set.clone(), fam)?;
            let candidates = mixed_candidates(&g, &g.support(), candidate_count, rng)?;
            leja_fit(
                Arc::new(PolynomialBasis::Tensor(tensor)),
                &candidates,
                f,
                None,
                StrategyTag::Dom {
                    alpha: *alpha,
                    beta: *beta,
                },
                None,
                None,
            )
        }
        Strategy::Nataf { target } => {
            let transform = nataf
                .ok_or_else(|| {
                    PceError::InvalidArgument(
                        "the Nataf strategy needs a NatafTransform for the density".into(),
                    )
                })?
                .clone();
            if transform.target() != *target {
                return Err(PceError::InvalidArgument(
                    "transform target does not match the strategy target".into(),
                ));
            }
            match target {
                NatafTarget::Gauss => {
                    let tensor =
                        TensorBasis::isotropic(index_set.clone(), PolyFamily::Hermite)?;
                    let normal = TensorDensity::new(vec![Marginal::std_normal(); d])?;
                    let candidates =
                        mixed_candidates(&normal, &normal.support(), candidate_count, rng)?;
                    let t = transform.clone();
                    let map = move |u: &[f64]| t.inverse(u);
                    leja_fit(
                        Arc::new(PolynomialBasis::Tensor(tensor)),
                        &candidates,
                        f,
                        Some(&map),
                        StrategyTag::Nataf { target: *target },
                        Some(transform),
                        None,
                    )
                }
                NatafTarget::Uniform => {
                    // basis coordinates v ∈ [0,1]; the transform's cube is [−1,1]
                    let tensor =
                        TensorBasis::isotropic(index_set.clone(), PolyFamily::Legendre)?;
                    let uniform = TensorDensity::new(vec![Marginal::uniform(); d])?;
                    let candidates =
                        mixed_candidates(&uniform, &uniform.support(), candidate_count, rng)?;
                    let t = transform.clone();
                    let map = move |v: &[f64]| {
                        let u: Vec<f64> = v.iter().map(|&x| 2.0 * x - 1.0).collect();
                        t.inverse(&u)
                    };
                    leja_fit(
                        Arc::new(PolynomialBasis::Tensor(tensor)),
                        &candidates,
                        f,
                        Some(&map),
                        StrategyTag::Nataf { target: *target },
                        Some(transform),
                        None,
                    )
                }
            }
        }
    }
}

/// Interpolation on a full tensor-product Gauss grid of the dominating
/// Beta(α,β) measure: discrete projection onto the tensor basis, exact at
/// the (p+1)^d nodes. Used by the domination studies to factor sampling
/// effects out of the comparison.
pub fn fit_tensor_gauss(
    alpha: f64,
    beta: f64,
    dimension: usize,
    degree: usize,
    f: &Model,
) -> Result<FitResult> {
    let index_set = MultiIndexSet::hyperbolic(
        dimension,
        degree,
        crate::multi_index::QNorm::Infinity,
    )?;
    let fam = if alpha == 1.0 && beta == 1.0 {
        PolyFamily::Legendre
    } else {
        PolyFamily::Jacobi { alpha, beta }
    };
    let tensor = TensorBasis::isotropic(index_set, fam.clone())?;
    let rule = tensor_gauss_rule(&vec![fam; dimension], &vec![degree + 1; dimension])?;
    let psi = tensor.vandermonde(&rule.nodes)?;
    let mut y = DVector::zeros(rule.len());
    let mut buf = vec![0.0; dimension];
    for j in 0..rule.len() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = rule.nodes[(j, c)];
        }
        y[j] = f(&buf)?;
    }
    let n = tensor.len();
    let mut coefficients = DVector::zeros(n);
    for k in 0..n {
        coefficients[k] = (0..rule.len())
            .map(|j| rule.weights[j] * psi[(j, k)] * y[j])
            .sum();
    }
    let surrogate = PceSurrogate::new(
        Arc::new(PolynomialBasis::Tensor(tensor)),
        coefficients,
        StrategyTag::Dom { alpha, beta },
        None,
    )?;
    Ok(FitResult {
        surrogate,
        diagnostics: FitDiagnostics {
            n_samples: rule.len(),
            kappa_phi: 1.0,
            kappa_gs: None,
            kappa_q: None,
        },
        nodes: rule.nodes.clone(),
        node_values: y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{CorrelationMatrix, GaussianCopulaDensity};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn beta25_copula(rho: f64) -> GaussianCopulaDensity {
        GaussianCopulaDensity::new(
            vec![Marginal::beta(2.0, 5.0).unwrap(); 2],
            CorrelationMatrix::equicorrelated(2, rho).unwrap(),
        )
        .unwrap()
    }

    fn unit_surrogate(coeffs: Vec<f64>, p: usize) -> PceSurrogate {
        let basis = Arc::new(PolynomialBasis::Tensor(
            TensorBasis::isotropic(
                MultiIndexSet::total_degree(2, p).unwrap(),
                PolyFamily::Legendre,
            )
            .unwrap(),
        ));
        PceSurrogate::new(
            basis,
            DVector::from_vec(coeffs),
            StrategyTag::Gs {
                input: "1,1".into(),
            },
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_coefficient_surrogate_is_constant_one() {
        let s = unit_surrogate(vec![1.0, 0.0, 0.0], 1);
        let pts = DMatrix::from_row_slice(2, 2, &[0.2, 0.8, 0.5, 0.5]);
        let vals = s.evaluate(&pts).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-14);
        let m = s.moments();
        assert_abs_diff_eq!(m.mean, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.variance, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn unit_vector_on_second_basis_function_has_unit_variance() {
        let s = unit_surrogate(vec![0.0, 1.0, 0.0], 1);
        let m = s.moments();
        assert_abs_diff_eq!(m.mean, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.variance, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn l2_error_of_exact_fit_is_zero() {
        let s = unit_surrogate(vec![2.5, 0.0, 0.0], 1);
        let f = |_: &[f64]| Ok(2.5);
        let pts = DMatrix::from_fn(50, 2, |r, c| ((r + c) % 7) as f64 / 7.0);
        assert_abs_diff_eq!(l2_error(&f, &s, &pts).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn l2_error_rejects_empty_test_set() {
        let s = unit_surrogate(vec![1.0, 0.0, 0.0], 1);
        let f = |_: &[f64]| Ok(1.0);
        let empty = DMatrix::zeros(0, 2);
        assert!(matches!(
            l2_error(&f, &s, &empty),
            Err(PceError::InvalidArgument(_))
        ));
    }

    #[test]
    fn domination_constant_of_identical_densities_is_one() {
        let omega = TensorDensity::iid_beta(2, 3.0, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probes = domination_probes(&omega, 2000, &mut rng).unwrap();
        let c = domination_constant(&omega, &omega, &probes);
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn domination_constant_beta_10_10_vs_uniform() {
        // analytic oracle: mode value 0.5^18 · Γ(20)/Γ(10)² = 3.52394...
        let omega = TensorDensity::iid_beta(1, 10.0, 10.0).unwrap();
        let uniform = TensorDensity::iid_beta(1, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probes = domination_probes(&omega, 100_000, &mut rng).unwrap();
        let c = domination_constant(&omega, &uniform, &probes);
        let exact = 923780.0 / 262144.0;
        assert!((c - exact).abs() < 1e-2, "estimate {c} vs {exact}");
        assert!(c <= exact + 1e-12, "probe estimate must be a lower bound");
    }

    #[test]
    fn domination_constant_grows_with_distance() {
        let omega = TensorDensity::iid_beta(1, 10.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let probes = domination_probes(&omega, 20_000, &mut rng).unwrap();
        let mut last = 0.0;
        for beta in [10.0, 7.0, 4.0, 1.0] {
            let g = TensorDensity::iid_beta(1, beta, beta).unwrap();
            let c = domination_constant(&omega, &g, &probes);
            assert!(c >= last, "beta {beta}: {c} < {last}");
            last = c;
        }
    }

    #[test]
    fn zero_dominating_density_returns_infinity() {
        let omega = TensorDensity::iid_beta(1, 2.0, 2.0).unwrap();
        let g = UniformBox::new(vec![(0.0, 0.4)]).unwrap();
        let probes = DMatrix::from_row_slice(2, 1, &[0.2, 0.8]);
        assert!(domination_constant(&omega, &g, &probes).is_infinite());
    }

    fn polynomial_model(copula_samples: bool) -> impl Fn(&[f64]) -> Result<f64> {
        let _ = copula_samples;
        |z: &[f64]| Ok(1.5 + 0.7 * z[0] - 0.4 * z[1] + 0.9 * z[0] * z[1] - 0.2 * z[1] * z[1])
    }

    #[test]
    fn all_strategies_interpolate_their_nodes() {
        let omega = beta25_copula(-0.9);
        let index_set = MultiIndexSet::total_degree(2, 4).unwrap();
        let f = polynomial_model(true);
        let nataf = NatafTransform::from_copula(&omega, NatafTarget::Gauss);
        let strategies: Vec<(Strategy, Option<&NatafTransform>)> = vec![
            (
                Strategy::Gs {
                    input: GsInput::Jacobi {
                        alpha: 2.0,
                        beta: 5.0,
                    },
                    quadrature: GsQuadrature::TensorGaussRatio { order: 30 },
                },
                None,
            ),
            (
                Strategy::Dom {
                    alpha: 1.0,
                    beta: 1.0,
                },
                None,
            ),
            (
                Strategy::Nataf {
                    target: NatafTarget::Gauss,
                },
                Some(&nataf),
            ),
        ];
        for (strategy, transform) in &strategies {
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let fit = fit_strategy(strategy, &omega, *transform, &index_set, 2000, &f, &mut rng)
                .unwrap();
            // every strategy interpolates its own nodes
            let at_nodes = fit.surrogate.evaluate(&fit.nodes).unwrap();
            let scale = fit.node_values.abs().max();
            assert!(
                (at_nodes - &fit.node_values).abs().max() < 1e-9 * scale,
                "{} does not interpolate its nodes",
                fit.surrogate.strategy()
            );
            // GS and DOM also reproduce the polynomial model off the nodes
            // (f ∈ π_Λ in z-coordinates; the Nataf composition is not
            // polynomial in U so no such guarantee there)
            if matches!(strategy, Strategy::Nataf { .. }) {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            let pts = omega.sample(200, &mut rng).unwrap();
            let vals = fit.surrogate.evaluate(&pts).unwrap();
            let mut buf = [0.0; 2];
            for r in 0..200 {
                buf[0] = pts[(r, 0)];
                buf[1] = pts[(r, 1)];
                let truth = f(&buf).unwrap();
                assert!(
                    (vals[r] - truth).abs() < 1e-6 * truth.abs().max(1.0),
                    "{}: {} vs {truth}",
                    fit.surrogate.strategy(),
                    vals[r]
                );
            }
        }
    }

    #[test]
    fn gs_with_independent_density_and_exact_rule_matches_dom() {
        // with R = I and the exact Gauss rule of the tensor measure, the GS
        // basis is the tensor basis itself, so both pipelines see identical
        // candidates and must pick identical points
        let omega = beta25_copula(0.0);
        let index_set = MultiIndexSet::total_degree(2, 3).unwrap();
        let f = polynomial_model(true);
        let gs = fit_strategy(
            &Strategy::Gs {
                input: GsInput::Jacobi {
                    alpha: 2.0,
                    beta: 5.0,
                },
                quadrature: GsQuadrature::TensorGaussRatio { order: 20 },
            },
            &omega,
            None,
            &index_set,
            1000,
            &f,
            &mut ChaCha8Rng::seed_from_u64(7),
        )
        .unwrap();
        let dom = fit_strategy(
            &Strategy::Dom {
                alpha: 2.0,
                beta: 5.0,
            },
            &omega,
            None,
            &index_set,
            1000,
            &f,
            &mut ChaCha8Rng::seed_from_u64(7),
        )
        .unwrap();
        let m_gs = gs.surrogate.moments();
        let m_dom = dom.surrogate.moments();
        assert_abs_diff_eq!(m_gs.mean, m_dom.mean, epsilon = 1e-8);
        assert_abs_diff_eq!(m_gs.variance, m_dom.variance, epsilon = 1e-8);
    }

    #[test]
    fn gs_moments_match_dense_quadrature_reference() {
        let omega = beta25_copula(-0.9);
        let index_set = MultiIndexSet::total_degree(2, 15).unwrap();
        let spec = crate::models::make_genz_spec(2, 3).unwrap();
        let f = move |z: &[f64]| Ok(crate::models::genz_oscillatory(&spec, z));
        let fit = fit_strategy(
            &Strategy::Gs {
                input: GsInput::Jacobi {
                    alpha: 2.0,
                    beta: 5.0,
                },
                quadrature: GsQuadrature::TensorGaussRatio { order: 50 },
            },
            &omega,
            None,
            &index_set,
            10_000,
            &f,
            &mut ChaCha8Rng::seed_from_u64(29),
        )
        .unwrap();
        // dense reference mean: ∫ f ω over the unit square
        let rule = uniform_box_rule(&[(0.0, 1.0), (0.0, 1.0)], 150).unwrap();
        let mut reference = 0.0;
        for j in 0..rule.len() {
            let z = [rule.nodes[(j, 0)], rule.nodes[(j, 1)]];
            reference += rule.weights[j] * f(&z).unwrap() * omega.density(&z);
        }
        let m = fit.surrogate.moments();
        assert_eq!(m.measure, MomentMeasure::TargetDensity);
        let rel = (m.mean - reference).abs() / reference.abs();
        assert!(rel < 1e-4, "mean {} vs reference {reference}", m.mean);
    }

    #[test]
    fn nataf_strategy_needs_a_transform() {
        let omega = beta25_copula(-0.9);
        let index_set = MultiIndexSet::total_degree(2, 2).unwrap();
        let f = polynomial_model(true);
        let out = fit_strategy(
            &Strategy::Nataf {
                target: NatafTarget::Gauss,
            },
            &omega,
            None,
            &index_set,
            500,
            &f,
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        assert!(matches!(out, Err(PceError::InvalidArgument(_))));
    }

    #[test]
    fn strategy_pipelines_are_seed_deterministic() {
        let omega = beta25_copula(-0.9);
        let index_set = MultiIndexSet::total_degree(2, 5).unwrap();
        let f = polynomial_model(true);
        let strategy = Strategy::Gs {
            input: GsInput::Jacobi {
                alpha: 1.0,
                beta: 1.0,
            },
            quadrature: GsQuadrature::MonteCarlo { j: 500 },
        };
        let a = fit_strategy(
            &strategy,
            &omega,
            None,
            &index_set,
            1500,
            &f,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        let b = fit_strategy(
            &strategy,
            &omega,
            None,
            &index_set,
            1500,
            &f,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        assert_eq!(a.surrogate.coefficients(), b.surrogate.coefficients());
    }

    #[test]
    fn tensor_gauss_fit_reproduces_polynomials() {
        let f = |z: &[f64]| Ok(0.3 + z[0] * z[0] - 0.5 * z[0] * z[1] * z[1]);
        let fit = fit_tensor_gauss(10.0, 10.0, 2, 3, &f).unwrap();
        assert_eq!(fit.diagnostics.n_samples, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = DMatrix::from_fn(100, 2, |_, _| rng.random::<f64>());
        let vals = fit.surrogate.evaluate(&pts).unwrap();
        for r in 0..100 {
            let truth = f(&[pts[(r, 0)], pts[(r, 1)]]).unwrap();
            assert_abs_diff_eq!(vals[r], truth, epsilon = 1e-10);
        }
    }

    #[test]
    fn nataf_with_identity_marginals_equals_direct_evaluation() {
        // standard normal marginals with R = I make the transform the
        // identity, so the surrogate must match plain basis evaluation
        let omega = GaussianCopulaDensity::new(
            vec![Marginal::std_normal(); 2],
            CorrelationMatrix::identity(2),
        )
        .unwrap();
        let transform = NatafTransform::from_copula(&omega, NatafTarget::Gauss);
        let index_set = MultiIndexSet::total_degree(2, 3).unwrap();
        let f = |z: &[f64]| Ok(0.4 + z[0] - 0.3 * z[0] * z[1]);
        let fit = fit_strategy(
            &Strategy::Nataf {
                target: NatafTarget::Gauss,
            },
            &omega,
            Some(&transform),
            &index_set,
            2000,
            &f,
            &mut ChaCha8Rng::seed_from_u64(55),
        )
        .unwrap();
        let direct = PceSurrogate::new(
            fit.surrogate.basis().clone(),
            fit.surrogate.coefficients().clone(),
            StrategyTag::Dom {
                alpha: 1.0,
                beta: 1.0,
            },
            None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let pts = omega.sample(100, &mut rng).unwrap();
        let via_transform = fit.surrogate.evaluate(&pts).unwrap();
        let plain = direct.evaluate(&pts).unwrap();
        assert!((via_transform - plain).abs().max() < 1e-10);
    }

    #[test]
    fn lemma_penalty_bound_is_realized() {
        // ‖f−f_N‖_{ℓ²_ω} ≤ √C_r · ‖f−f_N‖_{ℓ²_g} up to Monte-Carlo noise,
        // on the domination-study setup (ω = B(10,10)³, g = B(4,4)³)
        let omega = TensorDensity::iid_beta(3, 10.0, 10.0).unwrap();
        let g = TensorDensity::iid_beta(3, 4.0, 4.0).unwrap();
        let probes =
            domination_probes(&omega, 50_000, &mut ChaCha8Rng::seed_from_u64(71)).unwrap();
        let c_r = domination_constant(&omega, &g, &probes);
        let genz = crate::models::make_genz_spec(3, 72).unwrap();
        let f = move |z: &[f64]| Ok(crate::models::genz_oscillatory(&genz, z));
        let fit = fit_tensor_gauss(4.0, 4.0, 3, 4, &f).unwrap();
        let eval_rms = |samples: &DMatrix<f64>| -> f64 {
            let mut truth = DVector::zeros(samples.nrows());
            for r in 0..samples.nrows() {
                truth[r] = f(&[samples[(r, 0)], samples[(r, 1)], samples[(r, 2)]]).unwrap();
            }
            let approx = fit.surrogate.evaluate(samples).unwrap();
            l2_error_from_values(&truth, &approx).unwrap()
        };
        let err_omega = eval_rms(&omega.sample(10_000, &mut ChaCha8Rng::seed_from_u64(73)).unwrap());
        let err_g = eval_rms(&g.sample(10_000, &mut ChaCha8Rng::seed_from_u64(74)).unwrap());
        // 20% slack absorbs the sampling noise of both RMS estimates
        assert!(
            err_omega <= c_r.sqrt() * err_g * 1.2,
            "{err_omega} vs sqrt({c_r}) * {err_g}"
        );
    }

    #[test]
    fn error_decreases_with_degree_for_smooth_model() {
        let omega = beta25_copula(-0.9);
        let spec = crate::models::make_genz_spec(2, 8).unwrap();
        let f = move |z: &[f64]| Ok(crate::models::genz_oscillatory(&spec, z));
        let test = omega
            .sample(2000, &mut ChaCha8Rng::seed_from_u64(100))
            .unwrap();
        let mut errors = Vec::new();
        for degree in [1usize, 4, 8] {
            let index_set = MultiIndexSet::total_degree(2, degree).unwrap();
            let fit = fit_strategy(
                &Strategy::Gs {
                    input: GsInput::Jacobi {
                        alpha: 2.0,
                        beta: 5.0,
                    },
                    quadrature: GsQuadrature::TensorGaussRatio { order: 40 },
                },
                &omega,
                None,
                &index_set,
                3000,
                &f,
                &mut ChaCha8Rng::seed_from_u64(degree as u64),
            )
            .unwrap();
            errors.push(l2_error(&f, &fit.surrogate, &test).unwrap());
        }
        assert!(
            errors[0] > errors[1] && errors[1] > errors[2],
            "errors not decreasing: {errors:?}"
        );
    }
}
