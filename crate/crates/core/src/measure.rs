//! Joint probability densities and their samplers.
//!
//! The densities here are the measures the surrogates are built against:
//! tensor products of Beta/normal marginals, Gaussian-copula (Nataf-form)
//! densities with those marginals, the banana posterior, mixtures of tensor
//! Beta densities, and a Gaussian KDE over zonotope-projected samples.
//! All samplers take an explicit RNG so runs are reproducible bit-for-bit.

use crate::error::{PceError, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use statrs::distribution::{Beta as BetaDist, Continuous, ContinuousCDF};
use std::sync::Arc;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via the complementary error function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile, polished with Newton steps so that
/// Φ(Φ⁻¹(u)) − u is at machine-precision level.
pub fn norm_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u);
    for _ in 0..2 {
        let pdf = norm_pdf(x);
        if pdf <= f64::MIN_POSITIVE {
            break;
        }
        let err = norm_cdf(x) - u;
        let step = err / pdf;
        x -= step.clamp(-1.0, 1.0);
    }
    x
}

/// A univariate marginal distribution paired with its orthogonal family.
#[derive(Debug, Clone)]
pub enum Marginal {
    /// Beta(α,β) on the unit interval, statistics convention.
    Beta { alpha: f64, beta: f64, dist: BetaDist },
    /// Standard normal.
    StdNormal,
}

impl Marginal {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        let dist = BetaDist::new(alpha, beta).map_err(|e| {
            PceError::InvalidArgument(format!("Beta({alpha},{beta}) is invalid: {e}"))
        })?;
        Ok(Marginal::Beta { alpha, beta, dist })
    }

    pub fn uniform() -> Self {
        Self::beta(1.0, 1.0).expect("Beta(1,1) is valid")
    }

    pub fn std_normal() -> Self {
        Marginal::StdNormal
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Marginal::Beta { .. } => (0.0, 1.0),
            Marginal::StdNormal => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Beta { dist, .. } => {
                if (0.0..=1.0).contains(&x) {
                    dist.pdf(x)
                } else {
                    0.0
                }
            }
            Marginal::StdNormal => norm_pdf(x),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Beta { dist, .. } => {
                if (0.0..=1.0).contains(&x) {
                    dist.ln_pdf(x)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Marginal::StdNormal => -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Beta { dist, .. } => dist.cdf(x.clamp(0.0, 1.0)),
            Marginal::StdNormal => norm_cdf(x),
        }
    }

    /// Inverse CDF, polished with safeguarded Newton iterations. Deep-tail
    /// arguments use the asymptotic inversion I_x(a,b) ≈ x^a/(a B(a,b))
    /// (and its mirror), where the AS109 iteration underflows.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Marginal::StdNormal => norm_quantile(u),
            Marginal::Beta { alpha, beta, dist } => {
                if u <= 0.0 {
                    return 0.0;
                }
                if u >= 1.0 {
                    return 1.0;
                }
                let ln_b = statrs::function::beta::ln_beta(*alpha, *beta);
                let mut x = if u < 1e-8 {
                    ((u.ln() + alpha.ln() + ln_b) / alpha).exp()
                } else if u > 1.0 - 1e-8 {
                    1.0 - (((1.0 - u).ln() + beta.ln() + ln_b) / beta).exp()
                } else {
                    dist.inverse_cdf(u)
                }
                .clamp(1e-300, 1.0 - 1e-16);
                for _ in 0..4 {
                    let pdf = dist.pdf(x);
                    if !(pdf > 0.0) || !pdf.is_finite() {
                        break;
                    }
                    let err = dist.cdf(x) - u;
                    if err == 0.0 {
                        break;
                    }
                    // keep the iterate strictly inside (0,1)
                    let next = x - err / pdf;
                    x = if next <= 0.0 {
                        0.5 * x
                    } else if next >= 1.0 {
                        0.5 * (x + 1.0)
                    } else {
                        next
                    };
                }
                x
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Marginal::Beta { alpha, beta, .. } => alpha / (alpha + beta),
            Marginal::StdNormal => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Marginal::Beta { alpha, beta, .. } => {
                alpha * beta / ((alpha + beta).powi(2) * (alpha + beta + 1.0))
            }
            Marginal::StdNormal => 1.0,
        }
    }

    /// The polynomial family orthonormal under this marginal.
    pub fn poly_family(&self) -> crate::univariate::PolyFamily {
        match self {
            Marginal::Beta { alpha, beta, .. } => {
                if *alpha == 1.0 && *beta == 1.0 {
                    crate::univariate::PolyFamily::Legendre
                } else {
                    crate::univariate::PolyFamily::Jacobi {
                        alpha: *alpha,
                        beta: *beta,
                    }
                }
            }
            Marginal::StdNormal => crate::univariate::PolyFamily::Hermite,
        }
    }
}

/// Symmetric positive-definite matrix with unit diagonal.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    matrix: DMatrix<f64>,
    cholesky_l: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d {
            return Err(PceError::InvalidArgument(
                "correlation matrix must be square and non-empty".into(),
            ));
        }
        for i in 0..d {
            if (matrix[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(PceError::InvalidArgument(
                    "correlation matrix must have unit diagonal".into(),
                ));
            }
            for j in 0..d {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 {
                    return Err(PceError::InvalidArgument(
                        "correlation matrix must be symmetric".into(),
                    ));
                }
                if matrix[(i, j)].abs() > 1.0 + 1e-12 {
                    return Err(PceError::InvalidArgument(
                        "correlation entries must lie in [-1, 1]".into(),
                    ));
                }
            }
        }
        let chol = nalgebra::Cholesky::new(matrix.clone()).ok_or(PceError::NotPositiveDefinite)?;
        Ok(CorrelationMatrix {
            matrix,
            cholesky_l: chol.l(),
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is a correlation matrix")
    }

    /// All off-diagonal entries equal to `rho`.
    pub fn equicorrelated(d: usize, rho: f64) -> Result<Self> {
        let m = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { rho });
        Self::new(m)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular Cholesky factor L with L Lᵀ = R.
    pub fn cholesky_l(&self) -> &DMatrix<f64> {
        &self.cholesky_l
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dimension();
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| self.matrix.row(i).iter().cloned().collect())
            .collect();
        serde_json::json!(rows)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rows: Vec<Vec<f64>> = serde_json::from_value(value.clone())
            .map_err(|e| PceError::InvalidArgument(format!("bad correlation JSON: {e}")))?;
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(PceError::InvalidArgument(
                "correlation JSON must be square".into(),
            ));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }
}

/// An evaluable joint probability density with a declared support box.
pub trait JointDensity: Send + Sync {
    fn dimension(&self) -> usize;

    /// Axis-aligned support box; entries may be infinite.
    fn support(&self) -> Vec<(f64, f64)>;

    fn density(&self, z: &[f64]) -> f64;

    fn log_density(&self, z: &[f64]) -> f64 {
        self.density(z).ln()
    }

    /// Draw n iid samples (rows) where the density supports direct sampling.
    fn sample(&self, _n: usize, _rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        Err(PceError::Unsupported(
            "this density has no direct sampler".into(),
        ))
    }

    /// A tensor-product Gauss rule adapted to this density's structure,
    /// where one exists: the exact marginal rule for independent densities,
    /// transformed score-space rules for copulas, per-component rules for
    /// mixtures. Returns None when no structure is available.
    fn natural_tensor_rule(&self, _order: usize) -> Option<crate::univariate::QuadratureRule> {
        None
    }
}

/// Node-count guard for tensor rules in higher dimensions.
const MAX_TENSOR_NODES: usize = 2_000_000;

/// Independent product of marginals.
#[derive(Debug, Clone)]
pub struct TensorDensity {
    marginals: Vec<Marginal>,
}

impl TensorDensity {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(PceError::InvalidArgument(
                "need at least one marginal".into(),
            ));
        }
        Ok(TensorDensity { marginals })
    }

    /// d iid Beta(α,β) coordinates.
    pub fn iid_beta(d: usize, alpha: f64, beta: f64) -> Result<Self> {
        let m = Marginal::beta(alpha, beta)?;
        Self::new(vec![m; d])
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }
}

impl JointDensity for TensorDensity {
    fn dimension(&self) -> usize {
        self.marginals.len()
    }

    fn support(&self) -> Vec<(f64, f64)> {
        self.marginals.iter().map(|m| m.support()).collect()
    }

    fn density(&self, z: &[f64]) -> f64 {
        self.marginals
            .iter()
            .zip(z)
            .map(|(m, &zi)| m.pdf(zi))
            .product()
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        self.marginals
            .iter()
            .zip(z)
            .map(|(m, &zi)| m.ln_pdf(zi))
            .sum()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        let mut out = DMatrix::zeros(n, d);
        for r in 0..n {
            for c in 0..d {
                out[(r, c)] = self.marginals[c].quantile(rng.random::<f64>());
            }
        }
        Ok(out)
    }

    fn natural_tensor_rule(&self, order: usize) -> Option<crate::univariate::QuadratureRule> {
        let d = self.dimension();
        if order.checked_pow(d as u32)? > MAX_TENSOR_NODES {
            return None;
        }
        let families: Vec<_> = self.marginals.iter().map(|m| m.poly_family()).collect();
        crate::basis::tensor_gauss_rule(&families, &vec![order; d]).ok()
    }
}

/// Gaussian-copula joint density: marginals coupled through a multivariate
/// normal with correlation R^V. The density evaluates as
/// ω(z) = η_{R^V}(û)/Π η(û_i) · Π ω_i(z_i) with û_i = Φ⁻¹(F_i(z_i)).
#[derive(Debug, Clone)]
pub struct GaussianCopulaDensity {
    marginals: Vec<Marginal>,
    r_v: CorrelationMatrix,
    log_det_half: f64,
}

impl GaussianCopulaDensity {
    pub fn new(marginals: Vec<Marginal>, r_v: CorrelationMatrix) -> Result<Self> {
        if marginals.len() != r_v.dimension() {
            return Err(PceError::InvalidArgument(format!(
                "{} marginals for a {}-dimensional correlation matrix",
                marginals.len(),
                r_v.dimension()
            )));
        }
        let log_det_half = (0..r_v.dimension())
            .map(|i| r_v.cholesky_l()[(i, i)].ln())
            .sum();
        Ok(GaussianCopulaDensity {
            marginals,
            r_v,
            log_det_half,
        })
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.r_v
    }

    /// û_i = Φ⁻¹(F_i(z_i)); infinite at the support boundary.
    pub fn gaussian_scores(&self, z: &[f64]) -> Vec<f64> {
        self.marginals
            .iter()
            .zip(z)
            .map(|(m, &zi)| norm_quantile(m.cdf(zi)))
            .collect()
    }

    /// Parameters (mean, sd) of the conditional normal for û_i given the
    /// scores û_1..û_{i−1}, derived from the Cholesky factor of R^V.
    pub fn conditional_score_params(&self, i: usize, scores_prefix: &[f64]) -> (f64, f64) {
        let l = self.r_v.cholesky_l();
        let mut y = vec![0.0; i];
        for k in 0..i {
            let mut acc = scores_prefix[k];
            for j in 0..k {
                acc -= l[(k, j)] * y[j];
            }
            y[k] = acc / l[(k, k)];
        }
        let mean: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        (mean, l[(i, i)])
    }
}

impl JointDensity for GaussianCopulaDensity {
    fn dimension(&self) -> usize {
        self.marginals.len()
    }

    fn support(&self) -> Vec<(f64, f64)> {
        self.marginals.iter().map(|m| m.support()).collect()
    }

    fn density(&self, z: &[f64]) -> f64 {
        self.log_density(z).exp()
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        let u_hat = self.gaussian_scores(z);
        if u_hat.iter().any(|v| !v.is_finite()) {
            // boundary convention: F_i ∈ {0,1} evaluates as the limit, 0
            return f64::NEG_INFINITY;
        }
        let u = DVector::from_vec(u_hat);
        let y = self
            .r_v
            .cholesky_l()
            .solve_lower_triangular(&u)
            .expect("Cholesky factor is nonsingular");
        let quad = y.norm_squared() - u.norm_squared();
        let marg: f64 = self
            .marginals
            .iter()
            .zip(z)
            .map(|(m, &zi)| m.ln_pdf(zi))
            .sum();
        -0.5 * quad - self.log_det_half + marg
    }

    /// Copula sampler: u ~ N(0,I) → v = Lu → ṽ_i = Φ(v_i) → z_i = F_i⁻¹(ṽ_i).
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        let l = self.r_v.cholesky_l();
        let mut out = DMatrix::zeros(n, d);
        let mut u = vec![0.0; d];
        for r in 0..n {
            for ui in u.iter_mut() {
                *ui = rng.sample(StandardNormal);
            }
            for i in 0..d {
                let mut v = 0.0;
                for k in 0..=i {
                    v += l[(i, k)] * u[k];
                }
                out[(r, i)] = self.marginals[i].quantile(norm_cdf(v));
            }
        }
        Ok(out)
    }

    /// Tensor Gauss-Hermite rule of a mildly compressed score-space normal
    /// ν = N(0, σ²I), reweighted to N(0, I) and pushed through the copula
    /// map z_i = F_i⁻¹(Φ((Lv)_i)); integrates against ω by change of
    /// variable. The σ = 0.75 compression packs nodes where the quantile
    /// map varies, which sharply accelerates convergence for strongly
    /// correlated copulas; the ratio weights keep the rule consistent.
    fn natural_tensor_rule(&self, order: usize) -> Option<crate::univariate::QuadratureRule> {
        let d = self.dimension();
        if order.checked_pow(d as u32)? > MAX_TENSOR_NODES {
            return None;
        }
        const SIGMA: f64 = 0.75;
        let herm = crate::basis::tensor_gauss_rule(
            &vec![crate::univariate::PolyFamily::Hermite; d],
            &vec![order; d],
        )
        .ok()?;
        let l = self.r_v.cholesky_l();
        let mut nodes = DMatrix::zeros(herm.len(), d);
        let mut weights = herm.weights.clone();
        for q in 0..herm.len() {
            let mut ratio = 1.0;
            for i in 0..d {
                let y = herm.nodes[(q, i)];
                let v = SIGMA * y;
                ratio *= SIGMA * (-0.5 * (v * v - y * y)).exp();
                let mut score = 0.0;
                for k in 0..=i {
                    score += l[(i, k)] * SIGMA * herm.nodes[(q, k)];
                }
                nodes[(q, i)] = self.marginals[i].quantile(norm_cdf(score));
            }
            weights[q] *= ratio;
        }
        Some(crate::univariate::QuadratureRule {
            nodes,
            weights,
            description: format!("tensor-gauss(copula-score,order={order})"),
        })
    }
}

/// Banana-shaped posterior density on [−3,3]×[−2,6], the truncated nonlinear
/// warp of a standard normal: C exp(−(z₁⁴/10 + ½(2z₂ − z₁²)²)).
#[derive(Debug, Clone)]
pub struct BananaDensity {
    normalization: f64,
}

pub const BANANA_SUPPORT: [(f64, f64); 2] = [(-3.0, 3.0), (-2.0, 6.0)];

impl BananaDensity {
    pub fn new() -> Self {
        Self::with_order(200)
    }

    /// Normalize with a tensor Gauss-Legendre rule of the given order per
    /// dimension (exposed so tests can compare two orders).
    pub fn with_order(order: usize) -> Self {
        let rule = crate::univariate::PolyFamily::Legendre
            .gauss_rule(order)
            .expect("Gauss-Legendre rule");
        let mut integral = 0.0;
        for i in 0..order {
            let z1 = -3.0 + 6.0 * rule.nodes[(i, 0)];
            for j in 0..order {
                let z2 = -2.0 + 8.0 * rule.nodes[(j, 0)];
                integral += rule.weights[i]
                    * rule.weights[j]
                    * Self::unnormalized_static(&[z1, z2]);
            }
        }
        integral *= 6.0 * 8.0;
        BananaDensity {
            normalization: 1.0 / integral,
        }
    }

    fn unnormalized_static(z: &[f64]) -> f64 {
        let z1 = z[0];
        let z2 = z[1];
        (-(z1.powi(4) / 10.0 + 0.5 * (2.0 * z2 - z1 * z1).powi(2))).exp()
    }

    pub fn unnormalized(&self, z: &[f64]) -> f64 {
        Self::unnormalized_static(z)
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }
}

impl Default for BananaDensity {
    fn default() -> Self {
        Self::new()
    }
}

impl JointDensity for BananaDensity {
    fn dimension(&self) -> usize {
        2
    }

    fn support(&self) -> Vec<(f64, f64)> {
        BANANA_SUPPORT.to_vec()
    }

    fn density(&self, z: &[f64]) -> f64 {
        if !in_box(z, &BANANA_SUPPORT) {
            return 0.0;
        }
        self.normalization * Self::unnormalized_static(z)
    }

    /// Exact iid draws by rejection against the uniform proposal; the mode
    /// value C at (0,0) bounds the density ratio by 48 C < 12.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        rejection_sample(self, &BANANA_SUPPORT, 12.0, n, rng)
    }
}

/// Mixture of independent tensor-product Beta densities on the unit cube.
#[derive(Debug, Clone)]
pub struct BetaMixtureDensity {
    components: Vec<(f64, Marginal)>,
    dimension: usize,
}

impl BetaMixtureDensity {
    /// `components` holds (weight, α, β) triples; weights must be positive
    /// and sum to one.
    pub fn new(components: &[(f64, f64, f64)], dimension: usize) -> Result<Self> {
        if components.is_empty() || dimension == 0 {
            return Err(PceError::InvalidArgument(
                "mixture needs components and dimension >= 1".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| c.0 <= 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(PceError::InvalidArgument(format!(
                "mixture weights must be positive and sum to 1, got sum {total}"
            )));
        }
        let components = components
            .iter()
            .map(|&(w, a, b)| Ok((w, Marginal::beta(a, b)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BetaMixtureDensity {
            components,
            dimension,
        })
    }
}

impl JointDensity for BetaMixtureDensity {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn support(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); self.dimension]
    }

    fn density(&self, z: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|(w, m)| w * z.iter().map(|&zi| m.pdf(zi)).product::<f64>())
            .sum()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let d = self.dimension;
        let mut out = DMatrix::zeros(n, d);
        for r in 0..n {
            let pick: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = &self.components[0].1;
            for (w, m) in &self.components {
                acc += w;
                chosen = m;
                if pick <= acc {
                    break;
                }
            }
            for c in 0..d {
                out[(r, c)] = chosen.quantile(rng.random::<f64>());
            }
        }
        Ok(out)
    }

    /// Weighted concatenation of per-component tensor Gauss rules: exact for
    /// mixture integrals of polynomials each component rule resolves.
    fn natural_tensor_rule(&self, order: usize) -> Option<crate::univariate::QuadratureRule> {
        let d = self.dimension;
        let per = order.checked_pow(d as u32)?;
        if per.checked_mul(self.components.len())? > MAX_TENSOR_NODES {
            return None;
        }
        let mut nodes = DMatrix::zeros(per * self.components.len(), d);
        let mut weights = DVector::zeros(per * self.components.len());
        for (c_idx, (w, marginal)) in self.components.iter().enumerate() {
            let rule = crate::basis::tensor_gauss_rule(
                &vec![marginal.poly_family(); d],
                &vec![order; d],
            )
            .ok()?;
            for q in 0..per {
                for col in 0..d {
                    nodes[(c_idx * per + q, col)] = rule.nodes[(q, col)];
                }
                weights[c_idx * per + q] = w * rule.weights[q];
            }
        }
        Some(crate::univariate::QuadratureRule {
            nodes,
            weights,
            description: format!("tensor-gauss(mixture,order={order})"),
        })
    }
}

/// Bandwidth selection for the Gaussian KDE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthRule {
    /// h_i = σ_i n^{−1/(d+4)}
    Scott,
}

/// Gaussian kernel density estimate over projected samples, with support
/// taken as the sample bounding box inflated by three bandwidths.
#[derive(Debug, Clone)]
pub struct ZonotopeKde {
    samples: DMatrix<f64>,
    bandwidths: Vec<f64>,
    support: Vec<(f64, f64)>,
}

impl ZonotopeKde {
    pub fn new(samples: DMatrix<f64>, rule: BandwidthRule) -> Result<Self> {
        let n = samples.nrows();
        let d = samples.ncols();
        if n < 2 || d == 0 {
            return Err(PceError::InvalidArgument(
                "KDE needs at least two samples".into(),
            ));
        }
        let BandwidthRule::Scott = rule;
        let factor = (n as f64).powf(-1.0 / (d as f64 + 4.0));
        let mut bandwidths = Vec::with_capacity(d);
        let mut support = Vec::with_capacity(d);
        for c in 0..d {
            let col = samples.column(c);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            if var <= 0.0 {
                return Err(PceError::InvalidArgument(format!(
                    "sample dimension {c} has zero variance"
                )));
            }
            let h = var.sqrt() * factor;
            bandwidths.push(h);
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * h;
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
            support.push((lo, hi));
        }
        Ok(ZonotopeKde {
            samples,
            bandwidths,
            support,
        })
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }
}

impl JointDensity for ZonotopeKde {
    fn dimension(&self) -> usize {
        self.samples.ncols()
    }

    fn support(&self) -> Vec<(f64, f64)> {
        self.support.clone()
    }

    fn density(&self, z: &[f64]) -> f64 {
        let n = self.samples.nrows();
        let d = self.dimension();
        let mut acc = 0.0;
        for j in 0..n {
            let mut k = 1.0;
            for c in 0..d {
                let t = (z[c] - self.samples[(j, c)]) / self.bandwidths[c];
                k *= norm_pdf(t) / self.bandwidths[c];
            }
            acc += k;
        }
        acc / n as f64
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        let m = self.samples.nrows();
        let mut out = DMatrix::zeros(n, d);
        for r in 0..n {
            let j = rng.random_range(0..m);
            for c in 0..d {
                let eps: f64 = rng.sample(StandardNormal);
                out[(r, c)] = self.samples[(j, c)] + self.bandwidths[c] * eps;
            }
        }
        Ok(out)
    }
}

/// Uniform density over an axis-aligned box.
#[derive(Debug, Clone)]
pub struct UniformBox {
    bounds: Vec<(f64, f64)>,
    density: f64,
}

impl UniformBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        let mut volume = 1.0;
        for &(lo, hi) in &bounds {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(PceError::InvalidArgument(
                    "uniform box needs finite lo < hi per dimension".into(),
                ));
            }
            volume *= hi - lo;
        }
        Ok(UniformBox {
            bounds,
            density: 1.0 / volume,
        })
    }
}

impl JointDensity for UniformBox {
    fn dimension(&self) -> usize {
        self.bounds.len()
    }

    fn support(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn density(&self, z: &[f64]) -> f64 {
        if in_box(z, &self.bounds) {
            self.density
        } else {
            0.0
        }
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        let mut out = DMatrix::zeros(n, d);
        for r in 0..n {
            for (c, &(lo, hi)) in self.bounds.iter().enumerate() {
                out[(r, c)] = lo + (hi - lo) * rng.random::<f64>();
            }
        }
        Ok(out)
    }
}

/// Density defined by a closure on a box; evaluation only (no sampler).
#[derive(Clone)]
pub struct BoxDensityFn {
    bounds: Vec<(f64, f64)>,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl BoxDensityFn {
    pub fn new(bounds: Vec<(f64, f64)>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        BoxDensityFn {
            bounds,
            f: Arc::new(f),
        }
    }
}

impl JointDensity for BoxDensityFn {
    fn dimension(&self) -> usize {
        self.bounds.len()
    }

    fn support(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn density(&self, z: &[f64]) -> f64 {
        if in_box(z, &self.bounds) {
            (self.f)(z)
        } else {
            0.0
        }
    }
}

fn in_box(z: &[f64], bounds: &[(f64, f64)]) -> bool {
    z.iter()
        .zip(bounds)
        .all(|(&zi, &(lo, hi))| zi >= lo && zi <= hi)
}

/// iid samples of the per-dimension arcsine (Chebyshev equilibrium) law
/// mapped to the box: z = lo + (hi−lo) sin²(πu/2).
pub fn chebyshev_candidates(
    bounds: &[(f64, f64)],
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<DMatrix<f64>> {
    if bounds
        .iter()
        .any(|&(lo, hi)| !lo.is_finite() || !hi.is_finite() || !(hi > lo))
    {
        return Err(PceError::Unsupported(
            "Chebyshev candidates need a finite box".into(),
        ));
    }
    let d = bounds.len();
    let mut out = DMatrix::zeros(n, d);
    for r in 0..n {
        for (c, &(lo, hi)) in bounds.iter().enumerate() {
            let u: f64 = rng.random();
            let s = (std::f64::consts::FRAC_PI_2 * u).sin();
            out[(r, c)] = lo + (hi - lo) * s * s;
        }
    }
    Ok(out)
}

/// Candidate set for Leja construction: ⌈n/2⌉ Chebyshev samples over the box
/// plus ⌊n/2⌋ samples from the density, concatenated in that order. When the
/// box is unbounded (normal-backed coordinates) all candidates come from the
/// density.
pub fn mixed_candidates(
    density: &dyn JointDensity,
    bounds: &[(f64, f64)],
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<DMatrix<f64>> {
    let finite = bounds
        .iter()
        .all(|&(lo, hi)| lo.is_finite() && hi.is_finite());
    if !finite {
        return density.sample(n, rng);
    }
    let n_cheb = n.div_ceil(2);
    let cheb = chebyshev_candidates(bounds, n_cheb, rng)?;
    let dens = density.sample(n - n_cheb, rng)?;
    let d = bounds.len();
    let mut out = DMatrix::zeros(n, d);
    out.rows_mut(0, n_cheb).copy_from(&cheb);
    out.rows_mut(n_cheb, n - n_cheb).copy_from(&dens);
    Ok(out)
}

/// Draw n iid samples from `density` by rejection against a uniform proposal
/// on `proposal_box`. `bound` must satisfy bound ≥ sup ω/q with q the uniform
/// proposal density; for d ≤ 3 this is spot-checked on a coarse grid.
pub fn rejection_sample(
    density: &dyn JointDensity,
    proposal_box: &[(f64, f64)],
    bound: f64,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<DMatrix<f64>> {
    let d = proposal_box.len();
    if d != density.dimension() {
        return Err(PceError::InvalidArgument(
            "proposal box dimension mismatch".into(),
        ));
    }
    let mut volume = 1.0;
    for &(lo, hi) in proposal_box {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(PceError::InvalidArgument(
                "proposal box needs finite lo < hi per dimension".into(),
            ));
        }
        volume *= hi - lo;
    }
    let q = 1.0 / volume;
    if d <= 3 {
        let per_dim = 30usize;
        let mut idx = vec![0usize; d];
        let mut z = vec![0.0; d];
        loop {
            for (c, &(lo, hi)) in proposal_box.iter().enumerate() {
                z[c] = lo + (hi - lo) * (idx[c] as f64 + 0.5) / per_dim as f64;
            }
            if density.density(&z) / q > bound * (1.0 + 1e-9) {
                return Err(PceError::InvalidArgument(format!(
                    "bound {bound} is below the density ratio at {z:?}"
                )));
            }
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < per_dim {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }
    let mut out = DMatrix::zeros(n, d);
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let mut z = vec![0.0; d];
    while accepted < n {
        for (c, &(lo, hi)) in proposal_box.iter().enumerate() {
            z[c] = lo + (hi - lo) * rng.random::<f64>();
        }
        proposed += 1;
        let ratio = density.density(&z) / (bound * q);
        if rng.random::<f64>() <= ratio {
            for c in 0..d {
                out[(accepted, c)] = z[c];
            }
            accepted += 1;
        }
        if proposed >= 10_000 && (accepted as f64) < 1e-4 * proposed as f64 {
            return Err(PceError::RejectionEfficiency {
                rate: accepted as f64 / proposed as f64,
            });
        }
    }
    Ok(out)
}

/// Serializable description of a joint density, for experiment configs and
/// reproducibility logs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityConfig {
    TensorBeta {
        dimension: usize,
        alpha: f64,
        beta: f64,
    },
    GaussianCopulaBeta {
        alpha: f64,
        beta: f64,
        correlation: Vec<Vec<f64>>,
    },
    Banana,
    BetaMixture {
        dimension: usize,
        components: Vec<(f64, f64, f64)>,
    },
    UniformBox {
        bounds: Vec<(f64, f64)>,
    },
}

impl DensityConfig {
    pub fn build(&self) -> Result<Box<dyn JointDensity>> {
        Ok(match self {
            DensityConfig::TensorBeta {
                dimension,
                alpha,
                beta,
            } => Box::new(TensorDensity::iid_beta(*dimension, *alpha, *beta)?),
            DensityConfig::GaussianCopulaBeta {
                alpha,
                beta,
                correlation,
            } => {
                let d = correlation.len();
                let m = DMatrix::from_fn(d, d, |i, j| correlation[i][j]);
                Box::new(GaussianCopulaDensity::new(
                    vec![Marginal::beta(*alpha, *beta)?; d],
                    CorrelationMatrix::new(m)?,
                )?)
            }
            DensityConfig::Banana => Box::new(BananaDensity::new()),
            DensityConfig::BetaMixture {
                dimension,
                components,
            } => Box::new(BetaMixtureDensity::new(components, *dimension)?),
            DensityConfig::UniformBox { bounds } => Box::new(UniformBox::new(bounds.clone())?),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("density config serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(value.clone())
            .map_err(|e| PceError::InvalidArgument(format!("bad density config: {e}")))
    }
}

/// Sample matrix CSV: one sample per row, `.` decimal, `,` separator.
pub fn samples_to_csv(samples: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..samples.nrows() {
        for c in 0..samples.ncols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", samples[(r, c)]));
        }
        out.push('\n');
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| PceError::InvalidArgument(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(PceError::InvalidArgument(format!(
                    "line {}: ragged row",
                    lineno + 1
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(PceError::InvalidArgument("empty sample CSV".into()));
    }
    let d = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c]))
}


#[cfg(test)]
mod natural_rule_tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tensor_density_natural_rule_is_exact_gauss() {
        let tensor = TensorDensity::iid_beta(2, 2.0, 5.0).unwrap();
        let rule = tensor.natural_tensor_rule(10).unwrap();
        assert_abs_diff_eq!(rule.weights.sum(), 1.0, epsilon = 1e-12);
        // analytic E[z1^3] for Beta(2,5): 2*3*4/(7*8*9)
        let want = (2.0 * 3.0 * 4.0) / (7.0 * 8.0 * 9.0);
        assert_abs_diff_eq!(rule.integrate(|z| z[0].powi(3)), want, epsilon = 1e-13);
    }

    #[test]
    fn copula_natural_rule_integrates_the_dependent_density() {
        let cop = GaussianCopulaDensity::new(
            vec![Marginal::beta(2.0, 5.0).unwrap(); 2],
            CorrelationMatrix::equicorrelated(2, -0.9).unwrap(),
        )
        .unwrap();
        let rule = cop.natural_tensor_rule(60).unwrap();
        assert_abs_diff_eq!(rule.weights.sum(), 1.0, epsilon = 1e-12);
        // marginal moments are unchanged by the copula coupling
        let m = Marginal::beta(2.0, 5.0).unwrap();
        assert_abs_diff_eq!(rule.integrate(|z| z[0]), m.mean(), epsilon = 1e-10);
        assert_abs_diff_eq!(rule.integrate(|z| z[1]), m.mean(), epsilon = 1e-10);
        // cross moment against a dense z-space reference
        let dense = crate::univariate::PolyFamily::Legendre.gauss_rule(220).unwrap();
        let mut want = 0.0;
        for i in 0..dense.len() {
            for j in 0..dense.len() {
                let z = [dense.nodes[(i, 0)], dense.nodes[(j, 0)]];
                want += dense.weights[i] * dense.weights[j] * z[0] * z[1] * cop.density(&z);
            }
        }
        assert_abs_diff_eq!(rule.integrate(|z| z[0] * z[1]), want, epsilon = 1e-8);
    }

    #[test]
    fn mixture_natural_rule_matches_component_average() {
        let mix = BetaMixtureDensity::new(&[(0.5, 10.0, 4.0), (0.5, 4.0, 10.0)], 2).unwrap();
        let rule = mix.natural_tensor_rule(12).unwrap();
        assert_abs_diff_eq!(rule.weights.sum(), 1.0, epsilon = 1e-12);
        // E[z1] = 1/2 (10/14) + 1/2 (4/14) = 1/2
        assert_abs_diff_eq!(rule.integrate(|z| z[0]), 0.5, epsilon = 1e-13);
        // E[z1 z2] = 1/2 (10/14)^2 + 1/2 (4/14)^2 by component independence
        let want = 0.5 * (10.0f64 / 14.0).powi(2) + 0.5 * (4.0f64 / 14.0).powi(2);
        assert_abs_diff_eq!(rule.integrate(|z| z[0] * z[1]), want, epsilon = 1e-13);
    }

    #[test]
    fn natural_rule_declines_oversized_tensors() {
        let tensor = TensorDensity::new(vec![Marginal::uniform(); 11]).unwrap();
        assert!(tensor.natural_tensor_rule(50).is_none());
    }

    #[test]
    fn density_config_round_trips_and_builds() {
        let configs = vec![
            DensityConfig::TensorBeta {
                dimension: 3,
                alpha: 10.0,
                beta: 10.0,
            },
            DensityConfig::GaussianCopulaBeta {
                alpha: 2.0,
                beta: 5.0,
                correlation: vec![vec![1.0, -0.9], vec![-0.9, 1.0]],
            },
            DensityConfig::Banana,
            DensityConfig::BetaMixture {
                dimension: 2,
                components: vec![(0.5, 10.0, 4.0), (0.5, 4.0, 10.0)],
            },
        ];
        for config in configs {
            let back = DensityConfig::from_json(&config.to_json()).unwrap();
            assert_eq!(config, back);
            let density = back.build().unwrap();
            let z = vec![0.4; density.dimension()];
            assert!(density.density(&z) > 0.0);
        }
    }
}
