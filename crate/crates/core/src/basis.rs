//! Multivariate polynomial bases: tensor products of univariate families and
//! their Gram-Schmidt orthogonalization against a (discrete) dependent
//! measure.
//!
//! Orthogonalization factors the weighted Vandermonde ("moment") matrix
//! √W Ψ = QR and stores the triangular change of basis R⁻¹, so the
//! orthonormalized basis evaluates as Φ(z) = Ψ(z) R⁻¹. The Householder QR is
//! numerically equivalent to running modified Gram-Schmidt on the discrete
//! inner product but considerably more stable.

use crate::error::{PceError, Result};
use crate::measure::JointDensity;
use crate::multi_index::MultiIndexSet;
use crate::univariate::{PolyFamily, QuadratureRule};
use nalgebra::{DMatrix, DVector};

/// Tensor-product basis: function n is Π_i φ^i_{λ_i} with λ the n-th index
/// of the set's canonical ordering.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    index_set: MultiIndexSet,
    families: Vec<PolyFamily>,
}

impl TensorBasis {
    pub fn new(index_set: MultiIndexSet, families: Vec<PolyFamily>) -> Result<Self> {
        if families.len() != index_set.dimension() {
            return Err(PceError::InvalidArgument(format!(
                "{} families for dimension {}",
                families.len(),
                index_set.dimension()
            )));
        }
        for f in &families {
            f.validate()?;
        }
        Ok(TensorBasis {
            index_set,
            families,
        })
    }

    /// Same family in every dimension.
    pub fn isotropic(index_set: MultiIndexSet, family: PolyFamily) -> Result<Self> {
        let families = vec![family; index_set.dimension()];
        Self::new(index_set, families)
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn families(&self) -> &[PolyFamily] {
        &self.families
    }

    pub fn dimension(&self) -> usize {
        self.index_set.dimension()
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    /// Vandermonde matrix with entry (m, n) = ψ_n(z^{(m)}); points are rows.
    pub fn vandermonde(&self, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        if points.ncols() != d {
            return Err(PceError::InvalidArgument(format!(
                "points have dimension {}, basis expects {}",
                points.ncols(),
                d
            )));
        }
        let m = points.nrows();
        // one univariate table per dimension, up to the largest degree used
        let mut tables = Vec::with_capacity(d);
        for i in 0..d {
            let max_deg = self.index_set.max_degree_in_dim(i);
            let col: Vec<f64> = points.column(i).iter().cloned().collect();
            tables.push(self.families[i].evaluate(max_deg, &col)?);
        }
        let mut out = DMatrix::zeros(m, self.len());
        for (n, lambda) in self.index_set.iter().enumerate() {
            for r in 0..m {
                let mut v = 1.0;
                for (i, &deg) in lambda.entries().iter().enumerate() {
                    v *= tables[i][(r, deg)];
                }
                out[(r, n)] = v;
            }
        }
        Ok(out)
    }
}

/// Tensor basis plus an upper-triangular change of basis making it
/// orthonormal under the discrete measure it was constructed with.
#[derive(Debug, Clone)]
pub struct OrthogonalizedBasis {
    source: TensorBasis,
    r_inv: DMatrix<f64>,
    quadrature_used: String,
    gs_condition: f64,
}

impl OrthogonalizedBasis {
    pub fn source(&self) -> &TensorBasis {
        &self.source
    }

    /// Upper-triangular N×N change of basis with positive diagonal.
    pub fn change_of_basis(&self) -> &DMatrix<f64> {
        &self.r_inv
    }

    /// Condition number κ^GS = σ_max/σ_min of the moment matrix √W Ψ.
    pub fn gs_condition(&self) -> f64 {
        self.gs_condition
    }

    pub fn quadrature_used(&self) -> &str {
        &self.quadrature_used
    }

    pub fn vandermonde(&self, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.source.vandermonde(points)? * &self.r_inv)
    }

    /// JSON log record: the R⁻¹ entries (row-major), κ^GS and provenance.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.r_inv.nrows();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| self.r_inv.row(i).iter().cloned().collect())
            .collect();
        serde_json::json!({
            "r_inv": rows,
            "gs_condition": self.gs_condition,
            "quadrature": self.quadrature_used,
        })
    }
}

/// Either flavour of evaluable multivariate basis.
#[derive(Debug, Clone)]
pub enum PolynomialBasis {
    Tensor(TensorBasis),
    Orthogonalized(OrthogonalizedBasis),
}

impl PolynomialBasis {
    pub fn index_set(&self) -> &MultiIndexSet {
        match self {
            PolynomialBasis::Tensor(b) => b.index_set(),
            PolynomialBasis::Orthogonalized(b) => b.source().index_set(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.index_set().dimension()
    }

    pub fn len(&self) -> usize {
        self.index_set().len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set().is_empty()
    }

    pub fn vandermonde(&self, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            PolynomialBasis::Tensor(b) => b.vandermonde(points),
            PolynomialBasis::Orthogonalized(b) => b.vandermonde(points),
        }
    }

    /// Christoffel function k(z) = Σ_n φ_n(z)² for the basis in force.
    pub fn christoffel(&self, points: &DMatrix<f64>) -> Result<DVector<f64>> {
        let v = self.vandermonde(points)?;
        Ok(DVector::from_iterator(
            v.nrows(),
            v.row_iter().map(|r| r.iter().map(|x| x * x).sum()),
        ))
    }
}

/// Relative diagonal threshold below which the moment matrix is treated as
/// rank deficient (double-precision QR noise floor).
const RANK_TOLERANCE: f64 = 1e-12;

/// Orthogonalize a tensor basis against the discrete measure carried by
/// `rule`: QR-factorize √W Ψ and return the basis Φ = Ψ R⁻¹, with the sign
/// convention diag(R) > 0 making it unique.
pub fn gram_schmidt_orthogonalize(
    tensor: &TensorBasis,
    rule: &QuadratureRule,
) -> Result<OrthogonalizedBasis> {
    let n = tensor.len();
    if rule.len() < n {
        return Err(PceError::InvalidArgument(format!(
            "quadrature has {} nodes but the basis needs at least {}",
            rule.len(),
            n
        )));
    }
    if rule.weights.iter().any(|&w| w < 0.0) {
        return Err(PceError::InvalidArgument(
            "orthogonalization rule must have non-negative weights".into(),
        ));
    }
    let mut moment = tensor.vandermonde(&rule.nodes)?;
    for (j, mut row) in moment.row_iter_mut().enumerate() {
        let s = rule.weights[j].sqrt();
        row *= s;
    }
    let qr = moment.qr();
    let mut r = qr.r();
    // sign convention: positive diagonal
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            for j in i..n {
                r[(i, j)] = -r[(i, j)];
            }
        }
    }
    let r11 = r[(0, 0)].abs();
    for i in 0..n {
        let ratio = r[(i, i)].abs() / r11;
        if !(ratio > RANK_TOLERANCE) {
            return Err(PceError::IllPosedOrthogonalization {
                basis_index: i,
                ratio,
            });
        }
    }
    // κ^GS: Q has orthonormal columns, so √WΨ and R share singular values
    let svals = r.clone().svd(false, false).singular_values;
    let smax = svals.iter().cloned().fold(0.0, f64::max);
    let smin = svals.iter().cloned().fold(f64::INFINITY, f64::min);
    let gs_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| PceError::Numeric("triangular inversion of R failed".into()))?;
    Ok(OrthogonalizedBasis {
        source: tensor.clone(),
        r_inv,
        quadrature_used: rule.description.clone(),
        gs_condition,
    })
}

/// Condition number κ^GS = σ_max(√W Ψ)/σ_min(√W Ψ) of the moment matrix,
/// computed by SVD. Returns +∞ when σ_min vanishes.
pub fn moment_condition_number(tensor: &TensorBasis, rule: &QuadratureRule) -> Result<f64> {
    let mut moment = tensor.vandermonde(&rule.nodes)?;
    for (j, mut row) in moment.row_iter_mut().enumerate() {
        let s = rule.weights[j].abs().sqrt();
        row *= s;
    }
    let svals = moment.svd(false, false).singular_values;
    let smax = svals.iter().cloned().fold(0.0, f64::max);
    let smin = svals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if smin > 0.0 { smax / smin } else { f64::INFINITY })
}

/// Reweight a rule for the dominating density ν so it integrates against the
/// target density ω: w_q ← v_q · ω(z^{(q)}) / ν(z^{(q)}).
pub fn density_ratio_quadrature(
    dominating_rule: &QuadratureRule,
    target_density: &dyn JointDensity,
    dominating_density: &dyn JointDensity,
) -> Result<QuadratureRule> {
    let mut weights = dominating_rule.weights.clone();
    let mut buf = vec![0.0; dominating_rule.dimension()];
    for q in 0..dominating_rule.len() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = dominating_rule.nodes[(q, c)];
        }
        let nu = dominating_density.density(&buf);
        if nu == 0.0 {
            return Err(PceError::ZeroDominatingDensity { node: q });
        }
        weights[q] *= target_density.density(&buf) / nu;
    }
    Ok(QuadratureRule {
        nodes: dominating_rule.nodes.clone(),
        weights,
        description: format!("{}*ratio", dominating_rule.description),
    })
}

/// Equal-weight Monte-Carlo rule over the given samples, w_j = 1/J.
pub fn monte_carlo_rule(samples: &DMatrix<f64>, description: &str) -> Result<QuadratureRule> {
    let j = samples.nrows();
    if j == 0 {
        return Err(PceError::InvalidArgument(
            "Monte-Carlo rule needs at least one sample".into(),
        ));
    }
    Ok(QuadratureRule {
        nodes: samples.clone(),
        weights: DVector::from_element(j, 1.0 / j as f64),
        description: format!("monte-carlo({description},J={j})"),
    })
}

/// Cartesian product of univariate Gauss rules, one per dimension.
pub fn tensor_gauss_rule(families: &[PolyFamily], orders: &[usize]) -> Result<QuadratureRule> {
    if families.is_empty() || families.len() != orders.len() {
        return Err(PceError::InvalidArgument(
            "need one quadrature order per family".into(),
        ));
    }
    let rules: Vec<QuadratureRule> = families
        .iter()
        .zip(orders)
        .map(|(f, &n)| f.gauss_rule(n))
        .collect::<Result<_>>()?;
    let d = rules.len();
    let total: usize = rules.iter().map(|r| r.len()).product();
    let mut nodes = DMatrix::zeros(total, d);
    let mut weights = DVector::from_element(total, 1.0);
    let mut stride = vec![1usize; d];
    for i in (0..d.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * rules[i + 1].len();
    }
    for j in 0..total {
        for i in 0..d {
            let idx = (j / stride[i]) % rules[i].len();
            nodes[(j, i)] = rules[i].nodes[(idx, 0)];
            weights[j] *= rules[i].weights[idx];
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        description: format!(
            "tensor-gauss(orders={orders:?})",
        ),
    })
}
