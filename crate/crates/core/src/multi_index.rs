//! Multi-index sets defining multivariate polynomial approximation spaces.
//!
//! A multi-index `(λ_1, …, λ_d)` selects the per-dimension degrees of one
//! tensor-product basis function. Sets are kept in a canonical order:
//! ascending total degree with lexicographic tie-break, which makes every
//! downstream construction (Gram-Schmidt, Leja pivoting) deterministic and
//! degree-graded.

use crate::error::{PceError, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A single d-dimensional multi-index with non-negative entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(PceError::InvalidArgument(
                "multi-index must have at least one entry".into(),
            ));
        }
        Ok(MultiIndex(entries))
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Total degree ‖λ‖₁.
    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    fn cmp_degree_lex(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// How the q-norm of `hyperbolic_set` is measured; `Infinity` selects the
/// full tensor grid `max λ_i ≤ p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QNorm {
    Finite(f64),
    Infinity,
}

/// An ordered, duplicate-free set of multi-indices.
///
/// Ordering is a pure function of the contents: ascending total degree,
/// ties broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    dimension: usize,
    indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    /// Build a set from arbitrary indices; sorts into canonical order and
    /// rejects duplicates or mixed dimensions.
    pub fn from_indices(dimension: usize, mut indices: Vec<MultiIndex>) -> Result<Self> {
        if dimension == 0 {
            return Err(PceError::InvalidArgument("dimension must be >= 1".into()));
        }
        if indices.iter().any(|ix| ix.dimension() != dimension) {
            return Err(PceError::InvalidArgument(
                "all multi-indices must share the set dimension".into(),
            ));
        }
        indices.sort_by(|a, b| a.cmp_degree_lex(b));
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(PceError::InvalidArgument(
                "duplicate multi-index in set".into(),
            ));
        }
        Ok(MultiIndexSet { dimension, indices })
    }

    /// Total-degree set `{λ : ‖λ‖₁ ≤ p}` with cardinality C(d+p, d).
    pub fn total_degree(dimension: usize, degree: usize) -> Result<Self> {
        Self::hyperbolic(dimension, degree, QNorm::Finite(1.0))
    }

    /// Hyperbolic-cross style set `{λ : ‖λ‖_q ≤ p}`; `q = 1` reduces to the
    /// total-degree set and `q = ∞` to the full tensor grid.
    pub fn hyperbolic(dimension: usize, degree: usize, q: QNorm) -> Result<Self> {
        if dimension == 0 {
            return Err(PceError::InvalidArgument("dimension must be >= 1".into()));
        }
        if let QNorm::Finite(q) = q {
            if !(q > 0.0) {
                return Err(PceError::InvalidArgument(format!(
                    "q-norm exponent must be positive, got {q}"
                )));
            }
        }
        let mut indices = Vec::new();
        let mut current = vec![0usize; dimension];
        enumerate_box(&mut current, 0, degree, &mut |lambda| {
            if q_norm_within(lambda, degree, q) {
                indices.push(MultiIndex(lambda.to_vec()));
            }
        });
        Self::from_indices(dimension, indices)
    }

    /// Anisotropic set of Nobile–Tempone–Webster type: the union over
    /// γ ∈ Γ_α(l) of the boxes `{λ : λ_k ≤ γ_k}`, where
    /// `Γ_α(l) = {γ ≥ 1 : Σ_k (γ_k − 1) α_k ≤ l · α_min}`.
    ///
    /// Membership reduces to `Σ_k (max(λ_k,1) − 1) α_k ≤ l · α_min`.
    pub fn anisotropic(alpha: &[f64], level: usize) -> Result<Self> {
        if alpha.is_empty() {
            return Err(PceError::InvalidArgument(
                "anisotropy weights must be non-empty".into(),
            ));
        }
        if alpha.iter().any(|&a| !(a > 0.0)) {
            return Err(PceError::InvalidArgument(
                "anisotropy weights must be positive".into(),
            ));
        }
        let dimension = alpha.len();
        let alpha_min = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        let budget = level as f64 * alpha_min;
        // With exact arithmetic membership thresholds are integer multiples of
        // the alphas; the slack absorbs roundoff at the boundary.
        let tol = 1e-9 * (1.0 + budget);
        let mut indices = Vec::new();
        let mut current = vec![0usize; dimension];
        enumerate_anisotropic(&mut current, 0, 0.0, alpha, budget + tol, &mut indices);
        Self::from_indices(dimension, indices)
    }

    /// Anisotropic total-degree set `{λ : Σ_k α_k λ_k ≤ l · α_min}`: the
    /// union over the same Γ_α(l) of the shifted boxes `{λ : λ_k ≤ γ_k − 1}`.
    /// Level 0 is the constant-only set, so cardinalities stay tractable in
    /// high dimensions; this is the variant collocation sweeps use.
    pub fn anisotropic_total_degree(alpha: &[f64], level: usize) -> Result<Self> {
        if alpha.is_empty() {
            return Err(PceError::InvalidArgument(
                "anisotropy weights must be non-empty".into(),
            ));
        }
        if alpha.iter().any(|&a| !(a > 0.0)) {
            return Err(PceError::InvalidArgument(
                "anisotropy weights must be positive".into(),
            ));
        }
        let dimension = alpha.len();
        let alpha_min = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        let budget = level as f64 * alpha_min;
        let tol = 1e-9 * (1.0 + budget);
        let mut indices = Vec::new();
        let mut current = vec![0usize; dimension];
        enumerate_weighted(&mut current, 0, 0.0, alpha, budget + tol, &mut indices);
        Self::from_indices(dimension, indices)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    pub fn contains(&self, ix: &MultiIndex) -> bool {
        self.indices
            .binary_search_by(|probe| probe.cmp_degree_lex(ix))
            .is_ok()
    }

    /// Largest entry appearing in coordinate `dim`.
    pub fn max_degree_in_dim(&self, dim: usize) -> usize {
        self.indices.iter().map(|ix| ix.0[dim]).max().unwrap_or(0)
    }

    /// Largest total degree in the set.
    pub fn max_total_degree(&self) -> usize {
        self.indices
            .iter()
            .map(|ix| ix.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Check the downward-closed property: every componentwise-smaller
    /// neighbour of a member is also a member.
    pub fn is_downward_closed(&self) -> bool {
        self.indices.iter().all(|ix| {
            (0..self.dimension).all(|k| {
                if ix.0[k] == 0 {
                    return true;
                }
                let mut lower = ix.clone();
                lower.0[k] -= 1;
                self.contains(&lower)
            })
        })
    }

    /// JSON array of integer arrays, one row per multi-index.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self.indices.iter().map(|ix| &ix.0).collect::<Vec<_>>())
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rows: Vec<Vec<usize>> = serde_json::from_value(value.clone())
            .map_err(|e| PceError::InvalidArgument(format!("bad index-set JSON: {e}")))?;
        let dimension = rows
            .first()
            .map(|r| r.len())
            .ok_or_else(|| PceError::InvalidArgument("empty index-set JSON".into()))?;
        Self::from_indices(dimension, rows.into_iter().map(MultiIndex).collect())
    }
}

fn q_norm_within(lambda: &[usize], degree: usize, q: QNorm) -> bool {
    match q {
        QNorm::Infinity => lambda.iter().all(|&l| l <= degree),
        // integer arithmetic keeps the q = 1 case exactly the total-degree set
        QNorm::Finite(q) if q == 1.0 => lambda.iter().sum::<usize>() <= degree,
        QNorm::Finite(q) => {
            let sum: f64 = lambda.iter().map(|&l| (l as f64).powf(q)).sum();
            // Indices on the boundary (for example a single nonzero entry
            // equal to p) must survive powf roundoff.
            sum.powf(1.0 / q) <= degree as f64 * (1.0 + 1e-12) + 1e-12
        }
    }
}

fn enumerate_box(current: &mut [usize], dim: usize, cap: usize, visit: &mut impl FnMut(&[usize])) {
    if dim == current.len() {
        visit(current);
        return;
    }
    for v in 0..=cap {
        current[dim] = v;
        enumerate_box(current, dim + 1, cap, visit);
    }
    current[dim] = 0;
}

fn enumerate_weighted(
    current: &mut [usize],
    dim: usize,
    cost_so_far: f64,
    alpha: &[f64],
    budget: f64,
    out: &mut Vec<MultiIndex>,
) {
    if dim == current.len() {
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    let mut v = 0usize;
    loop {
        let cost = v as f64 * alpha[dim];
        if cost_so_far + cost > budget {
            break;
        }
        current[dim] = v;
        enumerate_weighted(current, dim + 1, cost_so_far + cost, alpha, budget, out);
        v += 1;
    }
    current[dim] = 0;
}

fn enumerate_anisotropic(
    current: &mut [usize],
    dim: usize,
    cost_so_far: f64,
    alpha: &[f64],
    budget: f64,
    out: &mut Vec<MultiIndex>,
) {
    if dim == current.len() {
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    let mut v = 0usize;
    loop {
        let cost = if v == 0 { 0.0 } else { (v - 1) as f64 * alpha[dim] };
        if cost_so_far + cost > budget {
            break;
        }
        current[dim] = v;
        enumerate_anisotropic(current, dim + 1, cost_so_far + cost, alpha, budget, out);
        v += 1;
    }
    current[dim] = 0;
}

/// Anisotropy weights for the random-diffusivity benchmark: the first
/// coordinate carries the constant mode, later coordinates decay with the
/// frequency index ⌊k/2⌋ of the sine/cosine pair they excite.
pub fn diffusion_alpha(dimension: usize, correlation: f64) -> Result<Vec<f64>> {
    if dimension == 0 {
        return Err(PceError::InvalidArgument("dimension must be >= 1".into()));
    }
    if !(correlation > 0.0) {
        return Err(PceError::InvalidArgument(
            "correlation length must be positive".into(),
        ));
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut alpha = Vec::with_capacity(dimension);
    alpha.push(0.5 * (1.0 + (1.0 / (24.0 * sqrt_pi * correlation)).sqrt()).ln());
    for k in 2..=dimension {
        let base = 0.5 * (1.0 + (1.0 / (48.0 * sqrt_pi * correlation)).sqrt()).ln();
        let freq = (k / 2) as f64;
        let growth = ((freq * std::f64::consts::PI * correlation).powi(2) / 8.0).exp();
        alpha.push(base * growth);
    }
    Ok(alpha)
}
