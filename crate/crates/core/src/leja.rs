//! Weighted Leja sequences by truncated row-pivoted LU factorization.
//!
//! Given a candidate set and an ordered basis, precondition the candidate
//! Vandermonde matrix by a row weight and run M steps of row-pivoted
//! Gaussian elimination in explicit Schur-complement (outer-product) form.
//! Each pivot magnitude then equals the growth factor of the weighted
//! Vandermonde determinant, so the pivot order is exactly the greedy
//! determinant-maximization order, and the stored L/U factors solve the
//! interpolation system without refactorization.

use crate::basis::PolynomialBasis;
use crate::error::{PceError, Result};
use crate::measure::JointDensity;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Row weight applied to the candidate Vandermonde matrix.
#[derive(Clone)]
pub enum LejaWeight {
    /// v(z) = k(z)^{−1/2}, the root inverse of the Christoffel function of
    /// the construction basis (the default in all experiments).
    Christoffel,
    /// v(z) = √ω(z) for a given density.
    SqrtDensity(Arc<dyn JointDensity>),
    /// v ≡ 1.
    Constant,
}

impl LejaWeight {
    fn tag(&self) -> &'static str {
        match self {
            LejaWeight::Christoffel => "christoffel",
            LejaWeight::SqrtDensity(_) => "sqrt-density",
            LejaWeight::Constant => "constant",
        }
    }
}

/// Root inverse of the Christoffel function, v(z) = 1/√(Σ_n φ_n(z)²).
pub fn christoffel_weight(basis: &PolynomialBasis, points: &DMatrix<f64>) -> Result<DVector<f64>> {
    let k = basis.christoffel(points)?;
    Ok(k.map(|v| 1.0 / v.sqrt()))
}

/// An ordered interpolation sequence with its pivoted-LU factorization.
pub struct LejaSequence {
    basis: Arc<PolynomialBasis>,
    points: DMatrix<f64>,
    pivot_indices: Vec<usize>,
    lower: DMatrix<f64>,
    upper: DMatrix<f64>,
    weight_values: DVector<f64>,
    weight_kind: String,
    candidate_provenance: String,
}

/// Pivot magnitudes below this threshold mean no remaining candidate makes
/// the next interpolation step unisolvent.
const PIVOT_TOLERANCE: f64 = 1e-13;

/// Run Algorithm "approximate LU sequence": weight the S×N candidate
/// Vandermonde, then take the first `m` row pivots of its LU factorization.
pub fn build_leja(
    basis: Arc<PolynomialBasis>,
    candidates: &DMatrix<f64>,
    m: usize,
    weight: &LejaWeight,
    provenance: &str,
) -> Result<LejaSequence> {
    let n = basis.len();
    let s = candidates.nrows();
    if m == 0 || m > n {
        return Err(PceError::InvalidArgument(format!(
            "sequence length {m} must lie in 1..=N = {n}"
        )));
    }
    if s < m {
        return Err(PceError::InvalidArgument(format!(
            "{s} candidates cannot support {m} interpolation points"
        )));
    }
    let mut a = basis.vandermonde(candidates)?;
    let weight_values = match weight {
        LejaWeight::Christoffel => {
            // reuse the assembled matrix rather than re-evaluating the basis
            DVector::from_iterator(
                s,
                a.row_iter()
                    .map(|r| 1.0 / r.iter().map(|x| x * x).sum::<f64>().sqrt()),
            )
        }
        LejaWeight::SqrtDensity(density) => {
            let mut buf = vec![0.0; candidates.ncols()];
            DVector::from_iterator(
                s,
                (0..s).map(|r| {
                    for (c, b) in buf.iter_mut().enumerate() {
                        *b = candidates[(r, c)];
                    }
                    density.density(&buf).sqrt()
                }),
            )
        }
        LejaWeight::Constant => DVector::from_element(s, 1.0),
    };
    for (r, mut row) in a.row_iter_mut().enumerate() {
        row *= weight_values[r];
    }

    let mut perm: Vec<usize> = (0..s).collect();
    // right-looking elimination on the column-major buffer
    let data = a.as_mut_slice();
    for k in 0..m {
        let col_k = k * s;
        let mut pivot_row = k;
        let mut pivot_abs = data[col_k + k].abs();
        for r in (k + 1)..s {
            let cand = data[col_k + r].abs();
            if cand > pivot_abs
                || (cand == pivot_abs && perm[r] < perm[pivot_row])
            {
                pivot_abs = cand;
                pivot_row = r;
            }
        }
        if pivot_abs < PIVOT_TOLERANCE {
            return Err(PceError::UnisolvenceFailure {
                step: k,
                pivot: pivot_abs,
            });
        }
        if pivot_row != k {
            perm.swap(k, pivot_row);
            for j in 0..n {
                data.swap(j * s + k, j * s + pivot_row);
            }
        }
        let pivot = data[col_k + k];
        for r in (k + 1)..s {
            data[col_k + r] /= pivot;
        }
        for j in (k + 1)..n {
            let col_j = j * s;
            let u_kj = data[col_j + k];
            if u_kj == 0.0 {
                continue;
            }
            for r in (k + 1)..s {
                data[col_j + r] -= data[col_k + r] * u_kj;
            }
        }
    }

    let mut lower = DMatrix::identity(m, m);
    let mut upper = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..i.min(m) {
            lower[(i, j)] = a[(i, j)];
        }
        for j in i..n {
            upper[(i, j)] = a[(i, j)];
        }
    }
    let d = candidates.ncols();
    let mut points = DMatrix::zeros(m, d);
    let mut selected_weights = DVector::zeros(m);
    for (row, &src) in perm.iter().take(m).enumerate() {
        for c in 0..d {
            points[(row, c)] = candidates[(src, c)];
        }
        selected_weights[row] = weight_values[src];
    }
    Ok(LejaSequence {
        basis,
        points,
        pivot_indices: perm[..m].to_vec(),
        lower,
        upper,
        weight_values: selected_weights,
        weight_kind: weight.tag().to_string(),
        candidate_provenance: provenance.to_string(),
    })
}

impl LejaSequence {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn basis(&self) -> &Arc<PolynomialBasis> {
        &self.basis
    }

    /// Selected points, one row per sequence member, in pivot order.
    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    /// Indices of the selected rows in the original candidate matrix.
    pub fn pivot_indices(&self) -> &[usize] {
        &self.pivot_indices
    }

    pub fn weight_values(&self) -> &DVector<f64> {
        &self.weight_values
    }

    pub fn weight_kind(&self) -> &str {
        &self.weight_kind
    }

    /// Unit-lower-triangular factor restricted to the selected rows.
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// Upper-trapezoidal factor, M×N.
    pub fn upper(&self) -> &DMatrix<f64> {
        &self.upper
    }

    fn require_square(&self) -> Result<()> {
        if self.len() != self.basis.len() {
            return Err(PceError::InvalidArgument(format!(
                "operation needs a square sequence (M = N); M = {}, N = {}",
                self.len(),
                self.basis.len()
            )));
        }
        Ok(())
    }

    /// Solve the weighted interpolation system for PCE coefficients:
    /// α = (LU)⁻¹ V y with y the model values at this sequence's points.
    pub fn interpolate(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.require_square()?;
        let m = self.len();
        if y.len() != m {
            return Err(PceError::InvalidArgument(format!(
                "{} values for {m} interpolation points",
                y.len()
            )));
        }
        let weighted = DVector::from_fn(m, |i, _| self.weight_values[i] * y[i]);
        let forward = self
            .lower
            .solve_lower_triangular(&weighted)
            .ok_or_else(|| PceError::Numeric("singular L factor".into()))?;
        let square_u = self.upper.columns(0, m).into_owned();
        square_u
            .solve_upper_triangular(&forward)
            .ok_or_else(|| PceError::Numeric("singular U factor".into()))
    }

    /// Quadrature weights of the interpolatory rule: the first row of Φ⁻¹,
    /// recovered from the stored factors by solving Φᵀ x = e₁.
    pub fn quadrature_weights(&self) -> Result<DVector<f64>> {
        self.require_square()?;
        let m = self.len();
        let mut e1 = DVector::zeros(m);
        e1[0] = 1.0;
        let square_u = self.upper.columns(0, m).into_owned();
        // Φ = V⁻¹LU, so Φᵀ x = Uᵀ Lᵀ (V⁻¹x) = e₁
        let d = square_u
            .transpose()
            .solve_lower_triangular(&e1)
            .ok_or_else(|| PceError::Numeric("singular U factor".into()))?;
        let c = self
            .lower
            .transpose()
            .solve_upper_triangular(&d)
            .ok_or_else(|| PceError::Numeric("singular L factor".into()))?;
        Ok(DVector::from_fn(m, |i, _| self.weight_values[i] * c[i]))
    }

    /// Condition number σ_max/σ_min of the weighted Vandermonde VΦ on the
    /// selected points.
    pub fn kappa_vandermonde(&self) -> Result<f64> {
        let mut phi = self.basis.vandermonde(&self.points)?;
        for (r, mut row) in phi.row_iter_mut().enumerate() {
            row *= self.weight_values[r];
        }
        let svals = phi.svd(false, false).singular_values;
        let smax = svals.iter().cloned().fold(0.0, f64::max);
        let smin = svals.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(if smin > 0.0 { smax / smin } else { f64::INFINITY })
    }

    /// JSON export: points, pivot indices, conditioning and provenance.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let kappa_phi = self.kappa_vandermonde()?;
        let kappa_q = if self.len() == self.basis.len() {
            Some(kappa_quadrature(&self.quadrature_weights()?)?)
        } else {
            None
        };
        let points: Vec<Vec<f64>> = (0..self.len())
            .map(|r| self.points.row(r).iter().cloned().collect())
            .collect();
        Ok(serde_json::json!({
            "points": points,
            "pivot_indices": self.pivot_indices,
            "kappa_phi": kappa_phi,
            "kappa_q": kappa_q,
            "weight_kind": self.weight_kind,
            "candidates": self.candidate_provenance,
        }))
    }
}

/// ℓ¹ condition number of an interpolatory quadrature rule,
/// κ_Q = Σ|v_n| / Σ v_n; values above one flag negative weights.
pub fn kappa_quadrature(weights: &DVector<f64>) -> Result<f64> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(PceError::DegenerateRule { sum });
    }
    Ok(weights.iter().map(|v| v.abs()).sum::<f64>() / sum)
}
