//! Univariate orthonormal polynomial families and Gauss quadrature.
//!
//! Families are normalized against *probability* measures: Beta(α,β) on
//! the unit interval in the statistics convention (density ∝ z^{α−1}(1−z)^{β−1}),
//! the probabilists' Hermite weight (standard normal), and plain monomials
//! as a non-orthogonal input family for Gram-Schmidt orthogonalization.

use crate::error::{PceError, Result};
use nalgebra::{DMatrix, DVector};
use std::fmt;

/// A univariate polynomial family, identified by its orthogonality measure.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyFamily {
    /// Orthonormal w.r.t. Beta(α,β) on the unit interval, statistics convention.
    /// Internally this is a shifted Jacobi family with exponents
    /// α_J = β−1 on (1−x) and β_J = α−1 on (1+x).
    Jacobi { alpha: f64, beta: f64 },
    /// Orthonormal w.r.t. the uniform density on the unit interval; equals `Jacobi{1,1}`.
    Legendre,
    /// Probabilists' Hermite, orthonormal w.r.t. the standard normal density.
    Hermite,
    /// Monomials of the affinely rescaled variable t = (2z−lo−hi)/(hi−lo);
    /// non-orthogonal, used as Gram-Schmidt input.
    Monomial { lo: f64, hi: f64 },
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyFamily::Jacobi { alpha, beta } => write!(f, "jacobi({alpha},{beta})"),
            PolyFamily::Legendre => write!(f, "legendre"),
            PolyFamily::Hermite => write!(f, "hermite"),
            PolyFamily::Monomial { lo, hi } => write!(f, "monomial[{lo},{hi}]"),
        }
    }
}

impl PolyFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            PolyFamily::Jacobi { alpha, beta } => {
                if !(*alpha > 0.0 && *beta > 0.0) {
                    return Err(PceError::InvalidArgument(format!(
                        "Beta parameters must be positive, got ({alpha},{beta})"
                    )));
                }
            }
            PolyFamily::Monomial { lo, hi } => {
                if !(hi > lo) {
                    return Err(PceError::InvalidArgument(format!(
                        "monomial interval must satisfy lo < hi, got [{lo},{hi}]"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Support of the orthogonality measure (±∞ for Hermite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            PolyFamily::Jacobi { .. } | PolyFamily::Legendre => (0.0, 1.0),
            PolyFamily::Hermite => (f64::NEG_INFINITY, f64::INFINITY),
            PolyFamily::Monomial { lo, hi } => (*lo, *hi),
        }
    }

    fn contains(&self, x: f64) -> bool {
        match self {
            PolyFamily::Jacobi { .. } | PolyFamily::Legendre => (0.0..=1.0).contains(&x),
            // Monomials are evaluable everywhere; the interval only sets the scaling.
            PolyFamily::Hermite | PolyFamily::Monomial { .. } => x.is_finite(),
        }
    }

    /// Recurrence coefficients (a_k, b_k), k = 0..=n, for the orthonormal
    /// three-term recurrence √b_{k+1} φ_{k+1} = (x − a_k) φ_k − √b_k φ_{k−1},
    /// with φ_0 ≡ 1 and b_0 = 1 for a probability measure.
    pub fn recurrence_coefficients(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        match self {
            PolyFamily::Hermite => {
                let a = vec![0.0; n + 1];
                let b = (0..=n).map(|k| k as f64).collect::<Vec<_>>();
                let mut b = b;
                b[0] = 1.0;
                Ok((a, b))
            }
            PolyFamily::Legendre => jacobi_recurrence(1.0, 1.0, n),
            PolyFamily::Jacobi { alpha, beta } => jacobi_recurrence(*alpha, *beta, n),
            PolyFamily::Monomial { .. } => Err(PceError::Unsupported(
                "monomial family has no orthogonality recurrence".into(),
            )),
        }
    }

    /// Evaluate φ_0..φ_max_degree at the given points; column j holds φ_j.
    pub fn evaluate(&self, max_degree: usize, points: &[f64]) -> Result<DMatrix<f64>> {
        self.validate()?;
        if let Some(&bad) = points.iter().find(|&&x| !self.contains(x)) {
            return Err(PceError::Domain(format!(
                "point {bad} outside support of {self}"
            )));
        }
        let mut out = DMatrix::zeros(points.len(), max_degree + 1);
        match self {
            PolyFamily::Monomial { lo, hi } => {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                for (i, &x) in points.iter().enumerate() {
                    let t = (x - mid) / half;
                    let mut p = 1.0;
                    for j in 0..=max_degree {
                        out[(i, j)] = p;
                        p *= t;
                    }
                }
            }
            _ => {
                let (a, b) = self.recurrence_coefficients(max_degree.max(1))?;
                let sqrt_b: Vec<f64> = b.iter().map(|&v| v.sqrt()).collect();
                for (i, &x) in points.iter().enumerate() {
                    let mut prev = 0.0;
                    let mut cur = 1.0;
                    out[(i, 0)] = cur;
                    for j in 0..max_degree {
                        let next = ((x - a[j]) * cur - sqrt_b[j] * prev) / sqrt_b[j + 1];
                        prev = cur;
                        cur = next;
                        out[(i, j + 1)] = cur;
                    }
                }
            }
        }
        Ok(out)
    }

    /// n-point Gauss rule of the family's probability measure via the
    /// Golub-Welsch eigenvalue method. Exact for degree ≤ 2n−1.
    pub fn gauss_rule(&self, n: usize) -> Result<QuadratureRule> {
        self.validate()?;
        if n == 0 {
            return Err(PceError::InvalidArgument(
                "Gauss rule needs at least one node".into(),
            ));
        }
        if matches!(self, PolyFamily::Monomial { .. }) {
            return Err(PceError::Unsupported(
                "monomial family has no Gauss rule".into(),
            ));
        }
        let (a, b) = self.recurrence_coefficients(n)?;
        let mut jacobi = DMatrix::zeros(n, n);
        for k in 0..n {
            jacobi[(k, k)] = a[k];
            if k + 1 < n {
                let off = b[k + 1].sqrt();
                jacobi[(k, k + 1)] = off;
                jacobi[(k + 1, k)] = off;
            }
        }
        let eig = jacobi.symmetric_eigen();
        let mut raw: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        raw.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let (lo, hi) = self.support();
        let sqrt_b: Vec<f64> = b.iter().map(|&v| v.sqrt()).collect();
        // Newton-polish each eigenvalue as a root of φ_n, then recover the
        // weight from the Christoffel identity w_j = 1/Σ_{k<n} φ_k(x_j)².
        // This pushes moment exactness to the double-precision floor.
        let mut nodes = DMatrix::zeros(n, 1);
        let mut weights = DVector::zeros(n);
        for (j, &x0) in raw.iter().enumerate() {
            let mut x = x0;
            for _ in 0..3 {
                let (phi_n, dphi_n, _) = eval_with_derivative(&a, &sqrt_b, n, x);
                if dphi_n == 0.0 {
                    break;
                }
                let step = phi_n / dphi_n;
                x -= step;
                if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                    break;
                }
            }
            let x = x.clamp(lo, hi);
            let (_, _, christoffel) = eval_with_derivative(&a, &sqrt_b, n, x);
            nodes[(j, 0)] = x;
            weights[j] = 1.0 / christoffel;
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            description: format!("gauss({self},n={n})"),
        })
    }
}

/// Evaluate (φ_n(x), φ_n'(x), Σ_{k<n} φ_k(x)²) by the orthonormal recurrence.
fn eval_with_derivative(a: &[f64], sqrt_b: &[f64], n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut dprev = 0.0;
    let mut dcur = 0.0;
    let mut christoffel = 1.0;
    for k in 0..n {
        let next = ((x - a[k]) * cur - sqrt_b[k] * prev) / sqrt_b[k + 1];
        let dnext = ((x - a[k]) * dcur + cur - sqrt_b[k] * dprev) / sqrt_b[k + 1];
        prev = cur;
        cur = next;
        dprev = dcur;
        dcur = dnext;
        if k + 1 < n {
            christoffel += cur * cur;
        }
    }
    (cur, dcur, christoffel)
}

/// Orthonormal recurrence coefficients for the Beta(α,β) probability measure
/// on [0,1] (statistics convention), derived from the monic Jacobi
/// coefficients on [−1,1] with exponents (β−1, α−1) and shifted.
fn jacobi_recurrence(alpha: f64, beta: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let a_exp = beta - 1.0; // exponent of (1−x)
    let b_exp = alpha - 1.0; // exponent of (1+x)
    let mut rec_a = Vec::with_capacity(n + 1);
    let mut rec_b = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let kf = k as f64;
        let denom = 2.0 * kf + a_exp + b_exp;
        let ak = if k == 0 {
            (b_exp - a_exp) / (a_exp + b_exp + 2.0)
        } else {
            (b_exp * b_exp - a_exp * a_exp) / (denom * (denom + 2.0))
        };
        let bk = if k == 0 {
            1.0
        } else if k == 1 {
            4.0 * (1.0 + a_exp) * (1.0 + b_exp)
                / ((2.0 + a_exp + b_exp).powi(2) * (3.0 + a_exp + b_exp))
        } else {
            4.0 * kf * (kf + a_exp) * (kf + b_exp) * (kf + a_exp + b_exp)
                / (denom * denom * (denom + 1.0) * (denom - 1.0))
        };
        // shift [−1,1] → [0,1]: affine in a, quadratic scale in b
        rec_a.push((ak + 1.0) / 2.0);
        rec_b.push(if k == 0 { 1.0 } else { bk / 4.0 });
    }
    Ok((rec_a, rec_b))
}

/// Nodes and weights approximating integration against a probability density.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// J×d matrix, one node per row.
    pub nodes: DMatrix<f64>,
    /// J weights; for probability-measure Gauss rules these are positive and
    /// sum to one.
    pub weights: DVector<f64>,
    /// Provenance tag: gauss | tensor-gauss | monte-carlo | sobol-like, with
    /// construction details.
    pub description: String,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.nodes.ncols()
    }

    pub fn node(&self, j: usize) -> Vec<f64> {
        self.nodes.row(j).iter().cloned().collect()
    }

    /// Approximate ∫ f dμ by Σ w_j f(z_j).
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        let mut buf = vec![0.0; self.dimension()];
        for j in 0..self.len() {
            for (c, b) in buf.iter_mut().enumerate() {
                *b = self.nodes[(j, c)];
            }
            acc += self.weights[j] * f(&buf);
        }
        acc
    }

    /// CSV with columns node_1..node_d,weight, LF line endings.
    pub fn to_csv(&self) -> String {
        let d = self.dimension();
        let mut out = String::new();
        for c in 0..d {
            out.push_str(&format!("node_{}", c + 1));
            out.push(',');
        }
        out.push_str("weight\n");
        for j in 0..self.len() {
            for c in 0..d {
                out.push_str(&format!("{},", self.nodes[(j, c)]));
            }
            out.push_str(&format!("{}\n", self.weights[j]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| PceError::InvalidArgument("empty quadrature CSV".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.last() != Some(&"weight") || cols.len() < 2 {
            return Err(PceError::InvalidArgument(
                "quadrature CSV must end with a weight column".into(),
            ));
        }
        let d = cols.len() - 1;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != d + 1 {
                return Err(PceError::InvalidArgument(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    d + 1,
                    parts.len()
                )));
            }
            for part in &parts[..d] {
                nodes.push(part.parse::<f64>().map_err(|e| {
                    PceError::InvalidArgument(format!("line {}: {e}", lineno + 2))
                })?);
            }
            weights.push(parts[d].parse::<f64>().map_err(|e| {
                PceError::InvalidArgument(format!("line {}: {e}", lineno + 2))
            })?);
        }
        let j = weights.len();
        Ok(QuadratureRule {
            nodes: DMatrix::from_row_iterator(j, d, nodes),
            weights: DVector::from_vec(weights),
            description: "csv".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Stieltjes oracle: recover recurrence coefficients from inner products
    /// computed with a dense Gauss-Legendre rule reweighted by the beta pdf.
    fn stieltjes_beta_oracle(alpha: f64, beta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let rule = PolyFamily::Legendre.gauss_rule(300).unwrap();
        let ln_norm = statrs::function::beta::ln_beta(alpha, beta);
        let pdf = |z: f64| ((alpha - 1.0) * z.ln() + (beta - 1.0) * (1.0 - z).ln() - ln_norm).exp();
        let xs: Vec<f64> = (0..rule.len()).map(|j| rule.nodes[(j, 0)]).collect();
        let ws: Vec<f64> = (0..rule.len())
            .map(|j| rule.weights[j] * pdf(xs[j]))
            .collect();
        let inner = |p: &[f64], q: &[f64]| -> f64 {
            p.iter()
                .zip(q)
                .zip(&ws)
                .map(|((pi, qi), wi)| pi * qi * wi)
                .sum()
        };
        // Monic Stieltjes iteration: a_k = <x p_k, p_k>/<p_k, p_k>,
        // b_k = <p_k, p_k>/<p_{k−1}, p_{k−1}> for k ≥ 1, b_0 = 1.
        let mut a = Vec::new();
        let mut b = vec![1.0];
        let mut p_prev = vec![0.0; xs.len()];
        let mut p_cur = vec![1.0; xs.len()];
        let mut norm_prev = f64::NAN;
        for k in 0..=n {
            let norm = inner(&p_cur, &p_cur);
            let xcur: Vec<f64> = p_cur.iter().zip(&xs).map(|(c, x)| c * x).collect();
            let ak = inner(&xcur, &p_cur) / norm;
            a.push(ak);
            if k > 0 {
                b.push(norm / norm_prev);
            }
            let bk = if k == 0 { 0.0 } else { b[k] };
            let p_next: Vec<f64> = (0..xs.len())
                .map(|i| (xs[i] - ak) * p_cur[i] - bk * p_prev[i])
                .collect();
            norm_prev = norm;
            p_prev = p_cur;
            p_cur = p_next;
        }
        (a, b)
    }

    #[test]
    fn hermite_recurrence_is_centered() {
        let (a, b) = PolyFamily::Hermite.recurrence_coefficients(10).unwrap();
        assert!(a.iter().all(|&v| v == 0.0));
        assert_eq!(b[0], 1.0);
        for k in 1..=10 {
            assert_eq!(b[k], k as f64);
        }
    }

    #[test]
    fn legendre_recurrence_is_midpoint_centered() {
        let (a, _) = PolyFamily::Legendre.recurrence_coefficients(10).unwrap();
        for &v in &a {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn jacobi_beta_2_5_matches_stieltjes_oracle() {
        let fam = PolyFamily::Jacobi {
            alpha: 2.0,
            beta: 5.0,
        };
        let (a, b) = fam.recurrence_coefficients(10).unwrap();
        let (oa, ob) = stieltjes_beta_oracle(2.0, 5.0, 10);
        for k in 0..=10 {
            assert_abs_diff_eq!(a[k], oa[k], epsilon = 1e-11);
            assert_abs_diff_eq!(b[k], ob[k], epsilon = 1e-11);
        }
    }

    #[test]
    fn monomial_has_no_recurrence() {
        let fam = PolyFamily::Monomial { lo: -1.0, hi: 1.0 };
        assert!(matches!(
            fam.recurrence_coefficients(3),
            Err(PceError::Unsupported(_))
        ));
        assert!(matches!(fam.gauss_rule(3), Err(PceError::Unsupported(_))));
    }

    #[test]
    fn degree_zero_column_is_ones() {
        for fam in [
            PolyFamily::Legendre,
            PolyFamily::Hermite,
            PolyFamily::Jacobi {
                alpha: 2.0,
                beta: 5.0,
            },
        ] {
            let pts = match fam.support().0.is_finite() {
                true => vec![0.1, 0.5, 0.9],
                false => vec![-2.0, 0.0, 3.0],
            };
            let m = fam.evaluate(4, &pts).unwrap();
            for i in 0..pts.len() {
                assert_eq!(m[(i, 0)], 1.0);
            }
        }
    }

    #[test]
    fn legendre_is_odd_about_midpoint() {
        let m = PolyFamily::Legendre.evaluate(1, &[0.5]).unwrap();
        assert_abs_diff_eq!(m[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn low_degree_closed_forms() {
        // legendre on [0,1]: φ_1 = √12 (z − 1/2), φ_2 = √5 (6z² − 6z + 1)
        let z = 0.3;
        let m = PolyFamily::Legendre.evaluate(2, &[z]).unwrap();
        assert_abs_diff_eq!(m[(0, 1)], 12f64.sqrt() * (z - 0.5), epsilon = 1e-13);
        assert_abs_diff_eq!(
            m[(0, 2)],
            5f64.sqrt() * (6.0 * z * z - 6.0 * z + 1.0),
            epsilon = 1e-13
        );
        // hermite: φ_1 = x, φ_2 = (x² − 1)/√2
        let x = 1.7;
        let h = PolyFamily::Hermite.evaluate(2, &[x]).unwrap();
        assert_abs_diff_eq!(h[(0, 1)], x, epsilon = 1e-13);
        assert_abs_diff_eq!(h[(0, 2)], (x * x - 1.0) / 2f64.sqrt(), epsilon = 1e-13);
        // Beta(2,5): φ_1 = (z − μ)/σ with μ = 2/7, σ² = 10/(49·8)
        let fam = PolyFamily::Jacobi {
            alpha: 2.0,
            beta: 5.0,
        };
        let mu = 2.0 / 7.0;
        let sigma = (10.0f64 / 392.0).sqrt();
        let j = fam.evaluate(1, &[z]).unwrap();
        assert_abs_diff_eq!(j[(0, 1)], (z - mu) / sigma, epsilon = 1e-13);
    }

    #[test]
    fn jacobi_rejects_points_outside_unit_interval() {
        let fam = PolyFamily::Jacobi {
            alpha: 2.0,
            beta: 5.0,
        };
        assert!(matches!(
            fam.evaluate(3, &[1.2]),
            Err(PceError::Domain(_))
        ));
    }

    #[test]
    fn gram_matrix_is_identity_under_gauss_rule() {
        for fam in [
            PolyFamily::Legendre,
            PolyFamily::Hermite,
            PolyFamily::Jacobi {
                alpha: 2.0,
                beta: 5.0,
            },
        ] {
            let rule = fam.gauss_rule(50).unwrap();
            let pts: Vec<f64> = (0..rule.len()).map(|j| rule.nodes[(j, 0)]).collect();
            let basis = fam.evaluate(20, &pts).unwrap();
            for m in 0..=20 {
                for n in 0..=20 {
                    // compensated sum: the check itself must not drown in
                    // accumulation roundoff at the 1e-12 level
                    let mut g = 0.0f64;
                    let mut comp = 0.0f64;
                    for j in 0..pts.len() {
                        let term = rule.weights[j] * basis[(j, m)] * basis[(j, n)] - comp;
                        let t = g + term;
                        comp = (t - g) - term;
                        g = t;
                    }
                    let expected = if m == n { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(g, expected, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn one_point_legendre_rule_is_midpoint() {
        let rule = PolyFamily::Legendre.gauss_rule(1).unwrap();
        assert_abs_diff_eq!(rule.nodes[(0, 0)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_point_hermite_rule_hits_unit_nodes() {
        let rule = PolyFamily::Hermite.gauss_rule(2).unwrap();
        assert_abs_diff_eq!(rule.nodes[(0, 0)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.nodes[(1, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.weights[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.weights[1], 0.5, epsilon = 1e-12);
    }

    /// Analytic monomial moments for the family measures.
    fn analytic_moment(fam: &PolyFamily, k: usize) -> f64 {
        match fam {
            PolyFamily::Legendre => 1.0 / (k as f64 + 1.0),
            PolyFamily::Jacobi { alpha, beta } => {
                let mut m = 1.0;
                for j in 0..k {
                    m *= (alpha + j as f64) / (alpha + beta + j as f64);
                }
                m
            }
            PolyFamily::Hermite => {
                if k % 2 == 1 {
                    0.0
                } else {
                    // (k−1)!! double factorial
                    (1..=k).step_by(2).map(|v| v as f64).product()
                }
            }
            PolyFamily::Monomial { .. } => unreachable!(),
        }
    }

    #[test]
    fn gauss_rules_are_exact_to_degree_2n_minus_1() {
        for fam in [
            PolyFamily::Legendre,
            PolyFamily::Hermite,
            PolyFamily::Jacobi {
                alpha: 2.0,
                beta: 5.0,
            },
            PolyFamily::Jacobi {
                alpha: 10.0,
                beta: 10.0,
            },
        ] {
            for n in 1..=20usize {
                let rule = fam.gauss_rule(n).unwrap();
                for k in 0..=(2 * n - 1) {
                    let got = rule.integrate(|z| z[0].powi(k as i32));
                    let want = analytic_moment(&fam, k);
                    // odd normal moments vanish by cancellation of huge
                    // terms; measure the error against the rule's own mass
                    // at that monomial, not against zero
                    let mass = rule.integrate(|z| z[0].abs().powi(k as i32));
                    let scale = want.abs().max(mass).max(1.0);
                    assert!(
                        (got - want).abs() <= 1e-12 * scale,
                        "{fam} n={n} k={k}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_rule_invariants_up_to_30_nodes() {
        for fam in [
            PolyFamily::Legendre,
            PolyFamily::Hermite,
            PolyFamily::Jacobi {
                alpha: 2.0,
                beta: 5.0,
            },
        ] {
            let (lo, hi) = fam.support();
            for n in 1..=30usize {
                let rule = fam.gauss_rule(n).unwrap();
                assert!(rule.weights.iter().all(|&w| w > 0.0), "{fam} n={n}");
                assert_abs_diff_eq!(rule.weights.sum(), 1.0, epsilon = 1e-12);
                for j in 0..n {
                    let x = rule.nodes[(j, 0)];
                    assert!(x > lo && x < hi || !lo.is_finite(), "{fam} n={n}");
                    if j > 0 {
                        assert!(x > rule.nodes[(j - 1, 0)], "{fam} n={n} not increasing");
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_csv_round_trip() {
        let rule = PolyFamily::Legendre.gauss_rule(5).unwrap();
        let csv = rule.to_csv();
        assert!(csv.starts_with("node_1,weight\n"));
        let back = QuadratureRule::from_csv(&csv).unwrap();
        assert_eq!(back.len(), rule.len());
        for j in 0..rule.len() {
            assert_eq!(back.nodes[(j, 0)], rule.nodes[(j, 0)]);
            assert_eq!(back.weights[j], rule.weights[j]);
        }
    }
}
