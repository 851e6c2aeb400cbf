//! Probabilistic maps between dependent variables Z and independent
//! variables U: the Nataf transform (Gaussian copula with correlation
//! correction) and the Rosenblatt transform (sequential conditional CDFs,
//! inverted by bisection).

use crate::error::{PceError, Result};
use crate::measure::{
    norm_cdf, norm_quantile, CorrelationMatrix, GaussianCopulaDensity, JointDensity, Marginal,
    TensorDensity,
};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Independent coordinate system the Nataf map targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NatafTarget {
    /// U ~ N(0, I); PCE in U-space uses Hermite polynomials.
    Gauss,
    /// U uniform on [−1,1]^d (normal CDF then affine map); Legendre PCE.
    Uniform,
}

/// The Nataf transform: û_i = Φ⁻¹(F_i(z_i)), decorrelated by U = L⁻¹û with
/// L the Cholesky factor of the corrected correlation matrix R^V.
#[derive(Debug, Clone)]
pub struct NatafTransform {
    marginals: Vec<Marginal>,
    r_z: Option<CorrelationMatrix>,
    r_v: CorrelationMatrix,
    target: NatafTarget,
}

impl NatafTransform {
    /// Exact transform for a Gaussian-copula density: its R^V needs no
    /// correction solve.
    pub fn from_copula(density: &GaussianCopulaDensity, target: NatafTarget) -> Self {
        NatafTransform {
            marginals: density.marginals().to_vec(),
            r_z: None,
            r_v: density.correlation().clone(),
            target,
        }
    }

    /// Build from a *target* correlation R^Z of Z by solving the correction
    /// equation for every pair.
    pub fn from_target_correlation(
        marginals: Vec<Marginal>,
        r_z: CorrelationMatrix,
        target: NatafTarget,
    ) -> Result<Self> {
        let r_v = nataf_correlation_solve(&r_z, &marginals)?;
        Ok(NatafTransform {
            marginals,
            r_z: Some(r_z),
            r_v,
            target,
        })
    }

    pub fn dimension(&self) -> usize {
        self.marginals.len()
    }

    pub fn target(&self) -> NatafTarget {
        self.target
    }

    pub fn corrected_correlation(&self) -> &CorrelationMatrix {
        &self.r_v
    }

    pub fn target_correlation(&self) -> Option<&CorrelationMatrix> {
        self.r_z.as_ref()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    /// Map one dependent sample to independent coordinates.
    pub fn forward(&self, z: &[f64]) -> Result<Vec<f64>> {
        let d = self.dimension();
        let mut u_hat = DVector::zeros(d);
        for i in 0..d {
            let f = self.marginals[i].cdf(z[i]);
            if f <= 0.0 || f >= 1.0 {
                return Err(PceError::Boundary);
            }
            u_hat[i] = norm_quantile(f);
        }
        let u = self
            .r_v
            .cholesky_l()
            .solve_lower_triangular(&u_hat)
            .expect("Cholesky factor is nonsingular");
        let mut out: Vec<f64> = u.iter().cloned().collect();
        if self.target == NatafTarget::Uniform {
            for v in out.iter_mut() {
                *v = 2.0 * norm_cdf(*v) - 1.0;
            }
        }
        Ok(out)
    }

    /// Invert the map; interior points of the target cube/space only.
    pub fn inverse(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dimension();
        let gauss: DVector<f64> = match self.target {
            NatafTarget::Gauss => DVector::from_row_slice(u),
            NatafTarget::Uniform => {
                DVector::from_iterator(d, u.iter().map(|&v| norm_quantile(0.5 * (v + 1.0))))
            }
        };
        let u_hat = self.r_v.cholesky_l() * gauss;
        (0..d)
            .map(|i| self.marginals[i].quantile(norm_cdf(u_hat[i])))
            .collect()
    }

    /// Forward map applied row-wise.
    pub fn forward_matrix(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(z.nrows(), z.ncols());
        let mut row = vec![0.0; z.ncols()];
        for r in 0..z.nrows() {
            for c in 0..z.ncols() {
                row[c] = z[(r, c)];
            }
            let mapped = self.forward(&row)?;
            for c in 0..z.ncols() {
                out[(r, c)] = mapped[c];
            }
        }
        Ok(out)
    }

    /// Inverse map applied row-wise.
    pub fn inverse_matrix(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(u.nrows(), u.ncols());
        let mut row = vec![0.0; u.ncols()];
        for r in 0..u.nrows() {
            for c in 0..u.ncols() {
                row[c] = u[(r, c)];
            }
            let mapped = self.inverse(&row);
            for c in 0..u.ncols() {
                out[(r, c)] = mapped[c];
            }
        }
        out
    }
}

/// Gauss-Hermite order for the correlation-correction double integral;
/// validated by order-doubling agreement.
const NATAF_QUAD_ORDER: usize = 50;

/// Solve the correlation-correction equation pairwise: find R^V_ij such that
/// the Pearson correlation of (Z_i, Z_j) under the Gaussian copula equals
/// R^Z_ij. The two-dimensional integral is evaluated by tensor Gauss-Hermite
/// quadrature in score coordinates and inverted by bisection.
pub fn nataf_correlation_solve(
    r_z: &CorrelationMatrix,
    marginals: &[Marginal],
) -> Result<CorrelationMatrix> {
    let d = marginals.len();
    if r_z.dimension() != d {
        return Err(PceError::InvalidArgument(format!(
            "{d} marginals for a {}-dimensional correlation matrix",
            r_z.dimension()
        )));
    }
    let hermite = crate::univariate::PolyFamily::Hermite.gauss_rule(NATAF_QUAD_ORDER)?;
    let nodes: Vec<f64> = (0..hermite.len()).map(|q| hermite.nodes[(q, 0)]).collect();
    let weights: Vec<f64> = hermite.weights.iter().cloned().collect();
    // standardized scores s_i(x) = (F_i⁻¹(Φ(x)) − μ_i)/σ_i at the nodes.
    // Φ(x) saturates to exactly 1.0 beyond x ≈ 8.3 in doubles, which would
    // send normal quantiles to ±∞; the clamp trims ~1e-17 of tail mass.
    let clamped_cdf = |x: f64| norm_cdf(x).clamp(1e-300, 1.0 - 1e-16);
    let scores: Vec<Vec<f64>> = marginals
        .iter()
        .map(|m| {
            let mu = m.mean();
            let sd = m.variance().sqrt();
            nodes
                .iter()
                .map(|&x| (m.quantile(clamped_cdf(x)) - mu) / sd)
                .collect()
        })
        .collect();
    let score_at = |i: usize, x: f64| -> f64 {
        let m = &marginals[i];
        (m.quantile(clamped_cdf(x)) - m.mean()) / m.variance().sqrt()
    };
    let correlation_under = |i: usize, j: usize, r: f64| -> f64 {
        let c = (1.0 - r * r).sqrt();
        let mut acc = 0.0;
        for (q, &x) in nodes.iter().enumerate() {
            let si = scores[i][q];
            let mut inner = 0.0;
            for (p, &y) in nodes.iter().enumerate() {
                inner += weights[p] * score_at(j, r * x + c * y);
            }
            acc += weights[q] * si * inner;
        }
        acc
    };
    let mut out = DMatrix::identity(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let target = r_z.matrix()[(i, j)];
            let r = if target == 0.0 {
                0.0
            } else {
                let mut lo = -1.0 + 1e-9;
                let mut hi = 1.0 - 1e-9;
                let f_lo = correlation_under(i, j, lo) - target;
                let f_hi = correlation_under(i, j, hi) - target;
                if f_lo > 0.0 || f_hi < 0.0 {
                    return Err(PceError::InfeasibleCorrelation {
                        target,
                        lo: f_lo + target,
                        hi: f_hi + target,
                    });
                }
                let mut mid = 0.5 * (lo + hi);
                for _ in 0..200 {
                    mid = 0.5 * (lo + hi);
                    let f_mid = correlation_under(i, j, mid) - target;
                    if f_mid.abs() < 1e-12 || hi - lo < 1e-13 {
                        break;
                    }
                    if f_mid < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                mid
            };
            out[(i, j)] = r;
            out[(j, i)] = r;
        }
    }
    CorrelationMatrix::new(out)
}

/// Where the sequential conditional CDFs of a Rosenblatt map come from.
#[derive(Clone)]
pub enum ConditionalProvider {
    /// Independent coordinates: conditionals are the marginals themselves.
    Independent(TensorDensity),
    /// Gaussian-copula density: conditionals are analytic normal CDFs in
    /// score space.
    Copula(GaussianCopulaDensity),
    /// Arbitrary 2-d density; conditionals by 1-d Gauss-Legendre
    /// marginalization. Higher dimensions hit the curse of dimensionality and
    /// are not provided.
    Generic2d {
        density: Arc<dyn JointDensity>,
        quad_order: usize,
    },
}

/// Rosenblatt transform with a fixed 1..d coordinate order.
#[derive(Clone)]
pub struct RosenblattTransform {
    provider: ConditionalProvider,
    residual_tol: f64,
    interval_tol: f64,
    max_iter: usize,
}

impl RosenblattTransform {
    pub fn new(provider: ConditionalProvider) -> Result<Self> {
        if let ConditionalProvider::Generic2d { density, .. } = &provider {
            if density.dimension() != 2 {
                return Err(PceError::Unsupported(
                    "generic quadrature conditionals are limited to d = 2".into(),
                ));
            }
        }
        Ok(RosenblattTransform {
            provider,
            residual_tol: 1e-12,
            interval_tol: 1e-13,
            max_iter: 200,
        })
    }

    pub fn dimension(&self) -> usize {
        match &self.provider {
            ConditionalProvider::Independent(t) => t.dimension(),
            ConditionalProvider::Copula(c) => c.dimension(),
            ConditionalProvider::Generic2d { .. } => 2,
        }
    }

    fn coordinate_bracket(&self, i: usize) -> (f64, f64) {
        match &self.provider {
            ConditionalProvider::Independent(t) => t.marginals()[i].support(),
            ConditionalProvider::Copula(c) => c.marginals()[i].support(),
            ConditionalProvider::Generic2d { density, .. } => density.support()[i],
        }
    }

    /// F_{i|i−1,…,1}(z_i | z_1..z_{i−1}).
    pub fn conditional_cdf(&self, i: usize, z_prefix: &[f64], z_i: f64) -> f64 {
        match &self.provider {
            ConditionalProvider::Independent(t) => t.marginals()[i].cdf(z_i),
            ConditionalProvider::Copula(c) => {
                let f = c.marginals()[i].cdf(z_i);
                if f <= 0.0 {
                    return 0.0;
                }
                if f >= 1.0 {
                    return 1.0;
                }
                let score = norm_quantile(f);
                if i == 0 {
                    return f;
                }
                let prefix_scores = c.gaussian_scores(z_prefix);
                let (mean, sd) = c.conditional_score_params(i, &prefix_scores);
                norm_cdf((score - mean) / sd)
            }
            ConditionalProvider::Generic2d {
                density,
                quad_order,
            } => {
                let support = density.support();
                if i == 0 {
                    let numer =
                        marginal_mass_2d(density.as_ref(), &support, *quad_order, z_i, None);
                    let denom = marginal_mass_2d(
                        density.as_ref(),
                        &support,
                        *quad_order,
                        support[0].1,
                        None,
                    );
                    (numer / denom).clamp(0.0, 1.0)
                } else {
                    let z1 = z_prefix[0];
                    let numer =
                        marginal_mass_2d(density.as_ref(), &support, *quad_order, z_i, Some(z1));
                    let denom = marginal_mass_2d(
                        density.as_ref(),
                        &support,
                        *quad_order,
                        support[1].1,
                        Some(z1),
                    );
                    (numer / denom).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Sequential conditional-CDF evaluation into the unit cube.
    pub fn forward(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dimension();
        (0..d)
            .map(|i| self.conditional_cdf(i, &z[..i], z[i]).clamp(0.0, 1.0))
            .collect()
    }

    /// Invert each conditional CDF by bisection in turn.
    pub fn inverse(&self, u: &[f64]) -> Result<Vec<f64>> {
        let d = self.dimension();
        let mut z = vec![0.0; d];
        for i in 0..d {
            let ui = u[i];
            if !(0.0..=1.0).contains(&ui) {
                return Err(PceError::InvalidArgument(format!(
                    "u[{i}] = {ui} outside [0,1]"
                )));
            }
            let (mut lo, mut hi) = self.coordinate_bracket(i);
            // expand an unbounded bracket until it straddles the target
            if !lo.is_finite() || !hi.is_finite() {
                let mut radius = 1.0;
                for _ in 0..80 {
                    lo = -radius;
                    hi = radius;
                    let f_lo = self.conditional_cdf(i, &z[..i], lo);
                    let f_hi = self.conditional_cdf(i, &z[..i], hi);
                    if f_lo < ui && ui < f_hi {
                        break;
                    }
                    radius *= 2.0;
                }
            }
            let mut mid = 0.5 * (lo + hi);
            let mut residual = f64::INFINITY;
            let mut converged = false;
            for _ in 0..self.max_iter {
                mid = 0.5 * (lo + hi);
                let f_mid = self.conditional_cdf(i, &z[..i], mid);
                residual = (f_mid - ui).abs();
                if residual < self.residual_tol || (hi - lo) < self.interval_tol {
                    converged = true;
                    break;
                }
                if f_mid < ui {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if !converged {
                return Err(PceError::NonConvergence(format!(
                    "coordinate {i}: residual {residual:.3e} after {} bisection steps",
                    self.max_iter
                )));
            }
            z[i] = mid;
        }
        Ok(z)
    }
}

/// ∫ density over [lo1, cap]×support2 (z1 = None) or ∫_{lo2}^{cap}
/// density(z1, t) dt (z1 = Some).
fn marginal_mass_2d(
    density: &dyn JointDensity,
    support: &[(f64, f64)],
    order: usize,
    cap: f64,
    z1: Option<f64>,
) -> f64 {
    let rule = crate::univariate::PolyFamily::Legendre
        .gauss_rule(order)
        .expect("Gauss-Legendre rule");
    match z1 {
        Some(z1) => {
            let (lo, _) = support[1];
            let len = cap - lo;
            if len <= 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for q in 0..rule.len() {
                let t = lo + len * rule.nodes[(q, 0)];
                acc += rule.weights[q] * density.density(&[z1, t]);
            }
            acc * len
        }
        None => {
            let (lo1, _) = support[0];
            let (lo2, hi2) = support[1];
            let len1 = cap - lo1;
            if len1 <= 0.0 {
                return 0.0;
            }
            let len2 = hi2 - lo2;
            let mut acc = 0.0;
            for q in 0..rule.len() {
                let x = lo1 + len1 * rule.nodes[(q, 0)];
                let mut inner = 0.0;
                for p in 0..rule.len() {
                    let y = lo2 + len2 * rule.nodes[(p, 0)];
                    inner += rule.weights[p] * density.density(&[x, y]);
                }
                acc += rule.weights[q] * inner;
            }
            acc * len1 * len2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn beta25_copula(rho: f64) -> GaussianCopulaDensity {
        GaussianCopulaDensity::new(
            vec![Marginal::beta(2.0, 5.0).unwrap(); 2],
            CorrelationMatrix::equicorrelated(2, rho).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn normal_marginals_need_no_correction() {
        let marginals = vec![Marginal::std_normal(); 2];
        let r_z = CorrelationMatrix::equicorrelated(2, 0.63).unwrap();
        let r_v = nataf_correlation_solve(&r_z, &marginals).unwrap();
        assert_abs_diff_eq!(r_v.matrix()[(0, 1)], 0.63, epsilon = 1e-10);
    }

    #[test]
    fn zero_correlation_is_a_fixed_point() {
        let marginals = vec![Marginal::beta(2.0, 5.0).unwrap(); 3];
        let r_z = CorrelationMatrix::identity(3);
        let r_v = nataf_correlation_solve(&r_z, &marginals).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(r_v.matrix()[(i, j)], expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn beta_correlation_round_trips_through_sampling() {
        // lighter version of the Monte-Carlo round-trip oracle; the full
        // n = 10^6 ±0.01 check runs in the acceptance suite
        let marginals = vec![Marginal::beta(2.0, 5.0).unwrap(); 2];
        let r_z = CorrelationMatrix::equicorrelated(2, 0.5).unwrap();
        let r_v = nataf_correlation_solve(&r_z, &marginals).unwrap();
        assert!(r_v.matrix()[(0, 1)] > 0.5, "correction should exceed target");
        let copula = GaussianCopulaDensity::new(marginals, r_v).unwrap();
        let n = 200_000;
        let s = copula
            .sample(n, &mut ChaCha8Rng::seed_from_u64(99))
            .unwrap();
        let m1 = s.column(0).sum() / n as f64;
        let m2 = s.column(1).sum() / n as f64;
        let mut cov = 0.0;
        let mut v1 = 0.0;
        let mut v2 = 0.0;
        for r in 0..n {
            cov += (s[(r, 0)] - m1) * (s[(r, 1)] - m2);
            v1 += (s[(r, 0)] - m1).powi(2);
            v2 += (s[(r, 1)] - m2).powi(2);
        }
        let pearson = cov / (v1 * v2).sqrt();
        assert!((pearson - 0.5).abs() < 0.02, "pearson {pearson}");
    }

    #[test]
    fn quadrature_order_doubling_agrees() {
        // the order-50 inner integral is converged: recompute the achieved
        // correlation with order 100 and compare
        let marginals = vec![Marginal::beta(2.0, 5.0).unwrap(); 2];
        let r_z = CorrelationMatrix::equicorrelated(2, 0.5).unwrap();
        let r_v = nataf_correlation_solve(&r_z, &marginals).unwrap();
        let r = r_v.matrix()[(0, 1)];
        for order in [50usize, 100] {
            let rule = crate::univariate::PolyFamily::Hermite
                .gauss_rule(order)
                .unwrap();
            let m = &marginals[0];
            let (mu, sd) = (m.mean(), m.variance().sqrt());
            let s = |x: f64| (m.quantile(norm_cdf(x)) - mu) / sd;
            let c = (1.0 - r * r).sqrt();
            let mut acc = 0.0;
            for q in 0..rule.len() {
                let x = rule.nodes[(q, 0)];
                for p in 0..rule.len() {
                    let y = rule.nodes[(p, 0)];
                    acc += rule.weights[q] * rule.weights[p] * s(x) * s(r * x + c * y);
                }
            }
            assert!((acc - 0.5).abs() < 1e-9, "order {order}: {acc}");
        }
    }

    #[test]
    fn infeasible_correlation_is_detected() {
        // opposite extreme skews make strong positive correlation unattainable
        let marginals = vec![
            Marginal::beta(0.05, 8.0).unwrap(),
            Marginal::beta(8.0, 0.05).unwrap(),
        ];
        let r_z = CorrelationMatrix::equicorrelated(2, 0.999).unwrap();
        assert!(matches!(
            nataf_correlation_solve(&r_z, &marginals),
            Err(PceError::InfeasibleCorrelation { .. })
        ));
    }

    #[test]
    fn identity_copula_on_normals_is_identity_map() {
        let t = NatafTransform::from_copula(
            &GaussianCopulaDensity::new(
                vec![Marginal::std_normal(); 2],
                CorrelationMatrix::identity(2),
            )
            .unwrap(),
            NatafTarget::Gauss,
        );
        let z = [0.37, -1.42];
        let u = t.forward(&z).unwrap();
        assert_abs_diff_eq!(u[0], z[0], epsilon = 1e-12);
        assert_abs_diff_eq!(u[1], z[1], epsilon = 1e-12);
    }

    #[test]
    fn one_dimensional_uniform_target_is_rescaled_cdf() {
        let copula = GaussianCopulaDensity::new(
            vec![Marginal::beta(2.0, 5.0).unwrap()],
            CorrelationMatrix::identity(1),
        )
        .unwrap();
        let t = NatafTransform::from_copula(&copula, NatafTarget::Uniform);
        for &z in &[0.05, 0.3, 0.71] {
            let u = t.forward(&[z]).unwrap();
            let f = Marginal::beta(2.0, 5.0).unwrap().cdf(z);
            assert_abs_diff_eq!(u[0], 2.0 * f - 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nataf_boundary_is_an_error() {
        let t = NatafTransform::from_copula(&beta25_copula(-0.9), NatafTarget::Gauss);
        assert!(matches!(t.forward(&[0.0, 0.5]), Err(PceError::Boundary)));
        assert!(matches!(t.forward(&[0.5, 1.0]), Err(PceError::Boundary)));
    }

    #[test]
    fn nataf_round_trip_on_samples() {
        for target in [NatafTarget::Gauss, NatafTarget::Uniform] {
            let copula = beta25_copula(-0.9);
            let t = NatafTransform::from_copula(&copula, target);
            let s = copula
                .sample(1000, &mut ChaCha8Rng::seed_from_u64(31))
                .unwrap();
            for r in 0..s.nrows() {
                let z = [s[(r, 0)], s[(r, 1)]];
                let u = t.forward(&z).unwrap();
                let back = t.inverse(&u);
                assert!(
                    (back[0] - z[0]).abs() < 1e-10 && (back[1] - z[1]).abs() < 1e-10,
                    "row {r}: {z:?} -> {back:?}"
                );
            }
        }
    }

    #[test]
    fn nataf_pushforward_is_standard_normal() {
        let copula = beta25_copula(-0.9);
        let t = NatafTransform::from_copula(&copula, NatafTarget::Gauss);
        let n = 100_000;
        let s = copula.sample(n, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let u = t.forward_matrix(&s).unwrap();
        for c in 0..2 {
            let mut col: Vec<f64> = u.column(c).iter().cloned().collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut stat: f64 = 0.0;
            for (i, &x) in col.iter().enumerate() {
                let f = norm_cdf(x);
                stat = stat.max((f - i as f64 / n as f64).abs());
                stat = stat.max(((i + 1) as f64 / n as f64 - f).abs());
            }
            assert!(stat < 1.62762 / (n as f64).sqrt(), "dim {c}: KS {stat}");
        }
    }

    #[test]
    fn rosenblatt_independent_is_componentwise_cdf() {
        let tensor = TensorDensity::iid_beta(2, 2.0, 5.0).unwrap();
        let marginal = Marginal::beta(2.0, 5.0).unwrap();
        let t = RosenblattTransform::new(ConditionalProvider::Independent(tensor)).unwrap();
        let z = [0.22, 0.61];
        let u = t.forward(&z);
        assert_abs_diff_eq!(u[0], marginal.cdf(z[0]), epsilon = 1e-14);
        assert_abs_diff_eq!(u[1], marginal.cdf(z[1]), epsilon = 1e-14);
        let back = t.inverse(&u).unwrap();
        assert_abs_diff_eq!(back[0], z[0], epsilon = 1e-10);
        assert_abs_diff_eq!(back[1], z[1], epsilon = 1e-10);
    }

    #[test]
    fn copula_conditional_matches_quadrature_marginalization() {
        let copula = beta25_copula(-0.9);
        let analytic =
            RosenblattTransform::new(ConditionalProvider::Copula(copula.clone())).unwrap();
        let generic = RosenblattTransform::new(ConditionalProvider::Generic2d {
            density: Arc::new(copula),
            quad_order: 150,
        })
        .unwrap();
        for &z in &[[0.2, 0.3], [0.5, 0.12], [0.34, 0.56], [0.8, 0.05]] {
            let ua = analytic.forward(&z);
            let ug = generic.forward(&z);
            assert!((ua[0] - ug[0]).abs() < 1e-6, "{ua:?} vs {ug:?}");
            assert!((ua[1] - ug[1]).abs() < 1e-6, "{ua:?} vs {ug:?}");
        }
    }

    #[test]
    fn rosenblatt_output_stays_in_unit_cube() {
        let copula = beta25_copula(-0.9);
        let t = RosenblattTransform::new(ConditionalProvider::Copula(copula.clone())).unwrap();
        let s = copula
            .sample(500, &mut ChaCha8Rng::seed_from_u64(8))
            .unwrap();
        for r in 0..s.nrows() {
            let u = t.forward(&[s[(r, 0)], s[(r, 1)]]);
            assert!(u.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn rosenblatt_round_trip_on_copula_density() {
        let copula = beta25_copula(-0.9);
        let t = RosenblattTransform::new(ConditionalProvider::Copula(copula.clone())).unwrap();
        let s = copula
            .sample(100, &mut ChaCha8Rng::seed_from_u64(12))
            .unwrap();
        let mut worst: f64 = 0.0;
        for r in 0..s.nrows() {
            let z = [s[(r, 0)], s[(r, 1)]];
            let u = t.forward(&z);
            let back = t.inverse(&u).unwrap();
            worst = worst
                .max((back[0] - z[0]).abs())
                .max((back[1] - z[1]).abs());
        }
        assert!(worst < 1e-8, "max round-trip error {worst}");
    }

    #[test]
    fn rosenblatt_inverse_is_monotone_per_coordinate() {
        let copula = beta25_copula(-0.9);
        let t = RosenblattTransform::new(ConditionalProvider::Copula(copula)).unwrap();
        let base = t.inverse(&[0.4, 0.5]).unwrap();
        let bigger_first = t.inverse(&[0.6, 0.5]).unwrap();
        let bigger_second = t.inverse(&[0.4, 0.8]).unwrap();
        assert!(bigger_first[0] > base[0]);
        assert!(bigger_second[1] > base[1]);
    }

    #[test]
    fn generic_provider_rejects_higher_dimensions() {
        let tensor = TensorDensity::iid_beta(3, 2.0, 2.0).unwrap();
        let result = RosenblattTransform::new(ConditionalProvider::Generic2d {
            density: Arc::new(tensor),
            quad_order: 50,
        });
        assert!(matches!(result, Err(PceError::Unsupported(_))));
    }
}
