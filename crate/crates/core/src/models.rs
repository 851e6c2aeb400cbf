//! Black-box test models: the oscillatory Genz function, a surface-reaction
//! ODE, a 1-d random-diffusivity boundary value problem, and a ridge-function
//! wrapper projecting a high-dimensional cube onto the reaction model.

use crate::error::{PceError, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Oscillatory Genz function f(z) = cos(2πe + Σ c_i z_i) on the unit cube.
#[derive(Debug, Clone)]
pub struct GenzSpec {
    pub coefficients: Vec<f64>,
    pub shift: f64,
    pub raw_draws: Vec<f64>,
    pub seed: u64,
}

impl GenzSpec {
    pub fn dimension(&self) -> usize {
        self.coefficients.len()
    }
}

/// Draw the shift e and raw coefficients b iid uniform and scale
/// c_i = 40 b_i / (d Σ b_j), so Σ c_i = 40/d.
pub fn make_genz_spec(dimension: usize, seed: u64) -> Result<GenzSpec> {
    if dimension == 0 {
        return Err(PceError::InvalidArgument("dimension must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: f64 = rng.random();
    let mut raw: Vec<f64> = (0..dimension).map(|_| rng.random()).collect();
    while raw.iter().sum::<f64>() == 0.0 {
        raw = (0..dimension).map(|_| rng.random()).collect();
    }
    let sum: f64 = raw.iter().sum();
    let coefficients = raw
        .iter()
        .map(|&b| 40.0 * b / (dimension as f64 * sum))
        .collect();
    Ok(GenzSpec {
        coefficients,
        shift,
        raw_draws: raw,
        seed,
    })
}

pub fn genz_oscillatory(spec: &GenzSpec, z: &[f64]) -> f64 {
    let phase: f64 = spec
        .coefficients
        .iter()
        .zip(z)
        .map(|(c, zi)| c * zi)
        .sum();
    (2.0 * std::f64::consts::PI * spec.shift + phase).cos()
}

/// Surface-reaction model of two species competing for vacant sites, with
/// the vacant fraction s = 1 − u₁ − u₂ − u₃. Rates a and b are driven by the
/// model inputs; c..f and the initial coverage are fixed constants.
#[derive(Debug, Clone)]
pub struct ChemistrySpec {
    pub decay_c: f64,
    pub reaction_d: f64,
    pub adsorb_e: f64,
    pub decay_f: f64,
    pub initial: [f64; 3],
    pub t_final: f64,
    pub dt: f64,
}

impl Default for ChemistrySpec {
    fn default() -> Self {
        ChemistrySpec {
            decay_c: 1.0,
            reaction_d: 1.0,
            adsorb_e: 0.1,
            decay_f: 0.1,
            initial: [1.0, 0.0, 0.0],
            t_final: 50.0,
            dt: 1e-3,
        }
    }
}

/// Rate map from the banana-domain inputs: a = 2(z₁+3)/3, b = 30(z₂+2)/7 + 5.
pub fn chemistry_rates(z: &[f64]) -> (f64, f64) {
    (2.0 * (z[0] + 3.0) / 3.0, 30.0 * (z[1] + 2.0) / 7.0 + 5.0)
}

/// Mass fraction u₁ at t = T for the given rates, integrated by fixed-step
/// classical RK4.
pub fn chemistry_qoi_rates(spec: &ChemistrySpec, a: f64, b: f64) -> Result<f64> {
    let rhs = |u: [f64; 3]| -> [f64; 3] {
        let s = 1.0 - u[0] - u[1] - u[2];
        [
            a * s - spec.decay_c * u[0] - 4.0 * spec.reaction_d * u[0] * u[1],
            2.0 * b * s * s - 4.0 * spec.reaction_d * u[0] * u[1],
            spec.adsorb_e * s - spec.decay_f * u[2],
        ]
    };
    let mut u = spec.initial;
    let steps = (spec.t_final / spec.dt).round() as usize;
    let h = spec.dt;
    for _ in 0..steps {
        let k1 = rhs(u);
        let k2 = rhs(add(u, scale(k1, 0.5 * h)));
        let k3 = rhs(add(u, scale(k2, 0.5 * h)));
        let k4 = rhs(add(u, scale(k3, h)));
        for i in 0..3 {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !u.iter().all(|v| v.is_finite()) {
            return Err(PceError::Numeric(
                "chemistry integration blew up to non-finite state".into(),
            ));
        }
    }
    Ok(u[0])
}

/// QoI as a function of the banana-domain input z ∈ [−3,3]×[−2,6].
pub fn chemistry_qoi(spec: &ChemistrySpec, z: &[f64]) -> Result<f64> {
    let (a, b) = chemistry_rates(z);
    chemistry_qoi_rates(spec, a, b)
}

fn add(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

fn scale(u: [f64; 3], s: f64) -> [f64; 3] {
    [u[0] * s, u[1] * s, u[2] * s]
}

/// 1-d diffusion with a log-normal-style random diffusivity field and
/// homogeneous Dirichlet boundary conditions; the QoI is u(0.5).
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    pub dimension: usize,
    pub correlation_length: f64,
    pub grid_points: usize,
}

impl DiffusionSpec {
    pub fn new(dimension: usize, correlation_length: f64) -> Result<Self> {
        if dimension == 0 || !(correlation_length > 0.0) {
            return Err(PceError::InvalidArgument(
                "diffusion model needs d >= 1 and L_c > 0".into(),
            ));
        }
        Ok(DiffusionSpec {
            dimension,
            correlation_length,
            grid_points: 201,
        })
    }

    fn length_scales(&self) -> (f64, f64) {
        let l_p = (2.0 * self.correlation_length).max(1.0);
        (self.correlation_length / l_p, l_p)
    }

    /// Diffusivity k(x, z) = 0.5 + exp(1 + z₁ (√(πL)/2)^{1/2}
    /// + Σ_{k≥2} λ_k ξ_k(x) z_k); the sine/cosine pair k shares the
    /// frequency index ⌊k/2⌋.
    pub fn diffusivity(&self, x: f64, z: &[f64]) -> f64 {
        let (l, l_p) = self.length_scales();
        let sqrt_pi_l = (std::f64::consts::PI * l).sqrt();
        let mut log_term = 1.0 + z[0] * (sqrt_pi_l / 2.0).sqrt();
        for k in 2..=self.dimension {
            let freq = (k / 2) as f64;
            let lambda = sqrt_pi_l.sqrt()
                * (-(freq * std::f64::consts::PI * l).powi(2) / 8.0).exp();
            let arg = freq * std::f64::consts::PI * x / l_p;
            let xi = if k % 2 == 0 { arg.sin() } else { arg.cos() };
            log_term += lambda * xi * z[k - 1];
        }
        0.5 + log_term.exp()
    }
}

/// Solve (k u')' = forcing on (0,1) with u(0) = u(1) = 0 by conservative
/// central finite differences; returns the grid solution including the
/// boundary values.
pub fn solve_diffusion(
    k_fn: impl Fn(f64) -> f64,
    forcing: impl Fn(f64) -> f64,
    grid_points: usize,
) -> Result<Vec<f64>> {
    if grid_points < 3 {
        return Err(PceError::InvalidArgument(
            "grid needs at least 3 points".into(),
        ));
    }
    let n = grid_points;
    let h = 1.0 / (n - 1) as f64;
    let interior = n - 2;
    // flux-form stencil with midpoint diffusivities
    let mut sub = vec![0.0; interior];
    let mut diag = vec![0.0; interior];
    let mut sup = vec![0.0; interior];
    let mut rhs = vec![0.0; interior];
    for i in 0..interior {
        let x = (i + 1) as f64 * h;
        let k_minus = k_fn(x - 0.5 * h);
        let k_plus = k_fn(x + 0.5 * h);
        sub[i] = k_minus / (h * h);
        sup[i] = k_plus / (h * h);
        diag[i] = -(k_minus + k_plus) / (h * h);
        rhs[i] = forcing(x);
    }
    // Thomas algorithm
    for i in 1..interior {
        let w = sub[i] / diag[i - 1];
        if !w.is_finite() {
            return Err(PceError::Numeric("singular diffusion system".into()));
        }
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut u = vec![0.0; n];
    u[n - 2] = rhs[interior - 1] / diag[interior - 1];
    for i in (0..interior - 1).rev() {
        u[i + 1] = (rhs[i] - sup[i] * u[i + 2]) / diag[i];
    }
    Ok(u)
}

/// QoI u(0.5; z) with forcing cos(2πx), linearly interpolated off-grid.
pub fn diffusion_qoi(spec: &DiffusionSpec, z: &[f64]) -> Result<f64> {
    if z.len() != spec.dimension {
        return Err(PceError::InvalidArgument(format!(
            "{} inputs for a {}-dimensional diffusivity",
            z.len(),
            spec.dimension
        )));
    }
    let u = solve_diffusion(
        |x| spec.diffusivity(x, z),
        |x| (2.0 * std::f64::consts::PI * x).cos(),
        spec.grid_points,
    )?;
    let h = 1.0 / (spec.grid_points - 1) as f64;
    let pos = 0.5 / h;
    let i = (pos.floor() as usize).min(spec.grid_points - 2);
    let t = pos - i as f64;
    Ok(u[i] * (1.0 - t) + u[i + 1] * t)
}

/// Ridge wrapper: f(y) = g(A y) for y in the cube [−1,1]^d, with A having
/// orthonormal rows. The projected point lies in a zonotope; its bounding
/// box is affinely rescaled onto the reaction model's input domain.
pub struct RidgeSpec {
    projection: DMatrix<f64>,
    chemistry: ChemistrySpec,
    box_halfwidths: Vec<f64>,
    clamp_events: AtomicUsize,
}

/// Target domain of the inner reaction model.
const CHEMISTRY_DOMAIN: [(f64, f64); 2] = [(-3.0, 3.0), (-2.0, 6.0)];

impl RidgeSpec {
    /// Random projection with orthonormal rows (Gram-Schmidt of a seeded
    /// Gaussian matrix).
    pub fn random(ambient_dim: usize, reduced_dim: usize, seed: u64) -> Result<Self> {
        if reduced_dim == 0 || reduced_dim > ambient_dim {
            return Err(PceError::InvalidArgument(format!(
                "cannot project {ambient_dim} dims onto {reduced_dim}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DMatrix::from_fn(reduced_dim, ambient_dim, |_, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal)
        });
        for i in 0..reduced_dim {
            for j in 0..i {
                let dot = a.row(i).dot(&a.row(j));
                for c in 0..ambient_dim {
                    a[(i, c)] -= dot * a[(j, c)];
                }
            }
            let norm = a.row(i).norm();
            if norm < 1e-12 {
                return Err(PceError::Numeric(
                    "degenerate random projection draw".into(),
                ));
            }
            for c in 0..ambient_dim {
                a[(i, c)] /= norm;
            }
        }
        Self::new(a)
    }

    pub fn new(projection: DMatrix<f64>) -> Result<Self> {
        let s = projection.nrows();
        if s != 2 {
            return Err(PceError::InvalidArgument(
                "the inner reaction model takes 2 inputs".into(),
            ));
        }
        let gram = &projection * projection.transpose();
        if (gram - DMatrix::identity(s, s)).abs().max() > 1e-12 {
            return Err(PceError::InvalidArgument(
                "projection rows must be orthonormal".into(),
            ));
        }
        let box_halfwidths = (0..s)
            .map(|i| projection.row(i).iter().map(|v| v.abs()).sum())
            .collect();
        Ok(RidgeSpec {
            projection,
            chemistry: ChemistrySpec::default(),
            box_halfwidths,
            clamp_events: AtomicUsize::new(0),
        })
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn ambient_dimension(&self) -> usize {
        self.projection.ncols()
    }

    pub fn reduced_dimension(&self) -> usize {
        self.projection.nrows()
    }

    /// Bounding box of the zonotope A·[−1,1]^d.
    pub fn zonotope_box(&self) -> Vec<(f64, f64)> {
        self.box_halfwidths.iter().map(|&w| (-w, w)).collect()
    }

    /// Project a cube point into the zonotope.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        (0..self.reduced_dimension())
            .map(|i| {
                self.projection
                    .row(i)
                    .iter()
                    .zip(y)
                    .map(|(a, yi)| a * yi)
                    .sum()
            })
            .collect()
    }

    /// Inner model on zonotope coordinates: rescale the zonotope bounding
    /// box onto the reaction domain and evaluate the reaction QoI. Points
    /// outside the box are clamped and counted.
    pub fn inner_qoi(&self, projected: &[f64]) -> Result<f64> {
        let mut z = [0.0; 2];
        for i in 0..2 {
            let w = self.box_halfwidths[i];
            let (lo, hi) = CHEMISTRY_DOMAIN[i];
            let mut t = projected[i] / w;
            if !(-1.0..=1.0).contains(&t) {
                self.clamp_events.fetch_add(1, Ordering::Relaxed);
                t = t.clamp(-1.0, 1.0);
            }
            z[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
        }
        chemistry_qoi(&self.chemistry, &z)
    }

    /// How many evaluations needed clamping into the zonotope box.
    pub fn clamp_count(&self) -> usize {
        self.clamp_events.load(Ordering::Relaxed)
    }
}

/// f(y) = g(A y) on the ambient cube.
pub fn ridge_qoi(spec: &RidgeSpec, y: &[f64]) -> Result<f64> {
    if y.len() != spec.ambient_dimension() {
        return Err(PceError::InvalidArgument(format!(
            "{} inputs for ambient dimension {}",
            y.len(),
            spec.ambient_dimension()
        )));
    }
    let projected = spec.project(y);
    spec.inner_qoi(&projected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn genz_with_zero_coefficients_is_constant() {
        let spec = GenzSpec {
            coefficients: vec![0.0, 0.0],
            shift: 0.3,
            raw_draws: vec![0.0, 0.0],
            seed: 0,
        };
        let expected = (2.0 * std::f64::consts::PI * 0.3).cos();
        assert_abs_diff_eq!(genz_oscillatory(&spec, &[0.4, 0.9]), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(genz_oscillatory(&spec, &[0.0, 0.0]), expected, epsilon = 1e-15);
    }

    #[test]
    fn genz_pinned_value() {
        // b = (1,1), e = 0 in two dimensions gives c = (10,10)
        let spec = GenzSpec {
            coefficients: vec![10.0, 10.0],
            shift: 0.0,
            raw_draws: vec![1.0, 1.0],
            seed: 0,
        };
        assert_abs_diff_eq!(
            genz_oscillatory(&spec, &[0.1, 0.2]),
            3.0f64.cos(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(3.0f64.cos(), -0.9899924966004454, epsilon = 1e-15);
    }

    #[test]
    fn genz_coefficients_sum_to_forty_over_d() {
        for d in [1usize, 2, 3, 10] {
            for seed in 0..5u64 {
                let spec = make_genz_spec(d, seed).unwrap();
                let sum: f64 = spec.coefficients.iter().sum();
                assert_abs_diff_eq!(sum, 40.0 / d as f64, epsilon = 1e-12);
                assert!(spec.coefficients.iter().all(|&c| c > 0.0));
                assert!((0.0..=1.0).contains(&spec.shift));
            }
        }
    }

    #[test]
    fn genz_spec_is_seed_deterministic() {
        let a = make_genz_spec(5, 42).unwrap();
        let b = make_genz_spec(5, 42).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
        assert_eq!(a.shift, b.shift);
    }

    #[test]
    fn zero_rates_freeze_the_chemistry_state() {
        let spec = ChemistrySpec {
            decay_c: 0.0,
            reaction_d: 0.0,
            adsorb_e: 0.0,
            decay_f: 0.0,
            initial: [0.3, 0.2, 0.1],
            t_final: 5.0,
            dt: 1e-3,
        };
        let u1 = chemistry_qoi_rates(&spec, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(u1, 0.3, epsilon = 1e-14);
    }

    #[test]
    fn decoupled_linear_decay_matches_exponential() {
        // a = b = 0 and d = 0 reduce u₁' to −c u₁
        let spec = ChemistrySpec {
            decay_c: 1.0,
            reaction_d: 0.0,
            adsorb_e: 0.1,
            decay_f: 0.1,
            initial: [0.8, 0.1, 0.0],
            t_final: 10.0,
            dt: 1e-3,
        };
        let u1 = chemistry_qoi_rates(&spec, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(u1, 0.8 * (-10.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn chemistry_reference_values() {
        // frozen from an independent fixed-step RK4 implementation; each
        // value is step-halving converged well below 1e-8
        let spec = ChemistrySpec::default();
        let references = [
            ([0.0, 0.0], 0.025702913066925983),
            ([3.0, 6.0], 0.034950612537646315),
            ([1.5, 2.0], 0.03545926918901932),
            ([-1.0, 5.0], 0.004150902345731824),
            ([2.0, 1.0], 0.05636105152047029),
        ];
        for (z, expected) in references {
            let got = chemistry_qoi(&spec, &z).unwrap();
            assert_abs_diff_eq!(got, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn chemistry_step_halving_converges() {
        let coarse = ChemistrySpec::default();
        let fine = ChemistrySpec {
            dt: 5e-4,
            ..ChemistrySpec::default()
        };
        for z in [[0.0, 0.0], [2.0, 1.0]] {
            let a = chemistry_qoi(&coarse, &z).unwrap();
            let b = chemistry_qoi(&fine, &z).unwrap();
            assert!((a - b).abs() < 1e-8, "z = {z:?}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let u = solve_diffusion(|_| 1.0, |_| 0.0, 201).unwrap();
        assert!(u.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn constant_diffusivity_matches_closed_form() {
        // (k u')' = cos(2πx), u(0)=u(1)=0 → u = (1 − cos(2πx))/(4π²k)
        let k = 2.5;
        let n = 201;
        let u = solve_diffusion(|_| k, |x| (2.0 * std::f64::consts::PI * x).cos(), n).unwrap();
        let h = 1.0 / (n - 1) as f64;
        let mut worst: f64 = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            let x = i as f64 * h;
            let exact = (1.0 - (2.0 * std::f64::consts::PI * x).cos())
                / (4.0 * std::f64::consts::PI.powi(2) * k);
            worst = worst.max((ui - exact).abs());
        }
        // second-order stencil: error O(h²)
        assert!(worst < 2.0 * h * h, "max error {worst}");
    }

    #[test]
    fn diffusion_grid_refinement_is_converged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coarse = DiffusionSpec::new(11, 0.5).unwrap();
        let fine = DiffusionSpec {
            grid_points: 401,
            ..coarse.clone()
        };
        for _ in 0..5 {
            let z: Vec<f64> = (0..11).map(|_| rng.random::<f64>()).collect();
            let a = diffusion_qoi(&coarse, &z).unwrap();
            let b = diffusion_qoi(&fine, &z).unwrap();
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn diffusivity_stays_above_half() {
        let spec = DiffusionSpec::new(41, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let z: Vec<f64> = (0..41).map(|_| rng.random::<f64>()).collect();
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                assert!(spec.diffusivity(x, &z) > 0.5);
            }
        }
    }

    #[test]
    fn identity_projection_reduces_to_inner_model() {
        let spec = RidgeSpec::new(DMatrix::identity(2, 2)).unwrap();
        let y = [0.3, -0.8];
        let direct = spec.inner_qoi(&[0.3, -0.8]).unwrap();
        assert_abs_diff_eq!(ridge_qoi(&spec, &y).unwrap(), direct, epsilon = 1e-15);
    }

    #[test]
    fn ridge_is_constant_along_the_null_space() {
        let spec = RidgeSpec::random(6, 2, 9).unwrap();
        let y = [0.2, -0.4, 0.1, 0.6, -0.3, 0.05];
        // project a random direction onto null(A)
        let mut n = vec![0.08, -0.02, 0.05, 0.01, -0.07, 0.03];
        for i in 0..2 {
            let dot: f64 = spec
                .projection()
                .row(i)
                .iter()
                .zip(&n)
                .map(|(a, v)| a * v)
                .sum();
            for (c, nv) in n.iter_mut().enumerate() {
                *nv -= dot * spec.projection()[(i, c)];
            }
        }
        let shifted: Vec<f64> = y.iter().zip(&n).map(|(a, b)| a + b).collect();
        let f0 = ridge_qoi(&spec, &y).unwrap();
        let f1 = ridge_qoi(&spec, &shifted).unwrap();
        assert_abs_diff_eq!(f0, f1, epsilon = 1e-12);
    }

    #[test]
    fn random_projection_is_orthonormal_and_deterministic() {
        let a = RidgeSpec::random(20, 2, 123).unwrap();
        let b = RidgeSpec::random(20, 2, 123).unwrap();
        assert_eq!(a.projection(), b.projection());
        let gram = a.projection() * a.projection().transpose();
        assert!((gram - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn out_of_box_projection_is_clamped_and_counted() {
        let spec = RidgeSpec::new(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(spec.clamp_count(), 0);
        let _ = spec.inner_qoi(&[1.5, 0.0]).unwrap();
        assert_eq!(spec.clamp_count(), 1);
    }
}
