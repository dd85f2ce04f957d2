//! Radial grids, sampled radial functions and the quadrature behind every
//! integral over R^3 (computed as 4π∫₀^{r_max} f(r) r² dr).

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const FOUR_PI: f64 = 4.0 * PI;

/// Stretching parameter of the log scheme, r = r_max·sinh(cξ)/sinh(c).
const LOG_STRETCH: f64 = 6.0;

/// Gregory end correction of order six (trapezoid multipliers for the last five nodes).
const GREGORY: [f64; 5] = [95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0, 793.0 / 720.0, 157.0 / 160.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Uniform,
    Log,
}

impl std::str::FromStr for Scheme {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Scheme::Uniform),
            "log" => Ok(Scheme::Log),
            other => Err(LabError::InvalidArgument(format!("unknown grid scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub n: usize,
    pub r_max: f64,
    pub scheme: Scheme,
    pub nodes: Vec<f64>,
    /// Weights for ∫₀^{r_max} f(r) r² dr.
    pub weights: Vec<f64>,
    /// Interval couplings m_i/d_i² for the interval [r_{i-1}, r_i], i = 1..n-1,
    /// where m_i = ∫ r² dr over the interval and d_i its length.
    couplings: Vec<f64>,
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64, scheme: Scheme) -> Result<Arc<Self>> {
        if n < 64 {
            return Err(LabError::InvalidGrid(format!("n = {n} < 64")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(LabError::InvalidGrid(format!("r_max = {r_max} must be positive")));
        }
        let h = 1.0 / n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n);
        for i in 1..=n {
            let xi = i as f64 * h;
            match scheme {
                Scheme::Uniform => {
                    nodes.push(r_max * xi);
                    jac.push(r_max);
                }
                Scheme::Log => {
                    let s = LOG_STRETCH.sinh();
                    nodes.push(r_max * (LOG_STRETCH * xi).sinh() / s);
                    jac.push(r_max * LOG_STRETCH * (LOG_STRETCH * xi).cosh() / s);
                }
            }
        }
        nodes[n - 1] = r_max;

        let mut mult = vec![1.0; n];
        for (k, g) in GREGORY.iter().enumerate() {
            mult[n - 1 - k] = *g;
        }
        if scheme == Scheme::Uniform {
            // the implicit node at r = 0 carries GREGORY[0] but contributes nothing
            for (k, g) in GREGORY.iter().enumerate().skip(1) {
                mult[k - 1] *= *g;
            }
        }
        let weights = (0..n).map(|i| h * mult[i] * nodes[i] * nodes[i] * jac[i]).collect();

        let couplings = (1..n)
            .map(|i| {
                let (a, b) = (nodes[i - 1], nodes[i]);
                let d = b - a;
                (b * b * b - a * a * a) / 3.0 / (d * d)
            })
            .collect();

        Ok(Arc::new(RadialGrid { n, r_max, scheme, nodes, weights, couplings }))
    }

    /// Production grid: n = 4096, r_max = 30, log scheme.
    pub fn production() -> Arc<Self> {
        Self::new(4096, 30.0, Scheme::Log).expect("static grid parameters are valid")
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(LabError::LengthMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    /// 4π Σ w_i s_i.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(self.integrate_unchecked(samples))
    }

    pub(crate) fn integrate_unchecked(&self, samples: &[f64]) -> f64 {
        FOUR_PI * self.weights.iter().zip(samples).map(|(w, s)| w * s).sum::<f64>()
    }

    pub(crate) fn integrate_with<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        FOUR_PI * (0..self.n).map(|i| self.weights[i] * f(i)).sum::<f64>()
    }

    /// ∫|∇u|² dx from staggered differences; the first interval [0, r_1] has zero slope.
    pub(crate) fn kinetic(&self, u: &[f64]) -> f64 {
        let s: f64 = self.couplings.iter().enumerate().map(|(k, c)| {
            let du = u[k + 1] - u[k];
            c * du * du
        })
        .sum();
        FOUR_PI * s
    }

    /// Half the gradient of Σ c_i (u_i − u_{i-1})² (stiffness matrix applied to u, without 4π).
    pub(crate) fn stiffness_apply(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (k, c) in self.couplings.iter().enumerate() {
            let f = c * (u[k + 1] - u[k]);
            out[k] -= f;
            out[k + 1] += f;
        }
    }

    /// Discrete −Δu at the nodes: the conservative three-point radial stencil,
    /// equal to the energy gradient divided by the nodal volume.
    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.stiffness_apply(u, &mut out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
        out
    }

    /// Tridiagonal stiffness matrix bands (diag, off) with off[k] coupling nodes k and k+1.
    pub(crate) fn stiffness_bands(&self) -> (Vec<f64>, Vec<f64>) {
        let mut diag = vec![0.0; self.n];
        let mut off = vec![0.0; self.n - 1];
        for (k, c) in self.couplings.iter().enumerate() {
            diag[k] += c;
            diag[k + 1] += c;
            off[k] = -c;
        }
        (diag, off)
    }

    pub fn sample<F: Fn(f64) -> f64>(self: &Arc<Self>, f: F) -> RadialFn {
        RadialFn { grid: Arc::clone(self), values: self.nodes.iter().map(|&r| f(r)).collect() }
    }

    pub fn zeros(self: &Arc<Self>) -> RadialFn {
        RadialFn { grid: Arc::clone(self), values: vec![0.0; self.n] }
    }
}

#[derive(Debug, Clone)]
pub struct RadialFn {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialFn {
    pub fn new(grid: &Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::InvalidArgument(format!("non-finite sample at node {i}")));
        }
        Ok(RadialFn { grid: Arc::clone(grid), values })
    }

    pub fn scaled(&self, c: f64) -> RadialFn {
        RadialFn { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn abs(&self) -> RadialFn {
        RadialFn { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| v.abs()).collect() }
    }

    /// self + c·other, on the grid of self.
    pub fn add_scaled(&self, other: &RadialFn, c: f64) -> RadialFn {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        RadialFn { grid: Arc::clone(&self.grid), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.integrate_with(|i| self.values[i] * self.values[i]).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct VecPair {
    pub u: RadialFn,
    pub v: RadialFn,
}

impl VecPair {
    pub fn new(u: RadialFn, v: RadialFn) -> Result<Self> {
        if !Arc::ptr_eq(&u.grid, &v.grid) && *u.grid != *v.grid {
            return Err(LabError::InvalidArgument("pair components live on different grids".into()));
        }
        Ok(VecPair { u, v })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.u.grid
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        VecPair { u: grid.zeros(), v: grid.zeros() }
    }

    /// Both components as one vector [u; v].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut x = self.u.values.clone();
        x.extend_from_slice(&self.v.values);
        x
    }

    pub fn from_flat(grid: &Arc<RadialGrid>, x: &[f64]) -> Self {
        let n = grid.n;
        VecPair {
            u: RadialFn { grid: Arc::clone(grid), values: x[..n].to_vec() },
            v: RadialFn { grid: Arc::clone(grid), values: x[n..2 * n].to_vec() },
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        VecPair { u: self.u.scaled(t), v: self.v.scaled(t) }
    }

    pub fn swapped(&self) -> Self {
        VecPair { u: self.v.clone(), v: self.u.clone() }
    }

    pub fn abs(&self) -> Self {
        VecPair { u: self.u.abs(), v: self.v.abs() }
    }

    pub fn is_nontrivial(&self) -> bool {
        self.u.l2_norm().max(self.v.l2_norm()) > 0.0
    }
}

/// ∫|∇u|² + ∫u².
pub fn h1_norm_sq(u: &RadialFn) -> f64 {
    u.grid.kinetic(&u.values) + u.grid.integrate_with(|i| u.values[i] * u.values[i])
}

/// ∫|u|^q dx.
pub fn lp_norm_pow(u: &RadialFn, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(LabError::InvalidArgument(format!("exponent q = {q} < 1")));
    }
    Ok(u.grid.integrate_with(|i| u.values[i].abs().powf(q)))
}

/// max over interior nodes of r|u(r)|, divided by ‖u‖_{H¹}.
pub fn strauss_ratio(u: &RadialFn) -> Result<f64> {
    let h1 = h1_norm_sq(u);
    if h1 <= 0.0 {
        return Err(LabError::TrivialPair);
    }
    let g = &u.grid;
    let m = (0..g.n - 1).map(|i| g.nodes[i] * u.values[i].abs()).fold(0.0, f64::max);
    Ok(m / h1.sqrt())
}

/// A random smooth decaying profile: a short sum of Gaussian shells with
/// random centres, widths and amplitudes, pinned to zero at r_max.
pub fn random_profile<R: Rng>(grid: &Arc<RadialGrid>, rng: &mut R) -> RadialFn {
    let terms = rng.random_range(1..=3);
    let params: Vec<(f64, f64, f64)> = (0..terms)
        .map(|_| {
            let amp = rng.random_range(0.1..3.0);
            let centre = rng.random_range(0.0..4.0);
            let width = rng.random_range(0.5..3.0);
            (amp, centre, width)
        })
        .collect();
    let mut f = grid.sample(|r| {
        params.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()
    });
    let last = grid.n - 1;
    f.values[last] = 0.0;
    f
}

/// A random direction at `base`: each component is the base component times a
/// smooth factor bounded by 2 in absolute value. Along such directions the
/// coupling |u|^{p/2}|v|^{p/2} stays smooth, which fails where an unrelated
/// direction outgrows a decaying base in its tail.
pub fn random_direction<R: Rng>(base: &VecPair, rng: &mut R) -> VecPair {
    let mut factor = |f: &RadialFn| {
        let bump = random_profile(&f.grid, rng);
        let peak = bump.max_abs();
        let (c0, c1) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let values = f.values.iter().zip(&bump.values).map(|(x, b)| x * (c0 + c1 * b / peak)).collect();
        RadialFn { grid: Arc::clone(&f.grid), values }
    };
    let u = factor(&base.u);
    let v = factor(&base.v);
    VecPair { u, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(RadialGrid::new(63, 1.0, Scheme::Uniform).is_err());
        assert!(RadialGrid::new(64, 0.0, Scheme::Log).is_err());
        assert!(RadialGrid::new(64, -1.0, Scheme::Log).is_err());
    }

    #[test]
    fn nodes_and_weights_are_valid() {
        for scheme in [Scheme::Uniform, Scheme::Log] {
            let g = RadialGrid::new(256, 7.0, scheme).unwrap();
            assert!(g.nodes[0] > 0.0);
            assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(g.nodes[g.n - 1], 7.0);
            assert!(g.weights.iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn uniform_weights_integrate_low_monomials_exactly() {
        let g = RadialGrid::new(64, 1.0, Scheme::Uniform).unwrap();
        for k in 0..=2 {
            let s: f64 = g.weights.iter().zip(&g.nodes).map(|(w, r)| w * r.powi(k)).sum();
            let exact = 1.0 / (k as f64 + 3.0);
            assert!(((s - exact) / exact).abs() < 1e-10, "k={k}: {s} vs {exact}");
        }
    }

    #[test]
    fn log_weights_integrate_unit_function() {
        let g = RadialGrid::new(4096, 30.0, Scheme::Log).unwrap();
        let s: f64 = g.weights.iter().sum();
        assert!((s / 9000.0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn stiffness_apply_is_half_gradient_of_kinetic() {
        let g = RadialGrid::new(128, 10.0, Scheme::Log).unwrap();
        let u: Vec<f64> = g.nodes.iter().map(|r| (-r * r / 3.0).exp() * (1.0 + 0.1 * r)).collect();
        let mut out = vec![0.0; g.n];
        g.stiffness_apply(&u, &mut out);
        let k = 37;
        let h = 1e-6;
        let mut up = u.clone();
        up[k] += h;
        let mut dn = u.clone();
        dn[k] -= h;
        let fd = (g.kinetic(&up) - g.kinetic(&dn)) / (2.0 * h);
        assert!((fd - 2.0 * FOUR_PI * out[k]).abs() < 1e-7 * fd.abs().max(1e-12));
    }

    #[test]
    fn random_profiles_vanish_at_boundary() {
        use rand::SeedableRng;
        let g = RadialGrid::new(128, 20.0, Scheme::Log).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let f = random_profile(&g, &mut rng);
            assert_eq!(f.values[g.n - 1], 0.0);
            assert!(f.values.iter().all(|v| v.is_finite()));
        }
    }
}
