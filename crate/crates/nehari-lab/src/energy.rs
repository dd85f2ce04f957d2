//! The functional J_{λ,β}, its Euler–Lagrange residual, the scalar functional
//! I_λ and the Pohozaev identity.
//!
//! J(u,v) = ½‖(u,v)‖²_H + (λ/4)∫φ_{u,v}(u²+v²) − (1/p)∫F_β(u,v),
//! F_β(u,v) = |u|^p + |v|^p + 2β|u|^{p/2}|v|^{p/2}.

use std::sync::Arc;

use serde::Serialize;

use crate::coulomb::{density, potential_values};
use crate::error::{LabError, Result};
use crate::radial_core::{RadialFn, RadialGrid, VecPair, FOUR_PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub p: f64,
    pub lambda: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl ModelParams {
    /// Parameters in the standard regime 2 < p < 4, λ ≥ 0, β ≥ 0.
    pub fn new(p: f64, lambda: f64, beta: f64, kappa: f64) -> Result<Self> {
        Self::build(p, lambda, beta, kappa, 4.0)
    }

    /// Same checks but allows 2 < p < 6 (identities stated up to p < 6).
    pub fn relaxed(p: f64, lambda: f64, beta: f64, kappa: f64) -> Result<Self> {
        Self::build(p, lambda, beta, kappa, 6.0)
    }

    fn build(p: f64, lambda: f64, beta: f64, kappa: f64, p_top: f64) -> Result<Self> {
        if !(p > 2.0 && p < p_top) {
            return Err(LabError::InvalidArgument(format!("p = {p} outside (2, {p_top})")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(LabError::InvalidArgument(format!("lambda = {lambda} must be >= 0")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(LabError::InvalidArgument(format!("beta = {beta} must be >= 0")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(LabError::InvalidArgument(format!("kappa = {kappa} must be > 0")));
        }
        Ok(ModelParams { p, lambda, beta, kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub mass: f64,
    pub hartree: f64,
    pub coupling: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct ResidualPair {
    pub res_u: RadialFn,
    pub res_v: RadialFn,
    pub norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevData {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub theta: f64,
    pub poho_residual: f64,
}

/// Local coupling density F_β(a, b).
#[inline]
pub(crate) fn coupling_density(a: f64, b: f64, p: f64, beta: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    let mut f = a.powf(p) + b.powf(p);
    if beta != 0.0 {
        f += 2.0 * beta * (a * b).powf(0.5 * p);
    }
    f
}

/// ∂F_β/∂a divided by p: |a|^{p−2}a + β|a|^{p/2−2}a|b|^{p/2}.
#[inline]
fn coupling_force(a: f64, b: f64, p: f64, beta: f64) -> f64 {
    let aa = a.abs();
    if aa == 0.0 {
        return 0.0;
    }
    let mut f = aa.powf(p - 2.0) * a;
    if beta != 0.0 {
        let bb = b.abs();
        if bb != 0.0 {
            f += beta * aa.powf(0.5 * p - 1.0) * a.signum() * bb.powf(0.5 * p);
        }
    }
    f
}

/// Second derivatives of F_β/p: (∂²/∂a², ∂²/∂a∂b) evaluated at (a, b).
#[inline]
fn coupling_hessian(a: f64, b: f64, p: f64, beta: f64) -> (f64, f64) {
    let (aa, bb) = (a.abs(), b.abs());
    let mut haa = if aa == 0.0 { 0.0 } else { (p - 1.0) * aa.powf(p - 2.0) };
    let mut hab = 0.0;
    if beta != 0.0 && aa != 0.0 && bb != 0.0 {
        let q = 0.5 * p;
        haa += beta * (q - 1.0) * aa.powf(q - 2.0) * bb.powf(q);
        hab = beta * q * aa.powf(q - 1.0) * bb.powf(q - 1.0) * a.signum() * b.signum();
    }
    (haa, hab)
}

/// Integrals of a pair plus the Coulomb potential they produce.
#[derive(Debug, Clone)]
pub(crate) struct PairState {
    pub kinetic: f64,
    pub mass: f64,
    pub hartree: f64,
    pub coupling: f64,
    pub phi: Vec<f64>,
}

impl PairState {
    pub fn a(&self) -> f64 {
        self.kinetic + self.mass
    }

    pub fn energy(&self, prm: &ModelParams) -> f64 {
        0.5 * self.a() + 0.25 * prm.lambda * self.hartree - self.coupling / prm.p
    }
}

pub(crate) fn pair_state(grid: &RadialGrid, u: &[f64], v: &[f64], prm: &ModelParams) -> PairState {
    let rho = density(u, v);
    let phi = potential_values(grid, &rho, prm.kappa);
    PairState {
        kinetic: grid.kinetic(u) + grid.kinetic(v),
        mass: grid.integrate_unchecked(&rho),
        hartree: grid.integrate_with(|i| phi[i] * rho[i]),
        coupling: grid.integrate_with(|i| coupling_density(u[i], v[i], prm.p, prm.beta)),
        phi,
    }
}

/// Euclidean gradient of the discrete J with respect to the nodal values [u; v].
pub(crate) fn gradient(grid: &RadialGrid, u: &[f64], v: &[f64], phi: &[f64], prm: &ModelParams) -> Vec<f64> {
    let n = grid.n;
    let mut g = vec![0.0; 2 * n];
    let (gu, gv) = g.split_at_mut(n);
    grid.stiffness_apply(u, gu);
    grid.stiffness_apply(v, gv);
    for i in 0..n {
        let w = FOUR_PI * grid.weights[i];
        let local_u = u[i] + prm.lambda * phi[i] * u[i] - coupling_force(u[i], v[i], prm.p, prm.beta);
        let local_v = v[i] + prm.lambda * phi[i] * v[i] - coupling_force(v[i], u[i], prm.p, prm.beta);
        gu[i] = FOUR_PI * gu[i] + w * local_u;
        gv[i] = FOUR_PI * gv[i] + w * local_v;
    }
    g
}

/// Gradient of the three fibering coefficients (A, B, C) with respect to [u; v].
pub(crate) fn coefficient_gradients(
    grid: &RadialGrid,
    u: &[f64],
    v: &[f64],
    phi: &[f64],
    prm: &ModelParams,
) -> [Vec<f64>; 3] {
    let n = grid.n;
    let mut ga = vec![0.0; 2 * n];
    let mut gb = vec![0.0; 2 * n];
    let mut gc = vec![0.0; 2 * n];
    {
        let (au, av) = ga.split_at_mut(n);
        grid.stiffness_apply(u, au);
        grid.stiffness_apply(v, av);
    }
    for i in 0..n {
        let w = FOUR_PI * grid.weights[i];
        ga[i] = 2.0 * (FOUR_PI * ga[i] + w * u[i]);
        ga[n + i] = 2.0 * (FOUR_PI * ga[n + i] + w * v[i]);
        gb[i] = 4.0 * w * phi[i] * u[i];
        gb[n + i] = 4.0 * w * phi[i] * v[i];
        gc[i] = prm.p * w * coupling_force(u[i], v[i], prm.p, prm.beta);
        gc[n + i] = prm.p * w * coupling_force(v[i], u[i], prm.p, prm.beta);
    }
    [ga, gb, gc]
}

/// Hessian of the discrete J applied to a direction d = [du; dv].
pub(crate) fn hessian_apply(
    grid: &RadialGrid,
    u: &[f64],
    v: &[f64],
    phi: &[f64],
    prm: &ModelParams,
    d: &[f64],
) -> Vec<f64> {
    let n = grid.n;
    let (du, dv) = d.split_at(n);
    let drho: Vec<f64> = (0..n).map(|i| 2.0 * (u[i] * du[i] + v[i] * dv[i])).collect();
    let dphi = potential_values(grid, &drho, prm.kappa);
    let mut out = vec![0.0; 2 * n];
    {
        let (ou, ov) = out.split_at_mut(n);
        grid.stiffness_apply(du, ou);
        grid.stiffness_apply(dv, ov);
    }
    for i in 0..n {
        let w = FOUR_PI * grid.weights[i];
        let (huu, huv) = coupling_hessian(u[i], v[i], prm.p, prm.beta);
        let (hvv, _) = coupling_hessian(v[i], u[i], prm.p, prm.beta);
        let lu = du[i] + prm.lambda * (phi[i] * du[i] + dphi[i] * u[i]) - huu * du[i] - huv * dv[i];
        let lv = dv[i] + prm.lambda * (phi[i] * dv[i] + dphi[i] * v[i]) - hvv * dv[i] - huv * du[i];
        out[i] = FOUR_PI * out[i] + w * lu;
        out[n + i] = FOUR_PI * out[n + i] + w * lv;
    }
    out
}

/// Converts an energy gradient into nodal residual samples (gradient / nodal volume)
/// and returns the L² norm of the pair of residuals. The node at r_max carries
/// the boundary condition rather than the equation, so its residual is zero.
pub(crate) fn residual_from_gradient(grid: &RadialGrid, g: &[f64]) -> (Vec<f64>, f64) {
    let n = grid.n;
    let mut r = vec![0.0; 2 * n];
    let mut s = 0.0;
    for i in 0..n - 1 {
        let w = FOUR_PI * grid.weights[i];
        r[i] = g[i] / w;
        r[n + i] = g[n + i] / w;
        s += (g[i] * g[i] + g[n + i] * g[n + i]) / w;
    }
    (r, s.sqrt())
}

/// ∫F_β(u,v) dx.
pub fn coupling_integral(pair: &VecPair, p: f64, beta: f64) -> f64 {
    let (u, v) = (&pair.u.values, &pair.v.values);
    pair.grid().integrate_with(|i| coupling_density(u[i], v[i], p, beta))
}

pub fn total_energy(pair: &VecPair, prm: &ModelParams) -> EnergyBreakdown {
    let s = pair_state(pair.grid(), &pair.u.values, &pair.v.values, prm);
    EnergyBreakdown { kinetic: s.kinetic, mass: s.mass, hartree: s.hartree, coupling: s.coupling, total: s.energy(prm) }
}

/// Residual samples of both Euler–Lagrange equations,
/// −Δu + u + λφu − |u|^{p−2}u − β|v|^{p/2}|u|^{p/2−2}u and its v counterpart,
/// with the conservative discrete Laplacian.
pub fn el_residual(pair: &VecPair, prm: &ModelParams) -> ResidualPair {
    let grid = pair.grid();
    let (u, v) = (&pair.u.values, &pair.v.values);
    let s = pair_state(grid, u, v, prm);
    let g = gradient(grid, u, v, &s.phi, prm);
    let (r, norm) = residual_from_gradient(grid, &g);
    let n = grid.n;
    ResidualPair {
        res_u: RadialFn { grid: Arc::clone(grid), values: r[..n].to_vec() },
        res_v: RadialFn { grid: Arc::clone(grid), values: r[n..].to_vec() },
        norm,
    }
}

/// L² inner product of a residual pair with a direction pair; equals the
/// directional derivative of J.
pub fn residual_pairing(res: &ResidualPair, dir: &VecPair) -> f64 {
    let g = &res.res_u.grid;
    g.integrate_with(|i| res.res_u.values[i] * dir.u.values[i] + res.res_v.values[i] * dir.v.values[i])
}

/// I_λ(z) = ½∫(|∇z|²+z²) + (λ/4)∫φ_z z².
pub fn scalar_energy(z: &RadialFn, prm: &ModelParams) -> f64 {
    let zero = vec![0.0; z.grid.n];
    let s = pair_state(&z.grid, &z.values, &zero, &ModelParams { beta: 0.0, ..*prm });
    s.energy(prm)
}

/// Lower bound J ≥ ¼A + (λ/8)B + Σ_{w∈{u,v}} ∫(¼w² + c√λ|w|³ − ((1+β)/p)|w|^p)
/// with c from the Lions-type inequality; shows J is bounded below.
pub fn coercivity_lower_bound(pair: &VecPair, prm: &ModelParams) -> f64 {
    let b = total_energy(pair, prm);
    let c = crate::coulomb::lions_constant(prm.kappa) * prm.lambda.sqrt();
    let grid = pair.grid();
    let local = |w: &[f64]| {
        grid.integrate_with(|i| {
            let a = w[i].abs();
            0.25 * a * a + c * a * a * a - (1.0 + prm.beta) / prm.p * a.powf(prm.p)
        })
    };
    0.25 * (b.kinetic + b.mass) + 0.125 * prm.lambda * b.hartree + local(&pair.u.values) + local(&pair.v.values)
}

pub fn pohozaev(pair: &VecPair, prm: &ModelParams) -> PohozaevData {
    let b = total_energy(pair, prm);
    pohozaev_from(&b, prm)
}

pub(crate) fn pohozaev_from(b: &EnergyBreakdown, prm: &ModelParams) -> PohozaevData {
    let (z1, z2, z3, z4) = (b.kinetic, b.mass, b.hartree, b.coupling);
    let poho_residual = (0.5 * z1 + 1.5 * z2 + 1.25 * prm.lambda * z3 - 3.0 / prm.p * z4).abs();
    PohozaevData { z1, z2, z3, z4, theta: b.total, poho_residual }
}

/// The two-parameter family of solutions of the linear system formed by the
/// energy level θ, the Nehari identity and the Pohozaev identity:
/// z = (θ/(p−2))·(3(p−2), 6−p, 0, 2p) + t·(p−2, −2(p−3), 2(p−2)/λ, p).
pub fn pohozaev_general_solution(theta: f64, t: f64, p: f64, lambda: f64) -> [f64; 4] {
    let a = theta / (p - 2.0);
    let z3 = if t == 0.0 { 0.0 } else { t * 2.0 * (p - 2.0) / lambda };
    [
        a * 3.0 * (p - 2.0) + t * (p - 2.0),
        a * (6.0 - p) - t * 2.0 * (p - 3.0),
        z3,
        a * 2.0 * p + t * p,
    ]
}

/// Residuals of the energy, Nehari and Pohozaev equations at z.
pub fn pohozaev_system_residuals(z: &[f64; 4], theta: f64, p: f64, lambda: f64) -> [f64; 3] {
    let [z1, z2, z3, z4] = *z;
    [
        0.5 * z1 + 0.5 * z2 + 0.25 * lambda * z3 - z4 / p - theta,
        z1 + z2 + lambda * z3 - z4,
        0.5 * z1 + 1.5 * z2 + 1.25 * lambda * z3 - 3.0 / p * z4,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::Scheme;

    fn grid() -> Arc<RadialGrid> {
        RadialGrid::new(512, 20.0, Scheme::Log).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(4.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3.0, -1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3.0, 1.0, -1.0, 1.0).is_err());
        assert!(ModelParams::relaxed(5.0, 1.0, 1.0, 1.0).is_ok());
        assert!(ModelParams::relaxed(6.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn breakdown_identity() {
        let g = grid();
        let pair = VecPair::new(g.sample(|r| (-r * r / 2.0).exp()), g.sample(|r| 0.5 * (-r).exp())).unwrap();
        let prm = ModelParams::new(2.7, 0.8, 1.3, 1.0).unwrap();
        let b = total_energy(&pair, &prm);
        let re = 0.5 * (b.kinetic + b.mass) + 0.25 * prm.lambda * b.hartree - b.coupling / prm.p;
        assert!((b.total - re).abs() <= 1e-12 * re.abs());
    }

    #[test]
    fn coupling_beta_zero_decouples() {
        let g = grid();
        let pair = VecPair::new(g.sample(|r| (-r * r).exp()), g.sample(|r| (-r).exp())).unwrap();
        let c = coupling_integral(&pair, 3.0, 0.0);
        let sep = crate::radial_core::lp_norm_pow(&pair.u, 3.0).unwrap()
            + crate::radial_core::lp_norm_pow(&pair.v, 3.0).unwrap();
        assert!((c - sep).abs() <= 1e-14 * sep);
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let g = grid();
        let u: Vec<f64> = g.nodes.iter().map(|r| 1.2 * (-r * r / 3.0).exp()).collect();
        let v: Vec<f64> = g.nodes.iter().map(|r| 0.7 * (-r / 2.0).exp() * (1.0 + r)).collect();
        let prm = ModelParams::new(2.5, 0.6, 1.1, 1.0).unwrap();
        // perturb within the support so no sample crosses zero
        let d: Vec<f64> = (0..2 * g.n)
            .map(|i| ((i as f64) * 0.37).sin() * 0.1 * if i < g.n { u[i] } else { v[i - g.n] })
            .collect();
        let s = pair_state(&g, &u, &v, &prm);
        let hd = hessian_apply(&g, &u, &v, &s.phi, &prm, &d);
        let h = 1e-6;
        let shift = |sign: f64| {
            let up: Vec<f64> = (0..g.n).map(|i| u[i] + sign * h * d[i]).collect();
            let vp: Vec<f64> = (0..g.n).map(|i| v[i] + sign * h * d[g.n + i]).collect();
            let st = pair_state(&g, &up, &vp, &prm);
            gradient(&g, &up, &vp, &st.phi, &prm)
        };
        let (gp, gm) = (shift(1.0), shift(-1.0));
        let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let scale = fd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in fd.iter().zip(&hd) {
            assert!((a - b).abs() < 1e-6 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn pohozaev_anchor_points() {
        let z = pohozaev_general_solution(1.0, 0.0, 3.0, 1.0);
        assert_eq!(z, [3.0, 3.0, 0.0, 6.0]);
        let z = pohozaev_general_solution(1.0, 1.0, 3.0, 1.0);
        assert_eq!(z, [4.0, 3.0, 2.0, 9.0]);
        for r in pohozaev_system_residuals(&z, 1.0, 3.0, 1.0) {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn zero_pair_is_inert() {
        let g = grid();
        let pair = VecPair::zeros(&g);
        let prm = ModelParams::new(3.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(el_residual(&pair, &prm).norm, 0.0);
        let pd = pohozaev(&pair, &prm);
        assert_eq!([pd.z1, pd.z2, pd.z3, pd.z4, pd.theta, pd.poho_residual], [0.0; 6]);
        assert_eq!(scalar_energy(&g.zeros(), &prm), 0.0);
    }
}
