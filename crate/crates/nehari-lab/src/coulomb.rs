//! Newton-kernel potential φ = κ∫ρ(y)/|x−y| dy for radial densities, the
//! Hartree energy ∫φρ, and the exact interaction of disjoint spherical clusters.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::radial_core::{h1_norm_sq, RadialFn, RadialGrid, VecPair, FOUR_PI};

/// Tolerance below which negative density samples are treated as roundoff.
const NEGATIVE_RHO_TOL: f64 = -1e-14;

#[derive(Debug, Clone)]
pub struct CoulombField {
    pub phi: RadialFn,
    pub total_charge: f64,
    pub kappa: f64,
}

/// Radial potential on the grid. Uses the symmetric kernel 1/max(r, s)
/// (Newton's theorem for shells) so that ∫φρ is a symmetric quadratic form.
pub(crate) fn potential_values(grid: &RadialGrid, rho: &[f64], kappa: f64) -> Vec<f64> {
    let n = grid.n;
    let mut phi = vec![0.0; n];
    let mut inner = 0.0;
    for i in 0..n {
        inner += grid.weights[i] * rho[i];
        phi[i] = inner / grid.nodes[i];
    }
    let mut outer = 0.0;
    for i in (0..n).rev() {
        phi[i] += outer;
        outer += grid.weights[i] * rho[i] / grid.nodes[i];
    }
    for p in phi.iter_mut() {
        *p *= kappa * FOUR_PI;
    }
    phi
}

pub fn newton_potential(rho: &RadialFn, kappa: f64) -> Result<CoulombField> {
    if let Some((index, &value)) = rho.values.iter().enumerate().find(|(_, v)| **v < NEGATIVE_RHO_TOL) {
        return Err(LabError::NegativeDensity { index, value });
    }
    let grid = &rho.grid;
    let phi = potential_values(grid, &rho.values, kappa);
    let total_charge = grid.integrate_unchecked(&rho.values);
    Ok(CoulombField { phi: RadialFn { grid: Arc::clone(grid), values: phi }, total_charge, kappa })
}

pub(crate) fn density(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a * a + b * b).collect()
}

/// ∫φ_{u,v}(u²+v²) dx.
pub fn hartree_energy(pair: &VecPair, kappa: f64) -> f64 {
    let grid = pair.grid();
    let rho = density(&pair.u.values, &pair.v.values);
    let phi = potential_values(grid, &rho, kappa);
    grid.integrate_with(|i| phi[i] * rho[i])
}

/// ∫φ[ρ₁]ρ₂ dx, the symmetric bilinear form behind the Hartree energy.
pub fn cross_energy(rho1: &RadialFn, rho2: &RadialFn, kappa: f64) -> f64 {
    let phi = potential_values(&rho1.grid, &rho1.values, kappa);
    rho1.grid.integrate_with(|i| phi[i] * rho2.values[i])
}

/// κ Q_i Q_j / d for spherically symmetric clusters with disjoint supports.
pub fn disjoint_interaction(q_i: f64, q_j: f64, d: f64, kappa: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(LabError::InvalidArgument(format!("separation d = {d} must be positive")));
    }
    Ok(kappa * q_i * q_j / d)
}

/// ∫φρ/‖(u,v)‖⁴_H for a nontrivial pair.
pub fn hartree_ratio(pair: &VecPair, kappa: f64) -> Result<f64> {
    if !pair.is_nontrivial() {
        return Err(LabError::TrivialPair);
    }
    let a = h1_norm_sq(&pair.u) + h1_norm_sq(&pair.v);
    Ok(hartree_energy(pair, kappa) / (a * a))
}

/// Constant of the Hartree bound ∫φρ ≤ C‖(u,v)‖⁴_H: the largest ratio seen on
/// a sample next to the value implied by the embedding constants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HartreeBound {
    pub empirical: f64,
    pub formula: f64,
    /// The smaller of the two; both are valid upper bounds on the sample.
    pub reported: f64,
}

impl HartreeBound {
    pub fn from_samples<I: IntoIterator<Item = f64>>(ratios: I, formula: f64) -> Self {
        let empirical = ratios.into_iter().fold(0.0, f64::max);
        HartreeBound { empirical, formula, reported: empirical.min(formula) }
    }
}

/// Both sides of 4πκ∫ρ|w| ≤ a∫|∇w|² + (πκ/a)∫φρ for w = u (`first`) or w = v,
/// which follows from −Δφ = 4πκρ and Young's inequality.
pub fn lions_sides(pair: &VecPair, a: f64, kappa: f64, first: bool) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return Err(LabError::InvalidArgument(format!("a = {a} must be positive")));
    }
    let grid = pair.grid();
    let w = if first { &pair.u } else { &pair.v };
    let rho = density(&pair.u.values, &pair.v.values);
    let lhs = FOUR_PI * kappa * grid.integrate_with(|i| rho[i] * w.values[i].abs());
    let rhs = a * grid.kinetic(&w.values) + std::f64::consts::PI * kappa / a * hartree_energy(pair, kappa);
    Ok((lhs, rhs))
}

/// c in c√λ∫ρ(|u|+|v|) ≤ ¼∫(|∇u|²+|∇v|²) + (λ/8)∫φρ, obtained from the
/// inequality above with the optimal a: c = √(πκ)/2.
pub fn lions_constant(kappa: f64) -> f64 {
    0.5 * (std::f64::consts::PI * kappa).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::Scheme;

    #[test]
    fn zero_density_gives_zero_potential() {
        let g = RadialGrid::new(128, 10.0, Scheme::Log).unwrap();
        let f = newton_potential(&g.zeros(), 1.0).unwrap();
        assert!(f.phi.values.iter().all(|v| *v == 0.0));
        assert_eq!(f.total_charge, 0.0);
    }

    #[test]
    fn rejects_negative_density() {
        let g = RadialGrid::new(128, 10.0, Scheme::Log).unwrap();
        let mut rho = g.zeros();
        rho.values[5] = -1e-6;
        assert!(matches!(newton_potential(&rho, 1.0), Err(LabError::NegativeDensity { index: 5, .. })));
        rho.values[5] = -1e-16;
        assert!(newton_potential(&rho, 1.0).is_ok());
    }

    #[test]
    fn far_field_is_point_charge() {
        let g = RadialGrid::new(1024, 30.0, Scheme::Log).unwrap();
        let rho = g.sample(|r| (-r * r).exp());
        for kappa in [1.0, 1.0 / FOUR_PI] {
            let f = newton_potential(&rho, kappa).unwrap();
            let last = g.n - 1;
            let rq = f.phi.values[last] * g.nodes[last];
            assert!((rq / (kappa * f.total_charge) - 1.0).abs() < 1e-12);
            assert!(f.phi.values.windows(2).all(|w| w[1] <= w[0]));
            assert!(f.phi.values.iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn disjoint_interaction_point_law() {
        assert_eq!(disjoint_interaction(0.0, 5.0, 1.0, 1.0).unwrap(), 0.0);
        let q = FOUR_PI / 3.0;
        assert!((disjoint_interaction(q, q, 10.0, 1.0).unwrap() - 1.754596).abs() < 1e-6);
        assert!(disjoint_interaction(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
