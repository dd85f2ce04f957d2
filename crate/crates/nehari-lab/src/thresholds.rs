//! Closed-form thresholds and constants built from the embedding constants:
//! ρ_p, k(λ), β₀(λ), β(λ), λ₀, the Young constant C_{p,β}, the Nehari–Sobolev
//! constant C_β, region radii and energy caps, plus the two certificates that
//! place solutions on the Minus branch.
//!
//! K denotes S̄²S⁴_{12/5}/(4πκ) throughout (see `SobolevConstants::coulomb_product`).

use serde::Serialize;

use crate::energy::{el_residual, pohozaev, ModelParams};
use crate::error::{LabError, Result};
use crate::fibering::{classify, NehariClass};
use crate::radial_core::VecPair;
use crate::soliton::SobolevConstants;

/// Smallest p for which 3p² − 2p − 24 ≥ 0.
pub fn p_g3() -> f64 {
    (1.0 + 73f64.sqrt()) / 3.0
}

/// (16·2^{1/3}/(3√3π))²((6−p)/(p−2))³, the interpolation constant bounding ∫φρ.
pub fn a_hls(p: f64) -> f64 {
    let c = 16.0 * 2f64.cbrt() / (3.0 * 3f64.sqrt() * std::f64::consts::PI);
    c * c * ((6.0 - p) / (p - 2.0)).powi(3)
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub p: f64,
    pub lambda: f64,
    pub beta: f64,
    pub kappa: f64,
    /// K as used below, and the unnormalized S̄²S⁴_{12/5} for comparison.
    pub coulomb_product: f64,
    pub coulomb_product_literal: f64,
    pub rho_p: f64,
    pub k_lambda: f64,
    pub beta0: f64,
    pub beta_thresh: f64,
    /// The λ-dependent branches of β₀ and β before the max with (p−2)/2.
    pub beta0_raw: f64,
    pub beta_thresh_raw: f64,
    pub lambda0: f64,
    /// λ₀ recomputed from the interpolation constant A_hls.
    pub lambda0_hls: f64,
    pub lambda0_agree: bool,
    /// Undefined (null) for p ≥ 3.
    pub C_p_beta: Option<f64>,
    pub C_beta: f64,
    pub A_hls: f64,
    pub region_radius: f64,
    pub energy_cap_region: f64,
    pub energy_cap_ground: f64,
    /// Lower bound on J over Minus-classified Nehari pairs: (p−2)/(4p)·C_β^{−1/(p−2)}.
    pub minus_energy_floor: f64,
    pub p_g3: f64,
}

/// C_{p,β} = (p−2)[2(3−p)]^{(3−p)/(p−2)}((1+β)/p)^{1/(p−2)}, the constant in
/// ((1+β)/p)|w|^p ≤ ½w² + C_{p,β}|w|³. Defined for 2 < p < 3.
pub fn young_constant(p: f64, beta: f64) -> Result<f64> {
    if !(p > 2.0 && p < 3.0) {
        return Err(LabError::OutOfRegime(format!("C_p_beta needs 2 < p < 3, got {p}")));
    }
    let e = 1.0 / (p - 2.0);
    Ok((p - 2.0) * (2.0 * (3.0 - p)).powf((3.0 - p) * e) * (1.0 + beta).powf(e) / p.powf(e))
}

pub fn rho_p(p: f64, consts: &SobolevConstants, kappa: f64) -> f64 {
    (p - 2.0) * consts.coulomb_product(kappa) / (2.0 * (4.0 - p) * consts.ground_energy_scale())
}

pub fn k_of_lambda(lambda: f64, rho: f64) -> f64 {
    if lambda < rho {
        rho
    } else {
        lambda
    }
}

/// Unclipped λ-branch of β₀(λ).
fn beta0_raw(p: f64, lambda: f64, k: f64, e: f64) -> f64 {
    (lambda * p * e / ((p - 2.0) * k)).powf(0.5 * (p - 2.0)) * (p / (4.0 - p)).powf(0.5 * (4.0 - p)) - 1.0
}

/// Unclipped λ-branch of β(λ), piecewise at ρ_p.
fn beta_thresh_raw(p: f64, lambda: f64, rho: f64, k: f64, e: f64) -> f64 {
    let h = 0.5 * (p - 2.0);
    if lambda < rho {
        let inner = 1.0 + (2.0 * p * e / ((p - 2.0) * k)) * (2.0 / (4.0 - p)).powf(4.0 / (p - 2.0)) * lambda;
        (1.0 + inner.sqrt()).powf(h) - 1.0
    } else {
        let root = (1.0 + p * 2f64.powf(4.0 / (p - 2.0)) / (4.0 - p).powf((p + 2.0) / (p - 2.0))).sqrt();
        ((2.0 * (4.0 - p) * e / ((p - 2.0) * k)) * (1.0 + root) * lambda).powf(h) - 1.0
    }
}

pub fn lambda0(p: f64, consts: &SobolevConstants) -> f64 {
    let e = consts.ground_energy_scale();
    6.0 * p * (3.0 * p).sqrt() * (p - 2.0) * std::f64::consts::PI
        / (8.0 * 2f64.cbrt() * (4.0 - p) * (6.0 - p).powf(1.5) * e)
}

fn lambda0_from_hls(p: f64, consts: &SobolevConstants) -> f64 {
    let e = consts.ground_energy_scale();
    4.0 * p / ((4.0 - p) * (p - 2.0) * e) * (p * (p - 2.0) / a_hls(p)).sqrt()
}

pub fn compute_thresholds(p: f64, lambda: f64, beta: f64, kappa: f64, consts: &SobolevConstants) -> Result<ThresholdReport> {
    if !(p > 2.0 && p < 4.0) {
        return Err(LabError::InvalidArgument(format!("p = {p} outside (2, 4)")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(LabError::InvalidArgument(format!("lambda = {lambda} must be > 0")));
    }
    if !(beta >= 0.0) || !(kappa > 0.0) {
        return Err(LabError::InvalidArgument("beta must be >= 0 and kappa > 0".into()));
    }
    if (consts.p - p).abs() > 0.0 {
        return Err(LabError::InvalidArgument(format!("constants computed for p = {}, not {p}", consts.p)));
    }
    let k = consts.coulomb_product(kappa);
    let e = consts.ground_energy_scale();
    let rho = rho_p(p, consts, kappa);
    let kl = k_of_lambda(lambda, rho);
    let floor = 0.5 * (p - 2.0);
    let b0 = beta0_raw(p, lambda, k, e);
    let bt = beta_thresh_raw(p, lambda, rho, k, e);
    let l0 = lambda0(p, consts);
    let l0h = lambda0_from_hls(p, consts);
    let c_beta = (1.0 + beta) * consts.s_p.powf(-p);
    Ok(ThresholdReport {
        p,
        lambda,
        beta,
        kappa,
        coulomb_product: k,
        coulomb_product_literal: consts.literal_coulomb_product(),
        rho_p: rho,
        k_lambda: kl,
        beta0: b0.max(floor),
        beta_thresh: bt.max(floor),
        beta0_raw: b0,
        beta_thresh_raw: bt,
        lambda0: l0,
        lambda0_hls: l0h,
        lambda0_agree: ((l0 - l0h) / l0).abs() <= 1e-10,
        C_p_beta: young_constant(p, beta).ok(),
        C_beta: c_beta,
        A_hls: a_hls(p),
        region_radius: ((p - 2.0) * k / (lambda * (4.0 - p))).sqrt(),
        energy_cap_region: (p - 2.0).powi(2) * k / (4.0 * p * (4.0 - p) * kl),
        energy_cap_ground: (p - 2.0) / (2.0 * p) * e,
        minus_energy_floor: (p - 2.0) / (4.0 * p) * c_beta.powf(-1.0 / (p - 2.0)),
        p_g3: p_g3(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct T6Certificate {
    pub accepted: bool,
    pub lambda_below: bool,
    pub theta_below: bool,
    /// Left side of the sufficient inequality for h''(1) < 0 at level θ.
    pub lhs: f64,
    /// Its right side 16p(p−2)/(4−p).
    pub rhs: f64,
}

/// For 3 ≤ p < 4: a solution at level θ with 0 < θ < ((p−2)/(2p))S_p^{2p/(p−2)}
/// and 0 < λ < λ₀ lies on the Minus branch.
pub fn prop_t6_certificate(theta: f64, lambda: f64, p: f64, consts: &SobolevConstants) -> Result<T6Certificate> {
    if !(3.0..4.0).contains(&p) {
        return Err(LabError::OutOfRegime(format!("certificate needs 3 <= p < 4, got {p}")));
    }
    let a = a_hls(p);
    let cap = (p - 2.0) / (2.0 * p) * consts.ground_energy_scale();
    let l2 = lambda * lambda;
    let lhs = a * (4.0 - p) * l2 * theta * theta
        + l2 * (a * a * (4.0 - p).powi(2) * theta.powi(4) + 32.0 * p * (p - 2.0) * a * theta * theta / l2).sqrt();
    let rhs = 16.0 * p * (p - 2.0) / (4.0 - p);
    let lambda_below = lambda > 0.0 && lambda < lambda0(p, consts);
    let theta_below = theta > 0.0 && theta < cap;
    Ok(T6Certificate { accepted: lambda_below && theta_below, lambda_below, theta_below, lhs, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G3Certificate {
    pub accepted: bool,
    /// 3p² − 2p − 24 vanishes at the threshold exponent.
    pub zero_margin: bool,
    /// h''(1) written with the Nehari and Pohozaev identities:
    /// −(2p(p−2)/(6−p))z2 − (λ(3p²−2p−24)/(2(6−p)))z3.
    pub identity_value: f64,
    pub class: NehariClass,
    /// Sign of the identity matches the classification.
    pub consistent: bool,
}

/// Relative Euler–Lagrange residual above which a pair is not treated as a solution.
pub const SOLUTION_TOL: f64 = 1e-4;

/// For p ≥ (1+√73)/3 every nontrivial solution lies on the Minus branch.
pub fn prop_g3_certificate(pair: &VecPair, prm: &ModelParams) -> Result<G3Certificate> {
    let res = el_residual(pair, prm);
    let pd = pohozaev(pair, prm);
    let scale = (pd.z1 + pd.z2).sqrt();
    if !(scale > 0.0) {
        return Err(LabError::TrivialPair);
    }
    if res.norm > SOLUTION_TOL * scale {
        return Err(LabError::NotASolution(res.norm / scale));
    }
    let p = prm.p;
    let poly = 3.0 * p * p - 2.0 * p - 24.0;
    let identity_value =
        -(2.0 * p * (p - 2.0) / (6.0 - p)) * pd.z2 - prm.lambda * poly / (2.0 * (6.0 - p)) * pd.z3;
    let class = classify(pair, prm)?;
    let consistent = match class {
        NehariClass::Minus => identity_value < 0.0,
        NehariClass::Plus => identity_value > 0.0,
        NehariClass::Zero => true,
    };
    Ok(G3Certificate {
        accepted: p >= p_g3(),
        zero_margin: poly.abs() <= 1e-12,
        identity_value,
        class,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(p: f64) -> SobolevConstants {
        // fixed values so the algebra is tested independently of the solver
        let s_p = if p == 2.5 {
            1.954_771_288_966_926_4
        } else if p == 3.0 {
            2.529_528_442_486_558
        } else {
            2.834_362_158_564_524_7
        };
        SobolevConstants { p, s_p, s_bar: crate::soliton::s_bar_closed_form(), s_125: 1.800_419_208_908_198_3 }
    }

    #[test]
    fn young_constant_at_two_and_a_half() {
        assert_eq!(young_constant(2.5, 0.0).unwrap(), 0.08);
        assert!(young_constant(3.0, 0.0).is_err());
    }

    #[test]
    fn k_is_piecewise() {
        let c = consts(3.0);
        let rho = rho_p(3.0, &c, 1.0);
        let r1 = compute_thresholds(3.0, rho / 2.0, 1.0, 1.0, &c).unwrap();
        let r2 = compute_thresholds(3.0, 2.0 * rho, 1.0, 1.0, &c).unwrap();
        // compile-time folding of powf may differ from the runtime libm in the last bit
        assert!((r1.k_lambda / rho - 1.0).abs() < 1e-15);
        assert!((r2.k_lambda / (2.0 * rho) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda0_two_routes_agree() {
        for p in [2.5, 3.0, 3.5] {
            let r = compute_thresholds(p, 0.1, 1.0, 1.0, &consts(p)).unwrap();
            assert!(r.lambda0_agree, "{} vs {}", r.lambda0, r.lambda0_hls);
        }
    }

    #[test]
    fn t6_example_and_gates() {
        let c = consts(3.0);
        let cap = (1.0 / 6.0) * c.ground_energy_scale();
        let l0 = lambda0(3.0, &c);
        let cert = prop_t6_certificate(cap / 2.0, l0 / 2.0, 3.0, &c).unwrap();
        assert!(cert.accepted);
        assert_eq!(cert.rhs, 48.0);
        assert!(cert.lhs < 48.0);
        assert!(!prop_t6_certificate(cap / 2.0, l0, 3.0, &c).unwrap().accepted);
        assert!(!prop_t6_certificate(cap, l0 / 2.0, 3.0, &c).unwrap().accepted);
        assert!(prop_t6_certificate(1.0, 0.1, 2.5, &c).is_err());
    }

    #[test]
    fn g3_threshold_polynomial() {
        let p = p_g3();
        assert!((3.0 * p * p - 2.0 * p - 24.0).abs() < 1e-12);
        assert!((p - 3.18133).abs() < 1e-5);
    }
}
