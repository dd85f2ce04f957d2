//! Maximization of the quotients
//!   Λ(β) = sup ((1/p)∫F_β − ½‖(u,v)‖²_H) / ∫φρ,
//!   Λ̄(β) = sup (∫F_β − ‖(u,v)‖²_H) / ∫φρ,
//! and the nonexistence check above Λ̄.
//!
//! Along a ray t(u,v) both quotients have a closed-form maximum in t, so the
//! ascent runs on the logarithm of that ray maximum, which is scale invariant:
//!   Q*(u,v) = c·(A/B)·(C/A)^{2/(p−2)}.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{coefficient_gradients, pair_state, ModelParams};
use crate::error::{LabError, Result};
use crate::fibering::{fiber_coeffs, g_beta_profile, split_pair};
use crate::linalg::dot;
use crate::optim::{lbfgs, mask_boundary, LbfgsOptions, Preconditioner};
use crate::radial_core::{random_profile, RadialGrid, VecPair};
use crate::soliton::scalar_ground_state;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Lambda,
    LambdaBar,
}

impl std::str::FromStr for Variant {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Lambda" | "lambda" => Ok(Variant::Lambda),
            "LambdaBar" | "lambda-bar" | "lambdabar" => Ok(Variant::LambdaBar),
            other => Err(LabError::InvalidArgument(format!("unknown quotient variant '{other}'"))),
        }
    }
}

impl Variant {
    /// (numerator weight on C, numerator weight on A).
    fn weights(self, p: f64) -> (f64, f64) {
        match self {
            Variant::Lambda => (1.0 / p, 0.5),
            Variant::LambdaBar => (1.0, 1.0),
        }
    }

    /// t^{p−2}·C/A at the ray maximum.
    fn ray_ratio(self, p: f64) -> f64 {
        match self {
            Variant::Lambda => p / (4.0 - p),
            Variant::LambdaBar => 2.0 / (4.0 - p),
        }
    }

    /// log c, so that log Q* = log c + log A − log B + (2/(p−2))(log C − log A).
    fn log_const(self, p: f64) -> f64 {
        let e = 2.0 / (p - 2.0);
        match self {
            Variant::Lambda => ((p - 2.0) / (2.0 * (4.0 - p))).ln() + e * ((4.0 - p) / p).ln(),
            Variant::LambdaBar => ((p - 2.0) / (4.0 - p)).ln() + e * ((4.0 - p) / 2.0).ln(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientResult {
    pub variant: Variant,
    pub p: f64,
    pub beta: f64,
    pub value: f64,
    #[serde(skip)]
    pub maximizer: VecPair,
    pub iterations: usize,
    /// √(gᵀPg) of the gradient of log Q* in the H¹ metric.
    pub first_order_residual: f64,
    pub seed: u64,
    /// Best value per start, in start order (the split-soliton start first).
    pub start_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct QuotientConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        QuotientConfig { starts: 8, seed: 1, max_iters: 4000 }
    }
}

/// The quotient itself (numerator/∫φρ) at a pair, without ray optimization.
pub fn quotient_value(pair: &VecPair, p: f64, beta: f64, variant: Variant) -> Result<f64> {
    let prm = ModelParams { p, lambda: 1.0, beta, kappa: 1.0 };
    let c = fiber_coeffs(pair, &prm)?;
    let (wc, wa) = variant.weights(p);
    Ok((wc * c.c - wa * c.a) / c.b)
}

/// −log Q* and its masked gradient.
fn neg_log_q(grid: &RadialGrid, x: &[f64], prm: &ModelParams, variant: Variant) -> Option<(f64, Vec<f64>)> {
    let n = grid.n;
    let (u, v) = x.split_at(n);
    let s = pair_state(grid, u, v, prm);
    let (a, b, c) = (s.a(), s.hartree, s.coupling);
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return None;
    }
    let e = 2.0 / (prm.p - 2.0);
    let f = variant.log_const(prm.p) + a.ln() - b.ln() + e * (c.ln() - a.ln());
    let [ga, gb, gc] = coefficient_gradients(grid, u, v, &s.phi, prm);
    let mut g: Vec<f64> = (0..2 * n).map(|i| -((1.0 - e) * ga[i] / a - gb[i] / b + e * gc[i] / c)).collect();
    mask_boundary(n, &mut g);
    Some((-f, g))
}

fn ascend(grid: &Arc<RadialGrid>, start: VecPair, prm: &ModelParams, variant: Variant, max_iters: usize) -> (f64, Vec<f64>, usize, f64) {
    let pre = Preconditioner::new(grid, None);
    // log Q* is O(1), so the step budget starts small
    let opts = LbfgsOptions { memory: 12, max_iters, gtol: 1e-9, ftol: 1e-15, step0: 1e-3 };
    let out = lbfgs(
        |x| neg_log_q(grid, x, prm, variant),
        |x| x.iter_mut().for_each(|v| *v = v.abs()),
        start.to_flat(),
        &pre,
        &opts,
    );
    (-out.f, out.x, out.iterations, out.grad_norm)
}

pub fn maximize_quotient(beta: f64, p: f64, variant: Variant, grid: &Arc<RadialGrid>, cfg: &QuotientConfig) -> Result<QuotientResult> {
    if !(p > 2.0 && p < 3.0) {
        return Err(LabError::OutOfRegime(format!("quotients are studied for 2 < p < 3, got {p}")));
    }
    if !(beta >= 0.0) {
        return Err(LabError::InvalidArgument(format!("beta = {beta} must be >= 0")));
    }
    let prm = ModelParams { p, lambda: 1.0, beta, kappa: 1.0 };
    let (s, gmax) = g_beta_profile(p, beta)?;
    let w = scalar_ground_state(p, gmax, grid)?;
    let mut starts = vec![split_pair(&w.w, if beta > 0.0 { s } else { 0.5 })];
    for k in 0..cfg.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
        starts.push(VecPair { u: random_profile(grid, &mut rng), v: random_profile(grid, &mut rng) });
    }
    let runs: Vec<(f64, Vec<f64>, usize, f64)> =
        starts.into_par_iter().map(|st| ascend(grid, st, &prm, variant, cfg.max_iters)).collect();
    let start_values: Vec<f64> = runs.iter().map(|r| r.0.exp()).collect();
    let (best_log, x, _, res) = runs
        .iter()
        .filter(|r| r.0.is_finite())
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .cloned()
        .ok_or_else(|| LabError::OutOfRegime("no start produced a positive quotient".into()))?;
    let iterations = runs.iter().map(|r| r.2).sum();
    // rescale the maximizer to the maximum of its own ray
    let pair = VecPair::from_flat(grid, &x);
    let c = fiber_coeffs(&pair, &prm)?;
    let t = (variant.ray_ratio(p) * c.a / c.c).powf(1.0 / (p - 2.0));
    Ok(QuotientResult {
        variant,
        p,
        beta,
        value: best_log.exp(),
        maximizer: pair.scaled(t),
        iterations,
        first_order_residual: res,
        seed: cfg.seed,
        start_values,
    })
}

/// True iff the Nehari defect A + λB − C is strictly positive on every sampled
/// nontrivial pair: `trials` random pairs plus the supplied candidates.
pub fn nonexistence_check(
    lambda: f64,
    beta: f64,
    p: f64,
    grid: &Arc<RadialGrid>,
    trials: usize,
    seed: u64,
    candidates: &[VecPair],
) -> Result<bool> {
    let prm = ModelParams::new(p, lambda, beta, 1.0)?;
    let defect = |pair: &VecPair| fiber_coeffs(pair, &prm).map(|c| c.nehari_defect() > 0.0);
    let random_ok = (0..trials).into_par_iter().map(|k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let mut pair = VecPair { u: random_profile(grid, &mut rng), v: random_profile(grid, &mut rng) };
        // spread the sample over scales: the defect is not scale invariant
        let scale = 10f64.powf(-2.0 + 4.0 * (k as f64 + 0.5) / trials.max(1) as f64);
        pair = pair.scaled(scale);
        defect(&pair)
    });
    let random_ok: Result<Vec<bool>> = random_ok.collect();
    let mut ok = random_ok?.into_iter().all(|b| b);
    for c in candidates.iter().filter(|c| c.is_nontrivial()) {
        ok &= defect(c)?;
    }
    Ok(ok)
}

/// Gradient norm helper for callers that want the stationarity defect of a given pair.
pub fn quotient_stationarity(pair: &VecPair, p: f64, beta: f64, variant: Variant) -> Result<f64> {
    let grid = pair.grid();
    let prm = ModelParams { p, lambda: 1.0, beta, kappa: 1.0 };
    let (_, g) = neg_log_q(grid, &pair.to_flat(), &prm, variant).ok_or(LabError::TrivialPair)?;
    let pre = Preconditioner::new(grid, None);
    Ok(dot(&g, &pre.apply(&g)).max(0.0).sqrt())
}
