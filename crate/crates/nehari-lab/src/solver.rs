//! Solvers for the coupled system: the negative-energy global minimizer of J
//! and the positive-energy minimizer of J on the Minus part of the Nehari
//! manifold, followed by ground-state certification.

use std::sync::Arc;

use serde::Serialize;

use crate::energy::{el_residual, pohozaev_from, total_energy, EnergyBreakdown, ModelParams, PohozaevData};
use crate::error::{LabError, Result};
use crate::fibering::{
    branch_time, classify_coeffs, fiber_coeffs, g_beta_profile, nehari_times, split_equal, split_pair, Branch,
    FiberCoeffs, NehariClass, NEHARI_TOL,
};
use crate::optim::{energy_and_gradient, lbfgs, newton_polish, LbfgsOptions, Preconditioner};
use crate::radial_core::{RadialFn, RadialGrid, VecPair};
use crate::soliton::{scalar_ground_state, SobolevConstants};
use crate::thresholds::{p_g3, prop_g3_certificate, prop_t6_certificate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Length of the first (preconditioned) descent step.
    pub step0: f64,
    pub tol_residual: f64,
    pub tol_energy: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_iters: 20_000, step0: 1.0, tol_residual: 1e-8, tol_energy: 1e-13, seed: 0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.step0 > 0.0) || !(self.tol_residual > 0.0) || !(self.tol_energy > 0.0) {
            return Err(LabError::InvalidArgument("solver settings must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateSource {
    T6,
    G3,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Global,
    NehariMinus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub params: ModelParams,
    #[serde(skip)]
    pub pair: VecPair,
    pub breakdown: EnergyBreakdown,
    pub residual: f64,
    /// |A + λB − C| / A.
    pub nehari_defect: f64,
    pub nehari_class: Option<NehariClass>,
    pub poho: PohozaevData,
    pub vectorial: bool,
    pub positive: bool,
    /// ‖u − v‖/‖u + v‖ in L².
    pub asymmetry: f64,
    pub u_mass: f64,
    pub v_mass: f64,
    pub certified_ground_state: bool,
    pub certificate_source: CertificateSource,
    pub iterations: usize,
    pub converged: bool,
    pub trivial_limit: bool,
}

impl SolveReport {
    fn build(mode: SolveMode, pair: VecPair, prm: &ModelParams, cfg: &SolverConfig, iterations: usize) -> Self {
        let breakdown = total_energy(&pair, prm);
        let a = breakdown.kinetic + breakdown.mass;
        let trivial = !(a > 1e-20);
        let residual = el_residual(&pair, prm).norm;
        let (nehari_defect, nehari_class) = if trivial {
            (0.0, None)
        } else {
            let c = FiberCoeffs { a, b: breakdown.hartree, c: breakdown.coupling, p: prm.p, lambda: prm.lambda };
            (c.nehari_defect().abs() / a, classify_coeffs(&c).ok().map(|d| d.class))
        };
        let (nu, nv) = (pair.u.l2_norm(), pair.v.l2_norm());
        let vectorial = !trivial && nu.min(nv) > 1e-3 * (nu + nv);
        let grid = pair.grid();
        let half = grid.r_max / 2.0;
        let positive = !trivial
            && (0..grid.n).filter(|&i| grid.nodes[i] < half).all(|i| pair.u.values[i] > 0.0 && pair.v.values[i] > 0.0);
        let diff = grid.integrate_with(|i| (pair.u.values[i] - pair.v.values[i]).powi(2)).sqrt();
        let sum = grid.integrate_with(|i| (pair.u.values[i] + pair.v.values[i]).powi(2)).sqrt();
        SolveReport {
            mode,
            params: *prm,
            breakdown,
            residual,
            nehari_defect,
            nehari_class,
            poho: pohozaev_from(&breakdown, prm),
            vectorial,
            positive,
            asymmetry: if sum > 0.0 { diff / sum } else { 0.0 },
            u_mass: nu * nu,
            v_mass: nv * nv,
            certified_ground_state: false,
            certificate_source: CertificateSource::None,
            iterations,
            converged: !trivial && residual <= cfg.tol_residual,
            trivial_limit: trivial,
            pair,
        }
    }
}

/// The split soliton (√s_β w_β, √(1−s_β) w_β), where w_β solves the scalar
/// problem with coefficient g_β(s_β). For β = 0 the equal split is used.
pub fn split_soliton(prm: &ModelParams, grid: &Arc<RadialGrid>) -> Result<VecPair> {
    let (s, gmax) = g_beta_profile(prm.p, prm.beta)?;
    let w = scalar_ground_state(prm.p, gmax, grid)?;
    Ok(split_pair(&w.w, if prm.beta > 0.0 { s } else { 0.5 }))
}

/// A start for `minimize_nehari_minus`: the split soliton when its ray has a
/// Minus root, else the first dilation w(σr) (σ = 2, 4, ½, ¼) whose ray does.
/// The semitrivial (w, 0) and its dilations come last; for β = 0 the equal
/// split carries less coupling than (w, 0) and may have no Minus root at all.
pub fn minus_seed(prm: &ModelParams, grid: &Arc<RadialGrid>) -> Result<VecPair> {
    let (s, gmax) = g_beta_profile(prm.p, prm.beta)?;
    let w = scalar_ground_state(prm.p, gmax, grid)?.w;
    let seed = split_pair(&w, if prm.beta > 0.0 { s } else { 0.5 });
    let c = fiber_coeffs(&seed, prm)?;
    let err = match branch_time(&c, Branch::Minus) {
        Ok(_) => return Ok(seed),
        Err(e) => e,
    };
    let semitrivial = split_pair(&w, 1.0);
    let dilations = [2.0, 4.0, 0.5, 0.25].map(|sigma| (&seed, sigma));
    let fallback = [1.0, 2.0, 4.0, 0.5, 0.25].map(|sigma| (&semitrivial, sigma));
    for (base, sigma) in dilations.into_iter().chain(fallback) {
        let d = if sigma == 1.0 { base.clone() } else { VecPair { u: dilate(&base.u, sigma), v: dilate(&base.v, sigma) } };
        if let Ok(c) = fiber_coeffs(&d, prm) {
            if branch_time(&c, Branch::Minus).is_ok() {
                return Ok(d);
            }
        }
    }
    Err(err)
}

/// z(σr) by linear interpolation, zero beyond r_max.
fn dilate(z: &RadialFn, sigma: f64) -> RadialFn {
    let g = &z.grid;
    let values = g
        .nodes
        .iter()
        .map(|&r| {
            let x = sigma * r;
            if x >= g.r_max {
                return 0.0;
            }
            let k = g.nodes.partition_point(|&nd| nd <= x).clamp(1, g.n - 1);
            let (r0, r1) = (g.nodes[k - 1], g.nodes[k]);
            let w = (x - r0) / (r1 - r0);
            (1.0 - w) * z.values[k - 1] + w * z.values[k]
        })
        .collect();
    RadialFn { grid: Arc::clone(g), values }
}

fn abs_project(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.abs());
}

fn lbfgs_options(cfg: &SolverConfig) -> LbfgsOptions {
    LbfgsOptions { memory: 12, max_iters: cfg.max_iters, gtol: 1e-6, ftol: cfg.tol_energy, step0: cfg.step0 }
}

/// Pairs whose H-norm drops below this fraction of the start are treated as collapsed.
const COLLAPSE_RATIO: f64 = 1e-10;

fn descend_global(x0: Vec<f64>, prm: &ModelParams, grid: &Arc<RadialGrid>, cfg: &SolverConfig) -> (Vec<f64>, usize) {
    let pre = Preconditioner::new(grid, None);
    let out = lbfgs(
        |x| {
            let (f, g) = energy_and_gradient(grid, x, prm);
            f.is_finite().then_some((f, g))
        },
        abs_project,
        x0,
        &pre,
        &lbfgs_options(cfg),
    );
    (out.x, out.iterations)
}

/// Minimizes J over nonnegative pairs starting from the split soliton scaled
/// to its Plus Nehari time (or unscaled when that root is absent).
/// J is bounded below only for p < 3; above that the dilations t²u(tx) send it to −∞.
pub fn minimize_global(prm: &ModelParams, grid: &Arc<RadialGrid>, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    check_global_regime(prm)?;
    let seed = split_soliton(prm, grid)?;
    let c = fiber_coeffs(&seed, prm)?;
    let t = branch_time(&c, Branch::Plus).unwrap_or(1.0);
    minimize_global_from(prm, grid, cfg, seed.scaled(t))
}

pub fn minimize_global_from(prm: &ModelParams, grid: &Arc<RadialGrid>, cfg: &SolverConfig, init: VecPair) -> Result<SolveReport> {
    cfg.validate()?;
    check_global_regime(prm)?;
    if !init.is_nontrivial() {
        return Err(LabError::TrivialPair);
    }
    let a0 = fiber_coeffs(&init, prm)?.a;
    let (mut x, mut iters) = descend_global(init.to_flat(), prm, grid, cfg);
    let mut report = finish_global(x.clone(), prm, grid, cfg, iters, a0);
    // a semitrivial limit is never a minimizer when β > 0: split it and continue
    if prm.beta > 0.0 && !report.trivial_limit && !report.vectorial {
        let z = if report.u_mass >= report.v_mass { &report.pair.u } else { &report.pair.v };
        let split = split_equal(z, prm)?;
        let next = split_pair(z, split.s_z);
        let (x2, it2) = descend_global(next.to_flat(), prm, grid, cfg);
        x = x2;
        iters += it2;
        report = finish_global(x, prm, grid, cfg, iters, a0);
    }
    Ok(report)
}

pub fn check_global_regime(prm: &ModelParams) -> Result<()> {
    if prm.p >= 3.0 {
        return Err(LabError::OutOfRegime(format!("global minimization needs 2 < p < 3, got p = {}", prm.p)));
    }
    Ok(())
}

fn finish_global(x: Vec<f64>, prm: &ModelParams, grid: &Arc<RadialGrid>, cfg: &SolverConfig, iters: usize, a0: f64) -> SolveReport {
    let pair = VecPair::from_flat(grid, &x);
    let a = fiber_coeffs(&pair, prm).map(|c| c.a).unwrap_or(0.0);
    if a <= COLLAPSE_RATIO * a0 {
        return SolveReport::build(SolveMode::Global, VecPair::zeros(grid), prm, cfg, iters);
    }
    let (xp, steps) = newton_polish(grid, &x, prm, 1e-3 * cfg.tol_residual, 30);
    // keep the polished point only if it stays a nonnegative descent limit
    let polished = VecPair::from_flat(grid, &xp);
    let use_polished = xp.iter().all(|v| *v >= -1e-12 * a0.sqrt())
        && total_energy(&polished, prm).total <= total_energy(&pair, prm).total + 1e-9 * a0;
    let pair = if use_polished { VecPair::from_flat(grid, &xp.iter().map(|v| v.max(0.0)).collect::<Vec<_>>()) } else { pair };
    SolveReport::build(SolveMode::Global, pair, prm, cfg, iters + steps)
}

/// Minimizes J over the Minus part of the Nehari manifold: the objective is
/// x ↦ J(t⁻(x)x), whose gradient is t⁻·∇J(t⁻x) because h'(t⁻) = 0.
pub fn minimize_nehari_minus(prm: &ModelParams, grid: &Arc<RadialGrid>, cfg: &SolverConfig, init: &VecPair) -> Result<SolveReport> {
    cfg.validate()?;
    let c = fiber_coeffs(init, prm)?;
    branch_time(&c, Branch::Minus)?;
    let mut report = descend_minus(prm, grid, cfg, init)?;
    // a semitrivial critical point sits above the scalar level when β > 0; restart from its split
    if prm.beta > 0.0 && report.converged && !report.vectorial {
        let z = if report.u_mass >= report.v_mass { report.pair.u.clone() } else { report.pair.v.clone() };
        let split = split_equal(&z, prm)?;
        let restart = descend_minus(prm, grid, cfg, &split_pair(&z, split.s_z))?;
        report = SolveReport { iterations: report.iterations + restart.iterations, ..restart };
    }
    Ok(report)
}

fn minus_time(grid: &RadialGrid, x: &[f64], prm: &ModelParams) -> Option<f64> {
    let n = grid.n;
    let s = crate::energy::pair_state(grid, &x[..n], &x[n..], prm);
    let c = FiberCoeffs { a: s.a(), b: s.hartree, c: s.coupling, p: prm.p, lambda: prm.lambda };
    if !(c.a > 0.0) {
        return None;
    }
    let roots = nehari_times(&c);
    match roots.class_minus {
        Some(NehariClass::Minus) => roots.t_minus,
        _ => None,
    }
}

fn descend_minus(prm: &ModelParams, grid: &Arc<RadialGrid>, cfg: &SolverConfig, init: &VecPair) -> Result<SolveReport> {
    let pre = Preconditioner::new(grid, None);
    let objective = |x: &[f64]| {
        let t = minus_time(grid, x, prm)?;
        let xt: Vec<f64> = x.iter().map(|v| t * v).collect();
        let (f, g) = energy_and_gradient(grid, &xt, prm);
        Some((f, g.into_iter().map(|v| t * v).collect::<Vec<_>>()))
    };
    // normalize the start onto its Minus time
    let t0 = minus_time(grid, &init.to_flat(), prm).ok_or_else(|| LabError::NoBranch(nehari_times(&fiber_coeffs(init, prm).unwrap_or(FiberCoeffs { a: 0.0, b: 0.0, c: 0.0, p: prm.p, lambda: prm.lambda }))))?;
    let x0: Vec<f64> = init.to_flat().iter().map(|v| t0 * v).collect();
    let out = lbfgs(objective, abs_project, x0, &pre, &lbfgs_options(cfg));
    let t = minus_time(grid, &out.x, prm).ok_or_else(|| {
        let pair = VecPair::from_flat(grid, &out.x);
        LabError::NoBranch(nehari_times(&fiber_coeffs(&pair, prm).expect("nontrivial iterate")))
    })?;
    let x: Vec<f64> = out.x.iter().map(|v| t * v).collect();
    let (xp, steps) = newton_polish(grid, &x, prm, 1e-3 * cfg.tol_residual, 30);
    let polished = VecPair::from_flat(grid, &xp);
    // accept the polish only if it stays on the Minus branch and nonnegative
    let keep = xp.iter().all(|v| *v >= -1e-12)
        && fiber_coeffs(&polished, prm).ok().and_then(|c| classify_coeffs(&c).ok()).map(|d| d.class)
            == Some(NehariClass::Minus);
    let pair = if keep { VecPair::from_flat(grid, &xp.iter().map(|v| v.max(0.0)).collect::<Vec<_>>()) } else { VecPair::from_flat(grid, &x) };
    Ok(SolveReport::build(SolveMode::NehariMinus, pair, prm, cfg, out.iterations + steps))
}

/// Marks a converged nontrivial report as a ground state when one of the two
/// Minus-branch certificates applies and the report is itself Minus.
pub fn certify_ground_state(mut report: SolveReport, prm: &ModelParams, consts: &SobolevConstants) -> SolveReport {
    report.certified_ground_state = false;
    report.certificate_source = CertificateSource::None;
    if !report.converged || report.trivial_limit || report.nehari_class != Some(NehariClass::Minus) {
        return report;
    }
    if prm.p >= p_g3() {
        if let Ok(cert) = prop_g3_certificate(&report.pair, prm) {
            if cert.accepted && cert.consistent {
                report.certified_ground_state = true;
                report.certificate_source = CertificateSource::G3;
                return report;
            }
        }
    }
    if (3.0..4.0).contains(&prm.p) {
        if let Ok(cert) = prop_t6_certificate(report.breakdown.total, prm.lambda, prm.p, consts) {
            if cert.accepted {
                report.certified_ground_state = true;
                report.certificate_source = CertificateSource::T6;
            }
        }
    }
    report
}

/// Manifold defect tolerance used by the report checks.
pub const DEFECT_TOL: f64 = 1e-8;

impl SolveReport {
    /// Converged, nontrivial and on the manifold to `DEFECT_TOL`.
    pub fn is_solution(&self) -> bool {
        self.converged && !self.trivial_limit && self.nehari_defect < DEFECT_TOL.max(NEHARI_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::Scheme;
    use crate::soliton::sobolev_constants;
    use crate::thresholds::lambda0;

    #[test]
    fn global_solve_rejects_p_at_least_three() {
        let g = RadialGrid::new(256, 30.0, Scheme::Log).unwrap();
        let prm = ModelParams::new(3.5, 0.1, 1.0, 1.0).unwrap();
        assert!(matches!(minimize_global(&prm, &g, &SolverConfig::default()), Err(LabError::OutOfRegime(_))));
    }

    #[test]
    fn minus_seed_falls_back_to_semitrivial_at_beta_zero() {
        let g = RadialGrid::new(1024, 30.0, Scheme::Log).unwrap();
        let consts = sobolev_constants(3.0, &g).unwrap();
        let prm = ModelParams::new(3.0, 0.5 * lambda0(3.0, &consts), 0.0, 1.0).unwrap();
        // the equal split has no Minus root here
        let split = split_soliton(&prm, &g).unwrap();
        assert!(branch_time(&fiber_coeffs(&split, &prm).unwrap(), Branch::Minus).is_err());
        let seed = minus_seed(&prm, &g).unwrap();
        assert!(branch_time(&fiber_coeffs(&seed, &prm).unwrap(), Branch::Minus).is_ok());
        assert!(seed.v.max_abs() == 0.0);
    }
}
