//! N truncated solitons on a line with centres N³ apart. With disjoint
//! supports every integral of the configuration is a per-bump integral times N,
//! except the Hartree term, whose off-diagonal part is the Newton interaction
//! κq²/d of spherical clusters. Along the Plus branch the energy then scales
//! like N times a negative number, so it is unbounded below.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::coulomb::hartree_energy;
use crate::energy::ModelParams;
use crate::error::{LabError, Result};
use crate::fibering::{branch_time, g_beta_profile, nehari_times, Branch, FiberCoeffs};
use crate::radial_core::{h1_norm_sq, lp_norm_pow, RadialFn, VecPair};
use crate::soliton::{scalar_ground_state, SobolevConstants};

/// C¹ cutoff: 1 on [0, R0/2], 0 on [R0, ∞), cubic smoothstep in between.
/// Its slope is at most 3/R0, so |∇ψ| ≤ 1 once R0 ≥ 3.
pub fn cutoff(r: f64, r0: f64) -> f64 {
    let x = (r - 0.5 * r0) / (0.5 * r0);
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        1.0 - x * x * (3.0 - 2.0 * x)
    }
}

pub fn truncate(w: &RadialFn, r0: f64) -> Result<RadialFn> {
    let g = &w.grid;
    if !(r0 > 0.0 && r0 < 0.5 * g.r_max) {
        return Err(LabError::InvalidArgument(format!("R0 = {r0} must lie in (0, r_max/2 = {})", 0.5 * g.r_max)));
    }
    let values = g.nodes.iter().zip(&w.values).map(|(r, v)| v * cutoff(*r, r0)).collect();
    RadialFn::new(g, values)
}

/// Single-bump integrals of u = w·ψ_{R0}, where w solves −Δw + w = g_β(s_β)w^{p−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerBump {
    /// ‖u‖²_{H¹}.
    pub h1_sq: f64,
    /// g_β(s_β)∫|u|^p.
    pub p_integral: f64,
    /// ∫φ_u u² with the model's κ.
    pub hartree_self: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct BumpConfig {
    pub R0: f64,
    pub N: usize,
    pub spacing: f64,
    /// ∫u² per bump.
    pub q: f64,
    pub per_bump: PerBump,
}

impl BumpConfig {
    pub fn new(bump: &Bump, n: usize) -> Result<Self> {
        let spacing = (n as f64).powi(3);
        let cfg = BumpConfig { R0: bump.r0, N: n, spacing, q: bump.q, per_bump: bump.per_bump };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.N == 0 {
            return Err(LabError::InvalidArgument("bump count must be >= 1".into()));
        }
        // a single bump has no neighbour to overlap with
        if self.N > 1 && !(self.spacing > 2.0 * self.R0) {
            return Err(LabError::Overlap { spacing: self.spacing, r0: self.R0 });
        }
        if !(self.q > 0.0) {
            return Err(LabError::TrivialPair);
        }
        Ok(())
    }

    /// Σ_{i≠j} κq²/(|i−j|·spacing).
    pub fn cross_term(&self, kappa: f64) -> f64 {
        let n = self.N;
        if n < 2 {
            return 0.0;
        }
        let harmonic: f64 = (1..n).map(|k| (n - k) as f64 / k as f64).sum();
        2.0 * kappa * self.q * self.q * harmonic / self.spacing
    }

    /// κq²(N²−N)/(N³−2R0).
    pub fn cross_bound(&self, kappa: f64) -> f64 {
        if self.N < 2 {
            return 0.0;
        }
        let n = self.N as f64;
        kappa * self.q * self.q * (n * n - n) / (n.powi(3) - 2.0 * self.R0)
    }

    /// Fibering coefficients of the N-bump pair (√s w_N, √(1−s) w_N).
    pub fn coeffs(&self, prm: &ModelParams) -> FiberCoeffs {
        let n = self.N as f64;
        let pb = &self.per_bump;
        FiberCoeffs {
            a: n * pb.h1_sq,
            b: n * pb.hartree_self + self.cross_term(prm.kappa),
            c: n * pb.p_integral,
            p: prm.p,
            lambda: prm.lambda,
        }
    }
}

/// t^{−2}A − t^{p−4}C, the Coulomb-free part of t^{−3}h'(t).
pub fn eta(c: &FiberCoeffs, t: f64) -> f64 {
    c.a / (t * t) - t.powf(c.p - 4.0) * c.c
}

/// J of the N-bump configuration scaled by t.
pub fn bump_energy(prm: &ModelParams, cfg: &BumpConfig, t: f64) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.coeffs(prm).h(t))
}

/// One truncated soliton together with its cached integrals.
#[derive(Debug, Clone)]
pub struct Bump {
    pub r0: f64,
    pub s_beta: f64,
    pub g_max: f64,
    pub u: RadialFn,
    pub q: f64,
    pub per_bump: PerBump,
}

impl Bump {
    pub fn new(prm: &ModelParams, w: &RadialFn, g_max: f64, s_beta: f64, r0: f64) -> Result<Self> {
        let u = truncate(w, r0)?;
        let h1_sq = h1_norm_sq(&u);
        let p_integral = g_max * lp_norm_pow(&u, prm.p)?;
        let zero = u.grid.zeros();
        let hartree_self = hartree_energy(&VecPair { u: u.clone(), v: zero }, prm.kappa);
        let q = u.l2_norm().powi(2);
        Ok(Bump { r0, s_beta, g_max, u, q, per_bump: PerBump { h1_sq, p_integral, hartree_self } })
    }

    /// The truncated pair (√s u, √(1−s) u) whose energy the N = 1 curve point reproduces.
    pub fn pair(&self) -> VecPair {
        VecPair { u: self.u.scaled(self.s_beta.sqrt()), v: self.u.scaled((1.0 - self.s_beta).sqrt()) }
    }

    /// Both sides of the smallness condition on the truncated bump that
    /// makes the N-bump ray cross the Nehari manifold twice:
    /// (λ/4)K⁻¹‖u‖² < ((p−2)/(2p))((4−p)/p)^{(4−p)/(p−2)}(g∫|u|^p/‖u‖²)^{2/(p−2)}.
    pub fn smallness_sides(&self, prm: &ModelParams, consts: &SobolevConstants) -> (f64, f64) {
        let p = prm.p;
        let pb = &self.per_bump;
        let lhs = 0.25 * prm.lambda * pb.h1_sq / consts.coulomb_product(prm.kappa);
        let rhs = (p - 2.0) / (2.0 * p)
            * ((4.0 - p) / p).powf((4.0 - p) / (p - 2.0))
            * (pb.p_integral / pb.h1_sq).powf(2.0 / (p - 2.0));
        (lhs, rhs)
    }
}

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct BumpCurve {
    /// Truncation radius actually used (possibly enlarged from the request).
    pub R0: f64,
    pub q: f64,
    pub per_bump: PerBump,
    /// The Coulomb-free Nehari time, (2A/((4−p)C))^{1/(p−2)}; independent of N.
    pub inner_time: f64,
    pub Ns: Vec<usize>,
    pub spacings: Vec<f64>,
    /// Minus- and Plus-branch times per N.
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub energies: Vec<f64>,
    pub cross_terms: Vec<f64>,
    pub bounds: Vec<f64>,
}

impl BumpCurve {
    pub fn energies_decreasing(&self) -> bool {
        self.energies.windows(2).all(|w| w[1] < w[0])
    }

    pub fn cross_terms_bounded(&self) -> bool {
        self.cross_terms.iter().zip(&self.bounds).all(|(c, b)| c <= b)
    }

    /// CSV with columns N,spacing,t2,J,cross_term,bound.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,spacing,t2,J,cross_term,bound\n");
        for i in 0..self.Ns.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.Ns[i], self.spacings[i], self.t2[i], self.energies[i], self.cross_terms[i], self.bounds[i]
            ));
        }
        out
    }
}

/// Step by which R0 grows while the smallness condition fails.
const R0_STEP: f64 = 0.25;

/// Builds the bump at radius `r0`, enlarging it until the smallness condition
/// holds, then evaluates the Plus-branch energy for every N in `ns`.
pub fn bump_curve(prm: &ModelParams, r0: f64, ns: &[usize], consts: &SobolevConstants, grid: &Arc<crate::radial_core::RadialGrid>) -> Result<BumpCurve> {
    if ns.is_empty() {
        return Err(LabError::InvalidArgument("empty bump-count list".into()));
    }
    if !(prm.p > 2.0 && prm.p < 4.0) || !(prm.lambda > 0.0) {
        return Err(LabError::OutOfRegime(format!("multibump needs 2 < p < 4 and λ > 0, got p = {}, λ = {}", prm.p, prm.lambda)));
    }
    let (s, gmax) = g_beta_profile(prm.p, prm.beta)?;
    let w = scalar_ground_state(prm.p, gmax, grid)?;
    let mut r = r0;
    let bump = loop {
        let b = Bump::new(prm, &w.w, gmax, s, r)?;
        let (lhs, rhs) = b.smallness_sides(prm, consts);
        if lhs < rhs {
            break b;
        }
        r += R0_STEP;
        if r >= 0.5 * grid.r_max {
            return Err(LabError::OutOfRegime(format!("smallness condition fails for every R0 below r_max/2 ({lhs:e} >= {rhs:e})")));
        }
    };
    let cfgs: Vec<BumpConfig> = ns.iter().map(|&n| BumpConfig::new(&bump, n)).collect::<Result<_>>()?;
    let pts: Vec<(f64, f64, f64)> = cfgs
        .par_iter()
        .map(|cfg| {
            let c = cfg.coeffs(prm);
            let t2 = branch_time(&c, Branch::Plus)?;
            let t1 = nehari_times(&c).t_minus.unwrap_or(f64::NAN);
            Ok((t1, t2, c.h(t2)))
        })
        .collect::<Result<_>>()?;
    let pb = bump.per_bump;
    Ok(BumpCurve {
        R0: bump.r0,
        q: bump.q,
        per_bump: pb,
        inner_time: (2.0 * pb.h1_sq / ((4.0 - prm.p) * pb.p_integral)).powf(1.0 / (prm.p - 2.0)),
        Ns: ns.to_vec(),
        spacings: cfgs.iter().map(|c| c.spacing).collect(),
        t1: pts.iter().map(|x| x.0).collect(),
        t2: pts.iter().map(|x| x.1).collect(),
        energies: pts.iter().map(|x| x.2).collect(),
        cross_terms: cfgs.iter().map(|c| c.cross_term(prm.kappa)).collect(),
        bounds: cfgs.iter().map(|c| c.cross_bound(prm.kappa)).collect(),
    })
}
