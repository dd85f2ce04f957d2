//! Self-check suites run by `nehari-lab verify`: closed-form identities the
//! discretization must reproduce, and inequalities that must hold on random pairs.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coulomb::{cross_energy, hartree_ratio, lions_sides};
use crate::energy::{coercivity_lower_bound, el_residual, pohozaev_general_solution, pohozaev_system_residuals, residual_pairing, total_energy, ModelParams};
use crate::error::{LabError, Result};
use crate::fibering::{g_beta_excess, nehari_times, split_equal, FiberCoeffs};
use crate::radial_core::{random_direction, random_profile, strauss_ratio, RadialGrid, Scheme, VecPair};
use crate::soliton::{scalar_ground_state, sobolev_constants};
use crate::thresholds::young_constant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Inequalities,
    All,
}

impl std::str::FromStr for Suite {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Suite::Identities),
            "inequalities" => Ok(Suite::Inequalities),
            "all" => Ok(Suite::All),
            other => Err(LabError::InvalidArgument(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error or margin, in the units named by `detail`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when value ≤ tolerance.
    fn at_most(name: &'static str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { name, passed: value <= tolerance, value, tolerance, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn random_pair(grid: &Arc<RadialGrid>, seed: u64) -> VecPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VecPair { u: random_profile(grid, &mut rng), v: random_profile(grid, &mut rng) }
}

pub fn run(suite: Suite) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        out.extend(identities()?);
    }
    if matches!(suite, Suite::Inequalities | Suite::All) {
        out.extend(inequalities()?);
    }
    Ok(out)
}

pub fn identities() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    // uniform ball of radius 1; r = 1 is a node of this grid and takes the midpoint value
    let g = RadialGrid::new(4096, 8.0, Scheme::Uniform)?;
    let ball = g.sample(|r| if r < 1.0 - 1e-12 { 1.0 } else if r <= 1.0 + 1e-12 { 0.5 } else { 0.0 });
    let e = cross_energy(&ball, &ball, 1.0);
    out.push(Check::at_most("coulomb_uniform_ball", rel(e, 32.0 * PI * PI / 15.0), 1e-5, "relative error vs 32π²/15"));

    let g = RadialGrid::new(4096, 30.0, Scheme::Log)?;
    let gauss = g.sample(|r| (-r * r).exp());
    let e = cross_energy(&gauss, &gauss, 1.0);
    out.push(Check::at_most("coulomb_gaussian", rel(e, 2f64.sqrt() * PI.powf(2.5)), 1e-5, "relative error vs √2π^{5/2}"));

    let sol = scalar_ground_state(3.0, 1.0, &g)?;
    let nehari = rel(sol.p_integral, sol.norm_h1_sq);
    out.push(Check::at_most("soliton_nehari", nehari, 1e-6, "|‖w‖² − ∫w^p|/‖w‖², p = 3"));
    out.push(Check::at_most("soliton_pohozaev", sol.pohozaev_residual / sol.norm_h1_sq, 1e-5, "scalar Pohozaev residual / ‖w‖², p = 3"));

    // 1 + t² − 3t = 0
    let c = FiberCoeffs { a: 1.0, b: 1.0, c: 3.0, p: 3.0, lambda: 1.0 };
    let r = nehari_times(&c);
    let s5 = 5f64.sqrt();
    let err = match (r.t_minus, r.t_plus) {
        (Some(a), Some(b)) => (a - (3.0 - s5) / 2.0).abs().max((b - (3.0 + s5) / 2.0).abs()),
        _ => f64::INFINITY,
    };
    out.push(Check::at_most("fibering_quadratic_roots", err, 1e-12, "absolute error of (3 ∓ √5)/2"));

    let mut worst: f64 = 0.0;
    let anchors = [((1.0, 0.0, 3.0, 1.0), [3.0, 3.0, 0.0, 6.0]), ((1.0, 1.0, 3.0, 1.0), [4.0, 3.0, 2.0, 9.0])];
    for ((theta, t, p, l), want) in anchors {
        let z = pohozaev_general_solution(theta, t, p, l);
        for k in 0..4 {
            worst = worst.max((z[k] - want[k]).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (theta, t, p, l) =
            (rng.random_range(0.01..10.0), rng.random_range(-5.0..5.0), rng.random_range(2.05..5.95), rng.random_range(0.01..10.0));
        let z = pohozaev_general_solution(theta, t, p, l);
        let scale = z.iter().fold(theta.abs(), |m, v| m.max(v.abs()));
        for r in pohozaev_system_residuals(&z, theta, p, l) {
            worst = worst.max(r.abs() / scale);
        }
    }
    out.push(Check::at_most("pohozaev_general_solution", worst, 1e-13, "worst residual of the linear system"));

    let mut worst: f64 = 0.0;
    let mut gmax_ok = true;
    for p in [2.2, 2.5, 3.0, 3.5, 3.9] {
        for beta in [0.01, 0.1, 1.0, 10.0] {
            let (s, excess) = g_beta_excess(p, beta)?;
            gmax_ok &= excess > 0.0;
            if beta >= 0.5 * (p - 2.0) {
                worst = worst.max((s - 0.5).abs());
            }
        }
    }
    out.push(Check { name: "g_beta_max_above_one", passed: gmax_ok, value: 0.0, tolerance: 0.0, detail: "g_max − 1 > 0 for β > 0".into() });
    out.push(Check::at_most("g_beta_argmax_half", worst, 1e-10, "|s_β − ½| for β ≥ (p−2)/2"));

    let g = RadialGrid::new(1024, 30.0, Scheme::Log)?;
    let prm = ModelParams::new(2.5, 1.0, 1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let z = random_pair(&g, 100 + k).u;
        let sr = split_equal(&z, &prm)?;
        worst = worst.max(rel(sr.direct_drop, sr.energy_drop));
    }
    out.push(Check::at_most("split_energy_gap", worst, 1e-9, "relative gap error vs ((g_max−1)/p)∫|z|^p"));

    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let x = random_pair(&g, 200 + k);
        let d = random_direction(&x, &mut ChaCha8Rng::seed_from_u64(300 + k));
        let res = el_residual(&x, &prm);
        let analytic = residual_pairing(&res, &d);
        let h = 1e-5;
        let plus = VecPair { u: x.u.add_scaled(&d.u, h), v: x.v.add_scaled(&d.v, h) };
        let minus = VecPair { u: x.u.add_scaled(&d.u, -h), v: x.v.add_scaled(&d.v, -h) };
        let fd = (total_energy(&plus, &prm).total - total_energy(&minus, &prm).total) / (2.0 * h);
        worst = worst.max(rel(analytic, fd));
    }
    out.push(Check::at_most("gradient_consistency", worst, 1e-5, "relative error of ⟨J′, d⟩ vs central differences"));
    Ok(out)
}

pub fn inequalities() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let g = RadialGrid::new(1024, 30.0, Scheme::Log)?;
    let prm = ModelParams::new(2.5, 1.0, 1.0, 1.0)?;
    let consts = sobolev_constants(prm.p, &g)?;
    let pairs: Vec<VecPair> = (0..200).map(|k| random_pair(&g, 1000 + k)).collect();

    let mut worst = f64::NEG_INFINITY;
    for pair in &pairs {
        for first in [true, false] {
            let (lhs, rhs) = lions_sides(pair, 1.0, prm.kappa, first)?;
            worst = worst.max(lhs / rhs);
        }
    }
    out.push(Check::at_most("lions_inequality", worst, 1.0, "max lhs/rhs at a = 1"));

    let k = 1.0 / consts.coulomb_product(prm.kappa);
    let mut worst = f64::NEG_INFINITY;
    for pair in &pairs {
        worst = worst.max(hartree_ratio(pair, prm.kappa)? / k);
    }
    out.push(Check::at_most("hartree_bound", worst, 1.0, "max ∫φρ/(K‖(u,v)‖⁴)"));

    let mut worst = f64::NEG_INFINITY;
    for pair in &pairs {
        let j = total_energy(pair, &prm).total;
        worst = worst.max(coercivity_lower_bound(pair, &prm) - j);
    }
    out.push(Check::at_most("coercivity_bound", worst, 0.0, "max (lower bound − J)"));

    let mut worst = f64::NEG_INFINITY;
    for beta in [0.0, 0.5, 1.0, 10.0] {
        let c = young_constant(prm.p, beta)?;
        for i in 1..=4000 {
            let w = i as f64 * 1e-3;
            worst = worst.max((1.0 + beta) / prm.p * w.powf(prm.p) - 0.5 * w * w - c * w.powi(3));
        }
    }
    out.push(Check::at_most("young_inequality", worst, 1e-14, "max ((1+β)/p)w^p − ½w² − C_{p,β}w³"));

    let bound = 1.0 / (4.0 * PI).sqrt();
    let mut worst = f64::NEG_INFINITY;
    for pair in &pairs {
        worst = worst.max(strauss_ratio(&pair.u)?);
    }
    out.push(Check::at_most("strauss_decay", worst, bound, "max r|u(r)|/‖u‖_{H¹} vs 1/√(4π)"));
    Ok(out)
}
