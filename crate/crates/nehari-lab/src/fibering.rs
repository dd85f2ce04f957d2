//! Fibering-map algebra. Along a ray t ↦ t(u,v):
//! h(t) = (t²/2)A + (λt⁴/4)B − (t^p/p)C, with A = ‖(u,v)‖²_H, B = ∫φρ, C = ∫F_β.
//! Positive critical points of h are the roots of A + λBt² − Ct^{p−2} = 0.

use serde::Serialize;

use crate::energy::{pair_state, scalar_energy, total_energy, ModelParams};
use crate::error::{LabError, Result};
use crate::radial_core::{lp_norm_pow, RadialFn, VecPair};
use crate::soliton::SobolevConstants;

/// Relative tolerance for manifold membership and for h'' degeneracy.
pub const NEHARI_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberCoeffs {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub p: f64,
    pub lambda: f64,
}

impl FiberCoeffs {
    pub fn h(&self, t: f64) -> f64 {
        0.5 * t * t * self.a + 0.25 * self.lambda * t.powi(4) * self.b - t.powf(self.p) / self.p * self.c
    }

    pub fn hp(&self, t: f64) -> f64 {
        t * self.a + self.lambda * t.powi(3) * self.b - t.powf(self.p - 1.0) * self.c
    }

    pub fn hpp(&self, t: f64) -> f64 {
        self.a + 3.0 * self.lambda * t * t * self.b - (self.p - 1.0) * t.powf(self.p - 2.0) * self.c
    }

    /// ⟨J'(pair), pair⟩ = A + λB − C.
    pub fn nehari_defect(&self) -> f64 {
        self.a + self.lambda * self.b - self.c
    }

    /// h''(1) in the form −(p−2)A + λ(4−p)B.
    pub fn h2_primary(&self) -> f64 {
        -(self.p - 2.0) * self.a + self.lambda * (4.0 - self.p) * self.b
    }

    /// h''(1) in the form −2A + (4−p)C, equal to the primary form on the manifold.
    pub fn h2_alternate(&self) -> f64 {
        -2.0 * self.a + (4.0 - self.p) * self.c
    }

    /// Coefficients of the pair t·(u,v).
    pub fn scaled(&self, t: f64) -> FiberCoeffs {
        FiberCoeffs { a: t * t * self.a, b: t.powi(4) * self.b, c: t.powf(self.p) * self.c, ..*self }
    }

    fn root_fn(&self, t: f64) -> f64 {
        self.a + self.lambda * self.b * t * t - self.c * t.powf(self.p - 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NehariClass {
    Minus,
    Zero,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Minus,
    Plus,
}

/// Positive Nehari times of a ray. With two roots, `t_minus` < `t_plus`.
/// A single root is either degenerate (class Zero, when λB > 0) or the unique
/// Minus root of the Coulomb-free case λB = 0; it is stored in `t_minus`
/// unless its class is Plus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NehariRoots {
    pub count: usize,
    pub t_minus: Option<f64>,
    pub t_plus: Option<f64>,
    pub class_minus: Option<NehariClass>,
    pub class_plus: Option<NehariClass>,
}

impl NehariRoots {
    fn none() -> Self {
        NehariRoots { count: 0, t_minus: None, t_plus: None, class_minus: None, class_plus: None }
    }
}

/// Maximum point s_β and value of g_β(s) = s^{p/2} + (1−s)^{p/2} + 2βs^{p/4}(1−s)^{p/4}.
/// g is symmetric about ½; the maximizer in [0, ½] is returned.
pub fn g_beta_profile(p: f64, beta: f64) -> Result<(f64, f64)> {
    let (s, excess) = g_beta_excess(p, beta)?;
    Ok((s, 1.0 + excess))
}

/// Maximum point s_β and g_β(s_β) − 1, evaluated without cancellation.
/// For small β the maximizer sits in a boundary layer s ≈ β^{4/(4−p)} and the
/// excess can be far below the spacing of doubles near 1, so g_max itself
/// rounds to 1 while the excess stays positive.
pub fn g_beta_excess(p: f64, beta: f64) -> Result<(f64, f64)> {
    if !(p > 2.0 && p < 4.0) {
        return Err(LabError::InvalidArgument(format!("p = {p} outside (2, 4)")));
    }
    if !(beta >= 0.0) {
        return Err(LabError::InvalidArgument(format!("beta = {beta} must be >= 0")));
    }
    if beta == 0.0 {
        return Ok((0.0, 0.0));
    }
    let q = 0.5 * p;
    let g = |s: f64| g_beta(s, q, beta);
    // coarse scan to locate the basin; g' is unbounded at s = 0
    let m = 2000;
    let mut best = (0usize, g(0.0));
    for k in 1..=m {
        let s = 0.5 * k as f64 / m as f64;
        let val = g(s);
        if val > best.1 {
            best = (k, val);
        }
    }
    let mut candidates = vec![boundary_layer_max(q, beta)];
    if best.0 > 0 {
        candidates.push(interior_max(q, beta, best.0, m));
    }
    let (s, e) = candidates
        .into_iter()
        .map(|s| (s, g_excess(s, q, beta)))
        .fold((0.0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
    Ok((s, e))
}

/// Golden-section search in the scan cell around index k, then Newton on g'.
fn interior_max(q: f64, beta: f64, k: usize, m: usize) -> f64 {
    let g = |s: f64| g_beta(s, q, beta);
    let h = 0.5 / m as f64;
    let (mut lo, mut hi) = ((k as f64 - 1.0) * h, ((k as f64 + 1.0) * h).min(1.0 - 1e-300));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
        }
    }
    let mut s = 0.5 * (lo + hi);
    // Newton polish on g'(s) = 0; the golden search is only accurate to √ε in s
    for _ in 0..50 {
        let (d1, d2) = g_beta_derivs(s, q, beta);
        if d2 >= 0.0 {
            break;
        }
        let next = s - d1 / d2;
        if !(next > 0.0 && next < 1.0) {
            break;
        }
        let done = (next - s).abs() <= 1e-16;
        s = next;
        if done {
            break;
        }
    }
    if s > 0.5 {
        1.0 - s
    } else {
        s
    }
}

/// Local maximum near s = 0. Balancing the slopes of −qs and 2βs^{q/2} gives
/// s ≈ β^{4/(4−p)}; Newton on g' in the variable ln s refines it.
fn boundary_layer_max(q: f64, beta: f64) -> f64 {
    let h = 0.5 * q;
    let mut x = beta.ln() / (1.0 - h);
    for _ in 0..100 {
        let s = x.exp();
        if !(s > 0.0 && s < 0.5) {
            x = x.min(0.5f64.ln());
            break;
        }
        let (d1, d2) = g_beta_derivs(s, q, beta);
        let slope = d2 * s;
        if !(slope < 0.0) {
            break;
        }
        let step = d1 / slope;
        x -= step.clamp(-2.0, 2.0);
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x.exp().min(0.5)
}

/// g_β(s) − 1 with the (1−s)^q − 1 part through expm1/ln_1p.
fn g_excess(s: f64, q: f64, beta: f64) -> f64 {
    let t = 1.0 - s;
    s.powf(q) + (q * (-s).ln_1p()).exp_m1() + 2.0 * beta * (s * t).powf(0.5 * q)
}

fn g_beta(s: f64, q: f64, beta: f64) -> f64 {
    let t = 1.0 - s;
    s.powf(q) + t.powf(q) + 2.0 * beta * (s * t).powf(0.5 * q)
}

fn g_beta_derivs(s: f64, q: f64, beta: f64) -> (f64, f64) {
    let t = 1.0 - s;
    let h = 0.5 * q;
    let d1 = q * (s.powf(q - 1.0) - t.powf(q - 1.0))
        + beta * q * (s.powf(h - 1.0) * t.powf(h) - s.powf(h) * t.powf(h - 1.0));
    let d2 = q * (q - 1.0) * (s.powf(q - 2.0) + t.powf(q - 2.0))
        + beta * q * ((h - 1.0) * (s.powf(h - 2.0) * t.powf(h) + s.powf(h) * t.powf(h - 2.0)) - q * (s * t).powf(h - 1.0));
    (d1, d2)
}

pub fn fiber_coeffs(pair: &VecPair, prm: &ModelParams) -> Result<FiberCoeffs> {
    if !pair.is_nontrivial() {
        return Err(LabError::TrivialPair);
    }
    let s = pair_state(pair.grid(), &pair.u.values, &pair.v.values, prm);
    Ok(FiberCoeffs { a: s.a(), b: s.hartree, c: s.coupling, p: prm.p, lambda: prm.lambda })
}

/// Bisection to full double precision on a bracket with a sign change.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (fl, fh) = (f(lo).abs(), f(hi).abs());
    if fl <= fh {
        lo
    } else {
        hi
    }
}

fn class_of_value(value: f64, scale: f64) -> NehariClass {
    if value.abs() <= NEHARI_TOL * scale {
        NehariClass::Zero
    } else if value < 0.0 {
        NehariClass::Minus
    } else {
        NehariClass::Plus
    }
}

/// The root t* of the derivative of A + λBt² − Ct^{p−2}, where that function
/// switches from decreasing to increasing.
pub fn turning_time(c: &FiberCoeffs) -> Option<f64> {
    let lb = c.lambda * c.b;
    if lb <= 0.0 || c.c <= 0.0 {
        return None;
    }
    Some(((c.p - 2.0) * c.c / (2.0 * lb)).powf(1.0 / (4.0 - c.p)))
}

pub fn nehari_times(c: &FiberCoeffs) -> NehariRoots {
    let f = |t: f64| c.root_fn(t);
    let class_at = |t: f64| class_of_value(c.scaled(t).h2_primary(), c.scaled(t).a);
    if !(c.a > 0.0) || c.c <= 0.0 {
        return NehariRoots::none();
    }
    let lb = c.lambda * c.b;
    if lb <= 0.0 {
        let t = (c.a / c.c).powf(1.0 / (c.p - 2.0));
        return NehariRoots { count: 1, t_minus: Some(t), t_plus: None, class_minus: Some(class_at(t)), class_plus: None };
    }
    let ts = turning_time(c).expect("λB > 0 and C > 0");
    let fmin = f(ts);
    if fmin > NEHARI_TOL * c.a {
        return NehariRoots::none();
    }
    if fmin.abs() <= NEHARI_TOL * c.a {
        return NehariRoots {
            count: 1,
            t_minus: Some(ts),
            t_plus: None,
            class_minus: Some(NehariClass::Zero),
            class_plus: None,
        };
    }
    let t_minus = bisect(f, 0.0, ts);
    let mut hi = 2.0 * ts;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let t_plus = bisect(f, ts, hi);
    NehariRoots {
        count: 2,
        t_minus: Some(t_minus),
        t_plus: Some(t_plus),
        class_minus: Some(class_at(t_minus)),
        class_plus: Some(class_at(t_plus)),
    }
}

/// Both forms of h''(1) for an on-manifold pair and whether their signs agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassDetail {
    pub class: NehariClass,
    pub h2_primary: f64,
    pub h2_alternate: f64,
    pub agree: bool,
}

pub fn classify_coeffs(c: &FiberCoeffs) -> Result<ClassDetail> {
    let defect = c.nehari_defect();
    if defect.abs() > NEHARI_TOL * c.a {
        return Err(LabError::OffManifold { defect, a: c.a });
    }
    let h1 = c.h2_primary();
    let h2 = c.h2_alternate();
    let class = class_of_value(h1, c.a);
    let alt = class_of_value(h2, c.a);
    let agree = class == alt || class == NehariClass::Zero || alt == NehariClass::Zero;
    Ok(ClassDetail { class, h2_primary: h1, h2_alternate: h2, agree })
}

pub fn classify(pair: &VecPair, prm: &ModelParams) -> Result<NehariClass> {
    Ok(classify_coeffs(&fiber_coeffs(pair, prm)?)?.class)
}

pub fn project_to_nehari(pair: &VecPair, prm: &ModelParams, branch: Branch) -> Result<VecPair> {
    let c = fiber_coeffs(pair, prm)?;
    let t = branch_time(&c, branch)?;
    Ok(pair.scaled(t))
}

pub(crate) fn branch_time(c: &FiberCoeffs, branch: Branch) -> Result<f64> {
    let roots = nehari_times(c);
    let want = match branch {
        Branch::Minus => NehariClass::Minus,
        Branch::Plus => NehariClass::Plus,
    };
    let pick = [(roots.t_minus, roots.class_minus), (roots.t_plus, roots.class_plus)]
        .into_iter()
        .find(|(_, cl)| *cl == Some(want));
    match pick {
        Some((Some(t), _)) => Ok(t),
        _ => Err(LabError::NoBranch(roots)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitResult {
    pub s_z: f64,
    pub energy_drop: f64,
    /// I_λ(z) − J(√s z, √(1−s) z) evaluated directly.
    pub direct_drop: f64,
}

/// Splits a scalar profile z into (√s_β z, √(1−s_β) z), which lowers the energy
/// by ((g_β(s_β) − 1)/p)∫|z|^p when β > 0.
pub fn split_equal(z: &RadialFn, prm: &ModelParams) -> Result<SplitResult> {
    if prm.beta == 0.0 {
        return Err(LabError::NoStrictDrop);
    }
    if z.l2_norm() == 0.0 {
        return Err(LabError::TrivialPair);
    }
    let (s, gmax) = g_beta_profile(prm.p, prm.beta)?;
    let energy_drop = (gmax - 1.0) / prm.p * lp_norm_pow(z, prm.p)?;
    let pair = split_pair(z, s);
    let direct_drop = scalar_energy(z, prm) - total_energy(&pair, prm).total;
    Ok(SplitResult { s_z: s, energy_drop, direct_drop })
}

pub fn split_pair(z: &RadialFn, s: f64) -> VecPair {
    VecPair { u: z.scaled(s.sqrt()), v: z.scaled((1.0 - s).sqrt()) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Region1,
    Region2,
    Outside,
}

/// Membership in the two sublevel regions of the Nehari manifold below the
/// cap D = (p−2)²K/(4λp(4−p)), split at ‖(u,v)‖_H = ((p−2)K/(λ(4−p)))^{1/2},
/// where K = S̄²S⁴_{12/5}/(4πκ).
pub fn region_of(pair: &VecPair, prm: &ModelParams, consts: &SobolevConstants) -> Result<Region> {
    let c = fiber_coeffs(pair, prm)?;
    if c.nehari_defect().abs() > NEHARI_TOL * c.a {
        return Ok(Region::Outside);
    }
    if prm.lambda == 0.0 {
        return Ok(Region::Region1);
    }
    let k = consts.coulomb_product(prm.kappa);
    let p = prm.p;
    let cap = (p - 2.0).powi(2) * k / (4.0 * prm.lambda * p * (4.0 - p));
    let radius = ((p - 2.0) * k / (prm.lambda * (4.0 - p))).sqrt();
    let j = c.h(1.0);
    if !(j < cap) {
        return Ok(Region::Outside);
    }
    let norm = c.a.sqrt();
    Ok(if norm < radius {
        Region::Region1
    } else if norm > radius {
        Region::Region2
    } else {
        Region::Outside
    })
}
