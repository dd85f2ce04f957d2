//! Positive radial ground state of −Δw + w = g|w|^{p−2}w in R^3 and the
//! embedding constants derived from it.
//!
//! The profile is located by shooting on w'' + (2/r)w' = w − g w^{p−1},
//! resampled onto the grid, then polished by Newton's method on the discrete
//! equation so that the discrete Nehari identity holds to roundoff.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fibering::g_beta_profile;
use crate::linalg::Tridiag;
use crate::ode::{integrate, Control, State, Tolerance};
use crate::radial_core::{h1_norm_sq, lp_norm_pow, RadialFn, RadialGrid, Scheme, FOUR_PI};

/// Radius at which shooting orbits are declared decaying.
const SHOOT_RADIUS: f64 = 40.0;
/// Start radius of the ODE; the regular series covers [0, R0].
const R0: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;
const MAX_EXPANSIONS: usize = 60;

#[derive(Debug, Clone, Serialize)]
pub struct SolitonResult {
    #[serde(skip)]
    pub w: RadialFn,
    pub p: f64,
    pub g: f64,
    pub norm_h1_sq: f64,
    pub p_integral: f64,
    pub level: f64,
    /// Central value selected by shooting (before the grid polish).
    pub sigma: f64,
    pub pohozaev_residual: f64,
}

impl SolitonResult {
    /// ½‖w‖² − (g/p)∫|w|^p evaluated by quadrature.
    pub fn direct_level(&self) -> f64 {
        0.5 * self.norm_h1_sq - self.p_integral / self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    /// w changed sign: σ too large.
    Crossed,
    /// w turned upward while positive: σ too small.
    TurnedUp,
    Decayed,
}

fn series_start(sigma: f64, p: f64, g: f64) -> State {
    let d2 = (sigma - g * sigma.powf(p - 1.0)) / 3.0;
    [sigma + 0.5 * d2 * R0 * R0, d2 * R0]
}

fn rhs(p: f64, g: f64) -> impl Fn(f64, &State) -> State {
    move |r, y| [y[1], -2.0 / r * y[1] + y[0] - g * y[0].abs().powf(p - 2.0) * y[0]]
}

fn tolerance() -> Tolerance {
    Tolerance { rtol: 1e-12, atol: 1e-16 }
}

fn fate(sigma: f64, p: f64, g: f64) -> Fate {
    let mut out = Fate::Decayed;
    integrate(rhs(p, g), R0, series_start(sigma, p, g), SHOOT_RADIUS, &tolerance(), |_, y| {
        if y[0] < 0.0 {
            out = Fate::Crossed;
            Control::Stop
        } else if y[1] > 0.0 {
            out = Fate::TurnedUp;
            Control::Stop
        } else {
            Control::Continue
        }
    });
    out
}

/// Bisects the central value between an upward-turning and a sign-crossing orbit.
fn shoot(p: f64, g: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0, 10.0);
    let mut tries = 0;
    while fate(hi, p, g) != Fate::Crossed {
        hi *= 2.0;
        tries += 1;
        if tries > MAX_EXPANSIONS {
            return Err(LabError::Shooting(format!("no crossing orbit below sigma = {hi:e}")));
        }
    }
    tries = 0;
    while fate(lo, p, g) == Fate::Crossed {
        lo *= 0.5;
        tries += 1;
        if tries > MAX_EXPANSIONS {
            return Err(LabError::Shooting(format!("no turning orbit above sigma = {lo:e}")));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        match fate(mid, p, g) {
            Fate::Crossed => hi = mid,
            _ => lo = mid,
        }
    }
    Err(LabError::Shooting(format!("bisection did not isolate the orbit in [{lo}, {hi}]")))
}

/// Integrates the selected orbit and samples it at the grid nodes with cubic
/// Hermite interpolation. Once the orbit drops below 1e-6 of its centre value
/// the exact linear tail c·e^{−r}/r takes over.
fn resample(sigma: f64, p: f64, g: f64, grid: &RadialGrid) -> Vec<f64> {
    let f = rhs(p, g);
    let start = series_start(sigma, p, g);
    let mut knots: Vec<(f64, State)> = vec![(R0, start)];
    let floor = 1e-6 * sigma;
    integrate(&f, R0, start, SHOOT_RADIUS.max(grid.r_max), &tolerance(), |r, y| {
        knots.push((r, *y));
        if y[0] < floor || y[1] > 0.0 {
            Control::Stop
        } else {
            Control::Continue
        }
    });
    // drop a final point that already left the decaying orbit
    while knots.len() > 2 && knots.last().is_some_and(|(_, y)| y[0] <= 0.0 || y[1] > 0.0) {
        knots.pop();
    }
    let (r_end, y_end) = *knots.last().expect("at least the start knot");
    let c_tail = y_end[0] * r_end * r_end.exp();
    let mut j = 0;
    grid.nodes
        .iter()
        .map(|&r| {
            if r <= R0 {
                let d2 = (sigma - g * sigma.powf(p - 1.0)) / 3.0;
                return sigma + 0.5 * d2 * r * r;
            }
            if r >= r_end {
                return c_tail * (-r).exp() / r;
            }
            while knots[j + 1].0 < r {
                j += 1;
            }
            let (r0, y0) = knots[j];
            let (r1, y1) = knots[j + 1];
            let h = r1 - r0;
            let s = (r - r0) / h;
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            h00 * y0[0] + h10 * h * y0[1] + h01 * y1[0] + h11 * h * y1[1]
        })
        .collect()
}

/// Newton iteration on −Δ_h w + w − g|w|^{p−2}w = 0 with w(r_max) = 0.
fn polish(w: &mut [f64], p: f64, g: f64, grid: &RadialGrid) -> Result<()> {
    let n = grid.n;
    let (sd, so) = grid.stiffness_bands();
    w[n - 1] = 0.0;
    for _ in 0..60 {
        let lap = grid.neg_laplacian(w);
        let mut res: Vec<f64> = (0..n).map(|i| lap[i] + w[i] - g * w[i].abs().powf(p - 2.0) * w[i]).collect();
        res[n - 1] = 0.0;
        let mut jac = Tridiag {
            lower: (0..n - 1).map(|k| so[k] / grid.weights[k + 1]).collect(),
            diag: (0..n).map(|i| sd[i] / grid.weights[i] + 1.0 - (p - 1.0) * g * w[i].abs().powf(p - 2.0)).collect(),
            upper: (0..n - 1).map(|k| so[k] / grid.weights[k]).collect(),
        };
        jac.pin_last();
        let dw = jac.solve(&res);
        let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let step = dw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (wi, d) in w.iter_mut().zip(&dw) {
            *wi -= d;
        }
        if !step.is_finite() {
            break;
        }
        if step <= 1e-14 * scale {
            return Ok(());
        }
    }
    Err(LabError::Shooting("grid Newton polish did not converge; r_max may be too small".into()))
}

/// Positive radial solution of −Δw + w = g|w|^{p−2}w on the grid.
pub fn scalar_ground_state(p: f64, g: f64, grid: &Arc<RadialGrid>) -> Result<SolitonResult> {
    if !(p > 2.0 && p < 6.0) {
        return Err(LabError::InvalidArgument(format!("p = {p} outside (2, 6)")));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(LabError::InvalidArgument(format!("coefficient g = {g} must be positive")));
    }
    let sigma = shoot(p, g)?;
    let mut values = resample(sigma, p, g, grid);
    polish(&mut values, p, g, grid)?;
    if values.iter().take(grid.n - 1).any(|v| !(*v > 0.0)) {
        return Err(LabError::Shooting("polished profile is not positive".into()));
    }
    let w = RadialFn { grid: Arc::clone(grid), values };
    let kinetic = grid.kinetic(&w.values);
    let mass = grid.integrate_with(|i| w.values[i] * w.values[i]);
    let norm_h1_sq = kinetic + mass;
    let p_integral = g * lp_norm_pow(&w, p)?;
    let pohozaev_residual = (0.5 * kinetic + 1.5 * mass - 3.0 / p * p_integral).abs();
    Ok(SolitonResult {
        w,
        p,
        g,
        norm_h1_sq,
        p_integral,
        level: (p - 2.0) / (2.0 * p) * norm_h1_sq,
        sigma,
        pohozaev_residual,
    })
}

/// Ground state with coefficient g_β(s_β), the profile w_β behind α_β^∞.
pub fn scaled_ground_state(p: f64, beta: f64, grid: &Arc<RadialGrid>) -> Result<SolitonResult> {
    let (_, gmax) = g_beta_profile(p, beta)?;
    scalar_ground_state(p, gmax, grid)
}

/// Embedding constants in norm-ratio orientation:
/// S_p = inf ‖u‖_{H¹}/‖u‖_{L^p}, S̄ = inf ‖∇u‖_{L²}/‖u‖_{L⁶}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevConstants {
    pub p: f64,
    #[serde(rename = "S_p")]
    pub s_p: f64,
    #[serde(rename = "S_bar")]
    pub s_bar: f64,
    #[serde(rename = "S_125")]
    pub s_125: f64,
}

/// Closed-form best constant of ‖∇u‖_{L²} ≥ S̄‖u‖_{L⁶} in R^3: √3(π/2)^{2/3}.
pub fn s_bar_closed_form() -> f64 {
    3f64.sqrt() * (PI / 2.0).powf(2.0 / 3.0)
}

impl SobolevConstants {
    /// S̄²S⁴_{12/5} as it enters the thresholds. The Hartree bound
    /// ∫φρ ≤ 4πκ S̄^{−2}S^{−4}_{12/5}‖(u,v)‖⁴_H carries the factor 4πκ of the
    /// potential, so the product is divided by it.
    pub fn coulomb_product(&self, kappa: f64) -> f64 {
        self.literal_coulomb_product() / (FOUR_PI * kappa)
    }

    /// S̄²S⁴_{12/5} without the potential normalization.
    pub fn literal_coulomb_product(&self) -> f64 {
        self.s_bar * self.s_bar * self.s_125.powi(4)
    }

    /// S_p^{2p/(p−2)} = ‖w‖²_{H¹} for the g = 1 ground state.
    pub fn ground_energy_scale(&self) -> f64 {
        self.s_p.powf(2.0 * self.p / (self.p - 2.0))
    }
}

pub fn sobolev_constants(p: f64, grid: &Arc<RadialGrid>) -> Result<SobolevConstants> {
    let s_p = embedding_constant(p, grid)?;
    let s_125 = if p == 2.4 { s_p } else { embedding_constant(2.4, grid)? };
    Ok(SobolevConstants { p, s_p, s_bar: s_bar_closed_form(), s_125 })
}

/// S_q = ‖w_q‖_{H¹}^{(q−2)/q} where w_q is the g = 1 ground state.
pub fn embedding_constant(q: f64, grid: &Arc<RadialGrid>) -> Result<f64> {
    let sol = scalar_ground_state(q, 1.0, grid)?;
    Ok(sol.norm_h1_sq.powf((q - 2.0) / (2.0 * q)))
}

/// ‖u‖_{H¹}/‖u‖_{L^p} for a trial profile (an upper bound for S_p).
pub fn embedding_ratio(u: &RadialFn, p: f64) -> Result<f64> {
    let lp = lp_norm_pow(u, p)?;
    if lp <= 0.0 {
        return Err(LabError::TrivialPair);
    }
    Ok(h1_norm_sq(u).sqrt() / lp.powf(1.0 / p))
}

/// α_β^∞ = ((p−2)/(2p))(S_p^p/g_β(s_β))^{2/(p−2)}.
pub fn scalar_level(p: f64, beta: f64, consts: &SobolevConstants) -> Result<f64> {
    if p != consts.p {
        return Err(LabError::InvalidArgument(format!("constants computed for p = {}, not {p}", consts.p)));
    }
    let (_, gmax) = g_beta_profile(p, beta)?;
    Ok((p - 2.0) / (2.0 * p) * (consts.s_p.powf(p) / gmax).powf(2.0 / (p - 2.0)))
}

/// Minimum of ‖∇u‖/‖u‖_{L⁶} over the family (1 + r²)^{−a}, a ∈ [0.4, 1].
/// The Aubin–Talenti bubble is the member a = ½.
pub fn talenti_family_minimum() -> (f64, f64) {
    let ratio = |a: f64| {
        // trapezoid in s = ln r, spectrally accurate for these integrands
        let (s0, s1, m) = (-30.0, 60.0, 20_000);
        let h = (s1 - s0) / m as f64;
        let (mut grad, mut l6) = (0.0, 0.0);
        for k in 0..=m {
            let r: f64 = (s0 + k as f64 * h).exp();
            let q = 1.0 + r * r;
            let du = -2.0 * a * r * q.powf(-a - 1.0);
            let wt = if k == 0 || k == m { 0.5 } else { 1.0 };
            grad += wt * du * du * r.powi(3);
            l6 += wt * q.powf(-6.0 * a) * r.powi(3);
        }
        (grad * h).sqrt() / (l6 * h).powf(1.0 / 6.0) * FOUR_PI.powf(0.5 - 1.0 / 6.0)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.4, 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (ratio(x1), ratio(x2));
    while hi - lo > 1e-6 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = ratio(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = ratio(x2);
        }
    }
    let a = 0.5 * (lo + hi);
    (a, ratio(a))
}

/// Default grid for constants: the production grid.
pub fn default_grid() -> Arc<RadialGrid> {
    RadialGrid::new(4096, 30.0, Scheme::Log).expect("production grid is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<RadialGrid> {
        RadialGrid::new(n, 30.0, Scheme::Log).unwrap()
    }

    #[test]
    fn ground_state_invariants_p3() {
        let g = grid(2048);
        let s = scalar_ground_state(3.0, 1.0, &g).unwrap();
        let w = &s.w.values;
        assert!(w.iter().take(g.n - 1).all(|v| *v > 0.0));
        assert!(w.windows(2).all(|x| x[1] < x[0]));
        assert!(w[g.n - 2] < 1e-8 * w[0]);
        assert!((s.norm_h1_sq - s.p_integral).abs() < 1e-6 * s.norm_h1_sq);
        assert!(s.pohozaev_residual < 1e-5 * s.norm_h1_sq);
        assert!((s.direct_level() - s.level).abs() < 1e-6 * s.level);
    }

    #[test]
    fn coefficient_scaling_law() {
        let g = grid(1024);
        let base = scalar_ground_state(2.5, 1.0, &g).unwrap();
        let coef: f64 = 1.7;
        let scaled = scalar_ground_state(2.5, coef, &g).unwrap();
        let f = coef.powf(-1.0 / 0.5);
        for (a, b) in base.w.values.iter().zip(&scaled.w.values).take(g.n - 1) {
            assert!((f * a - b).abs() <= 1e-8 * b.abs().max(1e-300) + 1e-300, "{a} {b}");
        }
    }

    #[test]
    fn closed_form_bubble_constant() {
        let (a, val) = talenti_family_minimum();
        assert!((a - 0.5).abs() < 1e-3);
        assert!((val / s_bar_closed_form() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn invalid_inputs() {
        let g = grid(256);
        assert!(scalar_ground_state(2.0, 1.0, &g).is_err());
        assert!(scalar_ground_state(3.0, 0.0, &g).is_err());
    }
}
