//! Optimization kernels shared by the solvers: an H¹-preconditioned L-BFGS on
//! nodal vectors [u; v], and a Newton–GMRES polish of the Euler–Lagrange system.
//! The node at r_max is a Dirichlet node: it is pinned to zero and its
//! gradient entry is ignored.

use crate::energy::{gradient, hessian_apply, pair_state, residual_from_gradient, ModelParams};
use crate::linalg::{dot, gmres, Tridiag};
use crate::radial_core::{RadialGrid, FOUR_PI};

/// Inverse of 4π(stiffness + diag(w·(1 + shift))) per component, with the
/// Dirichlet row pinned. With shift = 0 this is the H¹ Riesz map.
pub(crate) struct Preconditioner {
    n: usize,
    tri: Tridiag,
}

impl Preconditioner {
    pub fn new(grid: &RadialGrid, shift: Option<&[f64]>) -> Self {
        let n = grid.n;
        let (diag, off) = grid.stiffness_bands();
        let mut tri = Tridiag {
            lower: off.iter().map(|o| FOUR_PI * o).collect(),
            diag: (0..n)
                .map(|i| FOUR_PI * (diag[i] + grid.weights[i] * (1.0 + shift.map_or(0.0, |s| s[i]))))
                .collect(),
            upper: off.iter().map(|o| FOUR_PI * o).collect(),
        };
        tri.pin_last();
        tri.upper[n - 2] = 0.0;
        Preconditioner { n, tri }
    }

    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(g.len());
        for block in g.chunks(n) {
            let mut rhs = block.to_vec();
            rhs[n - 1] = 0.0;
            let mut y = self.tri.solve(&rhs);
            y[n - 1] = 0.0;
            out.append(&mut y);
        }
        out
    }
}

pub(crate) fn mask_boundary(n: usize, g: &mut [f64]) {
    for block in g.chunks_mut(n) {
        block[n - 1] = 0.0;
    }
}

pub(crate) struct LbfgsOptions {
    pub memory: usize,
    pub max_iters: usize,
    /// Stop when √(gᵀPg) falls below this.
    pub gtol: f64,
    /// Stop when the objective changes by less than this (relative) over an accepted step.
    pub ftol: f64,
    pub step0: f64,
}

pub(crate) struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Minimizes f (which returns None where the objective is undefined) from x0.
/// `project` is applied to every accepted iterate (for example taking absolute values).
pub(crate) fn lbfgs<F, Q>(f: F, project: Q, x0: Vec<f64>, precond: &Preconditioner, opts: &LbfgsOptions) -> LbfgsOutcome
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
    Q: Fn(&mut [f64]),
{
    let mut x = x0;
    project(&mut x);
    let (mut fx, mut g) = match f(&x) {
        Some(v) => v,
        None => return LbfgsOutcome { x, f: f64::NAN, iterations: 0, grad_norm: f64::NAN },
    };
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut grad_norm = dot(&g, &precond.apply(&g)).max(0.0).sqrt();
    let mut it = 0;
    while it < opts.max_iters {
        if grad_norm < opts.gtol {
            break;
        }
        it += 1;
        // two-loop recursion with the preconditioner as initial inverse Hessian
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let mut r = precond.apply(&q);
        if let Some((s, y, _)) = hist.last() {
            let py = precond.apply(y);
            let gamma = dot(s, y) / dot(y, &py);
            r.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut gd = dot(&g, &d);
        if !(gd < 0.0) {
            hist.clear();
            d = precond.apply(&g).iter().map(|v| -v).collect();
            gd = dot(&g, &d);
        }
        let mut t = if hist.is_empty() { opts.step0 } else { 1.0 };
        let accepted = loop {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            project(&mut xn);
            if let Some((fnew, gnew)) = f(&xn) {
                if fnew.is_finite() && fnew <= fx + 1e-4 * t * gd {
                    break Some((xn, fnew, gnew));
                }
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((xn, fnew, gnew)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            hist.push((s, y, 1.0 / sy));
            if hist.len() > opts.memory {
                hist.remove(0);
            }
        }
        let change = (fx - fnew).abs();
        x = xn;
        fx = fnew;
        g = gnew;
        grad_norm = dot(&g, &precond.apply(&g)).max(0.0).sqrt();
        if change <= opts.ftol * fx.abs().max(1e-300) && grad_norm < 1e3 * opts.gtol {
            break;
        }
    }
    LbfgsOutcome { x, f: fx, iterations: it, grad_norm }
}

/// Masked Euclidean gradient of J at x = [u; v] and the value J(x).
pub(crate) fn energy_and_gradient(grid: &RadialGrid, x: &[f64], prm: &ModelParams) -> (f64, Vec<f64>) {
    let n = grid.n;
    let (u, v) = x.split_at(n);
    let s = pair_state(grid, u, v, prm);
    let mut g = gradient(grid, u, v, &s.phi, prm);
    mask_boundary(n, &mut g);
    (s.energy(prm), g)
}

pub(crate) fn residual_norm(grid: &RadialGrid, x: &[f64], prm: &ModelParams) -> f64 {
    let (_, g) = energy_and_gradient(grid, x, prm);
    residual_from_gradient(grid, &g).1
}

/// Newton–GMRES on the Euler–Lagrange system, preconditioned by the
/// linearization without the nonlinear source terms. Steps are damped until
/// the residual decreases. Returns the polished vector and the number of
/// Newton steps taken.
pub(crate) fn newton_polish(grid: &RadialGrid, x0: &[f64], prm: &ModelParams, target: f64, max_steps: usize) -> (Vec<f64>, usize) {
    let n = grid.n;
    let mut x = x0.to_vec();
    let mut res = residual_norm(grid, &x, prm);
    let mut steps = 0;
    while steps < max_steps && res > target {
        steps += 1;
        let (u, v) = x.split_at(n);
        let s = pair_state(grid, u, v, prm);
        let mut g = gradient(grid, u, v, &s.phi, prm);
        mask_boundary(n, &mut g);
        let shift: Vec<f64> = s.phi.iter().map(|p| prm.lambda * p).collect();
        let pre = Preconditioner::new(grid, Some(&shift));
        let apply = |d: &[f64]| {
            let mut h = hessian_apply(grid, u, v, &s.phi, prm, d);
            // Dirichlet rows become identity rows
            for k in 0..2 {
                h[k * n + n - 1] = d[k * n + n - 1];
            }
            h
        };
        let b: Vec<f64> = g.iter().map(|v| -v).collect();
        let (dx, _) = gmres(apply, |r: &[f64]| pre.apply(r), &b, 1e-10, 80, 20);
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-4 {
            let xn: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            let rn = residual_norm(grid, &xn, prm);
            if rn.is_finite() && rn < res {
                x = xn;
                res = rn;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::Scheme;

    #[test]
    fn lbfgs_minimizes_a_quadratic_in_the_h1_metric() {
        let g = RadialGrid::new(256, 20.0, Scheme::Log).unwrap();
        let n = g.n;
        let pre = Preconditioner::new(&g, None);
        // ½xᵀMx − bᵀx with M the preconditioned operator itself: one step solves it
        let target: Vec<f64> = (0..2 * n).map(|i| if i % n == n - 1 { 0.0 } else { (-(g.nodes[i % n])).exp() }).collect();
        let f = |x: &[f64]| {
            let diff: Vec<f64> = x.iter().zip(&target).map(|(a, b)| a - b).collect();
            let mut mx = vec![0.0; 2 * n];
            for k in 0..2 {
                let (d, o) = g.stiffness_bands();
                for i in 0..n {
                    let mut s = (d[i] + g.weights[i]) * diff[k * n + i];
                    if i > 0 {
                        s += o[i - 1] * diff[k * n + i - 1];
                    }
                    if i + 1 < n {
                        s += o[i] * diff[k * n + i + 1];
                    }
                    mx[k * n + i] = FOUR_PI * s;
                }
            }
            mask_boundary(n, &mut mx);
            Some((0.5 * dot(&diff, &mx), mx))
        };
        let opts = LbfgsOptions { memory: 5, max_iters: 50, gtol: 1e-12, ftol: 0.0, step0: 1.0 };
        let out = lbfgs(f, |_| {}, vec![0.0; 2 * n], &pre, &opts);
        assert!(out.iterations <= 3, "{}", out.iterations);
        for (a, b) in out.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
