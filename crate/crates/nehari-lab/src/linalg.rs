//! Small dense-free linear algebra: tridiagonal solves and restarted GMRES.

/// Tridiagonal system with sub-diagonal `lower[k]` = A[k+1][k] and
/// super-diagonal `upper[k]` = A[k][k+1].
#[derive(Debug, Clone)]
pub struct Tridiag {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiag {
    /// Thomas algorithm. The matrices used here are diagonally dominant or
    /// close to it, so no pivoting is done.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0];
        c[0] = if n > 1 { self.upper[0] / denom } else { 0.0 };
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if i < n - 1 {
                c[i] = self.upper[i] / denom;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }

    /// Replace the last row by the identity (Dirichlet condition on the last unknown).
    pub fn pin_last(&mut self) {
        let n = self.diag.len();
        self.diag[n - 1] = 1.0;
        self.lower[n - 2] = 0.0;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Right-preconditioned restarted GMRES for A x = b, starting from x = 0.
/// Returns the solution estimate and the final relative residual.
pub fn gmres<A, M>(apply: A, precond: M, b: &[f64], rtol: f64, restart: usize, max_restarts: usize) -> (Vec<f64>, f64)
where
    A: Fn(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return (x, 0.0);
    }
    let mut rel = 1.0;
    for _ in 0..max_restarts {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= rtol {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::new();
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            let z = precond(&basis[k]);
            let mut w = apply(&z);
            zs.push(z);
            for (j, vj) in basis.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                axpy(-h[j][k], vj, &mut w);
            }
            // second pass of Gram-Schmidt for stability
            for (j, vj) in basis.iter().enumerate() {
                let c = dot(&w, vj);
                h[j][k] += c;
                axpy(-c, vj, &mut w);
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if (g[k + 1].abs() / bnorm) <= rtol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (yi, z) in y.iter().zip(&zs) {
            axpy(*yi, z, &mut x);
        }
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    rel = rel.min(norm(&r) / bnorm);
    (x, rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> Tridiag {
        Tridiag { lower: vec![-1.0; n - 1], diag: vec![2.5; n], upper: vec![-1.0; n - 1] }
    }

    fn matvec(t: &Tridiag, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = t.diag[i] * x[i];
                if i > 0 {
                    s += t.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += t.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn thomas_solves_tridiagonal() {
        let t = laplace_1d(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = matvec(&t, &x);
        let y = t.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let n = 80;
        let t = laplace_1d(n);
        // add a dense rank-one perturbation
        let a = |x: &[f64]| {
            let mut y = matvec(&t, x);
            let s: f64 = x.iter().sum::<f64>() * 0.01;
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += s * (i as f64 / n as f64);
            }
            y
        };
        let xs: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).cos()).collect();
        let b = a(&xs);
        let (x, rel) = gmres(a, |r: &[f64]| t.solve(r), &b, 1e-12, 30, 10);
        assert!(rel < 1e-11);
        for (p, q) in x.iter().zip(&xs) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}
