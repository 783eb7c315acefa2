//! Linear solvers for the 7-point systems on interior nodes.

use hhk_core::{Error, Result};

/// Seven-point operator on an `m × m × m` block of interior unknowns,
/// ordered with `t` slowest and `y` fastest.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub m: usize,
    pub diag: Vec<f64>,
    /// Coefficients to the `t - 1` and `t + 1` neighbours.
    pub t_lo: Vec<f64>,
    pub t_hi: Vec<f64>,
    pub cx: f64,
    pub cy: f64,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        let mm = m * m;
        for p in 0..self.len() {
            let (i, j, k) = (p / mm, (p / m) % m, p % m);
            let mut s = self.diag[p] * x[p];
            if i > 0 {
                s += self.t_lo[p] * x[p - mm];
            }
            if i + 1 < m {
                s += self.t_hi[p] * x[p + mm];
            }
            if j > 0 {
                s += self.cx * x[p - m];
            }
            if j + 1 < m {
                s += self.cx * x[p + m];
            }
            if k > 0 {
                s += self.cy * x[p - 1];
            }
            if k + 1 < m {
                s += self.cy * x[p + 1];
            }
            out[p] = s;
        }
    }
}

/// Banded LU without pivoting, half-bandwidth `m²`.
pub fn banded_solve(a: &Stencil, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let m = a.m;
    let bw = m * m;
    let width = 2 * bw + 1;
    // row-major band storage: entry (r, c) at r * width + (c + bw - r)
    let mut band = vec![0.0; n * width];
    let at = |r: usize, c: usize| r * width + (c + bw - r);
    for p in 0..n {
        let (i, j, k) = (p / bw, (p / m) % m, p % m);
        band[at(p, p)] = a.diag[p];
        if i > 0 {
            band[at(p, p - bw)] = a.t_lo[p];
        }
        if i + 1 < m {
            band[at(p, p + bw)] = a.t_hi[p];
        }
        if j > 0 {
            band[at(p, p - m)] = a.cx;
        }
        if j + 1 < m {
            band[at(p, p + m)] = a.cx;
        }
        if k > 0 {
            band[at(p, p - 1)] = a.cy;
        }
        if k + 1 < m {
            band[at(p, p + 1)] = a.cy;
        }
    }
    let mut x = b.to_vec();
    for c in 0..n {
        let piv = band[at(c, c)];
        if piv.abs() < 1e-300 {
            return Err(Error::NoConvergence(format!("zero pivot in banded LU at row {c}")));
        }
        let last = (c + bw).min(n - 1);
        for r in c + 1..=last {
            let f = band[at(r, c)] / piv;
            if f == 0.0 {
                continue;
            }
            band[at(r, c)] = f;
            for cc in c + 1..=last {
                band[at(r, cc)] -= f * band[at(c, cc)];
            }
            x[r] -= f * x[c];
        }
    }
    for r in (0..n).rev() {
        let last = (r + bw).min(n - 1);
        let mut s = x[r];
        for c in r + 1..=last {
            s -= band[at(r, c)] * x[c];
        }
        x[r] = s / band[at(r, r)];
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned BiCGSTAB to relative residual `rtol`.
pub fn bicgstab(a: &Stencil, b: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.len();
    let inv_d: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for _ in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for q in 0..n {
            p[q] = r[q] + beta * (p[q] - omega * v[q]);
            y[q] = p[q] * inv_d[q];
        }
        a.apply(&y, &mut v);
        alpha = rho / dot(&r0, &v);
        for q in 0..n {
            s[q] = r[q] - alpha * v[q];
        }
        if norm(&s) <= rtol * bnorm {
            for q in 0..n {
                x[q] += alpha * y[q];
            }
            return Ok(x);
        }
        for q in 0..n {
            z[q] = s[q] * inv_d[q];
        }
        a.apply(&z, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for q in 0..n {
            x[q] += alpha * y[q] + omega * z[q];
            r[q] = s[q] - omega * t[q];
        }
        if norm(&r) <= rtol * bnorm {
            return Ok(x);
        }
        if omega == 0.0 {
            break;
        }
    }
    let mut ax = vec![0.0; n];
    a.apply(&x, &mut ax);
    let res: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt() / bnorm;
    if res <= rtol * 10.0 {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!("BiCGSTAB stalled at relative residual {res:.3e}")))
    }
}

/// Largest interior block solved directly.
pub const DIRECT_MAX_M: usize = 15;

pub fn solve_linear(a: &Stencil, b: &[f64]) -> Result<Vec<f64>> {
    if a.m <= DIRECT_MAX_M {
        banded_solve(a, b)
    } else {
        bicgstab(a, b, 1e-13, 20 * a.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace(m: usize) -> Stencil {
        let n = m * m * m;
        Stencil { m, diag: vec![-6.0; n], t_lo: vec![1.0; n], t_hi: vec![1.2; n], cx: 1.0, cy: 0.9 }
    }

    #[test]
    fn direct_and_iterative_agree() {
        let a = laplace(6);
        let b: Vec<f64> = (0..a.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let x1 = banded_solve(&a, &b).unwrap();
        let x2 = bicgstab(&a, &b, 1e-14, 10_000).unwrap();
        let mut ax = vec![0.0; a.len()];
        a.apply(&x1, &mut ax);
        for q in 0..a.len() {
            assert!((ax[q] - b[q]).abs() < 1e-12);
            assert!((x1[q] - x2[q]).abs() < 1e-10);
        }
    }
}
