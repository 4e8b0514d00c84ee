//! Node-value calculus on a fixed log grid and a preconditioned projected
//! ascent loop shared by the extremal searches.

use crate::constants::omega_sphere;
use crate::error::Result;
use crate::quad::gl8;

/// Log grid with cached `ln r`; integrals follow the conventions of
/// [`crate::profile`] (plateau on `[0, r_1]`, linear in `ln r` per cell).
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub radii: Vec<f64>,
    s: Vec<f64>,
    pub omega: f64,
    pub nf: f64,
}

impl Grid {
    pub fn new(radii: Vec<f64>, n: u32) -> Result<Self> {
        let omega = omega_sphere(n)?;
        let s = radii.iter().map(|r| r.ln()).collect();
        Ok(Self { radii, s, omega, nf: n as f64 })
    }

    /// `ω Σ |Δu|^N / Δs^{N-1}` and its gradient.
    pub fn grad_energy(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let nf = self.nf;
        let mut e = 0.0;
        let mut g = vec![0.0; u.len()];
        for i in 0..u.len() - 1 {
            let ds = self.s[i + 1] - self.s[i];
            let d = u[i + 1] - u[i];
            e += d.abs().powf(nf) / ds.powf(nf - 1.0);
            let dd = nf * d.abs().powf(nf - 2.0) * d / ds.powf(nf - 1.0);
            g[i] -= dd;
            g[i + 1] += dd;
        }
        g.iter_mut().for_each(|v| *v *= self.omega);
        (self.omega * e, g)
    }

    /// `ω ∫ r^{p-1} g(u) dr` and its gradient; `g(0) = g'(0) = 0` is assumed.
    pub fn weighted(&self, u: &[f64], p: f64, g: impl Fn(f64) -> f64, gp: impl Fn(f64) -> f64) -> (f64, Vec<f64>) {
        let rule = gl8();
        let m = u.len();
        let mut grad = vec![0.0; m];
        let r1p = self.radii[0].powf(p) / p;
        let mut acc = r1p * g(u[0]);
        grad[0] += r1p * gp(u[0]);
        for i in 0..m - 1 {
            let (u0, u1) = (u[i], u[i + 1]);
            if u0 == 0.0 && u1 == 0.0 {
                continue;
            }
            let (s0, ds) = (self.s[i], self.s[i + 1] - self.s[i]);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let v = u0 + (u1 - u0) * x;
                let wt = w * ds * (p * (s0 + ds * x)).exp();
                acc += wt * g(v);
                let d = wt * gp(v);
                grad[i] += d * (1.0 - x);
                grad[i + 1] += d * x;
            }
        }
        grad.iter_mut().for_each(|v| *v *= self.omega);
        (self.omega * acc, grad)
    }

    pub fn weighted_value(&self, u: &[f64], p: f64, g: impl Fn(f64) -> f64) -> f64 {
        crate::profile::weighted_integral(self.omega, &self.radii, u, p, g)
    }

    /// Sobolev energy `‖∇u‖_N^N + ‖u‖_N^N` with gradient.
    pub fn sobolev(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let nf = self.nf;
        let (eg, gg) = self.grad_energy(u);
        let (el, gl) = self.weighted(u, nf, |v| v.abs().powf(nf), |v| nf * v.abs().powf(nf - 2.0) * v);
        (eg + el, gg.iter().zip(&gl).map(|(a, b)| a + b).collect())
    }

    pub fn sobolev_value(&self, u: &[f64]) -> f64 {
        let nf = self.nf;
        crate::profile::gradient_energy(self.nf as u32, &self.radii, u) + self.weighted_value(u, nf, |v| v.abs().powf(nf))
    }

    /// Tridiagonal stand-in for the Hessian of the Sobolev energy, with slopes
    /// and values floored at `10^-3` of their maxima so it stays positive definite.
    pub fn metric(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nf = self.nf;
        let m = u.len();
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m - 1];
        let smax = (0..m - 1)
            .map(|i| (u[i + 1] - u[i]).abs() / (self.s[i + 1] - self.s[i]))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for i in 0..m - 1 {
            let ds = self.s[i + 1] - self.s[i];
            let slope = ((u[i + 1] - u[i]).abs() / ds).max(1e-3 * smax);
            let k = self.omega * nf * (nf - 1.0) * slope.powf(nf - 2.0) / ds;
            diag[i] += k;
            diag[i + 1] += k;
            off[i] -= k;
            let v = (0.5 * (u[i] + u[i + 1])).abs().max(1e-3 * umax);
            let mass = self.omega * nf * (nf - 1.0) * v.powf(nf - 2.0) * (nf * (self.s[i] + 0.5 * ds)).exp() * ds;
            diag[i] += mass / 3.0;
            diag[i + 1] += mass / 3.0;
            off[i] += mass / 6.0;
        }
        let r1n = self.omega * nf * (nf - 1.0) * u[0].abs().max(1e-3 * umax).powf(nf - 2.0) * self.radii[0].powf(nf) / nf;
        diag[0] += r1n;
        (diag, off)
    }
}

/// Solve a symmetric tridiagonal system (Thomas algorithm).
pub(crate) fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / den;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Pool-adjacent-violators projection onto non-increasing sequences.
pub(crate) fn pav_nonincreasing(v: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (m1, c1) = blocks[n - 2];
            let (m2, c2) = blocks[n - 1];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(n - 2);
            blocks.push(((m1 * c1 as f64 + m2 * c2 as f64) / (c1 + c2) as f64, c1 + c2));
        }
    }
    let mut i = 0;
    for (m, c) in blocks {
        for x in &mut v[i..i + c] {
            *x = m;
        }
        i += c;
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AscentOptions {
    pub max_iter: usize,
    /// Stop when the relative gain over `window` iterations falls below this.
    pub rel_tol: f64,
    pub window: usize,
    /// Sufficient increase factor of the backtracking search.
    pub armijo: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Maximize over node values with the last node pinned. `x0` must already be
/// feasible; `project` maps a trial point back to the feasible set or rejects it.
pub(crate) fn ascend(
    x0: Vec<f64>,
    opts: &AscentOptions,
    value: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64]) -> Vec<f64>,
    metric: impl Fn(&[f64]) -> (Vec<f64>, Vec<f64>),
    project: impl Fn(Vec<f64>) -> Option<Vec<f64>>,
) -> AscentOutcome {
    let m = x0.len();
    let mut x = x0;
    let mut f = value(&x);
    let mut history = vec![f];
    let mut eta: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let g = gradient(&x);
        let (diag, off) = metric(&x);
        let dir = solve_tridiagonal(&diag[..m - 1], &off[..m - 2], &g[..m - 1]);
        let slope: f64 = g[..m - 1].iter().zip(&dir).map(|(a, b)| a * b).sum();
        if !(slope > 0.0) || !slope.is_finite() {
            converged = true;
            break;
        }
        let mut step = (2.0 * eta).min(1e6);
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = x.clone();
            for i in 0..m - 1 {
                trial[i] += step * dir[i];
            }
            if let Some(t) = project(trial) {
                let ft = value(&t);
                let gain: f64 = g.iter().zip(t.iter().zip(&x)).map(|(a, (b, c))| a * (b - c)).sum();
                if ft.is_finite() && ft > f && ft - f >= opts.armijo * gain.max(0.0) {
                    accepted = Some((t, ft));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((t, ft)) => {
                x = t;
                f = ft;
                eta = step;
                history.push(f);
            }
            None => {
                converged = true;
                break;
            }
        }
        let k = history.len() - 1;
        if k >= opts.window && history[k] - history[k - opts.window] <= opts.rel_tol * history[k].abs() {
            converged = true;
            break;
        }
    }
    AscentOutcome { x, value: f, iterations, history, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_match_differences() {
        let radii = crate::profile::log_grid(1e-2, 5.0, 40).unwrap();
        for n in [2u32, 3] {
            let grid = Grid::new(radii.clone(), n).unwrap();
            let u: Vec<f64> = radii.iter().map(|r| (-r * r).exp() * (1.0 + 0.1 * r.sin())).collect();
            let (e, g) = grid.sobolev(&u);
            assert!((e - grid.sobolev_value(&u)).abs() < 1e-12 * e);
            for &i in &[0usize, 7, 20, 38] {
                let h = 1e-6;
                let mut up = u.clone();
                up[i] += h;
                let mut dn = u.clone();
                dn[i] -= h;
                let fd = (grid.sobolev_value(&up) - grid.sobolev_value(&dn)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "n={n} i={i} fd={fd} g={}", g[i]);
            }
        }
    }

    #[test]
    fn pav_nonincreasing_projects() {
        let mut v = vec![3.0, 1.0, 2.0, 0.0];
        pav_nonincreasing(&mut v);
        assert_eq!(v, vec![3.0, 1.5, 1.5, 0.0]);
    }

    #[test]
    fn tridiagonal() {
        let x = solve_tridiagonal(&[4.0, 4.0, 4.0], &[1.0, 1.0], &[5.0, 6.0, 5.0]);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }
}
