//! Sharp Gagliardo-Nirenberg-Sobolev constant
//! `B_N = sup ‖u‖_{2N}^{2N} / (‖∇u‖_N^N ‖u‖_N^N)` over radial profiles, and the
//! small-amplitude perturbation curve that compares `J` against `C(F)`.

use serde::Serialize;

use crate::ascent::{ascend, pav_nonincreasing, AscentOptions, Grid};
use crate::constants::{omega_sphere, MtParams};
use crate::error::{domain, MtError, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::ode::{Dopri5, Integration, State};
use crate::profile::{functional_j, log_grid, sobolev_energy, weighted_integral, RadialProfile};

/// The quotient `‖u‖_{2N}^{2N} / (‖∇u‖_N^N ‖u‖_N^N)`.
pub fn gns_quotient(u: &RadialProfile, params: &MtParams) -> Result<f64> {
    let nf = params.nf();
    let e = sobolev_energy(u, params)?;
    let top = weighted_integral(params.omega(), u.radii(), u.values(), nf, |v| v.abs().powf(2.0 * nf));
    let q = top / (e.grad * e.lp);
    if !q.is_finite() {
        return Err(MtError::Evaluation(format!("quotient is {q}")));
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GnsOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl GnsOptions {
    pub fn new(n: u32) -> Self {
        Self { r_min: 1e-4, r_max: 20.0 * n as f64, nodes: 800, max_iter: 10_000, rel_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GnsResult {
    pub b_n: f64,
    /// Maximizer scaled to `sup = 1`.
    pub maximizer: RadialProfile,
    pub iterations: usize,
    pub converged: bool,
}

/// Direct ascent of the logarithm of the quotient over non-increasing node values.
pub fn compute_b_n(n: u32, opts: &GnsOptions) -> Result<GnsResult> {
    let params = MtParams::new(n, 0.0)?;
    let nf = params.nf();
    let radii = log_grid(opts.r_min, opts.r_max, opts.nodes)?;
    let grid = Grid::new(radii.clone(), n)?;
    let m = radii.len();

    let project = |mut x: Vec<f64>| -> Option<Vec<f64>> {
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        x[m - 1] = 0.0;
        pav_nonincreasing(&mut x);
        let top = x[0];
        if !(top > 0.0) {
            return None;
        }
        Some(x.iter().map(|v| v / top).collect())
    };
    let parts = |x: &[f64]| {
        let (g, gg) = grid.grad_energy(x);
        let (l, gl) = grid.weighted(x, nf, |v| v.abs().powf(nf), |v| nf * v.abs().powf(nf - 2.0) * v);
        let (a, ga) = grid.weighted(x, nf, |v| v.abs().powf(2.0 * nf), |v| 2.0 * nf * v.abs().powf(2.0 * nf - 2.0) * v);
        (a, ga, g, gg, l, gl)
    };
    let value = |x: &[f64]| {
        let a = grid.weighted_value(x, nf, |v| v.abs().powf(2.0 * nf));
        let g = crate::profile::gradient_energy(n, &grid.radii, x);
        let l = grid.weighted_value(x, nf, |v| v.abs().powf(nf));
        (a / (g * l)).ln()
    };
    let gradient = |x: &[f64]| {
        let (a, ga, g, gg, l, gl) = parts(x);
        (0..m).map(|i| ga[i] / a - gg[i] / g - gl[i] / l).collect::<Vec<f64>>()
    };
    // the quotient is 0-homogeneous, so scale the metric to the current energy
    let metric = |x: &[f64]| {
        let (d, o) = grid.metric(x);
        let e = grid.sobolev_value(x);
        (d.iter().map(|v| v / e).collect(), o.iter().map(|v| v / e).collect())
    };
    let start = project(radii.iter().map(|r| (-r * r).exp()).collect()).expect("positive start");
    let ao = AscentOptions { max_iter: opts.max_iter, rel_tol: opts.rel_tol, window: 50, armijo: 1e-4 };
    let out = ascend(start, &ao, value, gradient, metric, project);
    let maximizer = RadialProfile::new(radii, out.x)?;
    let b_n = gns_quotient(&maximizer, &params)?;
    Ok(GnsResult { b_n, maximizer, iterations: out.iterations, converged: out.converged })
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    pub b_n: f64,
    /// Central value `Q(0)` of the positive decaying solution of
    /// `-Δ_N Q + Q^{N-1} = Q^{2N-1}`.
    pub q0: f64,
    pub profile: RadialProfile,
    pub bisection_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    /// Crossed zero: central value too large.
    Over,
    /// Turned upward: central value too small.
    Under,
}

fn gs_rhs(nf: f64) -> impl Fn(f64, &State) -> State {
    move |r: f64, y: &State| {
        let phi = y[1];
        let q = y[0];
        let dq = phi.signum() * (phi.abs() / r.powf(nf - 1.0)).powf(1.0 / (nf - 1.0));
        let qa = q.abs();
        let src = r.powf(nf - 1.0) * (qa.powf(nf - 2.0) * q - qa.powf(2.0 * nf - 2.0) * q);
        [dq, src]
    }
}

fn gs_start(nf: f64, q0: f64, r0: f64) -> State {
    let f = q0.powf(nf - 1.0) - q0.powf(2.0 * nf - 1.0);
    let q = q0 + f.signum() * (nf - 1.0) / nf * (f.abs() / nf).powf(1.0 / (nf - 1.0)) * r0.powf(nf / (nf - 1.0));
    [q, r0.powf(nf) / nf * f]
}

/// Integrate on the node list, returning values up to the first event.
fn gs_shoot(nf: f64, q0: f64, nodes: &[f64], record: bool) -> Result<(Shot, Vec<State>)> {
    let f = gs_rhs(nf);
    let solver = Dopri5::with_tol(1e-12);
    let mut y = gs_start(nf, q0, nodes[0]);
    let mut h = 0.0;
    let mut out = Vec::new();
    if record {
        out.push(y);
    }
    let event = |_: f64, y: &State| y[0] <= 0.0 || y[1] >= 0.0;
    for w in nodes.windows(2) {
        match solver.integrate(&f, w[0], y, w[1], &mut h, &event)? {
            Integration::Reached(yn) => {
                y = yn;
                if record {
                    out.push(y);
                }
            }
            Integration::Stopped { y, .. } => {
                return Ok((if y[0] <= 0.0 { Shot::Over } else { Shot::Under }, out));
            }
        }
    }
    // no event: decide by the sign of the final slope
    Ok((if y[1] < 0.0 { Shot::Over } else { Shot::Under }, out))
}

/// `B_N` from the ground state found by shooting on `Q(0)`.
pub fn ground_state_b_n(n: u32, opts: &GnsOptions) -> Result<GroundState> {
    let params = MtParams::new(n, 0.0)?;
    let nf = params.nf();
    let radii = log_grid(opts.r_min, opts.r_max, opts.nodes)?;
    let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
    while gs_shoot(nf, hi, &radii, false)?.0 == Shot::Under {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(MtError::Solver("no overshooting central value found".into()));
        }
    }
    let mut iters = 0;
    while hi - lo > 1e-15 * hi && iters < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match gs_shoot(nf, mid, &radii, false)?.0 {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
        }
        iters += 1;
    }
    let (_, a) = gs_shoot(nf, lo, &radii, true)?;
    let (_, b) = gs_shoot(nf, hi, &radii, true)?;
    // trust the nodes where both sides of the bracket still agree
    let q0 = 0.5 * (lo + hi);
    let mut cut = a.len().min(b.len());
    for i in 0..cut {
        let (x, y) = (a[i][0], b[i][0]);
        if (x - y).abs() > 1e-5 * x.abs().max(y.abs()) || x < 1e-10 * q0 {
            cut = i;
            break;
        }
    }
    if cut < 8 {
        return Err(MtError::Solver("ground state trajectory separates immediately".into()));
    }
    let back = cut.saturating_sub(4).max(2);
    let (rc, qc) = (radii[back - 1], a[back - 1][0]);
    let dqc = a[back - 1][1].signum() * (a[back - 1][1].abs() / rc.powf(nf - 1.0)).powf(1.0 / (nf - 1.0));
    let kappa = (-dqc / qc).max(1e-3);
    let mut values: Vec<f64> = (0..radii.len())
        .map(|i| if i < back { a[i][0] } else { qc * (-kappa * (radii[i] - rc)).exp() })
        .collect();
    *values.last_mut().unwrap() = 0.0;
    let profile = RadialProfile::new(radii, values)?;
    let b_n = gns_quotient(&profile, &params)?;
    Ok(GroundState { b_n, q0, profile, bisection_iterations: iters })
}

/// `B_N` at the default resolution by quotient ascent.
pub fn b_n(n: u32) -> Result<f64> {
    Ok(compute_b_n(n, &GnsOptions::new(n))?.b_n)
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationCurve {
    pub points: Vec<(f64, f64)>,
    /// `t` values whose profile leaves the declared near-zero radius.
    pub range_warnings: Vec<f64>,
    pub grad_norm: f64,
    pub norm_2n: f64,
    /// Slope of `J(w_t)` at `0⁺` fitted from the sampled points.
    pub fitted_slope: f64,
    /// `C_{2(N-1)} ‖v‖_{2N}^{2N} - C(F) ‖∇v‖_N^N`, valid when the intermediate coefficients vanish.
    pub predicted_slope: f64,
}

/// `w_t(x) = t^{1/N} v(t^{1/N} x) / (1 + t ‖∇v‖_N^N)^{1/N}` and `J(w_t)` for each `t`.
pub fn perturbation_curve(spec: &NonlinearitySpec, params: &MtParams, bump: &RadialProfile, t_values: &[f64]) -> Result<PerturbationCurve> {
    if spec.params != *params {
        return Err(MtError::Contract("spec and params disagree".into()));
    }
    if params.beta() != 0.0 {
        return domain("perturbation curve needs beta = 0");
    }
    if t_values.is_empty() || t_values.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return domain("t values must be positive and finite");
    }
    let nf = params.nf();
    let e = sobolev_energy(bump, params)?;
    if (e.lp - 1.0).abs() > 1e-6 {
        return domain(format!("bump must satisfy ‖v‖_N = 1, got ‖v‖_N^N = {}", e.lp));
    }
    let norm_2n = weighted_integral(omega_sphere(params.n())?, bump.radii(), bump.values(), nf, |v| v.abs().powf(2.0 * nf));
    let mut points = Vec::with_capacity(t_values.len());
    let mut range_warnings = Vec::new();
    for &t in t_values {
        let s = t.powf(1.0 / nf);
        let w = bump.dilated(s)?.scaled(s / (1.0 + t * e.grad).powf(1.0 / nf))?;
        if w.sup() > spec.near_zero_radius {
            range_warnings.push(t);
        }
        points.push((t, functional_j(&w, spec)?));
    }
    let fitted_slope = fit_slope(&points, spec.c_of_f);
    let top = *spec.higher_coeffs().last().unwrap_or(&0.0);
    let predicted_slope = top * norm_2n - spec.c_of_f * e.grad;
    Ok(PerturbationCurve { points, range_warnings, grad_norm: e.grad, norm_2n, fitted_slope, predicted_slope })
}

/// Intercept of the least-squares line through `((J - c)/t, t)`.
fn fit_slope(points: &[(f64, f64)], c: f64) -> f64 {
    let q: Vec<(f64, f64)> = points.iter().map(|&(t, j)| (t, (j - c) / t)).collect();
    if q.len() == 1 {
        return q[0].1;
    }
    let n = q.len() as f64;
    let mt = q.iter().map(|p| p.0).sum::<f64>() / n;
    let my = q.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = q.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = q.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    my - sxy / sxx * mt
}

/// GNS maximizer rescaled so that `‖v‖_N = 1`.
pub fn normalized_gns_bump(n: u32, opts: &GnsOptions) -> Result<(f64, RadialProfile)> {
    let r = compute_b_n(n, opts)?;
    let params = MtParams::new(n, 0.0)?;
    let lp = sobolev_energy(&r.maximizer, &params)?.lp;
    Ok((r.b_n, r.maximizer.scaled(lp.powf(-1.0 / params.nf()))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_quotient() {
        let p = MtParams::new(2, 0.0).unwrap();
        let radii = log_grid(1e-5, 12.0, 4000).unwrap();
        let mut v: Vec<f64> = radii.iter().map(|r| (-r * r).exp()).collect();
        *v.last_mut().unwrap() = 0.0;
        let u = RadialProfile::new(radii, v).unwrap();
        let q = gns_quotient(&u, &p).unwrap();
        assert!((q - 1.0 / (2.0 * PI)).abs() < 1e-5, "{q}");
    }

    #[test]
    fn quotient_invariance() {
        let p = MtParams::new(3, 0.0).unwrap();
        let radii = log_grid(1e-3, 10.0, 300).unwrap();
        let mut v: Vec<f64> = radii.iter().map(|r| 1.0 / (1.0 + r * r).powi(2)).collect();
        *v.last_mut().unwrap() = 0.0;
        let u = RadialProfile::new(radii, v).unwrap();
        let q = gns_quotient(&u, &p).unwrap();
        let w = u.scaled(3.7).unwrap().dilated(0.4).unwrap();
        assert!((gns_quotient(&w, &p).unwrap() / q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_line() {
        let pts = [(1e-3, 2.0 + 0.5e-3 + 3e-6), (1e-2, 2.0 + 0.5e-2 + 3e-4)];
        assert!((fit_slope(&pts, 2.0) - 0.5).abs() < 1e-9);
    }
}
