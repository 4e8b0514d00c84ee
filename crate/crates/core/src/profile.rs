//! Radial profiles sampled on a logarithmic grid.
//!
//! A profile is piecewise linear in `s = ln r` between nodes, constant equal
//! to its first value on `[0, r_1]` and zero beyond the last node. All
//! integrals are evaluated for that interpolant: the gradient part exactly,
//! the rest by Gauss-Legendre per cell plus a closed form on `[0, r_1]`.

use serde::Serialize;

use crate::constants::MtParams;
use crate::error::{domain, MtError, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::quad::gl8;

pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 1e3;
pub const DEFAULT_NODES: usize = 4096;

/// Geometric grid of `m` nodes from `r_min` to `r_max`.
pub fn log_grid(r_min: f64, r_max: f64, m: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() || m < 3 {
        return domain(format!("invalid log grid ({r_min}, {r_max}, {m})"));
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    let mut g: Vec<f64> = (0..m)
        .map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp())
        .collect();
    g[0] = r_min;
    g[m - 1] = r_max;
    Ok(g)
}

/// Nonnegative, non-increasing radial function on a log grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_samples(&radii, &values)?;
        let top = values[0];
        for (i, w) in values.windows(2).enumerate() {
            if w[1] > w[0] + 1e-12 * top.max(1e-300) {
                return domain(format!("profile increases at node {}", i + 1));
            }
        }
        let mut values = values;
        for i in 1..values.len() {
            values[i] = values[i].min(values[i - 1]);
        }
        Ok(Self { radii, values })
    }

    pub fn from_fn(radii: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = radii.iter().map(|&r| f(r)).collect();
        Self::new(radii, values)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn sup(&self) -> f64 {
        self.values[0]
    }

    pub fn value_at(&self, r: f64) -> f64 {
        interpolate(&self.radii, &self.values, r)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return domain(format!("scale factor {c} must be finite and >= 0"));
        }
        Ok(Self { radii: self.radii.clone(), values: self.values.iter().map(|v| v * c).collect() })
    }

    /// `x ↦ u(λx)`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("dilation {lambda} must be finite and > 0"));
        }
        Ok(Self { radii: self.radii.iter().map(|r| r / lambda).collect(), values: self.values.clone() })
    }

    /// Resample on another grid through the interpolant.
    pub fn resampled(&self, radii: &[f64]) -> Result<Self> {
        Self::new(radii.to_vec(), radii.iter().map(|&r| self.value_at(r)).collect())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.radii, self.values)
    }
}

pub(crate) fn check_samples(radii: &[f64], values: &[f64]) -> Result<()> {
    if radii.len() < 3 || radii.len() != values.len() {
        return domain(format!(
            "need at least 3 nodes with matching values, got {} radii and {} values",
            radii.len(),
            values.len()
        ));
    }
    if !(radii[0] > 0.0) {
        return domain("radii must be positive");
    }
    for w in radii.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return domain("radii must be finite and strictly increasing");
        }
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return domain("values must be finite and nonnegative");
    }
    Ok(())
}

/// Piecewise linear in `ln r` interpolation with the plateau and zero
/// extension conventions.
pub fn interpolate(radii: &[f64], values: &[f64], r: f64) -> f64 {
    let m = radii.len();
    if r <= radii[0] {
        return values[0];
    }
    if r > radii[m - 1] {
        return 0.0;
    }
    let j = radii.partition_point(|&x| x < r).clamp(1, m - 1);
    let (r0, r1) = (radii[j - 1], radii[j]);
    let t = (r / r0).ln() / (r1 / r0).ln();
    values[j - 1] + t * (values[j] - values[j - 1])
}

/// `ω Σ |Δu|^N / Δs^{N-1}` restricted to `r ∈ [r_a, r_b]`.
pub fn gradient_energy_range(n: u32, radii: &[f64], values: &[f64], r_a: f64, r_b: f64) -> f64 {
    let omega = crate::constants::omega_sphere(n).expect("validated dimension");
    let nf = n as f64;
    let (sa, sb) = (r_a.max(1e-300).ln(), r_b.ln());
    let mut acc = 0.0;
    for i in 0..radii.len() - 1 {
        let (s0, s1) = (radii[i].ln(), radii[i + 1].ln());
        let lo = s0.max(sa);
        let hi = s1.min(sb);
        if hi <= lo {
            continue;
        }
        let slope = (values[i + 1] - values[i]) / (s1 - s0);
        acc += slope.abs().powf(nf) * (hi - lo);
    }
    omega * acc
}

pub fn gradient_energy(n: u32, radii: &[f64], values: &[f64]) -> f64 {
    gradient_energy_range(n, radii, values, 0.0, f64::INFINITY)
}

/// `ω ∫_{r_a}^{r_b} r^{p-1} g(u(r)) dr` for the interpolant.
pub fn weighted_integral_range(
    omega: f64,
    radii: &[f64],
    values: &[f64],
    p: f64,
    g: impl Fn(f64) -> f64,
    r_a: f64,
    r_b: f64,
) -> f64 {
    let rule = gl8();
    let mut acc = 0.0;
    let r1 = radii[0];
    if r_a < r1 {
        let hi = r1.min(r_b);
        let lo = r_a.max(0.0);
        acc += (hi.powf(p) - lo.powf(p)) / p * g(values[0]);
    }
    let (sa, sb) = (r_a.max(1e-300).ln(), r_b.ln());
    for i in 0..radii.len() - 1 {
        let (s0, s1) = (radii[i].ln(), radii[i + 1].ln());
        let lo = s0.max(sa);
        let hi = s1.min(sb);
        if hi <= lo {
            continue;
        }
        let (u0, u1) = (values[i], values[i + 1]);
        if u0 == 0.0 && u1 == 0.0 {
            continue;
        }
        let ds = s1 - s0;
        acc += rule.integrate(lo, hi, |s| {
            let u = u0 + (u1 - u0) * (s - s0) / ds;
            (p * s).exp() * g(u)
        });
    }
    omega * acc
}

pub fn weighted_integral(omega: f64, radii: &[f64], values: &[f64], p: f64, g: impl Fn(f64) -> f64) -> f64 {
    weighted_integral_range(omega, radii, values, p, g, 0.0, f64::INFINITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevEnergy {
    pub grad: f64,
    pub lp: f64,
}

impl SobolevEnergy {
    pub fn total(&self) -> f64 {
        self.grad + self.lp
    }
}

/// `(‖∇u‖_N^N, ‖u‖_N^N)`.
pub fn sobolev_energy(u: &RadialProfile, params: &MtParams) -> Result<SobolevEnergy> {
    sobolev_energy_raw(params.n(), u.radii(), u.values())
}

pub(crate) fn sobolev_energy_raw(n: u32, radii: &[f64], values: &[f64]) -> Result<SobolevEnergy> {
    let omega = crate::constants::omega_sphere(n)?;
    let nf = n as f64;
    let grad = gradient_energy(n, radii, values);
    let lp = weighted_integral(omega, radii, values, nf, |u| u.abs().powf(nf));
    if !grad.is_finite() || !lp.is_finite() {
        return Err(MtError::Integration(format!("non-finite energy ({grad}, {lp})")));
    }
    Ok(SobolevEnergy { grad, lp })
}

/// Energy outside the ball of radius `r`.
pub fn sobolev_energy_outside(u: &RadialProfile, params: &MtParams, r: f64) -> SobolevEnergy {
    let nf = params.nf();
    let grad = gradient_energy_range(params.n(), u.radii(), u.values(), r, f64::INFINITY);
    let lp = weighted_integral_range(
        params.omega(),
        u.radii(),
        u.values(),
        nf,
        |v| v.abs().powf(nf),
        r,
        f64::INFINITY,
    );
    SobolevEnergy { grad, lp }
}

/// `∫ F(u) |x|^{-Nβ} dx`.
pub fn functional_j(u: &RadialProfile, spec: &NonlinearitySpec) -> Result<f64> {
    functional_j_raw(u.radii(), u.values(), spec)
}

pub(crate) fn functional_j_raw(radii: &[f64], values: &[f64], spec: &NonlinearitySpec) -> Result<f64> {
    let params = spec.params;
    let p = params.nf() * (1.0 - params.beta());
    let v = weighted_integral(params.omega(), radii, values, p, |t| spec.eval_unchecked(t));
    if !v.is_finite() {
        return Err(MtError::Integration(format!("functional evaluates to {v}")));
    }
    Ok(v)
}

/// `∫_{B_R} F(u) |x|^{-Nβ} dx`.
pub fn functional_j_inside(u: &RadialProfile, spec: &NonlinearitySpec, r: f64) -> f64 {
    let params = spec.params;
    let p = params.nf() * (1.0 - params.beta());
    weighted_integral_range(params.omega(), u.radii(), u.values(), p, |t| spec.eval_unchecked(t), 0.0, r)
}

/// `sup_r u(r) r^{(N-1)/N} / E(u)^{1/N}` sampled at the nodes and inside each cell.
pub fn radial_decay_ratio(u: &RadialProfile, params: &MtParams) -> Result<f64> {
    let e = sobolev_energy(u, params)?.total();
    if !(e > 0.0) {
        return domain("profile has zero energy");
    }
    let k = (params.nf() - 1.0) / params.nf();
    let mut best = 0.0f64;
    let (r, v) = (u.radii(), u.values());
    for i in 0..r.len() {
        best = best.max(v[i] * r[i].powf(k));
        if i + 1 < r.len() {
            for q in 1..4 {
                let rr = (r[i].ln() + (r[i + 1] / r[i]).ln() * q as f64 / 4.0).exp();
                best = best.max(u.value_at(rr) * rr.powf(k));
            }
        }
    }
    Ok(best / e.powf(1.0 / params.nf()))
}

/// `(1+ε)a^r + (1-(1+ε)^{1/(1-r)})^{1-r} b^r - (a+b)^r` for `r > 1`.
pub fn elementary_inequality_gap(a: f64, b: f64, eps: f64, r: f64) -> Result<f64> {
    if !(a >= 0.0) || !(b >= 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!("a={a}, b={b} must be finite and >= 0"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return domain(format!("eps={eps} must be finite and > 0"));
    }
    if !(r > 1.0) || !r.is_finite() {
        return domain(format!("r={r} must be finite and > 1"));
    }
    // 1 - (1+ε)^{1/(1-r)} without cancellation for small ε
    let c = (-(eps.ln_1p() / (1.0 - r)).exp_m1()).powf(1.0 - r);
    Ok((1.0 + eps) * a.powf(r) + c * b.powf(r) - (a + b).powf(r))
}

/// Text form: a header `# N=<n> beta=<beta>`, then `r,u` rows.
pub fn profile_to_csv(u: &RadialProfile, params: &MtParams) -> String {
    let mut s = format!("# N={} beta={}\nr,u\n", params.n(), params.beta());
    for (r, v) in u.radii().iter().zip(u.values()) {
        s.push_str(&format!("{r},{v}\n"));
    }
    s
}

/// Parse `r,u` rows; returns the header parameters when present.
pub fn profile_samples_from_csv(text: &str) -> Result<(Option<MtParams>, Vec<f64>, Vec<f64>)> {
    let mut params = None;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let mut n = None;
            let mut beta = 0.0;
            for tok in h.split_whitespace() {
                if let Some(v) = tok.strip_prefix("N=") {
                    n = Some(v.parse::<u32>().map_err(|e| MtError::Parse(format!("bad N: {e}")))?);
                } else if let Some(v) = tok.strip_prefix("beta=") {
                    beta = v.parse::<f64>().map_err(|e| MtError::Parse(format!("bad beta: {e}")))?;
                }
            }
            if let Some(n) = n {
                params = Some(MtParams::new(n, beta)?);
            }
            continue;
        }
        if line.starts_with('r') {
            continue;
        }
        let mut it = line.split(',');
        let parse = |x: Option<&str>| -> Result<f64> {
            x.ok_or_else(|| MtError::Parse(format!("short row '{line}'")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| MtError::Parse(format!("bad number in '{line}': {e}")))
        };
        radii.push(parse(it.next())?);
        values.push(parse(it.next())?);
    }
    Ok((params, radii, values))
}

pub fn profile_from_csv(text: &str) -> Result<(Option<MtParams>, RadialProfile)> {
    let (p, r, v) = profile_samples_from_csv(text)?;
    Ok((p, RadialProfile::new(r, v)?))
}
