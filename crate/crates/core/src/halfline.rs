//! Half-line picture: the substitution `t = -(1-β)N ln r`, the
//! Carleson-Chang type bound and the auxiliary problem of maximizing
//! `w(a)^{N/(N-1)}` under a weighted energy constraint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ascent::solve_tridiagonal;
use crate::constants::MtParams;
use crate::error::{domain, MtError, Result};
use crate::green::GreenTable;
use crate::nonlinearity::NonlinearitySpec;
use crate::profile::{functional_j, sobolev_energy, RadialProfile};
use crate::quad::gl8;

/// Non-decreasing function on a grid `t_1 < ... < t_M = a`, piecewise
/// linear, zero to the left of `t_1` and, when `flat_right`, constant to the
/// right of `t_M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfLineProfile {
    pub params: MtParams,
    t: Vec<f64>,
    w: Vec<f64>,
    pub flat_right: bool,
}

impl HalfLineProfile {
    pub fn new(params: MtParams, t: Vec<f64>, w: Vec<f64>, flat_right: bool) -> Result<Self> {
        if t.len() < 3 || t.len() != w.len() {
            return domain("half-line profile needs at least 3 nodes with matching values");
        }
        if t.windows(2).any(|p| !(p[1] > p[0])) || t.iter().any(|x| !x.is_finite()) {
            return domain("t grid must be finite and strictly increasing");
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return domain("values must be finite and nonnegative");
        }
        let top = w.iter().fold(0.0f64, |m, v| m.max(*v));
        if w.windows(2).any(|p| p[1] < p[0] - 1e-12 * top.max(1e-300)) {
            return domain("half-line profile must be non-decreasing");
        }
        Ok(Self { params, t, w, flat_right })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn a(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let m = self.t.len();
        if x < self.t[0] {
            return 0.0;
        }
        if x >= self.t[m - 1] {
            return self.w[m - 1];
        }
        let j = self.t.partition_point(|&s| s <= x).clamp(1, m - 1);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        self.w[j - 1] + (self.w[j] - self.w[j - 1]) * (x - t0) / (t1 - t0)
    }

    /// `∫_{x >= from} |w'|^N`.
    pub fn grad_energy_from(&self, from: f64) -> f64 {
        let nf = self.params.nf();
        let mut acc = 0.0;
        for i in 0..self.t.len() - 1 {
            let (t0, t1) = (self.t[i].max(from), self.t[i + 1]);
            if t1 <= t0 {
                continue;
            }
            let slope = (self.w[i + 1] - self.w[i]) / (self.t[i + 1] - self.t[i]);
            acc += slope.abs().powf(nf) * (t1 - t0);
        }
        acc
    }

    pub fn grad_energy(&self) -> f64 {
        self.grad_energy_from(f64::NEG_INFINITY)
    }

    /// `∫ g(w(t)) e^{-c t} dt` over the grid plus the flat right part.
    fn weighted(&self, c: f64, g: impl Fn(f64) -> f64) -> f64 {
        let rule = gl8();
        let mut acc = 0.0;
        for i in 0..self.t.len() - 1 {
            let (t0, t1, w0, w1) = (self.t[i], self.t[i + 1], self.w[i], self.w[i + 1]);
            if w0 == 0.0 && w1 == 0.0 {
                continue;
            }
            acc += rule.integrate(t0, t1, |x| (-c * x).exp() * g(w0 + (w1 - w0) * (x - t0) / (t1 - t0)));
        }
        if self.flat_right {
            let m = self.t.len();
            acc += g(self.w[m - 1]) * (-c * self.t[m - 1]).exp() / c;
        }
        acc
    }

    /// `∫ |w|^N e^{-t/(1-β)} dt`.
    pub fn weighted_lp(&self) -> f64 {
        let nf = self.params.nf();
        self.weighted(1.0 / (1.0 - self.params.beta()), |v| v.powf(nf))
    }

    /// `∫ (|w'|^N + ((1-β)N)^{-N} |w|^N e^{-t/(1-β)}) dt`.
    pub fn energy(&self) -> f64 {
        let scale = ((1.0 - self.params.beta()) * self.params.nf()).powf(-self.params.nf());
        self.grad_energy() + scale * self.weighted_lp()
    }

    /// `∫ F(α_{β,N}^{(1-N)/N} w) e^{-t} dt`.
    pub fn f_integral(&self, spec: &NonlinearitySpec) -> f64 {
        let c = self.params.alpha_beta().powf((1.0 - self.params.nf()) / self.params.nf());
        self.weighted(1.0, |v| spec.eval_unchecked(c * v))
    }

    /// Scale so that [`HalfLineProfile::energy`] equals `b`.
    pub fn normalized_to(&self, b: f64) -> Result<Self> {
        let e = self.energy();
        if !(e > 0.0) {
            return domain("cannot normalize a profile with zero energy");
        }
        let lam = (b / e).powf(1.0 / self.params.nf());
        Ok(Self { w: self.w.iter().map(|v| v * lam).collect(), ..self.clone() })
    }
}

/// `w(t) = α_{β,N}^{(N-1)/N} u(e^{-t/((1-β)N)})`.
pub fn to_one_d(u: &RadialProfile, params: &MtParams) -> Result<HalfLineProfile> {
    let top = u.sup();
    let last = *u.values().last().unwrap();
    if last > 1e-12 * top.max(1e-300) {
        return Err(MtError::Mapping(format!(
            "profile does not vanish at the outer grid radius (u = {last})"
        )));
    }
    let c = params.alpha_beta().powf((params.nf() - 1.0) / params.nf());
    let k = (1.0 - params.beta()) * params.nf();
    let t: Vec<f64> = u.radii().iter().rev().map(|r| -k * r.ln()).collect();
    let w: Vec<f64> = u.values().iter().rev().map(|v| c * v).collect();
    HalfLineProfile::new(*params, t, w, true)
}

/// Both sides of the three transfer identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferCheck {
    /// `(∫|∇u|^N, ∫|w'|^N)`.
    pub grad: (f64, f64),
    /// `((1-β)^N N^N ∫|u|^N, ∫|w|^N e^{-t/(1-β)})`.
    pub lp: (f64, f64),
    /// `(∫|x|^{-Nβ}F(u), |B_1|/(1-β) ∫F(α^{(1-N)/N} w) e^{-t})`.
    pub functional: (f64, f64),
}

fn rel(p: (f64, f64)) -> f64 {
    let s = p.0.abs().max(p.1.abs());
    if s == 0.0 {
        0.0
    } else {
        (p.0 - p.1).abs() / s
    }
}

impl TransferCheck {
    pub fn max_relative_error(&self) -> f64 {
        rel(self.grad).max(rel(self.lp)).max(rel(self.functional))
    }
}

pub fn transfer_identities(u: &RadialProfile, spec: &NonlinearitySpec) -> Result<TransferCheck> {
    let params = spec.params;
    let w = to_one_d(u, &params)?;
    let e = sobolev_energy(u, &params)?;
    let k = (1.0 - params.beta()) * params.nf();
    Ok(TransferCheck {
        grad: (e.grad, w.grad_energy()),
        lp: (k.powf(params.nf()) * e.lp, w.weighted_lp()),
        functional: (
            functional_j(u, spec)?,
            params.ball_volume() / (1.0 - params.beta()) * w.f_integral(spec),
        ),
    })
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() || !(b > 0.0) || !b.is_finite() {
        return domain(format!("need finite a > 0 and b > 0, got a={a}, b={b}"));
    }
    Ok(())
}

fn rho_of(a: f64, params: &MtParams) -> f64 {
    (-a / (params.nf() * (1.0 - params.beta()))).exp()
}

fn check_green(params: &MtParams, green: &GreenTable) -> Result<()> {
    if green.n != params.n() {
        return domain(format!("Green table is for N={}, problem has N={}", green.n, params.n()));
    }
    Ok(())
}

/// `γ(a,b)` with `γ^N = (N(1-β))^{N-1} b / ((-G'(ρ)ρ)^{N-1} G(ρ))`, `ρ = e^{-a/(N(1-β))}`.
pub fn aux_gamma(a: f64, b: f64, params: &MtParams, green: &GreenTable) -> Result<f64> {
    check_ab(a, b)?;
    check_green(params, green)?;
    let rho = rho_of(a, params);
    if rho < green.r_min() || rho > green.report.tail_start.min(green.r_max()) {
        return Err(MtError::Range(format!(
            "ρ = {rho} outside the resolved table [{}, {}]",
            green.r_min(),
            green.report.tail_start
        )));
    }
    let nf = params.nf();
    let (g, gp) = green.eval(rho);
    let k = nf * (1.0 - params.beta());
    Ok((k.powf(nf - 1.0) * b / ((-gp * rho).powf(nf - 1.0) * g)).powf(1.0 / nf))
}

/// `b^{1/(N-1)} (a + (1-β) α_N A_0)`.
pub fn aux_expansion(a: f64, b: f64, params: &MtParams, a0: f64) -> f64 {
    b.powf(1.0 / (params.nf() - 1.0)) * (a + (1.0 - params.beta()) * params.alpha_n() * a0)
}

#[derive(Debug, Clone, Serialize)]
pub struct AuxSolution {
    pub profile: HalfLineProfile,
    pub gamma: f64,
    /// `w(a)^{N/(N-1)}` from the closed form.
    pub sup_value: f64,
    pub expansion: f64,
    /// `sup_value - expansion`.
    pub remainder: f64,
    /// Energy of the tabulated profile.
    pub energy: f64,
    /// Largest per-cell flux-balance residual of the Euler-Lagrange equation.
    pub el_residual: f64,
}

pub const AUX_GRID: usize = 2048;

/// Closed-form maximizer `w(t) = γ(a,b) G(e^{-t/(N(1-β))})` on a uniform grid.
pub fn aux_maximizer(a: f64, b: f64, params: &MtParams, green: &GreenTable) -> Result<AuxSolution> {
    aux_maximizer_on(a, b, params, green, AUX_GRID)
}

pub fn aux_maximizer_on(a: f64, b: f64, params: &MtParams, green: &GreenTable, m: usize) -> Result<AuxSolution> {
    let gamma = aux_gamma(a, b, params, green)?;
    let nf = params.nf();
    let k = nf * (1.0 - params.beta());
    let rho = rho_of(a, params);
    // energy to the right of r equals (r|G'|)^{N-1} G, so truncate where it is negligible
    let tail = |r: f64| {
        let (g, gp) = green.eval(r);
        (-gp * r).powf(nf - 1.0) * g
    };
    let total = tail(rho);
    let mut r_far = rho;
    while tail(r_far) > 1e-10 * total && r_far < green.r_max() {
        r_far = (r_far * 1.05).max(r_far + 1e-3);
    }
    let t_min = -k * r_far.ln();
    let t: Vec<f64> = (0..m).map(|i| t_min + (a - t_min) * i as f64 / (m - 1) as f64).collect();
    let w: Vec<f64> = t.iter().map(|&x| gamma * green.value((-x / k).exp())).collect();
    let mut w = w;
    w[m - 1] = gamma * green.value(rho);
    let profile = HalfLineProfile::new(*params, t, w, false)?;
    let energy = profile.energy();
    if (energy - b).abs() > 1e-3 * b {
        return Err(MtError::Construction(format!("closed-form energy {energy} differs from b = {b}")));
    }
    let sup_value = (gamma * green.value(rho)).powf(nf / (nf - 1.0));
    let expansion = aux_expansion(a, b, params, green.a0);
    let el_residual = euler_lagrange_residual(&profile, gamma, green);
    Ok(AuxSolution { profile, gamma, sup_value, expansion, remainder: sup_value - expansion, energy, el_residual })
}

/// Per cell: `[-|w'|^{N-2}w']` across the cell plus `((1-β)N)^{-N} ∫ w^{N-1} e^{-t/(1-β)}`,
/// with `w = γ G(e^{-t/(N(1-β))})` evaluated from the table.
fn euler_lagrange_residual(w: &HalfLineProfile, gamma: f64, green: &GreenTable) -> f64 {
    let params = w.params;
    let nf = params.nf();
    let k = nf * (1.0 - params.beta());
    let c = k.powf(-nf);
    let wp = |x: f64| {
        let r = (-x / k).exp();
        let (_, gp) = green.eval(r);
        -gamma / k * gp * r
    };
    let flux = |x: f64| {
        let d = wp(x);
        d.abs().powf(nf - 2.0) * d
    };
    let rule = gl8();
    let mut worst = 0.0f64;
    for p in w.t().windows(2) {
        let integral = rule.integrate(p[0], p[1], |x| {
            let v = gamma * green.value((-x / k).exp());
            v.powf(nf - 1.0) * (-x / (1.0 - params.beta())).exp()
        });
        let res = -(flux(p[1]) - flux(p[0])) + c * integral;
        worst = worst.max(res.abs());
    }
    worst
}

fn pav_nondecreasing(v: &mut [f64]) {
    // pool adjacent violators with unit weights
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (m1, c1) = blocks[n - 2];
            let (m2, c2) = blocks[n - 1];
            if m1 <= m2 {
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

struct AuxEnergy {
    nf: f64,
    dt: f64,
    c: f64,
    decay: f64,
    t: Vec<f64>,
}

impl AuxEnergy {
    /// Energy and its gradient.
    fn eval(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let rule = gl8();
        let nf = self.nf;
        let m = w.len();
        let mut e = 0.0;
        let mut g = vec![0.0; m];
        for i in 0..m - 1 {
            let d = w[i + 1] - w[i];
            e += d.abs().powf(nf) / self.dt.powf(nf - 1.0);
            let dd = nf * d.abs().powf(nf - 2.0) * d / self.dt.powf(nf - 1.0);
            g[i] -= dd;
            g[i + 1] += dd;
            let (t0, w0, w1) = (self.t[i], w[i], w[i + 1]);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let v = w0 + (w1 - w0) * x;
                let ex = (-self.decay * (t0 + self.dt * x)).exp() * wt * self.dt * self.c;
                e += ex * v.abs().powf(nf);
                let dv = ex * nf * v.abs().powf(nf - 2.0) * v;
                g[i] += dv * (1.0 - x);
                g[i + 1] += dv * x;
            }
        }
        (e, g)
    }

    /// Tridiagonal stand-in for the Hessian of the energy, floored to stay positive.
    fn metric(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nf = self.nf;
        let m = w.len();
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m - 1];
        let dmax = w.windows(2).map(|p| (p[1] - p[0]).abs()).fold(0.0f64, f64::max).max(1e-300);
        let wmax = w.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for i in 0..m - 1 {
            let d = (w[i + 1] - w[i]).abs().max(1e-3 * dmax);
            let s = nf * (nf - 1.0) * d.powf(nf - 2.0) / self.dt.powf(nf - 1.0);
            diag[i] += s;
            diag[i + 1] += s;
            off[i] -= s;
            let v = (0.5 * (w[i] + w[i + 1])).abs().max(1e-3 * wmax);
            let t_mid = self.t[i] + 0.5 * self.dt;
            let mass = self.c * nf * (nf - 1.0) * v.powf(nf - 2.0) * (-self.decay * t_mid).exp() * self.dt;
            diag[i] += mass / 3.0;
            diag[i + 1] += mass / 3.0;
            off[i] += mass / 6.0;
        }
        (diag, off)
    }
}

/// Projected ascent for `max w(a)^{N/(N-1)}` over non-decreasing grid
/// functions with `w(t_min) = 0` and energy `b`, from a seeded random start.
pub fn aux_brute(a: f64, b: f64, params: &MtParams, grid_size: usize, seed: u64) -> Result<(f64, HalfLineProfile)> {
    check_ab(a, b)?;
    if grid_size < 64 {
        return domain(format!("grid_size={grid_size} must be at least 64"));
    }
    let nf = params.nf();
    let k = nf * (1.0 - params.beta());
    let t_min = -k * 40f64.ln();
    let m = grid_size;
    let t: Vec<f64> = (0..m).map(|i| t_min + (a - t_min) * i as f64 / (m - 1) as f64).collect();
    let en = AuxEnergy { nf, dt: (a - t_min) / (m - 1) as f64, c: k.powf(-nf), decay: 1.0 / (1.0 - params.beta()), t: t.clone() };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; m];
    for i in 1..m {
        w[i] = w[i - 1] + rng.gen::<f64>();
    }
    let normalize = |w: &mut Vec<f64>| -> f64 {
        let (e, _) = en.eval(w);
        let lam = (b / e).powf(1.0 / nf);
        for v in w.iter_mut() {
            *v *= lam;
        }
        w[m - 1]
    };
    let project = |w: &mut Vec<f64>| {
        for v in w.iter_mut() {
            *v = v.max(0.0);
        }
        w[0] = 0.0;
        pav_nondecreasing(w);
        w[0] = 0.0;
    };
    let mut val = normalize(&mut w);
    let mut eta = b;
    let mut converged = false;
    for _ in 0..10_000 {
        let (e, ge) = en.eval(&w);
        // ascent direction for ln(w_M) - ln(E)/N, node 0 pinned
        let grad: Vec<f64> = (1..m)
            .map(|i| if i == m - 1 { 1.0 / w[m - 1] } else { 0.0 } - ge[i] / (nf * e))
            .collect();
        let (diag, off) = en.metric(&w);
        let dir = solve_tridiagonal(&diag[1..], &off[1..], &grad);
        let mut accepted = false;
        let mut step = eta * 2.0;
        for _ in 0..60 {
            let mut trial = w.clone();
            for i in 1..m {
                trial[i] += step * dir[i - 1];
            }
            project(&mut trial);
            if trial[m - 1] > 0.0 {
                let tv = normalize(&mut trial);
                if tv > val {
                    let change = (tv - val) / val;
                    w = trial;
                    val = tv;
                    eta = step;
                    accepted = true;
                    converged = change < 1e-13;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MtError::Optimizer("auxiliary ascent hit the iteration cap".into()));
    }
    let profile = HalfLineProfile::new(*params, t, w, false)?;
    Ok((val.powf(nf / (nf - 1.0)), profile))
}

/// Right-hand side of the Carleson-Chang type bound on `∫_a^∞ e^{w^{N/(N-1)} - t} dt`.
pub fn carleson_chang_rhs(w: &HalfLineProfile, a: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta={delta} must lie in (0, 1)"));
    }
    if !a.is_finite() {
        return domain("a must be finite");
    }
    let tail = w.grad_energy_from(a);
    if tail > delta * (1.0 + 1e-12) {
        return domain(format!("tail energy {tail} exceeds delta={delta}"));
    }
    let nf = w.params.nf();
    let q = 1.0 - delta.powf(1.0 / (nf - 1.0));
    let wa = w.value_at(a).powf(nf / (nf - 1.0));
    let bracket = 1.0 + delta / ((nf - 1.0) * q.powf(nf - 1.0));
    Ok((wa * bracket - a).exp() / q * w.params.harmonic().exp())
}

/// `∫_a^∞ e^{w^{N/(N-1)} - t} dt` by Gauss-Legendre per cell.
pub fn carleson_chang_lhs(w: &HalfLineProfile, a: f64) -> f64 {
    let p = w.params.conj();
    let rule = gl8();
    let t = w.t();
    let mut acc = 0.0;
    if a < t[0] {
        // w vanishes there
        acc += (-a).exp() - (-t[0]).exp();
    }
    for i in 0..t.len() - 1 {
        let lo = t[i].max(a);
        let hi = t[i + 1];
        if hi <= lo {
            continue;
        }
        acc += rule.integrate(lo, hi, |x| (w.value_at(x).powf(p) - x).exp());
    }
    let m = t.len();
    let end = t[m - 1].max(a);
    acc += (w.w()[m - 1].powf(p) - end).exp();
    acc
}

/// Random admissible half-line profile: non-decreasing, zero at `t_1`,
/// flat to the right, with gradient energy beyond `a` below `delta`.
pub fn random_admissible_profile(
    params: MtParams,
    a: f64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<HalfLineProfile> {
    let m = 96;
    let (t0, t1) = (a - 20.0, a + 20.0);
    let t: Vec<f64> = (0..m).map(|i| t0 + (t1 - t0) * i as f64 / (m - 1) as f64).collect();
    let split = t.partition_point(|&x| x < a);
    let mut w = vec![0.0; m];
    for i in 1..m {
        w[i] = w[i - 1] + rng.gen::<f64>() * rng.gen::<f64>();
    }
    // left part carries energy at most 1 - delta, right part at most delta
    let left = HalfLineProfile::new(params, t.clone(), w.clone(), true)?;
    let el = left.grad_energy() - left.grad_energy_from(a);
    let scale_left = if el > 0.0 { ((1.0 - delta) * rng.gen::<f64>() / el).powf(1.0 / params.nf()) } else { 1.0 };
    let mut out = vec![0.0; m];
    for i in 0..m {
        out[i] = if i < split { w[i] * scale_left } else { 0.0 };
    }
    let base = if split > 0 { out[split - 1] } else { 0.0 };
    let mut incr = vec![0.0; m];
    for i in split.max(1)..m {
        incr[i] = incr[i - 1] + (w[i] - w[i - 1]);
    }
    let right = HalfLineProfile::new(params, t.clone(), incr.clone(), true)?;
    let er = right.grad_energy();
    let scale_right = if er > 0.0 { (delta * rng.gen::<f64>() / er).powf(1.0 / params.nf()) } else { 0.0 };
    for i in split..m {
        out[i] = base + incr[i] * scale_right;
    }
    HalfLineProfile::new(params, t, out, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32, beta: f64) -> MtParams {
        MtParams::new(n, beta).unwrap()
    }

    #[test]
    fn zero_profile_maps_to_zero() {
        let u = RadialProfile::new(vec![0.1, 1.0, 10.0], vec![0.0; 3]).unwrap();
        let w = to_one_d(&u, &p(2, 0.0)).unwrap();
        assert!(w.w().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mapping_error_when_not_vanishing() {
        let u = RadialProfile::new(vec![0.1, 1.0, 10.0], vec![1.0, 1.0, 0.5]).unwrap();
        assert!(matches!(to_one_d(&u, &p(2, 0.0)), Err(MtError::Mapping(_))));
    }

    #[test]
    fn constructor_checks() {
        let q = p(2, 0.0);
        assert!(HalfLineProfile::new(q, vec![0.0, 1.0], vec![0.0, 1.0], true).is_err());
        assert!(HalfLineProfile::new(q, vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0], true).is_err());
        assert!(HalfLineProfile::new(q, vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0], true).is_err());
    }

    #[test]
    fn carleson_chang_degenerate_case() {
        let q = p(2, 0.0);
        let w = HalfLineProfile::new(q, vec![0.0, 1.0, 2.0], vec![0.0; 3], true).unwrap();
        let v = carleson_chang_rhs(&w, 0.0, 1e-15).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-12);
        assert!(carleson_chang_rhs(&w, 0.0, 1.0).is_err());
        assert!(carleson_chang_rhs(&w, 0.0, 0.0).is_err());
        let w3 = HalfLineProfile::new(p(3, 0.0), vec![0.0, 1.0, 2.0], vec![0.0; 3], true).unwrap();
        let v3 = carleson_chang_rhs(&w3, 0.0, 1e-15).unwrap();
        assert!((v3 / 1.5f64.exp() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn tail_energy_is_checked() {
        let q = p(2, 0.0);
        let w = HalfLineProfile::new(q, vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.5], true).unwrap();
        assert!(carleson_chang_rhs(&w, 1.0, 0.5).is_err());
        assert!(carleson_chang_rhs(&w, 1.0, 0.99).is_err());
    }

    #[test]
    fn pav_projects() {
        let mut v = vec![0.0, 3.0, 1.0, 2.0, 5.0];
        pav_nondecreasing(&mut v);
        assert_eq!(v, vec![0.0, 2.0, 2.0, 2.0, 5.0]);
    }

    #[test]
    fn aux_brute_rejects_bad_input() {
        assert!(aux_brute(10.0, 0.0, &p(2, 0.0), 128, 1).is_err());
        assert!(aux_brute(10.0, 1.0, &p(2, 0.0), 32, 1).is_err());
    }
}
