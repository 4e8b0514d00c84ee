//! Normalized vanishing and concentration limits, the two model sequences
//! that realize them and a classifier for sampled sequences.

use serde::Serialize;

use crate::constants::{factorial, MtParams};
use crate::error::{domain, MtError, Result};
use crate::green::{green_weighted_norm, GreenTable};
use crate::nonlinearity::{Criticality, NonlinearitySpec};
use crate::profile::{
    functional_j_inside, log_grid, sobolev_energy, sobolev_energy_outside, RadialProfile,
};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitValues {
    pub d_nvl: f64,
    pub d_ncl: f64,
    pub n: u32,
    pub beta: f64,
    pub criticality: Criticality,
    pub c_of_f: f64,
    pub a0: f64,
}

impl LimitValues {
    pub fn new(spec: &NonlinearitySpec, a0: f64) -> Self {
        let params = spec.params;
        Self {
            d_nvl: d_nvl(&params, spec),
            d_ncl: d_ncl(&params, spec, a0),
            n: params.n(),
            beta: params.beta(),
            criticality: spec.criticality,
            c_of_f: spec.c_of_f,
            a0,
        }
    }
}

/// `C(F)` when `β = 0`, zero otherwise.
pub fn d_nvl(params: &MtParams, spec: &NonlinearitySpec) -> f64 {
    if params.beta() > 0.0 {
        0.0
    } else {
        spec.c_of_f
    }
}

/// `|B_1|/(1-β) exp((1-β)α_N A_0 + 1 + 1/2 + ... + 1/(N-1))` for critical `F`, zero otherwise.
pub fn d_ncl(params: &MtParams, spec: &NonlinearitySpec, a0: f64) -> f64 {
    match spec.criticality {
        Criticality::Subcritical => 0.0,
        Criticality::Critical => critical_concentration_value(params, a0),
    }
}

fn critical_concentration_value(params: &MtParams, a0: f64) -> f64 {
    params.ball_volume() / (1.0 - params.beta()) * (params.alpha_beta() * a0 + params.harmonic()).exp()
}

pub const LIRUF_INNER_NODES: usize = 1600;
pub const LIRUF_OUTER_NODES: usize = 1600;

/// Li-Ruf bubble glued to a multiple of `G`, before and after normalization.
#[derive(Debug, Clone, Serialize)]
pub struct LiRufProfile {
    pub profile: RadialProfile,
    pub epsilon: f64,
    /// Gluing radius `R ε` with `R = (-ln ε)^{1/(1-β)}`.
    pub matching_radius: f64,
    /// `c^{N/(N-1)}` fixed by continuity at the gluing radius.
    pub c_pow: f64,
    /// `c^{N/(N-1)}` predicted by the logarithmic expansion.
    pub c_pow_expansion: f64,
    /// Additive constant in the bubble.
    pub a_n: f64,
    /// Sobolev energy before the final rescaling.
    pub raw_energy: f64,
}

/// `b_N = α_N / (N^{N/(N-1)} (1-β)^{1/(N-1)})`.
pub fn liruf_b(params: &MtParams) -> f64 {
    let nf = params.nf();
    params.alpha_n() / (nf.powf(nf / (nf - 1.0)) * (1.0 - params.beta()).powf(1.0 / (nf - 1.0)))
}

/// `c^{N/(N-1)} ≈ -(N/α_N) ln ε + A_0 - (N-1)/α_{β,N} H_{N-1} + ln(ω/(N(1-β)))/α_{β,N}`.
pub fn liruf_c_pow_expansion(params: &MtParams, epsilon: f64, a0: f64) -> f64 {
    let nf = params.nf();
    let ab = params.alpha_beta();
    -nf / params.alpha_n() * epsilon.ln() + a0 - (nf - 1.0) / ab * params.harmonic()
        + (params.omega() / (nf * (1.0 - params.beta()))).ln() / ab
}

pub fn liruf_profile(params: &MtParams, epsilon: f64, green: &GreenTable) -> Result<RadialProfile> {
    Ok(liruf_construction(params, epsilon, green)?.profile)
}

pub fn liruf_construction(params: &MtParams, epsilon: f64, green: &GreenTable) -> Result<LiRufProfile> {
    liruf_construction_with(params, epsilon, green, LIRUF_INNER_NODES, LIRUF_OUTER_NODES)
}

/// As [`liruf_construction`] with explicit node counts inside and outside the gluing radius.
pub fn liruf_construction_with(
    params: &MtParams,
    epsilon: f64,
    green: &GreenTable,
    inner_nodes: usize,
    outer_nodes: usize,
) -> Result<LiRufProfile> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("epsilon={epsilon} must lie in (0, 1)"));
    }
    if green.n != params.n() {
        return domain(format!("Green table is for N={}, problem has N={}", green.n, params.n()));
    }
    let nf = params.nf();
    let beta = params.beta();
    let ab = params.alpha_beta();
    let big_r = (-epsilon.ln()).powf(1.0 / (1.0 - beta));
    let rho = big_r * epsilon;
    if rho >= 1.0 {
        return Err(MtError::Construction(format!("matching radius {rho} is not below 1")));
    }
    let bn = liruf_b(params);
    let q = nf * (1.0 - beta) / (nf - 1.0);
    // continuity at rho pins this sign, see the logarithmic expansion of c
    let a_n = (nf - 1.0) / ab * params.harmonic();
    let bubble = |r: f64| -(nf - 1.0) / ab * (bn * (r / epsilon).powf(q)).ln_1p() + a_n;
    let c_pow = green.value(rho) - bubble(rho);
    if !(c_pow > 0.0) {
        return Err(MtError::Construction(format!("c^(N/(N-1)) = {c_pow} is not positive")));
    }
    let c = c_pow.powf((nf - 1.0) / nf);
    let inv = c.powf(-1.0 / (nf - 1.0));

    let mut radii = log_grid(epsilon * 1e-4, rho, inner_nodes)?;
    let outer = log_grid(rho, green.r_max(), outer_nodes)?;
    radii.extend_from_slice(&outer[1..]);
    let mut values: Vec<f64> = radii
        .iter()
        .map(|&r| if r <= rho { c + inv * bubble(r) } else { inv * green.value(r) })
        .collect();
    *values.last_mut().unwrap() = 0.0;
    let raw = RadialProfile::new(radii, values)?;
    let raw_energy = sobolev_energy(&raw, params)?.total();
    let profile = raw.scaled(raw_energy.powf(-1.0 / nf))?;
    Ok(LiRufProfile {
        profile,
        epsilon,
        matching_radius: rho,
        c_pow,
        c_pow_expansion: liruf_c_pow_expansion(params, epsilon, green.a0),
        a_n,
        raw_energy,
    })
}

/// Right side of the lower bound for `∫|x|^{-Nβ}Φ_N(α_{β,N}u^{N/(N-1)})` along the
/// Li-Ruf sequence, with the vanishing remainder dropped.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub leading: f64,
    pub correction: f64,
    /// The `o(1)` remainder is omitted, so the bound is asymptotic.
    pub asymptotic: bool,
}

pub fn geq3_lower_bound(params: &MtParams, spec: &NonlinearitySpec, epsilon: f64, green: &GreenTable) -> Result<LowerBound> {
    if spec.params != *params {
        return Err(MtError::Contract("spec and params disagree".into()));
    }
    let lr = liruf_construction(params, epsilon, green)?;
    let nf = params.nf();
    let leading = critical_concentration_value(params, green.a0);
    let norm = green_weighted_norm(green, params.beta())?;
    let correction = params.alpha_beta().powf(nf - 1.0) / (factorial(params.n() - 1) * lr.c_pow) * norm;
    Ok(LowerBound { value: leading + correction, leading, correction, asymptotic: true })
}

/// Gaussian bump rescaled so that `‖φ‖_N = ‖∇φ‖_N = 1`.
pub fn normalized_bump(params: &MtParams) -> Result<RadialProfile> {
    let radii = log_grid(1e-4, 12.0, 1200)?;
    let mut base = RadialProfile::from_fn(radii.clone(), |r| (-r * r).exp())?;
    let (r, mut v) = base.into_parts();
    *v.last_mut().unwrap() = 0.0;
    base = RadialProfile::new(r, v)?;
    let e = sobolev_energy(&base, params)?;
    let nf = params.nf();
    let c = e.grad.powf(-1.0 / nf);
    let mu = c * e.lp.powf(1.0 / nf);
    base.scaled(c)?.dilated(mu)
}

/// `λφ(λx) / (1 + λ^N ‖∇φ‖_N^N)^{1/N}` for a bump with unit `L^N` and gradient norms.
pub fn vanishing_profile(params: &MtParams, lambda: f64, bump: &RadialProfile) -> Result<RadialProfile> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("lambda={lambda} must be finite and > 0"));
    }
    let e = sobolev_energy(bump, params)?;
    if (e.grad - 1.0).abs() > 1e-6 || (e.lp - 1.0).abs() > 1e-6 {
        return domain(format!("bump is not normalized: ‖∇φ‖^N={}, ‖φ‖^N={}", e.grad, e.lp));
    }
    let nf = params.nf();
    bump.dilated(lambda)?.scaled(lambda / (1.0 + lambda.powf(nf) * e.grad).powf(1.0 / nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceClass {
    Concentrating,
    Vanishing,
    CompactCandidate,
}

impl SequenceClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Concentrating => "concentrating",
            Self::Vanishing => "vanishing",
            Self::CompactCandidate => "compact-candidate",
        }
    }
}

pub const CLASSIFY_RADII: [f64; 4] = [1e-2, 1e-1, 1.0, 10.0];
pub const CLASSIFY_THRESHOLD: f64 = 1e-3;

/// Observations at one sampling radius with the extrapolated limits.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub radius: f64,
    /// Sobolev energy outside `B_R`, per profile.
    pub tail_energy: Vec<f64>,
    /// `∫_{B_R} |x|^{-Nβ} F(u)`, per profile.
    pub inner_functional: Vec<f64>,
    pub tail_limit: f64,
    pub inner_limit: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub class: SequenceClass,
    pub witnesses: Vec<Witness>,
    /// `‖u_n‖_∞^{N/(N-1)}` per profile.
    pub sup_scale: Vec<f64>,
    /// Energy missing from the last profile inside the largest sampled ball.
    pub energy_deficit: f64,
}

/// Least-squares limit of `x_n = L + C σ_n` as `σ → 0`, with the largest residual.
fn fitted_limit(sigma: &[f64], x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let ms = sigma.iter().sum::<f64>() / n;
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = sigma.iter().map(|s| (s - ms).powi(2)).sum();
    let sxy: f64 = sigma.iter().zip(x).map(|(s, v)| (s - ms) * (v - mx)).sum();
    if sxx <= 1e-30 * (ms * ms).max(1e-300) {
        return (mx, 0.0);
    }
    let slope = sxy / sxx;
    let l = mx - slope * ms;
    let res = sigma.iter().zip(x).map(|(s, v)| (v - l - slope * s).abs()).fold(0.0, f64::max);
    (l, res)
}

/// A nonnegative sequence degenerates to zero when its last entry is
/// negligible, or when it decreases strictly along a strictly decreasing
/// degeneration variable `σ` and the linear trend in `σ` reaches a value
/// below a tenth of its first entry at `σ = 0`. Logarithmically slow
/// concentration never meets a fixed threshold at sampled scales, hence the trend.
fn tends_to_zero(sigma: &[f64], x: &[f64]) -> (bool, f64) {
    let last = *x.last().unwrap();
    let (l, _) = fitted_limit(sigma, x);
    let decreasing_sigma = sigma.windows(2).all(|p| p[1] < p[0]);
    let decreasing_x = x.windows(2).all(|p| p[1] < p[0]);
    if !decreasing_sigma || !decreasing_x {
        return (last <= CLASSIFY_THRESHOLD, l);
    }
    (last <= CLASSIFY_THRESHOLD || l <= CLASSIFY_THRESHOLD.max(0.1 * x[0]), l)
}

/// Concentrating when the Sobolev energy outside every sampled ball tends to zero
/// as `1/‖u‖_∞^{N/(N-1)}`; vanishing when the functional inside every sampled ball
/// tends to zero as `‖u‖_∞^N`.
pub fn classify_sequence(profiles: &[RadialProfile], spec: &NonlinearitySpec) -> Result<Classification> {
    if profiles.len() < 3 {
        return Err(MtError::InsufficientData(format!("need at least 3 profiles, got {}", profiles.len())));
    }
    let params = spec.params;
    for (i, u) in profiles.iter().enumerate() {
        let e = sobolev_energy(u, &params)?.total();
        if (e - 1.0).abs() > 1e-6 {
            return domain(format!("profile {i} has Sobolev energy {e}, expected 1"));
        }
    }
    let nf = params.nf();
    let sup_scale: Vec<f64> = profiles.iter().map(|u| u.sup().powf(nf / (nf - 1.0))).collect();
    let conc_sigma: Vec<f64> = sup_scale.iter().map(|s| 1.0 / s).collect();
    let van_sigma: Vec<f64> = profiles.iter().map(|u| u.sup().powf(nf)).collect();
    let mut all_conc = true;
    let mut all_van = true;
    let mut witnesses = Vec::with_capacity(CLASSIFY_RADII.len());
    for &r in &CLASSIFY_RADII {
        let tail: Vec<f64> = profiles.iter().map(|u| sobolev_energy_outside(u, &params, r).total()).collect();
        let inner: Vec<f64> = profiles.iter().map(|u| functional_j_inside(u, spec, r)).collect();
        let (tc, tl) = tends_to_zero(&conc_sigma, &tail);
        let (iv, il) = tends_to_zero(&van_sigma, &inner);
        all_conc &= tc;
        all_van &= iv;
        witnesses.push(Witness { radius: r, tail_energy: tail, inner_functional: inner, tail_limit: tl, inner_limit: il });
    }
    let class = match (all_conc, all_van) {
        (true, false) => SequenceClass::Concentrating,
        (false, true) => SequenceClass::Vanishing,
        _ => SequenceClass::CompactCandidate,
    };
    let last = profiles.last().unwrap();
    let r_big = *CLASSIFY_RADII.last().unwrap();
    let energy_deficit = sobolev_energy_outside(last, &params, r_big).total();
    Ok(Classification { class, witnesses, sup_scale, energy_deficit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::EULER_GAMMA;
    use std::f64::consts::PI;

    #[test]
    fn nvl_branches() {
        let p = MtParams::new(2, 0.3).unwrap();
        assert_eq!(d_nvl(&p, &NonlinearitySpec::phi_critical(p)), 0.0);
        let p0 = MtParams::new(2, 0.0).unwrap();
        assert!((d_nvl(&p0, &NonlinearitySpec::phi_critical(p0)) - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn ncl_closed_form_n2() {
        let p = MtParams::new(2, 0.0).unwrap();
        let a0 = (2f64.ln() - EULER_GAMMA) / (2.0 * PI);
        let v = d_ncl(&p, &NonlinearitySpec::phi_critical(p), a0);
        let expect = 4.0 * PI * (1.0 - 2.0 * EULER_GAMMA).exp();
        assert!((v - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn ncl_blows_up_near_beta_one() {
        let a = MtParams::new(2, 0.9).unwrap();
        let b = MtParams::new(2, 0.99).unwrap();
        let va = d_ncl(&a, &NonlinearitySpec::phi_critical(a), 0.1);
        let vb = d_ncl(&b, &NonlinearitySpec::phi_critical(b), 0.1);
        assert!(vb > 5.0 * va);
    }

    #[test]
    fn b_n_for_plane() {
        let p = MtParams::new(2, 0.0).unwrap();
        assert!((liruf_b(&p) - PI).abs() < 1e-12);
    }

    #[test]
    fn bump_is_normalized_and_vanishing_energy_is_one() {
        let p = MtParams::new(3, 0.0).unwrap();
        let phi = normalized_bump(&p).unwrap();
        let e = sobolev_energy(&phi, &p).unwrap();
        assert!((e.grad - 1.0).abs() < 1e-12 && (e.lp - 1.0).abs() < 1e-12);
        let u = vanishing_profile(&p, 1.0, &phi).unwrap();
        assert!((sobolev_energy(&u, &p).unwrap().total() - 1.0).abs() < 1e-12);
        let u = vanishing_profile(&p, 1e-2, &phi).unwrap();
        let e = sobolev_energy(&u, &p).unwrap();
        assert!((e.lp - 1.0 / (1.0 + 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_bump_is_rejected() {
        let p = MtParams::new(2, 0.0).unwrap();
        let phi = normalized_bump(&p).unwrap().scaled(2.0).unwrap();
        assert!(vanishing_profile(&p, 0.1, &phi).is_err());
    }

    #[test]
    fn short_sequences_are_rejected() {
        let p = MtParams::new(2, 0.0).unwrap();
        let phi = normalized_bump(&p).unwrap();
        let u = vanishing_profile(&p, 1.0, &phi).unwrap();
        let r = classify_sequence(&[u.clone(), u], &NonlinearitySpec::phi_critical(p));
        assert!(matches!(r, Err(MtError::InsufficientData(_))));
    }

    #[test]
    fn constant_sequence_is_compact_candidate() {
        let p = MtParams::new(2, 0.0).unwrap();
        let phi = normalized_bump(&p).unwrap();
        let u = vanishing_profile(&p, 1.0, &phi).unwrap();
        let c = classify_sequence(&[u.clone(), u.clone(), u], &NonlinearitySpec::phi_critical(p)).unwrap();
        assert_eq!(c.class, SequenceClass::CompactCandidate);
    }

    #[test]
    fn fitted_limit_recovers_line() {
        let s = [0.5, 0.25, 0.125];
        let x: Vec<f64> = s.iter().map(|v| 0.3 + 2.0 * v).collect();
        let (l, res) = fitted_limit(&s, &x);
        assert!((l - 0.3).abs() < 1e-12 && res < 1e-12);
    }
}
