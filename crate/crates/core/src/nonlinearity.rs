//! Nonlinearities `F` entering the functional `∫ F(u) |x|^{-Nβ} dx`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{factorial, phi_truncated_exp_prime, exp_tail, MtParams};
use crate::error::{domain, MtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criticality {
    Critical,
    Subcritical,
}

impl Criticality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criticality::Critical => "critical",
            Criticality::Subcritical => "subcritical",
        }
    }
}

impl std::str::FromStr for Criticality {
    type Err = MtError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "critical" => Ok(Criticality::Critical),
            "subcritical" => Ok(Criticality::Subcritical),
            other => Err(MtError::Parse(format!("unknown criticality '{other}'"))),
        }
    }
}

pub type CustomFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum NonlinearityKind {
    /// `Φ_N(α_{β,N} |t|^{N/(N-1)})`.
    PhiCritical,
    /// `Φ_N(α_{β,N} |t|^{N/(N-1)}) - λ |t|^N`.
    PhiMinusPower { lambda: f64 },
    /// `C(F)|t|^N + Σ_{k=N}^{2(N-1)} C_k |t|^{Nk/(N-1)}`; `coeffs[j]` is `C_{N+j}`.
    Polynomial { coeffs: Vec<f64> },
    /// User supplied even evaluator.
    Custom { name: String, eval: CustomFn },
}

impl fmt::Debug for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PhiCritical => write!(f, "PhiCritical"),
            Self::PhiMinusPower { lambda } => write!(f, "PhiMinusPower({lambda})"),
            Self::Polynomial { coeffs } => write!(f, "Polynomial({coeffs:?})"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub params: MtParams,
    pub criticality: Criticality,
    /// Declared `lim_{t→0} F(t)/|t|^N`.
    pub c_of_f: f64,
    /// Radius below which the near-zero expansion is trusted.
    pub near_zero_radius: f64,
}

impl NonlinearitySpec {
    pub fn phi_critical(params: MtParams) -> Self {
        let n = params.n();
        Self {
            kind: NonlinearityKind::PhiCritical,
            params,
            criticality: Criticality::Critical,
            c_of_f: params.alpha_beta().powi(n as i32 - 1) / factorial(n - 1),
            near_zero_radius: f64::INFINITY,
        }
    }

    pub fn phi_minus_power(params: MtParams, lambda: f64) -> Result<Self> {
        let n = params.n();
        let c0 = params.alpha_beta().powi(n as i32 - 1) / factorial(n - 1);
        if !lambda.is_finite() || lambda < 0.0 || lambda > c0 {
            return domain(format!("lambda={lambda} must lie in [0, {c0}]"));
        }
        Ok(Self {
            kind: NonlinearityKind::PhiMinusPower { lambda },
            params,
            criticality: Criticality::Critical,
            c_of_f: c0 - lambda,
            near_zero_radius: f64::INFINITY,
        })
    }

    /// Polynomial nonlinearity; `coeffs` holds `C_N, ..., C_{2(N-1)}` and may be shorter.
    pub fn polynomial(params: MtParams, c_of_f: f64, coeffs: Vec<f64>) -> Result<Self> {
        let n = params.n();
        if coeffs.len() > (n - 1) as usize {
            return domain(format!(
                "at most {} higher coefficients allowed, got {}",
                n - 1,
                coeffs.len()
            ));
        }
        if !c_of_f.is_finite() || c_of_f < 0.0 || coeffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return domain("polynomial coefficients must be finite and nonnegative");
        }
        Ok(Self {
            kind: NonlinearityKind::Polynomial { coeffs },
            params,
            criticality: Criticality::Subcritical,
            c_of_f,
            near_zero_radius: f64::INFINITY,
        })
    }

    pub fn custom(
        params: MtParams,
        name: impl Into<String>,
        eval: CustomFn,
        criticality: Criticality,
        c_of_f: f64,
    ) -> Self {
        Self {
            kind: NonlinearityKind::Custom { name: name.into(), eval },
            params,
            criticality,
            c_of_f,
            near_zero_radius: f64::INFINITY,
        }
    }

    pub fn kind_name(&self) -> &str {
        match &self.kind {
            NonlinearityKind::PhiCritical => "phi-critical",
            NonlinearityKind::PhiMinusPower { .. } => "phi-minus-power",
            NonlinearityKind::Polynomial { .. } => "polynomial-perturbed",
            NonlinearityKind::Custom { .. } => "custom",
        }
    }

    /// Coefficients `C_k` of `|t|^{Nk/(N-1)}` for `k = N..=2(N-1)`, zero padded.
    pub fn higher_coeffs(&self) -> Vec<f64> {
        let m = (self.params.n() - 1) as usize;
        let mut out = vec![0.0; m];
        match &self.kind {
            NonlinearityKind::Polynomial { coeffs } => out[..coeffs.len()].copy_from_slice(coeffs),
            NonlinearityKind::PhiCritical | NonlinearityKind::PhiMinusPower { .. } => {
                let a = self.params.alpha_beta();
                let n = self.params.n();
                for (j, c) in out.iter_mut().enumerate() {
                    let k = n + j as u32;
                    *c = a.powi(k as i32) / factorial(k);
                }
            }
            NonlinearityKind::Custom { .. } => {}
        }
        out
    }

    /// `F(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(MtError::Evaluation(format!("non-finite argument {t}")));
        }
        let v = self.eval_unchecked(t);
        if v.is_nan() || v < 0.0 {
            return Err(MtError::Evaluation(format!("F({t}) = {v} is not a nonnegative number")));
        }
        Ok(v)
    }

    /// `F(t)` without validation; used in quadrature loops.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        let n = self.params.n();
        let nf = self.params.nf();
        let x = t.abs();
        match &self.kind {
            NonlinearityKind::PhiCritical => {
                exp_tail(n - 1, self.params.alpha_beta() * x.powf(self.params.conj()))
            }
            NonlinearityKind::PhiMinusPower { lambda } => {
                let arg = self.params.alpha_beta() * x.powf(self.params.conj());
                // subtract λ|t|^N inside the tail series to avoid cancellation near 0
                let c0 = self.params.alpha_beta().powi(n as i32 - 1) / factorial(n - 1);
                let lead = (c0 - lambda) * x.powf(nf);
                lead + exp_tail(n, arg)
            }
            NonlinearityKind::Polynomial { coeffs } => {
                let mut v = self.c_of_f * x.powf(nf);
                for (j, c) in coeffs.iter().enumerate() {
                    let k = (n + j as u32) as f64;
                    v += c * x.powf(nf * k / (nf - 1.0));
                }
                v
            }
            NonlinearityKind::Custom { eval, .. } => eval(t),
        }
    }

    /// `F'(t)` for `t >= 0`.
    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.params.n();
        let nf = self.params.nf();
        let x = t.abs();
        let p = self.params.conj();
        let a = self.params.alpha_beta();
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        let d = match &self.kind {
            NonlinearityKind::PhiCritical => {
                if x == 0.0 {
                    0.0
                } else {
                    phi_truncated_exp_prime(n, a * x.powf(p)) * a * p * x.powf(p - 1.0)
                }
            }
            NonlinearityKind::PhiMinusPower { lambda } => {
                let base = if x == 0.0 {
                    0.0
                } else {
                    phi_truncated_exp_prime(n, a * x.powf(p)) * a * p * x.powf(p - 1.0)
                };
                base - lambda * nf * x.powf(nf - 1.0)
            }
            NonlinearityKind::Polynomial { coeffs } => {
                let mut v = self.c_of_f * nf * x.powf(nf - 1.0);
                for (j, c) in coeffs.iter().enumerate() {
                    let e = nf * (n + j as u32) as f64 / (nf - 1.0);
                    v += c * e * x.powf(e - 1.0);
                }
                v
            }
            NonlinearityKind::Custom { eval, .. } => {
                let h = 1e-6 * x.max(1.0);
                if x <= h {
                    (eval(x + h) - eval(x)) / h
                } else {
                    (eval(x + h) - eval(x - h)) / (2.0 * h)
                }
            }
        };
        sign * d
    }

    /// Key-value text form. Custom evaluators cannot be serialized.
    pub fn to_kv(&self) -> Result<String> {
        let mut s = String::new();
        s.push_str(&format!("kind={}\n", self.kind_name()));
        s.push_str(&format!("N={}\n", self.params.n()));
        s.push_str(&format!("beta={}\n", self.params.beta()));
        match &self.kind {
            NonlinearityKind::PhiMinusPower { lambda } => s.push_str(&format!("lambda={lambda}\n")),
            NonlinearityKind::Polynomial { coeffs } => {
                let list: Vec<String> = std::iter::once(self.c_of_f)
                    .chain(coeffs.iter().copied())
                    .map(|c| format!("{c}"))
                    .collect();
                s.push_str(&format!("near_zero_coeffs={}\n", list.join(",")));
            }
            NonlinearityKind::Custom { name, .. } => {
                return Err(MtError::Parse(format!("custom nonlinearity '{name}' has no text form")));
            }
            NonlinearityKind::PhiCritical => {}
        }
        s.push_str(&format!("criticality={}\n", self.criticality.as_str()));
        s.push_str(&format!("C_of_F={}\n", self.c_of_f));
        Ok(s)
    }

    /// Parse the key-value form written by [`NonlinearitySpec::to_kv`].
    ///
    /// Recognized keys: `kind`, `N`, `beta`, `lambda`, `near_zero_coeffs`,
    /// `criticality`, `C_of_F`. Blank lines and `#` comments are skipped.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut n = None;
        let mut beta = 0.0;
        let mut lambda = None;
        let mut coeffs: Option<Vec<f64>> = None;
        let mut criticality: Option<Criticality> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| MtError::Parse(format!("expected key=value, got '{line}'")))?;
            let v = v.trim();
            let num = |v: &str| {
                v.parse::<f64>().map_err(|e| MtError::Parse(format!("bad number '{v}': {e}")))
            };
            match k.trim() {
                "kind" => kind = Some(v.to_string()),
                "N" => n = Some(v.parse::<u32>().map_err(|e| MtError::Parse(format!("bad N: {e}")))?),
                "beta" => beta = num(v)?,
                "lambda" => lambda = Some(num(v)?),
                "near_zero_coeffs" => {
                    coeffs = Some(v.split(',').map(|c| num(c.trim())).collect::<Result<Vec<_>>>()?)
                }
                "criticality" => criticality = Some(v.parse()?),
                "C_of_F" => {
                    num(v)?;
                }
                other => return Err(MtError::Parse(format!("unknown key '{other}'"))),
            }
        }
        let n = n.ok_or_else(|| MtError::Parse("missing key N".into()))?;
        let params = MtParams::new(n, beta)?;
        let spec = match kind.as_deref() {
            Some("phi-critical") => Self::phi_critical(params),
            Some("phi-minus-power") => Self::phi_minus_power(
                params,
                lambda.ok_or_else(|| MtError::Parse("missing key lambda".into()))?,
            )?,
            Some("polynomial-perturbed") => {
                let c = coeffs.ok_or_else(|| MtError::Parse("missing key near_zero_coeffs".into()))?;
                if c.is_empty() {
                    return Err(MtError::Parse("near_zero_coeffs is empty".into()));
                }
                Self::polynomial(params, c[0], c[1..].to_vec())?
            }
            Some(other) => return Err(MtError::Parse(format!("unsupported kind '{other}'"))),
            None => return Err(MtError::Parse("missing key kind".into())),
        };
        if let Some(c) = criticality {
            if c != spec.criticality {
                return Err(MtError::Parse(format!(
                    "criticality {} inconsistent with kind {}",
                    c.as_str(),
                    spec.kind_name()
                )));
            }
        }
        Ok(spec)
    }
}

/// Outcome of the sampled checks of the structural conditions on `F`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub continuous: bool,
    pub increasing: bool,
    pub below_phi: bool,
    pub limits_exist: bool,
    pub even: bool,
    pub sampled_c_of_f: Option<f64>,
    pub infinity_limit: Option<f64>,
    pub sampled_criticality: Option<Criticality>,
    /// Limit at infinity is neither 0 nor 1; the normalization of `F` is unusual.
    pub nonstandard_normalization: bool,
    pub max_sampled_t: f64,
    pub failures: Vec<String>,
}

impl GrowthReport {
    pub fn all_pass(&self) -> bool {
        self.continuous && self.increasing && self.below_phi && self.limits_exist && self.even
    }
}

/// Sampled limit `lim_{t→0} F(t)/|t|^N`.
///
/// Ratios are taken at `t = 10^{-k}`; the limit is accepted once three
/// successive decades agree to relative `1e-4`.
pub fn c_of_f(spec: &NonlinearitySpec) -> Result<f64> {
    let nf = spec.params.nf();
    let mut ratios = Vec::new();
    for k in 1..=14 {
        let t = 10f64.powi(-k);
        let r = spec.eval(t)? / t.powf(nf);
        if !r.is_finite() {
            return Err(MtError::NoLimit(format!("ratio at t={t} is {r}")));
        }
        ratios.push(r);
    }
    let scale = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    for w in ratios.windows(3) {
        let agree = |a: f64, b: f64| {
            (a - b).abs() <= 1e-4 * a.abs().max(b.abs()) || (a - b).abs() <= 1e-8 * scale
        };
        if agree(w[0], w[1]) && agree(w[1], w[2]) {
            let l = w[2];
            return Ok(if l.abs() <= 1e-7 * scale { 0.0 } else { l });
        }
    }
    Err(MtError::NoLimit(format!("F(t)/|t|^N ratios did not settle: {ratios:?}")))
}

fn infinity_limit(spec: &NonlinearitySpec, t_top: f64) -> Option<f64> {
    let a = spec.params.alpha_beta();
    let p = spec.params.conj();
    let ratio = |t: f64| -> Option<f64> {
        let bound = exp_tail(spec.params.n() - 1, a * t.powf(p));
        let f = spec.eval(t).ok()?;
        (bound.is_finite() && bound > 0.0).then_some(f / bound)
    };
    let r1 = ratio(t_top * 0.8)?;
    let r2 = ratio(t_top * 0.9)?;
    let r3 = ratio(t_top)?;
    if (r2 - r3).abs() <= 1e-3 * r3.abs().max(1e-3) && (r1 - r2).abs() <= 2e-3 * r3.abs().max(1e-3) {
        Some(r3)
    } else if r3.abs() < 1e-3 && r3 <= r2 && r2 <= r1 {
        Some(0.0)
    } else {
        None
    }
}

/// Sampled checks of regularity, monotonicity, the upper bound by the
/// critical exponential, evenness and the existence of the limits at 0 and
/// at infinity. Samples are taken on a log grid of 200 points in
/// `[1e-8, 1e2]`, truncated where the critical exponential overflows.
pub fn check_growth_conditions(spec: &NonlinearitySpec) -> GrowthReport {
    let params = spec.params;
    let a = params.alpha_beta();
    let p = params.conj();
    let t_overflow = (700.0 / a).powf(1.0 / p);
    let t_hi = 1e2f64.min(t_overflow);
    let t_lo = 1e-8f64;
    let m = 200;
    let ts: Vec<f64> = (0..m)
        .map(|i| (t_lo.ln() + (t_hi.ln() - t_lo.ln()) * i as f64 / (m - 1) as f64).exp())
        .collect();
    let mut failures = Vec::new();
    let mut continuous = true;
    let mut increasing = true;
    let mut below_phi = true;
    let mut even = true;
    let mut prev = spec.eval(0.0).unwrap_or(f64::NAN);
    if prev != 0.0 {
        continuous = false;
        failures.push(format!("F(0) = {prev}, expected 0"));
    }
    for &t in &ts {
        let f = match spec.eval(t) {
            Ok(v) => v,
            Err(e) => {
                continuous = false;
                failures.push(format!("evaluation failed at t={t}: {e}"));
                continue;
            }
        };
        let d = spec.derivative(t);
        if !d.is_finite() {
            continuous = false;
            failures.push(format!("derivative not finite at t={t}"));
        }
        if f < prev {
            increasing = false;
            failures.push(format!("F decreases near t={t}"));
        }
        prev = f;
        let bound = exp_tail(params.n() - 1, a * t.powf(p));
        if f > bound * (1.0 + 1e-10) + 1e-300 {
            below_phi = false;
            failures.push(format!("F({t}) = {f} exceeds Φ_N bound {bound}"));
        }
        let fm = spec.eval_unchecked(-t);
        if (fm - f).abs() > 1e-12 * f.abs().max(1e-300) {
            even = false;
            failures.push(format!("F(-{t}) != F({t})"));
        }
    }
    let sampled_c = c_of_f(spec);
    let inf_lim = infinity_limit(spec, t_hi);
    let mut limits_exist = true;
    let mut sampled_c_of_f = None;
    match sampled_c {
        Ok(c) => {
            sampled_c_of_f = Some(c);
            if (c - spec.c_of_f).abs() > 1e-4 * spec.c_of_f.abs().max(1e-8) {
                limits_exist = false;
                failures.push(format!("sampled C(F)={c} differs from declared {}", spec.c_of_f));
            }
        }
        Err(e) => {
            limits_exist = false;
            failures.push(e.to_string());
        }
    }
    let mut sampled_criticality = None;
    let mut nonstandard_normalization = false;
    match inf_lim {
        Some(l) => {
            if l.abs() < 1e-3 {
                sampled_criticality = Some(Criticality::Subcritical);
            } else if (l - 1.0).abs() < 1e-3 {
                sampled_criticality = Some(Criticality::Critical);
            } else {
                nonstandard_normalization = true;
                failures.push(format!("limit at infinity is {l}, neither 0 nor 1"));
            }
            if let Some(c) = sampled_criticality {
                if c != spec.criticality {
                    limits_exist = false;
                    failures.push(format!(
                        "declared {} but samples look {}",
                        spec.criticality.as_str(),
                        c.as_str()
                    ));
                }
            }
        }
        None => {
            limits_exist = false;
            failures.push("F(t)/Φ_N bound does not settle at large t".into());
        }
    }
    GrowthReport {
        continuous,
        increasing,
        below_phi,
        limits_exist,
        even,
        sampled_c_of_f,
        infinity_limit: inf_lim,
        sampled_criticality,
        nonstandard_normalization,
        max_sampled_t: t_hi,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p2() -> MtParams {
        MtParams::new(2, 0.0).unwrap()
    }

    #[test]
    fn phi_critical_c_of_f() {
        let s = NonlinearitySpec::phi_critical(p2());
        let c = c_of_f(&s).unwrap();
        assert!((c - 4.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn phi_minus_power_passes_checks() {
        let s = NonlinearitySpec::phi_minus_power(p2(), 2.0 * PI).unwrap();
        let r = check_growth_conditions(&s);
        assert!(r.all_pass(), "{:?}", r.failures);
        assert_eq!(r.sampled_criticality, Some(Criticality::Critical));
        assert!((r.sampled_c_of_f.unwrap() - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn phi_minus_power_rejects_large_lambda() {
        assert!(NonlinearitySpec::phi_minus_power(p2(), 5.0 * PI).is_err());
    }

    #[test]
    fn quadratic_growth_is_zero_limit_at_infinity() {
        let s = NonlinearitySpec::polynomial(p2(), 1.0, vec![]).unwrap();
        let r = check_growth_conditions(&s);
        assert!(r.all_pass(), "{:?}", r.failures);
        assert_eq!(r.sampled_criticality, Some(Criticality::Subcritical));
    }

    #[test]
    fn zero_limit_near_origin() {
        let s = NonlinearitySpec::custom(
            p2(),
            "cubic",
            Arc::new(|t: f64| t.abs().powi(3)),
            Criticality::Subcritical,
            0.0,
        );
        assert_eq!(c_of_f(&s).unwrap(), 0.0);
    }

    #[test]
    fn oscillating_ratio_has_no_limit() {
        let s = NonlinearitySpec::custom(
            p2(),
            "osc",
            Arc::new(|t: f64| t * t * (2.0 + (1.0 / t).ln().sin())),
            Criticality::Subcritical,
            2.0,
        );
        assert!(matches!(c_of_f(&s), Err(MtError::NoLimit(_))));
    }

    #[test]
    fn negative_custom_value_is_evaluation_error() {
        let s = NonlinearitySpec::custom(p2(), "neg", Arc::new(|_| -1.0), Criticality::Subcritical, 0.0);
        assert!(matches!(s.eval(1.0), Err(MtError::Evaluation(_))));
    }

    #[test]
    fn damped_exponential_is_subcritical() {
        let params = MtParams::new(2, 0.5).unwrap();
        let s = NonlinearitySpec::custom(
            params,
            "damped",
            Arc::new(|t: f64| (2.0 * PI * t * t).exp_m1() * (-t * t).exp()),
            Criticality::Subcritical,
            2.0 * PI,
        );
        let r = check_growth_conditions(&s);
        assert!(r.all_pass(), "{:?}", r.failures);
    }

    #[test]
    fn mislabelled_criticality_fails() {
        let s = NonlinearitySpec::custom(
            p2(),
            "phi",
            Arc::new(|t: f64| (4.0 * PI * t * t).exp_m1()),
            Criticality::Subcritical,
            4.0 * PI,
        );
        let r = check_growth_conditions(&s);
        assert!(!r.limits_exist);
    }

    #[test]
    fn kv_roundtrip() {
        let params = MtParams::new(3, 0.25).unwrap();
        for spec in [
            NonlinearitySpec::phi_critical(params),
            NonlinearitySpec::phi_minus_power(params, 1.5).unwrap(),
            NonlinearitySpec::polynomial(params, 0.7, vec![0.1, 0.2]).unwrap(),
        ] {
            let text = spec.to_kv().unwrap();
            let back = NonlinearitySpec::from_kv(&text).unwrap();
            assert_eq!(back.kind_name(), spec.kind_name());
            assert_eq!(back.c_of_f, spec.c_of_f);
            assert_eq!(back.params, spec.params);
            for t in [0.01, 0.3, 1.1] {
                assert_eq!(back.eval(t).unwrap(), spec.eval(t).unwrap());
            }
        }
    }

    #[test]
    fn kv_errors() {
        assert!(NonlinearitySpec::from_kv("kind=phi-critical\n").is_err());
        assert!(NonlinearitySpec::from_kv("kind=phi-critical\nN=2\nfoo=1\n").is_err());
        assert!(NonlinearitySpec::from_kv("kind=phi-critical\nN=2\ncriticality=subcritical\n").is_err());
    }

    #[test]
    fn derivative_matches_difference() {
        let params = MtParams::new(3, 0.2).unwrap();
        let specs = [
            NonlinearitySpec::phi_critical(params),
            NonlinearitySpec::phi_minus_power(params, 2.0).unwrap(),
            NonlinearitySpec::polynomial(params, 1.0, vec![0.5, 0.25]).unwrap(),
        ];
        for s in &specs {
            for &t in &[0.05, 0.4, 1.3] {
                let h = 1e-6;
                let fd = (s.eval(t + h).unwrap() - s.eval(t - h).unwrap()) / (2.0 * h);
                let d = s.derivative(t);
                assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0), "{} t={t}", s.kind_name());
            }
        }
    }
}
