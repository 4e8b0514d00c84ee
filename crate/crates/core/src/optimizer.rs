//! Multi-start maximization of `J(u) = ∫|x|^{-Nβ}F(u)` over radial profiles
//! with unit Sobolev energy, and the comparison against the two degenerate limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ascent::{ascend, AscentOptions, Grid};
use crate::constants::MtParams;
use crate::error::{MtError, Result};
use crate::green::GreenTable;
use crate::limits::{liruf_profile, normalized_bump, vanishing_profile, LimitValues};
use crate::nonlinearity::{Criticality, NonlinearitySpec};
use crate::par;
use crate::profile::{functional_j, log_grid, RadialProfile};
use crate::rearrangement::{symmetric_rearrangement, SampledFunction};

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub max_iter: usize,
    /// Relative gain over `window` iterations below which a start stops.
    pub rel_tol: f64,
    pub window: usize,
    pub armijo: f64,
    pub seed: u64,
    /// Dilations `λ` of the vanishing seeds.
    pub vanishing_seeds: Vec<f64>,
    /// Scales `ε` of the Li-Ruf seeds (critical specs only).
    pub liruf_seeds: Vec<f64>,
    /// Widths of the Gaussian mid-scale seeds.
    pub bump_widths: Vec<f64>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            r_min: 1e-5,
            r_max: 200.0,
            nodes: 600,
            max_iter: 10_000,
            rel_tol: 1e-8,
            window: 50,
            armijo: 1e-4,
            seed: 0,
            vanishing_seeds: vec![0.5, 0.2],
            liruf_seeds: vec![1e-1, 1e-2],
            bump_widths: vec![0.3, 1.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StartReport {
    pub label: String,
    /// `J` of the seed after it is placed on the grid.
    pub seed_value: f64,
    pub final_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Certificate {
    pub exceeds_d_nvl: bool,
    pub exceeds_d_ncl: bool,
    /// `best - max(d_nvl, d_ncl)`.
    pub margin: f64,
    pub margin_nvl: f64,
    pub margin_ncl: f64,
    /// The best value does not beat the vanishing limit.
    pub vanishing_dominated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationReport {
    pub n: u32,
    pub beta: f64,
    pub kind: String,
    pub criticality: Criticality,
    pub c_of_f: f64,
    pub best_value: f64,
    pub best_profile: RadialProfile,
    pub best_start: usize,
    pub starts: Vec<StartReport>,
    pub limits: Option<LimitValues>,
    pub certificate: Option<Certificate>,
}

/// Compare the best value against both limits.
pub fn existence_certificate(report: &OptimizationReport, limits: &LimitValues) -> Result<Certificate> {
    if report.n != limits.n
        || report.beta != limits.beta
        || report.criticality != limits.criticality
        || report.c_of_f != limits.c_of_f
    {
        return Err(MtError::Contract("report and limits were computed for different problems".into()));
    }
    let best = report.best_value;
    Ok(Certificate {
        exceeds_d_nvl: best > limits.d_nvl,
        exceeds_d_ncl: best > limits.d_ncl,
        margin: best - limits.d_nvl.max(limits.d_ncl),
        margin_nvl: best - limits.d_nvl,
        margin_ncl: best - limits.d_ncl,
        vanishing_dominated: best <= limits.d_nvl,
    })
}

struct Problem<'a> {
    grid: Grid,
    spec: &'a NonlinearitySpec,
    n: u32,
}

impl Problem<'_> {
    fn j(&self, x: &[f64]) -> f64 {
        let p = self.grid.nf * (1.0 - self.spec.params.beta());
        self.grid.weighted_value(x, p, |t| self.spec.eval_unchecked(t))
    }

    /// Gradient of `u ↦ J(u / E(u)^{1/N})` at a point with `E(u) = 1`.
    fn tangent_gradient(&self, x: &[f64]) -> Vec<f64> {
        let p = self.grid.nf * (1.0 - self.spec.params.beta());
        let (_, gj) = self.grid.weighted(x, p, |t| self.spec.eval_unchecked(t), |t| self.spec.derivative(t));
        let (_, ge) = self.grid.sobolev(x);
        let radial: f64 = gj.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / self.grid.nf;
        gj.iter().zip(&ge).map(|(a, b)| a - radial * b).collect()
    }

    /// Rearrange, pin the outer node and renormalize to unit energy.
    fn project(&self, mut x: Vec<f64>) -> Option<Vec<f64>> {
        let m = x.len();
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        x[m - 1] = 0.0;
        if x.windows(2).any(|w| w[1] > w[0]) {
            let f = SampledFunction::radial(self.grid.radii.clone(), x).ok()?;
            x = symmetric_rearrangement(&f, self.n).ok()?.into_parts().1;
            x[m - 1] = 0.0;
        }
        let e = self.grid.sobolev_value(&x);
        if !(e > 0.0) || !e.is_finite() {
            return None;
        }
        let s = e.powf(-1.0 / self.grid.nf);
        Some(x.iter().map(|v| v * s).collect())
    }
}

fn seeds(spec: &NonlinearitySpec, opts: &OptimizerOptions, green: Option<&GreenTable>) -> Result<Vec<(String, RadialProfile)>> {
    let params = spec.params;
    let mut out = Vec::new();
    let bump = normalized_bump(&params)?;
    for &l in &opts.vanishing_seeds {
        out.push((format!("vanishing lambda={l}"), vanishing_profile(&params, l, &bump)?));
    }
    if spec.criticality == Criticality::Critical {
        if let Some(g) = green {
            for &e in &opts.liruf_seeds {
                out.push((format!("li-ruf epsilon={e}"), liruf_profile(&params, e, g)?));
            }
        }
    }
    let radii = log_grid(opts.r_min, opts.r_max, opts.nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for &w in &opts.bump_widths {
        let noise: Vec<f64> = (0..radii.len()).map(|_| 1.0 + 0.1 * (rng.gen::<f64>() - 0.5)).collect();
        let vals: Vec<f64> = radii.iter().zip(&noise).map(|(r, z)| (-(r / w).powi(2)).exp() * z).collect();
        let f = SampledFunction::radial(radii.clone(), vals)?;
        out.push((format!("bump width={w}"), symmetric_rearrangement(&f, params.n())?));
    }
    Ok(out)
}

/// Multi-start projected ascent. Critical specs need the Green table for the
/// Li-Ruf seeds and the concentration limit.
pub fn maximize_mt(spec: &NonlinearitySpec, opts: &OptimizerOptions, green: Option<&GreenTable>) -> Result<OptimizationReport> {
    let params: MtParams = spec.params;
    if spec.criticality == Criticality::Critical && green.is_none() {
        return Err(MtError::Contract("critical nonlinearities need a Green table".into()));
    }
    if let Some(g) = green {
        if g.n != params.n() {
            return Err(MtError::Contract(format!("Green table is for N={}, problem has N={}", g.n, params.n())));
        }
    }
    if opts.nodes < 16 || !(opts.r_min > 0.0 && opts.r_max > opts.r_min) {
        return Err(MtError::Domain("optimizer grid needs nodes >= 16 and 0 < r_min < r_max".into()));
    }
    let radii = log_grid(opts.r_min, opts.r_max, opts.nodes)?;
    let problem = Problem { grid: Grid::new(radii.clone(), params.n())?, spec, n: params.n() };
    let seed_profiles = seeds(spec, opts, green)?;
    let ao = AscentOptions { max_iter: opts.max_iter, rel_tol: opts.rel_tol, window: opts.window, armijo: opts.armijo };

    let runs: Vec<Option<(StartReport, Vec<f64>)>> = par::map_indexed(seed_profiles.len(), |k| {
        let (label, u) = &seed_profiles[k];
        let placed: Vec<f64> = radii.iter().map(|&r| u.value_at(r)).collect();
        let x0 = problem.project(placed)?;
        let seed_value = problem.j(&x0);
        let out = ascend(
            x0,
            &ao,
            |x| problem.j(x),
            |x| problem.tangent_gradient(x),
            |x| problem.grid.metric(x),
            |x| problem.project(x),
        );
        let report = StartReport {
            label: label.clone(),
            seed_value,
            final_value: out.value,
            iterations: out.iterations,
            converged: out.converged,
            history: out.history,
        };
        Some((report, out.x))
    });

    let mut best: Option<(usize, f64)> = None;
    for (k, r) in runs.iter().enumerate() {
        if let Some((rep, _)) = r {
            if rep.final_value.is_finite() && best.is_none_or(|(_, v)| rep.final_value > v) {
                best = Some((k, rep.final_value));
            }
        }
    }
    let (best_start, _) = best.ok_or_else(|| MtError::Optimizer("every start failed to produce a finite value".into()))?;
    let mut starts = Vec::with_capacity(runs.len());
    let mut best_x = Vec::new();
    for (k, r) in runs.into_iter().enumerate() {
        match r {
            Some((rep, x)) => {
                if k == best_start {
                    best_x = x;
                }
                starts.push(rep);
            }
            None => starts.push(StartReport {
                label: seed_profiles[k].0.clone(),
                seed_value: f64::NAN,
                final_value: f64::NAN,
                iterations: 0,
                converged: false,
                history: Vec::new(),
            }),
        }
    }
    let best_profile = RadialProfile::new(radii, best_x)?;
    let best_value = functional_j(&best_profile, spec)?;
    let top_seed = starts.iter().map(|s| s.seed_value).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if best_value < top_seed {
        return Err(MtError::Optimizer(format!("best value {best_value} stalls below seed value {top_seed}")));
    }
    let mut report = OptimizationReport {
        n: params.n(),
        beta: params.beta(),
        kind: spec.kind_name().to_string(),
        criticality: spec.criticality,
        c_of_f: spec.c_of_f,
        best_value,
        best_profile,
        best_start,
        starts,
        limits: None,
        certificate: None,
    };
    let a0 = green.map_or(f64::NAN, |g| g.a0);
    let limits = LimitValues::new(spec, a0);
    report.certificate = Some(existence_certificate(&report, &limits)?);
    report.limits = Some(limits);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::sobolev_energy;

    #[test]
    fn critical_needs_green() {
        let p = MtParams::new(2, 0.0).unwrap();
        let r = maximize_mt(&NonlinearitySpec::phi_critical(p), &OptimizerOptions::default(), None);
        assert!(matches!(r, Err(MtError::Contract(_))));
    }

    #[test]
    fn pure_power_tends_to_one() {
        let p = MtParams::new(2, 0.0).unwrap();
        let spec = NonlinearitySpec::polynomial(p, 1.0, vec![]).unwrap();
        let opts = OptimizerOptions { nodes: 200, max_iter: 400, ..OptimizerOptions::default() };
        let r = maximize_mt(&spec, &opts, None).unwrap();
        assert!(r.best_value < 1.0 && r.best_value > 0.95, "{}", r.best_value);
        let e = sobolev_energy(&r.best_profile, &p).unwrap().total();
        assert!((e - 1.0).abs() < 1e-8);
        let c = r.certificate.unwrap();
        assert!(c.vanishing_dominated && !c.exceeds_d_nvl);
    }

    #[test]
    fn mismatched_certificate_inputs() {
        let p = MtParams::new(2, 0.0).unwrap();
        let spec = NonlinearitySpec::polynomial(p, 1.0, vec![]).unwrap();
        let opts = OptimizerOptions { nodes: 100, max_iter: 50, ..OptimizerOptions::default() };
        let r = maximize_mt(&spec, &opts, None).unwrap();
        let other = NonlinearitySpec::phi_critical(MtParams::new(3, 0.0).unwrap());
        assert!(existence_certificate(&r, &LimitValues::new(&other, 0.1)).is_err());
    }
}
