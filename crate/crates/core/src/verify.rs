//! Invariant battery behind `mtsharp verify`. Each check runs one end-to-end
//! computation and compares it against a closed form or a second route.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bessel::bessel_k0;
use crate::constants::{MtParams, EULER_GAMMA};
use crate::error::Result;
use crate::gns::{compute_b_n, gns_quotient, ground_state_b_n, normalized_gns_bump, perturbation_curve, GnsOptions};
use crate::green::{extract_a0, solve_green, GreenTable};
use crate::halfline::{
    aux_brute, aux_maximizer, carleson_chang_lhs, carleson_chang_rhs, random_admissible_profile, transfer_identities,
};
use crate::limits::{d_ncl, geq3_lower_bound, liruf_construction, normalized_bump, vanishing_profile, LimitValues};
use crate::nonlinearity::NonlinearitySpec;
use crate::optimizer::{existence_certificate, maximize_mt, OptimizerOptions};
use crate::profile::{elementary_inequality_gap, functional_j, log_grid, RadialProfile};
use crate::rearrangement::{
    decreasing_rearrangement, distribution_function, polya_szego_check, Level, SampledFunction,
};

pub const CHECK_NAMES: [&str; 12] = [
    "green-a0",
    "green-pointwise",
    "concentration-limit",
    "aux-problem",
    "liruf-schedule",
    "vanishing",
    "transfer",
    "rearrangement",
    "property-suites",
    "certificate",
    "gns-dual",
    "perturbation",
];

/// Checks whose target the named construction cannot reach at the stated
/// parameters; they run and report normally but do not fail the battery.
pub const KNOWN_UNATTAINABLE: [&str; 1] = ["liruf-schedule"];

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub known_unattainable: bool,
    /// Worst observed value of the checked quantity.
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Grid sizes for the two optimizer runs.
    pub optimizer_nodes: (usize, usize),
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, optimizer_nodes: (300, 600) }
    }
}

struct Tally {
    passed: bool,
    measured: f64,
    threshold: f64,
    detail: String,
}

fn green2() -> Result<GreenTable> {
    solve_green(2, 1e-6, 100.0, 1e-8)
}

fn phi2() -> Result<NonlinearitySpec> {
    Ok(NonlinearitySpec::phi_critical(MtParams::new(2, 0.0)?))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn green_a0() -> Result<Tally> {
    let t0 = Instant::now();
    let table = green2()?;
    let (a0, _) = extract_a0(&table)?;
    let secs = t0.elapsed().as_secs_f64();
    let exact = (2f64.ln() - EULER_GAMMA) / (2.0 * std::f64::consts::PI);
    let err = (a0 - exact).abs();
    Ok(Tally {
        passed: err <= 1e-4 && secs < 1.0,
        measured: err,
        threshold: 1e-4,
        detail: format!("A0={a0:.12} exact={exact:.12} solve={secs:.3}s"),
    })
}

fn green_pointwise() -> Result<Tally> {
    let table = green2()?;
    let mut worst: f64 = 0.0;
    for r in log_grid(1e-3, 10.0, 400)? {
        let exact = bessel_k0(r)? / (2.0 * std::f64::consts::PI);
        worst = worst.max(rel(table.value(r), exact));
    }
    Ok(Tally { passed: worst <= 1e-4, measured: worst, threshold: 1e-4, detail: format!("max rel dev {worst:.3e} on [1e-3, 10]") })
}

fn concentration_limit() -> Result<Tally> {
    let table = green2()?;
    let (a0, _) = extract_a0(&table)?;
    let spec = phi2()?;
    let d = d_ncl(&spec.params, &spec, a0);
    let exact = 4.0 * std::f64::consts::PI * (1.0 - 2.0 * EULER_GAMMA).exp();
    let err = rel(d, exact);
    Ok(Tally { passed: err <= 1e-3, measured: err, threshold: 1e-3, detail: format!("d_ncl={d:.8} closed form={exact:.8}") })
}

fn aux_problem(seed: u64) -> Result<Tally> {
    let table = green2()?;
    let params = MtParams::new(2, 0.0)?;
    let s10 = aux_maximizer(10.0, 1.0, &params, &table)?;
    let s20 = aux_maximizer(20.0, 1.0, &params, &table)?;
    let (brute, _) = aux_brute(10.0, 1.0, &params, 512, seed)?;
    let dev = rel(brute, s10.sup_value);
    let ratio = s10.remainder.abs() / s20.remainder.abs();
    Ok(Tally {
        passed: dev <= 5e-3 && ratio >= 10.0,
        measured: dev,
        threshold: 5e-3,
        detail: format!(
            "sup={:.8} brute={brute:.8} remainder a=10 {:.3e} a=20 {:.3e} (ratio {ratio:.1})",
            s10.sup_value, s10.remainder, s20.remainder
        ),
    })
}

fn liruf_schedule() -> Result<Tally> {
    let table = green2()?;
    let spec = phi2()?;
    let params = spec.params;
    let d = d_ncl(&params, &spec, table.a0);
    let mut js = Vec::new();
    let mut above_bound = true;
    for eps in [1e-2, 1e-3, 1e-4] {
        let j = functional_j(&liruf_construction(&params, eps, &table)?.profile, &spec)?;
        above_bound &= j >= geq3_lower_bound(&params, &spec, eps, &table)?.value;
        js.push(j);
    }
    let monotone = js[0] > js[1] && js[1] > js[2];
    let gap = rel(js[2], d);
    Ok(Tally {
        passed: monotone && above_bound && gap <= 0.05,
        measured: gap,
        threshold: 0.05,
        detail: format!(
            "J={:.5}, {:.5}, {:.5} d_ncl={d:.5} monotone in eps={monotone} above bound={above_bound}",
            js[0], js[1], js[2]
        ),
    })
}

fn vanishing() -> Result<Tally> {
    let mut worst: f64 = 0.0;
    for n in [2u32, 3] {
        let params = MtParams::new(n, 0.0)?;
        let spec = NonlinearitySpec::phi_critical(params);
        let u = vanishing_profile(&params, 1e-3, &normalized_bump(&params)?)?;
        worst = worst.max(rel(functional_j(&u, &spec)?, spec.c_of_f));
    }
    Ok(Tally { passed: worst <= 0.01, measured: worst, threshold: 0.01, detail: format!("N=2,3 at lambda=1e-3: rel dev {worst:.3e}") })
}

/// Non-increasing radial profile: a random sum of stretched Gaussians, zero at the outer node.
pub fn random_profile(rng: &mut impl Rng, radii: &[f64]) -> Result<RadialProfile> {
    let k = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> =
        (0..k).map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0.2..3.0), rng.gen_range(1.0..3.0))).collect();
    let mut v: Vec<f64> =
        radii.iter().map(|&r| bumps.iter().map(|(a, w, p)| a * (-(r / w).powf(*p)).exp()).sum()).collect();
    *v.last_mut().unwrap() = 0.0;
    RadialProfile::new(radii.to_vec(), v)
}

/// Non-monotone nonnegative radial samples: random off-center Gaussians, zero at the outer node.
pub fn random_samples(rng: &mut impl Rng, radii: &[f64]) -> Result<SampledFunction> {
    let k = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> =
        (0..k).map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0.0..3.0), rng.gen_range(0.2..1.5))).collect();
    let mut v: Vec<f64> =
        radii.iter().map(|&r| bumps.iter().map(|(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum()).collect();
    *v.last_mut().unwrap() = 0.0;
    SampledFunction::radial(radii.to_vec(), v)
}

fn transfer(seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii = log_grid(1e-4, 20.0, 600)?;
    let mut worst: f64 = 0.0;
    for n in [2u32, 3] {
        for beta in [0.0, 0.5] {
            let spec = NonlinearitySpec::phi_critical(MtParams::new(n, beta)?);
            for _ in 0..50 {
                let u = random_profile(&mut rng, &radii)?;
                worst = worst.max(transfer_identities(&u, &spec)?.max_relative_error());
            }
        }
    }
    Ok(Tally { passed: worst <= 1e-5, measured: worst, threshold: 1e-5, detail: format!("200 profiles, worst rel error {worst:.3e}") })
}

/// Worst relative mismatch of the distribution function at 50 levels
/// between random level data, its rearrangement and the resampled staircase.
pub fn level_drift(rng: &mut impl Rng, n: u32) -> Result<(f64, f64)> {
    let levels: Vec<Level> =
        (0..rng.gen_range(3..30)).map(|_| Level { value: rng.gen_range(0.0..5.0), measure: rng.gen_range(0.01..3.0) }).collect();
    let f = SampledFunction::levels(levels.clone())?;
    let sorted = decreasing_rearrangement(&levels, n)?;
    let staircase = SampledFunction::from_profile(&sorted.to_radial_profile()?);
    let (mut exact, mut resampled): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let t = rng.gen_range(0.0..5.0);
        let mu = distribution_function(&f, n, t)?;
        if mu == 0.0 {
            continue;
        }
        exact = exact.max((sorted.distribution(t) - mu).abs() / mu);
        resampled = resampled.max((distribution_function(&staircase, n, t)? - mu).abs() / mu);
    }
    Ok((exact, resampled))
}

/// Relative tolerance for Pólya-Szegő on the input grid.
pub const POLYA_SZEGO_TOL: f64 = 1e-6;

fn rearrangement(seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drift: f64 = 0.0;
    let mut violations = 0;
    let mut worst_ps: f64 = f64::NEG_INFINITY;
    let radii = log_grid(1e-3, 8.0, 400)?;
    for n in [2u32, 3, 4] {
        for _ in 0..100 {
            let (e, r) = level_drift(&mut rng, n)?;
            drift = drift.max(e).max(r);
            let f = random_samples(&mut rng, &radii)?;
            let (before, after) = polya_szego_check(&f, n)?;
            let excess = (after - before) / before;
            worst_ps = worst_ps.max(excess);
            if excess > POLYA_SZEGO_TOL {
                violations += 1;
            }
        }
    }
    Ok(Tally {
        passed: drift <= 1e-10 && violations == 0,
        measured: drift,
        threshold: 1e-10,
        detail: format!("level drift {drift:.3e}, Polya-Szego violations {violations}/300 (worst excess {worst_ps:.3e})"),
    })
}

fn property_suites(seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_gap = f64::INFINITY;
    for _ in 0..1000 {
        let g = elementary_inequality_gap(
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(1e-3..5.0),
            rng.gen_range(1.01..4.0),
        )?;
        min_gap = min_gap.min(g);
    }
    let mut cc_violations = 0;
    for k in 0..200 {
        let params = MtParams::new(2 + (k % 3) as u32, 0.0)?;
        let a = rng.gen_range(5.0..30.0);
        let delta = rng.gen_range(0.01..0.5);
        let w = random_admissible_profile(params, a, delta, &mut rng)?;
        if carleson_chang_lhs(&w, a) > carleson_chang_rhs(&w, a, delta)? {
            cc_violations += 1;
        }
    }
    Ok(Tally {
        passed: min_gap >= -1e-12 && cc_violations == 0,
        measured: min_gap,
        threshold: -1e-12,
        detail: format!("min elementary gap {min_gap:.3e} over 1000, Carleson-Chang violations {cc_violations}/200"),
    })
}

fn certificate(opts: &VerifyOptions) -> Result<Tally> {
    let table = green2()?;
    let spec = phi2()?;
    let limits = LimitValues::new(&spec, table.a0);
    let mut best = Vec::new();
    let mut both = true;
    for nodes in [opts.optimizer_nodes.0, opts.optimizer_nodes.1] {
        let o = OptimizerOptions { nodes, seed: opts.seed, ..OptimizerOptions::default() };
        let report = maximize_mt(&spec, &o, Some(&table))?;
        let c = existence_certificate(&report, &limits)?;
        both &= c.exceeds_d_nvl && c.exceeds_d_ncl;
        best.push(report.best_value);
    }
    let spread = rel(best[0], best[1]);
    Ok(Tally {
        passed: both && spread <= 0.01,
        measured: spread,
        threshold: 0.01,
        detail: format!(
            "best {:.6} / {:.6} vs d_nvl={:.6} d_ncl={:.6}",
            best[0], best[1], limits.d_nvl, limits.d_ncl
        ),
    })
}

fn gns_dual() -> Result<Tally> {
    let opts = GnsOptions::new(2);
    let direct = compute_b_n(2, &opts)?;
    let shot = ground_state_b_n(2, &opts)?;
    let agree = rel(direct.b_n, shot.b_n);
    let params = MtParams::new(2, 0.0)?;
    let q = gns_quotient(&direct.maximizer, &params)?;
    let mut inv: f64 = 0.0;
    for (c, l) in [(0.3, 2.0), (4.0, 0.25), (1.7, 7.0)] {
        inv = inv.max(rel(gns_quotient(&direct.maximizer.scaled(c)?.dilated(l)?, &params)?, q));
    }
    Ok(Tally {
        passed: agree <= 0.02 && inv <= 1e-6,
        measured: agree,
        threshold: 0.02,
        detail: format!("ascent {:.8} shooting {:.8}, invariance {inv:.2e}", direct.b_n, shot.b_n),
    })
}

fn perturbation() -> Result<Tally> {
    let params = MtParams::new(2, 0.0)?;
    let (b, v) = normalized_gns_bump(2, &GnsOptions::new(2))?;
    let mut slopes = Vec::new();
    for factor in [1.5, 0.5] {
        let spec = NonlinearitySpec::polynomial(params, 1.0, vec![factor / b])?;
        let curve = perturbation_curve(&spec, &params, &v, &[1e-3, 3e-3, 1e-2])?;
        slopes.push(curve.fitted_slope);
    }
    Ok(Tally {
        passed: slopes[0] > 0.0 && slopes[1] < 0.0,
        measured: slopes[0],
        threshold: 0.0,
        detail: format!("slope above threshold {:.5}, below {:.5}", slopes[0], slopes[1]),
    })
}

/// Run one named check. Errors count as failures.
pub fn run_check(name: &str, opts: &VerifyOptions) -> Option<CheckOutcome> {
    let t0 = Instant::now();
    let res = match name {
        "green-a0" => green_a0(),
        "green-pointwise" => green_pointwise(),
        "concentration-limit" => concentration_limit(),
        "aux-problem" => aux_problem(opts.seed),
        "liruf-schedule" => liruf_schedule(),
        "vanishing" => vanishing(),
        "transfer" => transfer(opts.seed),
        "rearrangement" => rearrangement(opts.seed),
        "property-suites" => property_suites(opts.seed),
        "certificate" => certificate(opts),
        "gns-dual" => gns_dual(),
        "perturbation" => perturbation(),
        _ => return None,
    };
    let seconds = t0.elapsed().as_secs_f64();
    let known_unattainable = KNOWN_UNATTAINABLE.contains(&name);
    Some(match res {
        Ok(t) => CheckOutcome {
            name: name.into(),
            passed: t.passed,
            known_unattainable, measured: t.measured, threshold: t.threshold, detail: t.detail, seconds },
        Err(e) => CheckOutcome {
            name: name.into(),
            passed: false,
            known_unattainable,
            measured: f64::NAN,
            threshold: f64::NAN,
            detail: e.to_string(),
            seconds,
        },
    })
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    CHECK_NAMES.iter().filter_map(|n| run_check(n, opts)).collect()
}

/// True when every failure is a known-unattainable check.
pub fn battery_ok(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|c| c.passed || c.known_unattainable)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check_is_none() {
        assert!(run_check("nope", &VerifyOptions::default()).is_none());
    }

    #[test]
    fn level_drift_is_tiny() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 4] {
            let (e, r) = level_drift(&mut rng, n).unwrap();
            assert!(e <= 1e-14, "n={n} exact drift {e}");
            assert!(r <= 1e-10, "n={n} drift {r}");
        }
    }
}
