//! Radial Green profile of `-Δ_N G + G^{N-1} = δ_0` and its constant `A_0`
//! in `G(r) = -(N/α_N) ln r + A_0 + o(1)`.
//!
//! In `s = ln r` with flux `φ = r^{N-1}|G'|^{N-2}G'` the equation reads
//! `dG/ds = sign(φ)|φ|^{1/(N-1)}`, `dφ/ds = e^{Ns}|G|^{N-2}G`, with
//! `φ → -1/ω_{N-1}` at the origin. The free constant is found by shooting.

use serde::Serialize;

use crate::constants::{alpha_n, binomial, factorial, omega_sphere, MAX_DIM};
use crate::error::{domain, MtError, Result};
use crate::ode::{Dopri5, Integration, State};
use crate::quad::gl8;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GreenOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    /// Target for the per-cell flux-balance residual.
    pub tol: f64,
    /// Values below this are treated as the end of the resolved solution.
    pub tail_tol: f64,
    /// Initial search interval for `A_0`.
    pub a0_bracket: (f64, f64),
    /// Allow the search interval to grow when it does not bracket.
    pub expand_bracket: bool,
}

impl GreenOptions {
    pub fn new(n: u32) -> Self {
        Self {
            r_min: 1e-6,
            r_max: 50.0 * n as f64,
            nodes: 4096,
            tol: 1e-8,
            tail_tol: 1e-16,
            a0_bracket: (-10.0, 10.0),
            expand_bracket: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// Largest `|Δφ - ∫ r^{N-1}G^{N-1}|` over cells of the integrated region.
    pub max_cell_residual: f64,
    /// Same quantity over the exponential tail cells.
    pub tail_cell_residual: f64,
    /// `ω r^{N-1}|G'|^{N-1}` at `r = 10 r_min`.
    pub flux_at_10_rmin: f64,
    /// Radius where the integrated solution hands over to the exponential tail.
    pub tail_start: f64,
    pub tail_rate: f64,
    pub bisection_iterations: usize,
    pub a0_bracket: (f64, f64),
    pub terminal_condition: String,
}

/// Tabulated Green profile on a log grid.
#[derive(Debug, Clone, Serialize)]
pub struct GreenTable {
    pub n: u32,
    pub radii: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    pub a0: f64,
    pub fit_error: f64,
    pub tol: f64,
    pub report: ResidualReport,
}

fn check_n(n: u32) -> Result<()> {
    if !(2..=MAX_DIM).contains(&n) {
        return domain(format!("dimension N={n} outside 2..={MAX_DIM}"));
    }
    Ok(())
}

/// `∫_0^r ρ^{p-1} (g_r + k ln(r/ρ))^m dρ`.
pub fn log_moment(r: f64, g_r: f64, k: f64, p: f64, m: u32) -> f64 {
    let mut s = 0.0;
    for i in 0..=m {
        s += binomial(m, i) * g_r.powi((m - i) as i32) * k.powi(i as i32) * factorial(i)
            / p.powi(i as i32 + 1);
    }
    r.powf(p) * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Verdict {
    /// `G` reached zero: `A_0` too small.
    Low,
    /// `G'` turned nonnegative or vanished: `A_0` too large.
    High,
    Undecided,
}

struct Shooter {
    n: u32,
    nf: f64,
    omega: f64,
    k: f64,
    s0: f64,
    stepper: Dopri5,
}

impl Shooter {
    fn rhs(&self) -> impl Fn(f64, &State) -> State + '_ {
        let inv = 1.0 / (self.nf - 1.0);
        move |s: f64, y: &State| {
            let (g, phi) = (y[0], y[1]);
            let dg = if self.n == 2 { phi } else { phi.signum() * phi.abs().powf(inv) };
            let gp = if self.n == 2 { g } else { g.signum() * g.abs().powf(self.nf - 1.0) };
            [dg, (self.nf * s).exp() * gp]
        }
    }

    fn initial(&self, a0: f64) -> State {
        let r0 = self.s0.exp();
        let g_as = a0 - self.k * self.s0;
        let m = self.n - 1;
        // flux picks up ∫_0^{r0} ρ^{N-1} G^{N-1}; G the matching integral of that correction
        let i_r = log_moment(r0, g_as, self.k, self.nf, m);
        let mut di = 0.0;
        for j in 0..=m {
            let c = binomial(m, j) * self.k.powi(j as i32) * factorial(j) / self.nf.powi(j as i32 + 1);
            di += c * log_moment(r0, g_as, self.k, self.nf, m - j);
        }
        let dg = self.k * self.omega / (self.nf - 1.0) * di;
        [g_as + dg, -1.0 / self.omega + i_r]
    }

    fn event(&self) -> impl Fn(f64, &State) -> bool + '_ {
        move |s: f64, y: &State| {
            y[0] <= 0.0 || y[1] >= 0.0 || y[1].abs().powf(1.0 / (self.nf - 1.0)) / s.exp() < 1e-14
        }
    }

    fn classify(y: &State, s: f64, nf: f64) -> Verdict {
        if y[0] <= 0.0 {
            Verdict::Low
        } else if y[1] >= 0.0 || y[1].abs().powf(1.0 / (nf - 1.0)) / s.exp() < 1e-14 {
            Verdict::High
        } else {
            Verdict::Undecided
        }
    }

    /// Classify a trajectory. Steps stop at the same nodes as [`Shooter::record`]
    /// so that the bisected trajectory is the one that gets tabulated.
    fn shoot(&self, a0: f64, s_nodes: &[f64]) -> Result<Verdict> {
        let f = self.rhs();
        let ev = self.event();
        let mut y = self.initial(a0);
        if y[0] <= 0.0 {
            return Ok(Verdict::Low);
        }
        let mut h = 1e-3;
        for w in s_nodes.windows(2) {
            match self.stepper.integrate(&f, w[0], y, w[1], &mut h, &ev)? {
                Integration::Reached(yn) => y = yn,
                Integration::Stopped { t, y } => return Ok(Self::classify(&y, t, self.nf)),
            }
        }
        Ok(Verdict::Undecided)
    }

    /// Node values until the first event (exclusive).
    fn record(&self, a0: f64, s_nodes: &[f64]) -> Result<Vec<State>> {
        let f = self.rhs();
        let ev = self.event();
        let mut y = self.initial(a0);
        let mut out = vec![y];
        let mut h = 1e-3;
        for w in s_nodes.windows(2) {
            match self.stepper.integrate(&f, w[0], y, w[1], &mut h, &ev)? {
                Integration::Reached(yn) => {
                    y = yn;
                    out.push(y);
                }
                Integration::Stopped { t, y: yn } => {
                    if t >= w[1] && Self::classify(&yn, t, self.nf) == Verdict::Undecided {
                        out.push(yn);
                    }
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// Solve with default options except for the grid bounds and tolerance.
pub fn solve_green(n: u32, r_min: f64, r_max: f64, tol: f64) -> Result<GreenTable> {
    check_n(n)?;
    let opts = GreenOptions { r_min, r_max, tol, ..GreenOptions::new(n) };
    solve_green_with(n, &opts)
}

pub fn solve_green_with(n: u32, opts: &GreenOptions) -> Result<GreenTable> {
    check_n(n)?;
    if !(opts.r_min > 0.0 && opts.r_min < 1.0 && opts.r_max > 1.0 && opts.r_max.is_finite()) {
        return domain(format!("need 0 < r_min < 1 < r_max, got ({}, {})", opts.r_min, opts.r_max));
    }
    if opts.nodes < 16 || !(opts.tol > 0.0) {
        return domain("need at least 16 nodes and a positive tolerance");
    }
    let nf = n as f64;
    let omega = omega_sphere(n)?;
    let k = nf / alpha_n(n)?;
    let s0 = opts.r_min.ln();
    let s_end = opts.r_max.ln();
    let m = opts.nodes;
    let s_nodes: Vec<f64> = (0..m).map(|i| s0 + (s_end - s0) * i as f64 / (m - 1) as f64).collect();
    let shooter = Shooter {
        n,
        nf,
        omega,
        k,
        s0,
        stepper: Dopri5::with_tol((opts.tol * 1e-3).clamp(1e-13, 1e-9)),
    };

    let (mut lo, mut hi) = opts.a0_bracket;
    let mut tries = 0;
    loop {
        let vl = shooter.shoot(lo, &s_nodes)?;
        let vh = shooter.shoot(hi, &s_nodes)?;
        if vl == Verdict::Low && vh == Verdict::High {
            break;
        }
        tries += 1;
        if !opts.expand_bracket || tries > 6 {
            return Err(MtError::Solver(format!(
                "no sign change of the terminal functional on [{lo}, {hi}] ({vl:?}, {vh:?})"
            )));
        }
        let w = hi - lo;
        if vl != Verdict::Low {
            lo -= w;
        }
        if vh != Verdict::High {
            hi += w;
        }
    }
    let mut iters = 0;
    while iters < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iters += 1;
        match shooter.shoot(mid, &s_nodes)? {
            Verdict::Low => lo = mid,
            Verdict::High => hi = mid,
            Verdict::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }

    let tr_lo = shooter.record(lo, &s_nodes)?;
    let tr_hi = shooter.record(hi, &s_nodes)?;
    let avail = tr_lo.len().min(tr_hi.len());
    let mut cut = 0;
    for i in 0..avail {
        let (a, b) = (tr_lo[i], tr_hi[i]);
        let g = 0.5 * (a[0] + b[0]);
        if (a[0] - b[0]).abs() > 1e-5 * g || g < opts.tail_tol || a[1] >= 0.0 || b[1] >= 0.0 {
            break;
        }
        cut = i;
    }
    if s_nodes[cut] < 0.0 {
        return Err(MtError::Solver(format!(
            "trajectory resolved only up to r={}",
            s_nodes[cut].exp()
        )));
    }
    // back off a few nodes so the hand-over is away from the separation point
    let cut = cut.saturating_sub(4).max(1);

    let mut radii = Vec::with_capacity(m);
    let mut g = Vec::with_capacity(m);
    let mut gp = Vec::with_capacity(m);
    let inv = 1.0 / (nf - 1.0);
    for i in 0..=cut {
        let r = s_nodes[i].exp();
        let gi = 0.5 * (tr_lo[i][0] + tr_hi[i][0]);
        let phi = 0.5 * (tr_lo[i][1] + tr_hi[i][1]);
        radii.push(r);
        g.push(gi);
        gp.push(-phi.abs().powf(inv) / r);
    }
    let (rc, gc) = (radii[cut], g[cut]);
    let kappa = -gp[cut] / gc;
    for &s in &s_nodes[cut + 1..] {
        let r = s.exp();
        let v = gc * (-kappa * (r - rc)).exp();
        radii.push(r);
        g.push(v.max(f64::MIN_POSITIVE));
        gp.push(-kappa * v.max(f64::MIN_POSITIVE));
    }
    radii[0] = opts.r_min;
    radii[m - 1] = opts.r_max;

    let mut table = GreenTable {
        n,
        radii,
        g,
        g_prime: gp,
        a0: f64::NAN,
        fit_error: f64::INFINITY,
        tol: opts.tol,
        report: ResidualReport {
            max_cell_residual: 0.0,
            tail_cell_residual: 0.0,
            flux_at_10_rmin: 0.0,
            tail_start: rc,
            tail_rate: kappa,
            bisection_iterations: iters,
            a0_bracket: (lo, hi),
            terminal_condition: format!(
                "integration handed to exponential tail where bracketing trajectories separate \
                 by more than 1e-5 relative or G < {}",
                opts.tail_tol
            ),
        },
    };
    let (res_ode, res_tail) = table.cell_residuals(cut);
    table.report.max_cell_residual = res_ode;
    table.report.tail_cell_residual = res_tail;
    table.report.flux_at_10_rmin = table.flux(10.0 * opts.r_min);
    let (a0, fit) = extract_a0(&table)?;
    table.a0 = a0;
    table.fit_error = fit;
    Ok(table)
}

impl GreenTable {
    /// Build a table from tabulated values; `A_0` is extracted when possible.
    pub fn from_samples(n: u32, radii: Vec<f64>, g: Vec<f64>, g_prime: Vec<f64>, tol: f64) -> Result<Self> {
        check_n(n)?;
        let m = radii.len();
        if m < 4 || g.len() != m || g_prime.len() != m {
            return domain("need at least 4 nodes with matching G and G'");
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
            return domain("radii must be positive and strictly increasing");
        }
        if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) || g.windows(2).any(|w| !(w[1] < w[0])) {
            return domain("G must be positive and strictly decreasing");
        }
        if g_prime.iter().any(|v| !(v.is_finite() && *v < 0.0)) {
            return domain("G' must be negative");
        }
        let mut t = Self {
            n,
            radii,
            g,
            g_prime,
            a0: f64::NAN,
            fit_error: f64::INFINITY,
            tol,
            report: ResidualReport {
                max_cell_residual: f64::NAN,
                tail_cell_residual: f64::NAN,
                flux_at_10_rmin: f64::NAN,
                tail_start: f64::INFINITY,
                tail_rate: f64::NAN,
                bisection_iterations: 0,
                a0_bracket: (f64::NAN, f64::NAN),
                terminal_condition: "tabulated input".into(),
            },
        };
        t.report.tail_start = *t.radii.last().unwrap();
        t.report.flux_at_10_rmin = t.flux(10.0 * t.radii[0]);
        if let Ok((a0, fit)) = extract_a0(&t) {
            t.a0 = a0;
            t.fit_error = fit;
        }
        Ok(t)
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    fn slope_k(&self) -> f64 {
        self.n as f64 / alpha_n(self.n).expect("validated dimension")
    }

    /// `(G(r), G'(r))`: cubic Hermite in `ln r` inside the table, the
    /// logarithmic asymptote below it and an exponential continuation above.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let m = self.radii.len();
        if r <= self.radii[0] {
            let k = self.slope_k();
            let r0 = self.radii[0];
            return (self.g[0] + k * (r0 / r).ln(), -k / r);
        }
        if r >= self.radii[m - 1] {
            let kappa = -self.g_prime[m - 1] / self.g[m - 1];
            let v = self.g[m - 1] * (-kappa * (r - self.radii[m - 1])).exp();
            return (v, -kappa * v);
        }
        let j = self.radii.partition_point(|&x| x < r).clamp(1, m - 1);
        let (r0, r1) = (self.radii[j - 1], self.radii[j]);
        let h = (r1 / r0).ln();
        let t = (r / r0).ln() / h;
        let (g0, g1) = (self.g[j - 1], self.g[j]);
        let (d0, d1) = (r0 * self.g_prime[j - 1], r1 * self.g_prime[j]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * g0 + h10 * h * d0 + h01 * g1 + h11 * h * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * g0 + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
            + (-6.0 * t2 + 6.0 * t) * g1
            + (3.0 * t2 - 2.0 * t) * h * d1)
            / h;
        (v, dv / r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// `ω r^{N-1} |G'(r)|^{N-1}`.
    pub fn flux(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        let omega = omega_sphere(self.n).expect("validated dimension");
        omega * (r * self.eval(r).1.abs()).powf(nf - 1.0)
    }

    fn cell_residuals(&self, cut: usize) -> (f64, f64) {
        let nf = self.n as f64;
        let rule = gl8();
        let mut ode = 0.0f64;
        let mut tail = 0.0f64;
        for i in 0..self.radii.len() - 1 {
            let (r0, r1) = (self.radii[i], self.radii[i + 1]);
            let phi0 = -(r0 * self.g_prime[i].abs()).powf(nf - 1.0);
            let phi1 = -(r1 * self.g_prime[i + 1].abs()).powf(nf - 1.0);
            let integral = rule.integrate(r0.ln(), r1.ln(), |s| {
                let r = s.exp();
                (nf * s).exp() * self.value(r).powf(nf - 1.0)
            });
            let res = (phi1 - phi0 - integral).abs();
            if i < cut {
                ode = ode.max(res);
            } else {
                tail = tail.max(res);
            }
        }
        (ode, tail)
    }
}

fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c] == 0.0 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// `A_0` from `h(r) = G(r) + (N/α_N) ln r` near the inner edge of the table.
///
/// The remainder of `h` is `r^N` times a polynomial of degree `N-1` in
/// `ln r`, so `h` is sampled at half-decade steps from `r_min` and that model
/// is fitted exactly twice on overlapping windows; the first fit gives `A_0`
/// and the disagreement between both is the reported fit error.
pub fn extract_a0(table: &GreenTable) -> Result<(f64, f64)> {
    let n = table.n;
    let nf = n as f64;
    let k = table.slope_k();
    let unknowns = n as usize + 1;
    let npts = unknowns + 1;
    let r0 = table.radii[0];
    let pts: Vec<f64> = (0..npts).map(|j| r0 * 10f64.powf(0.5 * j as f64)).collect();
    if *pts.last().unwrap() >= table.report.tail_start.min(table.r_max()) || *pts.last().unwrap() > 0.1 {
        return Err(MtError::Extraction("table does not span enough decades near the origin".into()));
    }
    let h: Vec<f64> = pts.iter().map(|&r| table.value(r) + k * r.ln()).collect();
    let fit = |range: std::ops::Range<usize>| -> Option<f64> {
        let rs = pts[range.clone()].to_vec();
        let hs = h[range].to_vec();
        let scale = rs[0].powf(nf);
        let rows: Vec<Vec<f64>> = rs
            .iter()
            .map(|&r| {
                let mut row = vec![1.0];
                let w = r.powf(nf) / scale;
                for d in 0..n {
                    row.push(w * r.ln().powi(d as i32));
                }
                row
            })
            .collect();
        solve_small(rows, hs).map(|x| x[0])
    };
    let a = fit(0..unknowns).ok_or_else(|| MtError::Extraction("singular fit".into()))?;
    let b = fit(1..npts).ok_or_else(|| MtError::Extraction("singular fit".into()))?;
    let spread = (a - b).abs();
    if !a.is_finite() || spread > 10.0 * table.tol {
        return Err(MtError::Extraction(format!(
            "extrapolation does not settle: estimates {a} and {b}, spread {spread}"
        )));
    }
    Ok((a, spread))
}

/// `∫_{R^N} G^N |x|^{-Nβ} dx`.
pub fn green_weighted_norm(table: &GreenTable, beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return domain(format!("beta={beta} outside [0, 1)"));
    }
    let n = table.n;
    let nf = n as f64;
    let p = nf * (1.0 - beta);
    let omega = omega_sphere(n)?;
    let rule = gl8();
    let r0 = table.radii[0];
    let k_loc = -r0 * table.g_prime[0];
    let mut acc = log_moment(r0, table.g[0], k_loc, p, n);
    for w in table.radii.windows(2) {
        acc += rule.integrate(w[0].ln(), w[1].ln(), |s| (p * s).exp() * table.value(s.exp()).powf(nf));
    }
    let m = table.radii.len();
    let (re, ge) = (table.radii[m - 1], table.g[m - 1]);
    let kappa = -table.g_prime[m - 1] / ge;
    acc += re.powf(p - 1.0) * ge.powf(nf) / (nf * kappa);
    let v = omega * acc;
    if !v.is_finite() || v <= 0.0 {
        return Err(MtError::Integration(format!("weighted norm evaluates to {v}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_moment_matches_quadrature() {
        let (r, g, k, p) = (0.01, 3.0, 0.2, 1.5);
        let exact = log_moment(r, g, k, p, 2);
        // substitute ρ = r e^{-x}
        let rule = crate::quad::gl16();
        let mut num = 0.0;
        for j in 0..200 {
            let (a, b) = (j as f64 * 0.2, (j + 1) as f64 * 0.2);
            num += rule.integrate(a, b, |x| r.powf(p) * (-p * x).exp() * (g + k * x).powi(2));
        }
        assert!((exact - num).abs() < 1e-12 * exact);
    }

    #[test]
    fn bad_arguments() {
        assert!(solve_green(1, 1e-6, 100.0, 1e-8).is_err());
        assert!(solve_green(2, 2.0, 100.0, 1e-8).is_err());
        assert!(solve_green(2, 1e-6, 0.5, 1e-8).is_err());
    }

    #[test]
    fn bracket_exhaustion_is_solver_error() {
        let opts = GreenOptions { a0_bracket: (0.5, 1.0), expand_bracket: false, ..GreenOptions::new(2) };
        assert!(matches!(solve_green_with(2, &opts), Err(MtError::Solver(_))));
    }

    #[test]
    fn synthetic_log_table_gives_constant() {
        let n = 2;
        let k = 2.0 / alpha_n(n).unwrap();
        let radii = crate::profile::log_grid(1e-6, 0.9, 400).unwrap();
        let c = 0.37;
        let g: Vec<f64> = radii.iter().map(|r| -k * r.ln() + c).collect();
        let gp: Vec<f64> = radii.iter().map(|r| -k / r).collect();
        let t = GreenTable::from_samples(n, radii, g, gp, 1e-10).unwrap();
        let (a0, fit) = extract_a0(&t).unwrap();
        assert!((a0 - c).abs() < 1e-13, "{a0}");
        assert!(fit < 1e-12);
    }

    #[test]
    fn synthetic_exponential_norm() {
        let radii = crate::profile::log_grid(1e-6, 40.0, 3000).unwrap();
        let g: Vec<f64> = radii.iter().map(|r| (-r).exp()).collect();
        let gp: Vec<f64> = g.iter().map(|v| -v).collect();
        let t = GreenTable::from_samples(2, radii, g, gp, 1e-10).unwrap();
        assert!(t.a0.is_nan());
        let v = green_weighted_norm(&t, 0.0).unwrap();
        assert!((v - std::f64::consts::PI / 2.0).abs() < 1e-9, "{v}");
        assert!(green_weighted_norm(&t, 1.0).is_err());
    }
}
