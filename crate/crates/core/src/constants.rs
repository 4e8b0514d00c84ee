use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};

/// Largest dimension accepted by the toolkit.
pub const MAX_DIM: u32 = 12;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Dimension and weight exponent of a problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MtParams {
    n: u32,
    beta: f64,
}

impl MtParams {
    pub fn new(n: u32, beta: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return domain(format!("dimension N={n} outside 2..={MAX_DIM}"));
        }
        if !beta.is_finite() || !(0.0..1.0).contains(&beta) {
            return domain(format!("beta={beta} outside [0, 1)"));
        }
        Ok(Self { n, beta })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Surface area of the unit sphere in R^N.
    pub fn omega(&self) -> f64 {
        omega_sphere(self.n).expect("validated dimension")
    }

    pub fn alpha_n(&self) -> f64 {
        alpha_n(self.n).expect("validated dimension")
    }

    /// `(1 - beta) * alpha_N`.
    pub fn alpha_beta(&self) -> f64 {
        (1.0 - self.beta) * self.alpha_n()
    }

    pub fn ball_volume(&self) -> f64 {
        self.omega() / self.nf()
    }

    /// `N / (N - 1)`, the critical exponent in the exponential.
    pub fn conj(&self) -> f64 {
        self.nf() / (self.nf() - 1.0)
    }

    /// `1 + 1/2 + ... + 1/(N-1)`.
    pub fn harmonic(&self) -> f64 {
        harmonic(self.n - 1)
    }
}

/// `Γ(n/2)` for a positive integer `n`, computed exactly by recursion.
pub fn gamma_half_integer(n: u32) -> f64 {
    debug_assert!(n >= 1);
    let (mut g, mut k) = if n.is_multiple_of(2) { (1.0, 2) } else { (PI.sqrt(), 1) };
    while k < n {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g
}

/// `ω_{N-1} = 2 π^{N/2} / Γ(N/2)`.
pub fn omega_sphere(n: u32) -> Result<f64> {
    if !(1..=MAX_DIM).contains(&n) {
        return domain(format!("dimension N={n} outside 1..={MAX_DIM}"));
    }
    Ok(2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n))
}

/// `α_N = N ω_{N-1}^{1/(N-1)}`.
pub fn alpha_n(n: u32) -> Result<f64> {
    if !(2..=MAX_DIM).contains(&n) {
        return domain(format!("dimension N={n} outside 2..={MAX_DIM}"));
    }
    let nf = n as f64;
    Ok(nf * omega_sphere(n)?.powf(1.0 / (nf - 1.0)))
}

pub fn ball_volume(n: u32) -> Result<f64> {
    Ok(omega_sphere(n)? / n as f64)
}

pub fn harmonic(m: u32) -> f64 {
    (1..=m).map(|k| 1.0 / k as f64).sum()
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `e^t - Σ_{k<m} t^k/k!` for `t >= 0`.
///
/// For moderate `t` the tail series is summed directly so there is no
/// cancellation; for large `t` the subtraction is harmless.
pub fn exp_tail(m: u32, t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if m == 0 {
        return t.exp();
    }
    if t == 0.0 {
        return 0.0;
    }
    if t.abs() < m as f64 + 2.0 {
        // Σ_{k>=m} t^k/k!
        let mut term = t.powi(m as i32) / factorial(m);
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut k = m;
        loop {
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            k += 1;
            term *= t / k as f64;
            if term.abs() <= f64::EPSILON * 1e-2 * sum.abs() || k > m + 400 {
                break;
            }
        }
        return sum;
    }
    let mut partial = 0.0;
    let mut term = 1.0;
    for k in 0..m {
        if k > 0 {
            term *= t / k as f64;
        }
        partial += term;
    }
    t.exp() - partial
}

/// `Φ_N(t) = e^t - Σ_{k=0}^{N-2} t^k/k!`.
pub fn phi_truncated_exp(n: u32, t: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("Φ_N needs N >= 2, got {n}"));
    }
    if !t.is_finite() || t < 0.0 {
        return domain(format!("Φ_N argument must be finite and >= 0, got {t}"));
    }
    Ok(exp_tail(n - 1, t))
}

/// Derivative of `Φ_N`, which is `Φ_{N-1}` (and `e^t` when `N = 2`).
pub fn phi_truncated_exp_prime(n: u32, t: f64) -> f64 {
    exp_tail(n.saturating_sub(2), t)
}
