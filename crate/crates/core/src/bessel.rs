//! Modified Bessel functions `K_0` and `K_1` of real positive argument.
//!
//! Power series for `x <= 2`, Steed's continued fraction (Temme's CF2
//! variant) above.

use std::f64::consts::PI;

use crate::constants::EULER_GAMMA;
use crate::error::{domain, Result};

pub fn bessel_k0(x: f64) -> Result<f64> {
    Ok(bessel_k01(x)?.0)
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    Ok(bessel_k01(x)?.1)
}

/// `(K_0(x), K_1(x))`.
pub fn bessel_k01(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("K_nu needs finite x > 0, got {x}"));
    }
    if x <= 2.0 {
        Ok(series(x))
    } else {
        let (k0s, k1s) = steed_cf2_scaled(x);
        let e = (-x).exp();
        Ok((k0s * e, k1s * e))
    }
}

fn series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lh = (0.5 * x).ln();
    // I_0, I_1 and the digamma sums
    let mut term0 = 1.0; // y^k/(k!)^2
    let mut term1 = 1.0; // y^k/(k!(k+1)!)
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut hk = 0.0; // H_k
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term0 *= y / (kf * kf);
            term1 *= y / (kf * (kf + 1.0));
            hk += 1.0 / kf;
        }
        i0 += term0;
        i1 += term1;
        s0 += term0 * hk;
        // ψ(k+1) + ψ(k+2) = -2γ + 2H_k + 1/(k+1)
        s1 += term1 * (-2.0 * EULER_GAMMA + 2.0 * hk + 1.0 / (kf + 1.0));
        if term0 < 1e-18 * i0 && k > 2 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(lh + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + lh * i1 - 0.25 * x * s1;
    (k0, k1)
}

fn steed_cf2_scaled(x: f64) -> (f64, f64) {
    let nu = 0.0f64;
    let mut bi = 2.0 * (1.0 + x);
    let mut di = 1.0 / bi;
    let mut delhi = di;
    let mut hi = di;
    let mut qi = 0.0;
    let mut qip1 = 1.0;
    let mut ai = -(0.25 - nu * nu);
    let a1 = ai;
    let mut ci = -ai;
    let mut bqi = -ai;
    let mut s = 1.0 + bqi * delhi;
    for i in 2..10_000 {
        ai -= 2.0 * (i - 1) as f64;
        ci = -ai * ci / i as f64;
        let tmp = (qi - bi * qip1) / ai;
        qi = qip1;
        qip1 = tmp;
        bqi += ci * qip1;
        bi += 2.0;
        di = 1.0 / (bi + ai * di);
        delhi *= bi * di - 1.0;
        hi += delhi;
        let dels = bqi * delhi;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    hi *= -a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (nu + x + 0.5 - hi) / x;
    (k0, k1)
}
