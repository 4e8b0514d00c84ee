//! Distribution functions and symmetric decreasing rearrangement.
//!
//! Radial samples are read as piecewise linear in `ln r` with the same
//! conventions as [`RadialProfile`], so level sets are unions of shells whose
//! measure is computed exactly. Level data is a list of `(value, measure)`
//! pairs and is rearranged by sorting.

use serde::Serialize;

use crate::constants::ball_volume;
use crate::error::{domain, Result};
use crate::profile::{check_samples, gradient_energy, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub value: f64,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampledFunction {
    /// Radial samples, not necessarily monotone.
    Radial { radii: Vec<f64>, values: Vec<f64> },
    /// A function taking `value` on a set of the given measure.
    Levels(Vec<Level>),
}

impl SampledFunction {
    pub fn radial(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_samples(&radii, &values)?;
        Ok(Self::Radial { radii, values })
    }

    pub fn levels(levels: Vec<Level>) -> Result<Self> {
        for l in &levels {
            if !(l.value >= 0.0) || !l.value.is_finite() || !(l.measure >= 0.0) {
                return domain("levels need finite values >= 0 and measures >= 0");
            }
            if l.value > 0.0 && !l.measure.is_finite() {
                return domain(format!("level {} has infinite measure", l.value));
            }
        }
        Ok(Self::Levels(levels))
    }

    pub fn from_profile(u: &RadialProfile) -> Self {
        Self::Radial { radii: u.radii().to_vec(), values: u.values().to_vec() }
    }
}

/// Measure of `{u > t}` (or `{u >= t}` when `strict` is false) for radial samples.
fn radial_mu(n: u32, radii: &[f64], values: &[f64], t: f64, strict: bool) -> f64 {
    let nf = n as f64;
    let above = |v: f64| if strict { v > t } else { v >= t };
    let mut acc = 0.0;
    if above(values[0]) {
        acc += radii[0].powf(nf);
    }
    for i in 0..radii.len() - 1 {
        acc += cell_measure(nf, radii[i], radii[i + 1], values[i], values[i + 1], t, strict);
    }
    ball_volume(n).expect("validated dimension") * acc
}

/// `r^N`-measure of the part of one cell where the interpolant exceeds `t`.
fn cell_measure(nf: f64, r0: f64, r1: f64, u0: f64, u1: f64, t: f64, strict: bool) -> f64 {
    let above = |v: f64| if strict { v > t } else { v >= t };
    match (above(u0), above(u1)) {
        (true, true) => r1.powf(nf) - r0.powf(nf),
        (false, false) => 0.0,
        (a0, _) => {
            let (s0, s1) = (r0.ln(), r1.ln());
            let x = ((t - u0) / (u1 - u0)).clamp(0.0, 1.0);
            let rs = (s0 + x * (s1 - s0)).exp();
            if a0 {
                rs.powf(nf) - r0.powf(nf)
            } else {
                r1.powf(nf) - rs.powf(nf)
            }
        }
    }
}

/// `μ_f(t) = |{f > t}|`.
pub fn distribution_function(f: &SampledFunction, n: u32, t: f64) -> Result<f64> {
    ball_volume(n)?;
    Ok(match f {
        SampledFunction::Radial { radii, values } => radial_mu(n, radii, values, t, true),
        SampledFunction::Levels(levels) => levels.iter().filter(|l| l.value > t).map(|l| l.measure).sum(),
    })
}

/// Sorted, tie-merged level data with the radii of the corresponding shells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelProfile {
    pub n: u32,
    /// Strictly decreasing values with their measures.
    pub levels: Vec<Level>,
    /// `outer[k]` is the radius of the ball of measure `Σ_{j<=k} measure_j`.
    pub outer: Vec<f64>,
}

/// Decreasing rearrangement of level data.
pub fn decreasing_rearrangement(levels: &[Level], n: u32) -> Result<LevelProfile> {
    let vol = ball_volume(n)?;
    SampledFunction::levels(levels.to_vec())?;
    let mut ls: Vec<Level> = levels.iter().copied().filter(|l| l.value > 0.0 && l.measure > 0.0).collect();
    ls.sort_by(|a, b| b.value.total_cmp(&a.value));
    let mut merged: Vec<Level> = Vec::with_capacity(ls.len());
    for l in ls {
        match merged.last_mut() {
            Some(last) if last.value == l.value => last.measure += l.measure,
            _ => merged.push(l),
        }
    }
    let mut cum = 0.0;
    let outer = merged
        .iter()
        .map(|l| {
            cum += l.measure;
            (cum / vol).powf(1.0 / n as f64)
        })
        .collect();
    Ok(LevelProfile { n, levels: merged, outer })
}

impl LevelProfile {
    pub fn distribution(&self, t: f64) -> f64 {
        self.levels.iter().filter(|l| l.value > t).map(|l| l.measure).sum()
    }

    /// `∫ |f|^p`.
    pub fn norm_pow(&self, p: f64) -> f64 {
        self.levels.iter().map(|l| l.value.powf(p) * l.measure).sum()
    }

    /// Staircase as a radial profile. Each jump is resolved over a relative
    /// width of `1e-13` in `r`, which bounds the drift of the distribution function.
    pub fn to_radial_profile(&self) -> Result<RadialProfile> {
        if self.levels.is_empty() {
            return RadialProfile::new(vec![0.5, 1.0, 2.0], vec![0.0; 3]);
        }
        const JUMP: f64 = 1e-13;
        let mut radii = vec![0.5 * self.outer[0]];
        let mut values = vec![self.levels[0].value];
        for (k, l) in self.levels.iter().enumerate() {
            if k > 0 {
                radii.push(self.outer[k - 1] * (1.0 + JUMP));
                values.push(l.value);
            }
            radii.push(self.outer[k]);
            values.push(l.value);
        }
        radii.push(self.outer[self.levels.len() - 1] * (1.0 + JUMP));
        values.push(0.0);
        RadialProfile::new(radii, values)
    }
}

/// `f^♯(x) = f^*(|B_1||x|^N)`.
///
/// Radial input is rearranged onto its own grid; level data becomes a staircase.
pub fn symmetric_rearrangement(f: &SampledFunction, n: u32) -> Result<RadialProfile> {
    match f {
        SampledFunction::Levels(levels) => decreasing_rearrangement(levels, n)?.to_radial_profile(),
        SampledFunction::Radial { radii, values } => {
            ball_volume(n)?;
            check_samples(radii, values)?;
            if values.windows(2).all(|w| w[1] <= w[0]) {
                return RadialProfile::new(radii.clone(), values.clone());
            }
            let out = rearrange_radial(n, radii, values);
            RadialProfile::new(radii.clone(), out)
        }
    }
}

/// Cells of a radial sample with their value ranges, sorted for sweeps over levels.
struct CellIndex {
    nf: f64,
    lo: Vec<f64>,
    /// `lo` values in decreasing order with prefix sums of the matching `r^N`-volumes.
    lo_sorted: Vec<f64>,
    lo_prefix: Vec<f64>,
    /// Cell indices by decreasing `hi`, with the `hi` values.
    by_hi: Vec<usize>,
    hi_sorted: Vec<f64>,
}

impl CellIndex {
    fn new(nf: f64, radii: &[f64], values: &[f64]) -> Self {
        let pw: Vec<f64> = radii.iter().map(|r| r.powf(nf)).collect();
        let m = radii.len() - 1;
        let lo: Vec<f64> = (0..m).map(|i| values[i].min(values[i + 1])).collect();
        let hi: Vec<f64> = (0..m).map(|i| values[i].max(values[i + 1])).collect();
        let mut by_lo: Vec<usize> = (0..m).collect();
        by_lo.sort_by(|&a, &b| lo[b].total_cmp(&lo[a]));
        let lo_sorted = by_lo.iter().map(|&i| lo[i]).collect();
        let mut lo_prefix = vec![0.0; m + 1];
        for (k, &i) in by_lo.iter().enumerate() {
            lo_prefix[k + 1] = lo_prefix[k] + (pw[i + 1] - pw[i]);
        }
        let mut by_hi: Vec<usize> = (0..m).collect();
        by_hi.sort_by(|&a, &b| hi[b].total_cmp(&hi[a]));
        let hi_sorted = by_hi.iter().map(|&i| hi[i]).collect();
        Self { nf, lo, lo_sorted, lo_prefix, by_hi, hi_sorted }
    }

    /// Total volume of cells whose minimum is above `t` (or at least `t`).
    fn full_above(&self, t: f64, strict: bool) -> f64 {
        let k = if strict {
            self.lo_sorted.partition_point(|&v| v > t)
        } else {
            self.lo_sorted.partition_point(|&v| v >= t)
        };
        self.lo_prefix[k]
    }

    /// Cells whose range meets the open interval `(a, b)` without lying above `b`.
    fn straddling(&self, a: f64, b: f64) -> impl Iterator<Item = usize> + '_ {
        let k = self.hi_sorted.partition_point(|&v| v > a);
        self.by_hi[..k].iter().copied().filter(move |&i| self.lo[i] < b)
    }

    fn mu(&self, radii: &[f64], values: &[f64], t: f64, strict: bool) -> f64 {
        let above = |v: f64| if strict { v > t } else { v >= t };
        let mut acc = if above(values[0]) { radii[0].powf(self.nf) } else { 0.0 };
        acc += self.full_above(t, strict);
        let k = self.hi_sorted.partition_point(|&v| v >= t);
        for &i in &self.by_hi[..k] {
            let full = if strict { self.lo[i] > t } else { self.lo[i] >= t };
            if !full {
                acc += cell_measure(self.nf, radii[i], radii[i + 1], values[i], values[i + 1], t, strict);
            }
        }
        acc
    }
}

fn rearrange_radial(n: u32, radii: &[f64], values: &[f64]) -> Vec<f64> {
    let nf = n as f64;
    let vol = ball_volume(n).expect("validated dimension");
    let idx = CellIndex::new(nf, radii, values);
    let mut bps: Vec<f64> = values.to_vec();
    bps.push(0.0);
    bps.sort_by(|a, b| b.total_cmp(a));
    bps.dedup();
    let strict: Vec<f64> = bps.iter().map(|&t| vol * idx.mu(radii, values, t, true)).collect();
    let loose: Vec<f64> = bps.iter().map(|&t| vol * idx.mu(radii, values, t, false)).collect();
    let mut cache: Vec<Option<(f64, Vec<usize>)>> = vec![None; bps.len()];
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let m = vol * r.powf(nf);
        let k = strict.partition_point(|&g| g < m);
        if k >= bps.len() {
            out.push(0.0);
            continue;
        }
        if k == 0 {
            out.push(bps[0]);
            continue;
        }
        let (lo, hi) = (bps[k], bps[k - 1]);
        if loose[k - 1] >= m {
            out.push(hi);
            continue;
        }
        // μ is continuous and decreasing on (lo, hi); only cells straddling it vary
        let (base, active) = cache[k].get_or_insert_with(|| {
            let mut base = if values[0] >= hi { radii[0].powf(nf) } else { 0.0 };
            base += idx.full_above(hi, false);
            (base, idx.straddling(lo, hi).collect())
        });
        if let [i] = active[..] {
            // one cell crosses the level: invert its measure in closed form
            let target = m / vol - *base;
            let (r0, r1, u0, u1) = (radii[i], radii[i + 1], values[i], values[i + 1]);
            let rs_n = if u0 > u1 { target + r0.powf(nf) } else { r1.powf(nf) - target };
            if rs_n > 0.0 && u0 != u1 {
                let x = ((rs_n.ln() / nf - r0.ln()) / (r1 / r0).ln()).clamp(0.0, 1.0);
                out.push((u0 + x * (u1 - u0)).clamp(lo, hi));
                continue;
            }
        }
        let mu = |t: f64| {
            let mut acc = *base;
            for &i in active.iter() {
                acc += cell_measure(nf, radii[i], radii[i + 1], values[i], values[i + 1], t, true);
            }
            vol * acc
        };
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if mu(mid) < m {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(b);
    }
    for i in 1..out.len() {
        out[i] = out[i].min(out[i - 1]);
    }
    out
}

/// Gradient energies before and after rearrangement, both on the input grid.
pub fn polya_szego_check(f: &SampledFunction, n: u32) -> Result<(f64, f64)> {
    match f {
        SampledFunction::Levels(_) => domain("level data has no finite gradient energy"),
        SampledFunction::Radial { radii, values } => {
            let before = gradient_energy(n, radii, values);
            let after_profile = symmetric_rearrangement(f, n)?;
            let after = gradient_energy(n, after_profile.radii(), after_profile.values());
            Ok((before, after))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swept_measure_matches_direct_sum() {
        let radii: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
        let values: Vec<f64> = radii.iter().map(|r| ((3.0 * r).sin() + 1.2) * (-r).exp()).collect();
        let idx = CellIndex::new(3.0, &radii, &values);
        let vol = ball_volume(3).unwrap();
        for &t in values.iter().chain([0.0, 0.3, 0.77].iter()) {
            for strict in [true, false] {
                let a = vol * idx.mu(&radii, &values, t, strict);
                let b = radial_mu(3, &radii, &values, t, strict);
                assert!((a - b).abs() <= 1e-12 * b.max(1.0), "t={t} strict={strict}: {a} vs {b}");
            }
        }
    }

    use crate::profile::log_grid;
    use std::f64::consts::PI;

    #[test]
    fn indicator_levels() {
        let f = SampledFunction::levels(vec![Level { value: 1.0, measure: 2.5 }]).unwrap();
        assert_eq!(distribution_function(&f, 2, 0.5).unwrap(), 2.5);
        assert_eq!(distribution_function(&f, 2, 1.0).unwrap(), 0.0);
        assert_eq!(distribution_function(&f, 2, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn infinite_measure_rejected() {
        assert!(SampledFunction::levels(vec![Level { value: 1.0, measure: f64::INFINITY }]).is_err());
        assert!(SampledFunction::levels(vec![Level { value: -1.0, measure: 1.0 }]).is_err());
    }

    #[test]
    fn ties_merge() {
        let lp = decreasing_rearrangement(
            &[
                Level { value: 1.0, measure: 1.0 },
                Level { value: 2.0, measure: 0.5 },
                Level { value: 1.0, measure: 2.0 },
            ],
            2,
        )
        .unwrap();
        assert_eq!(lp.levels.len(), 2);
        assert_eq!(lp.levels[1].measure, 3.0);
        assert!((lp.outer[1] - (3.5 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn monotone_input_is_unchanged() {
        let g = log_grid(1e-3, 2.0, 50).unwrap();
        let v: Vec<f64> = g.iter().map(|r| (1.0 - r / 2.0).max(0.0)).collect();
        let f = SampledFunction::radial(g.clone(), v.clone()).unwrap();
        let u = symmetric_rearrangement(&f, 2).unwrap();
        assert_eq!(u.values(), &v[..]);
        // the general path agrees too
        let w = rearrange_radial(2, &g, &v);
        for (a, b) in w.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_distribution() {
        let g = log_grid(1e-6, 1.0, 4000).unwrap();
        let v: Vec<f64> = g.iter().map(|r| 1.0 - r).collect();
        let f = SampledFunction::radial(g, v).unwrap();
        for &t in &[0.1, 0.5, 0.9] {
            let mu = distribution_function(&f, 2, t).unwrap();
            let exact = PI * (1.0 - t) * (1.0f64 - t);
            assert!((mu - exact).abs() < 1e-5, "t={t}: {mu} vs {exact}");
        }
    }

    #[test]
    fn level_data_has_no_gradient() {
        let f = SampledFunction::levels(vec![Level { value: 1.0, measure: 1.0 }]).unwrap();
        assert!(polya_szego_check(&f, 2).is_err());
    }
}
