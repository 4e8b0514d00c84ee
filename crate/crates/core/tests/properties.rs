use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mtsharp_core::constants::omega_sphere;
use mtsharp_core::gns::gns_quotient;
use mtsharp_core::halfline::{carleson_chang_lhs, carleson_chang_rhs, random_admissible_profile, to_one_d, transfer_identities};
use mtsharp_core::par::{map_indexed, map_indexed_seq};
use mtsharp_core::profile::{
    elementary_inequality_gap, functional_j, log_grid, profile_from_csv, profile_to_csv, sobolev_energy, weighted_integral,
};
use mtsharp_core::rearrangement::{decreasing_rearrangement, polya_szego_check, symmetric_rearrangement, Level, SampledFunction};
use mtsharp_core::verify::{random_profile, random_samples};
use mtsharp_core::{MtParams, NonlinearitySpec};

fn lp_pow(n: u32, radii: &[f64], values: &[f64], p: f64) -> f64 {
    weighted_integral(omega_sphere(n).unwrap(), radii, values, n as f64, |v| v.abs().powf(p))
}

fn profile(seed: u64, m: usize) -> mtsharp_core::RadialProfile {
    let radii = log_grid(1e-4, 20.0, m).unwrap();
    random_profile(&mut ChaCha8Rng::seed_from_u64(seed), &radii).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transfer_identities_hold(seed in any::<u64>(), n in 2u32..=4, half in any::<bool>()) {
        let beta = if half { 0.5 } else { 0.0 };
        let spec = NonlinearitySpec::phi_critical(MtParams::new(n, beta).unwrap());
        let u = profile(seed, 500);
        let err = transfer_identities(&u, &spec).unwrap().max_relative_error();
        prop_assert!(err <= 1e-5, "err={err}");
    }

    #[test]
    fn half_line_energy_matches(seed in any::<u64>(), n in 2u32..=4) {
        let params = MtParams::new(n, 0.0).unwrap();
        let u = profile(seed, 400);
        let w = to_one_d(&u, &params).unwrap();
        let grad = sobolev_energy(&u, &params).unwrap().grad;
        prop_assert!((w.grad_energy() - grad).abs() <= 1e-9 * grad);
        prop_assert!(w.w().windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn rearrangement_is_monotone_and_equimeasurable(seed in any::<u64>(), n in 2u32..=4) {
        let radii = log_grid(1e-3, 8.0, 400).unwrap();
        let f = random_samples(&mut ChaCha8Rng::seed_from_u64(seed), &radii).unwrap();
        let SampledFunction::Radial { values, .. } = &f else { unreachable!() };
        let star = symmetric_rearrangement(&f, n).unwrap();
        prop_assert!(star.values().windows(2).all(|p| p[1] <= p[0]));
        prop_assert!(star.sup() <= values.iter().cloned().fold(0.0, f64::max) + 1e-12);
        for p in [1.0, n as f64, 2.0 * n as f64] {
            let a = lp_pow(n, &radii, values, p);
            let b = lp_pow(n, star.radii(), star.values(), p);
            prop_assert!((a - b).abs() <= 2e-3 * a, "p={p} before={a} after={b}");
        }
        let (before, after) = polya_szego_check(&f, n).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-6), "before={before} after={after}");
    }

    #[test]
    fn level_rearrangement_preserves_norms(
        raw in prop::collection::vec((0.0f64..5.0, 0.01f64..3.0), 1..40),
        n in 2u32..=4,
    ) {
        let levels: Vec<Level> = raw.iter().map(|&(value, measure)| Level { value, measure }).collect();
        let lp = decreasing_rearrangement(&levels, n).unwrap();
        prop_assert!(lp.levels.windows(2).all(|p| p[1].value < p[0].value));
        prop_assert!(lp.outer.windows(2).all(|p| p[1] > p[0]));
        for p in [1.0, n as f64, 2.0 * n as f64] {
            let direct: f64 = levels.iter().map(|l| l.value.powf(p) * l.measure).sum();
            prop_assert!((lp.norm_pow(p) - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn elementary_gap_nonnegative(a in 0.0f64..10.0, b in 0.0f64..10.0, eps in 1e-4f64..10.0, r in 1.001f64..5.0) {
        prop_assert!(elementary_inequality_gap(a, b, eps, r).unwrap() >= -1e-12 * (a + b).powf(r).max(1.0));
    }

    #[test]
    fn carleson_chang_bound(seed in any::<u64>(), n in 2u32..=4, a in 3.0f64..40.0, delta in 0.005f64..0.9) {
        let params = MtParams::new(n, 0.0).unwrap();
        let w = random_admissible_profile(params, a, delta, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(carleson_chang_lhs(&w, a) <= carleson_chang_rhs(&w, a, delta).unwrap());
    }

    #[test]
    fn energy_homogeneity_and_dilation(seed in any::<u64>(), n in 2u32..=4, c in 0.1f64..10.0, l in 0.1f64..10.0) {
        let params = MtParams::new(n, 0.0).unwrap();
        let nf = n as f64;
        let u = profile(seed, 300);
        let e = sobolev_energy(&u, &params).unwrap();
        let ec = sobolev_energy(&u.scaled(c).unwrap(), &params).unwrap();
        prop_assert!((ec.total() - c.powf(nf) * e.total()).abs() <= 1e-10 * ec.total());
        let el = sobolev_energy(&u.dilated(l).unwrap(), &params).unwrap();
        prop_assert!((el.grad - e.grad).abs() <= 1e-10 * e.grad);
        prop_assert!((el.lp - e.lp / l.powf(nf)).abs() <= 1e-10 * el.lp);
    }

    #[test]
    fn gns_quotient_invariance(seed in any::<u64>(), n in 2u32..=4, c in 0.1f64..10.0, l in 0.1f64..10.0) {
        let params = MtParams::new(n, 0.0).unwrap();
        let u = profile(seed, 300);
        let q = gns_quotient(&u, &params).unwrap();
        let qt = gns_quotient(&u.scaled(c).unwrap().dilated(l).unwrap(), &params).unwrap();
        prop_assert!((q - qt).abs() <= 1e-9 * q);
    }

    #[test]
    fn csv_roundtrip_preserves_norms(seed in any::<u64>(), n in 2u32..=4, half in any::<bool>()) {
        let params = MtParams::new(n, if half { 0.5 } else { 0.0 }).unwrap();
        let spec = NonlinearitySpec::phi_critical(params);
        let u = profile(seed, 300);
        let (p, back) = profile_from_csv(&profile_to_csv(&u, &params)).unwrap();
        prop_assert_eq!(p, Some(params));
        let (a, b) = (sobolev_energy(&u, &params).unwrap(), sobolev_energy(&back, &params).unwrap());
        prop_assert!((a.grad - b.grad).abs() <= 1e-10 * a.grad && (a.lp - b.lp).abs() <= 1e-10 * a.lp);
        let (ja, jb) = (functional_j(&u, &spec).unwrap(), functional_j(&back, &spec).unwrap());
        prop_assert!((ja - jb).abs() <= 1e-10 * ja);
    }

    #[test]
    fn parallel_map_matches_sequential(len in 0usize..200, k in 1u64..1000) {
        let f = |i: usize| (i as u64 * k) % 97;
        prop_assert_eq!(map_indexed(len, f), map_indexed_seq(len, f));
    }
}
