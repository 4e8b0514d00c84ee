use mtsharp_core::gns::{compute_b_n, ground_state_b_n, normalized_gns_bump, perturbation_curve, GnsOptions};
use mtsharp_core::green::{extract_a0, solve_green, GreenOptions};
use mtsharp_core::halfline::{aux_brute, aux_maximizer};
use mtsharp_core::limits::{liruf_construction, LimitValues};
use mtsharp_core::optimizer::{maximize_mt, OptimizerOptions};
use mtsharp_core::profile::{functional_j, sobolev_energy};
use mtsharp_core::{GreenTable, MtParams, NonlinearitySpec};

fn green(n: u32) -> GreenTable {
    let o = GreenOptions::new(n);
    solve_green(n, o.r_min, o.r_max, o.tol).unwrap()
}

fn small_opts() -> OptimizerOptions {
    OptimizerOptions { nodes: 150, max_iter: 300, ..OptimizerOptions::default() }
}

#[test]
fn optimizer_reports_are_bit_identical() {
    let spec = NonlinearitySpec::phi_critical(MtParams::new(2, 0.0).unwrap());
    let g = green(2);
    let a = maximize_mt(&spec, &small_opts(), Some(&g)).unwrap();
    let b = maximize_mt(&spec, &small_opts(), Some(&g)).unwrap();
    assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
    assert_eq!(a.best_start, b.best_start);
    assert_eq!(a.best_profile.values(), b.best_profile.values());
    for (x, y) in a.starts.iter().zip(&b.starts) {
        assert_eq!(x.history, y.history);
    }
}

#[test]
fn optimizer_invariants() {
    let params = MtParams::new(2, 0.0).unwrap();
    let spec = NonlinearitySpec::phi_critical(params);
    let g = green(2);
    let r = maximize_mt(&spec, &small_opts(), Some(&g)).unwrap();
    for s in &r.starts {
        assert!(s.history.windows(2).all(|w| w[1] >= w[0]), "{} is not monotone", s.label);
        assert!(r.best_value >= s.seed_value);
    }
    let e = sobolev_energy(&r.best_profile, &params).unwrap().total();
    assert!((e - 1.0).abs() < 1e-8, "energy {e}");
    assert!((functional_j(&r.best_profile, &spec).unwrap() - r.best_value).abs() < 1e-12 * r.best_value);
    let limits = r.limits.unwrap();
    assert!((limits.d_nvl - spec.c_of_f).abs() < 1e-12);
    assert!(r.certificate.unwrap().exceeds_d_ncl);
}

#[test]
fn subcritical_weighted_certificate_is_trivial() {
    let params = MtParams::new(2, 0.5).unwrap();
    let spec = NonlinearitySpec::polynomial(params, 1.0, vec![2.0]).unwrap();
    let r = maximize_mt(&spec, &small_opts(), None).unwrap();
    let l = LimitValues::new(&spec, f64::NAN);
    assert_eq!((l.d_nvl, l.d_ncl), (0.0, 0.0));
    let c = r.certificate.unwrap();
    assert!(r.best_value > 0.0 && c.exceeds_d_nvl && c.exceeds_d_ncl);
}

#[test]
fn green_tables_in_higher_dimensions() {
    for n in [3u32, 4] {
        let g = green(n);
        assert!(g.g.windows(2).all(|w| w[1] <= w[0]), "N={n}: G not decreasing");
        assert!((g.report.flux_at_10_rmin - 1.0).abs() < 1e-3, "N={n}: flux {}", g.report.flux_at_10_rmin);
        let (a0, spread) = extract_a0(&g).unwrap();
        assert!((a0 - g.a0).abs() < 1e-12 && spread < 1e-6, "N={n}: A0 {a0} spread {spread}");
    }
}

#[test]
fn aux_problem_other_parameters() {
    for (n, beta) in [(3u32, 0.0), (2, 0.5)] {
        let params = MtParams::new(n, beta).unwrap();
        let g = green(n);
        let s = aux_maximizer(10.0, 1.0, &params, &g).unwrap();
        assert!((s.energy - 1.0).abs() < 1e-3);
        let (brute, w) = aux_brute(10.0, 1.0, &params, 512, 3).unwrap();
        assert!(brute <= s.sup_value * (1.0 + 1e-6), "N={n} beta={beta}: brute {brute} above sup {}", s.sup_value);
        assert!((brute - s.sup_value).abs() <= 5e-3 * s.sup_value, "N={n} beta={beta}: {brute} vs {}", s.sup_value);
        assert!((w.energy() - 1.0).abs() < 1e-9, "energy {}", w.energy());
    }
}

#[test]
fn liruf_profiles_have_unit_energy() {
    for (n, beta) in [(2u32, 0.5), (3, 0.0)] {
        let params = MtParams::new(n, beta).unwrap();
        let g = green(n);
        let lr = liruf_construction(&params, 1e-3, &g).unwrap();
        assert!((sobolev_energy(&lr.profile, &params).unwrap().total() - 1.0).abs() < 1e-10);
        assert!(lr.c_pow > 0.0 && lr.matching_radius < 1.0);
    }
}

#[test]
fn gns_and_perturbation_in_three_dimensions() {
    let opts = GnsOptions::new(3);
    let direct = compute_b_n(3, &opts).unwrap();
    let shot = ground_state_b_n(3, &opts).unwrap();
    assert!((direct.b_n - shot.b_n).abs() < 0.02 * shot.b_n, "{} vs {}", direct.b_n, shot.b_n);
    let params = MtParams::new(3, 0.0).unwrap();
    let (b, v) = normalized_gns_bump(3, &opts).unwrap();
    for (factor, sign) in [(1.5, 1.0), (0.5, -1.0)] {
        let spec = NonlinearitySpec::polynomial(params, 1.0, vec![0.0, factor / b]).unwrap();
        let curve = perturbation_curve(&spec, &params, &v, &[1e-3, 1e-2]).unwrap();
        assert!(sign * curve.fitted_slope > 0.0, "factor {factor}: slope {}", curve.fitted_slope);
        assert!((curve.fitted_slope - curve.predicted_slope).abs() < 0.05 * curve.predicted_slope.abs());
    }
}
