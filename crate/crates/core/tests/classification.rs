use mtsharp_core::green::{solve_green, GreenOptions};
use mtsharp_core::limits::{classify_sequence, liruf_profile, normalized_bump, vanishing_profile, SequenceClass};
use mtsharp_core::{MtParams, NonlinearitySpec};

const CASES: [(u32, f64); 6] = [(2, 0.0), (2, 0.5), (3, 0.0), (3, 0.5), (4, 0.0), (4, 0.5)];

#[test]
fn liruf_sequences_concentrate() {
    for (n, beta) in CASES {
        let params = MtParams::new(n, beta).unwrap();
        let spec = NonlinearitySpec::phi_critical(params);
        let o = GreenOptions::new(n);
        let green = solve_green(n, o.r_min, o.r_max, o.tol).unwrap();
        let seq: Vec<_> = [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&e| liruf_profile(&params, e, &green).unwrap()).collect();
        let c = classify_sequence(&seq, &spec).unwrap();
        assert_eq!(c.class, SequenceClass::Concentrating, "N={n} beta={beta}: {:?}", c.witnesses);
        assert!(c.sup_scale.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn dilated_bumps_vanish() {
    for (n, beta) in CASES {
        let params = MtParams::new(n, beta).unwrap();
        let spec = NonlinearitySpec::phi_critical(params);
        let bump = normalized_bump(&params).unwrap();
        let seq: Vec<_> =
            [0.1, 0.03, 0.01, 0.003].iter().map(|&l| vanishing_profile(&params, l, &bump).unwrap()).collect();
        let c = classify_sequence(&seq, &spec).unwrap();
        assert_eq!(c.class, SequenceClass::Vanishing, "N={n} beta={beta}: {:?}", c.witnesses);
    }
}

#[test]
fn unnormalized_sequence_is_rejected() {
    let params = MtParams::new(2, 0.0).unwrap();
    let bump = normalized_bump(&params).unwrap();
    let seq = vec![bump.scaled(2.0).unwrap(); 3];
    assert!(classify_sequence(&seq, &NonlinearitySpec::phi_critical(params)).is_err());
}
