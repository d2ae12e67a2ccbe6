use relqkd_web::*;

#[test]
fn gain_profile_layout() {
    let v = gain_profile(1.0, -0.3, -0.5, 0.5, 11).unwrap();
    assert_eq!(v.len(), 33);
    assert!(v[15].abs() < 1e-15);
    assert!((v[16] - 1.0).abs() < 1e-15);
    assert!(v[2] > v[17] && v[17] > v[32]);
    assert!(gain_profile(1.0, -0.3, 0.5, -0.5, 11).is_err());
}

#[test]
fn key_rate_curve_is_monotone() {
    let v = key_rate_curve(0.9, 1.0, 10.0, 0.01, 20.0, 30, false).unwrap();
    let ks: Vec<f64> = v.chunks(5).map(|r| r[1]).collect();
    assert!(ks.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert_eq!(ks[0], 0.0);
    assert!(key_rate_curve(1.5, 1.0, 10.0, 0.01, 20.0, 5, false).is_err());
}

#[test]
fn threshold_brackets_key() {
    let k0 = threshold(0.8, 1.0, false).unwrap();
    let below = key_rate_curve(0.8, 1.0, 0.0, 0.5 * k0, 0.9 * k0, 3, false).unwrap();
    assert!(below.chunks(5).all(|r| r[1] == 0.0));
    let above = key_rate_curve(0.8, 1.0, 0.0, 1.1 * k0, 2.0 * k0, 3, false).unwrap();
    assert!(above.chunks(5).all(|r| r[1] > 0.0));
}

#[test]
fn overlap_matches_closed_form() {
    let v = overlap_spectrum(-10.0, 1.0, 10.0, 21).unwrap();
    assert!((v[2] / v[0] - 1.0).abs() < 5e-3);
    assert!((v[3] / v[1] - 1.0).abs() < 1e-2);
    assert_eq!(v.len(), 5 + 3 * 21);
    assert!(overlap_spectrum(-10.0, -1.0, 10.0, 21).is_err());
}
