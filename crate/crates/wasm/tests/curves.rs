use latlab_wasm::curves::{critical_line, error_term, integral_equation};

#[test]
fn error_term_series_tracks_direct_values() {
    let v = error_term(false, 100.3, 140.3, 9, 20_000).unwrap();
    assert_eq!(v.len(), 27);
    for p in v.chunks(3) {
        assert!((p[1] - p[2]).abs() < 0.5, "P at {}: {} vs {}", p[0], p[1], p[2]);
    }
    let v = error_term(true, 100.3, 140.3, 9, 20_000).unwrap();
    for p in v.chunks(3) {
        assert!((p[1] - p[2]).abs() < 0.5, "Delta at {}: {} vs {}", p[0], p[1], p[2]);
    }
}

#[test]
fn error_term_rejects_oversized_requests() {
    assert!(error_term(false, 10.0, 5e6, 10, 1000).is_err());
    assert!(error_term(false, 10.0, 20.0, 1, 1000).is_err());
    assert!(error_term(false, 20.0, 10.0, 10, 1000).is_err());
}

#[test]
fn critical_line_has_the_first_zero() {
    // Z changes sign once on [14, 14.3], at 14.1347...
    let v = critical_line(14.0, 14.3, 31).unwrap();
    let changes = v.chunks(3).zip(v.chunks(3).skip(1)).filter(|(a, b)| a[1] * b[1] < 0.0).count();
    assert_eq!(changes, 1);
    for p in v.chunks(3) {
        assert!((p[1].abs() - p[2]).abs() < 1e-8);
    }
}

#[test]
fn integral_equation_matches_target() {
    let v = integral_equation(1.0, 0.5, 2.0, 50).unwrap();
    assert!((v[1] - 4.0).abs() < 1e-12);
    assert!(v[2] < 1e-8);
    assert_eq!(v.len(), 4 + 100);
    assert!(integral_equation(1.0, 1.5, 2.0, 50).is_err());
}
