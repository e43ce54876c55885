use tsuq_demo::{Session, SERIES_LEN};

#[test]
fn curves_need_a_forecast() {
    let s = Session::new();
    assert!(s.reliability(1.0).is_err());
    assert!(s.conf_error().is_err());
}

#[test]
fn forecast_is_reproducible_and_in_original_units() {
    let mut s = Session::new();
    let a = s.forecast("mlp", "dropout", 10, 4).unwrap();
    let b = Session::new().forecast("mlp", "dropout", 10, 4).unwrap();
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.std, b.std);
    assert!(a.y.len() > SERIES_LEN / 10);
    assert_eq!(a.y.len(), a.mean.len());
    // the sine stays within ±1 plus a little noise
    assert!(a.y.iter().all(|v| v.abs() < 1.6));
    assert!(a.std.iter().all(|&v| v > 0.0));
    assert!(a.metrics.r2 > 0.5, "{:?}", a.metrics);
}

#[test]
fn reliability_tracks_sigma_scale() {
    let mut s = Session::new();
    s.forecast("mlp", "baseline", 20, 1).unwrap();
    let base = s.reliability(1.0).unwrap();
    let wide = s.reliability(50.0).unwrap();
    assert_eq!(base.levels.len(), 9);
    assert!(wide.coverage.iter().all(|&c| c == 1.0));
    for (n, w) in base.coverage.iter().zip(&wide.coverage) {
        assert!(w >= n);
    }
    assert!(s.reliability(0.0).is_err());
    assert!(s.reliability(f64::NAN).is_err());
}

#[test]
fn conf_error_curve_is_labelled() {
    let mut s = Session::new();
    s.forecast("lstm", "ensemble", 3, 2).unwrap();
    let c = s.conf_error().unwrap();
    assert_eq!(c.x.len(), c.mae.len());
    assert_eq!(c.x[0], 0.0);
    assert!(["Good", "Moderate", "Bad", "n/a"].contains(&c.label.as_str()));
    assert!(c.retained.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn bad_input_is_rejected() {
    let mut s = Session::new();
    assert!(s.forecast("gru", "dropout", 5, 1).is_err());
    assert!(s.forecast("mlp", "nope", 5, 1).is_err());
    assert!(s.forecast("mlp", "dropout", 0, 1).is_err());
}
