use sbchain::circuit::{coupling_curve, phi_minus_series, qubit_spectrum, usc_crossing, FluxQubitSpec, LineCouplingSpec};

#[test]
fn levels_converge_in_charge_cutoff() {
    let a = qubit_spectrum(&FluxQubitSpec { n_cutoff: 12, ..FluxQubitSpec::preset(0.7) }).unwrap();
    let b = qubit_spectrum(&FluxQubitSpec { n_cutoff: 16, ..FluxQubitSpec::preset(0.7) }).unwrap();
    for i in 0..4 {
        let rel = ((a.levels[i] - b.levels[i]) / b.levels[i]).abs();
        assert!(rel < 1e-6, "level {i}: relative change {rel:e}");
    }
}

#[test]
fn preset_curve_rises_and_crosses_in_band() {
    let grid: Vec<f64> = (0..=30).map(|i| 0.55 + 0.01 * i as f64).collect();
    let curve = coupling_curve(&FluxQubitSpec::preset(0.55), &grid, &LineCouplingSpec::preset()).unwrap();
    let inc: Vec<f64> = curve.windows(2).map(|w| w[1].m01 - w[0].m01).collect();
    assert!(inc.iter().all(|d| *d > 0.0));
    assert!(curve.iter().all(|p| p.m01 >= 0.0));
    // no jump larger than ten times a neighbouring increment
    assert!(inc.windows(2).all(|w| w[1] < 10.0 * w[0] && w[0] < 10.0 * w[1]));
    let x = usc_crossing(&curve).expect("crossing");
    assert!((0.6..=0.7).contains(&x), "crossing at {x}");
    assert!(curve.iter().all(|p| p.usc == (p.ratio >= 0.25)));
}

#[test]
fn series_underestimates_phase_at_quarter_turn() {
    let v = phi_minus_series(std::f64::consts::FRAC_PI_2);
    assert!((v - 22.0 / 15.0).abs() < 1e-15);
    assert!(v < std::f64::consts::FRAC_PI_2);
}

#[test]
fn unconverged_cutoff_is_reported() {
    // weak junctions spread the charge distribution beyond five states
    let spec = FluxQubitSpec { ej: 400.0, n_cutoff: 5, ..FluxQubitSpec::preset(0.7) };
    let err = qubit_spectrum(&spec).unwrap_err();
    assert!(err.is_convergence(), "{err}");
}
