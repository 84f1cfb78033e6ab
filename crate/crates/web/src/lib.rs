//! Browser bindings: spectral function, a short emission run and the
//! flux-qubit coupling curve. Every entry point returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sbchain::circuit::{coupling_curve as circuit_curve, usc_crossing, FluxQubitSpec, LineCouplingSpec};
use sbchain::linalg::{ONE, ZERO};
use sbchain::model::{effective_frequency, ChainSpec, CouplingKind, SpinBosonModel};
use sbchain::mps::{CompressionParams, MpsState};
use sbchain::observables;
use sbchain::propagate::{self, GroundStateParams, InteractionSolver, KrylovParams, Propagator, TimeMode};

/// Largest chain the page will simulate in real time.
const MAX_EMISSION_SITES: usize = 48;

type Out = Result<String, String>;

fn js(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string(v).map_err(js)
}

fn to_js(r: Out) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

fn model(sites: usize, omega_at: f64, alpha: f64, charge: bool, n_max: usize) -> sbchain::Result<SpinBosonModel> {
    let kind = if charge { CouplingKind::Charge } else { CouplingKind::Flux };
    let m = SpinBosonModel::new(ChainSpec::new(sites, 1.0, n_max)?, omega_at, 0.0, 1.0, kind, 0)?;
    Ok(m.with_g(m.g_for_alpha(alpha)?))
}

#[derive(Serialize)]
struct Spectral {
    g: f64,
    alpha: f64,
    exponent: f64,
    omega_eff: f64,
    markovian_gamma: f64,
    samples: Vec<(f64, f64)>,
}

/// Sampled `J(omega)` of a chain tuned to strength `alpha`, with the
/// fitted exponent and the renormalized qubit frequency.
#[wasm_bindgen]
pub fn spectral_function(sites: usize, omega_at: f64, alpha: f64, charge: bool) -> Result<String, JsValue> {
    to_js(spectral_json(sites, omega_at, alpha, charge))
}

fn spectral_json(sites: usize, omega_at: f64, alpha: f64, charge: bool) -> Out {
    let m = model(sites, omega_at, alpha, charge, 1).map_err(js)?;
    let fit = m.spectral_fit().map_err(js)?;
    to_json(&Spectral {
        g: m.g,
        alpha: fit.alpha,
        exponent: fit.exponent,
        omega_eff: effective_frequency(omega_at, m.basis.omega_c, fit.alpha.min(0.999)).map_err(js)?,
        markovian_gamma: m.markovian_gamma().unwrap_or(f64::NAN),
        samples: m.spectral_samples(),
    })
}

#[derive(Serialize)]
struct Emission {
    alpha: f64,
    ground_pz: f64,
    t: Vec<f64>,
    pz: Vec<f64>,
    omega: Vec<f64>,
    spectrum: Vec<f64>,
    omega_peak: f64,
    max_bond: usize,
}

/// Emission of an excited qubit on the first site of a short chain.
#[wasm_bindgen]
pub fn emission(sites: usize, omega_at: f64, alpha: f64, chi: usize, dt: f64, t_final: f64) -> Result<String, JsValue> {
    to_js(emission_json(sites, omega_at, alpha, chi, dt, t_final))
}

fn emission_json(sites: usize, omega_at: f64, alpha: f64, chi: usize, dt: f64, t_final: f64) -> Out {
    if !(2..=MAX_EMISSION_SITES).contains(&sites) {
        return Err(js(format!("sites must lie in 2..={MAX_EMISSION_SITES}")));
    }
    if !(dt > 0.0 && t_final >= dt) {
        return Err(js("need 0 < dt <= t_final"));
    }
    let m = model(sites, omega_at, alpha, false, 3).map_err(js)?;
    let compression = CompressionParams::new(chi, 1e-8).map_err(js)?;
    let (ground, _, _) = propagate::ground_state(&m, &GroundStateParams::trotter_only(compression)).map_err(js)?;
    let n_ground = observables::mode_occupations(&ground);

    let kp = KrylovParams { compression, ..KrylovParams::default() };
    let p = Propagator::new(&m, TimeMode::Real, dt, InteractionSolver::Factorized, kp).map_err(js)?;
    let start = MpsState::product([ZERO, ONE], &vec![0; m.modes()], m.chain.n_max).map_err(js)?;
    let (mut t, mut pz) = (vec![0.0], vec![1.0]);
    let n = (t_final / dt).round() as usize;
    let (last, _) = p
        .evolve(start, 0.0, n, 0, |_, time, s| {
            t.push(time);
            pz.push(observables::qubit_bloch(s).pz());
            Ok(())
        })
        .map_err(js)?;
    let spec = observables::emission_peak(&observables::mode_occupations(&last), &n_ground, &m.basis).map_err(js)?;
    to_json(&Emission {
        alpha,
        ground_pz: observables::qubit_bloch(&ground).pz(),
        t,
        pz,
        omega: m.basis.frequencies.clone(),
        spectrum: spec.spectrum,
        omega_peak: spec.omega_peak,
        max_bond: last.max_bond(),
    })
}

#[derive(Serialize)]
struct Curve {
    alpha_j: Vec<f64>,
    m01: Vec<f64>,
    ratio: Vec<f64>,
    crossing: Option<f64>,
}

/// Qubit-line coupling of the preset flux qubit over a junction-ratio grid.
#[wasm_bindgen]
pub fn coupling_curve(alpha_min: f64, alpha_max: f64, points: usize) -> Result<String, JsValue> {
    to_js(curve_json(alpha_min, alpha_max, points))
}

fn curve_json(alpha_min: f64, alpha_max: f64, points: usize) -> Out {
    if points < 2 || !(alpha_max > alpha_min) {
        return Err(js("need at least two points on a non-empty interval"));
    }
    let grid: Vec<f64> =
        (0..points).map(|i| alpha_min + (alpha_max - alpha_min) * i as f64 / (points - 1) as f64).collect();
    let curve = circuit_curve(&FluxQubitSpec::preset(alpha_min), &grid, &LineCouplingSpec::preset()).map_err(js)?;
    to_json(&Curve {
        alpha_j: curve.iter().map(|p| p.alpha_j).collect(),
        m01: curve.iter().map(|p| p.m01).collect(),
        ratio: curve.iter().map(|p| p.ratio).collect(),
        crossing: usc_crossing(&curve),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_function_reports_requested_strength() {
        let v: serde_json::Value = serde_json::from_str(&spectral_json(41, 1.0 / 3.0, 0.2, false).unwrap()).unwrap();
        assert!((v["alpha"].as_f64().unwrap() - 0.2).abs() < 1e-12);
        assert!(v["omega_eff"].as_f64().unwrap() < 1.0 / 3.0);
    }

    #[test]
    fn short_emission_loses_excitation() {
        let v: serde_json::Value = serde_json::from_str(&emission_json(16, 1.0 / 3.0, 0.1, 8, 0.1, 5.0).unwrap()).unwrap();
        let pz = v["pz"].as_array().unwrap();
        assert_eq!(pz.len(), 51);
        assert!(pz.last().unwrap().as_f64().unwrap() < 1.0);
    }

    #[test]
    fn curve_crossing_in_band() {
        let v: serde_json::Value = serde_json::from_str(&curve_json(0.55, 0.85, 31).unwrap()).unwrap();
        let x = v["crossing"].as_f64().unwrap();
        assert!((0.6..0.7).contains(&x));
    }
}
