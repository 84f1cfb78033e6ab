//! Three-junction flux qubit in the charge basis and its coupling to the
//! line.
//!
//! Units: `hbar = 1` and `Phi_0 / 2 pi = 1`, so the Cooper-pair charge is 1,
//! `E_C = 1/(8 C_J)`, and an inductance `L` stores `phi^2 / 2L`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxQubitSpec {
    pub ej: f64,
    pub ec: f64,
    /// Size of the small junction relative to the two large ones.
    pub alpha_j: f64,
    /// External flux in units of the flux quantum.
    pub f_bias: f64,
    /// Charge states `-n_cutoff..=n_cutoff` per island.
    pub n_cutoff: usize,
    /// Adds the line-induced `phi_-^2 / (8 L)` term to the qubit potential.
    pub line_renormalization: Option<f64>,
}

impl FluxQubitSpec {
    /// `E_J/E_C = 50`, half a flux quantum, 21 charge states per island.
    pub fn preset(alpha_j: f64) -> Self {
        FluxQubitSpec { ej: 50.0, ec: 1.0, alpha_j, f_bias: 0.5, n_cutoff: 10, line_renormalization: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_j > 0.0 && self.alpha_j < 1.5) {
            return Err(Error::domain(format!("alpha_j must lie in (0, 1.5), got {}", self.alpha_j)));
        }
        if self.n_cutoff < 5 {
            return Err(Error::domain("n_cutoff must be at least 5"));
        }
        if !(self.ej > 0.0 && self.ec > 0.0) {
            return Err(Error::domain("E_J and E_C must be positive"));
        }
        Ok(())
    }

    fn is_real(&self) -> bool {
        let twice = 2.0 * self.f_bias;
        (twice - twice.round()).abs() < 1e-15
    }
}

/// Lumped line cell seen by the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCouplingSpec {
    pub l_ind: f64,
    pub c_cap: f64,
}

impl LineCouplingSpec {
    /// Line cell that puts the `g_eff/omega_at = 0.25` crossing of the
    /// default qubit preset near `alpha_j = 0.65`.
    pub fn preset() -> Self {
        LineCouplingSpec { l_ind: 1.3, c_cap: 0.125 }
    }

    pub fn resonator_frequency(&self) -> f64 {
        1.0 / (self.l_ind * self.c_cap).sqrt()
    }

    /// Zero-point flux amplitude `sqrt(omega_r L / 2)` of the cell mode.
    pub fn phi_zpf(&self) -> f64 {
        (0.5 * self.resonator_frequency() * self.l_ind).sqrt()
    }

    /// Energy per radian of qubit `phi_-`: `phi_zpf / (2 L)`.
    pub fn lambda(&self) -> f64 {
        self.phi_zpf() / (2.0 * self.l_ind)
    }
}

/// Numeric coefficients of the circuit Lagrangian terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianTerms {
    /// `1/(2L)` in front of `phi_- phi_- - phi_+ phi_+`.
    pub interaction: f64,
    /// `1/(8L)` in front of `phi_+^2 + phi_-^2` on the qubit side.
    pub renormalization: f64,
    /// `C/2` of the line's kinetic term.
    pub capacitive: f64,
}

pub fn lagrangian_terms(line: &LineCouplingSpec) -> LagrangianTerms {
    LagrangianTerms {
        interaction: 0.5 / line.l_ind,
        renormalization: 0.125 / line.l_ind,
        capacitive: 0.5 * line.c_cap,
    }
}

fn charges(n_cutoff: usize) -> Vec<f64> {
    let n = n_cutoff as i64;
    (-n..=n).map(|x| x as f64).collect()
}

/// `e^{i phi}` raising the charge by one, `(2N+1) x (2N+1)`.
fn raise(n_cutoff: usize) -> Mat<C64> {
    let d = 2 * n_cutoff + 1;
    Mat::from_fn(d, d, |i, j| if i == j + 1 { ONE } else { ZERO })
}

fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

fn adjoint(m: &Mat<C64>) -> Mat<C64> {
    m.adjoint().to_owned()
}

/// `e^{i(phi_1 - phi_2)}` on the two-island space.
fn phase_difference(n_cutoff: usize) -> Mat<C64> {
    let e = raise(n_cutoff);
    kron(&e, &adjoint(&e))
}

/// `sin(j phi_-)` from powers of `e^{i phi_-}`.
fn sin_multiple(u: &Mat<C64>, j: usize) -> Mat<C64> {
    let mut p = u.clone();
    for _ in 1..j {
        p = linalg::gemm(p.as_ref(), u.as_ref());
    }
    let ph = adjoint(&p);
    Mat::from_fn(p.nrows(), p.ncols(), |a, b| (p[(a, b)] - ph[(a, b)]) / (2.0 * I))
}

/// The three-term series
/// `phi_- ~ (3/2) sin phi_- - (3/10) sin 2 phi_- + (1/30) sin 3 phi_-`.
pub fn phi_minus_operator(n_cutoff: usize) -> Mat<C64> {
    let u = phase_difference(n_cutoff);
    let (s1, s2, s3) = (sin_multiple(&u, 1), sin_multiple(&u, 2), sin_multiple(&u, 3));
    Mat::from_fn(u.nrows(), u.ncols(), |a, b| s1[(a, b)] * 1.5 - s2[(a, b)] * 0.3 + s3[(a, b)] / 30.0)
}

/// The same series as a scalar function.
pub fn phi_minus_series(phi: f64) -> f64 {
    1.5 * phi.sin() - 0.3 * (2.0 * phi).sin() + (3.0 * phi).sin() / 30.0
}

/// Charge-basis Hamiltonian of the two islands.
pub fn qubit_hamiltonian(spec: &FluxQubitSpec) -> Result<Mat<C64>> {
    spec.validate()?;
    let nc = spec.n_cutoff;
    let n = charges(nc);
    let d = n.len();
    let a = spec.alpha_j;
    let pref = 4.0 * spec.ec / (1.0 + 2.0 * a);
    let e = raise(nc);
    let id = linalg::identity(d);
    let cos1 = {
        let k = kron(&e, &id);
        let kh = adjoint(&k);
        Mat::from_fn(d * d, d * d, |i, j| (k[(i, j)] + kh[(i, j)]) * 0.5)
    };
    let cos2 = {
        let k = kron(&id, &e);
        let kh = adjoint(&k);
        Mat::from_fn(d * d, d * d, |i, j| (k[(i, j)] + kh[(i, j)]) * 0.5)
    };
    let u = phase_difference(nc);
    let phase = C64::new(0.0, 2.0 * std::f64::consts::PI * spec.f_bias).exp();
    let mut h = Mat::from_fn(d * d, d * d, |i, j| {
        let third = 0.5 * (phase * u[(i, j)] + (phase * u[(j, i)]).conj());
        -spec.ej * (cos1[(i, j)] + cos2[(i, j)] + third * a)
    });
    for i in 0..d {
        for j in 0..d {
            let (n1, n2) = (n[i], n[j]);
            h[(i * d + j, i * d + j)] += C64::from(pref * ((1.0 + a) * (n1 * n1 + n2 * n2) + 2.0 * a * n1 * n2));
        }
    }
    if let Some(l_ind) = spec.line_renormalization {
        let p = phi_minus_operator(nc);
        let p2 = linalg::gemm(p.as_ref(), p.as_ref());
        let c = 0.125 / l_ind;
        h += Mat::from_fn(d * d, d * d, |i, j| p2[(i, j)] * c);
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct QubitSpectrum {
    pub levels: Vec<f64>,
    pub omega_at: f64,
    /// Columns are eigenvectors in the charge basis, ascending energy.
    pub vectors: Mat<C64>,
}

fn diagonalize(spec: &FluxQubitSpec) -> Result<QubitSpectrum> {
    let h = qubit_hamiltonian(spec)?;
    let (levels, vectors) = if spec.is_real() {
        let hr = Mat::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)].re);
        let (vals, vecs) = linalg::symmetric_eigen(hr.as_ref());
        (vals, Mat::from_fn(vecs.nrows(), vecs.ncols(), |i, j| C64::from(vecs[(i, j)])))
    } else {
        linalg::hermitian_eigen(h.as_ref())
    };
    Ok(QubitSpectrum { omega_at: levels[1] - levels[0], levels, vectors })
}

/// Lowest levels and gap, checked against a run with two more charge states
/// per island.
pub fn qubit_spectrum(spec: &FluxQubitSpec) -> Result<QubitSpectrum> {
    let s = diagonalize(spec)?;
    let bigger = diagonalize(&FluxQubitSpec { n_cutoff: spec.n_cutoff + 2, ..*spec })?;
    let rel = ((bigger.omega_at - s.omega_at) / s.omega_at).abs();
    if rel > 1e-4 {
        return Err(Error::Convergence { what: "charge-basis gap".into(), residual: rel });
    }
    Ok(s)
}

/// `|<0|phi_-|1>|`.
pub fn transition_element(spec: &FluxQubitSpec, spectrum: &QubitSpectrum) -> f64 {
    let p = phi_minus_operator(spec.n_cutoff);
    let v = &spectrum.vectors;
    let dim = v.nrows();
    let mut acc = ZERO;
    for i in 0..dim {
        let mut row = ZERO;
        for j in 0..dim {
            if p[(i, j)] != ZERO {
                row += p[(i, j)] * v[(j, 1)];
            }
        }
        acc += v[(i, 0)].conj() * row;
    }
    acc.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub alpha_j: f64,
    pub omega_at: f64,
    pub m01: f64,
    pub g_eff: f64,
    pub ratio: f64,
    /// `g_eff / omega_at >= 0.25`.
    pub usc: bool,
}

pub fn coupling_point(spec: &FluxQubitSpec, line: &LineCouplingSpec) -> Result<CouplingPoint> {
    let s = qubit_spectrum(spec)?;
    let m01 = transition_element(spec, &s);
    let g_eff = line.lambda() * m01;
    let ratio = g_eff / s.omega_at;
    Ok(CouplingPoint { alpha_j: spec.alpha_j, omega_at: s.omega_at, m01, g_eff, ratio, usc: ratio >= 0.25 })
}

/// Coupling versus junction ratio over a grid of `alpha_j` values.
pub fn coupling_curve(base: &FluxQubitSpec, grid: &[f64], line: &LineCouplingSpec) -> Result<Vec<CouplingPoint>> {
    grid.iter().map(|&a| coupling_point(&FluxQubitSpec { alpha_j: a, ..*base }, line)).collect()
}

/// First `alpha_j` where `g_eff/omega_at` reaches 0.25, by linear
/// interpolation between grid points.
pub fn usc_crossing(curve: &[CouplingPoint]) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.ratio < 0.25 && b.ratio >= 0.25 {
            Some(a.alpha_j + (0.25 - a.ratio) / (b.ratio - a.ratio) * (b.alpha_j - a.alpha_j))
        } else {
            None
        }
    })
}
