//! Measurements on tensor-train states and on time series produced by
//! evolutions.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ZERO};
use crate::model::{ModeBasis, SpinBosonModel};
use crate::mps::{annihilation, MpsState};

/// Qubit Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bloch {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl Bloch {
    /// Excitation probability `(sz + 1)/2`.
    pub fn pz(&self) -> f64 {
        0.5 * (self.sz + 1.0)
    }

    /// `(sx + 1)/2`.
    pub fn px(&self) -> f64 {
        0.5 * (self.sx + 1.0)
    }
}

pub fn bloch_from_density(rho: &Mat<C64>) -> Bloch {
    // basis (ground, excited); sz = |e><e| - |g><g|
    let off = rho[(1, 0)];
    Bloch { sx: 2.0 * off.re, sy: -2.0 * off.im, sz: (rho[(1, 1)] - rho[(0, 0)]).re }
}

pub fn qubit_bloch(state: &MpsState) -> Bloch {
    bloch_from_density(&state.site_density_matrix(0))
}

fn occupation(rho: &Mat<C64>) -> f64 {
    (0..rho.nrows()).map(|n| n as f64 * rho[(n, n)].re).sum()
}

/// `<a_k^dag a_k>` for every mode.
pub fn mode_occupations(state: &MpsState) -> Vec<f64> {
    state.site_density_matrices()[1..].iter().map(occupation).collect()
}

/// Bloch vector and mode occupations from a single environment sweep.
pub fn local_observables(state: &MpsState) -> (Bloch, Vec<f64>) {
    let rhos = state.site_density_matrices();
    (bloch_from_density(&rhos[0]), rhos[1..].iter().map(occupation).collect())
}

/// Dimensionless mode quadratures `x_k = sqrt(w0/2w_k)(a + a^dag)` and
/// `p_k = i sqrt(w_k/2w0)(a^dag - a)` on `d` Fock levels.
pub fn quadrature_operators(basis: &ModeBasis, k: usize, d: usize) -> (Mat<C64>, Mat<C64>) {
    let a = annihilation(d);
    let r = basis.frequencies[k] / basis.omega0;
    let cx = (0.5 / r).sqrt();
    let cp = (0.5 * r).sqrt();
    let x = Mat::from_fn(d, d, |i, j| (a[(i, j)] + a[(j, i)].conj()) * cx);
    let p = Mat::from_fn(d, d, |i, j| (a[(j, i)].conj() - a[(i, j)]) * I * cp);
    (x, p)
}

fn trace_rho(rho: &Mat<C64>, op: &Mat<C64>) -> f64 {
    let mut acc = ZERO;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            acc += rho[(i, j)] * op[(j, i)];
        }
    }
    acc.re
}

#[derive(Debug, Clone)]
pub struct QuadratureMoments {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `<x_k x_l>`, symmetric.
    pub xx: Mat<f64>,
    /// `<p_k p_l>`, symmetric.
    pub pp: Mat<f64>,
}

/// First moments only; cheap.
pub fn first_moments(state: &MpsState, basis: &ModeBasis) -> (Vec<f64>, Vec<f64>) {
    let rhos = state.site_density_matrices();
    let d = rhos[1].nrows();
    (0..basis.len())
        .map(|k| {
            let (x, p) = quadrature_operators(basis, k, d);
            (trace_rho(&rhos[k + 1], &x), trace_rho(&rhos[k + 1], &p))
        })
        .unzip()
}

/// First and second quadrature moments of all modes. The cost is quadratic
/// in the number of modes.
pub fn quadrature_moments(state: &MpsState, basis: &ModeBasis) -> QuadratureMoments {
    let l = basis.len();
    let d = state.site(1).phys();
    let sites: Vec<usize> = (1..=l).collect();
    let (xs, ps): (Vec<_>, Vec<_>) = (0..l).map(|k| quadrature_operators(basis, k, d)).unzip();
    let cx = state.pair_correlations(&sites, &xs);
    let cp = state.pair_correlations(&sites, &ps);
    let (x, p) = first_moments(state, basis);
    QuadratureMoments {
        x,
        p,
        xx: Mat::from_fn(l, l, |i, j| cx[(i, j)].re),
        pp: Mat::from_fn(l, l, |i, j| cp[(i, j)].re),
    }
}

/// `n_i = (<x_i^2> + <p_i^2> - 1) / 2` on every chain site.
pub fn site_occupations(m: &QuadratureMoments, basis: &ModeBasis) -> Vec<f64> {
    let l = basis.len();
    let s = &basis.transform;
    (0..l)
        .map(|i| {
            let mut acc = 0.0;
            for k in 0..l {
                let sk = s[(k, i)];
                for q in 0..l {
                    acc += sk * s[(q, i)] * (m.xx[(k, q)] + m.pp[(k, q)]);
                }
            }
            0.5 * (acc - 1.0)
        })
        .collect()
}

/// Site occupations of the mode vacuum (the chain's own ground state).
pub fn vacuum_site_occupations(basis: &ModeBasis) -> Vec<f64> {
    let l = basis.len();
    let s = &basis.transform;
    (0..l)
        .map(|i| {
            let sum: f64 = (0..l)
                .map(|k| {
                    let r = basis.frequencies[k] / basis.omega0;
                    s[(k, i)].powi(2) * (0.5 / r + 0.5 * r)
                })
                .sum();
            0.5 * (sum - 1.0)
        })
        .collect()
}

/// Position of every site from mode first moments.
pub fn site_positions(x_modes: &[f64], basis: &ModeBasis) -> Vec<f64> {
    let l = basis.len();
    (0..l).map(|i| (0..l).map(|k| basis.transform[(k, i)] * x_modes[k]).sum()).collect()
}

/// Current proxy `<x_{i+1} - x_i>` on each of the `L - 1` bonds.
pub fn site_current(state: &MpsState, basis: &ModeBasis) -> Vec<f64> {
    let (x, _) = first_moments(state, basis);
    currents_from_positions(&site_positions(&x, basis))
}

pub fn currents_from_positions(pos: &[f64]) -> Vec<f64> {
    pos.windows(2).map(|w| w[1] - w[0]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileReference {
    Absolute,
    RelativeToInitial,
    RelativeToGround,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonProfile {
    pub n_k: Vec<f64>,
    pub n_i: Vec<f64>,
    pub currents: Vec<f64>,
    pub reference: ProfileReference,
}

impl PhotonProfile {
    pub fn measure(state: &MpsState, basis: &ModeBasis) -> Self {
        let m = quadrature_moments(state, basis);
        let n_k = mode_occupations(state);
        let n_i = site_occupations(&m, basis);
        let currents = currents_from_positions(&site_positions(&m.x, basis));
        PhotonProfile { n_k, n_i, currents, reference: ProfileReference::Absolute }
    }

    /// `self - reference`, componentwise.
    pub fn relative_to(&self, reference: &PhotonProfile, tag: ProfileReference) -> Self {
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        PhotonProfile {
            n_k: sub(&self.n_k, &reference.n_k),
            n_i: sub(&self.n_i, &reference.n_i),
            currents: sub(&self.currents, &reference.currents),
            reference: tag,
        }
    }
}

/// Exponential relaxation `P_z(t) = a exp(-gamma t) + asymptote`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub gamma: f64,
    pub amplitude: f64,
    pub asymptote: f64,
    /// Golden-rule reference `J(omega_at)/2`.
    pub markovian_gamma: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Least squares for fixed `gamma`: best `(a, c)` with `c` clamped to
/// `[0, 1]`, and the sum of squared residuals.
fn linear_part(t: &[f64], y: &[f64], gamma: f64) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let e: Vec<f64> = t.iter().map(|&t| (-gamma * t).exp()).collect();
    let (se, see, sy, sey) = e.iter().zip(y).fold((0.0, 0.0, 0.0, 0.0), |acc, (e, y)| {
        (acc.0 + e, acc.1 + e * e, acc.2 + y, acc.3 + e * y)
    });
    let det = n * see - se * se;
    let (mut a, mut c) = if det.abs() > 1e-300 {
        ((n * sey - se * sy) / det, (see * sy - se * sey) / det)
    } else {
        (0.0, sy / n)
    };
    if !(0.0..=1.0).contains(&c) {
        c = c.clamp(0.0, 1.0);
        a = if see > 0.0 { (sey - c * se) / see } else { 0.0 };
    }
    let sse = e.iter().zip(y).map(|(e, y)| (a * e + c - y).powi(2)).sum();
    (a, c, sse)
}

/// Fits `a exp(-gamma t) + c` to samples with `t >= t_min`, by variable
/// projection with a golden-section search in `log gamma`.
pub fn fit_exponential(times: &[f64], values: &[f64], t_min: f64) -> Result<(f64, f64, f64, f64, (f64, f64))> {
    let (t, y): (Vec<f64>, Vec<f64>) =
        times.iter().zip(values).filter(|(t, _)| **t >= t_min).map(|(t, y)| (*t, *y)).unzip();
    if t.len() < 4 {
        return Err(Error::Fit(format!("{} samples in the fit window", t.len())));
    }
    let span = t[t.len() - 1] - t[0];
    if !(span > 0.0) {
        return Err(Error::Fit("empty fit window".into()));
    }
    let t0 = t[0];
    let ts: Vec<f64> = t.iter().map(|x| x - t0).collect();
    let sse = |lg: f64| linear_part(&ts, &y, lg.exp()).2;
    // coarse scan over rates from 1e-3 to 1e3 inverse window lengths
    let (lo, hi) = ((1e-3 / span).ln(), (1e3 / span).ln());
    let n_grid = 120;
    let grid: Vec<f64> = (0..=n_grid).map(|i| lo + (hi - lo) * i as f64 / n_grid as f64).collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| sse(grid[i]).total_cmp(&sse(grid[j])))
        .unwrap();
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n_grid)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = sse(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = sse(x2);
        }
    }
    let gamma = (0.5 * (a + b)).exp();
    let (amp, c, s) = linear_part(&ts, &y, gamma);
    if !s.is_finite() {
        return Err(Error::Fit("non-finite residual".into()));
    }
    // amplitude referred back to t = 0
    let amp0 = amp * (gamma * t0).exp();
    Ok((gamma, amp0, c, (s / ts.len() as f64).sqrt(), (t0, t[t.len() - 1])))
}

/// Decay fit of an emission run; the first `2/omega_at` are excluded.
pub fn decay_fit(times: &[f64], pz: &[f64], model: &SpinBosonModel) -> Result<DecayFit> {
    let transient = if model.omega_at > 0.0 { 2.0 / model.omega_at } else { 0.0 };
    let (gamma, amplitude, asymptote, residual, window) = fit_exponential(times, pz, transient)?;
    let markovian_gamma = model.markovian_gamma()?;
    Ok(DecayFit { gamma, amplitude, asymptote, markovian_gamma, window, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionSpectrum {
    pub omega_peak: f64,
    pub peak_index: usize,
    /// Positive part of the relative occupations, normalized to unit sum.
    pub spectrum: Vec<f64>,
    /// Largest single-bin share of the total weight.
    pub max_bin_fraction: f64,
}

/// Normalized spectrum of emitted photons over a reference state.
pub fn emission_peak(n_k: &[f64], reference: &[f64], basis: &ModeBasis) -> Result<EmissionSpectrum> {
    if n_k.len() != reference.len() || n_k.len() != basis.len() {
        return Err(Error::shape("occupation lists differ in length"));
    }
    let rel: Vec<f64> = n_k.iter().zip(reference).map(|(a, b)| (a - b).max(0.0)).collect();
    let total: f64 = rel.iter().sum();
    if !(total > 0.0) {
        return Err(Error::domain("emission spectrum has no positive weight"));
    }
    let spectrum: Vec<f64> = rel.iter().map(|x| x / total).collect();
    let peak_index = (0..spectrum.len()).max_by(|&i, &j| spectrum[i].total_cmp(&spectrum[j])).unwrap();
    Ok(EmissionSpectrum {
        omega_peak: basis.frequencies[peak_index],
        peak_index,
        max_bin_fraction: spectrum[peak_index],
        spectrum,
    })
}

/// A `P_x(t)` trace from one biased emission run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTrace {
    pub times: Vec<f64>,
    pub px: Vec<f64>,
    pub truncation_error: f64,
}

impl BiasTrace {
    /// Mean over the final `fraction` of the run.
    pub fn tail_average(&self, fraction: f64) -> f64 {
        let t_end = *self.times.last().unwrap_or(&0.0);
        let t_start = t_end * (1.0 - fraction);
        let tail: Vec<f64> =
            self.times.iter().zip(&self.px).filter(|(t, _)| **t >= t_start).map(|(_, p)| *p).collect();
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityResult {
    pub alpha: f64,
    /// Response `-dP_x/d epsilon`, positive when the bias pulls the qubit
    /// into the state it favours.
    pub chi_x: f64,
    /// Raw central difference `dP_x/d epsilon`.
    pub dpx_depsilon: f64,
    pub epsilon_used: f64,
    pub px_plus: f64,
    pub px_minus: f64,
    pub low_signal: bool,
}

/// Central-difference susceptibility from runs at `+epsilon` and
/// `-epsilon`, averaging `P_x` over the final `tail_fraction` of each run.
pub fn susceptibility(
    model: &SpinBosonModel,
    epsilon: f64,
    tail_fraction: f64,
    mut run: impl FnMut(&SpinBosonModel) -> Result<BiasTrace>,
) -> Result<SusceptibilityResult> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("susceptibility needs a positive epsilon"));
    }
    let plus = run(&model.with_epsilon(epsilon))?;
    let minus = run(&model.with_epsilon(-epsilon))?;
    let (pp, pm) = (plus.tail_average(tail_fraction), minus.tail_average(tail_fraction));
    let d = (pp - pm) / (2.0 * epsilon);
    let noise = plus.truncation_error.max(minus.truncation_error).max(1e-12);
    let alpha = model.spectral_fit().map(|f| f.alpha).unwrap_or(f64::NAN);
    Ok(SusceptibilityResult {
        alpha,
        chi_x: -d,
        dpx_depsilon: d,
        epsilon_used: epsilon,
        px_plus: pp,
        px_minus: pm,
        low_signal: (pp - pm).abs() < 10.0 * noise,
    })
}

/// Least-squares `chi = a / omega_eff`; returns `a` and the largest relative
/// deviation of the data from the fit.
pub fn fit_inverse_frequency(omega_eff: &[f64], chi: &[f64]) -> Result<(f64, f64)> {
    if omega_eff.len() != chi.len() || chi.is_empty() {
        return Err(Error::shape("mismatched susceptibility data"));
    }
    let xs: Vec<f64> = omega_eff.iter().map(|w| 1.0 / w).collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(chi).map(|(x, y)| x * y).sum();
    let a = sxy / sxx;
    let worst = xs
        .iter()
        .zip(chi)
        .map(|(x, y)| ((a * x - y) / y).abs())
        .fold(0.0, f64::max);
    Ok((a, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::model::{build_modes, ChainSpec, CouplingKind};
    use crate::mps::testutil::random_state;

    fn basis(l: usize) -> ModeBasis {
        build_modes(&ChainSpec::new(l, 1.0, 2).unwrap()).unwrap()
    }

    #[test]
    fn bloch_of_product_states() {
        let s = MpsState::product([ZERO, ONE], &[0, 0], 2).unwrap();
        assert!((qubit_bloch(&s).pz() - 1.0).abs() < 1e-15);
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let s = MpsState::product([h, h], &[0, 0], 2).unwrap();
        let b = qubit_bloch(&s);
        assert!((b.sx - 1.0).abs() < 1e-15 && b.sz.abs() < 1e-15);
        let s = MpsState::product([h, -h * I], &[0, 0], 2).unwrap();
        assert!((qubit_bloch(&s).sy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_moments() {
        let b = basis(3);
        let s = MpsState::product([ONE, ZERO], &[0, 0, 0], 3).unwrap();
        let m = quadrature_moments(&s, &b);
        for k in 0..3 {
            let w = b.frequencies[k];
            assert!((m.xx[(k, k)] - 0.5 / w).abs() < 1e-14);
            assert!((m.pp[(k, k)] - 0.5 * w).abs() < 1e-14);
            assert!(m.x[k].abs() < 1e-15);
            for q in 0..3 {
                if q != k {
                    assert!(m.xx[(k, q)].abs() < 1e-15);
                }
            }
        }
        let n = site_occupations(&m, &b);
        let vac = vacuum_site_occupations(&b);
        for (a, v) in n.iter().zip(&vac) {
            assert!((a - v).abs() < 1e-13 && *v > 0.0);
        }
        assert!(site_current(&s, &b).iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn single_photon_site_bookkeeping() {
        // one photon in mode k adds (w0/w_k + w_k/w0)/2 site photons, which is
        // exactly 1 for the mode at w_k = w0 (k = pi/3, mode 2 of L = 5)
        let b = basis(5);
        assert!((b.frequencies[1] - 1.0).abs() < 1e-14);
        let vac = vacuum_site_occupations(&b);
        for k in 0..5 {
            let mut occ = [0usize; 5];
            occ[k] = 1;
            let s = MpsState::product([ONE, ZERO], &occ, 2).unwrap();
            let n = site_occupations(&quadrature_moments(&s, &b), &b);
            let extra: f64 = n.iter().zip(&vac).map(|(a, v)| a - v).sum();
            let r = b.frequencies[k];
            assert!((extra - 0.5 * (r + 1.0 / r)).abs() < 1e-10);
            if k == 1 {
                assert!((extra - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn site_and_mode_traces_agree() {
        let b = basis(3);
        let s = random_state(&[2, 3, 3, 3], 3, 17);
        let m = quadrature_moments(&s, &b);
        let n = site_occupations(&m, &b);
        let site_total: f64 = n.iter().map(|x| 2.0 * x + 1.0).sum();
        let mode_total: f64 = (0..3).map(|k| m.xx[(k, k)] + m.pp[(k, k)]).sum();
        assert!((site_total - mode_total).abs() < 1e-10);
    }

    #[test]
    fn fit_recovers_synthetic_exponential() {
        let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.83 * (-0.137 * t).exp() + 0.061).collect();
        let (g, a, c, r, _) = fit_exponential(&t, &y, 0.0).unwrap();
        assert!((g - 0.137).abs() < 1e-8, "{g}");
        assert!((a - 0.83).abs() < 1e-8 && (c - 0.061).abs() < 1e-8 && r < 1e-9);
        let (g, a, _, _, w) = fit_exponential(&t, &y, 5.0).unwrap();
        assert!((g - 0.137).abs() < 1e-8 && (a - 0.83).abs() < 1e-7 && w.0 >= 5.0);
    }

    #[test]
    fn fit_rejects_short_series() {
        assert!(matches!(fit_exponential(&[0.0, 1.0], &[1.0, 0.5], 0.0), Err(Error::Fit(_))));
    }

    #[test]
    fn emission_peak_of_single_photon() {
        let b = basis(5);
        let mut n = vec![0.0; 5];
        n[3] = 1.0;
        let e = emission_peak(&n, &[0.0; 5], &b).unwrap();
        assert_eq!(e.omega_peak, b.frequencies[3]);
        assert!((e.spectrum.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let scaled: Vec<f64> = n.iter().map(|x| 7.5 * x).collect();
        assert_eq!(emission_peak(&scaled, &[0.0; 5], &b).unwrap().peak_index, 3);
        assert!(emission_peak(&[0.0; 5], &[0.1; 5], &b).is_err());
    }

    #[test]
    fn inverse_frequency_fit_is_exact_on_exact_data() {
        let w = [0.3, 0.2, 0.1];
        let chi: Vec<f64> = w.iter().map(|w| 0.7 / w).collect();
        let (a, r) = fit_inverse_frequency(&w, &chi).unwrap();
        assert!((a - 0.7).abs() < 1e-14 && r < 1e-14);
    }

    #[test]
    fn susceptibility_uses_symmetric_runs() {
        let m = SpinBosonModel::new(ChainSpec::new(4, 1.0, 2).unwrap(), 0.3, 0.0, 0.0, CouplingKind::Flux, 0)
            .unwrap();
        let r = susceptibility(&m, 1e-3, 0.1, |mm| {
            let px = 0.5 - 2.0 * mm.epsilon;
            Ok(BiasTrace { times: vec![0.0, 1.0, 2.0], px: vec![px; 3], truncation_error: 0.0 })
        })
        .unwrap();
        assert!((r.dpx_depsilon + 2.0).abs() < 1e-10 && (r.chi_x - 2.0).abs() < 1e-10);
        assert!(!r.low_signal);
    }
}
