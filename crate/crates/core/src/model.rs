//! The spin-boson model as a qubit attached to a chain of harmonic
//! oscillators, expressed in the chain's normal modes.
//!
//! The chain is clamped on both sides (`x_{-1} = x_L = 0`), which yields
//! momenta `k_m = pi m / (L + 1)` and the sine transform
//! `S[m][i] = sqrt(2/(L+1)) sin(k_m (i+1))`.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, I, ONE, ZERO};
use crate::mps::{annihilation, number_operator, MpoOperator, MpoTensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Number of oscillators `L`.
    pub sites: usize,
    pub omega0: f64,
    /// Fock cutoff per mode.
    pub n_max: usize,
}

impl ChainSpec {
    pub fn new(sites: usize, omega0: f64, n_max: usize) -> Result<Self> {
        let c = ChainSpec { sites, omega0, n_max };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::domain(format!("chain needs L >= 2, got {}", self.sites)));
        }
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::domain(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if self.n_max < 1 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        Ok(())
    }
}

/// Normal modes of the clamped chain.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub omega0: f64,
    pub k_values: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `S[m][i]`, mode `m` by site `i`. Orthogonal and symmetric.
    pub transform: Mat<f64>,
    /// Ultraviolet scale entering the renormalized qubit frequency,
    /// `sqrt(2) omega0` (below the band edge `2 omega0`).
    pub omega_c: f64,
}

impl ModeBasis {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Median spacing between neighbouring mode frequencies.
    pub fn mode_spacing(&self) -> f64 {
        let mut d: Vec<f64> = self.frequencies.windows(2).map(|w| w[1] - w[0]).collect();
        d.sort_by(f64::total_cmp);
        d[d.len() / 2]
    }

    /// Local spacing around the mode closest to `omega`.
    pub fn spacing_near(&self, omega: f64) -> f64 {
        let w = &self.frequencies;
        let j = nearest_index(w, omega);
        let lo = j.saturating_sub(1);
        let hi = (j + 1).min(w.len() - 1);
        (w[hi] - w[lo]) / (hi - lo) as f64
    }

    /// Largest group velocity `d omega / dk`, equal to `omega0`.
    pub fn max_group_velocity(&self) -> f64 {
        self.omega0
    }
}

pub(crate) fn nearest_index(values: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (j, v) in values.iter().enumerate() {
        if (v - x).abs() < (values[best] - x).abs() {
            best = j;
        }
    }
    best
}

pub fn build_modes(chain: &ChainSpec) -> Result<ModeBasis> {
    chain.validate()?;
    let l = chain.sites;
    let k_values: Vec<f64> =
        (1..=l).map(|m| std::f64::consts::PI * m as f64 / (l + 1) as f64).collect();
    let frequencies = k_values.iter().map(|k| chain.omega0 * (2.0 - 2.0 * k.cos()).sqrt()).collect();
    let norm = (2.0 / (l + 1) as f64).sqrt();
    let transform = Mat::from_fn(l, l, |m, i| norm * (k_values[m] * (i + 1) as f64).sin());
    Ok(ModeBasis {
        omega0: chain.omega0,
        k_values,
        frequencies,
        transform,
        omega_c: std::f64::consts::SQRT_2 * chain.omega0,
    })
}

/// How the qubit couples to the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    /// Galvanic coupling to the flux difference across the cell ending at
    /// `i_q`: `O_x = x_{i_q} - x_{i_q - 1}` with the grounded wall
    /// `x_{-1} = 0`.
    Flux,
    /// Capacitive coupling to the charge `O_p = p_{i_q}`.
    Charge,
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingKind::Flux => "flux",
            CouplingKind::Charge => "charge",
        })
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flux" => Ok(CouplingKind::Flux),
            "charge" => Ok(CouplingKind::Charge),
            other => Err(Error::domain(format!("unknown coupling kind '{other}'"))),
        }
    }
}

/// Per-unit-`g` couplings `u_k`, chosen so that
/// `sum_k (u_k^* a_k + u_k a_k^dag)` is the position-space operator `O`.
pub fn couplings(basis: &ModeBasis, kind: CouplingKind, i_q: usize) -> Result<Vec<C64>> {
    let l = basis.len();
    if i_q >= l {
        return Err(Error::InvalidSite { site: i_q, sites: l });
    }
    let s = &basis.transform;
    let w0 = basis.omega0;
    Ok((0..l)
        .map(|m| {
            let wk = basis.frequencies[m];
            match kind {
                CouplingKind::Flux => {
                    let below = if i_q == 0 { 0.0 } else { s[(m, i_q - 1)] };
                    C64::from((s[(m, i_q)] - below) * (w0 / (2.0 * wk)).sqrt())
                }
                CouplingKind::Charge => I * s[(m, i_q)] * (wk / (2.0 * w0)).sqrt(),
            }
        })
        .collect())
}

/// Result of the log-log fit `J(omega) ~ 2 pi alpha omega^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFit {
    pub alpha: f64,
    pub exponent: f64,
    pub modes_used: usize,
}

#[derive(Debug, Clone)]
pub struct SpinBosonModel {
    pub chain: ChainSpec,
    pub basis: ModeBasis,
    pub omega_at: f64,
    pub epsilon: f64,
    pub g: f64,
    pub kind: CouplingKind,
    pub i_q: usize,
    /// Couplings per unit `g`.
    pub u: Vec<C64>,
}

impl SpinBosonModel {
    pub fn new(
        chain: ChainSpec,
        omega_at: f64,
        epsilon: f64,
        g: f64,
        kind: CouplingKind,
        i_q: usize,
    ) -> Result<Self> {
        if !omega_at.is_finite() || omega_at < 0.0 {
            return Err(Error::domain(format!("omega_at must be non-negative, got {omega_at}")));
        }
        if !g.is_finite() || !epsilon.is_finite() {
            return Err(Error::domain("g and epsilon must be finite"));
        }
        let basis = build_modes(&chain)?;
        let u = couplings(&basis, kind, i_q)?;
        Ok(SpinBosonModel { chain, basis, omega_at, epsilon, g, kind, i_q, u })
    }

    pub fn with_g(&self, g: f64) -> Self {
        SpinBosonModel { g, ..self.clone() }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        SpinBosonModel { epsilon, ..self.clone() }
    }

    pub fn modes(&self) -> usize {
        self.chain.sites
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        let mut d = vec![2];
        d.extend(std::iter::repeat(self.chain.n_max + 1).take(self.modes()));
        d
    }

    /// Sampled spectral function `(omega_k, J(omega_k))` over the modes that
    /// actually couple, per unit `g^2` times `g^2`.
    pub fn spectral_samples(&self) -> Vec<(f64, f64)> {
        spectral_samples(&self.basis, &self.u, self.g)
    }

    pub fn spectral_fit(&self) -> Result<SpectralFit> {
        spectral_alpha(self)
    }

    /// Coupling that gives the requested fitted strength, keeping everything
    /// else fixed.
    pub fn g_for_alpha(&self, alpha: f64) -> Result<f64> {
        let unit = spectral_alpha(&self.with_g(1.0))?;
        if alpha < 0.0 {
            return Err(Error::domain("alpha must be non-negative"));
        }
        Ok((alpha / unit.alpha).sqrt())
    }

    /// `J(omega)` linearly interpolated between sampled modes.
    pub fn spectral_density_at(&self, omega: f64) -> Result<f64> {
        let s = self.spectral_samples();
        let (first, last) = (s[0].0, s[s.len() - 1].0);
        if omega < first || omega > last {
            return Err(Error::domain(format!(
                "frequency {omega} outside the sampled band [{first}, {last}]"
            )));
        }
        for w in s.windows(2) {
            if omega <= w[1].0 {
                let t = (omega - w[0].0) / (w[1].0 - w[0].0);
                return Ok(w[0].1 + t * (w[1].1 - w[0].1));
            }
        }
        Ok(s[s.len() - 1].1)
    }

    /// Golden-rule prediction `J(omega_at)/2` used in decay fits.
    pub fn markovian_gamma(&self) -> Result<f64> {
        Ok(0.5 * self.spectral_density_at(self.omega_at)?)
    }

    /// `g^2 |u_k|^2 / omega_k^2`, exact for `omega_at = 0`.
    pub fn analytic_cat_occupations(&self) -> Vec<f64> {
        analytic_cat_occupations(self)
    }

    /// Energy of the displaced cat ground state at `omega_at = 0`,
    /// `-g^2 sum_k |u_k|^2 / omega_k` (relative to the vacuum) plus the bias.
    pub fn cat_energy(&self) -> f64 {
        let shift: f64 = self
            .u
            .iter()
            .zip(&self.basis.frequencies)
            .map(|(u, w)| u.norm_sqr() / w)
            .sum();
        -self.g * self.g * shift - 0.5 * self.epsilon.abs()
    }

    /// Local Hamiltonian of the qubit, `(omega_at/2) sz + (eps/2) sx`, in the
    /// basis (ground, excited).
    pub fn qubit_hamiltonian(&self) -> Mat<C64> {
        let mut h = pauli_z();
        h *= faer::Scale(C64::from(0.5 * self.omega_at));
        let mut x = pauli_x();
        x *= faer::Scale(C64::from(0.5 * self.epsilon));
        h + x
    }

    fn mode_ops(&self, k: usize) -> (Mat<C64>, Mat<C64>) {
        let d = self.chain.n_max + 1;
        let a = annihilation(d);
        let u = self.u[k];
        let b = Mat::from_fn(d, d, |i, j| u.conj() * a[(i, j)] + u * a[(j, i)]);
        let mut n = number_operator(d);
        n *= faer::Scale(C64::from(self.basis.frequencies[k]));
        (n, b)
    }

    /// `H_0 = sum_k omega_k n_k + (omega_at/2) sz + (eps/2) sx` as a bond-2
    /// operator.
    pub fn h0_mpo(&self) -> MpoOperator {
        self.h_terms_mpo(false, 0.0)
    }

    /// `H_I = sx sum_k (u_k^* a_k + u_k a_k^dag)`, so that `H = H_0 + g H_I`.
    pub fn hi_mpo(&self) -> MpoOperator {
        let l = self.modes();
        let d = self.chain.n_max + 1;
        let mut ts = Vec::with_capacity(l + 1);
        let mut q = MpoTensor::new(1, 1, 2);
        q.push(0, 0, pauli_x());
        ts.push(q);
        for k in 0..l {
            let (_, b) = self.mode_ops(k);
            let left = if k == 0 { 1 } else { 2 };
            let right = if k == l - 1 { 1 } else { 2 };
            let mut t = MpoTensor::new(left, right, d);
            // bond state 0: waiting for a mode operator, 1: already placed
            let fin = if k == l - 1 { 0 } else { 1 };
            t.push(0, fin, b);
            if k < l - 1 {
                t.push(0, 0, linalg::identity(d));
            }
            if k > 0 && k < l - 1 {
                t.push(1, 1, linalg::identity(d));
            } else if k > 0 {
                t.push(1, 0, linalg::identity(d));
            }
            ts.push(t);
        }
        MpoOperator::new(ts).expect("valid interaction operator").hermitian()
    }

    /// Full Hamiltonian as a bond-3 operator.
    pub fn h_mpo(&self) -> MpoOperator {
        self.h_terms_mpo(true, self.g)
    }

    fn h_terms_mpo(&self, with_interaction: bool, g: f64) -> MpoOperator {
        let l = self.modes();
        let d = self.chain.n_max + 1;
        // bond states: 0 = nothing placed, 1 = sx placed awaiting a mode
        // operator, 2 = all placed
        let (nb, wait, done) = if with_interaction { (3, 1, 2) } else { (2, 2, 1) };
        let mut ts = Vec::with_capacity(l + 1);
        let mut q = MpoTensor::new(1, nb, 2);
        q.push(0, 0, linalg::identity(2));
        q.push(0, done, self.qubit_hamiltonian());
        if with_interaction {
            let mut x = pauli_x();
            x *= faer::Scale(C64::from(g));
            q.push(0, wait, x);
        }
        ts.push(q);
        for k in 0..l {
            let (n, b) = self.mode_ops(k);
            let last = k == l - 1;
            let right = if last { 1 } else { nb };
            let to = |state: usize| if last { 0 } else { state };
            let mut t = MpoTensor::new(nb, right, d);
            if !last {
                t.push(0, 0, linalg::identity(d));
                if with_interaction {
                    t.push(wait, wait, linalg::identity(d));
                }
            }
            t.push(0, to(done), n);
            if with_interaction {
                t.push(wait, to(done), b);
            }
            t.push(done, to(done), linalg::identity(d));
            ts.push(t);
        }
        MpoOperator::new(ts).expect("valid hamiltonian operator").hermitian()
    }

    /// Exact `exp(c H_I)` as a bond-2 operator, using
    /// `exp(c sx B) = P+ exp(cB) + P- exp(-cB)` with commuting mode terms
    /// `B = sum_k B_k`.
    pub fn interaction_exponential_mpo(&self, c: C64) -> MpoOperator {
        let l = self.modes();
        let d = self.chain.n_max + 1;
        let mut ts = Vec::with_capacity(l + 1);
        let mut q = MpoTensor::new(1, 2, 2);
        let half = C64::from(0.5);
        q.push(0, 0, Mat::from_fn(2, 2, |_, _| half));
        q.push(0, 1, Mat::from_fn(2, 2, |i, j| if i == j { half } else { -half }));
        ts.push(q);
        for k in 0..l {
            let (_, b) = self.mode_ops(k);
            let plus = linalg::hermitian_expm(b.as_ref(), c);
            let minus = linalg::hermitian_expm(b.as_ref(), -c);
            let right = if k == l - 1 { 1 } else { 2 };
            let mut t = MpoTensor::new(2, right, d);
            t.push(0, 0, plus);
            t.push(1, right - 1, minus);
            ts.push(t);
        }
        MpoOperator::new(ts).expect("valid exponential operator")
    }
}

pub fn pauli_x() -> Mat<C64> {
    Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn pauli_y() -> Mat<C64> {
    // basis (ground, excited) = (sz = -1, sz = +1)
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => I,
        (1, 0) => -I,
        _ => ZERO,
    })
}

/// `sz` in the basis (ground, excited).
pub fn pauli_z() -> Mat<C64> {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => -ONE,
        (1, 1) => ONE,
        _ => ZERO,
    })
}

fn spectral_samples(basis: &ModeBasis, u: &[C64], g: f64) -> Vec<(f64, f64)> {
    let umax = u.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    let coupled: Vec<usize> = (0..u.len()).filter(|&k| u[k].norm_sqr() > 1e-12 * umax).collect();
    let w: Vec<f64> = coupled.iter().map(|&k| basis.frequencies[k]).collect();
    let n = w.len();
    coupled
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let dw = if n < 2 {
                1.0
            } else if j == 0 {
                w[1] - w[0]
            } else if j == n - 1 {
                w[n - 1] - w[n - 2]
            } else {
                0.5 * (w[j + 1] - w[j - 1])
            };
            let j_val = 2.0 * std::f64::consts::PI * g * g * u[k].norm_sqr() / dw;
            (w[j], j_val)
        })
        .collect()
}

/// Fits `log J = log(2 pi alpha) + s log omega` over the coupled modes in
/// the lower half of the band.
pub fn spectral_alpha(model: &SpinBosonModel) -> Result<SpectralFit> {
    let samples = spectral_samples(&model.basis, &model.u, 1.0);
    let wmax = model.basis.frequencies.last().copied().unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = samples
        .into_iter()
        .filter(|(w, j)| *w <= 0.5 * wmax && *j > 0.0)
        .map(|(w, j)| (w.ln(), j.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Fit(format!(
            "spectral fit needs at least 4 coupled modes in the lower half band, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let s = sxy / sxx;
    let intercept = my - s * mx;
    let alpha_unit = intercept.exp() / (2.0 * std::f64::consts::PI);
    Ok(SpectralFit { alpha: model.g * model.g * alpha_unit, exponent: s, modes_used: pts.len() })
}

/// `alpha = 2 (g_eff / omega_at)^2`.
pub fn alpha_from_geff(g_eff: f64, omega_at: f64) -> Result<f64> {
    if !(omega_at > 0.0) {
        return Err(Error::domain("omega_at must be positive"));
    }
    Ok(2.0 * (g_eff / omega_at).powi(2))
}

/// Adiabatically renormalized qubit frequency
/// `omega_at (0.5 omega_at / omega_c)^(alpha / (1 - alpha))`.
pub fn effective_frequency(omega_at: f64, omega_c: f64, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::domain(format!(
            "renormalized frequency requires 0 <= alpha < 1, got {alpha}"
        )));
    }
    Ok(omega_at * (0.5 * omega_at / omega_c).powf(alpha / (1.0 - alpha)))
}

pub fn analytic_cat_occupations(model: &SpinBosonModel) -> Vec<f64> {
    let g2 = model.g * model.g;
    model
        .u
        .iter()
        .zip(&model.basis.frequencies)
        .map(|(u, w)| g2 * u.norm_sqr() / (w * w))
        .collect()
}
