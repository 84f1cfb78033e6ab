//! Real- and imaginary-time evolution by symmetric splitting
//! `exp(H0 dt/2) exp(g H_I dt) exp(H0 dt/2)`.
//!
//! `H0` is a sum of single-site terms and is applied exactly. The interaction
//! step is done either with an Arnoldi approximation of the exponential in a
//! Krylov space of tensor trains, or with the exact bond-2 operator
//! `P+ exp(cB) + P- exp(-cB)`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::model::SpinBosonModel;
use crate::mps::{CompressionParams, MpoOperator, MpsState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeMode {
    Real,
    Imaginary,
}

impl TimeMode {
    /// Coefficient multiplying `H dt` in the exponent.
    pub fn coefficient(self, dt: f64) -> C64 {
        match self {
            TimeMode::Real => C64::new(0.0, -dt),
            TimeMode::Imaginary => C64::from(-dt),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub dt: f64,
    pub n_steps: usize,
    pub mode: TimeMode,
}

impl TrotterPlan {
    pub fn new(dt: f64, n_steps: usize, mode: TimeMode) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::domain(format!("dt must be positive, got {dt}")));
        }
        if n_steps < 1 {
            return Err(Error::domain("a plan needs at least one step"));
        }
        Ok(TrotterPlan { dt, n_steps, mode })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovParams {
    pub subspace_dim: usize,
    pub residual_tol: f64,
    pub compression: CompressionParams,
}

impl KrylovParams {
    pub fn new(subspace_dim: usize, residual_tol: f64, compression: CompressionParams) -> Result<Self> {
        if subspace_dim < 2 {
            return Err(Error::domain("Krylov subspace needs at least 2 vectors"));
        }
        Ok(KrylovParams { subspace_dim, residual_tol, compression })
    }
}

impl Default for KrylovParams {
    fn default() -> Self {
        KrylovParams { subspace_dim: 8, residual_tol: 1e-8, compression: CompressionParams::default() }
    }
}

/// How the interaction factor of a step is exponentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionSolver {
    Krylov,
    /// Exact bond-2 operator; cheaper for long chains.
    Factorized,
}

/// Outcome of one Arnoldi exponential.
#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub state: MpsState,
    pub residual: f64,
    pub dimension: usize,
    /// Relative weight discarded while compressing basis vectors and the
    /// recombined result.
    pub truncation: f64,
}

/// `sum_j c_j psi_j`, compressing after each addition.
pub fn combine(terms: &[(C64, &MpsState)], params: &CompressionParams) -> Result<(MpsState, f64)> {
    let Some(((c0, first), rest)) = terms.split_first() else {
        return Err(Error::shape("empty combination"));
    };
    let mut acc = (*first).clone();
    acc.scale(*c0);
    let mut err = 0.0;
    for (c, s) in rest {
        if *c == ZERO {
            continue;
        }
        let mut next = MpsState::linear_combination(&[(ONE, &acc), (*c, s)])?;
        err += next.compress_keep_norm(params);
        acc = next;
    }
    Ok((acc, err))
}

/// Approximates `exp(coefficient * op) |psi>` in a Krylov space built from
/// compressed tensor trains.
pub fn krylov_exp_apply(
    op: &MpoOperator,
    psi: &MpsState,
    coefficient: C64,
    params: &KrylovParams,
) -> Result<KrylovOutcome> {
    let beta = psi.norm();
    if coefficient == ZERO || beta == 0.0 {
        return Ok(KrylovOutcome { state: psi.clone(), residual: 0.0, dimension: 0, truncation: 0.0 });
    }
    let m = params.subspace_dim;
    let comp = &params.compression;
    let mut v0 = psi.clone();
    v0.scale(C64::from(1.0 / beta));
    let mut basis = vec![v0];
    let mut h = Mat::<C64>::zeros(m + 1, m);
    let mut truncation = 0.0;
    let mut residual = f64::INFINITY;
    let mut coeffs = Vec::new();
    for j in 0..m {
        let mut w = op.apply(&basis[j])?;
        truncation += w.compress_keep_norm(comp);
        for (i, vi) in basis.iter().enumerate() {
            let hij = vi.inner(&w)?;
            h[(i, j)] = hij;
            let mut next = MpsState::linear_combination(&[(ONE, &w), (-hij, vi)])?;
            truncation += next.compress_keep_norm(comp);
            w = next;
        }
        let hn = w.norm();
        h[(j + 1, j)] = C64::from(hn);
        let k = j + 1;
        let small = Mat::from_fn(k, k, |a, b| coefficient * h[(a, b)]);
        let e = linalg::expm(small.as_ref());
        coeffs = (0..k).map(|a| e[(a, 0)]).collect();
        residual = coefficient.norm() * hn * coeffs[k - 1].norm();
        if residual <= params.residual_tol || hn < 1e-13 {
            break;
        }
        if j + 1 < m {
            w.scale(C64::from(1.0 / hn));
            basis.push(w);
        }
    }
    if residual > params.residual_tol {
        return Err(Error::Convergence { what: "Krylov exponential".into(), residual });
    }
    let terms: Vec<(C64, &MpsState)> =
        coeffs.iter().zip(&basis).map(|(c, v)| (c * beta, v)).collect();
    let (state, err) = combine(&terms, comp)?;
    truncation += err;
    Ok(KrylovOutcome { state, residual, dimension: coeffs.len(), truncation })
}

/// One record per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: f64,
    /// Squared norm right before the final compression of the step.
    pub norm_before: f64,
    /// Energy `<H>` when measured at this step, NaN otherwise.
    pub energy: f64,
    pub max_bond: usize,
    /// Weight discarded during this step.
    pub step_truncation: f64,
    /// Accumulated over the whole evolution.
    pub truncation_error: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvolutionLog {
    pub records: Vec<StepRecord>,
}

impl EvolutionLog {
    pub fn push(&mut self, r: StepRecord) {
        debug_assert!(self.records.last().is_none_or(|p| r.time > p.time));
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest per-step norm loss beyond the discarded weight:
    /// `max(1 - n_before (1 - w) - w)`.
    pub fn excess_norm_loss(&self) -> f64 {
        self.records
            .iter()
            .map(|r| {
                let after = r.norm_before * (1.0 - r.step_truncation);
                (1.0 - after) - r.step_truncation
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Local maps `exp(c H0_site)` for every site.
fn local_h0_maps(model: &SpinBosonModel, c: C64) -> Vec<Mat<C64>> {
    let d = model.chain.n_max + 1;
    let mut maps = vec![linalg::hermitian_expm(model.qubit_hamiltonian().as_ref(), c)];
    for w in &model.basis.frequencies {
        maps.push(Mat::from_fn(d, d, |i, j| if i == j { (c * (w * i as f64)).exp() } else { ZERO }));
    }
    maps
}

/// Applies `exp(c H0 dt/2)` site by site; bonds are unchanged.
pub fn h0_half_step(state: &MpsState, model: &SpinBosonModel, dt: f64, mode: TimeMode) -> MpsState {
    let maps = local_h0_maps(model, mode.coefficient(0.5 * dt));
    apply_maps(state, &maps, mode)
}

fn apply_maps(state: &MpsState, maps: &[Mat<C64>], mode: TimeMode) -> MpsState {
    let mut out = state.clone();
    for (i, m) in maps.iter().enumerate() {
        match mode {
            TimeMode::Real => out.apply_local_unitary(i, m.as_ref()),
            TimeMode::Imaginary => out.apply_local(i, m.as_ref()),
        }
    }
    out
}

/// Reusable stepping machinery for a fixed model, mode and time step.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub model: SpinBosonModel,
    pub mode: TimeMode,
    pub dt: f64,
    pub solver: InteractionSolver,
    pub krylov: KrylovParams,
    /// Maximum number of dt halvings after a Krylov failure.
    pub max_halvings: usize,
    hi: MpoOperator,
    half_maps: Vec<Mat<C64>>,
    exp_int: Option<MpoOperator>,
}

impl Propagator {
    pub fn new(
        model: &SpinBosonModel,
        mode: TimeMode,
        dt: f64,
        solver: InteractionSolver,
        krylov: KrylovParams,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::domain(format!("dt must be positive, got {dt}")));
        }
        let half_maps = local_h0_maps(model, mode.coefficient(0.5 * dt));
        let exp_int = match solver {
            InteractionSolver::Factorized => {
                Some(model.interaction_exponential_mpo(mode.coefficient(dt) * model.g))
            }
            InteractionSolver::Krylov => None,
        };
        Ok(Propagator {
            model: model.clone(),
            mode,
            dt,
            solver,
            krylov,
            max_halvings: 4,
            hi: model.hi_mpo(),
            half_maps,
            exp_int,
        })
    }

    fn halved(&self) -> Result<Propagator> {
        let mut p = Propagator::new(&self.model, self.mode, 0.5 * self.dt, self.solver, self.krylov)?;
        p.max_halvings = self.max_halvings.saturating_sub(1);
        Ok(p)
    }

    /// One symmetric step. Returns the normalized, compressed state, the
    /// squared norm before the final compression and the discarded weight.
    pub fn step(&self, state: &MpsState) -> Result<(MpsState, f64, f64)> {
        let comp = &self.krylov.compression;
        let a = apply_maps(state, &self.half_maps, self.mode);
        let (b, mut err) = match &self.exp_int {
            Some(op) => (op.apply(&a)?, 0.0),
            None => {
                let c = self.mode.coefficient(self.dt) * self.model.g;
                match krylov_exp_apply(&self.hi, &a, c, &self.krylov) {
                    Ok(k) => (k.state, k.truncation),
                    Err(e) if e.is_convergence() && self.max_halvings > 0 => {
                        log::debug!("Krylov step failed at dt = {}, halving: {e}", self.dt);
                        let half = self.halved()?;
                        let (s1, _, e1) = half.step(state)?;
                        let (s2, n2, e2) = half.step(&s1)?;
                        return Ok((s2, n2, e1 + e2));
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        let mut c = apply_maps(&b, &self.half_maps, self.mode);
        let norm_before = c.norm_squared();
        err += c.compress(comp);
        Ok((c, norm_before, err))
    }

    /// Runs `n_steps`, calling `observe(step_index, time, state)` after every
    /// step; `energy_every > 0` also measures `<H>` on that cadence.
    pub fn evolve(
        &self,
        mut state: MpsState,
        t0: f64,
        n_steps: usize,
        energy_every: usize,
        mut observe: impl FnMut(usize, f64, &MpsState) -> Result<()>,
    ) -> Result<(MpsState, EvolutionLog)> {
        let h = self.model.h_mpo();
        let mut log = EvolutionLog::default();
        for n in 1..=n_steps {
            let (next, norm_before, err) = self.step(&state)?;
            state = next;
            let t = t0 + n as f64 * self.dt;
            let energy = if energy_every > 0 && n % energy_every == 0 {
                h.expectation_real(&state)?
            } else {
                f64::NAN
            };
            log.push(StepRecord {
                time: t,
                norm_before,
                energy,
                max_bond: state.max_bond(),
                step_truncation: err,
                truncation_error: state.truncation_error(),
            });
            observe(n, t, &state)?;
        }
        Ok((state, log))
    }
}

/// Convenience wrapper performing one step.
pub fn trotter_step(
    state: &MpsState,
    model: &SpinBosonModel,
    dt: f64,
    mode: TimeMode,
    solver: InteractionSolver,
    kparams: &KrylovParams,
) -> Result<(MpsState, StepRecord)> {
    let p = Propagator::new(model, mode, dt, solver, *kparams)?;
    let (s, norm_before, err) = p.step(state)?;
    let energy = model.h_mpo().expectation_real(&s)?;
    let rec = StepRecord {
        time: dt,
        norm_before,
        energy,
        max_bond: s.max_bond(),
        step_truncation: err,
        truncation_error: s.truncation_error(),
    };
    Ok((s, rec))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    /// Split imaginary-time steps.
    Trotter,
    /// Unsplit steps `exp(-dtau H)` with a Krylov exponential; removes the
    /// splitting bias.
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub dtau: f64,
    pub kind: StageKind,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateParams {
    pub stages: Vec<Stage>,
    /// Stop a stage once `|dE/dtau| / max(|E|, 1)` falls below this.
    pub energy_tol: f64,
    /// Energy is measured every this many steps.
    pub check_every: usize,
    /// Allowed energy increase between checks, relative to `max(|E|, 1)`.
    pub monotone_slack: f64,
    pub solver: InteractionSolver,
    pub krylov: KrylovParams,
}

impl GroundStateParams {
    /// Split stages at dtau = 0.5, 0.1, 0.02.
    pub fn trotter_only(compression: CompressionParams) -> Self {
        let st = |dtau, max_steps| Stage { dtau, kind: StageKind::Trotter, max_steps };
        GroundStateParams {
            stages: vec![st(0.5, 400), st(0.1, 400), st(0.02, 400)],
            energy_tol: 1e-9,
            check_every: 4,
            monotone_slack: 1e-8,
            solver: InteractionSolver::Factorized,
            krylov: KrylovParams { compression, ..KrylovParams::default() },
        }
    }

    /// Split stages followed by unsplit Krylov refinement; for small chains
    /// where sub-1e-6 energies matter.
    pub fn refined(compression: CompressionParams) -> Self {
        let mut p = Self::trotter_only(compression);
        p.stages.push(Stage { dtau: 0.2, kind: StageKind::Krylov, max_steps: 400 });
        p.krylov.residual_tol = 1e-10;
        p.krylov.subspace_dim = 12;
        p
    }
}

impl Default for GroundStateParams {
    fn default() -> Self {
        Self::trotter_only(CompressionParams::default())
    }
}

/// Starting point of the ground-state search. Without bias the parity
/// `sz exp(i pi N)` is conserved and `|g> vac` lies in the ground-state
/// sector, so the search never leaves it. With bias, equal weight on both
/// qubit levels.
pub fn ground_seed(model: &SpinBosonModel) -> MpsState {
    let q = if model.epsilon == 0.0 {
        [C64::from(1.0), C64::from(0.0)]
    } else {
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        [h, h]
    };
    MpsState::product(q, &vec![0; model.modes()], model.chain.n_max).expect("valid seed")
}

/// Imaginary-time ground state search.
pub fn ground_state(model: &SpinBosonModel, params: &GroundStateParams) -> Result<(MpsState, f64, EvolutionLog)> {
    let h = model.h_mpo();
    let mut state = ground_seed(model);
    let mut energy = h.expectation_real(&state)?;
    let mut log = EvolutionLog::default();
    let mut tau = 0.0;
    let every = params.check_every.max(1);
    for stage in &params.stages {
        let prop = match stage.kind {
            StageKind::Trotter => {
                Some(Propagator::new(model, TimeMode::Imaginary, stage.dtau, params.solver, params.krylov)?)
            }
            StageKind::Krylov => None,
        };
        let mut last_check = energy;
        let mut converged = false;
        for n in 1..=stage.max_steps {
            let (next, norm_before, err) = match &prop {
                Some(p) => p.step(&state)?,
                None => {
                    let k = krylov_exp_apply(&h, &state, C64::from(-stage.dtau), &params.krylov)?;
                    let mut s = k.state;
                    let nb = s.norm_squared();
                    let e = s.compress(&params.krylov.compression);
                    (s, nb, k.truncation + e)
                }
            };
            state = next;
            tau += stage.dtau;
            let measure = n % every == 0 || n == stage.max_steps;
            let e_now = if measure { h.expectation_real(&state)? } else { f64::NAN };
            log.push(StepRecord {
                time: tau,
                norm_before,
                energy: e_now,
                max_bond: state.max_bond(),
                step_truncation: err,
                truncation_error: state.truncation_error(),
            });
            if !measure {
                continue;
            }
            let scale = e_now.abs().max(1.0);
            let increase = e_now - last_check;
            if increase > params.monotone_slack * scale {
                return Err(Error::NonMonotoneEnergy { increase, tau });
            }
            let rate = (last_check - e_now).abs() / (every as f64 * stage.dtau) / scale;
            last_check = e_now;
            energy = e_now;
            if rate < params.energy_tol {
                converged = true;
                break;
            }
        }
        log::debug!(
            "ground-state stage dtau = {} ({:?}) ended at E = {energy:.12}, converged = {converged}",
            stage.dtau,
            stage.kind
        );
    }
    Ok((state, energy, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed;
    use crate::model::{ChainSpec, CouplingKind};
    use crate::mps::testutil::random_state;

    fn model(l: usize, n_max: usize, g: f64) -> SpinBosonModel {
        SpinBosonModel::new(ChainSpec::new(l, 1.0, n_max).unwrap(), 1.0 / 3.0, 0.0, g, CouplingKind::Flux, 0)
            .unwrap()
    }

    fn exact() -> KrylovParams {
        KrylovParams { subspace_dim: 8, residual_tol: 1e-12, compression: CompressionParams::exact() }
    }

    #[test]
    fn h0_step_on_fock_state_is_a_phase() {
        let m = model(3, 2, 0.3);
        let s = MpsState::product([ZERO, ONE], &[1, 0, 2], 2).unwrap();
        let out = h0_half_step(&s, &m, 0.3, TimeMode::Real);
        assert!((s.inner(&out).unwrap().norm() - 1.0).abs() < 1e-14);
        assert!((out.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn h0_step_relative_phase() {
        let m = model(3, 2, 0.3);
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let local = vec![vec![ONE, ZERO], vec![h, h, ZERO], vec![ONE, ZERO, ZERO], vec![ONE, ZERO, ZERO]];
        let s = MpsState::product_from_vectors(&local).unwrap();
        let dt = 0.7;
        let out = h0_half_step(&s, &m, dt, TimeMode::Real);
        let t = out.site(1);
        let ratio = t.get(0, 1, 0) / t.get(0, 0, 0);
        let expect = C64::new(0.0, -m.basis.frequencies[0] * dt / 2.0).exp();
        assert!((ratio - expect).norm() < 1e-12);
    }

    #[test]
    fn imaginary_h0_keeps_ground_product_state() {
        let m = model(3, 2, 0.3);
        let s = MpsState::product([ONE, ZERO], &[0, 0, 0], 2).unwrap();
        let mut out = h0_half_step(&s, &m, 0.4, TimeMode::Imaginary);
        let n = out.normalize();
        assert!((n - (m.omega_at * 0.1f64).exp()).abs() < 1e-12);
        assert!((s.inner(&out).unwrap() - ONE).norm() < 1e-14);
    }

    #[test]
    fn krylov_zero_coefficient_is_identity() {
        let m = model(3, 2, 0.3);
        let s = random_state(&m.phys_dims(), 3, 4);
        let k = krylov_exp_apply(&m.hi_mpo(), &s, ZERO, &exact()).unwrap();
        assert_eq!(k.state.to_dense(), s.to_dense());
    }

    #[test]
    fn krylov_matches_dense_exponential() {
        let m = model(4, 2, 0.3);
        let s = random_state(&m.phys_dims(), 4, 12);
        let c = C64::new(0.0, -0.05 * m.g);
        let k = krylov_exp_apply(&m.hi_mpo(), &s, c, &exact()).unwrap();
        let hi = m.hi_mpo().to_dense();
        let u = linalg::hermitian_expm(hi.as_ref(), c);
        let v = s.to_dense();
        let expect: Vec<C64> = (0..v.len()).map(|i| (0..v.len()).map(|j| u[(i, j)] * v[j]).sum()).collect();
        let got = k.state.to_dense();
        let err = expect.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn krylov_semigroup() {
        let m = model(4, 2, 0.3);
        let s = random_state(&m.phys_dims(), 3, 2);
        let hi = m.hi_mpo();
        let c = C64::new(0.0, -0.2);
        let p = KrylovParams { residual_tol: 1e-9, ..exact() };
        let one = krylov_exp_apply(&hi, &s, c, &p).unwrap().state;
        let half = krylov_exp_apply(&hi, &s, c * 0.5, &p).unwrap().state;
        let two = krylov_exp_apply(&hi, &half, c * 0.5, &p).unwrap().state;
        let (a, b) = (one.to_dense(), two.to_dense());
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn krylov_failure_is_reported() {
        let m = model(3, 2, 0.3);
        let s = random_state(&m.phys_dims(), 3, 8);
        let p = KrylovParams { subspace_dim: 2, residual_tol: 1e-14, compression: CompressionParams::exact() };
        let r = krylov_exp_apply(&m.hi_mpo(), &s, C64::new(0.0, -3.0), &p);
        assert!(matches!(r, Err(Error::Convergence { .. })));
    }

    #[test]
    fn free_qubit_stays_excited() {
        let m = model(4, 2, 0.0);
        let s = MpsState::product([ZERO, ONE], &[0; 4], 2).unwrap();
        let p = Propagator::new(&m, TimeMode::Real, 0.1, InteractionSolver::Krylov, exact()).unwrap();
        let (out, log) = p.evolve(s, 0.0, 20, 0, |_, _, _| Ok(())).unwrap();
        let rho = out.site_density_matrix(0);
        assert!((rho[(1, 1)].re - 1.0).abs() < 1e-13);
        assert_eq!(log.len(), 20);
    }

    #[test]
    fn solvers_agree_for_one_step() {
        let m = model(4, 2, 0.4);
        let s = random_state(&m.phys_dims(), 3, 31);
        let a = Propagator::new(&m, TimeMode::Real, 0.05, InteractionSolver::Krylov, exact()).unwrap();
        let b = Propagator::new(&m, TimeMode::Real, 0.05, InteractionSolver::Factorized, exact()).unwrap();
        let (sa, _, _) = a.step(&s).unwrap();
        let (sb, nb, wb) = b.step(&s).unwrap();
        assert!(sa.inner(&sb).unwrap().norm_sqr() > 1.0 - 1e-12);
        assert!((nb - 1.0).abs() < 1e-12 && wb < 1e-20);
    }

    #[test]
    fn small_ground_state_matches_exact() {
        let m = model(3, 3, 0.3);
        let (psi, e, log) = ground_state(&m, &GroundStateParams::refined(CompressionParams::new(32, 0.0).unwrap())).unwrap();
        let mut dm = ed::dense_build(&m).unwrap();
        let (e0, _) = dm.exact_ground();
        assert!((e - e0).abs() < 1e-8, "{e} vs {e0}");
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(!log.is_empty());
    }

    #[test]
    fn free_ground_state() {
        let m = model(4, 2, 0.0);
        let (psi, e, _) = ground_state(&m, &GroundStateParams::default()).unwrap();
        assert!((e + 1.0 / 6.0).abs() < 1e-9);
        // the stopping rule |dE/dtau| < 1e-9 leaves P_z ~ 1e-9 / (2 omega_at^2)
        assert!(psi.site_density_matrix(0)[(1, 1)].re < 1e-7);
    }
}
