//! Tensor-train results against dense exact diagonalization.

use faer::Mat;
use sbchain::ed::{self, dense_build};
use sbchain::linalg::{self, C64, ONE, ZERO};
use sbchain::model::{pauli_x, ChainSpec, CouplingKind, SpinBosonModel};
use sbchain::mps::{annihilation, displacement_operator, CompressionParams, MpsState};
use sbchain::observables::{self, quadrature_operators};
use sbchain::propagate::{self, GroundStateParams, InteractionSolver, KrylovParams, Propagator, TimeMode};

fn model(l: usize, n_max: usize, omega_at: f64, g: f64, kind: CouplingKind) -> SpinBosonModel {
    SpinBosonModel::new(ChainSpec::new(l, 1.0, n_max).unwrap(), omega_at, 0.0, g, kind, 0).unwrap()
}

fn excited(m: &SpinBosonModel) -> MpsState {
    MpsState::product([ZERO, ONE], &vec![0; m.modes()], m.chain.n_max).unwrap()
}

fn matvec(a: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum()).collect()
}

/// `P_z(t)` on the step grid from the split propagator, with exact bond
/// dimension and the factorized interaction exponential.
fn pz_trace(m: &SpinBosonModel, dt: f64, t_final: f64) -> Vec<(f64, f64)> {
    let kp = KrylovParams { compression: CompressionParams::exact(), ..KrylovParams::default() };
    let p = Propagator::new(m, TimeMode::Real, dt, InteractionSolver::Factorized, kp).unwrap();
    let n = (t_final / dt).round() as usize;
    let mut out = Vec::new();
    p.evolve(excited(m), 0.0, n, 0, |_, t, s| {
        out.push((t, observables::qubit_bloch(s).pz()));
        Ok(())
    })
    .unwrap();
    out
}

fn exact_pz(m: &SpinBosonModel, times: &[f64]) -> Vec<f64> {
    let mut dm = dense_build(m).unwrap();
    let psi0 = ed::product_vector([ZERO, ONE], &vec![0; m.modes()], m.chain.n_max);
    dm.exact_evolve(&psi0, times).iter().map(|v| dm.excitation(v)).collect()
}

#[test]
fn emission_matches_dense_dynamics() {
    let m = model(4, 2, 1.0 / 3.0, 0.3, CouplingKind::Flux);
    let trace = pz_trace(&m, 0.05, 30.0);
    let times: Vec<f64> = trace.iter().map(|x| x.0).collect();
    let exact = exact_pz(&m, &times);
    let worst = trace.iter().zip(&exact).map(|((_, a), b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "max |dP_z| = {worst:e}");
}

#[test]
fn splitting_error_is_second_order() {
    let m = model(4, 2, 1.0 / 3.0, 0.3, CouplingKind::Flux);
    let t = 30.0;
    let exact = exact_pz(&m, &[t])[0];
    let e1 = (pz_trace(&m, 0.1, t).last().unwrap().1 - exact).abs();
    let e2 = (pz_trace(&m, 0.05, t).last().unwrap().1 - exact).abs();
    let ratio = e1 / e2;
    assert!((3.0..=5.0).contains(&ratio), "error ratio {ratio} ({e1:e} / {e2:e})");
}

#[test]
fn charge_coupling_is_local_momentum() {
    let m = model(3, 2, 0.5, 1.0, CouplingKind::Charge);
    let m = SpinBosonModel::new(m.chain, 0.5, 0.0, 1.0, CouplingKind::Charge, 1).unwrap();
    let d = m.chain.n_max + 1;
    let a = annihilation(d);
    let dim = ed::dense_dim(&m).unwrap();
    let mut coupling = Mat::<C64>::zeros(dim, dim);
    let mut p_site = Mat::<C64>::zeros(dim, dim);
    for k in 0..m.modes() {
        let u = m.u[k];
        let local = Mat::from_fn(d, d, |i, j| u.conj() * a[(i, j)] + u * a[(j, i)].conj());
        coupling += ed::mode_operator(&m, k, &local);
        let (_, p) = quadrature_operators(&m.basis, k, d);
        let s = m.basis.transform[(k, m.i_q)];
        let p_k = ed::mode_operator(&m, k, &p);
        p_site += Mat::from_fn(dim, dim, |i, j| p_k[(i, j)] * s);
    }
    assert!(linalg::max_abs_diff(coupling.as_ref(), p_site.as_ref()) < 1e-12);
}

#[test]
fn cat_occupations_match_displaced_dense_state() {
    let m = model(3, 6, 0.0, 0.2, CouplingKind::Flux);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = ed::product_vector([C64::from(h), C64::from(h)], &[0, 0, 0], 6);
    for k in 0..3 {
        let beta = -m.g * m.u[k] / m.basis.frequencies[k];
        psi = matvec(&ed::mode_operator(&m, k, &displacement_operator(7, beta)), &psi);
    }
    let dm = dense_build(&m).unwrap();
    let n = dm.mode_occupations(&psi);
    let analytic = m.analytic_cat_occupations();
    for k in 0..3 {
        assert!((n[k] - analytic[k]).abs() < 1e-12, "mode {k}: {} vs {}", n[k], analytic[k]);
    }
}

#[test]
fn cat_ansatz_energy() {
    let m = model(5, 8, 0.0, 0.25, CouplingKind::Flux);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut s = MpsState::product([C64::from(h), C64::from(h)], &[0; 5], 8).unwrap();
    for k in 0..5 {
        s.displace(k + 1, -m.g * m.u[k] / m.basis.frequencies[k]).unwrap();
    }
    let e = m.h_mpo().expectation_real(&s).unwrap();
    let expected: f64 = -(0..5).map(|k| m.g * m.g * m.u[k].norm_sqr() / m.basis.frequencies[k]).sum::<f64>();
    assert!((e - expected).abs() < 1e-9, "{e} vs {expected}");
    assert!((m.cat_energy() - expected).abs() < 1e-14);
}

#[test]
fn cat_limit_ground_state() {
    let m = model(6, 5, 0.0, 0.15, CouplingKind::Flux);
    let (state, _, _) = propagate::ground_state(&m, &GroundStateParams::default()).unwrap();
    let n = observables::mode_occupations(&state);
    let analytic = m.analytic_cat_occupations();
    for (k, (a, b)) in n.iter().zip(&analytic).enumerate() {
        assert!((a - b).abs() <= 0.02 * b, "mode {k}: {a} vs {b}");
    }
}

#[test]
fn ground_state_matches_dense_diagonalization() {
    let m = model(4, 3, 1.0 / 3.0, 0.3, CouplingKind::Flux);
    let (_, e_mps, _) = propagate::ground_state(&m, &GroundStateParams::refined(CompressionParams::new(16, 1e-12).unwrap())).unwrap();
    let (e_exact, _) = dense_build(&m).unwrap().exact_ground();
    assert!((e_mps - e_exact).abs() < 1e-6, "{e_mps} vs {e_exact}");
}

#[test]
fn ground_state_has_no_mean_field() {
    let m = model(5, 3, 1.0 / 3.0, 0.3, CouplingKind::Flux);
    let (state, _, _) = propagate::ground_state(&m, &GroundStateParams::default()).unwrap();
    let j = observables::site_current(&state, &m.basis);
    assert!(j.iter().all(|x| x.abs() < 1e-8), "{j:?}");
}

#[test]
fn weak_coupling_onset_is_quadratic() {
    let m = model(6, 2, 1.0 / 3.0, 0.02, CouplingKind::Flux);
    let trace = pz_trace(&m, 0.05, 0.4);
    // 1 - P_z ~ t^2: doubling t quadruples the loss
    let (l1, l2) = (1.0 - trace[3].1, 1.0 - trace[7].1);
    let ratio = l2 / l1;
    assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn free_qubit_bias_response_matches_two_level_evolution() {
    let chain = ChainSpec::new(3, 1.0, 2).unwrap();
    for eps in [0.05, -0.05] {
        let m = SpinBosonModel::new(chain, 1.0 / 3.0, eps, 0.0, CouplingKind::Flux, 0).unwrap();
        let kp = KrylovParams::default();
        let p = Propagator::new(&m, TimeMode::Real, 0.1, InteractionSolver::Factorized, kp).unwrap();
        let mut px = Vec::new();
        p.evolve(excited(&m), 0.0, 50, 0, |_, t, s| {
            px.push((t, observables::qubit_bloch(s).px()));
            Ok(())
        })
        .unwrap();
        let hq = m.qubit_hamiltonian();
        let sx = pauli_x();
        for (t, got) in px {
            let u = linalg::hermitian_expm(hq.as_ref(), C64::new(0.0, -t));
            let psi = [u[(0, 1)], u[(1, 1)]];
            let x = (psi[0].conj() * sx[(0, 1)] * psi[1] + psi[1].conj() * sx[(1, 0)] * psi[0]).re;
            assert!((got - 0.5 * (x + 1.0)).abs() < 1e-8, "t = {t}: {got} vs {}", 0.5 * (x + 1.0));
        }
    }
}
