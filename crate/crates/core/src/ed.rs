//! Dense exact diagonalization for small chains, used as a reference for
//! everything built on tensor trains.
//!
//! Basis ordering is qubit-major, then modes `1..L`, each Fock index less
//! significant than the previous one. This matches
//! [`MpsState::to_dense`](crate::MpsState::to_dense).

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::model::SpinBosonModel;

/// Largest dense dimension accepted.
pub const MAX_DIM: usize = 200_000;

#[derive(Debug, Clone)]
pub struct DenseModel {
    pub model: SpinBosonModel,
    pub dim: usize,
    pub hamiltonian: Mat<C64>,
    eigen: Option<(Vec<f64>, Mat<C64>)>,
}

/// Decoded basis label: qubit index (0 ground, 1 excited) and Fock numbers.
fn decode(mut idx: usize, modes: usize, d: usize) -> (usize, Vec<usize>) {
    let mut n = vec![0; modes];
    for k in (0..modes).rev() {
        n[k] = idx % d;
        idx /= d;
    }
    (idx, n)
}

fn encode(s: usize, n: &[usize], d: usize) -> usize {
    n.iter().fold(s, |acc, &x| acc * d + x)
}

pub fn dense_dim(model: &SpinBosonModel) -> Option<usize> {
    let d = model.chain.n_max + 1;
    (0..model.modes()).try_fold(2usize, |acc, _| acc.checked_mul(d))
}

/// Assembles the full Hamiltonian by enumerating the product basis.
pub fn dense_build(model: &SpinBosonModel) -> Result<DenseModel> {
    let dim = dense_dim(model).filter(|&x| x <= MAX_DIM).ok_or_else(|| {
        Error::DimensionOverflow(dense_dim(model).unwrap_or(usize::MAX))
    })?;
    let l = model.modes();
    let d = model.chain.n_max + 1;
    let w = &model.basis.frequencies;
    let g = model.g;
    let mut h = Mat::<C64>::zeros(dim, dim);
    for col in 0..dim {
        let (s, n) = decode(col, l, d);
        let sz = if s == 1 { 1.0 } else { -1.0 };
        let diag: f64 = n.iter().zip(w).map(|(&nk, wk)| nk as f64 * wk).sum::<f64>() + 0.5 * model.omega_at * sz;
        h[(col, col)] += C64::from(diag);
        let flipped = 1 - s;
        h[(encode(flipped, &n, d), col)] += C64::from(0.5 * model.epsilon);
        if g == 0.0 {
            continue;
        }
        let mut m = n.clone();
        for k in 0..l {
            let u = model.u[k];
            if n[k] > 0 {
                m[k] = n[k] - 1;
                h[(encode(flipped, &m, d), col)] += g * u.conj() * (n[k] as f64).sqrt();
            }
            if n[k] + 1 < d {
                m[k] = n[k] + 1;
                h[(encode(flipped, &m, d), col)] += g * u * ((n[k] + 1) as f64).sqrt();
            }
            m[k] = n[k];
        }
    }
    Ok(DenseModel { model: model.clone(), dim, hamiltonian: h, eigen: None })
}

impl DenseModel {
    pub fn hermiticity_residual(&self) -> f64 {
        let h = &self.hamiltonian;
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                r = r.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
        r
    }

    fn eigen(&mut self) -> &(Vec<f64>, Mat<C64>) {
        if self.eigen.is_none() {
            self.eigen = Some(linalg::hermitian_eigen(self.hamiltonian.as_ref()));
        }
        self.eigen.as_ref().unwrap()
    }

    pub fn spectrum(&mut self) -> Vec<f64> {
        self.eigen().0.clone()
    }

    /// Lowest eigenpair.
    pub fn exact_ground(&mut self) -> (f64, Vec<C64>) {
        let (vals, vecs) = self.eigen();
        let v = (0..vecs.nrows()).map(|i| vecs[(i, 0)]).collect();
        (vals[0], v)
    }

    /// States `exp(-i H t) psi0` at each requested time.
    pub fn exact_evolve(&mut self, psi0: &[C64], times: &[f64]) -> Vec<Vec<C64>> {
        self.evolve_with(psi0, times, |e, t| C64::new(0.0, -e * t).exp(), false)
    }

    /// Normalized `exp(-H tau) psi0`.
    pub fn imaginary_evolve(&mut self, psi0: &[C64], taus: &[f64]) -> Vec<Vec<C64>> {
        let e0 = self.eigen().0[0];
        self.evolve_with(psi0, taus, move |e, t| C64::from((-(e - e0) * t).exp()), true)
    }

    fn evolve_with(
        &mut self,
        psi0: &[C64],
        times: &[f64],
        phase: impl Fn(f64, f64) -> C64,
        normalize: bool,
    ) -> Vec<Vec<C64>> {
        let dim = self.dim;
        let (vals, vecs) = self.eigen();
        let coeff: Vec<C64> =
            (0..dim).map(|j| (0..dim).map(|i| vecs[(i, j)].conj() * psi0[i]).sum()).collect();
        times
            .iter()
            .map(|&t| {
                let c: Vec<C64> = coeff.iter().zip(vals).map(|(c, &e)| c * phase(e, t)).collect();
                let mut v: Vec<C64> = (0..dim).map(|i| (0..dim).map(|j| vecs[(i, j)] * c[j]).sum()).collect();
                if normalize {
                    let n = norm(&v);
                    v.iter_mut().for_each(|x| *x /= n);
                }
                v
            })
            .collect()
    }

    /// Dense matrix of a qubit operator embedded in the full space.
    pub fn qubit_operator(&self, op: &Mat<C64>) -> Mat<C64> {
        let rest = self.dim / 2;
        Mat::from_fn(self.dim, self.dim, |i, j| {
            if i % rest == j % rest {
                op[(i / rest, j / rest)]
            } else {
                ZERO
            }
        })
    }

    /// `sz exp(i pi N)`, conserved at zero bias.
    pub fn parity_diagonal(&self) -> Vec<f64> {
        let l = self.model.modes();
        let d = self.model.chain.n_max + 1;
        (0..self.dim)
            .map(|i| {
                let (s, n) = decode(i, l, d);
                let sz = if s == 1 { 1.0 } else { -1.0 };
                let total: usize = n.iter().sum();
                sz * if total % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect()
    }

    /// `<a_k^dag a_k>` for every mode.
    pub fn mode_occupations(&self, psi: &[C64]) -> Vec<f64> {
        let l = self.model.modes();
        let d = self.model.chain.n_max + 1;
        let mut n = vec![0.0; l];
        for (i, a) in psi.iter().enumerate() {
            let (_, occ) = decode(i, l, d);
            for k in 0..l {
                n[k] += a.norm_sqr() * occ[k] as f64;
            }
        }
        n
    }

    /// `P_z = <(sz + 1)/2>`.
    pub fn excitation(&self, psi: &[C64]) -> f64 {
        let rest = self.dim / 2;
        psi[rest..].iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<sx>`.
    pub fn sigma_x(&self, psi: &[C64]) -> f64 {
        let rest = self.dim / 2;
        2.0 * (0..rest).map(|i| (psi[i].conj() * psi[i + rest]).re).sum::<f64>()
    }

    pub fn energy(&self, psi: &[C64]) -> f64 {
        expectation(&self.hamiltonian, psi).re
    }
}

/// Dense vector of a product state: qubit amplitudes and mode Fock states.
pub fn product_vector(qubit: [C64; 2], occupations: &[usize], n_max: usize) -> Vec<C64> {
    let d = n_max + 1;
    let rest = d.pow(occupations.len() as u32);
    let mut v = vec![ZERO; 2 * rest];
    for (s, a) in qubit.iter().enumerate() {
        v[encode(s, occupations, d)] = *a;
    }
    v
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn expectation(op: &Mat<C64>, psi: &[C64]) -> C64 {
    let n = psi.len();
    let mut acc = ZERO;
    for j in 0..n {
        if psi[j] == ZERO {
            continue;
        }
        for i in 0..n {
            acc += psi[i].conj() * op[(i, j)] * psi[j];
        }
    }
    acc / C64::from(norm(psi).powi(2))
}

/// Fidelity `|<a|b>|^2` of two normalized vectors.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

/// Embeds a single-mode operator acting on mode `k` (0-based).
pub fn mode_operator(model: &SpinBosonModel, k: usize, op: &Mat<C64>) -> Mat<C64> {
    let l = model.modes();
    let d = model.chain.n_max + 1;
    let dim = 2 * d.pow(l as u32);
    let stride = d.pow((l - 1 - k) as u32);
    Mat::from_fn(dim, dim, |i, j| {
        let (ni, nj) = ((i / stride) % d, (j / stride) % d);
        if i - ni * stride == j - nj * stride {
            op[(ni, nj)]
        } else {
            ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::model::{ChainSpec, CouplingKind};

    fn model(l: usize, n_max: usize, g: f64, eps: f64) -> SpinBosonModel {
        SpinBosonModel::new(ChainSpec::new(l, 1.0, n_max).unwrap(), 1.0 / 3.0, eps, g, CouplingKind::Flux, 0)
            .unwrap()
    }

    #[test]
    fn free_spectrum() {
        let m = model(3, 2, 0.0, 0.0);
        let mut dm = dense_build(&m).unwrap();
        let (e0, _) = dm.exact_ground();
        assert!((e0 + 1.0 / 6.0).abs() < 1e-13);
        let mut expect = Vec::new();
        for idx in 0..dm.dim {
            let (s, n) = decode(idx, 3, 3);
            let e: f64 = n.iter().zip(&m.basis.frequencies).map(|(&a, w)| a as f64 * w).sum();
            expect.push(e + if s == 1 { 1.0 / 6.0 } else { -1.0 / 6.0 });
        }
        expect.sort_by(f64::total_cmp);
        for (a, b) in dm.spectrum().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_bookkeeping() {
        // trace of the photon part: (n(n+1)/2) (n+1)^(L-1) * 2 * sum omega_k
        let m = model(3, 2, 0.5, 0.0);
        let dm = dense_build(&m).unwrap();
        let tr: f64 = (0..dm.dim).map(|i| dm.hamiltonian[(i, i)].re).sum();
        let wsum: f64 = m.basis.frequencies.iter().sum();
        let expect = 3.0 * 3f64.powi(2) * 2.0 * wsum;
        assert!((tr - expect).abs() < 1e-11);
        assert!(dm.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn matches_operator_reconstruction() {
        for kind in [CouplingKind::Flux, CouplingKind::Charge] {
            let m = SpinBosonModel::new(ChainSpec::new(3, 1.0, 2).unwrap(), 0.4, 0.07, 0.6, kind, 1).unwrap();
            let dm = dense_build(&m).unwrap();
            let h = m.h_mpo().to_dense();
            assert!(linalg::max_abs_diff(h.as_ref(), dm.hamiltonian.as_ref()) < 1e-12);
        }
    }

    #[test]
    fn dimension_guard() {
        let m = model(20, 3, 0.1, 0.0);
        assert!(matches!(dense_build(&m), Err(Error::DimensionOverflow(_))));
    }

    #[test]
    fn evolution_is_unitary_and_conserves_parity() {
        let m = model(3, 2, 0.6, 0.0);
        let mut dm = dense_build(&m).unwrap();
        let psi0 = product_vector([ZERO, ONE], &[0, 0, 0], 2);
        let par = dm.parity_diagonal();
        let p0: f64 = psi0.iter().zip(&par).map(|(a, p)| a.norm_sqr() * p).sum();
        for psi in dm.exact_evolve(&psi0, &[0.5, 3.0, 17.0]) {
            assert!((norm(&psi) - 1.0).abs() < 1e-12);
            let p: f64 = psi.iter().zip(&par).map(|(a, p)| a.norm_sqr() * p).sum();
            assert!((p - p0).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_energy_decreases_with_g() {
        let mut prev = f64::INFINITY;
        for g in [0.0, 0.1, 0.2, 0.4, 0.8] {
            let mut dm = dense_build(&model(3, 3, g, 0.0)).unwrap();
            let e = dm.exact_ground().0;
            assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn imaginary_evolution_reaches_ground() {
        let m = model(2, 3, 0.4, 0.0);
        let mut dm = dense_build(&m).unwrap();
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let psi0 = product_vector([h, h], &[0, 0], 3);
        let (e0, g) = dm.exact_ground();
        let v = dm.imaginary_evolve(&psi0, &[200.0]).pop().unwrap();
        assert!((dm.energy(&v) - e0).abs() < 1e-10);
        assert!(fidelity(&v, &g) > 1.0 - 1e-10);
    }
}
