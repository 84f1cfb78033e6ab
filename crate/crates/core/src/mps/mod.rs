//! Matrix product states for a qubit followed by a chain of truncated bosonic
//! modes.
//!
//! Each site tensor `A[l, s, r]` is stored flat with index
//! `l + left * (s + phys * r)`. With that layout the same buffer is, in
//! column-major order, both the "left-grouped" matrix `(left*phys) x right`
//! and the "right-grouped" matrix `left x (phys*right)`, so canonicalization
//! sweeps never need to permute data.
//!
//! ```text
//!   A[0] --- A[1] --- A[2] --- ... --- A[L]
//!    |        |        |                |
//!  qubit    mode 1   mode 2           mode L
//! ```

mod mpo;

pub use mpo::{MpoOperator, MpoTensor};

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{self, gemm, gemm_acc, C64, ONE, ZERO};

/// Bond-dimension and singular-value cutoff used whenever a state is
/// compressed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompressionParams {
    pub chi_max: usize,
    pub svd_cutoff: f64,
}

impl CompressionParams {
    pub fn new(chi_max: usize, svd_cutoff: f64) -> Result<Self> {
        let p = CompressionParams { chi_max, svd_cutoff };
        p.validate()?;
        Ok(p)
    }

    /// Never truncates anything but exact zeros.
    pub fn exact() -> Self {
        CompressionParams { chi_max: usize::MAX, svd_cutoff: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi_max < 1 {
            return Err(Error::domain("chi_max must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.svd_cutoff) {
            return Err(Error::domain("svd_cutoff must lie in [0, 1)"));
        }
        Ok(())
    }
}

impl Default for CompressionParams {
    fn default() -> Self {
        CompressionParams { chi_max: 40, svd_cutoff: 1e-8 }
    }
}

/// One rank-3 tensor of the train.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        SiteTensor { left, phys, right, data: vec![ZERO; left * phys * right] }
    }

    pub fn from_data(left: usize, phys: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != left * phys * right {
            return Err(Error::shape(format!(
                "tensor data of length {} for shape {left}x{phys}x{right}",
                data.len()
            )));
        }
        Ok(SiteTensor { left, phys, right, data })
    }

    /// Product-state tensor with bond dimension one.
    pub fn local(amplitudes: &[C64]) -> Self {
        SiteTensor { left: 1, phys: amplitudes.len(), right: 1, data: amplitudes.to_vec() }
    }

    #[inline]
    pub fn left(&self) -> usize {
        self.left
    }

    #[inline]
    pub fn phys(&self) -> usize {
        self.phys
    }

    #[inline]
    pub fn right(&self) -> usize {
        self.right
    }

    #[inline]
    fn idx(&self, l: usize, s: usize, r: usize) -> usize {
        l + self.left * (s + self.phys * r)
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize, r: usize) -> C64 {
        self.data[self.idx(l, s, r)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, s: usize, r: usize, v: C64) {
        let i = self.idx(l, s, r);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// `(left*phys) x right` view.
    pub fn left_matrix(&self) -> MatRef<'_, C64> {
        MatRef::from_column_major_slice(&self.data, self.left * self.phys, self.right)
    }

    /// `left x (phys*right)` view.
    pub fn right_matrix(&self) -> MatRef<'_, C64> {
        MatRef::from_column_major_slice(&self.data, self.left, self.phys * self.right)
    }

    /// The `left x right` matrix at physical index `s`.
    pub fn slice(&self, s: usize) -> MatRef<'_, C64> {
        let stride = self.left * self.phys;
        let start = self.left * s;
        let len = if self.right == 0 { 0 } else { stride * (self.right - 1) + self.left };
        MatRef::from_column_major_slice_with_stride(
            &self.data[start..start + len],
            self.left,
            self.right,
            stride,
        )
    }

    fn from_matrix(m: MatRef<'_, C64>, left: usize, phys: usize, right: usize) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                data.push(m[(i, j)]);
            }
        }
        SiteTensor { left, phys, right, data }
    }

    pub fn from_left_matrix(m: MatRef<'_, C64>, left: usize, phys: usize) -> Self {
        assert_eq!(m.nrows(), left * phys);
        Self::from_matrix(m, left, phys, m.ncols())
    }

    pub fn from_right_matrix(m: MatRef<'_, C64>, phys: usize, right: usize) -> Self {
        assert_eq!(m.ncols(), phys * right);
        Self::from_matrix(m, m.nrows(), phys, right)
    }

    /// Applies a `phys_out x phys` matrix on the physical index.
    pub fn apply_local(&self, op: MatRef<'_, C64>) -> Self {
        assert_eq!(op.ncols(), self.phys);
        let d_out = op.nrows();
        let mut out = SiteTensor::zeros(self.left, d_out, self.right);
        for r in 0..self.right {
            for s in 0..self.phys {
                for o in 0..d_out {
                    let w = op[(o, s)];
                    if w == ZERO {
                        continue;
                    }
                    for l in 0..self.left {
                        let v = self.get(l, s, r);
                        let i = out.idx(l, o, r);
                        out.data[i] += w * v;
                    }
                }
            }
        }
        out
    }

    fn scale(&mut self, f: C64) {
        for x in &mut self.data {
            *x *= f;
        }
    }
}

/// Transfer of an environment through one site: `sum_{o,i} op[o,i] A_o^H e B_i`
/// with `op = None` meaning the identity.
pub(crate) fn transfer(
    e: MatRef<'_, C64>,
    a: &SiteTensor,
    b: &SiteTensor,
    op: Option<MatRef<'_, C64>>,
) -> Mat<C64> {
    let mut out = Mat::zeros(a.right, b.right);
    match op {
        None => {
            for s in 0..a.phys {
                let eb = gemm(e, b.slice(s));
                gemm_acc(&mut out, a.slice(s).adjoint(), eb.as_ref(), ONE);
            }
        }
        Some(op) => {
            let eb: Vec<Mat<C64>> = (0..b.phys).map(|s| gemm(e, b.slice(s))).collect();
            for o in 0..a.phys {
                let mut y = Mat::<C64>::zeros(e.nrows(), b.right);
                let mut any = false;
                for (i, ebi) in eb.iter().enumerate() {
                    let w = op[(o, i)];
                    if w != ZERO {
                        any = true;
                        y += faer::Scale(w) * ebi;
                    }
                }
                if any {
                    gemm_acc(&mut out, a.slice(o).adjoint(), y.as_ref(), ONE);
                }
            }
        }
    }
    out
}

/// Right environment step: `sum_s conj(A_s) r A_s^T` (bra index first).
fn transfer_right(r: MatRef<'_, C64>, a: &SiteTensor) -> Mat<C64> {
    let mut out = Mat::zeros(a.left, a.left);
    for s in 0..a.phys {
        let sl = a.slice(s);
        let conj = sl.conjugate();
        let tmp = gemm(conj, r);
        gemm_acc(&mut out, tmp.as_ref(), sl.transpose(), ONE);
    }
    out
}

/// A qubit followed by bosonic modes, as a tensor train.
#[derive(Debug, Clone)]
pub struct MpsState {
    sites: Vec<SiteTensor>,
    center: Option<usize>,
    truncation_error: f64,
}

impl MpsState {
    pub fn from_tensors(sites: Vec<SiteTensor>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::shape("a state needs at least one site"));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(Error::shape("boundary bonds must have dimension 1"));
        }
        for w in sites.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::shape(format!(
                    "bond mismatch {} vs {}",
                    w[0].right, w[1].left
                )));
            }
        }
        Ok(MpsState { sites, center: None, truncation_error: 0.0 })
    }

    /// Product state of a qubit with the given amplitudes (index 0 = ground,
    /// 1 = excited) and modes in Fock states.
    pub fn product(qubit: [C64; 2], occupations: &[usize], n_max: usize) -> Result<Self> {
        let nrm: f64 = qubit.iter().map(|a| a.norm_sqr()).sum();
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("qubit amplitudes have norm^2 {nrm}")));
        }
        let mut sites = vec![SiteTensor::local(&qubit)];
        for (k, &n) in occupations.iter().enumerate() {
            if n > n_max {
                return Err(Error::domain(format!(
                    "occupation {n} of mode {} exceeds n_max = {n_max}",
                    k + 1
                )));
            }
            let mut v = vec![ZERO; n_max + 1];
            v[n] = ONE;
            sites.push(SiteTensor::local(&v));
        }
        let mut s = MpsState::from_tensors(sites)?;
        s.center = Some(0);
        Ok(s)
    }

    /// Product state from arbitrary local vectors (not normalized).
    pub fn product_from_vectors(local: &[Vec<C64>]) -> Result<Self> {
        Self::from_tensors(local.iter().map(|v| SiteTensor::local(v)).collect())
    }

    /// Exact tensor train of a dense vector (site 0 most significant).
    pub fn from_dense(vector: &[C64], phys_dims: &[usize]) -> Result<Self> {
        let total: usize = phys_dims.iter().product();
        if vector.len() != total {
            return Err(Error::shape(format!(
                "vector of length {} for dims {phys_dims:?}",
                vector.len()
            )));
        }
        // Remaining block as a (left*d) x rest matrix, split off one site at
        // a time. Row-major flattening puts site 0 most significant.
        let mut sites = Vec::with_capacity(phys_dims.len());
        let mut left = 1;
        let mut rest: Vec<C64> = vector.to_vec();
        for (idx, &d) in phys_dims.iter().enumerate() {
            let cols = rest.len() / (left * d);
            if idx == phys_dims.len() - 1 {
                // rest is left x d, stored as [l][s] row-major
                let m = Mat::from_fn(left * d, 1, |i, _| {
                    let l = i % left;
                    let s = i / left;
                    rest[l * d + s]
                });
                sites.push(SiteTensor::from_left_matrix(m.as_ref(), left, d));
                break;
            }
            let m = Mat::from_fn(left * d, cols, |i, j| {
                let l = i % left;
                let s = i / left;
                rest[(l * d + s) * cols + j]
            });
            let (q, r) = linalg::qr(m.as_ref());
            let k = q.ncols();
            sites.push(SiteTensor::from_left_matrix(q.as_ref(), left, d));
            rest = (0..k).flat_map(|a| (0..cols).map(move |j| (a, j))).map(|(a, j)| r[(a, j)]).collect();
            left = k;
        }
        let mut s = Self::from_tensors(sites)?;
        s.center = Some(phys_dims.len() - 1);
        Ok(s)
    }

    /// Full state vector, site 0 most significant. Only for small systems.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut acc: Vec<Vec<C64>> = vec![vec![ONE]]; // acc[index][bond]
        for t in &self.sites {
            let mut next = Vec::with_capacity(acc.len() * t.phys);
            for row in &acc {
                for s in 0..t.phys {
                    let mut v = vec![ZERO; t.right];
                    for (r, vr) in v.iter_mut().enumerate() {
                        let mut x = ZERO;
                        for (l, a) in row.iter().enumerate() {
                            x += a * t.get(l, s, r);
                        }
                        *vr = x;
                    }
                    next.push(v);
                }
            }
            acc = next;
        }
        acc.into_iter().map(|v| v[0]).collect()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site(&self, i: usize) -> &SiteTensor {
        &self.sites[i]
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|t| t.phys).collect()
    }

    /// Dimensions of the `len() - 1` internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|t| t.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    /// Accumulated discarded weight from all compressions of this state.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    pub fn reset_truncation_error(&mut self) {
        self.truncation_error = 0.0;
    }

    fn check_compatible(&self, other: &MpsState) -> Result<()> {
        if self.phys_dims() != other.phys_dims() {
            return Err(Error::shape(format!(
                "physical dimensions {:?} vs {:?}",
                self.phys_dims(),
                other.phys_dims()
            )));
        }
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &MpsState) -> Result<C64> {
        self.check_compatible(other)?;
        let mut e = Mat::from_fn(1, 1, |_, _| ONE);
        for (a, b) in self.sites.iter().zip(&other.sites) {
            e = transfer(e.as_ref(), a, b, None);
        }
        Ok(e[(0, 0)])
    }

    pub fn norm_squared(&self) -> f64 {
        if let Some(c) = self.center {
            return linalg::frobenius_sq(self.sites[c].left_matrix());
        }
        self.inner(self).map(|z| z.re).unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&mut self, f: C64) {
        let i = self.center.unwrap_or(0);
        self.sites[i].scale(f);
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.scale(C64::from(1.0 / n));
        }
        n
    }

    fn move_center_right(&mut self, i: usize) {
        let t = &self.sites[i];
        let (left, phys) = (t.left, t.phys);
        let (q, r) = linalg::qr(t.left_matrix());
        let next = &self.sites[i + 1];
        let m = gemm(r.as_ref(), next.right_matrix());
        let (np, nr) = (next.phys, next.right);
        self.sites[i] = SiteTensor::from_left_matrix(q.as_ref(), left, phys);
        self.sites[i + 1] = SiteTensor::from_right_matrix(m.as_ref(), np, nr);
    }

    fn move_center_left(&mut self, i: usize) {
        let t = &self.sites[i];
        let (phys, right) = (t.phys, t.right);
        // M = L Q with L = R^H, Q = Q^H from the QR of M^H
        let mh = t.right_matrix().adjoint().to_owned();
        let (q, r) = linalg::qr(mh.as_ref());
        let prev = &self.sites[i - 1];
        let m = gemm(prev.left_matrix(), r.adjoint());
        let (pl, pp) = (prev.left, prev.phys);
        self.sites[i] = SiteTensor::from_right_matrix(q.adjoint().to_owned().as_ref(), phys, right);
        self.sites[i - 1] = SiteTensor::from_left_matrix(m.as_ref(), pl, pp);
    }

    /// Brings the state to mixed canonical form with orthogonality center
    /// `center`: left-isometries to its left, right-isometries to its right.
    pub fn canonicalize(&mut self, center: usize) {
        assert!(center < self.len(), "center {center} out of range");
        let n = self.len();
        match self.center {
            Some(c) => {
                for i in c..center {
                    self.move_center_right(i);
                }
                for i in (center + 1..=c).rev() {
                    self.move_center_left(i);
                }
            }
            None => {
                for i in 0..center {
                    self.move_center_right(i);
                }
                for i in (center + 1..n).rev() {
                    self.move_center_left(i);
                }
            }
        }
        self.center = Some(center);
    }

    /// Largest deviation from the isometry conditions implied by the stored
    /// orthogonality center (0 when no center is recorded).
    pub fn isometry_residual(&self) -> f64 {
        let Some(c) = self.center else { return 0.0 };
        let mut worst: f64 = 0.0;
        for (i, t) in self.sites.iter().enumerate() {
            let g = if i < c {
                let m = t.left_matrix();
                gemm(m.adjoint(), m)
            } else if i > c {
                let m = t.right_matrix();
                gemm(m, m.adjoint())
            } else {
                continue;
            };
            let id = linalg::identity(g.nrows());
            worst = worst.max(linalg::max_abs_diff(g.as_ref(), id.as_ref()));
        }
        worst
    }

    /// Sweeps of local truncated SVDs from a left-canonical form. Returns the
    /// discarded weight relative to the norm before compression; the output
    /// is normalized and has its orthogonality center on site 0.
    ///
    /// With `w` the returned value, `|<out|in>|^2 = 1 - w` for a normalized
    /// input.
    pub fn compress(&mut self, params: &CompressionParams) -> f64 {
        let n = self.len();
        self.canonicalize(n - 1);
        let norm2 = linalg::frobenius_sq(self.sites[n - 1].left_matrix());
        if norm2 == 0.0 {
            return 0.0;
        }
        let mut discarded = 0.0;
        for i in (1..n).rev() {
            let t = &self.sites[i];
            let (phys, right) = (t.phys, t.right);
            let svd = linalg::truncated_svd(t.right_matrix(), params.chi_max, params.svd_cutoff);
            discarded += svd.discarded;
            let mut us = svd.u;
            for (j, &s) in svd.s.iter().enumerate() {
                for r in 0..us.nrows() {
                    us[(r, j)] *= s;
                }
            }
            let prev = &self.sites[i - 1];
            let m = gemm(prev.left_matrix(), us.as_ref());
            let (pl, pp) = (prev.left, prev.phys);
            self.sites[i] = SiteTensor::from_right_matrix(svd.vh.as_ref(), phys, right);
            self.sites[i - 1] = SiteTensor::from_left_matrix(m.as_ref(), pl, pp);
        }
        self.center = Some(0);
        let rel = discarded / norm2;
        self.truncation_error += rel;
        self.normalize();
        rel
    }

    /// Compression that restores the pre-compression norm instead of
    /// normalizing.
    pub fn compress_keep_norm(&mut self, params: &CompressionParams) -> f64 {
        let n = self.norm();
        let e = self.compress(params);
        if n > 0.0 {
            self.scale(C64::from(n * (1.0 - e).max(0.0).sqrt()));
        }
        e
    }

    /// Functional form of [`MpsState::compress`].
    pub fn compressed(&self, params: &CompressionParams) -> (MpsState, f64) {
        let mut s = self.clone();
        let e = s.compress(params);
        (s, e)
    }

    /// Applies a local operator to one site (bond dimensions unchanged).
    pub fn apply_local(&mut self, site: usize, op: MatRef<'_, C64>) {
        self.sites[site] = self.sites[site].apply_local(op);
        if self.center != Some(site) {
            self.center = None;
        }
    }

    /// Applies a unitary local operator; canonical form is preserved.
    pub fn apply_local_unitary(&mut self, site: usize, op: MatRef<'_, C64>) {
        self.sites[site] = self.sites[site].apply_local(op);
    }

    /// Applies a single-mode displacement `exp(beta a^dag - beta* a)`,
    /// exponentiated inside the truncated Fock space, then renormalizes.
    pub fn displace(&mut self, site: usize, amplitude: C64) -> Result<()> {
        if site == 0 || site >= self.len() {
            return Err(Error::domain(format!("cannot displace site {site}")));
        }
        if amplitude == ZERO {
            return Ok(());
        }
        let d = self.sites[site].phys;
        let n_max = d - 1;
        if amplitude.norm_sqr() > n_max as f64 / 4.0 {
            log::warn!(
                "displacement |beta|^2 = {:.3} is large for n_max = {n_max}; truncation unreliable",
                amplitude.norm_sqr()
            );
        }
        let op = displacement_operator(d, amplitude);
        self.apply_local(site, op.as_ref());
        self.normalize();
        Ok(())
    }

    /// Left environments `E_i` for sites `< i`, `i = 0..=len`.
    fn left_environments(&self) -> Vec<Mat<C64>> {
        let mut envs = Vec::with_capacity(self.len() + 1);
        envs.push(Mat::from_fn(1, 1, |_, _| ONE));
        for t in &self.sites {
            let next = transfer(envs.last().unwrap().as_ref(), t, t, None);
            envs.push(next);
        }
        envs
    }

    /// Right environments `R_i` for sites `>= i`, `i = 0..=len`, bra index
    /// first.
    fn right_environments(&self) -> Vec<Mat<C64>> {
        let n = self.len();
        let mut envs = vec![Mat::zeros(0, 0); n + 1];
        envs[n] = Mat::from_fn(1, 1, |_, _| ONE);
        for i in (0..n).rev() {
            envs[i] = transfer_right(envs[i + 1].as_ref(), &self.sites[i]);
        }
        envs
    }

    /// `M[o, i] = sum conj(A_o) . (E A_i R^T)` for one site, so that
    /// `<O> = sum_{o,i} O[o,i] M[o,i]`.
    fn site_moment(a: &SiteTensor, e: MatRef<'_, C64>, r: MatRef<'_, C64>) -> Mat<C64> {
        let d = a.phys;
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            let ea = gemm(e, a.slice(i));
            let w = gemm(ea.as_ref(), r.transpose());
            for o in 0..d {
                let ao = a.slice(o);
                let mut acc = ZERO;
                for c in 0..ao.ncols() {
                    for l in 0..ao.nrows() {
                        acc += ao[(l, c)].conj() * w[(l, c)];
                    }
                }
                m[(o, i)] = acc;
            }
        }
        m
    }

    /// Reduced density matrices of every site, normalized by the state norm.
    /// `rho[a, b] = <psi| (|b><a|) |psi>` so that `<O> = tr(rho O)`.
    pub fn site_density_matrices(&self) -> Vec<Mat<C64>> {
        let lefts = self.left_environments();
        let rights = self.right_environments();
        let norm2 = lefts[self.len()][(0, 0)].re;
        self.sites
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let m = Self::site_moment(a, lefts[i].as_ref(), rights[i + 1].as_ref());
                Mat::from_fn(a.phys, a.phys, |x, y| m[(y, x)] / norm2)
            })
            .collect()
    }

    /// Reduced density matrix of a single site.
    pub fn site_density_matrix(&self, site: usize) -> Mat<C64> {
        if let Some(c) = self.center {
            if c == site {
                let a = &self.sites[site];
                let id_l = linalg::identity(a.left);
                let id_r = linalg::identity(a.right);
                let m = Self::site_moment(a, id_l.as_ref(), id_r.as_ref());
                let norm2: f64 = (0..a.phys).map(|s| m[(s, s)].re).sum();
                return Mat::from_fn(a.phys, a.phys, |x, y| m[(y, x)] / norm2);
            }
        }
        self.site_density_matrices().swap_remove(site)
    }

    /// `<O_k O_l>` for every ordered pair of distinct sites in `sites`, with
    /// `ops[j]` acting on `sites[j]`. Site indices must be increasing. The
    /// diagonal holds `<O_k O_k>`.
    pub fn pair_correlations(&self, sites: &[usize], ops: &[Mat<C64>]) -> Mat<C64> {
        assert_eq!(sites.len(), ops.len());
        assert!(sites.windows(2).all(|w| w[0] < w[1]));
        let lefts = self.left_environments();
        let rights = self.right_environments();
        let norm2 = lefts[self.len()][(0, 0)].re;
        let n = sites.len();
        let mut out = Mat::<C64>::zeros(n, n);
        for (a, &k) in sites.iter().enumerate() {
            let t = &self.sites[k];
            let m = Self::site_moment(t, lefts[k].as_ref(), rights[k + 1].as_ref());
            let sq = gemm(ops[a].as_ref(), ops[a].as_ref());
            out[(a, a)] = trace_product(&sq, &m) / norm2;
            let mut e = transfer(lefts[k].as_ref(), t, t, Some(ops[a].as_ref()));
            let mut pos = k + 1;
            for (b, &l) in sites.iter().enumerate().skip(a + 1) {
                while pos < l {
                    e = transfer(e.as_ref(), &self.sites[pos], &self.sites[pos], None);
                    pos += 1;
                }
                let tl = &self.sites[l];
                let m = Self::site_moment(tl, e.as_ref(), rights[l + 1].as_ref());
                let v = trace_product(&ops[b], &m) / norm2;
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
        out
    }

    /// Internal: builds a state without validation.
    pub(crate) fn from_parts(sites: Vec<SiteTensor>, center: Option<usize>, truncation_error: f64) -> Self {
        MpsState { sites, center, truncation_error }
    }

    /// `sum_j c_j |psi_j>` as an exact direct-sum tensor train.
    pub fn linear_combination(terms: &[(C64, &MpsState)]) -> Result<MpsState> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::shape("empty linear combination"));
        };
        for (_, t) in &terms[1..] {
            first.check_compatible(t)?;
        }
        let n = first.len();
        if terms.len() == 1 {
            let mut s = (*first).clone();
            s.scale(terms[0].0);
            return Ok(s);
        }
        if n == 1 {
            let d = first.sites[0].phys;
            let mut v = vec![ZERO; d];
            for (c, s) in terms {
                for (k, x) in v.iter_mut().enumerate() {
                    *x += c * s.sites[0].get(0, k, 0);
                }
            }
            return MpsState::from_tensors(vec![SiteTensor::local(&v)]);
        }
        let mut sites = Vec::with_capacity(n);
        for i in 0..n {
            let d = first.sites[i].phys;
            let lefts: Vec<usize> = terms.iter().map(|(_, s)| s.sites[i].left).collect();
            let rights: Vec<usize> = terms.iter().map(|(_, s)| s.sites[i].right).collect();
            let left = if i == 0 { 1 } else { lefts.iter().sum() };
            let right = if i == n - 1 { 1 } else { rights.iter().sum() };
            let mut t = SiteTensor::zeros(left, d, right);
            let (mut lo, mut ro) = (0, 0);
            for (j, (c, s)) in terms.iter().enumerate() {
                let a = &s.sites[i];
                let f = if i == 0 { *c } else { ONE };
                for r in 0..a.right {
                    for sidx in 0..d {
                        for l in 0..a.left {
                            let tl = if i == 0 { l } else { lo + l };
                            let tr = if i == n - 1 { r } else { ro + r };
                            t.set(tl, sidx, tr, f * a.get(l, sidx, r));
                        }
                    }
                }
                lo += lefts[j];
                ro += rights[j];
            }
            sites.push(t);
        }
        let err = terms.iter().map(|(_, s)| s.truncation_error).fold(0.0, f64::max);
        Ok(MpsState::from_parts(sites, None, err))
    }
}

fn trace_product(op: &Mat<C64>, m: &Mat<C64>) -> C64 {
    let mut acc = ZERO;
    for o in 0..op.nrows() {
        for i in 0..op.ncols() {
            acc += op[(o, i)] * m[(o, i)];
        }
    }
    acc
}

/// Annihilation operator on `d` Fock levels.
pub fn annihilation(d: usize) -> Mat<C64> {
    Mat::from_fn(d, d, |i, j| if j == i + 1 { C64::from((j as f64).sqrt()) } else { ZERO })
}

pub fn number_operator(d: usize) -> Mat<C64> {
    Mat::from_fn(d, d, |i, j| if i == j { C64::from(i as f64) } else { ZERO })
}

/// `exp(beta a^dag - beta^* a)` within the truncated space.
pub fn displacement_operator(d: usize, beta: C64) -> Mat<C64> {
    let a = annihilation(d);
    let gen = Mat::from_fn(d, d, |i, j| beta * a[(j, i)].conj() - beta.conj() * a[(i, j)]);
    linalg::expm(gen.as_ref())
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Small deterministic generator for reproducible random tensors.
    pub struct Lcg(pub u64);

    impl Lcg {
        pub fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((self.0 >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        }

        pub fn c64(&mut self) -> C64 {
            C64::new(self.next_f64(), self.next_f64())
        }
    }

    pub fn random_state(dims: &[usize], chi: usize, seed: u64) -> MpsState {
        let mut rng = Lcg(seed);
        let n = dims.len();
        let mut sites = Vec::new();
        let mut left = 1;
        for (i, &d) in dims.iter().enumerate() {
            let right = if i == n - 1 { 1 } else { chi };
            let data = (0..left * d * right).map(|_| rng.c64()).collect();
            sites.push(SiteTensor::from_data(left, d, right, data).unwrap());
            left = right;
        }
        let mut s = MpsState::from_tensors(sites).unwrap();
        s.normalize();
        s
    }

    pub fn dense_dot(a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    fn sx() -> Mat<C64> {
        Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    #[test]
    fn product_state_observables() {
        let s = MpsState::product([ZERO, ONE], &[0, 0, 0], 2).unwrap();
        let rho = s.site_density_matrices();
        assert!((rho[0][(1, 1)].re - 1.0).abs() < 1e-15);
        for r in &rho[1..] {
            assert!((r[(0, 0)].re - 1.0).abs() < 1e-15);
        }
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let s = MpsState::product([h, h], &[2, 0], 2).unwrap();
        let rho = s.site_density_matrices();
        let sxv = trace_product(&sx(), &Mat::from_fn(2, 2, |o, i| rho[0][(i, o)]));
        assert!((sxv.re - 1.0).abs() < 1e-14);
        let n = number_operator(3);
        let n1: C64 = (0..3).map(|a| rho[1][(a, a)] * n[(a, a)]).sum();
        assert!((n1.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn product_state_rejects_large_occupation() {
        assert!(matches!(MpsState::product([ONE, ZERO], &[3], 2), Err(Error::Domain(_))));
    }

    #[test]
    fn inner_matches_dense_dot() {
        let dims = [2, 3, 3];
        let a = random_state(&dims, 3, 1);
        let b = random_state(&dims, 2, 2);
        let dense = dense_dot(&a.to_dense(), &b.to_dense());
        assert!((a.inner(&b).unwrap() - dense).norm() < 1e-12);
        assert!((a.inner(&a).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_product_states_have_zero_overlap() {
        let a = MpsState::product([ONE, ZERO], &[0, 1], 2).unwrap();
        let b = MpsState::product([ONE, ZERO], &[0, 2], 2).unwrap();
        assert_eq!(a.inner(&b).unwrap(), ZERO);
    }

    #[test]
    fn canonicalize_preserves_state_and_is_isometric() {
        let dims = [2, 2, 2, 2];
        let s0 = random_state(&dims, 4, 7);
        let before = s0.to_dense();
        for c in 0..4 {
            let mut s = s0.clone();
            s.canonicalize(c);
            assert!(s.isometry_residual() < 1e-12, "center {c}");
            let after = s.to_dense();
            let ov = dense_dot(&before, &after);
            assert!((ov.re - s0.norm_squared()).abs() < 1e-12);
            // idempotent
            s.canonicalize(c);
            let again = s.to_dense();
            assert!((dense_dot(&after, &again).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn from_dense_round_trip() {
        let s = random_state(&[2, 3, 3, 3], 4, 11);
        let v = s.to_dense();
        let t = MpsState::from_dense(&v, &[2, 3, 3, 3]).unwrap();
        let w = t.to_dense();
        for (x, y) in v.iter().zip(&w) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn compress_product_state_is_lossless() {
        let mut s = MpsState::product([ZERO, ONE], &[0, 1, 0], 3).unwrap();
        let before = s.to_dense();
        let e = s.compress(&CompressionParams::new(8, 0.0).unwrap());
        assert_eq!(e, 0.0);
        assert_eq!(s.max_bond(), 1);
        assert!((dense_dot(&before, &s.to_dense()).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn compress_full_rank_keeps_fidelity() {
        let s = random_state(&[2, 2, 2, 2], 4, 3);
        let (c, e) = s.compressed(&CompressionParams::new(64, 0.0).unwrap());
        assert!(e < 1e-24);
        let f = s.inner(&c).unwrap().norm_sqr();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compress_error_matches_dense_schmidt_oracle() {
        // Single truncated bond: L = 2 modes after the qubit, cut at the
        // middle bond only. The discarded weight must equal the tail of the
        // Schmidt spectrum of the dense vector across that cut.
        let dims = [2, 3, 3];
        let s = random_state(&dims, 6, 5);
        let v = s.to_dense();
        // dense Schmidt across (qubit, mode1) | mode2
        let m = Mat::from_fn(6, 3, |i, j| v[i * 3 + j]);
        let sv: Vec<f64> = m.singular_values().unwrap();
        let tail: f64 = sv[2..].iter().map(|x| x * x).sum();
        // the first bond (2 | 9) has rank <= 2 so chi=2 only cuts the second
        let (c, e) = s.compressed(&CompressionParams::new(2, 0.0).unwrap());
        assert!((e - tail).abs() < 1e-12, "{e} vs {tail}");
        let f = s.inner(&c).unwrap().norm_sqr();
        assert!((f + e - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear_combination_matches_dense() {
        let dims = [2, 3, 3];
        let a = random_state(&dims, 3, 21);
        let b = random_state(&dims, 2, 22);
        let ca = C64::new(0.3, -0.2);
        let cb = C64::new(-1.1, 0.4);
        let s = MpsState::linear_combination(&[(ca, &a), (cb, &b)]).unwrap();
        let (va, vb, vs) = (a.to_dense(), b.to_dense(), s.to_dense());
        for i in 0..vs.len() {
            assert!((vs[i] - ca * va[i] - cb * vb[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn displacement_moves_vacuum_to_coherent_state() {
        let mut s = MpsState::product([ONE, ZERO], &[0, 0], 6).unwrap();
        let beta = C64::new(0.2, 0.0);
        s.displace(1, beta).unwrap();
        let rho = s.site_density_matrix(1);
        let n: f64 = (0..7).map(|k| rho[(k, k)].re * k as f64).sum();
        assert!((n - 0.04).abs() < 1e-6);
        s.displace(1, -beta).unwrap();
        let back = MpsState::product([ONE, ZERO], &[0, 0], 6).unwrap();
        assert!(back.inner(&s).unwrap().norm_sqr() > 1.0 - 1e-8);
        let before = s.to_dense();
        s.displace(2, ZERO).unwrap();
        assert_eq!(before, s.to_dense());
    }

    #[test]
    fn pair_correlations_match_dense() {
        let dims = [2, 3, 3, 3];
        let s = random_state(&dims, 4, 9);
        let v = s.to_dense();
        let a = annihilation(3);
        let x = Mat::from_fn(3, 3, |i, j| a[(i, j)] + a[(j, i)].conj());
        let c = s.pair_correlations(&[1, 3], &[x.clone(), x.clone()]);
        // dense <x_1 x_3>
        let idx = |s0: usize, n1: usize, n2: usize, n3: usize| ((s0 * 3 + n1) * 3 + n2) * 3 + n3;
        let mut acc = ZERO;
        for s0 in 0..2 {
            for n2 in 0..3 {
                for i1 in 0..3 {
                    for j1 in 0..3 {
                        for i3 in 0..3 {
                            for j3 in 0..3 {
                                acc += v[idx(s0, i1, n2, i3)].conj()
                                    * x[(i1, j1)]
                                    * x[(i3, j3)]
                                    * v[idx(s0, j1, n2, j3)];
                            }
                        }
                    }
                }
            }
        }
        assert!((c[(0, 1)] - acc).norm() < 1e-12);
    }
}
