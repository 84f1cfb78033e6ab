use faer::Mat;

use super::{transfer, MpsState, SiteTensor};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

/// One block-sparse MPO tensor: a `left x right` grid of optional local
/// operators.
#[derive(Debug, Clone)]
pub struct MpoTensor {
    left: usize,
    right: usize,
    phys: usize,
    blocks: Vec<(usize, usize, Mat<C64>)>,
}

impl MpoTensor {
    pub fn new(left: usize, right: usize, phys: usize) -> Self {
        MpoTensor { left, right, phys, blocks: Vec::new() }
    }

    /// Adds `op` to block `(a, b)`, merging with an existing entry.
    pub fn push(&mut self, a: usize, b: usize, op: Mat<C64>) {
        assert!(a < self.left && b < self.right, "block ({a}, {b}) out of range");
        assert_eq!((op.nrows(), op.ncols()), (self.phys, self.phys));
        if let Some(e) = self.blocks.iter_mut().find(|(x, y, _)| *x == a && *y == b) {
            e.2 += &op;
        } else {
            self.blocks.push((a, b, op));
        }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn phys(&self) -> usize {
        self.phys
    }

    pub fn blocks(&self) -> &[(usize, usize, Mat<C64>)] {
        &self.blocks
    }
}

/// A matrix product operator over the same sites as an [`MpsState`].
#[derive(Debug, Clone)]
pub struct MpoOperator {
    tensors: Vec<MpoTensor>,
    hermitian: bool,
}

impl MpoOperator {
    pub fn new(tensors: Vec<MpoTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::shape("empty operator"));
        }
        if tensors[0].left != 1 || tensors[tensors.len() - 1].right != 1 {
            return Err(Error::shape("operator boundary bonds must be 1"));
        }
        for w in tensors.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::shape("operator bond mismatch"));
            }
        }
        Ok(MpoOperator { tensors, hermitian: false })
    }

    /// Marks the operator as hermitian; expectation values are then checked
    /// to be real.
    pub fn hermitian(mut self) -> Self {
        self.hermitian = true;
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Product of local operators.
    pub fn product(ops: Vec<Mat<C64>>) -> Result<Self> {
        let tensors = ops
            .into_iter()
            .map(|op| {
                let mut t = MpoTensor::new(1, 1, op.nrows());
                t.push(0, 0, op);
                t
            })
            .collect();
        Self::new(tensors)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[MpoTensor] {
        &self.tensors
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.phys).collect()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.right).collect()
    }

    fn check(&self, psi: &MpsState) -> Result<()> {
        if self.phys_dims() != psi.phys_dims() {
            return Err(Error::shape(format!(
                "operator dims {:?} vs state dims {:?}",
                self.phys_dims(),
                psi.phys_dims()
            )));
        }
        Ok(())
    }

    /// Exact application; bond dimensions multiply.
    pub fn apply(&self, psi: &MpsState) -> Result<MpsState> {
        self.check(psi)?;
        let sites = psi
            .sites()
            .iter()
            .zip(&self.tensors)
            .map(|(a, w)| {
                let (dl, d, dr) = (a.left(), a.phys(), a.right());
                let mut out = SiteTensor::zeros(dl * w.left, d, dr * w.right);
                for (wa, wb, op) in &w.blocks {
                    let local = a.apply_local(op.as_ref());
                    for r in 0..dr {
                        for s in 0..d {
                            for l in 0..dl {
                                let v = local.get(l, s, r);
                                let (ll, rr) = (l + dl * wa, r + dr * wb);
                                let old = out.get(ll, s, rr);
                                out.set(ll, s, rr, old + v);
                            }
                        }
                    }
                }
                out
            })
            .collect();
        Ok(MpsState::from_parts(sites, None, psi.truncation_error()))
    }

    /// `<bra|O|ket>` without forming `O|ket>`.
    pub fn matrix_element(&self, bra: &MpsState, ket: &MpsState) -> Result<C64> {
        self.check(bra)?;
        self.check(ket)?;
        let mut env: Vec<Mat<C64>> = vec![Mat::from_fn(1, 1, |_, _| ONE)];
        for ((a, b), w) in bra.sites().iter().zip(ket.sites()).zip(&self.tensors) {
            let mut next: Vec<Mat<C64>> = (0..w.right).map(|_| Mat::zeros(a.right(), b.right())).collect();
            for (wa, wb, op) in &w.blocks {
                let t = transfer(env[*wa].as_ref(), a, b, Some(op.as_ref()));
                next[*wb] += &t;
            }
            env = next;
        }
        Ok(env[0][(0, 0)])
    }

    /// `<psi|O|psi> / <psi|psi>`.
    pub fn expectation(&self, psi: &MpsState) -> Result<C64> {
        let n2 = psi.inner(psi)?.re;
        Ok(self.matrix_element(psi, psi)? / n2)
    }

    /// Real expectation value of a hermitian operator.
    pub fn expectation_real(&self, psi: &MpsState) -> Result<f64> {
        let v = self.expectation(psi)?;
        if self.hermitian && v.im.abs() > 1e-10 * v.re.abs().max(1.0) {
            return Err(Error::domain(format!("hermitian expectation has imaginary part {}", v.im)));
        }
        Ok(v.re)
    }

    /// Dense matrix in the basis where site 0 is most significant. Only for
    /// small systems.
    pub fn to_dense(&self) -> Mat<C64> {
        // acc[b] is the partial operator ending in bond index b
        let mut acc: Vec<Mat<C64>> = vec![Mat::from_fn(1, 1, |_, _| ONE)];
        for w in &self.tensors {
            let dim = acc[0].nrows() * w.phys;
            let mut next: Vec<Mat<C64>> = (0..w.right).map(|_| Mat::zeros(dim, dim)).collect();
            for (wa, wb, op) in &w.blocks {
                let k = kron(&acc[*wa], op);
                next[*wb] += &k;
            }
            acc = next;
        }
        acc.swap_remove(0)
    }

    /// `sum_j c_j O_j` as an exact direct-sum MPO.
    pub fn sum(terms: &[(C64, &MpoOperator)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::shape("empty operator sum"));
        };
        let n = first.len();
        for (_, t) in terms {
            if t.phys_dims() != first.phys_dims() {
                return Err(Error::shape("operator sum over different sites"));
            }
        }
        let mut tensors = Vec::with_capacity(n);
        for i in 0..n {
            let lefts: Vec<usize> = terms.iter().map(|(_, o)| o.tensors[i].left).collect();
            let rights: Vec<usize> = terms.iter().map(|(_, o)| o.tensors[i].right).collect();
            let left = if i == 0 { 1 } else { lefts.iter().sum() };
            let right = if i == n - 1 { 1 } else { rights.iter().sum() };
            let mut t = MpoTensor::new(left, right, first.tensors[i].phys);
            let (mut lo, mut ro) = (0, 0);
            for (j, (c, o)) in terms.iter().enumerate() {
                for (a, b, op) in &o.tensors[i].blocks {
                    let aa = if i == 0 { *a } else { lo + a };
                    let bb = if i == n - 1 { *b } else { ro + b };
                    let scaled = if i == 0 { op * faer::Scale(*c) } else { op.clone() };
                    t.push(aa, bb, scaled);
                }
                lo += lefts[j];
                ro += rights[j];
            }
            tensors.push(t);
        }
        let herm = terms.iter().all(|(c, o)| o.hermitian && c.im == 0.0);
        let out = Self::new(tensors)?;
        Ok(if herm { out.hermitian() } else { out })
    }
}

/// Kronecker product `a (x) b`.
pub(crate) fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| {
        let x = a[(i / rb, j / cb)];
        if x == ZERO {
            ZERO
        } else {
            x * b[(i % rb, j % cb)]
        }
    })
}
