//! Thin wrappers around the dense kernels used by the tensor-network code.
//!
//! Everything runs sequentially so that results are bitwise reproducible for
//! a fixed build.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `dst += alpha * lhs * rhs`
#[inline]
pub fn gemm_acc<L, R>(dst: &mut Mat<C64>, lhs: MatRef<'_, L>, rhs: MatRef<'_, R>, alpha: C64)
where
    L: Conjugate<Canonical = C64>,
    R: Conjugate<Canonical = C64>,
{
    matmul(dst.as_mut(), Accum::Add, lhs, rhs, alpha, Par::Seq);
}

#[inline]
pub fn gemm<L, R>(lhs: MatRef<'_, L>, rhs: MatRef<'_, R>) -> Mat<C64>
where
    L: Conjugate<Canonical = C64>,
    R: Conjugate<Canonical = C64>,
{
    let mut out = Mat::zeros(lhs.nrows(), rhs.ncols());
    matmul(out.as_mut(), Accum::Replace, lhs, rhs, ONE, Par::Seq);
    out
}

/// Thin QR decomposition `m = q * r`.
pub fn qr(m: MatRef<'_, C64>) -> (Mat<C64>, Mat<C64>) {
    let f = m.qr();
    let q = f.compute_thin_Q();
    let r = f.thin_R().to_owned();
    (q, r)
}

/// A singular-value decomposition truncated to a bond dimension.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: Mat<C64>,
    pub s: Vec<f64>,
    /// Conjugate-transposed right factor, `kept x ncols`.
    pub vh: Mat<C64>,
    /// Sum of the squares of the discarded singular values.
    pub discarded: f64,
}

/// Truncated SVD keeping at most `chi_max` values and dropping every value
/// below `cutoff * s_max`. At least one value is always kept.
pub fn truncated_svd(m: MatRef<'_, C64>, chi_max: usize, cutoff: f64) -> TruncatedSvd {
    let svd = m.thin_svd().expect("svd did not converge");
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let mut keep = 0;
    for (j, &s) in sv.iter().enumerate() {
        if j >= chi_max.max(1) {
            break;
        }
        if j > 0 && s <= cutoff * smax {
            break;
        }
        // exact zeros carry no information
        if j > 0 && s == 0.0 {
            break;
        }
        keep += 1;
    }
    let keep = keep.max(1);
    let discarded = sv[keep..].iter().map(|s| s * s).sum();
    let u = svd.U().subcols(0, keep).to_owned();
    let v = svd.V().subcols(0, keep);
    let vh = v.adjoint().to_owned();
    TruncatedSvd { u, s: sv[..keep].to_vec(), vh, discarded }
}

/// Eigen-decomposition of a hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: MatRef<'_, C64>) -> (Vec<f64>, Mat<C64>) {
    let evd = m.self_adjoint_eigen(Side::Lower).expect("eigensolver did not converge");
    let vals = evd.S().column_vector().iter().map(|x| x.re).collect();
    (vals, evd.U().to_owned())
}

/// Eigen-decomposition of a real symmetric matrix; eigenvalues ascending.
pub fn symmetric_eigen(m: MatRef<'_, f64>) -> (Vec<f64>, Mat<f64>) {
    let evd = m.self_adjoint_eigen(Side::Lower).expect("eigensolver did not converge");
    let vals = evd.S().column_vector().iter().copied().collect();
    (vals, evd.U().to_owned())
}

pub fn identity(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

fn norm1(m: MatRef<'_, C64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant. Intended for the small matrices of Krylov spaces and local
/// propagators.
pub fn expm(a: MatRef<'_, C64>) -> Mat<C64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let nrm = norm1(a);
    let squarings = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = C64::from(0.5f64.powi(squarings));
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let id = identity(n);
    let a2 = gemm(a.as_ref(), a.as_ref());
    let a4 = gemm(a2.as_ref(), a2.as_ref());
    let a6 = gemm(a4.as_ref(), a2.as_ref());
    let comb = |c6: f64, c4: f64, c2: f64, c0: f64| {
        Mat::from_fn(n, n, |i, j| {
            a6[(i, j)] * c6 + a4[(i, j)] * c4 + a2[(i, j)] * c2 + id[(i, j)] * c0
        })
    };
    let u_inner = {
        let t = comb(B[13], B[11], B[9], 0.0);
        let mut acc = comb(B[7], B[5], B[3], B[1]);
        gemm_acc(&mut acc, a6.as_ref(), t.as_ref(), ONE);
        acc
    };
    let u = gemm(a.as_ref(), u_inner.as_ref());
    let v = {
        let t = comb(B[12], B[10], B[8], 0.0);
        let mut acc = comb(B[6], B[4], B[2], B[0]);
        gemm_acc(&mut acc, a6.as_ref(), t.as_ref(), ONE);
        acc
    };
    let p = Mat::from_fn(n, n, |i, j| v[(i, j)] + u[(i, j)]);
    let q = Mat::from_fn(n, n, |i, j| v[(i, j)] - u[(i, j)]);
    let mut r = p;
    q.partial_piv_lu().solve_in_place(r.as_mut());
    for _ in 0..squarings {
        r = gemm(r.as_ref(), r.as_ref());
    }
    r
}

/// Exponential of `coefficient * h` for hermitian `h`, via its eigenbasis.
pub fn hermitian_expm(h: MatRef<'_, C64>, coefficient: C64) -> Mat<C64> {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let scaled = Mat::from_fn(n, n, |i, j| vecs[(i, j)] * (coefficient * vals[j]).exp());
    gemm(scaled.as_ref(), vecs.adjoint())
}

pub fn frobenius_sq(m: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s
}

/// Maximum absolute entry of `a - b`.
pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}
