//! Internal dense-matrix kernels.
//!
//! Complex products are decomposed into real `matrixmultiply` GEMMs (via
//! `ndarray::dot`), which keeps every hot-loop product single-threaded and
//! bit-deterministic regardless of worker count. LAPACK is used only for
//! eigenproblems; eigenvalue-only requests go straight to `zheev`/`dsyev`
//! with `jobz = 'N'`, which is several times faster than computing vectors
//! and discarding them.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const LN_2: f64 = std::f64::consts::LN_2;

/// A complex matrix stored as separate real and imaginary parts.
#[derive(Debug, Clone)]
pub(crate) struct SplitMat {
    pub re: Array2<f64>,
    pub im: Array2<f64>,
}

impl SplitMat {
    pub fn from_c64(a: &ArrayView2<Complex64>) -> Self {
        Self {
            re: a.mapv(|z| z.re),
            im: a.mapv(|z| z.im),
        }
    }

    pub fn to_c64(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros(self.re.dim());
        azip_fill(&mut out, &self.re, &self.im);
        out
    }

    pub fn rows(&self) -> usize {
        self.re.nrows()
    }

    pub fn cols(&self) -> usize {
        self.re.ncols()
    }

    /// `A * A^dagger` of this matrix.
    pub fn outer_gram(&self) -> SplitMat {
        let rt = self.re.t();
        let it = self.im.t();
        SplitMat {
            re: self.re.dot(&rt) + self.im.dot(&it),
            im: self.im.dot(&rt) - self.re.dot(&it),
        }
    }

    /// `A^dagger * A` of this matrix.
    pub fn inner_gram(&self) -> SplitMat {
        let rt = self.re.t();
        let it = self.im.t();
        SplitMat {
            re: rt.dot(&self.re) + it.dot(&self.im),
            im: rt.dot(&self.im) - it.dot(&self.re),
        }
    }
}

fn azip_fill(out: &mut Array2<Complex64>, re: &Array2<f64>, im: &Array2<f64>) {
    ndarray::Zip::from(out)
        .and(re)
        .and(im)
        .for_each(|o, &r, &i| *o = Complex64::new(r, i));
}

/// Dense complex product built from four real GEMMs.
pub(crate) fn cmatmul(a: &ArrayView2<Complex64>, b: &ArrayView2<Complex64>) -> Array2<Complex64> {
    let sa = SplitMat::from_c64(a);
    let sb = SplitMat::from_c64(b);
    let re = sa.re.dot(&sb.re) - sa.im.dot(&sb.im);
    let im = sa.re.dot(&sb.im) + sa.im.dot(&sb.re);
    SplitMat { re, im }.to_c64()
}

/// Eigenvalues (ascending) of a Hermitian matrix, vectors not computed.
///
/// The row-major buffer handed to LAPACK is read column-major, i.e. as the
/// transpose. For Hermitian input that is the complex conjugate, which has
/// the same spectrum.
pub(crate) fn hermitian_eigvals(a: &ArrayView2<Complex64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidOperator("matrix is not square".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[[0, 0]].re]);
    }
    let mut buf: Vec<Complex64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; 3 * n.max(1)];
    let mut info: i32 = 0;
    let jobz = b'N' as std::ffi::c_char;
    let uplo = b'L' as std::ffi::c_char;
    let n_i = n as i32;
    unsafe {
        // workspace query
        let mut wkopt = Complex64::new(0.0, 0.0);
        let lwork_query: i32 = -1;
        lapack_sys::zheev_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr().cast(),
            &n_i,
            w.as_mut_ptr(),
            (&mut wkopt as *mut Complex64).cast(),
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
        let lwork = (wkopt.re as i32).max(2 * n_i);
        let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
        lapack_sys::zheev_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr().cast(),
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr().cast(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend(format!("zheev failed with info = {info}")));
    }
    Ok(w)
}

/// Full eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// the unitary matrix of column eigenvectors.
///
/// LAPACK reads the row-major buffer column-major, i.e. as the conjugate of
/// a Hermitian input; the returned vectors are conjugated back.
pub(crate) fn hermitian_eigh(a: &ArrayView2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidOperator("matrix is not square".into()));
    }
    if n == 0 {
        return Err(Error::InvalidOperator("matrix is empty".into()));
    }
    let mut buf: Vec<Complex64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; 3 * n];
    let mut info: i32 = 0;
    let jobz = b'V' as std::ffi::c_char;
    let uplo = b'L' as std::ffi::c_char;
    let n_i = n as i32;
    unsafe {
        let mut wkopt = Complex64::new(0.0, 0.0);
        let lwork_query: i32 = -1;
        lapack_sys::zheev_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr().cast(),
            &n_i,
            w.as_mut_ptr(),
            (&mut wkopt as *mut Complex64).cast(),
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
        let lwork = (wkopt.re as i32).max(2 * n_i);
        let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
        lapack_sys::zheev_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr().cast(),
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr().cast(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend(format!("zheev failed with info = {info}")));
    }
    // column a of the (column-major) result is buf[a*n..(a+1)*n], an
    // eigenvector of conj(input); conjugate to recover the input's vectors
    let mut vecs = Array2::zeros((n, n));
    for a_idx in 0..n {
        for i in 0..n {
            vecs[[i, a_idx]] = buf[a_idx * n + i].conj();
        }
    }
    Ok((Array1::from(w), vecs))
}

/// Eigenvalues (ascending) of a real symmetric matrix, vectors not computed.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn symmetric_eigvals(a: &ArrayView2<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidOperator("matrix is not square".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[[0, 0]]]);
    }
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut info: i32 = 0;
    let jobz = b'N' as std::ffi::c_char;
    let uplo = b'L' as std::ffi::c_char;
    let n_i = n as i32;
    unsafe {
        let mut wkopt = 0.0f64;
        let lwork_query: i32 = -1;
        lapack_sys::dsyev_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            &mut wkopt,
            &lwork_query,
            &mut info,
        );
        let lwork = (wkopt as i32).max(3 * n_i);
        let mut work = vec![0.0f64; lwork as usize];
        lapack_sys::dsyev_(
            &jobz,
            &uplo,
            &n_i,
            buf.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend(format!("dsyev failed with info = {info}")));
    }
    Ok(w)
}

/// Nonzero eigenvalues of `B * B^dagger` for a split complex `B`, computed on
/// whichever Gram side is smaller. Missing dimensions correspond to exact
/// zeros and are not returned.
pub(crate) fn product_eigvals(b: &SplitMat) -> Result<Vec<f64>> {
    let gram = if b.rows() <= b.cols() {
        b.outer_gram()
    } else {
        b.inner_gram()
    };
    hermitian_eigvals(&gram.to_c64().view())
}

/// log(sum(exp(x_i))) with the usual max shift.
pub(crate) fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// ln(n!) by direct summation; exact to machine precision for the integer
/// arguments used here.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// ln C(n, k).
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// ln(1 - e^x) for x < 0.
pub(crate) fn ln_one_minus_exp(x: f64) -> f64 {
    debug_assert!(x < 0.0);
    if x < -LN_2 {
        (-x.exp()).ln_1p()
    } else {
        (-x.exp_m1()).ln()
    }
}

/// Shannon entropy in bits of a spectrum that should lie in [0, 1].
///
/// Eigenvalues within `slack` below zero (or above one) are clipped; anything
/// farther out is an invalid state.
pub(crate) fn entropy_bits(eigs: &[f64], slack: f64) -> Result<f64> {
    let mut s = 0.0;
    for &lambda in eigs {
        if lambda < -slack || lambda > 1.0 + slack {
            return Err(Error::InvalidState(format!(
                "eigenvalue {lambda} outside [0, 1] beyond tolerance {slack}"
            )));
        }
        let p = lambda.clamp(0.0, 1.0);
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cmatmul_small() {
        let a = array![[c(1.0, 1.0), c(0.0, 2.0)], [c(-1.0, 0.0), c(3.0, -1.0)]];
        let b = array![[c(2.0, 0.0), c(0.0, 1.0)], [c(1.0, 1.0), c(0.5, 0.0)]];
        let got = cmatmul(&a.view(), &b.view());
        for i in 0..2 {
            for j in 0..2 {
                let want = (0..2).map(|k| a[[i, k]] * b[[k, j]]).sum::<Complex64>();
                assert_abs_diff_eq!(got[[i, j]].re, want.re, epsilon = 1e-14);
                assert_abs_diff_eq!(got[[i, j]].im, want.im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn hermitian_eigvals_matches_2x2_closed_form() {
        let a = array![[c(1.0, 0.0), c(0.3, 0.4)], [c(0.3, -0.4), c(-1.0, 0.0)]];
        let eigs = hermitian_eigvals(&a.view()).unwrap();
        let disc = (1.0f64 + 0.3f64.powi(2) + 0.4f64.powi(2)).sqrt();
        assert_abs_diff_eq!(eigs[0], -disc, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], disc, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_eigvals_diagonal() {
        let a = Array2::from_diag(&array![3.0, -1.0, 0.5]);
        let eigs = symmetric_eigvals(&a.view()).unwrap();
        assert_eq!(eigs.len(), 3);
        assert_abs_diff_eq!(eigs[0], -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(eigs[1], 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(eigs[2], 3.0, epsilon = 1e-13);
    }

    #[test]
    fn product_eigvals_uses_small_side() {
        // B is 2 x 4, so B B^dagger is 2 x 2 with two nonzero eigenvalues.
        let re = array![[1.0, 0.0, 2.0, 0.0], [0.0, 1.0, 0.0, -1.0]];
        let im = array![[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]];
        let b = SplitMat { re, im };
        let direct = hermitian_eigvals(&b.outer_gram().to_c64().view()).unwrap();
        let got = product_eigvals(&b).unwrap();
        assert_eq!(got.len(), 2);
        for (g, d) in got.iter().zip(direct.iter()) {
            assert_abs_diff_eq!(g, d, epsilon = 1e-12);
        }
    }

    #[test]
    fn logsumexp_handles_large_offsets() {
        let xs = [1000.0, 1000.0 + (2.0f64).ln()];
        assert_abs_diff_eq!(logsumexp(&xs), 1000.0 + (3.0f64).ln(), epsilon = 1e-12);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert_abs_diff_eq!(ln_factorial(5), (120.0f64).ln(), epsilon = 1e-13);
    }

    #[test]
    fn entropy_of_uniform_pair_is_one_bit() {
        assert_abs_diff_eq!(entropy_bits(&[0.5, 0.5], 1e-10).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(entropy_bits(&[1.0, 0.0], 1e-10).unwrap(), 0.0);
        assert_abs_diff_eq!(
            entropy_bits(&[1.0 + 5e-11, -5e-11], 1e-10).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert!(entropy_bits(&[-1e-3], 1e-10).is_err());
    }
}
