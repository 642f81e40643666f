//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return vec![m[(0, 0)].norm()];
    }
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator (spectral) norm.
pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Spectral norm of `m - m*`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    norm2(&(m - m.adjoint()))
}

/// Eigenvalues of a Hermitian matrix in ascending order. The input is
/// symmetrized first so round-off in the off-diagonal does not leak in.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Eigenvalues of a general complex square matrix, read off the diagonal of
/// its complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    let n = m.nrows();
    match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        _ => {
            let (_, t) = Schur::new(m.clone()).unpack();
            (0..n).map(|k| t[(k, k)]).collect()
        }
    }
}

/// Unit right singular vector for the smallest singular value, together with
/// that singular value. For `m = Z - λI` with λ an eigenvalue this is an
/// eigenvector of `Z`.
pub fn null_vector(m: &CMat) -> (CVec, f64) {
    let n = m.ncols();
    if n == 1 {
        return (CVec::from_element(1, c(1.0, 0.0)), m.column(0).norm());
    }
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .expect("non-empty matrix");
    let v: CVec = v_t.row(k).adjoint();
    (v, s)
}

pub fn inverse(m: &CMat, context: &'static str) -> Result<CMat> {
    let n = m.nrows();
    if n == 1 {
        let v = m[(0, 0)];
        if v.norm() == 0.0 || !v.is_finite() {
            return Err(Error::Singular(context));
        }
        return Ok(CMat::from_element(1, 1, v.inv()));
    }
    let inv = m.clone().lu().try_inverse().ok_or(Error::Singular(context))?;
    if inv.iter().all(|v| v.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::Singular(context))
    }
}

/// `(z_op - mu I)^{-1}`.
pub fn resolvent(z_op: &CMat, mu: Complex64) -> Result<CMat> {
    let shifted = z_op - identity(z_op.nrows()).scale_complex(mu);
    inverse(&shifted, "resolvent")
}

pub trait ScaleComplex {
    fn scale_complex(&self, s: Complex64) -> CMat;
}

impl ScaleComplex for CMat {
    fn scale_complex(&self, s: Complex64) -> CMat {
        self.map(|v| v * s)
    }
}

/// Groups nearly equal eigenvalues. Returns (representative, multiplicity)
/// pairs; the representative is the mean of the cluster.
pub fn cluster_eigenvalues(values: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for &v in values {
        match clusters
            .iter_mut()
            .find(|cl| cl.iter().any(|w| (*w - v).norm() <= radius))
        {
            Some(cl) => cl.push(v),
            None => clusters.push(vec![v]),
        }
    }
    clusters
        .into_iter()
        .map(|cl| {
            let n = cl.len();
            let sum: Complex64 = cl.iter().sum();
            (sum / n as f64, n)
        })
        .collect()
}

/// Sorts complex numbers by real part, then imaginary part.
pub fn sort_complex(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal_matrix() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(3.0, 4.0), c(1.0, 0.0)]));
        assert!((norm2(&m) - 5.0).abs() < 1e-14);
        assert!((smallest_singular_value(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schur_eigenvalues_of_triangular() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, 0.0), c(-1.0, 0.5)]);
        let mut ev = eigenvalues(&m);
        sort_complex(&mut ev);
        assert!((ev[0] - c(-1.0, 0.5)).norm() < 1e-12);
        assert!((ev[1] - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn null_vector_is_eigenvector() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]);
        for lam in eigenvalues(&m) {
            let shifted = &m - identity(2).scale_complex(lam);
            let (v, s) = null_vector(&shifted);
            assert!(s < 1e-12);
            assert!((&m * &v - v.map(|x| x * lam)).norm() < 1e-12);
        }
    }

    #[test]
    fn clustering_groups_close_values() {
        let v = [c(1.0, 0.0), c(1.0 + 1e-10, 0.0), c(2.0, 0.0)];
        let cl = cluster_eigenvalues(&v, 1e-8);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].1, 2);
    }

    #[test]
    fn singular_inverse_is_error() {
        let m = CMat::zeros(2, 2);
        assert!(inverse(&m, "test").is_err());
    }
}
