//! Dense complex linear algebra used by the rest of the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Because nalgebra stores
//! column-major, the column-stacking vectorization `vec(X)` is simply the
//! underlying storage slice, which is what [`vec_op`] and [`unvec_op`] use.

mod dense;
mod schur;
mod subspace;

pub(crate) use dense::pseudo_inverse;

pub use schur::{eig_general, schur, EigenCluster, InvariantSubspace, Schur, Spectrum};
pub use subspace::{
    containment_residual, hermitian_spanning_set, null_space, null_space_scaled, orthonormalize,
    subspace_distance, OperatorSubspace,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical thresholds threaded through every decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Radius for deciding that an eigenvalue equals 1 or lies on the unit circle.
    pub eig_cluster: f64,
    /// Relative cutoff for rank, support and pseudo-inverse decisions.
    pub rank_cutoff: f64,
    /// Acceptance threshold for verification predicates.
    pub verify: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eig_cluster: 1e-9,
            rank_cutoff: 1e-10,
            verify: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(eig_cluster: f64, rank_cutoff: f64, verify: f64) -> Result<Self> {
        let tol = Self {
            eig_cluster,
            rank_cutoff,
            verify,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.eig_cluster, self.rank_cutoff, self.verify]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0);
        if !all_positive {
            return Err(Error::param(
                "tolerances must be finite and strictly positive",
            ));
        }
        if self.rank_cutoff > self.eig_cluster {
            return Err(Error::param("rank_cutoff must not exceed eig_cluster"));
        }
        Ok(())
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// `|i><j|` on a `d`-dimensional space.
pub fn ket_bra(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Outer product `|u><v|`.
pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let d = values.len();
    let mut m = zeros(d, d);
    for (k, v) in values.iter().enumerate() {
        m[(k, k)] = real(*v);
    }
    m
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_op(x: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec_op`] for a `rows x cols` operator.
pub fn unvec_op(v: &[C64], rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(rows, cols, v)
}

/// Hilbert-Schmidt inner product `tr(X^dagger Y)`.
pub fn hs_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum()
}

pub fn frob(x: &ComplexMatrix) -> f64 {
    x.norm()
}

pub fn trace(x: &ComplexMatrix) -> C64 {
    x.trace()
}

pub fn hermitian_part(x: &ComplexMatrix) -> ComplexMatrix {
    (x + x.adjoint()) * real(0.5)
}

pub fn is_square(x: &ComplexMatrix) -> bool {
    x.nrows() == x.ncols()
}

pub(crate) fn require_square(x: &ComplexMatrix, what: &str) -> Result<usize> {
    if is_square(x) {
        Ok(x.nrows())
    } else {
        Err(Error::dim(format!(
            "{what} must be square, got {}x{}",
            x.nrows(),
            x.ncols()
        )))
    }
}

pub fn all_finite(x: &ComplexMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Sum of singular values.
pub fn trace_norm(x: &ComplexMatrix) -> Result<f64> {
    require_square(x, "trace_norm input")?;
    if x.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(x).iter().sum())
}

pub fn singular_values(x: &ComplexMatrix) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    dense::singular_values(x).unwrap_or_else(|_| {
        x.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    })
}

/// Spectral norm (largest singular value).
pub fn op_norm(x: &ComplexMatrix) -> f64 {
    singular_values(x).into_iter().fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn herm_eig(h: &ComplexMatrix, tol: &Tolerance) -> Result<(Vec<f64>, ComplexMatrix)> {
    let d = require_square(h, "herm_eig input")?;
    let scale = frob(h).max(1.0);
    let skew = frob(&(h - h.adjoint()));
    if skew > tol.verify * scale {
        return Err(Error::contract("herm_eig input is not Hermitian", skew));
    }
    if d == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    dense::self_adjoint_eig(&hermitian_part(h))
}

/// Eigenvectors of a PSD matrix spanning its numerical support, with the
/// matching eigenvalues.
pub fn psd_support(h: &ComplexMatrix, tol: &Tolerance) -> Result<(Vec<f64>, ComplexMatrix)> {
    let d = require_square(h, "PSD input")?;
    let (values, vectors) = herm_eig(h, tol)?;
    let top = values.last().copied().unwrap_or(0.0);
    let lowest = values.first().copied().unwrap_or(0.0);
    if lowest < -tol.verify * top.abs().max(1.0) {
        return Err(Error::contract(
            "matrix is not positive semidefinite",
            -lowest,
        ));
    }
    if top <= 0.0 {
        return Ok((Vec::new(), zeros(d, 0)));
    }
    let cut = tol.rank_cutoff * top;
    let keep: Vec<usize> = (0..d).filter(|&k| values[k] > cut).collect();
    let mut basis = zeros(d, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &vectors.column(src));
    }
    Ok((keep.iter().map(|&k| values[k]).collect(), basis))
}

/// Orthonormal basis (columns) of the support of a PSD matrix.
pub fn support_basis(h: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    Ok(psd_support(h, tol)?.1)
}

/// Orthogonal projector onto the support of a PSD matrix.
pub fn support_projector(h: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let basis = support_basis(h, tol)?;
    Ok(&basis * basis.adjoint())
}

/// Moore-Penrose inverse square root: `H^{-1/2}` on the support, zero on the kernel.
pub fn psd_inv_sqrt(h: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    psd_power(h, -0.5, tol)
}

pub fn psd_sqrt(h: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    psd_power(h, 0.5, tol)
}

fn psd_power(h: &ComplexMatrix, p: f64, tol: &Tolerance) -> Result<ComplexMatrix> {
    let (values, basis) = psd_support(h, tol)?;
    let mut scaled = basis.clone();
    for (k, v) in values.iter().enumerate() {
        let f = v.powf(p);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= f);
    }
    Ok(scaled * basis.adjoint())
}

/// Minimum eigenvalue of the Hermitian part.
pub fn min_eigenvalue(h: &ComplexMatrix) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    let hp = hermitian_part(h);
    match dense::self_adjoint_eig(&hp) {
        Ok((values, _)) => values[0],
        Err(_) => SymmetricEigen::new(hp).eigenvalues.min(),
    }
}

/// Partial trace over the first factor of `C^a (x) C^b`.
pub fn partial_trace_first(x: &ComplexMatrix, a: usize, b: usize) -> ComplexMatrix {
    let mut out = zeros(b, b);
    for k in 0..a {
        out += x.view((k * b, k * b), (b, b));
    }
    out
}

/// Partial trace over the second factor of `C^a (x) C^b`.
pub fn partial_trace_second(x: &ComplexMatrix, a: usize, b: usize) -> ComplexMatrix {
    let mut out = zeros(a, a);
    for i in 0..a {
        for j in 0..a {
            let block = x.view((i * b, j * b), (b, b));
            out[(i, j)] = block.trace();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_z() -> ComplexMatrix {
        diag_real(&[1.0, -1.0])
    }

    fn plus_state() -> ComplexMatrix {
        ComplexMatrix::from_element(2, 2, real(0.5))
    }

    #[test]
    fn trace_norm_examples() {
        let tn = trace_norm(&sigma_z()).unwrap();
        assert!((tn - 2.0).abs() < 1e-14);
        assert_eq!(trace_norm(&zeros(3, 3)).unwrap(), 0.0);
        // |0><0| - |+><+| = [[1/2, -1/2], [-1/2, -1/2]] has eigenvalues +-1/sqrt(2).
        let x = ket_bra(2, 0, 0) - plus_state();
        assert!((trace_norm(&x).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_rejects_rectangular() {
        assert!(matches!(trace_norm(&zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn herm_eig_examples() {
        let tol = Tolerance::default();
        let (v, _) = herm_eig(&sigma_z(), &tol).unwrap();
        assert_eq!(v, vec![-1.0, 1.0]);
        let (v, _) = herm_eig(&diag_real(&[0.25, 0.75]), &tol).unwrap();
        assert!((v[0] - 0.25).abs() < 1e-15 && (v[1] - 0.75).abs() < 1e-15);
        let (v, vecs) = herm_eig(&zeros(3, 3), &tol).unwrap();
        assert_eq!(v, vec![0.0; 3]);
        assert!(frob(&(vecs.adjoint() * &vecs - identity(3))) < 1e-14);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let x = ket_bra(2, 0, 1);
        assert!(matches!(
            herm_eig(&x, &Tolerance::default()),
            Err(Error::Contract { .. })
        ));
    }

    #[test]
    fn support_projector_examples() {
        let tol = Tolerance::default();
        let p = support_projector(&diag_real(&[0.5, 0.5, 0.0]), &tol).unwrap();
        assert!(frob(&(p - diag_real(&[1.0, 1.0, 0.0]))) < 1e-14);
        let p = support_projector(&(identity(4) / real(4.0)), &tol).unwrap();
        assert!(frob(&(p - identity(4))) < 1e-14);
        let p = support_projector(&diag_real(&[0.25, 0.75]), &tol).unwrap();
        assert!(frob(&(p - identity(2))) < 1e-14);
    }

    #[test]
    fn support_projector_rejects_negative() {
        let r = support_projector(&diag_real(&[1.0, -0.1]), &Tolerance::default());
        assert!(matches!(r, Err(Error::Contract { .. })));
    }

    #[test]
    fn psd_inv_sqrt_examples() {
        let tol = Tolerance::default();
        let r = psd_inv_sqrt(&diag_real(&[4.0, 0.0]), &tol).unwrap();
        assert!(frob(&(r - diag_real(&[0.5, 0.0]))) < 1e-14);
        let r = psd_inv_sqrt(&identity(3), &tol).unwrap();
        assert!(frob(&(r - identity(3))) < 1e-14);
        let r = psd_inv_sqrt(&diag_real(&[0.25, 0.75]), &tol).unwrap();
        assert!(frob(&(r - diag_real(&[2.0, 2.0 / 3f64.sqrt()]))) < 1e-13);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::default().validate().is_ok());
        assert!(Tolerance::new(1e-9, 1e-8, 1e-8).is_err());
        assert!(Tolerance::new(0.0, 0.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-9, 1e-10, f64::NAN).is_err());
    }

    #[test]
    fn vec_is_column_stacking() {
        let mut x = zeros(2, 2);
        x[(0, 0)] = real(1.0);
        x[(1, 0)] = real(2.0);
        x[(0, 1)] = real(3.0);
        x[(1, 1)] = real(4.0);
        let v = vec_op(&x);
        let expected: Vec<C64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&r| real(r)).collect();
        assert_eq!(v.as_slice(), expected.as_slice());
        assert_eq!(unvec_op(v.as_slice(), 2, 2), x);
    }

    #[test]
    fn partial_traces() {
        let a = diag_real(&[0.5, 0.5]);
        let b = diag_real(&[0.25, 0.75]);
        let x = kron(&a, &b);
        assert!(frob(&(partial_trace_first(&x, 2, 2) - &b)) < 1e-15);
        assert!(frob(&(partial_trace_second(&x, 2, 2) - &a)) < 1e-15);
    }
}
