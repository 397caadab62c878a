use super::{hs_inner, unvec_op, zeros, ComplexMatrix, Tolerance, C64, I, ZERO};
use crate::error::{Error, Result};

/// Operator subspace of `B(C^d)` with a Hilbert-Schmidt orthonormal basis.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
}

impl OperatorSubspace {
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    /// Wrap the columns of a `d^2 x k` matrix with orthonormal columns.
    pub fn from_orthonormal_columns(ambient_dim: usize, cols: &ComplexMatrix) -> Self {
        let basis = (0..cols.ncols())
            .map(|k| unvec_op(cols.column(k).as_slice(), ambient_dim, ambient_dim))
            .collect();
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Basis vectors stacked as columns of a `d^2 x dim` matrix.
    pub fn columns(&self) -> ComplexMatrix {
        let n = self.ambient_dim * self.ambient_dim;
        let mut out = zeros(n, self.basis.len());
        for (k, b) in self.basis.iter().enumerate() {
            out.column_mut(k).copy_from_slice(b.as_slice());
        }
        out
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += b * hs_inner(b, x);
        }
        out
    }

    /// Hilbert-Schmidt distance from `x` to the subspace.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        (x - self.project(x)).norm()
    }

    /// Coordinates of `x` in the basis.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| hs_inner(b, x)).collect()
    }

    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut out = zeros(self.ambient_dim, self.ambient_dim);
        for (b, c) in self.basis.iter().zip(coeffs) {
            out += b * *c;
        }
        out
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b) - expected).norm());
            }
        }
        worst
    }
}

/// HS-orthonormal basis of the span of `vectors` (all `d x d`).
///
/// The dimension is the number of singular values of the stacked vectors
/// above `rank_cutoff` times the largest one. Each basis element is rotated
/// so that its largest-magnitude entry is real and positive.
pub fn orthonormalize(
    ambient_dim: usize,
    vectors: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<OperatorSubspace> {
    for v in vectors {
        if v.nrows() != ambient_dim || v.ncols() != ambient_dim {
            return Err(Error::dim(format!(
                "expected {ambient_dim}x{ambient_dim} operators, got {}x{}",
                v.nrows(),
                v.ncols()
            )));
        }
    }
    if vectors.is_empty() || ambient_dim == 0 {
        return Ok(OperatorSubspace::empty(ambient_dim));
    }
    let n = ambient_dim * ambient_dim;
    let mut stacked = zeros(n, vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        stacked.column_mut(k).copy_from_slice(v.as_slice());
    }
    let cols = range_basis(&stacked, tol.rank_cutoff);
    let mut basis = Vec::with_capacity(cols.ncols());
    for k in 0..cols.ncols() {
        let mut col = cols.column(k).into_owned();
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(ZERO);
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            col *= phase;
        }
        basis.push(unvec_op(col.as_slice(), ambient_dim, ambient_dim));
    }
    Ok(OperatorSubspace { ambient_dim, basis })
}

/// Orthonormal columns spanning the numerical range of `m`.
pub(crate) fn range_basis(m: &ComplexMatrix, rel_cut: f64) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return zeros(rows, 0);
    }
    let Ok(svd) = super::dense::svd(m) else {
        return zeros(rows, 0);
    };
    let top = svd.s.first().copied().unwrap_or(0.0);
    let keep = svd
        .s
        .iter()
        .take_while(|&&s| top > 0.0 && s > rel_cut * top)
        .count();
    svd.u.columns(0, keep).into_owned()
}

/// Orthonormal basis (columns) of the numerical null space of `m`.
///
/// Singular values at or below `rel_cut` times the largest one count as zero.
pub fn null_space(m: &ComplexMatrix, rel_cut: f64) -> ComplexMatrix {
    null_space_scaled(m, rel_cut, 0.0)
}

/// [`null_space`] with the cutoff taken relative to `max(top, scale)`, for
/// maps whose natural size is known and whose largest singular value may
/// itself be round-off.
pub fn null_space_scaled(m: &ComplexMatrix, rel_cut: f64, scale: f64) -> ComplexMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    if m.iter().all(|z| *z == ZERO) {
        return super::identity(cols);
    }
    let Ok(svd) = super::dense::svd(m) else {
        return zeros(cols, 0);
    };
    let top = svd.s.first().copied().unwrap_or(0.0).max(scale);
    // singular values beyond min(rows, cols) are implicitly zero
    let rank = svd.s.iter().take_while(|&&s| s > rel_cut * top).count();
    svd.v.columns(rank, cols - rank).into_owned()
}

/// Hermitian operators whose real span is the Hermitian part of the space.
///
/// For a space closed under adjoint, the complex span of the result equals
/// the space itself.
pub fn hermitian_spanning_set(space: &OperatorSubspace) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(2 * space.dim());
    for b in space.basis() {
        let re = (b + b.adjoint()) * C64::new(0.5, 0.0);
        let im = (b - b.adjoint()) * (-I * 0.5);
        for h in [re, im] {
            if h.norm() > 1e-12 {
                out.push(h);
            }
        }
    }
    out
}

/// Spectral norm of `(1 - P_b) Q_a`: zero iff `a` lies inside `b`.
pub fn containment_residual(a: &OperatorSubspace, b: &OperatorSubspace) -> f64 {
    if a.dim() == 0 {
        return 0.0;
    }
    let qa = a.columns();
    let qb = b.columns();
    let resid = if b.dim() == 0 {
        qa
    } else {
        &qa - &qb * (qb.adjoint() * &qa)
    };
    super::op_norm(&resid)
}

/// Sine of the largest principal angle between two subspaces, or 1 when
/// their dimensions differ.
pub fn subspace_distance(a: &OperatorSubspace, b: &OperatorSubspace) -> f64 {
    if a.dim() != b.dim() {
        return 1.0;
    }
    containment_residual(a, b)
        .max(containment_residual(b, a))
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{diag_real, frob, identity, ket_bra, real, ONE};

    fn sigma_x() -> ComplexMatrix {
        ket_bra(2, 0, 1) + ket_bra(2, 1, 0)
    }

    fn sigma_y() -> ComplexMatrix {
        ket_bra(2, 0, 1) * (-I) + ket_bra(2, 1, 0) * I
    }

    #[test]
    fn orthonormalize_examples() {
        let tol = Tolerance::default();
        let s = orthonormalize(2, &[identity(2), identity(2) * real(2.0)], &tol).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(frob(&(&s.basis()[0] - identity(2) / real(2f64.sqrt()))) < 1e-14);

        let s = orthonormalize(2, &[sigma_x(), sigma_y()], &tol).unwrap();
        assert_eq!(s.dim(), 2);

        let s =
            orthonormalize(2, &[ket_bra(2, 0, 0), ket_bra(2, 1, 1), identity(2)], &tol).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn empty_input_is_empty_subspace() {
        let s = orthonormalize(3, &[], &Tolerance::default()).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.ambient_dim(), 3);
    }

    #[test]
    fn orthonormalize_rejects_mixed_dims() {
        let r = orthonormalize(2, &[identity(2), identity(3)], &Tolerance::default());
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let mut m = zeros(1, 3);
        m[(0, 0)] = ONE;
        let n = null_space(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-14);
    }

    #[test]
    fn distance_between_subspaces() {
        let tol = Tolerance::default();
        let diag = orthonormalize(2, &[ket_bra(2, 0, 0), ket_bra(2, 1, 1)], &tol).unwrap();
        let diag2 = orthonormalize(2, &[identity(2), diag_real(&[1.0, -1.0])], &tol).unwrap();
        assert!(subspace_distance(&diag, &diag2) < 1e-14);
        let other = orthonormalize(2, &[identity(2), sigma_x()], &tol).unwrap();
        assert!((subspace_distance(&diag, &other) - 1.0).abs() < 1e-14);
        let line = orthonormalize(2, &[identity(2)], &tol).unwrap();
        assert!(containment_residual(&line, &diag) < 1e-14);
        assert_eq!(subspace_distance(&line, &diag), 1.0);
    }

    #[test]
    fn hermitian_spanning_set_covers_space() {
        let tol = Tolerance::default();
        let s = orthonormalize(2, &[ket_bra(2, 0, 1), ket_bra(2, 1, 0)], &tol).unwrap();
        let herm = hermitian_spanning_set(&s);
        for h in &herm {
            assert!(frob(&(h - h.adjoint())) < 1e-15);
        }
        let back = orthonormalize(2, &herm, &tol).unwrap();
        assert!(subspace_distance(&s, &back) < 1e-14);
    }
}
