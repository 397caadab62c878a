//! SVD and Hermitian eigensolvers, delegated to faer.

use faer::Mat;

use super::{zeros, ComplexMatrix, C64};
use crate::error::{Error, Result};

fn to_faer(m: &ComplexMatrix) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full SVD `m = U diag(s) V^dagger` with descending singular values.
pub(crate) struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub(crate) fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: super::identity(rows),
            s: Vec::new(),
            v: super::identity(cols),
        });
    }
    let f = to_faer(m)
        .svd()
        .map_err(|e| Error::numeric(format!("SVD did not converge: {e:?}"), 0.0))?;
    let s = f.S().column_vector().iter().map(|z| z.re).collect();
    Ok(Svd {
        u: from_faer(f.U()),
        s,
        v: from_faer(f.V()),
    })
}

pub(crate) fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let s = to_faer(m)
        .singular_values()
        .map_err(|e| Error::numeric(format!("SVD did not converge: {e:?}"), 0.0))?;
    Ok(s)
}

/// Eigenpairs of a Hermitian matrix, ascending.
pub(crate) fn self_adjoint_eig(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if h.is_empty() {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let f = to_faer(h)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::numeric(format!("eigensolver did not converge: {e:?}"), 0.0))?;
    let values: Vec<f64> = f.S().column_vector().iter().map(|z| z.re).collect();
    let vectors = from_faer(f.U());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = order.iter().map(|&k| values[k]).collect();
    let mut out = zeros(h.nrows(), h.ncols());
    for (dst, &src) in order.iter().enumerate() {
        out.set_column(dst, &vectors.column(src));
    }
    Ok((sorted, out))
}

/// Moore-Penrose pseudo-inverse, discarding singular values at or below `cut`.
pub(crate) fn pseudo_inverse(m: &ComplexMatrix, cut: f64) -> Result<ComplexMatrix> {
    let f = svd(m)?;
    let mut out = zeros(m.ncols(), m.nrows());
    for (k, &s) in f.s.iter().enumerate() {
        if s > cut {
            out += f.v.column(k) * f.u.column(k).adjoint() * C64::new(1.0 / s, 0.0);
        }
    }
    Ok(out)
}
