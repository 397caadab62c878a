//! Complex Schur decomposition with eigenvalue reordering.
//!
//! Invariant subspaces are read off as leading Schur vectors after moving the
//! selected eigenvalues to the top-left of the triangular factor. This avoids
//! forming eigenvector matrices, which become ill-conditioned when eigenvalues
//! cluster (as they do at 1 for channels with large fixed spaces).

use super::{frob, require_square, zeros, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// `A = Q T Q^dagger` with `Q` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

type Rot = [[C64; 2]; 2];

fn rot_rows(m: &mut ComplexMatrix, k: usize, g: &Rot, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = m[(k, j)];
        let b = m[(k + 1, j)];
        m[(k, j)] = g[0][0] * a + g[0][1] * b;
        m[(k + 1, j)] = g[1][0] * a + g[1][1] * b;
    }
}

fn rot_cols(m: &mut ComplexMatrix, k: usize, u: &Rot, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = m[(i, k)];
        let b = m[(i, k + 1)];
        m[(i, k)] = a * u[0][0] + b * u[1][0];
        m[(i, k + 1)] = a * u[0][1] + b * u[1][1];
    }
}

fn adjoint2(g: &Rot) -> Rot {
    [
        [g[0][0].conj(), g[1][0].conj()],
        [g[0][1].conj(), g[1][1].conj()],
    ]
}

/// Unitary `G` with `G [x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> Rot {
    if y == ZERO {
        return [[ONE, ZERO], [ZERO, ONE]];
    }
    if x == ZERO {
        return [[ZERO, ONE], [-ONE, ZERO]];
    }
    let nx = x.norm();
    let nrm = nx.hypot(y.norm());
    let c = C64::new(nx / nrm, 0.0);
    let s = (x / nx) * y.conj() / nrm;
    [[c, s], [-s.conj(), c]]
}

fn hessenberg(h: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<C64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let alpha = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = v[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if alpha == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            ONE
        };
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vnorm2;

        for j in k..n {
            let s: C64 = (0..len).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            let s = s * beta;
            for i in 0..len {
                h[(k + 1 + i, j)] -= v[i] * s;
            }
        }
        for mat in [&mut *h, &mut *q] {
            for r in 0..n {
                let s: C64 = (0..len).map(|j| mat[(r, k + 1 + j)] * v[j]).sum();
                let s = s * beta;
                for j in 0..len {
                    mat[(r, k + 1 + j)] -= s * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_iterate(h: &mut ComplexMatrix, q: &mut ComplexMatrix) -> Result<()> {
    let n = h.nrows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let anorm = frob(h).max(f64::MIN_POSITIVE);
    let max_total = 60 * n + 100;
    let mut total = 0usize;
    let mut iter = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = anorm;
            }
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if total > max_total {
            return Err(Error::numeric(
                "Schur QR iteration did not converge",
                h[(hi, hi - 1)].norm(),
            ));
        }

        let mu = if iter.is_multiple_of(10) {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].re.abs(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - mu, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let g = givens(x, y);
            let u = adjoint2(&g);
            let start = if k == l { l } else { k - 1 };
            rot_rows(h, k, &g, start..n);
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            rot_cols(h, k, &u, 0..(k + 3).min(hi + 1));
            rot_cols(q, k, &u, 0..n);
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok(())
}

/// Complex Schur decomposition of a square matrix.
pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    let n = require_square(a, "Schur input")?;
    let mut t = a.clone();
    let mut q = ComplexMatrix::identity(n, n);
    hessenberg(&mut t, &mut q);
    qr_iterate(&mut t, &mut q)?;
    Ok(Schur { q, t })
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.t.diagonal().iter().copied().collect()
    }

    /// Exchange diagonal entries `k` and `k+1` by a unitary similarity.
    fn swap(&mut self, k: usize) {
        let n = self.t.nrows();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let t12 = self.t[(k, k + 1)];
        let x = t12;
        let y = t22 - t11;
        let nrm = x.norm().hypot(y.norm());
        if nrm == 0.0 {
            return;
        }
        let (a, b) = (x / nrm, y / nrm);
        // columns of u: eigenvector for t22, then its orthogonal complement
        let u: Rot = [[a, -b.conj()], [b, a.conj()]];
        let g = adjoint2(&u);
        rot_rows(&mut self.t, k, &g, k..n);
        rot_cols(&mut self.t, k, &u, 0..k + 2);
        rot_cols(&mut self.q, k, &u, 0..n);
        self.t[(k + 1, k)] = ZERO;
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
    }

    /// Move every eigenvalue accepted by `select` to the leading positions,
    /// keeping relative order. Returns how many were selected.
    pub fn reorder(&mut self, select: impl Fn(C64) -> bool) -> usize {
        let n = self.t.nrows();
        let mut next = 0;
        for i in 0..n {
            if select(self.t[(i, i)]) {
                let mut pos = i;
                while pos > next {
                    self.swap(pos - 1);
                    pos -= 1;
                }
                next += 1;
            }
        }
        next
    }
}

/// Orthonormal basis of an invariant subspace, `M B = B T11`.
#[derive(Debug, Clone)]
pub struct InvariantSubspace {
    pub basis: ComplexMatrix,
    pub block: ComplexMatrix,
    /// `||M B - B T11||_F`
    pub residual: f64,
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Frobenius norm of the strictly upper part of the triangular block.
    ///
    /// Nonzero values inside a cluster of (numerically) equal eigenvalues
    /// indicate a Jordan-like structure.
    pub fn departure_from_normality(&self) -> f64 {
        let k = self.block.nrows();
        let mut s = 0.0;
        for j in 0..k {
            for i in 0..j {
                s += self.block[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    }
}

/// A group of eigenvalues within a clustering radius of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub center: C64,
    pub members: Vec<C64>,
}

impl EigenCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Spectral data of a general square matrix: Schur forms of `M` and of
/// `M^dagger`, from which right and left invariant subspaces are extracted.
#[derive(Debug, Clone)]
pub struct Spectrum {
    matrix: ComplexMatrix,
    right: Schur,
    left: Schur,
}

/// Spectral decomposition of a general complex square matrix.
pub fn eig_general(m: &ComplexMatrix) -> Result<Spectrum> {
    require_square(m, "eig_general input")?;
    let right = schur(m)?;
    let left = schur(&m.adjoint())?;
    let spec = Spectrum {
        matrix: m.clone(),
        right,
        left,
    };
    let residual = frob(&(&spec.right.q * &spec.right.t * spec.right.q.adjoint() - m));
    let scale = frob(m).max(1.0);
    if residual > 1e-8 * scale {
        return Err(Error::numeric(
            "Schur reconstruction residual too large",
            residual,
        ));
    }
    Ok(spec)
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.right.eigenvalues()
    }

    /// Eigenvalues as seen from the left Schur form, conjugated back so they
    /// are directly comparable with [`Spectrum::eigenvalues`].
    pub fn left_eigenvalues(&self) -> Vec<C64> {
        self.left.eigenvalues().iter().map(|z| z.conj()).collect()
    }

    pub fn schur(&self) -> &Schur {
        &self.right
    }

    /// Single-linkage clusters of eigenvalues at the given radius.
    pub fn clusters(&self, radius: f64) -> Vec<EigenCluster> {
        let values = self.eigenvalues();
        let n = values.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn find(label: &mut [usize], mut i: usize) -> usize {
            while label[i] != i {
                label[i] = label[label[i]];
                i = label[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if (values[i] - values[j]).norm() <= radius {
                    let (a, b) = (find(&mut label, i), find(&mut label, j));
                    if a != b {
                        label[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut out: Vec<(usize, EigenCluster)> = Vec::new();
        for i in 0..n {
            let root = find(&mut label, i);
            match out.iter_mut().find(|(r, _)| *r == root) {
                Some((_, cl)) => cl.members.push(values[i]),
                None => out.push((
                    root,
                    EigenCluster {
                        center: ZERO,
                        members: vec![values[i]],
                    },
                )),
            }
        }
        out.into_iter()
            .map(|(_, mut cl)| {
                cl.center = cl.members.iter().sum::<C64>() / cl.members.len() as f64;
                cl
            })
            .collect()
    }

    /// Right invariant subspace for the eigenvalues accepted by `select`.
    pub fn right_invariant(&self, select: impl Fn(C64) -> bool) -> InvariantSubspace {
        extract(&self.matrix, self.right.clone(), select)
    }

    /// Left invariant subspace (`M^dagger Y = Y T11`) for the eigenvalues of
    /// `M` accepted by `select`.
    pub fn left_invariant(&self, select: impl Fn(C64) -> bool) -> InvariantSubspace {
        extract(&self.matrix.adjoint(), self.left.clone(), |z| {
            select(z.conj())
        })
    }
}

fn extract(m: &ComplexMatrix, mut s: Schur, select: impl Fn(C64) -> bool) -> InvariantSubspace {
    let k = s.reorder(select);
    let n = s.t.nrows();
    let basis = s.q.columns(0, k).into_owned();
    let block = if k == 0 {
        zeros(0, 0)
    } else {
        s.t.view((0, 0), (k, k)).into_owned()
    };
    let residual = if k == 0 || n == 0 {
        0.0
    } else {
        frob(&(m * &basis - &basis * &block))
    };
    InvariantSubspace {
        basis,
        block,
        residual,
    }
}
