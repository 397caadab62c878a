//! Fixed and rotating points of a channel from its superoperator spectrum.
//!
//! The fixed space `Sigma` is the right eigenspace of the superoperator at
//! eigenvalue 1 and the dual space `B` (fixed points of the adjoint) is the
//! left eigenspace. Both are read from reordered Schur forms. The projector
//! onto `Sigma` along the other spectral subspaces is `R (L^dagger R)^{-1} L^dagger`
//! built from the two orthonormal bases.

use nalgebra::LU;
use serde::Serialize;

use crate::channel::{power_mean, Channel};
use crate::error::{Error, Result};
use crate::matcore::{
    eig_general, frob, identity, orthonormalize, psd_support, real, unvec_op, vec_op,
    ComplexMatrix, OperatorSubspace, Spectrum, Tolerance, C64, ONE,
};

/// Which part of the spectrum a [`FixedSpaces`] value describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeripheralSelection {
    /// Eigenvalue 1: fixed points.
    Fixed,
    /// All unit-modulus eigenvalues: rotating points.
    UnitCircle,
}

impl PeripheralSelection {
    fn distance(self, z: C64) -> f64 {
        match self {
            PeripheralSelection::Fixed => (z - ONE).norm(),
            PeripheralSelection::UnitCircle => (1.0 - z.norm()).abs(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SpectralDiagnostics {
    /// `1 - max |lambda|` over the non-selected eigenvalues (1 if there are none).
    pub spectral_gap: f64,
    /// `||S R - R T||_F` on the selected right invariant subspace.
    pub reconstruction_residual: f64,
    /// Strictly upper part of the Schur block of the selected cluster.
    pub semisimplicity_defect: f64,
    pub warnings: Vec<String>,
}

/// Right and left invariant spaces for the selected part of the spectrum,
/// plus the spectral projector onto the right one.
#[derive(Debug, Clone)]
pub struct FixedSpaces {
    pub selection: PeripheralSelection,
    /// Schrodinger-picture points (fixed states or rotating points).
    pub sigma: OperatorSubspace,
    /// Heisenberg-picture points of the adjoint.
    pub b_space: OperatorSubspace,
    /// Superoperator of the spectral projector onto `sigma`.
    pub einf: ComplexMatrix,
    pub diagnostics: SpectralDiagnostics,
}

impl FixedSpaces {
    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// Apply the projector `einf` to an operator.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.sigma.ambient_dim();
        let v = &self.einf * vec_op(x);
        unvec_op(v.as_slice(), d, d)
    }
}

/// Unit-modulus eigenoperators and their span.
#[derive(Debug, Clone)]
pub struct RotatingSpace {
    pub basis: OperatorSubspace,
    /// `(lambda_j, X_j)` with `E(X_j) = lambda_j X_j` and `|lambda_j| = 1`.
    pub eigenoperators: Vec<(C64, ComplexMatrix)>,
}

impl RotatingSpace {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn eigenphases(&self) -> Vec<C64> {
        self.eigenoperators.iter().map(|(z, _)| *z).collect()
    }
}

/// Joint support of the selected points.
#[derive(Debug, Clone)]
pub struct SupportInfo {
    pub projector: ComplexMatrix,
    /// Orthonormal columns spanning the support.
    pub basis: ComplexMatrix,
    pub rank: usize,
    /// `einf(1/d)`: a state whose support is the whole joint support.
    pub max_rank_fixed_state: ComplexMatrix,
}

/// Spectrum of the channel's superoperator.
pub fn superoperator_spectrum(e: &Channel) -> Result<Spectrum> {
    eig_general(e.superoperator())
}

/// Fixed points of the channel and of its adjoint.
pub fn fixed_spaces(e: &Channel, tol: &Tolerance) -> Result<FixedSpaces> {
    let spec = superoperator_spectrum(e)?;
    spaces_from_spectrum(&spec, e.dim(), PeripheralSelection::Fixed, tol)
}

/// Rotating points of the channel and of its adjoint, with the projector
/// onto the peripheral spectral subspace.
pub fn peripheral_spaces(e: &Channel, tol: &Tolerance) -> Result<FixedSpaces> {
    let spec = superoperator_spectrum(e)?;
    spaces_from_spectrum(&spec, e.dim(), PeripheralSelection::UnitCircle, tol)
}

/// Shared implementation of [`fixed_spaces`] and [`peripheral_spaces`] for an
/// already computed superoperator spectrum of a channel on `C^d`.
pub fn spaces_from_spectrum(
    spec: &Spectrum,
    d: usize,
    selection: PeripheralSelection,
    tol: &Tolerance,
) -> Result<FixedSpaces> {
    let radius = tol.eig_cluster;
    let select = |z: C64| selection.distance(z) <= radius;
    let right = spec.right_invariant(select);
    let left = spec.left_invariant(select);

    let mut diagnostics = SpectralDiagnostics {
        spectral_gap: 1.0,
        reconstruction_residual: right.residual.max(left.residual),
        ..Default::default()
    };
    let values = spec.eigenvalues();
    for z in &values {
        let dist = selection.distance(*z);
        if dist > radius {
            diagnostics.spectral_gap = diagnostics.spectral_gap.min(1.0 - z.norm());
            if dist <= 10.0 * radius {
                diagnostics.warnings.push(format!(
                    "eigenvalue {:.12}{:+.12}i lies {dist:.3e} from the selected set, inside the ambiguity annulus",
                    z.re, z.im
                ));
            }
        }
    }
    if right.dim() != left.dim() {
        return Err(Error::numeric(
            format!(
                "right and left peripheral multiplicities differ ({} vs {}); spectrum is mis-clustered",
                right.dim(),
                left.dim()
            ),
            (right.dim() as f64 - left.dim() as f64).abs(),
        ));
    }
    if selection == PeripheralSelection::Fixed {
        diagnostics.semisimplicity_defect = right.departure_from_normality();
    } else {
        // Off-diagonal Schur entries between distinct phases are legitimate;
        // only entries coupling numerically equal eigenvalues signal a Jordan block.
        let k = right.block.nrows();
        let mut s: f64 = 0.0;
        for j in 0..k {
            for i in 0..j {
                if (right.block[(i, i)] - right.block[(j, j)]).norm() <= radius {
                    s += right.block[(i, j)].norm_sqr();
                }
            }
        }
        diagnostics.semisimplicity_defect = s.sqrt();
    }
    let scale = frob(&spec.schur().t).max(1.0);
    if diagnostics.reconstruction_residual > tol.verify * scale {
        diagnostics.warnings.push(format!(
            "peripheral reconstruction residual {:.3e} exceeds tolerance",
            diagnostics.reconstruction_residual
        ));
    }
    if diagnostics.semisimplicity_defect > tol.verify * scale {
        diagnostics.warnings.push(format!(
            "peripheral block departs from semisimple form by {:.3e}",
            diagnostics.semisimplicity_defect
        ));
    }

    let k = right.dim();
    let einf = if k == 0 {
        crate::matcore::zeros(d * d, d * d)
    } else {
        let overlap = left.basis.adjoint() * &right.basis;
        let inv = LU::new(overlap.clone())
            .try_inverse()
            .ok_or_else(|| Error::numeric("left/right peripheral bases are not in duality", 0.0))?;
        &right.basis * inv * left.basis.adjoint()
    };

    Ok(FixedSpaces {
        selection,
        sigma: OperatorSubspace::from_orthonormal_columns(d, &right.basis),
        b_space: OperatorSubspace::from_orthonormal_columns(d, &left.basis),
        einf,
        diagnostics,
    })
}

/// Cesaro mean `(1/(N+1)) sum_{n<=N} E^n`, which converges to the fixed-point
/// projector at rate `O(1/(N gap))`.
pub fn einf_cesaro_oracle(e: &Channel, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::param("Cesaro oracle needs N >= 1"));
    }
    Ok(power_mean(e, n))
}

/// Unit-modulus eigenoperators grouped by phase.
pub fn rotating_space(e: &Channel, tol: &Tolerance) -> Result<RotatingSpace> {
    let spec = superoperator_spectrum(e)?;
    rotating_from_spectrum(&spec, e, tol)
}

pub fn rotating_from_spectrum(
    spec: &Spectrum,
    e: &Channel,
    tol: &Tolerance,
) -> Result<RotatingSpace> {
    let d = e.dim();
    let radius = tol.eig_cluster;
    let mut eigenoperators = Vec::new();
    for cluster in spec.clusters(radius) {
        if (1.0 - cluster.center.norm()).abs() > radius {
            continue;
        }
        let phase = cluster.center / cluster.center.norm();
        let inv = spec.right_invariant(|z| cluster.members.contains(&z));
        for j in 0..inv.dim() {
            let x = unvec_op(inv.basis.column(j).as_slice(), d, d);
            let resid = frob(&(e.apply(&x)? - &x * phase));
            if resid > tol.verify.max(10.0 * radius) {
                return Err(Error::numeric(
                    "peripheral eigenoperator does not satisfy its eigen-equation",
                    resid,
                ));
            }
            eigenoperators.push((phase, x));
        }
    }
    let ops: Vec<ComplexMatrix> = eigenoperators.iter().map(|(_, x)| x.clone()).collect();
    let basis = orthonormalize(d, &ops, tol)?;
    Ok(RotatingSpace {
        basis,
        eigenoperators,
    })
}

/// Support of `einf(1/d)`, which contains the support of every point in `fs`.
///
/// `e` is the channel `fs` was computed from; in [`PeripheralSelection::Fixed`]
/// mode the returned state is checked to be fixed by it.
pub fn joint_support(fs: &FixedSpaces, e: &Channel, tol: &Tolerance) -> Result<SupportInfo> {
    let d = fs.sigma.ambient_dim();
    let mixed = identity(d) / real(d as f64);
    let rho = fs.project(&mixed);
    let herm = crate::matcore::hermitian_part(&rho);
    let skew = frob(&(&rho - &herm));
    if skew > tol.verify {
        return Err(Error::numeric(
            "projected maximally mixed state is not Hermitian",
            skew,
        ));
    }
    let (_, basis) = psd_support(&herm, tol).map_err(|err| match err {
        Error::Contract { residual, .. } => Error::numeric(
            "projected maximally mixed state is not positive; spectral projector is broken",
            residual,
        ),
        other => other,
    })?;
    if fs.selection == PeripheralSelection::Fixed {
        let drift = frob(&(e.apply(&herm)? - &herm));
        if drift > tol.verify {
            return Err(Error::numeric(
                "maximal-rank fixed state is not fixed",
                drift,
            ));
        }
    }
    let projector = &basis * basis.adjoint();
    Ok(SupportInfo {
        rank: basis.ncols(),
        projector,
        basis,
        max_rank_fixed_state: herm,
    })
}
