//! Quantum channels in Kraus form with cached superoperator and Choi matrices.
//!
//! Vectorization is column stacking, `vec(A X B) = (B^T (x) A) vec(X)`, so
//! the superoperator is `S = sum_i conj(K_i) (x) K_i` and
//! `S vec(rho) = vec(E(rho))`.

mod planted;
mod reference;

pub use planted::{make_planted, BlockSpec, PLANTED_MAX_DIM};
pub use reference::{
    amplitude_damping, bit_flip_three_qubit, dephasing, depolarizing_qubit, identity_channel,
    make_paper_example, mixed_unitary, paper_example_fixed_observables, paper_example_fixed_states,
    paper_example_tau, pauli_x, pauli_y, pauli_z, unitary_channel,
};

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    frob, identity, kron, min_eigenvalue, require_square, vec_op, zeros, ComplexMatrix, Tolerance,
};

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug)]
pub struct Channel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    superop: OnceLock<ComplexMatrix>,
    choi: OnceLock<ComplexMatrix>,
}

impl Clone for Channel {
    fn clone(&self) -> Self {
        let out = Channel::new_unchecked(self.kraus.clone());
        if let Some(s) = self.superop.get() {
            let _ = out.superop.set(s.clone());
        }
        if let Some(j) = self.choi.get() {
            let _ = out.choi.set(j.clone());
        }
        out
    }
}

/// Validation summary with residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelReport {
    pub dim: usize,
    pub is_tp: bool,
    pub tp_residual: f64,
    pub is_unital: bool,
    pub unital_residual: f64,
    pub is_cp: bool,
    pub min_choi_eigenvalue: f64,
}

fn check_kraus_shapes(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops
        .first()
        .ok_or_else(|| Error::param("a channel needs at least one Kraus operator"))?;
    let d = require_square(first, "Kraus operator")?;
    if d == 0 {
        return Err(Error::param("channel dimension must be positive"));
    }
    for (k, op) in ops.iter().enumerate() {
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::dim(format!(
                "Kraus operator {k} is {}x{}, expected {d}x{d}",
                op.nrows(),
                op.ncols()
            )));
        }
    }
    Ok(d)
}

/// `||sum_i K_i^dagger K_i - 1||_F`
fn tp_residual_of(ops: &[ComplexMatrix], d: usize) -> f64 {
    let mut sum = zeros(d, d);
    for k in ops {
        sum += k.adjoint() * k;
    }
    frob(&(sum - identity(d)))
}

impl Channel {
    /// Build a channel, rejecting Kraus sets whose trace-preservation
    /// residual exceeds `tol.verify`.
    pub fn from_kraus(ops: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        let d = check_kraus_shapes(&ops)?;
        let residual = tp_residual_of(&ops, d);
        if residual.is_nan() || residual > tol.verify {
            return Err(Error::contract(
                "Kraus operators are not trace preserving",
                residual,
            ));
        }
        Ok(Self::new_unchecked(ops))
    }

    pub(crate) fn new_unchecked(kraus: Vec<ComplexMatrix>) -> Self {
        let dim = kraus[0].nrows();
        Self {
            dim,
            kraus,
            superop: OnceLock::new(),
            choi: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `d^2 x d^2` matrix acting on column-stacked operators.
    pub fn superoperator(&self) -> &ComplexMatrix {
        self.superop.get_or_init(|| {
            let n = self.dim * self.dim;
            let mut s = zeros(n, n);
            for k in &self.kraus {
                s += kron(&k.map(|z| z.conj()), k);
            }
            s
        })
    }

    /// Choi matrix `sum_i vec(K_i) vec(K_i)^dagger`.
    pub fn choi(&self) -> &ComplexMatrix {
        self.choi.get_or_init(|| {
            let n = self.dim * self.dim;
            let mut j = zeros(n, n);
            for k in &self.kraus {
                let v = vec_op(k);
                j += &v * v.adjoint();
            }
            j
        })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_operand(x)?;
        let mut out = zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    /// Heisenberg-picture map `X -> sum_i K_i^dagger X K_i`.
    pub fn adjoint(&self) -> AdjointMap {
        AdjointMap {
            dim: self.dim,
            kraus: self.kraus.iter().map(|k| k.adjoint()).collect(),
        }
    }

    pub fn tp_residual(&self) -> f64 {
        tp_residual_of(&self.kraus, self.dim)
    }

    /// `||E(1) - 1||_F`
    pub fn unital_residual(&self) -> f64 {
        let mut sum = zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum += k * k.adjoint();
        }
        frob(&(sum - identity(self.dim)))
    }

    pub fn report(&self, tol: &Tolerance) -> ChannelReport {
        let tp_residual = self.tp_residual();
        let unital_residual = self.unital_residual();
        let min_choi = min_eigenvalue(self.choi());
        ChannelReport {
            dim: self.dim,
            is_tp: tp_residual <= tol.verify,
            tp_residual,
            is_unital: unital_residual <= tol.verify,
            unital_residual,
            is_cp: min_choi >= -tol.verify,
            min_choi_eigenvalue: min_choi,
        }
    }

    fn check_operand(&self, x: &ComplexMatrix) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::dim(format!(
                "operand is {}x{}, channel acts on {}x{}",
                x.nrows(),
                x.ncols(),
                self.dim,
                self.dim
            )));
        }
        Ok(())
    }
}

/// The Heisenberg-picture adjoint of a channel. Unital, not necessarily
/// trace preserving.
#[derive(Debug, Clone)]
pub struct AdjointMap {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl AdjointMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::dim("operand does not match adjoint map dimension"));
        }
        let mut out = zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    pub fn superoperator(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut s = zeros(n, n);
        for k in &self.kraus {
            s += kron(&k.map(|z| z.conj()), k);
        }
        s
    }
}

/// `R o E`: Kraus set of all products `R_j K_i`.
pub fn compose(r: &Channel, e: &Channel) -> Result<Channel> {
    if r.dim != e.dim {
        return Err(Error::dim(format!(
            "cannot compose channels of dimension {} and {}",
            r.dim, e.dim
        )));
    }
    let mut ops = Vec::with_capacity(r.kraus.len() * e.kraus.len());
    for rk in &r.kraus {
        for ek in &e.kraus {
            let p = rk * ek;
            if p.norm() > 0.0 {
                ops.push(p);
            }
        }
    }
    if ops.is_empty() {
        ops.push(zeros(r.dim, r.dim));
    }
    Ok(Channel::new_unchecked(ops))
}

/// Superoperator of the Cesaro mean `(1/(N+1)) sum_{n=0}^{N} E^n`.
pub fn power_mean(e: &Channel, n: usize) -> ComplexMatrix {
    let s = e.superoperator();
    let (sum, _) = geometric(s, n + 1);
    sum / crate::matcore::real((n + 1) as f64)
}

/// `(sum_{k<count} S^k, S^count)` by binary splitting.
fn geometric(s: &ComplexMatrix, count: usize) -> (ComplexMatrix, ComplexMatrix) {
    let dim = s.nrows();
    if count == 0 {
        return (zeros(dim, dim), identity(dim));
    }
    if count.is_multiple_of(2) {
        let (g, p) = geometric(s, count / 2);
        let sum = &g + &p * &g;
        (sum, &p * &p)
    } else {
        let (g, p) = geometric(s, count - 1);
        (identity(dim) + s * g, s * p)
    }
}

/// `S^n` for the channel superoperator.
pub fn superoperator_power(e: &Channel, n: usize) -> ComplexMatrix {
    geometric(e.superoperator(), n).1
}
