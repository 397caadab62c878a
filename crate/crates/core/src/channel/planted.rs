//! Random channels with a known information-preserving structure.
//!
//! The Hilbert space is `(+)_k (C^{d_k} (x) C^{n_k}) (+) C^m`. Block `k` evolves
//! as `id_{d_k} (x) E_k` where `E_k` mixes a random unitary conjugation with a
//! reset to a random full-rank state, so it has a unique fixed state and a
//! spectral gap equal to the reset weight. The extra `C^m` leaks into the
//! blocks in one step. Kraus operators act on one block at a time, which
//! kills coherences between blocks. Everything is finally conjugated by a
//! Haar unitary.

use nalgebra::LU;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Channel;
use crate::algebra::AlgebraStructure;
use crate::error::{Error, Result};
use crate::matcore::{identity, kron, real, unvec_op, vec_op, zeros, ComplexMatrix, Tolerance};
use crate::random::{random_isometry, random_state, random_unitary};

/// Largest total dimension `sum d_k n_k + m` accepted by [`make_planted`].
pub const PLANTED_MAX_DIM: usize = 32;

/// Range of the reset weight of each block's noise; it is the block's
/// spectral gap.
const RESET_WEIGHT: std::ops::Range<f64> = 0.5..0.9;

/// One block `M_d (x) 1_n` of a planted structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockSpec {
    pub d: usize,
    pub n: usize,
}

impl From<(usize, usize)> for BlockSpec {
    fn from((d, n): (usize, usize)) -> Self {
        Self { d, n }
    }
}

/// Fixed state of `X -> (1-w) U X U^dagger + w tr(X) reset`.
fn mixing_fixed_state(u: &ComplexMatrix, reset: &ComplexMatrix, w: f64) -> ComplexMatrix {
    let n = u.nrows();
    let ad_u = kron(&u.map(|z| z.conj()), u);
    let system = identity(n * n) - ad_u * real(1.0 - w);
    let rhs = vec_op(reset) * real(w);
    let sol = LU::new(system)
        .solve(&rhs)
        .expect("contraction keeps the system invertible");
    let tau = unvec_op(sol.as_slice(), n, n);
    let tau = (&tau + tau.adjoint()) * real(0.5);
    let tr = tau.trace();
    tau / tr
}

fn embed(op: &ComplexMatrix, total: usize, row: usize, col: usize) -> ComplexMatrix {
    let mut out = zeros(total, total);
    out.view_mut((row, col), op.shape()).copy_from(op);
    out
}

/// Build a channel whose noiseless structure is `shape` plus `extra_dim`
/// transient dimensions. Returns the channel and the ground-truth structure,
/// with blocks in canonical order (`d` descending, then `n` descending).
pub fn make_planted(
    shape: &[BlockSpec],
    extra_dim: usize,
    seed: u64,
) -> Result<(Channel, AlgebraStructure)> {
    if shape.is_empty() {
        return Err(Error::param("planted shape needs at least one block"));
    }
    if shape.iter().any(|b| b.d == 0 || b.n == 0) {
        return Err(Error::param("planted block sizes must be positive"));
    }
    let block_total: usize = shape.iter().map(|b| b.d * b.n).sum();
    let total = block_total + extra_dim;
    if total > PLANTED_MAX_DIM {
        return Err(Error::param(format!(
            "planted dimension {total} exceeds the cap of {PLANTED_MAX_DIM}"
        )));
    }
    let tol = Tolerance::default();
    let mut blocks = shape.to_vec();
    blocks.sort_by(|a, b| b.cmp(a));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut kraus: Vec<ComplexMatrix> = Vec::new();
    let mut embeddings = Vec::with_capacity(blocks.len());
    let mut taus = Vec::with_capacity(blocks.len());
    let mut offset = 0;
    for b in &blocks {
        let size = b.d * b.n;
        let id_d = identity(b.d);
        if b.n == 1 {
            kraus.push(embed(&identity(size), total, offset, offset));
            taus.push(identity(1));
        } else {
            let w = rng.random_range(RESET_WEIGHT);
            let u = random_unitary(b.n, &mut rng);
            let reset =
                random_state(b.n, &mut rng) * real(0.5) + identity(b.n) * real(0.5 / b.n as f64);
            kraus.push(embed(
                &kron(&id_d, &(&u * real((1.0 - w).sqrt()))),
                total,
                offset,
                offset,
            ));
            let (values, vectors) = crate::matcore::herm_eig(&reset, &tol)?;
            for (i, lam) in values.iter().enumerate() {
                for j in 0..b.n {
                    let mut k = zeros(b.n, b.n);
                    for r in 0..b.n {
                        k[(r, j)] = vectors[(r, i)] * (w * lam).sqrt();
                    }
                    kraus.push(embed(&kron(&id_d, &k), total, offset, offset));
                }
            }
            taus.push(mixing_fixed_state(&u, &reset, w));
        }
        let mut e = zeros(total, size);
        e.view_mut((offset, 0), (size, size))
            .copy_from(&identity(size));
        embeddings.push(e);
        offset += size;
    }

    if extra_dim > 0 {
        let rank = 2.max(extra_dim.div_ceil(block_total));
        let v = random_isometry(block_total * rank, extra_dim, &mut rng);
        for a in 0..rank {
            let piece = v
                .view((a * block_total, 0), (block_total, extra_dim))
                .into_owned();
            kraus.push(embed(&piece, total, 0, block_total));
        }
    }

    let q = random_unitary(total, &mut rng);
    let kraus: Vec<ComplexMatrix> = kraus.iter().map(|k| &q * k * q.adjoint()).collect();
    let channel = Channel::from_kraus(kraus, &tol)?;

    let isometries: Vec<ComplexMatrix> = embeddings.iter().map(|e| &q * e).collect();
    let mut support = zeros(total, total);
    for v in &isometries {
        support += v * v.adjoint();
    }
    let structure = AlgebraStructure::from_parts(
        blocks.iter().map(|b| (b.d, b.n)).collect(),
        isometries,
        taus,
        support,
    );
    Ok((channel, structure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frob, trace};

    fn spec(pairs: &[(usize, usize)]) -> Vec<BlockSpec> {
        pairs.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn planted_channels_are_tp() {
        for (shape, m) in [
            (spec(&[(2, 1)]), 0),
            (spec(&[(1, 1), (1, 1)]), 0),
            (spec(&[(2, 2)]), 2),
            (spec(&[(3, 1), (1, 2)]), 1),
        ] {
            let (e, s) = make_planted(&shape, m, 5).unwrap();
            assert!(e.tp_residual() < 1e-12);
            assert_eq!(
                s.support_rank(),
                shape.iter().map(|b| b.d * b.n).sum::<usize>()
            );
        }
    }

    #[test]
    fn planted_fixed_states_are_fixed() {
        let (e, s) = make_planted(&spec(&[(2, 2), (1, 3)]), 2, 11).unwrap();
        for (k, v) in s.block_isometries().iter().enumerate() {
            let (d, _) = s.shape()[k];
            let tau = &s.tau_states()[k];
            assert!((trace(tau).re - 1.0).abs() < 1e-12);
            let x = v * kron(&identity(d), tau) * v.adjoint();
            assert!(frob(&(e.apply(&x).unwrap() - &x)) < 1e-12);
        }
    }

    #[test]
    fn planted_rejects_infeasible() {
        assert!(make_planted(&spec(&[(4, 4), (4, 4)]), 1, 0).is_err());
        assert!(make_planted(&[], 1, 0).is_err());
        assert!(make_planted(&spec(&[(0, 1)]), 0, 0).is_err());
    }

    #[test]
    fn planted_is_deterministic() {
        let (a, _) = make_planted(&spec(&[(2, 2)]), 2, 7).unwrap();
        let (b, _) = make_planted(&spec(&[(2, 2)]), 2, 7).unwrap();
        assert_eq!(a.superoperator(), b.superoperator());
    }
}
