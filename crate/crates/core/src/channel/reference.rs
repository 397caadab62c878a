//! Fixed reference channels used as fixtures and in examples.

use super::Channel;
use crate::matcore::{c, diag_real, identity, ket_bra, kron, real, ComplexMatrix, I};

pub fn identity_channel(d: usize) -> Channel {
    Channel::new_unchecked(vec![identity(d)])
}

/// Complete dephasing in the computational basis: Kraus `{|i><i|}`.
pub fn dephasing(d: usize) -> Channel {
    Channel::new_unchecked((0..d).map(|i| ket_bra(d, i, i)).collect())
}

pub fn pauli_x() -> ComplexMatrix {
    ket_bra(2, 0, 1) + ket_bra(2, 1, 0)
}

pub fn pauli_y() -> ComplexMatrix {
    ket_bra(2, 0, 1) * (-I) + ket_bra(2, 1, 0) * I
}

pub fn pauli_z() -> ComplexMatrix {
    diag_real(&[1.0, -1.0])
}

/// Completely depolarizing qubit channel, Kraus `{I, X, Y, Z} / 2`.
pub fn depolarizing_qubit() -> Channel {
    let half = real(0.5);
    Channel::new_unchecked(vec![
        identity(2) * half,
        pauli_x() * half,
        pauli_y() * half,
        pauli_z() * half,
    ])
}

/// `rho -> U rho U^dagger`. `u` is assumed unitary.
pub fn unitary_channel(u: &ComplexMatrix) -> Channel {
    Channel::new_unchecked(vec![u.clone()])
}

/// `rho -> sum_j p_j U_j rho U_j^dagger`.
pub fn mixed_unitary(weights: &[f64], unitaries: &[ComplexMatrix]) -> Channel {
    assert_eq!(weights.len(), unitaries.len());
    Channel::new_unchecked(
        weights
            .iter()
            .zip(unitaries)
            .map(|(w, u)| u * real(w.sqrt()))
            .collect(),
    )
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Channel {
    let k0 = diag_real(&[1.0, (1.0 - gamma).sqrt()]);
    let k1 = ket_bra(2, 0, 1) * real(gamma.sqrt());
    Channel::new_unchecked(vec![k0, k1])
}

/// Independent-looking bit-flip noise on three qubits with at most one flip:
/// identity with probability `1 - 3 p`, `X` on qubit `j` with probability `p`.
pub fn bit_flip_three_qubit(p: f64) -> Channel {
    assert!((0.0..=1.0 / 3.0).contains(&p));
    let id2 = identity(2);
    let x = pauli_x();
    let flip = |j: usize| {
        let ops: Vec<&ComplexMatrix> = (0..3).map(|q| if q == j { &x } else { &id2 }).collect();
        kron(&kron(ops[0], ops[1]), ops[2])
    };
    Channel::new_unchecked(vec![
        identity(8) * real((1.0 - 3.0 * p).sqrt()),
        flip(0) * real(p.sqrt()),
        flip(1) * real(p.sqrt()),
        flip(2) * real(p.sqrt()),
    ])
}

/// The qutrit (x) qubit product channel with a 2-dimensional noiseless
/// subsystem on `span{|0>,|1>}_A` and the qubit forced into `diag(1/4, 3/4)`.
///
/// The twelve Kraus operators are the products of the three qutrit and four
/// qubit operators below, qutrit factor first.
pub fn make_paper_example() -> Channel {
    let s2 = 1.0 / 2f64.sqrt();
    let s3 = 3f64.sqrt() / 2.0;
    let a = [
        ket_bra(3, 0, 0) + ket_bra(3, 1, 1),
        ket_bra(3, 0, 2) * real(s2),
        ket_bra(3, 1, 2) * real(s2),
    ];
    let b = [
        ket_bra(2, 0, 0) * real(0.5),
        ket_bra(2, 0, 1) * real(0.5),
        ket_bra(2, 1, 0) * real(s3),
        ket_bra(2, 1, 1) * real(s3),
    ];
    let mut ops = Vec::with_capacity(12);
    for ka in &a {
        for kb in &b {
            ops.push(kron(ka, kb));
        }
    }
    Channel::new_unchecked(ops)
}

/// The qubit state the example channel forces onto its second factor.
pub fn paper_example_tau() -> ComplexMatrix {
    diag_real(&[0.25, 0.75])
}

/// Spanning set `{|i><j|_A (x) tau_B : i, j in {0, 1}}` of the example's fixed states.
pub fn paper_example_fixed_states() -> Vec<ComplexMatrix> {
    let tau = paper_example_tau();
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            out.push(kron(&ket_bra(3, i, j), &tau));
        }
    }
    out
}

/// Spanning set `{(|i><j| + delta_ij / 2 |2><2|)_A (x) 1_B}` of the example's
/// fixed observables.
pub fn paper_example_fixed_observables() -> Vec<ComplexMatrix> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let mut a = ket_bra(3, i, j);
            if i == j {
                a += ket_bra(3, 2, 2) * c(0.5, 0.0);
            }
            out.push(kron(&a, &identity(2)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frob, Tolerance};

    #[test]
    fn reference_channels_are_tp() {
        let tol = Tolerance::default();
        for ch in [
            identity_channel(3),
            dephasing(3),
            depolarizing_qubit(),
            amplitude_damping(0.3),
            bit_flip_three_qubit(0.1),
            make_paper_example(),
        ] {
            assert!(ch.tp_residual() <= tol.verify, "dim {}", ch.dim());
        }
    }

    #[test]
    fn paper_example_is_not_unital() {
        let e = make_paper_example();
        assert_eq!(e.kraus().len(), 12);
        assert_eq!(e.dim(), 6);
        assert!(e.unital_residual() > 0.1);
        assert!(!e.report(&Tolerance::default()).is_unital);
    }

    #[test]
    fn paper_example_moves_level_two_into_mixture() {
        let e = make_paper_example();
        let tau = paper_example_tau();
        let input = kron(&ket_bra(3, 2, 2), &tau);
        let expected = kron(&diag_real(&[0.5, 0.5, 0.0]), &tau);
        assert!(frob(&(e.apply(&input).unwrap() - expected)) < 1e-15);
    }

    #[test]
    fn paper_example_fixes_its_states_and_observables() {
        let e = make_paper_example();
        for x in paper_example_fixed_states() {
            assert!(frob(&(e.apply(&x).unwrap() - &x)) < 1e-15);
        }
        let adj = e.adjoint();
        for y in paper_example_fixed_observables() {
            assert!(frob(&(adj.apply(&y).unwrap() - &y)) < 1e-15);
        }
    }
}
