//! Seeded random matrices: Ginibre, Haar unitaries, states and channels.
//!
//! Every sampler takes the generator explicitly so that results are
//! reproducible from a seed.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::matcore::{c, hermitian_part, trace, zeros, ComplexMatrix, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / 2f64.sqrt()
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = zeros(rows, cols);
    for z in m.iter_mut() {
        *z = complex_normal(rng);
    }
    m
}

/// Haar-distributed unitary.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(d, d, rng)
}

/// Haar-distributed isometry `C^cols -> C^rows` (`rows >= cols`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            q.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    hermitian_part(&ginibre(d, d, rng))
}

/// Full-rank random density matrix (Hilbert-Schmidt measure).
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    let rho = &g * g.adjoint();
    let tr = trace(&rho);
    rho / tr
}

/// Kraus operators of a random channel with the given Kraus rank, obtained by
/// slicing a Haar isometry `C^d -> C^d (x) C^rank`.
pub fn random_kraus<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let v = random_isometry(d * rank, d, rng);
    (0..rank)
        .map(|k| v.view((k * d, 0), (d, d)).into_owned())
        .collect()
}

/// Random point on the probability simplex of the given size.
pub fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frob, identity, min_eigenvalue};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(5, &mut rng);
        assert!(frob(&(u.adjoint() * &u - identity(5))) < 1e-13);
    }

    #[test]
    fn kraus_are_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ks = random_kraus(3, 4, &mut rng);
        let mut sum = zeros(3, 3);
        for k in &ks {
            sum += k.adjoint() * k;
        }
        assert!(frob(&(sum - identity(3))) < 1e-13);
    }

    #[test]
    fn state_is_density_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_state(4, &mut rng);
        assert!((trace(&rho).re - 1.0).abs() < 1e-14);
        assert!(min_eigenvalue(&rho) > 0.0);
    }
}
