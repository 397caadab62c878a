//! Structure of the algebra carried by the fixed points.
//!
//! Compressing the dual fixed space to the joint support gives a
//! finite-dimensional *-algebra `A = (+)_k M_{d_k} (x) 1_{n_k}`. The blocks
//! are found from a generic Hermitian element of the center; inside a block
//! the tensor split is read off a generic Hermitian element of the block,
//! whose eigenvalues come in `d_k` clusters of multiplicity `n_k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    frob, herm_eig, hermitian_part, identity, kron, null_space_scaled, orthonormalize,
    partial_trace_first, partial_trace_second, real, trace, unvec_op, vec_op, zeros, ComplexMatrix,
    OperatorSubspace, Tolerance, C64,
};
use crate::spectral::{FixedSpaces, SupportInfo};

const STAGE: &str = "algebra";

/// Draws allowed when a random element has nearly coincident eigenvalue clusters.
const MAX_RESAMPLES: usize = 8;

/// Hermitian generators used to cut out the center.
const CENTER_GENERATORS: usize = 3;

/// Random products used for the closure check.
const CLOSURE_TRIALS: usize = 4;

#[derive(Debug, Clone, Default, Serialize)]
pub struct AlgebraDiagnostics {
    pub algebra_dim: usize,
    pub center_dim: usize,
    pub closure_residual: f64,
    pub factorization_residual: f64,
    pub resamples: usize,
}

/// Block decomposition `(+)_k M_{d_k} (x) 1_{n_k}` of the fixed-point algebra.
#[derive(Debug, Clone)]
pub struct AlgebraStructure {
    shape: Vec<(usize, usize)>,
    block_isometries: Vec<ComplexMatrix>,
    tau_states: Vec<ComplexMatrix>,
    support: ComplexMatrix,
    diagnostics: AlgebraDiagnostics,
}

impl AlgebraStructure {
    /// Assemble a structure from known parts. Block `k`'s isometry maps
    /// `C^{d_k} (x) C^{n_k}` (index `a * n_k + b`) into the full space.
    pub fn from_parts(
        shape: Vec<(usize, usize)>,
        block_isometries: Vec<ComplexMatrix>,
        tau_states: Vec<ComplexMatrix>,
        support: ComplexMatrix,
    ) -> Self {
        let algebra_dim = shape.iter().map(|(d, _)| d * d).sum();
        Self {
            diagnostics: AlgebraDiagnostics {
                algebra_dim,
                center_dim: shape.len(),
                ..Default::default()
            },
            shape,
            block_isometries,
            tau_states,
            support,
        }
    }

    pub fn shape(&self) -> &[(usize, usize)] {
        &self.shape
    }

    pub fn block_isometries(&self) -> &[ComplexMatrix] {
        &self.block_isometries
    }

    pub fn tau_states(&self) -> &[ComplexMatrix] {
        &self.tau_states
    }

    pub fn support(&self) -> &ComplexMatrix {
        &self.support
    }

    pub fn support_rank(&self) -> usize {
        self.shape.iter().map(|(d, n)| d * n).sum()
    }

    pub fn algebra_dim(&self) -> usize {
        self.shape.iter().map(|(d, _)| d * d).sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.support.nrows()
    }

    pub fn diagnostics(&self) -> &AlgebraDiagnostics {
        &self.diagnostics
    }

    /// `sum_k V_k (M_k (x) tau_k) V_k^dagger`.
    pub fn fixed_state_form(&self, m_blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if m_blocks.len() != self.shape.len() {
            return Err(Error::dim(format!(
                "expected {} blocks, got {}",
                self.shape.len(),
                m_blocks.len()
            )));
        }
        let dim = self.ambient_dim();
        let mut out = zeros(dim, dim);
        for (k, m) in m_blocks.iter().enumerate() {
            let (d, _) = self.shape[k];
            if m.shape() != (d, d) {
                return Err(Error::dim(format!(
                    "block {k} needs a {d}x{d} matrix, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let v = &self.block_isometries[k];
            out += v * kron(m, &self.tau_states[k]) * v.adjoint();
        }
        Ok(out)
    }

    /// Per-block matrices `M_k` with `x ~ fixed_state_form(M)`, and the
    /// residual of that fit.
    pub fn decompose_fixed(&self, x: &ComplexMatrix) -> Result<(Vec<ComplexMatrix>, f64)> {
        let dim = self.ambient_dim();
        if x.shape() != (dim, dim) {
            return Err(Error::dim(format!("expected a {dim}x{dim} operator")));
        }
        let blocks: Vec<ComplexMatrix> = self
            .shape
            .iter()
            .zip(&self.block_isometries)
            .map(|(&(d, n), v)| partial_trace_second(&(v.adjoint() * x * v), d, n))
            .collect();
        let resid = frob(&(self.fixed_state_form(&blocks)? - x));
        Ok((blocks, resid))
    }
}

/// Free-function form of [`AlgebraStructure::fixed_state_form`].
pub fn fixed_state_form(
    structure: &AlgebraStructure,
    m_blocks: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    structure.fixed_state_form(m_blocks)
}

/// Orthonormal basis of `{X : X K = K X for all K in ops}`.
pub fn commutant(ops: &[ComplexMatrix], tol: &Tolerance) -> Result<OperatorSubspace> {
    let Some(first) = ops.first() else {
        return Err(Error::param("commutant of an empty set is undefined here"));
    };
    let d = first.nrows();
    if ops.iter().any(|k| k.shape() != (d, d)) {
        return Err(Error::dim("commutant needs square operators of equal size"));
    }
    let id = identity(d);
    let mut stacked = zeros(d * d * ops.len(), d * d);
    for (i, k) in ops.iter().enumerate() {
        // vec(X K - K X) = (K^T (x) 1 - 1 (x) K) vec(X)
        let m = kron(&k.transpose(), &id) - kron(&id, k);
        stacked
            .view_mut((i * d * d, 0), (d * d, d * d))
            .copy_from(&m);
    }
    // commutators may vanish up to round-off, so cut relative to the inputs
    let scale = ops.iter().map(crate::matcore::op_norm).fold(0.0, f64::max);
    let null = null_space_scaled(&stacked, tol.rank_cutoff, scale);
    let ops: Vec<ComplexMatrix> = (0..null.ncols())
        .map(|j| unvec_op(null.column(j).as_slice(), d, d))
        .collect();
    orthonormalize(d, &ops, tol)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Random real combination of Hermitian matrices, normalized in Frobenius norm.
fn generic_hermitian<R: Rng>(herms: &[ComplexMatrix], rng: &mut R) -> ComplexMatrix {
    let n = herms[0].nrows();
    let mut h = zeros(n, n);
    for x in herms {
        h += x * real(gaussian(rng));
    }
    let norm = frob(&h);
    if norm > 0.0 {
        h / real(norm)
    } else {
        h
    }
}

fn hermitian_parts(ops: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(2 * ops.len());
    for a in ops {
        let re = hermitian_part(a);
        let im = (a - a.adjoint()) * C64::new(0.0, -0.5);
        for h in [re, im] {
            if frob(&h) > 1e-12 {
                out.push(h);
            }
        }
    }
    out
}

/// Split ascending `values` into `groups` clusters at the largest gaps.
/// Returns the index ranges and the smallest separating gap.
fn split_clusters(values: &[f64], groups: usize) -> (Vec<std::ops::Range<usize>>, f64) {
    if groups <= 1 {
        return (vec![0..values.len()], f64::INFINITY);
    }
    let mut gaps: Vec<(f64, usize)> = values
        .windows(2)
        .enumerate()
        .map(|(i, w)| (w[1] - w[0], i + 1))
        .collect();
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut cuts: Vec<usize> = gaps[..groups - 1].iter().map(|g| g.1).collect();
    let min_gap = gaps[groups - 2].0;
    cuts.sort_unstable();
    let mut ranges = Vec::with_capacity(groups);
    let mut start = 0;
    for c in cuts {
        ranges.push(start..c);
        start = c;
    }
    ranges.push(start..values.len());
    (ranges, min_gap)
}

fn columns(m: &ComplexMatrix, range: std::ops::Range<usize>) -> ComplexMatrix {
    m.columns(range.start, range.len()).into_owned()
}

/// Eigen-decompose a random Hermitian element until it shows `groups` well
/// separated clusters. Returns the cluster bases, the clusters' largest
/// internal spread and the number of extra draws used.
fn generic_clusters<R: Rng>(
    herms: &[ComplexMatrix],
    groups: usize,
    tol: &Tolerance,
    rng: &mut R,
    what: &str,
) -> Result<(Vec<ComplexMatrix>, f64, usize)> {
    for attempt in 0..=MAX_RESAMPLES {
        let h = generic_hermitian(herms, rng);
        let (values, vectors) = herm_eig(&h, tol)?;
        let (ranges, min_gap) = split_clusters(&values, groups);
        if min_gap <= 10.0 * tol.eig_cluster {
            continue;
        }
        let spread = ranges
            .iter()
            .map(|r| values[r.end - 1] - values[r.start])
            .fold(0.0, f64::max);
        if spread >= min_gap {
            return Err(Error::structural(
                STAGE,
                format!("{what}: eigenvalues do not form {groups} separated clusters"),
            ));
        }
        let bases = ranges.into_iter().map(|r| columns(&vectors, r)).collect();
        return Ok((bases, spread, attempt));
    }
    Err(Error::structural(
        STAGE,
        format!("{what}: random elements stayed degenerate after {MAX_RESAMPLES} redraws"),
    ))
}

/// Residual of `x` outside the span of the orthonormal `basis`, relative to `|x|`.
fn span_residual(basis: &OperatorSubspace, x: &ComplexMatrix) -> f64 {
    let n = frob(x);
    if n == 0.0 {
        0.0
    } else {
        basis.residual(x) / n
    }
}

fn random_element<R: Rng>(basis: &OperatorSubspace, rng: &mut R) -> ComplexMatrix {
    let coeffs: Vec<C64> = (0..basis.dim())
        .map(|_| C64::new(gaussian(rng), gaussian(rng)))
        .collect();
    basis.combine(&coeffs)
}

/// Recover the algebra structure from the dual fixed space and joint support.
///
/// Randomized choices (generic elements) are drawn from a generator seeded
/// with `seed`, so the output is a deterministic function of the inputs.
pub fn structure_from_fixed_spaces(
    fs: &FixedSpaces,
    sup: &SupportInfo,
    tol: &Tolerance,
    seed: u64,
) -> Result<AlgebraStructure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = &sup.basis;
    let r = sup.rank;
    let k_dim = fs.b_space.dim();
    if r == 0 || k_dim == 0 {
        return Err(Error::structural(STAGE, "empty fixed-point algebra"));
    }

    // (1) compress the dual fixed space onto the support
    let compressed: Vec<ComplexMatrix> = fs
        .b_space
        .basis()
        .iter()
        .map(|y| w.adjoint() * y * w)
        .collect();
    let alg = orthonormalize(r, &compressed, tol)?;
    if alg.dim() != k_dim {
        return Err(Error::structural(
            STAGE,
            format!(
                "compression to the support has rank {} but the dual fixed space has dimension {k_dim}",
                alg.dim()
            ),
        ));
    }
    if fs.sigma.dim() != k_dim {
        return Err(Error::structural(
            STAGE,
            format!(
                "fixed and dual fixed dimensions differ ({} vs {k_dim})",
                fs.sigma.dim()
            ),
        ));
    }

    // (2) closure under product and adjoint
    let mut closure: f64 = 0.0;
    for a in alg.basis() {
        closure = closure.max(span_residual(&alg, &a.adjoint()));
    }
    for _ in 0..CLOSURE_TRIALS {
        let a = random_element(&alg, &mut rng);
        let b = random_element(&alg, &mut rng);
        closure =
            closure.max(span_residual(&alg, &(&a * &b)) * frob(&(&a * &b)) / (frob(&a) * frob(&b)));
    }
    if closure > 10.0 * tol.verify {
        return Err(Error::structural(
            STAGE,
            format!("compressed fixed space is not closed under products (residual {closure:.3e}); eigenvalue clustering is likely wrong"),
        ));
    }

    // (3) center: elements commuting with a few generic Hermitian elements
    let herms = hermitian_parts(alg.basis());
    let gens: Vec<ComplexMatrix> = (0..CENTER_GENERATORS)
        .map(|_| generic_hermitian(&herms, &mut rng))
        .collect();
    let mut stacked = zeros(CENTER_GENERATORS * r * r, k_dim);
    for (g, h) in gens.iter().enumerate() {
        for (j, a) in alg.basis().iter().enumerate() {
            let comm = a * h - h * a;
            stacked
                .view_mut((g * r * r, j), (r * r, 1))
                .copy_from_slice(comm.as_slice());
        }
    }
    let coeffs = null_space_scaled(&stacked, tol.eig_cluster, 1.0);
    let center: Vec<ComplexMatrix> = (0..coeffs.ncols())
        .map(|j| {
            let c: Vec<C64> = coeffs.column(j).iter().copied().collect();
            alg.combine(&c)
        })
        .collect();
    let center_dim = center.len();
    if center_dim == 0 {
        return Err(Error::structural(STAGE, "center of the algebra is empty"));
    }

    // (4) minimal central projections from a generic central element
    let (block_bases, _, mut resamples) = generic_clusters(
        &hermitian_parts(&center),
        center_dim,
        tol,
        &mut rng,
        "center",
    )?;

    // (5)-(7) per block: dimensions, tensor factorization, tau
    let mut blocks = Vec::with_capacity(center_dim);
    let mut fact_resid: f64 = 0.0;
    let mut dim_total = 0;
    for u in &block_bases {
        let b = u.ncols();
        let local: Vec<ComplexMatrix> = alg.basis().iter().map(|a| u.adjoint() * a * u).collect();
        let local = orthonormalize(b, &local, tol)?;
        let dk2 = local.dim();
        let d = (dk2 as f64).sqrt().round() as usize;
        if d == 0 || d * d != dk2 || b % d != 0 {
            return Err(Error::structural(
                STAGE,
                format!(
                    "block of size {b} carries an algebra of dimension {dk2}, not d^2 with d | {b}"
                ),
            ));
        }
        let n = b / d;
        dim_total += dk2;

        let (basis, extra) = tensor_basis(&local, d, n, tol, &mut rng)?;
        resamples += extra;
        for a in local.basis() {
            let x = basis.adjoint() * a * &basis;
            let m = partial_trace_second(&x, d, n) / real(n as f64);
            fact_resid = fact_resid.max(frob(&(x - kron(&m, &identity(n)))));
        }
        let v = w * u * &basis;
        let local_rho = v.adjoint() * &sup.max_rank_fixed_state * &v;
        let tau = partial_trace_first(&local_rho, d, n);
        let tr = trace(&tau);
        if tr.norm() <= tol.rank_cutoff {
            return Err(Error::structural(
                STAGE,
                "maximal-rank fixed state vanishes on a block",
            ));
        }
        let tau = hermitian_part(&(tau / tr));
        blocks.push(((d, n), v, tau));
    }
    if dim_total != k_dim {
        return Err(Error::structural(
            STAGE,
            format!("block dimensions sum to {dim_total}, algebra has dimension {k_dim}"),
        ));
    }
    if fact_resid > 10.0 * tol.verify {
        return Err(Error::structural(
            STAGE,
            format!("tensor factorization residual {fact_resid:.3e} exceeds tolerance"),
        ));
    }

    blocks.sort_by_key(|b| std::cmp::Reverse(b.0));
    let mut structure = AlgebraStructure::from_parts(
        blocks.iter().map(|b| b.0).collect(),
        blocks.iter().map(|b| b.1.clone()).collect(),
        blocks.into_iter().map(|b| b.2).collect(),
        sup.projector.clone(),
    );
    structure.diagnostics = AlgebraDiagnostics {
        algebra_dim: k_dim,
        center_dim,
        closure_residual: closure,
        factorization_residual: fact_resid,
        resamples,
    };
    Ok(structure)
}

/// Unitary `B` on a block with `B^dagger a B = M (x) 1_n` for every `a` in the
/// block algebra.
fn tensor_basis<R: Rng>(
    local: &OperatorSubspace,
    d: usize,
    n: usize,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<(ComplexMatrix, usize)> {
    let b = d * n;
    if d == 1 {
        return Ok((identity(b), 0));
    }
    let herms = hermitian_parts(local.basis());
    let (clusters, _, resamples) = generic_clusters(&herms, d, tol, rng, "block")?;
    if clusters.iter().any(|c| c.ncols() != n) {
        return Err(Error::structural(
            STAGE,
            format!("generic block element does not have {d} eigenvalues of multiplicity {n}"),
        ));
    }
    let f1 = &clusters[0];
    let mut out = zeros(b, b);
    out.columns_mut(0, n).copy_from(f1);
    for attempt in 0..=MAX_RESAMPLES {
        let g = random_element(local, rng);
        let mut ok = true;
        for (j, cj) in clusters.iter().enumerate().skip(1) {
            let f = cj * (cj.adjoint() * &g * f1);
            let scale = (frob(&f).powi(2) / n as f64).sqrt();
            if scale <= 10.0 * tol.eig_cluster {
                ok = false;
                break;
            }
            out.columns_mut(j * n, n).copy_from(&(f / real(scale)));
        }
        if ok {
            let defect = frob(&(out.adjoint() * &out - identity(b)));
            if defect > 10.0 * tol.verify {
                return Err(Error::structural(
                    STAGE,
                    format!("block basis is not unitary (defect {defect:.3e})"),
                ));
            }
            return Ok((out, resamples + attempt));
        }
    }
    Err(Error::structural(
        STAGE,
        "could not link the block's tensor factors with a generic element",
    ))
}

/// Heisenberg-picture extension of the compressed algebra from the joint
/// support `P` to its complement.
#[derive(Debug, Clone)]
pub struct EchoMap {
    /// Orthonormal columns spanning the support (`d x r`).
    pub support_basis: ComplexMatrix,
    /// Orthonormal columns spanning the complement (`d x (d-r)`).
    pub complement_basis: ComplexMatrix,
    /// `(d-r)^2 x r^2` matrix in column-stacked coordinates.
    pub matrix: ComplexMatrix,
    /// `max |F(A_i) - echo_i|` over the dual fixed basis.
    pub single_valued_residual: f64,
    /// Largest off-diagonal corner `P Y (1-P)` over the dual fixed basis.
    pub corner_residual: f64,
}

impl EchoMap {
    pub fn domain_dim(&self) -> usize {
        self.support_basis.ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.complement_basis.ncols()
    }

    /// `F(A)` for an `r x r` operator on the support.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let r = self.domain_dim();
        if a.shape() != (r, r) {
            return Err(Error::dim(format!("echo map expects a {r}x{r} operator")));
        }
        let m = self.codomain_dim();
        let v = &self.matrix * vec_op(a);
        Ok(unvec_op(v.as_slice(), m, m))
    }

    /// The full observable `A (+) F(A)` on the whole space.
    pub fn extend(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let echo = self.apply(a)?;
        let w = &self.support_basis;
        let wc = &self.complement_basis;
        Ok(w * a * w.adjoint() + wc * echo * wc.adjoint())
    }

    /// `W^dagger Y W`: compression of an operator onto the support.
    pub fn compress(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.support_basis.adjoint() * y * &self.support_basis
    }
}

/// Fit the echo map from the dual fixed space.
pub fn echo_map(
    fs: &FixedSpaces,
    structure: &AlgebraStructure,
    tol: &Tolerance,
) -> Result<EchoMap> {
    let p = structure.support();
    let d = p.nrows();
    let (values, vectors) = herm_eig(p, tol)?;
    let split = values.iter().filter(|&&v| v < 0.5).count();
    let complement_basis = columns(&vectors, 0..split);
    let support_basis = columns(&vectors, split..d);
    let r = support_basis.ncols();
    let m = complement_basis.ncols();

    let k = fs.b_space.dim();
    let mut a_mat = zeros(r * r, k);
    let mut e_mat = zeros(m * m, k);
    let mut corner: f64 = 0.0;
    for (j, y) in fs.b_space.basis().iter().enumerate() {
        let a = support_basis.adjoint() * y * &support_basis;
        a_mat.column_mut(j).copy_from_slice(a.as_slice());
        if m > 0 {
            let e = complement_basis.adjoint() * y * &complement_basis;
            e_mat.column_mut(j).copy_from_slice(e.as_slice());
            let c1 = support_basis.adjoint() * y * &complement_basis;
            corner = corner.max(frob(&c1)).max(frob(&c1.adjoint()));
            let c2 = complement_basis.adjoint() * y * &support_basis;
            corner = corner.max(frob(&c2));
        }
    }
    if corner > tol.verify {
        return Err(Error::structural(
            "echo",
            format!(
                "dual fixed points couple the support to its complement (residual {corner:.3e})"
            ),
        ));
    }
    if m == 0 {
        return Ok(EchoMap {
            support_basis,
            complement_basis,
            matrix: zeros(0, r * r),
            single_valued_residual: 0.0,
            corner_residual: corner,
        });
    }
    let pinv =
        crate::matcore::pseudo_inverse(&a_mat, tol.rank_cutoff * crate::matcore::op_norm(&a_mat))?;
    let matrix = &e_mat * pinv;
    let resid = frob(&(&matrix * &a_mat - &e_mat));
    if resid > 10.0 * tol.verify {
        return Err(Error::structural(
            "echo",
            format!("echo map is multivalued (residual {resid:.3e})"),
        ));
    }
    Ok(EchoMap {
        support_basis,
        complement_basis,
        matrix,
        single_valued_residual: resid,
        corner_residual: corner,
    })
}
