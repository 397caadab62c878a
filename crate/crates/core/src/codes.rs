//! Codes, distinguishability, and the noiseless / unitarily noiseless /
//! correctable hierarchy.
//!
//! Preservation is checked by sampling: pairs of code states and weights `x`
//! from a fixed grid plus random log-uniform draws. A failing sample is a
//! proof of failure. A pass is only evidence; the structural checks in
//! [`is_noiseless`] and [`is_unitarily_noiseless`] supply the certificate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{commutant, echo_map, structure_from_fixed_spaces, AlgebraStructure, EchoMap};
use crate::channel::{compose, Channel, ChannelReport};
use crate::error::{Error, Result};
use crate::matcore::{
    frob, hermitian_part, hermitian_spanning_set, identity, min_eigenvalue, orthonormalize,
    psd_inv_sqrt, real, singular_values, support_projector, trace, trace_norm, unvec_op, vec_op,
    ComplexMatrix, OperatorSubspace, Tolerance,
};
use crate::spectral::{
    fixed_spaces, joint_support, spaces_from_spectrum, superoperator_spectrum, FixedSpaces,
    PeripheralSelection, SupportInfo,
};

/// Weights always tested in the preservation criterion.
pub const X_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Extra log-uniform weights drawn from `[1e-2, 1e2]` per check.
pub const X_RANDOM_DRAWS: usize = 16;

/// Powers of the channel exercised by [`is_unitarily_noiseless`].
pub const POWERS: [usize; 5] = [1, 2, 3, 5, 8];

/// Default number of random state pairs drawn from a code's span.
pub const DEFAULT_TRIALS: usize = 16;

/// A set of encoded states, closed to an operator subspace.
#[derive(Debug, Clone)]
pub struct Code {
    space: OperatorSubspace,
    support: ComplexMatrix,
    samples: Vec<ComplexMatrix>,
}

impl Code {
    /// Build a code from spanning operators and sample states.
    ///
    /// The span is closed under adjoint. With no samples, the positive
    /// semidefinite spanning operators (normalized) are used instead. The
    /// support is that of the sum of the samples.
    pub fn new(
        dim: usize,
        basis: &[ComplexMatrix],
        samples: &[ComplexMatrix],
        tol: &Tolerance,
    ) -> Result<Self> {
        let mut spanning: Vec<ComplexMatrix> = basis.to_vec();
        spanning.extend(basis.iter().map(|b| b.adjoint()));
        spanning.extend(samples.iter().cloned());
        let space = orthonormalize(dim, &spanning, tol)?;
        if space.dim() == 0 {
            return Err(Error::param("code span is empty"));
        }

        let samples: Vec<ComplexMatrix> = if samples.is_empty() {
            basis.iter().filter_map(|b| as_state(b, tol)).collect()
        } else {
            samples.to_vec()
        };
        if samples.is_empty() {
            return Err(Error::param(
                "code has no sample states and no positive spanning operator",
            ));
        }
        let mut total = crate::matcore::zeros(dim, dim);
        for s in &samples {
            let tr_err = (trace(s) - real(1.0)).norm();
            let neg = -min_eigenvalue(s);
            let skew = frob(&(s - s.adjoint()));
            if tr_err > tol.verify || neg > tol.verify || skew > tol.verify {
                return Err(Error::contract(
                    "code sample is not a density matrix",
                    tr_err.max(neg).max(skew),
                ));
            }
            let outside = space.residual(s);
            if outside > tol.verify {
                return Err(Error::contract(
                    "code sample lies outside the code span",
                    outside,
                ));
            }
            total += s;
        }
        let support = support_projector(&hermitian_part(&total), tol)?;
        Ok(Self {
            space,
            support,
            samples,
        })
    }

    /// Code spanned by the given states, which also serve as samples.
    pub fn from_states(states: &[ComplexMatrix], tol: &Tolerance) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::param("code needs at least one state"));
        };
        Self::new(first.nrows(), states, states, tol)
    }

    pub fn dim(&self) -> usize {
        self.space.ambient_dim()
    }

    pub fn space(&self) -> &OperatorSubspace {
        &self.space
    }

    pub fn support(&self) -> &ComplexMatrix {
        &self.support
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        &self.samples
    }
}

fn as_state(x: &ComplexMatrix, tol: &Tolerance) -> Option<ComplexMatrix> {
    let h = hermitian_part(x);
    let scale = frob(&h);
    if scale == 0.0 || frob(&(x - &h)) > tol.verify * scale {
        return None;
    }
    let tr = trace(&h).re;
    if tr <= tol.verify * scale || min_eigenvalue(&h) < -tol.verify * scale {
        return None;
    }
    Some(h / real(tr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationMode {
    Preserved,
    Noiseless,
    UnitarilyNoiseless,
    Correctable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub mode: VerificationMode,
    /// Largest `| |E(rho - x rho')|_1 - |rho - x rho'|_1 |` over the samples.
    pub worst_pair_deviation: f64,
    /// Number of `(rho, rho', x)` triples evaluated.
    pub pairs_tested: usize,
    /// Whether the structural certificate held (absent for plain preservation).
    pub structural_ok: Option<bool>,
    /// Kraus count of the constructed recovery, for correctability checks.
    pub recovery_kraus_count: Option<usize>,
    pub diagnostics: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn new(mode: VerificationMode, deviation: f64, pairs: usize, tol: &Tolerance) -> Self {
        Self {
            verdict: if deviation <= tol.verify {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            mode,
            worst_pair_deviation: deviation,
            pairs_tested: pairs,
            structural_ok: None,
            recovery_kraus_count: None,
            diagnostics: Vec::new(),
        }
    }

    fn with_structure(mut self, ok: bool, note: String) -> Self {
        self.structural_ok = Some(ok);
        if !ok {
            self.verdict = Verdict::Fail;
        }
        self.diagnostics.push(note);
        self
    }
}

/// Optimal success probability `(1 + |q rho - (1-q) rho2|_1) / 2` for
/// telling `rho` (prior `q`) from `rho2`.
pub fn helstrom(rho: &ComplexMatrix, rho2: &ComplexMatrix, q: f64, tol: &Tolerance) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param(format!("prior {q} is outside [0, 1]")));
    }
    if rho.shape() != rho2.shape() {
        return Err(Error::dim("states have different dimensions"));
    }
    for s in [rho, rho2] {
        let tr_err = (trace(s) - real(1.0)).norm();
        let neg = -min_eigenvalue(s);
        if tr_err > tol.verify || neg > tol.verify {
            return Err(Error::contract(
                "input is not a density matrix",
                tr_err.max(neg),
            ));
        }
    }
    let diff = rho * real(q) - rho2 * real(1.0 - q);
    Ok(0.5 * (1.0 + trace_norm(&diff)?))
}

/// Sampled states and weights for preservation checks.
struct Samples {
    states: Vec<ComplexMatrix>,
    pairs: Vec<(usize, usize)>,
    xs: Vec<f64>,
}

impl Samples {
    fn draw<R: Rng>(code: &Code, trials: usize, tol: &Tolerance, rng: &mut R) -> Result<Self> {
        let mut states = code.samples().to_vec();
        let n = states.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j || n == 1 {
                    pairs.push((i, j));
                }
            }
        }

        let d = code.dim();
        let mut rho0 = crate::matcore::zeros(d, d);
        for s in code.samples() {
            rho0 += s;
        }
        rho0 /= real(n as f64);
        let herms = hermitian_spanning_set(code.space());
        let inv_sqrt = psd_inv_sqrt(&rho0, tol)?;
        for _ in 0..trials {
            let a = states.len();
            for _ in 0..2 {
                states.push(random_span_state(&rho0, &inv_sqrt, &herms, tol, rng)?);
            }
            pairs.push((a, a + 1));
        }

        let mut xs = X_GRID.to_vec();
        for _ in 0..X_RANDOM_DRAWS {
            let e: f64 = rng.random_range(-2.0..2.0);
            xs.push(10f64.powf(e));
        }
        Ok(Self { states, pairs, xs })
    }

    fn triples(&self) -> usize {
        self.pairs.len() * self.xs.len()
    }

    /// Worst deviation of the trace distances after applying `map`.
    fn worst_deviation(
        &self,
        map: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
    ) -> Result<f64> {
        let images: Vec<ComplexMatrix> = self.states.iter().map(&map).collect::<Result<_>>()?;
        self.deviation_of(&images)
    }

    /// Worst deviation given the images of `self.states`.
    fn deviation_of(&self, images: &[ComplexMatrix]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &(i, j) in &self.pairs {
            for &x in &self.xs {
                let before = trace_norm(&(&self.states[i] - &self.states[j] * real(x)))?;
                let after = trace_norm(&(&images[i] - &images[j] * real(x)))?;
                worst = worst.max((after - before).abs());
            }
        }
        Ok(worst)
    }
}

/// `(rho0 + t h)` for a random traceless Hermitian `h` in the span, with `t`
/// drawn so the result stays positive.
fn random_span_state<R: Rng>(
    rho0: &ComplexMatrix,
    inv_sqrt: &ComplexMatrix,
    herms: &[ComplexMatrix],
    tol: &Tolerance,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let d = rho0.nrows();
    let mut h = crate::matcore::zeros(d, d);
    for x in herms {
        let c: f64 = rng.sample(StandardNormal);
        h += x * real(c);
    }
    let h = &h - rho0 * trace(&h);
    let scaled = hermitian_part(&(inv_sqrt * &h * inv_sqrt));
    let lowest = min_eigenvalue(&scaled);
    if frob(&h) <= tol.rank_cutoff || lowest >= 0.0 {
        return Ok(rho0.clone());
    }
    let t_max = -1.0 / lowest;
    let t = t_max * rng.random_range(0.05..1.0);
    let state = hermitian_part(&(rho0 + h * real(t)));
    let tr = trace(&state);
    Ok(state / tr)
}

fn superop_map(s: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let d = x.nrows();
    let v = s * vec_op(x);
    unvec_op(v.as_slice(), d, d)
}

/// Sampled check that `E` keeps every pair of code states exactly as
/// distinguishable as before.
pub fn is_preserved<R: Rng>(
    e: &Channel,
    code: &Code,
    tol: &Tolerance,
    trials: usize,
    rng: &mut R,
) -> Result<VerificationReport> {
    check_dims(e, code)?;
    let samples = Samples::draw(code, trials.max(1), tol, rng)?;
    let dev = samples.worst_deviation(|x| e.apply(x))?;
    Ok(VerificationReport::new(
        VerificationMode::Preserved,
        dev,
        samples.triples(),
        tol,
    ))
}

fn check_dims(e: &Channel, code: &Code) -> Result<()> {
    if e.dim() != code.dim() {
        return Err(Error::dim(format!(
            "channel acts on dimension {}, code lives in dimension {}",
            e.dim(),
            code.dim()
        )));
    }
    Ok(())
}

/// Numerical rank of `projector` restricted to the code span, compared with
/// the span's dimension. Returns `(injective, smallest relative singular value)`.
fn injective_on_span(
    projector: &ComplexMatrix,
    space: &OperatorSubspace,
    tol: &Tolerance,
) -> (bool, f64) {
    let image = projector * space.columns();
    let sv = singular_values(&image);
    let top = sv.iter().copied().fold(0.0, f64::max).max(1.0);
    let low = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let rel = if sv.is_empty() { 1.0 } else { low / top };
    (sv.len() == space.dim() && rel > tol.rank_cutoff, rel)
}

/// Noiseless check: preserved by `E` and by the fixed-point projector, and
/// the projector is injective on the code span.
pub fn is_noiseless<R: Rng>(
    e: &Channel,
    code: &Code,
    fs: &FixedSpaces,
    tol: &Tolerance,
    trials: usize,
    rng: &mut R,
) -> Result<VerificationReport> {
    check_dims(e, code)?;
    if fs.selection != PeripheralSelection::Fixed {
        return Err(Error::param("noiseless check needs fixed-point spaces"));
    }
    let samples = Samples::draw(code, trials.max(1), tol, rng)?;
    let dev_e = samples.worst_deviation(|x| e.apply(x))?;
    let dev_inf = samples.worst_deviation(|x| Ok(superop_map(&fs.einf, x)))?;
    let (ok, rel) = injective_on_span(&fs.einf, code.space(), tol);
    let mut report = VerificationReport::new(
        VerificationMode::Noiseless,
        dev_e.max(dev_inf),
        2 * samples.triples(),
        tol,
    );
    report.diagnostics.push(format!(
        "deviation under E {dev_e:.3e}, under the fixed-point projector {dev_inf:.3e}"
    ));
    Ok(report.with_structure(
        ok,
        format!(
            "fixed-point projector on the code span: smallest relative singular value {rel:.3e}"
        ),
    ))
}

/// Unitarily noiseless check: preserved by `E^n` for several `n` and by the
/// peripheral projector, which must be injective on the code span.
///
/// `ps` must come from [`crate::spectral::peripheral_spaces`].
pub fn is_unitarily_noiseless<R: Rng>(
    e: &Channel,
    code: &Code,
    ps: &FixedSpaces,
    tol: &Tolerance,
    trials: usize,
    rng: &mut R,
) -> Result<VerificationReport> {
    check_dims(e, code)?;
    if ps.selection != PeripheralSelection::UnitCircle {
        return Err(Error::param(
            "unitarily noiseless check needs peripheral spaces",
        ));
    }
    let samples = Samples::draw(code, trials.max(1), tol, rng)?;
    let mut images = samples.states.clone();
    let mut worst: f64 = 0.0;
    let mut applied = 0;
    let mut notes = Vec::new();
    for &n in &POWERS {
        while applied < n {
            images = images.iter().map(|x| e.apply(x)).collect::<Result<_>>()?;
            applied += 1;
        }
        let dev = samples.deviation_of(&images)?;
        notes.push(format!("n={n}: {dev:.3e}"));
        worst = worst.max(dev);
    }
    let dev_p = samples.worst_deviation(|x| Ok(superop_map(&ps.einf, x)))?;
    worst = worst.max(dev_p);
    let (ok, rel) = injective_on_span(&ps.einf, code.space(), tol);
    let outside = crate::matcore::containment_residual(code.space(), &ps.sigma);

    let mut report = VerificationReport::new(
        VerificationMode::UnitarilyNoiseless,
        worst,
        (POWERS.len() + 1) * samples.triples(),
        tol,
    );
    report.diagnostics.push(format!(
        "deviation per power {}; peripheral projector {dev_p:.3e}",
        notes.join(", ")
    ));
    report.diagnostics.push(format!(
        "code span distance from the rotating space {outside:.3e}"
    ));
    Ok(report.with_structure(
        ok,
        format!(
            "peripheral projector on the code span: smallest relative singular value {rel:.3e}"
        ),
    ))
}

/// Recovery channel with Kraus operators `P K_i^dagger E(P)^{-1/2}`, completed
/// by `1 - Pi` where `Pi` projects onto the support of `E(P)`.
pub fn transpose_channel(e: &Channel, p: &ComplexMatrix, tol: &Tolerance) -> Result<Channel> {
    let d = e.dim();
    if p.shape() != (d, d) {
        return Err(Error::dim(format!("projector must be {d}x{d}")));
    }
    let herm = frob(&(p - p.adjoint()));
    let idem = frob(&(p * p - p));
    if herm.max(idem) > tol.verify {
        return Err(Error::contract(
            "P is not an orthogonal projector",
            herm.max(idem),
        ));
    }
    let ep = hermitian_part(&e.apply(p)?);
    if frob(&ep) <= tol.rank_cutoff {
        return Err(Error::param("E(P) vanishes; the code is annihilated"));
    }
    let r = psd_inv_sqrt(&ep, tol)?;
    let pi = support_projector(&ep, tol)?;
    let mut kraus: Vec<ComplexMatrix> = e.kraus().iter().map(|k| p * k.adjoint() * &r).collect();
    let completion = identity(d) - pi;
    if frob(&completion) > tol.rank_cutoff {
        kraus.push(completion);
    }
    Channel::from_kraus(kraus, tol)
}

/// Correctability via the transpose channel: returns the noiseless report
/// for `R o E` together with `R`.
pub fn is_correctable<R: Rng>(
    e: &Channel,
    code: &Code,
    tol: &Tolerance,
    trials: usize,
    rng: &mut R,
) -> Result<(VerificationReport, Channel)> {
    check_dims(e, code)?;
    let r = transpose_channel(e, code.support(), tol)?;
    let re = compose(&r, e)?;
    let fs = fixed_spaces(&re, tol)?;
    let mut report = is_noiseless(&re, code, &fs, tol, trials, rng)?;
    report.mode = VerificationMode::Correctable;
    report.recovery_kraus_count = Some(r.kraus().len());
    let back = frob(&(re.apply(code.support())? - code.support()));
    report
        .diagnostics
        .push(format!("|R(E(P)) - P|_F = {back:.3e}"));
    Ok((report, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    Noiseless,
    UnitarilyNoiseless,
}

impl std::str::FromStr for AnalysisMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noiseless" => Ok(Self::Noiseless),
            "unitarily-noiseless" | "unitarily_noiseless" => Ok(Self::UnitarilyNoiseless),
            other => Err(Error::param(format!("unknown mode '{other}'"))),
        }
    }
}

/// End-to-end output of [`analyze`].
#[derive(Debug, Clone)]
pub struct IpsReport {
    pub mode: AnalysisMode,
    pub dim: usize,
    pub fixed_dim: usize,
    pub dual_dim: usize,
    pub rotating_dim: usize,
    pub commutant_dim: usize,
    pub channel: ChannelReport,
    /// Spaces for the selected mode (fixed or peripheral).
    pub spaces: FixedSpaces,
    pub support: SupportInfo,
    pub structure: AlgebraStructure,
    pub echo: EchoMap,
    pub spectral_gap: f64,
    pub warnings: Vec<String>,
}

impl IpsReport {
    pub fn shape(&self) -> &[(usize, usize)] {
        self.structure.shape()
    }

    pub fn support_rank(&self) -> usize {
        self.support.rank
    }

    /// One-line summary, e.g. `shape=[(2,2)] support_rank=4 unital=false`.
    pub fn summary(&self) -> String {
        let shape: Vec<String> = self
            .shape()
            .iter()
            .map(|(d, n)| format!("({d},{n})"))
            .collect();
        format!(
            "shape=[{}] support_rank={} unital={}",
            shape.join(","),
            self.support_rank(),
            self.channel.is_unital
        )
    }
}

/// Superoperator spectrum, fixed or rotating spaces, joint support, algebra
/// shape, cofactor states and echo map. Deterministic in `seed`.
pub fn analyze(e: &Channel, mode: AnalysisMode, tol: &Tolerance, seed: u64) -> Result<IpsReport> {
    tol.validate()?;
    let spec = superoperator_spectrum(e).map_err(|err| err.in_stage("spectrum"))?;
    let fixed = spaces_from_spectrum(&spec, e.dim(), PeripheralSelection::Fixed, tol)
        .map_err(|err| err.in_stage("fixed spaces"))?;
    let peripheral = spaces_from_spectrum(&spec, e.dim(), PeripheralSelection::UnitCircle, tol)
        .map_err(|err| err.in_stage("rotating spaces"))?;
    let fixed_dim = fixed.dim();
    let rotating_dim = peripheral.dim();
    let spaces = match mode {
        AnalysisMode::Noiseless => fixed,
        AnalysisMode::UnitarilyNoiseless => peripheral,
    };
    let support = joint_support(&spaces, e, tol).map_err(|err| err.in_stage("support"))?;
    let structure = structure_from_fixed_spaces(&spaces, &support, tol, seed)?;
    let echo = echo_map(&spaces, &structure, tol)?;
    let commutant_dim = commutant(e.kraus(), tol)
        .map_err(|err| err.in_stage("commutant"))?
        .dim();
    let mut warnings = spaces.diagnostics.warnings.clone();
    if structure.diagnostics().resamples > 0 {
        warnings.push(format!(
            "generic elements were redrawn {} time(s)",
            structure.diagnostics().resamples
        ));
    }
    Ok(IpsReport {
        mode,
        dim: e.dim(),
        fixed_dim,
        dual_dim: spaces.b_space.dim(),
        rotating_dim,
        commutant_dim,
        channel: e.report(tol),
        spectral_gap: spaces.diagnostics.spectral_gap,
        spaces,
        support,
        structure,
        echo,
        warnings,
    })
}

/// Seeded generator for callers that only have a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        amplitude_damping, bit_flip_three_qubit, dephasing, depolarizing_qubit, identity_channel,
        make_paper_example, paper_example_fixed_states, pauli_x, unitary_channel,
    };
    use crate::matcore::{c, ket_bra, kron};
    use crate::spectral::peripheral_spaces;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn phase_gate(theta: f64) -> ComplexMatrix {
        let mut u = identity(2);
        u[(1, 1)] = c(theta.cos(), theta.sin());
        u
    }

    fn plus() -> ComplexMatrix {
        ComplexMatrix::from_element(2, 2, real(0.5))
    }

    #[test]
    fn helstrom_examples() {
        let t = tol();
        let z0 = ket_bra(2, 0, 0);
        let z1 = ket_bra(2, 1, 1);
        assert!((helstrom(&z0, &z1, 0.5, &t).unwrap() - 1.0).abs() < 1e-12);
        assert!((helstrom(&z0, &z0, 0.5, &t).unwrap() - 0.5).abs() < 1e-12);
        let want = 0.5 * (1.0 + 1.0 / 2f64.sqrt());
        assert!((helstrom(&z0, &plus(), 0.5, &t).unwrap() - want).abs() < 1e-12);
        assert!(helstrom(&z0, &z1, 1.5, &t).is_err());
    }

    #[test]
    fn preservation_examples() {
        let t = tol();
        let mut rng = rng_from_seed(1);
        let bits = Code::from_states(&[ket_bra(2, 0, 0), ket_bra(2, 1, 1)], &t).unwrap();
        let r = is_preserved(&identity_channel(2), &bits, &t, 8, &mut rng).unwrap();
        assert!(r.passed());
        assert_eq!(r.worst_pair_deviation, 0.0);
        let r = is_preserved(&depolarizing_qubit(), &bits, &t, 8, &mut rng).unwrap();
        assert!(!r.passed());

        let e = make_paper_example();
        let code = Code::new(6, &paper_example_fixed_states(), &[], &t).unwrap();
        let r = is_preserved(&e, &code, &t, 8, &mut rng).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn noiseless_examples() {
        let t = tol();
        let mut rng = rng_from_seed(2);
        let e = make_paper_example();
        let fs = fixed_spaces(&e, &t).unwrap();
        let code = Code::new(6, &paper_example_fixed_states(), &[], &t).unwrap();
        assert!(is_noiseless(&e, &code, &fs, &t, 8, &mut rng)
            .unwrap()
            .passed());

        let u = unitary_channel(&phase_gate(1.0));
        let fs = fixed_spaces(&u, &t).unwrap();
        let code = Code::new(2, &[ket_bra(2, 0, 0), ket_bra(2, 1, 1), pauli_x()], &[], &t).unwrap();
        assert!(!is_noiseless(&u, &code, &fs, &t, 8, &mut rng)
            .unwrap()
            .passed());

        let id = identity_channel(2);
        let fs = fixed_spaces(&id, &t).unwrap();
        assert!(is_noiseless(&id, &code, &fs, &t, 8, &mut rng)
            .unwrap()
            .passed());
    }

    #[test]
    fn unitarily_noiseless_examples() {
        let t = tol();
        let mut rng = rng_from_seed(3);
        let full = Code::new(
            2,
            &[
                ket_bra(2, 0, 0),
                ket_bra(2, 1, 1),
                ket_bra(2, 0, 1),
                ket_bra(2, 1, 0),
            ],
            &[],
            &t,
        )
        .unwrap();
        let u = unitary_channel(&phase_gate(1.0));
        let ps = peripheral_spaces(&u, &t).unwrap();
        assert!(is_unitarily_noiseless(&u, &full, &ps, &t, 8, &mut rng)
            .unwrap()
            .passed());

        let bits = Code::from_states(&[ket_bra(2, 0, 0), ket_bra(2, 1, 1)], &t).unwrap();
        let deph = dephasing(2);
        let ps = peripheral_spaces(&deph, &t).unwrap();
        assert!(is_unitarily_noiseless(&deph, &bits, &ps, &t, 8, &mut rng)
            .unwrap()
            .passed());

        let ad = amplitude_damping(0.3);
        let ps = peripheral_spaces(&ad, &t).unwrap();
        let code = Code::new(2, &[ket_bra(2, 0, 0), ket_bra(2, 1, 1), pauli_x()], &[], &t).unwrap();
        assert!(!is_unitarily_noiseless(&ad, &code, &ps, &t, 8, &mut rng)
            .unwrap()
            .passed());
    }

    #[test]
    fn transpose_channel_examples() {
        let t = tol();
        let u = phase_gate(0.7);
        let r = transpose_channel(&unitary_channel(&u), &identity(2), &t).unwrap();
        let inv = unitary_channel(&u.adjoint());
        assert!(frob(&(r.superoperator() - inv.superoperator())) < 1e-12);

        let p = ket_bra(3, 0, 0) + ket_bra(3, 1, 1);
        let r = transpose_channel(&identity_channel(3), &p, &t).unwrap();
        let x = ket_bra(3, 0, 1);
        assert!(frob(&(r.apply(&x).unwrap() - &x)) < 1e-12);

        let e = make_paper_example();
        let p = kron(&(ket_bra(3, 0, 0) + ket_bra(3, 1, 1)), &identity(2));
        let r = transpose_channel(&e, &p, &t).unwrap();
        let re = compose(&r, &e).unwrap();
        assert!(frob(&(re.apply(&p).unwrap() - &p)) < 1e-10);
        // R o E sends sigma (x) tau to sigma (x) 1/2, which it then fixes.
        for x in paper_example_fixed_states() {
            let y = re.apply(&x).unwrap();
            let sigma = crate::matcore::partial_trace_second(&x, 3, 2);
            let want = kron(&sigma, &(identity(2) * real(0.5)));
            assert!(frob(&(&y - want)) < 1e-10);
            assert!(frob(&(re.apply(&y).unwrap() - &y)) < 1e-10);
        }
        assert!(transpose_channel(&e, &crate::matcore::zeros(6, 6), &t).is_err());
    }

    #[test]
    fn correctability_examples() {
        let t = tol();
        let mut rng = rng_from_seed(4);
        let e = bit_flip_three_qubit(0.1);
        let zero = ket_bra(8, 0, 0);
        let one = ket_bra(8, 7, 7);
        let code = Code::new(8, &[zero, one, ket_bra(8, 0, 7)], &[], &t).unwrap();
        let (report, r) = is_correctable(&e, &code, &t, 8, &mut rng).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.recovery_kraus_count, Some(r.kraus().len()));

        let bits = Code::from_states(&[ket_bra(2, 0, 0), ket_bra(2, 1, 1)], &t).unwrap();
        let (report, _) = is_correctable(&depolarizing_qubit(), &bits, &t, 8, &mut rng).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn analyze_examples() {
        let t = tol();
        let r = analyze(&make_paper_example(), AnalysisMode::Noiseless, &t, 0).unwrap();
        assert_eq!(r.shape(), &[(2, 2)]);
        assert_eq!(r.support_rank(), 4);
        assert_eq!(r.fixed_dim, 4);
        assert_eq!(r.commutant_dim, 1);
        assert_eq!(r.summary(), "shape=[(2,2)] support_rank=4 unital=false");

        let u = unitary_channel(&phase_gate(1.0));
        let r = analyze(&u, AnalysisMode::Noiseless, &t, 0).unwrap();
        assert_eq!(r.shape(), &[(1, 1), (1, 1)]);
        let r = analyze(&u, AnalysisMode::UnitarilyNoiseless, &t, 0).unwrap();
        assert_eq!(r.shape(), &[(2, 1)]);

        for mode in [AnalysisMode::Noiseless, AnalysisMode::UnitarilyNoiseless] {
            let r = analyze(&depolarizing_qubit(), mode, &t, 0).unwrap();
            assert_eq!(r.shape(), &[(1, 2)]);
        }
    }

    #[test]
    fn code_rejects_bad_samples() {
        let t = tol();
        let bad = ket_bra(2, 0, 0) * real(2.0);
        assert!(Code::new(2, &[ket_bra(2, 0, 0)], &[bad], &t).is_err());
        assert!(Code::new(2, &[pauli_x()], &[], &t).is_err());
        assert!(Code::from_states(&[], &t).is_err());
    }
}
