//! Command-line front end: JSON ingestion, `analyze` / `verify` / `generate`,
//! and machine-readable reports.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs. Exit codes:
//! 0 success or pass, 1 verification failure, 2 parse or I/O error,
//! 3 validation error, 4 structural error, 5 numeric error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{make_planted, BlockSpec, Channel};
use crate::codes::{
    analyze, is_correctable, is_noiseless, is_preserved, is_unitarily_noiseless, rng_from_seed,
    AnalysisMode, Code, IpsReport, VerificationReport, DEFAULT_TRIALS,
};
use crate::error::Error;
use crate::matcore::{c, ComplexMatrix, Tolerance};
use crate::spectral::{fixed_spaces, peripheral_spaces};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_STRUCTURAL: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

const TOOL: &str = "ips";
const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Row-major matrix of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub kraus: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub dim: usize,
    pub basis: Vec<JsonMatrix>,
    #[serde(default)]
    pub samples: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub dim: usize,
    pub shape: Vec<[usize; 2]>,
    pub support_rank: usize,
    pub leak_dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EchoDiagnostics {
    pub domain_dim: usize,
    pub codomain_dim: usize,
    pub single_valued_residual: f64,
    pub corner_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDiagnostics {
    pub unital: bool,
    pub unital_residual: f64,
    pub tp_residual: f64,
    pub min_choi_eigenvalue: f64,
    pub commutant_dim: usize,
    pub spectral_gap: f64,
    pub reconstruction_residual: f64,
    pub semisimplicity_defect: f64,
    pub closure_residual: f64,
    pub factorization_residual: f64,
    pub echo: EchoDiagnostics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    pub label: Option<String>,
    pub mode: AnalysisMode,
    pub seed: u64,
    pub tolerances: Tolerance,
    pub dim: usize,
    pub shape: Vec<[usize; 2]>,
    pub support_rank: usize,
    pub fixed_dim: usize,
    pub dual_dim: usize,
    pub rotating_dim: usize,
    pub tau_states: Vec<JsonMatrix>,
    pub diagnostics: ReportDiagnostics,
}

impl ReportFile {
    pub fn from_report(
        r: &IpsReport,
        digest: String,
        label: Option<String>,
        seed: u64,
        tol: Tolerance,
    ) -> Self {
        let alg = r.structure.diagnostics();
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            input_digest: digest,
            label,
            mode: r.mode,
            seed,
            tolerances: tol,
            dim: r.dim,
            shape: r.shape().iter().map(|&(d, n)| [d, n]).collect(),
            support_rank: r.support_rank(),
            fixed_dim: r.fixed_dim,
            dual_dim: r.dual_dim,
            rotating_dim: r.rotating_dim,
            tau_states: r.structure.tau_states().iter().map(to_json).collect(),
            diagnostics: ReportDiagnostics {
                unital: r.channel.is_unital,
                unital_residual: r.channel.unital_residual,
                tp_residual: r.channel.tp_residual,
                min_choi_eigenvalue: r.channel.min_choi_eigenvalue,
                commutant_dim: r.commutant_dim,
                spectral_gap: r.spectral_gap,
                reconstruction_residual: r.spaces.diagnostics.reconstruction_residual,
                semisimplicity_defect: r.spaces.diagnostics.semisimplicity_defect,
                closure_residual: alg.closure_residual,
                factorization_residual: alg.factorization_residual,
                echo: EchoDiagnostics {
                    domain_dim: r.echo.domain_dim(),
                    codomain_dim: r.echo.codomain_dim(),
                    single_valued_residual: r.echo.single_valued_residual,
                    corner_residual: r.echo.corner_residual,
                },
                warnings: r.warnings.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyFile {
    pub tool: String,
    pub version: String,
    pub channel_digest: String,
    pub code_digest: String,
    pub seed: u64,
    pub trials: usize,
    pub tolerances: Tolerance,
    pub report: VerificationReport,
}

pub fn to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Parse a row-major `[re, im]` matrix that must be `dim x dim`.
pub fn from_json(m: &JsonMatrix, dim: usize) -> Result<ComplexMatrix, Error> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(Error::Dimension(format!("expected a {dim}x{dim} matrix")));
    }
    let out = ComplexMatrix::from_fn(dim, dim, |i, j| c(m[i][j][0], m[i][j][1]));
    if !crate::matcore::all_finite(&out) {
        return Err(Error::Contract {
            what: "matrix has non-finite entries".into(),
            residual: f64::INFINITY,
        });
    }
    Ok(out)
}

impl ChannelFile {
    pub fn from_channel(e: &Channel, label: Option<String>) -> Self {
        Self {
            dim: e.dim(),
            label,
            kraus: e.kraus().iter().map(to_json).collect(),
        }
    }

    pub fn to_channel(&self, tol: &Tolerance) -> Result<Channel, Error> {
        let ops = self
            .kraus
            .iter()
            .map(|k| from_json(k, self.dim))
            .collect::<Result<Vec<_>, _>>()?;
        Channel::from_kraus(ops, tol)
    }
}

impl CodeFile {
    pub fn from_code_parts(dim: usize, basis: &[ComplexMatrix], samples: &[ComplexMatrix]) -> Self {
        Self {
            dim,
            basis: basis.iter().map(to_json).collect(),
            samples: samples.iter().map(to_json).collect(),
        }
    }

    pub fn to_code(&self, tol: &Tolerance) -> Result<Code, Error> {
        let basis = self
            .basis
            .iter()
            .map(|m| from_json(m, self.dim))
            .collect::<Result<Vec<_>, _>>()?;
        let samples = self
            .samples
            .iter()
            .map(|m| from_json(m, self.dim))
            .collect::<Result<Vec<_>, _>>()?;
        Code::new(self.dim, &basis, &samples, tol)
    }
}

/// Parse `"2:2,1:1"` into block specs.
pub fn parse_shape(s: &str) -> Result<Vec<BlockSpec>, String> {
    s.split(',')
        .map(|part| {
            let (d, n) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("block '{part}' is not of the form d:n"))?;
            let d = d.trim().parse().map_err(|_| format!("bad d in '{part}'"))?;
            let n = n.trim().parse().map_err(|_| format!("bad n in '{part}'"))?;
            Ok(BlockSpec { d, n })
        })
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Noiseless,
    UnitarilyNoiseless,
}

impl From<ModeArg> for AnalysisMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Noiseless => AnalysisMode::Noiseless,
            ModeArg::UnitarilyNoiseless => AnalysisMode::UnitarilyNoiseless,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyModeArg {
    Preserved,
    Noiseless,
    UnitarilyNoiseless,
    Correctable,
}

#[derive(Debug, Clone, Copy, clap::Args)]
pub struct TolArgs {
    /// Radius for eigenvalues counting as 1 or unit-modulus.
    #[arg(long = "tol-eig", default_value_t = 1e-9)]
    pub eig: f64,
    /// Relative cutoff for rank and support decisions.
    #[arg(long = "tol-rank", default_value_t = 1e-10)]
    pub rank: f64,
    /// Acceptance threshold for verification predicates.
    #[arg(long = "tol-verify", default_value_t = 1e-8)]
    pub verify: f64,
}

#[derive(Debug, Parser)]
#[command(
    name = "ips",
    version,
    about = "Information-preserving structures of quantum channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find fixed/rotating spaces, the algebra shape and cofactor states.
    Analyze {
        /// Channel JSON file, or a directory of them.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Noiseless)]
        mode: ModeArg,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path (a directory in batch mode). Defaults to `<input>.report.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a code against a channel.
    Verify {
        channel: PathBuf,
        code: PathBuf,
        #[arg(long, value_enum)]
        mode: VerifyModeArg,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random pairs drawn from the code span.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random channel with a planted structure plus a ground-truth sidecar.
    Generate {
        /// Comma-separated `d:n` blocks, e.g. `2:2,1:1`.
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 0)]
        leak: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A failure with its exit code and a stage-labeled message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: format!("parse: {}", msg.into()),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Dimension(_) | Error::Contract { .. } | Error::Parameter(_) => EXIT_VALIDATION,
        Error::Structural { .. } => EXIT_STRUCTURAL,
        Error::Numeric { .. } => EXIT_NUMERIC,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = exit_code(&e);
        let label = match e {
            Error::Structural { .. } => "structural",
            Error::Numeric { .. } => "numeric",
            _ => "validation",
        };
        Self {
            code,
            message: format!("{label}: {e}"),
        }
    }
}

fn tolerance(t: &TolArgs) -> Result<Tolerance, Failure> {
    Ok(Tolerance::new(t.eig, t.rank, t.verify)?)
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("io: cannot write {}: {e}", path.display()),
    })
}

/// Run the CLI with explicit arguments and output streams. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Analyze {
            input,
            mode,
            tol,
            seed,
            out,
        } => {
            let tol = match tolerance(&tol) {
                Ok(t) => t,
                Err(f) => return report_failure(stderr, &input, f),
            };
            if input.is_dir() {
                analyze_dir(
                    &input,
                    mode.into(),
                    &tol,
                    seed,
                    out.as_deref(),
                    stdout,
                    stderr,
                )
            } else {
                let out = out.unwrap_or_else(|| sibling(&input, "report"));
                match analyze_file(&input, mode.into(), &tol, seed, &out) {
                    Ok(summary) => {
                        let _ = writeln!(stdout, "{summary}");
                        EXIT_OK
                    }
                    Err(f) => report_failure(stderr, &input, f),
                }
            }
        }
        Command::Verify {
            channel,
            code,
            mode,
            tol,
            seed,
            trials,
            out,
        } => match verify(&channel, &code, mode, &tol, seed, trials, out.as_deref()) {
            Ok((summary, passed)) => {
                let _ = writeln!(stdout, "{summary}");
                if passed {
                    EXIT_OK
                } else {
                    EXIT_FAIL
                }
            }
            Err(f) => report_failure(stderr, &channel, f),
        },
        Command::Generate {
            shape,
            leak,
            seed,
            out,
        } => match generate(&shape, leak, seed, &out) {
            Ok(summary) => {
                let _ = writeln!(stdout, "{summary}");
                EXIT_OK
            }
            Err(f) => report_failure(stderr, &out, f),
        },
    }
}

fn report_failure(stderr: &mut dyn Write, path: &Path, f: Failure) -> i32 {
    let _ = writeln!(stderr, "error [{}]: {}", path.display(), f.message);
    f.code
}

/// `dir/stem.<kind>.json` next to `path`.
fn sibling(path: &Path, kind: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{kind}.json"))
}

fn is_generated(path: &Path) -> bool {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
    name.ends_with(".report.json") || name.ends_with(".truth.json")
}

fn analyze_file(
    input: &Path,
    mode: AnalysisMode,
    tol: &Tolerance,
    seed: u64,
    out: &Path,
) -> Result<String, Failure> {
    let bytes = read(input)?;
    let file: ChannelFile = parse_json(&bytes, input)?;
    let e = file.to_channel(tol)?;
    let report = analyze(&e, mode, tol, seed)?;
    let summary = report.summary();
    let json = ReportFile::from_report(&report, sha256_hex(&bytes), file.label, seed, *tol);
    write_json(out, &json)?;
    Ok(summary)
}

fn analyze_dir(
    dir: &Path,
    mode: AnalysisMode,
    tol: &Tolerance,
    seed: u64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let mut inputs: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json") && !is_generated(p))
            .collect(),
        Err(e) => {
            return report_failure(
                stderr,
                dir,
                Failure::parse(format!("cannot list directory: {e}")),
            )
        }
    };
    inputs.sort();
    if let Some(out) = out {
        if let Err(e) = fs::create_dir_all(out) {
            return report_failure(
                stderr,
                out,
                Failure::parse(format!("cannot create output directory: {e}")),
            );
        }
    }
    let mut worst = EXIT_OK;
    for input in inputs {
        let target = match out {
            Some(dir) => dir.join(sibling(&input, "report").file_name().expect("has a name")),
            None => sibling(&input, "report"),
        };
        match analyze_file(&input, mode, tol, seed, &target) {
            Ok(summary) => {
                let name = input.file_name().and_then(|s| s.to_str()).unwrap_or("");
                let _ = writeln!(stdout, "{name}: {summary}");
            }
            Err(f) => worst = worst.max(report_failure(stderr, &input, f)),
        }
    }
    worst
}

fn verify(
    channel: &Path,
    code: &Path,
    mode: VerifyModeArg,
    tol: &TolArgs,
    seed: u64,
    trials: usize,
    out: Option<&Path>,
) -> Result<(String, bool), Failure> {
    let tol = tolerance(tol)?;
    let channel_bytes = read(channel)?;
    let code_bytes = read(code)?;
    let channel_file: ChannelFile = parse_json(&channel_bytes, channel)?;
    let code_file: CodeFile = parse_json(&code_bytes, code)?;
    let e = channel_file.to_channel(&tol)?;
    let c = code_file.to_code(&tol)?;
    let mut rng = rng_from_seed(seed);
    let report = match mode {
        VerifyModeArg::Preserved => is_preserved(&e, &c, &tol, trials, &mut rng)?,
        VerifyModeArg::Noiseless => {
            let fs = fixed_spaces(&e, &tol)?;
            is_noiseless(&e, &c, &fs, &tol, trials, &mut rng)?
        }
        VerifyModeArg::UnitarilyNoiseless => {
            let ps = peripheral_spaces(&e, &tol)?;
            is_unitarily_noiseless(&e, &c, &ps, &tol, trials, &mut rng)?
        }
        VerifyModeArg::Correctable => is_correctable(&e, &c, &tol, trials, &mut rng)?.0,
    };
    let passed = report.passed();
    let mut summary = format!(
        "verdict={} mode={} worst_deviation={:.3e} pairs_tested={}",
        if passed { "pass" } else { "fail" },
        serde_json::to_value(report.mode)
            .expect("mode serializes")
            .as_str()
            .unwrap_or(""),
        report.worst_pair_deviation,
        report.pairs_tested
    );
    if let Some(k) = report.recovery_kraus_count {
        summary.push_str(&format!(" recovery_kraus={k}"));
    }
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| sibling(code, "verify"));
    write_json(
        &out,
        &VerifyFile {
            tool: TOOL.into(),
            version: VERSION.into(),
            channel_digest: sha256_hex(&channel_bytes),
            code_digest: sha256_hex(&code_bytes),
            seed,
            trials,
            tolerances: tol,
            report,
        },
    )?;
    Ok((summary, passed))
}

fn generate(shape: &str, leak: usize, seed: u64, out: &Path) -> Result<String, Failure> {
    let blocks = parse_shape(shape).map_err(|m| Failure {
        code: EXIT_VALIDATION,
        message: format!("validation: {m}"),
    })?;
    let (e, truth) = make_planted(&blocks, leak, seed)?;
    let label = format!("planted shape {shape} leak {leak} seed {seed}");
    write_json(out, &ChannelFile::from_channel(&e, Some(label)))?;
    let sidecar = GroundTruthFile {
        dim: e.dim(),
        shape: truth.shape().iter().map(|&(d, n)| [d, n]).collect(),
        support_rank: truth.support_rank(),
        leak_dim: leak,
        seed,
    };
    write_json(&sibling(out, "truth"), &sidecar)?;
    let shape: Vec<String> = truth
        .shape()
        .iter()
        .map(|(d, n)| format!("({d},{n})"))
        .collect();
    Ok(format!(
        "dim={} shape=[{}] support_rank={}",
        e.dim(),
        shape.join(","),
        truth.support_rank()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_paper_example;

    #[test]
    fn json_matrix_round_trip() {
        let e = make_paper_example();
        let file = ChannelFile::from_channel(&e, None);
        let text = serde_json::to_string(&file).unwrap();
        let back: ChannelFile = serde_json::from_str(&text).unwrap();
        let e2 = back.to_channel(&Tolerance::default()).unwrap();
        assert_eq!(e.superoperator(), e2.superoperator());
    }

    #[test]
    fn row_major_layout() {
        let mut m = crate::matcore::zeros(2, 2);
        m[(0, 1)] = c(3.0, -1.0);
        let j = to_json(&m);
        assert_eq!(j[0][1], [3.0, -1.0]);
        assert_eq!(j[1][0], [0.0, 0.0]);
    }

    #[test]
    fn shape_parsing() {
        assert_eq!(
            parse_shape("2:2, 1:1").unwrap(),
            vec![BlockSpec { d: 2, n: 2 }, BlockSpec { d: 1, n: 1 }]
        );
        assert!(parse_shape("2x2").is_err());
        assert!(parse_shape("a:1").is_err());
    }

    #[test]
    fn bad_matrices_are_rejected() {
        assert!(from_json(&vec![vec![[1.0, 0.0]]], 2).is_err());
        assert!(from_json(&vec![vec![[f64::NAN, 0.0]]], 1).is_err());
    }

    #[test]
    fn digest_is_hex() {
        let h = sha256_hex(b"abc");
        assert_eq!(
            h,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
