use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use opext::balls::{hole_make, hole_member, hole_singleton, MEMBER_TOL};
use opext::completion::{complete, critical_angle, dual_pair_make, sectorial_complete, DualPair, Phi1};
use opext::extremal::{cphi_extreme_tests, loone_certificate, Verdict};
use opext::random::rng;
use opext::schur::shorted;
use opext::sector::{cayley, cayley_inv, in_cphi};
use opext::triangular::{shmulyan_complete, tri_complete, TriPair};
use opext::verify::{self, Suite};
use opext::{Angle, CMatrix, Error, Tolerances};
use serde::Serialize;

use crate::io::{read_json, read_matrix, to_json, HoleFile, IoError, MatrixFile, PairFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "opext", version, about = "Contractive and C(phi) completions of 2x2 block matrices")]
pub struct Cli {
    /// Base seed for anything random.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, env = "OPEXT_TOL_RANK")]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true, env = "OPEXT_TOL_PSD")]
    pub tol_psd: Option<f64>,
    #[arg(long, global = true, env = "OPEXT_NORM_SLACK")]
    pub norm_slack: Option<f64>,
    /// Write the main result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Only print the main result.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct PhiArgs {
    /// Half-angle in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "phi_deg")]
    pub phi: Option<f64>,
    /// Half-angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_deg: Option<f64>,
}

impl PhiArgs {
    fn angle(&self) -> Result<Option<Angle>, Error> {
        match (self.phi, self.phi_deg) {
            (Some(r), _) => Angle::new(r).map(Some),
            (None, Some(d)) => Angle::from_degrees(d).map(Some),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HoleAction {
    Member,
    Sample,
    Singleton,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the completion T_K of a dual pair.
    Complete {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        k: PathBuf,
        #[command(flatten)]
        phi: PhiArgs,
    },
    /// Critical angle of a symmetric pair.
    Angle {
        #[arg(long)]
        pair: PathBuf,
    },
    /// Membership of a matrix in C(phi).
    Check {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        phi: PhiArgs,
    },
    /// Cayley transform (I - A)(I + A)^{-1}.
    Cayley {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Shorted operator onto the trailing block.
    Short {
        #[arg(long)]
        matrix: PathBuf,
        /// Size of the leading block.
        #[arg(long)]
        split: usize,
    },
    /// Upper triangular completion [[T11, D K D], [0, T22]].
    Tri {
        #[arg(long)]
        t11: PathBuf,
        #[arg(long)]
        t22: PathBuf,
        #[arg(long)]
        k: PathBuf,
        #[command(flatten)]
        phi: PhiArgs,
    },
    /// Extreme-point tests in C(phi), or in the loone L(Q; phi) with --q.
    Extreme {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        q: Option<PathBuf>,
        #[command(flatten)]
        phi: PhiArgs,
    },
    /// Operator holes: membership, sampling, singleton test.
    Hole {
        #[arg(value_enum)]
        action: HoleAction,
        #[arg(long)]
        hole: PathBuf,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Run the randomized oracle suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        dims: usize,
        /// Replace every check's residual threshold.
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug)]
enum Failure {
    Io(IoError),
    Domain(Error),
    Usage(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Io(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(e) => write!(f, "{e}"),
            Failure::Domain(e) => write!(f, "{e}"),
            Failure::Usage(m) => f.write_str(m),
        }
    }
}

struct Ctx<'a> {
    tol: Tolerances,
    seed: u64,
    out_path: Option<PathBuf>,
    quiet: bool,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// The main result: to `--out` when given, else stdout.
    fn emit_result(&mut self, json: &str) -> Result<(), Failure> {
        match &self.out_path {
            Some(p) => std::fs::write(p, format!("{json}\n"))
                .map_err(|e| Failure::Io(IoError::Read(p.display().to_string(), e))),
            None => {
                writeln!(self.out, "{json}").ok();
                Ok(())
            }
        }
    }

    /// A verdict line, suppressed by `--quiet` when a result file was written.
    fn emit_verdict(&mut self, json: &str) {
        if !(self.quiet && self.out_path.is_some()) {
            writeln!(self.out, "{json}").ok();
        }
    }
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Failure> {
    let d = Tolerances::default();
    Ok(Tolerances::new(
        cli.tol_rank.unwrap_or(d.rank_tol),
        cli.tol_psd.unwrap_or(d.psd_tol),
        cli.norm_slack.unwrap_or(d.norm_slack),
    )?)
}

fn read_pair(path: &Path, tol: &Tolerances) -> Result<DualPair, Failure> {
    let f: PairFile = read_json(path)?;
    Ok(dual_pair_make(&f.t11.to_matrix()?, &f.t21.to_matrix()?, &f.t12.to_matrix()?, tol)?)
}

fn require_phi(phi: &PhiArgs) -> Result<Angle, Failure> {
    phi.angle()?.ok_or_else(|| Failure::Usage("--phi or --phi-deg is required".into()))
}

fn matrix_json(m: &CMatrix) -> String {
    to_json(&MatrixFile::from_matrix(m))
}

#[derive(Serialize)]
struct CompleteVerdict {
    in_class: bool,
    margin: f64,
    kappa_plus: usize,
    kappa_minus: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

fn cmd_complete(ctx: &mut Ctx, pair: &Path, k: &Path, phi: &PhiArgs) -> Result<i32, Failure> {
    let pair = read_pair(pair, &ctx.tol)?;
    let k = read_matrix(k)?;
    let t = complete(&pair, &k)?;
    ctx.emit_result(&matrix_json(&t))?;
    let Some(phi) = phi.angle()? else { return Ok(EXIT_OK) };
    let direct = in_cphi(&t, phi, &ctx.tol)?;
    let (in_class, reason) = if pair.symmetric {
        match sectorial_complete(&pair, phi, &k, MEMBER_TOL, &ctx.tol) {
            Ok(r) => (r.in_class, None),
            Err(e @ (Error::BelowCriticalAngle { .. } | Error::InconsistentQ)) => (false, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    } else {
        (direct.in_class, None)
    };
    let v = CompleteVerdict { in_class, margin: direct.margin, kappa_plus: direct.kappa_plus, kappa_minus: direct.kappa_minus, reason };
    ctx.emit_verdict(&to_json(&v));
    Ok(if in_class { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_angle(ctx: &mut Ctx, pair: &Path) -> Result<i32, Failure> {
    let pair = read_pair(pair, &ctx.tol)?;
    let ca = critical_angle(&pair, &ctx.tol)?;
    let text = match ca.phi1 {
        Phi1::Angle(p) => format!("{p:.12}"),
        Phi1::PiOverTwoOnly => "pi/2-only".to_string(),
    };
    ctx.emit_result(&text)?;
    Ok(EXIT_OK)
}

fn cmd_check(ctx: &mut Ctx, matrix: &Path, phi: &PhiArgs) -> Result<i32, Failure> {
    let t = read_matrix(matrix)?;
    let r = in_cphi(&t, require_phi(phi)?, &ctx.tol)?;
    ctx.emit_result(&to_json(&r))?;
    Ok(if r.in_class { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_cayley(ctx: &mut Ctx, matrix: &Path, inverse: bool) -> Result<i32, Failure> {
    let a = read_matrix(matrix)?;
    let t = if inverse { cayley_inv(&a, &ctx.tol)? } else { cayley(&a, &ctx.tol)? };
    ctx.emit_result(&matrix_json(&t))?;
    Ok(EXIT_OK)
}

fn cmd_short(ctx: &mut Ctx, matrix: &Path, split: usize) -> Result<i32, Failure> {
    let a = read_matrix(matrix)?;
    ctx.emit_result(&matrix_json(&shorted(&a, split, &ctx.tol)?))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TriVerdict {
    in_class: bool,
    direct_in_class: Option<bool>,
}

fn cmd_tri(ctx: &mut Ctx, t11: &Path, t22: &Path, k: &Path, phi: &PhiArgs) -> Result<i32, Failure> {
    let (t11, t22, k) = (read_matrix(t11)?, read_matrix(t22)?, read_matrix(k)?);
    let phi = phi.angle()?;
    let tp = TriPair::new(&t11, &t22, phi, &ctx.tol)?;
    let v = match phi {
        Some(_) => {
            let r = shmulyan_complete(&tp, &k, MEMBER_TOL, &ctx.tol)?;
            ctx.emit_result(&matrix_json(&r.t))?;
            TriVerdict { in_class: r.in_class, direct_in_class: Some(r.direct.in_class) }
        }
        None => {
            let t = tri_complete(&tp, &k)?;
            ctx.emit_result(&matrix_json(&t))?;
            let kc = tp.compress_k(&k, &ctx.tol);
            TriVerdict { in_class: opext::matcore::op_norm(&kc) <= 1.0 + MEMBER_TOL, direct_in_class: None }
        }
    };
    ctx.emit_verdict(&to_json(&v));
    Ok(if v.in_class { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Serialize)]
struct ExtremeOut {
    verdict: Verdict,
    consistent: bool,
    spectrum_pm1: bool,
    certificate: MatrixFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_boundary_extreme: Option<bool>,
}

fn cmd_extreme(ctx: &mut Ctx, matrix: &Path, q: Option<&Path>, phi: &PhiArgs) -> Result<i32, Failure> {
    let k = read_matrix(matrix)?;
    let phi = require_phi(phi)?;
    let out = match q {
        Some(q) => {
            let q = read_matrix(q)?;
            let c = loone_certificate(&k, &q, phi, &ctx.tol)?;
            let verdict = if c.verdict == Verdict::ExtremeCertified {
                c.verdict
            } else if opext::extremal::loone_interior_witness(&k, &q, phi, ctx.seed, &ctx.tol).is_some() {
                Verdict::NotExtreme
            } else {
                Verdict::Undecided
            };
            ExtremeOut {
                verdict,
                consistent: c.consistent,
                spectrum_pm1: c.spectrum_pm1,
                certificate: MatrixFile::from_matrix(&c.c_matrix),
                normal: None,
                normal_boundary_extreme: None,
            }
        }
        None => {
            let r = cphi_extreme_tests(&k, phi, &ctx.tol)?;
            ExtremeOut {
                verdict: r.verdict,
                consistent: r.certificate.consistent,
                spectrum_pm1: r.certificate.spectrum_pm1,
                certificate: MatrixFile::from_matrix(&r.certificate.c_matrix),
                normal: Some(r.normal),
                normal_boundary_extreme: Some(r.normal_boundary_extreme),
            }
        }
    };
    ctx.emit_result(&to_json(&out))?;
    Ok(if out.verdict == Verdict::ExtremeCertified { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Serialize)]
struct MemberOut {
    member: bool,
    parameter: MatrixFile,
}

fn cmd_hole(ctx: &mut Ctx, action: HoleAction, hole: &Path, matrix: Option<&Path>, count: usize) -> Result<i32, Failure> {
    let f: HoleFile = read_json(hole)?;
    let hole = hole_make(&f.c1.to_matrix()?, &f.c2.to_matrix()?, &f.r_left.to_matrix()?, &f.r_right.to_matrix()?, &ctx.tol)?;
    match action {
        HoleAction::Member => {
            let path = matrix.ok_or_else(|| Failure::Usage("hole member needs --matrix".into()))?;
            let m = hole_member(&hole, &read_matrix(path)?, MEMBER_TOL, &ctx.tol)?;
            ctx.emit_result(&to_json(&MemberOut { member: m.member, parameter: MatrixFile::from_matrix(&m.k) }))?;
            Ok(if m.member { EXIT_OK } else { EXIT_NEGATIVE })
        }
        HoleAction::Sample => {
            if !hole.nonempty(&ctx.tol) {
                ctx.emit_result("[]")?;
                return Ok(EXIT_NEGATIVE);
            }
            let mut g = rng(ctx.seed);
            let mut pts = Vec::with_capacity(count);
            for _ in 0..count {
                let k = hole.sample_parameter(&mut g, 200).ok_or(Error::Infeasible)?;
                pts.push(MatrixFile::from_matrix(&hole.point(&k)));
            }
            ctx.emit_result(&to_json(&pts))?;
            Ok(EXIT_OK)
        }
        HoleAction::Singleton => {
            let s = hole_singleton(&hole, &ctx.tol)?;
            ctx.emit_result(&to_json(&s))?;
            Ok(if s { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

fn cmd_verify(ctx: &mut Ctx, suite: &str, trials: usize, dims: usize, tol: Option<f64>) -> Result<i32, Failure> {
    let suite: Suite = suite.parse().map_err(Failure::Usage)?;
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    let report = verify::run(suite, ctx.seed, trials, dims, &ctx.tol, tol);
    ctx.emit_result(&to_json(&report))?;
    Ok(if report.failures == 0 { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            if e.use_stderr() {
                write!(err, "{e}").ok();
            } else {
                write!(out, "{e}").ok();
            }
            return code;
        }
    };
    let tol = match tolerances(&cli) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            return EXIT_INVALID;
        }
    };
    let mut ctx = Ctx { tol, seed: cli.seed, out_path: cli.out.clone(), quiet: cli.quiet, out };
    let result = match &cli.command {
        Command::Complete { pair, k, phi } => cmd_complete(&mut ctx, pair, k, phi),
        Command::Angle { pair } => cmd_angle(&mut ctx, pair),
        Command::Check { matrix, phi } => cmd_check(&mut ctx, matrix, phi),
        Command::Cayley { matrix, inverse } => cmd_cayley(&mut ctx, matrix, *inverse),
        Command::Short { matrix, split } => cmd_short(&mut ctx, matrix, *split),
        Command::Tri { t11, t22, k, phi } => cmd_tri(&mut ctx, t11, t22, k, phi),
        Command::Extreme { matrix, q, phi } => cmd_extreme(&mut ctx, matrix, q.as_deref(), phi),
        Command::Hole { action, hole, matrix, count } => cmd_hole(&mut ctx, *action, hole, matrix.as_deref(), *count),
        Command::Verify { suite, trials, dims, tol } => cmd_verify(&mut ctx, suite, *trials, *dims, *tol),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            EXIT_INVALID
        }
    }
}
