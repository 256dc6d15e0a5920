//! `higherspin` CLI: evaluate kernels, run verification suites and sweep
//! truncation parameters.  Output is a pure function of (config, seed); exit
//! codes are 0 pass, 1 verification failure, 2 usage or constraint error,
//! 3 numerical singularity.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use higherspin::clifford::InversionConvention;
use higherspin::cylinder::{tail_decay_estimate, two_point_kernel, CylinderSpec};
use higherspin::hopf::{hopf_kernel, hopf_kernel_terms, HopfSpec, SpinStructure};
use higherspin::kernels::{e_1k, KernelParams};
use higherspin::verify::{
    check_annihilation, check_dilation, check_fd_cross, check_periodicity, check_reproducing,
    default_suite, KernelSelector, VerificationReport, DEFAULT_ANNIHILATION_TOL, DEFAULT_FD_TOL,
};
use higherspin::{Error, Multivector};

#[derive(Parser)]
#[command(name = "higherspin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a kernel at given arguments, emitting JSON.
    Eval(EvalArgs),
    /// Run verification checks; exit 0 iff all pass.
    Verify(VerifyArgs),
    /// Sweep a truncation parameter, emitting CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Manifold {
    Euclidean,
    Cylinder,
    Hopf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Structure {
    F1,
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Inversion {
    Algebraic,
    Kelvin,
}

/// Flags shared by the subcommands; every field can also come from a JSON
/// config file (`--config`), with explicit flags taking precedence.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct CommonArgs {
    /// JSON config file; explicit flags override its entries.
    #[arg(long)]
    #[serde(skip)]
    config: Option<String>,

    #[arg(long)]
    manifold: Option<Manifold>,
    /// Algebra dimension.
    #[arg(long)]
    m: Option<usize>,
    /// Operator order.
    #[arg(long)]
    k: Option<usize>,
    /// Kernel normalization constant (default 1).
    #[arg(long)]
    c1: Option<f64>,
    /// Lattice rank (cylinder).
    #[arg(long)]
    l: Option<usize>,
    /// Twist count (cylinder spin structure).
    #[arg(long)]
    p: Option<usize>,
    /// Sup-norm truncation radius (cylinder).
    #[arg(long)]
    radius: Option<i64>,
    /// Dilation factor (Hopf).
    #[arg(long)]
    t: Option<f64>,
    /// Series truncation (Hopf).
    #[arg(long = "N")]
    n_trunc: Option<usize>,
    /// Spin structure (Hopf).
    #[arg(long)]
    structure: Option<Structure>,
    /// Vector inverse convention (Hopf inverted terms).
    #[arg(long)]
    inversion: Option<Inversion>,
    /// RNG seed for sampled checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override for verification checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<String>,
}

impl CommonArgs {
    /// Overlay: `self` (explicit flags) wins over `base` (config file).
    fn merged_over(self, base: CommonArgs) -> CommonArgs {
        CommonArgs {
            config: None,
            manifold: self.manifold.or(base.manifold),
            m: self.m.or(base.m),
            k: self.k.or(base.k),
            c1: self.c1.or(base.c1),
            l: self.l.or(base.l),
            p: self.p.or(base.p),
            radius: self.radius.or(base.radius),
            t: self.t.or(base.t),
            n_trunc: self.n_trunc.or(base.n_trunc),
            structure: self.structure.or(base.structure),
            inversion: self.inversion.or(base.inversion),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            out: self.out.or(base.out),
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Evaluation point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Second point for two-point kernels (cylinder/Hopf).
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Checks to run: annihilation, annihilation-perturbed, periodicity,
    /// dilation, fd-cross, reproducing.  Defaults to the standard suite.
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Sample count for point-sampled checks.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep kind: "radius" (cylinder) or "hopf-n".
    #[arg(long)]
    kind: String,
    /// Radii for the radius sweep, comma separated.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
}

// ---- error-to-exit-code mapping --------------------------------------------

struct AppError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl AppError {
    fn usage(message: impl Into<String>) -> Self {
        AppError {
            code: 2,
            kind: "usage",
            message: message.into(),
        }
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Singularity { .. } => (3, "singularity"),
            _ => (2, "constraint"),
        };
        AppError {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn parse_vec(s: &Option<String>, name: &str, m: usize) -> Result<Vec<f64>, AppError> {
    let s = s
        .as_ref()
        .ok_or_else(|| AppError::usage(format!("missing --{name}")))?;
    let v: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let v = v.map_err(|_| AppError::usage(format!("--{name}: expected comma separated reals")))?;
    if v.len() != m {
        return Err(AppError::usage(format!(
            "--{name}: expected {m} components, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn load_common(common: CommonArgs) -> Result<CommonArgs, AppError> {
    match &common.config {
        None => Ok(common),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| AppError::usage(format!("cannot read config {path}: {e}")))?;
            let base: CommonArgs = serde_json::from_str(&text)
                .map_err(|e| AppError::usage(format!("bad config JSON: {e}")))?;
            Ok(common.merged_over(base))
        }
    }
}

fn kernel_params(c: &CommonArgs) -> Result<KernelParams, AppError> {
    let m = c.m.ok_or_else(|| AppError::usage("missing --m"))?;
    let k = c.k.ok_or_else(|| AppError::usage("missing --k"))?;
    Ok(KernelParams::with_c1(m, k, c.c1.unwrap_or(1.0))?)
}

fn cylinder_spec(c: &CommonArgs) -> Result<CylinderSpec, AppError> {
    let params = kernel_params(c)?;
    let l = c.l.ok_or_else(|| AppError::usage("missing --l"))?;
    Ok(CylinderSpec::new(
        params,
        l,
        c.p.unwrap_or(0),
        c.radius.unwrap_or(4),
    )?)
}

fn hopf_spec(c: &CommonArgs) -> Result<HopfSpec, AppError> {
    let params = kernel_params(c)?;
    let t = c.t.ok_or_else(|| AppError::usage("missing --t"))?;
    let structure = match c.structure.unwrap_or(Structure::F1) {
        Structure::F1 => SpinStructure::F1,
        Structure::F2 => SpinStructure::F2,
    };
    let spec = HopfSpec::new(params, t, c.n_trunc.unwrap_or(4), structure)?;
    Ok(match c.inversion.unwrap_or(Inversion::Algebraic) {
        Inversion::Algebraic => spec.with_inversion(InversionConvention::Algebraic),
        Inversion::Kelvin => spec.with_inversion(InversionConvention::Kelvin),
    })
}

fn emit(out: &Option<String>, text: &str) -> Result<(), AppError> {
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => {
            let mut f = fs::File::create(path)
                .map_err(|e| AppError::usage(format!("cannot write {path}: {e}")))?;
            writeln!(f, "{text}").map_err(|e| AppError::usage(e.to_string()))?;
            Ok(())
        }
    }
}

// ---- subcommands -------------------------------------------------------------

fn cmd_eval(args: EvalArgs) -> Result<(), AppError> {
    let c = load_common(args.common)?;
    let manifold = c.manifold.unwrap_or(Manifold::Euclidean);
    let params = kernel_params(&c)?;
    let m = params.m;
    let x = parse_vec(&args.x, "x", m)?;
    let u = parse_vec(&args.u, "u", m)?;
    let v = parse_vec(&args.v, "v", m)?;

    let (value, truncation) = match manifold {
        Manifold::Euclidean => {
            let val = e_1k(
                &Multivector::from_vector(&x),
                &Multivector::from_vector(&u),
                &Multivector::from_vector(&v),
                &params,
            )?;
            (val, serde_json::Value::Null)
        }
        Manifold::Cylinder => {
            let spec = cylinder_spec(&c)?;
            let val = match &args.y {
                None => higherspin::cylinder::cot_kernel_twisted(&x, &u, &v, &spec)?,
                Some(_) => {
                    let y = parse_vec(&args.y, "y", m)?;
                    two_point_kernel(&x, &y, &u, &v, &spec)?
                }
            };
            (val, json!({ "R": spec.radius }))
        }
        Manifold::Hopf => {
            let spec = hopf_spec(&c)?;
            let y = parse_vec(&args.y, "y", m)?;
            let val = hopf_kernel(&x, &y, &u, &v, &spec)?;
            (val, json!({ "N": spec.n_trunc }))
        }
    };
    let doc = json!({
        "value": value,
        "spec": spec_echo(&c, manifold)?,
        "truncation": truncation,
    });
    emit(&c.out, &serde_json::to_string(&doc).unwrap())
}

fn spec_echo(c: &CommonArgs, manifold: Manifold) -> Result<serde_json::Value, AppError> {
    let params = kernel_params(c)?;
    Ok(match manifold {
        Manifold::Euclidean => json!({ "manifold": "euclidean", "params": params }),
        Manifold::Cylinder => json!({ "manifold": "cylinder", "spec": cylinder_spec(c)? }),
        Manifold::Hopf => json!({ "manifold": "hopf", "spec": hopf_spec(c)? }),
    })
}

fn run_check(name: &str, c: &CommonArgs, points: usize) -> Result<VerificationReport, AppError> {
    let seed = c.seed.unwrap_or(0);
    Ok(match name {
        "annihilation" => {
            
            match c.manifold.unwrap_or(Manifold::Euclidean) {
                Manifold::Cylinder => check_annihilation(
                    &KernelSelector::Cylinder(cylinder_spec(c)?),
                    points,
                    seed,
                    c.tol.unwrap_or(DEFAULT_ANNIHILATION_TOL),
                    1.0,
                )?,
                _ => check_annihilation(
                    &KernelSelector::Euclidean(kernel_params(c)?),
                    points,
                    seed,
                    c.tol.unwrap_or(DEFAULT_ANNIHILATION_TOL),
                    1.0,
                )?,
            }
        }
        "annihilation-perturbed" => check_annihilation(
            &KernelSelector::Euclidean(kernel_params(c)?),
            points,
            seed,
            c.tol.unwrap_or(1e-3),
            0.5,
        )?,
        "periodicity" => {
            let spec = cylinder_spec(c)?;
            let dirs: Vec<usize> = (0..spec.l.min(2)).collect();
            check_periodicity(&spec, &dirs, &[4, 8, 16, 32], seed)?
        }
        "dilation" => {
            let spec = hopf_spec(c)?;
            check_dilation(&spec, &[1, 2, 3, 4], seed)?
        }
        "fd-cross" => check_fd_cross(
            &kernel_params(c)?,
            c.k.unwrap_or(2),
            seed,
            c.tol.unwrap_or(DEFAULT_FD_TOL),
        )?,
        "reproducing" => {
            check_reproducing(c.m.ok_or_else(|| AppError::usage("missing --m"))?, c.tol.unwrap_or(1e-12))?
        }
        other => return Err(AppError::usage(format!("unknown check name {other:?}"))),
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, AppError> {
    let c = load_common(args.common)?;
    let points = args.points.unwrap_or(20);
    let reports: Vec<VerificationReport> = if args.checks.is_empty() {
        let m = c.m.unwrap_or(5);
        default_suite(m, c.seed.unwrap_or(0))?
    } else {
        args.checks
            .iter()
            .map(|name| run_check(name, &c, points))
            .collect::<Result<Vec<_>, _>>()?
    };
    let all_pass = reports.iter().all(|r| r.pass());
    let doc = json!({
        "pass": all_pass,
        "reports": reports,
        "spec": c,
    });
    emit(&c.out, &serde_json::to_string(&doc).unwrap())?;
    Ok(all_pass)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), AppError> {
    let c = load_common(args.common)?;
    let mut csv = String::from("parameter,defect,fitted_exponent\n");
    match args.kind.as_str() {
        "radius" => {
            let spec = cylinder_spec(&c)?;
            let m = spec.params.m;
            let radii: Vec<i64> = match &args.radii {
                None => return Err(AppError::usage("missing --radii")),
                Some(s) if s.trim().is_empty() => {
                    return Err(AppError::usage("empty sweep list"))
                }
                Some(s) => s
                    .split(',')
                    .map(|p| p.trim().parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| AppError::usage("--radii: expected comma separated integers"))?,
            };
            let x = parse_vec(&args.x, "x", m)?;
            let u = parse_vec(&args.u, "u", m)?;
            let v = parse_vec(&args.v, "v", m)?;
            let fit = tail_decay_estimate(&spec, &x, &u, &v, &radii)?;
            let exponent = fit
                .exponent_majorant
                .map(|e| format!("{e:.6}"))
                .unwrap_or_else(|| "saturated".into());
            for (r, d) in fit.radii.iter().zip(&fit.signed_defects) {
                csv.push_str(&format!("{r},{d:e},{exponent}\n"));
            }
        }
        "hopf-n" => {
            let spec = hopf_spec(&c)?;
            let m = spec.params.m;
            let x = parse_vec(&args.x, "x", m)?;
            let y = parse_vec(&args.y, "y", m)?;
            let u = parse_vec(&args.u, "u", m)?;
            let v = parse_vec(&args.v, "v", m)?;
            if spec.n_trunc == 0 {
                return Err(AppError::usage("empty sweep list (need --N >= 1)"));
            }
            let terms = hopf_kernel_terms(&x, &y, &u, &v, &spec)?;
            let mut norms = Vec::new();
            for i in 1..=spec.n_trunc as i64 {
                let s: f64 = terms
                    .iter()
                    .filter(|(j, _)| j.abs() == i)
                    .map(|(_, t)| t.norm())
                    .sum();
                norms.push((i, s));
            }
            // fitted per-step decay exponent in base tau
            let tau = spec.tau();
            let xs: Vec<f64> = norms.iter().map(|(i, _)| *i as f64).collect();
            let ys: Vec<f64> = norms.iter().map(|(_, s)| s.max(1e-300).ln()).collect();
            let n = xs.len() as f64;
            let sx: f64 = xs.iter().sum();
            let sy: f64 = ys.iter().sum();
            let sxx: f64 = xs.iter().map(|a| a * a).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
            let slope = if norms.len() > 1 {
                (n * sxy - sx * sy) / (n * sxx - sx * sx)
            } else {
                f64::NAN
            };
            let exponent = slope / tau.ln();
            for (i, s) in &norms {
                csv.push_str(&format!("{i},{s:e},{exponent:.6}\n"));
            }
        }
        other => return Err(AppError::usage(format!("unknown sweep kind {other:?}"))),
    }
    emit(&c.out, csv.trim_end())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool, AppError> = match cli.command {
        Command::Eval(args) => cmd_eval(args).map(|_| true),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let doc = json!({ "error": e.message, "kind": e.kind });
            eprintln!("{}", serde_json::to_string(&doc).unwrap());
            ExitCode::from(e.code)
        }
    }
}
