//! `curvlab` command-line front end.
//!
//! Exit codes: 0 success or verdict holds, 1 invariant or verification
//! failure, 2 input error, 64 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use curvlab::exchange::{read_raw, write_tensor, RawTensor};
use curvlab::lab::{Condition, Lab, VerifierVerdict};
use curvlab::report::{self, Residuals, Settings};
use curvlab::{fit_model, generate, project_to_curvature, CurvatureTensor, Error, GeneratorKind, GeneratorSpec, HermitianContext};

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "curvlab", version, about = "Curvature tensors of almost Hermitian structures at a point")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the context and curvature symmetries of a tensor file.
    Validate {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Symmetry residuals, RK defect, constancy statistics, model fit and verdicts.
    Analyze {
        path: PathBuf,
        /// Verifier tolerance, relative to the tensor norm.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Random planes per constancy check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// Project onto curvature tensors before analysing instead of rejecting.
        #[arg(long)]
        project: bool,
    },
    /// Least-squares fit to K R1 + (c - K) R2 / 3; prints K, c and the residual.
    Fit { path: PathBuf },
    /// Write a generated tensor in the exchange format.
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        m: usize,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Write R as sparse records instead of the dense nested array.
        #[arg(long)]
        sparse: bool,
    },
    /// Run a lemma verifier on sampled kernels, or check one tensor file against it.
    Verify {
        #[arg(long, value_enum)]
        lemma: LemmaArg,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// Check this tensor (hypothesis and conclusions) instead of sampling kernels.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    SpaceForm,
    ComplexSpaceForm,
    Model,
    Random,
    RandomRk,
    #[value(name = "kernel-31")]
    Kernel31,
    #[value(name = "kernel-38")]
    Kernel38,
    Perturbed,
}

impl From<KindArg> for GeneratorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::SpaceForm => GeneratorKind::SpaceForm,
            KindArg::ComplexSpaceForm => GeneratorKind::ComplexSpaceForm,
            KindArg::Model => GeneratorKind::Model,
            KindArg::Random => GeneratorKind::Random,
            KindArg::RandomRk => GeneratorKind::RandomRk,
            KindArg::Kernel31 => GeneratorKind::Kernel31,
            KindArg::Kernel38 => GeneratorKind::Kernel38,
            KindArg::Perturbed => GeneratorKind::Perturbed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaArg {
    #[value(name = "1")]
    One,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    #[value(name = "A")]
    A,
}

struct Outcome {
    code: u8,
    stdout: String,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> Outcome {
    eprintln!("curvlab: {msg}");
    Outcome {
        code,
        stdout: String::new(),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Reads a file; format problems are input errors.
fn load(path: &Path) -> Result<RawTensor, Outcome> {
    read_raw(path).map_err(|e| fail(EXIT_INPUT, e))
}

#[derive(Serialize)]
struct Validation {
    input: String,
    valid: bool,
    tolerance: f64,
    residuals: Residuals,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn validate(path: PathBuf, as_json: bool) -> Outcome {
    let raw = match load(&path) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let max_abs = raw.coeffs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = Residuals::threshold(max_abs);
    let residuals = Residuals::of_raw(&raw);
    let error = raw
        .context()
        .and_then(|ctx| CurvatureTensor::new(&ctx, raw.coeffs).map(|_| ()))
        .err()
        .map(|e| e.to_string());
    let valid = error.is_none();
    let out = if as_json {
        json(&Validation {
            input: path.display().to_string(),
            valid,
            tolerance: tol,
            residuals,
            error: error.clone(),
        })
    } else {
        let mut s = format!("input: {}\n", path.display());
        report::format_residuals(&mut s, &residuals, Some(tol));
        match &error {
            None => s.push_str("valid\n"),
            Some(e) => s.push_str(&format!("invalid: {e}\n")),
        }
        s
    };
    Outcome {
        code: if valid { EXIT_OK } else { EXIT_FAIL },
        stdout: out,
    }
}

/// Validated context and tensor, or the outcome to exit with.
fn load_tensor(path: &Path, project: bool) -> Result<CurvatureTensor, Outcome> {
    let raw = load(path)?;
    let ctx = raw.context().map_err(|e| fail(EXIT_FAIL, e))?;
    let t = if project {
        project_to_curvature(&raw.coeffs, &ctx).expect("shape checked")
    } else {
        CurvatureTensor::new(&ctx, raw.coeffs).map_err(|e| fail(EXIT_FAIL, e))?
    };
    Ok(t)
}

fn analyze(path: PathBuf, settings: Settings, as_json: bool, project: bool) -> Outcome {
    if settings.tol.is_nan() || settings.tol <= 0.0 {
        return fail(EXIT_USAGE, "--tol must be positive");
    }
    let t = match load_tensor(&path, project) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let rep = report::analyze(&t, &path.display().to_string(), &settings);
    Outcome {
        code: EXIT_OK,
        stdout: if as_json { rep.to_json() + "\n" } else { rep.to_text() },
    }
}

fn fit(path: PathBuf) -> Outcome {
    let t = match load_tensor(&path, false) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let f = fit_model(&t);
    Outcome {
        code: EXIT_OK,
        stdout: format!("K {}\nc {}\nresidual {}\n", sig12(f.k), sig12(f.c), sig12(f.residual)),
    }
}

/// Twelve significant digits, positional where readable and scientific otherwise.
fn sig12(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e12).contains(&a) {
        let exp = if a == 0.0 { 0 } else { a.log10().floor() as i32 };
        let decimals = (11 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.11e}")
    }
}

fn generate_cmd(spec: GeneratorSpec, out: PathBuf, sparse: bool) -> Outcome {
    if let Err(e) = spec.validate() {
        return fail(EXIT_USAGE, e);
    }
    let t = match generate(&spec) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_FAIL, e),
    };
    if let Err(e) = write_tensor(&out, &t, sparse) {
        return fail(EXIT_INPUT, e);
    }
    Outcome {
        code: EXIT_OK,
        stdout: format!("wrote {} ({}, m = {})\n", out.display(), spec.kind, spec.m),
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    lemma: &'static str,
    m: usize,
    trials: usize,
    seed: u64,
    holds: bool,
    verdicts: Vec<VerifierVerdict>,
}

fn verify(lemma: LemmaArg, m: usize, trials: usize, seed: u64, as_json: bool, input: Option<PathBuf>) -> Outcome {
    let name = match lemma {
        LemmaArg::One => "1",
        LemmaArg::Three => "3",
        LemmaArg::Four => "4",
        LemmaArg::A => "A",
    };
    let verdicts = match input {
        Some(path) => {
            let t = match load_tensor(&path, false) {
                Ok(t) => t,
                Err(o) => return o,
            };
            let lab = Lab::new(t.context());
            let mut rng = curvlab::seeded(seed);
            let n = lab.default_samples();
            match lemma {
                LemmaArg::One => vec![
                    lab.check_condition(&t, Condition::HolomorphicPlanes, n, seed),
                    lab.check_lemma1_conclusion(&t, &mut rng),
                ],
                LemmaArg::Three => vec![
                    lab.check_condition(&t, Condition::HolomorphicPlanes, n, seed),
                    lab.check_rk(&t),
                ],
                LemmaArg::Four => vec![
                    lab.check_condition(&t, Condition::AntiholomorphicPlanes, n, seed),
                    lab.check_lemma4_conclusion(&t, &mut rng),
                ],
                LemmaArg::A => return fail(EXIT_USAGE, "--lemma A takes no --input (it is a statement about all tensors)"),
            }
        }
        None => {
            if m < 2 {
                return fail(EXIT_USAGE, Error::DimensionTooSmall(m));
            }
            if m > 3 {
                eprintln!("curvlab: warning: m = {m} is outside the shipped configurations (2, 3); this may be slow");
            }
            let ctx = HermitianContext::canonical(m).expect("m >= 2");
            let lab = Lab::new(&ctx);
            let v = match lemma {
                LemmaArg::One => lab.verify_lemma1(trials, seed),
                LemmaArg::Three => lab.verify_lemma3(trials, seed),
                LemmaArg::Four => lab.verify_lemma4(trials, seed),
                LemmaArg::A => lab.verify_special_angles(seed),
            };
            match v {
                Ok(v) => vec![v],
                Err(e) => return fail(EXIT_FAIL, e),
            }
        }
    };
    let holds = verdicts.iter().all(|v| v.holds);
    let stdout = if as_json {
        json(&VerifyOutput {
            lemma: name,
            m,
            trials,
            seed,
            holds,
            verdicts,
        })
    } else {
        let mut s = String::new();
        for v in &verdicts {
            report::format_verdict(&mut s, v);
        }
        s.push_str(if holds { "holds\n" } else { "FAILS\n" });
        s
    };
    Outcome {
        code: if holds { EXIT_OK } else { EXIT_FAIL },
        stdout,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Validate { path, json } => validate(path, json),
        Command::Analyze {
            path,
            tol,
            samples,
            seed,
            json,
            project,
        } => analyze(path, Settings { tol, samples, seed }, json, project),
        Command::Fit { path } => fit(path),
        Command::Generate {
            kind,
            m,
            k,
            c,
            seed,
            eps,
            out,
            sparse,
        } => {
            let spec = GeneratorSpec {
                kind: kind.into(),
                m,
                k,
                c,
                seed,
                eps,
            };
            generate_cmd(spec, out, sparse)
        }
        Command::Verify {
            lemma,
            m,
            trials,
            seed,
            json,
            input,
        } => verify(lemma, m, trials, seed, json, input),
    };
    print!("{}", outcome.stdout);
    ExitCode::from(outcome.code)
}
