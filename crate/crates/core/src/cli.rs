//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad dimension, 3 I/O or
//! parse error, 4 search found nothing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bloch::{mub_simplices, simplex_gram_deviation, BlochBasis};
use crate::error::Error;
use crate::mubs::{MubFamily, MubLabel, SelectedVariants};
use crate::sic::{
    angles_to_sic, build_sic, full_report, reconstruct_sic, search_fiducial, sic_geometry, verify_fiducial_with,
    FiducialCandidate, FiducialFile, SearchConfig, SearchOutcome,
};
use crate::tol::{TOL_COV, TOL_POLISH, TOL_SEARCH, TOL_SIC, TOL_UNIT};
use crate::zmod::PrimeDim;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAIL: i32 = 1;
pub const EXIT_BAD_DIM: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NOT_FOUND: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sicmub", version, about = "SIC-POVMs and MUBs in odd prime dimension")]
pub struct Cli {
    /// Hilbert-space dimension (odd prime).
    #[arg(long = "dim", global = true, allow_negative_numbers = true)]
    pub dim: Option<i64>,
    /// Input fiducial file (verify, angles, reconstruct).
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long = "out", global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-restarts", global = true, default_value_t = 50)]
    pub max_restarts: usize,
    /// Overrides the verification tolerance (verify, angles, reconstruct) or the
    /// search acceptance tolerance (search).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build the d+1 MUBs and report their unbiasedness.
    Mubs,
    /// Run every fiduciality and SIC-geometry check on a fiducial file.
    Verify,
    /// Export the rotation angles theta_{m,a} as CSV.
    Angles,
    /// Rebuild the SIC Bloch vectors from the projected MUB simplices.
    Reconstruct,
    /// Numerically search for a fiducial.
    Search,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OutOfRange(_) | Error::EvenDim(_) | Error::NonPrime(_) => EXIT_BAD_DIM,
            Error::Parse(_) | Error::DimensionMismatch { .. } | Error::NotNormalized(_) => EXIT_IO,
            Error::NotFiducial(_) | Error::NonUnitEigenvalue { .. } | Error::DegenerateSimplex(_) => EXIT_VERIFY_FAIL,
            _ => EXIT_VERIFY_FAIL,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_BAD_DIM
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let result = cli
        .dim
        .ok_or_else(|| Failure::new(EXIT_BAD_DIM, "--dim <int> is required; dimension must be an odd prime"))
        .and_then(|d| PrimeDim::new(d).map_err(Failure::from))
        .and_then(|dim| match cli.command {
            Command::Mubs => cmd_mubs(cli, dim),
            Command::Verify => cmd_verify(cli, dim),
            Command::Angles => cmd_angles(cli, dim),
            Command::Reconstruct => cmd_reconstruct(cli, dim),
            Command::Search => cmd_search(cli, dim),
        });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn read_fiducial(cli: &Cli, dim: PrimeDim) -> std::result::Result<FiducialCandidate, Failure> {
    let path = cli.input.as_ref().ok_or_else(|| Failure::new(EXIT_IO, "--in <path> is required"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let file = FiducialFile::parse(&text)?;
    Ok(file.to_candidate(dim)?)
}

fn build_family(dim: PrimeDim) -> std::result::Result<MubFamily, Failure> {
    let fam = MubFamily::build(dim)?;
    log_variants(&fam.variants());
    Ok(fam)
}

fn log_variants(v: &SelectedVariants) {
    eprintln!(
        "selected variants: U_G exponent {}, U_H exponent {}, Z_m eigenvalue {} (action residual {:.3e})",
        v.uf_g.name(),
        v.uf_h.name(),
        v.zm.name(),
        v.zm_residual
    );
}

fn tolerances(verify_tol: f64) -> serde_json::Value {
    json!({
        "unit": TOL_UNIT,
        "covariance": TOL_COV,
        "sic": verify_tol,
        "search": TOL_SEARCH,
        "polish": TOL_POLISH,
    })
}

fn cmd_mubs(cli: &Cli, dim: PrimeDim) -> CmdResult {
    let fam = build_family(dim)?;
    let basis = BlochBasis::new(dim);
    let d = dim.d();
    let mut unbiased: f64 = 0.0;
    let mut orthonormal: f64 = 0.0;
    for m in MubLabel::all(dim) {
        for n in MubLabel::all(dim) {
            let ov = fam.basis(m).adjoint() * fam.basis(n);
            for i in 0..d {
                for j in 0..d {
                    let p = ov[(i, j)].norm_sqr();
                    if m == n {
                        orthonormal = orthonormal.max((p - if i == j { 1.0 } else { 0.0 }).abs());
                    } else {
                        unbiased = unbiased.max((p - 1.0 / d as f64).abs());
                    }
                }
            }
        }
    }
    let simplices = mub_simplices(&fam, &basis);
    let mut gram: f64 = 0.0;
    for (i, s) in simplices.iter().enumerate() {
        gram = gram.max(simplex_gram_deviation(&s.vectors));
        for t in &simplices[i + 1..] {
            for x in &s.vectors {
                for y in &t.vectors {
                    gram = gram.max(x.dot(y).abs());
                }
            }
        }
    }
    let bases: Vec<_> = MubLabel::all(dim)
        .map(|m| {
            let kets: Vec<Vec<[f64; 2]>> =
                (0..d).map(|a| fam.ket(m, a).iter().map(|z| [z.re, z.im]).collect()).collect();
            json!({ "label": m, "kets": kets })
        })
        .collect();
    let pass = unbiased <= TOL_UNIT && orthonormal <= TOL_UNIT && gram <= TOL_UNIT;
    let out = json!({
        "d": d,
        "variants": fam.variants(),
        "tolerances": tolerances(TOL_SIC),
        "criteria": {
            "unbiasedness": { "deviation": unbiased, "tolerance": TOL_UNIT, "pass": unbiased <= TOL_UNIT },
            "orthonormality": { "deviation": orthonormal, "tolerance": TOL_UNIT, "pass": orthonormal <= TOL_UNIT },
            "bloch_gram": { "deviation": gram, "tolerance": TOL_UNIT, "pass": gram <= TOL_UNIT },
        },
        "bases": bases,
    });
    write_output(cli.output.as_deref(), &to_json(&out))?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAIL })
}

fn cmd_verify(cli: &Cli, dim: PrimeDim) -> CmdResult {
    let psi = read_fiducial(cli, dim)?;
    let fam = build_family(dim)?;
    let basis = BlochBasis::new(dim);
    let tol = cli.tol.unwrap_or(TOL_SIC);
    let report = full_report(&psi, &fam, &basis, tol)?;
    let pass = report.pass();
    let out = json!({ "pass": pass, "tolerances": tolerances(tol), "report": report });
    write_output(cli.output.as_deref(), &to_json(&out))?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAIL })
}

fn cmd_angles(cli: &Cli, dim: PrimeDim) -> CmdResult {
    let psi = read_fiducial(cli, dim)?;
    let tol = cli.tol.unwrap_or(TOL_SIC);
    if !verify_fiducial_with(&psi, tol).pass() {
        return Err(Failure::new(EXIT_VERIFY_FAIL, "input is not a SIC fiducial"));
    }
    let fam = build_family(dim)?;
    let basis = BlochBasis::new(dim);
    let sic = build_sic(&psi, &fam, &basis)?;
    let geom = sic_geometry(&sic, &fam, &basis)?;
    let rebuilt = angles_to_sic(&geom.simplices, &geom.decompositions, dim)?;
    let residual = rebuilt.iter().zip(&sic.blochs).map(|(x, y)| x.max_diff(y)).fold(0.0, f64::max);
    let mut csv = String::from("m,a,theta,roundtrip_residual\n");
    for dec in &geom.decompositions {
        for plane in &dec.planes {
            writeln!(csv, "{},{},{:.16e},{:.16e}", dec.label, plane.index, plane.theta, residual).unwrap();
        }
    }
    write_output(cli.output.as_deref(), &csv)?;
    Ok(if residual <= TOL_COV { EXIT_OK } else { EXIT_VERIFY_FAIL })
}

fn cmd_reconstruct(cli: &Cli, dim: PrimeDim) -> CmdResult {
    let psi = read_fiducial(cli, dim)?;
    let tol = cli.tol.unwrap_or(TOL_SIC);
    if !verify_fiducial_with(&psi, tol).pass() {
        return Err(Failure::new(EXIT_VERIFY_FAIL, "input is not a SIC fiducial"));
    }
    let fam = build_family(dim)?;
    let basis = BlochBasis::new(dim);
    let sic = build_sic(&psi, &fam, &basis)?;
    let geom = sic_geometry(&sic, &fam, &basis)?;
    let max_diff =
        |v: &[crate::bloch::BlochVector]| v.iter().zip(&sic.blochs).map(|(x, y)| x.max_diff(y)).fold(0.0, f64::max);
    let from_c = reconstruct_sic(&geom.cvecs, dim);
    let from_angles = angles_to_sic(&geom.simplices, &geom.decompositions, dim)?;
    let (res_c, res_angles) = (max_diff(&from_c), max_diff(&from_angles));
    let pass = res_c <= TOL_COV && res_angles <= TOL_COV;
    let vectors: Vec<Vec<f64>> = from_angles.iter().map(|b| b.components().iter().copied().collect()).collect();
    let out = json!({
        "d": dim.d(),
        "pass": pass,
        "tolerances": tolerances(tol),
        "criteria": {
            "reconstruction_from_c": { "deviation": res_c, "tolerance": TOL_COV, "pass": res_c <= TOL_COV },
            "reconstruction_from_angles": { "deviation": res_angles, "tolerance": TOL_COV, "pass": res_angles <= TOL_COV },
        },
        "bloch_vectors": vectors,
    });
    write_output(cli.output.as_deref(), &to_json(&out))?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAIL })
}

fn cmd_search(cli: &Cli, dim: PrimeDim) -> CmdResult {
    let tol = cli.tol.unwrap_or(TOL_SEARCH);
    match search_fiducial(dim, SearchConfig::new(cli.seed, cli.max_restarts, tol)) {
        SearchOutcome::Found { candidate, restart, objective, max_deviation } => {
            eprintln!(
                "found fiducial on restart {restart} (objective {objective:.3e}, max deviation {max_deviation:.3e})"
            );
            let fam = build_family(dim)?;
            let basis = BlochBasis::new(dim);
            let report = full_report(&candidate, &fam, &basis, TOL_SIC)?;
            let report_json = to_json(&json!({
                "pass": report.pass(),
                "seed": cli.seed,
                "restart": restart,
                "objective": objective,
                "tolerances": tolerances(TOL_SIC),
                "report": report,
            }));
            write_output(cli.output.as_deref(), &to_json(&FiducialFile::from_candidate(&candidate)))?;
            match &cli.output {
                Some(p) => {
                    let mut rp = p.clone().into_os_string();
                    rp.push(".report.json");
                    write_output(Some(Path::new(&rp)), &report_json)?;
                }
                None => eprint!("{report_json}"),
            }
            Ok(EXIT_OK)
        }
        SearchOutcome::NotFound { restarts, best_objective } => {
            eprintln!("no fiducial found after {restarts} restarts (best objective {best_objective:.3e})");
            Ok(EXIT_NOT_FOUND)
        }
    }
}
