//! Command-line surface: figure data, solution evaluation, profile dumps,
//! and the verification suite.
//!
//! Every data mode emits CSV with a header row, `.` decimal separator, and
//! 17 significant digits, so identical configurations produce byte-identical
//! output. A JSON file passed through `--config` overrides the flags of the
//! chosen mode key by key; unknown keys are rejected. Exit codes: 0 success,
//! 1 verification failures, 2 configuration error, 3 numerical error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::background::{BackgroundProfile, Branch};
use crate::error::{Error, Result};
use crate::free::{self, FreeSpinor, Subspace};
use crate::interacting::{self, PotentialConfig};
use crate::params::ModelParams;
use crate::suite;

/// Quantity emitted per energy sample by the dispersion modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionColumn {
    /// Decay parameter omega(epsilon).
    Omega,
    /// Magnitude of the oscillation wavenumber k(epsilon).
    AbsWavenumber,
}

/// Formats one value with 17 significant digits.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Parses `lo:hi:n` into a uniform grid or a comma-separated list of values.
pub fn parse_value_list(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Config(format!("{what} in value list {text:?}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:n"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad("bad lower bound"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad("bad upper bound"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi || n < 2 {
            return Err(bad("need finite lo < hi and n >= 2"));
        }
        return Ok(linspace(lo, hi, n));
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let v: f64 = part.trim().parse().map_err(|_| bad("bad number"))?;
        if !v.is_finite() {
            return Err(bad("non-finite entry"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(bad("empty list"));
    }
    Ok(out)
}

/// Parses a complex constant given as `re` or `re,im`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let bad = || Error::Config(format!("expected re or re,im, got {text:?}"));
    let parts: Vec<&str> = text.split(',').collect();
    let (re, im) = match parts.as_slice() {
        [r] => (r.trim().parse().map_err(|_| bad())?, 0.0),
        [r, i] => (
            r.trim().parse().map_err(|_| bad())?,
            i.trim().parse().map_err(|_| bad())?,
        ),
        _ => return Err(bad()),
    };
    if !(f64::is_finite(re) && f64::is_finite(im)) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Dispersion table: one row per energy, one value column per eta trace.
pub fn dispersion_csv(etas: &[f64], eps: &[f64], column: DispersionColumn) -> Result<String> {
    if etas.is_empty() || eps.is_empty() {
        return Err(Error::Config("need at least one eta and one epsilon".into()));
    }
    for &eta in etas {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("eta must be >= 0, got {eta}")));
        }
    }
    let tag = match column {
        DispersionColumn::Omega => "omega",
        DispersionColumn::AbsWavenumber => "abs_wavenumber",
    };
    let mut csv = String::from("epsilon");
    for &eta in etas {
        let _ = write!(csv, ",{tag}_eta_{eta}");
    }
    csv.push('\n');
    for &e in eps {
        csv.push_str(&fmt17(e));
        for &eta in etas {
            let dd = free::decay_parameter(e, 1.0, eta)?;
            let v = match column {
                DispersionColumn::Omega => dd.omega,
                DispersionColumn::AbsWavenumber => dd.wavenumber.abs(),
            };
            csv.push(',');
            csv.push_str(&fmt17(v));
        }
        csv.push('\n');
    }
    Ok(csv)
}

/// Density table over the full confined domain: `x_over_X` from -1 to 1, one
/// column per energy.
///
/// The boundary rows carry the exact limit 0; interior rows evaluate the
/// matched free solution. With `normalize_peak` each trace is scaled so its
/// sampled maximum is 1.
pub fn density_csv(
    profile: &BackgroundProfile,
    eps: &[f64],
    a_plus: Complex64,
    b_plus: Complex64,
    points: usize,
    normalize_peak: bool,
) -> Result<String> {
    if eps.is_empty() {
        return Err(Error::Config("need at least one epsilon".into()));
    }
    if points < 9 {
        return Err(Error::Config(format!("need >= 9 points, got {points}")));
    }
    let (lo, hi) = profile.domain();
    if !(lo.is_finite() && hi.is_finite()) || (lo + hi).abs() > 1e-9 * (hi - lo) {
        return Err(Error::Config(
            "density table needs a bounded symmetric domain".into(),
        ));
    }
    let us = linspace(-1.0, 1.0, points);
    let mut traces: Vec<Vec<f64>> = Vec::with_capacity(eps.len());
    for &e in eps {
        let spinor = FreeSpinor::matched(profile, e, a_plus, b_plus, Subspace::PositiveEnergy)?;
        let mut trace = Vec::with_capacity(points);
        for (i, &u) in us.iter().enumerate() {
            if i == 0 || i == points - 1 {
                trace.push(0.0);
                continue;
            }
            let x = u * hi;
            let psi = free::evaluate_spinor(profile, &spinor, 0.0, x)?;
            trace.push(free::probability_density(profile, &psi, x)?);
        }
        if normalize_peak {
            let peak = trace.iter().cloned().fold(0.0f64, f64::max);
            if peak > 0.0 {
                for v in &mut trace {
                    *v /= peak;
                }
            }
        }
        traces.push(trace);
    }
    let mut csv = String::from("x_over_X");
    for &e in eps {
        let _ = write!(csv, ",density_eps_{e}");
    }
    csv.push('\n');
    for (i, &u) in us.iter().enumerate() {
        csv.push_str(&fmt17(u));
        for trace in &traces {
            csv.push(',');
            csv.push_str(&fmt17(trace[i]));
        }
        csv.push('\n');
    }
    Ok(csv)
}

/// Free-solution samples: position, characteristic coordinate, spinor
/// components, and density.
pub fn free_solution_csv(
    profile: &BackgroundProfile,
    epsilon: f64,
    a_plus: Complex64,
    b_plus: Complex64,
    subspace: Subspace,
    t: f64,
    points: usize,
    range: (f64, f64),
) -> Result<String> {
    if points < 9 {
        return Err(Error::Config(format!("need >= 9 points, got {points}")));
    }
    let spinor = FreeSpinor::matched(profile, epsilon, a_plus, b_plus, subspace)?;
    let mut csv = String::from("x,y,re_up,im_up,re_dn,im_dn,density\n");
    for x in linspace(range.0, range.1, points) {
        let y = profile.y(x)?;
        let psi = free::evaluate_spinor(profile, &spinor, t, x)?;
        let rho = free::probability_density(profile, &psi, x)?;
        let row = [x, y, psi.up.re, psi.up.im, psi.dn.re, psi.dn.im, rho];
        csv.push_str(&row.map(fmt17).join(","));
        csv.push('\n');
    }
    Ok(csv)
}

/// Interacting Morse-family samples on one branch, from the origin out to
/// the confining boundary.
pub fn interacting_csv(
    profile: &BackgroundProfile,
    s0: f64,
    w0: f64,
    epsilon: f64,
    branch: Branch,
    t: f64,
    points: usize,
) -> Result<String> {
    if points < 9 {
        return Err(Error::Config(format!("need >= 9 points, got {points}")));
    }
    let (_, xi, _) = profile
        .linear_flat_constants()
        .ok_or(Error::UnsupportedFamily {
            expected: "linear-flat",
        })?;
    let problem = interacting::morse_reduce(profile, s0, w0, epsilon, branch)?;
    let config = PotentialConfig::morse(s0, w0);
    let (lo, hi) = profile.domain();
    let edge = match branch {
        Branch::Pos => hi,
        Branch::Neg => lo,
    } * (1.0 - 1e-12);
    let xik = xi * profile.params().kappa();
    let mut csv = String::from("x,z,re_up,im_up,re_dn,im_dn,density\n");
    for x in linspace(0.0, edge.abs(), points) {
        let x = branch.sign() * x;
        let z = 1.0 - xik * x.abs();
        let psi = interacting::evaluate_interacting_spinor(profile, &config, &problem, t, x)?;
        let rho = free::probability_density(profile, &psi, x)?;
        let row = [x, z, psi.up.re, psi.up.im, psi.dn.re, psi.dn.im, rho];
        csv.push_str(&row.map(fmt17).join(","));
        csv.push('\n');
    }
    Ok(csv)
}

/// Background samples: profile functions, derivatives, characteristic maps,
/// and the damping constant diagnostic.
pub fn profile_csv(profile: &BackgroundProfile, points: usize, range: (f64, f64)) -> Result<String> {
    if points < 9 {
        return Err(Error::Config(format!("need >= 9 points, got {points}")));
    }
    let mut csv = String::from("x,a,b,a_prime,b_prime,y,q,sigma0\n");
    for x in linspace(range.0, range.1, points) {
        let loc = profile.local(x)?;
        let row = [
            x,
            loc.a,
            loc.b,
            loc.ap,
            loc.bp,
            profile.y(x)?,
            profile.q(x)?,
            profile.sigma0(x),
        ];
        csv.push_str(&row.map(fmt17).join(","));
        csv.push('\n');
    }
    Ok(csv)
}

/// One value, or a list in the `--eps` syntax, inside a JSON config.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Number(f64),
    Text(String),
}

impl ValueSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            ValueSpec::Number(v) if v.is_finite() => Ok(vec![*v]),
            ValueSpec::Number(v) => Err(Error::Config(format!("non-finite value {v}"))),
            ValueSpec::Text(s) => parse_value_list(s),
        }
    }

    fn single(&self, what: &str) -> Result<f64> {
        let vs = self.values()?;
        if vs.len() != 1 {
            return Err(Error::Config(format!("{what} takes a single value")));
        }
        Ok(vs[0])
    }
}

/// JSON override file. Every key mirrors the long flag of the same name and
/// replaces that flag's value for the chosen mode; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub eta: Option<ValueSpec>,
    pub eps: Option<ValueSpec>,
    pub m: Option<f64>,
    #[serde(rename = "R")]
    pub curvature_r: Option<f64>,
    pub theta: Option<f64>,
    pub xi: Option<f64>,
    pub sign_a1: Option<i8>,
    pub tau: Option<f64>,
    pub zeta: Option<f64>,
    pub vartheta: Option<f64>,
    pub a0: Option<f64>,
    pub a1: Option<f64>,
    pub b0: Option<f64>,
    pub b1: Option<f64>,
    pub family: Option<String>,
    #[serde(rename = "A")]
    pub a_plus: Option<String>,
    #[serde(rename = "B")]
    pub b_plus: Option<String>,
    pub subspace: Option<String>,
    pub branch: Option<String>,
    #[serde(rename = "S0")]
    pub s0: Option<f64>,
    #[serde(rename = "W0")]
    pub w0: Option<f64>,
    pub t: Option<f64>,
    pub points: Option<usize>,
    pub x_lo: Option<f64>,
    pub x_hi: Option<f64>,
    pub normalize_peak: Option<bool>,
    pub out: Option<String>,
}

fn load_config(path: &PathBuf) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_variant<T: ValueEnum>(text: &str, what: &str) -> Result<T> {
    T::from_str(text, true).map_err(|_| Error::Config(format!("unknown {what} {text:?}")))
}

/// Background family selector for the solve and profile modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Linear,
    Hyperbolic,
    Trig,
    InverseSquare,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SubspaceArg {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Parser, Debug)]
#[command(
    name = "curved-dirac",
    version,
    about = "Dirac model on static curved 1+1 backgrounds: figure data, \
             solution evaluation, verification"
)]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand, Debug)]
enum Mode {
    /// Decay parameter omega versus energy, one trace per eta.
    Fig1a(Fig1Args),
    /// Oscillation wavenumber magnitude versus energy, one trace per eta.
    Fig1b(Fig1Args),
    /// Confined densities on the linear-flat background.
    Fig2(Fig2Args),
    /// Confined densities on the constant-curvature hyperbolic background.
    Fig3(Fig3Args),
    /// Free-solution samples on a chosen background.
    SolveFree(SolveFreeArgs),
    /// Morse-family interacting solution on the linear-flat background.
    SolveInteracting(SolveInteractingArgs),
    /// Full verification suite; nonzero exit when any check fails.
    Verify,
    /// Background profile samples on a chosen background.
    Profile(ProfileArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON file whose keys override these flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Rest mass scale; computations run in units of m.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
}

#[derive(Args, Debug)]
struct Fig1Args {
    #[command(flatten)]
    common: CommonArgs,
    /// Damping constants, comma-separated (0.001 is the flat reference).
    #[arg(long, default_value = "0.001,0.15,0.4,0.8,1.5", allow_hyphen_values = true)]
    eta: String,
    /// Energies: comma-separated values or lo:hi:n.
    #[arg(long, default_value = "-4:4:401", allow_hyphen_values = true)]
    eps: String,
}

#[derive(Args, Debug)]
struct Fig2Args {
    #[command(flatten)]
    common: CommonArgs,
    /// Curvature scalar R.
    #[arg(long = "R", default_value_t = 0.2)]
    curvature_r: f64,
    #[arg(long, default_value_t = 0.3)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    xi: f64,
    /// Sign of the linear profile slope, +1 or -1.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(i8).range(-1..=1))]
    sign_a1: i8,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Right-branch constant A, as re or re,im.
    #[arg(long = "A", default_value = "1.2", allow_hyphen_values = true)]
    a_plus: String,
    /// Right-branch constant B, as re or re,im.
    #[arg(long = "B", default_value = "0.8", allow_hyphen_values = true)]
    b_plus: String,
    /// Energies: comma-separated values or lo:hi:n.
    #[arg(long, default_value = "0.5,0.8,1.0,1.2", allow_hyphen_values = true)]
    eps: String,
    /// Samples across the domain.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Scale each trace to unit peak.
    #[arg(long)]
    normalize_peak: bool,
}

#[derive(Args, Debug)]
struct Fig3Args {
    #[command(flatten)]
    common: CommonArgs,
    /// Curvature scalar R.
    #[arg(long = "R", default_value_t = 0.2)]
    curvature_r: f64,
    #[arg(long, default_value_t = 0.7)]
    zeta: f64,
    #[arg(long, default_value_t = 0.3)]
    vartheta: f64,
    #[arg(long, default_value_t = 0.5)]
    a0: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Right-branch constant A, as re or re,im.
    #[arg(long = "A", default_value = "1.2", allow_hyphen_values = true)]
    a_plus: String,
    /// Right-branch constant B, as re or re,im.
    #[arg(long = "B", default_value = "0.8", allow_hyphen_values = true)]
    b_plus: String,
    /// Energies: comma-separated values or lo:hi:n.
    #[arg(long, default_value = "0.5,0.8,1.0,1.2", allow_hyphen_values = true)]
    eps: String,
    /// Samples across the domain.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Scale each trace to unit peak.
    #[arg(long)]
    normalize_peak: bool,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    /// Background family.
    #[arg(long, value_enum, default_value_t = Family::Linear)]
    family: Family,
    /// Curvature scalar R.
    #[arg(long = "R", default_value_t = 0.2)]
    curvature_r: f64,
    #[arg(long, default_value_t = 0.3)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    xi: f64,
    /// Sign of the linear profile slope, +1 or -1.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(i8).range(-1..=1))]
    sign_a1: i8,
    #[arg(long, default_value_t = 0.7)]
    zeta: f64,
    /// Defaults to 0.3 (hyperbolic) or 0.9 (trig).
    #[arg(long)]
    vartheta: Option<f64>,
    /// Defaults to 0.5, or 1.0 for inverse-square.
    #[arg(long, allow_negative_numbers = true)]
    a0: Option<f64>,
    /// Inverse-square log coefficient.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a1: f64,
    /// Inverse-square b offset.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    b0: f64,
    /// Inverse-square b log coefficient.
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    b1: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
}

impl GeometryArgs {
    fn build(&self) -> Result<BackgroundProfile> {
        let params = ModelParams::new(0.0, self.tau, 0.0, 1.0, self.curvature_r)?;
        let vartheta = self.vartheta.unwrap_or(match self.family {
            Family::Trig => 0.9,
            _ => 0.3,
        });
        let a0 = self.a0.unwrap_or(match self.family {
            Family::InverseSquare => 1.0,
            _ => 0.5,
        });
        match self.family {
            Family::Linear => {
                BackgroundProfile::linear_flat(&params, self.theta, self.xi, self.sign_a1)
            }
            Family::Hyperbolic => {
                BackgroundProfile::hyperbolic(&params, self.zeta, vartheta, a0)
            }
            Family::Trig => BackgroundProfile::trig(&params, self.zeta, vartheta, a0),
            Family::InverseSquare => {
                BackgroundProfile::inverse_square(&params, a0, self.a1, self.b0, self.b1)
            }
            Family::Flat => BackgroundProfile::flat(&params, a0),
        }
    }
}

#[derive(Args, Debug)]
struct SolveFreeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Energy of the evaluated solution.
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    eps: f64,
    /// Right-branch constant A, as re or re,im.
    #[arg(long = "A", default_value = "1.2", allow_hyphen_values = true)]
    a_plus: String,
    /// Right-branch constant B, as re or re,im.
    #[arg(long = "B", default_value = "0.8", allow_hyphen_values = true)]
    b_plus: String,
    /// Energy subspace of the component ratios.
    #[arg(long, value_enum, default_value_t = SubspaceArg::Positive)]
    subspace: SubspaceArg,
    /// Evaluation time.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Lower evaluation bound; defaults to just inside the domain.
    #[arg(long, allow_negative_numbers = true)]
    x_lo: Option<f64>,
    /// Upper evaluation bound; defaults to just inside the domain.
    #[arg(long, allow_negative_numbers = true)]
    x_hi: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveInteractingArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Curvature scalar R.
    #[arg(long = "R", default_value_t = 0.2)]
    curvature_r: f64,
    #[arg(long, default_value_t = 0.3)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    xi: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Scalar coupling scale; defaults to eta/2 - W0 (admissible).
    #[arg(long = "S0", allow_negative_numbers = true)]
    s0: Option<f64>,
    /// Pseudo-scalar coupling scale.
    #[arg(long = "W0", default_value_t = 0.0, allow_negative_numbers = true)]
    w0: f64,
    /// Energy of the evaluated solution.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    eps: f64,
    /// Branch to evaluate.
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    branch: BranchArg,
    /// Evaluation time.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Lower evaluation bound; defaults to just inside the domain.
    #[arg(long, allow_negative_numbers = true)]
    x_lo: Option<f64>,
    /// Upper evaluation bound; defaults to just inside the domain.
    #[arg(long, allow_negative_numbers = true)]
    x_hi: Option<f64>,
}

fn check_mass(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Config(format!("m must be positive, got {m}")));
    }
    Ok(())
}

fn evaluation_range(
    profile: &BackgroundProfile,
    x_lo: Option<f64>,
    x_hi: Option<f64>,
) -> Result<(f64, f64)> {
    let (lo, hi) = profile.domain();
    let fallback = if lo.is_finite() && hi.is_finite() {
        let pad = (hi - lo) * 1e-6;
        (lo + pad, hi - pad)
    } else {
        (-5.0, 5.0)
    };
    let range = (x_lo.unwrap_or(fallback.0), x_hi.unwrap_or(fallback.1));
    if !(range.0 < range.1) {
        return Err(Error::Config(format!(
            "need x_lo < x_hi, got {} and {}",
            range.0, range.1
        )));
    }
    Ok(range)
}

fn apply_common(args: &mut CommonArgs, cfg: &ConfigFile) {
    if let Some(m) = cfg.m {
        args.m = m;
    }
    if let Some(out) = &cfg.out {
        args.out = Some(PathBuf::from(out));
    }
}

fn apply_geometry(args: &mut GeometryArgs, cfg: &ConfigFile) -> Result<()> {
    if let Some(f) = &cfg.family {
        args.family = parse_variant(f, "family")?;
    }
    if let Some(v) = cfg.curvature_r {
        args.curvature_r = v;
    }
    if let Some(v) = cfg.theta {
        args.theta = v;
    }
    if let Some(v) = cfg.xi {
        args.xi = v;
    }
    if let Some(v) = cfg.sign_a1 {
        args.sign_a1 = v;
    }
    if let Some(v) = cfg.zeta {
        args.zeta = v;
    }
    if let Some(v) = cfg.vartheta {
        args.vartheta = Some(v);
    }
    if let Some(v) = cfg.a0 {
        args.a0 = Some(v);
    }
    if let Some(v) = cfg.a1 {
        args.a1 = v;
    }
    if let Some(v) = cfg.b0 {
        args.b0 = v;
    }
    if let Some(v) = cfg.b1 {
        args.b1 = v;
    }
    if let Some(v) = cfg.tau {
        args.tau = v;
    }
    Ok(())
}

/// Text output of one run, with the path it should land in.
struct Rendered {
    out: Option<PathBuf>,
    text: String,
}

fn emit(r: &Rendered) -> Result<()> {
    match &r.out {
        Some(path) => std::fs::write(path, &r.text)?,
        None => {
            print!("{}", r.text);
            std::io::stdout().flush()?;
        }
    }
    Ok(())
}

fn run_fig1(mut args: Fig1Args, column: DispersionColumn) -> Result<Rendered> {
    if let Some(path) = &args.common.config {
        let cfg = load_config(path)?;
        apply_common(&mut args.common, &cfg);
        if let Some(v) = &cfg.eta {
            args.eta = match v {
                ValueSpec::Text(s) => s.clone(),
                ValueSpec::Number(n) => n.to_string(),
            };
        }
        if let Some(v) = &cfg.eps {
            args.eps = match v {
                ValueSpec::Text(s) => s.clone(),
                ValueSpec::Number(n) => n.to_string(),
            };
        }
    }
    check_mass(args.common.m)?;
    let etas = parse_value_list(&args.eta)?;
    let eps = parse_value_list(&args.eps)?;
    Ok(Rendered {
        out: args.common.out.clone(),
        text: dispersion_csv(&etas, &eps, column)?,
    })
}

fn run_fig2(mut args: Fig2Args) -> Result<Rendered> {
    if let Some(path) = &args.common.config {
        let cfg = load_config(path)?;
        apply_common(&mut args.common, &cfg);
        if let Some(v) = cfg.curvature_r {
            args.curvature_r = v;
        }
        if let Some(v) = cfg.theta {
            args.theta = v;
        }
        if let Some(v) = cfg.xi {
            args.xi = v;
        }
        if let Some(v) = cfg.sign_a1 {
            args.sign_a1 = v;
        }
        if let Some(v) = cfg.tau {
            args.tau = v;
        }
        if let Some(v) = &cfg.a_plus {
            args.a_plus = v.clone();
        }
        if let Some(v) = &cfg.b_plus {
            args.b_plus = v.clone();
        }
        if let Some(v) = &cfg.eps {
            args.eps = match v {
                ValueSpec::Text(s) => s.clone(),
                ValueSpec::Number(n) => n.to_string(),
            };
        }
        if let Some(v) = cfg.points {
            args.points = v;
        }
        if let Some(v) = cfg.normalize_peak {
            args.normalize_peak = v;
        }
    }
    check_mass(args.common.m)?;
    let params = ModelParams::new(0.0, args.tau, 0.0, 1.0, args.curvature_r)?;
    let profile = BackgroundProfile::linear_flat(&params, args.theta, args.xi, args.sign_a1)?;
    let csv = density_csv(
        &profile,
        &parse_value_list(&args.eps)?,
        parse_complex(&args.a_plus)?,
        parse_complex(&args.b_plus)?,
        args.points,
        args.normalize_peak,
    )?;
    Ok(Rendered {
        out: args.common.out.clone(),
        text: csv,
    })
}

fn run_fig3(mut args: Fig3Args) -> Result<Rendered> {
    if let Some(path) = &args.common.config {
        let cfg = load_config(path)?;
        apply_common(&mut args.common, &cfg);
        if let Some(v) = cfg.curvature_r {
            args.curvature_r = v;
        }
        if let Some(v) = cfg.zeta {
            args.zeta = v;
        }
        if let Some(v) = cfg.vartheta {
            args.vartheta = v;
        }
        if let Some(v) = cfg.a0 {
            args.a0 = v;
        }
        if let Some(v) = cfg.tau {
            args.tau = v;
        }
        if let Some(v) = &cfg.a_plus {
            args.a_plus = v.clone();
        }
        if let Some(v) = &cfg.b_plus {
            args.b_plus = v.clone();
        }
        if let Some(v) = &cfg.eps {
            args.eps = match v {
                ValueSpec::Text(s) => s.clone(),
                ValueSpec::Number(n) => n.to_string(),
            };
        }
        if let Some(v) = cfg.points {
            args.points = v;
        }
        if let Some(v) = cfg.normalize_peak {
            args.normalize_peak = v;
        }
    }
    check_mass(args.common.m)?;
    let params = ModelParams::new(0.0, args.tau, 0.0, 1.0, args.curvature_r)?;
    let profile = BackgroundProfile::hyperbolic(&params, args.zeta, args.vartheta, args.a0)?;
    let csv = density_csv(
        &profile,
        &parse_value_list(&args.eps)?,
        parse_complex(&args.a_plus)?,
        parse_complex(&args.b_plus)?,
        args.points,
        args.normalize_peak,
    )?;
    Ok(Rendered {
        out: args.common.out.clone(),
        text: csv,
    })
}

fn run_solve_free(mut args: SolveFreeArgs) -> Result<Rendered> {
    if let Some(path) = &args.common.config {
        let cfg = load_config(path)?;
        apply_common(&mut args.common, &cfg);
        apply_geometry(&mut args.geometry, &cfg)?;
        if let Some(v) = &cfg.eps {
            args.eps = v.single("eps")?;
        }
        if let Some(v) = &cfg.a_plus {
            args.a_plus = v.clone();
        }
        if let Some(v) = &cfg.b_plus {
            args.b_plus = v.clone();
        }
        if let Some(v) = &cfg.subspace {
            args.subspace = parse_variant(v, "subspace")?;
        }
        if let Some(v) = cfg.t {
            args.t = v;
        }
        if let Some(v) = cfg.points {
            args.points = v;
        }
        if let Some(v) = cfg.x_lo {
            args.x_lo = Some(v);
        }
        if let Some(v) = cfg.x_hi {
            args.x_hi = Some(v);
        }
    }
    check_mass(args.common.m)?;
    let profile = args.geometry.build()?;
    let range = evaluation_range(&profile, args.x_lo, args.x_hi)?;
    let subspace = match args.subspace {
        SubspaceArg::Positive => Subspace::PositiveEnergy,
        SubspaceArg::Negative => Subspace::NegativeEnergy,
    };
    let csv = free_solution_csv(
        &profile,
        args.eps,
        parse_complex(&args.a_plus)?,
        parse_complex(&args.b_plus)?,
        subspace,
        args.t,
        args.points,
        range,
    )?;
    Ok(Rendered {
        out: args.common.out.clone(),
        text: csv,
    })
}

fn run_solve_interacting(mut args: SolveInteractingArgs) -> Result<Rendered> {
    if let Some(path) = &args.common.config {
        let cfg = load_config(path)?;
        apply_common(&mut args.common, &cfg);
        if let Some(v) = cfg.curvature_r {
            args.curvature_r = v;
        }
        if let Some(v) = cfg.theta {
            args.theta = v;
        }
        if let Some(v) = cfg.xi {
            args.xi = v;
        }
        if let Some(v) = cfg.tau {
            args.tau = v;
        }
        if let Some(v) = cfg.s0 {
            args.s0 = Some(v);
        }
        if let Some(v) = cfg.w0 {
            args.w0 = v;
        }
        if let Some(v) = &cfg.eps {
            args.eps = v.single("eps")?;
        }
        if let Some(v) = &cfg.branch {
            args.branch = parse_variant(v, "branch")?;
        }
        if let Some(v) = cfg.t {
            args.t = v;
        }
        if let Some(v) = cfg.points {
            args.points = v;
        }
    }
    check_mass(args.common.m)?;
    let params = ModelParams::new(0.0, args.tau, 0.0, 1.0, args.curvature_r)?;
    let profile = BackgroundProfile::linear_flat(&params, args.theta, args.xi, 1)?;
    let s0 = args.s0.unwrap_or(0.5 * profile.eta() - args.w0);
    let branch = match args.branch {
        BranchArg::Plus => Branch::Pos,
        BranchArg::Minus => Branch::Neg,
    };
    let csv = interacting_csv(&profile, s0, args.w0, args.eps, branch, args.t, args.points)?;
    Ok(Rendered {
        out: args.common.out.clone(),
        text: csv,
    })
}

fn run_profile(mut args: ProfileArgs) -> Result<Rendered> {
    if let Some(path) = &args.common.config {
        let cfg = load_config(path)?;
        apply_common(&mut args.common, &cfg);
        apply_geometry(&mut args.geometry, &cfg)?;
        if let Some(v) = cfg.points {
            args.points = v;
        }
        if let Some(v) = cfg.x_lo {
            args.x_lo = Some(v);
        }
        if let Some(v) = cfg.x_hi {
            args.x_hi = Some(v);
        }
    }
    check_mass(args.common.m)?;
    let profile = args.geometry.build()?;
    let range = evaluation_range(&profile, args.x_lo, args.x_hi)?;
    Ok(Rendered {
        out: args.common.out.clone(),
        text: profile_csv(&profile, args.points, range)?,
    })
}

fn run_verify() -> i32 {
    let reports = suite::run_all();
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failed = 0usize;
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {name:width$}  {detail}", name = r.name, detail = r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} passed, {} failed", reports.len() - failed, failed);
    if failed > 0 {
        1
    } else {
        0
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidParams(_)
        | Error::Constraint(_)
        | Error::UnsupportedFamily { .. }
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 3,
    }
}

/// Parses the given argument vector and runs the selected mode.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let rendered = match cli.mode {
        Mode::Fig1a(a) => run_fig1(a, DispersionColumn::Omega),
        Mode::Fig1b(a) => run_fig1(a, DispersionColumn::AbsWavenumber),
        Mode::Fig2(a) => run_fig2(a),
        Mode::Fig3(a) => run_fig3(a),
        Mode::SolveFree(a) => run_solve_free(a),
        Mode::SolveInteracting(a) => run_solve_interacting(a),
        Mode::Verify => return run_verify(),
        Mode::Profile(a) => run_profile(a),
    };
    match rendered.and_then(|r| emit(&r)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Entry point for the binary: parses `std::env::args_os`.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}
