//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::figure::{figure_dataset, figure_potential, trace_with_gamma, FigureOptions};
use crate::hamiltonian::{propagate_x, PlaneWave};
use crate::linalg::c;
use crate::output::{to_json, ArcDoc, Cx, Num};
use crate::potential::Potential;
use crate::spectra::{locate_spectrum, Kind};
use crate::validate::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_COUNT: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "zs-tspec", version, about = "Spectra of the time part of the Zakharov-Shabat system")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// `zero`, inline JSON, or a path to a JSON file.
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// Use the parameters of a plotted example (1a, 1b, 3a, 3b, 3c, 3d, 5).
    #[arg(long, global = true)]
    pub figure: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = KindArg::Periodic)]
    pub kind: KindArg,
    #[arg(long, global = true, default_value_t = 16)]
    pub nmax: usize,
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Dirichlet,
    Neumann,
    Periodic,
    Critical,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Dirichlet => Kind::Dirichlet,
            KindArg::Neumann => Kind::Neumann,
            KindArg::Periodic => Kind::Periodic,
            KindArg::Critical => Kind::Critical,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Locate eigenvalues of one kind.
    Spectrum,
    /// Trace the arc of Im Delta = 0 through a real critical point.
    Zeroset {
        /// Label of the critical point.
        #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
        n: i64,
    },
    /// Run invariant suites.
    Validate {
        /// Suite name; repeat for several, omit for all.
        #[arg(long)]
        suite: Vec<String>,
    },
    /// Plot data for one of the single-exponential examples.
    Figure { id: String },
    /// Propagate a plane wave in x and report drift of the conserved functionals.
    Conserve {
        /// `sigma=<+-1> alpha=<re>[,<im>] [m=<int>]`
        #[arg(long, num_args = 1.., value_delimiter = ' ')]
        plane_wave: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        xmax: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Fourier truncation.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Relative size of a random perturbation added to the initial data.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
    },
}

fn load_potential(common: &Common) -> Result<Potential> {
    if let Some(id) = &common.figure {
        return Ok(figure_potential(id)?.1);
    }
    let src = common.potential.as_deref().unwrap_or("zero");
    if src == "zero" {
        return Ok(Potential::zero(1));
    }
    let text = if src.trim_start().starts_with('{') { src.to_string() } else { std::fs::read_to_string(src)? };
    Potential::from_json_str(&text)
}

fn emit(common: &Common, body: &str) -> Result<()> {
    match &common.out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn cmd_spectrum(common: &Common) -> Result<i32> {
    let psi = load_potential(common)?;
    let s = locate_spectrum(common.kind.into(), &psi, common.nmax, common.tol)?;
    let body = match common.format {
        Format::Csv => crate::output::spectrum_csv(&s),
        _ => crate::output::spectrum_json(&s)?,
    };
    emit(common, &body)?;
    eprintln!("{} eigenvalues, counting lemma holds from N = {}", s.eigenvalues.len(), s.n);
    Ok(EXIT_OK)
}

fn cmd_zeroset(common: &Common, n: i64) -> Result<i32> {
    let psi = load_potential(common)?;
    let nmax = common.nmax.min(n.unsigned_abs() as usize + 4).max(n.unsigned_abs() as usize);
    let per = locate_spectrum(Kind::Periodic, &psi, nmax, common.tol)?;
    let arc = trace_with_gamma(&psi, &per, n, 1e-7)?;
    for w in arc.arc.warnings.iter().chain(&arc.warnings) {
        eprintln!("warning: {w}");
    }
    let doc = ArcDoc::new(&arc.arc, arc.gamma_star.as_ref(), &arc.warnings);
    let body = match common.format {
        Format::Csv => {
            let mut s = String::from("re,im\n");
            for z in &arc.arc.samples {
                s.push_str(&format!("{},{}\n", crate::output::fmt_f64(z.re), crate::output::fmt_f64(z.im)));
            }
            s
        }
        _ => to_json(&doc)?,
    };
    emit(common, &body)?;
    Ok(EXIT_OK)
}

fn cmd_validate(common: &Common, suites: &[String]) -> Result<i32> {
    let report = validate(suites)?;
    let body = match common.format {
        Format::Json => to_json(&report)?,
        _ => report.to_text(),
    };
    emit(common, &body)?;
    if common.out.is_some() {
        eprint!("{}", report.to_text());
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_figure(common: &Common, id: &str) -> Result<i32> {
    let opts = FigureOptions { n_max: common.nmax, tol: common.tol, ..Default::default() };
    let data = figure_dataset(id, &opts)?;
    emit(common, &data.to_json()?)?;
    Ok(EXIT_OK)
}

fn parse_plane_wave(args: &[String]) -> Result<PlaneWave> {
    let (mut sigma, mut alpha, mut m) = (1.0, c(0.5, 0.0), None);
    for a in args.iter().flat_map(|s| s.split_whitespace()) {
        let (k, v) = a.split_once('=').ok_or_else(|| Error::InvalidInput(format!("expected key=value, got '{a}'")))?;
        let bad = || Error::InvalidInput(format!("cannot parse '{a}'"));
        match k {
            "sigma" => sigma = v.parse().map_err(|_| bad())?,
            "alpha" => {
                let parts: Vec<f64> = v.split(',').map(|x| x.parse().map_err(|_| bad())).collect::<Result<_>>()?;
                alpha = match parts.as_slice() {
                    [re] => c(*re, 0.0),
                    [re, im] => c(*re, *im),
                    _ => return Err(bad()),
                };
            }
            "m" => m = Some(v.parse().map_err(|_| bad())?),
            _ => return Err(Error::InvalidInput(format!("unknown plane-wave parameter '{k}'"))),
        }
    }
    match m {
        Some(m) => PlaneWave::new(sigma, alpha, m),
        None => PlaneWave::default_mode(sigma, alpha),
    }
}

#[derive(Serialize)]
struct ConserveDoc {
    sigma: Num,
    alpha: Cx,
    m: i64,
    beta: Num,
    omega: Num,
    tol: Num,
    initial: [Cx; 3],
    drift: [Num; 3],
    passed: bool,
}

fn cmd_conserve(common: &Common, pw_args: &[String], xmax: f64, samples: usize, k: usize, perturb: f64) -> Result<i32> {
    let pw = parse_plane_wave(pw_args)?;
    let mut x0 = pw.at(0.0, k.max(pw.m.unsigned_abs() as usize))?;
    if perturb > 0.0 {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h =
            crate::hamiltonian::PhasePoint::random(&mut rng, x0.k(), x0.k(), perturb * x0.coefficient_norm(), false);
        x0 = x0.axpy(c(1.0, 0.0), &h);
    }
    let xs: Vec<f64> = (0..=samples.max(1)).map(|i| xmax * i as f64 / samples.max(1) as f64).collect();
    let tol = common.tol.max(1e-13);
    let tr = propagate_x(&x0, &xs, tol)?;
    let d = tr.drift();
    let limit = 100.0 * tol;
    let passed = d.drift.iter().zip(&d.initial).all(|(dr, h)| *dr <= limit * h.norm().max(1.0));
    let body = match common.format {
        Format::Csv => tr.to_csv(),
        _ => to_json(&ConserveDoc {
            sigma: Num(pw.sigma),
            alpha: Cx(pw.alpha),
            m: pw.m,
            beta: Num(pw.beta),
            omega: Num(pw.omega),
            tol: Num(tol),
            initial: d.initial.map(Cx),
            drift: d.drift.map(Num),
            passed,
        })?,
    };
    emit(common, &body)?;
    eprintln!(
        "drift H0t {:.3e}, H1t {:.3e}, H2t {:.3e} (limit {:.1e}): {}",
        d.drift[0],
        d.drift[1],
        d.drift[2],
        limit,
        if passed { "ok" } else { "FAILED" }
    );
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

fn configure_threads() {
    if let Some(n) = std::env::var("ZS_TSPEC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn run(cli: Cli) -> i32 {
    configure_threads();
    if !(cli.common.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return EXIT_IO;
    }
    let res = match &cli.command {
        Command::Spectrum => cmd_spectrum(&cli.common),
        Command::Zeroset { n } => cmd_zeroset(&cli.common, *n),
        Command::Validate { suite } => cmd_validate(&cli.common, suite),
        Command::Figure { id } => cmd_figure(&cli.common, id),
        Command::Conserve { plane_wave, xmax, samples, k, perturb } => {
            cmd_conserve(&cli.common, plane_wave, *xmax, *samples, *k, *perturb)
        }
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CountMismatch { .. } => EXIT_COUNT,
                Error::Io(_) | Error::Json(_) | Error::InvalidInput(_) => EXIT_IO,
                _ => EXIT_FAILED,
            }
        }
    }
}

pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_IO
            } else {
                EXIT_OK
            }
        }
    }
}
