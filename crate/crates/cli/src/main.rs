mod output;
mod problem_file;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;
use num_complex::Complex64;
use rayon::prelude::*;
use sturmian::oracle;
use sturmian::problem::parse_complex;
use sturmian::solution::SolverState;
use sturmian::spectrum::{self, compute_spectrum, Method, Spectrum};

use output::Table;
use problem_file::{ParseError, ProblemFile};

const CSV_HELP: &str = "\
Output files (written to --out, floats with 17 significant digits):
  spectrum.csv         index,re_lambda,im_lambda,re_omega,im_omega,residual,method
                       method is scan, newton or argument-principle
  spectrum_oracle.csv  same columns, method = oracle (--oracle)
  char.csv             omega,re_char,im_char on the real scan grid (--dump-char)
  coefficients.csv     n,re_a,im_a,re_b,im_b (--dump-coeffs)
  fit.csv              n_fit,eps1,eps2,rms1,rms2,condition,re_h,im_h,min_g_ratio (--dump-coeffs)
  powers.csv           y,re_phi0,im_phi0,re_psi0,im_psi0,... (--dump-powers)
  solution.csv         y, then re/im of V1, V1', V2, V2' and of their omega-derivatives,
                       where V1(y0) = 1, V1'(y0) = 0, V2(y0) = 0, V2'(y0) = 1 (--dump-solution)

Exit codes: 0 success, 1 invalid input, 2 numerical failure.";

#[derive(Parser)]
#[command(name = "sturmian", version, about = "Spectra of Sturm-Liouville problems", after_long_help = CSV_HELP)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the spectrum of the problem described in FILE.
    Solve(SolveArgs),
}

#[derive(clap::Args)]
struct SolveArgs {
    file: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Write the characteristic function sampled on the real scan grid.
    #[arg(long)]
    dump_char: bool,
    /// Write the kernel coefficients and fit diagnostics.
    #[arg(long)]
    dump_coeffs: bool,
    /// Write the formal powers on the grid.
    #[arg(long)]
    dump_powers: bool,
    /// Write the normalized solution pair at OMEGA (e.g. `3`, `2-0.5i`) over the grid.
    #[arg(long, value_name = "OMEGA", value_parser = parse_omega)]
    dump_solution: Option<Complex64>,
    /// Use the reference integrator instead and write spectrum_oracle.csv.
    #[arg(long)]
    oracle: bool,
}

fn parse_omega(text: &str) -> Result<Complex64, String> {
    parse_complex(text).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{stage} failed: {source}")]
    Numerical {
        stage: &'static str,
        source: sturmian::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse { .. } | Failure::Read { .. } => 1,
            Failure::Numerical { .. } | Failure::Write { .. } => 2,
        }
    }
}

fn stage<T>(stage: &'static str, r: sturmian::Result<T>) -> Result<T, Failure> {
    r.map_err(|source| Failure::Numerical { stage, source })
}

fn save(out: &Path, name: &str, table: &Table) -> Result<(), Failure> {
    let path = out.join(name);
    table.write(&path).map_err(|source| Failure::Write {
        path: path.clone(),
        source,
    })?;
    info!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let Command::Solve(args) = cli.command;
    match solve(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.file).map_err(|source| Failure::Read {
        path: args.file.clone(),
        source,
    })?;
    let file = ProblemFile::parse(&text).map_err(|source| Failure::Parse {
        path: args.file.clone(),
        source,
    })?;
    std::fs::create_dir_all(&args.out).map_err(|source| Failure::Write {
        path: args.out.clone(),
        source,
    })?;
    let mut search = file.search.clone();
    search.tau_max = match file.tau_max {
        Some(t) => t,
        None => stage("setup", spectrum::default_tau_max(&file.problem))?,
    };

    let needs_state =
        !args.oracle || args.dump_char || args.dump_coeffs || args.dump_powers || args.dump_solution.is_some();
    let state = if needs_state {
        let start = Instant::now();
        let state = stage("build", SolverState::build(&file.problem, file.solver.clone()))?;
        info!(
            "N_fit = {}, eps1 = {:.3e}, eps2 = {:.3e}, min|g|/max|g| = {:.3e}, h = {}",
            state.fit.n_fit, state.fit.eps1, state.fit.eps2, state.particular.min_ratio, state.h
        );
        info!("build: {:.3} s", start.elapsed().as_secs_f64());
        Some(state)
    } else {
        None
    };

    if args.oracle {
        let start = Instant::now();
        let spectrum = stage("oracle", oracle_spectrum(&file, &search))?;
        info!(
            "oracle: {} eigenvalues in {:.3} s",
            spectrum.len(),
            start.elapsed().as_secs_f64()
        );
        save(
            &args.out,
            "spectrum_oracle.csv",
            &output::spectrum(&spectrum, Some("oracle")),
        )?;
    }

    let Some(state) = state else { return Ok(()) };
    if !args.oracle {
        let start = Instant::now();
        let report = stage(
            "spectrum",
            compute_spectrum(&file.problem, &state, &file.boundary, &search),
        )?;
        for br in &report.failed_brackets {
            log::warn!("unrefined bracket [{}, {}]", br.lo, br.hi);
        }
        info!(
            "spectrum: {} eigenvalues in {:.3} s",
            report.spectrum.len(),
            start.elapsed().as_secs_f64()
        );
        save(&args.out, "spectrum.csv", &output::spectrum(&report.spectrum, None))?;
    }
    if args.dump_char {
        let lo = search.omega_min.max(search.omega_cut);
        let n = ((search.omega_max - lo) / search.scan_step).ceil().max(1.0) as usize;
        let samples = (0..=n)
            .into_par_iter()
            .map(|i| {
                let w = lo + (search.omega_max - lo) * i as f64 / n as f64;
                spectrum::characteristic_function(&state, &file.boundary, Complex64::new(w, 0.0)).map(|v| (w, v))
            })
            .collect::<sturmian::Result<Vec<_>>>();
        save(
            &args.out,
            "char.csv",
            &output::characteristic(&stage("characteristic", samples)?),
        )?;
    }
    if args.dump_coeffs {
        save(&args.out, "coefficients.csv", &output::coefficients(&state.fit))?;
        let summary = output::fit_summary(&state.fit, state.h, state.particular.min_ratio);
        save(&args.out, "fit.csv", &summary)?;
    }
    if args.dump_powers {
        let nodes: Vec<f64> = state.grid().nodes().collect();
        let phi: Vec<&[Complex64]> = state.formal_powers.phi.iter().map(|f| f.values()).collect();
        let psi: Vec<&[Complex64]> = state.formal_powers.psi.iter().map(|f| f.values()).collect();
        save(&args.out, "powers.csv", &output::formal_powers(&nodes, &phi, &psi))?;
    }
    if let Some(omega) = args.dump_solution {
        let rows = state
            .grid()
            .nodes()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|y| state.normalized_pair(omega, y).map(|s| (y, s)))
            .collect::<sturmian::Result<Vec<_>>>();
        save(&args.out, "solution.csv", &output::solution(&stage("solution", rows)?))?;
    }
    Ok(())
}

/// Reference spectrum over the same range as the transmutation search.
fn oracle_spectrum(file: &ProblemFile, search: &spectrum::SearchConfig) -> sturmian::Result<Spectrum> {
    let (problem, bc, config) = (&file.problem, &file.boundary, &search.oracle);
    let roots: Vec<(Complex64, f64)> = match search.rect {
        Some(rect) => oracle::eigenvalues_in_rect(problem, bc, rect, config)?,
        None => {
            let lo = search.omega_min.max(search.omega_cut);
            let found =
                oracle::eigenvalues_real(problem, bc, search.omega_max, search.tau_max, search.omega_cut, config)?;
            found
                .into_par_iter()
                .filter(|w| search.omega_min <= search.omega_cut || (w.im == 0.0 && w.re >= lo))
                .map(|w| Ok((w, oracle::char_omega(problem, bc, w, config)?.norm())))
                .collect::<sturmian::Result<Vec<_>>>()?
        }
    };
    let mut spectrum = Spectrum::from_roots(roots.into_iter().map(|(w, r)| (w, r, Method::Scan)));
    if let Some(n) = search.max_count {
        spectrum.truncate(n);
    }
    Ok(spectrum)
}
