//! `cvft` command-line driver: figure CSVs, threshold search, lattice
//! inseparability checks and Monte Carlo validation.

pub mod args;
pub mod config;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::Path;

use cvft_core::cluster::{build_lattice, unit_modes, vlf_check, LatticeSpec};
use cvft_core::figures::{figure, sweep, AspectChoice, Cell, DbGrid, Figure, SweepParams, Table};
use cvft_core::ft::{optimize_aspect, threshold_db, OptimizerNote, RepetitionSpec, N_GRID};
use cvft_core::gkp::{noise_variances, Convention, NoiseKind, NoiseModel};
use cvft_core::mc::{estimate_pe, SamplingMode, TrialConfig};
use cvft_core::squeezing::r_from_db;

use args::{Cli, Command, ConventionArg, ModeArg, ModelArg};
use clap::{FromArgMatches, ValueEnum};
use config::{ConfigFile, Resolver};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<cvft_core::Error> for CliError {
    fn from(e: cvft_core::Error) -> Self {
        use cvft_core::Error::*;
        match e {
            NoCrossing { .. } | Unphysical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Diagnostics go to `stderr`, CSV to `stdout` unless `--output` is given.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::command().try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "cvft: {e}");
            e.exit_code()
        }
    }
}

fn enum_value<E: ValueEnum>(s: &str) -> Result<E, String> {
    E::from_str(s, false)
}

fn enum_name<E: ValueEnum>(e: E) -> String {
    e.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn parse_aspect(s: &str) -> Result<AspectChoice, String> {
    if s == "auto" {
        return Ok(AspectChoice::Auto);
    }
    match s.parse::<f64>() {
        Ok(r) if r > 0.0 && r.is_finite() => Ok(AspectChoice::Fixed(r)),
        _ => Err("expected a positive number or `auto`".into()),
    }
}

fn parse_n_list(s: &str) -> Result<Vec<u32>, String> {
    s.split(',').map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

fn parse_grid(s: &str) -> Result<DbGrid, String> {
    s.parse::<DbGrid>().map_err(|e| e.to_string())
}

fn parse_db(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("squeezing must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

const DEFAULT_GRID: &str = "2:20:0.1";

struct Output {
    table: Table,
    notes: Vec<String>,
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut res = Resolver::new(file);
    let format = res.raw("format", None, "csv");
    if format != "csv" {
        return Err(CliError::Usage(format!("unsupported format {format:?}; only csv is written")));
    }
    let output = res.raw("output", cli.output.as_ref().map(|p| p.display().to_string()), "-");
    let convention: Convention = res
        .get("convention", cli.convention.map(enum_name), "half-vacuum", enum_value::<ConventionArg>)?
        .into();
    let name = cli.command.name();

    let out = match cli.command {
        Command::Fig3(g) => fig(Figure::Fig3, g.squeezing_db, convention, &mut res)?,
        Command::Fig5c(g) => fig(Figure::Fig5c, g.squeezing_db, convention, &mut res)?,
        Command::Fig6c(g) => fig(Figure::Fig6c, g.squeezing_db, convention, &mut res)?,
        Command::Fig7a(g) => fig(Figure::Fig7a, g.squeezing_db, convention, &mut res)?,
        Command::Fig7b(g) => fig(Figure::Fig7b, g.squeezing_db, convention, &mut res)?,
        Command::Fig7c(g) => fig(Figure::Fig7c, g.squeezing_db, convention, &mut res)?,
        Command::Threshold(a) => {
            let kind: NoiseKind = res.get("model", a.model.map(enum_name), "gate-noise", enum_value::<ModelArg>)?.into();
            let t = threshold_db(kind, convention)?;
            let table = Table {
                columns: vec!["model", "convention", "threshold_db", "crossings"],
                rows: vec![vec![
                    Cell::Text(kind.name().into()),
                    Cell::Text(convention.name().into()),
                    Cell::Text(format!("{:.2}", t.db)),
                    Cell::Int(t.crossings as i64),
                ]],
            };
            Output { table, notes: Vec::new() }
        }
        Command::Vlf(a) => {
            let db = res.get("squeezing_db", a.squeezing_db, "10", parse_db)?;
            let flag = a.bipartitions.then(|| "true".to_string());
            let bipartitions = res.get("bipartitions", flag, "false", parse_num::<bool>)?;
            vlf(db, bipartitions)?
        }
        Command::Mc(a) => {
            let n = res.get("n", a.n, "1", parse_num::<u32>)?;
            let aspect = res.get("aspect_ratio", a.aspect_ratio, "auto", parse_aspect)?;
            let db = res.get("squeezing_db", a.squeezing_db, "15", parse_db)?;
            let trials = res.get("trials", a.trials, "1000000", parse_num::<u64>)?;
            let seed = res.get("seed", a.seed, "1", parse_num::<u64>)?;
            let mode: SamplingMode = res.get("mode", a.mode.map(enum_name), "independent", enum_value::<ModeArg>)?.into();
            let kind: NoiseKind = res.get("model", a.model.map(enum_name), "gate-noise", enum_value::<ModelArg>)?.into();
            monte_carlo(n, aspect, db, trials, seed, mode, kind, convention)?
        }
        Command::Sweep(a) => {
            let grid = res.get("squeezing_db", a.squeezing_db, DEFAULT_GRID, parse_grid)?;
            let kind: NoiseKind = res.get("model", a.model.map(enum_name), "gate-noise", enum_value::<ModelArg>)?.into();
            let default_n = N_GRID.map(|n| n.to_string()).join(",");
            let n_list = res.get("n", a.n, &default_n, parse_n_list)?;
            let aspect = res.get("aspect_ratio", a.aspect_ratio, "auto", parse_aspect)?;
            let table = sweep(&SweepParams { grid, kind, convention, n_list, aspect })?;
            Output { table, notes: Vec::new() }
        }
    };

    let mut comments = vec![format!(
        "cvft {}; vacuum variance 1/2; convention={}; command={name}; {}",
        env!("CARGO_PKG_VERSION"),
        convention.name(),
        res.provenance()
    )];
    comments.extend(out.notes);
    let mut buf = Vec::new();
    out.table.write_csv(&mut buf, &comments).map_err(|e| CliError::Usage(e.to_string()))?;
    if output == "-" {
        stdout.write_all(&buf).map_err(|e| CliError::Usage(e.to_string()))
    } else {
        write_atomic(Path::new(&output), &buf)
    }
}

fn fig(f: Figure, flag: Option<String>, convention: Convention, res: &mut Resolver) -> Result<Output, CliError> {
    let grid = res.get("squeezing_db", flag, DEFAULT_GRID, parse_grid)?;
    Ok(Output { table: figure(f, grid, convention)?, notes: Vec::new() })
}

fn vlf(db: f64, bipartitions: bool) -> Result<Output, CliError> {
    let spec = LatticeSpec::standard(r_from_db(db))?;
    let state = build_lattice(&spec)?;
    let reports = spec.interior_bins().into_iter().map(|k| vlf_check(&state, &spec, k)).collect::<Result<Vec<_>, _>>()?;
    let all_pass = reports.iter().all(|r| r.pass);
    if !bipartitions {
        let rows = reports
            .iter()
            .map(|r| {
                vec![
                    Cell::Grid(db),
                    Cell::Int(r.bin),
                    Cell::Num(r.var_x),
                    Cell::Num(r.var_p),
                    Cell::Num(r.bound),
                    Cell::Num(r.bound - r.var_x.max(r.var_p)),
                    Cell::Int(r.pass as i64),
                ]
            })
            .collect();
        let columns = vec!["squeezing_db", "bin", "var_x", "var_p", "bound", "margin", "pass"];
        return Ok(Output { table: Table { columns, rows }, notes: vec![format!("vlf: pass={all_pass}")] });
    }
    let r = &reports[0];
    let modes = unit_modes(&spec, r.bin);
    let side = |s: &[usize]| s.iter().map(|&i| modes[i].to_string()).collect::<Vec<_>>().join(" ");
    let rows = r
        .margins
        .iter()
        .map(|m| {
            vec![
                Cell::Text(side(&m.partition.s1)),
                Cell::Text(side(&m.partition.s2)),
                Cell::Text(m.u.to_string()),
                Cell::Text(m.v.to_string()),
                Cell::Num(m.lhs),
                Cell::Num(m.rhs),
                Cell::Num(m.margin()),
                Cell::Int(m.inseparable() as i64),
            ]
        })
        .collect();
    let witnessed = r.margins.iter().filter(|m| m.inseparable()).count();
    let note = format!(
        "vlf: bin={} var_x={:.6e} var_p={:.6e} bound={:.6e} pass={} witnessed_bipartitions={}/{}",
        r.bin,
        r.var_x,
        r.var_p,
        r.bound,
        all_pass,
        witnessed,
        r.margins.len()
    );
    let columns = vec!["s1", "s2", "u", "v", "lhs", "rhs", "margin", "inseparable"];
    Ok(Output { table: Table { columns, rows }, notes: vec![note] })
}

#[allow(clippy::too_many_arguments)]
fn monte_carlo(
    n: u32,
    aspect: AspectChoice,
    db: f64,
    trials: u64,
    seed: u64,
    mode: SamplingMode,
    kind: NoiseKind,
    convention: Convention,
) -> Result<Output, CliError> {
    let spec = RepetitionSpec::new(n)?;
    let model = NoiseModel::with_convention(kind, r_from_db(db), convention)?;
    let aspect = match aspect {
        AspectChoice::Fixed(r) => r,
        AspectChoice::Auto if n == 1 => 1.0,
        AspectChoice::Auto => {
            let o = optimize_aspect(spec, &model)?;
            if o.note == Some(OptimizerNote::Saturated) {
                return Err(CliError::Numerical(format!(
                    "aspect-ratio optimum saturates at R = {} for n = {n} at {db} dB; pass --aspect-ratio",
                    o.point.aspect
                )));
            }
            o.point.aspect
        }
    };
    let noise = noise_variances(&model)?;
    let cfg = TrialConfig { n, aspect, sigma_x: noise.sigma_x, sigma_p: noise.sigma_p, trials, seed, mode };
    let est = estimate_pe(&cfg)?;
    let analytic = cfg.analytic_pe()?;
    let columns = vec![
        "n",
        "aspect_ratio",
        "squeezing_db",
        "model",
        "mode",
        "trials",
        "seed",
        "failures",
        "pe",
        "std_error",
        "analytic_pe",
        "deviation_se",
    ];
    let row = vec![
        Cell::Int(n as i64),
        Cell::Num(aspect),
        Cell::Grid(db),
        Cell::Text(kind.name().into()),
        Cell::Text(mode.name().into()),
        Cell::Int(trials as i64),
        Cell::Text(seed.to_string()),
        Cell::Int(est.failures as i64),
        Cell::Num(est.pe),
        Cell::Num(est.std_error),
        Cell::Num(analytic),
        Cell::Num(est.deviation(analytic)),
    ];
    Ok(Output { table: Table { columns, rows: vec![row] }, notes: Vec::new() })
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
