//! Figure-data sweeps: each figure is a pure function of its grid, evaluated
//! in parallel and returned in grid order.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::cluster::{build_lattice, nullifier_variances, LatticeSpec, VLF_BOUND};
use crate::error::{invalid, Error, Result};
use crate::ft::{baseline, optimize_aspect, overall_error, CodePoint, OptimizerNote, RepetitionSpec, N_GRID};
use crate::gates::squeezing_budget;
use crate::gkp::{noise_variances, pauli_probs, Convention, GkpLattice, NoiseKind, NoiseModel};
use crate::squeezing::r_from_db;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Grid coordinate, printed in shortest form.
    Grid(f64),
    Num(f64),
    Int(i64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Grid(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v:.10e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric values of one column; text cells are skipped.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Cell::Grid(v) | Cell::Num(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    /// `#`-prefixed comment lines, a header row, then the data.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::to_string))?;
        }
        out.flush()
    }
}

/// Inclusive squeezing grid in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for DbGrid {
    fn default() -> Self {
        Self { start: 2.0, stop: 20.0, step: 0.1 }
    }
}

impl DbGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(invalid(format!("invalid grid {start}:{stop}:{step}")));
        }
        if start <= 0.0 {
            return Err(invalid(format!("squeezing grid must start above 0 dB, got {start}")));
        }
        Ok(Self { start, stop, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9).collect()
    }
}

impl FromStr for DbGrid {
    type Err = Error;

    /// `start:stop:step`, or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| invalid(format!("bad number {p:?} in grid {s:?}"))))
            .collect::<Result<_>>()?;
        match parts[..] {
            [v] => Self::new(v, v, 1.0),
            [a, b, c] => Self::new(a, b, c),
            _ => Err(invalid(format!("grid must be start:stop:step, got {s:?}"))),
        }
    }
}

impl fmt::Display for DbGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig3,
    Fig5c,
    Fig6c,
    Fig7a,
    Fig7b,
    Fig7c,
}

impl Figure {
    pub const ALL: [Figure; 6] = [Figure::Fig3, Figure::Fig5c, Figure::Fig6c, Figure::Fig7a, Figure::Fig7b, Figure::Fig7c];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig5c => "fig5c",
            Figure::Fig6c => "fig6c",
            Figure::Fig7a => "fig7a",
            Figure::Fig7b => "fig7b",
            Figure::Fig7c => "fig7c",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Figure::Fig3 => &["squeezing_db", "var_x", "var_p", "closed_form", "bound", "inseparable"],
            Figure::Fig5c => &["squeezing_db", "cluster_db", "residual_x_db", "residual_p_db"],
            Figure::Fig6c => &["squeezing_db", "sigma_x_sq", "sigma_p_sq", "p_success", "p_err", "px", "pz", "py"],
            Figure::Fig7a | Figure::Fig7b => SWEEP_COLUMNS,
            Figure::Fig7c => &[
                "squeezing_db",
                "pe_gate_noise",
                "aspect_gate_noise",
                "pe_resource_only",
                "aspect_resource_only",
                "p_err_single",
            ],
        }
    }

    /// One line per column, for help text.
    pub fn column_docs(self) -> &'static str {
        match self {
            Figure::Fig3 => {
                "squeezing_db   resource squeezing (dB)\n\
                 var_x, var_p   normalized x1/p1 nullifier variances of the built lattice\n\
                 closed_form    e^{-2r}/2\n\
                 bound          full-inseparability bound 1/(4*sqrt 2)\n\
                 inseparable    1 if both variances are below the bound"
            }
            Figure::Fig5c => {
                "squeezing_db   resource squeezing (dB)\n\
                 cluster_db     squeezing left in cluster modes, -10 log10 sech(2r)\n\
                 residual_x_db  squeezing left after one two-mode gate, x quadrature\n\
                 residual_p_db  same, p quadrature"
            }
            Figure::Fig6c => {
                "squeezing_db   resource squeezing (dB)\n\
                 sigma_x_sq     x shift variance (gate-noise model)\n\
                 sigma_p_sq     p shift variance\n\
                 p_success      square-lattice GKP success probability\n\
                 p_err          1 - p_success\n\
                 px, pz, py     Pauli X, Z and Y probabilities"
            }
            Figure::Fig7a | Figure::Fig7b => SWEEP_DOCS,
            Figure::Fig7c => {
                "squeezing_db          resource squeezing (dB)\n\
                 pe_gate_noise         Pe at n = 101, optimized R, gate-noise model\n\
                 aspect_gate_noise     the optimized R\n\
                 pe_resource_only      Pe at n = 101, optimized R, resource-only model\n\
                 aspect_resource_only  the optimized R\n\
                 p_err_single          1 - p_success of one square-lattice GKP qubit (gate noise)"
            }
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL.into_iter().find(|f| f.id() == s).ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

pub const SWEEP_COLUMNS: &[&str] = &["squeezing_db", "n", "aspect_ratio", "px", "pz", "py", "pe", "optimizer_note"];

pub const SWEEP_DOCS: &str = "squeezing_db    resource squeezing (dB)\n\
     n               repetition number\n\
     aspect_ratio    GKP aspect ratio R (1 for n = 1, optimized otherwise unless fixed)\n\
     px, pz, py      per-qubit Pauli probabilities at that R\n\
     pe              logical error probability 1 - S_x S_z\n\
     optimizer_note  empty, `flat` or `saturated`";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AspectChoice {
    /// `R = 1` for `n = 1`, optimized otherwise.
    Auto,
    Fixed(f64),
}

impl fmt::Display for AspectChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AspectChoice::Auto => f.write_str("auto"),
            AspectChoice::Fixed(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    pub grid: DbGrid,
    pub kind: NoiseKind,
    pub convention: Convention,
    pub n_list: Vec<u32>,
    pub aspect: AspectChoice,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            grid: DbGrid::default(),
            kind: NoiseKind::GateNoise,
            convention: Convention::HalfVacuum,
            n_list: N_GRID.to_vec(),
            aspect: AspectChoice::Auto,
        }
    }
}

fn note_cell(note: Option<OptimizerNote>) -> Cell {
    Cell::Text(
        match note {
            None => "",
            Some(OptimizerNote::Flat) => "flat",
            Some(OptimizerNote::Saturated) => "saturated",
        }
        .to_string(),
    )
}

fn model_at(kind: NoiseKind, convention: Convention, db: f64) -> Result<NoiseModel> {
    NoiseModel::with_convention(kind, r_from_db(db), convention)
}

/// Best code point for repetition number `n` under an aspect-ratio choice.
pub fn code_point_for(n: u32, aspect: AspectChoice, model: &NoiseModel) -> Result<(CodePoint, Option<OptimizerNote>)> {
    let spec = RepetitionSpec::new(n)?;
    match aspect {
        AspectChoice::Fixed(r) => Ok((overall_error(spec, GkpLattice::new(r)?, model)?, None)),
        AspectChoice::Auto if n == 1 => Ok((baseline(model)?, None)),
        AspectChoice::Auto => optimize_aspect(spec, model).map(|o| (o.point, o.note)),
    }
}

fn par_rows<F>(points: &[f64], row: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(f64) -> Result<Vec<Vec<Cell>>> + Sync,
{
    let chunks: Vec<Vec<Vec<Cell>>> = points.par_iter().map(|&db| row(db)).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

pub fn sweep(params: &SweepParams) -> Result<Table> {
    if params.n_list.is_empty() {
        return Err(invalid("sweep needs at least one repetition number"));
    }
    for &n in &params.n_list {
        RepetitionSpec::new(n)?;
    }
    let rows = par_rows(&params.grid.points(), |db| {
        let model = model_at(params.kind, params.convention, db)?;
        params
            .n_list
            .iter()
            .map(|&n| {
                let (p, note) = code_point_for(n, params.aspect, &model)?;
                Ok(vec![
                    Cell::Grid(db),
                    Cell::Int(n as i64),
                    Cell::Num(p.aspect),
                    Cell::Num(p.px),
                    Cell::Num(p.pz),
                    Cell::Num(p.py),
                    Cell::Num(p.pe),
                    note_cell(note),
                ])
            })
            .collect()
    })?;
    Ok(Table { columns: SWEEP_COLUMNS.to_vec(), rows })
}

/// Data for one figure. `grid` defaults to [`DbGrid::default`]; `convention`
/// applies to the GKP figures.
pub fn figure(fig: Figure, grid: DbGrid, convention: Convention) -> Result<Table> {
    let points = grid.points();
    let columns = fig.columns().to_vec();
    let rows = match fig {
        Figure::Fig3 => par_rows(&points, |db| {
            let spec = LatticeSpec::from_db(db, 10, 24, false)?;
            let state = build_lattice(&spec)?;
            let (vx, vp) = nullifier_variances(&state, &spec, spec.interior_bins()[0])?;
            let closed = 0.5 * (-2.0 * spec.r).exp();
            Ok(vec![vec![
                Cell::Grid(db),
                Cell::Num(vx),
                Cell::Num(vp),
                Cell::Num(closed),
                Cell::Num(VLF_BOUND),
                Cell::Int((vx < VLF_BOUND && vp < VLF_BOUND) as i64),
            ]])
        })?,
        Figure::Fig5c => par_rows(&points, |db| {
            let b = squeezing_budget(r_from_db(db))?;
            Ok(vec![vec![Cell::Grid(db), Cell::Num(b.cluster_db), Cell::Num(b.residual_x_db), Cell::Num(b.residual_p_db)]])
        })?,
        Figure::Fig6c => par_rows(&points, |db| {
            let model = model_at(NoiseKind::GateNoise, convention, db)?;
            let (vx, vp) = model.variances()?;
            let p = pauli_probs(GkpLattice::square(), noise_variances(&model)?);
            Ok(vec![vec![
                Cell::Grid(db),
                Cell::Num(vx),
                Cell::Num(vp),
                Cell::Num(p.success),
                Cell::Num(p.failure()),
                Cell::Num(p.px),
                Cell::Num(p.pz),
                Cell::Num(p.py),
            ]])
        })?,
        Figure::Fig7a | Figure::Fig7b => {
            let kind = if fig == Figure::Fig7a { NoiseKind::GateNoise } else { NoiseKind::ResourceOnly };
            return sweep(&SweepParams { grid, kind, convention, ..SweepParams::default() });
        }
        Figure::Fig7c => par_rows(&points, |db| {
            let mut row = vec![Cell::Grid(db)];
            for kind in [NoiseKind::GateNoise, NoiseKind::ResourceOnly] {
                let (p, _) = code_point_for(101, AspectChoice::Auto, &model_at(kind, convention, db)?)?;
                row.extend([Cell::Num(p.pe), Cell::Num(p.aspect)]);
            }
            let single = model_at(NoiseKind::GateNoise, convention, db)?;
            row.push(Cell::Num(pauli_probs(GkpLattice::square(), noise_variances(&single)?).failure()));
            Ok(vec![row])
        })?,
    };
    Ok(Table { columns, rows })
}
