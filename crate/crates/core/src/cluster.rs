//! Bilayer square-lattice cluster state over a finite window of time bins.
//!
//! Each time bin starts as two two-mode squeezed pairs (signal/idler in HG10
//! and in HG01). The two signal modes are mixed into HG45/HG135, the HG01 rails
//! are delayed by one bin (signal) and by `N` bins (idler), and finally the
//! HG10/HG01 modes that now share a bin are mixed on each beam.
//!
//! Nullifier forms are written with their printed integer/√2 weights. The
//! squeezing they certify is read from the *normalized* variance
//! `Var(N) / |N|²`, which is `e^{−2r}/2` on the ideal lattice.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::gaussian::{
    covariance_of, hgraph_state, AdjacencyGraph, Beam, GaussianState, ModeId, QuadratureForm, Rail,
};
use crate::squeezing::r_from_db;

/// Angle of the HG01/HG10 → HG45/HG135 signal coupler.
pub const DIAGONAL_COUPLER_ANGLE: f64 = -FRAC_PI_4;
/// Angle of the spatial beam splitters that join neighbouring bins.
pub const SPATIAL_COUPLER_ANGLE: f64 = -FRAC_PI_4;
/// Phase carried by the HG10 idler rail before the spatial coupler.
pub const IDLER_10_PHASE: f64 = PI;
/// Sufficient full-inseparability bound on each normalized nullifier variance.
pub const VLF_BOUND: f64 = 1.0 / (4.0 * SQRT_2);

pub const DEFAULT_DELAY_BINS: u32 = 10;
pub const DEFAULT_WINDOW: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub r: f64,
    /// Long delay `N` in bins; sets the circumference of the cylinder.
    pub delay_bins: u32,
    /// Number of time bins `K` simulated.
    pub window: usize,
    pub wrap: bool,
}

impl LatticeSpec {
    pub fn new(r: f64, delay_bins: u32, window: usize, wrap: bool) -> Result<Self> {
        let spec = LatticeSpec { r, delay_bins, window, wrap };
        spec.validate()?;
        Ok(spec)
    }

    /// `N = 10`, `K = 24`, open window.
    pub fn standard(r: f64) -> Result<Self> {
        Self::new(r, DEFAULT_DELAY_BINS, DEFAULT_WINDOW, false)
    }

    pub fn from_db(db: f64, delay_bins: u32, window: usize, wrap: bool) -> Result<Self> {
        Self::new(r_from_db(db), delay_bins, window, wrap)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidParameter(format!("squeezing parameter {} must be finite and >= 0", self.r)));
        }
        if self.delay_bins < 2 {
            return Err(Error::InvalidParameter(format!("delay N = {} must be at least 2", self.delay_bins)));
        }
        let min_window = 2 * self.delay_bins as usize + 4;
        if self.window < min_window {
            return Err(Error::InvalidParameter(format!(
                "window of {} bins is too small for N = {} (need at least {min_window})",
                self.window, self.delay_bins
            )));
        }
        Ok(())
    }

    fn n(&self) -> i64 {
        self.delay_bins as i64
    }

    fn k(&self) -> i64 {
        self.window as i64
    }

    fn fold(&self, bin: i64) -> i64 {
        if self.wrap {
            bin.rem_euclid(self.k())
        } else {
            bin
        }
    }

    /// Whether the signal coupler acted on bin `m`.
    fn signal_coupled(&self, m: i64) -> bool {
        self.wrap || (1..self.k()).contains(&m)
    }

    /// Whether the idler coupler acted on bin `m`.
    fn idler_coupled(&self, m: i64) -> bool {
        self.wrap || (self.n()..self.k()).contains(&m)
    }

    fn mode_complete(&self, m: ModeId) -> bool {
        match m.beam {
            Beam::Signal => self.signal_coupled(m.timebin),
            Beam::Idler => self.idler_coupled(m.timebin),
        }
    }

    /// Bins `k` whose four nullifiers involve only fully coupled modes.
    pub fn interior_bins(&self) -> Vec<i64> {
        if self.wrap {
            (0..self.k()).collect()
        } else {
            (self.n()..self.k() - self.n()).collect()
        }
    }

    fn at(&self, rail: Rail, bin: i64) -> ModeId {
        rail.at(self.fold(bin))
    }
}

/// Adjacency of one bin's pump process on `[s10, s01, i10, i01]`.
pub fn bin_graph() -> AdjacencyGraph {
    AdjacencyGraph::from_edges(4, &[(0, 2), (1, 3)]).expect("static graph is valid")
}

/// Builds the `4K`-mode cluster state described by `spec`.
pub fn build_lattice(spec: &LatticeSpec) -> Result<GaussianState> {
    spec.validate()?;
    let z = hgraph_state(&bin_graph(), spec.r)?;
    let mut state: Option<GaussianState> = None;
    for j in 0..spec.k() {
        let labels = vec![
            Rail::SIGNAL_10.at(j),
            Rail::SIGNAL_01.at(j),
            Rail::IDLER_10.at(j),
            Rail::IDLER_01.at(j),
        ];
        let mut unit = covariance_of(&z, labels)?;
        // Signal HG10/HG01 → HG45 (kept on the HG10 slot) and HG135 (on the HG01 slot),
        // which the dove prism maps back onto HG10/HG01.
        unit = unit.apply_beamsplitter(Rail::SIGNAL_10.at(j), Rail::SIGNAL_01.at(j), DIAGONAL_COUPLER_ANGLE)?;
        unit = unit.apply_rotation(Rail::IDLER_10.at(j), IDLER_10_PHASE)?;
        state = Some(match state {
            None => unit,
            Some(s) => s.direct_sum(&unit)?,
        });
    }
    let mut state = state.expect("window is nonempty");

    state = state.relabel_delay(Rail::SIGNAL_01, 1).relabel_delay(Rail::IDLER_01, spec.delay_bins);
    if spec.wrap {
        state = state.wrap_timebins(spec.k())?;
    }

    let last = if spec.wrap { spec.k() } else { spec.k() + spec.n() + 1 };
    for m in 0..last {
        for (hg10, hg01) in [(Rail::SIGNAL_10, Rail::SIGNAL_01), (Rail::IDLER_10, Rail::IDLER_01)] {
            let (a, b) = (hg10.at(m), hg01.at(m));
            if state.contains(a) && state.contains(b) {
                state = state.apply_beamsplitter(a, b, SPATIAL_COUPLER_ANGLE)?;
            }
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NullifierKind {
    X1,
    X2,
    P1,
    P2,
}

impl NullifierKind {
    pub const ALL: [NullifierKind; 4] = [Self::X1, Self::X2, Self::P1, Self::P2];

    pub fn label(self) -> &'static str {
        match self {
            Self::X1 => "Nx1",
            Self::X2 => "Nx2",
            Self::P1 => "Np1",
            Self::P2 => "Np2",
        }
    }
}

/// The six-mode nullifier of `kind` anchored at bin `k`.
pub fn nullifier_form(spec: &LatticeSpec, kind: NullifierKind, k: i64) -> Result<QuadratureForm> {
    let q = FRAC_1_SQRT_2;
    let s = |rail: Rail, d: i64| spec.at(rail, k + d);
    let n = spec.n();
    // (idler 10, idler 01, idler bin offset) and the signal weights at k+1 (10, 01) and k (10, 01)
    let (idler, idler_off, sig) = match kind {
        NullifierKind::X1 | NullifierKind::P1 => ((1.0, -1.0), 0, [1.0, 1.0, -1.0, 1.0]),
        NullifierKind::X2 | NullifierKind::P2 => ((1.0, 1.0), n, [1.0, 1.0, 1.0, -1.0]),
    };
    let sign = match kind {
        NullifierKind::X1 | NullifierKind::X2 => -1.0,
        NullifierKind::P1 | NullifierKind::P2 => 1.0,
    };
    let terms = [
        (s(Rail::IDLER_10, idler_off), idler.0),
        (s(Rail::IDLER_01, idler_off), idler.1),
        (s(Rail::SIGNAL_10, 1), sign * q * sig[0]),
        (s(Rail::SIGNAL_01, 1), sign * q * sig[1]),
        (s(Rail::SIGNAL_10, 0), sign * q * sig[2]),
        (s(Rail::SIGNAL_01, 0), sign * q * sig[3]),
    ];
    let form = match kind {
        NullifierKind::X1 | NullifierKind::X2 => QuadratureForm::x_only(terms)?,
        NullifierKind::P1 | NullifierKind::P2 => QuadratureForm::p_only(terms)?,
    };
    check_form(spec, &form, k)?;
    Ok(form)
}

fn check_form(spec: &LatticeSpec, form: &QuadratureForm, k: i64) -> Result<()> {
    if form.support().into_iter().all(|m| spec.mode_complete(m)) {
        Ok(())
    } else {
        Err(Error::OutsideWindow { bin: k, window: spec.window })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullifierSet {
    pub bin: i64,
    pub x1: QuadratureForm,
    pub x2: QuadratureForm,
    pub p1: QuadratureForm,
    pub p2: QuadratureForm,
}

impl NullifierSet {
    pub fn get(&self, kind: NullifierKind) -> &QuadratureForm {
        match kind {
            NullifierKind::X1 => &self.x1,
            NullifierKind::X2 => &self.x2,
            NullifierKind::P1 => &self.p1,
            NullifierKind::P2 => &self.p2,
        }
    }
}

pub fn nullifier_set(spec: &LatticeSpec, k: i64) -> Result<NullifierSet> {
    Ok(NullifierSet {
        bin: k,
        x1: nullifier_form(spec, NullifierKind::X1, k)?,
        x2: nullifier_form(spec, NullifierKind::X2, k)?,
        p1: nullifier_form(spec, NullifierKind::P1, k)?,
        p2: nullifier_form(spec, NullifierKind::P2, k)?,
    })
}

/// Half-sums pairing the idler modes that meet at bin `k + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedNullifiers {
    /// `(N^{x1}_{k+N} + N^{x2}_k) / 2`
    pub x_plus: QuadratureForm,
    /// `(−N^{x1}_{k+N} + N^{x2}_k) / 2`
    pub x_minus: QuadratureForm,
    /// `(N^{p1}_{k+N} + N^{p2}_k) / 2`
    pub p_plus: QuadratureForm,
    /// `(−N^{p1}_{k+N} + N^{p2}_k) / 2`
    pub p_minus: QuadratureForm,
}

pub fn combined_nullifiers(spec: &LatticeSpec, k: i64) -> Result<CombinedNullifiers> {
    let later = k + spec.n();
    let x1 = nullifier_form(spec, NullifierKind::X1, later)?;
    let x2 = nullifier_form(spec, NullifierKind::X2, k)?;
    let p1 = nullifier_form(spec, NullifierKind::P1, later)?;
    let p2 = nullifier_form(spec, NullifierKind::P2, k)?;
    Ok(CombinedNullifiers {
        x_plus: x1.combine(0.5, &x2, 0.5)?,
        x_minus: x1.combine(-0.5, &x2, 0.5)?,
        p_plus: p1.combine(0.5, &p2, 0.5)?,
        p_minus: p1.combine(-0.5, &p2, 0.5)?,
    })
}

/// `Var(N) / |N|²`: the variance per unit coefficient weight.
pub fn normalized_variance(state: &GaussianState, form: &QuadratureForm) -> Result<f64> {
    Ok(state.total_variance(form)? / form.norm_sq())
}

/// Modes of the minimal unit at bin `k`: `[i10@k, i01@k, s10@k, s01@k, s10@k+1, s01@k+1]`.
pub fn unit_modes(spec: &LatticeSpec, k: i64) -> [ModeId; 6] {
    [
        spec.at(Rail::IDLER_10, k),
        spec.at(Rail::IDLER_01, k),
        spec.at(Rail::SIGNAL_10, k),
        spec.at(Rail::SIGNAL_01, k),
        spec.at(Rail::SIGNAL_10, k + 1),
        spec.at(Rail::SIGNAL_01, k + 1),
    ]
}

/// Split of the six-mode unit; entries index into [`unit_modes`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
}

/// All 31 unordered bipartitions of six modes. Mode 5 is always on the `s2` side.
pub fn enumerate_bipartitions() -> Vec<Bipartition> {
    (1u32..32)
        .map(|mask| {
            let (s1, s2) = (0..6).partition(|&i| i < 5 && mask & (1 << i) != 0);
            Bipartition { s1, s2 }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartitionMargin {
    pub partition: Bipartition,
    pub u: &'static str,
    pub v: &'static str,
    /// `Var(û) + Var(v̂)`
    pub lhs: f64,
    /// `|Σ_{s1} h g| + |Σ_{s2} h g|`
    pub rhs: f64,
}

impl BipartitionMargin {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn inseparable(&self) -> bool {
        self.lhs < self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VlfReport {
    pub bin: i64,
    pub var_x: f64,
    pub var_p: f64,
    pub bound: f64,
    pub pass: bool,
    /// Best (largest-margin) pair for each of the 31 bipartitions.
    pub margins: Vec<BipartitionMargin>,
}

/// Normalized variances of `N^{x1}_k` and `N^{p1}_k`.
pub fn nullifier_variances(state: &GaussianState, spec: &LatticeSpec, k: i64) -> Result<(f64, f64)> {
    let x1 = nullifier_form(spec, NullifierKind::X1, k)?;
    let p1 = nullifier_form(spec, NullifierKind::P1, k)?;
    Ok((normalized_variance(state, &x1)?, normalized_variance(state, &p1)?))
}

pub fn vlf_check(state: &GaussianState, spec: &LatticeSpec, k: i64) -> Result<VlfReport> {
    let set = nullifier_set(spec, k)?;
    let (var_x, var_p) = nullifier_variances(state, spec, k)?;

    let x_candidates = [
        ("Nx1", set.x1.clone()),
        ("Nx2", set.x2.clone()),
        ("(Nx1+Nx2)/2", set.x1.combine(0.5, &set.x2, 0.5)?),
        ("(Nx2-Nx1)/2", set.x1.combine(-0.5, &set.x2, 0.5)?),
    ];
    let p_candidates = [
        ("Np1", set.p1.clone()),
        ("Np2", set.p2.clone()),
        ("(Np1+Np2)/2", set.p1.combine(0.5, &set.p2, 0.5)?),
        ("(Np2-Np1)/2", set.p1.combine(-0.5, &set.p2, 0.5)?),
    ];
    let x_var: Vec<f64> = x_candidates
        .iter()
        .map(|(_, f)| state.variance_of(f).map(|v| v.0))
        .collect::<Result<_>>()?;
    let p_var: Vec<f64> = p_candidates
        .iter()
        .map(|(_, f)| state.variance_of(f).map(|v| v.1))
        .collect::<Result<_>>()?;

    let unit = unit_modes(spec, k);
    // (u, v, lhs, per-unit-mode h_j g_j), keeping only pairs whose h·g product
    // lives on the unit.
    let mut pairs = Vec::new();
    for (xi, (xl, u)) in x_candidates.iter().enumerate() {
        for (pi, (pl, v)) in p_candidates.iter().enumerate() {
            let outside = u
                .h()
                .iter()
                .any(|(m, h)| !unit.contains(m) && h * v.g_coeff(*m) != 0.0);
            if outside {
                continue;
            }
            let hg: Vec<f64> = unit.iter().map(|&m| u.h_coeff(m) * v.g_coeff(m)).collect();
            pairs.push((*xl, *pl, x_var[xi] + p_var[pi], hg));
        }
    }

    let margins = enumerate_bipartitions()
        .into_iter()
        .map(|partition| {
            pairs
                .iter()
                .map(|(u, v, lhs, hg)| {
                    let side = |s: &[usize]| s.iter().map(|&i| hg[i]).sum::<f64>().abs();
                    BipartitionMargin {
                        partition: partition.clone(),
                        u,
                        v,
                        lhs: *lhs,
                        rhs: side(&partition.s1) + side(&partition.s2),
                    }
                })
                .max_by(|a, b| a.margin().total_cmp(&b.margin()))
                .expect("at least one candidate pair lives on the unit")
        })
        .collect();

    Ok(VlfReport {
        bin: k,
        var_x,
        var_p,
        bound: VLF_BOUND,
        pass: var_x < VLF_BOUND && var_p < VLF_BOUND,
        margins,
    })
}

fn passes_at_db(db: f64) -> Result<bool> {
    let spec = LatticeSpec::from_db(db, 2, 8, false)?;
    let state = build_lattice(&spec)?;
    let k = spec.interior_bins()[0];
    let (vx, vp) = nullifier_variances(&state, &spec, k)?;
    Ok(vx < VLF_BOUND && vp < VLF_BOUND)
}

/// Smallest resource squeezing (dB) at which the lattice passes the
/// full-inseparability test, found by bisection on the built state.
pub fn min_inseparability_squeezing() -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 20.0);
    if passes_at_db(lo)? || !passes_at_db(hi)? {
        return Err(Error::NoCrossing { lo, hi });
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if passes_at_db(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
