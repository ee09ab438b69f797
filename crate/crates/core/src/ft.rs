//! Biased GKP qubits concatenated with an n-qubit bit-flip repetition code:
//! logical error rates, per-n aspect-ratio optimisation and the squeezing
//! threshold where repetition starts to pay off.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::gkp::{noise_variances, pauli_probs, Convention, GkpLattice, NoiseKind, NoiseModel, QuadratureNoise};
use crate::squeezing::{db_from_r, r_from_db};

/// Repetition numbers used for figure sweeps.
pub const N_GRID: [u32; 7] = [1, 3, 5, 11, 25, 51, 101];
/// Repetition number compared against the bare qubit for the threshold.
pub const THRESHOLD_N: u32 = 101;
/// Upper end of the aspect-ratio search.
pub const R_MAX: f64 = 50.0;
/// Points in the coarse log-spaced aspect-ratio scan.
const SCAN_POINTS: usize = 64;
const GOLDEN_TOL: f64 = 1e-4;
/// Threshold search window, scan step and bisection tolerance (dB).
pub const THRESHOLD_WINDOW: (f64, f64) = (2.0, 25.0);
pub const THRESHOLD_SCAN_STEP: f64 = 0.1;
pub const THRESHOLD_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RepetitionSpec {
    n: u32,
}

impl RepetitionSpec {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n.is_multiple_of(2) {
            return Err(invalid(format!("repetition number must be odd and positive, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Correctable bit flips, `⌊(n−1)/2⌋`.
    pub fn k(&self) -> u32 {
        (self.n - 1) / 2
    }
}

fn check_prob(p: f64) {
    debug_assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
}

fn ln_binomial(n: u32, j: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(j as f64 + 1.0) - libm::lgamma((n - j) as f64 + 1.0)
}

/// `Σ_{j∈js} C(n,j) p^j (1−p)^{n−j}`, term by term in log space.
fn binomial_sum(n: u32, p: f64, js: impl Iterator<Item = u32>) -> f64 {
    check_prob(p);
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    js.map(|j| {
        let a = if j == 0 { 0.0 } else { j as f64 * lp };
        let b = if j == n { 0.0 } else { (n - j) as f64 * lq };
        (ln_binomial(n, j) + a + b).exp()
    })
    .sum()
}

/// Probability that majority voting recovers the logical state: at most `k`
/// of the `n` qubits flipped.
pub fn rep_success_x(spec: RepetitionSpec, px: f64) -> f64 {
    binomial_sum(spec.n, px, 0..=spec.k())
}

/// Complement of [`rep_success_x`], summed directly over the upper tail.
pub fn rep_failure_x(spec: RepetitionSpec, px: f64) -> f64 {
    binomial_sum(spec.n, px, spec.k() + 1..=spec.n)
}

/// Probability of an even number of phase flips (zero included),
/// `(1 + (1−2pZ)^n)/2`.
pub fn rep_success_z(spec: RepetitionSpec, pz: f64) -> f64 {
    1.0 - rep_failure_z(spec, pz)
}

pub fn rep_failure_z(spec: RepetitionSpec, pz: f64) -> f64 {
    check_prob(pz);
    if pz <= 0.5 {
        -(spec.n as f64 * (-2.0 * pz).ln_1p()).exp_m1() / 2.0
    } else {
        (1.0 - (1.0 - 2.0 * pz).powi(spec.n as i32)) / 2.0
    }
}

/// `1 − S_x·S_z`, assembled from the two failure tails.
pub fn logical_error(spec: RepetitionSpec, px: f64, pz: f64) -> f64 {
    let fx = rep_failure_x(spec, px);
    let fz = rep_failure_z(spec, pz);
    fx + fz - fx * fz
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodePoint {
    pub n: u32,
    pub aspect: f64,
    pub db: f64,
    pub kind: NoiseKind,
    pub convention: Convention,
    pub px: f64,
    pub pz: f64,
    pub py: f64,
    pub pe: f64,
}

fn code_point(spec: RepetitionSpec, lattice: GkpLattice, model: &NoiseModel, noise: QuadratureNoise) -> CodePoint {
    let probs = pauli_probs(lattice, noise);
    CodePoint {
        n: spec.n,
        aspect: lattice.aspect(),
        db: db_from_r(model.r),
        kind: model.kind,
        convention: model.convention,
        px: probs.px,
        pz: probs.pz,
        py: probs.py,
        pe: logical_error(spec, probs.px, probs.pz),
    }
}

pub fn overall_error(spec: RepetitionSpec, lattice: GkpLattice, model: &NoiseModel) -> Result<CodePoint> {
    Ok(code_point(spec, lattice, model, noise_variances(model)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerNote {
    /// Pe does not depend on R within rounding; R = 1 returned.
    Flat,
    /// The best R sits at the search ceiling.
    Saturated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub point: CodePoint,
    pub note: Option<OptimizerNote>,
}

/// Minimises Pe over `R ∈ [1, R_MAX]`: a log-spaced scan picks the best
/// bracket, golden-section search refines it.
pub fn optimize_aspect(spec: RepetitionSpec, model: &NoiseModel) -> Result<Optimum> {
    let noise = noise_variances(model)?;
    let eval = |r: f64| code_point(spec, GkpLattice::new(r).expect("aspect in range"), model, noise);

    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| R_MAX.powf(i as f64 / (SCAN_POINTS - 1) as f64))
        .collect();
    let scan: Vec<CodePoint> = grid.iter().map(|&r| eval(r)).collect();
    let (best, lo_pe, hi_pe) = scan.iter().enumerate().fold((0, f64::INFINITY, 0.0f64), |(b, lo, hi), (i, p)| {
        (if p.pe < scan[b].pe { i } else { b }, lo.min(p.pe), hi.max(p.pe))
    });
    if hi_pe - lo_pe <= 1e-12 * hi_pe || hi_pe == 0.0 {
        return Ok(Optimum { point: scan[0], note: Some(OptimizerNote::Flat) });
    }

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(SCAN_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    while b - a > GOLDEN_TOL {
        if fc.pe <= fd.pe {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    let mut point = if fc.pe <= fd.pe { fc } else { fd };
    // Boundary optima: golden search only approaches an endpoint.
    for edge in [scan[0], scan[SCAN_POINTS - 1]] {
        if edge.pe <= point.pe && (edge.aspect - point.aspect).abs() < 2.0 * (grid[1] - grid[0]).max(GOLDEN_TOL) * edge.aspect {
            point = edge;
        }
    }
    let note = (R_MAX - point.aspect < 1e-3 * R_MAX).then_some(OptimizerNote::Saturated);
    Ok(Optimum { point, note })
}

/// The bare qubit: `n = 1` on the square lattice.
pub fn baseline(model: &NoiseModel) -> Result<CodePoint> {
    overall_error(RepetitionSpec::new(1)?, GkpLattice::square(), model)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub db: f64,
    pub kind: NoiseKind,
    pub convention: Convention,
    /// Sign changes seen on the coarse scan; 1 for a clean crossing.
    pub crossings: usize,
}

/// `Pe(1, R=1) − Pe(n, R*)`; positive once repetition helps.
pub fn repetition_gain(kind: NoiseKind, convention: Convention, n: u32, db: f64) -> Result<f64> {
    let model = NoiseModel::with_convention(kind, r_from_db(db), convention)?;
    let opt = optimize_aspect(RepetitionSpec::new(n)?, &model)?;
    Ok(baseline(&model)?.pe - opt.point.pe)
}

/// Squeezing at which `Pe(n=1, R=1)` and `Pe(n=101, R*)` cross.
pub fn threshold_db(kind: NoiseKind, convention: Convention) -> Result<ThresholdReport> {
    let (lo, hi) = THRESHOLD_WINDOW;
    let steps = ((hi - lo) / THRESHOLD_SCAN_STEP).round() as usize;
    let gains = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let db = lo + i as f64 * THRESHOLD_SCAN_STEP;
            repetition_gain(kind, convention, THRESHOLD_N, db).map(|g| (db, g > 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let brackets: Vec<(f64, f64)> = gains.windows(2).filter(|w| w[0].1 != w[1].1).map(|w| (w[0].0, w[1].0)).collect();
    let Some(&(mut a, mut b)) = brackets.first() else {
        return Err(Error::NoCrossing { lo, hi });
    };
    let below = gains.iter().find(|g| g.0 == a).map(|g| g.1).unwrap_or(false);
    while b - a > THRESHOLD_TOL {
        let m = 0.5 * (a + b);
        if (repetition_gain(kind, convention, THRESHOLD_N, m)? > 0.0) == below {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(ThresholdReport { db: 0.5 * (a + b), kind, convention, crossings: brackets.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(n: u32) -> RepetitionSpec {
        RepetitionSpec::new(n).unwrap()
    }

    #[test]
    fn repetition_spec() {
        assert_eq!(rep(101).k(), 50);
        assert_eq!(rep(1).k(), 0);
        assert!(RepetitionSpec::new(4).is_err());
        assert!(RepetitionSpec::new(0).is_err());
    }

    #[test]
    fn repetition_reference_values() {
        assert!((rep_success_x(rep(1), 0.1) - 0.9).abs() < 1e-15);
        assert!((rep_success_x(rep(3), 0.1) - 0.972).abs() < 1e-14);
        assert_eq!(rep_success_x(rep(7), 0.0), 1.0);
        assert!((rep_success_z(rep(3), 0.1) - 0.756).abs() < 1e-15);
        assert_eq!(rep_success_z(rep(9), 0.0), 1.0);
        for n in [1, 3, 51] {
            assert!((rep_success_z(rep(n), 0.5) - 0.5).abs() < 1e-15);
        }
        assert!((logical_error(rep(3), 0.1, 0.1) - 0.265168).abs() < 1e-12);
    }

    #[test]
    fn tails_complement_sums() {
        for n in [1, 3, 11, 101] {
            for p in [0.0, 1e-3, 0.2, 0.5, 0.8, 1.0] {
                assert!((rep_success_x(rep(n), p) + rep_failure_x(rep(n), p) - 1.0).abs() < 1e-12);
            }
        }
        // Deep tail stays representable.
        let f = rep_failure_x(rep(101), 1e-6);
        assert!(f > 0.0 && f < 1e-250);
        assert!((rep_failure_z(rep(3), 1e-12) / 3e-12 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bare_qubit_error_matches_outcome_probabilities() {
        let m = NoiseModel::new(NoiseKind::GateNoise, r_from_db(15.0)).unwrap();
        let p = baseline(&m).unwrap();
        let probs = pauli_probs(GkpLattice::square(), noise_variances(&m).unwrap());
        assert!((p.pe - (1.0 - (1.0 - p.px) * (1.0 - p.pz))).abs() < 1e-15);
        // The product form counts X and Z independently, so the gap to the
        // true failure rate is exactly pY + pX·pZ.
        assert!(p.pe <= probs.failure());
        assert!((probs.failure() - p.pe - (p.py + p.px * p.pz)).abs() < 1e-15);
    }

    #[test]
    fn single_qubit_prefers_square_lattice() {
        for db in [8.0, 12.0, 15.0] {
            let m = NoiseModel::new(NoiseKind::ResourceOnly, r_from_db(db)).unwrap();
            let o = optimize_aspect(rep(1), &m).unwrap();
            assert_eq!(o.point.aspect, 1.0);
            assert_eq!(o.note, None);
        }
    }

    #[test]
    fn optimum_beats_scan() {
        let m = NoiseModel::new(NoiseKind::GateNoise, r_from_db(15.0)).unwrap();
        let spec = rep(101);
        let o = optimize_aspect(spec, &m).unwrap();
        for i in 0..400 {
            let r = 1.0 + i as f64 * 0.05;
            let p = overall_error(spec, GkpLattice::new(r).unwrap(), &m).unwrap();
            assert!(o.point.pe <= p.pe * (1.0 + 1e-9), "R={r}");
        }
        assert!((o.point.aspect - 4.6).abs() < 0.2, "{}", o.point.aspect);
    }

    #[test]
    fn optimal_aspect_grows_with_repetition() {
        let m = NoiseModel::new(NoiseKind::GateNoise, r_from_db(15.0)).unwrap();
        let mut last = 0.0;
        for n in N_GRID {
            let r = optimize_aspect(rep(n), &m).unwrap().point.aspect;
            assert!(r >= last - 1e-3, "n={n}: {r} < {last}");
            last = r;
        }
    }

    #[test]
    fn huge_squeezing_is_flat() {
        let m = NoiseModel::new(NoiseKind::ResourceOnly, 12.0).unwrap();
        let o = optimize_aspect(rep(3), &m).unwrap();
        assert_eq!(o.note, Some(OptimizerNote::Flat));
        assert_eq!(o.point.pe, 0.0);
        assert_eq!(o.point.aspect, 1.0);
    }

    #[test]
    fn gate_noise_threshold() {
        let t = threshold_db(NoiseKind::GateNoise, Convention::HalfVacuum).unwrap();
        assert_eq!(t.crossings, 1);
        assert!((t.db - 12.19).abs() < 0.02, "{}", t.db);
    }

    #[test]
    fn resource_only_thresholds_by_convention() {
        let h = threshold_db(NoiseKind::ResourceOnly, Convention::HalfVacuum).unwrap();
        assert!((h.db - 6.16).abs() < 0.02, "{}", h.db);
        let l = threshold_db(NoiseKind::ResourceOnly, Convention::Literal).unwrap();
        assert!((l.db - 9.17).abs() < 0.02, "{}", l.db);
        assert_eq!((h.crossings, l.crossings), (1, 1));
    }
}
