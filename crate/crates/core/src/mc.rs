//! Brute-force sampler that checks the analytic GKP and repetition-code
//! error rates.
//!
//! Trials are grouped in fixed blocks of [`BLOCK_TRIALS`]. Block `b` draws from
//! ChaCha8 seeded with `seed` on stream `b`, so the sample stream depends only
//! on `(seed, trial index)` and the parallel reduction (an integer sum) is
//! identical to a serial run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::ft::{logical_error, RepetitionSpec};
use crate::gkp::{pauli_probs, GkpLattice, QuadratureNoise};

pub const BLOCK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingMode {
    /// Separate X and Z experiments per trial, mirroring the product form
    /// of the analytic error rate.
    IndependentMarginals,
    /// One joint sample per qubit; Y outcomes flip both repetition checks.
    JointPhysical,
}

impl SamplingMode {
    pub fn name(self) -> &'static str {
        match self {
            SamplingMode::IndependentMarginals => "independent",
            SamplingMode::JointPhysical => "joint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitOutcome {
    I,
    X,
    Z,
    Y,
}

impl QubitOutcome {
    fn from_flips(x: bool, p: bool) -> Self {
        match (x, p) {
            (false, false) => QubitOutcome::I,
            (true, false) => QubitOutcome::X,
            (false, true) => QubitOutcome::Z,
            (true, true) => QubitOutcome::Y,
        }
    }

    pub fn flips_x(self) -> bool {
        matches!(self, QubitOutcome::X | QubitOutcome::Y)
    }

    pub fn flips_p(self) -> bool {
        matches!(self, QubitOutcome::Z | QubitOutcome::Y)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Source of decoded single-qubit outcomes.
pub trait QubitChannel: Sync {
    fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> QubitOutcome;
}

/// Decodes one GKP qubit: a shift is an odd multiple of the spacing after
/// rounding. Ties go to the lower bin.
pub fn is_odd_bin(shift: f64, spacing: f64) -> bool {
    let bin = (shift / spacing - 0.5).ceil();
    bin.rem_euclid(2.0) == 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkpShiftChannel {
    pub lattice: GkpLattice,
    pub noise: QuadratureNoise,
}

impl QubitChannel for GkpShiftChannel {
    fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> QubitOutcome {
        let xi_x: f64 = rng.sample::<f64, _>(StandardNormal) * self.noise.sigma_x;
        let xi_p: f64 = rng.sample::<f64, _>(StandardNormal) * self.noise.sigma_p;
        QubitOutcome::from_flips(
            is_odd_bin(xi_x, self.lattice.spacing_x()),
            is_odd_bin(xi_p, self.lattice.spacing_p()),
        )
    }
}

pub fn sample_qubit_outcome<G: Rng + ?Sized>(lattice: GkpLattice, noise: QuadratureNoise, rng: &mut G) -> QubitOutcome {
    GkpShiftChannel { lattice, noise }.sample(rng)
}

/// Fixed Pauli probabilities, for forcing exact error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannel {
    px: f64,
    pz: f64,
    py: f64,
}

impl PauliChannel {
    pub fn new(px: f64, pz: f64, py: f64) -> Result<Self> {
        if [px, pz, py].iter().any(|p| !(0.0..=1.0).contains(p)) || px + pz + py > 1.0 {
            return Err(invalid(format!("invalid Pauli probabilities ({px}, {pz}, {py})")));
        }
        Ok(Self { px, pz, py })
    }
}

impl QubitChannel for PauliChannel {
    fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> QubitOutcome {
        let u: f64 = rng.random();
        if u < self.px {
            QubitOutcome::X
        } else if u < self.px + self.pz {
            QubitOutcome::Z
        } else if u < self.px + self.pz + self.py {
            QubitOutcome::Y
        } else {
            QubitOutcome::I
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub n: u32,
    pub aspect: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl TrialConfig {
    pub fn channel(&self) -> Result<GkpShiftChannel> {
        Ok(GkpShiftChannel {
            lattice: GkpLattice::new(self.aspect)?,
            noise: QuadratureNoise::new(self.sigma_x, self.sigma_p)?,
        })
    }

    /// Analytic counterpart of the estimate.
    pub fn analytic_pe(&self) -> Result<f64> {
        let ch = self.channel()?;
        let p = pauli_probs(ch.lattice, ch.noise);
        Ok(logical_error(RepetitionSpec::new(self.n)?, p.px, p.pz))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub failures: u64,
    pub trials: u64,
    pub pe: f64,
    /// Binomial standard error at the estimate.
    pub std_error: f64,
}

impl Estimate {
    fn new(failures: u64, trials: u64) -> Self {
        let pe = failures as f64 / trials as f64;
        Self { failures, trials, pe, std_error: (pe * (1.0 - pe) / trials as f64).sqrt() }
    }

    /// Standard error expected if `p` were the true rate.
    pub fn std_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// `|P̂e − p|` in units of [`Self::std_error_at`]; zero when both vanish.
    pub fn deviation(&self, p: f64) -> f64 {
        let d = (self.pe - p).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error_at(p)
        }
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Runs `trial` once per trial index and sums the per-trial counts.
fn run_blocks<const K: usize, F>(trials: u64, seed: u64, trial: F) -> [u64; K]
where
    F: Fn(&mut ChaCha8Rng, &mut [u64; K]) + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let mut acc = [0u64; K];
            let len = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            for _ in 0..len {
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .reduce(|| [0u64; K], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        })
}

fn logical_failure<C: QubitChannel, G: Rng>(channel: &C, spec: RepetitionSpec, mode: SamplingMode, rng: &mut G) -> bool {
    let n = spec.n();
    match mode {
        SamplingMode::IndependentMarginals => {
            let x = (0..n).filter(|_| channel.sample(rng) == QubitOutcome::X).count() as u32;
            let z = (0..n).filter(|_| channel.sample(rng) == QubitOutcome::Z).count() as u32;
            x > spec.k() || z % 2 == 1
        }
        SamplingMode::JointPhysical => {
            let (mut x, mut z) = (0u32, 0u32);
            for _ in 0..n {
                let o = channel.sample(rng);
                x += o.flips_x() as u32;
                z += o.flips_p() as u32;
            }
            x > spec.k() || z % 2 == 1
        }
    }
}

pub fn estimate_pe_with<C: QubitChannel>(
    channel: &C,
    spec: RepetitionSpec,
    mode: SamplingMode,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(invalid("Monte Carlo run needs at least one trial"));
    }
    let [failures] = run_blocks::<1, _>(trials, seed, |rng, acc| {
        acc[0] += logical_failure(channel, spec, mode, rng) as u64;
    });
    Ok(Estimate::new(failures, trials))
}

pub fn estimate_pe(cfg: &TrialConfig) -> Result<Estimate> {
    estimate_pe_with(&cfg.channel()?, RepetitionSpec::new(cfg.n)?, cfg.mode, cfg.trials, cfg.seed)
}

/// Counts of `(I, X, Z, Y)` over `trials` single-qubit samples.
pub fn outcome_frequencies<C: QubitChannel>(channel: &C, trials: u64, seed: u64) -> Result<[u64; 4]> {
    if trials == 0 {
        return Err(invalid("Monte Carlo run needs at least one trial"));
    }
    Ok(run_blocks::<4, _>(trials, seed, |rng, acc| acc[channel.sample(rng).index()] += 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelComparison {
    pub config: TrialConfig,
    pub analytic: f64,
    pub independent: Estimate,
    pub joint: Estimate,
}

impl ModelComparison {
    pub fn independent_deviation(&self) -> f64 {
        self.independent.deviation(self.analytic)
    }

    pub fn joint_deviation(&self) -> f64 {
        self.joint.deviation(self.analytic)
    }
}

/// Runs both sampling modes for every configuration (the `mode` field is
/// ignored) and pairs them with the analytic rate.
pub fn compare_models(grid: &[TrialConfig]) -> Result<Vec<ModelComparison>> {
    if grid.is_empty() {
        return Err(invalid("comparison grid is empty"));
    }
    grid.iter()
        .map(|cfg| {
            let with = |mode| estimate_pe(&TrialConfig { mode, ..*cfg });
            Ok(ModelComparison {
                config: *cfg,
                analytic: cfg.analytic_pe()?,
                independent: with(SamplingMode::IndependentMarginals)?,
                joint: with(SamplingMode::JointPhysical)?,
            })
        })
        .collect()
}
