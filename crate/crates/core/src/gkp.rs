//! Rectangular-lattice GKP qubits under additive Gaussian shift noise.
//!
//! A shift `ξ` is decoded by rounding to the nearest multiple of the lattice
//! spacing; an odd multiple is a logical flip. All bin masses come from
//! error-function differences, and the odd (failure) side of each comb is
//! summed directly so that tiny error rates keep their relative precision.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Result};
use crate::gates::gate_noise_factors;

/// Rectangular GKP lattice with aspect ratio `R` (1 is square).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkpLattice {
    aspect: f64,
}

impl GkpLattice {
    pub fn new(aspect: f64) -> Result<Self> {
        if !(aspect > 0.0) || !aspect.is_finite() {
            return Err(invalid(format!("aspect ratio must be positive and finite, got {aspect}")));
        }
        Ok(Self { aspect })
    }

    pub fn square() -> Self {
        Self { aspect: 1.0 }
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    /// Bin width for x shifts, `√(π/R)`.
    pub fn spacing_x(&self) -> f64 {
        (PI / self.aspect).sqrt()
    }

    /// Bin width for p shifts, `√(πR)`.
    pub fn spacing_p(&self) -> f64 {
        (PI * self.aspect).sqrt()
    }

    pub fn dual(&self) -> Self {
        Self { aspect: 1.0 / self.aspect }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Data and ancilla spikes plus the noise of one two-mode gate.
    GateNoise,
    /// Data and ancilla spikes plus one resource-squeezing contribution.
    ResourceOnly,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::GateNoise => "gate-noise",
            NoiseKind::ResourceOnly => "resource-only",
        }
    }
}

/// How `e^{−2r}`-type terms turn into shift variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Convention {
    /// Every term is a variance relative to vacuum 1/2: spikes `e^{−2r}/2`,
    /// gate term `N·sech(2r)/2`.
    #[default]
    HalfVacuum,
    /// Terms taken at face value: spikes `e^{−2r}`, gate term `N·sech(2r)`.
    Literal,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::HalfVacuum => "half-vacuum",
            Convention::Literal => "literal",
        }
    }

    fn scale(self) -> f64 {
        match self {
            Convention::HalfVacuum => 0.5,
            Convention::Literal => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub r: f64,
    pub convention: Convention,
    /// Data-qubit spike variance.
    pub sigma0_sq: f64,
    /// Ancilla spike variance.
    pub sigma_a_sq: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, r: f64) -> Result<Self> {
        Self::with_convention(kind, r, Convention::HalfVacuum)
    }

    pub fn with_convention(kind: NoiseKind, r: f64, convention: Convention) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid(format!("noise model needs finite squeezing r > 0, got {r}")));
        }
        let spike = convention.scale() * (-2.0 * r).exp();
        Ok(Self { kind, r, convention, sigma0_sq: spike, sigma_a_sq: spike })
    }

    pub fn from_db(kind: NoiseKind, db: f64, convention: Convention) -> Result<Self> {
        Self::with_convention(kind, crate::squeezing::r_from_db(db), convention)
    }

    /// `(σx², σp²)`.
    pub fn variances(&self) -> Result<(f64, f64)> {
        let s = self.convention.scale();
        let (ax, ap) = match self.kind {
            NoiseKind::GateNoise => {
                let (nx, np) = gate_noise_factors(self.r)?;
                let eps = 1.0 / (2.0 * self.r).cosh();
                (nx * eps * s, np * eps * s)
            }
            NoiseKind::ResourceOnly => {
                let d = (-2.0 * self.r).exp() * s;
                (d, d)
            }
        };
        let base = self.sigma0_sq + self.sigma_a_sq;
        Ok((base + ax, base + ap))
    }
}

/// Standard deviations of the x and p shift distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNoise {
    pub sigma_x: f64,
    pub sigma_p: f64,
}

impl QuadratureNoise {
    pub fn new(sigma_x: f64, sigma_p: f64) -> Result<Self> {
        for s in [sigma_x, sigma_p] {
            if !(s > 0.0) || !s.is_finite() {
                return Err(invalid(format!("shift standard deviation must be positive, got {s}")));
            }
        }
        Ok(Self { sigma_x, sigma_p })
    }

    pub fn symmetric(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma)
    }

    pub fn swapped(&self) -> Self {
        Self { sigma_x: self.sigma_p, sigma_p: self.sigma_x }
    }
}

pub fn noise_variances(model: &NoiseModel) -> Result<QuadratureNoise> {
    let (vx, vp) = model.variances()?;
    QuadratureNoise::new(vx.sqrt(), vp.sqrt())
}

/// Upper tail `P(ξ > t)` of a centred normal with standard deviation `σ`.
fn upper_tail(sigma: f64, t: f64) -> f64 {
    0.5 * libm::erfc(t / (SQRT_2 * sigma))
}

/// `∫_lo^hi` of the centred normal density with standard deviation `σ`.
/// Either bound may be infinite.
pub fn gaussian_bin_mass(sigma: f64, lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return 0.0;
    }
    if lo >= 0.0 {
        upper_tail(sigma, lo) - upper_tail(sigma, hi)
    } else if hi <= 0.0 {
        upper_tail(sigma, -hi) - upper_tail(sigma, -lo)
    } else {
        1.0 - upper_tail(sigma, -lo) - upper_tail(sigma, hi)
    }
}

/// Probability that a shift rounds to an even (`even`) or odd (`odd`)
/// multiple of the spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombMass {
    pub even: f64,
    pub odd: f64,
}

/// Minimum number of bins kept on each side of the origin.
pub const MIN_COMB_RADIUS: i64 = 8;

/// Smallest contribution that still extends the comb.
const COMB_CUTOFF: f64 = 1e-17;

pub fn comb_radius(sigma: f64, spacing: f64) -> i64 {
    MIN_COMB_RADIUS.max((6.0 * sigma / spacing).ceil() as i64)
}

pub fn comb_mass(sigma: f64, spacing: f64) -> CombMass {
    comb_mass_with_radius(sigma, spacing, comb_radius(sigma, spacing))
}

/// Comb sums over bins `|n| ≤ radius`, extended further while bins still
/// carry more than [`COMB_CUTOFF`].
pub fn comb_mass_with_radius(sigma: f64, spacing: f64, radius: i64) -> CombMass {
    let half = 0.5 * spacing;
    let mut even = gaussian_bin_mass(sigma, -half, half);
    let mut odd = 0.0;
    let mut n = 1i64;
    loop {
        // Symmetric pair of bins ±n.
        let lo = (n as f64 - 0.5) * spacing;
        let m = 2.0 * gaussian_bin_mass(sigma, lo, lo + spacing);
        if n % 2 == 0 {
            even += m;
        } else {
            odd += m;
        }
        if n >= radius && m < COMB_CUTOFF {
            break;
        }
        n += 1;
    }
    CombMass { even, odd }
}

/// Probabilities of the four decoded outcomes of one GKP qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliProbs {
    pub success: f64,
    pub px: f64,
    pub pz: f64,
    pub py: f64,
    /// x-comb masses (`even` = `Ax`).
    pub x: CombMass,
    /// p-comb masses (`even` = `Ap`).
    pub p: CombMass,
}

impl PauliProbs {
    pub fn failure(&self) -> f64 {
        self.px + self.pz + self.py
    }
}

pub fn pauli_probs(lattice: GkpLattice, noise: QuadratureNoise) -> PauliProbs {
    let x = comb_mass(noise.sigma_x, lattice.spacing_x());
    let p = comb_mass(noise.sigma_p, lattice.spacing_p());
    PauliProbs {
        success: x.even * p.even,
        px: x.odd * p.even,
        pz: p.odd * x.even,
        py: x.odd * p.odd,
        x,
        p,
    }
}

pub fn gkp_success(lattice: GkpLattice, noise: QuadratureNoise) -> f64 {
    pauli_probs(lattice, noise).success
}
