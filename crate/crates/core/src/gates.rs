//! Measurement-based gate layer: measurement-angle schedules, byproduct
//! bookkeeping and the noise that finitely squeezed cluster modes add to a
//! two-mode gate.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, SQRT_2};

use crate::error::{invalid, Result};
use crate::squeezing::db_from_r;

/// Control-mode angle magnitude used to decouple neighbouring wires.
pub const CONTROL_ANGLE: f64 = FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    ControlledZ,
    ControlledX,
}

impl GateKind {
    /// `+1` for the upper sign branch (controlled-Z), `−1` for the lower one.
    fn branch(self) -> f64 {
        match self {
            GateKind::ControlledZ => 1.0,
            GateKind::ControlledX => -1.0,
        }
    }
}

/// Control-mode measurement angle `(−1)^k θc` at time bin `k`.
pub fn control_angle(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        CONTROL_ANGLE
    } else {
        -CONTROL_ANGLE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementPattern {
    pub kind: GateKind,
    pub coupling: f64,
    pub angles: [f64; 6],
}

impl MeasurementPattern {
    pub fn byproduct(&self) -> ByproductOp {
        let b = self.kind.branch();
        ByproductOp { first: -b * 3.0 * FRAC_PI_4, second: b * FRAC_PI_4 }
    }
}

/// Measurement angles `θ1..θ6` for a two-mode gate of coupling `g`.
pub fn two_mode_gate_angles(kind: GateKind, coupling: f64) -> Result<MeasurementPattern> {
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(invalid(format!("gate coupling must be positive, got {coupling}")));
    }
    let tilt = kind.branch() * (2.0 / coupling).atan();
    let a = FRAC_PI_8;
    Ok(MeasurementPattern {
        kind,
        coupling,
        angles: [-a, 3.0 * a, -a, 3.0 * a, FRAC_PI_4 + tilt, FRAC_PI_4 - tilt],
    })
}

/// Known single-mode rotations `R(first) ⊗ R(second)` left behind by a gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ByproductOp {
    pub first: f64,
    pub second: f64,
}

impl ByproductOp {
    pub fn inverse(&self) -> ByproductOp {
        ByproductOp { first: -self.first, second: -self.second }
    }
}

/// Byproducts attached to a logical wire pair. They are never applied to the
/// state; the next step compensates them with the inverse rotations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ByproductLedger {
    pending: Vec<ByproductOp>,
}

impl ByproductLedger {
    pub fn record(&mut self, op: ByproductOp) {
        self.pending.push(op);
    }

    pub fn pending(&self) -> &[ByproductOp] {
        &self.pending
    }

    /// Net rotation still owed on each mode.
    pub fn net(&self) -> ByproductOp {
        self.pending.iter().fold(ByproductOp { first: 0.0, second: 0.0 }, |acc, op| ByproductOp {
            first: acc.first + op.first,
            second: acc.second + op.second,
        })
    }

    /// Drains the ledger and returns the rotations that undo it, last first.
    pub fn compensate(&mut self) -> Vec<ByproductOp> {
        self.pending.drain(..).rev().map(|op| op.inverse()).collect()
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("gate noise needs finite squeezing r > 0, got {r}")));
    }
    Ok(())
}

/// `Γ = tanh(2r)/√2`.
pub fn gamma(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok((2.0 * r).tanh() / SQRT_2)
}

pub type NoiseMatrix = [[f64; 8]; 4];

/// Noise coefficient matrix of the unit-coupling controlled-Z/controlled-X gate.
pub fn gate_noise_matrix(r: f64) -> Result<NoiseMatrix> {
    let g = gamma(r)?;
    let s = SQRT_2;
    let g2 = g * g;
    Ok([
        [-s / g2, s / (2.0 * g2), -3.0 * s / (4.0 * g), -s / (4.0 * g), -1.0 / g, -1.0 / (2.0 * g), 0.0, 0.0],
        [-s / (2.0 * g2), s / g2, 3.0 * s / (4.0 * g), -s / (4.0 * g), -1.0 / (2.0 * g), -1.0 / g, 0.0, 0.0],
        [0.0, -s / 2.0, s * g / 4.0, s * g / 4.0, -g, g / 2.0, s, 0.0],
        [s / 2.0, 0.0, -s * g / 4.0, s * g / 4.0, g / 2.0, -g, 0.0, s],
    ])
}

/// `(N_x, N_p)`: noise factors multiplying `sech(2r)` on the gate outputs.
pub fn gate_noise_factors(r: f64) -> Result<(f64, f64)> {
    check_r(r)?;
    let t2 = (2.0 * r).tanh().powi(2);
    let nx = 2.5 * (1.0 / (t2 * t2) + 1.0 / t2);
    let np = 2.5 * (t2 + 1.0);
    Ok((nx, np))
}

/// `sech(2r)`, the squeezing left in a cluster mode.
pub fn cluster_epsilon(r: f64) -> f64 {
    1.0 / (2.0 * r).cosh()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateNoiseReport {
    pub r: f64,
    pub gamma: f64,
    pub matrix: NoiseMatrix,
    pub nx: f64,
    pub np: f64,
    pub epsilon: f64,
    pub resource_db: f64,
    pub cluster_db: f64,
    pub residual_x_db: f64,
    pub residual_p_db: f64,
}

/// Squeezing left after cluster preparation and after one two-mode gate.
pub fn squeezing_budget(r: f64) -> Result<GateNoiseReport> {
    let (nx, np) = gate_noise_factors(r)?;
    let epsilon = cluster_epsilon(r);
    Ok(GateNoiseReport {
        r,
        gamma: gamma(r)?,
        matrix: gate_noise_matrix(r)?,
        nx,
        np,
        epsilon,
        resource_db: db_from_r(r),
        cluster_db: -10.0 * epsilon.log10(),
        residual_x_db: -10.0 * (nx * epsilon).log10(),
        residual_p_db: -10.0 * (np * epsilon).log10(),
    })
}

/// `θ5 + θ6`, fixed by construction of the schedule.
pub const TUNABLE_ANGLE_SUM: f64 = FRAC_PI_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squeezing::r_from_db;
    use std::f64::consts::PI;

    #[test]
    fn unit_coupling_schedule() {
        let p = two_mode_gate_angles(GateKind::ControlledZ, 1.0).unwrap();
        let t = 2.0f64.atan();
        let expected = [-PI / 8.0, 3.0 * PI / 8.0, -PI / 8.0, 3.0 * PI / 8.0, PI / 4.0 + t, PI / 4.0 - t];
        for (a, b) in p.angles.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let cx = two_mode_gate_angles(GateKind::ControlledX, 1.0).unwrap();
        assert_eq!(cx.angles[..4], p.angles[..4]);
        assert!((cx.angles[4] - (PI / 4.0 - t)).abs() < 1e-15);
    }

    #[test]
    fn coupling_two_gives_right_angles() {
        let p = two_mode_gate_angles(GateKind::ControlledZ, 2.0).unwrap();
        assert!((p.angles[4] - PI / 2.0).abs() < 1e-15);
        assert!(p.angles[5].abs() < 1e-15);
    }

    #[test]
    fn schedule_invariants() {
        for g in [0.1, 0.5, 1.0, 3.0, 40.0] {
            for kind in [GateKind::ControlledZ, GateKind::ControlledX] {
                let p = two_mode_gate_angles(kind, g).unwrap();
                assert!((p.angles[4] + p.angles[5] - TUNABLE_ANGLE_SUM).abs() < 1e-14);
                assert!(((p.angles[4] - PI / 4.0).abs() - (2.0 / g).atan()).abs() < 1e-14);
            }
        }
        assert!(two_mode_gate_angles(GateKind::ControlledZ, 0.0).is_err());
        assert!(two_mode_gate_angles(GateKind::ControlledZ, -1.0).is_err());
    }

    #[test]
    fn control_angles_alternate() {
        assert_eq!(control_angle(0), PI / 4.0);
        assert_eq!(control_angle(1), -PI / 4.0);
        assert_eq!(control_angle(-3), -PI / 4.0);
    }

    #[test]
    fn byproducts_are_recorded_and_compensated() {
        let cz = two_mode_gate_angles(GateKind::ControlledZ, 1.0).unwrap();
        assert_eq!(cz.byproduct(), ByproductOp { first: -3.0 * PI / 4.0, second: PI / 4.0 });
        let cx = two_mode_gate_angles(GateKind::ControlledX, 1.0).unwrap();
        assert_eq!(cx.byproduct(), ByproductOp { first: 3.0 * PI / 4.0, second: -PI / 4.0 });

        let mut ledger = ByproductLedger::default();
        ledger.record(cz.byproduct());
        ledger.record(cz.byproduct());
        assert_eq!(ledger.pending().len(), 2);
        assert!((ledger.net().first + 1.5 * PI).abs() < 1e-15);
        let fix = ledger.compensate();
        assert!(ledger.pending().is_empty());
        let undone: f64 = fix.iter().map(|op| op.first).sum();
        assert!((undone - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn noise_matrix_limits() {
        let m = gate_noise_matrix(30.0).unwrap();
        assert!((m[2][6] - SQRT_2).abs() < 1e-12);
        // √2 / (−Γ²) with Γ² = 1/2
        assert!((m[0][0] + 2.0 * SQRT_2).abs() < 1e-12);
        let ten = r_from_db(10.0);
        assert!((gamma(ten).unwrap() - 0.693104).abs() < 1e-5);
        assert!((gamma(ten).unwrap() - 9.9 / 10.1 / SQRT_2).abs() < 1e-15);
        assert!(gate_noise_matrix(0.0).is_err());
        for r in [0.01, 0.5, 3.0] {
            assert!(gate_noise_matrix(r).unwrap().iter().flatten().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn noise_factors() {
        let (nx, np) = gate_noise_factors(r_from_db(10.0)).unwrap();
        assert!((nx - 5.31025).abs() < 1e-5, "{nx}");
        assert!((np - 4.90197).abs() < 1e-5, "{np}");
        let (nx, np) = gate_noise_factors(r_from_db(15.0)).unwrap();
        assert!((nx - 5.03010).abs() < 1e-5, "{nx}");
        assert!((np - 4.99002).abs() < 1e-5, "{np}");
        let (nx, np) = gate_noise_factors(20.0).unwrap();
        assert!((nx - 5.0).abs() < 1e-12 && (np - 5.0).abs() < 1e-12);
        assert!(gate_noise_factors(0.0).is_err());
    }

    #[test]
    fn noise_factors_are_ordered_and_monotone() {
        let mut last = (f64::INFINITY, 0.0);
        for i in 1..400 {
            let r = i as f64 * 0.01;
            let (nx, np) = gate_noise_factors(r).unwrap();
            assert!(nx >= np && np >= 2.5);
            assert!(nx < last.0 && np > last.1);
            last = (nx, np);
        }
    }

    #[test]
    fn ten_db_budget() {
        let b = squeezing_budget(r_from_db(10.0)).unwrap();
        assert!((b.resource_db - 10.0).abs() < 1e-12);
        assert!((b.epsilon - 0.198020).abs() < 1e-6);
        assert!((b.cluster_db - 7.03).abs() < 0.005, "{}", b.cluster_db);
        assert!((b.residual_p_db - 0.13).abs() < 0.005, "{}", b.residual_p_db);
        assert!((b.residual_x_db + 0.22).abs() < 0.005, "{}", b.residual_x_db);
    }

    #[test]
    fn cluster_squeezing_loses_three_db() {
        let gap = |db: f64| {
            let b = squeezing_budget(r_from_db(db)).unwrap();
            assert!(b.cluster_db < b.resource_db);
            b.resource_db - b.cluster_db
        };
        assert!((gap(40.0) - 10.0 * 2.0f64.log10()).abs() < 1e-3);
        assert!(gap(5.0) < gap(20.0));
    }
}
