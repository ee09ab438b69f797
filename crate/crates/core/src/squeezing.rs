//! Conversions between the squeezing parameter `r` and decibels.
//!
//! `db = -10 log10(e^{-2r})`, so 10 dB corresponds to `e^{-2r} = 0.1`.

use std::f64::consts::LN_10;

pub fn r_from_db(db: f64) -> f64 {
    db * LN_10 / 20.0
}

pub fn db_from_r(r: f64) -> f64 {
    20.0 * r / LN_10
}

/// Squeezing in dB of a quadrature variance measured against the vacuum value 1/2.
pub fn db_from_variance(variance: f64) -> f64 {
    -10.0 * (variance / crate::gaussian::VACUUM_VARIANCE).log10()
}
