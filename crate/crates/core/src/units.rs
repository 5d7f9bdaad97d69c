//! Unit conversions used at the edges of the crate. Internally everything is SI
//! with angular frequencies.

use std::f64::consts::PI;

/// rad/s per GHz of ordinary frequency.
pub const RAD_PER_GHZ: f64 = 2.0 * PI * 1e9;

#[inline]
pub fn ghz_to_rad(f_ghz: f64) -> f64 {
    f_ghz * RAD_PER_GHZ
}

#[inline]
pub fn rad_to_ghz(omega: f64) -> f64 {
    omega / RAD_PER_GHZ
}
