//! Closed-form band physics of uncoupled ladder lines.
//!
//! Both ladders obey sin(kΔx/2) = ±(i/2)√(Z_s/Z_p). Series inductors with
//! shunt capacitors give the right-handed band ω = (2/√(C_r L_r)) sin(kΔx/2);
//! swapping the elements gives the left-handed band
//! ω = ω_IR / sin(kΔx/2), which is bounded below by ω_IR and falls with k.
//! Only the first zone (half-phase φ = kΔx/2 ∈ [0, π/2]) and positive
//! frequencies are used.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};

/// A point on a dispersion branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    /// Wavenumber (rad/m).
    pub k: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Half-phase kΔx/2 (rad).
    pub phi: f64,
}

fn check_zone(k: f64, dx: f64, allow_zero: bool) -> Result<f64> {
    if !(dx > 0.0) {
        return Err(Error::domain(format!("cell length must be > 0, got {dx}")));
    }
    let phase = k * dx;
    // a few ulps of slack so that k = π/Δx computed in floating point is accepted
    let top = PI * (1.0 + 4.0 * f64::EPSILON);
    if !(phase.is_finite() && phase >= 0.0 && phase <= top) || (!allow_zero && phase == 0.0) {
        return Err(Error::domain(format!(
            "kΔx = {phase} outside the first zone {}",
            if allow_zero { "[0, π]" } else { "(0, π]" }
        )));
    }
    Ok(phase.min(PI))
}

/// Right-handed ladder dispersion for one cell of series inductance
/// `l_right` and shunt capacitance `c_right`.
pub fn omega_rhtl(k: f64, c_right: f64, l_right: f64, dx: f64) -> Result<f64> {
    let phase = check_zone(k, dx, true)?;
    Ok(2.0 / (c_right * l_right).sqrt() * (0.5 * phase).sin())
}

/// Left-handed ladder dispersion for one cell of series capacitance `c_left`
/// and shunt inductance `l_left`.
pub fn omega_lhtl(k: f64, c_left: f64, l_left: f64, dx: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::Divergent(
            "left-handed band is unbounded as k → 0".to_string(),
        ));
    }
    let phase = check_zone(k, dx, false)?;
    Ok(1.0 / (2.0 * (c_left * l_left).sqrt() * (0.5 * phase).sin()))
}

/// Wavenumber of the left-handed band at frequency `omega`.
pub fn invert_lhtl(omega: f64, omega_ir: f64, dx: f64) -> Result<BandPoint> {
    if !(omega_ir > 0.0 && dx > 0.0) {
        return Err(Error::domain("cutoff and cell length must be > 0"));
    }
    if !(omega >= omega_ir) {
        return Err(Error::Evanescent { omega, omega_ir });
    }
    let phi = (omega_ir / omega).asin();
    Ok(BandPoint {
        k: 2.0 * phi / dx,
        omega,
        phi,
    })
}

/// dk/dω of the left-handed band, analytic.
pub fn lhtl_dk_domega(omega: f64, omega_ir: f64, dx: f64) -> Result<f64> {
    if !(omega > omega_ir) {
        return Err(Error::domain("dk/dω diverges at and below the cutoff"));
    }
    let s = omega_ir / omega;
    Ok(-2.0 / dx * (omega_ir / (omega * omega)) / (1.0 - s * s).sqrt())
}

/// Left-handed density of modes (4N√(C L)/π)·tanφ·sinφ, with 4√(CL) written
/// as 2/ω_IR.
pub fn lhtl_density(omega: f64, n_left: usize, omega_ir: f64) -> Result<f64> {
    if !(omega > omega_ir) {
        return Err(Error::domain(format!(
            "density of modes diverges at the cutoff; need ω > ω_IR, got ω/ω_IR = {}",
            omega / omega_ir
        )));
    }
    let s = omega_ir / omega;
    let c = (1.0 - s * s).sqrt();
    Ok(2.0 * n_left as f64 / (PI * omega_ir) * s * s / c)
}

/// Approximate density of modes (modes per rad/s) of the left-handed line of
/// `spec`, valid above the cutoff.
pub fn dom_approx(omega: f64, spec: &CircuitSpec) -> Result<f64> {
    lhtl_density(omega, spec.n_left, spec.omega_ir())
}

/// Constant density of a uniform right-handed strip: one-way delay over π.
pub fn rhtl_background(spec: &CircuitSpec) -> f64 {
    spec.rhtl_length / spec.rhtl_velocity() / PI
}

/// `dom_approx` plus the right-handed background, i.e. the sum of the two
/// uncoupled lines' densities.
pub fn dom_approx_total(omega: f64, spec: &CircuitSpec) -> Result<f64> {
    Ok(dom_approx(omega, spec)? + rhtl_background(spec))
}

/// Number of left-handed modes between the cutoff and `omega`,
/// N_l·(1 − (2/π)·arcsin(ω_IR/ω)).
pub fn lhtl_mode_count(omega: f64, n_left: usize, omega_ir: f64) -> f64 {
    if omega <= omega_ir {
        return 0.0;
    }
    n_left as f64 * (1.0 - (omega_ir / omega).asin() / FRAC_PI_2)
}

/// Spin-boson spectral density N_l/(π√(2ω_IR)) · Θ(ω−ω_IR)/√(ω−ω_IR).
/// Zero at and below the cutoff.
pub fn spectral_density(omega: f64, n_left: usize, omega_ir: f64) -> f64 {
    if omega <= omega_ir {
        return 0.0;
    }
    n_left as f64 / (PI * (2.0 * omega_ir).sqrt()) / (omega - omega_ir).sqrt()
}

/// Closed-form ∫_{ω_IR}^{ω} J, i.e. 2N_l√(ω−ω_IR)/(π√(2ω_IR)).
pub fn spectral_weight_below(omega: f64, n_left: usize, omega_ir: f64) -> f64 {
    if omega <= omega_ir {
        return 0.0;
    }
    2.0 * n_left as f64 * (omega - omega_ir).sqrt() / (PI * (2.0 * omega_ir).sqrt())
}

/// Samples of J(ω) on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityCurve {
    pub omega_grid: Vec<f64>,
    pub j_values: Vec<f64>,
    pub omega_ir: f64,
    pub n_left: usize,
}

impl SpectralDensityCurve {
    pub fn sample(omega_grid: Vec<f64>, n_left: usize, omega_ir: f64) -> Self {
        let j_values = omega_grid
            .iter()
            .map(|&w| spectral_density(w, n_left, omega_ir))
            .collect();
        SpectralDensityCurve {
            omega_grid,
            j_values,
            omega_ir,
            n_left,
        }
    }
}
