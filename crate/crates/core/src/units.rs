//! Unit conversions shared across the crate.
//!
//! Power arithmetic is done in watts; dB and dBm only show up at the edges.

use crate::error::{Error, Result};

/// CODATA-fixed constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants;

impl PhysicalConstants {
    /// Planck constant, J·s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Speed of light in vacuum, m/s.
    pub const LIGHT_SPEED: f64 = 2.997_924_58e8;
}

const C: f64 = PhysicalConstants::LIGHT_SPEED;

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {x}")))
    }
}

pub fn db_to_linear(db: f64) -> Result<f64> {
    Ok(10f64.powf(finite(db, "decibel value")? / 10.0))
}

pub fn linear_to_db(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::invalid(format!(
            "linear ratio must be positive, got {ratio}"
        )));
    }
    Ok(10.0 * ratio.log10())
}

pub fn dbm_to_watt(dbm: f64) -> Result<f64> {
    Ok(1e-3 * db_to_linear(finite(dbm, "dBm value")?)?)
}

pub fn watt_to_dbm(watt: f64) -> Result<f64> {
    linear_to_db(watt * 1e3)
}

pub fn wavelength_nm_to_hz(wavelength_nm: f64) -> Result<f64> {
    if !(wavelength_nm > 0.0) || !wavelength_nm.is_finite() {
        return Err(Error::invalid(format!(
            "wavelength must be positive, got {wavelength_nm} nm"
        )));
    }
    Ok(C / (wavelength_nm * 1e-9))
}

pub fn hz_to_wavelength_nm(frequency_hz: f64) -> Result<f64> {
    if !(frequency_hz > 0.0) || !frequency_hz.is_finite() {
        return Err(Error::invalid(format!(
            "frequency must be positive, got {frequency_hz} Hz"
        )));
    }
    Ok(C / frequency_hz * 1e9)
}

/// Energy of one photon at the given wavelength, in joules.
pub fn photon_energy(wavelength_nm: f64) -> Result<f64> {
    Ok(PhysicalConstants::PLANCK * wavelength_nm_to_hz(wavelength_nm)?)
}

/// Converts a frequency-domain filter width into a wavelength width at
/// `wavelength_nm` using Δλ = λ²Δf/c.
pub fn bandwidth_hz_to_nm(bandwidth_hz: f64, wavelength_nm: f64) -> Result<f64> {
    let lambda_m = wavelength_nm * 1e-9;
    if !(lambda_m > 0.0) || !(bandwidth_hz >= 0.0) {
        return Err(Error::invalid("bandwidth conversion needs positive wavelength"));
    }
    Ok(lambda_m * lambda_m * bandwidth_hz / C * 1e9)
}

/// Natural-log power loss coefficient (1/km) from an attenuation in dB/km.
pub fn loss_coefficient_per_km(alpha_db_per_km: f64) -> f64 {
    alpha_db_per_km * std::f64::consts::LN_10 / 10.0
}

/// Fiber power transmittance `10^(-alpha·L/10)`.
pub fn transmittance(alpha_db_per_km: f64, length_km: f64) -> Result<f64> {
    if !(length_km >= 0.0) || !length_km.is_finite() {
        return Err(Error::invalid(format!(
            "fiber length must be >= 0, got {length_km} km"
        )));
    }
    if !(alpha_db_per_km >= 0.0) || !alpha_db_per_km.is_finite() {
        return Err(Error::invalid(format!(
            "attenuation must be >= 0, got {alpha_db_per_km} dB/km"
        )));
    }
    db_to_linear(-alpha_db_per_km * length_km)
}
