//! Physical constants and unit conversions.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

pub fn nm_to_m(nm: f64) -> f64 {
    nm * 1e-9
}

pub fn um_to_m(um: f64) -> f64 {
    um * 1e-6
}

pub fn m_to_um(m: f64) -> f64 {
    m * 1e6
}

pub fn pm_per_v_to_m_per_v(d: f64) -> f64 {
    d * 1e-12
}

/// Angular frequency (rad/s) of a vacuum wavelength in metres.
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// Vacuum wavelength (m) of an angular frequency in rad/s.
pub fn wavelength_of(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

/// How a "THz" figure in a configuration file maps to rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyConvention {
    /// 1 THz = 1e12 rad/s.
    #[default]
    Angular,
    /// 1 THz = 2π·1e12 rad/s.
    Ordinary,
}

impl FrequencyConvention {
    pub fn thz_to_rad_per_s(self, thz: f64) -> f64 {
        match self {
            FrequencyConvention::Angular => thz * 1e12,
            FrequencyConvention::Ordinary => thz * 2.0 * PI * 1e12,
        }
    }

    pub fn rad_per_s_to_thz(self, omega: f64) -> f64 {
        match self {
            FrequencyConvention::Angular => omega * 1e-12,
            FrequencyConvention::Ordinary => omega / (2.0 * PI * 1e12),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_frequency_roundtrip() {
        let w = angular_frequency(810e-9);
        assert!((wavelength_of(w) - 810e-9).abs() < 1e-20);
    }

    #[test]
    fn thz_conventions() {
        assert_eq!(FrequencyConvention::Angular.thz_to_rad_per_s(5.0), 5e12);
        let o = FrequencyConvention::Ordinary.thz_to_rad_per_s(1.0);
        assert!((o - 2.0 * PI * 1e12).abs() < 1.0);
        assert!((FrequencyConvention::Ordinary.rad_per_s_to_thz(o) - 1.0).abs() < 1e-15);
    }
}
