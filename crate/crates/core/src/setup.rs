//! Assembles a complete source (crystal cut, emission geometry, filters)
//! from laboratory parameters.

use crate::dispersion::{
    check_energy_conservation, emission_angles, energy_conserving_idler, CrystalSpec, Material,
    OpticalMode, Role,
};
use crate::jsa::BeamGeometry;
use crate::metrics::{Evaluator, FilterSpec, Filters, MetricsOptions};
use crate::Result;
use serde::{Deserialize, Serialize};

/// SI description of a source before the phase-matching solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pub material: Material,
    pub length: f64,
    /// Cut angle beyond the collinear angle, rad.
    pub cut_detuning: f64,
    pub azimuth: f64,
    pub pump_wavelength: f64,
    pub signal_wavelength: f64,
    pub idler_wavelength: f64,
    pub pump_waist: f64,
    pub signal_waist: f64,
    pub idler_waist: f64,
    /// rad/s
    pub pump_bandwidth: f64,
    pub pump_power_mw: f64,
    /// Filter half-widths for pump, signal, idler, rad/s.
    pub filter_half_widths: [f64; 3],
    pub filter_transmission: [f64; 3],
}

impl SourceParams {
    /// 405 nm pump, degenerate 810 nm pairs from 450 µm of BBO cut 1.5°
    /// beyond collinear; 30 THz pump bandwidth and 5 THz filters (angular
    /// units), W0p = 310 µm and W0s = W0i = 145.4 µm.
    pub fn degenerate_810() -> Self {
        SourceParams {
            material: Material::bbo(),
            length: 450e-6,
            cut_detuning: 1.5f64.to_radians(),
            azimuth: 0.0,
            pump_wavelength: 405e-9,
            signal_wavelength: 810e-9,
            idler_wavelength: 810e-9,
            pump_waist: 310e-6,
            signal_waist: 145.4e-6,
            idler_waist: 145.4e-6,
            pump_bandwidth: 30e12,
            pump_power_mw: 1.0,
            filter_half_widths: [10e12, 5e12, 5e12],
            filter_transmission: [1.0; 3],
        }
    }

    /// As [`SourceParams::degenerate_810`] with an 850 nm signal and the
    /// energy-conserving idler.
    pub fn nondegenerate_850() -> Self {
        let base = Self::degenerate_810();
        SourceParams {
            signal_wavelength: 850e-9,
            idler_wavelength: energy_conserving_idler(base.pump_wavelength, 850e-9),
            ..base
        }
    }

    pub fn with_waists(mut self, pump: f64, signal: f64, idler: f64) -> Self {
        self.pump_waist = pump;
        self.signal_waist = signal;
        self.idler_waist = idler;
        self
    }
}

/// A fully resolved source configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub crystal: CrystalSpec,
    pub geometry: BeamGeometry,
    pub filters: Filters,
    /// rad
    pub collinear_cut_angle: f64,
    pub cut_detuning: f64,
}

impl Source {
    pub fn build(p: &SourceParams) -> Result<Self> {
        check_energy_conservation(p.pump_wavelength, p.signal_wavelength, p.idler_wavelength, 1e-6)?;
        let angles = emission_angles(p.cut_detuning, p.signal_wavelength, p.idler_wavelength, &p.material)?;
        let crystal = CrystalSpec::new(p.material.clone(), p.length, angles.cut_angle, p.azimuth)?;
        let geometry = BeamGeometry {
            pump_waist: p.pump_waist,
            signal_waist: p.signal_waist,
            idler_waist: p.idler_waist,
            theta_s: angles.signal,
            theta_i: angles.idler,
            pump_bandwidth: p.pump_bandwidth,
            pump_power_mw: p.pump_power_mw,
            pump: OpticalMode::type_i(Role::Pump, p.pump_wavelength),
            signal: OpticalMode::type_i(Role::Signal, p.signal_wavelength),
            idler: OpticalMode::type_i(Role::Idler, p.idler_wavelength),
        };
        geometry.validate(p.length)?;
        let [hp, hs, hi] = p.filter_half_widths;
        let [tp, ts, ti] = p.filter_transmission;
        let filters = Filters {
            pump: FilterSpec::new(geometry.pump.omega(), hp, tp)?,
            signal: FilterSpec::new(geometry.signal.omega(), hs, ts)?,
            idler: FilterSpec::new(geometry.idler.omega(), hi, ti)?,
        };
        Ok(Source {
            crystal,
            geometry,
            filters,
            collinear_cut_angle: angles.cut_angle - p.cut_detuning,
            cut_detuning: p.cut_detuning,
        })
    }

    pub fn evaluator(&self, options: MetricsOptions) -> Result<Evaluator> {
        Ok(Evaluator::new(self.crystal.clone(), self.geometry.clone(), self.filters, options)?)
    }
}
