//! JSON run configuration in laboratory units (nm, µm, degrees, THz, mW).

use crate::dispersion::{energy_conserving_idler, DispersionError, Material};
use crate::jsa::{AlphaConvention, DispersionMode, JsaOptions, PhaseMatchingShape};
use crate::metrics::{MetricsOptions, SinglesWindow, Truncation};
use crate::schmidt::Decompose;
use crate::setup::SourceParams;
use crate::sweep::{OptimizeOptions, WaistPolicy};
use crate::units::FrequencyConvention;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("schema violation at '{field}': {message}")]
    Schema { field: String, message: String },
    #[error("invalid value for '{field}': {message}")]
    Invalid { field: String, message: String },
    #[error("energy conservation violated: 1/{pump_nm} != 1/{signal_nm} + 1/{idler_nm} (energy-conserving idler is {suggested_idler_nm:.4} nm)")]
    EnergyConservation { pump_nm: f64, signal_nm: f64, idler_nm: f64, suggested_idler_nm: f64 },
    #[error("crystal data: {0}")]
    Crystal(#[from] DispersionError),
}

type Result<T> = std::result::Result<T, ConfigError>;

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    #[serde(default = "default_crystal")]
    pub name: String,
    /// Crystal-data file, relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    pub length_um: f64,
    #[serde(default)]
    pub azimuth_deg: f64,
}

fn default_crystal() -> String {
    "BBO".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub half_width_thz: f64,
    #[serde(default = "one")]
    pub transmission: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    /// Derived from the signal and idler when absent.
    #[serde(default)]
    pub wavelength_nm: Option<f64>,
    /// Spectral half-width `B_p`.
    pub bandwidth_thz: f64,
    #[serde(default = "one")]
    pub power_mw: f64,
    pub waist_um: f64,
    pub filter: FilterConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionConfig {
    pub signal_wavelength_nm: f64,
    /// Derived when absent: equal to the signal when `degenerate`, otherwise
    /// from energy conservation.
    #[serde(default)]
    pub idler_wavelength_nm: Option<f64>,
    #[serde(default)]
    pub degenerate: bool,
    /// Signal waist; the idler waist defaults to the same value.
    pub waist_um: f64,
    #[serde(default)]
    pub idler_waist_um: Option<f64>,
    pub cut_detuning_deg: f64,
    #[serde(default = "unit_pair")]
    pub path_efficiency: [f64; 2],
}

fn unit_pair() -> [f64; 2] {
    [1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltersConfig {
    pub signal: FilterConfig,
    pub idler: FilterConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub grid_resolution: usize,
    pub dispersion_mode: DispersionMode,
    pub alpha_convention: AlphaConvention,
    pub decompose: Decompose,
    pub walk_off_enabled: bool,
    pub frequency_convention: FrequencyConvention,
    /// Highest Hermite-Gauss order per axis in the singles mode sum.
    pub truncation: usize,
    pub singles_window: SinglesWindow,
    pub phase_matching_shape: PhaseMatchingShape,
    pub check_convergence: bool,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            grid_resolution: 201,
            dispersion_mode: DispersionMode::Exact,
            alpha_convention: AlphaConvention::Consistent,
            decompose: Decompose::Amplitude,
            walk_off_enabled: false,
            frequency_convention: FrequencyConvention::Angular,
            truncation: Truncation::default().max_order,
            singles_window: SinglesWindow::Pair,
            phase_matching_shape: PhaseMatchingShape::Sinc,
            check_convergence: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Fixed,
    CoScale,
    #[default]
    PurityCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub pump_waist_range_um: [f64; 2],
    pub pump_waist_steps: usize,
    /// Collection-waist policy of the pump-waist sweep.
    pub policy: PolicyName,
    pub ratio_range: [f64; 2],
    pub ratio_steps: usize,
    pub optimize_coarse_steps: usize,
    pub scan_points: usize,
    pub scan_window: [f64; 2],
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            pump_waist_range_um: [50.0, 800.0],
            pump_waist_steps: 76,
            policy: PolicyName::PurityCondition,
            ratio_range: [0.3, 1.2],
            ratio_steps: 91,
            optimize_coarse_steps: 31,
            scan_points: 121,
            scan_window: [0.5, 1.2],
        }
    }
}

/// A run configuration as written in a file; [`RunConfig::load`] fills
/// every optional field so that the echoed copy is complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub crystal: CrystalConfig,
    pub pump: PumpConfig,
    pub collection: CollectionConfig,
    pub filters: FiltersConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// A validated configuration with its source directory, used to resolve
/// relative crystal-data paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<ResolvedConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base_dir)
    }

    pub fn from_json(text: &str, base_dir: PathBuf) -> Result<ResolvedConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        config.resolve(base_dir)
    }

    /// Fill derived wavelengths and validate ranges.
    pub fn resolve(mut self, base_dir: PathBuf) -> Result<ResolvedConfig> {
        self.fill_wavelengths()?;
        if self.collection.idler_waist_um.is_none() {
            self.collection.idler_waist_um = Some(self.collection.waist_um);
        }
        self.validate()?;
        let resolved = ResolvedConfig { config: self, base_dir };
        resolved.material()?;
        Ok(resolved)
    }

    fn fill_wavelengths(&mut self) -> Result<()> {
        let s = self.collection.signal_wavelength_nm;
        if !(s > 0.0) {
            return Err(invalid("collection.signal_wavelength_nm", "must be > 0"));
        }
        let idler = match (self.collection.idler_wavelength_nm, self.pump.wavelength_nm) {
            (Some(i), _) => i,
            (None, _) if self.collection.degenerate => s,
            (None, Some(p)) => {
                if !(p > 0.0 && p < s) {
                    return Err(invalid("pump.wavelength_nm", "must be > 0 and shorter than the signal"));
                }
                energy_conserving_idler(p, s)
            }
            (None, None) => {
                return Err(invalid(
                    "collection.idler_wavelength_nm",
                    "required unless the pump wavelength is given or degenerate is set",
                ))
            }
        };
        if !(idler > 0.0) {
            return Err(invalid("collection.idler_wavelength_nm", "must be > 0"));
        }
        let pump = self.pump.wavelength_nm.unwrap_or(1.0 / (1.0 / s + 1.0 / idler));
        let mismatch = (1.0 / pump - 1.0 / s - 1.0 / idler) * pump;
        if mismatch.abs() > 1e-6 {
            return Err(ConfigError::EnergyConservation {
                pump_nm: pump,
                signal_nm: s,
                idler_nm: idler,
                suggested_idler_nm: energy_conserving_idler(pump, s),
            });
        }
        self.pump.wavelength_nm = Some(pump);
        self.collection.idler_wavelength_nm = Some(idler);
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be a positive number, got {v}")))
            }
        };
        positive("crystal.length_um", self.crystal.length_um)?;
        positive("pump.bandwidth_thz", self.pump.bandwidth_thz)?;
        positive("pump.power_mw", self.pump.power_mw)?;
        positive("pump.waist_um", self.pump.waist_um)?;
        positive("collection.waist_um", self.collection.waist_um)?;
        positive("collection.idler_waist_um", self.collection.idler_waist_um.unwrap_or(1.0))?;
        let d = self.collection.cut_detuning_deg;
        if !(0.0..45.0).contains(&d) {
            return Err(invalid("collection.cut_detuning_deg", format!("must lie in [0, 45), got {d}")));
        }
        for (field, e) in ["collection.path_efficiency[0]", "collection.path_efficiency[1]"]
            .iter()
            .zip(self.collection.path_efficiency)
        {
            if !(e > 0.0 && e <= 1.0) {
                return Err(invalid(field, format!("must lie in (0, 1], got {e}")));
            }
        }
        for (field, f) in [
            ("pump.filter", &self.pump.filter),
            ("filters.signal", &self.filters.signal),
            ("filters.idler", &self.filters.idler),
        ] {
            positive(&format!("{field}.half_width_thz"), f.half_width_thz)?;
            if !(0.0..=1.0).contains(&f.transmission) {
                return Err(invalid(&format!("{field}.transmission"), "must lie in [0, 1]"));
            }
        }
        let n = &self.numerics;
        if !(64..=4001).contains(&n.grid_resolution) {
            return Err(invalid("numerics.grid_resolution", format!("must lie in [64, 4001], got {}", n.grid_resolution)));
        }
        if !(4..=30).contains(&n.truncation) {
            return Err(invalid("numerics.truncation", format!("must lie in [4, 30], got {}", n.truncation)));
        }
        let s = &self.sweep;
        let [lo, hi] = s.pump_waist_range_um;
        if !(lo > 0.0 && hi >= lo) {
            return Err(invalid("sweep.pump_waist_range_um", "need 0 < lo <= hi"));
        }
        let [lo, hi] = s.ratio_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(invalid("sweep.ratio_range", "need 0 < lo <= hi"));
        }
        let [lo, hi] = s.scan_window;
        if !(lo > 0.0 && hi > lo) {
            return Err(invalid("sweep.scan_window", "need 0 < lo < hi"));
        }
        for (field, v, min) in [
            ("sweep.pump_waist_steps", s.pump_waist_steps, 1),
            ("sweep.ratio_steps", s.ratio_steps, 1),
            ("sweep.optimize_coarse_steps", s.optimize_coarse_steps, 3),
            ("sweep.scan_points", s.scan_points, 3),
        ] {
            if v < min {
                return Err(invalid(field, format!("must be >= {min}, got {v}")));
            }
        }
        Ok(())
    }
}

impl ResolvedConfig {
    pub fn material(&self) -> Result<Material> {
        match &self.config.crystal.data_file {
            Some(p) => {
                let path = if p.is_absolute() { p.clone() } else { self.base_dir.join(p) };
                if !path.is_file() {
                    return Err(invalid("crystal.data_file", format!("{} does not exist", path.display())));
                }
                Ok(Material::load(&path)?)
            }
            None => Ok(Material::named(&self.config.crystal.name)?),
        }
    }

    fn thz(&self, v: f64) -> f64 {
        self.config.numerics.frequency_convention.thz_to_rad_per_s(v)
    }

    pub fn source_params(&self) -> Result<SourceParams> {
        let c = &self.config;
        let um = 1e-6;
        let nm = 1e-9;
        Ok(SourceParams {
            material: self.material()?,
            length: c.crystal.length_um * um,
            cut_detuning: c.collection.cut_detuning_deg.to_radians(),
            azimuth: c.crystal.azimuth_deg.to_radians(),
            pump_wavelength: c.pump.wavelength_nm.expect("resolved") * nm,
            signal_wavelength: c.collection.signal_wavelength_nm * nm,
            idler_wavelength: c.collection.idler_wavelength_nm.expect("resolved") * nm,
            pump_waist: c.pump.waist_um * um,
            signal_waist: c.collection.waist_um * um,
            idler_waist: c.collection.idler_waist_um.expect("resolved") * um,
            pump_bandwidth: self.thz(c.pump.bandwidth_thz),
            pump_power_mw: c.pump.power_mw,
            filter_half_widths: [
                self.thz(c.pump.filter.half_width_thz),
                self.thz(c.filters.signal.half_width_thz),
                self.thz(c.filters.idler.half_width_thz),
            ],
            filter_transmission: [
                c.pump.filter.transmission,
                c.filters.signal.transmission,
                c.filters.idler.transmission,
            ],
        })
    }

    pub fn metrics_options(&self) -> MetricsOptions {
        let n = &self.config.numerics;
        MetricsOptions {
            resolution: n.grid_resolution,
            jsa: JsaOptions {
                dispersion: n.dispersion_mode,
                walk_off: n.walk_off_enabled,
                shape: n.phase_matching_shape,
            },
            decompose: n.decompose,
            singles_window: n.singles_window,
            truncation: Truncation { max_order: n.truncation, ..Truncation::default() },
            path_efficiency: self.config.collection.path_efficiency,
            check_convergence: n.check_convergence,
        }
    }

    pub fn waist_policy(&self) -> WaistPolicy {
        match self.config.sweep.policy {
            PolicyName::Fixed => WaistPolicy::Fixed,
            PolicyName::CoScale => WaistPolicy::CoScale,
            PolicyName::PurityCondition => WaistPolicy::PurityCondition(self.config.numerics.alpha_convention),
        }
    }

    pub fn optimize_options(&self) -> OptimizeOptions {
        let s = &self.config.sweep;
        OptimizeOptions {
            pump_range: (s.pump_waist_range_um[0] * 1e-6, s.pump_waist_range_um[1] * 1e-6),
            coarse_steps: s.optimize_coarse_steps,
            policy: self.waist_policy(),
            alpha: self.config.numerics.alpha_convention,
            scan_points: s.scan_points,
            scan_window: (s.scan_window[0], s.scan_window[1]),
        }
    }
}
