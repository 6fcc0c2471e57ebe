//! Refractive indices and phase matching for negative uniaxial crystals.
//!
//! Indices come from a Sellmeier model loaded from a versioned crystal-data
//! file. Group velocities are evaluated analytically from the Sellmeier
//! derivative rather than by finite differences.

use crate::numeric::bracketed_root;
use crate::units::{angular_frequency, wavelength_of, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

/// Environment variable naming a directory of `<name>.json` crystal files that
/// take precedence over the built-in data.
pub const CRYSTAL_DIR_ENV: &str = "SPDC_LAB_CRYSTAL_DIR";

const BUILTIN_BBO: &str = include_str!("../data/bbo.json");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DispersionError {
    #[error("wavelength {wavelength_nm:.3} nm outside the validity window [{lo_nm}, {hi_nm}] nm of {crystal}")]
    OutOfWindow { crystal: String, wavelength_nm: f64, lo_nm: f64, hi_nm: f64 },
    #[error("non-physical index {index} at {wavelength_nm:.3} nm")]
    NonPhysicalIndex { index: f64, wavelength_nm: f64 },
    #[error("energy conservation violated: 1/{pump_nm} != 1/{signal_nm} + 1/{idler_nm} (energy-conserving idler is {suggested_idler_nm:.4} nm)")]
    EnergyConservation { pump_nm: f64, signal_nm: f64, idler_nm: f64, suggested_idler_nm: f64 },
    #[error("no phase-matching solution in (0, pi/2)")]
    NoPhaseMatching,
    #[error("no unique solution: phase mismatch vanishes for every cut angle")]
    NoUniqueSolution,
    #[error("root finder did not converge")]
    NoConvergence,
    #[error("total internal reflection at the exit face (n sin(theta) = {0})")]
    TotalInternalReflection(f64),
    #[error("invalid crystal specification: {0}")]
    InvalidCrystal(String),
    #[error("crystal data: {0}")]
    Data(String),
}

type Result<T> = std::result::Result<T, DispersionError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierPole {
    pub b: f64,
    /// µm²
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coef: f64,
    pub power: i32,
}

/// `n² = a + Σ b/(λ² − c) + Σ coef·λ^power` with λ in µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sellmeier {
    pub a: f64,
    #[serde(default)]
    pub poles: Vec<SellmeierPole>,
    #[serde(default)]
    pub poly: Vec<PolyTerm>,
}

impl Sellmeier {
    /// Dispersionless medium with index `n`.
    pub fn constant(n: f64) -> Self {
        Sellmeier { a: n * n, poles: Vec::new(), poly: Vec::new() }
    }

    pub fn n_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let poles: f64 = self.poles.iter().map(|p| p.b / (l2 - p.c)).sum();
        let poly: f64 = self.poly.iter().map(|t| t.coef * lambda_um.powi(t.power)).sum();
        self.a + poles + poly
    }

    /// d(n²)/dλ, per µm.
    pub fn dn_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let poles: f64 = self
            .poles
            .iter()
            .map(|p| -2.0 * p.b * lambda_um / ((l2 - p.c) * (l2 - p.c)))
            .sum();
        let poly: f64 = self
            .poly
            .iter()
            .filter(|t| t.power != 0)
            .map(|t| t.coef * t.power as f64 * lambda_um.powi(t.power - 1))
            .sum();
        poles + poly
    }
}

/// Optical material data as stored in a crystal-data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub name: String,
    pub sellmeier_o: Sellmeier,
    pub sellmeier_e: Sellmeier,
    pub validity_window_nm: [f64; 2],
    #[serde(rename = "d11_pm_per_V")]
    pub d11_pm_per_v: f64,
    #[serde(rename = "d31_pm_per_V")]
    pub d31_pm_per_v: f64,
    #[serde(default)]
    pub source_citations: Vec<String>,
}

fn default_schema() -> u32 {
    1
}

impl Material {
    /// β-barium borate, from the bundled data file.
    pub fn bbo() -> Self {
        Self::from_json(BUILTIN_BBO).expect("bundled BBO data is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Material =
            serde_json::from_str(text).map_err(|e| DispersionError::Data(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DispersionError::Data(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Resolve a crystal by name: `$SPDC_LAB_CRYSTAL_DIR/<name>.json` when the
    /// variable is set and the file exists, otherwise the built-in data.
    pub fn named(name: &str) -> Result<Self> {
        if let Some(dir) = std::env::var_os(CRYSTAL_DIR_ENV) {
            for candidate in [name.to_string(), name.to_lowercase()] {
                let path = Path::new(&dir).join(format!("{candidate}.json"));
                if path.is_file() {
                    return Self::load(&path);
                }
            }
        }
        match name.to_ascii_uppercase().as_str() {
            "BBO" => Ok(Self::bbo()),
            _ => Err(DispersionError::Data(format!("unknown crystal '{name}'"))),
        }
    }

    /// A dispersionless toy crystal (n_o, n_e constant), handy for limits.
    pub fn dispersionless(n_o: f64, n_e: f64) -> Self {
        Material {
            schema_version: 1,
            name: "dispersionless".into(),
            sellmeier_o: Sellmeier::constant(n_o),
            sellmeier_e: Sellmeier::constant(n_e),
            validity_window_nm: [100.0, 5000.0],
            d11_pm_per_v: 1.0,
            d31_pm_per_v: 0.0,
            source_citations: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.validity_window_nm;
        if !(lo > 0.0 && hi > lo) {
            return Err(DispersionError::Data(format!("bad validity window [{lo}, {hi}]")));
        }
        // Spot-check the window for n >= 1.
        for k in 0..=16 {
            let l = lo + (hi - lo) * k as f64 / 16.0;
            let lm = l * 1e-9;
            self.n_o(lm)?;
            self.n_e_principal(lm)?;
        }
        Ok(())
    }

    fn check_window(&self, wavelength: f64) -> Result<f64> {
        let nm = wavelength * 1e9;
        let [lo, hi] = self.validity_window_nm;
        if !(nm >= lo && nm <= hi) {
            return Err(DispersionError::OutOfWindow {
                crystal: self.name.clone(),
                wavelength_nm: nm,
                lo_nm: lo,
                hi_nm: hi,
            });
        }
        Ok(wavelength * 1e6)
    }

    fn index(&self, s: &Sellmeier, wavelength: f64) -> Result<f64> {
        let um = self.check_window(wavelength)?;
        let n2 = s.n_squared(um);
        if !(n2 >= 1.0) || !n2.is_finite() {
            return Err(DispersionError::NonPhysicalIndex {
                index: n2.max(0.0).sqrt(),
                wavelength_nm: wavelength * 1e9,
            });
        }
        Ok(n2.sqrt())
    }

    pub fn n_o(&self, wavelength: f64) -> Result<f64> {
        self.index(&self.sellmeier_o, wavelength)
    }

    pub fn n_e_principal(&self, wavelength: f64) -> Result<f64> {
        self.index(&self.sellmeier_e, wavelength)
    }

    /// Extraordinary index for propagation at `theta` from the optic axis.
    pub fn n_e(&self, wavelength: f64, theta: f64) -> Result<f64> {
        let no = self.n_o(wavelength)?;
        let ne = self.n_e_principal(wavelength)?;
        let (s, c) = theta.sin_cos();
        Ok(1.0 / (c * c / (no * no) + s * s / (ne * ne)).sqrt())
    }

    /// `λ·dn/dλ` (dimensionless) for the given polarization and angle.
    fn lambda_dn_dlambda(&self, wavelength: f64, pol: Polarization, theta: f64) -> Result<f64> {
        let um = self.check_window(wavelength)?;
        match pol {
            Polarization::Ordinary => {
                let n = self.n_o(wavelength)?;
                Ok(um * self.sellmeier_o.dn_squared(um) / (2.0 * n))
            }
            Polarization::Extraordinary => {
                let no2 = self.sellmeier_o.n_squared(um);
                let ne2 = self.sellmeier_e.n_squared(um);
                let (s, c) = theta.sin_cos();
                let inv = c * c / no2 + s * s / ne2;
                let dinv = -c * c * self.sellmeier_o.dn_squared(um) / (no2 * no2)
                    - s * s * self.sellmeier_e.dn_squared(um) / (ne2 * ne2);
                Ok(um * (-0.5 * inv.powf(-1.5) * dinv))
            }
        }
    }

    pub fn d_eff(&self, theta: f64, phi: f64) -> f64 {
        effective_nonlinearity(theta, phi, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Pump,
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalMode {
    pub role: Role,
    pub polarization: Polarization,
    /// Central vacuum wavelength, m.
    pub wavelength: f64,
}

impl OpticalMode {
    /// Type-I assignment in a negative uniaxial crystal: extraordinary pump,
    /// ordinary signal and idler.
    pub fn type_i(role: Role, wavelength: f64) -> Self {
        let polarization = match role {
            Role::Pump => Polarization::Extraordinary,
            Role::Signal | Role::Idler => Polarization::Ordinary,
        };
        OpticalMode { role, polarization, wavelength }
    }

    /// Central angular frequency, rad/s.
    pub fn omega(&self) -> f64 {
        angular_frequency(self.wavelength)
    }

    pub fn index(&self, material: &Material, theta: f64) -> Result<f64> {
        self.index_at(self.wavelength, material, theta)
    }

    fn index_at(&self, wavelength: f64, material: &Material, theta: f64) -> Result<f64> {
        match self.polarization {
            Polarization::Ordinary => material.n_o(wavelength),
            Polarization::Extraordinary => material.n_e(wavelength, theta),
        }
    }
}

/// Material plus the geometric cut of a particular crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub material: Material,
    /// Crystal length, m.
    pub length: f64,
    /// Angle between optic axis and pump propagation, rad.
    pub cut_angle: f64,
    /// Azimuth of the interaction plane, rad.
    pub azimuth: f64,
}

impl CrystalSpec {
    pub fn new(material: Material, length: f64, cut_angle: f64, azimuth: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(DispersionError::InvalidCrystal(format!("length must be > 0, got {length}")));
        }
        if !(cut_angle > 0.0 && cut_angle < FRAC_PI_2) {
            return Err(DispersionError::InvalidCrystal(format!(
                "cut angle must lie in (0, pi/2), got {cut_angle}"
            )));
        }
        Ok(CrystalSpec { material, length, cut_angle, azimuth })
    }

    /// pm/V
    pub fn d_eff(&self) -> f64 {
        effective_nonlinearity(self.cut_angle, self.azimuth, &self.material)
    }
}

pub fn index_ordinary(wavelength: f64, material: &Material) -> Result<f64> {
    material.n_o(wavelength)
}

/// Angle-dependent extraordinary index, `1/n² = cos²θ/n_o² + sin²θ/n_e²`.
pub fn index_extraordinary(wavelength: f64, theta: f64, material: &Material) -> Result<f64> {
    material.n_e(wavelength, theta)
}

/// `k = n(ω)·ω/c` for the mode's polarization; `theta` only matters for
/// extraordinary waves.
pub fn wave_number(omega: f64, mode: &OpticalMode, theta: f64, material: &Material) -> Result<f64> {
    let n = mode.index_at(wavelength_of(omega), material, theta)?;
    Ok(n * omega / SPEED_OF_LIGHT)
}

/// Inverse group velocity `dk/dω` at the mode's central frequency, s/m.
pub fn inverse_group_velocity(mode: &OpticalMode, theta: f64, material: &Material) -> Result<f64> {
    let n = mode.index(material, theta)?;
    let ldn = material.lambda_dn_dlambda(mode.wavelength, mode.polarization, theta)?;
    Ok((n - ldn) / SPEED_OF_LIGHT)
}

/// `d_eff = d11·cos3φ·cosθ − d31·sinθ` in pm/V (Type-I, ooe).
pub fn effective_nonlinearity(theta: f64, phi: f64, material: &Material) -> f64 {
    material.d11_pm_per_v * (3.0 * phi).cos() * theta.cos() - material.d31_pm_per_v * theta.sin()
}

/// Energy-conserving idler wavelength for a pump/signal pair.
pub fn energy_conserving_idler(pump: f64, signal: f64) -> f64 {
    1.0 / (1.0 / pump - 1.0 / signal)
}

pub fn check_energy_conservation(pump: f64, signal: f64, idler: f64, rel_tol: f64) -> Result<()> {
    let mismatch = (1.0 / pump - 1.0 / signal - 1.0 / idler) * pump;
    if mismatch.abs() > rel_tol {
        return Err(DispersionError::EnergyConservation {
            pump_nm: pump * 1e9,
            signal_nm: signal * 1e9,
            idler_nm: idler * 1e9,
            suggested_idler_nm: energy_conserving_idler(pump, signal) * 1e9,
        });
    }
    Ok(())
}

struct CentralWaveNumbers {
    pump: OpticalMode,
    k_s: f64,
    k_i: f64,
}

impl CentralWaveNumbers {
    fn new(signal: f64, idler: f64, material: &Material) -> Result<Self> {
        let pump_wl = 1.0 / (1.0 / signal + 1.0 / idler);
        let s = OpticalMode::type_i(Role::Signal, signal);
        let i = OpticalMode::type_i(Role::Idler, idler);
        Ok(CentralWaveNumbers {
            pump: OpticalMode::type_i(Role::Pump, pump_wl),
            k_s: wave_number(s.omega(), &s, 0.0, material)?,
            k_i: wave_number(i.omega(), &i, 0.0, material)?,
        })
    }

    fn k_p(&self, theta: f64, material: &Material) -> Result<f64> {
        wave_number(self.pump.omega(), &self.pump, theta, material)
    }
}

/// Cut angle giving collinear phase matching `k_p(θ) = k_s + k_i`, rad.
pub fn collinear_cut_angle(pump: f64, signal: f64, idler: f64, material: &Material) -> Result<f64> {
    check_energy_conservation(pump, signal, idler, 1e-6)?;
    let waves = CentralWaveNumbers::new(signal, idler, material)?;
    // Fail fast on out-of-window pump before entering the closure.
    waves.k_p(0.0, material)?;
    let mismatch = |t: f64| waves.k_p(t, material).map(|kp| kp - waves.k_s - waves.k_i);
    let (lo, hi) = (1e-9, FRAC_PI_2 - 1e-9);
    let (flo, fhi) = (mismatch(lo)?, mismatch(hi)?);
    let scale = waves.k_s + waves.k_i;
    if flo.abs() < 1e-12 * scale && fhi.abs() < 1e-12 * scale {
        return Err(DispersionError::NoUniqueSolution);
    }
    if flo.signum() == fhi.signum() {
        return Err(DispersionError::NoPhaseMatching);
    }
    bracketed_root(|t| mismatch(t).unwrap_or(f64::NAN), lo, hi, 1e-10)
        .map_err(|_| DispersionError::NoConvergence)
}

/// Internal signal/idler emission angles (rad, both measured from the pump).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionAngles {
    pub signal: f64,
    pub idler: f64,
    /// Total cut angle used, rad.
    pub cut_angle: f64,
}

/// Solve `Δk_y = 0` and `Δk_z = 0` at the central frequencies for a crystal cut
/// `cut_detuning` beyond the collinear angle.
pub fn emission_angles(
    cut_detuning: f64,
    signal: f64,
    idler: f64,
    material: &Material,
) -> Result<EmissionAngles> {
    if !(cut_detuning >= 0.0) {
        return Err(DispersionError::InvalidCrystal(format!(
            "cut detuning must be >= 0, got {cut_detuning}"
        )));
    }
    let pump = 1.0 / (1.0 / signal + 1.0 / idler);
    let theta_c = collinear_cut_angle(pump, signal, idler, material)?;
    let cut_angle = theta_c + cut_detuning;
    let collinear = EmissionAngles { signal: 0.0, idler: 0.0, cut_angle };
    if cut_detuning == 0.0 {
        return Ok(collinear);
    }
    let waves = CentralWaveNumbers::new(signal, idler, material)?;
    let k_p = waves.k_p(cut_angle, material)?;
    let (k_s, k_i) = (waves.k_s, waves.k_i);
    let idler_angle = |ts: f64| (k_s * ts.sin() / k_i).clamp(-1.0, 1.0).asin();
    let dkz = |ts: f64| k_p - k_s * ts.cos() - k_i * idler_angle(ts).cos();
    if dkz(0.0) >= 0.0 {
        log::warn!(
            "cut detuning {cut_detuning} rad is below the non-collinear threshold; using collinear emission"
        );
        return Ok(collinear);
    }
    let ts_max = (k_i / k_s).min(1.0).asin();
    let ts = bracketed_root(dkz, 0.0, ts_max, 1e-13).map_err(|_| DispersionError::NoConvergence)?;
    Ok(EmissionAngles { signal: ts, idler: idler_angle(ts), cut_angle })
}

/// Refraction of an ordinary ray out of the crystal: `sin θ_ext = n·sin θ_int`.
pub fn external_angle(theta_internal: f64, wavelength: f64, material: &Material) -> Result<f64> {
    let s = material.n_o(wavelength)? * theta_internal.sin();
    if s.abs() > 1.0 {
        return Err(DispersionError::TotalInternalReflection(s));
    }
    Ok(s.asin())
}

/// Poynting-vector walk-off of an extraordinary wave,
/// `ρ = atan[(n_o²/n_e²)·tanθ] − θ`, rad.
pub fn walk_off_angle(theta: f64, wavelength: f64, material: &Material) -> Result<f64> {
    let no = material.n_o(wavelength)?;
    let ne = material.n_e_principal(wavelength)?;
    let (s, c) = theta.sin_cos();
    Ok((no * no * s).atan2(ne * ne * c) - theta)
}
