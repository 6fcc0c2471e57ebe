//! Joint spectral amplitude of a noncollinear Type-I source.
//!
//! The amplitude factorises into a transverse overlap set by the beam waists
//! and emission angles ([`GeometryFactors`]), the longitudinal phase-matching
//! function of the crystal, and the Gaussian pump envelope. Dispersion enters
//! only through the phase mismatch, so [`MismatchTable`] caches it on a
//! frequency grid and lets waist sweeps re-evaluate the amplitude cheaply.

use crate::dispersion::{
    inverse_group_velocity, wave_number, CrystalSpec, DispersionError, OpticalMode,
};
use crate::numeric::{linspace, sinc, trapezoid_weights, LegendreRule};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Width constant of the Gaussian fit to `sinc`, `sinc(x) ≈ exp(-α x²)`.
pub const SINC_GAUSSIAN_ALPHA: f64 = 0.455;

/// Minimum samples per axis accepted by [`jsa_grid`].
pub const MIN_GRID_RESOLUTION: usize = 64;

/// Largest emission angle treated as "small".
pub const MAX_EMISSION_ANGLE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JsaError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error("grid resolution {0} below the minimum of {MIN_GRID_RESOLUTION} per axis")]
    ResolutionTooLow(usize),
    #[error("invalid beam geometry: {0}")]
    InvalidGeometry(String),
    #[error("purity condition unsatisfiable; increase B_p, cut detuning, or W0p")]
    PurityUnsatisfiable,
    #[error("non-finite joint amplitude at ({omega_s:e}, {omega_i:e}) rad/s")]
    NonFinite { omega_s: f64, omega_i: f64 },
}

type Result<T> = std::result::Result<T, JsaError>;

/// Waists, emission angles and pump parameters of one source configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    /// 1/e field radius of the pump at its focus, m.
    pub pump_waist: f64,
    pub signal_waist: f64,
    pub idler_waist: f64,
    /// Internal emission angles relative to the pump, rad.
    pub theta_s: f64,
    pub theta_i: f64,
    /// Pump spectral half-width `B_p`, rad/s.
    pub pump_bandwidth: f64,
    pub pump_power_mw: f64,
    pub pump: OpticalMode,
    pub signal: OpticalMode,
    pub idler: OpticalMode,
}

impl BeamGeometry {
    pub fn with_waists(&self, pump: f64, signal: f64, idler: f64) -> Self {
        BeamGeometry { pump_waist: pump, signal_waist: signal, idler_waist: idler, ..self.clone() }
    }

    /// Checks waists and angles; logs a warning when a Rayleigh range is
    /// shorter than ten crystal lengths.
    pub fn validate(&self, crystal_length: f64) -> Result<()> {
        let waists = [
            ("pump", self.pump_waist, &self.pump),
            ("signal", self.signal_waist, &self.signal),
            ("idler", self.idler_waist, &self.idler),
        ];
        for (name, w, mode) in waists {
            if !(w > 0.0 && w.is_finite()) {
                return Err(JsaError::InvalidGeometry(format!("{name} waist must be > 0, got {w}")));
            }
            let z_r = PI * w * w / mode.wavelength;
            if z_r <= 10.0 * crystal_length {
                log::warn!(
                    "{name} Rayleigh range {:.3} mm is not >> crystal length {:.3} mm",
                    z_r * 1e3,
                    crystal_length * 1e3
                );
            }
        }
        for (name, t) in [("signal", self.theta_s), ("idler", self.theta_i)] {
            if !(0.0..MAX_EMISSION_ANGLE).contains(&t) {
                return Err(JsaError::InvalidGeometry(format!(
                    "{name} emission angle {t} rad outside [0, {MAX_EMISSION_ANGLE})"
                )));
            }
        }
        if !(self.pump_bandwidth > 0.0) {
            return Err(JsaError::InvalidGeometry("pump bandwidth must be > 0".into()));
        }
        if !(self.pump_power_mw > 0.0) {
            return Err(JsaError::InvalidGeometry("pump power must be > 0".into()));
        }
        Ok(())
    }
}

/// Transverse overlap coefficients, all in 1/m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryFactors {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub h: f64,
}

pub fn geometry_factors(geom: &BeamGeometry) -> GeometryFactors {
    let (p2, s2, i2) = (
        geom.pump_waist.powi(2),
        geom.signal_waist.powi(2),
        geom.idler_waist.powi(2),
    );
    let (ss, cs) = geom.theta_s.sin_cos();
    let (si, ci) = geom.theta_i.sin_cos();
    let a = 1.0 / p2 + 1.0 / s2 + 1.0 / i2;
    let c = 1.0 / p2 + cs * cs / s2 + ci * ci / i2;
    let d = (2.0 * geom.theta_s).sin() / s2 - (2.0 * geom.theta_i).sin() / i2;
    let f = ss * ss / s2 + si * si / i2;
    let h = (f - d * d / (4.0 * c)).max(0.0);
    GeometryFactors { a, c, d, f, h }
}

/// Inverse group velocities `N_j = dk_j/dω` at the central frequencies, s/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupIndices {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionMode {
    /// Full Sellmeier dispersion at the detuned frequencies.
    #[default]
    Exact,
    /// First-order expansion in the detunings.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMatchingShape {
    #[default]
    Sinc,
    /// `sinc(x)` replaced by `exp(-0.455 x²)`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JsaOptions {
    #[serde(default)]
    pub dispersion: DispersionMode,
    #[serde(default)]
    pub walk_off: bool,
    #[serde(default)]
    pub shape: PhaseMatchingShape,
}

/// Dispersion data of one crystal cut and emission geometry, independent of
/// the beam waists.
#[derive(Debug, Clone)]
pub struct PhaseMatching {
    crystal: CrystalSpec,
    theta_s: f64,
    theta_i: f64,
    pump: OpticalMode,
    signal: OpticalMode,
    idler: OpticalMode,
    pub group: GroupIndices,
}

impl PhaseMatching {
    pub fn new(geom: &BeamGeometry, crystal: &CrystalSpec) -> Result<Self> {
        let m = &crystal.material;
        let theta = crystal.cut_angle;
        let group = GroupIndices {
            pump: inverse_group_velocity(&geom.pump, theta, m)?,
            signal: inverse_group_velocity(&geom.signal, theta, m)?,
            idler: inverse_group_velocity(&geom.idler, theta, m)?,
        };
        Ok(PhaseMatching {
            crystal: crystal.clone(),
            theta_s: geom.theta_s,
            theta_i: geom.theta_i,
            pump: geom.pump,
            signal: geom.signal,
            idler: geom.idler,
            group,
        })
    }

    pub fn crystal(&self) -> &CrystalSpec {
        &self.crystal
    }

    /// `(Δk_y, Δk_z)` with every wave number evaluated at the detuned
    /// frequencies; the pump frequency is `ω_s + ω_i`.
    pub fn exact(&self, omega_s: f64, omega_i: f64) -> Result<(f64, f64)> {
        let ws = self.signal.omega() + omega_s;
        let wi = self.idler.omega() + omega_i;
        if !(ws > 0.0 && wi > 0.0) {
            return Err(JsaError::InvalidGeometry(format!(
                "detuned frequencies must stay positive ({ws:e}, {wi:e})"
            )));
        }
        let m = &self.crystal.material;
        let theta = self.crystal.cut_angle;
        let ks = wave_number(ws, &self.signal, theta, m)?;
        let ki = wave_number(wi, &self.idler, theta, m)?;
        let kp = wave_number(ws + wi, &self.pump, theta, m)?;
        let dky = ks * self.theta_s.sin() - ki * self.theta_i.sin();
        let dkz = kp - ks * self.theta_s.cos() - ki * self.theta_i.cos();
        Ok((dky, dkz))
    }

    pub fn linear(&self, omega_s: f64, omega_i: f64) -> (f64, f64) {
        phase_mismatch_linear(omega_s, omega_i, &self.group, self.theta_s, self.theta_i)
    }

    pub fn mismatch(&self, omega_s: f64, omega_i: f64, mode: DispersionMode) -> Result<(f64, f64)> {
        match mode {
            DispersionMode::Exact => self.exact(omega_s, omega_i),
            DispersionMode::Linear => Ok(self.linear(omega_s, omega_i)),
        }
    }
}

/// Exact transverse and longitudinal phase mismatch, rad/m.
pub fn phase_mismatch_exact(
    omega_s: f64,
    omega_i: f64,
    geom: &BeamGeometry,
    crystal: &CrystalSpec,
) -> Result<(f64, f64)> {
    PhaseMatching::new(geom, crystal)?.exact(omega_s, omega_i)
}

/// Mismatch to first order in the detunings (the zero-order terms vanish at
/// the phase-matched centre).
pub fn phase_mismatch_linear(
    omega_s: f64,
    omega_i: f64,
    n: &GroupIndices,
    theta_s: f64,
    theta_i: f64,
) -> (f64, f64) {
    let dky = n.signal * omega_s * theta_s.sin() - n.idler * omega_i * theta_i.sin();
    let dkz = n.pump * (omega_s + omega_i)
        - n.signal * omega_s * theta_s.cos()
        - n.idler * omega_i * theta_i.cos();
    (dky, dkz)
}

/// `exp(-α x²)` with α = 0.455.
pub fn sinc_gaussian(x: f64) -> f64 {
    (-SINC_GAUSSIAN_ALPHA * x * x).exp()
}

fn longitudinal(dkz: f64, length: f64, shape: PhaseMatchingShape) -> f64 {
    let x = 0.5 * dkz * length;
    length
        * match shape {
            PhaseMatchingShape::Sinc => sinc(x),
            PhaseMatchingShape::Gaussian => sinc_gaussian(x),
        }
}

/// `∫_{-L/2}^{L/2} exp(-H z² - i Δk_z z) dz`.
pub fn walk_off_integral(dkz: f64, h: f64, length: f64) -> Complex64 {
    WalkOffRule::converged(h, length, dkz.abs()).integrate(dkz)
}

/// A Gauss-Legendre rule on the crystal length with the walk-off Gaussian
/// folded into the weights, sized for a range of `|Δk_z|`.
#[derive(Debug, Clone)]
pub struct WalkOffRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl WalkOffRule {
    fn with_points(points: usize, h: f64, length: f64) -> Self {
        let rule = LegendreRule::new(points, -0.5 * length, 0.5 * length);
        let weights = rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * (-h * z * z).exp()).collect();
        WalkOffRule { nodes: rule.nodes, weights }
    }

    /// Doubles the node count until the integral at `max_dkz` changes by less
    /// than 1e-10 of `∫exp(-Hz²)dz`.
    pub fn converged(h: f64, length: f64, max_dkz: f64) -> Self {
        let mut points = 8;
        let mut rule = Self::with_points(points, h, length);
        let mass: f64 = rule.weights.iter().sum();
        let mut prev = rule.integrate(max_dkz);
        while points < 4096 {
            points *= 2;
            let next_rule = Self::with_points(points, h, length);
            let next = next_rule.integrate(max_dkz);
            let done = (next - prev).norm() <= 1e-10 * mass;
            rule = next_rule;
            prev = next;
            if done {
                break;
            }
        }
        rule
    }

    pub fn integrate(&self, dkz: f64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| Complex64::from_polar(w, -dkz * z))
            .sum()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Joint amplitude at one detuning pair.
pub fn mode_function(
    omega_s: f64,
    omega_i: f64,
    geom: &BeamGeometry,
    crystal: &CrystalSpec,
    options: JsaOptions,
) -> Result<Complex64> {
    let pm = PhaseMatching::new(geom, crystal)?;
    let (dky, dkz) = pm.mismatch(omega_s, omega_i, options.dispersion)?;
    let g = geometry_factors(geom);
    let z = if options.walk_off {
        walk_off_integral(dkz, g.h, crystal.length)
    } else {
        Complex64::new(longitudinal(dkz, crystal.length, options.shape), 0.0)
    };
    Ok(z * transverse_envelope(&g, dky, omega_s + omega_i, geom.pump_bandwidth))
}

/// `π/√(AC) · exp(-Δk_y²/4C - Ω_p²/4B_p²)`.
pub fn transverse_envelope(g: &GeometryFactors, dky: f64, omega_p: f64, bandwidth: f64) -> f64 {
    PI / (g.a * g.c).sqrt() * (-dky * dky / (4.0 * g.c) - pump_exponent(omega_p, bandwidth)).exp()
}

fn pump_exponent(omega_p: f64, bandwidth: f64) -> f64 {
    omega_p * omega_p / (4.0 * bandwidth * bandwidth)
}

/// Uniform detuning grid, rad/s relative to the central signal and idler
/// frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    pub signal: (f64, f64),
    pub idler: (f64, f64),
}

impl GridSpec {
    pub fn new(resolution: usize, signal: (f64, f64), idler: (f64, f64)) -> Result<Self> {
        if resolution < 2 {
            return Err(JsaError::ResolutionTooLow(resolution));
        }
        Ok(GridSpec { resolution, signal, idler })
    }

    /// Same bounds, `2N - 1` samples (every original sample retained).
    pub fn refined(&self) -> Self {
        GridSpec { resolution: 2 * self.resolution - 1, ..*self }
    }

    pub fn signal_samples(&self) -> Vec<f64> {
        linspace(self.signal.0, self.signal.1, self.resolution)
    }

    pub fn idler_samples(&self) -> Vec<f64> {
        linspace(self.idler.0, self.idler.1, self.resolution)
    }

    /// 2-D trapezoid weights, row-major (signal index major).
    pub fn weights(&self) -> Vec<f64> {
        let n = self.resolution;
        let ws = trapezoid_weights(n, (self.signal.1 - self.signal.0) / (n - 1) as f64);
        let wi = trapezoid_weights(n, (self.idler.1 - self.idler.0) / (n - 1) as f64);
        ws.iter().flat_map(|a| wi.iter().map(move |b| a * b)).collect()
    }
}

/// Phase mismatch sampled on a [`GridSpec`], row-major (signal index major).
#[derive(Debug, Clone)]
pub struct MismatchTable {
    pub spec: GridSpec,
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
    pub dky: Vec<f64>,
    pub dkz: Vec<f64>,
}

impl MismatchTable {
    pub fn new(spec: GridSpec, pm: &PhaseMatching, mode: DispersionMode) -> Result<Self> {
        let omega_s = spec.signal_samples();
        let omega_i = spec.idler_samples();
        let rows: Vec<Vec<(f64, f64)>> = omega_s
            .par_iter()
            .map(|&os| omega_i.iter().map(|&oi| pm.mismatch(os, oi, mode)).collect())
            .collect::<Result<_>>()?;
        let (dky, dkz) = rows.into_iter().flatten().unzip();
        Ok(MismatchTable { spec, omega_s, omega_i, dky, dkz })
    }

    pub fn len(&self) -> usize {
        self.dky.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dky.is_empty()
    }

    pub fn omega_at(&self, index: usize) -> (f64, f64) {
        let n = self.omega_i.len();
        (self.omega_s[index / n], self.omega_i[index % n])
    }

    pub fn max_abs_dkz(&self) -> f64 {
        self.dkz.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Joint amplitude for a set of waists, row-major.
    pub fn amplitude(
        &self,
        geom: &BeamGeometry,
        length: f64,
        options: JsaOptions,
    ) -> Result<Vec<Complex64>> {
        let g = geometry_factors(geom);
        let rule = options
            .walk_off
            .then(|| WalkOffRule::converged(g.h, length, self.max_abs_dkz()));
        let values: Vec<Complex64> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (os, oi) = self.omega_at(k);
                let z = match &rule {
                    Some(r) => r.integrate(self.dkz[k]),
                    None => Complex64::new(longitudinal(self.dkz[k], length, options.shape), 0.0),
                };
                z * transverse_envelope(&g, self.dky[k], os + oi, geom.pump_bandwidth)
            })
            .collect();
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            let (omega_s, omega_i) = self.omega_at(k);
            return Err(JsaError::NonFinite { omega_s, omega_i });
        }
        Ok(values)
    }
}

/// Sampled joint spectral amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
    /// Rows index the signal detuning, columns the idler detuning.
    pub amplitude: DMatrix<Complex64>,
    /// Scale making `∫∫|𝒩 Φ|² dΩ_s dΩ_i = 1`.
    pub normalization: f64,
}

#[derive(Serialize)]
struct JsaGridJson<'a> {
    schema_version: u32,
    omega_s_rad_per_s: &'a [f64],
    omega_i_rad_per_s: &'a [f64],
    normalization: f64,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl JsaGrid {
    pub fn from_table(table: &MismatchTable, values: Vec<Complex64>) -> Self {
        let (ns, ni) = (table.omega_s.len(), table.omega_i.len());
        let amplitude = DMatrix::from_row_iterator(ns, ni, values);
        let norm2: f64 = amplitude
            .iter()
            .zip(table.spec.weights_column_major())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum();
        let normalization = if norm2 > 0.0 { 1.0 / norm2.sqrt() } else { 0.0 };
        JsaGrid {
            omega_s: table.omega_s.clone(),
            omega_i: table.omega_i.clone(),
            amplitude,
            normalization,
        }
    }

    /// Joint spectral intensity `|Φ|²`.
    pub fn intensity(&self) -> DMatrix<f64> {
        self.amplitude.map(|v| v.norm_sqr())
    }

    pub fn is_real(&self) -> bool {
        self.amplitude.iter().all(|v| v.im == 0.0)
    }

    /// `(row, col)` of the largest `|Φ|`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for j in 0..self.amplitude.ncols() {
            for i in 0..self.amplitude.nrows() {
                let v = self.amplitude[(i, j)].norm_sqr();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        (best.0, best.1)
    }

    /// Columns: `omega_s_rad_per_s, omega_i_rad_per_s, re, im, abs2`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "omega_s_rad_per_s,omega_i_rad_per_s,re,im,abs2")?;
        for (i, os) in self.omega_s.iter().enumerate() {
            for (j, oi) in self.omega_i.iter().enumerate() {
                let v = self.amplitude[(i, j)];
                writeln!(w, "{os:e},{oi:e},{:e},{:e},{:e}", v.re, v.im, v.norm_sqr())?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            self.amplitude.row_iter().map(|r| r.iter().map(f).collect()).collect()
        };
        serde_json::to_value(JsaGridJson {
            schema_version: 1,
            omega_s_rad_per_s: &self.omega_s,
            omega_i_rad_per_s: &self.omega_i,
            normalization: self.normalization,
            re: rows(|v| v.re),
            im: rows(|v| v.im),
        })
        .expect("grid serialises")
    }
}

impl GridSpec {
    fn weights_column_major(&self) -> Vec<f64> {
        let n = self.resolution;
        let ws = trapezoid_weights(n, (self.signal.1 - self.signal.0) / (n - 1) as f64);
        let wi = trapezoid_weights(n, (self.idler.1 - self.idler.0) / (n - 1) as f64);
        wi.iter().flat_map(|b| ws.iter().map(move |a| a * b)).collect()
    }
}

/// Sample the joint amplitude on `spec`.
pub fn jsa_grid(
    spec: GridSpec,
    geom: &BeamGeometry,
    crystal: &CrystalSpec,
    options: JsaOptions,
) -> Result<JsaGrid> {
    if spec.resolution < MIN_GRID_RESOLUTION {
        return Err(JsaError::ResolutionTooLow(spec.resolution));
    }
    let pm = PhaseMatching::new(geom, crystal)?;
    let table = MismatchTable::new(spec, &pm, options.dispersion)?;
    let values = table.amplitude(geom, crystal.length, options)?;
    Ok(JsaGrid::from_table(&table, values))
}

/// How the Gaussian sinc fit enters the δ coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaConvention {
    /// α to the first power, as obtained by substituting the fit into the
    /// amplitude.
    #[default]
    Consistent,
    /// α² in place of α.
    #[serde(alias = "paper_literal", alias = "paper")]
    Squared,
}

impl AlphaConvention {
    pub fn factor(self) -> f64 {
        match self {
            AlphaConvention::Consistent => SINC_GAUSSIAN_ALPHA,
            AlphaConvention::Squared => SINC_GAUSSIAN_ALPHA * SINC_GAUSSIAN_ALPHA,
        }
    }
}

/// Amplitude `∝ exp(-δ_s Ω_s² - δ_i Ω_i² - δ_si Ω_s Ω_i)` in the Gaussian
/// approximation. Units s².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCoefficients {
    pub delta_s: f64,
    pub delta_i: f64,
    pub delta_si: f64,
}

pub fn delta_coefficients(
    geom: &BeamGeometry,
    group: &GroupIndices,
    length: f64,
    convention: AlphaConvention,
) -> DeltaCoefficients {
    let c = geometry_factors(geom).c;
    let alpha = convention.factor();
    let a_s = group.signal * geom.theta_s.sin();
    let a_i = group.idler * geom.theta_i.sin();
    let x_s = group.pump - group.signal * geom.theta_s.cos();
    let x_i = group.pump - group.idler * geom.theta_i.cos();
    let b2 = geom.pump_bandwidth * geom.pump_bandwidth;
    let l2 = length * length;
    DeltaCoefficients {
        delta_s: a_s * a_s / (4.0 * c) + alpha * l2 * x_s * x_s / 4.0 + 1.0 / (4.0 * b2),
        delta_i: a_i * a_i / (4.0 * c) + alpha * l2 * x_i * x_i / 4.0 + 1.0 / (4.0 * b2),
        delta_si: -a_s * a_i / (2.0 * c) + alpha * l2 * x_s * x_i / 2.0 + 1.0 / (2.0 * b2),
    }
}

/// Purity of the Gaussian amplitude, `√(1 - δ_si²/(4 δ_s δ_i))`.
pub fn gaussian_purity(d: &DeltaCoefficients) -> f64 {
    (1.0 - d.delta_si * d.delta_si / (4.0 * d.delta_s * d.delta_i)).max(0.0).sqrt()
}

/// Collection waist (signal = idler) that zeroes `δ_si` for a given pump waist.
pub fn purity_waist(
    pump_waist: f64,
    geom: &BeamGeometry,
    group: &GroupIndices,
    length: f64,
    convention: AlphaConvention,
) -> Result<f64> {
    let alpha = convention.factor();
    let x_s = group.pump - group.signal * geom.theta_s.cos();
    let x_i = group.pump - group.idler * geom.theta_i.cos();
    let transverse = group.signal * group.idler * geom.theta_s.sin() * geom.theta_i.sin();
    let b2 = geom.pump_bandwidth * geom.pump_bandwidth;
    let radicand =
        transverse / (1.0 / b2 + alpha * length * length * x_s * x_i) - 1.0 / (pump_waist * pump_waist);
    if !(radicand > 0.0) || !radicand.is_finite() {
        return Err(JsaError::PurityUnsatisfiable);
    }
    let cos2 = geom.theta_s.cos().powi(2) + geom.theta_i.cos().powi(2);
    Ok((cos2 / radicand).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_gaussian_values() {
        assert_eq!(sinc_gaussian(0.0), 1.0);
        assert!((sinc_gaussian(1.0) - 0.634_448).abs() < 1e-6);
        assert!((sinc_gaussian(1.0 / 0.455f64.sqrt()) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn walk_off_integral_without_walk_off_is_sinc() {
        let l = 450e-6;
        assert!((walk_off_integral(0.0, 0.0, l) - Complex64::new(l, 0.0)).norm() < 1e-8 * l);
        for dkz in [1.0, 1e2, 1e3, 1e4, 1e5] {
            let v = walk_off_integral(dkz, 0.0, l);
            assert!((v.re - l * sinc(dkz * l / 2.0)).abs() < 1e-8 * l, "dkz {dkz}");
            assert!(v.im.abs() < 1e-10 * l);
        }
    }

    #[test]
    fn alpha_convention_accepts_literal_names() {
        let a: AlphaConvention = serde_json::from_str("\"paper_literal\"").unwrap();
        assert_eq!(a, AlphaConvention::Squared);
        let b: AlphaConvention = serde_json::from_str("\"consistent\"").unwrap();
        assert_eq!(b, AlphaConvention::Consistent);
    }

    #[test]
    fn grid_weights_sum_to_area() {
        let g = GridSpec::new(11, (-1.0, 1.0), (0.0, 3.0)).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 6.0).abs() < 1e-12);
        assert_eq!(g.refined().resolution, 21);
    }
}
