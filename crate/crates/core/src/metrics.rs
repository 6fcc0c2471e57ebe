//! Pair rate, singles rates, heralding efficiency and purity.
//!
//! [`Evaluator`] caches the phase mismatch for one crystal, emission geometry
//! and filter set, so that the figures of merit can be re-evaluated for many
//! beam waists at the cost of the transverse overlap only.
//!
//! Singles rates sum the overlap of the pump and the partner's fundamental
//! mode with every Hermite-Gauss mode `(n, m)` of the heralding arm. With all
//! beams centred the overlap separates into an `x` factor, which depends only
//! on the waists, and a `y` (and, with walk-off, `z`) factor that carries the
//! frequency dependence. Both are evaluated by Gauss-Hermite quadrature
//! against the combined Gaussian of the three beams.

use crate::dispersion::{effective_nonlinearity, CrystalSpec, DispersionError};
use crate::jsa::{
    geometry_factors, sinc_gaussian, transverse_envelope, BeamGeometry, GeometryFactors, GridSpec, JsaError, JsaGrid,
    JsaOptions, MismatchTable, PhaseMatching, PhaseMatchingShape, WalkOffRule, MIN_GRID_RESOLUTION,
};
use crate::numeric::{hermite_normalized, linspace, sinc, trapezoid_weights, HermiteRule};
use crate::schmidt::{schmidt_purity, Decompose, SchmidtError, SchmidtSpectrum};
use crate::units::{pm_per_v_to_m_per_v, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::f64::consts::PI;
use std::io::Write;

/// Relative change under grid refinement above which a rate is rejected.
pub const RATE_CONVERGENCE_TOL: f64 = 5e-3;

const HERMITE_POINTS: usize = 48;
const MAX_HERMITE_POINTS: usize = 384;
const QUADRATURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Jsa(#[from] JsaError),
    #[error(transparent)]
    Schmidt(#[from] SchmidtError),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("pair rate not converged under grid refinement: {coarse} vs {fine} pairs/(s mW)")]
    RateNotConverged { coarse: f64, fine: f64 },
    #[error("mode sum reached order {max_order} before the tail criterion (partial sum {partial} counts/(s mW))")]
    TruncationCeiling { partial: f64, max_order: usize },
    #[error("Hermite-Gauss quadrature not converged (relative change {0:e})")]
    Quadrature(f64),
    #[error("mode-sum truncation inconsistency: heralding efficiency {0} > 1")]
    HeraldingInconsistent(f64),
}

type Result<T> = std::result::Result<T, MetricsError>;

/// Flat-top bandpass on a closed interval of angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// rad/s
    pub center: f64,
    /// rad/s
    pub half_width: f64,
    #[serde(default = "unit")]
    pub transmission: f64,
}

fn unit() -> f64 {
    1.0
}

impl FilterSpec {
    pub fn new(center: f64, half_width: f64, transmission: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(MetricsError::InvalidFilter(format!("half width must be > 0, got {half_width}")));
        }
        if !(0.0..=1.0).contains(&transmission) {
            return Err(MetricsError::InvalidFilter(format!(
                "transmission must lie in [0, 1], got {transmission}"
            )));
        }
        Ok(FilterSpec { center, half_width, transmission })
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }
}

pub fn filter_transmission(omega: f64, f: &FilterSpec) -> f64 {
    if omega >= f.lo() && omega <= f.hi() {
        f.transmission
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Filters {
    pub pump: FilterSpec,
    pub signal: FilterSpec,
    pub idler: FilterSpec,
}

impl Filters {
    /// Unit-transmission filters centred on the modes of `geom`.
    pub fn centered(geom: &BeamGeometry, pump_hw: f64, signal_hw: f64, idler_hw: f64) -> Result<Self> {
        Ok(Filters {
            pump: FilterSpec::new(geom.pump.omega(), pump_hw, 1.0)?,
            signal: FilterSpec::new(geom.signal.omega(), signal_hw, 1.0)?,
            idler: FilterSpec::new(geom.idler.omega(), idler_hw, 1.0)?,
        })
    }

    /// Detuning grid covering exactly the signal and idler passbands.
    pub fn pair_grid(&self, geom: &BeamGeometry, resolution: usize) -> Result<GridSpec> {
        let ws = geom.signal.omega();
        let wi = geom.idler.omega();
        Ok(GridSpec::new(
            resolution,
            (self.signal.lo() - ws, self.signal.hi() - ws),
            (self.idler.lo() - wi, self.idler.hi() - wi),
        )?)
    }

    fn pair_weight(&self, geom: &BeamGeometry, omega_s: f64, omega_i: f64) -> f64 {
        let ws = geom.signal.omega() + omega_s;
        let wi = geom.idler.omega() + omega_i;
        filter_transmission(ws, &self.signal)
            * filter_transmission(wi, &self.idler)
            * filter_transmission(ws + wi, &self.pump)
    }

    fn with_scaled_widths(&self, k: f64) -> Self {
        let mut f = *self;
        f.signal.half_width *= k;
        f.idler.half_width *= k;
        f
    }
}

/// Absolute-rate prefactor of the pair-rate integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePrefactor {
    /// Multiplies `∫∫ dω_s dω_p |Φ|²` to give pairs/s.
    pub value: f64,
    pub path_efficiency: [f64; 2],
    pub pump_power_w: f64,
    /// m/V
    pub d_eff: f64,
    /// `α_j = √(2/(πW_j²))` for pump, signal, idler.
    pub alpha: [f64; 3],
    pub omega: [f64; 2],
    /// Phase indices for pump, signal, idler.
    pub index: [f64; 3],
    pub pump_bandwidth: f64,
}

pub fn rate_prefactor(
    geom: &BeamGeometry,
    crystal: &CrystalSpec,
    path_efficiency: [f64; 2],
) -> Result<RatePrefactor> {
    let m = &crystal.material;
    let theta = crystal.cut_angle;
    let alpha = [geom.pump_waist, geom.signal_waist, geom.idler_waist].map(|w| (2.0 / (PI * w * w)).sqrt());
    let index = [
        geom.pump.index(m, theta)?,
        geom.signal.index(m, theta)?,
        geom.idler.index(m, theta)?,
    ];
    let omega = [geom.signal.omega(), geom.idler.omega()];
    let d_eff = pm_per_v_to_m_per_v(effective_nonlinearity(theta, crystal.azimuth, m));
    let pump_power_w = geom.pump_power_mw * 1e-3;
    let a2: f64 = alpha.iter().map(|a| a * a).product();
    let value = path_efficiency[0] * path_efficiency[1] * pump_power_w * d_eff * d_eff * a2 * omega[0] * omega[1]
        / (2f64.sqrt()
            * PI.powf(1.5)
            * VACUUM_PERMITTIVITY
            * SPEED_OF_LIGHT.powi(3)
            * index.iter().product::<f64>()
            * geom.pump_bandwidth);
    Ok(RatePrefactor {
        value,
        path_efficiency,
        pump_power_w,
        d_eff,
        alpha,
        omega,
        index,
        pump_bandwidth: geom.pump_bandwidth,
    })
}

/// Which arm is expanded in Hermite-Gauss modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Signal,
    Idler,
}

/// Spectral window over which singles are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinglesWindow {
    /// Same window as the pair rate (both filters and the pump filter), so the
    /// heralding efficiency measures the spatial mode projection alone.
    #[default]
    Pair,
    /// Only the heralding arm's filter and the pump filter; the partner's
    /// frequency is unconstrained.
    HeraldOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Highest Hermite-Gauss order per axis.
    pub max_order: usize,
    /// A shell `n + m = k` counts as negligible below this fraction of the
    /// running sum; two consecutive negligible shells end the sum.
    pub shell_tolerance: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { max_order: 20, shell_tolerance: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub resolution: usize,
    pub jsa: JsaOptions,
    pub decompose: Decompose,
    pub singles_window: SinglesWindow,
    pub truncation: Truncation,
    pub path_efficiency: [f64; 2],
    /// Re-evaluate the pair rate on a `2N - 1` grid and reject changes above
    /// 0.5 %.
    pub check_convergence: bool,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            resolution: 201,
            jsa: JsaOptions::default(),
            decompose: Decompose::default(),
            singles_window: SinglesWindow::default(),
            truncation: Truncation::default(),
            path_efficiency: [1.0, 1.0],
            check_convergence: true,
        }
    }
}

/// Result of a Hermite-Gauss mode sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSum {
    /// counts/(s mW)
    pub rate: f64,
    /// Last shell `n + m` included.
    pub max_order: usize,
    /// Estimated relative contribution of the omitted shells.
    pub tail_estimate: f64,
    /// Contribution of each shell, counts/(s mW).
    pub shells: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// pairs/(s mW)
    pub pair_rate: f64,
    /// Pair rate on the refined grid, when the convergence check ran.
    pub pair_rate_refined: Option<f64>,
    /// counts/(s mW)
    pub singles_signal: f64,
    pub singles_idler: f64,
    pub heralding: f64,
    pub purity: f64,
    pub schmidt_number: f64,
    pub mode_sum_signal: ModeSumSummary,
    pub mode_sum_idler: ModeSumSummary,
    pub waists_um: [f64; 3],
    pub settings: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSumSummary {
    pub max_order: usize,
    pub tail_estimate: f64,
}

impl From<&ModeSum> for ModeSumSummary {
    fn from(m: &ModeSum) -> Self {
        ModeSumSummary { max_order: m.max_order, tail_estimate: m.tail_estimate }
    }
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str =
        "w0p_um,w0s_um,w0i_um,pair_rate,singles_signal,singles_idler,heralding,purity,schmidt_number";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.waists_um[0],
            self.waists_um[1],
            self.waists_um[2],
            self.pair_rate,
            self.singles_signal,
            self.singles_idler,
            self.heralding,
            self.purity,
            self.schmidt_number
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        writeln!(w, "{}", self.csv_row())
    }
}

/// `η = R/√(R_s R_i)`.
pub fn heralding_efficiency(r: f64, r_s: f64, r_i: f64) -> Result<f64> {
    if !(r_s > 0.0 && r_i > 0.0) {
        return Err(MetricsError::InvalidOption(format!("singles rates must be > 0 ({r_s}, {r_i})")));
    }
    let eta = r / (r_s * r_i).sqrt();
    if eta > 1.0 + 1e-9 {
        return Err(MetricsError::HeraldingInconsistent(eta));
    }
    Ok(eta)
}

/// `(ω_s, ω_i, weight, Δk_y, Δk_z)`
type Sample = (f64, f64, f64, f64, f64);

/// Frequency samples with their integration weights (quadrature weight times
/// filter transmissions) and phase mismatch.
#[derive(Debug, Clone, Default)]
struct Samples {
    omega_s: Vec<f64>,
    omega_i: Vec<f64>,
    weight: Vec<f64>,
    dky: Vec<f64>,
    dkz: Vec<f64>,
}

impl Samples {
    fn from_table(table: &MismatchTable, geom: &BeamGeometry, filters: &Filters) -> Self {
        let quad = table.spec.weights();
        let mut s = Samples::default();
        for (k, q) in quad.iter().enumerate() {
            let (os, oi) = table.omega_at(k);
            let w = q * filters.pair_weight(geom, os, oi);
            if w > 0.0 {
                s.push(os, oi, w, table.dky[k], table.dkz[k]);
            }
        }
        s
    }

    fn push(&mut self, os: f64, oi: f64, w: f64, dky: f64, dkz: f64) {
        self.omega_s.push(os);
        self.omega_i.push(oi);
        self.weight.push(w);
        self.dky.push(dky);
        self.dkz.push(dkz);
    }

    fn len(&self) -> usize {
        self.weight.len()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Transverse data of the heralding arm in the frame where the y-z Gaussian
/// is diagonal.
#[derive(Debug, Clone, Copy)]
struct ArmFrame {
    waist: f64,
    cos: f64,
    /// Coefficient of z in the arm's transverse coordinate after the shift
    /// `y = y' + Dz/(2C)`.
    shear: f64,
}

impl ArmFrame {
    fn new(arm: Arm, geom: &BeamGeometry, g: &GeometryFactors) -> Self {
        match arm {
            Arm::Signal => {
                let (s, c) = geom.theta_s.sin_cos();
                ArmFrame { waist: geom.signal_waist, cos: c, shear: c * g.d / (2.0 * g.c) - s }
            }
            Arm::Idler => {
                let (s, c) = geom.theta_i.sin_cos();
                ArmFrame { waist: geom.idler_waist, cos: c, shear: c * g.d / (2.0 * g.c) + s }
            }
        }
    }
}

/// `∫ ψ_n(√2 x/W) exp(-A x²) dx` for `n = 0..=n_max`, with `ψ_n` the
/// normalised Hermite polynomials.
fn x_overlaps(rule: &HermiteRule, n_max: usize, a: f64, waist: f64) -> Vec<f64> {
    let scale = std::f64::consts::SQRT_2 / (waist * a.sqrt());
    let mut out = vec![0.0; n_max + 1];
    let mut h = Vec::with_capacity(n_max + 1);
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        hermite_normalized(n_max, scale * t, &mut h);
        for (o, hv) in out.iter_mut().zip(&h) {
            *o += w * hv;
        }
    }
    let inv = 1.0 / a.sqrt();
    out.iter_mut().for_each(|o| *o *= inv);
    out
}

/// Longitudinal treatment shared by every sample of one evaluation.
enum Longitudinal<'a> {
    Plain { length: f64, shape: PhaseMatchingShape },
    WalkOff(&'a WalkOffRule),
}

impl<'a> Longitudinal<'a> {
    fn new(walk: Option<&'a WalkOffRule>, length: f64, shape: PhaseMatchingShape) -> Self {
        match walk {
            Some(r) => Longitudinal::WalkOff(r),
            None => Longitudinal::Plain { length, shape },
        }
    }

    fn amplitude(&self, dkz: f64) -> Complex64 {
        match self {
            Longitudinal::WalkOff(r) => r.integrate(dkz),
            Longitudinal::Plain { length, shape } => {
                let x = 0.5 * dkz * length;
                let f = match shape {
                    PhaseMatchingShape::Sinc => sinc(x),
                    PhaseMatchingShape::Gaussian => sinc_gaussian(x),
                };
                Complex64::new(length * f, 0.0)
            }
        }
    }
}

/// `∫dz ∫dy ψ_m(√2(cos·y' + shear·z)/W) exp(-C y'² + iΔk_y y' - H z² - iΔk_z z)`
/// for `m = 0..=m_max`; without walk-off the z integral reduces to the
/// phase-matching function. The Hermite values do not depend on frequency and
/// are tabulated once.
struct YKernel<'a> {
    m_max: usize,
    y: Vec<f64>,
    wy: Vec<f64>,
    /// `[z][node][m]`, one z slice when walk-off is off.
    table: Vec<f64>,
    /// Without walk-off the integrand has definite parity in y for each m, so
    /// only the positive nodes are stored.
    folded: bool,
    long: &'a Longitudinal<'a>,
}

impl<'a> YKernel<'a> {
    fn new(rule: &HermiteRule, m_max: usize, c: f64, frame: &ArmFrame, long: &'a Longitudinal<'a>) -> Self {
        let root_c = c.sqrt();
        let scale = std::f64::consts::SQRT_2 / frame.waist;
        let folded = matches!(long, Longitudinal::Plain { .. });
        let (y, wy): (Vec<f64>, Vec<f64>) = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .filter(|(t, _)| !folded || **t >= 0.0)
            .map(|(t, w)| {
                let w = if folded && *t == 0.0 { 0.5 * w } else { *w };
                (t / root_c, w / root_c)
            })
            .unzip();
        let zs: Vec<f64> = match long {
            Longitudinal::Plain { .. } => vec![0.0],
            Longitudinal::WalkOff(r) => r.nodes().to_vec(),
        };
        let mut table = Vec::with_capacity(zs.len() * y.len() * (m_max + 1));
        let mut h = Vec::with_capacity(m_max + 1);
        for z in &zs {
            for yj in &y {
                hermite_normalized(m_max, scale * (frame.cos * yj + frame.shear * z), &mut h);
                table.extend_from_slice(&h);
            }
        }
        YKernel { m_max, y, wy, table, folded, long }
    }

    fn eval(&self, dky: f64, dkz: f64, phases: &mut Vec<Complex64>) -> Vec<Complex64> {
        let stride = self.m_max + 1;
        if self.folded {
            // e^{iky} + (-1)^m e^{-iky} = 2cos(ky) or 2i sin(ky)
            let (mut even, mut odd) = (vec![0.0; stride], vec![0.0; stride]);
            for (row, (y, w)) in self.table.chunks_exact(stride).zip(self.y.iter().zip(&self.wy)) {
                let (sn, cs) = (dky * y).sin_cos();
                let (c2, s2) = (2.0 * w * cs, 2.0 * w * sn);
                for m in (0..stride).step_by(2) {
                    even[m] += c2 * row[m];
                }
                for m in (1..stride).step_by(2) {
                    odd[m] += s2 * row[m];
                }
            }
            let z = self.long.amplitude(dkz);
            return (0..stride)
                .map(|m| if m % 2 == 0 { z * even[m] } else { z * Complex64::new(0.0, odd[m]) })
                .collect();
        }
        phases.clear();
        phases.extend(self.y.iter().zip(&self.wy).map(|(y, w)| Complex64::from_polar(*w, dky * y)));
        let mut out = vec![Complex64::new(0.0, 0.0); stride];
        let slice_len = self.y.len() * stride;
        let mut add_slice = |slice: &[f64], zw: Complex64| {
            for (row, ph) in slice.chunks_exact(stride).zip(phases.iter()) {
                let p = ph * zw;
                for (o, hv) in out.iter_mut().zip(row) {
                    *o += p * hv;
                }
            }
        };
        match self.long {
            Longitudinal::Plain { .. } => add_slice(&self.table, self.long.amplitude(dkz)),
            Longitudinal::WalkOff(r) => {
                for (k, (&z, &w)) in r.nodes().iter().zip(r.weights()).enumerate() {
                    add_slice(&self.table[k * slice_len..(k + 1) * slice_len], Complex64::from_polar(w, -dkz * z));
                }
            }
        }
        out
    }
}

fn factorial_scale(n: usize) -> f64 {
    // √(2^n n!)
    (0..n).map(|k| (2.0 * (k + 1) as f64).sqrt()).product()
}

/// Overlap amplitude with the heralding arm in Hermite-Gauss mode `(n, m)` and
/// the partner in its fundamental mode. `(0, 0)` reproduces the joint
/// amplitude.
#[allow(clippy::too_many_arguments)]
pub fn mode_function_nm(
    n: usize,
    m: usize,
    omega_s: f64,
    omega_i: f64,
    geom: &BeamGeometry,
    crystal: &CrystalSpec,
    options: JsaOptions,
    arm: Arm,
) -> Result<Complex64> {
    let pm = PhaseMatching::new(geom, crystal)?;
    let (dky, dkz) = pm.mismatch(omega_s, omega_i, options.dispersion)?;
    let g = geometry_factors(geom);
    let frame = ArmFrame::new(arm, geom, &g);
    let walk = options.walk_off.then(|| WalkOffRule::converged(g.h, crystal.length, dkz.abs()));
    let long = Longitudinal::new(walk.as_ref(), crystal.length, options.shape);
    let order = n.max(m);
    let eval = |points: usize| {
        let rule = HermiteRule::new(points);
        let x = x_overlaps(&rule, order, g.a, frame.waist)[n];
        let y = YKernel::new(&rule, order, g.c, &frame, &long).eval(dky, dkz, &mut Vec::new())[m];
        y * x
    };
    let coarse = eval(HERMITE_POINTS);
    let fine = eval(2 * HERMITE_POINTS);
    let scale = eval_scale(&g, crystal.length);
    let change = (fine - coarse).norm() / scale;
    if change > QUADRATURE_TOL {
        return Err(MetricsError::Quadrature(change));
    }
    let pump = (-(omega_s + omega_i).powi(2) / (4.0 * geom.pump_bandwidth.powi(2))).exp();
    Ok(fine * pump * factorial_scale(n) * factorial_scale(m))
}

/// Magnitude of the fundamental overlap at perfect phase matching.
fn eval_scale(g: &GeometryFactors, length: f64) -> f64 {
    PI * length / (g.a * g.c).sqrt()
}

/// Cached spectral data for one crystal, emission geometry and filter set.
#[derive(Debug, Clone)]
pub struct Evaluator {
    crystal: CrystalSpec,
    geometry: BeamGeometry,
    filters: Filters,
    options: MetricsOptions,
    phase_matching: PhaseMatching,
    table: MismatchTable,
    samples: Samples,
    refined_samples: Option<Samples>,
    hermite: HermiteRule,
    hermite_fine: HermiteRule,
}

#[derive(Serialize)]
struct Snapshot<'a> {
    crystal: &'a CrystalSpec,
    geometry: &'a BeamGeometry,
    filters: &'a Filters,
    options: &'a MetricsOptions,
}

impl Evaluator {
    pub fn new(
        crystal: CrystalSpec,
        geometry: BeamGeometry,
        filters: Filters,
        options: MetricsOptions,
    ) -> Result<Self> {
        if options.resolution < MIN_GRID_RESOLUTION {
            return Err(JsaError::ResolutionTooLow(options.resolution).into());
        }
        if options.truncation.max_order < 4 {
            return Err(MetricsError::InvalidOption(format!(
                "truncation order must be >= 4, got {}",
                options.truncation.max_order
            )));
        }
        geometry.validate(crystal.length)?;
        let phase_matching = PhaseMatching::new(&geometry, &crystal)?;
        let spec = filters.pair_grid(&geometry, options.resolution)?;
        let table = MismatchTable::new(spec, &phase_matching, options.jsa.dispersion)?;
        let samples = Samples::from_table(&table, &geometry, &filters);
        let refined_samples = if options.check_convergence {
            let t = MismatchTable::new(spec.refined(), &phase_matching, options.jsa.dispersion)?;
            Some(Samples::from_table(&t, &geometry, &filters))
        } else {
            None
        };
        let hermite = HermiteRule::new(HERMITE_POINTS);
        let hermite_fine = HermiteRule::new(2 * HERMITE_POINTS);
        Ok(Evaluator {
            crystal,
            geometry,
            filters,
            options,
            phase_matching,
            table,
            samples,
            refined_samples,
            hermite,
            hermite_fine,
        })
    }

    pub fn crystal(&self) -> &CrystalSpec {
        &self.crystal
    }

    pub fn geometry(&self) -> &BeamGeometry {
        &self.geometry
    }

    pub fn filters(&self) -> &Filters {
        &self.filters
    }

    pub fn options(&self) -> &MetricsOptions {
        &self.options
    }

    pub fn phase_matching(&self) -> &PhaseMatching {
        &self.phase_matching
    }

    pub fn table(&self) -> &MismatchTable {
        &self.table
    }

    /// The template geometry with new waists.
    pub fn with_waists(&self, pump: f64, signal: f64, idler: f64) -> BeamGeometry {
        self.geometry.with_waists(pump, signal, idler)
    }

    pub fn settings(&self) -> serde_json::Value {
        serde_json::to_value(Snapshot {
            crystal: &self.crystal,
            geometry: &self.geometry,
            filters: &self.filters,
            options: &self.options,
        })
        .expect("settings serialise")
    }

    fn check(&self, geom: &BeamGeometry) -> Result<()> {
        geom.validate(self.crystal.length)?;
        Ok(())
    }

    fn walk_off_rule(&self, g: &GeometryFactors, samples: &Samples) -> Option<WalkOffRule> {
        self.options
            .jsa
            .walk_off
            .then(|| WalkOffRule::converged(g.h, self.crystal.length, Samples::max_abs(&samples.dkz)))
    }

    /// Pair rate, pairs/(s mW), and its value on the refined grid when the
    /// convergence check is enabled.
    pub fn pair_rate_checked(&self, geom: &BeamGeometry) -> Result<(f64, Option<f64>)> {
        self.check(geom)?;
        let coarse = self.pair_rate_raw(&self.samples, geom)?;
        let Some(fine_samples) = &self.refined_samples else {
            return Ok((coarse, None));
        };
        let fine = self.pair_rate_raw(fine_samples, geom)?;
        let scale = coarse.abs().max(fine.abs());
        if scale > 0.0 && (fine - coarse).abs() > RATE_CONVERGENCE_TOL * scale {
            return Err(MetricsError::RateNotConverged { coarse, fine });
        }
        Ok((coarse, Some(fine)))
    }

    pub fn pair_rate(&self, geom: &BeamGeometry) -> Result<f64> {
        self.pair_rate_checked(geom).map(|r| r.0)
    }

    fn pair_rate_raw(&self, samples: &Samples, geom: &BeamGeometry) -> Result<f64> {
        let pref = rate_prefactor(geom, &self.crystal, self.options.path_efficiency)?;
        let g = geometry_factors(geom);
        let walk = self.walk_off_rule(&g, samples);
        let long = Longitudinal::new(walk.as_ref(), self.crystal.length, self.options.jsa.shape);
        let terms: Vec<f64> = (0..samples.len())
            .into_par_iter()
            .map(|k| {
                let env = transverse_envelope(
                    &g,
                    samples.dky[k],
                    samples.omega_s[k] + samples.omega_i[k],
                    geom.pump_bandwidth,
                );
                samples.weight[k] * (long.amplitude(samples.dkz[k]) * env).norm_sqr()
            })
            .collect();
        Ok(pref.value * terms.iter().sum::<f64>() / geom.pump_power_mw)
    }

    /// Sampled joint amplitude on the evaluator's grid.
    pub fn jsa(&self, geom: &BeamGeometry) -> Result<JsaGrid> {
        self.check(geom)?;
        let values = self.table.amplitude(geom, self.crystal.length, self.options.jsa)?;
        Ok(JsaGrid::from_table(&self.table, values))
    }

    pub fn schmidt(&self, geom: &BeamGeometry) -> Result<SchmidtSpectrum> {
        Ok(schmidt_purity(&self.jsa(geom)?, self.options.decompose)?)
    }

    pub fn purity(&self, geom: &BeamGeometry) -> Result<f64> {
        self.schmidt(geom).map(|s| s.purity)
    }

    fn herald_samples(&self, arm: Arm, geom: &BeamGeometry) -> Result<Samples> {
        let n = self.options.resolution;
        let (own, own_center) = match arm {
            Arm::Signal => (self.filters.signal, geom.signal.omega()),
            Arm::Idler => (self.filters.idler, geom.idler.omega()),
        };
        let p0 = geom.pump.omega();
        let reach = 4.0 * geom.pump_bandwidth;
        let p_lo = (self.filters.pump.lo() - p0).max(-reach);
        let p_hi = (self.filters.pump.hi() - p0).min(reach);
        if !(p_hi > p_lo) {
            return Ok(Samples::default());
        }
        let own_axis = linspace(own.lo() - own_center, own.hi() - own_center, n);
        let pump_axis = linspace(p_lo, p_hi, n);
        let w_own = trapezoid_weights(n, (own.hi() - own.lo()) / (n - 1) as f64);
        let w_pump = trapezoid_weights(n, (p_hi - p_lo) / (n - 1) as f64);
        let pm = &self.phase_matching;
        let mode = self.options.jsa.dispersion;
        let rows: Vec<Vec<Sample>> = own_axis
            .par_iter()
            .zip(&w_own)
            .map(|(&o, &wo)| {
                pump_axis
                    .iter()
                    .zip(&w_pump)
                    .map(|(&op, &wp)| {
                        let (os, oi) = match arm {
                            Arm::Signal => (o, op - o),
                            Arm::Idler => (op - o, o),
                        };
                        let (dky, dkz) = pm.mismatch(os, oi, mode)?;
                        let t = own.transmission * filter_transmission(p0 + op, &self.filters.pump);
                        Ok((os, oi, wo * wp * t, dky, dkz))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut s = Samples::default();
        for (os, oi, w, dky, dkz) in rows.into_iter().flatten() {
            if w > 0.0 {
                s.push(os, oi, w, dky, dkz);
            }
        }
        Ok(s)
    }

    /// Singles rate of one arm, counts/(s mW), summed over Hermite-Gauss modes
    /// in shells of constant `n + m`.
    pub fn singles_rate(&self, arm: Arm, geom: &BeamGeometry) -> Result<ModeSum> {
        self.check(geom)?;
        let herald;
        let samples = match self.options.singles_window {
            SinglesWindow::Pair => &self.samples,
            SinglesWindow::HeraldOnly => {
                herald = self.herald_samples(arm, geom)?;
                &herald
            }
        };
        let pref = rate_prefactor(geom, &self.crystal, self.options.path_efficiency)?;
        let g = geometry_factors(geom);
        let frame = ArmFrame::new(arm, geom, &g);
        let n_max = self.options.truncation.max_order;
        let walk = self.walk_off_rule(&g, samples);
        let long = Longitudinal::new(walk.as_ref(), self.crystal.length, self.options.jsa.shape);
        let rule = self.singles_rule(&g, &frame, samples, &long, n_max)?;

        let x = x_overlaps(&rule, n_max, g.a, frame.waist);
        let kernel = YKernel::new(&rule, n_max, g.c, &frame, &long);
        let per_sample: Vec<Vec<f64>> = (0..samples.len())
            .into_par_iter()
            .map_init(Vec::new, |h, k| {
                let op = samples.omega_s[k] + samples.omega_i[k];
                let pump = (-op * op / (2.0 * geom.pump_bandwidth.powi(2))).exp();
                let y = kernel.eval(samples.dky[k], samples.dkz[k], h);
                y.iter().map(|v| samples.weight[k] * pump * v.norm_sqr()).collect()
            })
            .collect();
        let mut y_sum = vec![0.0; n_max + 1];
        for row in &per_sample {
            for (acc, v) in y_sum.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let scale = pref.value / geom.pump_power_mw;
        let shells: Vec<f64> = (0..=n_max)
            .map(|k| (0..=k).map(|n| x[n] * x[n] * y_sum[k - n]).sum::<f64>() * scale)
            .collect();
        summarise_shells(&shells, self.options.truncation)
    }

    /// The cached Gauss-Hermite rule, or a finer one when the cached rule
    /// disagrees with its doubling at the sample with the largest transverse
    /// mismatch.
    fn singles_rule(
        &self,
        g: &GeometryFactors,
        frame: &ArmFrame,
        samples: &Samples,
        long: &Longitudinal,
        n_max: usize,
    ) -> Result<Cow<'_, HermiteRule>> {
        let Some(k) = (0..samples.len()).max_by(|&a, &b| samples.dky[a].abs().total_cmp(&samples.dky[b].abs()))
        else {
            return Ok(Cow::Borrowed(&self.hermite));
        };
        let eval = |rule: &HermiteRule, dky: f64, dkz: f64| {
            let x = x_overlaps(rule, n_max, g.a, frame.waist);
            let y = YKernel::new(rule, n_max, g.c, frame, long).eval(dky, dkz, &mut Vec::new());
            (x, y)
        };
        // Errors are measured against the phase-matched kernel: far from phase
        // matching the kernel itself is negligibly small.
        let (_, peak) = eval(&self.hermite_fine, 0.0, 0.0);
        let y_scale = peak.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let change = |coarse: &HermiteRule, fine: &HermiteRule| {
            let (xc, yc) = eval(coarse, samples.dky[k], samples.dkz[k]);
            let (xf, yf) = eval(fine, samples.dky[k], samples.dkz[k]);
            let x_scale = xf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let dx = xc.iter().zip(&xf).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / x_scale;
            let dy = yc.iter().zip(&yf).fold(0.0f64, |m, (a, b)| m.max((a - b).norm())) / y_scale;
            dx.max(dy)
        };

        let mut coarse = Cow::Borrowed(&self.hermite);
        let mut fine = Cow::Borrowed(&self.hermite_fine);
        loop {
            let c = change(&coarse, &fine);
            if c <= QUADRATURE_TOL {
                return Ok(coarse);
            }
            if fine.nodes.len() >= MAX_HERMITE_POINTS {
                return Err(MetricsError::Quadrature(c));
            }
            log::debug!("{}-point Hermite rule off by {c:.1e}; refining", coarse.nodes.len());
            let points = 2 * fine.nodes.len();
            coarse = fine;
            fine = Cow::Owned(HermiteRule::new(points));
        }
    }

    /// Full set of figures of merit for one waist configuration.
    pub fn report(&self, geom: &BeamGeometry) -> Result<MetricsReport> {
        let (pair_rate, pair_rate_refined) = self.pair_rate_checked(geom)?;
        let s = self.singles_rate(Arm::Signal, geom)?;
        let i = self.singles_rate(Arm::Idler, geom)?;
        let heralding = heralding_efficiency(pair_rate, s.rate, i.rate)?;
        let schmidt = self.schmidt(geom)?;
        Ok(MetricsReport {
            pair_rate,
            pair_rate_refined,
            singles_signal: s.rate,
            singles_idler: i.rate,
            heralding,
            purity: schmidt.purity,
            schmidt_number: schmidt.schmidt_number,
            mode_sum_signal: (&s).into(),
            mode_sum_idler: (&i).into(),
            waists_um: [geom.pump_waist, geom.signal_waist, geom.idler_waist].map(|w| w * 1e6),
            settings: self.settings(),
        })
    }

    /// Heralding efficiency and purity only.
    pub fn eta_and_purity(&self, geom: &BeamGeometry) -> Result<(f64, f64)> {
        let r = self.pair_rate_raw(&self.samples, geom)?;
        let s = self.singles_rate(Arm::Signal, geom)?;
        let i = self.singles_rate(Arm::Idler, geom)?;
        Ok((heralding_efficiency(r, s.rate, i.rate)?, self.purity(geom)?))
    }

    /// A copy with the down-conversion filter half-widths scaled by `k`.
    pub fn with_scaled_filters(&self, k: f64) -> Result<Self> {
        Evaluator::new(
            self.crystal.clone(),
            self.geometry.clone(),
            self.filters.with_scaled_widths(k),
            self.options,
        )
    }
}

fn summarise_shells(shells: &[f64], t: Truncation) -> Result<ModeSum> {
    let mut sum = 0.0;
    let mut quiet = 0;
    for (k, &s) in shells.iter().enumerate() {
        sum += s;
        quiet = if k >= 4 && s < t.shell_tolerance * sum { quiet + 1 } else { 0 };
        if quiet >= 2 {
            let last = s + shells[k - 1];
            let prev = shells[k - 2] + shells[k - 3];
            let tail = if prev > 0.0 && last < prev {
                let q = last / prev;
                last * q / (1.0 - q) / sum
            } else {
                last / sum
            };
            return Ok(ModeSum { rate: sum, max_order: k, tail_estimate: tail, shells: shells[..=k].to_vec() });
        }
    }
    Err(MetricsError::TruncationCeiling { partial: sum, max_order: shells.len().saturating_sub(1) })
}

/// Pair rate, pairs/(s mW), with the grid-refinement check.
pub fn pair_rate(
    geom: &BeamGeometry,
    crystal: &CrystalSpec,
    filters: &Filters,
    options: MetricsOptions,
) -> Result<f64> {
    Evaluator::new(crystal.clone(), geom.clone(), *filters, options)?.pair_rate(geom)
}

/// Singles rate of one arm, counts/(s mW).
pub fn singles_rate(
    arm: Arm,
    geom: &BeamGeometry,
    crystal: &CrystalSpec,
    filters: &Filters,
    options: MetricsOptions,
) -> Result<ModeSum> {
    let opts = MetricsOptions { check_convergence: false, ..options };
    Evaluator::new(crystal.clone(), geom.clone(), *filters, opts)?.singles_rate(arm, geom)
}
