//! Waist sweeps and the three-stage waist optimiser.

use crate::jsa::{purity_waist, AlphaConvention, JsaError};
use crate::metrics::{Evaluator, MetricsError};
use crate::numeric::{golden_section_max, linspace, parabolic_vertex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Jsa(#[from] JsaError),
    #[error("invalid sweep range: {0}")]
    InvalidRange(String),
    #[error("no pump waist in [{lo_um}, {hi_um}] um admits the waist policy")]
    NothingToSweep { lo_um: f64, hi_um: f64 },
}

type Result<T> = std::result::Result<T, SweepError>;

/// How the collection waists follow the pump waist in a pump-waist sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaistPolicy {
    /// Collection waists stay at their template values.
    Fixed,
    /// Collection waists keep their template ratio to the pump waist.
    CoScale,
    /// Signal and idler waists solve the Gaussian separability condition.
    PurityCondition(AlphaConvention),
}

impl Default for WaistPolicy {
    fn default() -> Self {
        WaistPolicy::PurityCondition(AlphaConvention::Consistent)
    }
}

impl WaistPolicy {
    /// Signal and idler waists for a pump waist, or `None` when the policy has
    /// no solution there.
    pub fn collection_waists(&self, ev: &Evaluator, pump_waist: f64) -> Option<(f64, f64)> {
        let g = ev.geometry();
        match *self {
            WaistPolicy::Fixed => Some((g.signal_waist, g.idler_waist)),
            WaistPolicy::CoScale => {
                let k = pump_waist / g.pump_waist;
                Some((g.signal_waist * k, g.idler_waist * k))
            }
            WaistPolicy::PurityCondition(conv) => {
                let pm = ev.phase_matching();
                purity_waist(pump_waist, g, &pm.group, ev.crystal().length, conv)
                    .ok()
                    .map(|w| (w, w))
            }
        }
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Pump waist in µm for pump-waist sweeps, `W0s/W0p` for ratio sweeps.
    pub swept_value: f64,
    /// pairs/(s mW)
    pub rate: f64,
    pub eta: Option<f64>,
    pub purity: Option<f64>,
    pub pump_waist: f64,
    pub signal_waist: f64,
    pub idler_waist: f64,
}

pub const SWEEP_CSV_HEADER: &str = "swept_value,R,eta,purity,w0p_um,w0s_um,w0i_um";

/// Metres to µm, dropping the last-bit noise of the conversion.
fn to_um(x: f64) -> f64 {
    (x * 1e15).round() / 1e9
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.swept_value,
            r.rate,
            opt(r.eta),
            opt(r.purity),
            to_um(r.pump_waist),
            to_um(r.signal_waist),
            to_um(r.idler_waist)
        )?;
    }
    Ok(())
}

/// Index of the largest rate; ties go to the smallest swept value.
pub fn argmax(rows: &[SweepRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, r) in rows.iter().enumerate() {
        match best {
            Some(b)
                if r.rate < rows[b].rate
                    || (r.rate == rows[b].rate && r.swept_value >= rows[b].swept_value) => {}
            _ => best = Some(k),
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweep {
    pub rows: Vec<SweepRow>,
    /// Pump waists (µm) where the waist policy had no solution.
    pub skipped_um: Vec<f64>,
    pub argmax: Option<usize>,
}

fn samples(range: (f64, f64), steps: usize) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(SweepError::InvalidRange(format!("[{lo}, {hi}]")));
    }
    if steps == 0 {
        return Err(SweepError::InvalidRange("steps must be >= 1".into()));
    }
    // Snap to 1e-9 so CSV columns print as typed (0.4, not 0.39999999999999997).
    Ok(linspace(lo, hi, steps).into_iter().map(|x| (x * 1e9).round() / 1e9).collect())
}

/// Pair rate over pump waists (`range` in metres).
pub fn rate_vs_pump_waist(
    ev: &Evaluator,
    range: (f64, f64),
    steps: usize,
    policy: WaistPolicy,
) -> Result<RateSweep> {
    let xs = samples((to_um(range.0), to_um(range.1)), steps)?;
    let rows: Vec<Option<SweepRow>> = xs
        .par_iter()
        .map(|&x| {
            let wp = x * 1e-6;
            let Some((ws, wi)) = policy.collection_waists(ev, wp) else {
                return Ok(None);
            };
            let rate = ev.pair_rate(&ev.with_waists(wp, ws, wi))?;
            Ok(Some(SweepRow {
                swept_value: x,
                rate,
                eta: None,
                purity: None,
                pump_waist: wp,
                signal_waist: ws,
                idler_waist: wi,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped_um = xs.iter().zip(&rows).filter(|(_, r)| r.is_none()).map(|(x, _)| *x).collect();
    let rows: Vec<SweepRow> = rows.into_iter().flatten().collect();
    let argmax = argmax(&rows);
    Ok(RateSweep { rows, skipped_um, argmax })
}

fn full_row(ev: &Evaluator, swept_value: f64, wp: f64, ws: f64, wi: f64) -> Result<SweepRow> {
    let geom = ev.with_waists(wp, ws, wi);
    let report = ev.report(&geom)?;
    Ok(SweepRow {
        swept_value,
        rate: report.pair_rate,
        eta: Some(report.heralding),
        purity: Some(report.purity),
        pump_waist: wp,
        signal_waist: ws,
        idler_waist: wi,
    })
}

/// Rate, heralding efficiency and purity with `W0s = W0i = ratio·W0p`.
pub fn metrics_vs_waist_ratio(
    ev: &Evaluator,
    ratio_range: (f64, f64),
    steps: usize,
    pump_waist: f64,
) -> Result<Vec<SweepRow>> {
    let ratios = samples(ratio_range, steps)?;
    ratios
        .par_iter()
        .map(|&r| full_row(ev, r, pump_waist, r * pump_waist, r * pump_waist))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Pump-waist search interval, m.
    pub pump_range: (f64, f64),
    /// Samples of the coarse scan that brackets the rate maximum.
    pub coarse_steps: usize,
    pub policy: WaistPolicy,
    /// Convention of the separability waist used in stage two.
    pub alpha: AlphaConvention,
    pub scan_points: usize,
    /// Stage-three window as multiples of the separability waist.
    pub scan_window: (f64, f64),
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            pump_range: (50e-6, 800e-6),
            coarse_steps: 31,
            policy: WaistPolicy::default(),
            alpha: AlphaConvention::Consistent,
            scan_points: 121,
            scan_window: (0.5, 1.2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// Rate-maximising pump waist, m.
    pub pump_waist_star: f64,
    pub signal_waist_eq32: f64,
    pub signal_waist_purity_star: f64,
    pub signal_waist_intersection: Option<f64>,
    pub intersection_found: bool,
    pub at_pump_star: SweepRow,
    pub at_eq32: SweepRow,
    pub at_purity_star: SweepRow,
    pub at_intersection: Option<SweepRow>,
    /// Stage-three scan, swept value `W0s` in µm.
    pub scan: Vec<SweepRow>,
}

/// Rate-optimal pump waist, separability waist, purity-optimal collection
/// waist and the `η = 𝒫` crossing, in that order.
pub fn optimize(ev: &Evaluator, opts: OptimizeOptions) -> Result<OptimizationResult> {
    // Stage 1: bracket the rate maximum on a coarse grid, then refine.
    let coarse = rate_vs_pump_waist(ev, opts.pump_range, opts.coarse_steps.max(3), opts.policy)?;
    let Some(best) = coarse.argmax else {
        return Err(SweepError::NothingToSweep {
            lo_um: opts.pump_range.0 * 1e6,
            hi_um: opts.pump_range.1 * 1e6,
        });
    };
    let step = (opts.pump_range.1 - opts.pump_range.0) / (opts.coarse_steps.max(3) - 1) as f64;
    let centre = coarse.rows[best].pump_waist;
    let lo = (centre - step).max(opts.pump_range.0);
    let hi = (centre + step).min(opts.pump_range.1);
    let rate_at = |wp: f64| -> Result<f64> {
        match opts.policy.collection_waists(ev, wp) {
            Some((ws, wi)) => Ok(ev.pair_rate(&ev.with_waists(wp, ws, wi))?),
            None => Ok(f64::NEG_INFINITY),
        }
    };
    let (mut wp_star, mut r_star) = golden_section_max(rate_at, lo, hi, 1e-3 * step)?;
    if coarse.rows[best].rate > r_star {
        wp_star = centre;
        r_star = coarse.rows[best].rate;
    }
    let (ws_p, wi_p) = opts.policy.collection_waists(ev, wp_star).expect("bracket is admissible");
    let at_pump_star = SweepRow {
        swept_value: wp_star * 1e6,
        rate: r_star,
        eta: None,
        purity: None,
        pump_waist: wp_star,
        signal_waist: ws_p,
        idler_waist: wi_p,
    };

    // Stage 2: separability waist for that pump waist.
    let g = ev.geometry();
    let eq32 = purity_waist(wp_star, g, &ev.phase_matching().group, ev.crystal().length, opts.alpha)?;

    // Stage 3: purity scan around it, then the η = 𝒫 crossing.
    let ws_grid = linspace(opts.scan_window.0 * eq32, opts.scan_window.1 * eq32, opts.scan_points.max(3));
    let row_at = |ws: f64| full_row(ev, ws * 1e6, wp_star, ws, ws);
    let scan: Vec<SweepRow> = ws_grid.par_iter().map(|&ws| row_at(ws)).collect::<Result<_>>()?;
    let purity = |r: &SweepRow| r.purity.expect("full row");
    let mut j = 0;
    for (k, r) in scan.iter().enumerate() {
        if purity(r) > purity(&scan[j]) {
            j = k;
        }
    }
    let mut at_purity_star = scan[j];
    if j > 0 && j + 1 < scan.len() {
        if let Some(off) = parabolic_vertex(purity(&scan[j - 1]), purity(&scan[j]), purity(&scan[j + 1])) {
            let h = ws_grid[1] - ws_grid[0];
            let refined = row_at(ws_grid[j] + off * h)?;
            if purity(&refined) >= purity(&at_purity_star) {
                at_purity_star = refined;
            }
        }
    }
    let at_eq32 = row_at(eq32)?;
    if purity(&at_eq32) > purity(&at_purity_star) {
        at_purity_star = at_eq32;
    }

    let gap = |r: &SweepRow| r.eta.expect("full row") - purity(r);
    let bracket = scan.windows(2).find(|w| gap(&w[0]).signum() != gap(&w[1]).signum());
    let at_intersection = match bracket {
        Some(w) => Some(bisect_crossing(&row_at, w[0], w[1], &gap)?),
        None => None,
    };

    Ok(OptimizationResult {
        pump_waist_star: wp_star,
        signal_waist_eq32: eq32,
        signal_waist_purity_star: at_purity_star.signal_waist,
        signal_waist_intersection: at_intersection.map(|r| r.signal_waist),
        intersection_found: at_intersection.is_some(),
        at_pump_star,
        at_eq32,
        at_purity_star,
        at_intersection,
        scan,
    })
}

fn bisect_crossing(
    row_at: &(dyn Fn(f64) -> Result<SweepRow> + Sync),
    mut a: SweepRow,
    mut b: SweepRow,
    gap: &dyn Fn(&SweepRow) -> f64,
) -> Result<SweepRow> {
    for _ in 0..60 {
        let mid = row_at(0.5 * (a.signal_waist + b.signal_waist))?;
        let gm = gap(&mid);
        if gm.abs() < 1e-5 || (b.signal_waist - a.signal_waist) < 1e-10 {
            return Ok(mid);
        }
        if gm.signum() == gap(&a).signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(if gap(&a).abs() < gap(&b).abs() { a } else { b })
}
