//! Effect of pump spatial walk-off on the pair rate and heralding
//! efficiency, at the published waists and at the separable waist.

use spdc_lab::jsa::JsaOptions;
use spdc_lab::metrics::MetricsOptions;
use spdc_lab::setup::{Source, SourceParams};

fn main() -> anyhow::Result<()> {
    let source = Source::build(&SourceParams::degenerate_810())?;
    let plain = source.evaluator(MetricsOptions::default())?;
    let walk = source.evaluator(MetricsOptions {
        jsa: JsaOptions { walk_off: true, ..JsaOptions::default() },
        ..MetricsOptions::default()
    })?;

    for ws_um in [145.4, 279.0] {
        let g = source.geometry.with_waists(source.geometry.pump_waist, ws_um * 1e-6, ws_um * 1e-6);
        let (r0, r1) = (plain.pair_rate(&g)?, walk.pair_rate(&g)?);
        let (e0, _) = plain.eta_and_purity(&g)?;
        let (e1, _) = walk.eta_and_purity(&g)?;
        println!(
            "W0s {ws_um:6.1} um: rate {r0:.4} -> {r1:.4} ({:+.2}%), eta {e0:.4} -> {e1:.4} ({:+.2}%)",
            100.0 * (r1 / r0 - 1.0),
            100.0 * (e1 / e0 - 1.0)
        );
    }
    Ok(())
}
