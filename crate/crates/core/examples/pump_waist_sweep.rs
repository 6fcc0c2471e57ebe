//! Pair rate against pump waist, with the collection waists following the
//! separability condition. Prints CSV to stdout.

use spdc_lab::metrics::MetricsOptions;
use spdc_lab::setup::{Source, SourceParams};
use spdc_lab::sweep::{rate_vs_pump_waist, write_sweep_csv, WaistPolicy};

fn main() -> anyhow::Result<()> {
    let source = Source::build(&SourceParams::degenerate_810())?;
    let ev = source.evaluator(MetricsOptions::default())?;
    let sweep = rate_vs_pump_waist(&ev, (50e-6, 800e-6), 76, WaistPolicy::default())?;
    write_sweep_csv(&sweep.rows, std::io::stdout().lock())?;
    if let Some(k) = sweep.argmax {
        let best = &sweep.rows[k];
        eprintln!("maximum {:.3} pairs/(s mW) at W0p = {} um", best.rate, best.swept_value);
    }
    if !sweep.skipped_um.is_empty() {
        eprintln!("no separable collection waist below {} um", sweep.skipped_um.last().unwrap());
    }
    Ok(())
}
