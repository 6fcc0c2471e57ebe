//! Rate, heralding efficiency and purity as the collection waists grow from
//! 0.3 to 1.2 times the pump waist.

use spdc_lab::metrics::MetricsOptions;
use spdc_lab::setup::{Source, SourceParams};
use spdc_lab::sweep::{metrics_vs_waist_ratio, write_sweep_csv};

fn main() -> anyhow::Result<()> {
    let source = Source::build(&SourceParams::degenerate_810())?;
    let ev = source.evaluator(MetricsOptions::default())?;
    let rows = metrics_vs_waist_ratio(&ev, (0.3, 1.2), 19, source.geometry.pump_waist)?;
    write_sweep_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}
