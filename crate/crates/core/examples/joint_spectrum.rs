//! Sample the joint spectral amplitude over the filter passbands, write it
//! as CSV and print the Schmidt spectrum.
//!
//! ```text
//! cargo run --release --example joint_spectrum -- /tmp/jsa.csv
//! ```

use spdc_lab::metrics::MetricsOptions;
use spdc_lab::schmidt::{schmidt_purity, Decompose};
use spdc_lab::setup::{Source, SourceParams};
use std::fs::File;
use std::io::BufWriter;

fn main() -> anyhow::Result<()> {
    let source = Source::build(&SourceParams::degenerate_810())?;
    let ev = source.evaluator(MetricsOptions::default())?;
    let grid = ev.jsa(&source.geometry)?;

    if let Some(path) = std::env::args().nth(1) {
        grid.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }

    let (i, j) = grid.argmax();
    println!(
        "{}x{} grid, peak at ({:.3e}, {:.3e}) rad/s",
        grid.omega_s.len(),
        grid.omega_i.len(),
        grid.omega_s[i],
        grid.omega_i[j]
    );
    for decompose in [Decompose::Amplitude, Decompose::Intensity] {
        let s = schmidt_purity(&grid, decompose)?;
        let head: Vec<String> = s.lambdas.iter().take(4).map(|l| format!("{l:.3e}")).collect();
        println!(
            "{decompose:?}: purity {:.6}, K {:.6}, leading weights [{}]",
            s.purity,
            s.schmidt_number,
            head.join(", ")
        );
    }
    Ok(())
}
