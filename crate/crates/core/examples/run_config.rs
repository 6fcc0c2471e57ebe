//! Drive any command from a JSON configuration, exactly as the binary does.
//!
//! ```text
//! cargo run --release --example run_config -- examples/degenerate_810.json metrics /tmp/out
//! ```

use anyhow::Context;
use clap::ValueEnum;
use spdc_lab::cli::{run_command, Command};
use spdc_lab::config::RunConfig;
use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().context("usage: run_config <config.json> [command] [out-dir]")?);
    let command = match args.next() {
        Some(c) => Command::from_str(&c, true).map_err(anyhow::Error::msg)?,
        None => Command::Metrics,
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spdc-lab"));

    let resolved = RunConfig::load(&config)?;
    let c = &resolved.config;
    println!(
        "{} nm -> {} + {:.2} nm, W0p {} um, W0s {} um",
        c.pump.wavelength_nm.unwrap_or_default(),
        c.collection.signal_wavelength_nm,
        c.collection.idler_wavelength_nm.unwrap_or_default(),
        c.pump.waist_um,
        c.collection.waist_um
    );
    for path in run_command(command, &resolved, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
