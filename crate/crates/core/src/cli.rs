//! Command dispatch for the `spdc-lab` binary.
//!
//! Every command reads one JSON configuration, writes deterministic CSV and
//! JSON files into the output directory and embeds the resolved
//! configuration in each JSON report. Exit status is 0 on success, 2 for a
//! modelling or configuration error and 3 for an I/O failure; errors are
//! reported on stderr as a single JSON object.

use crate::config::{ConfigError, ResolvedConfig, RunConfig, SCHEMA_VERSION};
use crate::dispersion::{
    external_angle, index_extraordinary, index_ordinary, inverse_group_velocity, walk_off_angle,
    OpticalMode, Polarization,
};
use crate::jsa::AlphaConvention;
use crate::metrics::Evaluator;
use crate::schmidt::schmidt_purity;
use crate::setup::Source;
use crate::sweep::{metrics_vs_waist_ratio, optimize, rate_vs_pump_waist, write_sweep_csv};
use crate::units::SPEED_OF_LIGHT;
use crate::{Error, Result};
use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Pair rate, singles, heralding efficiency and purity.
    Metrics,
    /// Sampled joint spectral amplitude and its Schmidt weights.
    Jsa,
    /// Pair rate against pump waist.
    SweepRate,
    /// Rate, heralding and purity against the collection/pump waist ratio.
    SweepRatio,
    /// Three-stage waist optimisation.
    Optimize,
    /// Indices, cut angle, emission and walk-off angles.
    DispersionReport,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Metrics => "metrics",
            Command::Jsa => "jsa",
            Command::SweepRate => "sweep-rate",
            Command::SweepRatio => "sweep-ratio",
            Command::Optimize => "optimize",
            Command::DispersionReport => "dispersion-report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphaArg {
    /// The squared fit constant, as the separability condition is usually
    /// quoted.
    Paper,
    /// The fit constant used by the Gaussian joint amplitude itself.
    Consistent,
}

impl From<AlphaArg> for AlphaConvention {
    fn from(a: AlphaArg) -> Self {
        match a {
            AlphaArg::Paper => AlphaConvention::Squared,
            AlphaArg::Consistent => AlphaConvention::Consistent,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "spdc-lab", version, about = "Waist-optimised SPDC photon-pair source modelling")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub grid_resolution: Option<usize>,
    /// Include spatial walk-off of the extraordinary pump.
    #[arg(long)]
    pub walk_off: bool,
    #[arg(long, value_enum)]
    pub alpha_convention: Option<AlphaArg>,
    /// Number of samples in sweep commands.
    #[arg(long)]
    pub steps: Option<usize>,
}

impl Cli {
    /// Load the configuration and apply the command-line overrides.
    pub fn resolve_config(&self) -> Result<ResolvedConfig> {
        let ResolvedConfig { mut config, base_dir } = RunConfig::load(&self.config)?;
        if let Some(n) = self.grid_resolution {
            config.numerics.grid_resolution = n;
        }
        if self.walk_off {
            config.numerics.walk_off_enabled = true;
        }
        if let Some(a) = self.alpha_convention {
            config.numerics.alpha_convention = a.into();
        }
        if let Some(s) = self.steps {
            config.sweep.pump_waist_steps = s;
            config.sweep.ratio_steps = s;
        }
        Ok(config.resolve(base_dir)?)
    }
}

/// Status code for an error: 3 for I/O, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Config(ConfigError::Read { .. }) => 3,
        _ => 2,
    }
}

pub fn error_json(e: &Error) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

/// Parse arguments, run, report. Returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

/// Run one command; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let resolved = cli.resolve_config()?;
    run_command(cli.command, &resolved, &cli.out)
}

pub fn run_command(command: Command, cfg: &ResolvedConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let source = Source::build(&cfg.source_params()?)?;
    let mut w = Writer { out, cfg, command, written: Vec::new() };
    match command {
        Command::DispersionReport => dispersion_report(&source, &mut w)?,
        _ => {
            let ev = source.evaluator(cfg.metrics_options())?;
            match command {
                Command::Metrics => metrics(&ev, &mut w)?,
                Command::Jsa => jsa(&ev, &mut w)?,
                Command::SweepRate => sweep_rate(&ev, &mut w)?,
                Command::SweepRatio => sweep_ratio(&ev, &mut w)?,
                Command::Optimize => {
                    let result = optimize(&ev, cfg.optimize_options())?;
                    w.csv("optimize_scan.csv", |f| write_sweep_csv(&result.scan, f))?;
                    w.json("optimize.json", "result", &result)?;
                }
                Command::DispersionReport => unreachable!(),
            }
        }
    }
    Ok(w.written)
}

struct Writer<'a> {
    out: &'a Path,
    cfg: &'a ResolvedConfig,
    command: Command,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn create(&mut self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok((path, BufWriter::new(file)))
    }

    fn csv(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let (path, mut f) = self.create(name)?;
        body(&mut f).and_then(|_| f.flush()).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, key: &str, value: &T) -> Result<()> {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command.name(),
            "config": self.cfg.config,
            key: value,
        });
        let (path, mut f) = self.create(name)?;
        serde_json::to_writer_pretty(&mut f, &doc)
            .map_err(std::io::Error::from)
            .and_then(|_| writeln!(f))
            .and_then(|_| f.flush())
            .map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

fn metrics(ev: &Evaluator, w: &mut Writer) -> Result<()> {
    let report = ev.report(ev.geometry())?;
    w.csv("metrics.csv", |f| report.write_csv(f))?;
    w.json("metrics.json", "report", &report)
}

fn jsa(ev: &Evaluator, w: &mut Writer) -> Result<()> {
    let grid = ev.jsa(ev.geometry())?;
    let spectrum = schmidt_purity(&grid, ev.options().decompose)?;
    w.csv("jsa.csv", |f| grid.write_csv(f))?;
    w.csv("schmidt.csv", |f| spectrum.write_csv(f))?;
    let (i, j) = grid.argmax();
    let summary = json!({
        "resolution": [grid.omega_s.len(), grid.omega_i.len()],
        "normalization": grid.normalization,
        "peak_rad_per_s": [grid.omega_s[i], grid.omega_i[j]],
        "purity": spectrum.purity,
        "schmidt_number": spectrum.schmidt_number,
        "leading_lambdas": &spectrum.lambdas[..spectrum.lambdas.len().min(10)],
    });
    w.json("jsa.json", "summary", &summary)
}

fn sweep_rate(ev: &Evaluator, w: &mut Writer) -> Result<()> {
    let cfg = &w.cfg.config.sweep;
    let [lo, hi] = cfg.pump_waist_range_um;
    let sweep = rate_vs_pump_waist(ev, (lo * 1e-6, hi * 1e-6), cfg.pump_waist_steps, w.cfg.waist_policy())?;
    w.csv("sweep_rate.csv", |f| write_sweep_csv(&sweep.rows, f))?;
    let summary = json!({
        "argmax": sweep.argmax.map(|k| &sweep.rows[k]),
        "skipped_um": sweep.skipped_um,
        "rows": sweep.rows.len(),
    });
    w.json("sweep_rate.json", "summary", &summary)
}

fn sweep_ratio(ev: &Evaluator, w: &mut Writer) -> Result<()> {
    let cfg = &w.cfg.config.sweep;
    let [lo, hi] = cfg.ratio_range;
    let rows = metrics_vs_waist_ratio(ev, (lo, hi), cfg.ratio_steps, ev.geometry().pump_waist)?;
    w.csv("sweep_ratio.csv", |f| write_sweep_csv(&rows, f))?;
    w.json("sweep_ratio.json", "rows", &rows)
}

fn dispersion_report(source: &Source, w: &mut Writer) -> Result<()> {
    let m = &source.crystal.material;
    let theta = source.crystal.cut_angle;
    let g = &source.geometry;
    let group = |mode: &OpticalMode| -> Result<f64> { Ok(SPEED_OF_LIGHT * inverse_group_velocity(mode, theta, m)?) };
    let ext_s = external_angle(g.theta_s, g.signal.wavelength, m)?;
    let ext_i = external_angle(g.theta_i, g.idler.wavelength, m)?;
    let walk_c = walk_off_angle(source.collinear_cut_angle, g.pump.wavelength, m)?;
    let walk = walk_off_angle(theta, g.pump.wavelength, m)?;
    let summary = json!({
        "collinear_cut_angle_deg": source.collinear_cut_angle.to_degrees(),
        "cut_angle_deg": theta.to_degrees(),
        "internal_emission_deg": [g.theta_s.to_degrees(), g.theta_i.to_degrees()],
        "external_emission_deg": [ext_s.to_degrees(), ext_i.to_degrees()],
        "full_external_opening_deg": (ext_s + ext_i).to_degrees(),
        "pump_walk_off_deg": walk.to_degrees(),
        "pump_walk_off_collinear_deg": walk_c.to_degrees(),
        "walk_off_change_deg": (walk - walk_c).to_degrees(),
        "d_eff_pm_per_v": source.crystal.d_eff(),
        "index": [
            g.pump.index(m, theta)?,
            g.signal.index(m, theta)?,
            g.idler.index(m, theta)?,
        ],
        "group_index": [group(&g.pump)?, group(&g.signal)?, group(&g.idler)?],
    });

    let [lo, hi] = m.validity_window_nm;
    let mut rows = Vec::new();
    let mut nm = lo.ceil();
    while nm <= hi {
        let lam = nm * 1e-9;
        let o = OpticalMode { polarization: Polarization::Ordinary, ..OpticalMode::type_i(crate::dispersion::Role::Signal, lam) };
        let e = OpticalMode { polarization: Polarization::Extraordinary, ..o };
        rows.push([
            nm,
            index_ordinary(lam, m)?,
            index_extraordinary(lam, theta, m)?,
            index_extraordinary(lam, std::f64::consts::FRAC_PI_2, m)?,
            group(&o)?,
            group(&e)?,
        ]);
        nm += 10.0;
    }
    w.csv("dispersion.csv", |f| {
        writeln!(f, "wavelength_nm,n_o,n_e_cut,n_e_principal,group_index_o,group_index_e_cut")?;
        for r in &rows {
            writeln!(f, "{},{},{},{},{},{}", r[0], r[1], r[2], r[3], r[4], r[5])?;
        }
        Ok(())
    })?;
    w.json("dispersion.json", "report", &summary)
}
