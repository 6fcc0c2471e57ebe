//! Closed-form separability: the Gaussian purity as a function of the
//! collection waist and the waist that zeroes the cross term, under both
//! conventions for the sinc-to-Gaussian fit constant.

use spdc_lab::jsa::{delta_coefficients, gaussian_purity, purity_waist, AlphaConvention, PhaseMatching};
use spdc_lab::setup::{Source, SourceParams};

fn main() -> anyhow::Result<()> {
    let source = Source::build(&SourceParams::degenerate_810())?;
    let geom = &source.geometry;
    let length = source.crystal.length;
    let group = PhaseMatching::new(geom, &source.crystal)?.group;

    for conv in [AlphaConvention::Consistent, AlphaConvention::Squared] {
        let ws = purity_waist(geom.pump_waist, geom, &group, length, conv)?;
        println!("{conv:?}: separable collection waist {:.2} um at W0p = 310 um", ws * 1e6);
    }

    println!("\n W0s (um)   Gaussian purity");
    for ws_um in [100.0, 145.4, 200.0, 250.0, 300.0, 354.0, 400.0] {
        let g = geom.with_waists(geom.pump_waist, ws_um * 1e-6, ws_um * 1e-6);
        let d = delta_coefficients(&g, &group, length, AlphaConvention::Consistent);
        println!(" {ws_um:8.1}   {:.6}", gaussian_purity(&d));
    }
    Ok(())
}
