#![allow(dead_code)]

use spdc_lab::metrics::{Evaluator, MetricsOptions};
use spdc_lab::setup::{Source, SourceParams};

pub const C: f64 = 299_792_458.0;

pub fn degenerate() -> Source {
    Source::build(&SourceParams::degenerate_810()).expect("degenerate source")
}

pub fn nondegenerate() -> Source {
    Source::build(&SourceParams::nondegenerate_850()).expect("nondegenerate source")
}

pub fn evaluator(source: &Source) -> Evaluator {
    source.evaluator(MetricsOptions::default()).expect("evaluator")
}

/// BBO indices typed in directly from the Eimerl et al. (1987) fit, λ in µm.
pub fn eimerl_no(lambda_um: f64) -> f64 {
    let l2 = lambda_um * lambda_um;
    (2.7359 + 0.01878 / (l2 - 0.01822) - 0.01354 * l2).sqrt()
}

pub fn eimerl_ne(lambda_um: f64) -> f64 {
    let l2 = lambda_um * lambda_um;
    (2.3753 + 0.01224 / (l2 - 0.01667) - 0.01516 * l2).sqrt()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
