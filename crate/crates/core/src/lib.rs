//! Photon-pair source modelling for spontaneous parametric down-conversion in
//! bulk uniaxial crystals.
//!
//! The crate computes the three figures of merit of a heralded source (pair
//! rate, heralding efficiency and single-photon spectral purity) as functions
//! of the pump and collection-mode beam waists, and implements the waist
//! tuning procedure that drives the joint spectrum towards separability.
//!
//! Module map:
//!
//! - [`dispersion`]: Sellmeier indices, wave numbers, group velocities,
//!   phase-matching and emission angles.
//! - [`jsa`]: geometry factors, phase mismatch, the joint spectral amplitude
//!   and its Gaussian approximation.
//! - [`schmidt`]: purity from the singular values of a sampled amplitude.
//! - [`metrics`]: filters, absolute pair rate, Hermite-Gauss singles rates and
//!   heralding efficiency.
//! - [`sweep`]: parameter sweeps and the three-stage waist optimizer.
//! - [`config`] and [`cli`]: JSON run configuration and command dispatch.
//!
//! All internal quantities are SI (m, rad/s, rad/m). Conversions from the
//! laboratory units used in configuration files live in [`units`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dispersion;
pub mod jsa;
pub mod metrics;
pub mod numeric;
pub mod schmidt;
pub mod setup;
pub mod sweep;
pub mod units;

mod error;

pub use error::{Error, Result};
