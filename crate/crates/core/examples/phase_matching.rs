//! Cut angle, emission angles and walk-off for the 405 nm → 810 nm BBO
//! source, plus the idler that energy conservation assigns to an 850 nm
//! signal.
//!
//! ```text
//! cargo run --example phase_matching
//! ```

use spdc_lab::dispersion::{
    collinear_cut_angle, emission_angles, energy_conserving_idler, external_angle,
    inverse_group_velocity, walk_off_angle, Material, OpticalMode, Role,
};
use spdc_lab::units::SPEED_OF_LIGHT;

fn main() -> anyhow::Result<()> {
    let bbo = Material::bbo();
    let (pump, signal) = (405e-9, 810e-9);

    let pairs = [(signal, signal), (850e-9, energy_conserving_idler(pump, 850e-9))];
    for (signal, idler) in pairs {
        let theta_c = collinear_cut_angle(pump, signal, idler, &bbo)?;
        let angles = emission_angles(1.5f64.to_radians(), signal, idler, &bbo)?;
        let ext_s = external_angle(angles.signal, signal, &bbo)?;
        let ext_i = external_angle(angles.idler, idler, &bbo)?;
        println!("signal {:.0} nm, idler {:.2} nm", signal * 1e9, idler * 1e9);
        println!("  collinear cut angle   {:.4} deg", theta_c.to_degrees());
        println!("  cut angle (+1.5 deg)  {:.4} deg", angles.cut_angle.to_degrees());
        println!(
            "  internal emission     {:.4} / {:.4} deg",
            angles.signal.to_degrees(),
            angles.idler.to_degrees()
        );
        println!("  external emission     {:.4} / {:.4} deg", ext_s.to_degrees(), ext_i.to_degrees());
        let rho = walk_off_angle(angles.cut_angle, pump, &bbo)?;
        println!("  pump walk-off         {:.4} deg", rho.to_degrees());
    }

    println!("group indices at the cut angle:");
    let theta = emission_angles(1.5f64.to_radians(), signal, signal, &bbo)?.cut_angle;
    for mode in [OpticalMode::type_i(Role::Pump, pump), OpticalMode::type_i(Role::Signal, signal)] {
        let n_g = SPEED_OF_LIGHT * inverse_group_velocity(&mode, theta, &bbo)?;
        println!("  {:?} {:.0} nm  {:.5}", mode.role, mode.wavelength * 1e9, n_g);
    }
    Ok(())
}
