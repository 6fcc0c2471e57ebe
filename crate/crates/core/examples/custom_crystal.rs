//! Crystal data from a JSON file. The built-in BBO table is written to a
//! temporary directory, edited, and picked up by name through the
//! `SPDC_LAB_CRYSTAL_DIR` override.

use spdc_lab::dispersion::{collinear_cut_angle, Material, CRYSTAL_DIR_ENV};

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("spdc-lab-crystals");
    std::fs::create_dir_all(&dir)?;

    let mut custom = Material::bbo();
    custom.name = "BBO-stronger".into();
    custom.d11_pm_per_v = 2.3;
    std::fs::write(dir.join("BBO-stronger.json"), serde_json::to_string_pretty(&custom)?)?;

    std::env::set_var(CRYSTAL_DIR_ENV, &dir);
    let loaded = Material::named("BBO-stronger")?;
    let theta = collinear_cut_angle(405e-9, 810e-9, 810e-9, &loaded)?;
    println!(
        "{}: d_eff {:.4} pm/V at the collinear cut {:.4} deg",
        loaded.name,
        loaded.d_eff(theta, 0.0),
        theta.to_degrees()
    );
    Ok(())
}
