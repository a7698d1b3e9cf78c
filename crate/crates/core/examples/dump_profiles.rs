//! Writes the built-in calibration profiles to disk so they can be edited
//! and passed back in with `--profile`.
//!
//! Usage: `cargo run -p photonic-imc --example dump_profiles [DIR]`

use photonic_imc::calibrate::DeviceProfile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "profiles".into());
    std::fs::create_dir_all(&dir)?;
    for (name, profile) in [
        ("standard", DeviceProfile::standard()),
        ("pulse50ns", DeviceProfile::pulse50ns()),
    ] {
        let path = std::path::Path::new(&dir).join(format!("{name}.cal"));
        profile.save(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
