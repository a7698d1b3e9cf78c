//! The calibration files shipped in `profiles/` must load back to exactly
//! the built-in constructor values — they are the same data, on disk.

use std::path::Path;

use photonic_imc::calibrate::DeviceProfile;

fn repo_profile(name: &str) -> DeviceProfile {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../profiles")
        .join(name);
    DeviceProfile::load(&path).unwrap()
}

#[test]
fn shipped_standard_profile_matches_builtin() {
    assert_eq!(repo_profile("standard.cal"), DeviceProfile::standard());
}

#[test]
fn shipped_pulse50ns_profile_matches_builtin() {
    assert_eq!(repo_profile("pulse50ns.cal"), DeviceProfile::pulse50ns());
}
