//! Experiment configurations shipped with the binary.

use std::path::Path;

pub const SHIPPED: &[(&str, &str)] = &[
    ("kicked_top_chaotic", include_str!("../experiments/kicked_top_chaotic.toml")),
    ("kicked_top_regular", include_str!("../experiments/kicked_top_regular.toml")),
    ("kicked_top_mixed", include_str!("../experiments/kicked_top_mixed.toml")),
    ("dicke_chaotic", include_str!("../experiments/dicke_chaotic.toml")),
    ("dicke_regular", include_str!("../experiments/dicke_regular.toml")),
    ("dicke_mixed", include_str!("../experiments/dicke_mixed.toml")),
];

pub fn shipped(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Raw text of `source`: a file path if one exists, otherwise a shipped name.
pub fn load(source: &str) -> std::io::Result<String> {
    let path = Path::new(source);
    if path.exists() {
        return std::fs::read_to_string(path);
    }
    shipped(source).map(str::to_owned).ok_or_else(|| {
        std::io::Error::new(std::io::ErrorKind::NotFound, format!("{source}: no such file or shipped experiment"))
    })
}
