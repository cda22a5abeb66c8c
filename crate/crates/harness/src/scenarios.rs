//! Scenario files shipped with the runner.

use hvac_mpc_core::config::ExperimentConfig;
use hvac_mpc_core::Error;

const BUNDLED: [(&str, &str); 4] = [
    ("winter_20", include_str!("../scenarios/winter_20.toml")),
    ("winter_20_dr", include_str!("../scenarios/winter_20_dr.toml")),
    ("summer_20", include_str!("../scenarios/summer_20.toml")),
    ("winter_126", include_str!("../scenarios/winter_126.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Parsed configuration of a bundled scenario.
pub fn bundled(name: &str) -> Result<ExperimentConfig, Error> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::config("scenario", format!("no bundled scenario `{name}`")))?;
    ExperimentConfig::from_toml_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_scenarios_parse() {
        for n in names() {
            bundled(n).unwrap_or_else(|e| panic!("{n}: {e}"));
        }
        assert!(bundled("nope").is_err());
        assert_eq!(bundled("winter_20_dr").unwrap().dr.len(), 3);
    }
}
