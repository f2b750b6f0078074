//! Named configurations shipped with the binary.

use crate::config::ExperimentConfig;
use crate::error::{bad_config, Result};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".json")))),*
        ];
    };
}

presets!(
    "gaussian-sgld",
    "gaussian-msgld",
    "gaussian-asgld",
    "mixture-sgld",
    "mixture-msgld",
    "mixture-asgld",
    "ravine-sgld",
    "ravine-sghmc",
    "ravine-psgld",
    "ravine-asgld",
    "ravine-msgld",
    "landsat-sgld",
    "landsat-sghmc",
    "landsat-psgld",
    "landsat-asgld",
    "landsat-msgld",
    "landsat-asgld-sparse",
);

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match PRESETS.iter().find(|(n, _)| *n == name) {
        Some((_, text)) => ExperimentConfig::from_json(text),
        None => bad_config(format!("unknown preset `{name}`; see `list-presets`")),
    }
}
