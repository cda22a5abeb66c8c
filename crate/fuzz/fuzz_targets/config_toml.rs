#![no_main]
use hvac_mpc_core::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = ExperimentConfig::from_toml_str(data) {
        let _ = cfg.validate();
    }
});
