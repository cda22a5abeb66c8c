#![no_main]
use hvac_mpc_core::identify::ModelBundle;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(model) = ModelBundle::from_json(data) else { return };
    assert_eq!(ModelBundle::from_json(&model.to_json()).expect("reparse"), model);
});
