#![no_main]
use hvac_mpc_core::series::{read_weather_csv, write_weather_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(records) = read_weather_csv(data) else { return };
    let mut out = Vec::new();
    write_weather_csv(&mut out, &records).expect("write parsed records");
    assert_eq!(read_weather_csv(out.as_slice()).expect("reparse"), records);
});
