#![no_main]
use hvac_mpc_core::metrics::Trajectory;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(traj) = Trajectory::read_csv(data) else { return };
    let mut out = Vec::new();
    traj.write_csv(&mut out).expect("write parsed trajectory");
    assert_eq!(Trajectory::read_csv(out.as_slice()).expect("reparse"), traj);
});
