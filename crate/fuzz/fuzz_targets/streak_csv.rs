#![no_main]

use libfuzzer_sys::fuzz_target;
use slvw_core::io::{read_streak_csv, write_streak_csv};
use slvw_core::ionization::SpotProfile;

fuzz_target!(|data: &[u8]| {
    let profile = SpotProfile::RvbDonut { width: 1.0 };
    if let Ok(scans) = read_streak_csv(data, profile, 1.0) {
        let mut out = Vec::new();
        write_streak_csv(&mut out, &scans).unwrap();
        assert_eq!(read_streak_csv(out.as_slice(), profile, 1.0).unwrap(), scans);
    }
});
