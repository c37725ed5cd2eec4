#![no_main]

use libfuzzer_sys::fuzz_target;
use slvw_core::io::RadialCache;

fuzz_target!(|data: &[u8]| {
    if let Ok(cache) = RadialCache::decode(data) {
        let again = RadialCache::decode(&cache.encode()).expect("re-encoded cache must decode");
        assert_eq!(cache, again);
    }
});
