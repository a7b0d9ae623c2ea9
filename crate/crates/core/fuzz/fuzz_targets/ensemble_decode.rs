#![no_main]

use libfuzzer_sys::fuzz_target;
use squeezed_vacuum::sf_engine::dump;

fuzz_target!(|data: &[u8]| {
    if let Ok(ens) = dump::decode(data) {
        assert_eq!(dump::encode(&ens), data);
    }
});
