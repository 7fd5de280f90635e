#![no_main]
use cltdioph::dioph::AlphaSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if data.len() > 256 {
        return;
    }
    if let Ok(a) = AlphaSpec::parse(data) {
        let again = AlphaSpec::parse(&a.to_string()).unwrap();
        assert_eq!(a, again);
        let _ = a.to_f64();
    }
});
