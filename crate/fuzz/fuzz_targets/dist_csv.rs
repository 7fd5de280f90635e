#![no_main]
use cltdioph::distkit::DiscreteDist;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(d) = DiscreteDist::from_csv(data) {
        let again = DiscreteDist::from_csv(&d.to_csv()).unwrap();
        assert_eq!(d.positions(), again.positions());
        assert_eq!(d.weights(), again.weights());
    }
});
