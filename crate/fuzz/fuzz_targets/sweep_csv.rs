#![no_main]
use cltdioph::rates::parse_sweep_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(rows) = parse_sweep_csv(data) {
        assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(rows.iter().all(|r| r.1 > 0.0 && r.1 <= 1.0));
    }
});
