#![no_main]
use cltdioph::charfn::CharSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if data.len() > 256 {
        return;
    }
    if let Ok(s) = CharSpec::parse(data) {
        let again = CharSpec::parse(&s.to_string()).unwrap();
        assert_eq!(s, again);
        let u = s.one_minus_abs(1.5);
        assert!((0.0..=1.0).contains(&u) || u.is_nan());
    }
});
