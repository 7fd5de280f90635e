//! Replays the checked-in fuzz corpus through the same round-trip checks the
//! fuzz targets make, and throws arbitrary text at every parser.

use std::fs;
use std::path::PathBuf;

use cltdioph::charfn::CharSpec;
use cltdioph::dioph::AlphaSpec;
use cltdioph::distkit::DiscreteDist;
use cltdioph::rates::parse_sweep_csv;
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn check_alpha(text: &str) -> bool {
    match AlphaSpec::parse(text) {
        Ok(a) => {
            assert_eq!(AlphaSpec::parse(&a.to_string()).unwrap(), a);
            true
        }
        Err(_) => false,
    }
}

fn check_char(text: &str) -> bool {
    match CharSpec::parse(text) {
        Ok(s) => {
            assert_eq!(CharSpec::parse(&s.to_string()).unwrap(), s);
            true
        }
        Err(_) => false,
    }
}

fn check_dist(text: &str) -> bool {
    match DiscreteDist::from_csv(text) {
        Ok(d) => {
            let again = DiscreteDist::from_csv(&d.to_csv()).unwrap();
            assert_eq!(d.positions(), again.positions());
            assert_eq!(d.weights(), again.weights());
            true
        }
        Err(_) => false,
    }
}

fn check_sweep(text: &str) -> bool {
    match parse_sweep_csv(text) {
        Ok(rows) => {
            assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
            true
        }
        Err(_) => false,
    }
}

#[test]
fn corpus_seeds_round_trip() {
    for (target, check) in [
        ("alpha_spec", check_alpha as fn(&str) -> bool),
        ("char_spec", check_char),
        ("dist_csv", check_dist),
        ("sweep_csv", check_sweep),
    ] {
        for (name, text) in seeds(target) {
            // seeds named `*_rejected` document inputs that must fail
            assert_eq!(check(&text), !name.ends_with("_rejected"), "{target}/{name}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parsers_never_panic(text in "(surd|cf|dec|rat|prod|mix|position|n|#)?[-a-z0-9:;=,./#\n ]{0,48}") {
        check_alpha(&text);
        check_char(&text);
        check_dist(&text);
        check_sweep(&text);
    }
}
