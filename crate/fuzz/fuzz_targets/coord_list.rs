#![no_main]
use crossproj::io::{fmt_f64, parse_coord_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(v) = parse_coord_list(text, "x0") {
        assert!(v.is_finite());
        let rendered = v.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(",");
        let again = parse_coord_list(&rendered, "x0").unwrap();
        assert_eq!(again, v);
    }
});
