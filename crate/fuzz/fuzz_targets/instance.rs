#![no_main]
use crossproj::io::{parse_instance, render_instance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(inst) = parse_instance(text) {
        let again = parse_instance(&render_instance(&inst)).unwrap();
        assert_eq!(again, inst);
    }
});
