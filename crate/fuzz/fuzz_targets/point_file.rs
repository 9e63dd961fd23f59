#![no_main]
use crossproj::io::parse_point_file;
use crossproj::{membership, project, Tolerances};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((x0, y0)) = parse_point_file(text) {
        assert_eq!(x0.dim(), y0.dim());
        assert!(x0.is_finite() && y0.is_finite());
        if let Ok(res) = project(&x0, &y0, &Tolerances::default()) {
            let bound = 1e-9 * (1.0 + x0.norm() * y0.norm());
            for p in res.points() {
                assert!(membership(p, bound));
            }
        }
    }
});
