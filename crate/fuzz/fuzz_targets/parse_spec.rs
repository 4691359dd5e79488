#![no_main]

use libfuzzer_sys::fuzz_target;

use hypbc::io::parse_spec;
use hypbc::Tolerances;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Errors are fine; panics are not. A spec that parses must also either
    // build or be rejected with an error.
    if let Ok(spec) = parse_spec(text, "<fuzz>") {
        let _ = spec.build("<fuzz>", &Tolerances::default());
    }
});
