#![no_main]

use libfuzzer_sys::fuzz_target;

use hypbc::io::GridField;

fuzz_target!(|data: &[u8]| {
    // Accepted buffers must re-encode to the same bytes they came from.
    if let Ok(field) = GridField::decode(data) {
        let bytes = field.encode();
        assert_eq!(bytes.as_slice(), data, "encode(decode(x)) != x");
        let again = GridField::decode(&bytes).expect("re-decode");
        assert_eq!(again.encode(), bytes);
    }
});
