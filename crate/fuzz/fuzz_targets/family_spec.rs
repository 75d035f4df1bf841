#![no_main]

use libfuzzer_sys::fuzz_target;
use polyvem::harness::FamilySpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = text.parse::<FamilySpec>() {
        let again: FamilySpec = spec.to_string().parse().expect("roundtrip");
        assert_eq!(spec, again);
    }
    if let Ok(spec) = FamilySpec::parse_template(text) {
        assert_eq!(FamilySpec::parse_template(&spec.to_string()).expect("roundtrip"), spec);
    }
});
