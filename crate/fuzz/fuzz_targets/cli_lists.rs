#![no_main]

use libfuzzer_sys::fuzz_target;
use polyvem::harness::{parse_list, parse_usize_list, MeshFamily, StudyKind, TestCase};
use polyvem::BasisKind;

// The comma lists and enum names accepted by `polyvem study`.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ns) = parse_usize_list(text) {
        let joined = ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        assert_eq!(parse_usize_list(&joined).expect("roundtrip"), ns);
    }
    let _ = parse_list::<BasisKind>(text);
    let _ = parse_list::<MeshFamily>(text);
    let _ = text.parse::<StudyKind>();
    let _ = text.parse::<TestCase>();
});
