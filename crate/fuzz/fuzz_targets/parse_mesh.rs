#![no_main]

use libfuzzer_sys::fuzz_target;
use polyvem::mesh::{parse_mesh, write_mesh};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mesh) = parse_mesh(text) else {
        return;
    };
    let back = parse_mesh(&write_mesh(&mesh)).expect("written mesh must parse");
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.cells(), mesh.cells());
});
