#![no_main]

use crossfield::mesh::{parse_off, LoadedMesh};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(soup) = parse_off(text) {
        let _ = LoadedMesh::from_soup(soup);
    }
});
