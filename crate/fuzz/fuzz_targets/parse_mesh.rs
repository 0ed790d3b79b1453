#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(mesh) = helmholtz_dtn::mesh::parse_mesh(text) {
            // Accepted meshes must survive a text round trip.
            let again = helmholtz_dtn::mesh::parse_mesh(&mesh.to_text()).expect("round trip");
            assert_eq!(again.nodes.len(), mesh.nodes.len());
        }
    }
});
