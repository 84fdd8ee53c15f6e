#![no_main]

use adiabaton_cli::parse_manifest;
use adiabaton_cli::persist::manifest_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(manifest) = parse_manifest(text) {
        assert_eq!(
            parse_manifest(&manifest_json(&manifest)).expect("own output parses"),
            manifest
        );
    }
});
