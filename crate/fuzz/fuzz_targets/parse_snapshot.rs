#![no_main]

use adiabaton_cli::parse_snapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_snapshot(text) {
        assert_eq!(table.tau.len(), table.fields.g_p.len());
        assert_eq!(table.tau.len(), table.atoms.a3.len());
    }
});
