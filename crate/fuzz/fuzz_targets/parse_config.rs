#![no_main]

use adiabaton_cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // anything accepted must survive its own normal form
    if let Ok(config) = parse_config(text) {
        let again = parse_config(&config.to_toml()).expect("normal form parses");
        assert_eq!(again, config);
    }
});
