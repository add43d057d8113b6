#![no_main]

use libfuzzer_sys::fuzz_target;
use pmqsopt_cli::config::{parse_horizons, parse_seeds, InstanceConfig, RawConfig, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(raw) = RawConfig::parse(text) {
        // The canonical text form parses back to the same entries.
        assert_eq!(RawConfig::parse(&raw.to_text()).as_ref(), Ok(&raw));
        let _ = RunConfig::from_raw(&raw);
        let _ = InstanceConfig::from_raw(&raw);
    }
    let _ = parse_seeds(text);
    let _ = parse_horizons(text);
});
