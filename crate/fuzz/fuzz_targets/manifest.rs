#![no_main]

use libfuzzer_sys::fuzz_target;
use pmqsopt_cli::config::RunConfig;
use pmqsopt_cli::experiment::{IterateFile, Manifest};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = serde_json::from_slice::<Manifest>(data) {
        let _ = RunConfig::from_raw(&m.raw_config());
    }
    let _ = serde_json::from_slice::<IterateFile>(data);
});
