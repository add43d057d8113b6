#![no_main]

use libfuzzer_sys::fuzz_target;
use pmqsopt::problems::ProblemInstance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = ProblemInstance::from_json(text) {
        // Accepted documents re-serialize to an equivalent instance.
        let again = inst.to_json().expect("valid instance serializes");
        let back = ProblemInstance::from_json(&again).expect("own output parses");
        assert_eq!(back.to_json().unwrap(), again);
    }
});
