#![no_main]

use libfuzzer_sys::fuzz_target;
use tailtilt::sim::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::from_json(text) {
        // whatever validates must survive a round trip once defaults are filled
        let r = cfg.resolved();
        let again = ScenarioConfig::from_json(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(again.resolved(), r);
    }
});
