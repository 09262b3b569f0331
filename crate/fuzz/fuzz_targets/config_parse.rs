#![no_main]

use libfuzzer_sys::fuzz_target;
use risbf_sim::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ScenarioConfig::from_toml(text) {
        // A config that validates must build a setup and survive a round trip.
        cfg.system_setup().expect("validated config builds a setup");
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).expect("serialised config parses");
        assert_eq!(back.digest(), cfg.digest());
    }
});
