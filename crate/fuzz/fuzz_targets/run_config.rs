#![no_main]

use friendlab_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = text.parse::<RunConfig>() {
        let again: RunConfig = config.to_toml().unwrap().parse().unwrap();
        assert_eq!(again, config);
        let _ = config.scenario.build();
    }
});
