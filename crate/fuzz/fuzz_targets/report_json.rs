#![no_main]

use friendlab_cli::Report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = Report::from_json(text) {
        let json = report.render(friendlab_cli::Format::Json).unwrap();
        assert_eq!(Report::from_json(&json).unwrap(), report);
    }
});
