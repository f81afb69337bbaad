#![no_main]

use friendlab_core::models::ModelSpec;
use friendlab_core::record::{parse_record_line, OutcomeRecord};
use friendlab_core::scenario::{ScenarioKind, ScenarioSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if parse_record_line(line).is_err() {
        return;
    }
    let s = ScenarioSpec::preset(ScenarioKind::Bong).build().unwrap();
    let model = ModelSpec::named("kent").build(&s).unwrap();
    for ctx in s.contexts() {
        let layout = model.layout(ctx);
        if let Ok(record) = OutcomeRecord::from_json_line(line, &layout) {
            let again = OutcomeRecord::from_json_line(&record.to_json_line(&layout), &layout).unwrap();
            assert_eq!(again, record);
        }
    }
});
