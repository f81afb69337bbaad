#![no_main]

use friendlab_cli::report::parse_markdown_rows;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_markdown_rows(text);
});
