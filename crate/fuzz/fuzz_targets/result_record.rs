#![no_main]

use fluxindex_cli::ResultRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rec) = ResultRecord::from_json(text) {
        let back = ResultRecord::from_json(&rec.to_json()).expect("re-parse of a written record");
        assert_eq!(back.config, rec.config);
        assert_eq!(back.numeric_payload(), rec.numeric_payload());
    }
});
