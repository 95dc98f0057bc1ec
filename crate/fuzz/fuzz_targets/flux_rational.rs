#![no_main]

use fluxindex::models::Flux;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = text.parse::<Flux>() {
        assert_eq!(f.to_string().parse::<Flux>().unwrap(), f);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Flux>(&json).unwrap(), f);
        assert!(f.as_f64().is_finite());
    }
    let _ = serde_json::from_str::<Flux>(text);
});
