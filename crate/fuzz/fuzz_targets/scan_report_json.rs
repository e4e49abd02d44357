#![no_main]

use libfuzzer_sys::fuzz_target;
use wehrl_lab::conjectures::ScanReport;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = ScanReport::from_json(data) {
        assert_eq!(report.argmin_state.j(), report.j);
        let text = report.to_json();
        let again = ScanReport::from_json(text.as_bytes()).expect("own output parses");
        assert_eq!(again.to_json(), text);
    }
});
