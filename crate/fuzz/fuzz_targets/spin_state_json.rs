#![no_main]

use libfuzzer_sys::fuzz_target;
use wehrl_lab::SpinState;

fuzz_target!(|data: &[u8]| {
    if let Ok(state) = SpinState::from_json(data) {
        assert_eq!(state.amplitudes().len(), state.j().dim());
        assert!(state
            .amplitudes()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite()));
        let again = SpinState::from_json(state.to_json().as_bytes()).expect("own output parses");
        assert_eq!(again, state);
    }
});
