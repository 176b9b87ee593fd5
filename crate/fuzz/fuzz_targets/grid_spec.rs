#![no_main]

use libfuzzer_sys::fuzz_target;
use stc_cli::grid::{parse_grid, parse_int_grid, MAX_GRID_LEN};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_grid(s) {
        assert!(!values.is_empty() && values.len() <= MAX_GRID_LEN);
        assert!(values.iter().all(|v| v.is_finite()));
    }
    if let Ok(values) = parse_int_grid(s) {
        assert!(values.len() <= MAX_GRID_LEN);
    }
});
