//! Decoding report JSON never panics, and anything accepted re-encodes to a
//! document that decodes to the same value.

#![no_main]

use libfuzzer_sys::fuzz_target;
use stc_cli::{CvOutput, FrontierOutput, TestOutput};
use stc_core::MCConfig;

fn check<T>(data: &[u8])
where
    T: serde::de::DeserializeOwned + serde::Serialize + PartialEq + std::fmt::Debug,
{
    if let Ok(v) = serde_json::from_slice::<T>(data) {
        let text = serde_json::to_string(&v).unwrap();
        let back: T = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }
}

fuzz_target!(|data: &[u8]| {
    check::<CvOutput>(data);
    check::<TestOutput>(data);
    check::<FrontierOutput>(data);
    check::<MCConfig>(data);
});
