//! Panel CSV parsing and cluster extraction never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use stc_core::designs::{extract, parse_panel_csv, DesignKind, PanelData};

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = parse_panel_csv(data) else { return };
    let Some(first) = rows.first() else { return };
    let treated = first.cluster.clone();
    let post_start = rows.iter().map(|r| r.time).max().unwrap_or(0);
    let panel = PanelData { rows, treated, post_start };
    for kind in [DesignKind::ClusteredMean, DesignKind::DiD, DesignKind::TwoWayFE, DesignKind::TripleDiff] {
        if let Ok(ex) = extract(&panel, kind) {
            assert_eq!(ex.estimates.controls.len(), ex.control_ids.len());
        }
    }
});
