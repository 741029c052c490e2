//! Entry points shared by the fuzz targets and the corpus regression test.
//! Each must return without panicking on arbitrary bytes.

use crate::config::{parse_config, resolve, Overrides};
use crate::plot::{path_plot, regret_plot};
use crate::policy::{parse_policy, Slot};
use crate::schema::{parse_path_csv, parse_run_csv, write_path_csv, write_run_csv};

pub fn policy(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for slot in [Slot::Eta, Slot::Gamma] {
        if let Ok(p) = parse_policy(slot, text) {
            for t in [1u64, 64, 1 << 20] {
                let _ = p.resolve(slot, 2, t);
            }
        }
    }
}

pub fn config(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_config(text) {
        if let Ok(cfg) = resolve(&file, &Overrides::default(), None) {
            for l in &cfg.learners {
                for &t in cfg.horizons.iter().take(8) {
                    let _ = l.resolve(t).regime();
                }
            }
        }
    }
}

pub fn run_csv(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_run_csv(text) {
        let again = write_run_csv(&rows).expect("parsed rows serialize");
        let reparsed = parse_run_csv(&again).expect("written rows parse");
        assert_eq!(reparsed.len(), rows.len());
        let _ = regret_plot(&rows);
    }
}

pub fn path_csv(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_path_csv(text) {
        let again = write_path_csv(&rows).expect("parsed rows serialize");
        assert_eq!(parse_path_csv(&again).expect("written rows parse").len(), rows.len());
        let _ = path_plot(&rows);
    }
}
