#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| selfish_bandit_cli::fuzzing::policy(data));
