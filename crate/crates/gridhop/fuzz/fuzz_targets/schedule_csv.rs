#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(schedule) = gridhop::io::schedule_csv::parse_schedule_csv(data, 0.25) {
        // A parsed schedule must survive re-serialization.
        let mut out = Vec::new();
        gridhop::io::schedule_csv::write_schedule_csv(&mut out, &schedule)
            .expect("parsed schedules re-serialize");
    }
});
