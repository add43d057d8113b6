#![no_main]

use libfuzzer_sys::fuzz_target;
use pmqsopt_cli::slope::slope_from_tables;
use pmqsopt_cli::table::{aggregate, Table};

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = Table::read(data) {
        let text = table.to_csv_string();
        let back = Table::from_csv_str(&text).expect("own output parses");
        assert_eq!(back.to_csv_string(), text);
        let _ = aggregate(&[&table, &back]);
        let _ = slope_from_tables(&[table], "r_kkt_sq", None, None);
    }
});
