//! Replays the checked-in fuzz corpus through the same entry points as the
//! fuzz targets, so regressions surface under `cargo test`.

use std::fs;
use std::path::PathBuf;

use pmqsopt::problems::ProblemInstance;
use pmqsopt_cli::config::{parse_horizons, parse_seeds, InstanceConfig, RawConfig, RunConfig};
use pmqsopt_cli::experiment::{IterateFile, Manifest};
use pmqsopt_cli::slope::slope_from_tables;
use pmqsopt_cli::table::{aggregate, Table};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).unwrap(),
            )
        })
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files
}

#[test]
fn config_corpus() {
    let mut accepted = 0;
    for (name, data) in corpus("config") {
        let text = std::str::from_utf8(&data).unwrap();
        if let Ok(raw) = RawConfig::parse(text) {
            assert_eq!(
                RawConfig::parse(&raw.to_text()).as_ref(),
                Ok(&raw),
                "{name}"
            );
            accepted += RunConfig::from_raw(&raw).is_ok() as usize;
            let _ = InstanceConfig::from_raw(&raw);
        }
        let _ = parse_seeds(text);
        let _ = parse_horizons(text);
    }
    assert!(accepted >= 4);
}

#[test]
fn instance_corpus() {
    let mut families = Vec::new();
    for (name, data) in corpus("instance_json") {
        let text = std::str::from_utf8(&data).unwrap();
        if let Ok(inst) = ProblemInstance::from_json(text) {
            let again = inst.to_json().unwrap();
            let back = ProblemInstance::from_json(&again).unwrap();
            assert_eq!(back.to_json().unwrap(), again, "{name}");
            families.push(inst.family());
        }
    }
    families.sort();
    assert_eq!(families, ["fairness", "np", "qcnp", "quad"]);
}

#[test]
fn csv_corpus() {
    let mut accepted = 0;
    for (name, data) in corpus("run_csv") {
        if let Ok(table) = Table::read(data.as_slice()) {
            let text = table.to_csv_string();
            let back = Table::from_csv_str(&text).unwrap();
            assert_eq!(back.to_csv_string(), text, "{name}");
            let _ = aggregate(&[&table, &back]);
            let _ = slope_from_tables(&[table], "r_kkt_sq", None, None);
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn manifest_corpus() {
    let (mut manifests, mut iterates) = (0, 0);
    for (_, data) in corpus("manifest") {
        if let Ok(m) = serde_json::from_slice::<Manifest>(&data) {
            assert!(RunConfig::from_raw(&m.raw_config()).is_ok());
            manifests += 1;
        }
        iterates += serde_json::from_slice::<IterateFile>(&data).is_ok() as usize;
    }
    assert_eq!((manifests, iterates), (1, 1));
}
