#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cofollow::config::PipelineConfig;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Fixture configuration with absolute input paths and output in `out`.
pub fn fixture_config(out: &Path) -> PipelineConfig {
    let dir = crate_dir();
    let mut cfg = PipelineConfig::load(&dir.join("fixtures/fixture.conf")).unwrap();
    cfg.institutions = Some(dir.join("fixtures/institutions.csv"));
    cfg.followers = Some(dir.join("fixtures/followers.jsonl"));
    cfg.descriptions = Some(dir.join("fixtures/descriptions.jsonl"));
    cfg.output = out.to_path_buf();
    cfg
}

/// Relative path to file bytes for every file under `dir`, stamps included.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}
