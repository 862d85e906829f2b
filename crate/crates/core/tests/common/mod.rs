#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rankreinforce::io::InstanceFile;
use rankreinforce::{ComplementModel, SupportedSet};

pub const FOUR_ENTRY_SUPPORTED: [f64; 4] = [10.0, 15.0, 40.0, 114.0];
pub const FOUR_ENTRY_WITH_200: [f64; 8] = [10.0, 24.0, 35.0, 60.0, 80.0, 100.0, 200.0, 220.0];
pub const FOUR_ENTRY_WITH_120: [f64; 8] = [10.0, 24.0, 35.0, 60.0, 80.0, 100.0, 120.0, 220.0];
pub const VIEWS: [f64; 5] = [100.0, 500.0, 700.0, 3000.0, 6000.0];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> InstanceFile {
    InstanceFile::from_json(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

pub fn micro() -> (SupportedSet, ComplementModel) {
    (
        SupportedSet::new(vec![5.0, 12.0]).unwrap(),
        ComplementModel::empirical(vec![10.0, 20.0]).unwrap(),
    )
}

/// Random exact instance with integer scores.
pub fn random_exact(
    rng: &mut ChaCha8Rng,
    n: (usize, usize),
    m: (usize, usize),
    hi: u32,
) -> (SupportedSet, ComplementModel) {
    let n = rng.gen_range(n.0..=n.1);
    let m = rng.gen_range(m.0..=m.1);
    let s: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=hi) as f64).collect();
    let c: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=hi) as f64).collect();
    (
        SupportedSet::new(s).unwrap(),
        ComplementModel::empirical(c).unwrap(),
    )
}

/// `count` log-spaced values from `hi` down to `lo`.
pub fn log_space_desc(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| (hi.ln() + (lo.ln() - hi.ln()) * k as f64 / (count - 1) as f64).exp())
        .collect()
}
