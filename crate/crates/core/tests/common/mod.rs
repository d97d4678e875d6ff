//! Independent oracles and fixture builders shared by integration tests and
//! the acceptance suite.
#![allow(dead_code)]

pub mod fixtures;
pub mod fuzz_fixtures;
pub mod loop_fixture;
pub mod pipeline_fixture;
pub mod probe_oracle;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};

/// Writes `n` random-byte files (0..=512 bytes, biased toward printable and
/// newline bytes) under `dir`.
pub fn write_random_files(dir: &Path, n: usize, seed: u64) -> Vec<PathBuf> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let sub = dir.join(format!("random{seed}"));
    std::fs::create_dir_all(&sub).unwrap();
    (0..n)
        .map(|i| {
            let len = rng.gen_range(0..=512);
            let bytes: Vec<u8> = (0..len)
                .map(|_| match rng.gen_range(0..4) {
                    0 => rng.gen(),
                    1 => b"\n \t-0123456789"[rng.gen_range(0..14)],
                    _ => b"pushopeksizxz 0123456789\n"[rng.gen_range(0..25)],
                })
                .collect();
            let p = sub.join(format!("f{i:05}"));
            std::fs::write(&p, bytes).unwrap();
            p
        })
        .collect()
}
