//! Shared fixtures for the benchmarks.

use polarcoset::codec::bpsk;
use polarcoset::{dega_profile, CodeSpec, RateProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// DEGA base profile of length `2^n` and dimension `k`.
pub fn profile(n: u32, k: usize, design_snr_db: f64) -> RateProfile {
    dega_profile(n, k, design_snr_db).expect("valid size")
}

/// Channel LLRs for `frames` random codewords at `ebno_db`.
pub fn noisy_frames(spec: &CodeSpec, ebno_db: f64, frames: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = spec.profile.dimension() as f64 / spec.len() as f64;
    let sigma = (1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))).sqrt();
    (0..frames)
        .map(|_| {
            let data: Vec<bool> = (0..spec.info_bits()).map(|_| rng.random()).collect();
            let c = spec.encode(&data).expect("data fits");
            c.iter()
                .map(|&b| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    2.0 * (bpsk(b) + sigma * z) / (sigma * sigma)
                })
                .collect()
        })
        .collect()
}
