//! Stable hashing and seed mixing. Values must not depend on the platform or
//! the Rust version, so nothing here goes through `std::hash`.

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-item seed derived from a run-wide seed and the item's name, so each
/// item's random choices are independent of scheduling order.
pub fn item_seed(global: u64, name: &str) -> u64 {
    mix64(global ^ mix64(fnv1a64(name.as_bytes())))
}
