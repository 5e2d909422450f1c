//! Stable (platform- and run-independent) hashing for seeds and provenance.
//!
//! `std::hash` offers no stability guarantee across releases, and every seed
//! in this pipeline must reproduce byte-identical outputs, so the two small
//! primitives live here instead.

/// FNV-1a over a byte slice. Used for provenance hashes of volume payloads
/// and for deriving per-subject seeds from string ids.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// splitmix64 finalizer: decorrelates a base seed and a salt into a fresh
/// stream seed. Every stage that needs its own RNG derives it this way.
pub fn mix64(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one subject's work, derived from the master seed and the
/// subject id string.
pub fn subject_seed(master: u64, subject_id: &str) -> u64 {
    mix64(master, fnv1a64(subject_id.as_bytes()))
}

/// Hex rendering used wherever a hash lands in a manifest.
pub fn hex64(h: u64) -> String {
    format!("{h:016x}")
}
