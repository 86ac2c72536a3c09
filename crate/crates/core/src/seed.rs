//! Deterministic seed fan-out.
//!
//! A single master seed drives every random decision in the pipeline. Each
//! component derives its own stream seed from the master seed plus a string
//! label, so adding or reordering consumers never perturbs the streams of
//! unrelated components.

/// Derives a component seed from a master seed and a label.
///
/// Stable across platforms and releases: FNV-1a over the label, mixed with
/// the master seed through SplitMix64.
pub fn derive(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ h)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
