/// Mixes a base seed with a path of indices into an independent seed
/// (splitmix64 finalizer applied per component).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut state = mix(base);
    for &p in path {
        state = mix(state ^ mix(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    state
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
