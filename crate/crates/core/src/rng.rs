//! Counter-based random stream.
//!
//! Every draw is a pure function of `(seed, stream, counter)`: the simulation
//! uses the group index as the stream and the iteration index as the counter,
//! so results do not depend on how iterations are split across threads.
//!
//! The generator is a keyed hash built from the SplitMix64 finaliser
//! (Stafford's "Mix13" constants). Three rounds fold in the seed, the stream
//! and the counter, each offset by a distinct odd constant.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const STREAM_KEY: u64 = 0xd1b5_4a32_d192_ed03;
const COUNTER_KEY: u64 = 0xaef1_7502_108e_f2d9;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded counter-based generator; cheap to copy and share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed.wrapping_add(GOLDEN)),
        }
    }

    /// Raw 64-bit output for `(stream, counter)`.
    #[inline]
    pub fn bits(&self, stream: u64, counter: u64) -> u64 {
        let s = mix64(self.key ^ stream.wrapping_add(1).wrapping_mul(STREAM_KEY));
        mix64(s ^ counter.wrapping_add(1).wrapping_mul(COUNTER_KEY)).wrapping_add(GOLDEN)
    }

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    #[inline]
    pub fn uniform(&self, stream: u64, counter: u64) -> f64 {
        let mantissa = self.bits(stream, counter) >> 11;
        (mantissa as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}
