//! Splittable counter-based PRNG (splitmix64).
//!
//! The generator state advances by a fixed odd increment and every output
//! is a pure function of the state, so derived substreams are independent
//! of draw order. This is what makes instance generation reproducible
//! per set index regardless of generation order.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Independent stream `index` derived from `seed`. Streams with
    /// distinct indices behave as unrelated generators.
    pub fn substream(seed: u64, index: u64) -> Self {
        let salted = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA));
        SplitMix64 { state: mix(salted) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw from [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
