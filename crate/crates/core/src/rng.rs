//! Seeded pseudo-random numbers for reproducible experiment instances.
//!
//! The generator is xorshift64* with the usual (12, 25, 27) shift triple and
//! multiplier 0x2545F4914F6CDD1D. It is written out here, rather than pulled
//! from a crate, so the exact stream behind every seeded table in the repo can
//! be reproduced from this file alone:
//!
//! ```text
//! s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27;  output = s * 0x2545F4914F6CDD1D
//! ```
//!
//! Uniform doubles take the top 53 bits of the output; normal draws are plain
//! Box-Muller using two fresh uniforms per call (no spare-value caching, so
//! interleaving uniform and normal draws cannot shift the stream).

#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    /// Seed 0 is a fixed point of xorshift; it is remapped to the golden-ratio
    /// constant so every u64 is a usable seed.
    pub fn new(seed: u64) -> Self {
        let state = if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed };
        Rng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut s = self.state;
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        self.state = s;
        s.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform on [0, 1): top 53 bits scaled by 2^-53.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }

    /// Standard normal via Box-Muller. Consumes exactly two uniforms.
    pub fn normal(&mut self) -> f64 {
        let mut u1 = self.uniform01();
        // Guard the log; uniform01 can return exactly 0.
        if u1 < 1e-300 {
            u1 = 1e-300;
        }
        let u2 = self.uniform01();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.uniform01() * n as f64) as usize % n
    }
}
