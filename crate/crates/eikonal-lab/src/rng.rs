//! Seeded linear congruential generator.
//!
//! Fixed constants (modulus 2^64, multiplier 6364136223846793005, increment
//! 1442695040888963407) so that ports in other languages reproduce every
//! draw bit-exactly.

#[derive(Clone, Debug)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.state
    }

    /// Uniform draw in [0, 1) with 53 bits of mantissa.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform draw in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_sequence() {
        // First outputs for seed 0; pinned so cross-language ports can check.
        let mut rng = Lcg::new(0);
        assert_eq!(rng.next_u64(), 1442695040888963407);
        assert_eq!(rng.next_u64(), 1876011003808476466);
    }

    #[test]
    fn unit_interval() {
        let mut rng = Lcg::new(12345);
        for _ in 0..1000 {
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
