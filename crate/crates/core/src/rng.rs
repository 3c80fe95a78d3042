//! Self-contained deterministic pseudo-random streams (splitmix64).
//!
//! Sampling is seeded per sample index so results never depend on evaluation
//! order, and no external RNG crate can shift outputs between builds.

use crate::numkit::Vector;

#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Stream {
    /// Derive an independent stream from a seed and a path of indices.
    pub fn derive(seed: u64, path: &[u64]) -> Stream {
        let mut state = seed ^ 0xD1B5_4A32_D192_ED03;
        let mut acc = splitmix64(&mut state);
        for &p in path {
            state ^= p.wrapping_mul(0xA24B_AED4_963E_E407);
            acc ^= splitmix64(&mut state);
        }
        Stream { state: acc }
    }

    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let mut u1 = self.uniform();
        if u1 <= f64::MIN_POSITIVE {
            u1 = f64::MIN_POSITIVE;
        }
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn gaussian_vector(&mut self, n: usize) -> Vector {
        Vector::new((0..n).map(|_| self.gaussian()).collect())
    }

    /// Uniform direction on the unit sphere in R^n.
    pub fn sphere_direction(&mut self, n: usize) -> Vector {
        loop {
            let g = self.gaussian_vector(n);
            if let Some(d) = g.normalized() {
                return d;
            }
        }
    }
}
