//! Seeded random sampling of complex points shared by the verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::Lattice;
use crate::{c64, C64};

/// Deterministic generator; one seed fixes every sample drawn from it.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// Uniform in the box [re_lo, re_hi] × [im_lo, im_hi].
    pub fn complex(&mut self, re: (f64, f64), im: (f64, f64)) -> C64 {
        c64(self.uniform(re.0, re.1), self.uniform(im.0, im.1))
    }

    /// Point of the unit box around 0, kept away from the lattice by `margin`.
    pub fn generic_point(&mut self, lat: &Lattice, margin: f64) -> C64 {
        loop {
            let z = self.complex((-0.5, 0.5), (-0.4, 0.4));
            if lat.lattice_distance(z) >= margin {
                return z;
            }
        }
    }

    /// N coordinates whose pairwise differences, and differences shifted by ±η, stay `margin`
    /// away from the lattice.
    pub fn generic_positions(
        &mut self,
        n: usize,
        lat: &Lattice,
        eta: C64,
        margin: f64,
    ) -> Vec<C64> {
        'outer: loop {
            let x: Vec<C64> = (0..n)
                .map(|_| self.complex((0.0, 1.0), (-0.3, 0.3)))
                .collect();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = x[i] - x[j];
                    if lat.lattice_distance(d) < margin
                        || lat.lattice_distance(d + eta) < margin
                        || lat.lattice_distance(d - eta) < margin
                    {
                        continue 'outer;
                    }
                }
            }
            return x;
        }
    }
}
