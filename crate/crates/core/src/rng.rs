//! Seeded randomness. Every stochastic input in the laboratory is drawn from
//! xoshiro256** seeded through `seed_from_u64`, so a seed fixes the stream on
//! every platform.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256StarStar;

pub type LabRng = Xoshiro256StarStar;

pub fn seeded(seed: u64) -> LabRng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

/// Standard complex Gaussian: independent N(0, ½) real and imaginary parts.
pub fn complex_normal(rng: &mut LabRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
