use num_complex::Complex64;
use proptest::prelude::*;

use qnls::functionals::mass;
use qnls::evolution::InitialData;
use qnls::spectral::{convolve, transform, Direction, FourierGrid, SpectralField};

fn field(grid: &FourierGrid, re: &[f64], im: &[f64]) -> SpectralField {
    let kmax = grid.kmax();
    SpectralField::from_modes(grid, |k| {
        if k.abs() > kmax {
            return Complex64::new(0.0, 0.0);
        }
        let i = (k + kmax) as usize;
        Complex64::new(re[i], im[i])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(p in 3u32..8, len in 0.5f64..100.0, v in prop::collection::vec(-10.0f64..10.0, 256)) {
        let n = 1usize << p;
        let g = FourierGrid::new(len, n).unwrap();
        let data: Vec<Complex64> = (0..n).map(|j| Complex64::new(v[j], v[n + j])).collect();
        let back = transform(&g, &transform(&g, &data, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        for (a, b) in data.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()) * n as f64);
        }
    }

    #[test]
    fn convolution_is_commutative(re in prop::collection::vec(-1.0f64..1.0, 31), im in prop::collection::vec(-1.0f64..1.0, 31), shift in 0usize..31) {
        let g = FourierGrid::new(7.0, 32).unwrap();
        let f = field(&g, &re, &im);
        let mut re2 = re.clone();
        re2.rotate_left(shift);
        let h = field(&g, &im, &re2);
        let a = convolve(&f, &h).unwrap();
        let b = convolve(&h, &f).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn initial_data_is_deterministic_in_the_seed(seed in 0u64..1000, norm in 0.01f64..5.0, alpha in 0.05f64..0.95) {
        let g = FourierGrid::new(10.0, 64).unwrap();
        let st = InitialData::Gaussian { band: 8, s: 0.0, norm }.build(&g, alpha, seed).unwrap();
        prop_assert!(mass(&st) > 0.0);
        let st2 = InitialData::Gaussian { band: 8, s: 0.0, norm }.build(&g, alpha, seed).unwrap();
        prop_assert_eq!(mass(&st), mass(&st2));
    }
}
