//! Special functions: exponentially scaled Bessel I0 and the normal CDF.

// Cephes i0e Chebyshev coefficients, interval [0, 8].
#[allow(clippy::excessive_precision)]
const I0_COEFFS_A: [f64; 30] = [
    -4.415_341_646_479_339_5E-18,
    3.330_794_518_822_238_4E-17,
    -2.431_279_846_547_955E-16,
    1.715_391_285_555_133E-15,
    -1.168_533_287_799_345_1E-14,
    7.676_185_498_604_936E-14,
    -4.856_446_783_111_929E-13,
    2.955_052_663_129_64E-12,
    -1.726_826_291_441_556E-11,
    9.675_809_035_373_237E-11,
    -5.189_795_601_635_263E-10,
    2.659_823_724_682_386_6E-9,
    -1.300_025_009_986_248E-8,
    6.046_995_022_541_919E-8,
    -2.670_793_853_940_612E-7,
    1.117_387_539_120_103_7E-6,
    -4.416_738_358_458_750_5E-6,
    1.644_844_807_072_889_6E-5,
    -5.754_195_010_082_104E-5,
    1.885_028_850_958_416_5E-4,
    -5.763_755_745_385_824E-4,
    1.639_475_616_941_335_7E-3,
    -4.324_309_995_050_576E-3,
    1.054_646_039_459_499_8E-2,
    -2.373_741_480_589_947E-2,
    4.930_528_423_967_071E-2,
    -9.490_109_704_804_764E-2,
    1.716_209_015_222_087_7E-1,
    -3.046_826_723_431_984E-1,
    6.767_952_744_094_761E-1,
];

// Interval (8, inf), in 32/x - 2.
#[allow(clippy::excessive_precision)]
const I0_COEFFS_B: [f64; 25] = [
    -7.233_180_487_874_754E-18,
    -4.830_504_485_944_182E-18,
    4.465_621_420_296_76E-17,
    3.461_222_867_697_461E-17,
    -2.827_623_980_516_583_6E-16,
    -3.425_485_619_677_219E-16,
    1.772_560_133_056_526_3E-15,
    3.811_680_669_352_622_4E-15,
    -9.554_846_698_828_307E-15,
    -4.150_569_347_287_222E-14,
    1.540_086_217_521_41E-14,
    3.852_778_382_742_142_6E-13,
    7.180_124_451_383_666E-13,
    -1.794_178_531_506_806_2E-12,
    -1.321_581_184_044_771_3E-11,
    -3.149_916_527_963_241_6E-11,
    1.188_914_710_784_643_9E-11,
    4.940_602_388_224_97E-10,
    3.396_232_025_708_386_5E-9,
    2.266_668_990_498_178E-8,
    2.048_918_589_469_063_8E-7,
    2.891_370_520_834_756_7E-6,
    6.889_758_346_916_825E-5,
    3.369_116_478_255_694_3E-3,
    8.044_904_110_141_088E-1,
];

fn chbevl(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in &coeffs[1..] {
        b2 = b1;
        b1 = b0;
        b0 = x.mul_add(b1, c) - b2;
    }
    0.5 * (b0 - b2)
}

/// `exp(-|x|) * I0(x)`. Finite for every finite `x`.
pub fn bessel_i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 8.0 {
        chbevl(ax.mul_add(0.5, -2.0), &I0_COEFFS_A)
    } else {
        chbevl(32.0 / ax - 2.0, &I0_COEFFS_B) / ax.sqrt()
    }
}

pub fn bessel_i0(x: f64) -> f64 {
    x.abs().exp() * bessel_i0e(x)
}

/// Standard normal CDF, accurate in both tails.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `P(|chi| <= x)` for a Rayleigh envelope with `E|chi|^2 = eps`.
#[inline]
pub fn rayleigh_cdf(x: f64, eps: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x * x / eps).exp_m1()
    }
}

/// Rayleigh density `(2x/eps) exp(-x^2/eps)` on `x >= 0`.
#[inline]
pub fn rayleigh_pdf(x: f64, eps: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        2.0 * x / eps * (-x * x / eps).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power series sum_k (x/2)^(2k) / (k!)^2, summed until negligible.
    fn i0_series(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..500 {
            term *= q / (k * k) as f64;
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn i0_matches_power_series() {
        for &x in &[0.0, 1e-3, 0.5, 1.0, 2.5, 7.9, 8.0, 8.1, 12.0, 20.0, 35.0] {
            let exact = i0_series(x);
            let rel = (bessel_i0(x) - exact).abs() / exact;
            assert!(rel < 1e-13, "x = {x}: rel {rel:e}");
        }
    }

    #[test]
    fn i0e_large_argument_asymptote() {
        // I0(x) e^{-x} ~ 1/sqrt(2 pi x) (1 + 1/(8x) + 9/(128 x^2))
        let x = 1e6;
        let asym = (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x)) / (2.0 * std::f64::consts::PI * x).sqrt();
        assert!((bessel_i0e(x) / asym - 1.0).abs() < 1e-12);
        assert!(bessel_i0e(1e300).is_finite());
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        // Phi(-10) = 7.619853024160527e-24
        assert!((norm_cdf(-10.0) / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_cdf_is_integral_of_pdf() {
        let eps = 0.5;
        let n = 20_000;
        let h = 3.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            acc += rayleigh_pdf(x, eps) * h;
        }
        assert!((acc - rayleigh_cdf(3.0, eps)).abs() < 1e-8);
    }
}
