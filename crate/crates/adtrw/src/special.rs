//! Small special-function helpers: generalized binomial coefficients with
//! sign tracking, log-gamma ratios, and compensated summation.

/// Neumaier-compensated accumulator. Summing long alternating series in one
/// pass keeps the roundoff at one ulp of the running maximum instead of
/// growing with the term count.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Generalized binomial coefficient C(x, k) for real `x` and integer `k`.
///
/// Uses the falling-factorial product for k <= 64 (exact sign handling, no
/// overflow since the running value stays of the order of the result) and
/// log-gamma with sign tracking beyond.
pub fn binom_real(x: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k <= 64 {
        let mut prod = 1.0;
        for j in 0..k {
            prod *= (x - j as f64) / (j as f64 + 1.0);
        }
        return prod;
    }
    // C(x,k) = Gamma(x+1) / (Gamma(k+1) Gamma(x-k+1)); any argument may be a
    // negative non-integer, so carry the gamma signs separately.
    let (ln_num, s_num) = lgamma_sign(x + 1.0);
    let (ln_k, s_k) = lgamma_sign(k as f64 + 1.0);
    let (ln_den, s_den) = lgamma_sign(x - k as f64 + 1.0);
    let sign = (s_num * s_k * s_den) as f64;
    sign * (ln_num - ln_k - ln_den).exp()
}

/// ln|Gamma(x)| together with the sign of Gamma(x).
#[inline]
pub fn lgamma_sign(x: f64) -> (f64, i32) {
    let (l, s) = libm::lgamma_r(x);
    (l, s)
}

/// ln Gamma(x) for x > 0.
#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Gamma(x).
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_matches_integer_cases() {
        assert_eq!(binom_real(5.0, 2), 10.0);
        assert_eq!(binom_real(6.0, 0), 1.0);
        assert!((binom_real(10.0, 7) - 120.0).abs() < 1e-12);
    }

    #[test]
    fn binom_real_argument() {
        // C(2.5, 2) = 2.5 * 1.5 / 2
        assert!((binom_real(2.5, 2) - 1.875).abs() < 1e-15);
        // C(0.5, 3) = 0.5 * (-0.5) * (-1.5) / 6 = 0.0625
        assert!((binom_real(0.5, 3) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn binom_large_k_consistent_with_product() {
        let x = 70.3;
        let via_product: f64 = (0..70).map(|j| (x - j as f64) / (j as f64 + 1.0)).product();
        let via_lgamma = binom_real(x, 70);
        assert!((via_product - via_lgamma).abs() / via_product.abs() < 1e-10);
    }

    #[test]
    fn compensated_sum_recovers_small_term() {
        let mut s = CompensatedSum::new();
        for x in [1e16, 1.0, -1e16] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0); // naive summation would return 0.0
    }
}
