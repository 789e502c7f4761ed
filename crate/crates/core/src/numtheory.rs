//! Primality, prime search and modular polynomial evaluation.
//!
//! 64-bit primality is deterministic (Miller–Rabin with a witness set proven
//! for the whole `u64` range). Prime search past `u64` goes through a
//! Baillie–PSW test on big integers; the tractability inversion needs it
//! because its point counts routinely exceed `2^64`.

use std::fmt;

use num_bigint::BigUint;
use num_prime::nt_funcs;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// A prime that fits in 64 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(value: u64) -> Result<Self> {
        if is_prime(value) {
            Ok(Prime(value))
        } else {
            Err(Error::NotPrime(value))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

/// Deterministic primality for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    nt_funcs::is_prime64(n)
}

/// Smallest prime `p >= n`.
pub fn next_prime(n: u64) -> Result<Prime> {
    if n <= 2 {
        return Ok(Prime(2));
    }
    let mut c = n | 1;
    loop {
        if is_prime(c) {
            return Ok(Prime(c));
        }
        c = c
            .checked_add(2)
            .ok_or_else(|| Error::Overflow(format!("no 64-bit prime at or above {n}")))?;
    }
}

/// Baillie–PSW probable-prime test; exact below `2^64`.
pub fn is_probable_prime_big(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(v) => is_prime(v),
        None => nt_funcs::is_prime(n, None).probably(),
    }
}

/// Smallest (probable) prime `p >= n` for arbitrarily large `n`.
pub fn next_prime_big(n: &BigUint) -> BigUint {
    if let Some(v) = n.to_u64() {
        if let Ok(p) = next_prime(v) {
            return BigUint::from(p.get());
        }
    }
    if is_probable_prime_big(n) {
        return n.clone();
    }
    nt_funcs::next_prime(n, None).expect("BigUint addition does not overflow")
}

/// `(h_1 + h_2 x + ... + h_s x^(s-1)) mod modulus` by Horner's scheme.
///
/// Coefficients and `x` may be negative; the result is in `[0, modulus)`.
pub fn poly_eval_mod(coeffs: &[i64], x: i64, modulus: u64) -> u64 {
    assert!(modulus >= 1, "modulus must be positive");
    let m = modulus as i128;
    let x = (x as i128).rem_euclid(m);
    let mut acc: i128 = 0;
    for &c in coeffs.iter().rev() {
        acc = (acc * x + (c as i128).rem_euclid(m)) % m;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2u64;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn small_values() {
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        assert!(is_prime(2_147_483_647));
        assert!(trial_division(2_147_483_647));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn agrees_with_trial_division_up_to_a_million() {
        // Sieve as the oracle; trial division would be slow here.
        let n = 1_000_000usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut k = i * i;
                while k <= n {
                    sieve[k] = false;
                    k += i;
                }
            }
            i += 1;
        }
        for (k, &expected) in sieve.iter().enumerate() {
            assert_eq!(is_prime(k as u64), expected, "n = {k}");
        }
        for k in (0..5000u64).chain(999_000..1_000_000) {
            assert_eq!(trial_division(k), sieve[k as usize]);
        }
    }

    #[test]
    fn next_prime_examples() {
        assert_eq!(next_prime(10).unwrap().get(), 11);
        assert_eq!(next_prime(2).unwrap().get(), 2);
        assert_eq!(next_prime(90).unwrap().get(), 97);
        assert_eq!(next_prime(1).unwrap().get(), 2);
        assert!(next_prime(u64::MAX - 1).is_err());
    }

    #[test]
    fn bertrand_window_exhaustive() {
        let mut p = 2u64;
        for n in 2..=1_000_000u64 {
            if p < n {
                p = next_prime(n).unwrap().get();
            }
            assert!(p >= n && p < 2 * n, "n = {n}, p = {p}");
        }
    }

    #[test]
    fn big_prime_search() {
        let n = BigUint::from(10u32).pow(30);
        let p = next_prime_big(&n);
        // 10^30 + 57 is the first prime above 10^30.
        assert_eq!(p, &n + BigUint::from(57u32));
        assert_eq!(next_prime_big(&BigUint::from(90u32)), BigUint::from(97u32));
        assert_eq!(next_prime_big(&p), p);
    }

    #[test]
    fn poly_eval_examples() {
        assert_eq!(poly_eval_mod(&[1, 1], 3, 5), 4);
        assert_eq!(poly_eval_mod(&[0, 0, 0], 7, 11), 0);
        assert_eq!(poly_eval_mod(&[2, 3, 1], 4, 7), 2);
        assert_eq!(poly_eval_mod(&[-1, 1], 0, 5), 4);
    }

    proptest! {
        #[test]
        fn poly_eval_matches_wide_evaluation(
            coeffs in proptest::collection::vec(-1_000_000i64..1_000_000, 1..6),
            x in -1000i64..1000,
            m in 2u64..1_000_000,
        ) {
            // Direct evaluation in i128 stays in range for these magnitudes.
            let mut direct: i128 = 0;
            let mut pow: i128 = 1;
            for &c in &coeffs {
                direct += c as i128 * pow;
                pow *= x as i128;
            }
            let expected = direct.rem_euclid(m as i128) as u64;
            prop_assert_eq!(poly_eval_mod(&coeffs, x, m), expected);
        }
    }
}
