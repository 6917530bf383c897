//! Prime field arithmetic.
//!
//! Scalars are `u64` values in `[0, p)`. All arithmetic is exact mod `p`,
//! and `p` is capped at `2^31 - 1` so that products never overflow `u64`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible characteristic. `(MAX_P - 1)^2` must fit in `u64`.
pub const MAX_P: u64 = (1 << 31) - 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} exceeds the supported bound {MAX_P}")]
    TooLarge(u64),
}

/// The field F_p for a prime p.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_P {
            return Err(FieldError::TooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Reduce an arbitrary integer into `[0, p)`.
    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.p
    }

    /// All field elements, in the fixed order 0, 1, ..., p-1.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.p
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_primes() {
        assert_eq!(PrimeField::new(4), Err(FieldError::NotPrime(4)));
        assert_eq!(PrimeField::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(PrimeField::new(0), Err(FieldError::NotPrime(0)));
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(97).is_ok());
    }

    #[test]
    fn field_axioms_small_primes() {
        for p in [2u64, 3, 5, 7] {
            let f = PrimeField::new(p).unwrap();
            for a in 0..p {
                for b in 0..p {
                    assert_eq!(f.add(a, b), (a + b) % p);
                    assert_eq!(f.mul(a, b), (a * b) % p);
                    assert_eq!(f.add(f.sub(a, b), b), a);
                }
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                assert_eq!(f.add(a, f.neg(a)), 0);
            }
        }
    }
}
