//! High-precision numeric evaluation of exact scalars.
//!
//! pi and sqrt(2) are generated as big rationals carrying `digits + 10`
//! decimal digits, the scalar is summed exactly in that approximation, and
//! only the final result is rounded to `f64`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{Pow, ToPrimitive, Zero};

use super::{ExactScalar, Rational};

#[derive(Debug)]
pub struct Constants {
    pub pi: Rational,
    pub sqrt2: Rational,
}

fn ten_pow(d: u32) -> BigInt {
    BigInt::from(10u32).pow(d)
}

/// `atan(1/x) * scale` by the alternating Taylor series in fixed point.
fn arctan_inv(x: u32, scale: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut term = scale / &x;
    let mut sum = term.clone();
    let mut k: u32 = 1;
    while !term.is_zero() {
        term /= &x2;
        let t = &term / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
    sum
}

/// pi to `digits` decimal digits (Machin's formula).
pub fn pi_rational(digits: u32) -> Rational {
    let guard = 10;
    let scale = ten_pow(digits + guard);
    let pi = BigInt::from(16) * arctan_inv(5, &scale) - BigInt::from(4) * arctan_inv(239, &scale);
    Rational::new(pi, scale)
}

/// sqrt(2) to `digits` decimal digits.
pub fn sqrt2_rational(digits: u32) -> Rational {
    let scale = ten_pow(digits + 10);
    let root = (BigInt::from(2) * &scale * &scale).sqrt();
    Rational::new(root, scale)
}

/// Cached constants for a given working precision.
pub fn constants(digits: u32) -> Arc<Constants> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Constants>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("constants cache poisoned");
    guard
        .entry(digits)
        .or_insert_with(|| {
            Arc::new(Constants {
                pi: pi_rational(digits + 10),
                sqrt2: sqrt2_rational(digits + 10),
            })
        })
        .clone()
}

/// Exact-in-approximation value of `x` as a big rational at `digits` precision.
pub fn evaluate_rational(x: &ExactScalar, digits: u32) -> Rational {
    let c = constants(digits.max(15));
    let mut acc = Rational::zero();
    let pow_pi = |e: i32| -> Rational {
        let p: Rational = Pow::pow(&c.pi, e.unsigned_abs());
        if e < 0 {
            p.recip()
        } else {
            p
        }
    };
    for (e, q, s2) in x.terms() {
        let mut t = q * pow_pi(e);
        if s2 {
            t *= &c.sqrt2;
        }
        acc += t;
    }
    acc
}

/// Numeric value of an exact scalar; `digits` below 15 are raised to 15.
pub fn evaluate_numeric(x: &ExactScalar, digits: u32) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    rational_to_f64(&evaluate_rational(x, digits))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    if let Some(v) = q.to_f64().filter(|v| v.is_finite() && *v != 0.0) {
        return v;
    }
    // fall back to manual scaling for very large/small magnitudes
    let (n, d) = (q.numer().clone(), q.denom().clone());
    let shift = n.bits() as i64 - d.bits() as i64;
    let mut r = Rational::new(n, d);
    let two = Rational::from_integer(BigInt::from(2));
    let p: Rational = Pow::pow(&two, shift.unsigned_abs());
    if shift > 0 {
        r /= p;
    } else {
        r *= p;
    }
    r.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    #[test]
    fn pi_digits() {
        let p = pi_rational(40);
        let s = format!(
            "{:.0}",
            rational_to_f64(&(p * Rational::from_integer(ten_pow(15))))
        );
        assert_eq!(s, "3141592653589793");
    }

    #[test]
    fn reference_values() {
        let pi2 = ExactScalar::pi_pow(2);
        assert!((evaluate_numeric(&pi2, 20) - 9.869604401089358).abs() < 1e-14);
        let v = ExactScalar::monomial(Rational::one(), -2, true);
        assert!((evaluate_numeric(&v, 20) - 0.143_289_792_062_689).abs() < 1e-15);
        let want = std::f64::consts::SQRT_2 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((evaluate_numeric(&v, 20) - want).abs() < 1e-15 * want);
        assert_eq!(evaluate_numeric(&ExactScalar::zero(), 20), 0.0);
    }

    proptest! {
        #[test]
        fn evaluation_is_multiplicative(
            a in crate::ring::scalar_strategy(),
            b in crate::ring::scalar_strategy(),
        ) {
            let ab = evaluate_numeric(&(&a * &b), 20);
            let prod = evaluate_numeric(&a, 20) * evaluate_numeric(&b, 20);
            prop_assert!((ab - prod).abs() <= 1e-12 * ab.abs().max(prod.abs()));
        }
    }
}
