use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Rational;

/// Element of `Q[pi^2, pi^-2] + sqrt(2) Q[pi^2, pi^-2]`.
///
/// Both parts are sparse maps from the (even) exponent of pi to a nonzero
/// rational. Zero entries are never stored, so derived equality is exact
/// equality in the ring.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    one: BTreeMap<i32, Rational>,
    sqrt2: BTreeMap<i32, Rational>,
}

fn insert_add(map: &mut BTreeMap<i32, Rational>, pi_exp: i32, c: Rational) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&pi_exp) {
        Some(v) => {
            *v += c;
            if v.is_zero() {
                map.remove(&pi_exp);
            }
        }
        None => {
            map.insert(pi_exp, c);
        }
    }
}

fn poly_mul(
    a: &BTreeMap<i32, Rational>,
    b: &BTreeMap<i32, Rational>,
    scale: &Rational,
    out: &mut BTreeMap<i32, Rational>,
) {
    for (ea, ca) in a {
        for (eb, cb) in b {
            insert_add(out, ea + eb, ca * cb * scale);
        }
    }
}

impl ExactScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn rational(c: Rational) -> Self {
        Self::monomial(c, 0, false)
    }

    pub fn integer(c: i64) -> Self {
        Self::rational(Rational::from_integer(c.into()))
    }

    /// `num/den` with `den != 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(Rational::new(num.into(), den.into()))
    }

    /// `c * pi^pi_exp`, optionally times `sqrt(2)`. Panics on odd `pi_exp`:
    /// odd powers of pi are outside the ring.
    pub fn monomial(c: Rational, pi_exp: i32, sqrt2: bool) -> Self {
        assert!(
            pi_exp % 2 == 0,
            "odd pi exponent {pi_exp} is outside the ring"
        );
        let mut s = Self::default();
        let map = if sqrt2 { &mut s.sqrt2 } else { &mut s.one };
        insert_add(map, pi_exp, c);
        s
    }

    pub fn pi_pow(pi_exp: i32) -> Self {
        Self::monomial(Rational::one(), pi_exp, false)
    }

    pub fn sqrt2() -> Self {
        Self::monomial(Rational::one(), 0, true)
    }

    pub fn is_zero(&self) -> bool {
        self.one.is_empty() && self.sqrt2.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.sqrt2.is_empty() && self.one.len() == 1 && self.one.get(&0).is_some_and(|c| c.is_one())
    }

    /// Rational (pi^0, no sqrt2) part only, if the scalar is purely rational.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.sqrt2.is_empty() && self.one.len() == 1 {
            return self.one.get(&0).cloned();
        }
        None
    }

    pub fn rational_part(&self) -> &BTreeMap<i32, Rational> {
        &self.one
    }

    pub fn sqrt2_part(&self) -> &BTreeMap<i32, Rational> {
        &self.sqrt2
    }

    /// Flat list of `(pi_exp, coeff, has_sqrt2)` in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational, bool)> {
        self.one
            .iter()
            .map(|(e, c)| (*e, c, false))
            .chain(self.sqrt2.iter().map(|(e, c)| (*e, c, true)))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            one: self.one.iter().map(|(e, c)| (*e, c * k)).collect(),
            sqrt2: self.sqrt2.iter().map(|(e, c)| (*e, c * k)).collect(),
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&Rational::from_integer(k.into()))
    }

    /// Multiply by `pi^pi_exp`.
    pub fn shift_pi(&self, pi_exp: i32) -> Self {
        assert!(pi_exp % 2 == 0);
        Self {
            one: self
                .one
                .iter()
                .map(|(e, c)| (e + pi_exp, c.clone()))
                .collect(),
            sqrt2: self
                .sqrt2
                .iter()
                .map(|(e, c)| (e + pi_exp, c.clone()))
                .collect(),
        }
    }

    /// `a - b sqrt2` for `self = a + b sqrt2`.
    pub fn conjugate(&self) -> Self {
        Self {
            one: self.one.clone(),
            sqrt2: self.sqrt2.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    /// Multiplicative inverse when it exists in the ring.
    ///
    /// `a + b sqrt2` is a unit iff its norm `a^2 - 2 b^2` is a single
    /// monomial `q pi^k` with `q != 0`.
    pub fn inverse(&self) -> Option<Self> {
        let norm = self * &self.conjugate();
        debug_assert!(norm.sqrt2.is_empty());
        if norm.one.len() != 1 {
            return None;
        }
        let (e, q) = norm.one.iter().next().unwrap();
        let inv = Self::monomial(q.recip(), -e, false);
        Some(&self.conjugate() * &inv)
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inverse().map(|r| self * &r)
    }

    /// Highest pi exponent appearing, if any.
    pub fn max_pi_exp(&self) -> Option<i32> {
        let a = self.one.keys().next_back().copied();
        let b = self.sqrt2.keys().next_back().copied();
        a.max(b)
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactScalar({self})")
    }
}

/// Human-readable pi-polynomial, e.g. `1/48 + 1/12*pi^2 - 2*sqrt2*pi^-2`.
impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c, s2) in self.terms() {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let abs = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || (e == 0 && !s2) {
                factors.push(abs.to_string());
            }
            if s2 {
                factors.push("sqrt2".into());
            }
            match e {
                0 => {}
                1 => factors.push("pi".into()),
                _ => factors.push(format!("pi^{e}")),
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = ExactScalar::zero();
        let one = Rational::one();
        let two = Rational::from_integer(BigInt::from(2));
        poly_mul(&self.one, &rhs.one, &one, &mut out.one);
        poly_mul(&self.sqrt2, &rhs.sqrt2, &two, &mut out.one);
        poly_mul(&self.one, &rhs.sqrt2, &one, &mut out.sqrt2);
        poly_mul(&self.sqrt2, &rhs.one, &one, &mut out.sqrt2);
        out
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        self.scale(&-Rational::one())
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        for (e, c) in &rhs.one {
            insert_add(&mut self.one, *e, c.clone());
        }
        for (e, c) in &rhs.sqrt2 {
            insert_add(&mut self.sqrt2, *e, c.clone());
        }
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        for (e, c) in &rhs.one {
            insert_add(&mut self.one, *e, -c);
        }
        for (e, c) in &rhs.sqrt2 {
            insert_add(&mut self.sqrt2, *e, -c);
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        *self += &rhs;
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        ExactScalar::zero()
    }
    fn is_zero(&self) -> bool {
        ExactScalar::is_zero(self)
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        ExactScalar::one()
    }
}

impl From<Rational> for ExactScalar {
    fn from(c: Rational) -> Self {
        ExactScalar::rational(c)
    }
}

impl From<i64> for ExactScalar {
    fn from(c: i64) -> Self {
        ExactScalar::integer(c)
    }
}

// JSON wire form: {"terms":[{"pi_exp":int,"num":"..","den":"..","sqrt2":bool}]}

#[derive(Serialize, Deserialize)]
struct WireTerm {
    pi_exp: i32,
    num: String,
    den: String,
    sqrt2: bool,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    terms: Vec<WireTerm>,
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .map(|(e, c, s2)| WireTerm {
                pi_exp: e,
                num: c.numer().to_string(),
                den: c.denom().to_string(),
                sqrt2: s2,
            })
            .collect();
        Wire { terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = Wire::deserialize(d)?;
        let mut out = ExactScalar::zero();
        for t in wire.terms {
            if t.pi_exp % 2 != 0 {
                return Err(D::Error::custom(format!("odd pi exponent {}", t.pi_exp)));
            }
            let num = BigInt::from_str(&t.num).map_err(D::Error::custom)?;
            let den = BigInt::from_str(&t.den).map_err(D::Error::custom)?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            out += &ExactScalar::monomial(Rational::new(num, den), t.pi_exp, t.sqrt2);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn pi_powers_add_exponents() {
        let p2 = ExactScalar::pi_pow(2);
        assert_eq!(&p2 * &p2, ExactScalar::pi_pow(4));
    }

    #[test]
    fn conjugate_product_is_rational() {
        let a = ExactScalar::one() + ExactScalar::sqrt2();
        let b = ExactScalar::one() - ExactScalar::sqrt2();
        assert_eq!(&a * &b, ExactScalar::integer(-1));
        assert!((&a * &a.conjugate()).sqrt2_part().is_empty());
    }

    #[test]
    fn distributes_over_scalar() {
        let a = ExactScalar::monomial(q(1, 2), 2, false) + ExactScalar::sqrt2();
        let got = &a * &ExactScalar::integer(2);
        let want = ExactScalar::pi_pow(2) + ExactScalar::sqrt2().scale_int(2);
        assert_eq!(got, want);
    }

    #[test]
    fn zero_is_canonical() {
        let a = ExactScalar::pi_pow(2);
        assert!((&a - &a).is_zero());
        assert_eq!(&a - &a, ExactScalar::zero());
        assert_eq!(ExactScalar::zero().to_string(), "0");
    }

    #[test]
    fn unit_inverse() {
        let a = ExactScalar::monomial(q(3, 7), -4, true);
        assert!((&a * &a.inverse().unwrap()).is_one());
        let b = ExactScalar::one() + ExactScalar::sqrt2();
        assert!((&b * &b.inverse().unwrap()).is_one());
        let c = ExactScalar::one() + ExactScalar::pi_pow(2);
        assert!(c.inverse().is_none());
    }

    #[test]
    fn display_renders_pi_polynomial() {
        let v = ExactScalar::ratio(1, 12).shift_pi(2) + ExactScalar::ratio(1, 48);
        assert_eq!(v.to_string(), "1/48 + 1/12*pi^2");
        let w = -ExactScalar::sqrt2().scale_int(2);
        assert_eq!(w.to_string(), "-2*sqrt2");
    }

    #[test]
    fn json_schema() {
        let v = ExactScalar::ratio(-1, 12).shift_pi(2) + ExactScalar::sqrt2();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(
            s,
            r#"{"terms":[{"pi_exp":2,"num":"-1","den":"12","sqrt2":false},{"pi_exp":0,"num":"1","den":"1","sqrt2":true}]}"#
        );
        let back: ExactScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExactScalar>(
            r#"{"terms":[{"pi_exp":1,"num":"1","den":"1","sqrt2":false}]}"#
        )
        .is_err());
    }

    use crate::ring::scalar_strategy as arb_scalar;

    proptest! {
        #[test]
        fn ring_laws(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn json_round_trip(a in arb_scalar()) {
            let s = serde_json::to_string(&a).unwrap();
            let back: ExactScalar = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
