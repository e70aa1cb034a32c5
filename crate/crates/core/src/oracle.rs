//! Independent cross-checks for the recursion engine and the closed forms.
//!
//! The residue oracle works with literal multivariate Laurent polynomials:
//! it builds `K(z0, z) = (1/2) int_z^{-z} B(z0, .) / ((y(z) - y(-z)) dx(z))`
//! term by term, substitutes `z -> -z` with the `d(-z) = -dz` sign, and
//! reads off coefficients of `z^-1`. None of the shortcuts used by
//! [`crate::recursion`] (even-pole bookkeeping, the folded `omega_{0,2}`
//! weights, symmetric lookup) are reused here. It only reaches `omega_{0,3}`,
//! `omega_{1,1}` and `omega_{0,4}`.
//!
//! The high-precision module evaluates closed forms in big fixed-point
//! arithmetic, independent of `f64` transcendental functions.

use std::collections::BTreeMap;

use crate::curves::SpectralCurve;
use crate::error::{Error, Result};
use crate::recursion::{Correlator, CorrelatorKey};
use crate::ring::ExactScalar;

/// Expansion depth for `1/(a - b)^2` and `1/(z0 -+ z)`.
const EXPANSION_DEPTH: i32 = 10;
/// Terms with a higher power of `z` cannot reach the residue.
const Z_CAP: i32 = 8;
/// Largest pole index read back (`z_j^-(2k+2)` with `k <= MAX_INDEX`).
pub const MAX_INDEX: u32 = 4;

/// Polynomial in variables `[z, z0, z1, ...]` with integer exponents.
#[derive(Clone, Debug, Default, PartialEq)]
struct Poly {
    terms: BTreeMap<Vec<i32>, ExactScalar>,
}

impl Poly {
    fn add_term(&mut self, exps: Vec<i32>, c: ExactScalar) {
        if c.is_zero() || exps[0] > Z_CAP {
            return;
        }
        let slot = self.terms.entry(exps.clone()).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    fn add(&mut self, other: &Poly) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Coefficient of `z^-1`, as a polynomial with the `z` slot zeroed.
    fn residue_z(&self) -> Poly {
        let mut out = Poly::default();
        for (e, c) in &self.terms {
            if e[0] == -1 {
                let mut e2 = e.clone();
                e2[0] = 0;
                out.add_term(e2, c.clone());
            }
        }
        out
    }
}

fn unit(nvars: usize) -> Vec<i32> {
    vec![0; nvars]
}

/// `B(z, z_j) = dz dz_j / (z - z_j)^2` expanded for `|z| < |z_j|`.
/// With `reflected`, the first point is `-z` and the `-dz` Jacobian is included.
fn bergman_z(nvars: usize, j: usize, reflected: bool) -> Poly {
    let mut p = Poly::default();
    for m in 0..=EXPANSION_DEPTH {
        let mut e = unit(nvars);
        e[0] = m;
        e[j] = -m - 2;
        let mut c = ExactScalar::integer((m + 1) as i64);
        if reflected {
            // (-dz) / (-z - z_j)^2 = -(m+1) (-z)^m / z_j^(m+2)
            if m % 2 == 1 {
                c = -c;
            }
            c = -c;
        }
        p.add_term(e, c);
    }
    p
}

/// Laurent series `y(z) - y(-z)` times `dx/dz = 2z`, inverted by long division.
fn inverse_denominator(curve: &SpectralCurve, len: usize) -> Result<(i32, Vec<ExactScalar>)> {
    let y = curve.y_series();
    // d(z) = 2z (y(z) - y(-z)), computed literally coefficient by coefficient
    let mut d: BTreeMap<i32, ExactScalar> = BTreeMap::new();
    for (e, c) in y.iter() {
        let reflected = if e.rem_euclid(2) == 0 { c.clone() } else { -c };
        let diff = c - &reflected;
        if !diff.is_zero() {
            d.insert(e + 1, diff.scale_int(2));
        }
    }
    let (&low, lead) = d
        .iter()
        .next()
        .ok_or_else(|| Error::invalid("y(z) - y(-z) vanishes identically"))?;
    let inv_lead = lead
        .inverse()
        .ok_or_else(|| Error::NonInvertible(lead.to_string()))?;
    let known = y.order() + 1 - low;
    if (known as usize) < len {
        return Err(Error::Truncation {
            required: len as i32 + low - 1,
            available: y.order() - 1,
        });
    }
    let dcoef = |k: usize| d.get(&(low + k as i32)).cloned().unwrap_or_default();
    let mut inv: Vec<ExactScalar> = Vec::with_capacity(len);
    for k in 0..len {
        if k == 0 {
            inv.push(inv_lead.clone());
            continue;
        }
        let mut acc = ExactScalar::zero();
        for j in 1..=k {
            acc += &(&dcoef(j) * &inv[k - j]);
        }
        inv.push(-(&acc * &inv_lead));
    }
    Ok((-low, inv))
}

/// Curve exponent the oracle needs known exactly.
const CURVE_ORDER: u32 = 2 * (Z_CAP as u32 + 8) + 1;

/// `K(z0, z)` as a polynomial in `[z, z0, ...]` (z0 at slot 1).
fn kernel(curve: &SpectralCurve, nvars: usize) -> Result<Poly> {
    let extended;
    let curve = if curve.max_known_exponent() < CURVE_ORDER as i32 {
        extended = curve.with_order(CURVE_ORDER)?;
        &extended
    } else {
        curve
    };
    // 1/(z0 + z) - 1/(z0 - z) = sum_k ((-1)^k - 1) z^k / z0^(k+1)
    let mut num = Poly::default();
    for k in 0..=EXPANSION_DEPTH + 2 {
        if k % 2 == 1 {
            let mut e = unit(nvars);
            e[0] = k;
            e[1] = -k - 1;
            // times the overall 1/2
            num.add_term(e, ExactScalar::integer(-1));
        }
    }
    let (low, inv) = inverse_denominator(curve, (Z_CAP + 8) as usize)?;
    let mut den = Poly::default();
    for (i, c) in inv.into_iter().enumerate() {
        let mut e = unit(nvars);
        e[0] = low + i as i32;
        den.add_term(e, c);
    }
    Ok(num.mul(&den))
}

/// Moves a correlator polynomial over legs `[a, b, ...]` into slots of a
/// larger variable set. `slots[i]` is the target slot of leg `i`;
/// a target of slot 0 with `reflect` evaluates that leg at `-z`.
fn embed(src: &Poly, slots: &[usize], nvars: usize, reflect: bool) -> Poly {
    let mut out = Poly::default();
    for (e, c) in &src.terms {
        let mut t = unit(nvars);
        let mut c = c.clone();
        for (leg, &slot) in slots.iter().enumerate() {
            let exp = e[leg + 1];
            t[slot] += exp;
            if slot == 0 && reflect {
                if exp.rem_euclid(2) == 1 {
                    c = -c;
                }
                c = -c;
            }
        }
        out.add_term(t, c);
    }
    out
}

/// Strip the `z` slot and convert to a correlator over legs `z0..`.
fn to_correlator(p: &Poly, key: CorrelatorKey, curve: &SpectralCurve) -> Result<Correlator> {
    let mut terms: BTreeMap<Vec<u32>, ExactScalar> = BTreeMap::new();
    for (e, c) in &p.terms {
        let legs = &e[1..];
        let within = legs.iter().all(|&x| x >= -(2 * MAX_INDEX as i32 + 2));
        if !within {
            continue;
        }
        if legs.iter().any(|&x| x > -2 || x % 2 != 0) {
            return Err(Error::invalid(format!(
                "oracle found non-even pole structure {legs:?} in omega_{{{},{}}}",
                key.g, key.n
            )));
        }
        let mut idx: Vec<u32> = legs.iter().map(|&x| ((-x - 2) / 2) as u32).collect();
        idx.sort_unstable();
        if let Some(prev) = terms.insert(idx.clone(), c.clone()) {
            if &prev != c {
                return Err(Error::invalid(format!(
                    "oracle found asymmetric coefficient at {idx:?}"
                )));
            }
        }
    }
    Correlator::from_terms(key, curve.id(), terms)
}

/// Raw `omega_{0,3}` polynomial over `[z, z0, z1, z2]`.
fn omega03_poly(curve: &SpectralCurve) -> Result<Poly> {
    let nv = 4;
    let k = kernel(curve, nv)?;
    let mut f = bergman_z(nv, 2, false).mul(&bergman_z(nv, 3, true));
    f.add(&bergman_z(nv, 3, false).mul(&bergman_z(nv, 2, true)));
    Ok(k.mul(&f).residue_z())
}

pub fn omega_03(curve: &SpectralCurve) -> Result<Correlator> {
    to_correlator(&omega03_poly(curve)?, CorrelatorKey { g: 0, n: 3 }, curve)
}

pub fn omega_11(curve: &SpectralCurve) -> Result<Correlator> {
    let nv = 2;
    let k = kernel(curve, nv)?;
    // B(z, -z) = dz (-dz) / (2z)^2
    let mut b = Poly::default();
    let mut e = unit(nv);
    e[0] = -2;
    b.add_term(e, ExactScalar::ratio(-1, 4));
    to_correlator(&k.mul(&b).residue_z(), CorrelatorKey { g: 1, n: 1 }, curve)
}

pub fn omega_04(curve: &SpectralCurve) -> Result<Correlator> {
    let w03 = omega03_poly(curve)?;
    let nv = 5;
    let k = kernel(curve, nv)?;
    let mut f = Poly::default();
    // legs z1, z2, z3 live in slots 2, 3, 4
    for j in 2..=4usize {
        let rest: Vec<usize> = (2..=4).filter(|&s| s != j).collect();
        // B(z, z_j) * omega_03(-z, rest) + omega_03(z, rest) * B(-z, z_j)
        let w_reflected = embed(&w03, &[0, rest[0], rest[1]], nv, true);
        let w_plain = embed(&w03, &[0, rest[0], rest[1]], nv, false);
        f.add(&bergman_z(nv, j, false).mul(&w_reflected));
        f.add(&w_plain.mul(&bergman_z(nv, j, true)));
    }
    to_correlator(&k.mul(&f).residue_z(), CorrelatorKey { g: 0, n: 4 }, curve)
}

/// Oracle correlator for `(g, n)` in {(0,3), (1,1), (0,4)}.
pub fn oracle_correlator(curve: &SpectralCurve, g: u32, n: u32) -> Result<Correlator> {
    match (g, n) {
        (0, 3) => omega_03(curve),
        (1, 1) => omega_11(curve),
        (0, 4) => omega_04(curve),
        _ => Err(Error::invalid(format!(
            "residue oracle does not cover ({g},{n})"
        ))),
    }
}

/// Restriction of a correlator to indices the oracle can read back.
pub fn restrict_to_oracle_window(c: &Correlator) -> BTreeMap<Vec<u32>, ExactScalar> {
    c.terms()
        .iter()
        .filter(|(k, _)| k.iter().all(|&x| x <= MAX_INDEX))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// Fixed-point evaluation of closed forms at ~50 significant digits.
pub mod high_precision {
    use num_bigint::BigInt;
    use num_traits::{Signed, Zero};

    use crate::ring::{pi_rational, rational_to_f64, Rational};

    const DIGITS: u32 = 60;

    fn scale() -> BigInt {
        BigInt::from(10u32).pow(DIGITS)
    }

    fn from_rational(q: &Rational) -> BigInt {
        (q.numer() * scale()) / q.denom()
    }

    fn to_f64(x: &BigInt) -> f64 {
        rational_to_f64(&Rational::new(x.clone(), scale()))
    }

    fn mul(a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) / scale()
    }

    fn div(a: &BigInt, b: &BigInt) -> BigInt {
        (a * scale()) / b
    }

    fn sqrt(a: &BigInt) -> BigInt {
        (a * scale()).sqrt()
    }

    fn exp(x: &BigInt) -> BigInt {
        // e^x = (e^(x/2^k))^(2^k) with a Taylor series on the reduced argument
        let mut k = 0u32;
        let mut r = x.clone();
        while r.abs() > scale() / BigInt::from(8) {
            r /= 2;
            k += 1;
        }
        let mut term = scale();
        let mut sum = scale();
        let mut i = 1u32;
        loop {
            term = mul(&term, &r) / BigInt::from(i);
            if term.is_zero() {
                break;
            }
            sum += &term;
            i += 1;
        }
        for _ in 0..k {
            sum = mul(&sum, &sum);
        }
        sum
    }

    fn pi() -> BigInt {
        from_rational(&pi_rational(DIGITS + 5))
    }

    fn energy(e: f64) -> BigInt {
        from_rational(&Rational::from_float(e).expect("finite energy"))
    }

    /// `(sqrt 2 / pi) cosh(2 pi sqrt E) / sqrt E`.
    pub fn super_density(e: f64) -> f64 {
        let t = sqrt(&energy(e));
        let x = mul(&(pi() * 2), &t);
        let cosh = (exp(&x) + exp(&-x)) / 2;
        let root2 = sqrt(&(scale() * 2));
        to_f64(&div(&mul(&root2, &cosh), &mul(&pi(), &t)))
    }

    /// `sinh(2 pi sqrt E) / (4 pi^2)`.
    pub fn jt_density(e: f64) -> f64 {
        let t = sqrt(&energy(e));
        let x = mul(&(pi() * 2), &t);
        let sinh = (exp(&x) - exp(&-x)) / 2;
        to_f64(&div(&sinh, &(mul(&pi(), &pi()) * 4)))
    }

    /// `-(2/E) cosh^2(2 pi sqrt E)`.
    pub fn super_y_squared(e: f64) -> f64 {
        let en = energy(e);
        let t = sqrt(&en);
        let x = mul(&(pi() * 2), &t);
        let cosh = (exp(&x) + exp(&-x)) / 2;
        -to_f64(&div(&(mul(&cosh, &cosh) * 2), &en))
    }

    /// `e^(pi^2/beta) / (4 sqrt(pi) beta^(3/2))`.
    pub fn disc_partition(beta: f64) -> f64 {
        let b = energy(beta);
        let p = pi();
        let ex = exp(&div(&mul(&p, &p), &b));
        let den = mul(&(sqrt(&p) * 4), &mul(&b, &sqrt(&b)));
        to_f64(&div(&ex, &den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursion::Recursion;
    use crate::ring::Rational;

    fn jt() -> SpectralCurve {
        SpectralCurve::jt(25).unwrap()
    }

    #[test]
    fn oracle_base_cases_jt() {
        let w03 = omega_03(&jt()).unwrap();
        assert_eq!(w03.terms().len(), 1);
        assert!(w03.coeff(&[0, 0, 0]).is_one());
        let w11 = omega_11(&jt()).unwrap();
        assert_eq!(w11.coeff(&[1]), ExactScalar::ratio(1, 8));
        assert_eq!(w11.coeff(&[0]), ExactScalar::ratio(1, 12).shift_pi(2));
        let w04 = omega_04(&jt()).unwrap();
        assert_eq!(w04.coeff(&[1, 0, 0, 0]), ExactScalar::integer(3));
        assert_eq!(
            w04.coeff(&[0, 0, 0, 0]),
            ExactScalar::integer(2).shift_pi(2)
        );
        assert_eq!(w04.terms().len(), 2);
    }

    #[test]
    fn oracle_agrees_with_engine() {
        for curve in [jt(), SpectralCurve::jt_super(25).unwrap()] {
            let mut r = Recursion::new(curve.clone());
            for (g, n) in [(0, 3), (1, 1), (0, 4)] {
                let o = oracle_correlator(&curve, g, n).unwrap();
                let e = r.compute(g, n).unwrap();
                assert_eq!(
                    o.terms(),
                    &restrict_to_oracle_window(&e),
                    "{} ({g},{n})",
                    curve.id()
                );
            }
        }
    }

    #[test]
    fn super_low_orders() {
        let c = SpectralCurve::jt_super(25).unwrap();
        assert!(omega_03(&c).unwrap().terms().is_empty());
        assert!(omega_04(&c).unwrap().terms().is_empty());
        let w11 = omega_11(&c).unwrap();
        let want = -ExactScalar::sqrt2().scale(&Rational::new(1.into(), 32.into()));
        assert_eq!(w11.coeff(&[0]), want);
        assert_eq!(w11.terms().len(), 1);
    }

    #[test]
    fn high_precision_values() {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(high_precision::super_density(1.0), 120.528_388_981_021_77) < 1e-14);
        assert!(rel(high_precision::jt_density(1.0), 6.782_057_394_607_026) < 1e-14);
        assert!(rel(high_precision::disc_partition(1.0), 2726.966_496_826_969) < 1e-14);
    }
}
