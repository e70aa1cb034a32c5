use std::fmt;

use super::ExactScalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    fn of_exponent(e: i32) -> Parity {
        if e.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn compose(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

/// Truncated Laurent series `sum_{e >= low} c_e z^e + O(z^order)`.
///
/// `coeffs[i]` is the coefficient of `z^(low + i)`; every exponent below
/// `order` is known exactly, everything at or above it is unknown.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncSeries {
    low: i32,
    coeffs: Vec<ExactScalar>,
    order: i32,
    parity: Parity,
}

impl TruncSeries {
    /// Builds a series and checks the declared parity against the data.
    pub fn new(low: i32, mut coeffs: Vec<ExactScalar>, order: i32, parity: Parity) -> Result<Self> {
        let keep = (order - low).max(0) as usize;
        coeffs.truncate(keep);
        let s = Self {
            low,
            coeffs,
            order,
            parity,
        };
        if parity != Parity::None {
            for (e, c) in s.iter() {
                if !c.is_zero() && Parity::of_exponent(e) != parity {
                    return Err(Error::invalid(format!(
                        "coefficient of z^{e} contradicts declared {parity:?} parity"
                    )));
                }
            }
        }
        Ok(s.normalized())
    }

    /// Series with parity inferred from the stored coefficients.
    pub fn from_coeffs(low: i32, coeffs: Vec<ExactScalar>, order: i32) -> Self {
        let s = Self::new(low, coeffs, order, Parity::None).expect("no parity constraint");
        let parity = s.infer_parity();
        Self { parity, ..s }
    }

    pub fn monomial(c: ExactScalar, exp: i32, order: i32) -> Self {
        Self::from_coeffs(exp, vec![c], order)
    }

    pub fn one(order: i32) -> Self {
        Self::monomial(ExactScalar::one(), 0, order)
    }

    fn infer_parity(&self) -> Parity {
        let mut p: Option<Parity> = None;
        for (e, c) in self.iter() {
            if c.is_zero() {
                continue;
            }
            let pe = Parity::of_exponent(e);
            match p {
                None => p = Some(pe),
                Some(q) if q != pe => return Parity::None,
                _ => {}
            }
        }
        // the zero series is both; call it even
        p.unwrap_or(Parity::Even)
    }

    /// Drop leading zeros so `low` is the true valuation (when nonzero).
    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i32;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.low = self.low.min(self.order);
        }
        self
    }

    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        (!self.coeffs.is_empty()).then_some(self.low)
    }

    /// Coefficient of `z^e`. Panics if `e` is beyond the truncation order.
    pub fn coeff(&self, e: i32) -> ExactScalar {
        self.try_coeff(e).unwrap_or_else(|| {
            panic!(
                "coefficient z^{e} requested from series truncated at O(z^{})",
                self.order
            )
        })
    }

    pub fn try_coeff(&self, e: i32) -> Option<ExactScalar> {
        if e >= self.order {
            return None;
        }
        if e < self.low {
            return Some(ExactScalar::zero());
        }
        Some(
            self.coeffs
                .get((e - self.low) as usize)
                .cloned()
                .unwrap_or_default(),
        )
    }

    /// Known `(exponent, coefficient)` pairs, zeros included between the ends.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &ExactScalar)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.low + i as i32, c))
    }

    pub fn truncate(&self, order: i32) -> Self {
        let order = order.min(self.order);
        Self::new(self.low, self.coeffs.clone(), order, self.parity).expect("parity preserved")
    }

    pub fn scale(&self, k: &ExactScalar) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * k).collect();
        Self {
            coeffs,
            ..self.clone()
        }
        .normalized()
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i32) -> Self {
        let parity = if k % 2 == 0 {
            self.parity
        } else {
            self.parity.compose(Parity::Odd)
        };
        Self {
            low: self.low + k,
            order: self.order + k,
            parity,
            coeffs: self.coeffs.clone(),
        }
    }

    /// `s(-z)`.
    pub fn reflect(&self) -> Self {
        let coeffs = self
            .iter()
            .map(|(e, c)| if e % 2 == 0 { c.clone() } else { -c })
            .collect();
        Self {
            coeffs,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        let order = self.order.min(other.order);
        let low = self.low.min(other.low).min(order);
        let mut coeffs = vec![ExactScalar::zero(); (order - low).max(0) as usize];
        for (e, c) in self.iter().filter(|(e, _)| *e < order) {
            coeffs[(e - low) as usize] += c;
        }
        for (e, c) in other.iter().filter(|(e, _)| *e < order) {
            if negate {
                coeffs[(e - low) as usize] -= c;
            } else {
                coeffs[(e - low) as usize] += c;
            }
        }
        let parity = if self.parity == other.parity || self.is_zero() || other.is_zero() {
            if self.is_zero() {
                other.parity
            } else {
                self.parity
            }
        } else {
            Parity::None
        };
        Self {
            low,
            coeffs,
            order,
            parity,
        }
        .normalized()
    }

    /// Cauchy product. The result is known up to
    /// `min(order_a + low_b, order_b + low_a)`, which is the minimum of the
    /// operand orders when both start at `z^0`.
    pub fn mul(&self, other: &Self) -> Self {
        let parity = self.parity.compose(other.parity);
        if self.is_zero() || other.is_zero() {
            let order = (self.order + other.low).min(other.order + self.low);
            return Self {
                low: order,
                coeffs: vec![],
                order,
                parity,
            };
        }
        let low = self.low + other.low;
        let order = (self.order + other.low).min(other.order + self.low);
        let len = (order - low).max(0) as usize;
        let mut coeffs = vec![ExactScalar::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j] += &(a * b);
                }
            }
        }
        Self {
            low,
            coeffs,
            order,
            parity,
        }
        .normalized()
    }

    /// `1/s`, known to `O(z^(order - 2 v))` where `v` is the valuation.
    ///
    /// Fails when the series is zero or its leading coefficient is not a
    /// unit of the coefficient ring.
    pub fn reciprocal(&self) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::NonInvertible("zero series".into()))?;
        let lead = &self.coeffs[0];
        let inv_lead = lead
            .inverse()
            .ok_or_else(|| Error::NonInvertible(lead.to_string()))?;
        let rel = (self.order - v) as usize;
        let mut out: Vec<ExactScalar> = Vec::with_capacity(rel);
        for k in 0..rel {
            if k == 0 {
                out.push(inv_lead.clone());
                continue;
            }
            let mut acc = ExactScalar::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                let a = &self.coeffs[j];
                if !a.is_zero() && !out[k - j].is_zero() {
                    acc += &(a * &out[k - j]);
                }
            }
            out.push(-(&acc * &inv_lead));
        }
        let parity = self.parity;
        let r = Self {
            low: -v,
            coeffs: out,
            order: self.order - 2 * v,
            parity,
        }
        .normalized();
        let check = self.mul(&r);
        debug_assert_eq!(check.order(), r.order() + v);
        for (e, c) in check.iter() {
            let expect_one = e == 0;
            if (expect_one && !c.is_one()) || (!expect_one && !c.is_zero()) {
                return Err(Error::NonInvertible(format!(
                    "reciprocal verification failed at z^{e}"
                )));
            }
        }
        Ok(r)
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.iter().filter(|(_, c)| !c.is_zero()) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*z^{e}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.order)
    }
}
