//! Exact coefficient ring and truncated series.

mod numeric;
mod scalar;
mod series;

pub use numeric::{
    constants, evaluate_numeric, evaluate_rational, pi_rational, rational_to_f64, sqrt2_rational,
};
pub use scalar::ExactScalar;
pub use series::{Parity, TruncSeries};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Sub,
    Mul,
}

pub fn scalar_arith(a: &ExactScalar, b: &ExactScalar, op: ScalarOp) -> ExactScalar {
    match op {
        ScalarOp::Add => a + b,
        ScalarOp::Sub => a - b,
        ScalarOp::Mul => a * b,
    }
}

#[cfg(test)]
pub(crate) fn scalar_strategy() -> impl proptest::strategy::Strategy<Value = ExactScalar> {
    use proptest::prelude::*;
    prop::collection::vec((-3i32..=3, -20i64..=20, 1i64..=9, any::<bool>()), 0..5).prop_map(|ts| {
        let mut s = ExactScalar::zero();
        for (e, n, d, s2) in ts {
            s += &ExactScalar::monomial(Rational::new(n.into(), d.into()), 2 * e, s2);
        }
        s
    })
}
