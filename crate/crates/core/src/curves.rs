//! Spectral curves in the uniformizing coordinate `z`, with `E = -z^2`
//! reached at `z = i sqrt(E)`.
//!
//! Every curve stores `y(z)` as an exact odd series. The physical density
//! of states is `rho(E) = (e^S / pi) * density_sign * Im y(i sqrt(E))`; the
//! built-in curves are normalized so that `density_sign = +1`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{ExactScalar, Parity, Rational, TruncSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    /// density vanishes like `E^{1/2}`
    Regular,
    /// density diverges like `E^{-1/2}`
    Hard,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Airy { slope: Rational },
    Jt,
    JtSuper,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityParams {
    pub entropy_s: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self { entropy_s: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralCurve {
    id: String,
    kind: CurveKind,
    y_series: TruncSeries,
    edge_class: EdgeClass,
    density_sign: i8,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn pow2(k: i32) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    let mut r = Rational::one();
    for _ in 0..k.unsigned_abs() {
        r *= &two;
    }
    if k < 0 {
        r.recip()
    } else {
        r
    }
}

/// Truncation order (largest stored exponent) used when only a maximum
/// genus is known: `2(3 g_max - 1) + 3`.
pub fn default_order(g_max: u32) -> u32 {
    2 * (3 * g_max.max(1) - 1) + 3
}

impl SpectralCurve {
    /// `y(z) = slope * z`.
    pub fn airy(slope: Rational) -> Result<Self> {
        if slope.is_zero() {
            return Err(Error::invalid("Airy curve needs a nonzero slope"));
        }
        let sign = if slope.is_negative() { -1 } else { 1 };
        let y = TruncSeries::new(
            1,
            vec![ExactScalar::rational(slope.clone())],
            i32::MAX / 4,
            Parity::Odd,
        )?;
        Ok(Self {
            id: format!("airy({slope})"),
            kind: CurveKind::Airy { slope },
            y_series: y,
            edge_class: EdgeClass::Regular,
            density_sign: sign,
        })
    }

    /// `y(z) = sin(2 pi z) / (4 pi)`, all terms through `z^order`.
    pub fn jt(order: u32) -> Result<Self> {
        if order < 3 {
            return Err(Error::invalid(format!(
                "JT curve order must be >= 3, got {order}"
            )));
        }
        let mut coeffs = Vec::new();
        for e in 1..=order as i32 {
            if e % 2 == 0 {
                coeffs.push(ExactScalar::zero());
                continue;
            }
            let k = (e - 1) / 2;
            // (-1)^k 2^(2k-1) pi^(2k) / (2k+1)!
            let mut c = pow2(2 * k - 1) / Rational::from_integer(factorial(e as u32));
            if k % 2 == 1 {
                c = -c;
            }
            coeffs.push(ExactScalar::monomial(c, 2 * k, false));
        }
        Ok(Self {
            id: "jt".into(),
            kind: CurveKind::Jt,
            y_series: TruncSeries::new(1, coeffs, order as i32 + 1, Parity::Odd)?,
            edge_class: EdgeClass::Regular,
            density_sign: 1,
        })
    }

    /// `y(z) = -sqrt(2) cos(2 pi z) / z`, all terms through `z^order`.
    ///
    /// The overall minus sign makes `Im y(i sqrt E)` positive, matching the
    /// bosonic curve's convention.
    pub fn jt_super(order: u32) -> Result<Self> {
        if order < 3 {
            return Err(Error::invalid(format!(
                "super JT curve order must be >= 3, got {order}"
            )));
        }
        let mut coeffs = Vec::new();
        for e in -1..=order as i32 {
            if e % 2 == 0 {
                coeffs.push(ExactScalar::zero());
                continue;
            }
            let k = (e + 1) / 2;
            // -(-1)^k (2 pi)^(2k) / (2k)!
            let mut c = pow2(2 * k) / Rational::from_integer(factorial(2 * k as u32));
            if k % 2 == 0 {
                c = -c;
            }
            coeffs.push(ExactScalar::monomial(c, 2 * k, true));
        }
        Ok(Self {
            id: "jt-super".into(),
            kind: CurveKind::JtSuper,
            y_series: TruncSeries::new(-1, coeffs, order as i32 + 1, Parity::Odd)?,
            edge_class: EdgeClass::Hard,
            density_sign: 1,
        })
    }

    /// Same curve with a different truncation.
    pub fn with_order(&self, order: u32) -> Result<Self> {
        match &self.kind {
            CurveKind::Airy { .. } => Ok(self.clone()),
            CurveKind::Jt => Self::jt(order),
            CurveKind::JtSuper => Self::jt_super(order),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn y_series(&self) -> &TruncSeries {
        &self.y_series
    }

    pub fn edge_class(&self) -> EdgeClass {
        self.edge_class
    }

    pub fn density_sign(&self) -> i8 {
        self.density_sign
    }

    /// Largest exponent of `y` known exactly.
    pub fn max_known_exponent(&self) -> i32 {
        self.y_series.order() - 1
    }

    /// `Im y(i t)` from the closed form; `y(i t)` is purely imaginary.
    pub fn y_imag_closed(&self, t: f64) -> f64 {
        use std::f64::consts::{PI, SQRT_2};
        match &self.kind {
            CurveKind::Airy { slope } => crate::ring::rational_to_f64(slope) * t,
            CurveKind::Jt => (2.0 * PI * t).sinh() / (4.0 * PI),
            CurveKind::JtSuper => SQRT_2 * (2.0 * PI * t).cosh() / t,
        }
    }

    /// `Im y(i t)` by summing the exact truncated series numerically.
    pub fn y_imag_series(&self, t: f64) -> f64 {
        self.y_series
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| {
                // i^e = i * (-1)^((e-1)/2) for odd e
                let sign = if ((e - 1) / 2).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                };
                sign * crate::ring::evaluate_numeric(c, 20) * t.powi(e)
            })
            .sum()
    }

    /// `y(i sqrt E)^2`, always real and non-positive.
    pub fn y_squared_at(&self, energy: f64) -> f64 {
        let im = self.y_imag_closed(energy.sqrt());
        -im * im
    }

    /// `rho(E) = (e^S/pi) |y(i sqrt E)|`.
    pub fn density_of_states(&self, energy: f64, params: DensityParams) -> Result<f64> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::invalid(format!("density needs E > 0, got {energy}")));
        }
        let im = self.y_imag_closed(energy.sqrt());
        Ok(params.entropy_s.exp() / std::f64::consts::PI * f64::from(self.density_sign) * im)
    }

    pub fn dump(&self) -> CurveDump {
        CurveDump {
            id: self.id.clone(),
            edge_class: self.edge_class,
            density_sign: self.density_sign,
            truncation_order: self.y_series.order(),
            coefficients: self
                .y_series
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| CurveTerm {
                    exp: e,
                    coeff: c.clone(),
                })
                .collect(),
            rendering: self.y_series.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveTerm {
    pub exp: i32,
    pub coeff: ExactScalar,
}

/// Exact series dump with a readable rendering alongside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDump {
    pub id: String,
    pub edge_class: EdgeClass,
    pub density_sign: i8,
    pub truncation_order: i32,
    pub coefficients: Vec<CurveTerm>,
    pub rendering: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn airy_coefficients() {
        let c = SpectralCurve::airy(q(1, 1)).unwrap();
        assert!(c.y_series().coeff(1).is_one());
        assert!(c.y_series().coeff(2).is_zero());
        let h = SpectralCurve::airy(q(1, 2)).unwrap();
        assert_eq!(h.y_series().coeff(1), ExactScalar::ratio(1, 2));
        assert!(SpectralCurve::airy(q(0, 1)).is_err());
        assert_eq!(c.edge_class(), EdgeClass::Regular);
    }

    #[test]
    fn jt_taylor_coefficients() {
        let c = SpectralCurve::jt(9).unwrap();
        let y = c.y_series();
        assert_eq!(y.coeff(1), ExactScalar::ratio(1, 2));
        assert_eq!(y.coeff(3), ExactScalar::ratio(-1, 3).shift_pi(2));
        assert_eq!(y.coeff(5), ExactScalar::ratio(1, 15).shift_pi(4));
        assert_eq!(y.order(), 10);
        assert_eq!(y.parity(), Parity::Odd);
        assert!(SpectralCurve::jt(2).is_err());
    }

    #[test]
    fn super_laurent_coefficients() {
        let c = SpectralCurve::jt_super(7).unwrap();
        let y = c.y_series();
        assert_eq!(y.valuation(), Some(-1));
        assert_eq!(y.coeff(-1), -ExactScalar::sqrt2());
        assert_eq!(y.coeff(1), ExactScalar::monomial(q(2, 1), 2, true));
        assert!(y.coeff(0).is_zero());
        assert_eq!(c.edge_class(), EdgeClass::Hard);
    }

    #[test]
    fn airy_is_leading_jt_term() {
        let jt = SpectralCurve::jt(3).unwrap();
        let airy = SpectralCurve::airy(q(1, 2)).unwrap();
        assert_eq!(jt.y_series().truncate(2), airy.y_series().truncate(2));
    }

    #[test]
    fn jt_density_values() {
        let c = SpectralCurve::jt(5).unwrap();
        let p = DensityParams::default();
        assert!(rel(c.density_of_states(1.0, p).unwrap(), 6.782_057_394_607_025) < 1e-13);
        assert!(c.density_of_states(1e-12, p).unwrap() < 1e-5);
        assert!(c.density_of_states(0.0, p).is_err());
        assert!(c.density_of_states(-1.0, p).is_err());
        let s = DensityParams { entropy_s: 2.0 };
        assert!(
            rel(
                c.density_of_states(1.0, s).unwrap(),
                2f64.exp() * 6.782_057_394_607_025
            ) < 1e-13
        );
    }

    #[test]
    fn super_density_values() {
        let c = SpectralCurve::jt_super(5).unwrap();
        let p = DensityParams::default();
        assert!(rel(c.density_of_states(1.0, p).unwrap(), 120.528_388_981_021_77) < 1e-13);
        // hard edge: rho * sqrt(E) -> sqrt(2)/pi
        let lim = std::f64::consts::SQRT_2 / std::f64::consts::PI;
        let e = 1e-10;
        assert!(rel(c.density_of_states(e, p).unwrap() * e.sqrt(), lim) < 1e-8);
        let mut prev = f64::INFINITY;
        for e in [1e-4, 1e-3, 1e-2] {
            let v = c.density_of_states(e, p).unwrap() * e.sqrt();
            assert!(v.is_finite() && v < prev * 10.0);
            prev = v;
        }
    }

    #[test]
    fn airy_density() {
        let c = SpectralCurve::airy(q(1, 2)).unwrap();
        let v = c.density_of_states(4.0, DensityParams::default()).unwrap();
        assert!(rel(v, 1.0 / std::f64::consts::PI) < 1e-15);
        let neg = SpectralCurve::airy(q(-1, 2)).unwrap();
        assert!(
            neg.density_of_states(4.0, DensityParams::default())
                .unwrap()
                > 0.0
        );
    }

    #[test]
    fn density_positive_on_grid() {
        for c in [
            SpectralCurve::jt(5).unwrap(),
            SpectralCurve::jt_super(5).unwrap(),
        ] {
            for i in 1..=100 {
                let e = 0.1 * i as f64;
                assert!(c.density_of_states(e, DensityParams::default()).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn series_continuation_matches_closed_form() {
        use std::f64::consts::PI;
        let jt = SpectralCurve::jt(121).unwrap();
        let sup = SpectralCurve::jt_super(121).unwrap();
        for e in [0.1f64, 1.0, 5.0] {
            let t: f64 = e.sqrt();
            let y2 = -jt.y_imag_series(t).powi(2);
            let rhs = -(2.0 * PI * t).sinh().powi(2) / (16.0 * PI * PI);
            assert!(rel(y2, rhs) < 1e-10, "jt E={e}: {y2} vs {rhs}");
            let y2 = -sup.y_imag_series(t).powi(2);
            let rhs = -(2.0 / e) * (2.0 * PI * t).cosh().powi(2);
            assert!(rel(y2, rhs) < 1e-10, "super E={e}: {y2} vs {rhs}");
        }
    }

    #[test]
    fn default_order_formula() {
        assert_eq!(default_order(1), 7);
        assert_eq!(default_order(3), 19);
    }
}
