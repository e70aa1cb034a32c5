//! Volume polynomials, JT / super-JT closed forms and Laplace-transform checks.
//!
//! Conventions:
//! - A correlator term `c / z^(2k+2)` corresponds to `c b^(2k) / (2k+1)!`,
//!   which gives `V_{1,1}(b) = b^2/48 + pi^2/12` (the matrix-model
//!   normalization, which includes the order-2 automorphism of the torus).
//!   [`Convention::Mirzakhani`] doubles `V_{1,1}` and leaves everything else alone.
//! - Trumpet: `Theta(b; beta) = exp(-b^2 / (4 beta)) / (2 sqrt(pi beta))`.
//!   With this normalization the gluing and direct-correlator partition
//!   functions agree exactly (ratio 1) at every genus.
//! - Closed-form partition functions are `e^(S chi) pi^(-1/2) sum_p c_p beta^p`,
//!   with an extra `exp(pi^2 / beta)` on the disc.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadResult};
use crate::recursion::{Correlator, CorrelatorKey, Recursion};
use crate::ring::{evaluate_numeric, ExactScalar, Rational};

const PI: f64 = std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Jt,
    Mirzakhani,
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jt" => Ok(Convention::Jt),
            "mirzakhani" => Ok(Convention::Mirzakhani),
            _ => Err(Error::invalid(format!(
                "unknown convention {s:?} (jt|mirzakhani)"
            ))),
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Jt => "jt",
            Convention::Mirzakhani => "mirzakhani",
        })
    }
}

/// Polynomial in `b_i^2`: sorted degree vector `(d_1..d_n)` -> coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumePolynomial {
    pub g: u32,
    pub n: u32,
    pub convention: Convention,
    terms: BTreeMap<Vec<u32>, ExactScalar>,
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, i| acc * i)
}

fn double_factorial_odd(k: u32) -> BigInt {
    // (2k+1)!!
    (0..=k).fold(BigInt::from(1), |acc, i| acc * (2 * i + 1))
}

impl VolumePolynomial {
    pub fn from_terms(
        g: u32,
        n: u32,
        convention: Convention,
        terms: impl IntoIterator<Item = (Vec<u32>, ExactScalar)>,
    ) -> Result<Self> {
        CorrelatorKey::new(g, n)?;
        let mut map: BTreeMap<Vec<u32>, ExactScalar> = BTreeMap::new();
        for (mut k, v) in terms {
            if k.len() != n as usize {
                return Err(Error::invalid(format!(
                    "degree vector {k:?} has wrong arity for n={n}"
                )));
            }
            k.sort_unstable();
            if v.is_zero() {
                continue;
            }
            if let Some(prev) = map.get(&k) {
                if prev != &v {
                    return Err(Error::invalid(format!(
                        "asymmetric coefficients for degrees {k:?}: {prev} vs {v}"
                    )));
                }
            }
            map.insert(k, v);
        }
        Ok(Self {
            g,
            n,
            convention,
            terms: map,
        })
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, ExactScalar> {
        &self.terms
    }

    /// Coefficient of `prod b_i^(2 d_i)` for degrees in any order.
    pub fn coeff(&self, degrees: &[u32]) -> ExactScalar {
        let mut k = degrees.to_vec();
        k.sort_unstable();
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.iter().sum()).max()
    }

    /// Terms of maximal total degree.
    pub fn leading_part(&self) -> BTreeMap<Vec<u32>, ExactScalar> {
        let top = self.total_degree();
        self.terms
            .iter()
            .filter(|(k, _)| Some(k.iter().sum::<u32>()) == top)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    /// Rescales into the requested convention (only `(1,1)` differs).
    pub fn with_convention(&self, convention: Convention) -> Self {
        let mut out = self.clone();
        if (self.g, self.n) == (1, 1) && self.convention != convention {
            let factor = match convention {
                Convention::Mirzakhani => ExactScalar::integer(2),
                Convention::Jt => ExactScalar::ratio(1, 2),
            };
            out.terms = self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * &factor))
                .collect();
        }
        out.convention = convention;
        out
    }

    pub fn scaled(&self, s: &ExactScalar) -> Self {
        let mut out = self.clone();
        out.terms = self
            .terms
            .iter()
            .map(|(k, v)| (k.clone(), v * s))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out
    }

    /// Numeric value at boundary lengths `b`.
    pub fn evaluate(&self, b: &[f64], digits: u32) -> Result<f64> {
        if b.len() != self.n as usize {
            return Err(Error::invalid(format!(
                "expected {} boundary lengths, got {}",
                self.n,
                b.len()
            )));
        }
        if b.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid(
                "boundary lengths must be finite and non-negative",
            ));
        }
        let sq: Vec<f64> = b.iter().map(|x| x * x).collect();
        let mut total = 0.0;
        for (degrees, c) in &self.terms {
            let cv = evaluate_numeric(c, digits);
            // the stored degree vector is sorted; the polynomial is symmetric,
            // so sum over distinct assignments of degrees to legs
            total += cv * monomial_symmetric_sum(degrees, &sq);
        }
        Ok(total)
    }

    pub fn to_json(&self) -> VolumeJson {
        let mut terms = Vec::new();
        for (k, v) in &self.terms {
            for perm in distinct_permutations(k) {
                terms.push(VolumeTermJson {
                    degrees: perm,
                    coeff: v.clone(),
                });
            }
        }
        VolumeJson {
            g: self.g,
            n: self.n,
            convention: self.convention,
            terms,
        }
    }

    pub fn from_json(j: &VolumeJson) -> Result<Self> {
        let v = Self::from_terms(
            j.g,
            j.n,
            j.convention,
            j.terms.iter().map(|t| (t.degrees.clone(), t.coeff.clone())),
        )?;
        // every permutation must be listed
        let listed: usize = j.terms.iter().filter(|t| !t.coeff.is_zero()).count();
        let expected: usize = v.terms.keys().map(|k| distinct_permutations(k).len()).sum();
        if listed != expected {
            return Err(Error::invalid(
                "volume JSON does not list every permuted term exactly once",
            ));
        }
        Ok(v)
    }

    /// One row per (permuted) term: `d1,..,dn,coeff,value`.
    pub fn to_csv(&self, digits: u32) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.n).map(|i| format!("d{i}")).collect();
        let _ = writeln!(out, "{},coeff,value", header.join(","));
        for row in self.to_json().terms {
            let ds: Vec<String> = row.degrees.iter().map(u32::to_string).collect();
            let _ = writeln!(
                out,
                "{},\"{}\",{:e}",
                ds.join(","),
                row.coeff,
                evaluate_numeric(&row.coeff, digits)
            );
        }
        out
    }
}

impl std::fmt::Display for VolumePolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, v) in &self.terms {
            for perm in distinct_permutations(k) {
                if !first {
                    f.write_str(" + ")?;
                }
                first = false;
                write!(f, "({v})")?;
                for (i, d) in perm.iter().enumerate() {
                    match d {
                        0 => {}
                        1 => write!(f, "*b{}^2", i + 1)?,
                        _ => write!(f, "*b{}^{}", i + 1, 2 * d)?,
                    }
                }
            }
        }
        Ok(())
    }
}

fn distinct_permutations(sorted: &[u32]) -> Vec<Vec<u32>> {
    fn rec(rest: &mut Vec<u32>, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let mut seen = Vec::new();
        for i in 0..rest.len() {
            if seen.contains(&rest[i]) {
                continue;
            }
            seen.push(rest[i]);
            let x = rest.remove(i);
            cur.push(x);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut sorted.to_vec(), &mut Vec::new(), &mut out);
    out
}

fn monomial_symmetric_sum(degrees: &[u32], sq: &[f64]) -> f64 {
    distinct_permutations(degrees)
        .iter()
        .map(|p| {
            p.iter()
                .zip(sq)
                .map(|(&d, &x)| x.powi(d as i32))
                .product::<f64>()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeJson {
    pub g: u32,
    pub n: u32,
    pub convention: Convention,
    pub terms: Vec<VolumeTermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeTermJson {
    pub degrees: Vec<u32>,
    pub coeff: ExactScalar,
}

/// Applies `c / z^(2k+2) -> c b^(2k) / (2k+1)!` legwise.
pub fn volume_from_correlator(w: &Correlator) -> VolumePolynomial {
    let terms = w.terms().iter().map(|(k, c)| {
        let den: BigInt = k.iter().map(|&d| factorial(2 * d + 1)).product();
        (k.clone(), c.scale(&Rational::new(BigInt::from(1), den)))
    });
    VolumePolynomial::from_terms(w.key.g, w.key.n, Convention::Jt, terms)
        .expect("correlator keys are stable and symmetric")
}

pub fn evaluate_volume(v: &VolumePolynomial, b: &[f64], digits: u32) -> Result<f64> {
    v.evaluate(b, digits)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

/// One term `coeff * beta^(twice_power/2)` of a closed-form partition function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionTerm {
    /// Twice the (half-integer) power of beta.
    pub twice_beta_power: i32,
    pub coeff: ExactScalar,
    pub has_exp_pi2_over_beta: bool,
}

/// `e^(S chi) pi^(-1/2) sum coeff beta^p [exp(pi^2/beta)]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionClosedForm {
    pub euler: i32,
    pub terms: Vec<PartitionTerm>,
}

impl PartitionClosedForm {
    pub fn evaluate(&self, beta: f64, s: f64) -> Result<f64> {
        check_beta(beta)?;
        let mut total = 0.0;
        for t in &self.terms {
            let mut v = evaluate_numeric(&t.coeff, 20) * beta.powf(t.twice_beta_power as f64 / 2.0);
            if t.has_exp_pi2_over_beta {
                v *= (PI * PI / beta).exp();
            }
            total += v;
        }
        Ok((s * self.euler as f64).exp() * total / PI.sqrt())
    }

    /// Exact ratio `self / other` if the two are proportional term by term.
    pub fn ratio_to(&self, other: &Self) -> Result<ExactScalar> {
        let key = |t: &PartitionTerm| (t.twice_beta_power, t.has_exp_pi2_over_beta);
        let a: BTreeMap<_, _> = self.terms.iter().map(|t| (key(t), &t.coeff)).collect();
        let b: BTreeMap<_, _> = other.terms.iter().map(|t| (key(t), &t.coeff)).collect();
        if self.euler != other.euler || a.keys().ne(b.keys()) || a.is_empty() {
            return Err(Error::invalid(
                "partition functions have different term structure",
            ));
        }
        let mut ratio: Option<ExactScalar> = None;
        for (k, ca) in &a {
            let r = ca
                .checked_div(b[k])
                .ok_or_else(|| Error::NonInvertible(b[k].to_string()))?;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev == r => {}
                Some(prev) => {
                    return Err(Error::invalid(format!(
                        "pipelines are not proportional: ratio {prev} vs {r}"
                    )))
                }
            }
        }
        Ok(ratio.expect("nonempty"))
    }
}

pub fn disc_closed_form() -> PartitionClosedForm {
    PartitionClosedForm {
        euler: 1,
        terms: vec![PartitionTerm {
            twice_beta_power: -3,
            coeff: ExactScalar::ratio(1, 4),
            has_exp_pi2_over_beta: true,
        }],
    }
}

/// `e^S exp(pi^2/beta) / (4 sqrt(pi) beta^(3/2))`.
pub fn disc_partition(beta: f64, s: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(s.exp() * (PI * PI / beta).exp() / (4.0 * PI.sqrt() * beta.powf(1.5)))
}

/// `exp(-b^2 / (4 beta)) / (2 sqrt(pi beta))`.
pub fn trumpet(b: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::invalid(format!(
            "b must be non-negative and finite, got {b}"
        )));
    }
    Ok((-b * b / (4.0 * beta)).exp() / (2.0 * (PI * beta).sqrt()))
}

fn check_genus(g: u32) -> Result<()> {
    if g == 0 {
        return Err(Error::invalid(
            "genus 0 with one boundary is the disc; use disc_partition",
        ));
    }
    Ok(())
}

/// `int_0^inf b db Theta(b; beta) V_{g,1}(b)` in closed form, using
/// `int_0^inf b^(2k+1) e^(-b^2/4beta) db = k! (4 beta)^(k+1) / 2`.
pub fn gluing_closed_form(v: &VolumePolynomial) -> Result<PartitionClosedForm> {
    check_genus(v.g)?;
    if v.n != 1 {
        return Err(Error::invalid(format!(
            "gluing needs V_(g,1), got n={}",
            v.n
        )));
    }
    let v = v.with_convention(Convention::Jt);
    let mut terms = Vec::new();
    for (k, a) in v.terms() {
        let k = k[0];
        // a k! (4 beta)^(k+1) / 2 / (2 sqrt(pi beta)) = a k! 4^k beta^(k+1/2) / sqrt(pi)
        let factor = factorial(k) * BigInt::from(4).pow(k);
        terms.push(PartitionTerm {
            twice_beta_power: 2 * k as i32 + 1,
            coeff: a.scale(&Rational::from_integer(factor)),
            has_exp_pi2_over_beta: false,
        });
    }
    Ok(PartitionClosedForm {
        euler: 1 - 2 * v.g as i32,
        terms,
    })
}

/// Termwise Laplace transform of `omega_{g,1}`:
/// `c / z^(2k+2) -> c 2^k beta^(k+1/2) / ((2k+1)!! sqrt(pi))`.
pub fn correlator_closed_form(w: &Correlator) -> Result<PartitionClosedForm> {
    check_genus(w.key.g)?;
    if w.key.n != 1 {
        return Err(Error::invalid(format!(
            "need omega_(g,1), got n={}",
            w.key.n
        )));
    }
    let mut terms = Vec::new();
    for (k, c) in w.terms() {
        let k = k[0];
        let q = Rational::new(BigInt::from(2).pow(k), double_factorial_odd(k));
        terms.push(PartitionTerm {
            twice_beta_power: 2 * k as i32 + 1,
            coeff: c.scale(&q),
            has_exp_pi2_over_beta: false,
        });
    }
    Ok(PartitionClosedForm {
        euler: 1 - 2 * w.key.g as i32,
        terms,
    })
}

pub fn genus_partition_via_gluing(rec: &mut Recursion, g: u32, beta: f64, s: f64) -> Result<f64> {
    check_genus(g)?;
    check_beta(beta)?;
    let w = rec.compute(g, 1)?;
    gluing_closed_form(&volume_from_correlator(&w))?.evaluate(beta, s)
}

pub fn genus_partition_via_correlator(
    rec: &mut Recursion,
    g: u32,
    beta: f64,
    s: f64,
) -> Result<f64> {
    check_genus(g)?;
    check_beta(beta)?;
    let w = rec.compute(g, 1)?;
    correlator_closed_form(&w)?.evaluate(beta, s)
}

/// Exact gluing / correlator ratio at genus `g` (1 for aligned conventions).
pub fn pipeline_ratio(rec: &mut Recursion, g: u32) -> Result<ExactScalar> {
    check_genus(g)?;
    let w = rec.compute(g, 1)?;
    let glued = gluing_closed_form(&volume_from_correlator(&w))?;
    glued.ratio_to(&correlator_closed_form(&w)?)
}

/// `(e^S sqrt(2) / pi) cosh(2 pi sqrt E) / sqrt E`.
pub fn super_disc_density(energy: f64, s: f64) -> Result<f64> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::invalid(format!(
            "energy must be positive, got {energy}"
        )));
    }
    let t = energy.sqrt();
    Ok(s.exp() * std::f64::consts::SQRT_2 / PI * (2.0 * PI * t).cosh() / t)
}

/// Laplace transform of the super disc density: `e^S sqrt(2) exp(pi^2/beta) / sqrt(pi beta)`.
pub fn super_disc_partition(beta: f64, s: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(s.exp() * std::f64::consts::SQRT_2 * (PI * PI / beta).exp() / (PI * beta).sqrt())
}

/// Cutoff `u_max` in `E = u^2` with `exp(2 pi u - beta u^2) <= exp(-margin)` beyond it.
fn gaussian_cutoff(beta: f64, margin: f64) -> f64 {
    PI / beta + (PI * PI / (beta * beta) + margin / beta).sqrt()
}

/// Relative tail bound for the cut-off integrals, in units of the total value.
fn tail_margin(beta: f64, rel_tol: f64) -> f64 {
    // total ~ exp(pi^2/beta); the tail is below exp(-margin) * poly(u),
    // so margin = pi^2/beta + ln(1/tol) + 40 leaves a wide gap
    PI * PI / beta + (1.0 / rel_tol).ln() + 40.0
}

/// Quadrature of `int_0^inf rho(E) e^(-beta E) dE` for the JT disc density
/// (S = 0), with the substitution `E = u^2`.
pub fn disc_partition_quadrature(beta: f64, rel_tol: f64) -> Result<QuadResult> {
    check_beta(beta)?;
    let umax = gaussian_cutoff(beta, tail_margin(beta, rel_tol));
    let f = |u: f64| 2.0 * u * (2.0 * PI * u).sinh() * (-beta * u * u).exp() / (4.0 * PI * PI);
    integrate(f, 0.0, umax, rel_tol, 0.0)
}

/// Quadrature of the super disc density Laplace transform (S = 0); the
/// `E^(-1/2)` edge is removed by `E = u^2`.
pub fn super_disc_quadrature(beta: f64, rel_tol: f64) -> Result<QuadResult> {
    check_beta(beta)?;
    let umax = gaussian_cutoff(beta, tail_margin(beta, rel_tol));
    let f = |u: f64| {
        2.0 * std::f64::consts::SQRT_2 / PI * (2.0 * PI * u).cosh() * (-beta * u * u).exp()
    };
    integrate(f, 0.0, umax, rel_tol, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{default_order, SpectralCurve};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn rec(gmax: u32) -> Recursion {
        Recursion::new(SpectralCurve::jt(default_order(gmax) + 4).unwrap())
    }

    #[test]
    fn low_volumes() {
        let mut r = rec(2);
        let v03 = volume_from_correlator(&r.compute(0, 3).unwrap());
        assert_eq!(v03.terms().len(), 1);
        assert!(v03.coeff(&[0, 0, 0]).is_one());
        let v11 = volume_from_correlator(&r.compute(1, 1).unwrap());
        assert_eq!(v11.coeff(&[1]), ExactScalar::ratio(1, 48));
        assert_eq!(v11.coeff(&[0]), ExactScalar::ratio(1, 12).shift_pi(2));
        let v04 = volume_from_correlator(&r.compute(0, 4).unwrap());
        assert_eq!(
            v04.coeff(&[0, 0, 0, 0]),
            ExactScalar::integer(2).shift_pi(2)
        );
        assert_eq!(v04.coeff(&[0, 0, 1, 0]), ExactScalar::ratio(1, 2));
        assert_eq!(v04.terms().len(), 2);
    }

    #[test]
    fn genus_two_one_boundary() {
        // V_{2,1}(b) = (4pi^2+b^2)(12pi^2+b^2)(6960pi^4+384pi^2b^2+5b^4)/2211840
        let mut r = rec(2);
        let v = volume_from_correlator(&r.compute(2, 1).unwrap());
        let d = 2_211_840i64;
        let want = [
            (0, 4 * 12 * 6960, 8),
            (1, 4 * 384 * 12 + 4 * 6960 + 12 * 6960, 6),
            (2, 4 * 12 * 5 + 4 * 384 + 12 * 384 + 6960, 4),
            (3, 4 * 5 + 12 * 5 + 384, 2),
            (4, 5, 0),
        ];
        for (deg, num, pe) in want {
            assert_eq!(
                v.coeff(&[deg]),
                ExactScalar::ratio(num, d).shift_pi(pe),
                "b^{}",
                2 * deg
            );
        }
    }

    #[test]
    fn evaluations() {
        let mut r = rec(1);
        let v03 = volume_from_correlator(&r.compute(0, 3).unwrap());
        assert_eq!(evaluate_volume(&v03, &[0.3, 1.0, 7.0], 20).unwrap(), 1.0);
        let v11 = volume_from_correlator(&r.compute(1, 1).unwrap());
        assert!(rel(v11.evaluate(&[0.0], 20).unwrap(), PI * PI / 12.0) < 1e-15);
        assert!(rel(v11.evaluate(&[2.0 * PI], 20).unwrap(), PI * PI / 6.0) < 1e-15);
        assert!(v11.evaluate(&[1.0, 2.0], 20).is_err());
        let v04 = volume_from_correlator(&r.compute(0, 4).unwrap());
        let b = [1.0, 2.0, 3.0, 4.0];
        assert!(rel(v04.evaluate(&b, 20).unwrap(), 2.0 * PI * PI + 15.0) < 1e-15);
    }

    #[test]
    fn linearity_and_convention() {
        let mut r = rec(1);
        let w = r.compute(1, 1).unwrap();
        let v = volume_from_correlator(&w);
        let doubled = volume_from_correlator(&w.scaled(&ExactScalar::integer(2)));
        assert_eq!(doubled, v.scaled(&ExactScalar::integer(2)));
        let m = v.with_convention(Convention::Mirzakhani);
        assert_eq!(m.coeff(&[0]), ExactScalar::ratio(1, 6).shift_pi(2));
        assert_eq!(m.with_convention(Convention::Jt), v);
        let v04 = volume_from_correlator(&r.compute(0, 4).unwrap());
        assert_eq!(
            v04.with_convention(Convention::Mirzakhani).terms(),
            v04.terms()
        );
    }

    #[test]
    fn json_round_trip_and_schema() {
        let mut r = rec(1);
        let v = volume_from_correlator(&r.compute(0, 4).unwrap());
        let j = serde_json::to_value(v.to_json()).unwrap();
        assert_eq!(j["g"], 0);
        assert_eq!(j["convention"], "jt");
        assert_eq!(j["terms"].as_array().unwrap().len(), 5);
        let back: VolumeJson = serde_json::from_value(j).unwrap();
        assert_eq!(VolumePolynomial::from_json(&back).unwrap(), v);
        let csv = v.to_csv(20);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("d1,d2,d3,d4,coeff,value"));
    }

    #[test]
    fn disc_and_trumpet_values() {
        assert!(rel(disc_partition(1.0, 0.0).unwrap(), 2726.966_496_826_969) < 1e-13);
        assert!(
            rel(
                disc_partition(1.3, 0.7).unwrap(),
                0.7f64.exp() * disc_partition(1.3, 0.0).unwrap()
            ) < 1e-14
        );
        assert!(disc_partition(0.0, 0.0).is_err());
        assert!(
            rel(
                disc_closed_form().evaluate(1.7, 0.2).unwrap(),
                disc_partition(1.7, 0.2).unwrap()
            ) < 1e-14
        );
        assert!(rel(trumpet(0.0, 1.0).unwrap(), 0.282_094_791_773_878_14) < 1e-15);
        assert!(rel(trumpet(2.0, 1.0).unwrap(), 0.103_776_874_355_148_68) < 1e-14);
        assert!(trumpet(1.0, -1.0).is_err());
        let (b, beta) = (1.7, 2.9);
        assert!(
            rel(
                trumpet(b, beta).unwrap(),
                trumpet(b / beta.sqrt(), 1.0).unwrap() / beta.sqrt()
            ) < 1e-14
        );
        let m = integrate(|b| b * (-b * b / 4.0).exp(), 0.0, 60.0, 1e-13, 0.0).unwrap();
        assert!(rel(m.value, 2.0) < 1e-12);
    }

    #[test]
    fn gluing_genus_one_closed_form() {
        let mut r = rec(1);
        let cf = gluing_closed_form(&volume_from_correlator(&r.compute(1, 1).unwrap())).unwrap();
        assert_eq!(cf.euler, -1);
        let want = vec![
            PartitionTerm {
                twice_beta_power: 1,
                coeff: ExactScalar::ratio(1, 12).shift_pi(2),
                has_exp_pi2_over_beta: false,
            },
            PartitionTerm {
                twice_beta_power: 3,
                coeff: ExactScalar::ratio(1, 12),
                has_exp_pi2_over_beta: false,
            },
        ];
        assert_eq!(cf.terms, want);
        let z1 = genus_partition_via_gluing(&mut r, 1, 1.0, 0.0).unwrap();
        assert!(rel(z1, 0.511_043_131_698_288_7) < 1e-14);
        let weighted = genus_partition_via_gluing(&mut r, 1, 1.0, 0.4).unwrap();
        assert!(rel(weighted, (-0.4f64).exp() * z1) < 1e-14);
        assert!(genus_partition_via_gluing(&mut r, 0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gluing_matches_numeric_twist_integral() {
        let mut r = rec(2);
        let v = volume_from_correlator(&r.compute(2, 1).unwrap());
        let beta = 0.8;
        let f = |b: f64| b * trumpet(b, beta).unwrap() * v.evaluate(&[b], 20).unwrap();
        let num = integrate(f, 0.0, 80.0, 1e-12, 0.0).unwrap().value;
        let exact = genus_partition_via_gluing(&mut r, 2, beta, 0.0).unwrap();
        assert!(rel(num, exact) < 1e-10);
    }

    #[test]
    fn pipelines_agree() {
        let mut r = rec(3);
        for g in 1..=3 {
            assert!(pipeline_ratio(&mut r, g).unwrap().is_one(), "g={g}");
            let a = genus_partition_via_gluing(&mut r, g, 1.4, 0.0).unwrap();
            let b = genus_partition_via_correlator(&mut r, g, 1.4, 0.0).unwrap();
            assert!(rel(a, b) < 1e-14);
        }
    }

    #[test]
    fn ratio_detects_mismatch() {
        let a = disc_closed_form();
        let mut b = a.clone();
        b.terms[0].coeff = ExactScalar::ratio(1, 2);
        assert_eq!(a.ratio_to(&b).unwrap(), ExactScalar::ratio(1, 2));
        b.terms.push(PartitionTerm {
            twice_beta_power: 1,
            coeff: ExactScalar::one(),
            has_exp_pi2_over_beta: true,
        });
        assert!(a.ratio_to(&b).is_err());
    }

    #[test]
    fn disc_quadrature() {
        for beta in [0.5, 1.0, 2.0] {
            let q = disc_partition_quadrature(beta, 1e-10).unwrap();
            assert!(
                rel(q.value, disc_partition(beta, 0.0).unwrap()) < 1e-9,
                "beta={beta}"
            );
        }
    }

    #[test]
    fn super_density_and_quadrature() {
        assert!(
            rel(
                super_disc_density(1.0, 0.0).unwrap(),
                120.528_388_981_021_77
            ) < 1e-14
        );
        let e = 1e-10;
        assert!(
            rel(
                super_disc_density(e, 0.0).unwrap() * e.sqrt(),
                std::f64::consts::SQRT_2 / PI
            ) < 1e-8
        );
        assert!(super_disc_density(0.0, 0.0).is_err());
        for beta in [0.3, 1.0, 4.0] {
            let a = super_disc_quadrature(beta, 1e-8).unwrap().value;
            let b = super_disc_quadrature(beta, 1e-12).unwrap().value;
            assert!(a.is_finite() && rel(a, b) < 1e-7);
            assert!(rel(b, super_disc_partition(beta, 0.0).unwrap()) < 1e-11);
        }
    }

    #[test]
    fn jt_volumes_positive_spot_check() {
        let mut r = rec(2);
        for (g, n) in [(1, 2), (2, 1), (0, 5), (1, 3)] {
            let v = volume_from_correlator(&r.compute(g, n).unwrap());
            for b in [0.0, 0.5, 3.0] {
                assert!(v.evaluate(&vec![b; n as usize], 20).unwrap() > 0.0);
            }
        }
    }
}
