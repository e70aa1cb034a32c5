//! Finite-N random-matrix laboratory.
//!
//! Normalizations (all ensembles weight eigenvalues by `exp(-N sum T)`):
//! - Gaussian Hermitian: `T(x) = 2x^2`; the large-N density is the
//!   semicircle `(2/pi) sqrt(1 - x^2)` on `[-1, 1]`. Sampled through the
//!   tridiagonal form of the unitary-class ensemble and the QL eigensolver.
//! - SUSY block: `Q = [[0, P], [P^dag, 0]]` with `P` an `(N + nu) x N` complex
//!   Gaussian block and `H = P^dag P / (4N)`, so `T(E) = 4E` and the
//!   large-N density is `(2/pi) sqrt((1 - E)/E)` on `(0, 1]`. Draws record
//!   the `N` non-zero eigenvalues; the `nu` exact zero modes of `P P^dag` are
//!   reported in `zero_modes`. The Gaussian case is sampled exactly through
//!   the bidiagonal (Laguerre) form; the `2N x 2N` Golub–Kahan tridiagonal
//!   of `Q` is diagonalized directly, giving the full signed `Q` spectrum.
//! - Polynomial potentials (Hermitian or SUSY) use Metropolis chains on the
//!   eigenvalues (or singular values of `P`, with Jacobian
//!   `prod (s_i^2 - s_j^2)^2 prod s_i^(2 nu + 1)`).
//!
//! Chains: `draws` are split evenly over `chains` (remainder to the first
//! chains); each chain runs `burn_in` sweeps with step-size adaptation
//! towards 30–50% acceptance, then freezes the step and records one draw
//! every `steps` sweeps. A sweep proposes one Gaussian move per eigenvalue.

mod rng;
mod sample;
mod stats;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{rational_to_f64, Rational};

pub use rng::{splitmix64, substream, LabRng};
pub use sample::{
    sample, sample_gaussian, sample_potential_metropolis, sample_susy, susy_q_spectrum,
};
pub use stats::{
    edge_slope, histogram_and_stats, lowest_decade_mass, BinSpec, HistogramStats, ReferenceDensity,
};
pub use tridiag::{count_below, tridiagonal_eigenvalues};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    GaussianHermitian,
    PolynomialPotential,
    SusyBlock,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-hermitian" | "gue" => Ok(EnsembleKind::GaussianHermitian),
            "polynomial-potential" | "potential" => Ok(EnsembleKind::PolynomialPotential),
            "susy-block" | "susy" => Ok(EnsembleKind::SusyBlock),
            _ => Err(Error::invalid(format!(
                "unknown ensemble kind {s:?} (gue|potential|susy)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub chains: u32,
    /// Sweeps between recorded draws.
    pub steps: u32,
    pub burn_in: u32,
    pub step_size: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            steps: 2,
            burn_in: 500,
            step_size: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub kind: EnsembleKind,
    /// Coefficients of `T`, lowest power first. Empty means Gaussian for the
    /// SUSY block; required for `polynomial-potential`.
    #[serde(with = "rational_list")]
    pub potential: Vec<Rational>,
    pub nu: u32,
    pub seed: u64,
    pub draws: usize,
    pub chain: ChainConfig,
}

mod rational_list {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|t| t.parse::<Rational>().map_err(serde::de::Error::custom))
            .collect()
    }
}

impl EnsembleConfig {
    pub fn gaussian(n: usize, seed: u64, draws: usize) -> Self {
        Self {
            n,
            kind: EnsembleKind::GaussianHermitian,
            potential: Vec::new(),
            nu: 0,
            seed,
            draws,
            chain: ChainConfig::default(),
        }
    }

    pub fn susy(n: usize, nu: u32, seed: u64, draws: usize) -> Self {
        Self {
            kind: EnsembleKind::SusyBlock,
            nu,
            ..Self::gaussian(n, seed, draws)
        }
    }

    pub fn potential(n: usize, potential: Vec<Rational>, seed: u64, draws: usize) -> Self {
        Self {
            kind: EnsembleKind::PolynomialPotential,
            potential,
            ..Self::gaussian(n, seed, draws)
        }
    }

    pub fn uses_metropolis(&self) -> bool {
        match self.kind {
            EnsembleKind::GaussianHermitian => false,
            EnsembleKind::PolynomialPotential => true,
            EnsembleKind::SusyBlock => !self.potential.is_empty(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("matrix size N must be at least 1"));
        }
        if self.draws == 0 {
            return Err(Error::invalid("draw count must be positive"));
        }
        if self.nu > 0 && self.kind != EnsembleKind::SusyBlock {
            return Err(Error::invalid(
                "index nu applies only to the susy-block ensemble",
            ));
        }
        let degree = self
            .potential
            .iter()
            .rposition(|c| *c != Rational::from_integer(0.into()));
        match self.kind {
            EnsembleKind::GaussianHermitian => {
                if !self.potential.is_empty() {
                    return Err(Error::invalid("gaussian-hermitian takes no potential"));
                }
            }
            EnsembleKind::PolynomialPotential => {
                let d = degree
                    .ok_or_else(|| Error::invalid("polynomial-potential needs a potential"))?;
                if d == 0 || d % 2 == 1 || self.potential[d] <= Rational::from_integer(0.into()) {
                    return Err(Error::invalid(
                        "potential is not confining: need even degree >= 2 with positive leading coefficient",
                    ));
                }
            }
            EnsembleKind::SusyBlock => {
                if let Some(d) = degree {
                    if d == 0 || self.potential[d] <= Rational::from_integer(0.into()) {
                        return Err(Error::invalid(
                            "susy potential T(E) is not confining: need degree >= 1 with positive leading coefficient",
                        ));
                    }
                } else if !self.potential.is_empty() {
                    return Err(Error::invalid("susy potential is identically zero"));
                }
            }
        }
        if self.uses_metropolis() {
            let c = &self.chain;
            if c.chains == 0 || c.steps == 0 {
                return Err(Error::invalid("chains and steps must be positive"));
            }
            if !(c.step_size.is_finite() && c.step_size > 0.0) {
                return Err(Error::invalid("step_size must be positive"));
            }
        }
        Ok(())
    }

    pub(crate) fn potential_f64(&self) -> Vec<f64> {
        self.potential.iter().map(rational_to_f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub config: EnsembleConfig,
    /// Each draw sorted ascending.
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: Option<f64>,
    /// Exact zero modes of `P P^dag` not listed in the draws.
    pub zero_modes: u32,
}

impl SampleBatch {
    pub fn pooled(&self) -> Vec<f64> {
        self.draws.iter().flatten().copied().collect()
    }

    /// One row per draw, eigenvalues ascending, `{:e}` round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for d in &self.draws {
            let row: Vec<String> = d.iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(EnsembleConfig::gaussian(0, 1, 1).validate().is_err());
        assert!(EnsembleConfig::gaussian(3, 1, 0).validate().is_err());
        let q = |v: &[i64]| {
            v.iter()
                .map(|&x| Rational::from_integer(x.into()))
                .collect::<Vec<_>>()
        };
        assert!(EnsembleConfig::potential(2, q(&[0, 0, 0, 0, 1]), 1, 1)
            .validate()
            .is_ok());
        assert!(EnsembleConfig::potential(2, q(&[0, 0, 0, 1]), 1, 1)
            .validate()
            .is_err());
        assert!(EnsembleConfig::potential(2, q(&[0, 0, -1]), 1, 1)
            .validate()
            .is_err());
        assert!(EnsembleConfig::potential(2, vec![], 1, 1)
            .validate()
            .is_err());
        let mut c = EnsembleConfig::potential(2, q(&[0, 0, 1]), 1, 1);
        c.chain.step_size = 0.0;
        assert!(c.validate().is_err());
        let mut s = EnsembleConfig::susy(3, 2, 1, 1);
        assert!(s.validate().is_ok());
        s.potential = q(&[0, 4]);
        assert!(s.validate().is_ok());
        s.potential = q(&[1]);
        assert!(s.validate().is_err());
        let mut g = EnsembleConfig::gaussian(3, 1, 1);
        g.nu = 1;
        assert!(g.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let q = |a: i64, b: i64| Rational::new(a.into(), b.into());
        let c = EnsembleConfig::potential(5, vec![q(0, 1), q(1, 3), q(2, 1)], 99, 10);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"polynomial-potential\"") && text.contains("\"1/3\""));
        let back: EnsembleConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
