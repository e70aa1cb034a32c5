use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SampleBatch;
use crate::error::{Error, Result};
use crate::quad::integrate;

const CDF_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum ReferenceDensity {
    /// `(2/pi) sqrt(1 - x^2)` on `[-1, 1]`.
    Semicircle,
    /// Centered normal law.
    Gaussian {
        variance: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `(2/pi) sqrt((1 - E)/E)` on `(0, 1]`.
    HardEdge,
    /// `1 / (2 sqrt E)` on `(0, 1]`.
    InverseSqrt,
}

impl std::str::FromStr for ReferenceDensity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semicircle" => Ok(Self::Semicircle),
            "hard-edge" => Ok(Self::HardEdge),
            "inverse-sqrt" => Ok(Self::InverseSqrt),
            _ => Err(Error::invalid(format!(
                "unknown reference density {s:?} (semicircle|hard-edge|inverse-sqrt)"
            ))),
        }
    }
}

impl ReferenceDensity {
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Self::Semicircle => {
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    2.0 / PI * (1.0 - x * x).sqrt()
                }
            }
            Self::Gaussian { variance } => {
                (-x * x / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
            }
            Self::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Self::HardEdge => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    2.0 / PI * ((1.0 - x) / x).sqrt()
                }
            }
            Self::InverseSqrt => {
                if x <= 0.0 || x > 1.0 {
                    0.0
                } else {
                    0.5 / x.sqrt()
                }
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Semicircle => (-1.0, 1.0),
            Self::Gaussian { variance } => {
                let w = 40.0 * variance.sqrt();
                (-w, w)
            }
            Self::Uniform { lo, hi } => (lo, hi),
            Self::HardEdge | Self::InverseSqrt => (0.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { variance } if !(variance > 0.0 && variance.is_finite()) => {
                Err(Error::invalid("reference variance must be positive"))
            }
            Self::Uniform { lo, hi } if !(lo < hi) => Err(Error::invalid("empty uniform support")),
            _ => Ok(()),
        }
    }

    /// Probability mass of `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            return Ok(0.0);
        }
        let r = match self {
            // sqrt-type edges at 0 (and 1): integrate in u = sqrt(E)
            Self::HardEdge => {
                // (2/pi) sqrt(1 - u^2) * 2 du
                let f = |u: f64| 4.0 / PI * (1.0 - u * u).max(0.0).sqrt();
                integrate(f, a.sqrt(), b.sqrt(), CDF_TOL, 1e-15)?
            }
            Self::InverseSqrt => return Ok(b.sqrt() - a.sqrt()),
            Self::Semicircle => {
                // x = sin(t)
                let f = |t: f64| 2.0 / PI * t.cos() * t.cos();
                integrate(f, a.asin(), b.asin(), CDF_TOL, 1e-15)?
            }
            _ => integrate(|x| self.density(x), a, b, CDF_TOL, 1e-15)?,
        };
        Ok(r.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinSpec {
    /// Equal bins over the observed range.
    Auto(usize),
    /// Equal bins over `[lo, hi]`, extended by whole bins to cover the data.
    Range { lo: f64, hi: f64, bins: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramStats {
    pub edges: Vec<f64>,
    /// Normalized so that `sum density_k * width_k = 1`.
    pub density: Vec<f64>,
    pub ks_statistic: Option<f64>,
    /// Largest `|density_k - bin average of the reference|`.
    pub sup_distance: Option<f64>,
    pub edge_slope: Option<f64>,
    pub samples: usize,
}

impl HistogramStats {
    /// Plot-ready `center,density` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("center,density\n");
        for (k, d) in self.density.iter().enumerate() {
            let c = 0.5 * (self.edges[k] + self.edges[k + 1]);
            out.push_str(&format!("{c:e},{d:e}\n"));
        }
        out
    }
}

fn kolmogorov_smirnov(sorted: &[f64], reference: &ReferenceDensity) -> Result<f64> {
    let n = sorted.len() as f64;
    let (lo, _) = reference.support();
    let mut cdf = 0.0;
    let mut prev = lo;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        if x > prev {
            cdf += reference.mass(prev, x)?;
            prev = x;
        }
        let f = cdf.min(1.0);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Least-squares slope of `ln rho` against `ln E` on log-spaced bins
/// covering `ln E in [ln_lo, ln_hi]`; `rho` is normalized by `total`.
pub fn edge_slope(
    samples: &[f64],
    total: usize,
    ln_lo: f64,
    ln_hi: f64,
    bins: usize,
) -> Result<f64> {
    if !(ln_lo < ln_hi) || bins < 3 {
        return Err(Error::invalid(
            "edge fit needs ln_lo < ln_hi and at least 3 bins",
        ));
    }
    let w = (ln_hi - ln_lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &e in samples {
        if e > 0.0 {
            let l = e.ln();
            if l >= ln_lo && l < ln_hi {
                counts[(((l - ln_lo) / w) as usize).min(bins - 1)] += 1;
            }
        }
    }
    let mut pts = Vec::new();
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            let a = (ln_lo + k as f64 * w).exp();
            let b = (ln_lo + (k + 1) as f64 * w).exp();
            let rho = c as f64 / (total as f64 * (b - a));
            pts.push((0.5 * (a.ln() + b.ln()), rho.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::invalid("too few populated bins for the edge fit"));
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let sy: f64 = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - sx) * (p.1 - sy)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - sx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Fraction of recorded eigenvalues in `(0, edge / 10]`.
pub fn lowest_decade_mass(batch: &SampleBatch, edge: f64) -> f64 {
    let pooled = batch.pooled();
    let hits = pooled
        .iter()
        .filter(|&&e| e > 0.0 && e <= edge / 10.0)
        .count();
    hits as f64 / pooled.len() as f64
}

/// Histogram of all pooled eigenvalues, with optional KS / sup-distance
/// against `reference` and an optional edge-slope fit on `ln E` range.
pub fn histogram_and_stats(
    batch: &SampleBatch,
    reference: Option<ReferenceDensity>,
    bins: BinSpec,
    edge_fit: Option<(f64, f64)>,
) -> Result<HistogramStats> {
    let mut pooled = batch.pooled();
    if pooled.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if pooled.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("batch contains non-finite eigenvalues"));
    }
    pooled.sort_by(f64::total_cmp);
    let (min, max) = (pooled[0], pooled[pooled.len() - 1]);
    let (mut lo, mut hi, count) = match bins {
        BinSpec::Auto(k) => (min, max, k),
        BinSpec::Range { lo, hi, bins } => (lo, hi, bins),
    };
    if count == 0 || !(hi > lo) {
        return Err(Error::invalid("zero-width bins"));
    }
    let width = (hi - lo) / count as f64;
    let mut count = count;
    while min < lo {
        lo -= width;
        count += 1;
    }
    while max > hi {
        hi += width;
        count += 1;
    }
    let edges: Vec<f64> = (0..=count).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0usize; count];
    for &x in &pooled {
        counts[(((x - lo) / width) as usize).min(count - 1)] += 1;
    }
    let total = pooled.len() as f64;
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let (ks_statistic, sup_distance) = match reference {
        Some(r) => {
            r.validate()?;
            let ks = kolmogorov_smirnov(&pooled, &r)?;
            let mut sup: f64 = 0.0;
            for k in 0..count {
                let avg = r.mass(edges[k], edges[k + 1])? / width;
                sup = sup.max((density[k] - avg).abs());
            }
            (Some(ks), Some(sup))
        }
        None => (None, None),
    };
    let edge_slope = match edge_fit {
        Some((a, b)) => Some(edge_slope(&pooled, pooled.len(), a, b, 16)?),
        None => None,
    };
    Ok(HistogramStats {
        edges,
        density,
        ks_statistic,
        sup_distance,
        edge_slope,
        samples: pooled.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_lab::{substream, EnsembleConfig};
    use rand::Rng;

    fn batch_of(values: Vec<f64>) -> SampleBatch {
        SampleBatch {
            config: EnsembleConfig::gaussian(1, 0, 1),
            draws: vec![values],
            acceptance_rate: None,
            zero_modes: 0,
        }
    }

    #[test]
    fn references_normalized() {
        for r in [
            ReferenceDensity::Semicircle,
            ReferenceDensity::HardEdge,
            ReferenceDensity::InverseSqrt,
            ReferenceDensity::Gaussian { variance: 0.3 },
            ReferenceDensity::Uniform { lo: -1.0, hi: 2.0 },
        ] {
            let (a, b) = r.support();
            assert!((r.mass(a, b).unwrap() - 1.0).abs() < 1e-8, "{r:?}");
        }
        // plain quadrature of the semicircle density, no substitution
        let q = integrate(
            |x| ReferenceDensity::Semicircle.density(x),
            -1.0,
            1.0,
            1e-10,
            0.0,
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn uniform_ks_shrinks() {
        let mut rng = substream(1, 0);
        let mut last = f64::INFINITY;
        for n in [100, 10_000, 400_000] {
            let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let s = histogram_and_stats(
                &batch_of(v),
                Some(ReferenceDensity::Uniform { lo: 0.0, hi: 1.0 }),
                BinSpec::Auto(10),
                None,
            )
            .unwrap();
            let ks = s.ks_statistic.unwrap();
            assert!(ks < 1.8 / (n as f64).sqrt() && ks < last);
            last = ks;
        }
    }

    #[test]
    fn histogram_integrates_to_one_and_covers() {
        let v = vec![-2.0, -0.5, 0.0, 0.1, 0.2, 3.0];
        let s = histogram_and_stats(
            &batch_of(v),
            None,
            BinSpec::Range {
                lo: -1.0,
                hi: 1.0,
                bins: 4,
            },
            None,
        )
        .unwrap();
        let w = s.edges[1] - s.edges[0];
        assert!((s.density.iter().sum::<f64>() * w - 1.0).abs() < 1e-12);
        assert!(s.edges[0] <= -2.0 && *s.edges.last().unwrap() >= 3.0);
        assert_eq!(s.to_csv().lines().count(), s.density.len() + 1);
    }

    #[test]
    fn errors() {
        assert!(histogram_and_stats(&batch_of(vec![]), None, BinSpec::Auto(3), None).is_err());
        assert!(
            histogram_and_stats(&batch_of(vec![1.0, 1.0]), None, BinSpec::Auto(3), None).is_err()
        );
        assert!(histogram_and_stats(
            &batch_of(vec![1.0]),
            None,
            BinSpec::Range {
                lo: 0.0,
                hi: 2.0,
                bins: 0
            },
            None
        )
        .is_err());
    }

    #[test]
    fn synthetic_inverse_sqrt_slope() {
        let mut rng = substream(2, 0);
        let v: Vec<f64> = (0..200_000).map(|_| rng.gen::<f64>().powi(2)).collect();
        let slope = edge_slope(&v, v.len(), -6.0, -2.0, 16).unwrap();
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
        let s = histogram_and_stats(
            &batch_of(v),
            Some(ReferenceDensity::InverseSqrt),
            BinSpec::Auto(20),
            Some((-6.0, -2.0)),
        )
        .unwrap();
        assert_eq!(s.edge_slope, Some(slope));
        assert!(s.ks_statistic.unwrap() < 0.01);
    }
}
