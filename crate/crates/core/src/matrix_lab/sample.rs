use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use super::rng::{substream, LabRng};
use super::tridiag::tridiagonal_eigenvalues;
use super::{EnsembleConfig, EnsembleKind, SampleBatch};
use crate::error::{Error, Result};

fn chi(rng: &mut LabRng, dof: f64) -> f64 {
    ChiSquared::new(dof)
        .expect("positive degrees of freedom")
        .sample(rng)
        .sqrt()
}

fn normal(rng: &mut LabRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Dispatches on the ensemble kind.
pub fn sample(config: &EnsembleConfig) -> Result<SampleBatch> {
    match config.kind {
        EnsembleKind::GaussianHermitian => sample_gaussian(config),
        EnsembleKind::PolynomialPotential => sample_potential_metropolis(config),
        EnsembleKind::SusyBlock => sample_susy(config),
    }
}

fn gaussian_draw(n: usize, rng: &mut LabRng) -> Result<Vec<f64>> {
    // diagonal N(0, 2), off-diagonal chi_{2(n-1-i)}, all divided by sqrt 2
    let scale = 1.0 / (2.0 * (n as f64).sqrt() * std::f64::consts::SQRT_2);
    let diag: Vec<f64> = (0..n)
        .map(|_| normal(rng) * std::f64::consts::SQRT_2 * scale)
        .collect();
    let off: Vec<f64> = (0..n - 1)
        .map(|i| chi(rng, 2.0 * (n - 1 - i) as f64) * scale)
        .collect();
    tridiagonal_eigenvalues(&diag, &off)
}

pub fn sample_gaussian(config: &EnsembleConfig) -> Result<SampleBatch> {
    config.validate()?;
    if config.kind != EnsembleKind::GaussianHermitian {
        return Err(Error::invalid(
            "sample_gaussian needs kind gaussian-hermitian",
        ));
    }
    let draws = (0..config.draws)
        .into_par_iter()
        .map(|d| gaussian_draw(config.n, &mut substream(config.seed, d as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        config: config.clone(),
        draws,
        acceptance_rate: None,
        zero_modes: 0,
    })
}

/// Laguerre bidiagonal of the `(N + nu) x N` complex Gaussian block:
/// diagonal `chi_{2(N+nu-i)}/sqrt 2`, sub-diagonal `chi_{2(N-1-i)}/sqrt 2`.
fn laguerre_bidiagonal(n: usize, nu: u32, rng: &mut LabRng) -> (Vec<f64>, Vec<f64>) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let a: Vec<f64> = (0..n)
        .map(|i| chi(rng, 2.0 * (n + nu as usize - i) as f64) * r)
        .collect();
    let b: Vec<f64> = (0..n - 1)
        .map(|i| chi(rng, 2.0 * (n - 1 - i) as f64) * r)
        .collect();
    (a, b)
}

/// Golub–Kahan form of `Q`: zero diagonal, off-diagonal `a0, b0, a1, b1, ..`.
fn q_eigenvalues(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut off = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        off.push(a[i]);
        if i + 1 < n {
            off.push(b[i]);
        }
    }
    tridiagonal_eigenvalues(&vec![0.0; 2 * n], &off)
}

/// Signed spectrum of `Q / sqrt(4N)` for each draw of a Gaussian SUSY
/// config (same streams as [`sample_susy`]), including `nu` zero modes.
pub fn susy_q_spectrum(config: &EnsembleConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    if config.kind != EnsembleKind::SusyBlock || config.uses_metropolis() {
        return Err(Error::invalid(
            "Q spectrum needs a Gaussian susy-block config",
        ));
    }
    let norm = 1.0 / (4.0 * config.n as f64).sqrt();
    (0..config.draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = substream(config.seed, d as u64);
            let (a, b) = laguerre_bidiagonal(config.n, config.nu, &mut rng);
            let mut q: Vec<f64> = q_eigenvalues(&a, &b)?
                .into_iter()
                .map(|x| x * norm)
                .collect();
            q.extend(std::iter::repeat_n(0.0, config.nu as usize));
            q.sort_by(f64::total_cmp);
            Ok(q)
        })
        .collect()
}

pub fn sample_susy(config: &EnsembleConfig) -> Result<SampleBatch> {
    config.validate()?;
    if config.kind != EnsembleKind::SusyBlock {
        return Err(Error::invalid("sample_susy needs kind susy-block"));
    }
    if config.uses_metropolis() {
        return run_chains(config, Gas::Susy);
    }
    let n = config.n;
    let norm = 1.0 / (4.0 * n as f64);
    let draws = (0..config.draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = substream(config.seed, d as u64);
            let (a, b) = laguerre_bidiagonal(n, config.nu, &mut rng);
            let q = q_eigenvalues(&a, &b)?;
            // the upper half of the symmetric Q spectrum are the singular values
            let mut e: Vec<f64> = q[n..].iter().map(|s| s * s * norm).collect();
            e.sort_by(f64::total_cmp);
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        config: config.clone(),
        draws,
        acceptance_rate: None,
        zero_modes: config.nu,
    })
}

pub fn sample_potential_metropolis(config: &EnsembleConfig) -> Result<SampleBatch> {
    config.validate()?;
    if config.kind != EnsembleKind::PolynomialPotential {
        return Err(Error::invalid(
            "sample_potential_metropolis needs kind polynomial-potential",
        ));
    }
    run_chains(config, Gas::Hermitian)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Gas {
    /// State: eigenvalues x; weight prod (x_i - x_j)^2 exp(-N sum T(x)).
    Hermitian,
    /// State: singular values s > 0 of P / sqrt(4N) scale; E = s^2.
    Susy,
}

struct Chain<'a> {
    gas: Gas,
    n: usize,
    nu: u32,
    t: &'a [f64],
    x: Vec<f64>,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

impl Chain<'_> {
    fn init(&mut self) {
        let n = self.n as f64;
        self.x = (0..self.n)
            .map(|i| match self.gas {
                Gas::Hermitian => -1.0 + (2 * i + 1) as f64 / n,
                Gas::Susy => ((i as f64 + 0.5) / n).sqrt(),
            })
            .collect();
    }

    /// Log-weight change from moving coordinate `i` to `y`.
    fn delta(&self, i: usize, y: f64) -> f64 {
        let n = self.n as f64;
        let xi = self.x[i];
        match self.gas {
            Gas::Hermitian => {
                let mut d = -n * (poly(self.t, y) - poly(self.t, xi));
                for (j, &xj) in self.x.iter().enumerate() {
                    if j != i {
                        d += 2.0 * ((y - xj).abs().ln() - (xi - xj).abs().ln());
                    }
                }
                d
            }
            Gas::Susy => {
                if y <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let (y2, x2) = (y * y, xi * xi);
                let mut d = -n * (poly(self.t, y2) - poly(self.t, x2));
                d += (2 * self.nu + 1) as f64 * (y.ln() - xi.ln());
                for (j, &xj) in self.x.iter().enumerate() {
                    if j != i {
                        let s2 = xj * xj;
                        d += 2.0 * ((y2 - s2).abs().ln() - (x2 - s2).abs().ln());
                    }
                }
                d
            }
        }
    }

    fn sweep(&mut self, rng: &mut LabRng, step: f64) -> usize {
        let mut accepted = 0;
        for i in 0..self.n {
            let y = self.x[i] + step * normal(rng);
            let d = self.delta(i, y);
            if d >= 0.0 || rng.gen::<f64>().ln() < d {
                self.x[i] = y;
                accepted += 1;
            }
        }
        accepted
    }

    fn observe(&self) -> Vec<f64> {
        let mut v: Vec<f64> = match self.gas {
            Gas::Hermitian => self.x.clone(),
            Gas::Susy => self.x.iter().map(|s| s * s).collect(),
        };
        v.sort_by(f64::total_cmp);
        v
    }
}

const ADAPT_WINDOW: u32 = 25;

fn run_chain(
    config: &EnsembleConfig,
    gas: Gas,
    t: &[f64],
    chain: u32,
    count: usize,
) -> (Vec<Vec<f64>>, usize, usize) {
    let cc = &config.chain;
    let mut rng = substream(config.seed, chain as u64);
    let mut state = Chain {
        gas,
        n: config.n,
        nu: config.nu,
        t,
        x: Vec::new(),
    };
    state.init();
    let mut step = cc.step_size;
    let mut window = 0;
    for sweep in 1..=cc.burn_in {
        window += state.sweep(&mut rng, step);
        if sweep % ADAPT_WINDOW == 0 {
            let rate = window as f64 / (ADAPT_WINDOW as usize * config.n) as f64;
            if rate < 0.3 {
                step *= 0.8;
            } else if rate > 0.5 {
                step *= 1.25;
            }
            window = 0;
        }
    }
    let mut draws = Vec::with_capacity(count);
    let mut accepted = 0;
    let mut proposed = 0;
    for _ in 0..count {
        for _ in 0..cc.steps {
            accepted += state.sweep(&mut rng, step);
            proposed += config.n;
        }
        draws.push(state.observe());
    }
    (draws, accepted, proposed)
}

fn run_chains(config: &EnsembleConfig, gas: Gas) -> Result<SampleBatch> {
    let t = config.potential_f64();
    let chains = config.chain.chains as usize;
    let per = config.draws / chains;
    let extra = config.draws % chains;
    let results: Vec<_> = (0..chains)
        .into_par_iter()
        .map(|c| run_chain(config, gas, &t, c as u32, per + usize::from(c < extra)))
        .collect();
    let mut draws = Vec::with_capacity(config.draws);
    let (mut acc, mut prop) = (0usize, 0usize);
    for (d, a, p) in results {
        draws.extend(d);
        acc += a;
        prop += p;
    }
    let zero_modes = if gas == Gas::Susy { config.nu } else { 0 };
    let rate = if prop == 0 {
        0.0
    } else {
        acc as f64 / prop as f64
    };
    Ok(SampleBatch {
        config: config.clone(),
        draws,
        acceptance_rate: Some(rate),
        zero_modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Rational;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter()
            .map(|&x| Rational::from_integer(x.into()))
            .collect()
    }

    fn mean_var(x: &[f64]) -> (f64, f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v, (v / n).sqrt())
    }

    #[test]
    fn scalar_gaussian() {
        let b = sample_gaussian(&EnsembleConfig::gaussian(1, 3, 20_000)).unwrap();
        let (m, v, se) = mean_var(&b.pooled());
        assert!(m.abs() < 3.0 * se);
        // T = 2x^2 gives variance 1/4
        assert!((v - 0.25).abs() < 0.01);
    }

    #[test]
    fn determinism_and_sorting() {
        let c = EnsembleConfig::gaussian(30, 11, 16);
        let a = sample_gaussian(&c).unwrap();
        let b = sample_gaussian(&c).unwrap();
        assert_eq!(a, b);
        assert!(a
            .draws
            .iter()
            .all(|d| d.windows(2).all(|w| w[0] <= w[1]) && d.len() == 30));
        let mut m = EnsembleConfig::potential(4, q(&[0, 0, 0, 0, 1]), 5, 40);
        m.chain.burn_in = 50;
        let x = sample_potential_metropolis(&m).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let y = pool.install(|| sample_potential_metropolis(&m)).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.draws.len(), 40);
    }

    #[test]
    fn gaussian_symmetry() {
        let b = sample_gaussian(&EnsembleConfig::gaussian(40, 8, 100)).unwrap();
        let (m, _, se) = mean_var(&b.pooled());
        assert!(m.abs() < 3.0 * se);
    }

    #[test]
    fn metropolis_scalar_gaussian_law() {
        // N = 1, T = x^2: density exp(-x^2), variance 1/2
        let mut c = EnsembleConfig::potential(1, q(&[0, 0, 1]), 21, 10_000);
        c.chain.steps = 3;
        let b = sample_potential_metropolis(&c).unwrap();
        let stats = crate::matrix_lab::histogram_and_stats(
            &b,
            Some(crate::matrix_lab::ReferenceDensity::Gaussian { variance: 0.5 }),
            crate::matrix_lab::BinSpec::Auto(30),
            None,
        )
        .unwrap();
        assert!(
            stats.ks_statistic.unwrap() <= 0.05,
            "{:?}",
            stats.ks_statistic
        );
        let rate = b.acceptance_rate.unwrap();
        assert!((0.2..0.7).contains(&rate), "rate {rate}");
    }

    #[test]
    fn metropolis_matches_gaussian_sampler() {
        let n = 8;
        let g = sample_gaussian(&EnsembleConfig::gaussian(n, 4, 4000)).unwrap();
        let mut c = EnsembleConfig::potential(n, q(&[0, 0, 2]), 4, 4000);
        c.chain.steps = 5;
        let m = sample_potential_metropolis(&c).unwrap();
        for moment in [2, 4] {
            let per_draw = |b: &SampleBatch| -> Vec<f64> {
                b.draws
                    .iter()
                    .map(|d| d.iter().map(|x| x.powi(moment)).sum::<f64>() / n as f64)
                    .collect()
            };
            let (ma, _, sa) = mean_var(&per_draw(&g));
            let (mb, _, sb) = mean_var(&per_draw(&m));
            // chain draws are correlated; inflate the standard error
            let se = (sa * sa + 4.0 * sb * sb).sqrt();
            assert!(
                (ma - mb).abs() < 3.0 * se,
                "moment {moment}: {ma} vs {mb} (se {se})"
            );
        }
    }

    #[test]
    fn susy_routes_agree() {
        let c = EnsembleConfig::susy(12, 2, 9, 5);
        let b = sample_susy(&c).unwrap();
        assert_eq!(b.zero_modes, 2);
        let qs = susy_q_spectrum(&c).unwrap();
        for (d, q) in b.draws.iter().zip(&qs) {
            assert_eq!(q.len(), 2 * 12 + 2);
            for k in 0..q.len() {
                assert!((q[k] + q[q.len() - 1 - k]).abs() < 1e-12);
            }
            let mut e: Vec<f64> = q.iter().filter(|x| **x > 0.0).map(|x| x * x).collect();
            e.sort_by(f64::total_cmp);
            for (x, y) in e.iter().zip(d) {
                assert!((x - y).abs() < 1e-12 * (1.0 + y));
            }
        }
        // W = B B^T has the same spectrum
        let mut rng = substream(9, 0);
        let (a, bb) = laguerre_bidiagonal(12, 2, &mut rng);
        let diag: Vec<f64> = (0..12)
            .map(|i| a[i] * a[i] + if i > 0 { bb[i - 1].powi(2) } else { 0.0 })
            .collect();
        let off: Vec<f64> = (0..11).map(|i| a[i] * bb[i]).collect();
        let w = tridiagonal_eigenvalues(&diag, &off).unwrap();
        for (x, y) in w.iter().zip(&b.draws[0]) {
            assert!((x / 48.0 - y).abs() < 1e-10 * (1.0 + y));
        }
    }

    #[test]
    fn susy_metropolis_matches_direct() {
        let n = 6;
        let direct = sample_susy(&EnsembleConfig::susy(n, 1, 2, 4000)).unwrap();
        let mut c = EnsembleConfig::susy(n, 1, 2, 4000);
        c.potential = q(&[0, 4]);
        c.chain.steps = 5;
        let chain = sample_susy(&c).unwrap();
        assert!(chain.draws.iter().flatten().all(|e| *e > 0.0));
        let mean = |b: &SampleBatch| -> Vec<f64> {
            b.draws
                .iter()
                .map(|d| d.iter().sum::<f64>() / n as f64)
                .collect()
        };
        let (ma, _, sa) = mean_var(&mean(&direct));
        let (mb, _, sb) = mean_var(&mean(&chain));
        let se = (sa * sa + 4.0 * sb * sb).sqrt();
        assert!((ma - mb).abs() < 3.0 * se, "{ma} vs {mb}");
        // <E> = N(N+nu)/(4N * N) per eigenvalue for the Gaussian block
        let exact = (n + 1) as f64 / (4.0 * n as f64);
        assert!((ma - exact).abs() < 3.0 * sa);
    }

    #[test]
    fn wrong_kind_rejected() {
        let g = EnsembleConfig::gaussian(3, 1, 1);
        assert!(sample_susy(&g).is_err());
        assert!(sample_potential_metropolis(&g).is_err());
        assert!(susy_q_spectrum(&g).is_err());
    }
}
