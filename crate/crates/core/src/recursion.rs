//! Memoized topological recursion for curves with `x = z^2` and odd `y`.
//!
//! Correlators are stored as
//! `omega_{g,n} = sum c_{k_1..k_n} prod_i dz_i / z_i^(2 k_i + 2)`.
//! With the kernel `K(z0, z) = dz0 / (4 (z^2 - z0^2) y(z) dz)` and the
//! expansion `1/(z^2 - z0^2) = -sum_m z^(2m) / z0^(2m+2)` the recursion
//! collapses to
//!
//! ```text
//! c_{m, J} = Res_{z=0} [ 1/(4 y(z)) * z^(2m) * G_J(z) ]
//! ```
//!
//! where `G_J(z)` collects, for fixed output indices `J` on the remaining
//! legs, the sign-normalized coefficient of `-dz^2` in
//! `omega_{g-1,n+2}(z,-z,J) + sum' omega(z, I) omega(-z, J\I)`, including the
//! `omega_{0,2}` pairings `sum_m (m+1) z^m / z_j^(m+2)`. Odd `m` cancel
//! between `z` and `-z`, which is why only even pole orders ever appear.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::SpectralCurve;
use crate::error::{Error, Result};
use crate::ring::{ExactScalar, TruncSeries};

pub const MEMO_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CorrelatorKey {
    pub g: u32,
    pub n: u32,
}

impl CorrelatorKey {
    pub fn new(g: u32, n: u32) -> Result<Self> {
        if n == 0 || 2 * g + n <= 2 {
            return Err(Error::Unstable { g, n });
        }
        Ok(Self { g, n })
    }

    pub fn euler(&self) -> i64 {
        2 * self.g as i64 - 2 + self.n as i64
    }

    /// Largest total pole index `3g - 3 + n` allowed on a regular curve.
    pub fn max_degree(&self) -> u32 {
        3 * self.g + self.n - 3
    }
}

/// Symmetric table of pole coefficients, keyed by sorted multi-index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correlator {
    pub key: CorrelatorKey,
    pub curve: String,
    terms: BTreeMap<Vec<u32>, ExactScalar>,
}

impl Correlator {
    pub fn from_terms(
        key: CorrelatorKey,
        curve: impl Into<String>,
        terms: impl IntoIterator<Item = (Vec<u32>, ExactScalar)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (mut k, v) in terms {
            if k.len() != key.n as usize {
                return Err(Error::invalid(format!(
                    "multi-index {k:?} has wrong arity for n={}",
                    key.n
                )));
            }
            k.sort_unstable();
            if !v.is_zero() {
                map.insert(k, v);
            }
        }
        Ok(Self {
            key,
            curve: curve.into(),
            terms: map,
        })
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, ExactScalar> {
        &self.terms
    }

    /// Coefficient for any ordering of the indices.
    pub fn coeff(&self, idx: &[u32]) -> ExactScalar {
        let mut k = idx.to_vec();
        k.sort_unstable();
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    fn coeff_sorted(&self, k: &[u32]) -> Option<&ExactScalar> {
        self.terms.get(k)
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.iter().sum()).max()
    }

    /// Terms of maximal total degree only.
    pub fn leading_part(&self) -> BTreeMap<Vec<u32>, ExactScalar> {
        let Some(top) = self.max_total_degree() else {
            return BTreeMap::new();
        };
        self.terms
            .iter()
            .filter(|(k, _)| k.iter().sum::<u32>() == top)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    pub fn scaled(&self, s: &ExactScalar) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| (k.clone(), v * s))
            .filter(|(_, v)| !v.is_zero());
        Self {
            key: self.key,
            curve: self.curve.clone(),
            terms: terms.collect(),
        }
    }
}

/// Exact expansion of `1/(4 y(z))` around `z = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelExpansion {
    pub inverse_4y: TruncSeries,
}

impl KernelExpansion {
    /// Exclusive order: coefficients below it are exact.
    pub fn order(&self) -> i32 {
        self.inverse_4y.order()
    }
}

/// Expansion of `1/(4y)` known at least through `z^(max_order - 1)`.
pub fn kernel_coefficients(curve: &SpectralCurve, max_order: i32) -> Result<KernelExpansion> {
    let y = curve.y_series();
    let v = y
        .valuation()
        .ok_or_else(|| Error::invalid(format!("curve {} has y = 0", curve.id())))?;
    if v != 1 && v != -1 {
        return Err(Error::invalid(format!(
            "curve {} must have a simple zero or pole of y at z = 0, found z^{v}",
            curve.id()
        )));
    }
    // 1/(4y) of a series known to O(z^o) is known to O(z^(o - 2v))
    let needed = (max_order + 2 * v).max(v + 1);
    if y.order() < needed {
        return Err(Error::Truncation {
            required: needed - 1,
            available: y.order() - 1,
        });
    }
    let four_y = y.truncate(needed).scale(&ExactScalar::integer(4));
    let inverse_4y = four_y.reciprocal()?;
    debug_assert!(inverse_4y.order() >= max_order);
    Ok(KernelExpansion { inverse_4y })
}

/// Kernel order needed to produce `omega_{g,n}`: exponents up to `2D - 1`.
fn kernel_order_for(key: CorrelatorKey) -> i32 {
    2 * key.max_degree() as i32
}

/// Largest exponent of `y` that must be known to compute `omega_{g,n}`.
pub fn required_curve_order(curve: &SpectralCurve, g: u32, n: u32) -> Result<u32> {
    let key = CorrelatorKey::new(g, n)?;
    let v = curve.y_series().valuation().unwrap_or(1);
    Ok((kernel_order_for(key) + 2 * v - 1).max(3) as u32)
}

type Laurent = BTreeMap<i32, ExactScalar>;

fn laurent_add(acc: &mut Laurent, e: i32, c: &ExactScalar) {
    if c.is_zero() {
        return;
    }
    let slot = acc.entry(e).or_default();
    *slot += c;
    if slot.is_zero() {
        acc.remove(&e);
    }
}

fn laurent_mul_into(acc: &mut Laurent, a: &Laurent, b: &Laurent) {
    for (ea, ca) in a {
        for (eb, cb) in b {
            laurent_add(acc, ea + eb, &(ca * cb));
        }
    }
}

/// All sorted index vectors of length `len` with entries summing to at most `budget`.
fn sorted_indices(len: usize, budget: u32) -> Vec<Vec<u32>> {
    fn rec(len: usize, min: u32, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let left = (len - cur.len()) as u32;
        let mut k = min;
        // remaining entries are all >= k
        while k * left <= budget {
            cur.push(k);
            rec(len, k, budget - k, cur, out);
            cur.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    rec(len, 0, budget, &mut Vec::with_capacity(len), &mut out);
    out
}

/// Memo of correlators for a single curve.
pub struct Recursion {
    curve: SpectralCurve,
    kernel: Option<KernelExpansion>,
    memo: BTreeMap<CorrelatorKey, Arc<Correlator>>,
}

impl Recursion {
    pub fn new(curve: SpectralCurve) -> Self {
        Self {
            curve,
            kernel: None,
            memo: BTreeMap::new(),
        }
    }

    pub fn curve(&self) -> &SpectralCurve {
        &self.curve
    }

    pub fn get(&self, g: u32, n: u32) -> Option<&Correlator> {
        self.memo.get(&CorrelatorKey { g, n }).map(|c| c.as_ref())
    }

    pub fn entries(&self) -> impl Iterator<Item = &Correlator> {
        self.memo.values().map(|c| c.as_ref())
    }

    pub fn clear(&mut self) {
        self.memo.clear();
    }

    fn ensure_kernel(&mut self, order: i32) -> Result<KernelExpansion> {
        match &self.kernel {
            Some(k) if k.order() >= order => Ok(k.clone()),
            _ => {
                let k = kernel_coefficients(&self.curve, order)?;
                self.kernel = Some(k.clone());
                Ok(k)
            }
        }
    }

    /// `omega_{g,n}`, computing and caching every dependency first.
    pub fn compute(&mut self, g: u32, n: u32) -> Result<Arc<Correlator>> {
        let target = CorrelatorKey::new(g, n)?;
        if let Some(c) = self.memo.get(&target) {
            return Ok(c.clone());
        }
        let kernel = self.ensure_kernel(kernel_order_for(target))?;

        // every stable (g', n') reachable from the target, by increasing 2g-2+n
        let mut needed: BTreeSet<(i64, CorrelatorKey)> = BTreeSet::new();
        let mut stack = vec![target];
        while let Some(k) = stack.pop() {
            if self.memo.contains_key(&k) || !needed.insert((k.euler(), k)) {
                continue;
            }
            stack.extend(dependencies(k));
        }
        for (_, key) in needed {
            let c = compute_one(key, &kernel, &self.memo, self.curve.id())?;
            self.memo.insert(key, Arc::new(c));
        }
        Ok(self.memo[&target].clone())
    }

    /// `c_{m, J}` with the recursion's distinguished leg carrying `m` and
    /// the other legs carrying `others` in the given order. Used to verify
    /// symmetry independently of the canonical table.
    pub fn raw_coefficient(&mut self, g: u32, m: u32, others: &[u32]) -> Result<ExactScalar> {
        let key = CorrelatorKey::new(g, others.len() as u32 + 1)?;
        let kernel = self.ensure_kernel(kernel_order_for(key))?;
        for dep in dependencies(key) {
            self.compute(dep.g, dep.n)?;
        }
        let gj = g_series(key, others, &self.memo);
        Ok(residue(&kernel, m, &gj))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = MemoFile::from_engine(self);
        std::fs::write(path, serde_json::to_vec(&file)?)?;
        Ok(())
    }

    /// Replace the memo with the contents of `path`.
    pub fn load(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let file: MemoFile = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Persistence(format!("corrupt memo file: {e}")))?;
        if file.version != MEMO_VERSION {
            return Err(Error::Persistence(format!(
                "memo version {} unsupported (expected {MEMO_VERSION})",
                file.version
            )));
        }
        if file.curve != self.curve.id() {
            return Err(Error::Persistence(format!(
                "memo file is for curve '{}', engine curve is '{}'",
                file.curve,
                self.curve.id()
            )));
        }
        let mut memo = BTreeMap::new();
        for e in file.entries {
            let key =
                CorrelatorKey::new(e.g, e.n).map_err(|err| Error::Persistence(err.to_string()))?;
            let c = Correlator::from_terms(key, file.curve.clone(), e.terms)
                .map_err(|err| Error::Persistence(err.to_string()))?;
            memo.insert(key, Arc::new(c));
        }
        self.memo = memo;
        Ok(())
    }
}

/// Stable correlators one recursion step below `key`.
fn dependencies(key: CorrelatorKey) -> Vec<CorrelatorKey> {
    let mut out = Vec::new();
    let n = key.n - 1;
    if key.g >= 1 {
        if let Ok(k) = CorrelatorKey::new(key.g - 1, n + 2) {
            out.push(k);
        }
    }
    for g1 in 0..=key.g {
        for size in 0..=n {
            if let Ok(k) = CorrelatorKey::new(g1, size + 1) {
                if k != key {
                    out.push(k);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `A_K(z) = sum_k c_{(k, K)} z^(-2k-2)` for a stored correlator.
fn leg_series(c: &Correlator, rest: &[u32]) -> Laurent {
    let mut out = Laurent::new();
    let top = c.key.max_degree();
    let used: u32 = rest.iter().sum();
    if used > top {
        return out;
    }
    let mut idx: Vec<u32> = Vec::with_capacity(rest.len() + 1);
    for k in 0..=(top - used) {
        idx.clear();
        idx.push(k);
        idx.extend_from_slice(rest);
        idx.sort_unstable();
        if let Some(v) = c.coeff_sorted(&idx) {
            out.insert(-2 * k as i32 - 2, v.clone());
        }
    }
    out
}

fn sorted(v: &[u32]) -> Vec<u32> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

/// `G_J(z)` for output indices `others` on the non-distinguished legs.
fn g_series(
    key: CorrelatorKey,
    others: &[u32],
    memo: &BTreeMap<CorrelatorKey, Arc<Correlator>>,
) -> Laurent {
    let g = key.g;
    let n = others.len();
    let mut acc = Laurent::new();
    let get = |g: u32, n: usize| {
        memo.get(&CorrelatorKey { g, n: n as u32 })
            .expect("dependency computed")
    };

    // omega_{g-1, n+2}(z, -z, J)
    if g >= 1 {
        if g == 1 && n == 0 {
            // omega_{0,2}(z, -z) = -dz^2 / (4 z^2)
            laurent_add(&mut acc, -2, &ExactScalar::ratio(1, 4));
        } else {
            let c = get(g - 1, n + 2);
            let top = c.key.max_degree();
            let used: u32 = others.iter().sum();
            if used <= top {
                let mut idx = Vec::with_capacity(n + 2);
                for k in 0..=(top - used) {
                    for l in 0..=(top - used - k) {
                        idx.clear();
                        idx.push(k);
                        idx.push(l);
                        idx.extend_from_slice(others);
                        idx.sort_unstable();
                        if let Some(v) = c.coeff_sorted(&idx) {
                            laurent_add(&mut acc, -2 * (k + l) as i32 - 4, v);
                        }
                    }
                }
            }
        }
    }

    // stable products omega_{g1}(z, I) omega_{g2}(-z, J \ I)
    for mask in 0u32..(1 << n) {
        let (mut inside, mut outside) = (Vec::new(), Vec::new());
        for (j, &k) in others.iter().enumerate() {
            if mask & (1 << j) != 0 {
                inside.push(k);
            } else {
                outside.push(k);
            }
        }
        for g1 in 0..=g {
            let g2 = g - g1;
            let (Ok(k1), Ok(k2)) = (
                CorrelatorKey::new(g1, inside.len() as u32 + 1),
                CorrelatorKey::new(g2, outside.len() as u32 + 1),
            ) else {
                continue;
            };
            let a = leg_series(&memo[&k1], &sorted(&inside));
            if a.is_empty() {
                continue;
            }
            let b = leg_series(&memo[&k2], &sorted(&outside));
            laurent_mul_into(&mut acc, &a, &b);
        }
    }

    // omega_{0,2} pairings with leg j
    if g == 0 && n == 2 {
        // both factors unstable: omega_{0,2}(z, z1) omega_{0,2}(-z, z2) + swap.
        // Odd expansion orders give odd poles in z1, z2 and never reach the
        // residue, so only even ones are kept.
        let (p1, p2) = (others[0] as i32, others[1] as i32);
        let c = 2 * (2 * p1 + 1) * (2 * p2 + 1);
        laurent_add(&mut acc, 2 * (p1 + p2), &ExactScalar::integer(c as i64));
    } else if let Ok(k) = CorrelatorKey::new(g, n as u32) {
        let c = &memo[&k];
        for j in 0..n {
            let p = others[j];
            let mut rest: Vec<u32> = others
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, &v)| v)
                .collect();
            rest.sort_unstable();
            let weight = ExactScalar::integer(2 * (2 * p as i64 + 1));
            for (e, v) in leg_series(c, &rest) {
                laurent_add(&mut acc, e + 2 * p as i32, &(v * &weight));
            }
        }
    }
    acc
}

/// `Res_{z=0} (1/4y) z^(2m) G(z)`.
fn residue(kernel: &KernelExpansion, m: u32, gj: &Laurent) -> ExactScalar {
    let mut out = ExactScalar::zero();
    for (p, c) in gj {
        let e = -1 - 2 * m as i32 - p;
        if e < kernel.inverse_4y.low() {
            continue;
        }
        let k = kernel.inverse_4y.coeff(e);
        if !k.is_zero() {
            out += &(&k * c);
        }
    }
    out
}

fn compute_one(
    key: CorrelatorKey,
    kernel: &KernelExpansion,
    memo: &BTreeMap<CorrelatorKey, Arc<Correlator>>,
    curve_id: &str,
) -> Result<Correlator> {
    let top = key.max_degree();
    let rest_len = key.n as usize - 1;
    let targets = sorted_indices(rest_len, top);
    let computed: Vec<Vec<(Vec<u32>, ExactScalar)>> = targets
        .par_iter()
        .map(|others| {
            let gj = g_series(key, others, memo);
            let used: u32 = others.iter().sum();
            let m_max = others.first().copied().unwrap_or(top).min(top - used);
            (0..=m_max)
                .filter_map(|m| {
                    let v = residue(kernel, m, &gj);
                    if v.is_zero() {
                        return None;
                    }
                    let mut k = Vec::with_capacity(others.len() + 1);
                    k.push(m);
                    k.extend_from_slice(others);
                    Some((k, v))
                })
                .collect()
        })
        .collect();
    Correlator::from_terms(key, curve_id, computed.into_iter().flatten())
}

#[derive(Serialize, Deserialize)]
struct MemoEntry {
    g: u32,
    n: u32,
    terms: Vec<(Vec<u32>, ExactScalar)>,
}

/// Versioned on-disk memo:
/// `{"version":1,"curve":id,"entries":[{"g":..,"n":..,"terms":[[k-list, ExactScalar], ...]}]}`.
#[derive(Serialize, Deserialize)]
struct MemoFile {
    version: u32,
    curve: String,
    entries: Vec<MemoEntry>,
}

impl MemoFile {
    fn from_engine(r: &Recursion) -> Self {
        Self {
            version: MEMO_VERSION,
            curve: r.curve.id().to_string(),
            entries: r
                .memo
                .values()
                .map(|c| MemoEntry {
                    g: c.key.g,
                    n: c.key.n,
                    terms: c
                        .terms
                        .iter()
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Serializable view of a correlator for CLI output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelatorDump {
    pub g: u32,
    pub n: u32,
    pub curve: String,
    pub terms: Vec<(Vec<u32>, ExactScalar)>,
}

impl From<&Correlator> for CorrelatorDump {
    fn from(c: &Correlator) -> Self {
        Self {
            g: c.key.g,
            n: c.key.n,
            curve: c.curve.clone(),
            terms: c
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Rational;

    fn airy(n: i64, d: i64) -> Recursion {
        Recursion::new(SpectralCurve::airy(Rational::new(n.into(), d.into())).unwrap())
    }

    fn jt(order: u32) -> Recursion {
        Recursion::new(SpectralCurve::jt(order).unwrap())
    }

    #[test]
    fn kernel_airy_half() {
        let c = SpectralCurve::airy(Rational::new(1.into(), 2.into())).unwrap();
        let k = kernel_coefficients(&c, 6).unwrap();
        assert_eq!(k.inverse_4y.coeff(-1), ExactScalar::ratio(1, 2));
        for e in 0..6 {
            assert!(k.inverse_4y.coeff(e).is_zero());
        }
    }

    #[test]
    fn kernel_jt() {
        let c = SpectralCurve::jt(9).unwrap();
        let k = kernel_coefficients(&c, 6).unwrap();
        assert_eq!(k.inverse_4y.coeff(-1), ExactScalar::ratio(1, 2));
        assert_eq!(k.inverse_4y.coeff(1), ExactScalar::ratio(1, 3).shift_pi(2));
        // multiply back against 4y
        let back = c
            .y_series()
            .scale(&ExactScalar::integer(4))
            .mul(&k.inverse_4y);
        assert!(back.coeff(0).is_one());
        assert!((1..back.order()).all(|e| back.coeff(e).is_zero()));
    }

    #[test]
    fn kernel_super() {
        let c = SpectralCurve::jt_super(9).unwrap();
        let k = kernel_coefficients(&c, 8).unwrap();
        // 1/(4y) = -(sqrt2/8) z (1 + 2 pi^2 z^2 + ...)
        assert_eq!(k.inverse_4y.valuation(), Some(1));
        assert_eq!(
            k.inverse_4y.coeff(1),
            -ExactScalar::sqrt2().scale(&Rational::new(1.into(), 8.into()))
        );
        let back = c
            .y_series()
            .scale(&ExactScalar::integer(4))
            .mul(&k.inverse_4y);
        assert!(back.coeff(0).is_one());
        assert!((1..back.order()).all(|e| back.coeff(e).is_zero()));
    }

    #[test]
    fn kernel_truncation_error_names_order() {
        let c = SpectralCurve::jt(5).unwrap();
        match kernel_coefficients(&c, 12) {
            Err(Error::Truncation {
                required,
                available,
            }) => {
                assert_eq!(required, 13);
                assert_eq!(available, 5);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        let mut r = Recursion::new(c);
        assert!(matches!(r.compute(2, 1), Err(Error::Truncation { .. })));
    }

    #[test]
    fn unstable_rejected() {
        let mut r = jt(9);
        assert!(matches!(r.compute(0, 2), Err(Error::Unstable { .. })));
        assert!(matches!(r.compute(0, 1), Err(Error::Unstable { .. })));
        assert!(matches!(r.compute(1, 0), Err(Error::Unstable { .. })));
    }

    #[test]
    fn omega_03_jt() {
        let mut r = jt(9);
        let w = r.compute(0, 3).unwrap();
        assert_eq!(w.terms().len(), 1);
        assert!(w.coeff(&[0, 0, 0]).is_one());
    }

    #[test]
    fn omega_11_airy() {
        // slope 1/2 is the leading term of the JT curve; omega_{1,1} scales as 1/slope
        let w = airy(1, 2).compute(1, 1).unwrap();
        assert_eq!(w.coeff(&[1]), ExactScalar::ratio(1, 8));
        assert_eq!(w.terms().len(), 1);
        let w = airy(1, 1).compute(1, 1).unwrap();
        assert_eq!(w.coeff(&[1]), ExactScalar::ratio(1, 16));
    }

    #[test]
    fn omega_11_jt() {
        let w = jt(9).compute(1, 1).unwrap();
        assert_eq!(w.coeff(&[1]), ExactScalar::ratio(1, 8));
        assert_eq!(w.coeff(&[0]), ExactScalar::ratio(1, 12).shift_pi(2));
        assert_eq!(w.terms().len(), 2);
    }

    #[test]
    fn omega_04_jt() {
        let w = jt(9).compute(0, 4).unwrap();
        assert_eq!(w.coeff(&[0, 0, 0, 1]), ExactScalar::integer(3));
        assert_eq!(w.coeff(&[0, 0, 0, 0]), ExactScalar::integer(2).shift_pi(2));
        assert_eq!(w.terms().len(), 2);
    }

    #[test]
    fn symmetric_under_leg_choice() {
        let mut r = jt(17);
        for (g, n) in [(0u32, 4u32), (1, 2), (0, 5), (1, 3)] {
            let w = r.compute(g, n).unwrap();
            for (k, v) in w.terms().clone() {
                // put each leg in the distinguished slot, others reversed
                for j in 0..k.len() {
                    let mut rest: Vec<u32> = k
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != j)
                        .map(|(_, &x)| x)
                        .collect();
                    rest.reverse();
                    assert_eq!(
                        r.raw_coefficient(g, k[j], &rest).unwrap(),
                        v,
                        "({g},{n}) {k:?} leg {j}"
                    );
                }
            }
        }
    }

    #[test]
    fn jt_degree_is_exact() {
        let mut r = jt(17);
        for (g, n) in [(0u32, 3u32), (0, 4), (0, 5), (1, 1), (1, 2), (2, 1), (1, 3)] {
            let w = r.compute(g, n).unwrap();
            assert_eq!(w.max_total_degree(), Some(3 * g + n - 3), "({g},{n})");
        }
    }

    #[test]
    fn leading_terms_match_airy() {
        let mut j = jt(17);
        let mut a = airy(1, 2);
        for (g, n) in [
            (0u32, 3u32),
            (0, 4),
            (0, 5),
            (0, 6),
            (1, 1),
            (1, 2),
            (1, 3),
            (1, 4),
            (2, 1),
            (2, 2),
            (3, 1),
        ] {
            if 2 * g + n > 6 {
                continue;
            }
            let lead = j.compute(g, n).unwrap().leading_part();
            let ai = a.compute(g, n).unwrap();
            assert_eq!(&lead, ai.terms(), "({g},{n})");
        }
    }

    #[test]
    fn clear_then_recompute_is_identical() {
        let mut r = jt(13);
        let first = (*r.compute(2, 1).unwrap()).clone();
        r.clear();
        assert!(r.get(2, 1).is_none());
        assert_eq!(*r.compute(2, 1).unwrap(), first);
    }

    #[test]
    fn memo_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("memo.json");
        let mut r = jt(13);
        r.compute(2, 1).unwrap();
        r.save(&path).unwrap();
        let mut fresh = jt(13);
        fresh.load(&path).unwrap();
        let a: Vec<_> = r.entries().cloned().collect();
        let b: Vec<_> = fresh.entries().cloned().collect();
        assert_eq!(a, b);
        // wrong curve
        let mut other = Recursion::new(SpectralCurve::jt_super(9).unwrap());
        assert!(matches!(other.load(&path), Err(Error::Persistence(_))));
        // wrong version and corrupt file
        let text =
            std::fs::read_to_string(&path)
                .unwrap()
                .replacen("\"version\":1", "\"version\":7", 1);
        std::fs::write(&path, text).unwrap();
        assert!(matches!(fresh.load(&path), Err(Error::Persistence(_))));
        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(fresh.load(&path), Err(Error::Persistence(_))));
    }

    #[test]
    fn sorted_index_enumeration() {
        assert_eq!(sorted_indices(0, 3), vec![Vec::<u32>::new()]);
        assert_eq!(sorted_indices(2, 1), vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(sorted_indices(3, 3).len(), 7);
    }
}
