//! Eigenvalues of real symmetric tridiagonal matrices by implicit-shift QL.

use crate::error::{Error, Result};

/// Eigenvalues (ascending) of the tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::invalid(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::invalid("tridiagonal QL iteration did not converge"));
            }
            // Wilkinson-type shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { coupling / q };
        if q == 0.0 {
            q = f64::EPSILON * (diag[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn second_difference_matrix() {
        let n = 50;
        let ev = tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - want).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn small_cases() {
        assert_eq!(tridiagonal_eigenvalues(&[3.5], &[]).unwrap(), vec![3.5]);
        let ev = tridiagonal_eigenvalues(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        assert!(tridiagonal_eigenvalues(&[1.0, 2.0], &[]).is_err());
        let ev = tridiagonal_eigenvalues(&[1.0, 2.0, 3.0], &[0.0, 0.0]).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
    }

    proptest! {
        #[test]
        fn matches_sturm_count_and_invariants(
            diag in prop::collection::vec(-5.0f64..5.0, 1..30),
            seed in prop::collection::vec(-3.0f64..3.0, 30),
        ) {
            let n = diag.len();
            let off: Vec<f64> = seed[..n - 1].to_vec();
            let ev = tridiagonal_eigenvalues(&diag, &off).unwrap();
            let trace: f64 = diag.iter().sum();
            prop_assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-9);
            let frob: f64 = diag.iter().map(|x| x * x).sum::<f64>()
                + 2.0 * off.iter().map(|x| x * x).sum::<f64>();
            prop_assert!((ev.iter().map(|x| x * x).sum::<f64>() - frob).abs() < 1e-8 * (1.0 + frob));
            for (k, v) in ev.iter().enumerate() {
                let lo = count_below(&diag, &off, v - 1e-7);
                let hi = count_below(&diag, &off, v + 1e-7);
                prop_assert!(lo <= k && k < hi);
            }
        }
    }
}
